//! The randomized invariant battery behind `mmse props`.
//!
//! Each case draws a fresh random scenario (2–6 atoms, 2–4 vertices) and
//! runs every library-level invariant against it: the sublinear-operator
//! axioms, the conditioning-transform identity, solver certificates, and
//! the exhaustive oracles. Deterministic for a fixed seed — perturbations
//! use a dedicated stream offset so they never collide with the scenario
//! generator's streams.

use crate::Config;
use mmse::ambiguity::{g_transform, mix, rho, MixtureWeights};
use mmse::oracle::{grid_maximize_g, mixture_identity_check};
use mmse::scenarios::random_scenario;
use mmse::solver::{solve_mmse, uniqueness_probe, verify_saddle};
use mmse::space::{cond_expectation, expectation, Measure, RandomVariable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const PROPERTIES: &[&str] = &[
    "rho monotone",
    "rho constant-preserving",
    "rho sub-additive",
    "rho positively homogeneous",
    "rho dominates mixtures",
    "conditioning transform identity",
    "solver converges",
    "duality gap within tolerance",
    "saddle certificate",
    "estimator measurable",
    "uniqueness probe",
    "grid oracle agreement",
    "mixture variance identity",
];

/// Stream offset for the battery's own perturbation draws; the scenario
/// generator uses streams `index` and `index + 0x5CEA_A105`, so this keeps
/// the two families of draws independent.
const PERTURBATION_STREAM: u64 = 0xC11_BA77;

#[derive(Clone, Copy, PartialEq)]
enum Outcome {
    Pass,
    Fail,
    Skip,
}

pub(crate) struct BatteryOutcome {
    /// Formatted per-property table, one line per property.
    pub table: String,
    /// Total number of failing property checks across all cases.
    pub failures: usize,
    pub property_count: usize,
}

pub(crate) fn run_battery(
    cases: usize,
    inject_bug: bool,
    cfg: &Config,
) -> Result<BatteryOutcome, mmse::Error> {
    let indices: Vec<u64> = (0..cases as u64).collect();
    let per_case: Result<Vec<Vec<Outcome>>, mmse::Error> = if cfg.parallel {
        indices
            .par_iter()
            .map(|&i| run_case(i, inject_bug, cfg))
            .collect()
    } else {
        indices.iter().map(|&i| run_case(i, inject_bug, cfg)).collect()
    };
    let per_case = per_case?;

    let mut pass = vec![0usize; PROPERTIES.len()];
    let mut fail = vec![0usize; PROPERTIES.len()];
    let mut skip = vec![0usize; PROPERTIES.len()];
    for outcomes in &per_case {
        for (i, outcome) in outcomes.iter().enumerate() {
            match outcome {
                Outcome::Pass => pass[i] += 1,
                Outcome::Fail => fail[i] += 1,
                Outcome::Skip => skip[i] += 1,
            }
        }
    }

    let mut table = format!("{:<34}{:>6}{:>6}{:>6}\n", "property", "pass", "fail", "skip");
    for (i, name) in PROPERTIES.iter().enumerate() {
        table.push_str(&format!(
            "{:<34}{:>6}{:>6}{:>6}\n",
            name, pass[i], fail[i], skip[i]
        ));
    }
    Ok(BatteryOutcome {
        table,
        failures: fail.iter().sum(),
        property_count: PROPERTIES.len(),
    })
}

fn run_case(index: u64, inject_bug: bool, cfg: &Config) -> Result<Vec<Outcome>, mmse::Error> {
    let sc = random_scenario(cfg.seed, index, 2..=6, 2..=4);
    let xi = sc.xi();
    let a = sc.ambiguity();
    let c = sc.partition();
    let space = sc.space();
    let k = a.vertex_count();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index.wrapping_add(PERTURBATION_STREAM));

    let scale = 1.0 + xi.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let (rho_xi, _) = rho(xi, a)?;
    let mut out = Vec::with_capacity(PROPERTIES.len());

    // rho monotone: xi <= zeta pointwise implies rho(xi) <= rho(zeta).
    let zeta = RandomVariable::new(
        xi.values()
            .iter()
            .map(|v| v + rng.gen_range(0.0..2.0))
            .collect(),
    )?;
    let (rho_zeta, _) = rho(&zeta, a)?;
    out.push(check(rho_xi <= rho_zeta + 1e-12 * scale));

    // rho constant-preserving: rho(c * 1) = c.
    let cval: f64 = rng.gen_range(-5.0..5.0);
    let constant = RandomVariable::constant(space.atom_count(), cval)?;
    let (rho_const, _) = rho(&constant, a)?;
    out.push(check((rho_const - cval).abs() <= 1e-12 * (1.0 + cval.abs())));

    // rho sub-additive: rho(xi + zeta) <= rho(xi) + rho(zeta). The hidden
    // bug-injection mode inverts this single check so a full run must fail,
    // proving the harness actually gates on its checks.
    let zeta2 = RandomVariable::new(
        xi.values()
            .iter()
            .map(|_| rng.gen_range(-3.0..3.0))
            .collect(),
    )?;
    let sum = RandomVariable::new(
        xi.values()
            .iter()
            .zip(zeta2.values())
            .map(|(x, z)| x + z)
            .collect(),
    )?;
    let (rho_sum, _) = rho(&sum, a)?;
    let (rho_zeta2, _) = rho(&zeta2, a)?;
    let subadditive = rho_sum <= rho_xi + rho_zeta2 + 1e-12 * (scale + 4.0);
    out.push(check(if inject_bug { !subadditive } else { subadditive }));

    // rho positively homogeneous at 0.5 and 3.
    let mut homogeneous = true;
    for lambda in [0.5, 3.0] {
        let scaled = RandomVariable::new(xi.values().iter().map(|v| lambda * v).collect())?;
        let (rho_scaled, _) = rho(&scaled, a)?;
        homogeneous &= (rho_scaled - lambda * rho_xi).abs() <= 1e-10 * scale * lambda.max(1.0);
    }
    out.push(check(homogeneous));

    // rho dominates every mixture expectation.
    let w = random_mixture(k, &mut rng)?;
    let p_mix = mix(a, &w)?;
    out.push(check(expectation(xi, &p_mix)? <= rho_xi + 1e-12 * scale));

    // Conditioning transform identity on every vertex:
    // E_{transformed P}[xi] = E_{P0}[E_P[xi | C]].
    let p0 = Measure::new(space, space.base_weights().to_vec())?;
    let mut transform_ok = true;
    for p in a.vertices() {
        let transformed = g_transform(space, p, c)?;
        let lhs = expectation(xi, &transformed)?;
        let rhs = expectation(&cond_expectation(xi, p, c)?, &p0)?;
        transform_ok &= (lhs - rhs).abs() <= 1e-12 * scale;
    }
    out.push(check(transform_ok));

    // Solver certificates.
    let sol = solve_mmse(xi, a, c, cfg.tol, cfg.max_iter)?;
    out.push(check(sol.converged));
    out.push(check(sol.gap >= -1e-12 && sol.gap <= cfg.tol));
    let saddle = verify_saddle(xi, a, c, &sol, cfg.tol.max(1e-8))?;
    out.push(check(saddle.pass));
    out.push(check(sol.eta_hat.is_measurable(c)));

    // Multi-start agreement: the estimator is unique even when the
    // worst-case mixture is not.
    let probe = uniqueness_probe(xi, a, c, cfg.tol, 4, cfg.seed ^ index)?;
    out.push(check(probe.eta_unique && probe.all_converged));

    // Exhaustive grid over the mixture simplex (desk scale only).
    if k <= 3 {
        let step = 1e-2;
        let grid = grid_maximize_g(xi, a, c, step)?;
        let upper_ok = grid.best_value <= sol.alpha + cfg.tol + 1e-9;
        let lower_ok = sol.alpha - grid.best_value <= 200.0 * step * step + 1e-9;
        out.push(check(upper_ok && lower_ok));
    } else {
        out.push(Outcome::Skip);
    }

    // Mixture variance decomposition identity on two random hull points.
    let p1 = mix(a, &random_mixture(k, &mut rng)?)?;
    let p2 = mix(a, &random_mixture(k, &mut rng)?)?;
    let lambda = rng.gen_range(0.05..0.95);
    let residual = mixture_identity_check(xi, &p1, &p2, c, lambda)?;
    out.push(check(residual <= 1e-10));

    debug_assert_eq!(out.len(), PROPERTIES.len());
    Ok(out)
}

fn check(ok: bool) -> Outcome {
    if ok {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

/// A random interior mixture whose weights sum to exactly 1.0: the last
/// coordinate absorbs the rounding residual, which is exact because the
/// partial sum lies in [0, 1] where `1 - x` is computed without error.
fn random_mixture(k: usize, rng: &mut ChaCha8Rng) -> Result<MixtureWeights, mmse::Error> {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.2..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|x| x / total).collect();
    let partial: f64 = w[..k - 1].iter().sum();
    w[k - 1] = (1.0 - partial).max(0.0);
    MixtureWeights::new(w)
}
