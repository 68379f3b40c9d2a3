//! Acceptance suite: nine end-to-end criteria covering exact reproduction
//! of the built-in scenarios, oracle equivalence, certificate soundness,
//! the operator axioms, uniqueness, separation of the two conditional
//! notions, and byte-level determinism.
//!
//! Each criterion is one test that prints a single `[PASS]` line with its
//! runtime (visible with `--nocapture`; the test name itself carries the
//! verdict otherwise). Failures carry enough context to diagnose offline.

use mmse::ambiguity::{mix, rho, AmbiguitySet, MixtureWeights};
use mmse::oracle::{brute_force_estimate, grid_maximize_g, mixture_identity_check};
use mmse::scenarios::{
    backward_recursion, conditional_sublinear, example_41, example_42_truncated, example_43_tree,
    independent_scenario, random_pasting_scenario, random_scenario, io,
};
use mmse::solver::{solve_mmse, solve_mmse_from, uniqueness_probe, verify_saddle};
use mmse::space::{
    cond_expectation, expectation, Measure, Partition, RandomVariable, SampleSpace,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

const SEED: u64 = 42;

fn span(xi: &RandomVariable) -> f64 {
    let lo = xi.values().iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xi.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

/// Smallest block mass over all vertices and blocks: the strong-convexity
/// modulus of the mean-square objective in the estimator coordinates.
fn min_block_mass(a: &AmbiguitySet, c: &Partition) -> f64 {
    let mut m = f64::INFINITY;
    for p in a.vertices() {
        for block in c.blocks() {
            let mass: f64 = block.iter().map(|&i| p.weights()[i]).sum();
            m = m.min(mass);
        }
    }
    m
}

fn random_mixture(k: usize, rng: &mut ChaCha8Rng) -> MixtureWeights {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.2..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|x| x / total).collect();
    let partial: f64 = w[..k - 1].iter().sum();
    w[k - 1] = (1.0 - partial).max(0.0);
    MixtureWeights::new(w).expect("normalized weights are valid")
}

/// Left side of the mixture variance decomposition, computed from raw
/// weights only: `E_{P_lambda}[(xi - l1*eta1 - l2*eta2)^2]` with the
/// blockwise convex coefficients `l1 = lambda*m1/m_lambda`.
fn identity_left(
    xi: &RandomVariable,
    space: &SampleSpace,
    p1: &Measure,
    p2: &Measure,
    c: &Partition,
    lambda: f64,
) -> f64 {
    let blend: Vec<f64> = p1
        .weights()
        .iter()
        .zip(p2.weights())
        .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
        .collect();
    let p = Measure::new(space, blend).expect("convex blend of equivalent measures");
    let eta1 = cond_expectation(xi, p1, c).expect("conditioning");
    let eta2 = cond_expectation(xi, p2, c).expect("conditioning");

    let mut total = 0.0;
    for block in c.blocks() {
        let m1: f64 = block.iter().map(|&i| p1.weights()[i]).sum();
        let m2: f64 = block.iter().map(|&i| p2.weights()[i]).sum();
        let ml = lambda * m1 + (1.0 - lambda) * m2;
        let l1 = lambda * m1 / ml;
        let l2 = (1.0 - lambda) * m2 / ml;
        for &i in block {
            let estimate = l1 * eta1.values()[i] + l2 * eta2.values()[i];
            let d = xi.values()[i] - estimate;
            total += p.weights()[i] * d * d;
        }
    }
    total
}

#[test]
fn criterion_1_two_point_exact_reproduction() {
    let start = Instant::now();
    let sc = example_41();
    let sol = solve_mmse(sc.xi(), sc.ambiguity(), sc.partition(), 1e-9, 100_000)
        .expect("two-point scenario solves");
    for &v in sol.eta_hat.values() {
        assert!((v - 4.0).abs() <= 1e-9, "eta_hat = {v}, want 4 +- 1e-9");
    }
    for &w in sol.w_hat.weights() {
        assert!((w - 0.5).abs() <= 1e-6, "w_hat component {w}, want 0.5 +- 1e-6");
    }
    assert!((sol.alpha - 4.0).abs() <= 1e-9, "alpha = {}, want 4 +- 1e-9", sol.alpha);
    let (rho_xi, _) = rho(sc.xi(), sc.ambiguity()).expect("rho");
    assert!(
        (rho_xi - 14.0 / 3.0).abs() <= 1e-12,
        "rho(xi) = {rho_xi}, want 14/3 +- 1e-12"
    );

    // The same scenario shipped as a reference file loads and solves
    // identically.
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/ex41.json");
    let loaded = io::load_scenario(path).expect("shipped reference file loads");
    let sol2 = solve_mmse(loaded.xi(), loaded.ambiguity(), loaded.partition(), 1e-9, 100_000)
        .expect("loaded scenario solves");
    assert!((sol2.eta_hat.values()[0] - 4.0).abs() <= 1e-9);

    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 0.1,
        "runtime budget exceeded: {elapsed:?} >= 0.1 s"
    );
    println!(
        "[PASS] criterion 1: two-point scenario reproduced exactly (eta=4, w=(0.5,0.5), alpha=4, rho=14/3) in {elapsed:?}"
    );
}

#[test]
fn criterion_2_geometric_tails_series_and_stationarity() {
    let start = Instant::now();
    let n = 40;
    let (sc, closure) = example_42_truncated(n).expect("truncation level 40 is supported");

    // The worst-case mean equals the truncated series and is attained at
    // the second vertex. The series is recomputed here from scratch.
    let mut series = 2.0 / 3.0;
    for m in 2..=n {
        let m_f = m as f64;
        series += (2.0 / 3.0_f64.powi(m as i32)) * (2.0_f64.powi(m as i32) / m_f.powi(4));
    }
    let (rho_xi, attained_at) = rho(sc.xi(), sc.ambiguity()).expect("rho");
    assert!(
        (rho_xi - series).abs() <= 1e-12,
        "rho = {rho_xi}, truncated series = {series}, |diff| = {:e}",
        (rho_xi - series).abs()
    );
    assert_eq!(attained_at, 1, "worst-case mean must be attained at the second vertex");

    // Sign condition: the raw mean gap -1/6 + sum ... is negative.
    let mut mean_gap = -1.0 / 6.0;
    for m in 2..=n {
        let m_f = m as f64;
        mean_gap += (0.5_f64.powi(m as i32) - 2.0 / 3.0_f64.powi(m as i32))
            * (2.0_f64.powi(m as i32) / m_f.powi(4));
    }
    assert!(mean_gap < 0.0, "sign condition failed: mean gap = {mean_gap}");
    assert!(
        (mean_gap - closure.mean_gap_raw).abs() <= 1e-12,
        "closure disagrees with direct evaluation"
    );

    // Stationarity: either the solver's mixture weight matches the
    // closed-form lambda*, or the discrepancy is logged and the solver's
    // answer carries the certificate while the closed form is infeasible.
    let sol = solve_mmse(sc.xi(), sc.ambiguity(), sc.partition(), 1e-9, 100_000).expect("solves");
    let saddle = verify_saddle(sc.xi(), sc.ambiguity(), sc.partition(), &sol, 1e-8)
        .expect("verification runs");
    let lambda_hat = sol.w_hat.weights()[0];
    if (lambda_hat - closure.lambda_star).abs() <= 1e-5 {
        println!(
            "[info] criterion 2: solver lambda agrees with closed form ({lambda_hat} vs {})",
            closure.lambda_star
        );
    } else {
        // Discrepancy branch. The closed-form candidate must actually be
        // infeasible, and the solver must hold a certificate.
        let formula_feasible =
            closure.lambda_feasible && closure.p_nonneg && closure.p_mass_feasible;
        assert!(
            !formula_feasible,
            "solver and closed form disagree (lambda_hat = {lambda_hat}, lambda* = {}) \
             yet the closed-form candidate is feasible — that would be a solver bug",
            closure.lambda_star
        );
        assert!(sol.converged && sol.gap <= 1e-9, "solver certificate: gap = {:e}", sol.gap);
        assert!(saddle.pass, "saddle certificate must pass");
        println!(
            "[info] criterion 2: logged discrepancy — closed-form lambda* = {} lies outside [0,1] \
             (candidate weights: nonneg = {}, mass feasible = {}), a boundary optimum the interior \
             stationarity system cannot describe; the solver's lambda_hat = {lambda_hat} carries a \
             duality-gap certificate of {:e}",
            closure.lambda_star, closure.p_nonneg, closure.p_mass_feasible, sol.gap
        );
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "runtime budget exceeded: {elapsed:?} >= 5 s");
    println!(
        "[PASS] criterion 2: geometric-tails series matches rho to {:e}, sign condition negative, \
         stationarity outcome logged, in {elapsed:?}",
        (rho_xi - series).abs()
    );
}

#[test]
fn criterion_3_oracle_equivalence_on_random_scenarios() {
    let start = Instant::now();
    let steps = [1e-2, 5e-3, 2.5e-3];
    for i in 0..50u64 {
        let sc = random_scenario(SEED, i, 2..=4, 2..=3);
        let (xi, a, c) = (sc.xi(), sc.ambiguity(), sc.partition());
        let sol = solve_mmse(xi, a, c, 1e-9, 100_000).expect("random scenario solves");
        assert!(sol.converged, "scenario {i} did not converge");

        // Grid search must never beat the solver (beyond tolerance), and
        // its deficit must shrink quadratically with the step.
        let mut deficits = [0.0_f64; 3];
        for (s, &step) in steps.iter().enumerate() {
            let grid = grid_maximize_g(xi, a, c, step).expect("grid oracle runs");
            assert!(
                grid.best_value <= sol.alpha + 1e-9,
                "scenario {i}: grid ({step}) found {} above solver alpha {}",
                grid.best_value,
                sol.alpha
            );
            deficits[s] = (sol.alpha - grid.best_value).max(0.0);
        }
        let c1 = deficits[0] / (steps[0] * steps[0]);
        let c2 = deficits[1] / (steps[1] * steps[1]);
        let fitted = c1.max(c2);
        assert!(
            deficits[2] <= (4.0 * fitted * steps[2] * steps[2]).max(1e-9),
            "scenario {i}: deficit did not shrink quadratically: d = {deficits:?}, \
             fitted C = ({c1}, {c2})"
        );

        // Brute force: the inner maximum is exact (linear in the measure,
        // so the lattice corners dominate); the only error source is the
        // estimator lattice, and the value deficit converts to an estimator
        // distance through the strong-convexity modulus min_block_mass.
        let h = (span(xi) / 40.0).max(1e-3);
        let (eta_bf, v_bf) = brute_force_estimate(xi, a, c, h, 0.25).expect("brute force runs");
        let m_min = min_block_mass(a, c);
        assert!(
            v_bf >= sol.alpha - 1e-9,
            "scenario {i}: brute-force value {v_bf} below alpha {}",
            sol.alpha
        );
        let value_band = span(xi) * h + h * h / 4.0 + 1e-6;
        assert!(
            v_bf <= sol.alpha + value_band,
            "scenario {i}: brute-force value {v_bf} exceeds alpha {} + {value_band}",
            sol.alpha
        );
        let d_inf = eta_bf
            .values()
            .iter()
            .zip(sol.eta_hat.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0_f64, f64::max);
        let eta_band = ((v_bf - sol.alpha).max(0.0) / m_min).sqrt() + 1e-6;
        assert!(
            d_inf <= eta_band,
            "scenario {i}: brute-force estimator off by {d_inf}, band {eta_band} \
             (value deficit {:e}, modulus {m_min})",
            v_bf - sol.alpha
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "runtime budget exceeded: {elapsed:?} >= 60 s");
    println!(
        "[PASS] criterion 3: grid and brute-force oracles agree with the solver on 50 random \
         scenarios at steps 1e-2/5e-3/2.5e-3 in {elapsed:?}"
    );
}

#[test]
fn criterion_4_saddle_certificates_on_random_scenarios() {
    let start = Instant::now();
    for i in 0..100u64 {
        let sc = random_scenario(SEED, 10_000 + i, 2..=6, 2..=4);
        let (xi, a, c) = (sc.xi(), sc.ambiguity(), sc.partition());
        let sol = solve_mmse(xi, a, c, 1e-9, 100_000).expect("solves");
        assert!(sol.converged && sol.gap <= 1e-9, "scenario {i}: gap = {:e}", sol.gap);
        let saddle = verify_saddle(xi, a, c, &sol, 1e-8).expect("verification runs");
        assert!(
            saddle.pass && saddle.left_margin >= -1e-8 && saddle.right_margin >= -1e-8,
            "scenario {i}: saddle failed (left {:e}, right {:e})",
            saddle.left_margin,
            saddle.right_margin
        );
    }
    let elapsed = start.elapsed();
    println!(
        "[PASS] criterion 4: saddle certificates pass with margins >= -1e-8 and gap <= 1e-9 \
         on 100 random scenarios in {elapsed:?}"
    );
}

#[test]
fn criterion_5_mixture_identity_and_optimal_measures() {
    let start = Instant::now();

    // 1000 randomized tuples: the decomposition holds to 1e-10.
    let mut worst = 0.0_f64;
    for i in 0..1000u64 {
        let sc = random_scenario(SEED, 20_000 + i, 2..=6, 2..=4);
        let k = sc.ambiguity().vertex_count();
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        rng.set_stream(i.wrapping_add(0xACC_E55));
        let p1 = mix(sc.ambiguity(), &random_mixture(k, &mut rng)).expect("mixture");
        let p2 = mix(sc.ambiguity(), &random_mixture(k, &mut rng)).expect("mixture");
        let lambda = rng.gen_range(0.05..0.95);
        let residual = mixture_identity_check(sc.xi(), &p1, &p2, sc.partition(), lambda)
            .expect("identity check runs");
        worst = worst.max(residual);
        assert!(residual <= 1e-10, "tuple {i}: residual {residual:e} exceeds 1e-10");
    }

    // When both measures are solver-certified optimal, the left side of the
    // decomposition cannot drop below alpha: the blended estimator is
    // feasible for the inner minimum and G is concave.
    let sc = example_41();
    let sol = solve_mmse(sc.xi(), sc.ambiguity(), sc.partition(), 1e-9, 100_000).expect("solves");
    let p_hat = mix(sc.ambiguity(), &sol.w_hat).expect("mixture");
    for lambda in [0.25, 0.5, 0.75] {
        let left = identity_left(sc.xi(), sc.space(), &p_hat, &p_hat, sc.partition(), lambda);
        assert!(
            left >= sol.alpha - 1e-8,
            "two-point: left side {left} dropped below alpha {}",
            sol.alpha
        );
    }

    // A scenario with a non-unique worst-case mixture provides two distinct
    // certified-optimal measures.
    let sc = independent_scenario();
    let (xi, a, c) = (sc.xi(), sc.ambiguity(), sc.partition());
    let k = a.vertex_count();
    let mut optimal = Vec::new();
    for j in 0..k {
        let sol_j = solve_mmse_from(xi, a, c, &MixtureWeights::vertex(k, j), 1e-9, 100_000)
            .expect("solves from vertex start");
        let saddle = verify_saddle(xi, a, c, &sol_j, 1e-8).expect("verification runs");
        assert!(sol_j.converged && saddle.pass, "start {j} must certify");
        optimal.push((mix(a, &sol_j.w_hat).expect("mixture"), sol_j.alpha));
    }
    let alpha = optimal[0].1;
    for (pa, _) in &optimal {
        for (pb, _) in &optimal {
            let left = identity_left(xi, sc.space(), pa, pb, c, 0.5);
            assert!(
                left >= alpha - 1e-8,
                "independent-blocks: left side {left} below alpha {alpha}"
            );
        }
    }

    let elapsed = start.elapsed();
    println!(
        "[PASS] criterion 5: mixture decomposition residual <= 1e-10 on 1000 tuples \
         (worst {worst:e}); left side >= alpha - 1e-8 for certified-optimal measures; in {elapsed:?}"
    );
}

#[test]
fn criterion_6_conditional_operator_axioms_on_stable_scenarios() {
    let start = Instant::now();
    for i in 0..200u64 {
        let (sc, _filtration) = random_pasting_scenario(SEED, i);
        let (xi, a, c) = (sc.xi(), sc.ambiguity(), sc.partition());
        let space = sc.space();
        let n = space.atom_count();
        let levels = std::slice::from_ref(c);
        let e_xi = &conditional_sublinear(xi, a, levels).expect("operator runs")[0];

        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        rng.set_stream(i.wrapping_add(0x9A5_71E));

        // i) monotone: xi <= zeta pointwise implies E(xi|C) <= E(zeta|C).
        let zeta = RandomVariable::new(
            xi.values().iter().map(|v| v + rng.gen_range(0.0..2.0)).collect(),
        )
        .unwrap();
        let e_zeta = &conditional_sublinear(&zeta, a, levels).expect("operator runs")[0];
        for (x, z) in e_xi.values().iter().zip(e_zeta.values()) {
            assert!(x <= &(z + 1e-7), "scenario {i}: monotonicity failed ({x} > {z})");
        }

        // ii) measurable-preserving: a C-measurable payoff is its own
        // conditional sublinear expectation (constants are the special case
        // of the trivial partition).
        let mut measurable = vec![0.0; n];
        for block in c.blocks() {
            let value = rng.gen_range(-3.0..3.0);
            for &idx in block {
                measurable[idx] = value;
            }
        }
        let eta = RandomVariable::new(measurable).unwrap();
        let e_eta = &conditional_sublinear(&eta, a, levels).expect("operator runs")[0];
        for (x, y) in e_eta.values().iter().zip(eta.values()) {
            assert!(
                (x - y).abs() <= 1e-7,
                "scenario {i}: measurable payoff not preserved ({x} vs {y})"
            );
        }

        // iii) sub-additive blockwise.
        let zeta2 =
            RandomVariable::new(xi.values().iter().map(|_| rng.gen_range(-3.0..3.0)).collect())
                .unwrap();
        let sum = RandomVariable::new(
            xi.values().iter().zip(zeta2.values()).map(|(x, z)| x + z).collect(),
        )
        .unwrap();
        let e_sum = &conditional_sublinear(&sum, a, levels).expect("operator runs")[0];
        let e_zeta2 = &conditional_sublinear(&zeta2, a, levels).expect("operator runs")[0];
        for ((s, x), z) in e_sum.values().iter().zip(e_xi.values()).zip(e_zeta2.values()) {
            assert!(
                *s <= x + z + 1e-7,
                "scenario {i}: sub-additivity failed ({s} > {x} + {z})"
            );
        }

        // iv) homogeneity: positive lambda scales through; negative lambda
        // routes through E(lambda xi|C) = (-lambda) E(-xi|C).
        let minus_xi = RandomVariable::new(xi.values().iter().map(|v| -v).collect()).unwrap();
        let e_minus = &conditional_sublinear(&minus_xi, a, levels).expect("operator runs")[0];
        for lambda in [-2.0, -1.0, 0.5, 3.0] {
            let scaled =
                RandomVariable::new(xi.values().iter().map(|v| lambda * v).collect()).unwrap();
            let e_scaled = &conditional_sublinear(&scaled, a, levels).expect("operator runs")[0];
            for (idx, s) in e_scaled.values().iter().enumerate() {
                let reference = if lambda >= 0.0 {
                    lambda * e_xi.values()[idx]
                } else {
                    -lambda * e_minus.values()[idx]
                };
                assert!(
                    (s - reference).abs() <= 1e-7,
                    "scenario {i}: homogeneity failed at lambda {lambda} ({s} vs {reference})"
                );
            }
        }

        // Tower identity through the conditional-reference transform, on
        // every vertex: E_transformed[xi] = E_P0[E_P[xi|C]].
        let p0 = Measure::new(space, space.base_weights().to_vec()).unwrap();
        for p in a.vertices() {
            let transformed = mmse::ambiguity::g_transform(space, p, c).expect("transform");
            let lhs = expectation(xi, &transformed).unwrap();
            let rhs = expectation(&cond_expectation(xi, p, c).unwrap(), &p0).unwrap();
            assert!(
                (lhs - rhs).abs() <= 1e-12,
                "scenario {i}: transform tower identity off by {:e}",
                (lhs - rhs).abs()
            );
        }
    }
    let elapsed = start.elapsed();
    println!(
        "[PASS] criterion 6: operator axioms (monotone, measurable-preserving, sub-additive, \
         homogeneous at -2/-1/0.5/3) within 1e-7 and the transform tower identity within 1e-12 \
         on 200 pasting-stable scenarios in {elapsed:?}"
    );
}

#[test]
fn criterion_7_estimator_uniqueness_and_weight_multiplicity() {
    let start = Instant::now();
    for i in 0..200u64 {
        let (sc, _) = random_pasting_scenario(SEED, i);
        let probe = uniqueness_probe(sc.xi(), sc.ambiguity(), sc.partition(), 1e-9, 4, SEED ^ i)
            .expect("probe runs");
        assert!(
            probe.all_converged && probe.eta_unique,
            "scenario {i}: estimator spread {:e} across restarts",
            probe.eta_spread
        );
    }

    // Witness that the converse does not hold for the weights: identical
    // estimator, visibly different worst-case mixtures.
    let sc = independent_scenario();
    let probe = uniqueness_probe(sc.xi(), sc.ambiguity(), sc.partition(), 1e-9, 6, 7)
        .expect("probe runs");
    assert!(probe.eta_unique, "estimator must still be unique");
    assert!(
        probe.w_spread > 0.1,
        "expected non-unique worst-case weights, spread = {:e}",
        probe.w_spread
    );

    let elapsed = start.elapsed();
    println!(
        "[PASS] criterion 7: estimator unique within 1e-7 across restarts on 200 scenarios; \
         independent-blocks scenario shows weight spread {:.3} with identical estimator; in {elapsed:?}",
        probe.w_spread
    );
}

#[test]
fn criterion_8_tree_separation_and_recursion() {
    let start = Instant::now();
    let (sc, filtration) = example_43_tree(2, 0.5).expect("depth-2 tree builds");
    let (a, c) = (sc.ambiguity(), sc.partition());

    // Search a small family of payoffs for one separating the conditional
    // sublinear expectation from the minimax estimator at time 1.
    let candidates: Vec<(&str, RandomVariable)> = vec![
        ("path sum", sc.xi().clone()),
        (
            "absolute path sum",
            RandomVariable::new(sc.xi().values().iter().map(|v| v.abs()).collect()).unwrap(),
        ),
        (
            "squared path sum",
            RandomVariable::new(sc.xi().values().iter().map(|v| v * v).collect()).unwrap(),
        ),
    ];
    let mut best: (f64, &str) = (0.0, "none");
    for (name, xi) in &candidates {
        let smooth = &conditional_sublinear(xi, a, std::slice::from_ref(c)).expect("operator")[0];
        let sol = solve_mmse(xi, a, c, 1e-9, 100_000).expect("solves");
        let separation = smooth
            .values()
            .iter()
            .zip(sol.eta_hat.values())
            .map(|(s, e)| (s - e).abs())
            .fold(0.0_f64, f64::max);
        if separation > best.0 {
            best = (separation, name);
        }
    }
    assert!(
        best.0 > 1e-6,
        "no payoff separated the two conditional notions (best {:e})",
        best.0
    );

    // Backward recursion through the filtration agrees with the one-shot
    // blockwise vertex maximum at every level, for every candidate payoff.
    for (name, xi) in &candidates {
        let one_shot = conditional_sublinear(xi, a, &filtration).expect("operator");
        let recursive = backward_recursion(xi, a, &filtration).expect("recursion");
        for (level, (o, r)) in one_shot.iter().zip(&recursive).enumerate() {
            for (x, y) in o.values().iter().zip(r.values()) {
                assert!(
                    (x - y).abs() <= 1e-12,
                    "{name}: recursion differs from esssup at level {level} by {:e}",
                    (x - y).abs()
                );
            }
        }
    }

    let elapsed = start.elapsed();
    println!(
        "[PASS] criterion 8: '{}' separates the conditional notions by {:.3} (> 1e-6) on the \
         depth-2 tree, and backward recursion equals the blockwise vertex esssup within 1e-12; \
         in {elapsed:?}",
        best.1, best.0
    );
}

#[test]
fn criterion_9_reports_are_deterministic() {
    let start = Instant::now();
    let run_once = || {
        let mut out = String::new();
        // A fixed scenario and a seeded random one, solved and serialized.
        for sc in [example_41(), random_scenario(SEED, 7, 2..=6, 2..=4)] {
            let sol =
                solve_mmse(sc.xi(), sc.ambiguity(), sc.partition(), 1e-9, 100_000).expect("solves");
            let saddle = verify_saddle(sc.xi(), sc.ambiguity(), sc.partition(), &sol, 1e-8)
                .expect("verification runs");
            let report = io::solution_report(&sc, &sol, Some(&saddle));
            out.push_str(&serde_json::to_string_pretty(&report).unwrap());
            out.push('\n');
        }
        let probe = uniqueness_probe(
            example_41().xi(),
            example_41().ambiguity(),
            example_41().partition(),
            1e-9,
            4,
            SEED,
        )
        .expect("probe runs");
        out.push_str(&format!("{:?} {:?}\n", probe.eta_spread, probe.w_spread));
        out
    };
    let first = run_once();
    let second = run_once();
    assert_eq!(first, second, "repeated runs with the same seed must match byte for byte");

    let elapsed = start.elapsed();
    println!("[PASS] criterion 9: repeated seeded runs produce byte-identical reports in {elapsed:?}");
}
