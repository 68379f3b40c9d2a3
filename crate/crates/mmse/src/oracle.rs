//! Independent brute-force verification at desk scale.
//!
//! Everything here exists to check the solver and the algebra from the
//! outside: grid search over the mixture simplex, a two-sided grid over
//! estimators and mixtures, and the exact mixture-variance decomposition.
//! To actually be independent, these routines re-derive conditional
//! expectations from raw weight/payoff sums instead of calling the
//! conditioning helpers the rest of the crate uses — an oracle that shares
//! code paths with the thing it checks would only confirm itself.
//!
//! Scales are deliberately small (vertex counts and block counts are
//! capped): the point is trustworthy reference values, not performance.

use crate::ambiguity::{AmbiguitySet, MixtureWeights};
use crate::space::{check_equivalence, Measure, Partition, RandomVariable};
use crate::{Error, Result};

/// Most lattice or grid points any oracle routine will enumerate.
const MAX_GRID_POINTS: usize = 20_000_000;

/// Result of a simplex grid search over the conditional-variance objective.
#[derive(Debug, Clone)]
pub struct GridResult {
    /// Lattice point achieving the best value (lexicographically first on
    /// ties).
    pub best_w: MixtureWeights,
    /// Largest objective value seen on the lattice. A lower bound for the
    /// true maximum; quadratic in the step away from it.
    pub best_value: f64,
    /// The requested lattice spacing.
    pub grid_step: f64,
    /// Number of lattice points evaluated.
    pub points: usize,
}

/// Maximizes the conditional variance over the simplex lattice of spacing
/// `step` by exhaustive evaluation.
///
/// Vertex count is capped at 4 and `step` must lie in `[1e-4, 0.25]`; the
/// lattice size is guarded, since it grows combinatorially. Ties go to the
/// lexicographically first lattice point, making the argmax deterministic.
pub fn grid_maximize_g(
    xi: &RandomVariable,
    a: &AmbiguitySet,
    c: &Partition,
    step: f64,
) -> Result<GridResult> {
    let k = a.vertex_count();
    if k > 4 {
        return Err(Error::SizeLimit {
            what: "grid search vertex count",
            limit: 4,
            got: k,
        });
    }
    if !(step.is_finite() && (1e-4..=0.25).contains(&step)) {
        return Err(Error::OutOfRange {
            what: "grid step",
            value: step,
            lo: 1e-4,
            hi: 0.25,
        });
    }
    let n = a.space().atom_count();
    if xi.len() != n || c.atom_count() != n {
        return Err(Error::LengthMismatch {
            what: "grid search operands",
            expected: n,
            got: xi.len().min(c.atom_count()),
        });
    }
    let m = (1.0 / step).round() as usize;
    let point_count = compositions_count(m, k).ok_or(Error::SizeLimit {
        what: "simplex lattice size",
        limit: MAX_GRID_POINTS,
        got: usize::MAX,
    })?;
    if point_count > MAX_GRID_POINTS {
        return Err(Error::SizeLimit {
            what: "simplex lattice size",
            limit: MAX_GRID_POINTS,
            got: point_count,
        });
    }

    let mut best_value = f64::NEG_INFINITY;
    let mut best_w: Vec<f64> = Vec::new();
    let mut points = 0usize;
    let mut w_buf = vec![0.0; k];
    for_each_composition(m, k, &mut |counts| {
        for (w, &ct) in w_buf.iter_mut().zip(counts) {
            *w = ct as f64 / m as f64;
        }
        let value = raw_conditional_variance(xi, a, c, &w_buf);
        if value > best_value {
            best_value = value;
            best_w = w_buf.clone();
        }
        points += 1;
    });
    Ok(GridResult {
        best_w: MixtureWeights::new(best_w)?,
        best_value,
        grid_step: step,
        points,
    })
}

/// Conditional variance of `xi` under the mixture `w`, computed from raw
/// sums only.
fn raw_conditional_variance(
    xi: &RandomVariable,
    a: &AmbiguitySet,
    c: &Partition,
    w: &[f64],
) -> f64 {
    let n = a.space().atom_count();
    let mut p = vec![0.0; n];
    for (wj, vertex) in w.iter().zip(a.vertices()) {
        for (pi, &vi) in p.iter_mut().zip(vertex.weights()) {
            *pi += wj * vi;
        }
    }
    let mut total = 0.0;
    for block in c.blocks() {
        let mut mass = 0.0;
        let mut weighted = 0.0;
        for &i in block {
            mass += p[i];
            weighted += p[i] * xi.values()[i];
        }
        let center = weighted / mass;
        for &i in block {
            let d = xi.values()[i] - center;
            total += p[i] * d * d;
        }
    }
    total
}

fn compositions_count(m: usize, k: usize) -> Option<usize> {
    // C(m + k - 1, k - 1) without overflow.
    let mut result: u128 = 1;
    for i in 0..(k - 1) {
        result = result.checked_mul((m + i + 1) as u128)? / (i as u128 + 1);
        if result > usize::MAX as u128 {
            return None;
        }
    }
    Some(result as usize)
}

/// Visits every way to write `m` as an ordered sum of `k` non-negative
/// integers, in lexicographic order.
fn for_each_composition(m: usize, k: usize, visit: &mut impl FnMut(&[usize])) {
    let mut counts = vec![0usize; k];
    fn recurse(
        remaining: usize,
        slot: usize,
        counts: &mut Vec<usize>,
        visit: &mut impl FnMut(&[usize]),
    ) {
        if slot + 1 == counts.len() {
            counts[slot] = remaining;
            visit(counts);
            return;
        }
        for take in 0..=remaining {
            counts[slot] = take;
            recurse(remaining - take, slot + 1, counts, visit);
        }
    }
    recurse(m, 0, &mut counts, visit);
}

/// Checks the exact decomposition of the conditional variance of a two-point
/// mixture `P^lambda = lambda P1 + (1 - lambda) P2`:
///
/// ```text
/// E_{P^l}[(xi - l1 eta1 - l2 eta2)^2]
///   = l E_{P1}[(xi - eta1)^2] + (1-l) E_{P2}[(xi - eta2)^2]
///   + l E_{P1}[l2^2 (eta1 - eta2)^2] + (1-l) E_{P2}[l1^2 (eta1 - eta2)^2]
/// ```
///
/// where on each block `eta_i` is the block mean under `P_i` and
/// `l1 = lambda P1(B) / P^l(B)`, `l2 = (1-lambda) P2(B) / P^l(B)` are the
/// blockwise blend coefficients (they sum to one, which is also verified).
/// Returns the largest violation: the absolute gap between the two sides,
/// maxed with the worst blockwise deviation of `l1 + l2` from one. The
/// identity is exact in exact arithmetic, so any residual beyond rounding
/// noise indicates a bug in whoever computed the inputs.
pub fn mixture_identity_check(
    xi: &RandomVariable,
    p1: &Measure,
    p2: &Measure,
    c: &Partition,
    lambda: f64,
) -> Result<f64> {
    if !(lambda.is_finite() && lambda > 0.0 && lambda < 1.0) {
        return Err(Error::OutOfRange {
            what: "mixture coefficient",
            value: lambda,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let n = c.atom_count();
    if xi.len() != n || p1.weights().len() != n || p2.weights().len() != n {
        return Err(Error::LengthMismatch {
            what: "mixture identity operands",
            expected: n,
            got: xi.len().min(p1.weights().len()).min(p2.weights().len()),
        });
    }
    for (index, p) in [p1, p2].into_iter().enumerate() {
        if !check_equivalence(p).equivalent {
            return Err(Error::NotEquivalent { index });
        }
    }

    let x = xi.values();
    let w1 = p1.weights();
    let w2 = p2.weights();
    let mut left = 0.0;
    let mut right = 0.0;
    let mut partition_of_unity_violation: f64 = 0.0;

    for block in c.blocks() {
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for &i in block {
            m1 += w1[i];
            m2 += w2[i];
            s1 += w1[i] * x[i];
            s2 += w2[i] * x[i];
        }
        let eta1 = s1 / m1;
        let eta2 = s2 / m2;
        let ml = lambda * m1 + (1.0 - lambda) * m2;
        let l1 = lambda * m1 / ml;
        let l2 = (1.0 - lambda) * m2 / ml;
        partition_of_unity_violation = partition_of_unity_violation.max((l1 + l2 - 1.0).abs());

        let blend = l1 * eta1 + l2 * eta2;
        for &i in block {
            let pl = lambda * w1[i] + (1.0 - lambda) * w2[i];
            let d = x[i] - blend;
            left += pl * d * d;
            let d1 = x[i] - eta1;
            let d2 = x[i] - eta2;
            right += lambda * w1[i] * d1 * d1 + (1.0 - lambda) * w2[i] * d2 * d2;
        }
        let spread = eta1 - eta2;
        right += lambda * m1 * l2 * l2 * spread * spread;
        right += (1.0 - lambda) * m2 * l1 * l1 * spread * spread;
    }
    Ok((left - right).abs().max(partition_of_unity_violation))
}

/// Minimizes, over a grid of block-constant estimators, the maximum over a
/// simplex lattice of mixtures of the mean square error — the whole minimax
/// problem by exhaustion.
///
/// Block values range over `[min xi, max xi]` with spacing `eta_grid_step`
/// (the optimum provably lives in that box); mixtures range over the
/// lattice of spacing `w_grid_step`, which contains every vertex, and the
/// error is linear in the mixture, so the inner maximum is exact. Block
/// count is capped at 3 and vertex count at 3. Returns the best estimator
/// and its worst-case error.
pub fn brute_force_estimate(
    xi: &RandomVariable,
    a: &AmbiguitySet,
    c: &Partition,
    eta_grid_step: f64,
    w_grid_step: f64,
) -> Result<(RandomVariable, f64)> {
    let k = a.vertex_count();
    if k > 3 {
        return Err(Error::SizeLimit {
            what: "brute force vertex count",
            limit: 3,
            got: k,
        });
    }
    if c.block_count() > 3 {
        return Err(Error::SizeLimit {
            what: "brute force block count",
            limit: 3,
            got: c.block_count(),
        });
    }
    if !(eta_grid_step.is_finite() && eta_grid_step > 0.0) {
        return Err(Error::OutOfRange {
            what: "estimator grid step",
            value: eta_grid_step,
            lo: f64::MIN_POSITIVE,
            hi: f64::INFINITY,
        });
    }
    if !(w_grid_step.is_finite() && (1e-4..=0.5).contains(&w_grid_step)) {
        return Err(Error::OutOfRange {
            what: "mixture grid step",
            value: w_grid_step,
            lo: 1e-4,
            hi: 0.5,
        });
    }
    let n = a.space().atom_count();
    if xi.len() != n || c.atom_count() != n {
        return Err(Error::LengthMismatch {
            what: "brute force operands",
            expected: n,
            got: xi.len().min(c.atom_count()),
        });
    }

    // Candidate values per block: [min xi, max xi] at the requested spacing,
    // endpoint included.
    let lo = xi.values().iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xi.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut levels = vec![lo];
    let mut v = lo;
    while v + eta_grid_step < hi + eta_grid_step * 1e-9 {
        v += eta_grid_step;
        levels.push(v.min(hi));
    }
    if *levels.last().unwrap() < hi - eta_grid_step * 1e-9 {
        levels.push(hi);
    }
    let nblocks = c.block_count();
    let eta_combos = levels.len().checked_pow(nblocks as u32).unwrap_or(usize::MAX);
    if eta_combos > MAX_GRID_POINTS {
        return Err(Error::SizeLimit {
            what: "estimator grid size",
            limit: MAX_GRID_POINTS,
            got: eta_combos,
        });
    }

    // Mixture lattice, realized once as atom-weight vectors.
    let m = (1.0 / w_grid_step).round() as usize;
    let w_points = compositions_count(m, k).ok_or(Error::SizeLimit {
        what: "mixture lattice size",
        limit: MAX_GRID_POINTS,
        got: usize::MAX,
    })?;
    if w_points > MAX_GRID_POINTS || eta_combos.saturating_mul(w_points) > 20 * MAX_GRID_POINTS {
        return Err(Error::SizeLimit {
            what: "brute force evaluation count",
            limit: 20 * MAX_GRID_POINTS,
            got: eta_combos.saturating_mul(w_points),
        });
    }
    let mut mixtures: Vec<Vec<f64>> = Vec::with_capacity(w_points);
    for_each_composition(m, k, &mut |counts| {
        let mut p = vec![0.0; n];
        for (&ct, vertex) in counts.iter().zip(a.vertices()) {
            let wj = ct as f64 / m as f64;
            for (pi, &vi) in p.iter_mut().zip(vertex.weights()) {
                *pi += wj * vi;
            }
        }
        mixtures.push(p);
    });

    let mut best_value = f64::INFINITY;
    let mut best_levels: Vec<usize> = Vec::new();
    let mut combo = vec![0usize; nblocks];
    loop {
        // Worst-case error of this estimator over the mixture lattice.
        let mut worst = f64::NEG_INFINITY;
        for p in &mixtures {
            let mut err = 0.0;
            for (b, block) in c.blocks().iter().enumerate() {
                let eta = levels[combo[b]];
                for &i in block {
                    let d = xi.values()[i] - eta;
                    err += p[i] * d * d;
                }
            }
            if err > worst {
                worst = err;
            }
        }
        if worst < best_value {
            best_value = worst;
            best_levels = combo.clone();
        }
        // Advance the block-value odometer.
        let mut digit = nblocks;
        loop {
            if digit == 0 {
                break;
            }
            digit -= 1;
            combo[digit] += 1;
            if combo[digit] < levels.len() {
                break;
            }
            combo[digit] = 0;
        }
        if combo.iter().all(|&d| d == 0) {
            break;
        }
    }

    let mut eta = vec![0.0; n];
    for (b, block) in c.blocks().iter().enumerate() {
        for &i in block {
            eta[i] = levels[best_levels[b]];
        }
    }
    Ok((RandomVariable::new(eta)?, best_value))
}
