//! The minimax mean-square estimation solver and its certificates.
//!
//! # Problem
//!
//! Given a payoff `xi`, an [`AmbiguitySet`] with vertices `P_1..P_k`, and an
//! observation partition `C`, find the `C`-measurable estimator minimizing
//! the worst-case mean square error over the hull:
//!
//! ```text
//! minimize over eta   maximize over P in hull   E_P[(xi - eta)^2]
//! ```
//!
//! The inner maximum defines the objective
//! `G(w) = E_{P_w}[(xi - E_{P_w}[xi | C])^2]` on the mixture simplex, where
//! `P_w = sum_j w_j P_j`: for fixed `P` the best estimator is the
//! conditional expectation, so the game collapses to maximizing the
//! conditional variance `G` over the hull. `G` is concave in `w` (mixing
//! measures never reduces explainable variance), so the maximization is a
//! smooth concave problem over a simplex and the saddle value equals the
//! minimax value. The optimal estimator is read off the worst-case mixture:
//! `eta_hat = E_{P_what}[xi | C]`.
//!
//! # Method
//!
//! [`solve_mmse`] runs Frank-Wolfe with an exact (bisection) line search:
//! the gradient entry `grad_j = E_{P_j}[(xi - eta_w)^2]` prices vertex `j`
//! against the current estimator, the best vertex is blended in, and the
//! duality gap `max_j grad_j - G(w)` certifies optimality — it bounds how
//! far `G(w)` can be below the optimum, with no reference to the unknown
//! maximizer. Plain Frank-Wolfe crawls when the optimum sits on a face of
//! the simplex, so a Newton polish on the active face (closed-form Hessian,
//! equality-constrained step, adopted only when it shrinks the gap) runs
//! periodically and finishes the endgame at quadratic speed.
//!
//! Every division in the solver is safe by construction: each vertex is
//! equivalent to the reference measure, so each block carries mass at least
//! `min_j P_j(B) > 0` under every mixture.
//!
//! # Certificates
//!
//! [`verify_saddle`] re-checks a reported solution from scratch: the
//! reported mixture must be a worst case for the reported estimator, the
//! estimator must be `C`-measurable and unimprovable under the reported
//! mixture, and the reported value must match. [`uniqueness_probe`] re-runs
//! the solver from many starts and reports how much the answers move — the
//! estimator is unique (conditional variance is strictly concave along any
//! direction that changes it), while the worst-case mixture need not be.

use crate::ambiguity::{mix, rho_residual_sq, AmbiguitySet, MixtureWeights};
use crate::space::{compensated_sum, cond_expectation, expectation, Partition, RandomVariable};
use crate::{linalg, tol, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Result of a minimax estimation solve.
#[derive(Debug, Clone)]
pub struct EstimatorSolution {
    /// The minimax estimator: block-constant on the observation partition.
    pub eta_hat: RandomVariable,
    /// Mixture weights of the worst-case measure found.
    pub w_hat: MixtureWeights,
    /// The saddle value `E_{P_what}[(xi - eta_hat)^2]`.
    pub alpha: f64,
    /// Final duality gap `rho((xi - eta_hat)^2) - alpha`, recomputed from
    /// first principles; it bounds how far `alpha` is below the optimum.
    pub gap: f64,
    /// Frank-Wolfe iterations performed.
    pub iterations: usize,
    /// Whether the gap met the requested tolerance.
    pub converged: bool,
}

/// The conditional-variance objective `G(w)` evaluated by definition.
///
/// This is the slow, obviously-correct form used by tests and examples; the
/// solver evaluates the same quantity through precomputed block statistics.
pub fn objective_g(
    xi: &RandomVariable,
    a: &AmbiguitySet,
    c: &Partition,
    w: &MixtureWeights,
) -> Result<f64> {
    let p = mix(a, w)?;
    let eta = cond_expectation(xi, &p, c)?;
    expectation(&xi.sub(&eta)?.squared()?, &p)
}

/// The gradient of `G` at `w`, entry `j` being `E_{P_j}[(xi - eta_w)^2]`,
/// evaluated by definition.
pub fn gradient_g(
    xi: &RandomVariable,
    a: &AmbiguitySet,
    c: &Partition,
    w: &MixtureWeights,
) -> Result<Vec<f64>> {
    let p = mix(a, w)?;
    let eta = cond_expectation(xi, &p, c)?;
    let residual_sq = xi.sub(&eta)?.squared()?;
    a.vertices()
        .iter()
        .map(|v| expectation(&residual_sq, v))
        .collect()
}

/// Per-vertex block statistics that make `G` and its gradient O(k * blocks)
/// instead of O(k * atoms) per evaluation.
struct Workspace {
    /// `mass[j][b] = P_j(B_b)`.
    mass: Vec<Vec<f64>>,
    /// `sums[j][b] = sum over atoms i in B_b of P_j(i) xi(i)`.
    sums: Vec<Vec<f64>>,
    /// `e_sq[j] = E_j[xi^2]`.
    e_sq: Vec<f64>,
    blocks: usize,
}

impl Workspace {
    fn new(xi: &RandomVariable, a: &AmbiguitySet, c: &Partition) -> Result<Self> {
        let n = a.space().atom_count();
        if xi.len() != n {
            return Err(Error::LengthMismatch {
                what: "payoff variable",
                expected: n,
                got: xi.len(),
            });
        }
        if c.atom_count() != n {
            return Err(Error::LengthMismatch {
                what: "observation partition",
                expected: n,
                got: c.atom_count(),
            });
        }
        let k = a.vertex_count();
        let blocks = c.block_count();
        let mut mass = vec![vec![0.0; blocks]; k];
        let mut sums = vec![vec![0.0; blocks]; k];
        let mut e_sq = vec![0.0; k];
        for (j, vertex) in a.vertices().iter().enumerate() {
            for (b, block) in c.blocks().iter().enumerate() {
                for &i in block {
                    let w = vertex.weights()[i];
                    let x = xi.values()[i];
                    mass[j][b] += w;
                    sums[j][b] += w * x;
                    e_sq[j] += w * x * x;
                }
            }
        }
        Ok(Self {
            mass,
            sums,
            e_sq,
            blocks,
        })
    }

    fn vertex_count(&self) -> usize {
        self.e_sq.len()
    }

    /// Mixture block masses, block payoff sums, and `E_w[xi^2]`.
    fn mixture_stats(&self, w: &[f64]) -> (Vec<f64>, Vec<f64>, f64) {
        let mut p = vec![0.0; self.blocks];
        let mut s = vec![0.0; self.blocks];
        let mut e = 0.0;
        for (j, &wj) in w.iter().enumerate() {
            if wj == 0.0 {
                continue;
            }
            e += wj * self.e_sq[j];
            for b in 0..self.blocks {
                p[b] += wj * self.mass[j][b];
                s[b] += wj * self.sums[j][b];
            }
        }
        (p, s, e)
    }

    /// `G` from mixture stats: `E_w[xi^2] - sum_b s_b^2 / p_b`.
    fn g_value(&self, p: &[f64], s: &[f64], e: f64) -> f64 {
        let mut explained = 0.0;
        for (pb, sb) in p.iter().zip(s) {
            explained += sb * sb / pb;
        }
        e - explained
    }

    /// Gradient at the mixture with block stats `(p, s)`:
    /// `grad_j = E_j[xi^2] - sum_b (2 eta_b sums[j][b] - eta_b^2 mass[j][b])`.
    fn gradient(&self, p: &[f64], s: &[f64]) -> Vec<f64> {
        let eta: Vec<f64> = p.iter().zip(s).map(|(pb, sb)| sb / pb).collect();
        (0..self.vertex_count())
            .map(|j| {
                let mut g = self.e_sq[j];
                for b in 0..self.blocks {
                    g -= eta[b] * (2.0 * self.sums[j][b] - eta[b] * self.mass[j][b]);
                }
                g
            })
            .collect()
    }
}

/// Solves the minimax problem from the simplex barycenter.
///
/// `gap_tol` is the duality-gap target (must be finite and positive);
/// `max_iter` caps Frank-Wolfe iterations. Returns the best iterate found
/// with `converged` reporting honestly whether the certificate met the
/// tolerance. Sensible defaults live in [`tol::DEFAULT_SOLVER_TOL`] and
/// [`tol::DEFAULT_MAX_ITER`].
pub fn solve_mmse(
    xi: &RandomVariable,
    a: &AmbiguitySet,
    c: &Partition,
    gap_tol: f64,
    max_iter: usize,
) -> Result<EstimatorSolution> {
    let start = a.barycenter();
    solve_mmse_from(xi, a, c, &start, gap_tol, max_iter)
}

/// Like [`solve_mmse`] but starting from a caller-chosen mixture — the
/// workhorse behind [`uniqueness_probe`].
pub fn solve_mmse_from(
    xi: &RandomVariable,
    a: &AmbiguitySet,
    c: &Partition,
    start: &MixtureWeights,
    gap_tol: f64,
    max_iter: usize,
) -> Result<EstimatorSolution> {
    if !(gap_tol.is_finite() && gap_tol > 0.0) {
        return Err(Error::InvalidTolerance { tol: gap_tol });
    }
    if start.len() != a.vertex_count() {
        return Err(Error::BadMixture {
            reason: format!(
                "start point has {} weights for {} vertices",
                start.len(),
                a.vertex_count()
            ),
        });
    }
    let ws = Workspace::new(xi, a, c)?;
    let (w, iterations, converged_inner) =
        frank_wolfe(&ws, start.weights().to_vec(), gap_tol, max_iter);

    // Final answer and certificate, recomputed from first principles rather
    // than from the workspace's cached statistics.
    let w_hat = MixtureWeights::new(w)?;
    let p_hat = mix(a, &w_hat)?;
    let eta_hat = cond_expectation(xi, &p_hat, c)?;
    let residual_sq = xi.sub(&eta_hat)?.squared()?;
    let alpha = expectation(&residual_sq, &p_hat)?;
    let (upper, _) = rho_residual_sq(xi, &eta_hat, a)?;
    let gap = (upper - alpha).max(0.0);
    let converged = converged_inner && gap <= gap_tol;
    Ok(EstimatorSolution {
        eta_hat,
        w_hat,
        alpha,
        gap,
        iterations,
        converged,
    })
}

/// Weights below this are dropped between iterations; they contribute less
/// than float noise to any expectation and keeping them only bloats the
/// support that the polish step must consider.
const PRUNE_EPS: f64 = 1e-16;
/// Active-face size cap for the Newton polish.
const POLISH_CAP: usize = 192;

fn frank_wolfe(
    ws: &Workspace,
    start: Vec<f64>,
    gap_tol: f64,
    max_iter: usize,
) -> (Vec<f64>, usize, bool) {
    let mut w = start;
    let mut best_w = w.clone();
    let mut best_gap = f64::INFINITY;
    let mut prev_gap = f64::INFINITY;
    let mut stalls = 0usize;
    let mut iterations = 0usize;
    let mut converged = false;

    loop {
        let (p, s, e) = ws.mixture_stats(&w);
        let g = ws.g_value(&p, &s, e);
        let grad = ws.gradient(&p, &s);
        let (j_star, grad_max) = argmax(&grad);
        let gap = (grad_max - g).max(0.0);

        if gap < best_gap {
            best_gap = gap;
            best_w.clone_from(&w);
        }
        if gap <= gap_tol {
            converged = true;
            break;
        }
        if iterations >= max_iter {
            break;
        }

        // Plain Frank-Wolfe zigzags at O(1/t) when the optimum lies on a
        // face; a Newton step on the active face finishes those endgames.
        stalls = if gap > 0.9 * prev_gap { stalls + 1 } else { 0 };
        prev_gap = gap;
        if stalls >= 3 || (iterations > 0 && iterations % 25 == 0) {
            stalls = 0;
            if let Some(candidate) = newton_polish(ws, &w) {
                let (cp, cs, ce) = ws.mixture_stats(&candidate);
                let cg = ws.g_value(&cp, &cs, ce);
                let cgrad = ws.gradient(&cp, &cs);
                let (_, cmax) = argmax(&cgrad);
                let cgap = (cmax - cg).max(0.0);
                if cgap < gap {
                    w = candidate;
                    iterations += 1;
                    continue;
                }
            }
        }

        let t = line_search(ws, &p, &s, e, j_star);
        for (idx, wj) in w.iter_mut().enumerate() {
            *wj *= 1.0 - t;
            if idx == j_star {
                *wj += t;
            }
        }
        prune_and_renormalize(&mut w);
        iterations += 1;
    }

    if !converged {
        w = best_w;
    }
    (w, iterations, converged)
}

fn argmax(values: &[f64]) -> (usize, f64) {
    let mut best = f64::NEG_INFINITY;
    let mut best_idx = 0;
    for (j, &v) in values.iter().enumerate() {
        if v > best {
            best = v;
            best_idx = j;
        }
    }
    (best_idx, best)
}

fn prune_and_renormalize(w: &mut [f64]) {
    for wj in w.iter_mut() {
        if *wj < PRUNE_EPS {
            *wj = 0.0;
        }
    }
    renormalize_exact(w);
}

fn renormalize_exact(w: &mut [f64]) {
    let sum = compensated_sum(w);
    for wj in w.iter_mut() {
        *wj /= sum;
    }
    // Land the sum on 1 exactly (to compensated precision) by absorbing the
    // last rounding crumb into the largest coordinate.
    let residual = compensated_sum(w) - 1.0;
    if residual != 0.0 {
        let (imax, _) = argmax(w);
        w[imax] -= residual;
    }
}

/// Exact line search for the step `w_t = (1 - t) w + t e_{j_star}`.
///
/// The objective along the segment is concave; its derivative is
/// `phi'(t) = grad_{j_star}(w_t) - sum_j w_j grad_j(w_t)` (the directional
/// derivative in the fixed direction `e_{j_star} - w`), which block
/// statistics make O(blocks) per probe because the mixture stats of `w_t`
/// are linear in `t`. Takes the full step when the derivative stays
/// non-negative, otherwise bisects for the root.
fn line_search(ws: &Workspace, p_w: &[f64], s_w: &[f64], e_w: f64, j_star: usize) -> f64 {
    // sum_j w_j e_sq[j] stays fixed in the second term of phi';
    // the eta at w_t is what varies.
    let phi_prime = |t: f64| -> f64 {
        let omt = 1.0 - t;
        let mut grad_star = ws.e_sq[j_star];
        let mut grad_avg = e_w;
        for b in 0..ws.blocks {
            let pt = omt * p_w[b] + t * ws.mass[j_star][b];
            let st = omt * s_w[b] + t * ws.sums[j_star][b];
            let eta = st / pt;
            grad_star -= eta * (2.0 * ws.sums[j_star][b] - eta * ws.mass[j_star][b]);
            grad_avg -= eta * (2.0 * s_w[b] - eta * p_w[b]);
        }
        grad_star - grad_avg
    };

    if phi_prime(1.0) >= 0.0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if phi_prime(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Newton step(s) on the face spanned by the current support.
///
/// Maximizes `G` subject to the weights summing to one, using the
/// closed-form Hessian `H_jl = -2 sum_b M_jb M_lb / p_b` with
/// `M_jb = sums[j][b] - eta_b mass[j][b]`. Solves the equality-constrained
/// system through a bordered matrix, caps the step at the boundary of the
/// face, backtracks until `G` improves, and drops coordinates that land on
/// zero. Returns a full-length candidate only; the caller adopts it only if
/// it certifies a smaller duality gap.
fn newton_polish(ws: &Workspace, w_full: &[f64]) -> Option<Vec<f64>> {
    let k = ws.vertex_count();
    let mut active: Vec<usize> = (0..k).filter(|&j| w_full[j] > 1e-12).collect();
    if active.len() > POLISH_CAP {
        active.sort_by(|&a, &b| w_full[b].total_cmp(&w_full[a]));
        active.truncate(POLISH_CAP);
        active.sort_unstable();
    }
    if active.len() < 2 {
        return None;
    }
    let mut wa: Vec<f64> = active.iter().map(|&j| w_full[j]).collect();
    renormalize_exact(&mut wa);

    for _ in 0..40 {
        let m = active.len();
        if m < 2 {
            break;
        }
        // Block stats restricted to the active face.
        let mut p = vec![0.0; ws.blocks];
        let mut s = vec![0.0; ws.blocks];
        let mut e = 0.0;
        for (idx, &j) in active.iter().enumerate() {
            let wj = wa[idx];
            e += wj * ws.e_sq[j];
            for b in 0..ws.blocks {
                p[b] += wj * ws.mass[j][b];
                s[b] += wj * ws.sums[j][b];
            }
        }
        let g0 = ws.g_value(&p, &s, e);
        let eta: Vec<f64> = p.iter().zip(&s).map(|(pb, sb)| sb / pb).collect();
        let grad: Vec<f64> = active
            .iter()
            .map(|&j| {
                let mut g = ws.e_sq[j];
                for b in 0..ws.blocks {
                    g -= eta[b] * (2.0 * ws.sums[j][b] - eta[b] * ws.mass[j][b]);
                }
                g
            })
            .collect();

        // Bordered KKT system for max G on the affine slice sum(d) = 0.
        let mut kkt = vec![vec![0.0; m + 1]; m + 1];
        for b in 0..ws.blocks {
            let col: Vec<f64> = active
                .iter()
                .map(|&j| ws.sums[j][b] - eta[b] * ws.mass[j][b])
                .collect();
            let scale = -2.0 / p[b];
            for i in 0..m {
                for l in i..m {
                    let v = scale * col[i] * col[l];
                    kkt[i][l] += v;
                    if l != i {
                        kkt[l][i] += v;
                    }
                }
            }
        }
        let mut diag_scale: f64 = 0.0;
        for (i, row) in kkt.iter().enumerate().take(m) {
            diag_scale = diag_scale.max(row[i].abs());
        }
        for i in 0..m {
            kkt[i][m] = 1.0;
            kkt[m][i] = 1.0;
        }
        let mut rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
        rhs.push(0.0);

        let solution = linalg::solve(kkt.clone(), rhs.clone()).or_else(|| {
            // Flat directions make the Hessian singular; a negative ridge
            // keeps the step well defined (and ascent) without inventing
            // curvature where the certificate matters — adoption is gated
            // on the recomputed gap, not on this solve.
            let ridge = 1e-10 * (1.0 + diag_scale);
            let mut damped = kkt;
            for (i, row) in damped.iter_mut().enumerate().take(m) {
                row[i] -= ridge;
            }
            linalg::solve(damped, rhs)
        })?;
        let d = &solution[..m];
        let d_inf = d.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
        if d_inf <= 1e-15 {
            break;
        }

        // Cap the step at the face boundary, then backtrack until G improves.
        let mut t_max = 1.0f64;
        for (wj, dj) in wa.iter().zip(d) {
            if *dj < 0.0 {
                t_max = t_max.min(wj / -dj);
            }
        }
        let mut t = t_max.min(1.0);
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = wa
                .iter()
                .zip(d)
                .map(|(wj, dj)| (wj + t * dj).max(0.0))
                .collect();
            let mut tp = vec![0.0; ws.blocks];
            let mut ts = vec![0.0; ws.blocks];
            let mut te = 0.0;
            for (idx, &j) in active.iter().enumerate() {
                let wj = trial[idx];
                te += wj * ws.e_sq[j];
                for b in 0..ws.blocks {
                    tp[b] += wj * ws.mass[j][b];
                    ts[b] += wj * ws.sums[j][b];
                }
            }
            if ws.g_value(&tp, &ts, te) > g0 {
                wa = trial;
                accepted = true;
                break;
            }
            t *= 0.5;
            if t < 1e-12 {
                break;
            }
        }
        if !accepted {
            break;
        }
        // Drop coordinates that hit the boundary.
        let mut idx = 0;
        while idx < wa.len() {
            if wa[idx] <= 1e-15 {
                wa.remove(idx);
                active.remove(idx);
            } else {
                idx += 1;
            }
        }
        if active.is_empty() {
            return None;
        }
        renormalize_exact(&mut wa);
    }

    let mut out = vec![0.0; k];
    for (&j, &wj) in active.iter().zip(&wa) {
        out[j] = wj;
    }
    Some(out)
}

/// Report from [`verify_saddle`].
#[derive(Debug, Clone)]
pub struct SaddleReport {
    /// All checks passed within the tolerance.
    pub pass: bool,
    /// `alpha - max_j E_j[(xi - eta_hat)^2]`; the reported value is a worst
    /// case over the hull iff this is >= -tolerance.
    pub left_margin: f64,
    /// Minimum over probed alternative estimators of
    /// `E_{P_hat}[(xi - eta)^2] - alpha`; the reported estimator is
    /// unimprovable under the reported mixture iff this is >= -tolerance.
    pub right_margin: f64,
    /// The recomputed saddle value `E_{P_hat}[(xi - eta_hat)^2]`.
    pub base: f64,
    /// `|base - reported alpha|`.
    pub alpha_consistency: f64,
    /// Whether the reported estimator is measurable for the partition.
    pub estimator_measurable: bool,
    /// Tolerance the margins were tested against.
    pub tolerance: f64,
}

/// Re-derives the saddle inequalities for a reported solution, from scratch.
///
/// A genuine solution `(eta_hat, P_hat)` satisfies, for every hull member
/// `P` and every `C`-measurable `eta`:
///
/// ```text
/// E_P[(xi - eta_hat)^2]  <=  E_{P_hat}[(xi - eta_hat)^2]  <=  E_{P_hat}[(xi - eta)^2]
/// ```
///
/// The left inequality is checked exactly (vertices suffice, by linearity).
/// The right inequality is checked against the one alternative that can
/// beat a non-optimal estimator — the true conditional expectation under
/// `P_hat` — plus each vertex's conditional expectation and block-wise
/// nudges of the reported estimator. Tampered solutions fail loudly; see
/// the tests for worked examples.
pub fn verify_saddle(
    xi: &RandomVariable,
    a: &AmbiguitySet,
    c: &Partition,
    sol: &EstimatorSolution,
    tolerance: f64,
) -> Result<SaddleReport> {
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(Error::InvalidTolerance { tol: tolerance });
    }
    let p_hat = mix(a, &sol.w_hat)?;
    let residual_sq = xi.sub(&sol.eta_hat)?.squared()?;
    let base = expectation(&residual_sq, &p_hat)?;

    let mut worst_vertex = f64::NEG_INFINITY;
    for vertex in a.vertices() {
        worst_vertex = worst_vertex.max(expectation(&residual_sq, vertex)?);
    }
    let left_margin = sol.alpha - worst_vertex;

    let mut candidates: Vec<RandomVariable> = Vec::new();
    candidates.push(cond_expectation(xi, &p_hat, c)?);
    for vertex in a.vertices() {
        candidates.push(cond_expectation(xi, vertex, c)?);
    }
    for b in 0..c.block_count() {
        for delta in [1e-3, -1e-3, 1e-1, -1e-1] {
            let mut values = sol.eta_hat.values().to_vec();
            for &i in &c.blocks()[b] {
                values[i] += delta;
            }
            candidates.push(RandomVariable::new(values)?);
        }
    }
    let mut right_margin = f64::INFINITY;
    for eta in &candidates {
        let value = expectation(&xi.sub(eta)?.squared()?, &p_hat)?;
        right_margin = right_margin.min(value - sol.alpha);
    }

    let alpha_consistency = (base - sol.alpha).abs();
    let estimator_measurable = sol.eta_hat.is_measurable(c);
    let pass = left_margin >= -tolerance
        && right_margin >= -tolerance
        && alpha_consistency <= tolerance
        && estimator_measurable;
    Ok(SaddleReport {
        pass,
        left_margin,
        right_margin,
        base,
        alpha_consistency,
        estimator_measurable,
        tolerance,
    })
}

/// Report from [`uniqueness_probe`].
#[derive(Debug, Clone)]
pub struct UniquenessReport {
    /// Largest pairwise sup-norm distance between estimators across runs.
    /// Small spread backs the theory: the estimator is essentially unique.
    pub eta_spread: f64,
    /// Whether `eta_spread` stayed within [`tol::ETA_UNIQUENESS`].
    pub eta_unique: bool,
    /// Largest pairwise sup-norm distance between worst-case weights across
    /// runs. Can be large even when `eta_spread` is tiny — the objective can
    /// be flat in the mixture.
    pub w_spread: f64,
    /// Spread of the reported saddle values.
    pub alpha_spread: f64,
    /// Number of solves performed.
    pub runs: usize,
    /// Whether every run met the gap tolerance.
    pub all_converged: bool,
}

/// Solves the same problem from many starting mixtures — every vertex (up
/// to the restart budget), the barycenter, and seeded random interior
/// points — and reports how much the answers disagree.
pub fn uniqueness_probe(
    xi: &RandomVariable,
    a: &AmbiguitySet,
    c: &Partition,
    gap_tol: f64,
    restarts: usize,
    seed: u64,
) -> Result<UniquenessReport> {
    if restarts < 2 {
        return Err(Error::RestartBudgetTooSmall { got: restarts });
    }
    let k = a.vertex_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts: Vec<MixtureWeights> = Vec::with_capacity(restarts);
    for j in 0..k.min(restarts.saturating_sub(1)) {
        starts.push(MixtureWeights::vertex(k, j));
    }
    if starts.len() < restarts {
        starts.push(MixtureWeights::uniform(k));
    }
    while starts.len() < restarts {
        let mut w: Vec<f64> = (0..k)
            .map(|_| -(1.0 - rng.gen::<f64>()).ln())
            .collect();
        renormalize_exact(&mut w);
        starts.push(MixtureWeights::new(w)?);
    }

    let mut solutions: Vec<EstimatorSolution> = Vec::with_capacity(starts.len());
    for start in &starts {
        solutions.push(solve_mmse_from(
            xi,
            a,
            c,
            start,
            gap_tol,
            tol::DEFAULT_MAX_ITER,
        )?);
    }

    let sup = |u: &[f64], v: &[f64]| -> f64 {
        u.iter()
            .zip(v)
            .fold(0.0f64, |acc, (&x, &y)| acc.max((x - y).abs()))
    };
    let mut eta_spread: f64 = 0.0;
    let mut w_spread: f64 = 0.0;
    let mut alpha_spread: f64 = 0.0;
    for i in 0..solutions.len() {
        for j in (i + 1)..solutions.len() {
            eta_spread = eta_spread.max(sup(
                solutions[i].eta_hat.values(),
                solutions[j].eta_hat.values(),
            ));
            w_spread = w_spread.max(sup(
                solutions[i].w_hat.weights(),
                solutions[j].w_hat.weights(),
            ));
            alpha_spread = alpha_spread.max((solutions[i].alpha - solutions[j].alpha).abs());
        }
    }
    Ok(UniquenessReport {
        eta_spread,
        eta_unique: eta_spread <= tol::ETA_UNIQUENESS,
        w_spread,
        alpha_spread,
        runs: solutions.len(),
        all_converged: solutions.iter().all(|s| s.converged),
    })
}
