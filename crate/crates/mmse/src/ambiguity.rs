//! Ambiguity sets: convex hulls of equivalent measures, the sublinear upper
//! expectation they induce, and dynamic-consistency (stability) checks.
//!
//! An [`AmbiguitySet`] is the convex hull of finitely many *vertex* measures,
//! each equivalent to the reference measure of the underlying space. The
//! induced upper expectation
//!
//! ```text
//! rho(xi) = max over P in the hull of E_P[xi]
//! ```
//!
//! is attained at a vertex because `E_P[xi]` is linear in `P`, so [`rho`]
//! only ever scans vertices. It is sublinear: monotone, constant-preserving,
//! sub-additive and positively homogeneous (the property tests pin all four).
//!
//! # Stability under conditioning
//!
//! For dynamic problems one wants the set to be closed under a pasting
//! operation: take any `P` in the hull, replace its behaviour on the
//! partition `C` by the reference measure's, and keep its conditional
//! behaviour inside blocks. [`g_transform`] performs exactly that surgery:
//! the transformed measure has atom weights `p(atom) * P0(B) / p(B)` on each
//! block `B`, i.e. density `f^P / f^P_C`. A set is *stable* for `C` when the
//! transform of every hull member stays in the hull.
//!
//! The map `P -> g_transform(P)` is nonlinear (blockwise renormalization), so
//! checking vertices alone proves nothing about mixtures. [`stability_check`]
//! therefore samples the hull — every vertex, the barycenter, and a
//! low-discrepancy sweep of mixtures — and certifies each sampled point by
//! solving a small convex-hull membership problem exactly ([Wolfe's
//! minimum-norm-point scheme](hull_membership), no external solver). The
//! verdict is honest about what was checked: `Stable` means every sampled
//! point passed, `Violated` means a counterexample was found, and
//! `Inconclusive` is reserved for membership solves that failed to certify.
//!
//! [`pasting_construct`] builds the canonical stable family: binomial-tree
//! ambiguity sets whose vertices tilt each node's step distribution up or
//! down. For shallow trees every node-wise tilt assignment is enumerated and
//! the hull is exactly the polytope of all measures with node conditionals in
//! the tilt interval — stable by construction. For deep trees only
//! path-constant (time-dependent, node-independent) tilts are enumerated;
//! that hull is smaller and stability holds only approximately, which the
//! returned regime marker makes explicit.

use crate::space::{
    check_equivalence, compensated_sum, expectation, Measure, Partition, RandomVariable,
    SampleSpace,
};
use crate::{linalg, lowdisc, tol, Error, Result};

/// Convex hull of finitely many probability measures, all equivalent to the
/// reference measure of `space`.
#[derive(Debug, Clone)]
pub struct AmbiguitySet {
    space: SampleSpace,
    vertices: Vec<Measure>,
}

impl AmbiguitySet {
    /// Builds an ambiguity set, verifying that every vertex lives on `space`
    /// and is equivalent to its reference measure.
    pub fn new(space: SampleSpace, vertices: Vec<Measure>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::NoVertices);
        }
        for (j, v) in vertices.iter().enumerate() {
            if v.weights().len() != space.atom_count() {
                return Err(Error::LengthMismatch {
                    what: "vertex weights",
                    expected: space.atom_count(),
                    got: v.weights().len(),
                });
            }
            if !check_equivalence(v).equivalent {
                return Err(Error::NotEquivalent { index: j });
            }
        }
        Ok(Self { space, vertices })
    }

    /// The underlying sample space.
    pub fn space(&self) -> &SampleSpace {
        &self.space
    }

    /// Vertex measures, in construction order.
    pub fn vertices(&self) -> &[Measure] {
        &self.vertices
    }

    /// Number of vertices.
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Uniform mixture weights (the simplex barycenter).
    pub fn barycenter(&self) -> MixtureWeights {
        MixtureWeights::uniform(self.vertex_count())
    }
}

/// A point of the mixture simplex: non-negative weights over the vertices of
/// an ambiguity set, summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureWeights {
    weights: Vec<f64>,
}

impl MixtureWeights {
    /// Validates and wraps a weight vector.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::BadMixture {
                reason: "weight vector is empty".into(),
            });
        }
        for (j, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::BadMixture {
                    reason: format!("weight {j} is not finite"),
                });
            }
            if w < 0.0 {
                return Err(Error::BadMixture {
                    reason: format!("weight {j} is negative ({w})"),
                });
            }
        }
        let sum = compensated_sum(&weights);
        if (sum - 1.0).abs() > tol::WEIGHT_SUM {
            return Err(Error::BadMixture {
                reason: format!(
                    "weights sum to {sum}, off from 1 by more than {:e}",
                    tol::WEIGHT_SUM
                ),
            });
        }
        Ok(Self { weights })
    }

    /// The uniform point `(1/k, ..., 1/k)`.
    pub fn uniform(k: usize) -> Self {
        Self {
            weights: vec![1.0 / k as f64; k],
        }
    }

    /// The `j`-th vertex of the simplex.
    pub fn vertex(k: usize, j: usize) -> Self {
        let mut weights = vec![0.0; k];
        weights[j] = 1.0;
        Self { weights }
    }

    /// Weight entries.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of entries.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    /// Never true: constructors reject empty vectors.
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// The mixture measure `sum_j w_j P_j`.
///
/// Mixtures of equivalent measures are equivalent (some weight is positive,
/// and that vertex already charges every atom), so the result is always a
/// valid hull member.
pub fn mix(a: &AmbiguitySet, w: &MixtureWeights) -> Result<Measure> {
    if w.len() != a.vertex_count() {
        return Err(Error::BadMixture {
            reason: format!(
                "expected {} weights, got {}",
                a.vertex_count(),
                w.len()
            ),
        });
    }
    let n = a.space().atom_count();
    let mut weights = vec![0.0; n];
    for (wj, vertex) in w.weights().iter().zip(a.vertices()) {
        if *wj == 0.0 {
            continue;
        }
        for (acc, &vw) in weights.iter_mut().zip(vertex.weights()) {
            *acc += wj * vw;
        }
    }
    Measure::new(a.space(), weights)
}

/// The sublinear upper expectation `rho(xi) = max_P E_P[xi]` together with
/// the index of the attaining vertex (lowest index on ties).
pub fn rho(xi: &RandomVariable, a: &AmbiguitySet) -> Result<(f64, usize)> {
    let mut best = f64::NEG_INFINITY;
    let mut best_idx = 0;
    for (j, vertex) in a.vertices().iter().enumerate() {
        let value = expectation(xi, vertex)?;
        if value > best {
            best = value;
            best_idx = j;
        }
    }
    Ok((best, best_idx))
}

/// Worst-case mean square residual `rho((xi - eta)^2)` of an estimator
/// `eta`, with the attaining vertex index.
pub fn rho_residual_sq(
    xi: &RandomVariable,
    eta: &RandomVariable,
    a: &AmbiguitySet,
) -> Result<(f64, usize)> {
    let residual_sq = xi.sub(eta)?.squared()?;
    rho(&residual_sq, a)
}

/// Replaces the block-level behaviour of `p` by the reference measure's
/// while keeping `p`'s conditional behaviour inside each block.
///
/// On block `B` every atom weight becomes `p(atom) * P0(B) / p(B)`; in
/// density terms the result is `f^P / f^P_C`. The output is again a
/// probability measure, and conditioning it on `c` returns the reference
/// block masses exactly.
pub fn g_transform(space: &SampleSpace, p: &Measure, c: &Partition) -> Result<Measure> {
    let n = space.atom_count();
    if p.weights().len() != n || c.atom_count() != n {
        return Err(Error::LengthMismatch {
            what: "g_transform operands",
            expected: n,
            got: p.weights().len().min(c.atom_count()),
        });
    }
    let mut weights = vec![0.0; n];
    for (b, block) in c.blocks().iter().enumerate() {
        let p_mass: f64 = block.iter().map(|&i| p.weights()[i]).sum();
        if p_mass <= 0.0 {
            return Err(Error::ZeroBlockMass { block: b });
        }
        let base_mass: f64 = block.iter().map(|&i| space.base_weights()[i]).sum();
        let ratio = base_mass / p_mass;
        for &i in block {
            weights[i] = p.weights()[i] * ratio;
        }
    }
    Measure::new(space, weights)
}

/// Certificate from a convex-hull membership test: how far a target density
/// is from the hull of the vertex densities, and the mixture achieving it.
#[derive(Debug, Clone)]
pub struct MembershipCertificate {
    /// Squared distance from the hull in the reference-weighted inner
    /// product `<u, v> = sum_atoms P0(atom) u(atom) v(atom)`.
    pub distance_sq: f64,
    /// Largest absolute gap, atom by atom, between the best hull combination
    /// and the target density.
    pub residual_inf: f64,
    /// Hull coefficients achieving the minimum (length = vertex count).
    pub coefficients: Vec<f64>,
    /// False when the inner solve hit its cycle budget before certifying
    /// optimality; the distances reported are then only upper bounds.
    pub converged: bool,
}

/// Distance from `target`'s density to the convex hull of the vertex
/// densities of `a`, computed by Wolfe's minimum-norm-point algorithm.
///
/// The target is a hull member exactly when the distance is zero; in floats,
/// compare `residual_inf` against [`tol::MEMBERSHIP_RESIDUAL`]. The solve is
/// exact in exact arithmetic and deterministic here; it never calls out to
/// an external optimizer.
pub fn hull_membership(a: &AmbiguitySet, target: &Measure) -> Result<MembershipCertificate> {
    let n = a.space().atom_count();
    if target.weights().len() != n {
        return Err(Error::LengthMismatch {
            what: "membership target",
            expected: n,
            got: target.weights().len(),
        });
    }
    let base = a.space().base_weights();
    let k = a.vertex_count();
    // Work with shifted columns a_j = f_j - g in the P0-weighted inner
    // product; the hull contains g exactly when conv{a_j} contains 0.
    let dot = |u: &[f64], v: &[f64]| -> f64 {
        u.iter()
            .zip(v)
            .zip(base)
            .map(|((&x, &y), &b)| b * x * y)
            .sum()
    };
    let col = |j: usize| -> Vec<f64> {
        a.vertices()[j]
            .density()
            .iter()
            .zip(target.density())
            .map(|(&f, &g)| f - g)
            .collect()
    };

    // Start from the column of smallest norm.
    let mut start = 0;
    let mut start_norm = f64::INFINITY;
    for j in 0..k {
        let c = col(j);
        let norm = dot(&c, &c);
        if norm < start_norm {
            start_norm = norm;
            start = j;
        }
    }
    let mut active: Vec<usize> = vec![start];
    let mut lambda: Vec<f64> = vec![1.0];
    let scale = 1.0 + start_norm.abs();
    let eps = 1e-14 * scale;
    let max_cycles = 16 * k + 64;
    let mut converged = false;

    for _ in 0..max_cycles {
        // Current point x = sum lambda_j a_j.
        let mut x = vec![0.0; n];
        for (&j, &l) in active.iter().zip(&lambda) {
            for (xi, v) in x.iter_mut().zip(col(j)) {
                *xi += l * v;
            }
        }
        let xx = dot(&x, &x);

        // Linear minimization over all columns.
        let mut best = f64::INFINITY;
        let mut best_j = 0;
        for j in 0..k {
            let c = col(j);
            let v = dot(&x, &c);
            if v < best {
                best = v;
                best_j = j;
            }
        }
        if xx - best <= eps {
            converged = true;
            break;
        }
        if !active.contains(&best_j) {
            active.push(best_j);
            lambda.push(0.0);
        } else {
            // The improving column is already active: the affine solve below
            // did not move us, so we cannot make progress numerically.
            converged = xx <= eps;
            break;
        }

        // Minor cycles: project onto the affine hull of the active columns,
        // walking back toward the simplex when coefficients go negative.
        loop {
            let m = active.len();
            let mut gram = vec![vec![0.0; m + 1]; m + 1];
            let cols: Vec<Vec<f64>> = active.iter().map(|&j| col(j)).collect();
            for i in 0..m {
                for j in i..m {
                    let g = dot(&cols[i], &cols[j]);
                    gram[i][j] = g;
                    gram[j][i] = g;
                }
                gram[i][m] = 1.0;
                gram[m][i] = 1.0;
            }
            let mut rhs = vec![0.0; m + 1];
            rhs[m] = 1.0;
            let beta = match linalg::solve(gram.clone(), rhs.clone()).or_else(|| {
                // Duplicate columns make the Gram singular; a whisper of
                // ridge keeps the affine step well posed without changing
                // the certified outcome (optimality is re-tested above).
                let mut ridged = gram;
                for (i, row) in ridged.iter_mut().enumerate().take(m) {
                    row[i] += 1e-12 * scale;
                }
                linalg::solve(ridged, rhs)
            }) {
                Some(solution) => solution[..m].to_vec(),
                None => {
                    return Ok(finish_membership(
                        k, &active, &lambda, a, target, base, false,
                    ))
                }
            };

            if beta.iter().all(|&b| b > 1e-12) {
                lambda = beta;
                break;
            }
            // Step from lambda toward beta until the first coefficient dies.
            let mut theta = f64::INFINITY;
            for (l, b) in lambda.iter().zip(&beta) {
                if *b <= 1e-12 && *l > *b {
                    theta = theta.min(*l / (*l - *b));
                }
            }
            let theta = theta.min(1.0);
            for (l, b) in lambda.iter_mut().zip(&beta) {
                *l = (1.0 - theta) * *l + theta * *b;
            }
            let mut idx = 0;
            while idx < lambda.len() {
                if lambda[idx] <= 1e-12 {
                    lambda.remove(idx);
                    active.remove(idx);
                } else {
                    idx += 1;
                }
            }
            if active.is_empty() {
                // Cannot happen for a valid simplex walk; bail out safely.
                return Ok(finish_membership(k, &[], &[], a, target, base, false));
            }
        }
    }

    Ok(finish_membership(
        k, &active, &lambda, a, target, base, converged,
    ))
}

fn finish_membership(
    k: usize,
    active: &[usize],
    lambda: &[f64],
    a: &AmbiguitySet,
    target: &Measure,
    base: &[f64],
    converged: bool,
) -> MembershipCertificate {
    let n = target.density().len();
    let mut coefficients = vec![0.0; k];
    for (&j, &l) in active.iter().zip(lambda) {
        coefficients[j] = l;
    }
    let mut combo = vec![0.0; n];
    for (j, &c) in coefficients.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        for (acc, &f) in combo.iter_mut().zip(a.vertices()[j].density()) {
            *acc += c * f;
        }
    }
    let mut distance_sq = 0.0;
    let mut residual_inf: f64 = 0.0;
    for ((&got, &want), &b) in combo.iter().zip(target.density()).zip(base) {
        let r = got - want;
        distance_sq += b * r * r;
        residual_inf = residual_inf.max(r.abs());
    }
    MembershipCertificate {
        distance_sq,
        residual_inf,
        coefficients,
        converged,
    }
}

/// Verdict of a sampled stability check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityVerdict {
    /// Every sampled point's transform stayed in the hull (a sampled
    /// certificate, not an exhaustive proof — the transform is nonlinear).
    Stable,
    /// Some sampled point's transform left the hull by more than the
    /// tolerance.
    Violated,
    /// At least one membership solve failed to certify and no violation was
    /// found; the question is open at this sample budget.
    Inconclusive,
}

/// Report from [`stability_check`].
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub verdict: StabilityVerdict,
    /// Largest hull-membership residual observed across all checked points.
    pub worst_violation: f64,
    /// Mixture weights of the point achieving `worst_violation`.
    pub worst_weights: MixtureWeights,
    /// Total points checked: vertices, barycenter, and sampled mixtures.
    pub points_checked: usize,
    /// Residual threshold separating `Stable` from `Violated`.
    pub tolerance: f64,
}

/// Samples the hull and checks whether the conditional-reference transform
/// [`g_transform`] maps every sampled measure back into the hull.
///
/// Checks all vertices, the barycenter, and `sample_count` low-discrepancy
/// mixtures (`sample_count` must be at least the vertex count so no vertex
/// goes untested). See the module docs for how to read the verdict.
pub fn stability_check(
    a: &AmbiguitySet,
    c: &Partition,
    sample_count: usize,
) -> Result<StabilityReport> {
    let k = a.vertex_count();
    if sample_count < k {
        return Err(Error::SampleBudgetTooSmall {
            got: sample_count,
            vertices: k,
        });
    }
    let mut points: Vec<MixtureWeights> = Vec::with_capacity(sample_count + k + 1);
    for j in 0..k {
        points.push(MixtureWeights::vertex(k, j));
    }
    points.push(MixtureWeights::uniform(k));
    for w in lowdisc::simplex_sequence(k, sample_count) {
        points.push(MixtureWeights::new(normalize_exact(w))?);
    }

    let mut worst_violation: f64 = 0.0;
    let mut worst_weights = points[0].clone();
    let mut any_unconverged = false;
    for w in &points {
        let p = mix(a, w)?;
        let transformed = g_transform(a.space(), &p, c)?;
        let cert = hull_membership(a, &transformed)?;
        if !cert.converged {
            any_unconverged = true;
        }
        if cert.residual_inf > worst_violation {
            worst_violation = cert.residual_inf;
            worst_weights = w.clone();
        }
    }
    let tolerance = tol::MEMBERSHIP_RESIDUAL;
    let verdict = if worst_violation > tolerance {
        StabilityVerdict::Violated
    } else if any_unconverged {
        StabilityVerdict::Inconclusive
    } else {
        StabilityVerdict::Stable
    };
    Ok(StabilityReport {
        verdict,
        worst_violation,
        worst_weights,
        points_checked: points.len(),
        tolerance,
    })
}

pub(crate) fn normalize_exact(mut w: Vec<f64>) -> Vec<f64> {
    let sum = compensated_sum(&w);
    for v in w.iter_mut() {
        *v /= sum;
    }
    w
}

/// Which vertex family a pasted tree uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PastingRegime {
    /// Every node-wise tilt assignment enumerated (`2^(2^depth - 1)`
    /// vertices): the hull is exactly the polytope of measures whose node
    /// conditionals lie in the tilt interval, and stability is exact.
    Exhaustive,
    /// Only time-dependent, node-independent tilt sequences enumerated
    /// (`2^depth` vertices): vertices transform back into the hull but
    /// general mixtures may not, so stability holds only approximately.
    PathConstant,
}

/// A binomial-tree sample space with a tilted ambiguity set and its
/// filtration, as built by [`pasting_construct`].
#[derive(Debug, Clone)]
pub struct PastingTree {
    pub set: AmbiguitySet,
    /// Partitions by path prefix, from `F_0` (trivial) to `F_depth`
    /// (singletons).
    pub filtration: Vec<Partition>,
    pub regime: PastingRegime,
    pub depth: usize,
    pub tilt: f64,
}

/// Builds the `depth`-step binary tree: atoms are sign paths (lexicographic,
/// minus before plus), the reference measure is uniform, and each vertex
/// tilts every node's step distribution to `(1 ± tilt)/2`.
///
/// `depth` must lie in `1..=12` and `tilt` strictly inside `(0, 1)`. Depths
/// up to 4 enumerate all node-wise tilt assignments (exhaustive regime);
/// deeper trees fall back to path-constant assignments to keep the vertex
/// count at `2^depth`.
pub fn pasting_construct(depth: usize, tilt: f64) -> Result<PastingTree> {
    if !(1..=12).contains(&depth) {
        return Err(Error::DepthOutOfRange { depth });
    }
    if !(tilt > 0.0 && tilt < 1.0) {
        return Err(Error::TiltOutOfRange { tilt });
    }
    let n = 1usize << depth;
    let atoms: Vec<String> = (0..n)
        .map(|path| {
            (0..depth)
                .map(|s| {
                    if (path >> (depth - 1 - s)) & 1 == 1 {
                        '+'
                    } else {
                        '-'
                    }
                })
                .collect()
        })
        .collect();
    let space = SampleSpace::new(atoms, vec![1.0 / n as f64; n])?;

    let filtration: Vec<Partition> = (0..=depth)
        .map(|t| {
            let block_size = 1usize << (depth - t);
            let blocks = (0..(1usize << t))
                .map(|b| (b * block_size..(b + 1) * block_size).collect())
                .collect();
            Partition::new(blocks, n).expect("prefix blocks tile the path space")
        })
        .collect();

    let regime = if depth <= 4 {
        PastingRegime::Exhaustive
    } else {
        PastingRegime::PathConstant
    };
    let vertices = match regime {
        PastingRegime::Exhaustive => {
            // Node index: level-order, offset 2^level - 1 within the tree.
            let node_count = n - 1;
            (0u64..1 << node_count)
                .map(|assignment| {
                    let weights = (0..n)
                        .map(|path| {
                            let mut prob = 1.0;
                            for s in 0..depth {
                                let prefix = path >> (depth - s);
                                let node = (1usize << s) - 1 + prefix;
                                let drift = if (assignment >> node) & 1 == 1 { 1.0 } else { -1.0 };
                                let sign =
                                    if (path >> (depth - 1 - s)) & 1 == 1 { 1.0 } else { -1.0 };
                                prob *= (1.0 + tilt * drift * sign) / 2.0;
                            }
                            prob
                        })
                        .collect();
                    Measure::new(&space, normalize_exact(weights))
                })
                .collect::<Result<Vec<_>>>()?
        }
        PastingRegime::PathConstant => (0usize..n)
            .map(|assignment| {
                let weights = (0..n)
                    .map(|path| {
                        let mut prob = 1.0;
                        for s in 0..depth {
                            let drift =
                                if (assignment >> (depth - 1 - s)) & 1 == 1 { 1.0 } else { -1.0 };
                            let sign = if (path >> (depth - 1 - s)) & 1 == 1 { 1.0 } else { -1.0 };
                            prob *= (1.0 + tilt * drift * sign) / 2.0;
                        }
                        prob
                    })
                    .collect();
                Measure::new(&space, normalize_exact(weights))
            })
            .collect::<Result<Vec<_>>>()?,
    };

    let set = AmbiguitySet::new(space, vertices)?;
    Ok(PastingTree {
        set,
        filtration,
        regime,
        depth,
        tilt,
    })
}
