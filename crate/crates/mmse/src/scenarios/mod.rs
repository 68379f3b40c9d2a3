//! Ready-made estimation problems and deterministic generators.
//!
//! Three built-in families exercise qualitatively different corners of the
//! solver:
//!
//! * [`example_41`] — a two-atom, two-vertex workbench whose saddle point
//!   is known in closed form; the smallest problem on which everything can
//!   be checked by hand.
//! * [`example_42_truncated`] — a truncated countable family with
//!   geometric-tail vertices and a fast-growing payoff. It ships with
//!   [`Ex42Closure`], a closed-form candidate for the worst-case mixture
//!   whose feasibility the caller can inspect: the printed root lies far
//!   outside the unit interval at realistic truncation levels, while the
//!   solver certifies a boundary optimum instead. Both sides are recorded
//!   so the discrepancy is auditable, not hidden.
//! * [`example_43_tree`] — drift-tilted binary trees built by pasting, on
//!   which the dynamically consistent sublinear smoother and the minimax
//!   estimator can be compared level by level. They genuinely differ, and
//!   [`conditional_sublinear`] / [`backward_recursion`] compute the
//!   smoother two independent ways to keep that comparison honest.
//!
//! Deterministic random generators ([`random_scenario`],
//! [`random_pasting_scenario`]) feed the property suites; the same seed and
//! index always reproduce the same problem. File loading and report
//! writing live in [`io`].

pub mod io;

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ambiguity::{normalize_exact, pasting_construct, AmbiguitySet};
use crate::space::{Measure, Partition, RandomVariable, SampleSpace};
use crate::{Error, Result};

/// A complete estimation problem: ambiguity set (which carries the sample
/// space), conditioning partition, payoff, and naming metadata.
///
/// Construction validates that every component refers to the same atom
/// list, so downstream code can consume the pieces without re-checking.
#[derive(Debug, Clone)]
pub struct Scenario {
    name: String,
    description: String,
    ambiguity: AmbiguitySet,
    partition: Partition,
    xi: RandomVariable,
}

impl Scenario {
    /// Bundles the pieces of a problem, checking that the partition and
    /// payoff are sized for the ambiguity set's sample space.
    pub fn new(
        name: impl Into<String>,
        description: impl Into<String>,
        ambiguity: AmbiguitySet,
        partition: Partition,
        xi: RandomVariable,
    ) -> Result<Self> {
        let n = ambiguity.space().atom_count();
        if partition.atom_count() != n {
            return Err(Error::LengthMismatch {
                what: "scenario partition",
                expected: n,
                got: partition.atom_count(),
            });
        }
        if xi.len() != n {
            return Err(Error::LengthMismatch {
                what: "scenario payoff",
                expected: n,
                got: xi.len(),
            });
        }
        Ok(Self {
            name: name.into(),
            description: description.into(),
            ambiguity,
            partition,
            xi,
        })
    }

    /// Short identifier, used in reports and file metadata.
    pub fn name(&self) -> &str {
        &self.name
    }

    /// One-line human description.
    pub fn description(&self) -> &str {
        &self.description
    }

    /// The sample space every component lives on.
    pub fn space(&self) -> &SampleSpace {
        self.ambiguity.space()
    }

    /// The conditioning partition.
    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    /// The ambiguity set.
    pub fn ambiguity(&self) -> &AmbiguitySet {
        &self.ambiguity
    }

    /// The payoff being estimated.
    pub fn xi(&self) -> &RandomVariable {
        &self.xi
    }
}

/// Closed-form companion to [`example_42_truncated`]: the candidate
/// worst-case mixture parameter obtained by solving the interior
/// stationarity system in closed form, evaluated on the truncated series.
///
/// The candidate need not be feasible — and at every truncation level in
/// the supported range it is not: `lambda_star` exceeds one, so the
/// implied atom weights `p` are the coordinates of a signed measure, not a
/// probability. The feasibility flags record exactly which requirements
/// fail so callers can report the discrepancy instead of silently trusting
/// the formula. The true optimum then lies on the boundary of the mixture
/// segment, which the solver finds and certifies independently.
#[derive(Debug, Clone)]
pub struct Ex42Closure {
    /// Truncation level: the sample space keeps integers `1..=n`.
    pub n: usize,
    /// Root of the interior stationarity system on the truncated series.
    pub lambda_star: f64,
    /// Candidate weights for atoms `2..=n` implied by `lambda_star`
    /// (`p[j]` belongs to atom `j + 2`). The weight of atom 1 is one minus
    /// their sum.
    pub p: Vec<f64>,
    /// Intermediate ratio from the stationarity system.
    pub f_value: f64,
    /// Geometric bound on everything the truncation discarded from the
    /// worst-case mean series; strictly decreasing in `n`.
    pub tail_bound: f64,
    /// Difference between the two vertices' means (first minus second),
    /// computed from the raw series. Negative exactly when the second
    /// vertex attains the worst-case mean.
    pub mean_gap_raw: f64,
    /// Whether every candidate weight in `p` is nonnegative.
    pub p_nonneg: bool,
    /// Whether the candidate weights total at most one, i.e. whether the
    /// implied weight of atom 1 is nonnegative.
    pub p_mass_feasible: bool,
    /// Whether `lambda_star` lies in the unit interval, i.e. whether the
    /// candidate is a point of the mixture segment at all.
    pub lambda_feasible: bool,
}

/// Two atoms, two crossed vertices `(1/3, 2/3)` and `(2/3, 1/3)`, payoff
/// `(2, 6)`, trivial partition, uniform reference measure.
///
/// The worst case is the midpoint mixture, the estimator is the constant 4,
/// and the worst-case error is 4 — small enough to verify by hand, which
/// makes this the canonical smoke test.
pub fn example_41() -> Scenario {
    let space = SampleSpace::new(
        vec!["heads".into(), "tails".into()],
        vec![0.5, 0.5],
    )
    .expect("static two-point space is valid");
    let p1 = Measure::new(&space, vec![1.0 / 3.0, 2.0 / 3.0]).expect("valid vertex");
    let p2 = Measure::new(&space, vec![2.0 / 3.0, 1.0 / 3.0]).expect("valid vertex");
    let ambiguity = AmbiguitySet::new(space, vec![p1, p2]).expect("equivalent vertices");
    let xi = RandomVariable::new(vec![2.0, 6.0]).expect("finite payoff");
    Scenario::new(
        "two-point",
        "Two crossed vertices on a coin flip; saddle point known in closed form.",
        ambiguity,
        Partition::trivial(2),
        xi,
    )
    .expect("components share the two-atom space")
}

/// Truncated geometric-tail family on atoms `1..=n`: vertex one puts mass
/// proportional to `1/2^i` on atom `i`, vertex two proportional to
/// `2/3^i`, the payoff is `1` on atom 1 and `2^i/i^4` beyond, the
/// partition is trivial, and the reference measure is the vertex
/// barycenter. Both vertices are renormalized to total mass one after
/// truncation.
///
/// Returns the scenario together with the closed-form candidate described
/// on [`Ex42Closure`]. Truncation levels outside `5..=60` are rejected:
/// below 5 the series carry no information, above 60 the payoff outgrows
/// comfortable double-precision headroom.
pub fn example_42_truncated(n: usize) -> Result<(Scenario, Ex42Closure)> {
    const LO: usize = 5;
    const HI: usize = 60;
    if !(LO..=HI).contains(&n) {
        return Err(Error::TruncationOutOfRange { n, lo: LO, hi: HI });
    }

    let atoms: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
    let xi: Vec<f64> = (1..=n)
        .map(|i| {
            if i == 1 {
                1.0
            } else {
                2f64.powi(i as i32) / (i as f64).powi(4)
            }
        })
        .collect();
    let w1 = normalize_exact((1..=n).map(|i| 0.5f64.powi(i as i32)).collect());
    let w2 = normalize_exact((1..=n).map(|i| 2.0 * 3f64.powi(i as i32).recip()).collect());
    // Reference measure: the vertex barycenter, blended with a vanishing
    // uniform component. The pure barycenter's deep-tail weights drop below
    // the construction floor on reference atom weights around level 39; the
    // blend keeps every atom chargeable. The estimator and the worst-case
    // mean depend only on the vertex hull, never on the reference measure
    // (a tested invariant), so the blend changes nothing downstream.
    const UNIFORM_BLEND: f64 = 1e-9;
    let uniform = (n as f64).recip();
    let base = normalize_exact(
        w1.iter()
            .zip(&w2)
            .map(|(a, b)| (1.0 - UNIFORM_BLEND) * 0.5 * (a + b) + UNIFORM_BLEND * uniform)
            .collect(),
    );
    let space = SampleSpace::new(atoms, base)?;
    let p1 = Measure::new(&space, w1)?;
    let p2 = Measure::new(&space, w2)?;
    let ambiguity = AmbiguitySet::new(space, vec![p1, p2])?;
    let scenario = Scenario::new(
        format!("geometric-tails-{n}"),
        "Two geometric-tail vertices on a truncated integer line with a \
         fast-growing payoff; ships a closed-form candidate for cross-checking.",
        ambiguity,
        Partition::trivial(n),
        RandomVariable::new(xi)?,
    )?;

    // Closed-form candidate, evaluated on the same truncated series. All
    // sums run over atoms 2..=n; atom 1's payoff is the constant 1 that the
    // `g` factors subtract.
    let mut s_quad = 0.0; // sum of (1/2^m - 2/3^m) (2^m/m^4 - 1)^2
    let mut s_lin = 0.0; //  sum of (1/2^m - 2/3^m) (2^m/m^4 - 1)
    let mut s_two = 0.0; //  sum of (2/3^m)         (2^m/m^4 - 1)
    let mut mean_gap_raw = -1.0 / 6.0;
    for m in 2..=n {
        let mi = m as i32;
        let a = 0.5f64.powi(mi) - 2.0 * 3f64.powi(mi).recip();
        let two_thirds = 2.0 * 3f64.powi(mi).recip();
        let g = 2f64.powi(mi) / (m as f64).powi(4) - 1.0;
        s_quad += a * g * g;
        s_lin += a * g;
        s_two += two_thirds * g;
        mean_gap_raw += (m as f64).powi(4).recip() - 2f64.powi(mi + 1) / (3f64.powi(mi) * (m as f64).powi(4));
    }
    let f_value = s_quad / (2.0 * s_lin);
    let lambda_star = (f_value - s_two) / s_lin;
    let p: Vec<f64> = (2..=n)
        .map(|i| {
            let ii = i as i32;
            lambda_star * 0.5f64.powi(ii) + 2.0 * (1.0 - lambda_star) * 3f64.powi(ii).recip()
        })
        .collect();
    let mass: f64 = p.iter().sum();
    let tail_bound =
        6.0 * (2.0f64 / 3.0).powi(n as i32 + 1) / ((n + 1) as f64).powi(4);
    let closure = Ex42Closure {
        n,
        lambda_star,
        f_value,
        tail_bound,
        mean_gap_raw,
        p_nonneg: p.iter().all(|&v| v >= 0.0),
        p_mass_feasible: mass <= 1.0 + 1e-12,
        lambda_feasible: (0.0..=1.0).contains(&lambda_star),
        p,
    };
    Ok((scenario, closure))
}

/// Drift-tilted binary tree of the given depth, with the walk's terminal
/// sum as payoff and the first-step partition as the conditioning event.
///
/// Depth is restricted to `2..=4`, where the pasting construction
/// enumerates node-wise drift assignments and the resulting set is stable
/// under conditioning at every level. Returns the scenario together with
/// the full filtration (time-`t` partitions, coarsest first) so callers
/// can smooth the payoff level by level.
pub fn example_43_tree(depth: usize, tilt: f64) -> Result<(Scenario, Vec<Partition>)> {
    if !(2..=4).contains(&depth) {
        return Err(Error::DepthOutOfRange { depth });
    }
    let tree = pasting_construct(depth, tilt)?;
    let xi: Vec<f64> = tree
        .set
        .space()
        .atoms()
        .iter()
        .map(|path| {
            path.chars()
                .map(|step| if step == '+' { 1.0 } else { -1.0 })
                .sum()
        })
        .collect();
    let partition = tree.filtration[1].clone();
    let filtration = tree.filtration.clone();
    let scenario = Scenario::new(
        format!("drift-tree-{depth}"),
        "Binary tree with drift-tilted transition kernels pasted at every \
         node; payoff is the walk's terminal sum.",
        tree.set,
        partition,
        RandomVariable::new(xi)?,
    )?;
    Ok((scenario, filtration))
}

/// Product-structured problem whose worst case is attained on a whole face
/// of the simplex: every vertex shares the block marginal, only the
/// within-block conditional varies, and the payoff depends on the
/// within-block coordinate alone.
///
/// The worst-case mixture is far from unique (any blend with within-block
/// conditional one half is optimal) but the estimator is pinned at the
/// constant one half — the canonical witness that estimator uniqueness
/// survives mixture degeneracy.
pub fn independent_scenario() -> Scenario {
    let space = SampleSpace::new(
        vec!["a0".into(), "a1".into(), "b0".into(), "b1".into()],
        vec![0.25; 4],
    )
    .expect("static uniform space is valid");
    let block_mass = [0.3, 0.7];
    let conditionals = [[0.5, 0.5], [0.2, 0.8], [0.8, 0.2]];
    let vertices: Vec<Measure> = conditionals
        .iter()
        .map(|r| {
            let weights = vec![
                block_mass[0] * r[0],
                block_mass[0] * r[1],
                block_mass[1] * r[0],
                block_mass[1] * r[1],
            ];
            Measure::new(&space, weights).expect("positive product weights")
        })
        .collect();
    let ambiguity = AmbiguitySet::new(space, vertices).expect("equivalent vertices");
    Scenario::new(
        "independent-blocks",
        "Shared block marginal with varying within-block conditionals; the \
         worst-case mixture is a whole face but the estimator is unique.",
        ambiguity,
        Partition::new(vec![vec![0, 1], vec![2, 3]], 4).expect("two blocks"),
        RandomVariable::new(vec![0.0, 1.0, 0.0, 1.0]).expect("finite payoff"),
    )
    .expect("components share the four-atom space")
}

/// Smooths the payoff through a filtration: at each level, the blockwise
/// maximum over the vertices of the conditional expectation.
///
/// `c_list` must refine forward in time (each partition refines its
/// predecessor). On ambiguity sets closed under pasting this equals the
/// backward dynamic-programming recursion ([`backward_recursion`]), and
/// the two are computed independently so tests can compare them. At the
/// trivial partition the result is the constant worst-case mean; at the
/// singleton partition it is the payoff itself.
pub fn conditional_sublinear(
    xi: &RandomVariable,
    a: &AmbiguitySet,
    c_list: &[Partition],
) -> Result<Vec<RandomVariable>> {
    validate_filtration(xi, a, c_list)?;
    c_list
        .iter()
        .map(|c| blockwise_vertex_max(xi, a, c))
        .collect()
}

/// Backward dynamic-programming smoother: starts from the finest level and
/// repeatedly applies the one-step blockwise vertex maximum of the
/// conditional expectation of the *previous level's* result.
///
/// Returns one random variable per partition in `c_list`, coarsest first,
/// like [`conditional_sublinear`]; the two agree on pasting-stable sets.
pub fn backward_recursion(
    xi: &RandomVariable,
    a: &AmbiguitySet,
    c_list: &[Partition],
) -> Result<Vec<RandomVariable>> {
    validate_filtration(xi, a, c_list)?;
    let mut out: Vec<RandomVariable> = Vec::with_capacity(c_list.len());
    let mut current = xi.clone();
    for c in c_list.iter().rev() {
        current = blockwise_vertex_max(&current, a, c)?;
        out.push(current.clone());
    }
    out.reverse();
    Ok(out)
}

fn validate_filtration(
    xi: &RandomVariable,
    a: &AmbiguitySet,
    c_list: &[Partition],
) -> Result<()> {
    let n = a.space().atom_count();
    if xi.len() != n {
        return Err(Error::LengthMismatch {
            what: "smoother payoff",
            expected: n,
            got: xi.len(),
        });
    }
    for (level, c) in c_list.iter().enumerate() {
        if c.atom_count() != n {
            return Err(Error::LengthMismatch {
                what: "smoother partition",
                expected: n,
                got: c.atom_count(),
            });
        }
        if level > 0 && !c.refines(&c_list[level - 1]) {
            return Err(Error::NotAFiltration {
                level,
                prev: level - 1,
            });
        }
    }
    Ok(())
}

/// One smoothing step: on each block, the maximum over vertices of the
/// block mean. Vertices are equivalent to the reference measure, so every
/// block carries positive mass under every vertex.
fn blockwise_vertex_max(
    xi: &RandomVariable,
    a: &AmbiguitySet,
    c: &Partition,
) -> Result<RandomVariable> {
    let mut out = vec![0.0; xi.len()];
    for block in c.blocks() {
        let mut best = f64::NEG_INFINITY;
        for vertex in a.vertices() {
            let mut mass = 0.0;
            let mut weighted = 0.0;
            for &i in block {
                mass += vertex.weights()[i];
                weighted += vertex.weights()[i] * xi.values()[i];
            }
            let mean = weighted / mass;
            if mean > best {
                best = mean;
            }
        }
        for &i in block {
            out[i] = best;
        }
    }
    RandomVariable::new(out)
}

/// Deterministic random problem: `seed` selects a stream family and
/// `index` the member, so suites can enumerate reproducible cases. Atom
/// and vertex counts are drawn from the given ranges; the partition uses
/// at most three blocks, the payoff is bounded by 5 in absolute value, and
/// every vertex is strictly positive (hence equivalent to the reference).
pub fn random_scenario(
    seed: u64,
    index: u64,
    atoms: RangeInclusive<usize>,
    vertices: RangeInclusive<usize>,
) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let n = rng.gen_range(atoms);
    let k = rng.gen_range(vertices);

    let base = normalize_exact((0..n).map(|_| rng.gen_range(0.2..1.0)).collect());
    let space = SampleSpace::new(
        (0..n).map(|i| format!("w{i}")).collect(),
        base,
    )
    .expect("positive normalized base weights");
    let vertex_measures: Vec<Measure> = (0..k)
        .map(|_| {
            let raw = normalize_exact((0..n).map(|_| rng.gen_range(0.05..1.0)).collect());
            Measure::new(&space, raw).expect("positive normalized weights")
        })
        .collect();
    let ambiguity =
        AmbiguitySet::new(space, vertex_measures).expect("strictly positive vertices");

    let block_count = rng.gen_range(1..=n.min(3));
    let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); block_count];
    for atom in 0..n {
        let b = rng.gen_range(0..block_count);
        blocks[b].push(atom);
    }
    blocks.retain(|b| !b.is_empty());
    let partition = Partition::new(blocks, n).expect("every atom assigned once");

    let xi = RandomVariable::new((0..n).map(|_| rng.gen_range(-5.0..5.0)).collect::<Vec<_>>())
        .expect("finite payoff");
    Scenario::new(
        format!("random-{seed}-{index}"),
        "Generated problem for property suites.",
        ambiguity,
        partition,
        xi,
    )
    .expect("generated components share one space")
}

/// Deterministic random pasting-stable problem: a drift-tilted tree of
/// depth 2–4 with a random payoff and a randomly chosen interior level as
/// the conditioning partition. Returns the scenario and the full
/// filtration. Same reproducibility contract as [`random_scenario`].
pub fn random_pasting_scenario(seed: u64, index: u64) -> (Scenario, Vec<Partition>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(0x5CEA_A105));
    let depth = rng.gen_range(2..=4usize);
    let tilt = rng.gen_range(0.15..0.85);
    let tree = pasting_construct(depth, tilt).expect("depth and tilt in range");
    let n = tree.set.space().atom_count();
    let xi = RandomVariable::new((0..n).map(|_| rng.gen_range(-3.0..3.0)).collect::<Vec<_>>())
        .expect("finite payoff");
    let level = rng.gen_range(1..depth);
    let partition = tree.filtration[level].clone();
    let filtration = tree.filtration.clone();
    let scenario = Scenario::new(
        format!("pasting-{seed}-{index}"),
        "Generated drift-tree problem for property suites.",
        tree.set,
        partition,
        xi,
    )
    .expect("tree components share one space");
    (scenario, filtration)
}
