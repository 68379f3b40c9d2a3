//! Finite probability spaces and their measure-theoretic primitives.
//!
//! Everything in this crate lives on a finite sample space: a list of atoms
//! together with a strictly positive reference measure `P0`. Observability is
//! a [`Partition`] of the atoms — the finite analogue of a sub-sigma-algebra:
//! a random variable is "observable" when it is constant on every block.
//!
//! [`Measure`] stores both atom weights and the density `dP/dP0`, which is
//! just the weight ratio atom by atom. Keeping the density around makes the
//! change-of-measure arithmetic in the rest of the crate explicit instead of
//! implicit, and it is exact: `weight = density * base_weight` holds by
//! construction.
//!
//! The free functions at the bottom are the workhorses:
//!
//! - [`expectation`]: plain `E_P[xi]`.
//! - [`cond_expectation`]: blockwise averages `E_P[xi | C]`, returned as a
//!   random variable constant on each block.
//! - [`cond_density`]: the conditional density `E_P0[dP/dP0 | C]`, i.e. the
//!   block mass ratio `P(B) / P0(B)` spread over each block.
//! - [`check_equivalence`]: is every atom weight strictly positive, and is
//!   any of them too small to condition on comfortably?

use crate::{tol, Error, Result};

/// A finite sample space: atom labels plus a strictly positive reference
/// measure that sums to one.
///
/// The reference measure is the yardstick every other measure is compared
/// against; atoms lighter than [`tol::MIN_BASE_WEIGHT`] are rejected outright
/// because density ratios against them are numerically meaningless.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSpace {
    atoms: Vec<String>,
    base_weights: Vec<f64>,
}

impl SampleSpace {
    /// Builds a space from atom labels and reference weights.
    ///
    /// Fails if the lists are empty or of different lengths, if any weight is
    /// non-finite or below [`tol::MIN_BASE_WEIGHT`], or if the weights do not
    /// sum to one within [`tol::WEIGHT_SUM`].
    pub fn new(atoms: Vec<String>, base_weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptySpace);
        }
        if atoms.len() != base_weights.len() {
            return Err(Error::LengthMismatch {
                what: "base_weights",
                expected: atoms.len(),
                got: base_weights.len(),
            });
        }
        for (i, &w) in base_weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::NonFinite {
                    what: format!("base_weights[{i}]"),
                });
            }
            if w < tol::MIN_BASE_WEIGHT {
                return Err(Error::BaseWeightTooSmall {
                    index: i,
                    value: w,
                    min: tol::MIN_BASE_WEIGHT,
                });
            }
        }
        check_weight_sum("base_weights", &base_weights, tol::WEIGHT_SUM)?;
        Ok(Self {
            atoms,
            base_weights,
        })
    }

    /// The uniform space on `n` atoms labelled `w0, w1, ...`.
    pub fn uniform(n: usize) -> Result<Self> {
        let atoms = (0..n).map(|i| format!("w{i}")).collect();
        let base_weights = vec![1.0 / n as f64; n];
        Self::new(atoms, base_weights)
    }

    /// Number of atoms.
    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    /// Atom labels, in index order.
    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    /// Reference weights, in atom order.
    pub fn base_weights(&self) -> &[f64] {
        &self.base_weights
    }

    /// Mass of each block of `c` under the reference measure.
    pub fn base_block_masses(&self, c: &Partition) -> Vec<f64> {
        c.blocks()
            .iter()
            .map(|block| block.iter().map(|&i| self.base_weights[i]).sum())
            .collect()
    }

    /// The reference measure as a [`Measure`] (density identically one).
    pub fn base_measure(&self) -> Measure {
        Measure {
            weights: self.base_weights.clone(),
            density: vec![1.0; self.atoms.len()],
        }
    }
}

/// A real-valued function on the atoms of a sample space.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomVariable {
    values: Vec<f64>,
}

impl RandomVariable {
    /// Wraps a value vector; every entry must be finite.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySpace);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "random variable values".into(),
            });
        }
        Ok(Self { values })
    }

    /// The constant variable `c` on `n` atoms.
    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; n])
    }

    /// Values in atom order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of atoms.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// True when the space has no atoms (never, for constructed values).
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Pointwise sum.
    pub fn add(&self, other: &RandomVariable) -> Result<RandomVariable> {
        self.zip_with(other, |a, b| a + b)
    }

    /// Pointwise difference.
    pub fn sub(&self, other: &RandomVariable) -> Result<RandomVariable> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Pointwise scaling by `lambda` (any sign).
    pub fn scale(&self, lambda: f64) -> Result<RandomVariable> {
        RandomVariable::new(self.values.iter().map(|v| v * lambda).collect())
    }

    /// Pointwise square.
    pub fn squared(&self) -> Result<RandomVariable> {
        RandomVariable::new(self.values.iter().map(|v| v * v).collect())
    }

    /// True when the variable is constant on every block of `c` (within an
    /// exact comparison; observable variables are constructed blockwise, so
    /// no tolerance is needed).
    pub fn is_measurable(&self, c: &Partition) -> bool {
        c.blocks().iter().all(|block| {
            let first = self.values[block[0]];
            block.iter().all(|&i| self.values[i] == first)
        })
    }

    fn zip_with(&self, other: &RandomVariable, f: impl Fn(f64, f64) -> f64) -> Result<RandomVariable> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                what: "random variable",
                expected: self.len(),
                got: other.len(),
            });
        }
        RandomVariable::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }
}

/// A partition of the atoms into disjoint, covering, non-empty blocks.
///
/// Stored in canonical form: atoms sorted within each block, blocks sorted by
/// their smallest atom. Two partitions constructed from the same blocks in
/// any order therefore compare equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    /// `block_of[atom]` is the index of the block containing `atom`.
    block_of: Vec<usize>,
}

impl Partition {
    /// Builds and canonicalizes a partition of `0..atom_count`.
    ///
    /// Fails when an index is out of range, an atom appears twice, a block is
    /// empty, or some atom is missing.
    pub fn new(blocks: Vec<Vec<usize>>, atom_count: usize) -> Result<Self> {
        if atom_count == 0 {
            return Err(Error::EmptySpace);
        }
        let mut blocks = blocks;
        let mut seen = vec![false; atom_count];
        for (b, block) in blocks.iter_mut().enumerate() {
            if block.is_empty() {
                return Err(Error::BadPartition {
                    reason: format!("block {b} is empty"),
                });
            }
            block.sort_unstable();
            for &i in block.iter() {
                if i >= atom_count {
                    return Err(Error::BadPartition {
                        reason: format!("block {b} contains atom index {i}, but the space has {atom_count} atoms"),
                    });
                }
                if seen[i] {
                    return Err(Error::BadPartition {
                        reason: format!("atom {i} appears in more than one block"),
                    });
                }
                seen[i] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::BadPartition {
                reason: format!("atom {missing} is not covered by any block"),
            });
        }
        blocks.sort_by_key(|block| block[0]);
        let mut block_of = vec![0usize; atom_count];
        for (b, block) in blocks.iter().enumerate() {
            for &i in block {
                block_of[i] = b;
            }
        }
        Ok(Self { blocks, block_of })
    }

    /// The one-block partition: the observer sees nothing.
    pub fn trivial(atom_count: usize) -> Self {
        Self::new(vec![(0..atom_count).collect()], atom_count)
            .expect("trivial partition of a non-empty space is always valid")
    }

    /// The finest partition: the observer sees everything.
    pub fn singletons(atom_count: usize) -> Self {
        Self::new((0..atom_count).map(|i| vec![i]).collect(), atom_count)
            .expect("singleton partition of a non-empty space is always valid")
    }

    /// Blocks in canonical order.
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Number of blocks.
    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Index of the block containing `atom`.
    pub fn block_of(&self, atom: usize) -> usize {
        self.block_of[atom]
    }

    /// Number of atoms partitioned.
    pub fn atom_count(&self) -> usize {
        self.block_of.len()
    }

    /// True when every block of `self` lies inside a single block of
    /// `coarser` — i.e. `self` carries at least as much information.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.atom_count() == coarser.atom_count()
            && self.blocks.iter().all(|block| {
                let target = coarser.block_of[block[0]];
                block.iter().all(|&i| coarser.block_of[i] == target)
            })
    }
}

/// A probability measure on a sample space, stored as atom weights together
/// with the density `dP/dP0` relative to the space's reference measure.
///
/// Weights may be zero (such a measure is not equivalent to the reference;
/// [`check_equivalence`] reports this), but never negative, and they sum to
/// one within [`tol::WEIGHT_SUM`].
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    weights: Vec<f64>,
    density: Vec<f64>,
}

impl Measure {
    /// Builds a measure on `space` from atom weights.
    pub fn new(space: &SampleSpace, weights: Vec<f64>) -> Result<Self> {
        validate_weights("measure weights", &weights, space.atom_count())?;
        let density = weights
            .iter()
            .zip(space.base_weights())
            .map(|(&w, &b)| w / b)
            .collect();
        Ok(Self { weights, density })
    }

    /// Builds a measure from a density relative to the reference measure.
    pub fn from_density(space: &SampleSpace, density: Vec<f64>) -> Result<Self> {
        if density.len() != space.atom_count() {
            return Err(Error::LengthMismatch {
                what: "density",
                expected: space.atom_count(),
                got: density.len(),
            });
        }
        let weights: Vec<f64> = density
            .iter()
            .zip(space.base_weights())
            .map(|(&d, &b)| d * b)
            .collect();
        validate_weights("density-induced weights", &weights, space.atom_count())?;
        Ok(Self { weights, density })
    }

    /// Atom weights.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Density `dP/dP0`, atom by atom.
    pub fn density(&self) -> &[f64] {
        &self.density
    }

    /// Mass of each block of `c` under this measure.
    pub fn block_masses(&self, c: &Partition) -> Vec<f64> {
        c.blocks()
            .iter()
            .map(|block| block.iter().map(|&i| self.weights[i]).sum())
            .collect()
    }
}

/// Outcome of an equivalence check against the reference measure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceReport {
    /// True when every atom has strictly positive weight.
    pub equivalent: bool,
    /// Atoms whose weight is positive but below [`tol::EQUIVALENCE_WARN`]:
    /// equivalence holds, yet conditioning through these atoms is fragile.
    pub ill_conditioned: Vec<usize>,
}

/// Checks whether `p` is equivalent to the reference measure (strictly
/// positive everywhere) and flags atoms too light to condition on safely.
pub fn check_equivalence(p: &Measure) -> EquivalenceReport {
    let mut equivalent = true;
    let mut ill_conditioned = Vec::new();
    for (i, &w) in p.weights().iter().enumerate() {
        if w <= 0.0 {
            equivalent = false;
        } else if w < tol::EQUIVALENCE_WARN {
            ill_conditioned.push(i);
        }
    }
    EquivalenceReport {
        equivalent,
        ill_conditioned,
    }
}

/// `E_P[xi]`: the plain expectation of `xi` under `p`.
pub fn expectation(xi: &RandomVariable, p: &Measure) -> Result<f64> {
    if xi.len() != p.weights().len() {
        return Err(Error::LengthMismatch {
            what: "expectation operands",
            expected: p.weights().len(),
            got: xi.len(),
        });
    }
    Ok(xi
        .values()
        .iter()
        .zip(p.weights())
        .map(|(&x, &w)| x * w)
        .sum())
}

/// `E_P[xi | C]`: the conditional expectation of `xi` given the partition
/// `c`, returned as a random variable constant on each block.
///
/// Every block must carry strictly positive mass under `p`; conditioning on
/// a null block is undefined and rejected.
pub fn cond_expectation(xi: &RandomVariable, p: &Measure, c: &Partition) -> Result<RandomVariable> {
    let n = c.atom_count();
    if xi.len() != n {
        return Err(Error::LengthMismatch {
            what: "conditional expectation variable",
            expected: n,
            got: xi.len(),
        });
    }
    if p.weights().len() != n {
        return Err(Error::LengthMismatch {
            what: "conditional expectation measure",
            expected: n,
            got: p.weights().len(),
        });
    }
    let mut out = vec![0.0; n];
    for (b, block) in c.blocks().iter().enumerate() {
        let mass: f64 = block.iter().map(|&i| p.weights()[i]).sum();
        if mass <= 0.0 {
            return Err(Error::ZeroBlockMass { block: b });
        }
        // A one-atom block conditions to the atom's own value; computing
        // (w*x)/w instead would cost a rounding error for nothing.
        if let [atom] = block[..] {
            out[atom] = xi.values()[atom];
            continue;
        }
        let avg: f64 = block
            .iter()
            .map(|&i| p.weights()[i] * xi.values()[i])
            .sum::<f64>()
            / mass;
        for &i in block {
            out[i] = avg;
        }
    }
    RandomVariable::new(out)
}

/// The conditional density `E_P0[dP/dP0 | C]`: on each block `B` this is the
/// mass ratio `P(B) / P0(B)`, spread as a block-constant random variable.
pub fn cond_density(space: &SampleSpace, p: &Measure, c: &Partition) -> Result<RandomVariable> {
    let n = space.atom_count();
    if p.weights().len() != n {
        return Err(Error::LengthMismatch {
            what: "conditional density measure",
            expected: n,
            got: p.weights().len(),
        });
    }
    if c.atom_count() != n {
        return Err(Error::LengthMismatch {
            what: "conditional density partition",
            expected: n,
            got: c.atom_count(),
        });
    }
    let mut out = vec![0.0; n];
    for block in c.blocks() {
        let p_mass: f64 = block.iter().map(|&i| p.weights()[i]).sum();
        let base_mass: f64 = block.iter().map(|&i| space.base_weights()[i]).sum();
        let ratio = p_mass / base_mass;
        for &i in block {
            out[i] = ratio;
        }
    }
    RandomVariable::new(out)
}

fn validate_weights(what: &str, weights: &[f64], expected_len: usize) -> Result<()> {
    if weights.len() != expected_len {
        return Err(Error::LengthMismatch {
            what: "measure weights",
            expected: expected_len,
            got: weights.len(),
        });
    }
    for (i, &w) in weights.iter().enumerate() {
        if !w.is_finite() {
            return Err(Error::NonFinite {
                what: format!("{what}[{i}]"),
            });
        }
        if w < 0.0 {
            return Err(Error::NegativeWeight {
                what: what.to_string(),
                index: i,
                value: w,
            });
        }
    }
    check_weight_sum(what, weights, tol::WEIGHT_SUM)
}

fn check_weight_sum(what: &str, weights: &[f64], tolerance: f64) -> Result<()> {
    let sum = compensated_sum(weights);
    if (sum - 1.0).abs() > tolerance {
        return Err(Error::WeightSum {
            what: what.to_string(),
            sum,
            tolerance,
        });
    }
    Ok(())
}

/// Kahan-compensated sum: spaces with thousands of atoms would otherwise
/// accumulate enough rounding error in a plain sum to trip the strict
/// weight-sum tolerance.
pub(crate) fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for &v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}
