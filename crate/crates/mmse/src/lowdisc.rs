//! Deterministic low-discrepancy sampling of the probability simplex.
//!
//! Stability checks need mixture weights that cover the simplex evenly and
//! reproducibly. We take a Halton sequence in the unit cube and map each
//! point to the simplex through the uniform-spacings construction: sort the
//! coordinates, prepend 0, append 1, and read off the gaps. The result is a
//! deterministic sequence of interior-leaning weight vectors.

/// `index`-th element (1-based internally) of the van der Corput sequence in
/// the given base.
fn van_der_corput(mut index: u64, base: u64) -> f64 {
    let mut result = 0.0;
    let mut denom = 1.0;
    while index > 0 {
        denom *= base as f64;
        result += (index % base) as f64 / denom;
        index /= base;
    }
    result
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// First `count` points of a low-discrepancy sequence on the `k`-simplex
/// (vectors of `k` non-negative entries summing to one).
///
/// Deterministic: the same `(k, count)` always yields the same points. For
/// `k` beyond the prime table the Halton bases wrap around, which is fine for
/// the coverage purposes this serves.
pub(crate) fn simplex_sequence(k: usize, count: usize) -> Vec<Vec<f64>> {
    assert!(k >= 1);
    if k == 1 {
        return vec![vec![1.0]; count];
    }
    let mut out = Vec::with_capacity(count);
    for step in 0..count {
        // Skip index 0 (it maps to all-zero coordinates -> a vertex).
        let index = step as u64 + 1;
        let mut cuts: Vec<f64> = (0..k - 1)
            .map(|dim| van_der_corput(index, PRIMES[dim % PRIMES.len()]))
            .collect();
        cuts.sort_by(f64::total_cmp);
        let mut weights = Vec::with_capacity(k);
        let mut prev = 0.0;
        for &c in &cuts {
            weights.push(c - prev);
            prev = c;
        }
        weights.push(1.0 - prev);
        out.push(weights);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_lie_on_the_simplex() {
        for k in 1..=6 {
            for w in simplex_sequence(k, 200) {
                assert_eq!(w.len(), k);
                assert!(w.iter().all(|&x| (0.0..=1.0).contains(&x)));
                let sum: f64 = w.iter().sum();
                assert!((sum - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sequence_is_deterministic() {
        assert_eq!(simplex_sequence(4, 50), simplex_sequence(4, 50));
    }

    #[test]
    fn sequence_spreads_out() {
        // Crude coverage check: with 64 points on the 2-simplex, each third
        // of the first coordinate's range should be hit.
        let pts = simplex_sequence(3, 64);
        let mut hit = [false; 3];
        for p in &pts {
            hit[(p[0] * 3.0).min(2.0) as usize] = true;
        }
        assert!(hit.iter().all(|&h| h));
    }
}
