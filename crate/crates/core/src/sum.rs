//! Deterministic floating point reductions.
//!
//! Every reduction in the crate goes through these helpers so that results do
//! not depend on iteration strategy: a fixed binary split down to blocks of
//! [`BLOCK`] terms, each block summed with Neumaier compensation.

const BLOCK: usize = 256;

/// Pairwise-tree sum of a slice.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    pairwise_sum_by(xs.len(), |i| xs[i])
}

/// Pairwise-tree sum of `term(0) + … + term(len - 1)`.
pub fn pairwise_sum_by<F>(len: usize, term: F) -> f64
where
    F: Fn(usize) -> f64,
{
    sum_range(0, len, &term)
}

fn sum_range<F: Fn(usize) -> f64>(lo: usize, hi: usize, term: &F) -> f64 {
    if hi - lo <= BLOCK {
        let mut acc = Neumaier::default();
        for i in lo..hi {
            acc.add(term(i));
        }
        return acc.total();
    }
    let mid = lo + (hi - lo) / 2;
    sum_range(lo, mid, term) + sum_range(mid, hi, term)
}

/// Neumaier's improved Kahan accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_exact_integer_sum() {
        let xs: Vec<f64> = (0..10_000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 49_995_000.0);
    }

    #[test]
    fn compensation_recovers_small_terms() {
        let mut xs = vec![1.0e16];
        xs.extend(std::iter::repeat_n(1.0, 200));
        xs.push(-1.0e16);
        assert_eq!(pairwise_sum(&xs), 200.0);
    }

    #[test]
    fn empty_sum_is_zero() {
        assert_eq!(pairwise_sum(&[]), 0.0);
    }
}
