use serde::{Deserialize, Serialize};

use crate::dyadic::GridCap;
use crate::error::{Error, Result};

/// Parameters shared by the sine test functions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateConfig {
    /// Small amplitude `ε ∈ (0, 1)`.
    pub epsilon: f64,
    /// Scale `n`; hyperbolic shapes have `|r| = n`.
    pub n: u32,
    /// Prefix cutoff `|s| ≤ ⌊num · n / den⌋`.
    pub s_cap_numerator: u32,
    pub s_cap_denominator: u32,
    pub grid_cap: GridCap,
}

impl CertificateConfig {
    pub const DEFAULT_EPSILON: f64 = 0.2;

    pub fn new(epsilon: f64, n: u32) -> Result<Self> {
        let cfg = Self {
            epsilon,
            n,
            s_cap_numerator: 3,
            s_cap_denominator: 4,
            grid_cap: GridCap::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The smallest admissible `n` for `N` points: `2N ≤ 2^n`.
    pub fn natural_n(n_points: usize) -> u32 {
        (2 * n_points as u64).next_power_of_two().trailing_zeros()
    }

    pub fn for_points(epsilon: f64, n_points: usize) -> Result<Self> {
        Self::new(epsilon, Self::natural_n(n_points).max(2))
    }

    pub fn with_grid_cap(mut self, cap: GridCap) -> Self {
        self.grid_cap = cap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Domain(format!(
                "epsilon {} is not in (0, 1)",
                self.epsilon
            )));
        }
        if self.n < 2 {
            return Err(Error::Domain(format!("n = {} must be at least 2", self.n)));
        }
        if self.s_cap_denominator == 0 || self.s_cap_numerator > self.s_cap_denominator {
            return Err(Error::Domain(
                "prefix cutoff must be a fraction in [0, 1]".into(),
            ));
        }
        Ok(())
    }

    /// `2N ≤ 2^n ≤ 4N`.
    pub fn check_point_count(&self, n_points: usize) -> Result<()> {
        let two_n = 1u64.checked_shl(self.n).unwrap_or(u64::MAX);
        let count = n_points as u64;
        if 2 * count > two_n || two_n > 4 * count {
            return Err(Error::Domain(format!(
                "N = {n_points} does not satisfy 2N ≤ 2^{} ≤ 4N",
                self.n
            )));
        }
        Ok(())
    }

    /// `ε n^{-1/2}`.
    pub fn amplitude(&self) -> f64 {
        self.epsilon / f64::from(self.n).sqrt()
    }

    /// `⌊3n/4⌋` with the default fraction.
    pub fn s_cutoff(&self) -> u32 {
        self.n * self.s_cap_numerator / self.s_cap_denominator
    }
}
