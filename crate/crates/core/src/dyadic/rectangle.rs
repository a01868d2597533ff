use serde::{Deserialize, Serialize};

use super::{dyadic_scale, DyadicInterval};
use crate::error::{Error, Result};

/// A product of dyadic intervals inside `[0, 1)^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicRectangle {
    sides: Vec<DyadicInterval>,
}

impl DyadicRectangle {
    pub fn new(sides: Vec<DyadicInterval>) -> Result<Self> {
        if sides.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        Ok(Self { sides })
    }

    pub fn unit(dim: usize) -> Self {
        Self {
            sides: vec![DyadicInterval::unit(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn sides(&self) -> &[DyadicInterval] {
        &self.sides
    }

    pub fn side(&self, t: usize) -> &DyadicInterval {
        &self.sides[t]
    }

    pub fn levels(&self) -> Vec<u32> {
        self.sides.iter().map(DyadicInterval::level).collect()
    }

    /// Sum of the side levels; the volume is `2^-total_level`.
    pub fn total_level(&self) -> u32 {
        self.sides.iter().map(DyadicInterval::level).sum()
    }

    pub fn volume(&self) -> f64 {
        dyadic_scale(self.total_level())
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        self.check_dim(x)?;
        Ok(self.sides.iter().zip(x).all(|(s, &xt)| s.contains(xt)))
    }

    /// `h_R(x) = Π_t h_{R_t}(x_t)`.
    pub fn haar(&self, x: &[f64]) -> Result<i8> {
        self.check_dim(x)?;
        Ok(self
            .sides
            .iter()
            .zip(x)
            .map(|(s, &xt)| s.haar(xt))
            .product())
    }

    /// `⟨1{x > p}, h_R⟩`: product of the one-dimensional corner coefficients.
    pub fn corner_coefficient(&self, p: &[f64]) -> Result<f64> {
        self.check_dim(p)?;
        Ok(self
            .sides
            .iter()
            .zip(p)
            .map(|(s, &pt)| s.corner_coefficient(pt))
            .product())
    }
}
