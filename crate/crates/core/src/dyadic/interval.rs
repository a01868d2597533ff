use serde::{Deserialize, Serialize};

use super::dyadic_scale;
use crate::error::{Error, Result};

/// The dyadic interval `[offset 2^-level, (offset + 1) 2^-level)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicInterval {
    level: u32,
    offset: u64,
}

impl DyadicInterval {
    pub const MAX_LEVEL: u32 = 60;

    pub fn new(level: u32, offset: u64) -> Result<Self> {
        if level > Self::MAX_LEVEL || offset >= 1u64 << level {
            return Err(Error::InvalidInterval { level, offset });
        }
        Ok(Self { level, offset })
    }

    /// `[0, 1)`.
    pub fn unit() -> Self {
        Self {
            level: 0,
            offset: 0,
        }
    }

    /// The interval of the given level that contains `x ∈ [0, 1)`.
    pub fn containing(x: f64, level: u32) -> Result<Self> {
        if !(0.0..1.0).contains(&x) {
            return Err(Error::Domain(format!("{x} is not in [0, 1)")));
        }
        Self::new(level, (x / dyadic_scale(level)).floor() as u64)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn offset(&self) -> u64 {
        self.offset
    }

    pub fn length(&self) -> f64 {
        dyadic_scale(self.level)
    }

    pub fn start(&self) -> f64 {
        self.offset as f64 * self.length()
    }

    pub fn end(&self) -> f64 {
        (self.offset + 1) as f64 * self.length()
    }

    pub fn midpoint(&self) -> f64 {
        (2 * self.offset + 1) as f64 * dyadic_scale(self.level + 1)
    }

    pub fn left(&self) -> Self {
        Self {
            level: self.level + 1,
            offset: 2 * self.offset,
        }
    }

    pub fn right(&self) -> Self {
        Self {
            level: self.level + 1,
            offset: 2 * self.offset + 1,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.start() <= x && x < self.end()
    }

    pub fn contains_interval(&self, other: &Self) -> bool {
        other.level >= self.level && other.offset >> (other.level - self.level) == self.offset
    }

    /// `h_I(x) = -1` on the left half, `+1` on the right half, `0` off `I`.
    pub fn haar(&self, x: f64) -> i8 {
        if !self.contains(x) {
            0
        } else if x < self.midpoint() {
            -1
        } else {
            1
        }
    }

    /// `∫₀¹ 1{x > p} h_I(x) dx`, the 1D Haar coefficient of an anchored box
    /// corner at `p`.
    pub fn corner_coefficient(&self, p: f64) -> f64 {
        let (a, m, b) = (self.start(), self.midpoint(), self.end());
        if p < a || p >= b {
            0.0
        } else if p < m {
            p - a
        } else {
            b - p
        }
    }

    /// `∫₀¹ x h_I(x) dx`, evaluated from the antiderivative on each half.
    pub fn first_moment(&self) -> f64 {
        let (a, m, b) = (self.start(), self.midpoint(), self.end());
        (-(m * m - a * a) + (b * b - m * m)) / 2.0
    }
}
