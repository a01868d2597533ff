use clap::ValueEnum;
use discrepancy_core::pointset::{gen_halton, gen_random, gen_vandercorput, PointSet};
use discrepancy_core::Result;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Two-dimensional van der Corput set `(i/2^m, bitrev_m(i))`.
    Vdc,
    Halton,
    Random,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Vdc, Family::Halton, Family::Random];

    pub fn name(self) -> &'static str {
        match self {
            Family::Vdc => "vdc",
            Family::Halton => "halton",
            Family::Random => "random",
        }
    }

    pub fn supports(self, dim: usize) -> bool {
        match self {
            Family::Vdc => dim == 2,
            Family::Halton => (1..=8).contains(&dim),
            Family::Random => dim >= 1,
        }
    }

    /// The family's `N = 2^{n−1}` point set, so that `2N = 2^n`.
    pub fn at_scale(self, dim: usize, n: u32, seed: u64) -> Result<PointSet> {
        let count = 1usize << (n - 1);
        match self {
            Family::Vdc => gen_vandercorput(n - 1),
            Family::Halton => gen_halton(count, dim),
            Family::Random => gen_random(count, dim, seed ^ u64::from(n)),
        }
    }
}
