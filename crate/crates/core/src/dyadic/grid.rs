use serde::{Deserialize, Serialize};

use super::{dyadic_scale, DyadicInterval, DyadicRectangle};
use crate::error::{Error, Result};
use crate::sum::pairwise_sum_by;

/// Upper bound on `Σ_t m_t` for a materialized grid (`2^cap` cells).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GridCap(pub u32);

impl Default for GridCap {
    fn default() -> Self {
        GridCap(26)
    }
}

impl GridCap {
    pub fn check(&self, levels: &[u32]) -> Result<()> {
        let requested: u32 = levels.iter().sum();
        if requested > self.0 {
            return Err(Error::ResolutionCap {
                requested,
                cap: self.0,
            });
        }
        Ok(())
    }
}

/// A piecewise-constant function on the anisotropic dyadic grid with
/// `2^{m_t}` cells along coordinate `t`.
///
/// Values are stored row-major with coordinate 1 slowest: the cell with
/// offsets `(j_1, …, j_d)` sits at index `Σ_t j_t · 2^{m_{t+1} + … + m_d}`, so
/// the bits of an index are the concatenated binary offsets.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    levels: Vec<u32>,
    values: Vec<f64>,
}

/// Maps a cell index on a fine grid to the index of the enclosing cell on a
/// coarser grid.
#[derive(Clone, Debug)]
pub(crate) struct Coarsening {
    fine_shift: Vec<u32>,
    fine_mask: Vec<usize>,
    drop: Vec<u32>,
    coarse_shift: Vec<u32>,
}

impl Coarsening {
    pub(crate) fn new(fine: &[u32], coarse: &[u32]) -> Self {
        debug_assert_eq!(fine.len(), coarse.len());
        Self {
            fine_shift: shifts(fine),
            fine_mask: fine.iter().map(|&m| (1usize << m) - 1).collect(),
            drop: fine.iter().zip(coarse).map(|(&f, &c)| f - c).collect(),
            coarse_shift: shifts(coarse),
        }
    }

    #[inline]
    pub(crate) fn map(&self, idx: usize) -> usize {
        let mut out = 0;
        for t in 0..self.drop.len() {
            let j = (idx >> self.fine_shift[t]) & self.fine_mask[t];
            out |= (j >> self.drop[t]) << self.coarse_shift[t];
        }
        out
    }
}

pub(crate) fn shifts(levels: &[u32]) -> Vec<u32> {
    let mut out = vec![0; levels.len()];
    let mut acc = 0;
    for t in (0..levels.len()).rev() {
        out[t] = acc;
        acc += levels[t];
    }
    out
}

impl GridFunction {
    pub fn zeros(levels: &[u32], cap: GridCap) -> Result<Self> {
        Self::constant(levels, 0.0, cap)
    }

    pub fn constant(levels: &[u32], value: f64, cap: GridCap) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        cap.check(levels)?;
        let cells = 1usize << levels.iter().sum::<u32>();
        Ok(Self {
            levels: levels.to_vec(),
            values: vec![value; cells],
        })
    }

    pub fn from_values(levels: &[u32], values: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        let total: u32 = levels.iter().sum();
        if total > 62 || values.len() != 1usize << total {
            return Err(Error::Domain(format!(
                "{} values do not fill a grid with levels {levels:?}",
                values.len()
            )));
        }
        Ok(Self {
            levels: levels.to_vec(),
            values,
        })
    }

    /// Builds a grid from a function of the cell offsets `(j_1, …, j_d)`.
    pub fn from_cell_fn<F>(levels: &[u32], cap: GridCap, mut f: F) -> Result<Self>
    where
        F: FnMut(&[u64]) -> f64,
    {
        let mut g = Self::zeros(levels, cap)?;
        let mut coords = vec![0u64; levels.len()];
        for idx in 0..g.values.len() {
            g.coords_into(idx, &mut coords);
            g.values[idx] = f(&coords);
        }
        Ok(g)
    }

    /// Indicator of a dyadic rectangle, at the given resolution.
    pub fn indicator(rect: &DyadicRectangle, levels: &[u32], cap: GridCap) -> Result<Self> {
        Self::rectangle_pattern(rect, levels, cap, false)
    }

    /// `h_R` at the given resolution; needs `m_t > level(R_t)` in every
    /// coordinate.
    pub fn haar(rect: &DyadicRectangle, levels: &[u32], cap: GridCap) -> Result<Self> {
        Self::rectangle_pattern(rect, levels, cap, true)
    }

    fn rectangle_pattern(
        rect: &DyadicRectangle,
        levels: &[u32],
        cap: GridCap,
        signed: bool,
    ) -> Result<Self> {
        if rect.dim() != levels.len() {
            return Err(Error::DimensionMismatch {
                expected: levels.len(),
                got: rect.dim(),
            });
        }
        let extra = u32::from(signed);
        if let Some((t, side)) = rect
            .sides()
            .iter()
            .enumerate()
            .find(|(t, s)| s.level() + extra > levels[*t])
        {
            return Err(Error::Domain(format!(
                "coordinate {t} at level {} cannot resolve a side of level {}",
                levels[t],
                side.level()
            )));
        }
        Self::from_cell_fn(levels, cap, |j| {
            let mut v = 1.0;
            for (t, side) in rect.sides().iter().enumerate() {
                let drop = levels[t] - side.level();
                if j[t] >> drop != side.offset() {
                    return 0.0;
                }
                if signed && (j[t] >> (drop - 1)) & 1 == 0 {
                    v = -v;
                }
            }
            v
        })
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn total_level(&self) -> u32 {
        self.levels.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn cell_volume(&self) -> f64 {
        dyadic_scale(self.total_level())
    }

    pub fn coords_into(&self, idx: usize, out: &mut [u64]) {
        let mut rem = idx as u64;
        for t in (0..self.levels.len()).rev() {
            out[t] = rem & ((1u64 << self.levels[t]) - 1);
            rem >>= self.levels[t];
        }
    }

    pub fn index_of(&self, coords: &[u64]) -> usize {
        coords
            .iter()
            .zip(&self.levels)
            .fold(0u64, |acc, (&j, &m)| (acc << m) | j) as usize
    }

    /// Index of the cell containing `x ∈ [0, 1)^d`.
    pub fn cell_of(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let mut idx = 0u64;
        for (&m, &xt) in self.levels.iter().zip(x) {
            idx = (idx << m) | DyadicInterval::containing(xt, m)?.offset();
        }
        Ok(idx as usize)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(self.values[self.cell_of(x)?])
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self {
            levels: self.levels.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn map_in_place<F: Fn(f64) -> f64>(&mut self, f: F) {
        self.values.iter_mut().for_each(|v| *v = f(*v));
    }

    /// Re-express on a finer grid; pointwise values are unchanged.
    pub fn refine(&self, levels: &[u32], cap: GridCap) -> Result<Self> {
        self.check_finer(levels)?;
        let mut out = Self::zeros(levels, cap)?;
        out.add_mapped(self, |v| v)?;
        Ok(out)
    }

    fn check_finer(&self, levels: &[u32]) -> Result<()> {
        if levels.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: levels.len(),
            });
        }
        if levels.iter().zip(&self.levels).any(|(f, c)| f < c) {
            return Err(Error::Domain(format!(
                "levels {levels:?} do not refine {:?}",
                self.levels
            )));
        }
        Ok(())
    }

    /// `self += f(other)` cellwise, where `other` lives on a grid no finer
    /// than `self` in any coordinate.
    pub fn add_mapped<F: Fn(f64) -> f64>(&mut self, other: &Self, f: F) -> Result<()> {
        self.merge_from(other, |a, b| a + f(b))
    }

    /// `self = f(self, other)` cellwise, `other` no finer than `self`.
    pub fn merge_from<F: Fn(f64, f64) -> f64>(&mut self, other: &Self, f: F) -> Result<()> {
        other.check_finer(&self.levels)?;
        if other.levels == self.levels {
            for (a, &b) in self.values.iter_mut().zip(&other.values) {
                *a = f(*a, b);
            }
            return Ok(());
        }
        let map = Coarsening::new(&self.levels, &other.levels);
        for (idx, a) in self.values.iter_mut().enumerate() {
            *a = f(*a, other.values[map.map(idx)]);
        }
        Ok(())
    }

    pub fn common_levels(&self, other: &Self) -> Result<Vec<u32>> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(self
            .levels
            .iter()
            .zip(&other.levels)
            .map(|(&a, &b)| a.max(b))
            .collect())
    }

    /// Pointwise `f(self, other)` on the common refinement.
    pub fn combine<F>(&self, other: &Self, cap: GridCap, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64,
    {
        let levels = self.common_levels(other)?;
        cap.check(&levels)?;
        let a_map = Coarsening::new(&levels, &self.levels);
        let b_map = Coarsening::new(&levels, &other.levels);
        let cells = 1usize << levels.iter().sum::<u32>();
        let values = (0..cells)
            .map(|i| f(self.values[a_map.map(i)], other.values[b_map.map(i)]))
            .collect();
        Ok(Self { levels, values })
    }

    /// `∫ g` over `[0, 1)^d`.
    pub fn integral(&self) -> f64 {
        pairwise_sum_by(self.values.len(), |i| self.values[i]) * self.cell_volume()
    }

    /// `(∫ |g|^p)^{1/p}` for `p > 0`.
    pub fn pnorm(&self, p: f64) -> f64 {
        let vol = self.cell_volume();
        let mean = if p.fract() == 0.0 && p <= 64.0 {
            let k = p as i32;
            pairwise_sum_by(self.values.len(), |i| self.values[i].abs().powi(k)) * vol
        } else {
            pairwise_sum_by(self.values.len(), |i| self.values[i].abs().powf(p)) * vol
        };
        mean.powf(1.0 / p)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
    }

    /// `⟨f, g⟩ = ∫ f g` on the common refinement, without materializing it.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        let levels = self.common_levels(other)?;
        let a_map = Coarsening::new(&levels, &self.levels);
        let b_map = Coarsening::new(&levels, &other.levels);
        let total: u32 = levels.iter().sum();
        let cells = 1usize << total;
        let s = pairwise_sum_by(cells, |i| {
            self.values[a_map.map(i)] * other.values[b_map.map(i)]
        });
        Ok(s * dyadic_scale(total))
    }

    /// Cell averages on a coarser grid (the conditional expectation onto the
    /// coarser dyadic sigma field).
    pub fn coarsen(&self, levels: &[u32]) -> Result<Self> {
        if levels.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: levels.len(),
            });
        }
        if levels.iter().zip(&self.levels).any(|(c, f)| c > f) {
            return Err(Error::Domain(format!(
                "levels {levels:?} are not coarser than {:?}",
                self.levels
            )));
        }
        let mut out = self.clone();
        for t in 0..self.dim() {
            while out.levels[t] > levels[t] {
                out = out.halve(t);
            }
        }
        Ok(out)
    }

    /// Averages adjacent pairs of cells along coordinate `t`.
    fn halve(&self, t: usize) -> Self {
        let shift = shifts(&self.levels)[t];
        let mut levels = self.levels.clone();
        levels[t] -= 1;
        let low_mask = (1usize << shift) - 1;
        let cells = self.values.len() / 2;
        let values = (0..cells)
            .map(|i| {
                let hi = i >> shift;
                let lo = i & low_mask;
                let a = (hi << 1 << shift) | lo;
                let b = a | (1 << shift);
                0.5 * (self.values[a] + self.values[b])
            })
            .collect();
        Self { levels, values }
    }

    /// Averages out coordinate `t` entirely; the result has level 0 there.
    pub fn average_coordinate(&self, t: usize) -> Result<Self> {
        if t >= self.dim() {
            return Err(Error::Domain(format!(
                "coordinate {t} out of range for dimension {}",
                self.dim()
            )));
        }
        let mut levels = self.levels.clone();
        levels[t] = 0;
        self.coarsen(&levels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cap() -> GridCap {
        GridCap::default()
    }

    #[test]
    fn haar_of_unit_interval_has_zero_integral_and_unit_norms() {
        let h = GridFunction::haar(&DyadicRectangle::unit(1), &[1], cap()).unwrap();
        assert_eq!(h.values(), &[-1.0, 1.0]);
        assert_eq!(h.integral(), 0.0);
        assert_eq!(h.pnorm(3.0), 1.0);
        assert_eq!(h.sup_norm(), 1.0);
    }

    #[test]
    fn layout_is_row_major_with_first_coordinate_slowest() {
        let g = GridFunction::from_cell_fn(&[1, 2], cap(), |j| (10 * j[0] + j[1]) as f64).unwrap();
        assert_eq!(g.values(), &[0.0, 1.0, 2.0, 3.0, 10.0, 11.0, 12.0, 13.0]);
        assert_eq!(g.eval(&[0.6, 0.3]).unwrap(), 11.0);
        let mut c = [0; 2];
        g.coords_into(6, &mut c);
        assert_eq!(c, [1, 2]);
        assert_eq!(g.index_of(&c), 6);
    }

    #[test]
    fn refinement_preserves_values_and_integral() {
        let g =
            GridFunction::from_cell_fn(&[2, 1], cap(), |j| (j[0] * 3 + j[1]) as f64 - 2.5).unwrap();
        let fine = g.refine(&[4, 3], cap()).unwrap();
        for k in 0..97 {
            let x = [(k as f64 * 0.137).fract(), (k as f64 * 0.291).fract()];
            assert_eq!(g.eval(&x).unwrap(), fine.eval(&x).unwrap());
        }
        assert_eq!(g.integral(), fine.integral());
        assert_eq!(fine.coarsen(&[2, 1]).unwrap(), g);
    }

    #[test]
    fn combine_product_on_common_refinement() {
        let a = GridFunction::haar(&DyadicRectangle::unit(2), &[1, 1], cap()).unwrap();
        let b = GridFunction::constant(&[0, 3], 2.0, cap()).unwrap();
        let prod = a.combine(&b, cap(), |x, y| x * y).unwrap();
        assert_eq!(prod.levels(), &[1, 3]);
        assert_eq!(prod.sup_norm(), 2.0);
        assert_eq!(prod.integral(), 0.0);
        assert_eq!(a.inner(&a).unwrap(), 1.0);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            GridFunction::zeros(&[14, 13], cap()),
            Err(Error::ResolutionCap {
                requested: 27,
                cap: 26
            })
        ));
        assert!(GridFunction::zeros(&[3, 3], GridCap(5)).is_err());
    }

    #[test]
    fn averaging_a_coordinate_kills_haar() {
        let r = DyadicRectangle::new(vec![
            DyadicInterval::new(1, 1).unwrap(),
            DyadicInterval::new(0, 0).unwrap(),
        ])
        .unwrap();
        let h = GridFunction::haar(&r, &[3, 2], cap()).unwrap();
        let avg = h.average_coordinate(0).unwrap();
        assert_eq!(avg.levels(), &[0, 2]);
        assert!(avg.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn haar_needs_a_finer_grid() {
        let r = DyadicRectangle::unit(2);
        assert!(GridFunction::haar(&r, &[0, 1], cap()).is_err());
        assert!(GridFunction::indicator(&r, &[0, 0], cap()).is_ok());
    }
}
