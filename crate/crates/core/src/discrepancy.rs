//! The discrepancy function `D_N(x) = #(A ∩ [0, x)) − N |[0, x)|`, its Haar
//! coefficients in closed form, good/bad rectangle classification,
//! r-functions and exact pairings against piecewise-constant test functions.

use serde::{Deserialize, Serialize};

use crate::dyadic::{dyadic_scale, DyadicRectangle, GridCap, GridFunction, ShapeVector};
use crate::error::{Error, Result};
use crate::pointset::PointSet;
use crate::sum::{pairwise_sum, pairwise_sum_by, Neumaier};

fn check_dim(points: &PointSet, dim: usize) -> Result<()> {
    if points.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: points.dim(),
            got: dim,
        });
    }
    Ok(())
}

/// `D_N(x)` for `x ∈ [0, 1]^d`; the box `[0, x)` is half-open, so a
/// coordinate equal to 1 covers the whole side.
pub fn eval_dn(points: &PointSet, x: &[f64]) -> Result<f64> {
    check_dim(points, x.len())?;
    if let Some(bad) = x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::Domain(format!("{bad} is not in [0, 1]")));
    }
    let count = points
        .iter()
        .filter(|p| p.iter().zip(x).all(|(pt, xt)| pt < xt))
        .count();
    let volume: f64 = x.iter().product();
    Ok(count as f64 - points.len() as f64 * volume)
}

/// Linear part of `⟨D_N, h_R⟩`: `−N 4^-d |R|^2`.
pub fn haar_coeff_linear(rect: &DyadicRectangle, n_points: usize) -> f64 {
    let d = rect.dim() as u32;
    -(n_points as f64) * dyadic_scale(2 * d + 2 * rect.total_level())
}

/// `⟨1{x > p}, h_R⟩` as a function of `x`: the contribution of one point to
/// the counting part. Nonzero for at most one rectangle of each shape.
pub fn haar_coeff_point(p: &[f64], rect: &DyadicRectangle) -> Result<f64> {
    rect.corner_coefficient(p)
}

/// `⟨D_N, h_R⟩` split into its counting and linear parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HaarCoefficient {
    pub rectangle: DyadicRectangle,
    pub value: f64,
    pub point_part: f64,
    pub linear_part: f64,
}

pub fn haar_coeff_dn(points: &PointSet, rect: &DyadicRectangle) -> Result<HaarCoefficient> {
    check_dim(points, rect.dim())?;
    let terms = points
        .iter()
        .map(|p| rect.corner_coefficient(p))
        .collect::<Result<Vec<_>>>()?;
    let point_part = pairwise_sum(&terms);
    let linear_part = haar_coeff_linear(rect, points.len());
    Ok(HaarCoefficient {
        rectangle: rect.clone(),
        value: point_part + linear_part,
        point_part,
        linear_part,
    })
}

/// Every coefficient `⟨D_N, h_R⟩`, `R ∈ R_r`, indexed like
/// [`ShapeVector::rectangle`]. Costs `O(2^|r| + N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapeCoefficients {
    pub shape: ShapeVector,
    /// Shared linear part `−N 4^-d 2^-2|r|`.
    pub linear_part: f64,
    pub point_parts: Vec<f64>,
    /// Number of points in each rectangle.
    pub occupancy: Vec<u32>,
}

impl ShapeCoefficients {
    pub fn value(&self, index: usize) -> f64 {
        self.point_parts[index] + self.linear_part
    }

    pub fn len(&self) -> usize {
        self.point_parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.point_parts.is_empty()
    }
}

pub fn shape_coefficients(points: &PointSet, shape: &ShapeVector) -> Result<ShapeCoefficients> {
    check_dim(points, shape.dim())?;
    let count = shape.rectangle_count();
    let mut acc = vec![Neumaier::default(); count];
    let mut occupancy = vec![0u32; count];
    for p in points.iter() {
        let idx = shape.rectangle_index(p)?;
        occupancy[idx] += 1;
        acc[idx].add(shape.rectangle(idx).corner_coefficient(p)?);
    }
    let linear_part = haar_coeff_linear(&shape.rectangle(0), points.len());
    Ok(ShapeCoefficients {
        shape: shape.clone(),
        linear_part,
        point_parts: acc.iter().map(Neumaier::total).collect(),
        occupancy,
    })
}

/// Coefficients of one shape kept only where points fall; every other
/// rectangle has coefficient `linear_part`. Costs `O(N log N)` regardless of
/// `|r|`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseShapeCoefficients {
    pub shape: ShapeVector,
    pub linear_part: f64,
    pub rectangles: u64,
    /// `(rectangle index, ⟨D_N, h_R⟩)` for occupied rectangles, by index.
    pub occupied: Vec<(usize, f64)>,
}

impl SparseShapeCoefficients {
    pub fn empty_count(&self) -> u64 {
        self.rectangles - self.occupied.len() as u64
    }

    /// `Σ_R |⟨D_N, h_R⟩|`, the largest `|⟨D_N, f_r⟩|` over all sign choices.
    pub fn abs_sum(&self) -> f64 {
        let mut acc = Neumaier::default();
        for (_, c) in &self.occupied {
            acc.add(c.abs());
        }
        acc.add(self.empty_count() as f64 * self.linear_part.abs());
        acc.total()
    }
}

pub fn sparse_shape_coefficients(
    points: &PointSet,
    shape: &ShapeVector,
) -> Result<SparseShapeCoefficients> {
    check_dim(points, shape.dim())?;
    let mut hits = points
        .iter()
        .map(|p| {
            let idx = shape.rectangle_index(p)?;
            Ok((idx, shape.rectangle(idx).corner_coefficient(p)?))
        })
        .collect::<Result<Vec<_>>>()?;
    hits.sort_by_key(|h| h.0);
    let linear_part = haar_coeff_linear(&shape.rectangle(0), points.len());
    let mut occupied: Vec<(usize, f64)> = Vec::new();
    let mut acc = Neumaier::default();
    for (k, &(idx, v)) in hits.iter().enumerate() {
        acc.add(v);
        if hits.get(k + 1).is_none_or(|next| next.0 != idx) {
            occupied.push((idx, acc.total() + linear_part));
            acc = Neumaier::default();
        }
    }
    Ok(SparseShapeCoefficients {
        shape: shape.clone(),
        linear_part,
        rectangles: 1u64 << shape.index(),
        occupied,
    })
}

/// Rectangles of one shape split by whether they meet the point set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoodBadPartition {
    pub shape: ShapeVector,
    pub good: Vec<usize>,
    pub bad: Vec<usize>,
}

pub fn classify_good(points: &PointSet, shape: &ShapeVector) -> Result<GoodBadPartition> {
    check_dim(points, shape.dim())?;
    let mut hit = vec![false; shape.rectangle_count()];
    for p in points.iter() {
        hit[shape.rectangle_index(p)?] = true;
    }
    let (bad, good): (Vec<usize>, Vec<usize>) = (0..hit.len()).partition(|&i| hit[i]);
    Ok(GoodBadPartition {
        shape: shape.clone(),
        good,
        bad,
    })
}

/// `f = Σ_{R ∈ R_r} ε_R h_R` with one sign per rectangle, in
/// [`ShapeVector::rectangle`] order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedRFunction {
    shape: ShapeVector,
    signs: Vec<i8>,
}

impl SignedRFunction {
    pub fn new(shape: ShapeVector, signs: Vec<i8>) -> Result<Self> {
        if signs.len() != shape.rectangle_count() {
            return Err(Error::Domain(format!(
                "shape {shape} has {} rectangles, got {} signs",
                shape.rectangle_count(),
                signs.len()
            )));
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Domain("signs must be ±1".into()));
        }
        Ok(Self { shape, signs })
    }

    /// All signs `+1`: the Rademacher-type function `φ_r`.
    pub fn all_plus(shape: ShapeVector) -> Self {
        let signs = vec![1; shape.rectangle_count()];
        Self { shape, signs }
    }

    pub fn shape(&self) -> &ShapeVector {
        &self.shape
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let idx = self.shape.rectangle_index(x)?;
        Ok(f64::from(self.signs[idx]) * f64::from(self.shape.rectangle(idx).haar(x)?))
    }

    /// Resolution at which the function is piecewise constant: `r_t + 1`.
    pub fn native_levels(&self) -> Vec<u32> {
        self.shape.components().iter().map(|&r| r + 1).collect()
    }

    pub fn to_grid(&self, levels: &[u32], cap: GridCap) -> Result<GridFunction> {
        let mut g = GridFunction::zeros(levels, cap)?;
        self.add_to_grid(&mut g, 1.0)?;
        Ok(g)
    }

    /// `g += scale · f` on `g`'s grid, which must resolve the Haar halves.
    pub fn add_to_grid(&self, g: &mut GridFunction, scale: f64) -> Result<()> {
        let plan = CellPlan::new(&self.shape, g.levels())?;
        let signs: Vec<f64> = self.signs.iter().map(|&s| f64::from(s) * scale).collect();
        for (idx, v) in g.values_mut().iter_mut().enumerate() {
            let (rect, negative) = plan.locate(idx);
            *v += if negative { -signs[rect] } else { signs[rect] };
        }
        Ok(())
    }

    /// `g *= f` on `g`'s grid.
    pub fn multiply_grid(&self, g: &mut GridFunction) -> Result<()> {
        let plan = CellPlan::new(&self.shape, g.levels())?;
        for (idx, v) in g.values_mut().iter_mut().enumerate() {
            let (rect, negative) = plan.locate(idx);
            let s = f64::from(self.signs[rect]);
            *v *= if negative { -s } else { s };
        }
        Ok(())
    }
}

/// Cell-index arithmetic for evaluating an r-function on a grid: the
/// rectangle index is the concatenation of the top `r_t` bits of each cell
/// offset, the Haar sign the next bit.
struct CellPlan {
    cell_shift: Vec<u32>,
    rect_drop: Vec<u32>,
    rect_mask: Vec<usize>,
    rect_shift: Vec<u32>,
}

impl CellPlan {
    fn new(shape: &ShapeVector, levels: &[u32]) -> Result<Self> {
        if levels.len() != shape.dim() {
            return Err(Error::DimensionMismatch {
                expected: shape.dim(),
                got: levels.len(),
            });
        }
        let r = shape.components();
        if r.iter().zip(levels).any(|(&rt, &m)| m < rt + 1) {
            return Err(Error::Domain(format!(
                "grid levels {levels:?} cannot resolve the Haar halves of shape {shape}"
            )));
        }
        let cell_shift = crate::dyadic::grid_shifts(levels);
        Ok(Self {
            rect_drop: r.iter().zip(levels).map(|(&rt, &m)| m - rt).collect(),
            rect_mask: r.iter().map(|&rt| (1usize << rt) - 1).collect(),
            rect_shift: crate::dyadic::grid_shifts(r),
            cell_shift,
        })
    }

    #[inline]
    fn locate(&self, idx: usize) -> (usize, bool) {
        let mut rect = 0;
        let mut negative = false;
        for t in 0..self.cell_shift.len() {
            let j = idx >> self.cell_shift[t];
            let drop = self.rect_drop[t];
            rect |= ((j >> drop) & self.rect_mask[t]) << self.rect_shift[t];
            negative ^= (j >> (drop - 1)) & 1 == 0;
        }
        (rect, negative)
    }
}

/// `f_r = Σ sgn⟨D_N, h_R⟩ h_R`, with `sgn(0) = +1`.
pub fn build_rfunction(points: &PointSet, shape: &ShapeVector) -> Result<SignedRFunction> {
    let coeffs = shape_coefficients(points, shape)?;
    let signs = (0..coeffs.len())
        .map(|i| if coeffs.value(i) < 0.0 { -1 } else { 1 })
        .collect();
    SignedRFunction::new(shape.clone(), signs)
}

/// `⟨D_N, f⟩ = Σ_R ε_R ⟨D_N, h_R⟩` from the closed-form coefficients.
pub fn pair_dn_rfunction(points: &PointSet, f: &SignedRFunction) -> Result<f64> {
    let coeffs = shape_coefficients(points, f.shape())?;
    Ok(pair_with_coefficients(&coeffs, f))
}

pub fn pair_with_coefficients(coeffs: &ShapeCoefficients, f: &SignedRFunction) -> f64 {
    pairwise_sum_by(coeffs.len(), |i| f64::from(f.signs()[i]) * coeffs.value(i))
}

/// Exact `⟨D_N, g⟩` for piecewise-constant `g`.
///
/// The counting part is `Σ_p ∫_{x > p} g`, read off `2^d` corners of the
/// suffix-sum table of cell integrals with the partial-cell weights of `p`.
/// The linear part is `N Σ_cells g_j ∫_cell Π x_t`. Both reductions are
/// pairwise over a fixed order.
pub fn pair_dn_grid(points: &PointSet, g: &GridFunction) -> Result<f64> {
    check_dim(points, g.dim())?;
    let table = SuffixTable::new(g);
    let counting: Vec<f64> = points
        .iter()
        .map(|p| table.upper_integral(p))
        .collect::<Result<_>>()?;
    Ok(pairwise_sum(&counting) - points.len() as f64 * linear_moment(g))
}

/// `Σ_cells g_j ∫_cell Π_t x_t`.
pub fn linear_moment(g: &GridFunction) -> f64 {
    let levels = g.levels().to_vec();
    let shifts = crate::dyadic::grid_shifts(&levels);
    // ∫ over [j h, (j + 1) h) of x is (j + 1/2) h^2.
    let moments: Vec<Vec<f64>> = levels
        .iter()
        .map(|&m| {
            let h2 = dyadic_scale(2 * m);
            (0..1u64 << m).map(|j| (j as f64 + 0.5) * h2).collect()
        })
        .collect();
    let values = g.values();
    pairwise_sum_by(values.len(), |idx| {
        let mut w = values[idx];
        for t in 0..levels.len() {
            w *= moments[t][(idx >> shifts[t]) & ((1usize << levels[t]) - 1)];
        }
        w
    })
}

/// Suffix sums `T(k) = Σ_{j ≥ k} ∫_{cell j} g` over an array padded with one
/// zero slab per coordinate.
pub struct SuffixTable {
    levels: Vec<u32>,
    extents: Vec<usize>,
    strides: Vec<usize>,
    data: Vec<f64>,
}

impl SuffixTable {
    pub fn new(g: &GridFunction) -> Self {
        let levels = g.levels().to_vec();
        let d = levels.len();
        let extents: Vec<usize> = levels.iter().map(|&m| (1usize << m) + 1).collect();
        let mut strides = vec![1usize; d];
        for t in (0..d.saturating_sub(1)).rev() {
            strides[t] = strides[t + 1] * extents[t + 1];
        }
        let total: usize = extents.iter().product();
        let mut data = vec![0.0; total];
        let vol = g.cell_volume();
        let shifts = crate::dyadic::grid_shifts(&levels);
        for (idx, &v) in g.values().iter().enumerate() {
            let mut pos = 0;
            for t in 0..d {
                pos += ((idx >> shifts[t]) & ((1usize << levels[t]) - 1)) * strides[t];
            }
            data[pos] = v * vol;
        }
        for t in 0..d {
            suffix_along(&mut data, extents[t], strides[t]);
        }
        Self {
            levels,
            extents,
            strides,
            data,
        }
    }

    /// `∫_{x > p componentwise} g`.
    pub fn upper_integral(&self, p: &[f64]) -> Result<f64> {
        let d = self.levels.len();
        if p.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: p.len(),
            });
        }
        // Along each coordinate the weight is w·1{k ≥ c} + (1 − w)·1{k ≥ c + 1}.
        let mut corners = Vec::with_capacity(d);
        for t in 0..d {
            let scaled = p[t] * (1u64 << self.levels[t]) as f64;
            if !(0.0..(self.extents[t] - 1) as f64).contains(&scaled) {
                return Err(Error::Domain(format!(
                    "coordinate {} is not in [0, 1)",
                    p[t]
                )));
            }
            let c = scaled.floor();
            let w = c + 1.0 - scaled;
            corners.push((c as usize, w));
        }
        let mut acc = Neumaier::default();
        for mask in 0..1usize << d {
            let mut weight = 1.0;
            let mut pos = 0;
            for (t, &(c, w)) in corners.iter().enumerate() {
                let upper = (mask >> t) & 1 == 1;
                weight *= if upper { 1.0 - w } else { w };
                pos += (c + usize::from(upper)) * self.strides[t];
            }
            if weight != 0.0 {
                acc.add(weight * self.data[pos]);
            }
        }
        Ok(acc.total())
    }
}

/// In-place compensated suffix sums along the axis with the given extent and
/// stride of a row-major array.
fn suffix_along(data: &mut [f64], extent: usize, stride: usize) {
    let block = extent * stride;
    let mut sum = vec![0.0; stride];
    let mut comp = vec![0.0; stride];
    for chunk in data.chunks_mut(block) {
        sum.iter_mut().for_each(|v| *v = 0.0);
        comp.iter_mut().for_each(|v| *v = 0.0);
        for k in (0..extent).rev() {
            let line = &mut chunk[k * stride..(k + 1) * stride];
            for i in 0..stride {
                let x = line[i];
                let t = sum[i] + x;
                if sum[i].abs() >= x.abs() {
                    comp[i] += (sum[i] - t) + x;
                } else {
                    comp[i] += (x - t) + sum[i];
                }
                sum[i] = t;
                line[i] = t + comp[i];
            }
        }
    }
}

/// Exact cell averages of `D_N` on the grid with the given levels.
///
/// The counting part uses per-point separable weights placed at `2^d`
/// corners and accumulated by prefix sums; the linear part is `N Π_t` of
/// the cell midpoints.
pub fn dn_cell_averages(points: &PointSet, levels: &[u32], cap: GridCap) -> Result<GridFunction> {
    check_dim(points, levels.len())?;
    let mut g = GridFunction::zeros(levels, cap)?;
    let d = levels.len();
    let shifts = crate::dyadic::grid_shifts(levels);
    {
        let values = g.values_mut();
        for p in points.iter() {
            // The fraction of cell c above p_t is w; cells beyond c see all of it.
            let mut corners = Vec::with_capacity(d);
            for t in 0..d {
                let scaled = p[t] * (1u64 << levels[t]) as f64;
                let c = scaled.floor();
                corners.push((c as usize, c + 1.0 - scaled));
            }
            for mask in 0..1usize << d {
                let mut weight = 1.0;
                let mut pos = 0;
                let mut inside = true;
                for (t, &(c, w)) in corners.iter().enumerate() {
                    let upper = (mask >> t) & 1 == 1;
                    let k = c + usize::from(upper);
                    if k >= 1usize << levels[t] {
                        inside = false;
                        break;
                    }
                    weight *= if upper { 1.0 - w } else { w };
                    pos |= k << shifts[t];
                }
                if inside && weight != 0.0 {
                    values[pos] += weight;
                }
            }
        }
        for t in 0..d {
            prefix_along(values, levels, t);
        }
    }
    let n = points.len() as f64;
    let mids: Vec<Vec<f64>> = levels
        .iter()
        .map(|&m| {
            let h = dyadic_scale(m);
            (0..1u64 << m).map(|j| (j as f64 + 0.5) * h).collect()
        })
        .collect();
    for (idx, v) in g.values_mut().iter_mut().enumerate() {
        let mut vol = n;
        for t in 0..d {
            vol *= mids[t][(idx >> shifts[t]) & ((1usize << levels[t]) - 1)];
        }
        *v -= vol;
    }
    Ok(g)
}

fn prefix_along(values: &mut [f64], levels: &[u32], t: usize) {
    let shifts = crate::dyadic::grid_shifts(levels);
    let stride = 1usize << shifts[t];
    let extent = 1usize << levels[t];
    let block = stride * extent;
    let mut sum = vec![0.0; stride];
    let mut comp = vec![0.0; stride];
    for chunk in values.chunks_mut(block) {
        sum.iter_mut().for_each(|v| *v = 0.0);
        comp.iter_mut().for_each(|v| *v = 0.0);
        for k in 0..extent {
            let line = &mut chunk[k * stride..(k + 1) * stride];
            for i in 0..stride {
                let x = line[i];
                let s = sum[i] + x;
                if sum[i].abs() >= x.abs() {
                    comp[i] += (sum[i] - s) + x;
                } else {
                    comp[i] += (x - s) + sum[i];
                }
                sum[i] = s;
                line[i] = s + comp[i];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::{enumerate_shapes, DyadicInterval};
    use crate::pointset::{gen_random, gen_vandercorput, PointSetMeta};

    fn pts(points: &[Vec<f64>]) -> PointSet {
        PointSet::from_points(points, PointSetMeta::default()).unwrap()
    }

    fn shape(c: &[u32]) -> ShapeVector {
        ShapeVector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn eval_dn_examples() {
        let a = pts(&[vec![0.5, 0.5]]);
        assert_eq!(eval_dn(&a, &[0.75, 0.75]).unwrap(), 0.4375);
        assert_eq!(eval_dn(&a, &[0.5, 0.5]).unwrap(), -0.25);
        let r = gen_random(17, 3, 1).unwrap();
        assert_eq!(eval_dn(&r, &[1.0, 1.0, 1.0]).unwrap(), 0.0);
        assert!(eval_dn(&r, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn linear_coefficient_examples() {
        assert_eq!(haar_coeff_linear(&DyadicRectangle::unit(1), 1), -0.25);
        assert_eq!(haar_coeff_linear(&DyadicRectangle::unit(2), 2), -0.125);
        assert_eq!(haar_coeff_linear(&DyadicRectangle::unit(3), 0), 0.0);
    }

    #[test]
    fn point_coefficient_examples() {
        let unit = DyadicRectangle::unit(1);
        assert_eq!(haar_coeff_point(&[0.25], &unit).unwrap(), 0.25);
        assert_eq!(haar_coeff_point(&[0.75], &unit).unwrap(), 0.25);
        let right = DyadicRectangle::new(vec![DyadicInterval::new(1, 1).unwrap()]).unwrap();
        assert_eq!(haar_coeff_point(&[0.25], &right).unwrap(), 0.0);
    }

    #[test]
    fn good_rectangles_have_pure_linear_coefficients() {
        let a = gen_random(20, 2, 3).unwrap();
        for s in enumerate_shapes(6, 2) {
            let part = classify_good(&a, &s).unwrap();
            for &i in &part.good {
                let c = haar_coeff_dn(&a, &s.rectangle(i)).unwrap();
                assert_eq!(c.point_part, 0.0);
                assert_eq!(c.value, c.linear_part);
            }
        }
    }

    #[test]
    fn origin_point_sits_in_the_first_rectangle() {
        let a = pts(&[vec![0.0, 0.0]]);
        let s = shape(&[2, 1]);
        let coeffs = shape_coefficients(&a, &s).unwrap();
        assert_eq!(coeffs.occupancy[0], 1);
        assert!(coeffs.occupancy[1..].iter().all(|&o| o == 0));
        // p at the lower corner of its rectangle contributes nothing
        assert_eq!(coeffs.point_parts[0], 0.0);
    }

    #[test]
    fn classify_single_point() {
        let a = pts(&[vec![0.1, 0.1]]);
        let part = classify_good(&a, &shape(&[1, 1])).unwrap();
        assert_eq!(part.bad, vec![0]);
        assert_eq!(part.good, vec![1, 2, 3]);
    }

    #[test]
    fn vandercorput_net_has_no_good_rectangles() {
        let v = gen_vandercorput(6).unwrap();
        for s in enumerate_shapes(6, 2) {
            assert!(classify_good(&v, &s).unwrap().good.is_empty());
        }
    }

    #[test]
    fn rfunction_of_empty_region_is_all_negative() {
        // every rectangle of shape (3, 3) above the single low point is good
        let a = pts(&[vec![0.01, 0.01]]);
        let f = build_rfunction(&a, &shape(&[3, 3])).unwrap();
        let part = classify_good(&a, &shape(&[3, 3])).unwrap();
        for &i in &part.good {
            assert_eq!(f.signs()[i], -1);
        }
    }

    #[test]
    fn rfunction_squares_to_one() {
        let a = gen_random(9, 2, 5).unwrap();
        let f = build_rfunction(&a, &shape(&[2, 3])).unwrap();
        let g = f.to_grid(&[4, 5], GridCap::default()).unwrap();
        let sq = g.combine(&g, GridCap::default(), |x, y| x * y).unwrap();
        assert!(sq.values().iter().all(|&v| v == 1.0));
        let x = [0.3, 0.8];
        assert_eq!(f.eval(&x).unwrap(), g.eval(&x).unwrap());
    }

    #[test]
    fn pairing_with_constant_one() {
        let a = gen_random(13, 2, 2).unwrap();
        let one = GridFunction::constant(&[0, 0], 1.0, GridCap::default()).unwrap();
        let expected: f64 = a
            .iter()
            .map(|p| p.iter().map(|x| 1.0 - x).product::<f64>())
            .sum::<f64>()
            - 13.0 / 4.0;
        assert!((pair_dn_grid(&a, &one).unwrap() - expected).abs() < 1e-13);
    }

    #[test]
    fn pairing_with_haar_matches_closed_form() {
        let a = gen_random(30, 2, 9).unwrap();
        for s in enumerate_shapes(5, 2) {
            for idx in [0, 7, 31] {
                let rect = s.rectangle(idx);
                let g = GridFunction::haar(&rect, &[6, 6], GridCap::default()).unwrap();
                let closed = haar_coeff_dn(&a, &rect).unwrap().value;
                assert!((pair_dn_grid(&a, &g).unwrap() - closed).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cell_averages_of_single_point() {
        // D(x) = 1{x > (0.25, 0.25)} − x1 x2 on a 2×2 grid
        let a = pts(&[vec![0.25, 0.25]]);
        let g = dn_cell_averages(&a, &[1, 1], GridCap::default()).unwrap();
        let count = [0.25, 0.5, 0.5, 1.0];
        let lin = [1.0 / 16.0, 3.0 / 16.0, 3.0 / 16.0, 9.0 / 16.0];
        for i in 0..4 {
            assert!((g.values()[i] - (count[i] - lin[i])).abs() < 1e-15);
        }
    }

    #[test]
    fn sparse_coefficients_match_dense() {
        let points = gen_random(37, 2, 8).unwrap();
        for r in enumerate_shapes(9, 2) {
            let dense = shape_coefficients(&points, &r).unwrap();
            let sparse = sparse_shape_coefficients(&points, &r).unwrap();
            for &(idx, c) in &sparse.occupied {
                assert!((c - dense.value(idx)).abs() < 1e-15);
            }
            let abs: f64 = (0..dense.len()).map(|i| dense.value(i).abs()).sum();
            assert!((abs - sparse.abs_sum()).abs() < 1e-13);
            assert_eq!(sparse.rectangles, dense.len() as u64);
        }
    }
}
