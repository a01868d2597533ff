//! Product square functions, the dyadic maximal function, and the
//! good-rectangle sets behind the Hardy space lower bound.

use serde::{Deserialize, Serialize};

use crate::discrepancy::{classify_good, dn_cell_averages, shape_coefficients};
use crate::dualcert::{prefix_classes, prefix_levels, sine_of_fs, CertificateConfig};
use crate::dyadic::{enumerate_shapes, DyadicRectangle, GridCap, GridFunction, ShapeVector};
use crate::error::{Error, Result};
use crate::pointset::PointSet;

/// `Int_t g`: the average of `g` over coordinate `t` (zero-based). The
/// result has level 0 along `t`.
pub fn int_t(g: &GridFunction, t: usize) -> Result<GridFunction> {
    g.average_coordinate(t)
}

/// `Π_t (Id − Int_t) g`.
pub fn annihilate_means(g: &GridFunction) -> Result<GridFunction> {
    let mut out = g.clone();
    for t in 0..g.dim() {
        let avg = int_t(&out, t)?;
        out.merge_from(&avg, |a, b| a - b)?;
    }
    Ok(out)
}

/// Cell averages of `D̃_N = Π_t (Id − Int_t) D_N`. Averaging over cells
/// commutes with every `Int_t`, so these are exact.
pub fn tilde_dn_grid(points: &PointSet, levels: &[u32], cap: GridCap) -> Result<GridFunction> {
    annihilate_means(&dn_cell_averages(points, levels, cap)?)
}

/// `⟨D̃_N, h_R⟩`, computed from [`tilde_dn_grid`] one level below `R`.
pub fn tilde_dn_coeff(points: &PointSet, rect: &DyadicRectangle) -> Result<f64> {
    let levels: Vec<u32> = rect.levels().iter().map(|l| l + 1).collect();
    let cap = GridCap(levels.iter().sum());
    let tilde = tilde_dn_grid(points, &levels, cap)?;
    tilde.inner(&GridFunction::haar(rect, &levels, cap)?)
}

/// A set of distinct shapes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeSet(Vec<ShapeVector>);

impl ShapeSet {
    pub fn new(shapes: Vec<ShapeVector>) -> Result<Self> {
        let Some(first) = shapes.first() else {
            return Err(Error::InvalidShape("empty shape set".into()));
        };
        let d = first.dim();
        if shapes.iter().any(|s| s.dim() != d) {
            return Err(Error::InvalidShape("shapes of mixed dimension".into()));
        }
        let mut sorted = shapes.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != shapes.len() {
            return Err(Error::InvalidShape("repeated shape".into()));
        }
        Ok(Self(shapes))
    }

    /// `H_n^d`.
    pub fn hyperbolic(n: u32, d: usize) -> Result<Self> {
        Self::new(enumerate_shapes(n, d))
    }

    pub fn shapes(&self) -> &[ShapeVector] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0[0].dim()
    }

    /// Coarsest grid on which every indicator `1_R` is constant.
    pub fn levels(&self) -> Vec<u32> {
        (0..self.dim())
            .map(|t| self.0.iter().map(|s| s.components()[t]).max().unwrap_or(0))
            .collect()
    }
}

/// `⟨g, h_R⟩` for every `R` of the shape, in rectangle order.
pub fn haar_coefficients(g: &GridFunction, shape: &ShapeVector) -> Result<Vec<f64>> {
    if g.dim() != shape.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            got: shape.dim(),
        });
    }
    let fine: Vec<u32> = shape.components().iter().map(|r| r + 1).collect();
    if fine.iter().zip(g.levels()).any(|(f, m)| f > m) {
        return Err(Error::Domain(format!(
            "grid {:?} is too coarse for shape {shape}",
            g.levels()
        )));
    }
    let g = g.coarsen(&fine)?;
    let vol = g.cell_volume();
    let coarse = GridFunction::zeros(shape.components(), GridCap(shape.index()))?;
    let mut coeffs = vec![0.0; shape.rectangle_count()];
    let mut cell = vec![0u64; g.dim()];
    for (idx, v) in g.values().iter().enumerate() {
        g.coords_into(idx, &mut cell);
        let mut sign = 1.0;
        for c in cell.iter_mut() {
            if *c & 1 == 0 {
                sign = -sign;
            }
            *c >>= 1;
        }
        coeffs[coarse.index_of(&cell)] += sign * v * vol;
    }
    Ok(coeffs)
}

fn square_from_coefficients<F>(
    shapes: &ShapeSet,
    cap: GridCap,
    mut coeffs: F,
) -> Result<GridFunction>
where
    F: FnMut(&ShapeVector) -> Result<Vec<f64>>,
{
    let levels = shapes.levels();
    let mut sq = GridFunction::zeros(&levels, cap)?;
    for shape in shapes.shapes() {
        let c = coeffs(shape)?;
        let area = crate::dyadic::dyadic_scale(shape.index());
        let term = GridFunction::from_values(
            shape.components(),
            c.into_iter().map(|x| (x / area).powi(2)).collect(),
        )?;
        sq.add_mapped(&term, |v| v)?;
    }
    sq.map_in_place(f64::sqrt);
    Ok(sq)
}

/// `S g = [Σ_{R of the given shapes} |⟨g, h_R⟩|² |R|^{-2} 1_R]^{1/2}`.
pub fn square_function(g: &GridFunction, shapes: &ShapeSet, cap: GridCap) -> Result<GridFunction> {
    square_from_coefficients(shapes, cap, |s| haar_coefficients(g, s))
}

/// [`square_function`] of `D̃_N` from the closed-form Haar coefficients of
/// `D_N`, which `D̃_N` shares.
pub fn square_function_dn(
    points: &PointSet,
    shapes: &ShapeSet,
    cap: GridCap,
) -> Result<GridFunction> {
    square_from_coefficients(shapes, cap, |s| {
        let c = shape_coefficients(points, s)?;
        Ok((0..c.len()).map(|i| c.value(i)).collect())
    })
}

/// `S_k(Φ)`: groups the prefixes `s` by their first `k` components and
/// takes `n^{-(d−2)/2} [Σ_classes |Σ_{s in class} sin(ε n^{-1/2} F_s)|²]^{1/2}`.
pub fn iterated_square(
    points: &PointSet,
    cfg: &CertificateConfig,
    k: usize,
) -> Result<GridFunction> {
    let d = points.dim();
    if d < 3 || k == 0 || k > d - 2 {
        return Err(Error::Domain(format!(
            "S_k needs d ≥ 3 and 1 ≤ k ≤ d − 2, got d = {d}, k = {k}"
        )));
    }
    let prefixes = prefix_classes(d, cfg);
    let levels = crate::dualcert::phi_levels(d, cfg)?;
    let mut sq = GridFunction::zeros(&levels, cfg.grid_cap)?;
    let mut start = 0;
    while start < prefixes.len() {
        let class = &prefixes[start][..k];
        let end = start
            + prefixes[start..]
                .iter()
                .take_while(|s| &s[..k] == class)
                .count();
        if end - start == 1 {
            let term = sine_of_fs(points, &prefixes[start], cfg)?;
            sq.add_mapped(&term.grid, |v| v * v)?;
        } else {
            let mut class_levels = vec![0u32; d];
            for s in &prefixes[start..end] {
                for (l, p) in class_levels.iter_mut().zip(prefix_levels(s, cfg.n)) {
                    *l = (*l).max(p);
                }
            }
            let mut sum = GridFunction::zeros(&class_levels, cfg.grid_cap)?;
            for s in &prefixes[start..end] {
                sum.add_mapped(&sine_of_fs(points, s, cfg)?.grid, |v| v)?;
            }
            sq.add_mapped(&sum, |v| v * v)?;
        }
        start = end;
    }
    let scale = f64::from(cfg.n).powf(-((d - 2) as f64) / 2.0);
    sq.map_in_place(|v| scale * v.sqrt());
    Ok(sq)
}

/// `M g(x) = sup_{R ∋ x} |R|^{-1} ∫_R g` over dyadic `R` with side levels
/// at most `max_levels` (level 0 included), on the grid of `g`.
pub fn maximal_function(g: &GridFunction, max_levels: &[u32]) -> Result<GridFunction> {
    if max_levels.len() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            got: max_levels.len(),
        });
    }
    if max_levels.iter().zip(g.levels()).any(|(m, l)| m > l) {
        return Err(Error::Domain(format!(
            "rectangles at levels {max_levels:?} are finer than the grid {:?}",
            g.levels()
        )));
    }
    let mut out = GridFunction::constant(g.levels(), f64::NEG_INFINITY, GridCap(g.total_level()))?;
    let start = g.coarsen(max_levels)?;
    maximal_rec(&start, 0, &mut out)?;
    Ok(out)
}

fn maximal_rec(current: &GridFunction, t: usize, out: &mut GridFunction) -> Result<()> {
    if t == current.dim() {
        return out.merge_from(current, f64::max);
    }
    let mut cur = current.clone();
    loop {
        maximal_rec(&cur, t + 1, out)?;
        if cur.levels()[t] == 0 {
            return Ok(());
        }
        let mut levels = cur.levels().to_vec();
        levels[t] -= 1;
        cur = cur.coarsen(&levels)?;
    }
}

/// `G_r`: the union of the rectangles of shape `r` containing no point.
#[derive(Clone, Debug, PartialEq)]
pub struct GoodSet {
    pub shape: ShapeVector,
    /// Indicator of `G_r` on the grid of level `r`.
    pub region: GridFunction,
    pub measure: f64,
}

pub fn good_sets(points: &PointSet, n: u32) -> Result<Vec<GoodSet>> {
    enumerate_shapes(n, points.dim())
        .into_iter()
        .map(|shape| {
            let part = classify_good(points, &shape)?;
            let mut values = vec![0.0; shape.rectangle_count()];
            for &i in &part.good {
                values[i] = 1.0;
            }
            let region = GridFunction::from_values(shape.components(), values)?;
            let measure = region.integral();
            Ok(GoodSet {
                shape,
                region,
                measure,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PNormCheck {
    pub p: f64,
    pub value: f64,
    pub floor: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardyReport {
    pub dim: usize,
    pub n: u32,
    pub n_points: usize,
    /// `J = |H_n^d|`.
    pub shapes: usize,
    pub min_good_measure: f64,
    /// Measure of `{Σ_r 1_{G_r} > J/4}`.
    pub mass_above_quarter: f64,
    /// `‖Σ_r 1_{G_r}‖_p` against `(J/4)(1/4)^{1/p}`.
    pub good_count_norms: Vec<PNormCheck>,
    /// `‖S(D̃_N)‖_p` against `(4^{-2d}/16)^{1/2} (J/4)^{1/2} (1/4)^{1/p}`.
    pub square_norms: Vec<PNormCheck>,
    /// `‖S(D̃_N)‖_p / n^{(d−1)/2}`, in the order of `square_norms`.
    pub growth_ratios: Vec<f64>,
}

/// Every term of the lower bound for `‖S(D̃_N)‖_p` over `H_n^d`.
pub fn hardy_lower_report(
    points: &PointSet,
    n: u32,
    ps: &[f64],
    cap: GridCap,
) -> Result<HardyReport> {
    let d = points.dim();
    if d < 2 {
        return Err(Error::UnsupportedDimension {
            dim: d,
            reason: "needs d ≥ 2",
        });
    }
    if n < d as u32 {
        return Err(Error::Domain(format!(
            "H_n^d is empty for n = {n}, d = {d}"
        )));
    }
    if let Some(p) = ps.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
        return Err(Error::Domain(format!("p = {p} is not in (0, 1]")));
    }
    let shape_set = ShapeSet::hyperbolic(n, d)?;
    let levels = shape_set.levels();
    let sets = good_sets(points, n)?;
    let j = sets.len();
    let mut count = GridFunction::zeros(&levels, cap)?;
    for s in &sets {
        count.add_mapped(&s.region, |v| v)?;
    }
    let quarter = j as f64 / 4.0;
    let above = count.values().iter().filter(|&&v| v > quarter).count();
    let mass_above_quarter = above as f64 * count.cell_volume();
    let sq = square_function_dn(points, &shape_set, cap)?;
    let coeff_floor = (4f64.powi(-2 * d as i32) / 16.0).sqrt();
    let good_count_norms = ps
        .iter()
        .map(|&p| PNormCheck {
            p,
            value: count.pnorm(p),
            floor: quarter * 0.25f64.powf(1.0 / p),
        })
        .collect();
    let square_norms: Vec<PNormCheck> = ps
        .iter()
        .map(|&p| PNormCheck {
            p,
            value: sq.pnorm(p),
            floor: coeff_floor * quarter.sqrt() * 0.25f64.powf(1.0 / p),
        })
        .collect();
    let growth = f64::from(n).powf((d as f64 - 1.0) / 2.0);
    let growth_ratios = square_norms.iter().map(|c| c.value / growth).collect();
    Ok(HardyReport {
        dim: d,
        n,
        n_points: points.len(),
        shapes: j,
        min_good_measure: sets.iter().map(|s| s.measure).fold(1.0, f64::min),
        mass_above_quarter,
        good_count_norms,
        square_norms,
        growth_ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrepancy::haar_coeff_dn;
    use crate::dyadic::DyadicInterval;
    use crate::pointset::{gen_random, gen_vandercorput};

    fn cap() -> GridCap {
        GridCap::default()
    }

    fn rect(sides: &[(u32, u64)]) -> DyadicRectangle {
        DyadicRectangle::new(
            sides
                .iter()
                .map(|&(l, o)| DyadicInterval::new(l, o).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn int_t_examples() {
        let g = GridFunction::from_cell_fn(&[6, 6], cap(), |j| {
            (j[0] as f64 + 0.5) / 64.0 * (j[1] as f64 + 0.5) / 64.0
        })
        .unwrap();
        let a = int_t(&g, 0).unwrap();
        assert_eq!(a.levels(), &[0, 6]);
        for (j, v) in a.values().iter().enumerate() {
            assert!((v - (j as f64 + 0.5) / 128.0).abs() < 1.0 / 64.0);
        }
        let h = GridFunction::haar(&rect(&[(1, 1), (2, 0)]), &[4, 4], cap()).unwrap();
        assert!(int_t(&h, 1).unwrap().sup_norm() == 0.0);
        assert_eq!(int_t(&a, 0).unwrap(), a);
        assert!(int_t(&g, 2).is_err());
    }

    #[test]
    fn tilde_coefficients_match() {
        let a = gen_random(20, 2, 9).unwrap();
        for r in [
            rect(&[(0, 0), (0, 0)]),
            rect(&[(2, 3), (1, 0)]),
            rect(&[(3, 5), (4, 2)]),
        ] {
            let want = haar_coeff_dn(&a, &r).unwrap().value;
            assert!((tilde_dn_coeff(&a, &r).unwrap() - want).abs() < 1e-10);
        }
    }

    #[test]
    fn tilde_is_killed_by_each_average() {
        let a = gen_random(12, 3, 4).unwrap();
        let t = tilde_dn_grid(&a, &[3, 4, 3], cap()).unwrap();
        for k in 0..3 {
            assert!(int_t(&t, k).unwrap().sup_norm() < 1e-12);
        }
    }

    #[test]
    fn square_of_haar_is_indicator() {
        let r = rect(&[(2, 1), (1, 1)]);
        let h = GridFunction::haar(&r, &[4, 4], cap()).unwrap();
        let shapes = ShapeSet::new(vec![ShapeVector::new(vec![2, 1]).unwrap()]).unwrap();
        let s = square_function(&h, &shapes, cap()).unwrap();
        assert_eq!(s, GridFunction::indicator(&r, &[2, 1], cap()).unwrap());
    }

    #[test]
    fn square_of_dn_agrees_with_grid_route() {
        let a = gen_random(9, 2, 3).unwrap();
        let shapes = ShapeSet::hyperbolic(4, 2).unwrap();
        let closed = square_function_dn(&a, &shapes, cap()).unwrap();
        let grid =
            square_function(&tilde_dn_grid(&a, &[4, 4], cap()).unwrap(), &shapes, cap()).unwrap();
        for (x, y) in closed.values().iter().zip(grid.values()) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn shape_sets_reject_repeats() {
        let s = ShapeVector::new(vec![1, 2]).unwrap();
        assert!(ShapeSet::new(vec![s.clone(), s]).is_err());
        assert!(ShapeSet::new(vec![]).is_err());
    }

    #[test]
    fn maximal_examples() {
        let one = GridFunction::constant(&[3, 2], 1.0, cap()).unwrap();
        assert_eq!(maximal_function(&one, &[3, 2]).unwrap(), one);
        let step = GridFunction::from_values(&[1], vec![1.0, 0.0]).unwrap();
        assert_eq!(maximal_function(&step, &[1]).unwrap().values(), &[1.0, 0.5]);
        assert!(maximal_function(&step, &[2]).is_err());
    }

    #[test]
    fn good_sets_cover_half() {
        let a = gen_vandercorput(5).unwrap();
        for s in good_sets(&a, 6).unwrap() {
            assert!(s.measure >= 0.5);
        }
    }

    #[test]
    fn hardy_floors_hold_for_van_der_corput() {
        for n in 3..=9 {
            let a = gen_vandercorput(n - 1).unwrap();
            let r = hardy_lower_report(&a, n, &[0.5, 1.0], cap()).unwrap();
            assert!(r.min_good_measure >= 0.5);
            assert!(r.mass_above_quarter >= 0.25);
            for c in r.good_count_norms.iter().chain(&r.square_norms) {
                assert!(c.value >= c.floor, "n = {n}: {c:?}");
            }
        }
    }

    #[test]
    fn iterated_square_is_bounded() {
        let a = crate::pointset::gen_halton(1 << 5, 3).unwrap();
        let cfg = CertificateConfig::new(0.2, 6).unwrap();
        let s = iterated_square(&a, &cfg, 1).unwrap();
        assert!(s.sup_norm() <= 1.0);
        assert!(iterated_square(&a, &cfg, 2).is_err());
    }
}
