//! Lebesgue and Orlicz norms of grid functions, and exact Rademacher
//! moment checks.

use serde::{Deserialize, Serialize};

use crate::discrepancy::dn_cell_averages;
use crate::dyadic::{GridCap, GridFunction};
use crate::error::{Error, Result};
use crate::pointset::PointSet;
use crate::sum::pairwise_sum_by;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaugeKind {
    /// `exp(L^α)`: `ψ(x) = e^{|x|^α} − 1`.
    ExpAlpha,
    /// `L(log L)^α`: `ψ(x) = |x| log(3 + |x|)^α`.
    LlogAlpha,
}

/// A Young function `ψ` defining the Luxemburg norm
/// `‖f‖ = inf{K > 0 : E ψ(f / K) ≤ 1}`.
///
/// For `exp(L^α)` with `α < 1` the function `e^{x^α} − 1` is not convex
/// near zero, so below `splice` it is replaced by the line through the
/// origin tangent to it at `splice`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrliczGauge {
    pub kind: GaugeKind,
    pub alpha: f64,
    pub splice: f64,
}

impl OrliczGauge {
    pub fn exp(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!("exp(L^α) needs α > 0, got {alpha}")));
        }
        let splice = if alpha >= 1.0 {
            0.0
        } else {
            tangent_point(alpha)
        };
        Ok(Self {
            kind: GaugeKind::ExpAlpha,
            alpha,
            splice,
        })
    }

    /// `α = 0` gives plain `L¹`.
    pub fn llog(alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!(
                "L(log L)^α needs α ≥ 0, got {alpha}"
            )));
        }
        Ok(Self {
            kind: GaugeKind::LlogAlpha,
            alpha,
            splice: 0.0,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x = x.abs();
        match self.kind {
            GaugeKind::ExpAlpha if x < self.splice => {
                x * (self.splice.powf(self.alpha)).exp_m1() / self.splice
            }
            GaugeKind::ExpAlpha => x.powf(self.alpha).exp_m1(),
            GaugeKind::LlogAlpha if self.alpha == 0.0 => x,
            GaugeKind::LlogAlpha => x * (3.0 + x).ln().powf(self.alpha),
        }
    }

    pub fn label(&self) -> String {
        match self.kind {
            GaugeKind::ExpAlpha => format!("exp(L^{})", self.alpha),
            GaugeKind::LlogAlpha => format!("L(log L)^{}", self.alpha),
        }
    }
}

/// Solves `α u = 1 − e^{−u}` for `u > 0`; the tangent point is `u^{1/α}`.
fn tangent_point(alpha: f64) -> f64 {
    let g = |u: f64| -(-u).exp_m1() - alpha * u;
    let (mut lo, mut hi) = (f64::MIN_POSITIVE, 1.0 / alpha);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).powf(1.0 / alpha)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    Bisection,
    PSup,
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub value: f64,
    pub gauge: String,
    pub method: NormMethod,
    /// `E ψ(f / value) − 1` for bisection results, else zero.
    pub residual: f64,
    pub iterations: u32,
}

/// Distribution of `|f|`: sorted distinct magnitudes with their measures.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueDistribution {
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl ValueDistribution {
    pub fn from_grid(g: &GridFunction) -> Self {
        let mut abs: Vec<f64> = g.values().iter().map(|v| v.abs()).collect();
        abs.sort_unstable_by(f64::total_cmp);
        let cell = g.cell_volume();
        let mut values = Vec::new();
        let mut weights = Vec::new();
        let mut i = 0;
        while i < abs.len() {
            let j = i + abs[i..].partition_point(|&x| x == abs[i]);
            values.push(abs[i]);
            weights.push((j - i) as f64 * cell);
            i = j;
        }
        Self { values, weights }
    }

    /// Weights are normalized to total mass one.
    pub fn from_weighted(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut pairs: Vec<(f64, f64)> = pairs.into_iter().map(|(v, w)| (v.abs(), w)).collect();
        if pairs.is_empty() || pairs.iter().any(|(v, w)| !v.is_finite() || !(*w >= 0.0)) {
            return Err(Error::Domain(
                "empty or invalid weighted distribution".into(),
            ));
        }
        pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let total = pairwise_sum_by(pairs.len(), |i| pairs[i].1);
        if total <= 0.0 {
            return Err(Error::Domain("distribution has zero mass".into()));
        }
        let mut values: Vec<f64> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for (v, w) in pairs {
            match values.last() {
                Some(&last) if last == v => *weights.last_mut().unwrap() += w / total,
                _ => {
                    values.push(v);
                    weights.push(w / total);
                }
            }
        }
        Ok(Self { values, weights })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        pairwise_sum_by(self.values.len(), |i| self.weights[i] * f(self.values[i]))
    }

    pub fn pnorm(&self, p: f64) -> f64 {
        let m = self.max();
        if m == 0.0 {
            return 0.0;
        }
        // Scale by the maximum so that large p cannot overflow.
        m * self.expect(|x| (x / m).powf(p)).powf(1.0 / p)
    }
}

const MAX_ITERATIONS: u32 = 400;

/// Luxemburg norm by bisection on `K`.
pub fn orlicz_norm_of(dist: &ValueDistribution, gauge: &OrliczGauge) -> NormReport {
    let gauge_label = gauge.label();
    let top = dist.max();
    if top == 0.0 {
        return NormReport {
            value: 0.0,
            gauge: gauge_label,
            method: NormMethod::Exact,
            residual: 0.0,
            iterations: 0,
        };
    }
    let excess = |k: f64| dist.expect(|x| gauge.eval(x / k)) - 1.0;
    let mut iterations = 0;
    let mut hi = top;
    while excess(hi) > 0.0 {
        hi *= 2.0;
        iterations += 1;
    }
    let mut lo = hi;
    while excess(lo) <= 0.0 {
        lo *= 0.5;
        iterations += 1;
    }
    // excess(lo) > 0 ≥ excess(hi); the root is in between.
    while iterations < MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        let e = excess(mid);
        if e > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let (value, residual) = [lo, hi, 0.5 * (lo + hi)]
        .into_iter()
        .map(|k| (k, excess(k)))
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .expect("three candidates");
    NormReport {
        value,
        gauge: gauge_label,
        method: NormMethod::Bisection,
        residual,
        iterations,
    }
}

/// Luxemburg norm of a grid function under Lebesgue measure.
pub fn orlicz_norm(g: &GridFunction, gauge: &OrliczGauge) -> NormReport {
    orlicz_norm_of(&ValueDistribution::from_grid(g), gauge)
}

pub const PSUP_EXPONENTS: [f64; 9] = [2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0];

/// `max_p p^{−1/α} ‖f‖_p` over [`PSUP_EXPONENTS`].
pub fn exp_orlicz_via_pnorms_of(dist: &ValueDistribution, alpha: f64) -> f64 {
    PSUP_EXPONENTS
        .iter()
        .map(|&p| p.powf(-1.0 / alpha) * dist.pnorm(p))
        .fold(0.0, f64::max)
}

pub fn exp_orlicz_via_pnorms(g: &GridFunction, alpha: f64) -> f64 {
    exp_orlicz_via_pnorms_of(&ValueDistribution::from_grid(g), alpha)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualPairingReport {
    pub inner: f64,
    pub llog_norm: f64,
    pub exp_norm: f64,
    /// `|⟨f, g⟩| / (‖f‖_{L(log L)^α} ‖g‖_{exp(L^{1/α})})`; absent if a norm vanishes.
    pub ratio: Option<f64>,
}

/// Hölder-type pairing between `L(log L)^α` and `exp(L^{1/α})`.
pub fn dual_pairing_check(
    f: &GridFunction,
    g: &GridFunction,
    alpha: f64,
) -> Result<DualPairingReport> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!(
            "dual pairing needs α > 0, got {alpha}"
        )));
    }
    let inner = f.inner(g)?;
    let llog_norm = orlicz_norm(f, &OrliczGauge::llog(alpha)?).value;
    let exp_norm = orlicz_norm(g, &OrliczGauge::exp(1.0 / alpha)?).value;
    let denom = llog_norm * exp_norm;
    let ratio = (denom > 0.0).then(|| inner.abs() / denom);
    Ok(DualPairingReport {
        inner,
        llog_norm,
        exp_norm,
        ratio,
    })
}

pub const MAX_RADEMACHER_TERMS: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RademacherReport {
    pub terms: usize,
    pub lambda: f64,
    pub p: f64,
    /// `E exp(λ Σ c_j r_j)`.
    pub mgf: f64,
    /// `exp(λ² Σ c_j² / 2)`.
    pub mgf_bound: f64,
    pub mgf_holds: bool,
    /// `(Σ c_j²)^{1/2}`.
    pub l2: f64,
    /// `‖Σ c_j r_j‖_p`.
    pub moment: f64,
    /// `‖Σ c_j r_j‖_p / (√p (Σ c_j²)^{1/2})`, measured only.
    pub khintchine_ratio: f64,
    /// Luxemburg `exp(L²)` norm of the sum.
    pub exp2_norm: f64,
}

/// Values of `Σ c_j r_j` over all `2^|c|` sign patterns.
pub fn rademacher_values(c: &[f64]) -> Result<Vec<f64>> {
    if c.len() > MAX_RADEMACHER_TERMS {
        return Err(Error::TooLarge(format!(
            "{} coefficients; exact enumeration allows {MAX_RADEMACHER_TERMS}",
            c.len()
        )));
    }
    let mut values = vec![0.0f64; 1 << c.len()];
    for (j, &cj) in c.iter().enumerate() {
        let half = 1usize << j;
        for i in 0..half {
            let base = values[i];
            values[i] = base - cj;
            values[i + half] = base + cj;
        }
    }
    Ok(values)
}

pub fn rademacher_checks(c: &[f64], lambda: f64, p: f64) -> Result<RademacherReport> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("moment order p = {p} must be ≥ 1")));
    }
    let values = rademacher_values(c)?;
    let count = values.len() as f64;
    let mgf = pairwise_sum_by(values.len(), |i| (lambda * values[i]).exp()) / count;
    let sq: f64 = c.iter().map(|x| x * x).sum();
    let mgf_bound = (0.5 * lambda * lambda * sq).exp();
    let dist = ValueDistribution::from_weighted(values.iter().map(|&v| (v, 1.0)))?;
    let moment = dist.pnorm(p);
    let l2 = sq.sqrt();
    let khintchine_ratio = if l2 > 0.0 {
        moment / (p.sqrt() * l2)
    } else {
        0.0
    };
    let exp2_norm = orlicz_norm_of(&dist, &OrliczGauge::exp(2.0)?).value;
    Ok(RademacherReport {
        terms: c.len(),
        lambda,
        p,
        mgf,
        mgf_bound,
        mgf_holds: mgf <= mgf_bound,
        l2,
        moment,
        khintchine_ratio,
        exp2_norm,
    })
}

/// Exact `‖D_N‖_2` from Warnock's formula.
pub fn dn_l2_exact(points: &PointSet) -> f64 {
    let n = points.len();
    let d = points.dim() as i32;
    let cross = pairwise_sum_by(n * n, |k| {
        let (p, q) = (points.point(k / n), points.point(k % n));
        p.iter().zip(q).map(|(a, b)| 1.0 - a.max(*b)).product()
    });
    let mixed = pairwise_sum_by(n, |i| {
        points
            .point(i)
            .iter()
            .map(|x| 0.5 * (1.0 - x * x))
            .product()
    });
    let nf = n as f64;
    let sq = cross - 2.0 * nf * mixed + nf * nf * 3f64.powi(-d);
    sq.max(0.0).sqrt()
}

/// Norms of `D_N` at a fixed resolution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DnNormSuite {
    pub resolution: u32,
    pub l1: NormReport,
    pub l2: NormReport,
    /// `L(log L)^{(d−2)/2}`, which is `L¹` in two dimensions.
    pub llog: NormReport,
    /// Relative change of the `L¹` and `L(log L)` values from `m` to `m + 1`.
    pub refinement_change: Option<f64>,
    pub converged: Option<bool>,
}

pub const REFINEMENT_TOLERANCE: f64 = 0.01;

fn cell_norms(points: &PointSet, m: u32, cap: GridCap) -> Result<(NormReport, NormReport)> {
    let levels = vec![m; points.dim()];
    let avg = dn_cell_averages(points, &levels, cap)?;
    let dist = ValueDistribution::from_grid(&avg);
    let l1 = NormReport {
        value: dist.expect(|x| x),
        gauge: "L^1".into(),
        method: NormMethod::Exact,
        residual: 0.0,
        iterations: 0,
    };
    let alpha = (points.dim() as f64 - 2.0) / 2.0;
    let llog = if alpha == 0.0 {
        l1.clone()
    } else {
        orlicz_norm_of(&dist, &OrliczGauge::llog(alpha)?)
    };
    Ok((l1, llog))
}

/// `‖D_N‖_1` and `‖D_N‖_{L(log L)^{(d−2)/2}}` from exact cell averages at
/// per-axis level `m`, `‖D_N‖_2` exactly. When the grid at `m + 1` fits
/// under the cap the values are recomputed there and the relative change
/// reported.
pub fn dn_norm_suite(points: &PointSet, m: u32, cap: GridCap) -> Result<DnNormSuite> {
    let d = points.dim() as u32;
    let (l1, llog) = cell_norms(points, m, cap)?;
    let l2 = NormReport {
        value: dn_l2_exact(points),
        gauge: "L^2".into(),
        method: NormMethod::Exact,
        residual: 0.0,
        iterations: 0,
    };
    let (refinement_change, converged) = if d * (m + 1) <= cap.0 {
        let (l1f, llogf) = cell_norms(points, m + 1, cap)?;
        let rel = |a: f64, b: f64| {
            if b == 0.0 {
                (a - b).abs()
            } else {
                (a - b).abs() / b.abs()
            }
        };
        let change = rel(l1.value, l1f.value).max(rel(llog.value, llogf.value));
        (Some(change), Some(change < REFINEMENT_TOLERANCE))
    } else {
        (None, None)
    };
    Ok(DnNormSuite {
        resolution: m,
        l1,
        l2,
        llog,
        refinement_change,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::DyadicInterval;
    use crate::dyadic::DyadicRectangle;

    fn constant(v: f64) -> GridFunction {
        GridFunction::constant(&[2, 2], v, GridCap::default()).unwrap()
    }

    #[test]
    fn constant_exp2_norm() {
        let r = orlicz_norm(&constant(1.0), &OrliczGauge::exp(2.0).unwrap());
        assert!((r.value - 1.0 / 2f64.ln().sqrt()).abs() < 1e-9);
        assert!(r.residual.abs() <= 1e-9);
        assert_eq!(
            orlicz_norm(&constant(0.0), &OrliczGauge::exp(2.0).unwrap()).value,
            0.0
        );
    }

    #[test]
    fn homogeneity() {
        let g = GridFunction::from_values(&[1, 1], vec![0.3, -1.7, 2.2, 0.0]).unwrap();
        for gauge in [
            OrliczGauge::exp(2.0).unwrap(),
            OrliczGauge::exp(0.5).unwrap(),
            OrliczGauge::llog(0.5).unwrap(),
        ] {
            let a = orlicz_norm(&g, &gauge).value;
            let b = orlicz_norm(&g.map(|x| -3.5 * x), &gauge).value;
            assert!((b - 3.5 * a).abs() <= 1e-9 * b, "{}", gauge.label());
        }
    }

    #[test]
    fn l1_gauge_is_l1() {
        let g = GridFunction::from_values(&[1, 1], vec![0.3, -1.7, 2.2, 0.0]).unwrap();
        let r = orlicz_norm(&g, &OrliczGauge::llog(0.0).unwrap());
        assert!((r.value - 1.05).abs() < 1e-12);
    }

    #[test]
    fn gauges_are_convex() {
        for gauge in [
            OrliczGauge::exp(0.3).unwrap(),
            OrliczGauge::exp(2.0 / 3.0).unwrap(),
            OrliczGauge::exp(1.0).unwrap(),
            OrliczGauge::llog(0.25).unwrap(),
            OrliczGauge::llog(0.5).unwrap(),
            OrliczGauge::llog(2.0).unwrap(),
        ] {
            let h = 1e-3;
            for i in 1..20_000 {
                let x = i as f64 * h;
                let second = gauge.eval(x + h) - 2.0 * gauge.eval(x) + gauge.eval(x - h);
                assert!(second >= -1e-9 * gauge.eval(x), "{} at {x}", gauge.label());
            }
            assert_eq!(gauge.eval(0.0), 0.0);
        }
    }

    #[test]
    fn splice_is_tangent() {
        let g = OrliczGauge::exp(0.5).unwrap();
        let t = g.splice;
        assert!(t > ((1.0 - 0.5) / 0.5f64).powf(2.0));
        let left = g.eval(t * (1.0 - 1e-9));
        let right = (t * (1.0 - 1e-9)).powf(0.5).exp_m1();
        assert!((left - right).abs() < 1e-8);
    }

    #[test]
    fn pnorm_sup_of_constant() {
        let v = exp_orlicz_via_pnorms(&constant(1.0), 2.0);
        assert!((v - 2f64.powf(-0.5)).abs() < 1e-15);
    }

    #[test]
    fn haar_pairing_ratio_finite() {
        let r = DyadicRectangle::new(vec![
            DyadicInterval::new(1, 0).unwrap(),
            DyadicInterval::new(0, 0).unwrap(),
        ])
        .unwrap();
        let h = GridFunction::haar(&r, &[3, 3], GridCap::default()).unwrap();
        let rep = dual_pairing_check(&h, &h, 0.5).unwrap();
        assert!((rep.inner - 0.5).abs() < 1e-15);
        assert!(rep.ratio.unwrap() > 0.0 && rep.ratio.unwrap().is_finite());
        let z = constant(0.0);
        assert_eq!(
            dual_pairing_check(&z, &constant(1.0), 1.0).unwrap().ratio,
            None
        );
    }

    #[test]
    fn rademacher_examples() {
        let r = rademacher_checks(&[1.0, 1.0], 1.0, 2.0).unwrap();
        assert!((r.mgf - 1f64.cosh().powi(2)).abs() < 1e-14);
        assert!((r.mgf_bound - 1f64.exp()).abs() < 1e-14);
        assert!(r.mgf_holds);
        assert!((r.moment - 2f64.sqrt()).abs() < 1e-14);
        let s = rademacher_checks(&[1.0], 0.3, 4.0).unwrap();
        assert!((s.mgf - 0.3f64.cosh()).abs() < 1e-15);
        assert!(rademacher_checks(&[1.0; 21], 1.0, 2.0).is_err());
    }

    #[test]
    fn single_point_l1() {
        let a = PointSet::new(2, vec![0.0, 0.0], Default::default()).unwrap();
        let s = dn_norm_suite(&a, 6, GridCap::default()).unwrap();
        assert!((s.l1.value - 0.75).abs() < 1e-12);
        // ∫ (1 − xy)^2 = 1 − 1/2 + 1/9
        assert!((s.l2.value - (1.0 - 0.5 + 1.0 / 9.0f64).sqrt()).abs() < 1e-14);
        assert!(s.l2.value >= s.l1.value);
        assert_eq!(s.converged, Some(true));
    }
}
