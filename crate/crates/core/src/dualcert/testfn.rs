use super::CertificateConfig;
use crate::discrepancy::{build_rfunction, SignedRFunction};
use crate::dyadic::{enumerate_shapes, GridFunction, ShapeVector};
use crate::error::{Error, Result};
use crate::pointset::PointSet;

/// `f_r` from [`build_rfunction`] for every `r ∈ H_n^d`.
pub fn hyperbolic_rfunctions(points: &PointSet, n: u32) -> Result<Vec<SignedRFunction>> {
    enumerate_shapes(n, points.dim())
        .iter()
        .map(|r| build_rfunction(points, r))
        .collect()
}

/// Prefixes `s ∈ {1, 2, …}^{d−2}` entering the test function: `|s|` at most
/// the cutoff `⌊3n/4⌋`, and at most `n − 2` so that `F_s` is a nonempty
/// sum. For `d = 2` this is the single empty prefix.
pub fn prefix_classes(dim: usize, cfg: &CertificateConfig) -> Vec<Vec<u32>> {
    let free = dim.saturating_sub(2);
    let bound = cfg.s_cutoff().min(cfg.n.saturating_sub(2));
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(free);
    prefixes_rec(free, bound, &mut current, &mut out);
    out
}

fn prefixes_rec(free: usize, budget: u32, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if free == 0 {
        out.push(current.clone());
        return;
    }
    // leave one unit for each remaining coordinate
    let reserve = free as u32 - 1;
    if budget < reserve + 1 {
        return;
    }
    for first in 1..=budget - reserve {
        current.push(first);
        prefixes_rec(free - 1, budget - first, current, out);
        current.pop();
    }
}

fn check_prefix(dim: usize, prefix: &[u32], n: u32) -> Result<u32> {
    if dim < 2 || prefix.len() != dim - 2 {
        return Err(Error::Domain(format!(
            "prefix {prefix:?} needs {} components in dimension {dim}",
            dim.saturating_sub(2)
        )));
    }
    if prefix.contains(&0) {
        return Err(Error::Domain(format!(
            "prefix {prefix:?} has a zero component"
        )));
    }
    let used: u32 = prefix.iter().sum();
    if used + 2 > n {
        return Err(Error::Domain(format!(
            "F_s is an empty sum: |s| = {used} leaves no room for two more positive coordinates below n = {n}"
        )));
    }
    Ok(used)
}

/// Shapes `r ∈ H_n^d` with `r_j = s_j` for `j ≤ d − 2`.
pub fn prefix_shapes(prefix: &[u32], n: u32) -> Vec<ShapeVector> {
    let used: u32 = prefix.iter().sum();
    let rest = n - used;
    (1..rest)
        .map(|a| {
            let mut c = prefix.to_vec();
            c.extend([a, rest - a]);
            ShapeVector::new(c).expect("positive components")
        })
        .collect()
}

/// Resolution on which `F_s` is piecewise constant.
pub fn prefix_levels(prefix: &[u32], n: u32) -> Vec<u32> {
    let used: u32 = prefix.iter().sum();
    let mut levels: Vec<u32> = prefix.iter().map(|&s| s + 1).collect();
    levels.extend([n - used, n - used]);
    levels
}

/// Common resolution of every term of `Φ`.
pub fn phi_levels(dim: usize, cfg: &CertificateConfig) -> Result<Vec<u32>> {
    let prefixes = prefix_classes(dim, cfg);
    let mut levels = vec![0u32; dim];
    if prefixes.is_empty() {
        return Err(Error::Domain(format!(
            "no admissible prefixes for n = {}",
            cfg.n
        )));
    }
    for s in &prefixes {
        for (l, p) in levels.iter_mut().zip(prefix_levels(s, cfg.n)) {
            *l = (*l).max(p);
        }
    }
    Ok(levels)
}

/// `F_s = Σ_{r ∈ H_n^d, r_j = s_j (j ≤ d−2)} f_r` at its native resolution.
pub fn build_fs(
    points: &PointSet,
    prefix: &[u32],
    cfg: &CertificateConfig,
) -> Result<GridFunction> {
    cfg.validate()?;
    check_prefix(points.dim(), prefix, cfg.n)?;
    let levels = prefix_levels(prefix, cfg.n);
    let mut g = GridFunction::zeros(&levels, cfg.grid_cap)?;
    for r in prefix_shapes(prefix, cfg.n) {
        build_rfunction(points, &r)?.add_to_grid(&mut g, 1.0)?;
    }
    Ok(g)
}

/// One term `sin(ε n^{-1/2} F_s)` of `Φ`.
#[derive(Clone, Debug)]
pub struct SinePrefix {
    pub prefix: Vec<u32>,
    pub grid: GridFunction,
}

pub fn sine_of_fs(
    points: &PointSet,
    prefix: &[u32],
    cfg: &CertificateConfig,
) -> Result<SinePrefix> {
    let mut grid = build_fs(points, prefix, cfg)?;
    let a = cfg.amplitude();
    grid.map_in_place(|v| (a * v).sin());
    Ok(SinePrefix {
        prefix: prefix.to_vec(),
        grid,
    })
}

/// `Ψ = sin(ε n^{-1/2} Σ_{r ∈ H_n^2} f_r)`, on the `2^n × 2^n` grid.
pub fn build_psi(points: &PointSet, cfg: &CertificateConfig) -> Result<GridFunction> {
    if points.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            dim: points.dim(),
            reason: "the Halász test function is two-dimensional",
        });
    }
    Ok(sine_of_fs(points, &[], cfg)?.grid)
}

/// `Φ = n^{-(d−2)/2} Σ_s sin(ε n^{-1/2} F_s)`; equals `Ψ` when `d = 2`.
pub fn build_phi(points: &PointSet, cfg: &CertificateConfig) -> Result<GridFunction> {
    let d = points.dim();
    if d < 2 {
        return Err(Error::UnsupportedDimension {
            dim: d,
            reason: "needs d ≥ 2",
        });
    }
    if d == 2 {
        return build_psi(points, cfg);
    }
    let levels = phi_levels(d, cfg)?;
    let mut phi = GridFunction::zeros(&levels, cfg.grid_cap)?;
    let scale = f64::from(cfg.n).powf(-((d - 2) as f64) / 2.0);
    for s in prefix_classes(d, cfg) {
        let term = sine_of_fs(points, &s, cfg)?;
        phi.add_mapped(&term.grid, |v| scale * v)?;
    }
    Ok(phi)
}
