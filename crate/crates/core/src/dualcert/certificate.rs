//! Pairings of `D_N` with the sine test functions and the norm bounds they
//! imply by duality.

use serde::{Deserialize, Serialize};

use super::expansion::{sine_weights_closed, sine_weights_series, subset_product_sums};
use super::{build_phi, hyperbolic_rfunctions, prefix_classes, sine_of_fs, CertificateConfig};
use crate::discrepancy::{pair_dn_grid, pair_dn_rfunction};
use crate::dyadic::GridFunction;
use crate::error::{Error, Result};
use crate::norms::{
    exp_orlicz_via_pnorms_of, orlicz_norm_of, NormReport, OrliczGauge, ValueDistribution,
};
use crate::pointset::PointSet;

/// `⟨D_N, sin(ε n^{-1/2} F_s)⟩` for one prefix `s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrefixPairing {
    pub prefix: Vec<u32>,
    pub pairing: f64,
    pub sup_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairingReport {
    pub dim: usize,
    pub n: u32,
    pub n_points: usize,
    pub epsilon: f64,
    /// Whether `2N ≤ 2^n ≤ 4N`.
    pub in_window: bool,
    /// `⟨D_N, Φ⟩` paired directly on the grid (`Φ = Ψ` in two dimensions).
    pub pairing: f64,
    /// `n^{-(d−2)/2} Σ_s ⟨D_N, sin(ε n^{-1/2} F_s)⟩`.
    pub pairing_by_linearity: f64,
    pub prefixes: Vec<PrefixPairing>,
    pub sup_norm: f64,
    /// Two dimensions only: `w(1) = sin(a) cos(a)^{n−2}`, `a = ε n^{-1/2}`,
    /// the weight of `G_1 = Σ_r f_r` in the expansion of `Ψ`.
    pub leading_coefficient: Option<f64>,
    /// `w(1) Σ_r ⟨D_N, f_r⟩`.
    pub leading_term: Option<f64>,
    /// `w(1) (n − 1) 4^{-d} / 8`: the leading term's floor when every
    /// `⟨D_N, f_r⟩ ≥ 4^{-d}/8`.
    pub leading_floor: Option<f64>,
    /// `⟨D_N, Ψ⟩` minus the leading term.
    pub tail: Option<f64>,
    /// `‖Φ‖` in `exp(L^{2/(d−1)})` (three or more dimensions).
    pub phi_orlicz: Option<NormReport>,
    pub phi_orlicz_psup: Option<f64>,
    /// `(p, ‖Φ‖_p)` for `p` in [`PHI_EXPONENTS`] (three or more dimensions).
    pub phi_pnorms: Vec<(f64, f64)>,
    /// Norm of `D_N` the bound is about.
    pub target_norm: String,
    /// `⟨D_N, Φ⟩` divided by the dual norm of `Φ`.
    pub norm_lower_bound: f64,
}

pub const PHI_EXPONENTS: [f64; 4] = [2.0, 4.0, 8.0, 16.0];

fn base_checks(points: &PointSet, cfg: &CertificateConfig) -> Result<()> {
    cfg.validate()?;
    if points.dim() < 2 {
        return Err(Error::UnsupportedDimension {
            dim: points.dim(),
            reason: "needs d ≥ 2",
        });
    }
    Ok(())
}

/// The two-dimensional certificate `⟨D_N, Ψ⟩ / ‖Ψ‖_∞ ≤ ‖D_N‖_1`.
pub fn halasz_certificate(points: &PointSet, cfg: &CertificateConfig) -> Result<PairingReport> {
    base_checks(points, cfg)?;
    if points.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            dim: points.dim(),
            reason: "the Halász certificate is two-dimensional",
        });
    }
    let n = cfg.n;
    let psi = sine_of_fs(points, &[], cfg)?;
    let pairing = pair_dn_grid(points, &psi.grid)?;
    let sup_norm = psi.grid.sup_norm();
    let a = cfg.amplitude();
    let w1 = sine_weights_closed(n - 1, a)[1];
    let mut sum_pairings = 0.0;
    for f in hyperbolic_rfunctions(points, n)? {
        sum_pairings += pair_dn_rfunction(points, &f)?;
    }
    let leading_term = w1 * sum_pairings;
    let leading_floor = w1 * f64::from(n - 1) / 128.0;
    Ok(PairingReport {
        dim: 2,
        n,
        n_points: points.len(),
        epsilon: cfg.epsilon,
        in_window: cfg.check_point_count(points.len()).is_ok(),
        pairing,
        pairing_by_linearity: pairing,
        prefixes: vec![PrefixPairing {
            prefix: Vec::new(),
            pairing,
            sup_norm,
        }],
        sup_norm,
        leading_coefficient: Some(w1),
        leading_term: Some(leading_term),
        leading_floor: Some(leading_floor),
        tail: Some(pairing - leading_term),
        phi_orlicz: None,
        phi_orlicz_psup: None,
        phi_pnorms: Vec::new(),
        target_norm: "L^1".into(),
        norm_lower_bound: if sup_norm > 0.0 {
            pairing / sup_norm
        } else {
            0.0
        },
    })
}

/// The certificate in any dimension `d ≥ 2`: pairs `D_N` with `Φ` and
/// divides by `‖Φ‖_{exp(L^{2/(d−1)})}`, a lower bound (up to the duality
/// constant) for `‖D_N‖_{L(log L)^{(d−2)/2}}`.
pub fn main_certificate(points: &PointSet, cfg: &CertificateConfig) -> Result<PairingReport> {
    base_checks(points, cfg)?;
    let d = points.dim();
    if d == 2 {
        return halasz_certificate(points, cfg);
    }
    let scale = f64::from(cfg.n).powf(-((d - 2) as f64) / 2.0);
    let mut prefixes = Vec::new();
    let mut by_linearity = 0.0;
    for s in prefix_classes(d, cfg) {
        let term = sine_of_fs(points, &s, cfg)?;
        let pairing = pair_dn_grid(points, &term.grid)?;
        by_linearity += pairing;
        prefixes.push(PrefixPairing {
            prefix: s,
            pairing,
            sup_norm: term.grid.sup_norm(),
        });
    }
    by_linearity *= scale;
    let phi = build_phi(points, cfg)?;
    let pairing = pair_dn_grid(points, &phi)?;
    let sup_norm = phi.sup_norm();
    let alpha = 2.0 / (d as f64 - 1.0);
    let dist = ValueDistribution::from_grid(&phi);
    drop(phi);
    let norm = orlicz_norm_of(&dist, &OrliczGauge::exp(alpha)?);
    let psup = exp_orlicz_via_pnorms_of(&dist, alpha);
    let norm_lower_bound = if norm.value > 0.0 {
        pairing / norm.value
    } else {
        0.0
    };
    Ok(PairingReport {
        dim: d,
        n: cfg.n,
        n_points: points.len(),
        epsilon: cfg.epsilon,
        in_window: cfg.check_point_count(points.len()).is_ok(),
        pairing,
        pairing_by_linearity: by_linearity,
        prefixes,
        sup_norm,
        leading_coefficient: None,
        leading_term: None,
        leading_floor: None,
        tail: None,
        phi_orlicz: Some(norm),
        phi_orlicz_psup: Some(psup),
        phi_pnorms: PHI_EXPONENTS.iter().map(|&p| (p, dist.pnorm(p))).collect(),
        target_norm: format!("L(log L)^{}", (d as f64 - 2.0) / 2.0),
        norm_lower_bound,
    })
}

/// `⟨D_N, Ψ⟩` rebuilt term by term as `Σ_{v odd} w(v) ⟨D_N, G_v⟩`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionPairing {
    pub direct: f64,
    pub expanded: f64,
    /// `(v, w(v), ⟨D_N, G_v⟩)` for odd `v`.
    pub terms: Vec<(u32, f64, f64)>,
}

/// Small `n` only: every `G_v` is built on the grid.
pub fn halasz_expansion_check(
    points: &PointSet,
    cfg: &CertificateConfig,
) -> Result<ExpansionPairing> {
    base_checks(points, cfg)?;
    if points.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            dim: points.dim(),
            reason: "expansion is 2D",
        });
    }
    if cfg.n > 10 {
        return Err(Error::TooLarge(format!("expansion check at n = {}", cfg.n)));
    }
    let h = cfg.n - 1;
    let levels = [cfg.n, cfg.n];
    let funcs = hyperbolic_rfunctions(points, cfg.n)?;
    let gv: Vec<GridFunction> = subset_product_sums(&funcs, &levels, h as usize, cfg.grid_cap)?;
    let weights = sine_weights_series(h, cfg.amplitude());
    let mut terms = Vec::new();
    for v in (1..=h).step_by(2) {
        terms.push((
            v,
            weights[v as usize],
            pair_dn_grid(points, &gv[v as usize])?,
        ));
    }
    let expanded = terms.iter().map(|(_, w, p)| w * p).sum();
    let direct = pair_dn_grid(points, &sine_of_fs(points, &[], cfg)?.grid)?;
    Ok(ExpansionPairing {
        direct,
        expanded,
        terms,
    })
}
