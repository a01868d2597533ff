//! The verification suites behind `verify`.

use std::collections::BTreeMap;

use clap::ValueEnum;
use discrepancy_core::discrepancy::{
    build_rfunction, haar_coeff_dn, pair_dn_rfunction, sparse_shape_coefficients,
};
use discrepancy_core::dualcert::expansion::{
    binomial, count_products, expansion_identity_residual, gamma_prime, gamma_prime_enumerated,
    gamma_prime_grid, product_shape_histogram, subset_product_sums, verify_gv_expansion,
    verify_product_rule,
};
use discrepancy_core::dualcert::{
    halasz_certificate, halasz_expansion_check, hyperbolic_rfunctions, main_certificate,
    CertificateConfig,
};
use discrepancy_core::dyadic::{
    enumerate_shapes, DyadicInterval, DyadicRectangle, GridCap, GridFunction, ShapeVector,
};
use discrepancy_core::hardy::{
    hardy_lower_report, iterated_square, maximal_function, square_function, tilde_dn_coeff,
    tilde_dn_grid, ShapeSet,
};
use discrepancy_core::norms::{
    dn_norm_suite, dual_pairing_check, exp_orlicz_via_pnorms, orlicz_norm, rademacher_checks,
    OrliczGauge,
};
use discrepancy_core::pointset::{
    gen_halton, gen_random, gen_vandercorput, seeded_rng, unit_f64, PointSet, SeededRng,
};
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::family::Family;
use crate::report::Check;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Props,
    Expansion,
    Khintchine,
    Orlicz,
    Hardy,
    Certificate,
    All,
}

impl Suite {
    pub fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![
                Suite::Props,
                Suite::Expansion,
                Suite::Khintchine,
                Suite::Orlicz,
                Suite::Hardy,
                Suite::Certificate,
            ],
            s => vec![s],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteParams {
    pub families: Vec<Family>,
    pub max_n: u32,
    pub seed: u64,
    pub epsilon: f64,
}

impl Default for SuiteParams {
    fn default() -> Self {
        Self {
            families: Family::ALL.to_vec(),
            max_n: 12,
            seed: 1,
            epsilon: CertificateConfig::DEFAULT_EPSILON,
        }
    }
}

/// Largest `n` each suite visits per dimension.
pub const PROPS_MAX_N_2D: u32 = 14;
pub const PROPS_MAX_N_3D: u32 = 10;
pub const HARDY_MAX_N_2D: u32 = 12;
pub const HARDY_MAX_N_3D: u32 = 10;
/// Work budget for the `|s| > n` check: rectangles times sign draws.
pub const EXCESS_DRAWS: usize = 100;

/// `⟨D_N, Ψ⟩ / √n` band for van der Corput at `ε = 0.2`, `6 ≤ n ≤ 12`.
pub const HALASZ_BAND: (f64, f64) = (0.005, 0.009);
/// `‖S(D̃_N)‖_p / n^{(d−1)/2}` bands, `p ∈ {1/2, 1}`: van der Corput in two
/// dimensions, Halton in three.
pub const HARDY_BAND_2D: (f64, f64) = (0.03, 0.06);
pub const HARDY_BAND_3D: (f64, f64) = (0.004, 0.012);
/// Below this `n` the ratios are logged, not banded.
pub const HARDY_BAND_MIN_N: u32 = 4;
/// Reference constant for `‖Φ‖_p ≤ C √p`.
pub const PHI_GROWTH_CONSTANT: f64 = 1.0;

pub fn rvec_floor(d: usize) -> f64 {
    4f64.powi(-(d as i32)) / 8.0
}

/// The derived constants every report embeds.
pub fn constant_ledger() -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    m.insert("rvec_floor_d2".into(), rvec_floor(2));
    m.insert("rvec_floor_d3".into(), rvec_floor(3));
    m.insert("hardy_coefficient_floor_d2".into(), 4f64.powi(-4) / 16.0);
    m.insert("hardy_coefficient_floor_d3".into(), 4f64.powi(-6) / 16.0);
    m.insert("halasz_band_lo".into(), HALASZ_BAND.0);
    m.insert("halasz_band_hi".into(), HALASZ_BAND.1);
    m.insert("hardy_band_2d_lo".into(), HARDY_BAND_2D.0);
    m.insert("hardy_band_2d_hi".into(), HARDY_BAND_2D.1);
    m.insert("hardy_band_3d_lo".into(), HARDY_BAND_3D.0);
    m.insert("hardy_band_3d_hi".into(), HARDY_BAND_3D.1);
    m.insert("phi_growth_constant".into(), PHI_GROWTH_CONSTANT);
    m.insert("rademacher_exp2_constant".into(), 3.0);
    m.insert("dual_pairing_ratio_cap".into(), 100.0);
    m
}

/// Small helpers over the library's seeded generator.
pub trait Draw {
    fn uniform(&mut self, lo: f64, hi: f64) -> f64;
    fn sign(&mut self) -> i8;
    fn below(&mut self, k: u64) -> u64;
}

impl Draw for SeededRng {
    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * unit_f64(self)
    }

    fn sign(&mut self) -> i8 {
        if unit_f64(self) < 0.5 {
            -1
        } else {
            1
        }
    }

    fn below(&mut self, k: u64) -> u64 {
        ((unit_f64(self) * k as f64) as u64).min(k - 1)
    }
}

fn err_check(name: String, e: impl std::fmt::Display) -> Check {
    Check::flag(name, false).with_notes(format!("error: {e}"))
}

fn dims_for(family: Family) -> Vec<usize> {
    [2usize, 3]
        .into_iter()
        .filter(|&d| family.supports(d))
        .collect()
}

pub fn run_suite(suite: Suite, params: &SuiteParams) -> Vec<Check> {
    suite
        .expand()
        .into_iter()
        .flat_map(|s| match s {
            Suite::Props => props(params),
            Suite::Expansion => expansion(params),
            Suite::Khintchine => khintchine(params),
            Suite::Orlicz => orlicz(params),
            Suite::Hardy => hardy(params),
            Suite::Certificate => certificate(params),
            Suite::All => unreachable!(),
        })
        .collect()
}

/// The r-function floor and the `|s| > n` ceiling.
pub fn props(params: &SuiteParams) -> Vec<Check> {
    let mut out = Vec::new();
    for &family in &params.families {
        for d in dims_for(family) {
            let top = params.max_n.min(if d == 2 {
                PROPS_MAX_N_2D
            } else {
                PROPS_MAX_N_3D
            });
            for n in d as u32..=top {
                let tag = format!("{}/d{d}/n{n}", family.name());
                match family.at_scale(d, n, params.seed) {
                    Ok(points) => {
                        out.push(rvec_check(&points, n, &tag));
                        out.extend(excess_check(&points, n, params.seed, &tag));
                    }
                    Err(e) => out.push(err_check(format!("props {tag}"), e)),
                }
            }
        }
    }
    out
}

pub fn rvec_check(points: &PointSet, n: u32, tag: &str) -> Check {
    let name = format!("rvec floor {tag}");
    let d = points.dim();
    let mut worst = f64::INFINITY;
    for r in enumerate_shapes(n, d) {
        match build_rfunction(points, &r).and_then(|f| pair_dn_rfunction(points, &f)) {
            Ok(v) => worst = worst.min(v),
            Err(e) => return err_check(name, e),
        }
    }
    Check::at_least(name, worst, rvec_floor(d)).with_notes("min over r in H_n^d of <D_N, f_r>")
}

/// `|⟨D_N, f_s⟩| ≤ N 2^{-|s|}` for `n < |s| ≤ 2n`: random sign draws, plus
/// the worst case over all signs, `Σ_R |⟨D_N, h_R⟩|`.
///
/// Empty rectangles share one coefficient, so a draw only needs the signs on
/// occupied rectangles and the sum of the remaining signs, which is
/// `2 Bin(M, 1/2) − M`.
pub fn excess_check(points: &PointSet, n: u32, seed: u64, tag: &str) -> Vec<Check> {
    let name = format!("index above n {tag}");
    let all_name = format!("index above n, every sign choice {tag}");
    let d = points.dim();
    let mut rng = seeded_rng(seed ^ (u64::from(n) << 32) ^ d as u64);
    let mut worst: f64 = 0.0;
    let mut worst_all: f64 = 0.0;
    let mut shapes = 0usize;
    for s in (n + 1..=2 * n).flat_map(|k| enumerate_shapes(k, d)) {
        let c = match sparse_shape_coefficients(points, &s) {
            Ok(c) => c,
            Err(e) => return vec![err_check(name, e)],
        };
        let bound = points.len() as f64 * 2f64.powi(-(s.index() as i32));
        let empty = c.empty_count();
        let binom = Binomial::new(empty, 0.5).expect("p = 1/2 is valid");
        for _ in 0..EXCESS_DRAWS {
            let occupied: f64 = c
                .occupied
                .iter()
                .map(|&(_, v)| f64::from(rng.sign()) * v)
                .sum();
            let rest = 2.0 * binom.sample(&mut rng) as f64 - empty as f64;
            worst = worst.max((occupied + c.linear_part * rest).abs() / bound);
        }
        worst_all = worst_all.max(c.abs_sum() / bound);
        shapes += 1;
    }
    vec![
        Check::at_most(name, worst, 1.0).with_notes(format!(
            "max |<D_N, f_s>| / (N 2^-|s|) over {shapes} shapes, n < |s| <= 2n, {EXCESS_DRAWS} sign draws each"
        )),
        Check::at_most(all_name, worst_all, 1.0).with_notes("max sum_R |<D_N, h_R>| / (N 2^-|s|)"),
    ]
}

/// Product counts, the G_v expansion and the pairing counts.
pub fn expansion(params: &SuiteParams) -> Vec<Check> {
    let mut out = Vec::new();
    let top = params.max_n.min(8);
    for n in 3..=top {
        for v in 2..=5.min(n - 1) {
            out.push(count_check(n, v, params.seed));
        }
        out.push(product_rule_check(n, params.seed));
        let e3 = verify_gv_expansion(n, 3);
        out.push(match e3 {
            Ok(e) => {
                let c1 = e.coefficients.get(&1).copied().unwrap_or(0) as f64;
                let want = f64::from(3 * (n - 1) - 2);
                Check::new(
                    format!("c(1) = 3(n-1)-2 for k=3, n={n}"),
                    c1 == want,
                    c1,
                    want,
                )
            }
            Err(e) => err_check(format!("c(1) for k=3, n={n}"), e),
        });
    }
    for n in 2..=params.max_n.min(6) {
        for k in [3u32, 5] {
            out.push(expansion_check(n, k, params.seed));
        }
        out.push(gv_mean_check(n, params.seed));
        out.push(decomposition_check(n, params.epsilon));
        for m in [2u32, 4, 6] {
            let name = format!("gamma' grid m={m} n={n}");
            out.push(match (gamma_prime(m, n - 1), gamma_prime_grid(m, n)) {
                (Ok(c), Ok(g)) => Check::new(name, c as f64 == g, g, c as f64),
                (Err(e), _) | (_, Err(e)) => err_check(name, e),
            });
        }
    }
    let mut mismatches = 0;
    let mut compared = 0;
    for h in 1..=16 {
        for m in [2u32, 4, 6, 8] {
            compared += 1;
            match (gamma_prime(m, h), gamma_prime_enumerated(m, h)) {
                (Ok(a), Ok(b)) if a == b => {}
                _ => mismatches += 1,
            }
        }
    }
    out.push(
        Check::new(
            "gamma' closed form = sign enumeration, h <= 16",
            mismatches == 0,
            mismatches as f64,
            0.0,
        )
        .with_notes(format!("{compared} (m, h) pairs")),
    );
    out
}

fn count_check(n: u32, v: u32, seed: u64) -> Check {
    let name = format!("count_products n={n} v={v}");
    let hist = match product_shape_histogram(n, v, seed) {
        Ok(h) => h,
        Err(e) => return err_check(name, e),
    };
    let mut mismatches = 0u32;
    if hist.get(&None).copied().unwrap_or(0) != 0 {
        mismatches += 1;
    }
    let total: u64 = hist.values().sum();
    if u128::from(total) != binomial(u64::from(n - 1), u64::from(v)) {
        mismatches += 1;
    }
    for s1 in 1..n {
        for s2 in 1..n {
            let s = ShapeVector::new(vec![s1, s2]).expect("positive");
            let found = hist.get(&Some(s.clone())).copied().unwrap_or(0);
            let want = if s1 + s2 >= n + v - 1 {
                count_products(n, &s, v).unwrap_or(u128::MAX)
            } else {
                0
            };
            if u128::from(found) != want {
                mismatches += 1;
            }
        }
    }
    Check::new(name, mismatches == 0, f64::from(mismatches), 0.0)
        .with_notes("brute-force census over all v-subsets of H_n^2 vs C(|s|-n-1, v-2)")
}

fn product_rule_check(n: u32, seed: u64) -> Check {
    let name = format!("product rule n={n}");
    let points = match gen_random(1 << (n - 1), 2, seed) {
        Ok(p) => p,
        Err(e) => return err_check(name, e),
    };
    let funcs = match hyperbolic_rfunctions(&points, n) {
        Ok(f) => f,
        Err(e) => return err_check(name, e),
    };
    let mut failures = 0u32;
    let mut tried = 0u32;
    for i in 0..funcs.len() {
        for j in i..funcs.len() {
            for (mi, mj) in [(1u32, 1u32), (3, 2), (2, 1), (1, 3)] {
                if i == j {
                    continue;
                }
                tried += 1;
                match verify_product_rule(&[(funcs[i].clone(), mi), (funcs[j].clone(), mj)]) {
                    Ok(o) if o.holds => {}
                    _ => failures += 1,
                }
            }
        }
    }
    Check::new(name, failures == 0, f64::from(failures), 0.0)
        .with_notes(format!("{tried} products"))
}

fn expansion_check(n: u32, k: u32, seed: u64) -> Check {
    let name = format!("G_v expansion n={n} k={k}");
    let e = match verify_gv_expansion(n, k) {
        Ok(e) => e,
        Err(err) => return err_check(name, err),
    };
    let residual = gen_random(1 << (n - 1), 2, seed)
        .and_then(|p| expansion_identity_residual(&p, n, k))
        .unwrap_or(f64::INFINITY);
    let ok = e.uniform && e.only_odd_subsets && e.matches_closed_form && residual == 0.0;
    Check::new(name, ok, residual, 0.0).with_notes(format!(
        "uniform={} odd_only={} closed_form={} measured_C0={}",
        e.uniform, e.only_odd_subsets, e.matches_closed_form, e.measured_c0
    ))
}

fn gv_mean_check(n: u32, seed: u64) -> Check {
    let name = format!("integral of G_v vanishes n={n}");
    let result = gen_random(1 << (n - 1), 2, seed).and_then(|points| {
        let funcs = hyperbolic_rfunctions(&points, n)?;
        let gv = subset_product_sums(&funcs, &[n, n], funcs.len(), GridCap::default())?;
        Ok(gv[1..]
            .iter()
            .map(|g| g.integral().abs())
            .fold(0.0, f64::max))
    });
    match result {
        Ok(worst) => Check::new(name, worst == 0.0, worst, 0.0),
        Err(e) => err_check(name, e),
    }
}

fn decomposition_check(n: u32, epsilon: f64) -> Check {
    let name = format!("leading plus tail equals direct pairing n={n}");
    let result = gen_vandercorput(n - 1).and_then(|points| {
        let cfg = CertificateConfig::new(epsilon, n)?;
        halasz_expansion_check(&points, &cfg)
    });
    match result {
        Ok(e) => Check::at_most(name, (e.direct - e.expanded).abs(), 1e-8),
        Err(e) => err_check(name, e),
    }
}

/// Exact Rademacher enumeration.
pub fn khintchine(params: &SuiteParams) -> Vec<Check> {
    let mut rng = seeded_rng(params.seed ^ 0x6b68);
    let mut mgf_fail = 0u32;
    let mut worst_gap = f64::INFINITY;
    let mut worst_ratio: f64 = 0.0;
    let mut worst_l2: f64 = 0.0;
    let mut worst_exp2: f64 = 0.0;
    for i in 0..200usize {
        let len = 1 + i % 12;
        let c: Vec<f64> = (0..len)
            .map(|_| f64::from(rng.sign()) * rng.uniform(0.1, 1.0))
            .collect();
        let lambda = rng.uniform(0.5, 2.5);
        for p in [2.0, 4.0, 6.0, 8.0] {
            let r = match rademacher_checks(&c, lambda, p) {
                Ok(r) => r,
                Err(e) => return vec![err_check("khintchine".into(), e)],
            };
            if !(r.mgf < r.mgf_bound) {
                mgf_fail += 1;
            }
            worst_gap = worst_gap.min(r.mgf_bound / r.mgf - 1.0);
            worst_ratio = worst_ratio.max(r.khintchine_ratio);
            if p == 2.0 {
                worst_l2 = worst_l2.max((r.moment - r.l2).abs() / r.l2);
            }
            worst_exp2 = worst_exp2.max(r.exp2_norm / r.l2);
        }
    }
    vec![
        Check::new(
            "moment generating bound strict, 200 vectors",
            mgf_fail == 0,
            worst_gap,
            0.0,
        )
        .with_notes("measured: smallest relative gap exp(l^2 |c|^2/2)/E exp(l sum c r) - 1"),
        Check::at_most("Khintchine with C = 1, p in {2,4,6,8}", worst_ratio, 1.0)
            .with_notes("max ||sum c r||_p / (sqrt(p) |c|_2)"),
        Check::at_most("L2 orthogonality", worst_l2, 1e-12),
        Check::at_most(
            "exp(L^2) norm of Rademacher sums over |c|_2",
            worst_exp2,
            3.0,
        ),
    ]
}

/// A random Haar series on the `2^5 × 2^5` grid.
pub fn haar_series(rng: &mut SeededRng, terms: usize) -> GridFunction {
    let levels = [5u32, 5];
    let cap = GridCap::default();
    let mut g = GridFunction::zeros(&levels, cap).expect("small grid");
    for _ in 0..terms {
        let sides = (0..2)
            .map(|_| {
                let level = rng.below(5) as u32;
                DyadicInterval::new(level, rng.below(1 << level)).expect("valid interval")
            })
            .collect();
        let rect = DyadicRectangle::new(sides).expect("two sides");
        let h = GridFunction::haar(&rect, &levels, cap).expect("fits");
        let c = rng.uniform(-2.0, 2.0);
        g.add_mapped(&h, |v| c * v).expect("same grid");
    }
    g
}

pub const CORPUS_SIZE: usize = 50;

pub fn orlicz_corpus(seed: u64) -> Vec<GridFunction> {
    let mut rng = seeded_rng(seed ^ 0x6f72);
    (0..CORPUS_SIZE)
        .map(|i| haar_series(&mut rng, 1 + i % 12))
        .collect()
}

/// Luxemburg norms on a Haar-series corpus.
pub fn orlicz(params: &SuiteParams) -> Vec<Check> {
    let mut out = Vec::new();
    let one = GridFunction::constant(&[2, 2], 1.0, GridCap::default()).expect("small grid");
    let exp2 = OrliczGauge::exp(2.0).expect("valid");
    let k = orlicz_norm(&one, &exp2).value;
    out.push(Check::at_most(
        "exp(L^2) norm of 1 is 1/sqrt(ln 2)",
        (k - 1.0 / 2f64.ln().sqrt()).abs(),
        1e-9,
    ));

    let gauges = [
        OrliczGauge::exp(2.0).expect("valid"),
        OrliczGauge::exp(1.0).expect("valid"),
        OrliczGauge::exp(0.5).expect("valid"),
        OrliczGauge::llog(0.5).expect("valid"),
        OrliczGauge::llog(1.0).expect("valid"),
    ];
    let corpus = orlicz_corpus(params.seed);
    let mut residual: f64 = 0.0;
    let mut homogeneity: f64 = 0.0;
    let mut monotone_fail = 0u32;
    let (mut ratio_lo, mut ratio_hi) = (f64::INFINITY, 0.0f64);
    let mut dual_max: f64 = 0.0;
    let half = GridFunction::from_cell_fn(&[5, 5], GridCap::default(), |j| {
        if j[0] < 16 {
            1.0
        } else {
            0.0
        }
    })
    .expect("small grid");
    for (i, g) in corpus.iter().enumerate() {
        for gauge in &gauges {
            let r = orlicz_norm(g, gauge);
            residual = residual.max(r.residual.abs());
            let scaled = orlicz_norm(&g.map(|x| -2.5 * x), gauge).value;
            homogeneity = homogeneity.max((scaled - 2.5 * r.value).abs() / scaled);
            let part = g
                .combine(&half, GridCap::default(), |a, b| a * b)
                .expect("same grid");
            if orlicz_norm(&part, gauge).value > r.value * (1.0 + 1e-12) {
                monotone_fail += 1;
            }
        }
        for alpha in [1.0, 2.0] {
            let lux = orlicz_norm(g, &OrliczGauge::exp(alpha).expect("valid")).value;
            let ratio = exp_orlicz_via_pnorms(g, alpha) / lux;
            ratio_lo = ratio_lo.min(ratio);
            ratio_hi = ratio_hi.max(ratio);
        }
        let other = &corpus[(i + 1) % corpus.len()];
        for (f, h) in [(g, other), (g, g)] {
            if let Ok(rep) = dual_pairing_check(f, h, 0.5) {
                dual_max = dual_max.max(rep.ratio.unwrap_or(0.0));
            }
        }
    }
    out.push(Check::at_most(
        "bisection residual, 50-function corpus",
        residual,
        1e-9,
    ));
    out.push(Check::at_most(
        "homogeneity, 50-function corpus",
        homogeneity,
        1e-9,
    ));
    out.push(Check::new(
        "monotonicity under restriction",
        monotone_fail == 0,
        f64::from(monotone_fail),
        0.0,
    ));
    out.push(Check::at_least(
        "p-sup over Luxemburg ratio, low end",
        ratio_lo,
        0.1,
    ));
    out.push(Check::at_most(
        "p-sup over Luxemburg ratio, high end",
        ratio_hi,
        10.0,
    ));
    out.push(Check::at_most(
        "L(log L)^1/2 vs exp(L^2) pairing ratio",
        dual_max,
        100.0,
    ));
    out
}

/// Int_t identities, good sets and the square-function floors.
pub fn hardy(params: &SuiteParams) -> Vec<Check> {
    let mut out = Vec::new();
    out.push(tilde_identity_check(params.seed));
    out.push(maximal_vs_square(params.seed));
    for &family in &params.families {
        for d in dims_for(family) {
            let top = params.max_n.min(if d == 2 {
                HARDY_MAX_N_2D
            } else {
                HARDY_MAX_N_3D
            });
            for n in d as u32..=top {
                out.extend(hardy_instance(family, d, n, params.seed));
            }
        }
    }
    out
}

fn tilde_identity_check(seed: u64) -> Check {
    let name = "<tilde D_N, h_R> = <D_N, h_R>, levels <= 6";
    let mut rng = seeded_rng(seed ^ 0x7469);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for d in 1..=3usize {
        let max_level = if d == 3 { 5 } else { 6 };
        let points = match gen_random(20, d, seed ^ d as u64) {
            Ok(p) => p,
            Err(e) => return err_check(name.into(), e),
        };
        for _ in 0..30 {
            let sides = (0..d)
                .map(|_| {
                    let level = rng.below(max_level + 1) as u32;
                    DyadicInterval::new(level, rng.below(1 << level)).expect("valid")
                })
                .collect();
            let rect = DyadicRectangle::new(sides).expect("nonempty");
            match (
                tilde_dn_coeff(&points, &rect),
                haar_coeff_dn(&points, &rect),
            ) {
                (Ok(a), Ok(b)) => worst = worst.max((a - b.value).abs()),
                (Err(e), _) | (_, Err(e)) => return err_check(name.into(), e),
            }
            count += 1;
        }
    }
    Check::at_most(name, worst, 1e-10).with_notes(format!("{count} random rectangles, d = 1, 2, 3"))
}

fn maximal_vs_square(seed: u64) -> Check {
    let name = "||M tilde D_N||_1 / ||S tilde D_N||_1, d=2 n=6";
    let result = gen_random(32, 2, seed).and_then(|points| {
        let cap = GridCap::default();
        let tilde = tilde_dn_grid(&points, &[7, 7], cap)?;
        let m = maximal_function(&tilde, &[6, 6])?;
        let s = square_function(&tilde, &ShapeSet::hyperbolic(6, 2)?, cap)?;
        Ok(m.pnorm(1.0) / s.pnorm(1.0))
    });
    match result {
        Ok(r) => Check::logged(name, r),
        Err(e) => err_check(name.into(), e),
    }
}

fn hardy_instance(family: Family, d: usize, n: u32, seed: u64) -> Vec<Check> {
    let tag = format!("{}/d{d}/n{n}", family.name());
    let report = family
        .at_scale(d, n, seed)
        .and_then(|points| hardy_lower_report(&points, n, &[0.5, 1.0], GridCap::default()));
    let r = match report {
        Ok(r) => r,
        Err(e) => return vec![err_check(format!("hardy {tag}"), e)],
    };
    let mut out = vec![
        Check::at_least(format!("|G_r| >= 1/2 {tag}"), r.min_good_measure, 0.5),
        Check::at_least(
            format!("mass of sum 1_G > J/4 {tag}"),
            r.mass_above_quarter,
            0.25,
        ),
    ];
    for c in &r.good_count_norms {
        out.push(Check::at_least(
            format!("||sum 1_G||_{} floor {tag}", c.p),
            c.value,
            c.floor,
        ));
    }
    for c in &r.square_norms {
        out.push(Check::at_least(
            format!("||S(tilde D_N)||_{} floor {tag}", c.p),
            c.value,
            c.floor,
        ));
    }
    let band = match (family, d) {
        _ if n < HARDY_BAND_MIN_N => None,
        (Family::Vdc, 2) => Some(HARDY_BAND_2D),
        (Family::Halton, 3) => Some(HARDY_BAND_3D),
        _ => None,
    };
    for (c, ratio) in r.square_norms.iter().zip(&r.growth_ratios) {
        let name = format!("||S(tilde D_N)||_{} / n^((d-1)/2) {tag}", c.p);
        out.push(match band {
            Some((lo, hi)) => Check::new(name, (lo..=hi).contains(ratio), *ratio, lo)
                .with_notes(format!("band [{lo}, {hi}]")),
            None => Check::logged(name, *ratio),
        });
    }
    out
}

/// The Halász and main-theorem certificates.
pub fn certificate(params: &SuiteParams) -> Vec<Check> {
    let mut out = Vec::new();
    if params.families.contains(&Family::Vdc) {
        for n in 6..=params.max_n.min(12) {
            out.extend(halasz_instance(n, params.epsilon));
        }
    }
    if params.families.contains(&Family::Halton) {
        let mut previous: Option<f64> = None;
        for n in [8u32, 10].into_iter().filter(|&n| n <= params.max_n) {
            let (checks, bound) = main_instance(n, params.epsilon);
            out.extend(checks);
            if let (Some(prev), Some(now)) = (previous, bound) {
                out.push(Check::at_least(
                    format!("quotient bound increases to n={n}"),
                    now,
                    prev,
                ));
            }
            previous = bound.or(previous);
        }
    }
    out
}

fn halasz_instance(n: u32, epsilon: f64) -> Vec<Check> {
    let tag = format!("vdc/n{n}");
    let result = gen_vandercorput(n - 1).and_then(|points| {
        let cfg = CertificateConfig::new(epsilon, n)?;
        let rep = halasz_certificate(&points, &cfg)?;
        let m = (n + 1).min(GridCap::default().0 / 2 - 1);
        let norms = dn_norm_suite(&points, m, GridCap::default())?;
        Ok((rep, norms))
    });
    let (rep, norms) = match result {
        Ok(x) => x,
        Err(e) => return vec![err_check(format!("halasz {tag}"), e)],
    };
    let ratio = rep.pairing / f64::from(n).sqrt();
    let (lo, hi) = HALASZ_BAND;
    vec![
        Check::positive(format!("<D_N, Psi> > 0 {tag}"), rep.pairing),
        Check::new(
            format!("<D_N, Psi>/sqrt(n) in band {tag}"),
            (lo..=hi).contains(&ratio),
            ratio,
            lo,
        )
        .with_notes(format!("band [{lo}, {hi}]")),
        Check::at_most(format!("||Psi||_inf <= 1 {tag}"), rep.sup_norm, 1.0),
        Check::at_most(
            format!("implied L1 bound <= measured ||D_N||_1 {tag}"),
            rep.norm_lower_bound,
            norms.l1.value,
        ),
        Check::at_least(
            format!("leading term >= derived floor {tag}"),
            rep.leading_term.unwrap_or(f64::NAN),
            rep.leading_floor.unwrap_or(f64::NAN),
        ),
    ]
}

fn main_instance(n: u32, epsilon: f64) -> (Vec<Check>, Option<f64>) {
    let tag = format!("halton/d3/n{n}");
    let points = match gen_halton(1 << (n - 1), 3) {
        Ok(p) => p,
        Err(e) => return (vec![err_check(format!("main {tag}"), e)], None),
    };
    let cfg = match CertificateConfig::new(epsilon, n) {
        Ok(c) => c,
        Err(e) => return (vec![err_check(format!("main {tag}"), e)], None),
    };
    let rep = match main_certificate(&points, &cfg) {
        Ok(r) => r,
        Err(e) => return (vec![err_check(format!("main {tag}"), e)], None),
    };
    let mut out = Vec::new();
    let worst = rep
        .prefixes
        .iter()
        .map(|p| p.pairing)
        .fold(f64::INFINITY, f64::min);
    out.push(
        Check::positive(format!("every per-s pairing > 0 {tag}"), worst)
            .with_notes(format!("{} prefixes, minimum shown", rep.prefixes.len())),
    );
    out.push(Check::at_most(
        format!("<D_N, Phi> by linearity {tag}"),
        (rep.pairing - rep.pairing_by_linearity).abs(),
        1e-10,
    ));
    match iterated_square(&points, &cfg, 1) {
        Ok(s) => {
            let sup = s.sup_norm();
            out.push(Check::at_most(format!("S_1(Phi) <= 1 {tag}"), sup, 1.0));
            if let Some(psup) = rep.phi_orlicz_psup {
                out.push(Check::logged(
                    format!("CWW constant exp(L^2)-via-p / ||S_1||_inf {tag}"),
                    psup / sup,
                ));
            }
        }
        Err(e) => out.push(err_check(format!("S_1(Phi) {tag}"), e)),
    }
    let c = rep
        .phi_pnorms
        .iter()
        .map(|(p, v)| v / p.sqrt())
        .fold(0.0, f64::max);
    out.push(
        Check::at_most(
            format!("||Phi||_p <= C sqrt(p), p in {{2,4,8,16}} {tag}"),
            c,
            PHI_GROWTH_CONSTANT,
        )
        .with_notes("measured C = max_p ||Phi||_p / sqrt(p)"),
    );
    if let Some(norm) = &rep.phi_orlicz {
        out.push(Check::at_most(
            format!("Orlicz bisection residual for Phi {tag}"),
            norm.residual.abs(),
            1e-9,
        ));
    }
    out.push(Check::positive(
        format!("quotient bound for ||D_N||_(L log^1/2 L) {tag}"),
        rep.norm_lower_bound,
    ));
    (out, Some(rep.norm_lower_bound))
}
