//! Products of hyperbolic r-functions in two dimensions.
//!
//! Since `f_r^2 ≡ 1`, a product of r-functions only depends on which factors
//! occur an odd number of times. Expanding `(Σ_{r ∈ H_n^2} f_r)^k` for odd
//! `k` therefore leaves only the odd-size subset products `G_v`, each with
//! a coefficient `c_k(v)` that counts the `k`-tuples whose odd-multiplicity
//! set is a fixed `v`-set. Two independent evaluations of `c_k(v)` live
//! here: a symbolic expansion over subset bitmasks and the closed form
//! `k! [x^k] sinh(x)^v cosh(x)^{h−v}`.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::CertificateConfig;
use crate::discrepancy::SignedRFunction;
use crate::dyadic::{enumerate_shapes, GridCap, GridFunction, ShapeVector};
use crate::error::{Error, Result};
use crate::pointset::{seeded_rng, PointSet};
use rand::RngCore;

/// `C(n, k)`, zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * u128::from(n - i) / u128::from(i + 1))
}

/// `Count(s; v) = C(|s| − n − 1, v − 2)`: the number of `v`-subsets of
/// `H_n^2` whose product is an `s`-function.
pub fn count_products(n: u32, s: &ShapeVector, v: u32) -> Result<u128> {
    if s.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            dim: s.dim(),
            reason: "product counts are 2D",
        });
    }
    if v < 2 || v > n {
        return Err(Error::Domain(format!("v = {v} is not in [2, n = {n}]")));
    }
    if s.index() < n + v - 1 {
        return Err(Error::Domain(format!(
            "|s| = {} is below n + v − 1 = {}",
            s.index(),
            n + v - 1
        )));
    }
    Ok(binomial(u64::from(s.index() - n - 1), u64::from(v - 2)))
}

/// If `g` is an r-function, recover its shape and signs.
///
/// The shape is read off from the coarsest resolution along each axis on
/// which `g` is constant, then the full `±h_R` pattern is checked cell by
/// cell.
pub fn identify_rfunction(g: &GridFunction) -> Option<SignedRFunction> {
    let levels = g.levels();
    let shifts = crate::dyadic::grid_shifts(levels);
    let values = g.values();
    let mut shape = Vec::with_capacity(levels.len());
    for t in 0..levels.len() {
        let ignored = (0..levels[t])
            .take_while(|&b| {
                let bit = 1usize << (shifts[t] + b);
                (0..values.len()).all(|i| i & bit != 0 || values[i] == values[i | bit])
            })
            .count() as u32;
        let native = levels[t] - ignored;
        if native < 2 {
            return None;
        }
        shape.push(native - 1);
    }
    let shape = ShapeVector::new(shape).ok()?;
    let corner_sign = if levels.len().is_multiple_of(2) { 1.0 } else { -1.0 };
    let signs = (0..shape.rectangle_count())
        .map(|i| {
            let rect = shape.rectangle(i);
            let corner: Vec<f64> = rect.sides().iter().map(|s| s.start()).collect();
            let v = g.eval(&corner).ok()? * corner_sign;
            if v == 1.0 {
                Some(1i8)
            } else if v == -1.0 {
                Some(-1i8)
            } else {
                None
            }
        })
        .collect::<Option<Vec<i8>>>()?;
    let candidate = SignedRFunction::new(shape, signs).ok()?;
    let rebuilt = candidate
        .to_grid(levels, GridCap(levels.iter().sum()))
        .ok()?;
    (rebuilt.values() == values).then_some(candidate)
}

/// Result of evaluating a product of r-functions on the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductRuleOutcome {
    pub n: u32,
    /// Shape actually found on the grid, if the product is an r-function.
    pub found: Option<ShapeVector>,
    /// Componentwise maximum over the odd-multiplicity factors.
    pub predicted: ShapeVector,
    /// For at least two distinct odd factors: whether the index exceeds `n`.
    pub index_exceeds_n: Option<bool>,
    pub holds: bool,
}

/// Multiplies `f^m` over the given factors (all of one index `n`, `d = 2`)
/// and checks that the result is an r-function of the predicted shape.
pub fn verify_product_rule(factors: &[(SignedRFunction, u32)]) -> Result<ProductRuleOutcome> {
    let Some((first, _)) = factors.first() else {
        return Err(Error::Domain("empty product".into()));
    };
    let n = first.shape().index();
    if factors
        .iter()
        .any(|(f, _)| f.shape().dim() != 2 || f.shape().index() != n)
    {
        return Err(Error::Domain("factors must all lie in one H_n^2".into()));
    }
    let odd: Vec<&SignedRFunction> = factors
        .iter()
        .filter(|(_, m)| m % 2 == 1)
        .map(|(f, _)| f)
        .collect();
    if odd.is_empty() {
        return Err(Error::Domain(
            "no factor occurs an odd number of times".into(),
        ));
    }
    let predicted = ShapeVector::new(
        (0..2)
            .map(|t| {
                odd.iter()
                    .map(|f| f.shape().components()[t])
                    .max()
                    .unwrap_or(0)
            })
            .collect(),
    )?;
    let levels = [n, n];
    let mut g = GridFunction::constant(&levels, 1.0, GridCap(2 * n))?;
    for (f, m) in factors {
        for _ in 0..*m {
            f.multiply_grid(&mut g)?;
        }
    }
    let found = identify_rfunction(&g).map(|f| f.shape().clone());
    let mut distinct: Vec<&ShapeVector> = odd.iter().map(|f| f.shape()).collect();
    distinct.sort();
    distinct.dedup();
    let index_exceeds_n = (distinct.len() >= 2).then(|| predicted.index() > n);
    let holds = found.as_ref() == Some(&predicted) && index_exceeds_n != Some(false);
    Ok(ProductRuleOutcome {
        n,
        found,
        predicted,
        index_exceeds_n,
        holds,
    })
}

fn random_rfunction(shape: &ShapeVector, rng: &mut impl RngCore) -> SignedRFunction {
    let signs = (0..shape.rectangle_count())
        .map(|_| if rng.next_u32() & 1 == 0 { -1 } else { 1 })
        .collect();
    SignedRFunction::new(shape.clone(), signs).expect("one sign per rectangle")
}

/// Brute force behind [`count_products`]: multiplies every `v`-subset of
/// randomly signed r-functions of `H_n^2` on the grid and tallies the shape
/// of each product (`None` when the product is not an r-function).
pub fn product_shape_histogram(
    n: u32,
    v: u32,
    seed: u64,
) -> Result<BTreeMap<Option<ShapeVector>, u64>> {
    if n > 10 {
        return Err(Error::TooLarge(format!(
            "brute-force product census at n = {n}"
        )));
    }
    let mut rng = seeded_rng(seed);
    let funcs: Vec<SignedRFunction> = enumerate_shapes(n, 2)
        .iter()
        .map(|r| random_rfunction(r, &mut rng))
        .collect();
    let levels = [n, n];
    let cap = GridCap(2 * n);
    let mut hist = BTreeMap::new();
    for subset in combinations(funcs.len(), v as usize) {
        let mut g = GridFunction::constant(&levels, 1.0, cap)?;
        for &i in &subset {
            funcs[i].multiply_grid(&mut g)?;
        }
        let shape = identify_rfunction(&g).map(|f| f.shape().clone());
        *hist.entry(shape).or_insert(0) += 1;
    }
    Ok(hist)
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(pos) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return out;
        };
        idx[pos] += 1;
        for j in pos + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// `G_0, …, G_{max_v}` for the given r-functions: `G_v` is the elementary
/// symmetric polynomial of degree `v` in the `f_r`, evaluated cellwise.
pub fn subset_product_sums(
    funcs: &[SignedRFunction],
    levels: &[u32],
    max_v: usize,
    cap: GridCap,
) -> Result<Vec<GridFunction>> {
    let mut e = vec![GridFunction::zeros(levels, cap)?; max_v + 1];
    e[0].map_in_place(|_| 1.0);
    for f in funcs {
        let fg = f.to_grid(levels, cap)?;
        for v in (1..=max_v).rev() {
            let (lo, hi) = e.split_at_mut(v);
            let prev = lo[v - 1].values();
            for ((dst, &p), &x) in hi[0].values_mut().iter_mut().zip(prev).zip(fg.values()) {
                *dst += x * p;
            }
        }
    }
    Ok(e)
}

/// Refuse subset sums with more than this many terms.
pub const MAX_SUBSETS: u128 = 1_000_000;

/// `G_v = Σ_{v-subsets of H_n^2} Π f_r` for the point set's r-functions.
pub fn build_gv(points: &PointSet, v: u32, cfg: &CertificateConfig) -> Result<GridFunction> {
    if points.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            dim: points.dim(),
            reason: "G_v is 2D",
        });
    }
    let h = cfg.n - 1;
    if v == 0 || v > h {
        return Err(Error::Domain(format!(
            "v = {v} is not in [1, |H_n^2| = {h}]"
        )));
    }
    let terms = binomial(u64::from(h), u64::from(v));
    if terms > MAX_SUBSETS {
        return Err(Error::TooLarge(format!("{terms} subsets")));
    }
    let funcs = super::hyperbolic_rfunctions(points, cfg.n)?;
    let levels = [cfg.n, cfg.n];
    Ok(subset_product_sums(&funcs, &levels, v as usize, cfg.grid_cap)?.swap_remove(v as usize))
}

/// `γ'(m) = E(ε_1 + … + ε_h)^m` for independent signs: the number of
/// `m`-tuples over `h` symbols in which every symbol occurs an even number
/// of times. Computed as `2^-h Σ_j C(h, j)(h − 2j)^m`.
pub fn gamma_prime(m: u32, h: u32) -> Result<u128> {
    if !m.is_multiple_of(2) || h == 0 {
        return Err(Error::Domain(format!(
            "gamma' needs even m and h ≥ 1, got m = {m}, h = {h}"
        )));
    }
    let mut total: i128 = 0;
    for j in 0..=h {
        let c = binomial(u64::from(h), u64::from(j)) as i128;
        let base = i128::from(h) - 2 * i128::from(j);
        let term = base
            .checked_pow(m)
            .and_then(|p| p.checked_mul(c))
            .ok_or_else(|| Error::TooLarge(format!("gamma'({m}) with h = {h}")))?;
        total = total
            .checked_add(term)
            .ok_or_else(|| Error::TooLarge(format!("gamma'({m}) with h = {h}")))?;
    }
    Ok((total >> h) as u128)
}

/// `γ'(m)` by summing `(Σ ε)^m` over all `2^h` sign patterns.
pub fn gamma_prime_enumerated(m: u32, h: u32) -> Result<u128> {
    if h > 24 {
        return Err(Error::TooLarge(format!("2^{h} sign patterns")));
    }
    let mut total: u128 = 0;
    for mask in 0u64..1 << h {
        let s = 2 * i64::from(mask.count_ones() as u16) - i64::from(h);
        total += (s.unsigned_abs() as u128).pow(m);
    }
    Ok(total >> h)
}

/// `∫ (Σ_{r ∈ H_n^2} φ_r)^m` on the grid, `φ_r` the all-plus r-functions.
pub fn gamma_prime_grid(m: u32, n: u32) -> Result<f64> {
    let levels = [n, n];
    let cap = GridCap(2 * n);
    let mut g = GridFunction::zeros(&levels, cap)?;
    for r in enumerate_shapes(n, 2) {
        SignedRFunction::all_plus(r).add_to_grid(&mut g, 1.0)?;
    }
    g.map_in_place(|v| v.powi(m as i32));
    Ok(g.integral())
}

/// Integer coefficients `a_j` of `(e^x − e^-x)^v (e^x + e^-x)^{h−v} =
/// Σ_j a_j e^{(h − 2j)x}`.
fn exponential_coefficients(v: u32, h: u32) -> Vec<i128> {
    (0..=h)
        .map(|j| {
            (0..=j.min(v))
                .map(|i| {
                    let sign = if i % 2 == 0 { 1 } else { -1 };
                    sign * binomial(u64::from(v), u64::from(i)) as i128
                        * binomial(u64::from(h - v), u64::from(j - i)) as i128
                })
                .sum()
        })
        .collect()
}

/// Exact `c_k(v) = k! [x^k] sinh(x)^v cosh(x)^{h−v}`; `None` on overflow.
pub fn expansion_coefficient(k: u32, v: u32, h: u32) -> Option<i128> {
    if v > h {
        return Some(0);
    }
    let mut total: i128 = 0;
    for (j, a) in exponential_coefficients(v, h).into_iter().enumerate() {
        let base = i128::from(h) - 2 * j as i128;
        total = total.checked_add(base.checked_pow(k)?.checked_mul(a)?)?;
    }
    Some(total >> h)
}

/// `c_k(v) / k!` in floating point, for `k` beyond the exact range.
pub fn expansion_coefficient_scaled(k: u32, v: u32, h: u32) -> f64 {
    if v > h || k < v || (k - v) % 2 == 1 {
        return 0.0;
    }
    let mut acc = 0.0;
    for (j, a) in exponential_coefficients(v, h).into_iter().enumerate() {
        let base = f64::from(h) - 2.0 * j as f64;
        let mut p = 1.0;
        for i in 1..=k {
            p *= base / f64::from(i);
        }
        acc += a as f64 * p;
    }
    acc / 2f64.powi(h as i32)
}

/// Symbolic `(Σ_{i<h} f_i)^k` with `f_i^2 = 1`: multiplicity of each
/// surviving monomial, keyed by its odd-multiplicity subset as a bitmask.
pub fn symbolic_expansion(k: u32, h: u32) -> Result<HashMap<u64, u128>> {
    if h > 16 || k > 12 {
        return Err(Error::TooLarge(format!(
            "symbolic expansion with h = {h}, k = {k}"
        )));
    }
    let mut state = vec![0u128; 1 << h];
    state[0] = 1;
    for _ in 0..k {
        let mut next = vec![0u128; 1 << h];
        for (mask, &c) in state.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for i in 0..h {
                next[mask ^ (1 << i)] += c;
            }
        }
        state = next;
    }
    Ok(state
        .into_iter()
        .enumerate()
        .filter(|(_, c)| *c != 0)
        .map(|(m, c)| (m as u64, c))
        .collect())
}

/// Coefficients of `(Σ_{r ∈ H_n^2} f_r)^k = Σ_{v odd} c(v) G_v`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionCoefficients {
    pub k: u32,
    pub n: u32,
    /// `|H_n^2| = n − 1`.
    pub shapes: u32,
    /// `c(v)` for odd `v ≤ min(k, n − 1)`.
    pub coefficients: BTreeMap<u32, u128>,
    /// `γ = c(v) n^{-(k−v)/2}`.
    pub gamma: BTreeMap<u32, f64>,
    /// Every surviving subset has odd size.
    pub only_odd_subsets: bool,
    /// Equal-size subsets carry equal coefficients.
    pub uniform: bool,
    /// Symbolic counts agree with the closed form.
    pub matches_closed_form: bool,
    /// Smallest `C_0` with `γ ≤ k!/(k−v)! · [C_0 (k − v)]^{(k−v)/2}` for all `v < k`.
    pub measured_c0: f64,
}

pub const MAX_EXPANSION_N: u32 = 8;
pub const MAX_EXPANSION_K: u32 = 7;

pub fn verify_gv_expansion(n: u32, k: u32) -> Result<ExpansionCoefficients> {
    if k.is_multiple_of(2) {
        return Err(Error::Domain(format!("k = {k} must be odd")));
    }
    if !(2..=MAX_EXPANSION_N).contains(&n) || k > MAX_EXPANSION_K {
        return Err(Error::TooLarge(format!(
            "expansion check is limited to 2 ≤ n ≤ {MAX_EXPANSION_N}, k ≤ {MAX_EXPANSION_K}"
        )));
    }
    let h = n - 1;
    let counts = symbolic_expansion(k, h)?;
    let only_odd_subsets = counts.keys().all(|m| m.count_ones() % 2 == 1);
    let mut by_size: BTreeMap<u32, Vec<u128>> = BTreeMap::new();
    for (mask, c) in &counts {
        by_size.entry(mask.count_ones()).or_default().push(*c);
    }
    let mut uniform = true;
    let mut coefficients = BTreeMap::new();
    for (&v, cs) in &by_size {
        uniform &= cs.iter().all(|c| c == &cs[0]);
        uniform &= cs.len() as u128 == binomial(u64::from(h), u64::from(v));
        coefficients.insert(v, cs[0]);
    }
    let matches_closed_form = coefficients
        .iter()
        .all(|(&v, &c)| expansion_coefficient(k, v, h) == Some(c as i128));
    let mut gamma = BTreeMap::new();
    let mut measured_c0: f64 = 0.0;
    for (&v, &c) in &coefficients {
        let g = c as f64 * f64::from(n).powf(-f64::from(k - v) / 2.0);
        gamma.insert(v, g);
        if v < k {
            let falling: f64 = ((k - v + 1)..=k).map(f64::from).product();
            let gap = f64::from(k - v);
            measured_c0 = measured_c0.max((g / falling).powf(2.0 / gap) / gap);
        }
    }
    Ok(ExpansionCoefficients {
        k,
        n,
        shapes: h,
        coefficients,
        gamma,
        only_odd_subsets,
        uniform,
        matches_closed_form,
        measured_c0,
    })
}

/// Largest `|(Σ f_r)^k − Σ_v c(v) G_v|` over the grid, for the point set's
/// r-functions; zero when the expansion is right.
pub fn expansion_identity_residual(points: &PointSet, n: u32, k: u32) -> Result<f64> {
    let coeffs = verify_gv_expansion(n, k)?;
    let funcs = super::hyperbolic_rfunctions(points, n)?;
    let levels = [n, n];
    let cap = GridCap(2 * n);
    let gv = subset_product_sums(&funcs, &levels, funcs.len(), cap)?;
    let mut sum = GridFunction::zeros(&levels, cap)?;
    for f in &funcs {
        f.add_to_grid(&mut sum, 1.0)?;
    }
    let mut worst: f64 = 0.0;
    for idx in 0..sum.len() {
        let lhs = sum.values()[idx].powi(k as i32);
        let rhs: f64 = coeffs
            .coefficients
            .iter()
            .map(|(&v, &c)| c as f64 * gv[v as usize].values()[idx])
            .sum();
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// Weights `w(v)` with `sin(a Σ_{i<h} f_i) = Σ_{v odd} w(v) G_v`, from the
/// sine series: `w(v) = Σ_{k odd} (−1)^{(k−1)/2} a^k c_k(v) / k!`.
pub fn sine_weights_series(h: u32, a: f64) -> Vec<f64> {
    (0..=h)
        .map(|v| {
            if v % 2 == 0 {
                return 0.0;
            }
            let mut acc = 0.0;
            let mut k = v;
            loop {
                let sign = if (k - 1) / 2 % 2 == 0 { 1.0 } else { -1.0 };
                let term = sign * a.powi(k as i32) * expansion_coefficient_scaled(k, v, h);
                acc += term;
                if (term.abs() <= 1e-22 * acc.abs().max(1e-300) && k > v + 4) || k > 401 {
                    return acc;
                }
                k += 2;
            }
        })
        .collect()
}

/// The same weights in closed form: expanding `Π_i (cos a + i f_i sin a)`
/// gives `w(v) = (−1)^{(v−1)/2} sin^v(a) cos^{h−v}(a)`.
pub fn sine_weights_closed(h: u32, a: f64) -> Vec<f64> {
    (0..=h)
        .map(|v| {
            if v % 2 == 0 {
                0.0
            } else {
                let sign = if (v - 1) / 2 % 2 == 0 { 1.0 } else { -1.0 };
                sign * a.sin().powi(v as i32) * a.cos().powi((h - v) as i32)
            }
        })
        .collect()
}
