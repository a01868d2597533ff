//! Point distributions in the half-open cube `[0, 1)^d`.
//!
//! The seeded family draws from xoshiro256** seeded through SplitMix64 (the
//! `rand_xoshiro` construction `Xoshiro256StarStar::seed_from_u64`). Each
//! coordinate is `(next_u64 >> 11) · 2^-53`, so any implementation of the
//! same generator reproduces the same points bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Provenance of a point set.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointSetMeta {
    pub generator: String,
    pub params: String,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
    meta: PointSetMeta,
}

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

pub type SeededRng = Xoshiro256StarStar;

/// The seeded generator behind every random choice in the crate.
pub fn seeded_rng(seed: u64) -> SeededRng {
    Xoshiro256StarStar::seed_from_u64(seed)
}

/// A uniform draw from `[0, 1)` with 53 random bits.
pub fn unit_f64<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

impl PointSet {
    /// Flat, point-major coordinates. Rejects empty sets and coordinates
    /// outside `[0, 1)`.
    pub fn new(dim: usize, coords: Vec<f64>, meta: PointSetMeta) -> Result<Self> {
        if dim == 0 {
            return Err(Error::UnsupportedDimension {
                dim,
                reason: "dimension must be positive",
            });
        }
        if coords.is_empty() || !coords.len().is_multiple_of(dim) {
            return Err(Error::Domain(format!(
                "{} coordinates do not form a nonempty set of {dim}-dimensional points",
                coords.len()
            )));
        }
        if let Some(bad) = coords.iter().find(|x| !(0.0..1.0).contains(*x)) {
            return Err(Error::Domain(format!("coordinate {bad} is not in [0, 1)")));
        }
        Ok(Self { dim, coords, meta })
    }

    pub fn from_points(points: &[Vec<f64>], meta: PointSetMeta) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::Domain("points of differing dimension".into()));
        }
        Self::new(dim, points.concat(), meta)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn meta(&self) -> &PointSetMeta {
        &self.meta
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        let mut set = Self::parse(&text)?;
        set.meta = PointSetMeta {
            generator: "file".into(),
            params: path.display().to_string(),
            seed: None,
        };
        Ok(set)
    }

    /// Header `"<d> <N>"`, then one line of `d` space-separated coordinates
    /// per point, each printed with `%.17g` semantics.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.dim, self.len());
        for p in self.iter() {
            for (t, &x) in p.iter().enumerate() {
                if t > 0 {
                    out.push(' ');
                }
                out.push_str(&format_g17(x));
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing \"<d> <N>\" header".into(),
        })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let parse_header = |s: &str| s.parse::<usize>().ok().filter(|&v| v > 0);
        let (dim, count) = match fields.as_slice() {
            [d, n] => match (parse_header(d), parse_header(n)) {
                (Some(d), Some(n)) => (d, n),
                _ => return Err(malformed_header(header)),
            },
            _ => return Err(malformed_header(header)),
        };
        let mut coords = Vec::with_capacity(dim * count);
        let mut seen = 0;
        for (i, line) in lines {
            let lineno = i + 1;
            seen += 1;
            if seen > count {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("more than the {count} points declared in the header"),
                });
            }
            let row: Vec<&str> = line.split_whitespace().collect();
            if row.len() != dim {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected {dim} coordinates, found {}", row.len()),
                });
            }
            for field in row {
                let x: f64 = field.parse().map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("{field:?} is not a number"),
                })?;
                if !(0.0..1.0).contains(&x) {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("coordinate {field} is outside [0, 1)"),
                    });
                }
                coords.push(x);
            }
        }
        if seen != count {
            return Err(Error::Parse {
                line: text.lines().count() + 1,
                message: format!("header declares {count} points, found {seen}"),
            });
        }
        Self::new(dim, coords, PointSetMeta::default())
    }
}

fn malformed_header(header: &str) -> Error {
    Error::Parse {
        line: 1,
        message: format!("malformed header {header:?}, expected \"<d> <N>\""),
    }
}

/// C's `%.17g`: 17 significant digits, trailing zeros stripped, exponent
/// form below `1e-4` or from `1e17` on.
pub fn format_g17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        let mut out = String::new();
        write!(out, "{mantissa}e{sign}{:02}", exp.abs()).unwrap();
        out
    } else {
        let decimals = (16 - exp) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `N` i.i.d. uniform points from the documented seeded generator.
pub fn gen_random(count: usize, dim: usize, seed: u64) -> Result<PointSet> {
    let mut rng = seeded_rng(seed);
    let coords = (0..count * dim).map(|_| unit_f64(&mut rng)).collect();
    PointSet::new(
        dim,
        coords,
        PointSetMeta {
            generator: "random".into(),
            params: format!("N={count} d={dim}"),
            seed: Some(seed),
        },
    )
}

/// `m`-bit reversal of `i`.
pub fn bit_reverse(i: u64, m: u32) -> u64 {
    if m == 0 {
        0
    } else {
        i.reverse_bits() >> (64 - m)
    }
}

/// The two-dimensional van der Corput set `{(i 2^-m, rev_m(i) 2^-m)}` with
/// `2^m` points.
pub fn gen_vandercorput(m: u32) -> Result<PointSet> {
    if m > 30 {
        return Err(Error::TooLarge(format!("2^{m} points")));
    }
    let n = 1u64 << m;
    let scale = crate::dyadic::dyadic_scale(m);
    let coords = (0..n)
        .flat_map(|i| [i as f64 * scale, bit_reverse(i, m) as f64 * scale])
        .collect();
    PointSet::new(
        2,
        coords,
        PointSetMeta {
            generator: "vdc".into(),
            params: format!("m={m}"),
            seed: None,
        },
    )
}

/// Radical inverse of `i` in `base`, rounded once from the exact fraction.
pub fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut num = 0u64;
    let mut den = 1u64;
    while i > 0 {
        num = num * base + i % base;
        den *= base;
        i /= base;
    }
    num as f64 / den as f64
}

/// Halton points with indices `1..=N` in the first `d` primes, `d ≤ 8`.
pub fn gen_halton(count: usize, dim: usize) -> Result<PointSet> {
    if dim == 0 || dim > PRIMES.len() {
        return Err(Error::UnsupportedDimension {
            dim,
            reason: "Halton points are available for 1 ≤ d ≤ 8",
        });
    }
    let coords = (1..=count as u64)
        .flat_map(|i| PRIMES[..dim].iter().map(move |&b| radical_inverse(i, b)))
        .collect();
    PointSet::new(
        dim,
        coords,
        PointSetMeta {
            generator: "halton".into(),
            params: format!("N={count} d={dim}"),
            seed: None,
        },
    )
}
