use std::fmt;

use serde::{Deserialize, Serialize};

use super::{DyadicInterval, DyadicRectangle};
use crate::error::{Error, Result};

/// A shape vector `r = (r_1, …, r_d)` with every `r_t ≥ 1`.
///
/// Shapes index the families `R_r` of dyadic rectangles with side lengths
/// `2^-r_t`. Components are strictly positive, which is the hyperbolic
/// family's convention; rectangles with a full side `[0, 1)` are built
/// directly as [`DyadicRectangle`]s instead.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ShapeVector(Vec<u32>);

impl ShapeVector {
    pub fn new(components: Vec<u32>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidShape("empty shape".into()));
        }
        if components.contains(&0) {
            return Err(Error::InvalidShape(format!(
                "{components:?} has a zero component"
            )));
        }
        if components.iter().map(|&c| c as u64).sum::<u64>() > 62 {
            return Err(Error::InvalidShape(format!("{components:?} is too fine")));
        }
        Ok(Self(components))
    }

    pub fn components(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|r| = Σ r_t`.
    pub fn index(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Membership in the hyperbolic family `H_n^d`.
    pub fn is_hyperbolic(&self, n: u32) -> bool {
        self.index() == n && self.0.iter().all(|&c| c <= n)
    }

    pub fn rectangle_count(&self) -> usize {
        1usize << self.index()
    }

    /// The `index`-th rectangle of `R_r`, in row-major order with coordinate
    /// 1 slowest.
    pub fn rectangle(&self, index: usize) -> DyadicRectangle {
        let mut rem = index as u64;
        let mut sides = vec![DyadicInterval::unit(); self.dim()];
        for (t, &level) in self.0.iter().enumerate().rev() {
            let offset = rem & ((1u64 << level) - 1);
            rem >>= level;
            sides[t] = DyadicInterval::new(level, offset).expect("offset is masked to the level");
        }
        DyadicRectangle::new(sides).expect("shapes are nonempty")
    }

    /// Index (in [`ShapeVector::rectangle`] order) of the rectangle of this
    /// shape containing `x ∈ [0, 1)^d`.
    pub fn rectangle_index(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let mut idx = 0u64;
        for (&level, &xt) in self.0.iter().zip(x) {
            idx = (idx << level) | DyadicInterval::containing(xt, level)?.offset();
        }
        Ok(idx as usize)
    }
}

impl fmt::Display for ShapeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// All of `H_n^d`: compositions of `n` into `d` positive parts, in
/// lexicographic order. Empty when `n < d`.
pub fn enumerate_shapes(n: u32, d: usize) -> Vec<ShapeVector> {
    let mut out = Vec::new();
    if d == 0 || (n as usize) < d {
        return out;
    }
    let mut current = Vec::with_capacity(d);
    compose(n, d, &mut current, &mut out);
    out
}

fn compose(remaining: u32, parts: usize, current: &mut Vec<u32>, out: &mut Vec<ShapeVector>) {
    if parts == 1 {
        current.push(remaining);
        out.push(ShapeVector(current.clone()));
        current.pop();
        return;
    }
    for first in 1..=remaining - (parts as u32 - 1) {
        current.push(first);
        compose(remaining - first, parts - 1, current, out);
        current.pop();
    }
}

/// Iterator over the `2^|r|` rectangles of `R_r`.
pub fn rectangles_of_shape(shape: &ShapeVector) -> ShapeRectangles<'_> {
    ShapeRectangles { shape, next: 0 }
}

pub struct ShapeRectangles<'a> {
    shape: &'a ShapeVector,
    next: usize,
}

impl Iterator for ShapeRectangles<'_> {
    type Item = DyadicRectangle;

    fn next(&mut self) -> Option<DyadicRectangle> {
        if self.next >= self.shape.rectangle_count() {
            return None;
        }
        let r = self.shape.rectangle(self.next);
        self.next += 1;
        Some(r)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.shape.rectangle_count() - self.next;
        (left, Some(left))
    }
}

impl ExactSizeIterator for ShapeRectangles<'_> {}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn shape(c: &[u32]) -> ShapeVector {
        ShapeVector::new(c.to_vec()).unwrap()
    }

    fn binomial(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn shapes_of_four_in_two_dimensions() {
        let got = enumerate_shapes(4, 2);
        assert_eq!(got, vec![shape(&[1, 3]), shape(&[2, 2]), shape(&[3, 1])]);
    }

    #[test]
    fn shapes_of_five_in_three_dimensions() {
        let got = enumerate_shapes(5, 3);
        assert_eq!(got.len(), 6);
        assert_eq!(got.first(), Some(&shape(&[1, 1, 3])));
        assert_eq!(got.last(), Some(&shape(&[3, 1, 1])));
    }

    #[test]
    fn too_few_to_compose_is_empty() {
        assert!(enumerate_shapes(2, 3).is_empty());
    }

    #[test]
    fn shape_counts_are_binomial_and_grow_like_n_to_the_d_minus_one() {
        for d in 1..=4usize {
            for n in d as u32..=20 {
                let shapes = enumerate_shapes(n, d);
                let count = binomial(n as u64 - 1, d as u64 - 1);
                assert_eq!(shapes.len() as u64, count, "n={n} d={d}");
                assert!(shapes.windows(2).all(|w| w[0] < w[1]));
                assert!(shapes.iter().all(|s| s.is_hyperbolic(n)));
                if d >= 2 {
                    let ratio = count as f64 / (n as f64).powi(d as i32 - 1);
                    let fact: f64 = (1..d).map(|i| i as f64).product();
                    let lower = (1.0 - (d * d) as f64 / n as f64) / fact;
                    assert!(ratio <= 1.0 && ratio >= lower, "n={n} d={d} ratio={ratio}");
                }
            }
        }
    }

    #[test]
    fn rectangle_counts() {
        assert_eq!(rectangles_of_shape(&shape(&[1, 1])).count(), 4);
        assert_eq!(rectangles_of_shape(&shape(&[2, 1])).count(), 8);
        let cubes: Vec<_> = rectangles_of_shape(&shape(&[1, 1, 1])).collect();
        assert_eq!(cubes.len(), 8);
        assert!(cubes
            .iter()
            .all(|c| c.volume() == 0.125 && c.levels() == vec![1, 1, 1]));
    }

    #[test]
    fn rectangles_are_distinct_and_tile_the_cube() {
        let s = shape(&[2, 1, 3]);
        let rects: Vec<_> = rectangles_of_shape(&s).collect();
        let unique: HashSet<_> = rects.iter().cloned().collect();
        assert_eq!(unique.len(), 64);
        // every sample point lies in exactly one rectangle, the indexed one
        for i in 0..200 {
            let x = [
                (i as f64 * 0.618_033_988_7).fract(),
                (i as f64 * 0.414_213_562_3).fract(),
                (i as f64 * 0.732_050_807_5).fract(),
            ];
            let hits: Vec<usize> = rects
                .iter()
                .enumerate()
                .filter(|(_, r)| r.contains(&x).unwrap())
                .map(|(k, _)| k)
                .collect();
            assert_eq!(hits, vec![s.rectangle_index(&x).unwrap()]);
        }
    }

    #[test]
    fn zero_components_are_rejected() {
        assert!(ShapeVector::new(vec![2, 0]).is_err());
        assert!(ShapeVector::new(vec![]).is_err());
    }
}
