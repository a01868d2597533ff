//! Dyadic intervals and rectangles, Haar functions, hyperbolic shape
//! enumeration and the piecewise-constant grid algebra.
//!
//! All intervals are half-open, `[j 2^-k, (j + 1) 2^-k)`, so a boundary point
//! belongs to the right-hand sibling.

mod grid;
mod interval;
mod rectangle;
mod shape;

pub(crate) use grid::shifts as grid_shifts;
pub use grid::{GridCap, GridFunction};
pub use interval::DyadicInterval;
pub use rectangle::DyadicRectangle;
pub use shape::{enumerate_shapes, rectangles_of_shape, ShapeRectangles, ShapeVector};

/// `2^-k` as an exact power of two.
#[inline]
pub fn dyadic_scale(level: u32) -> f64 {
    f64::from_bits(((1023 - level as i64) as u64) << 52)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_scale_is_exact() {
        assert_eq!(dyadic_scale(0), 1.0);
        assert_eq!(dyadic_scale(1), 0.5);
        assert_eq!(dyadic_scale(10), 1.0 / 1024.0);
        assert_eq!(dyadic_scale(60), 2f64.powi(-60));
    }
}
