//! Closed-form Haar coefficients of `D_N` against a brute-force cell sum.
//!
//! Points sit on a dyadic lattice of step `2^-L`, so `#{p < x}` is constant on
//! every open cell of that lattice and the integral becomes an exact finite sum.

use discrepancy_core::discrepancy::haar_coeff_dn;
use discrepancy_core::dyadic::{DyadicInterval, DyadicRectangle};
use discrepancy_core::pointset::{seeded_rng, PointSet, PointSetMeta};
use rand::Rng;

fn lattice_points<R: Rng>(
    rng: &mut R,
    count: usize,
    dim: usize,
    l: u32,
) -> (PointSet, Vec<Vec<u64>>) {
    let ticks: Vec<Vec<u64>> = (0..count)
        .map(|_| (0..dim).map(|_| rng.gen_range(0..1u64 << l)).collect())
        .collect();
    let coords = ticks
        .iter()
        .flatten()
        .map(|&k| k as f64 / (1u64 << l) as f64)
        .collect();
    (
        PointSet::new(dim, coords, PointSetMeta::default()).unwrap(),
        ticks,
    )
}

fn random_rect<R: Rng>(rng: &mut R, dim: usize, max_level: u32) -> DyadicRectangle {
    let sides = (0..dim)
        .map(|_| {
            let level = rng.gen_range(0..=max_level);
            DyadicInterval::new(level, rng.gen_range(0..1u64 << level)).unwrap()
        })
        .collect();
    DyadicRectangle::new(sides).unwrap()
}

// -1 on the left half, +1 on the right half; the cell never straddles the midpoint.
fn haar_1d(level: u32, offset: u64, cell: u64, l: u32) -> f64 {
    let shift = l - level;
    if cell >> shift != offset {
        return 0.0;
    }
    if (cell >> (shift - 1)) & 1 == 0 {
        -1.0
    } else {
        1.0
    }
}

fn brute_force(ticks: &[Vec<u64>], rect: &DyadicRectangle, l: u32) -> f64 {
    let dim = rect.dim();
    let n = ticks.len() as f64;
    let w = 1.0 / (1u64 << l) as f64;
    let cells = 1usize << (l as usize * dim);
    let mut total = 0.0;
    let mut cell = vec![0u64; dim];
    for idx in 0..cells {
        for (t, c) in cell.iter_mut().enumerate() {
            *c = ((idx >> (l as usize * t)) as u64) & ((1u64 << l) - 1);
        }
        let h: f64 = (0..dim)
            .map(|t| haar_1d(rect.side(t).level(), rect.side(t).offset(), cell[t], l))
            .product();
        if h == 0.0 {
            continue;
        }
        let count = ticks
            .iter()
            .filter(|p| p.iter().zip(&cell).all(|(a, b)| a <= b))
            .count() as f64;
        let mean_volume: f64 = cell.iter().map(|&c| (c as f64 + 0.5) * w).product();
        total += h * (count - n * mean_volume);
    }
    total * w.powi(dim as i32)
}

#[test]
fn closed_form_matches_cell_sum() {
    let mut rng = seeded_rng(11);
    for (dim, l) in [(1usize, 10u32), (2, 8), (3, 6)] {
        for _ in 0..20 {
            let count = rng.gen_range(1..=64);
            let (points, ticks) = lattice_points(&mut rng, count, dim, l);
            let rect = random_rect(&mut rng, dim, l - 1);
            let closed = haar_coeff_dn(&points, &rect).unwrap().value;
            let brute = brute_force(&ticks, &rect, l);
            assert!(
                (closed - brute).abs() <= 1e-12 * (1.0 + brute.abs()),
                "d={dim} {rect:?}: closed {closed} brute {brute}"
            );
        }
    }
}

#[test]
fn first_moment_is_quarter_length_squared() {
    for level in 0..=8 {
        for offset in [0, (1u64 << level) / 2, (1u64 << level) - 1] {
            let i = DyadicInterval::new(level, offset).unwrap();
            assert!((i.first_moment() - 0.25 * i.length().powi(2)).abs() < 1e-15);
        }
    }
}

#[test]
fn linear_part_has_closed_form() {
    let mut rng = seeded_rng(5);
    for dim in 1..=3 {
        let (points, _) = lattice_points(&mut rng, 17, dim, 6);
        let rect = random_rect(&mut rng, dim, 5);
        let c = haar_coeff_dn(&points, &rect).unwrap();
        let expected = -17.0 * 0.25f64.powi(dim as i32) * rect.volume().powi(2);
        assert!((c.linear_part - expected).abs() < 1e-15);
    }
}
