//! Acceptance run: one pass/fail line per criterion.

use std::process::{Command, ExitCode};
use std::time::Instant;

use discrepancy_cli::family::Family;
use discrepancy_cli::report::Check;
use discrepancy_cli::suites::{self, Draw, SuiteParams, PROPS_MAX_N_2D, PROPS_MAX_N_3D};
use discrepancy_core::discrepancy::haar_coeff_dn;
use discrepancy_core::dyadic::{DyadicInterval, DyadicRectangle};
use discrepancy_core::pointset::{gen_random, seeded_rng, PointSet};

const FINE: u32 = 7;
const MAX_SIDE: u32 = 6;

/// Exact cell integrals of `D_N` on the `2^FINE`-per-axis grid, coordinate 1 slowest.
fn cell_integrals(points: &PointSet) -> Vec<f64> {
    let d = points.dim();
    let side = 1usize << FINE;
    let w = 1.0 / side as f64;
    let mut out = vec![0.0; side.pow(d as u32)];
    let mut add_outer = |factors: &[Vec<f64>], scale: f64| {
        for (idx, slot) in out.iter_mut().enumerate() {
            let mut v = scale;
            for (t, f) in factors.iter().enumerate() {
                v *= f[(idx >> (FINE as usize * (d - 1 - t))) & (side - 1)];
            }
            *slot += v;
        }
    };
    for p in points.iter() {
        let factors: Vec<Vec<f64>> = p
            .iter()
            .map(|&x| {
                (0..side)
                    .map(|c| (((c + 1) as f64 * w) - x.max(c as f64 * w)).max(0.0))
                    .collect()
            })
            .collect();
        add_outer(&factors, 1.0);
    }
    let linear: Vec<f64> = (0..side)
        .map(|c| ((c + 1) as f64 * w).powi(2) / 2.0 - (c as f64 * w).powi(2) / 2.0)
        .collect();
    add_outer(&vec![linear; d], -(points.len() as f64));
    out
}

/// Inclusive prefix sums along every axis.
fn summed_area(mut g: Vec<f64>, d: usize) -> Vec<f64> {
    let side = 1usize << FINE;
    for t in 0..d {
        let stride = side.pow((d - 1 - t) as u32);
        for idx in 0..g.len() {
            if !(idx / stride).is_multiple_of(side) {
                g[idx] += g[idx - stride];
            }
        }
    }
    g
}

/// Sum over cells `lo[t] ≤ c_t < hi[t]`.
fn box_sum(table: &[f64], lo: &[usize], hi: &[usize]) -> f64 {
    let d = lo.len();
    let side = 1usize << FINE;
    let mut total = 0.0;
    'corner: for mask in 0..1usize << d {
        let mut idx = 0;
        let mut sign = 1.0;
        for t in 0..d {
            let c = if mask >> t & 1 == 1 {
                sign = -sign;
                if lo[t] == 0 {
                    continue 'corner;
                }
                lo[t] - 1
            } else {
                hi[t] - 1
            };
            idx = idx * side + c;
        }
        total += sign * table[idx];
    }
    total
}

fn brute_coefficient(table: &[f64], rect: &DyadicRectangle) -> f64 {
    let d = rect.dim();
    let mut total = 0.0;
    for halves in 0..1usize << d {
        let (mut lo, mut hi, mut sign) = (vec![0; d], vec![0; d], 1.0);
        for t in 0..d {
            let side = rect.side(t);
            let half = 1usize << (FINE - 1 - side.level());
            let start = side.offset() as usize * 2 * half;
            if halves >> t & 1 == 0 {
                sign = -sign;
                lo[t] = start;
            } else {
                lo[t] = start + half;
            }
            hi[t] = lo[t] + half;
        }
        total += sign * box_sum(table, &lo, &hi);
    }
    total
}

fn all_rectangles(d: usize) -> Vec<DyadicRectangle> {
    let intervals: Vec<DyadicInterval> = (0..=MAX_SIDE)
        .flat_map(|l| (0..1u64 << l).map(move |o| DyadicInterval::new(l, o).expect("in range")))
        .collect();
    let mut rects: Vec<Vec<DyadicInterval>> = vec![Vec::new()];
    for _ in 0..d {
        rects = rects
            .into_iter()
            .flat_map(|r| {
                intervals
                    .iter()
                    .map(move |i| [r.clone(), vec![*i]].concat())
            })
            .collect();
    }
    rects
        .into_iter()
        .map(|s| DyadicRectangle::new(s).expect("nonempty"))
        .collect()
}

fn haar_closed_forms() -> Vec<Check> {
    let mut rng = seeded_rng(2024);
    let mut checks = Vec::new();
    for (d, sets) in [(1usize, 8u64), (2, 4), (3, 1)] {
        let rects = all_rectangles(d);
        let mut worst: f64 = 0.0;
        for s in 0..sets {
            let n_points = if d == 3 {
                64
            } else {
                1 + rng.below(64) as usize
            };
            let points = gen_random(n_points, d, 100 * d as u64 + s).expect("valid");
            let table = summed_area(cell_integrals(&points), d);
            for r in &rects {
                let closed = haar_coeff_dn(&points, r).expect("dimensions agree").value;
                worst = worst.max((closed - brute_coefficient(&table, r)).abs());
            }
        }
        checks.push(
            Check::at_most(
                format!("closed form vs grid brute force, d={d}"),
                worst,
                1e-10,
            )
            .with_notes(format!("{} rectangles x {sets} point sets", rects.len())),
        );
    }
    let mut moment: f64 = 0.0;
    for l in 0..=8 {
        for o in 0..1u64 << l {
            let i = DyadicInterval::new(l, o).expect("in range");
            moment = moment.max((i.first_moment() - 0.25 * i.length().powi(2)).abs());
        }
    }
    checks.push(Check::new(
        "int x h_I = |I|^2/4, levels <= 8",
        moment == 0.0,
        moment,
        0.0,
    ));
    checks
}

fn per_instance(f: impl Fn(&PointSet, u32, &str) -> Vec<Check>) -> Vec<Check> {
    let mut out = Vec::new();
    for family in Family::ALL {
        for d in [2usize, 3] {
            if !family.supports(d) {
                continue;
            }
            let top = if d == 2 {
                PROPS_MAX_N_2D
            } else {
                PROPS_MAX_N_3D
            };
            for n in d as u32..=top {
                let tag = format!("{}/d{d}/n{n}", family.name());
                match family.at_scale(d, n, 1) {
                    Ok(points) => out.extend(f(&points, n, &tag)),
                    Err(e) => out.push(Check::flag(tag, false).with_notes(e.to_string())),
                }
            }
        }
    }
    out
}

fn suite(suite: suites::Suite, families: &[Family], max_n: u32) -> Vec<Check> {
    let params = SuiteParams {
        families: families.to_vec(),
        max_n,
        ..SuiteParams::default()
    };
    suites::run_suite(suite, &params)
}

fn binary(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_discrepancy"))
        .args(args)
        .output()
        .expect("binary runs");
    out.stdout
}

fn determinism() -> Vec<Check> {
    let runs: [&[&str]; 3] = [
        &["verify", "--suite", "all", "--max-n", "6"],
        &[
            "sweep",
            "--family",
            "random",
            "--dim",
            "3",
            "--n-min",
            "3",
            "--n-max",
            "5",
            "--metric",
            "l1",
            "--metric",
            "l1logl",
            "--metric",
            "pairing_phi",
            "--metric",
            "hardy_sq_p",
        ],
        &[
            "sweep",
            "--family",
            "vdc",
            "--n-min",
            "4",
            "--n-max",
            "10",
            "--metric",
            "l2",
            "--metric",
            "pairing_psi",
        ],
    ];
    runs.iter()
        .map(|args| {
            let (a, b) = (binary(args), binary(args));
            Check::flag(
                format!("byte-identical: {}", args[..2].join(" ")),
                !a.is_empty() && a == b,
            )
            .with_notes(format!("{} bytes", a.len()))
        })
        .collect()
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Vec<Check>); 10] = [
        ("Haar closed forms", haar_closed_forms),
        ("r-function floor", || {
            per_instance(|p, n, tag| vec![suites::rvec_check(p, n, tag)])
        }),
        ("index above n", || {
            per_instance(|p, n, tag| suites::excess_check(p, n, 1, tag))
        }),
        ("combinatorics", || {
            suite(suites::Suite::Expansion, &Family::ALL, 8)
        }),
        ("Halasz certificate", || {
            suite(suites::Suite::Certificate, &[Family::Vdc], 12)
        }),
        ("main certificate d=3", || {
            suite(suites::Suite::Certificate, &[Family::Halton], 10)
        }),
        ("Orlicz norms", || {
            suite(suites::Suite::Orlicz, &Family::ALL, 8)
        }),
        ("Hardy suite", || {
            suite(suites::Suite::Hardy, &Family::ALL, 12)
        }),
        ("Khintchine and moments", || {
            suite(suites::Suite::Khintchine, &Family::ALL, 8)
        }),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (label, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let checks = run();
        let bad: Vec<&Check> = checks.iter().filter(|c| !c.passed).collect();
        let verdict = if bad.is_empty() && !checks.is_empty() {
            "PASS"
        } else {
            "FAIL"
        };
        println!(
            "criterion {:>2} {verdict} {label}: {}/{} checks ({:.1}s)",
            i + 1,
            checks.len() - bad.len(),
            checks.len(),
            start.elapsed().as_secs_f64()
        );
        for c in &bad {
            println!(
                "    failed: {} measured={:?} bound={:?} {}",
                c.name, c.measured, c.bound, c.notes
            );
        }
        if verdict == "FAIL" {
            failed += 1;
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
