//! Shared oracles and synthetic-data generators for the integration tests.
#![allow(dead_code)]

use hypergrowth::models::ModelClass;
use hypergrowth::TimeSeries;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

pub const N_POINTS: usize = 30;
pub const NOISE_SIGMA: f64 = 0.05;

pub fn series(pairs: &[(f64, f64)]) -> TimeSeries {
    TimeSeries::from_pairs(pairs, "u", "synthetic").unwrap()
}

/// Weighted least-squares line by explicit normal equations on centered
/// abscissae. Written independently of the library.
pub fn oracle_line(t: &[f64], y: &[f64], w: &[f64]) -> (f64, f64) {
    let sw: f64 = w.iter().sum();
    let tm = t.iter().zip(w).map(|(t, w)| t * w).sum::<f64>() / sw;
    let ym = y.iter().zip(w).map(|(y, w)| y * w).sum::<f64>() / sw;
    let mut stt = 0.0;
    let mut sty = 0.0;
    for i in 0..t.len() {
        stt += w[i] * (t[i] - tm) * (t[i] - tm);
        sty += w[i] * (t[i] - tm) * (y[i] - ym);
    }
    let a1 = sty / stt;
    (ym - a1 * tm, a1)
}

pub fn oracle_sse(t: &[f64], y: &[f64], w: &[f64]) -> f64 {
    let (a0, a1) = oracle_line(t, y, w);
    (0..t.len())
        .map(|i| w[i] * (y[i] - a0 - a1 * t[i]).powi(2))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Hyperbolic1,
    DecreasingHyperbolic,
    Exponential,
    OrderK,
}

pub const FAMILIES: [Family; 4] = [
    Family::Hyperbolic1,
    Family::DecreasingHyperbolic,
    Family::Exponential,
    Family::OrderK,
];

impl Family {
    pub fn matches(self, class: ModelClass) -> bool {
        matches!(
            (self, class),
            (Family::Hyperbolic1, ModelClass::Hyperbolic1)
                | (
                    Family::DecreasingHyperbolic,
                    ModelClass::DecreasingHyperbolic
                )
                | (Family::Exponential, ModelClass::Exponential)
                | (Family::OrderK, ModelClass::HyperbolicOrderK(_))
        )
    }
}

/// Generator parameters: first year, spacing, starting value and a shape
/// parameter whose meaning depends on the family.
#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub t0: f64,
    pub dt: f64,
    pub s0: f64,
    pub shape: f64,
}

/// `shape` is, per family: the ratio of the last to the first reciprocal
/// (line families), the total growth exponent `r * span` (exponential), or
/// the final reciprocal fraction of a concave quadratic (higher order).
pub fn generate(family: Family, p: Shape) -> Vec<(f64, f64)> {
    let y0 = 1.0 / p.s0;
    (0..N_POINTS)
        .map(|i| {
            let u = i as f64 / (N_POINTS - 1) as f64;
            let t = p.t0 + p.dt * i as f64;
            let recip = match family {
                Family::Hyperbolic1 | Family::DecreasingHyperbolic => {
                    y0 * (1.0 + (p.shape - 1.0) * u)
                }
                Family::Exponential => y0 * (-p.shape * u).exp(),
                Family::OrderK => {
                    let alpha = 0.15;
                    let beta = 1.0 - alpha - p.shape;
                    y0 * (1.0 - alpha * u - beta * u * u)
                }
            };
            (t, 1.0 / recip)
        })
        .collect()
}

fn shape_range(family: Family) -> (f64, f64) {
    match family {
        Family::Hyperbolic1 => (0.1, 0.3),
        Family::DecreasingHyperbolic => (3.0, 10.0),
        Family::Exponential => (2.0, 4.0),
        Family::OrderK => (0.1, 0.3),
    }
}

/// Fixed parameter grid, 24 generators per family.
pub fn grid(family: Family) -> Vec<Shape> {
    let (lo, hi) = shape_range(family);
    let mut out = Vec::new();
    for &t0 in &[0.0, 1000.0, 1900.0] {
        for &dt in &[1.0, 5.0] {
            for &s0 in &[0.5, 20.0] {
                for &f in &[0.0, 1.0] {
                    out.push(Shape {
                        t0,
                        dt,
                        s0,
                        shape: lo + f * (hi - lo),
                    });
                }
            }
        }
    }
    out
}

/// One noisy trial: random generator parameters and multiplicative
/// lognormal noise on every value.
pub fn noisy_trial(family: Family, rng: &mut ChaCha8Rng) -> Vec<(f64, f64)> {
    let (lo, hi) = shape_range(family);
    let p = Shape {
        t0: rng.random_range(0.0..1950.0),
        dt: rng.random_range(0.5..10.0),
        s0: rng.random_range(0.1..100.0),
        shape: rng.random_range(lo..hi),
    };
    let noise = LogNormal::new(0.0, NOISE_SIGMA).unwrap();
    generate(family, p)
        .into_iter()
        .map(|(t, v)| (t, v * noise.sample(rng)))
        .collect()
}

/// Proptest settings shared by the suites; regressions go next to the test file.
pub fn proptest_config(cases: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config {
        cases,
        failure_persistence: Some(Box::new(
            proptest::test_runner::FileFailurePersistence::WithSource("regressions"),
        )),
        ..Default::default()
    }
}

/// Smallest total SSE over every placement of `segments` contiguous pieces
/// of at least `min_pts` samples, found by brute-force enumeration.
pub fn enumerate_best_sse(t: &[f64], y: &[f64], w: &[f64], segments: usize, min_pts: usize) -> f64 {
    fn go(t: &[f64], y: &[f64], w: &[f64], start: usize, left: usize, min_pts: usize) -> f64 {
        let n = t.len();
        if left == 1 {
            return if n - start >= min_pts {
                oracle_sse(&t[start..], &y[start..], &w[start..])
            } else {
                f64::INFINITY
            };
        }
        let mut best = f64::INFINITY;
        let mut end = start + min_pts;
        while end + (left - 1) * min_pts <= n {
            let head = oracle_sse(&t[start..end], &y[start..end], &w[start..end]);
            best = best.min(head + go(t, y, w, end, left - 1, min_pts));
            end += 1;
        }
        best
    }
    go(t, y, w, 0, segments, min_pts)
}

/// BIC of an `m`-segment model: Gaussian likelihood with `3m - 1` parameters
/// and an SSE floor of `(1e-9)^2` times the weighted sum of squares.
pub fn oracle_bic(sse: f64, t: &[f64], y: &[f64], w: &[f64], segments: usize) -> f64 {
    let n = t.len() as f64;
    let floor = 1e-18 * y.iter().zip(w).map(|(y, w)| w * y * y).sum::<f64>();
    n * (sse.max(floor) / n).ln() + (3 * segments - 1) as f64 * n.ln()
}

/// Index of the preferred candidate: anything within 2 of the minimum BIC
/// loses to the one with fewer parameters, then to the lower BIC.
pub fn oracle_select(candidates: &[(f64, usize)]) -> usize {
    let min = candidates.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    let mut best: Option<usize> = None;
    for (i, &(b, p)) in candidates.iter().enumerate() {
        if b - min >= 2.0 {
            continue;
        }
        best = match best {
            Some(j) if (candidates[j].1, candidates[j].0) <= (p, b) => Some(j),
            _ => Some(i),
        };
    }
    best.unwrap()
}
