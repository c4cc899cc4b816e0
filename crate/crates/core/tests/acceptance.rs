//! Acceptance criteria, one PASS/FAIL line each with the measured values
//! underneath. Exits non-zero when any criterion fails.

mod common;

use std::time::{Duration, Instant};

use common::{
    enumerate_best_sse, generate, grid, noisy_trial, oracle_bic, oracle_select, FAMILIES,
};
use hypergrowth::datasets::load_bundled;
use hypergrowth::diverge::{
    detect_divergence, residual_scale, standardized_residuals, Direction, DivergenceParams,
};
use hypergrowth::models::{classify, ModelClass};
use hypergrowth::segment::{acceleration_ratio, fit_segmented, parameter_count};
use hypergrowth::{fit_first_order, FitOptions, HyperbolicLine, TimeSeries, Weighting};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const REL_TOL: f64 = 0.05;

struct Criterion {
    title: &'static str,
    checks: Vec<(bool, String)>,
}

impl Criterion {
    fn new(title: &'static str) -> Self {
        Self {
            title,
            checks: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: String) {
        self.checks.push((ok, detail));
    }

    fn within(&mut self, name: &str, got: f64, target: f64) {
        let rel = got / target - 1.0;
        self.check(
            rel.abs() <= REL_TOL,
            format!(
                "{name} = {got:.6e} vs {target:.4e} ({:+.2}%, tolerance ±5%)",
                100.0 * rel
            ),
        );
    }

    fn between(&mut self, name: &str, got: f64, lo: f64, hi: f64) {
        self.check(
            (lo..=hi).contains(&got),
            format!("{name} = {got:.4} in [{lo}, {hi}]"),
        );
    }

    fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.0)
    }
}

fn series(pairs: &[(f64, f64)]) -> TimeSeries {
    common::series(pairs)
}

fn world_population() -> Criterion {
    let mut c = Criterion::new("world population fit, AD 1000-1950 without AD 1");
    let start = Instant::now();
    let s = load_bundled("world_population")
        .unwrap()
        .exclude(&[1.0])
        .slice(1000.0, 1950.0)
        .unwrap();
    let fit = fit_first_order(&s, FitOptions::weighted(Weighting::ValueSquared)).unwrap();
    let elapsed = start.elapsed();
    c.within("a0", fit.a0(), 8.724);
    c.within("a1", fit.a1(), -4.267e-3);
    c.check(
        elapsed < Duration::from_secs(1),
        format!("runtime {elapsed:?} < 1 s"),
    );
    c
}

fn africa() -> Criterion {
    let mut c = Criterion::new("Africa: two hyperbolic regimes and a later slowdown");
    let s = load_bundled("africa_population").unwrap();
    let seg = fit_segmented(
        &s.slice(1000.0, 1960.0).unwrap(),
        2,
        4,
        FitOptions::default(),
    )
    .unwrap();
    c.check(
        seg.segment_count() == 2,
        format!("segments = {}", seg.segment_count()),
    );
    if seg.segment_count() == 2 {
        c.between("breakpoint", seg.breakpoints[0], 1850.0, 1890.0);
        c.within("slow a0", seg.segments[0].a0(), 51.05);
        c.within("slow a1", seg.segments[0].a1(), -2.036e-2);
        c.within("fast a0", seg.segments[1].a0(), 170.5);
        c.within("fast a1", seg.segments[1].a1(), -8.515e-2);
        c.between(
            "acceleration ratio",
            acceleration_ratio(&seg, 0).unwrap(),
            3.8,
            4.6,
        );
    }
    let d = detect_divergence(
        &s,
        (1870.0, 1960.0),
        DivergenceParams::default(),
        FitOptions::default(),
    )
    .unwrap();
    c.check(
        d.direction == Direction::Slower,
        format!("direction = {}", d.direction.as_str()),
    );
    match d.onset {
        Some(onset) => c.between("onset", onset, 1970.0, 1985.0),
        None => c.check(false, "no onset detected".into()),
    }
    c
}

fn western_europe() -> Criterion {
    let mut c = Criterion::new("Western Europe GDP, 1950 off the hyperbolic trend");
    let s = load_bundled("western_europe_gdp").unwrap();
    let base = s.exclude(&[1950.0]).slice(1500.0, 1950.0).unwrap();
    let fit = fit_first_order(&base, FitOptions::default()).unwrap();
    c.within("a0", fit.a0(), 9.697e-2);
    c.within("a1", fit.a1(), -5.020e-5);
    let point = series(&[(1950.0, s.value_at(1950.0).unwrap())]);
    let r = standardized_residuals(&fit, &point, residual_scale(&fit, &base)).unwrap()[0];
    c.check(
        r.residual > 0.0,
        format!(
            "1950 residual = {:+.3e} (positive means slower)",
            r.residual
        ),
    );
    c.check(r.z.abs() > 2.0, format!("1950 |z| = {:.3} > 2", r.z.abs()));
    c
}

fn world_gdp() -> Criterion {
    let mut c = Criterion::new("world GDP: hyperbolic, then slower and near-exponential");
    let s = load_bundled("world_gdp").unwrap();
    let fit = fit_first_order(&s.slice(1000.0, 1955.0).unwrap(), FitOptions::default()).unwrap();
    c.within("a0", fit.a0(), 1.716e-2);
    c.within("a1", fit.a1(), -8.671e-6);
    let d = detect_divergence(
        &s,
        (1000.0, 1955.0),
        DivergenceParams::default(),
        FitOptions::default(),
    )
    .unwrap();
    c.check(
        d.direction == Direction::Slower,
        format!("direction = {}", d.direction.as_str()),
    );
    match d.onset {
        Some(onset) => c.between("onset", onset, 1985.0, 2003.0),
        None => c.check(false, "no onset detected".into()),
    }
    let res = classify(&s.slice(1965.0, 2003.0).unwrap(), 3).unwrap();
    let exp = res.candidate(ModelClass::Exponential).unwrap().bic;
    let h1 = res.candidate(ModelClass::Hyperbolic1).unwrap().bic;
    c.check(
        exp < h1,
        format!(
            "1965-2003 BIC: Exponential {exp:.2} < Hyperbolic1 {h1:.2} (winner {})",
            res.winner
        ),
    );
    let ts = HyperbolicLine::new(1.716e-2, -8.671e-6)
        .singularity_time()
        .unwrap();
    c.between("singularity of the reference constants", ts, 1978.5, 1979.5);
    c.check(
        true,
        format!(
            "singularity of the fitted constants = {:.2} (informational)",
            fit.singularity_time().unwrap()
        ),
    );
    c
}

fn properties() -> Criterion {
    let mut c = Criterion::new("property suite");
    let mut rng = ChaCha8Rng::seed_from_u64(0x00ac_ce97);

    let mut worst: f64 = 0.0;
    let mut worst_scaling: f64 = 0.0;
    for _ in 0..100 {
        let a0 = rng.random_range(0.01..100.0);
        let start = rng.random_range(0.0..1950.0);
        let step = rng.random_range(0.5..50.0);
        let n = rng.random_range(2..60usize);
        let years: Vec<f64> = (0..n).map(|i| start + step * i as f64).collect();
        let end = years[n - 1];
        let a1 = if rng.random_bool(0.5) {
            -a0 / (end + rng.random_range(1.0..5000.0))
        } else {
            a0 * rng.random_range(0.01..5.0) / 1000.0
        };
        let pairs: Vec<(f64, f64)> = years.iter().map(|&t| (t, 1.0 / (a0 + a1 * t))).collect();
        let f = fit_first_order(&series(&pairs), FitOptions::default()).unwrap();
        worst = worst
            .max((f.a0() / a0 - 1.0).abs())
            .max((f.a1() / a1 - 1.0).abs());

        let k = rng.random_range(1e-3..1e3);
        let scaled: Vec<(f64, f64)> = pairs.iter().map(|&(t, v)| (t, k * v)).collect();
        let g = fit_first_order(&series(&scaled), FitOptions::default()).unwrap();
        worst_scaling = worst_scaling
            .max((g.a0() * k / f.a0() - 1.0).abs())
            .max((g.a1() * k / f.a1() - 1.0).abs());
        if let (Some(a), Some(b)) = (f.singularity_time(), g.singularity_time()) {
            worst_scaling = worst_scaling.max((a / b - 1.0).abs());
        }
    }
    c.check(
        worst <= 1e-9,
        format!("noiseless recovery, 100 cases: worst relative error {worst:.2e}"),
    );
    c.check(
        worst_scaling <= 1e-9,
        format!("scaling covariance and singularity invariance: worst {worst_scaling:.2e}"),
    );

    let mut mismatches = 0;
    let trials = 60;
    for _ in 0..trials {
        let n = rng.random_range(12..=60usize);
        let cut = rng.random_range(4..n - 4);
        let (s1, s2) = (rng.random_range(-0.02..0.0), rng.random_range(-0.02..0.0));
        let mut y = 5.0;
        let pairs: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                y += if i < cut { s1 } else { s2 } * 2.0;
                (
                    1700.0 + 2.0 * i as f64,
                    1.0 / (y * (1.0 + rng.random_range(-0.02..0.02))),
                )
            })
            .collect();
        let s = series(&pairs);
        let max_segments = rng.random_range(1..=3usize);
        let Ok(seg) = fit_segmented(&s, max_segments, 4, FitOptions::default()) else {
            continue;
        };
        let t: Vec<f64> = s.years().collect();
        let yv: Vec<f64> = s.values().map(|v| 1.0 / v).collect();
        let w = vec![1.0; n];
        let cands: Vec<(f64, usize)> = (1..=max_segments)
            .map(|m| {
                (
                    oracle_bic(enumerate_best_sse(&t, &yv, &w, m, 4), &t, &yv, &w, m),
                    parameter_count(m),
                )
            })
            .collect();
        let chosen = oracle_select(&cands);
        let same = seg.segment_count() == chosen + 1
            && (seg.bic - cands[chosen].0).abs() <= 1e-9 * cands[chosen].0.abs().max(1.0)
            && cands
                .iter()
                .zip(&seg.bic_by_count)
                .all(|(o, b)| (o.0 - b).abs() <= 1e-9 * o.0.abs().max(1.0));
        if !same {
            mismatches += 1;
        }
    }
    c.check(mismatches == 0, format!("segmentation BIC vs exhaustive enumeration: {mismatches} mismatches in {trials} series"));

    for family in FAMILIES {
        let cases = grid(family);
        let hits = cases
            .iter()
            .filter(|p| {
                family.matches(classify(&series(&generate(family, **p)), 3).unwrap().winner)
            })
            .count();
        c.check(
            hits == cases.len(),
            format!("{family:?} noiseless grid: {hits}/{}", cases.len()),
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_2026);
    for family in FAMILIES {
        let hits = (0..200)
            .filter(|_| {
                family.matches(
                    classify(&series(&noisy_trial(family, &mut rng)), 3)
                        .unwrap()
                        .winner,
                )
            })
            .count();
        c.check(
            hits >= 180,
            format!("{family:?} at 5% lognormal noise: {hits}/200 (needs 180)"),
        );
    }
    c
}

fn main() {
    let criteria = [
        world_population(),
        africa(),
        western_europe(),
        world_gdp(),
        properties(),
    ];
    let mut all = true;
    for (i, c) in criteria.iter().enumerate() {
        let ok = c.passed();
        all &= ok;
        println!(
            "{} criterion {}: {}",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            c.title
        );
        for (ok, detail) in &c.checks {
            println!("    [{}] {detail}", if *ok { " ok " } else { "FAIL" });
        }
    }
    if !all {
        std::process::exit(1);
    }
}
