//! Acceptance suite: runs every criterion at its stated size and tolerance,
//! prints one PASS/FAIL line per criterion and exits non-zero on any failure.

use std::process::ExitCode;
use std::time::Instant;

use hds::bench::experiment::run_experiment;
use hds::bench::stats::format_table;
use hds::bench::{summarize, ExperimentConfig, FunctionId};
use hds::de::{differential_evolution, make_init_population, DeConfig, InitMethod};
use hds::numerics::{chi2_cdf, chi2_quantile, RngStream, SobolEngine};
use hds::sampler::{
    allocate_samples, hds_generate, sample_ellipsoid, Bounds, EllipsoidModel, HdsConfig,
};
use hds::{centered_l2, l2_star, Frame, SampleMatrix};
use statrs::distribution::{ChiSquared, ContinuousCDF};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    for &n in &[1usize, 64, 1000] {
        for &d in &[1usize, 2, 10, 50] {
            let bounds = Bounds::uniform(d, -100.0, 100.0).unwrap();
            let cfg = HdsConfig::new(n, bounds.clone()).with_seed(n as u64 * 31 + d as u64);
            let a = hds_generate(&cfg).unwrap();
            let b = hds_generate(&cfg).unwrap();
            let ok =
                a.nrows() == n && a.ncols() == d && a.rows().all(|r| bounds.contains(r)) && a == b;
            if !ok {
                failures.push(format!("N={n} D={d}"));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        failures.is_empty() && secs < 60.0,
        format!("12 (N, D) cells, {secs:.1} s, failures: {failures:?}"),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let d = 100;
    let mut detail = Vec::new();
    let mut pass = true;
    for &n in &[100usize, 1000] {
        // Baseline without the all-zeros first point: at D=100 that corner
        // alone forces L2* = 1/N and CL2 ~ 1.5^50/N. The raw sequence is
        // reported alongside.
        let mut engine = SobolEngine::new(d).unwrap();
        let raw = engine.points(n).unwrap();
        engine.seek(1).unwrap();
        let sobol = engine.points(n).unwrap();
        let (s_cl2, s_l2) = (centered_l2(&sobol).unwrap(), l2_star(&sobol).unwrap());
        let (r_cl2, r_l2) = (centered_l2(&raw).unwrap(), l2_star(&raw).unwrap());
        let (mut cl2_wins, mut l2_wins) = (0, 0);
        let (mut h_cl2_sum, mut h_l2_sum) = (0.0, 0.0);
        for seed in 0..10 {
            let h = hds_generate(
                &HdsConfig::new(n, Bounds::unit(d))
                    .with_seed(seed)
                    .with_normalize(true),
            )
            .unwrap();
            let (h_cl2, h_l2) = (centered_l2(&h).unwrap(), l2_star(&h).unwrap());
            cl2_wins += usize::from(h_cl2 < s_cl2);
            l2_wins += usize::from(h_l2 > s_l2);
            h_cl2_sum += h_cl2;
            h_l2_sum += h_l2;
        }
        pass &= cl2_wins >= 9 && l2_wins >= 9;
        detail.push(format!(
            "N={n}: CL2 HDS {:.4e} vs Sobol {s_cl2:.4e} ({cl2_wins}/10), L2* HDS {:.4e} vs Sobol {s_l2:.4e} ({l2_wins}/10) [with origin: CL2 {r_cl2:.4e}, L2* {r_l2:.4e}]",
            h_cl2_sum / 10.0,
            h_l2_sum / 10.0
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        pass && secs < 300.0,
        format!("{}; {secs:.1} s", detail.join("; ")),
    )
}

// Textbook double sums over all (i, j), no symmetry or compensation.
fn naive_l2_star_sq(p: &[Vec<f64>]) -> f64 {
    let n = p.len() as f64;
    let d = p[0].len() as i32;
    let mut a = 0.0;
    for x in p {
        a += x.iter().map(|v| (1.0 - v * v) / 2.0).product::<f64>();
    }
    let mut b = 0.0;
    for x in p {
        for y in p {
            b += x
                .iter()
                .zip(y)
                .map(|(u, v)| 1.0 - u.max(*v))
                .product::<f64>();
        }
    }
    3f64.powi(-d) - 2.0 / n * a + b / (n * n)
}

fn naive_centered_l2_sq(p: &[Vec<f64>]) -> f64 {
    let n = p.len() as f64;
    let d = p[0].len() as i32;
    let mut a = 0.0;
    for x in p {
        a += x
            .iter()
            .map(|v| 1.0 + 0.5 * (v - 0.5).abs() - 0.5 * (v - 0.5).powi(2))
            .product::<f64>();
    }
    let mut b = 0.0;
    for x in p {
        for y in p {
            b += x
                .iter()
                .zip(y)
                .map(|(u, v)| {
                    1.0 + 0.5 * (u - 0.5).abs() + 0.5 * (v - 0.5).abs() - 0.5 * (u - v).abs()
                })
                .product::<f64>();
        }
    }
    (13.0f64 / 12.0).powi(d) - 2.0 / n * a + b / (n * n)
}

fn criterion_3() -> Outcome {
    let mut rng = RngStream::new(3);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = 1 + rng.index(256);
        let d = 1 + rng.index(10);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.uniform()).collect())
            .collect();
        let m = SampleMatrix::from_rows(&rows, Frame::Unit).unwrap();
        let e1 = (l2_star(&m).unwrap() - naive_l2_star_sq(&rows).max(0.0).sqrt()).abs();
        let e2 = (centered_l2(&m).unwrap() - naive_centered_l2_sq(&rows).max(0.0).sqrt()).abs();
        worst = worst.max(e1).max(e2);
    }
    outcome(
        worst <= 1e-10,
        format!("50 random matrices, max |difference| {worst:.2e}"),
    )
}

fn criterion_4() -> Outcome {
    let mut worst: f64 = 0.0;
    for &k in &[1u32, 2, 10, 100, 1000] {
        let oracle = ChiSquared::new(f64::from(k)).unwrap();
        for &alpha in &[0.01, 0.5, 0.9999] {
            let q = chi2_quantile(alpha, k).unwrap();
            worst = worst
                .max((chi2_cdf(q, k) - alpha).abs())
                .max((oracle.cdf(q) - alpha).abs());
        }
    }
    outcome(
        worst <= 1e-8,
        format!("15 (k, alpha) pairs, max round-trip error {worst:.2e}"),
    )
}

/// Two-sided one-sample KS p-value against U(0, 1), asymptotic series with
/// the Stephens small-sample correction.
fn ks_uniform_p(mut values: Vec<f64>) -> (f64, f64) {
    values.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    let mut stat: f64 = 0.0;
    for (i, v) in values.iter().enumerate() {
        stat = stat.max((i as f64 + 1.0) / n - v).max(v - i as f64 / n);
    }
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * stat;
    let mut p = 0.0;
    for k in 1..=100 {
        let k = f64::from(k);
        p += 2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp();
    }
    (stat, p.clamp(0.0, 1.0))
}

fn criterion_5() -> Outcome {
    let model = EllipsoidModel::axis_aligned(vec![0.5, 0.5], vec![1.0, 1.0]);
    let mut radial = SobolEngine::new(1).unwrap();
    let pts = sample_ellipsoid(&model, 4096, 1.0, &mut radial, &mut RngStream::new(5)).unwrap();
    let r2: Vec<f64> = pts
        .rows()
        .map(|r| (r[0] - 0.5).powi(2) + (r[1] - 0.5).powi(2))
        .collect();
    let (stat, p) = ks_uniform_p(r2);
    outcome(
        p > 0.01,
        format!("n=4096, KS statistic {stat:.2e}, p = {p:.4}"),
    )
}

fn mean_excess_kurtosis(m: &SampleMatrix) -> f64 {
    let n = m.nrows() as f64;
    let mean = m.mean();
    let mut total = 0.0;
    for j in 0..m.ncols() {
        let (mut m2, mut m4) = (0.0, 0.0);
        for r in m.rows() {
            let c = r[j] - mean[j];
            m2 += c * c;
            m4 += c * c * c * c;
        }
        m2 /= n;
        m4 /= n;
        total += m4 / (m2 * m2) - 3.0;
    }
    total / m.ncols() as f64
}

fn criterion_6() -> Outcome {
    let mut margins = Vec::new();
    for seed in 0..10 {
        let k100 = mean_excess_kurtosis(
            &hds_generate(
                &HdsConfig::new(10_000, Bounds::unit(100))
                    .with_seed(seed)
                    .with_normalize(true),
            )
            .unwrap(),
        );
        let k2 = mean_excess_kurtosis(
            &hds_generate(
                &HdsConfig::new(10_000, Bounds::unit(2))
                    .with_seed(seed)
                    .with_normalize(true),
            )
            .unwrap(),
        );
        margins.push((k2, k100));
    }
    let pass = margins.iter().all(|(k2, k100)| k100 > k2);
    let avg = |f: fn(&(f64, f64)) -> f64| margins.iter().map(f).sum::<f64>() / margins.len() as f64;
    let min_margin = margins
        .iter()
        .map(|(a, b)| b - a)
        .fold(f64::INFINITY, f64::min);
    outcome(
        pass,
        format!(
            "mean excess kurtosis D=2 {:.3}, D=100 {:.3}, smallest margin {min_margin:.3} over 10 seeds",
            avg(|m| m.0),
            avg(|m| m.1)
        ),
    )
}

fn criterion_7() -> Outcome {
    let bounds = Bounds::uniform(5, -100.0, 100.0).unwrap();
    let mut solved = 0;
    let mut monotone = true;
    for seed in 0..20 {
        // HDS start: the Sobol population contains the origin itself
        let pop = make_init_population(InitMethod::Hds, 64, &bounds, seed).unwrap();
        let out = differential_evolution(
            |x: &[f64]| x.iter().map(|v| v * v).sum(),
            &bounds,
            &pop,
            &DeConfig::default().with_seed(seed),
        )
        .unwrap();
        solved += usize::from(out.best_value < 1e-3);
        monotone &= out.history.windows(2).all(|w| w[1] <= w[0]);
    }
    outcome(
        solved >= 18 && monotone,
        format!("{solved}/20 seeds below 1e-3, trajectories non-increasing: {monotone}"),
    )
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let config = ExperimentConfig {
        functions: FunctionId::SHIFTED.to_vec(),
        dims: vec![10, 30],
        sizes: vec![64, 1000],
        trials: 15,
        base_seed: 0,
        ..ExperimentConfig::default()
    };
    let records = run_experiment(&config, 1).unwrap();
    let expected = config.functions.len() * 2 * 2 * 15 * 2;
    let summaries = match summarize(&records, 0) {
        Ok(s) => s,
        Err(e) => return outcome(false, format!("pairing failed: {e}")),
    };
    print!("{}", format_table(&summaries));
    let complete = records.len() == expected
        && summaries.len() == 4
        && summaries.iter().all(|s| {
            s.pairs == config.functions.len() * 15
                && [
                    s.hds_gm_error,
                    s.sobol_gm_error,
                    s.ratio,
                    s.p_value,
                    s.ci95_low,
                    s.ci95_high,
                    s.runtime_ratio,
                ]
                .iter()
                .all(|v| v.is_finite())
        });
    let better = summaries.iter().filter(|s| s.ratio > 1.0).count();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        complete && better >= 1 && secs < 1800.0,
        format!(
            "{} records, {} cells, {better} with ratio > 1 (reference: 1.15 overall, 1.37 at N=1000 D=10), {secs:.0} s",
            records.len(),
            summaries.len()
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut rng = RngStream::new(9);
    let mut bad = 0;
    for _ in 0..10_000 {
        let k = 1 + rng.index(40);
        let mut counts: Vec<usize> = (0..k)
            .map(|_| {
                if rng.uniform() < 0.2 {
                    0
                } else {
                    rng.index(5000)
                }
            })
            .collect();
        if counts.iter().all(|&c| c == 0) {
            counts[0] = 1;
        }
        let total = rng.index(100_000);
        let a = allocate_samples(&counts, total);
        let ok = a.len() == k
            && a.iter().sum::<usize>() == total
            && counts.iter().zip(&a).all(|(c, n)| *c > 0 || *n == 0);
        bad += usize::from(!ok);
    }
    outcome(
        bad == 0,
        format!("10000 random instances, {bad} violations"),
    )
}

fn median_time(n: usize, d: usize) -> f64 {
    let mut times: Vec<f64> = (0..3)
        .map(|seed| {
            let start = Instant::now();
            hds_generate(&HdsConfig::new(n, Bounds::unit(d)).with_seed(seed)).unwrap();
            start.elapsed().as_secs_f64()
        })
        .collect();
    times.sort_by(f64::total_cmp);
    times[1]
}

fn criterion_10() -> Outcome {
    let by_d: Vec<f64> = [10, 50, 100]
        .iter()
        .map(|&d| median_time(1000, d))
        .collect();
    let by_n: Vec<f64> = [1_000, 10_000, 100_000]
        .iter()
        .map(|&n| median_time(n, 10))
        .collect();
    let trend = |t: &[f64]| t.windows(2).all(|w| w[1] * 2.0 >= w[0]);
    outcome(
        trend(&by_d) && trend(&by_n),
        format!("D = 10, 50, 100 (N=1000): {by_d:.3?} s; N = 1e3, 1e4, 1e5 (D=10): {by_n:.3?} s"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("pipeline invariants", criterion_1),
        ("discrepancy ordering at D=100", criterion_2),
        ("discrepancy vs naive oracles", criterion_3),
        ("chi-squared quantile round trip", criterion_4),
        ("radial uniformity (KS)", criterion_5),
        ("marginal kurtosis grows with D", criterion_6),
        ("DE sanity on sphere", criterion_7),
        ("directional HDS vs Sobol comparison", criterion_8),
        ("allocation conservation", criterion_9),
        ("generation-time scaling trend", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        failed += usize::from(!o.pass);
        println!(
            "{} criterion {}: {name}: {} [{:.1} s]",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
