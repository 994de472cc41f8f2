//! Randomized oracle-equivalence suites behind `circwass verify`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::exact::{circular_convex, circular_linear, l1_step, line_ot, onehot_loss};
use crate::histogram::CircularHistogram;
use crate::metric::{build_ground_matrix, build_line_matrix, eval_cost, GroundMetricSpec};
use crate::oracle::{mincost_exact, quantize};
use crate::smoothing::one_hot;

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "CIRCWASS_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyConfig {
    pub trials: usize,
    pub min_n: usize,
    pub max_n: usize,
    pub seed: u64,
    /// Masses are multiples of `1/grid`.
    pub grid: u64,
    /// Oracle quantization and convex search resolution.
    pub m: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { trials: 200, min_n: 2, max_n: 16, seed: 42, grid: 100, m: 1_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: String,
    pub instances: usize,
    pub failures: usize,
    /// Largest observed gap divided by its tolerance.
    pub worst_ratio: f64,
    pub max_gap: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Random histogram with masses on the `1/grid` lattice. Roughly a third of
/// the draws are sparse so that empty bins and ties show up.
pub fn random_grid_histogram(rng: &mut impl Rng, n: usize, grid: u64) -> CircularHistogram {
    let sparse = rng.gen_bool(0.3);
    let mut weights: Vec<f64> = (0..n)
        .map(|_| {
            let w: f64 = rng.gen();
            if sparse && rng.gen_bool(0.5) {
                0.0
            } else {
                w * w * w
            }
        })
        .collect();
    if weights.iter().all(|w| *w == 0.0) {
        weights[rng.gen_range(0..n)] = 1.0;
    }
    let units = quantize(&weights, grid).expect("positive weights");
    let mass = units.iter().map(|&u| u as f64 / grid as f64).collect();
    CircularHistogram::new(mass).expect("lattice masses sum to one")
}

/// Random histogram with continuous masses.
pub fn random_histogram(rng: &mut impl Rng, n: usize) -> CircularHistogram {
    let w: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 1e-3).collect();
    CircularHistogram::normalize(&w).expect("positive weights")
}

/// Deterministic per-instance stream, independent of scheduling order.
pub fn instance_rng(seed: u64, suite: usize, n: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((suite as u64) << 48) | ((n as u64) << 24) | trial as u64);
    rng
}

type Check = fn(&CircularHistogram, &CircularHistogram, &GroundMetricSpec, u64, &mut ChaCha8Rng) -> Result<(f64, f64)>;

struct Suite {
    name: String,
    spec: GroundMetricSpec,
    check: Check,
}

/// Gap to the oracle and the tolerance for one instance.
fn check_linear(s: &CircularHistogram, t: &CircularHistogram, spec: &GroundMetricSpec, m: u64, _: &mut ChaCha8Rng) -> Result<(f64, f64)> {
    let d = build_ground_matrix(spec, s.n_bins())?;
    let gap = (circular_linear(s, t)?.value - mincost_exact(s, t, &d, m)?.cost).abs();
    Ok((gap, 1e-9))
}

fn check_convex(s: &CircularHistogram, t: &CircularHistogram, spec: &GroundMetricSpec, m: u64, _: &mut ChaCha8Rng) -> Result<(f64, f64)> {
    let n = s.n_bins();
    let d = build_ground_matrix(spec, n)?;
    let fast = circular_convex(s, t, spec, m)?.value;
    let gap = (fast - mincost_exact(s, t, &d, m)?.cost).abs();
    Ok((gap, eval_cost(spec, (n / 2) as f64, n)? * 4.0 / m as f64))
}

fn check_step(s: &CircularHistogram, t: &CircularHistogram, spec: &GroundMetricSpec, m: u64, _: &mut ChaCha8Rng) -> Result<(f64, f64)> {
    let d = build_ground_matrix(spec, s.n_bins())?;
    let gap = (l1_step(s, t)?.value - mincost_exact(s, t, &d, m)?.cost).abs();
    Ok((gap, 1e-9))
}

fn check_line(s: &CircularHistogram, t: &CircularHistogram, spec: &GroundMetricSpec, m: u64, _: &mut ChaCha8Rng) -> Result<(f64, f64)> {
    let n = s.n_bins();
    let d = build_line_matrix(spec, n)?;
    let gap = (line_ot(s, t, spec)?.value - mincost_exact(s, t, &d, m)?.cost).abs();
    Ok((gap, 1e-9 * eval_cost(spec, (n - 1) as f64, n)?.max(1.0)))
}

fn check_onehot(s: &CircularHistogram, _: &CircularHistogram, spec: &GroundMetricSpec, m: u64, rng: &mut ChaCha8Rng) -> Result<(f64, f64)> {
    let n = s.n_bins();
    let j_star = rng.gen_range(0..n);
    let t = one_hot(n, j_star, 1.0)?;
    let gap = (circular_convex(s, &t, spec, m)?.value - onehot_loss(s, j_star, spec)?.value).abs();
    Ok((gap, 1e-6))
}

fn suites() -> Vec<Suite> {
    use GroundMetricSpec::*;
    let mut out = vec![Suite { name: "circle linear".into(), spec: ArcLength, check: check_linear }];
    for spec in [Power(2.0), Power(3.0), Huber(1.0), Huber(2.0), Huber(5.0)] {
        out.push(Suite { name: format!("circle convex {spec}"), spec, check: check_convex });
    }
    out.push(Suite { name: "step l1".into(), spec: Step, check: check_step });
    for spec in [ArcLength, Power(2.0), Huber(5.0)] {
        out.push(Suite { name: format!("one-hot {spec}"), spec, check: check_onehot });
    }
    for spec in [ArcLength, Power(2.0)] {
        out.push(Suite { name: format!("line {spec}"), spec, check: check_line });
    }
    out
}

fn run_suite(idx: usize, suite: &Suite, cfg: &VerifyConfig) -> Result<SuiteReport> {
    let jobs: Vec<(usize, usize)> = (cfg.min_n..=cfg.max_n)
        .flat_map(|n| (0..cfg.trials).map(move |trial| (n, trial)))
        .collect();
    let outcomes = jobs
        .par_iter()
        .map(|&(n, trial)| {
            let mut rng = instance_rng(cfg.seed, idx, n, trial);
            let s = random_grid_histogram(&mut rng, n, cfg.grid);
            let t = random_grid_histogram(&mut rng, n, cfg.grid);
            (suite.check)(&s, &t, &suite.spec, cfg.m, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = SuiteReport {
        name: suite.name.clone(),
        instances: outcomes.len(),
        failures: 0,
        worst_ratio: 0.0,
        max_gap: 0.0,
    };
    for (gap, tol) in outcomes {
        if !(gap <= tol) {
            report.failures += 1;
        }
        report.max_gap = report.max_gap.max(gap);
        report.worst_ratio = report.worst_ratio.max(gap / tol);
    }
    Ok(report)
}

/// Runs every suite. Results are identical for any worker count.
pub fn run_verification(cfg: &VerifyConfig) -> Result<Vec<SuiteReport>> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(workers) = std::env::var(WORKERS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        builder = builder.num_threads(workers);
    }
    let pool = builder
        .build()
        .map_err(|e| crate::error::Error::InvalidParameter(e.to_string()))?;
    pool.install(|| {
        suites()
            .iter()
            .enumerate()
            .map(|(idx, suite)| run_suite(idx, suite, cfg))
            .collect()
    })
}
