//! Per-call timings behind `circwass bench`.

use std::hint::black_box;
use std::time::Instant;

use crate::error::Result;
use crate::exact::{fast_loss, Geometry, DEFAULT_RESOLUTION};
use crate::metric::{build_ground_matrix, GroundMetricSpec};
use crate::oracle::{sinkhorn, SinkhornOptions};
use crate::verify::{instance_rng, random_histogram};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub solver: String,
    pub mean_ns: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub spec: GroundMetricSpec,
    pub sizes: Vec<usize>,
    pub seed: u64,
    /// Also time log-domain Sinkhorn for sizes up to this.
    pub sinkhorn_max_n: usize,
    /// Approximate number of bins processed per size; sets the repetitions.
    pub work_per_size: usize,
}

impl BenchConfig {
    pub fn new(spec: GroundMetricSpec, sizes: Vec<usize>) -> Self {
        Self { spec, sizes, seed: 42, sinkhorn_max_n: 512, work_per_size: 1 << 23 }
    }
}

fn solver_name(spec: &GroundMetricSpec) -> &'static str {
    match spec {
        GroundMetricSpec::ArcLength => "circular_linear",
        GroundMetricSpec::Power(_) | GroundMetricSpec::Huber(_) => "circular_convex",
        GroundMetricSpec::Step => "l1_step",
        _ => "none",
    }
}

/// Random instances per size; calls cycle through them so that timings do
/// not hinge on one input.
const INSTANCES: usize = 4;

/// Mean wall time per call of the fast circular solver for each size, plus
/// Sinkhorn for small sizes.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for (k, &n) in cfg.sizes.iter().enumerate() {
        let mut rng = instance_rng(cfg.seed, 0, n, k);
        let pairs: Vec<_> = (0..INSTANCES)
            .map(|_| (random_histogram(&mut rng, n), random_histogram(&mut rng, n)))
            .collect();
        let (s, t) = &pairs[0];
        if fast_loss(s, t, &cfg.spec, Geometry::Circle, DEFAULT_RESOLUTION)?.is_some() {
            let reps = (cfg.work_per_size / n).clamp(3, 100_000);
            let mut next = 0;
            let mean_ns = time_mean(reps, || {
                let (s, t) = &pairs[next % INSTANCES];
                next += 1;
                black_box(fast_loss(black_box(s), black_box(t), &cfg.spec, Geometry::Circle, DEFAULT_RESOLUTION))
            });
            rows.push(BenchRow { n, solver: solver_name(&cfg.spec).into(), mean_ns });
        }
        if n <= cfg.sinkhorn_max_n {
            let d = build_ground_matrix(&cfg.spec, n)?;
            let opts = SinkhornOptions::for_matrix(&d);
            let mean_ns = time_mean(1, || black_box(sinkhorn(s, t, &d, &opts)));
            rows.push(BenchRow { n, solver: "sinkhorn".into(), mean_ns });
        }
    }
    Ok(rows)
}

const BATCHES: usize = 5;

/// Mean time per call over the fastest of a few batches, which filters out
/// scheduler hiccups.
fn time_mean<T>(reps: usize, mut f: impl FnMut() -> T) -> f64 {
    black_box(f());
    let per_batch = reps.div_ceil(BATCHES);
    (0..BATCHES)
        .map(|_| {
            let clock = Instant::now();
            for _ in 0..per_batch {
                black_box(f());
            }
            clock.elapsed().as_nanos() as f64 / per_batch as f64
        })
        .fold(f64::INFINITY, f64::min)
}
