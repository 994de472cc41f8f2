//! Reference transport solvers for arbitrary ground matrices: an exact
//! min-cost flow on quantized masses and the entropic (Sinkhorn) baseline.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::exact::{fast_loss, Geometry};
use crate::histogram::CircularHistogram;
use crate::metric::{build_ground_matrix, build_line_matrix, GroundMatrix, GroundMetricSpec};

/// Default number of mass units per distribution.
pub const DEFAULT_QUANTIZATION: u64 = 1_000_000;

/// Coupling between two histograms and its cost under the ground matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    n: usize,
    flow: Vec<f64>,
    pub cost: f64,
}

impl TransportPlan {
    pub fn n_bins(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.flow[i * self.n + j]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.flow.chunks(self.n).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for row in self.flow.chunks(self.n) {
            for (o, v) in out.iter_mut().zip(row) {
                *o += v;
            }
        }
        out
    }

    /// `Σ flow[i][j] · d[i][j]`.
    pub fn cost_under(&self, d: &GroundMatrix) -> f64 {
        (0..self.n)
            .flat_map(|i| (0..self.n).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j) * d.get(i, j))
            .sum()
    }
}

/// Integer units per bin summing to exactly `units`, by largest remainder.
pub fn quantize(mass: &[f64], units: u64) -> Result<Vec<u64>> {
    let total: f64 = mass.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroTotalMass);
    }
    let scaled: Vec<f64> = mass.iter().map(|m| m / total * units as f64).collect();
    let mut q: Vec<u64> = scaled.iter().map(|v| v.floor() as u64).collect();
    let assigned: u64 = q.iter().sum();
    let mut order: Vec<usize> = (0..mass.len()).collect();
    if assigned <= units {
        order.sort_by(|&a, &b| {
            let (ra, rb) = (scaled[a] - scaled[a].floor(), scaled[b] - scaled[b].floor());
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        for &i in order.iter().cycle().take((units - assigned) as usize) {
            q[i] += 1;
        }
    } else {
        // floor overshoot only happens through rounding; trim smallest remainders
        order.sort_by(|&a, &b| {
            let (ra, rb) = (scaled[a] - scaled[a].floor(), scaled[b] - scaled[b].floor());
            ra.total_cmp(&rb).then(a.cmp(&b))
        });
        let mut excess = assigned - units;
        for &i in order.iter().cycle() {
            if excess == 0 {
                break;
            }
            if q[i] > 0 {
                q[i] -= 1;
                excess -= 1;
            }
        }
    }
    Ok(q)
}

/// Exact optimal plan for the instance quantized to `quantization` units per
/// side, by successive shortest augmenting paths with Dijkstra potentials.
pub fn mincost_exact(
    s: &CircularHistogram,
    t: &CircularHistogram,
    d: &GroundMatrix,
    quantization: u64,
) -> Result<TransportPlan> {
    let n = s.n_bins();
    for other in [t.n_bins(), d.n_bins()] {
        if other != n {
            return Err(Error::DimensionMismatch { left: n, right: other });
        }
    }
    if quantization < 100 {
        return Err(Error::InvalidParameter(format!(
            "quantization must be at least 100 units, got {quantization}"
        )));
    }
    let supply = quantize(s.mass(), quantization)?;
    let demand = quantize(t.mass(), quantization)?;
    let units = MinCostFlow::new(d, supply, demand).solve();
    let scale = quantization as f64;
    let mut cost_units = 0.0;
    for i in 0..n {
        for j in 0..n {
            cost_units += units[i * n + j] as f64 * d.get(i, j);
        }
    }
    Ok(TransportPlan {
        n,
        flow: units.iter().map(|&u| u as f64 / scale).collect(),
        cost: cost_units / scale,
    })
}

/// Residual network of the bipartite transportation instance. Nodes: the
/// source, `n` supply bins, `n` demand bins and the sink.
struct MinCostFlow<'a> {
    n: usize,
    d: &'a GroundMatrix,
    supply_left: Vec<u64>,
    demand_left: Vec<u64>,
    supplied: Vec<u64>,
    delivered: Vec<u64>,
    flow: Vec<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Node {
    Source,
    Supply(usize),
    Demand(usize),
    Sink,
}

impl<'a> MinCostFlow<'a> {
    fn new(d: &'a GroundMatrix, supply: Vec<u64>, demand: Vec<u64>) -> Self {
        let n = d.n_bins();
        Self {
            n,
            d,
            supply_left: supply,
            demand_left: demand,
            supplied: vec![0; n],
            delivered: vec![0; n],
            flow: vec![0; n * n],
        }
    }

    fn index(&self, v: Node) -> usize {
        match v {
            Node::Source => 0,
            Node::Supply(i) => 1 + i,
            Node::Demand(j) => 1 + self.n + j,
            Node::Sink => 1 + 2 * self.n,
        }
    }

    fn node(&self, k: usize) -> Node {
        let n = self.n;
        match k {
            0 => Node::Source,
            k if k <= n => Node::Supply(k - 1),
            k if k <= 2 * n => Node::Demand(k - 1 - n),
            _ => Node::Sink,
        }
    }

    /// Residual arcs leaving `v` as `(head, cost, capacity)`.
    fn arcs(&self, v: Node, out: &mut Vec<(Node, f64, u64)>) {
        out.clear();
        let n = self.n;
        match v {
            Node::Source => {
                for i in 0..n {
                    if self.supply_left[i] > 0 {
                        out.push((Node::Supply(i), 0.0, self.supply_left[i]));
                    }
                }
            }
            Node::Supply(i) => {
                if self.supplied[i] > 0 {
                    out.push((Node::Source, 0.0, self.supplied[i]));
                }
                for j in 0..n {
                    out.push((Node::Demand(j), self.d.get(i, j), u64::MAX));
                }
            }
            Node::Demand(j) => {
                for i in 0..n {
                    let f = self.flow[i * n + j];
                    if f > 0 {
                        out.push((Node::Supply(i), -self.d.get(i, j), f));
                    }
                }
                if self.demand_left[j] > 0 {
                    out.push((Node::Sink, 0.0, self.demand_left[j]));
                }
            }
            Node::Sink => {
                for j in 0..n {
                    if self.delivered[j] > 0 {
                        out.push((Node::Demand(j), 0.0, self.delivered[j]));
                    }
                }
            }
        }
    }

    fn solve(mut self) -> Vec<u64> {
        let v_count = 2 * self.n + 2;
        let mut potential = vec![0.0; v_count];
        let mut arcs = Vec::with_capacity(self.n + 1);
        let sink = self.index(Node::Sink);
        loop {
            // dense Dijkstra on reduced costs
            let mut dist = vec![f64::INFINITY; v_count];
            let mut parent: Vec<Option<(usize, u64)>> = vec![None; v_count];
            let mut done = vec![false; v_count];
            dist[0] = 0.0;
            loop {
                let mut u = usize::MAX;
                for k in 0..v_count {
                    if !done[k] && dist[k].is_finite() && (u == usize::MAX || dist[k] < dist[u]) {
                        u = k;
                    }
                }
                if u == usize::MAX {
                    break;
                }
                done[u] = true;
                self.arcs(self.node(u), &mut arcs);
                for &(head, cost, cap) in &arcs {
                    let w = self.index(head);
                    if done[w] {
                        continue;
                    }
                    let reduced = (cost + potential[u] - potential[w]).max(0.0);
                    let cand = dist[u] + reduced;
                    if cand < dist[w] {
                        dist[w] = cand;
                        parent[w] = Some((u, cap));
                    }
                }
            }
            if !dist[sink].is_finite() {
                break;
            }
            for k in 0..v_count {
                if dist[k].is_finite() {
                    potential[k] += dist[k];
                }
            }
            let mut push = u64::MAX;
            let mut k = sink;
            while let Some((u, cap)) = parent[k] {
                push = push.min(cap);
                k = u;
            }
            let mut k = sink;
            while let Some((u, _)) = parent[k] {
                self.apply(self.node(u), self.node(k), push);
                k = u;
            }
        }
        self.flow
    }

    fn apply(&mut self, from: Node, to: Node, units: u64) {
        let n = self.n;
        match (from, to) {
            (Node::Source, Node::Supply(i)) => {
                self.supply_left[i] -= units;
                self.supplied[i] += units;
            }
            (Node::Supply(i), Node::Source) => {
                self.supply_left[i] += units;
                self.supplied[i] -= units;
            }
            (Node::Supply(i), Node::Demand(j)) => self.flow[i * n + j] += units,
            (Node::Demand(j), Node::Supply(i)) => self.flow[i * n + j] -= units,
            (Node::Demand(j), Node::Sink) => {
                self.demand_left[j] -= units;
                self.delivered[j] += units;
            }
            (Node::Sink, Node::Demand(j)) => {
                self.demand_left[j] += units;
                self.delivered[j] -= units;
            }
            _ => unreachable!("no such residual arc"),
        }
    }
}

/// Entropic-regularization settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkhornOptions {
    pub reg: f64,
    pub max_iter: usize,
    /// Stop once the ℓ1 marginal error drops below this.
    pub marginal_tol: f64,
    pub log_domain: bool,
}

impl SinkhornOptions {
    /// `reg = 0.1·max(D)`, 10⁴ iterations, tolerance 1e−9, log-domain.
    pub fn for_matrix(d: &GroundMatrix) -> Self {
        Self { reg: 0.1 * d.max(), max_iter: 10_000, marginal_tol: 1e-9, log_domain: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SinkhornResult {
    /// `cost` is the transport part `⟨plan, D⟩` only.
    pub plan: TransportPlan,
    pub iterations: usize,
    pub converged: bool,
    pub marginal_error: f64,
}

/// Alternating marginal scaling on the Gibbs kernel `exp(−D/reg)`.
///
/// The plain-kernel variant refuses `reg < 0.05·max(D)` and reports
/// [`Error::NumericalUnderflow`] when a kernel row vanishes.
pub fn sinkhorn(
    s: &CircularHistogram,
    t: &CircularHistogram,
    d: &GroundMatrix,
    opts: &SinkhornOptions,
) -> Result<SinkhornResult> {
    let n = s.n_bins();
    for other in [t.n_bins(), d.n_bins()] {
        if other != n {
            return Err(Error::DimensionMismatch { left: n, right: other });
        }
    }
    if !(opts.reg > 0.0 && opts.reg.is_finite()) {
        return Err(Error::InvalidParameter(format!("reg must be positive, got {}", opts.reg)));
    }
    if opts.log_domain {
        Ok(sinkhorn_log(s.mass(), t.mass(), d, opts))
    } else {
        sinkhorn_kernel(s.mass(), t.mass(), d, opts)
    }
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn sinkhorn_log(a: &[f64], b: &[f64], d: &GroundMatrix, opts: &SinkhornOptions) -> SinkhornResult {
    let n = a.len();
    let reg = opts.reg;
    let log_a: Vec<f64> = a.iter().map(|v| v.ln()).collect();
    let log_b: Vec<f64> = b.iter().map(|v| v.ln()).collect();
    let mut f = vec![0.0; n];
    let mut g = vec![0.0; n];
    let mut iterations = 0;
    let mut error = f64::INFINITY;
    let plan_entry = |f: &[f64], g: &[f64], i: usize, j: usize| ((f[i] + g[j] - d.get(i, j)) / reg).exp();

    while iterations < opts.max_iter {
        iterations += 1;
        for j in 0..n {
            g[j] = if b[j] > 0.0 {
                reg * (log_b[j] - log_sum_exp((0..n).map(|i| (f[i] - d.get(i, j)) / reg)))
            } else {
                f64::NEG_INFINITY
            };
        }
        for i in 0..n {
            f[i] = if a[i] > 0.0 {
                reg * (log_a[i] - log_sum_exp((0..n).map(|j| (g[j] - d.get(i, j)) / reg)))
            } else {
                f64::NEG_INFINITY
            };
        }
        // rows are exact after the f update; measure the columns
        error = (0..n)
            .map(|j| ((0..n).map(|i| plan_entry(&f, &g, i, j)).sum::<f64>() - b[j]).abs())
            .sum();
        if error < opts.marginal_tol {
            break;
        }
    }
    let flow: Vec<f64> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| plan_entry(&f, &g, i, j))
        .collect();
    finish(n, flow, d, iterations, error, opts)
}

fn sinkhorn_kernel(a: &[f64], b: &[f64], d: &GroundMatrix, opts: &SinkhornOptions) -> Result<SinkhornResult> {
    let n = a.len();
    if opts.reg < 0.05 * d.max() {
        return Err(Error::NumericalUnderflow(opts.reg));
    }
    let kernel: Vec<f64> = d.rows().flatten().map(|c| (-c / opts.reg).exp()).collect();
    let k = |i: usize, j: usize| kernel[i * n + j];
    let mut u = vec![1.0; n];
    let mut v = vec![1.0; n];
    let mut iterations = 0;
    let mut error = f64::INFINITY;
    while iterations < opts.max_iter {
        iterations += 1;
        for j in 0..n {
            let kt_u: f64 = (0..n).map(|i| k(i, j) * u[i]).sum();
            if kt_u == 0.0 && b[j] > 0.0 {
                return Err(Error::NumericalUnderflow(opts.reg));
            }
            v[j] = if b[j] > 0.0 { b[j] / kt_u } else { 0.0 };
        }
        for i in 0..n {
            let k_v: f64 = (0..n).map(|j| k(i, j) * v[j]).sum();
            if k_v == 0.0 && a[i] > 0.0 {
                return Err(Error::NumericalUnderflow(opts.reg));
            }
            u[i] = if a[i] > 0.0 { a[i] / k_v } else { 0.0 };
        }
        error = (0..n)
            .map(|j| ((0..n).map(|i| u[i] * k(i, j) * v[j]).sum::<f64>() - b[j]).abs())
            .sum();
        if error < opts.marginal_tol {
            break;
        }
    }
    let flow = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| u[i] * k(i, j) * v[j])
        .collect();
    Ok(finish(n, flow, d, iterations, error, opts))
}

fn finish(n: usize, flow: Vec<f64>, d: &GroundMatrix, iterations: usize, error: f64, opts: &SinkhornOptions) -> SinkhornResult {
    let mut plan = TransportPlan { n, flow, cost: 0.0 };
    plan.cost = plan.cost_under(d);
    SinkhornResult { plan, iterations, converged: error < opts.marginal_tol, marginal_error: error }
}

/// Fast solver vs. exact oracle vs. Sinkhorn on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    /// `None` when no fast exact solver covers the metric.
    pub fast: Option<f64>,
    pub oracle: f64,
    pub sinkhorn: f64,
    pub fast_abs_gap: Option<f64>,
    pub fast_rel_gap: Option<f64>,
    pub sinkhorn_abs_gap: f64,
    pub sinkhorn_rel_gap: f64,
    pub fast_time: Option<Duration>,
    pub oracle_time: Duration,
    pub sinkhorn_time: Duration,
}

pub fn compare(
    s: &CircularHistogram,
    t: &CircularHistogram,
    spec: &GroundMetricSpec,
    geometry: Geometry,
    m: u64,
) -> Result<ComparisonReport> {
    let d = match geometry {
        Geometry::Circle => build_ground_matrix(spec, s.n_bins())?,
        Geometry::Line => build_line_matrix(spec, s.n_bins())?,
    };
    let clock = Instant::now();
    let fast = fast_loss(s, t, spec, geometry, m)?.map(|r| r.value);
    let fast_time = fast.map(|_| clock.elapsed());

    let clock = Instant::now();
    let oracle = mincost_exact(s, t, &d, m)?.cost;
    let oracle_time = clock.elapsed();

    let clock = Instant::now();
    let sinkhorn = sinkhorn(s, t, &d, &SinkhornOptions::for_matrix(&d))?.plan.cost;
    let sinkhorn_time = clock.elapsed();

    let rel = |gap: f64| gap / oracle.abs().max(f64::MIN_POSITIVE);
    let fast_abs_gap = fast.map(|f| (f - oracle).abs());
    Ok(ComparisonReport {
        fast,
        oracle,
        sinkhorn,
        fast_abs_gap,
        fast_rel_gap: fast_abs_gap.map(rel),
        sinkhorn_abs_gap: (sinkhorn - oracle).abs(),
        sinkhorn_rel_gap: rel((sinkhorn - oracle).abs()),
        fast_time,
        oracle_time,
        sinkhorn_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smoothing::one_hot;

    fn h(v: &[f64]) -> CircularHistogram {
        CircularHistogram::new(v.to_vec()).unwrap()
    }

    /// Brute force over the 3×3 transportation polytope: the free entries
    /// `x00, x01, x10, x11` on a fine grid, the rest fixed by the marginals.
    fn enumerate_3x3(a: &[f64], b: &[f64], d: &GroundMatrix) -> f64 {
        let steps = 40;
        let grid = |k: usize| k as f64 / steps as f64;
        let mut best = f64::INFINITY;
        for p in 0..=steps {
            for q in 0..=steps {
                for r in 0..=steps {
                    for u in 0..=steps {
                        let x = [
                            [grid(p), grid(q), a[0] - grid(p) - grid(q)],
                            [grid(r), grid(u), a[1] - grid(r) - grid(u)],
                            [
                                b[0] - grid(p) - grid(r),
                                b[1] - grid(q) - grid(u),
                                0.0,
                            ],
                        ];
                        let mut x = x;
                        x[2][2] = a[2] - x[2][0] - x[2][1];
                        if x.iter().flatten().any(|v| *v < -1e-12) {
                            continue;
                        }
                        if (x[0][2] + x[1][2] + x[2][2] - b[2]).abs() > 1e-9 {
                            continue;
                        }
                        let c: f64 = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| x[i][j] * d.get(i, j)).sum();
                        best = best.min(c);
                    }
                }
            }
        }
        best
    }

    #[test]
    fn quantization_is_exact_and_repaired() {
        assert_eq!(quantize(&[0.5, 0.5], 100).unwrap(), vec![50, 50]);
        let q = quantize(&[1.0 / 3.0; 3], 100).unwrap();
        assert_eq!(q.iter().sum::<u64>(), 100);
        assert_eq!(q, vec![34, 33, 33]);
        let q = quantize(&[0.07, 0.93], 1_000_000).unwrap();
        assert_eq!(q, vec![70_000, 930_000]);
        assert_eq!(quantize(&[0.0, 0.0], 100), Err(Error::ZeroTotalMass));
    }

    #[test]
    fn forced_one_hot_plan() {
        let d = build_ground_matrix(&GroundMetricSpec::Power(2.0), 6).unwrap();
        let s = one_hot(6, 1, 1.0).unwrap();
        let t = one_hot(6, 4, 1.0).unwrap();
        let plan = mincost_exact(&s, &t, &d, 1000).unwrap();
        assert_eq!(plan.cost, d.get(1, 4));
        assert_eq!(plan.get(1, 4), 1.0);
    }

    #[test]
    fn identical_histograms_stay_put() {
        let d = build_ground_matrix(&GroundMetricSpec::ArcLength, 5).unwrap();
        let s = h(&[0.1, 0.2, 0.3, 0.15, 0.25]);
        let plan = mincost_exact(&s, &s, &d, 1000).unwrap();
        assert_eq!(plan.cost, 0.0);
        for i in 0..5 {
            assert!((plan.get(i, i) - s.mass()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn three_bin_instance_matches_enumeration() {
        let d = build_ground_matrix(&GroundMetricSpec::ArcLength, 3).unwrap();
        let (a, b) = ([0.5, 0.5, 0.0], [0.0, 0.5, 0.5]);
        let brute = enumerate_3x3(&a, &b, &d);
        assert!((brute - 0.5).abs() < 1e-12);
        let plan = mincost_exact(&h(&a), &h(&b), &d, DEFAULT_QUANTIZATION).unwrap();
        assert!((plan.cost - brute).abs() < 1e-12);

        let d2 = build_ground_matrix(&GroundMetricSpec::Power(2.0), 3).unwrap();
        let (a, b) = ([0.2, 0.45, 0.35], [0.6, 0.1, 0.3]);
        let brute = enumerate_3x3(&a, &b, &d2);
        let plan = mincost_exact(&h(&a), &h(&b), &d2, DEFAULT_QUANTIZATION).unwrap();
        assert!((plan.cost - brute).abs() < 1e-9, "{} vs {brute}", plan.cost);
    }

    #[test]
    fn plan_marginals_are_exact() {
        let d = build_ground_matrix(&GroundMetricSpec::Chord, 7).unwrap();
        let s = h(&[0.11, 0.2, 0.09, 0.3, 0.1, 0.05, 0.15]);
        let t = h(&[0.3, 0.01, 0.19, 0.1, 0.2, 0.15, 0.05]);
        let plan = mincost_exact(&s, &t, &d, 1000).unwrap();
        for (got, want) in plan.row_sums().iter().zip(s.mass()) {
            assert!((got - want).abs() < 1e-12);
        }
        for (got, want) in plan.col_sums().iter().zip(t.mass()) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!((plan.cost - plan.cost_under(&d)).abs() < 1e-12);
    }

    #[test]
    fn one_hot_target_plan_uses_only_that_column() {
        let d = build_ground_matrix(&GroundMetricSpec::Huber(2.0), 9).unwrap();
        let s = h(&[0.1, 0.05, 0.2, 0.05, 0.1, 0.1, 0.15, 0.05, 0.2]);
        let t = one_hot(9, 3, 1.0).unwrap();
        let plan = mincost_exact(&s, &t, &d, 1000).unwrap();
        for i in 0..9 {
            for j in 0..9 {
                if j != 3 {
                    assert_eq!(plan.get(i, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn mincost_rejects_bad_inputs() {
        let d = build_ground_matrix(&GroundMetricSpec::ArcLength, 3).unwrap();
        let s = h(&[0.5, 0.5]);
        assert!(matches!(mincost_exact(&s, &s, &d, 1000), Err(Error::DimensionMismatch { .. })));
        let s = h(&[0.5, 0.5, 0.0]);
        assert!(mincost_exact(&s, &s, &d, 10).is_err());
    }

    #[test]
    fn sinkhorn_on_the_three_bin_instance() {
        let d = build_ground_matrix(&GroundMetricSpec::ArcLength, 3).unwrap();
        let s = h(&[0.5, 0.5, 0.0]);
        let t = h(&[0.0, 0.5, 0.5]);
        let opts = SinkhornOptions { reg: 0.01, ..SinkhornOptions::for_matrix(&d) };
        let r = sinkhorn(&s, &t, &d, &opts).unwrap();
        assert!((r.plan.cost - 0.5).abs() < 0.02);
        assert!(r.plan.cost >= 0.5 - 1e-9);
    }

    #[test]
    fn sinkhorn_self_transport_shrinks_with_reg() {
        let d = build_ground_matrix(&GroundMetricSpec::ArcLength, 6).unwrap();
        let s = h(&[0.1, 0.2, 0.3, 0.15, 0.15, 0.1]);
        let costs: Vec<f64> = [1.0, 0.1, 0.01]
            .iter()
            .map(|&reg| {
                let opts = SinkhornOptions { reg, ..SinkhornOptions::for_matrix(&d) };
                sinkhorn(&s, &s, &d, &opts).unwrap().plan.cost
            })
            .collect();
        assert!(costs[0] > costs[1] && costs[1] > costs[2]);
        assert!(costs[2] < 1e-6);
    }

    #[test]
    fn kernel_and_log_domain_agree() {
        let d = build_ground_matrix(&GroundMetricSpec::Power(2.0), 5).unwrap();
        let s = h(&[0.1, 0.2, 0.3, 0.15, 0.25]);
        let t = h(&[0.3, 0.1, 0.1, 0.25, 0.25]);
        let log = SinkhornOptions::for_matrix(&d);
        let plain = SinkhornOptions { log_domain: false, ..log };
        let a = sinkhorn(&s, &t, &d, &log).unwrap();
        let b = sinkhorn(&s, &t, &d, &plain).unwrap();
        assert!((a.plan.cost - b.plan.cost).abs() < 1e-9);
        let tiny = SinkhornOptions { reg: 0.01, ..plain };
        assert_eq!(sinkhorn(&s, &t, &d, &tiny), Err(Error::NumericalUnderflow(0.01)));
    }

    #[test]
    fn compare_reports_small_gaps() {
        let s = h(&[0.25, 0.05, 0.2, 0.1, 0.0, 0.15, 0.2, 0.05]);
        let t = h(&[0.05, 0.3, 0.05, 0.2, 0.1, 0.1, 0.0, 0.2]);
        let r = compare(&s, &t, &GroundMetricSpec::ArcLength, Geometry::Circle, DEFAULT_QUANTIZATION).unwrap();
        assert!(r.fast_abs_gap.unwrap() < 1e-9);
        assert!(r.sinkhorn >= r.oracle - 1e-9);
        let r = compare(&s, &t, &GroundMetricSpec::Chord, Geometry::Circle, DEFAULT_QUANTIZATION).unwrap();
        assert!(r.fast.is_none());
    }
}
