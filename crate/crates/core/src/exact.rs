//! Exact Wasserstein losses between histograms on the circle and the line.
//!
//! | Function | Ground cost | Time |
//! |----------|-------------|------|
//! | [`onehot_loss`] | any `f(d)` or matrix, one-hot target | O(N) |
//! | [`circular_linear`] | arc length | O(N) expected |
//! | [`circular_convex`] | convex increasing `f(d)` | O(N log M) |
//! | [`line_ot`] | `f(|i − j|)` on a line | O(N) |
//! | [`l1_step`] | `1[d ≠ 0]` | O(N) |
//!
//! Losses are computed on histograms as given; nothing is renormalized.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::histogram::CircularHistogram;
use crate::metric::{arc, eval_cost, GroundMetricSpec};

/// Default number of mass units `M` resolved by the convex shift search.
pub const DEFAULT_RESOLUTION: u64 = 1_000_000;

/// Loss value with the optimal transport shift and subgradient when known.
#[derive(Debug, Clone, PartialEq)]
pub struct LossResult {
    pub value: f64,
    pub shift: Option<f64>,
    pub gradient: Option<Vec<f64>>,
}

impl LossResult {
    fn value(value: f64) -> Self {
        Self { value, shift: None, gradient: None }
    }

    fn with_shift(value: f64, shift: f64) -> Self {
        Self { value, shift: Some(shift), gradient: None }
    }
}

/// Whether bins wrap around.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Geometry {
    #[default]
    Circle,
    Line,
}

fn same_size(s: &CircularHistogram, t: &CircularHistogram) -> Result<usize> {
    if s.n_bins() != t.n_bins() {
        return Err(Error::DimensionMismatch { left: s.n_bins(), right: t.n_bins() });
    }
    Ok(s.n_bins())
}

/// Cost of moving each bin to `j_star`.
fn costs_to(spec: &GroundMetricSpec, n: usize, j_star: usize) -> Result<Vec<f64>> {
    if j_star >= n {
        return Err(Error::IndexOutOfRange { index: j_star, n });
    }
    match spec {
        GroundMetricSpec::Custom(m) => {
            if m.n_bins() != n {
                return Err(Error::DimensionMismatch { left: n, right: m.n_bins() });
            }
            Ok((0..n).map(|i| m.get(i, j_star)).collect())
        }
        _ => (0..n).map(|i| eval_cost(spec, arc(i, j_star, n) as f64, n)).collect(),
    }
}

/// With a one-hot target every unit of mass must travel to `j_star`, so the
/// loss is `Σ_i s_i f(d(i, j*))`.
pub fn onehot_loss(s: &CircularHistogram, j_star: usize, spec: &GroundMetricSpec) -> Result<LossResult> {
    let weights = costs_to(spec, s.n_bins(), j_star)?;
    let value = s.mass().iter().zip(&weights).map(|(m, w)| m * w).sum();
    Ok(LossResult::value(value))
}

/// `∂L/∂s_i = f(d(i, j*))`, independent of `s`.
pub fn onehot_grad(s: &CircularHistogram, j_star: usize, spec: &GroundMetricSpec) -> Result<Vec<f64>> {
    costs_to(spec, s.n_bins(), j_star)
}

/// Running differences `φ_j = Σ_{i≤j} (s_i − t_i)`.
fn partial_differences(s: &[f64], t: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    s.iter()
        .zip(t)
        .map(|(a, b)| {
            acc += a - b;
            acc
        })
        .collect()
}

/// Reorders `values`.
fn lower_median(values: &mut [f64]) -> f64 {
    let mid = (values.len() - 1) / 2;
    let (_, m, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    *m
}

/// Circular 1-Wasserstein distance with arc-length cost:
/// `min_α Σ_j |φ_j − α|`, attained at the median of the `φ_j`.
///
/// The reported shift is the lower median; every value between the two
/// middle `φ_j` gives the same loss when `N` is even.
pub fn circular_linear(s: &CircularHistogram, t: &CircularHistogram) -> Result<LossResult> {
    same_size(s, t)?;
    let mut phi = partial_differences(s.mass(), t.mass());
    let alpha = lower_median(&mut phi);
    let value = phi.iter().map(|p| (p - alpha).abs()).sum();
    Ok(LossResult::with_shift(value, alpha))
}

/// Subgradient of [`circular_linear`] with respect to `s` at a fixed optimal
/// shift: `g[n] = Σ_{j≥n} sgn(φ_j − α)` with `sgn(0) = 0`.
///
/// For even `N` the shift is taken midway between the two middle values, so
/// each `φ_j` gets its own sign unless two of them tie.
pub fn circular_linear_subgrad(s: &CircularHistogram, t: &CircularHistogram) -> Result<Vec<f64>> {
    let n = same_size(s, t)?;
    let phi = partial_differences(s.mass(), t.mass());
    let mut sorted = phi.clone();
    sorted.sort_unstable_by(f64::total_cmp);
    let alpha = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    let mut grad = vec![0.0; n];
    let mut acc = 0.0;
    for j in (0..n).rev() {
        acc += match phi[j].partial_cmp(&alpha) {
            Some(Ordering::Greater) => 1.0,
            Some(Ordering::Less) => -1.0,
            _ => 0.0,
        };
        grad[j] = acc;
    }
    Ok(grad)
}

/// Exact transport cost on a line under `f(|i − j|)` via the quantile
/// coupling. The cumulative breakpoints of both histograms are merged; the
/// coupled pair of bins is constant between consecutive breakpoints.
///
/// The quantile coupling is optimal for convex `f`; for concave `f` it is
/// the monotone plan's cost, an upper bound on the optimum.
pub fn line_ot(s: &CircularHistogram, t: &CircularHistogram, spec: &GroundMetricSpec) -> Result<LossResult> {
    let n = same_size(s, t)?;
    spec.validate()?;
    let (sc, tc) = (s.cumulative(), t.cumulative());
    let (sc, tc) = (sc.values(), tc.values());
    let mut cache: Vec<Option<f64>> = vec![None; n];
    let mut cost_at = |d: usize| -> Result<f64> {
        if let Some(c) = cache[d] {
            return Ok(c);
        }
        let c = eval_cost(spec, d as f64, n)?;
        cache[d] = Some(c);
        Ok(c)
    };
    let (mut i, mut j) = (0, 0);
    let mut prev = 0.0;
    let mut value = 0.0;
    while i < n && j < n {
        let cur = sc[i].min(tc[j]);
        let seg = cur - prev;
        if seg > 0.0 {
            value += seg * cost_at(i.abs_diff(j))?;
            prev = cur;
        }
        if sc[i] <= tc[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    Ok(LossResult::value(value))
}

/// `½ Σ |s_i − t_i|`: transport cost under the step cost `1[d ≠ 0]`.
pub fn l1_step(s: &CircularHistogram, t: &CircularHistogram) -> Result<LossResult> {
    same_size(s, t)?;
    let total: f64 = s.mass().iter().zip(t.mass()).map(|(a, b)| (a - b).abs()).sum();
    Ok(LossResult::value(0.5 * total))
}

/// Circular transport cost for a convex increasing `f` of arc length.
///
/// The circle is cut by unrolling `t` periodically (one turn adds its total
/// mass) and shifting its cumulative by `α` before pairing quantiles. On the
/// unrolled line the cost is convex in `α`, so a ternary search narrows `α`
/// to width `1/M`. The cost is piecewise linear in `α` with kinks where a
/// cumulative breakpoint of `s` meets one of the shifted `t`; those inside
/// the final bracket are evaluated directly, which recovers the exact
/// minimum. Displacements are measured as arc length.
///
/// The reported shift is reduced modulo one turn.
pub fn circular_convex(
    s: &CircularHistogram,
    t: &CircularHistogram,
    spec: &GroundMetricSpec,
    m_resolution: u64,
) -> Result<LossResult> {
    same_size(s, t)?;
    if !spec.is_convex() {
        return Err(Error::NonConvexSpec(spec.to_string()));
    }
    spec.validate()?;
    if m_resolution < 1000 {
        return Err(Error::InvalidParameter(format!(
            "shift resolution M must be at least 1000, got {m_resolution}"
        )));
    }
    let objective = ShiftObjective::new(s, t, spec)?;
    let width = 1.5 * objective.s_total.max(objective.t_total);
    let (mut lo, mut hi) = (-width, width);
    let step = 1.0 / m_resolution as f64;
    while hi - lo > step {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if objective.eval(m1, Displacement::Unrolled) < objective.eval(m2, Displacement::Unrolled) {
            hi = m2;
        } else {
            lo = m1;
        }
    }

    let mut best = (f64::INFINITY, 0.0);
    for alpha in objective.kinks_within(lo, hi).into_iter().chain([lo, 0.5 * (lo + hi), hi]) {
        let v = objective.eval(alpha, Displacement::Arc);
        if v < best.0 {
            best = (v, alpha);
        }
    }
    let (value, alpha) = best;
    let turns = objective.t_total;
    let mut shift = alpha.rem_euclid(turns) / turns;
    if shift >= 1.0 - 1e-12 {
        shift = 0.0;
    }
    Ok(LossResult::with_shift(value, shift))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Displacement {
    /// `|i − x|` between a bin of `s` and an unrolled position of `t`.
    Unrolled,
    /// Arc length between the same two positions.
    Arc,
}

/// Cost of the quantile coupling between `s` and the unrolled, shifted `t`.
struct ShiftObjective<'a> {
    n: usize,
    spec: &'a GroundMetricSpec,
    s_cum: Vec<f64>,
    t_cum: Vec<f64>,
    s_total: f64,
    t_total: f64,
    /// `f(d)` for `d = 0..` up to a few turns.
    table: Vec<f64>,
}

impl<'a> ShiftObjective<'a> {
    fn new(s: &CircularHistogram, t: &CircularHistogram, spec: &'a GroundMetricSpec) -> Result<Self> {
        let n = s.n_bins();
        let s_cum = s.cumulative().values().to_vec();
        let t_cum = t.cumulative().values().to_vec();
        let (s_total, t_total) = (s_cum[n - 1], t_cum[n - 1]);
        if !(s_total > 0.0 && t_total > 0.0) {
            return Err(Error::ZeroTotalMass);
        }
        let table = (0..=3 * n)
            .map(|d| eval_cost(spec, d as f64, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, spec, s_cum, t_cum, s_total, t_total, table })
    }

    /// Cumulative of the unrolled `t` at integer position `x`.
    #[inline]
    fn t_at(&self, x: i64) -> f64 {
        let n = self.n as i64;
        self.t_cum[x.rem_euclid(n) as usize] + x.div_euclid(n) as f64 * self.t_total
    }

    /// Smallest unrolled position whose cumulative exceeds `u`
    /// (`strict`) or reaches it.
    fn position_after(&self, u: f64, strict: bool) -> i64 {
        let turns = (u / self.t_total).floor();
        let r = u - turns * self.t_total;
        let i = if strict {
            self.t_cum.partition_point(|&c| c <= r)
        } else {
            self.t_cum.partition_point(|&c| c < r)
        };
        i as i64 + turns as i64 * self.n as i64
    }

    #[inline]
    fn cost(&self, i: usize, x: i64, mode: Displacement) -> f64 {
        let d = match mode {
            Displacement::Unrolled => (i as i64 - x).unsigned_abs() as usize,
            Displacement::Arc => arc(i, x.rem_euclid(self.n as i64) as usize, self.n),
        };
        match self.table.get(d) {
            Some(&c) => c,
            None => eval_cost(self.spec, d as f64, self.n).unwrap_or(f64::INFINITY),
        }
    }

    fn eval(&self, alpha: f64, mode: Displacement) -> f64 {
        let mut x = self.position_after(alpha, true);
        let mut i = 0;
        let mut prev = 0.0;
        let mut value = 0.0;
        while i < self.n {
            let end_s = self.s_cum[i];
            let end_t = self.t_at(x) - alpha;
            let cur = end_s.min(end_t);
            if cur > prev {
                value += (cur - prev) * self.cost(i, x, mode);
                prev = cur;
            }
            if end_s <= end_t {
                i += 1;
            } else {
                x += 1;
            }
        }
        value
    }

    /// Shifts in `[lo, hi]` at which a breakpoint of `s` (including 0)
    /// coincides with one of the unrolled `t`.
    fn kinks_within(&self, lo: f64, hi: f64) -> Vec<f64> {
        let cap = 4 * self.n + 8;
        let mut out = Vec::new();
        for &sk in std::iter::once(&0.0).chain(&self.s_cum) {
            let mut x = self.position_after(sk + lo, false);
            loop {
                let alpha = self.t_at(x) - sk;
                if alpha > hi || out.len() >= cap {
                    break;
                }
                if alpha >= lo {
                    out.push(alpha);
                }
                x += 1;
            }
        }
        out.sort_unstable_by(f64::total_cmp);
        out.dedup();
        out
    }
}

/// Fastest exact solver available for `spec` and `geometry`, or `None` when
/// only the transport oracle applies (chord and custom costs).
pub fn fast_loss(
    s: &CircularHistogram,
    t: &CircularHistogram,
    spec: &GroundMetricSpec,
    geometry: Geometry,
    m_resolution: u64,
) -> Result<Option<LossResult>> {
    use GroundMetricSpec::*;
    let result = match (geometry, spec) {
        (_, Step) => l1_step(s, t)?,
        (Geometry::Circle, ArcLength) => circular_linear(s, t)?,
        (Geometry::Circle, Power(_) | Huber(_)) => circular_convex(s, t, spec, m_resolution)?,
        (Geometry::Line, ArcLength | Power(_) | Huber(_)) => line_ot(s, t, spec)?,
        (_, Chord | Custom(_)) => return Ok(None),
    };
    Ok(Some(result))
}
