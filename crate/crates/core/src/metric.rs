//! Arc length on the discretized circle and the ground-cost family applied
//! to it.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

/// Circular distance between bins `i` and `j` out of `n`.
pub fn arc_length(i: usize, j: usize, n: usize) -> Result<usize> {
    for index in [i, j] {
        if index >= n {
            return Err(Error::IndexOutOfRange { index, n });
        }
    }
    Ok(arc(i, j, n))
}

#[inline]
pub(crate) fn arc(i: usize, j: usize, n: usize) -> usize {
    let d = i.abs_diff(j);
    d.min(n - d)
}

/// Cost function applied to a distance `d` between bins.
#[derive(Debug, Clone, PartialEq)]
pub enum GroundMetricSpec {
    /// `f(d) = d`
    ArcLength,
    /// `f(d) = d^ρ`, `ρ ≥ 1`
    Power(f64),
    /// `d²` up to `τ`, then `τ(2d − τ)`
    Huber(f64),
    /// Chord of the arc on a circle of circumference `N`: `2r sin(d / 2r)`
    /// with `r = N / 2π`.
    Chord,
    /// `1` for `d ≠ 0`
    Step,
    /// A fixed cost matrix; only usable through matrix lookups.
    Custom(GroundMatrix),
}

impl GroundMetricSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Power(rho) if !(rho >= 1.0 && rho.is_finite()) => Err(Error::InvalidParameter(
                format!("power exponent must be a finite real >= 1, got {rho}"),
            )),
            Self::Huber(tau) if !(tau > 0.0 && tau.is_finite()) => Err(Error::InvalidParameter(
                format!("huber threshold must be positive, got {tau}"),
            )),
            _ => Ok(()),
        }
    }

    /// Nonnegative, increasing and convex in the distance.
    pub fn is_convex(&self) -> bool {
        matches!(self, Self::ArcLength | Self::Power(_) | Self::Huber(_))
    }

    /// Parses `arc`, `power:RHO`, `huber:TAU`, `chord`, `step` or
    /// `custom:PATH` (a CSV matrix file).
    pub fn parse(text: &str) -> Result<Self> {
        let (head, arg) = match text.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (text, None),
        };
        let number = |a: Option<&str>| -> Result<f64> {
            let a = a.ok_or_else(|| Error::Parse(format!("metric `{head}` needs a parameter")))?;
            a.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad metric parameter `{a}`")))
        };
        let spec = match (head.trim(), arg) {
            ("arc", None) => Self::ArcLength,
            ("chord", None) => Self::Chord,
            ("step", None) => Self::Step,
            ("power", a) => Self::Power(number(a)?),
            ("huber", a) => Self::Huber(number(a)?),
            ("custom", Some(path)) => Self::Custom(crate::io::read_matrix_file(path)?.try_into()?),
            _ => return Err(Error::Parse(format!("unknown metric `{text}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for GroundMetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ArcLength => write!(f, "arc"),
            Self::Power(rho) => write!(f, "power:{rho}"),
            Self::Huber(tau) => write!(f, "huber:{tau}"),
            Self::Chord => write!(f, "chord"),
            Self::Step => write!(f, "step"),
            Self::Custom(m) => write!(f, "custom[{}]", m.n_bins()),
        }
    }
}

/// `f(d)` for the given spec. `n` is the number of bins on the circle; it
/// fixes the chord radius and its domain `[0, N/2]`.
pub fn eval_cost(spec: &GroundMetricSpec, d: f64, n: usize) -> Result<f64> {
    if !(d >= 0.0) {
        return Err(Error::InvalidParameter(format!("distance must be >= 0, got {d}")));
    }
    let value = match *spec {
        GroundMetricSpec::ArcLength => d,
        GroundMetricSpec::Power(rho) => {
            spec.validate()?;
            power(d, rho)
        }
        GroundMetricSpec::Huber(tau) => {
            spec.validate()?;
            if d <= tau {
                d * d
            } else {
                tau * (2.0 * d - tau)
            }
        }
        GroundMetricSpec::Chord => {
            let half = n as f64 / 2.0;
            if n < 2 || d > half + 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "chord length is defined on [0, {half}], got {d}"
                )));
            }
            let r = n as f64 / (2.0 * PI);
            2.0 * r * (d / (2.0 * r)).sin()
        }
        GroundMetricSpec::Step => {
            if d > 0.0 {
                1.0
            } else {
                0.0
            }
        }
        GroundMetricSpec::Custom(_) => {
            return Err(Error::InvalidParameter(
                "custom ground matrices support lookup only".into(),
            ))
        }
    };
    Ok(value)
}

fn power(d: f64, rho: f64) -> f64 {
    if rho.fract() == 0.0 && rho <= i32::MAX as f64 {
        d.powi(rho as i32)
    } else {
        d.powf(rho)
    }
}

/// Dense row-major `N × N` cost matrix: symmetric, nonnegative, zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundMatrix {
    n: usize,
    cost: Vec<f64>,
}

impl GroundMatrix {
    /// Validates shape, sign, zero diagonal and symmetry. Metric axioms are
    /// not required; see [`GroundMatrix::check_metric_axioms`].
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::InvalidMatrix(format!("need at least 2 rows, got {n}")));
        }
        let mut cost = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidMatrix(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            cost.extend(row);
        }
        let m = Self { n, cost };
        m.check_shape_invariants()?;
        Ok(m)
    }

    pub(crate) fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Result<f64>) -> Result<Self> {
        let mut cost = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                cost.push(f(i, j)?);
            }
        }
        Ok(Self { n, cost })
    }

    fn check_shape_invariants(&self) -> Result<()> {
        let n = self.n;
        let scale = self.max().max(1.0);
        for i in 0..n {
            if self.get(i, i) != 0.0 {
                return Err(Error::InvalidMatrix(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let c = self.get(i, j);
                if !(c >= 0.0) || !c.is_finite() {
                    return Err(Error::InvalidMatrix(format!("bad entry {c} at ({i}, {j})")));
                }
                if (c - self.get(j, i)).abs() > 1e-12 * scale {
                    return Err(Error::InvalidMatrix(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(())
    }

    /// First violated triangle inequality `(i, j, k)` with
    /// `cost[i][k] > cost[i][j] + cost[j][k]`, if any.
    pub fn check_metric_axioms(&self) -> Option<(usize, usize, usize)> {
        let n = self.n;
        let slack = 1e-12 * self.max().max(1.0);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.get(i, k) > self.get(i, j) + self.get(j, k) + slack {
                        return Some((i, j, k));
                    }
                }
            }
        }
        None
    }

    pub fn n_bins(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.cost[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.cost[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.cost.chunks(self.n)
    }

    pub fn max(&self) -> f64 {
        self.cost.iter().copied().fold(0.0, f64::max)
    }
}

impl TryFrom<Vec<Vec<f64>>> for GroundMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(rows)
    }
}

/// `cost[i][j] = f(arc_length(i, j, n))`.
pub fn build_ground_matrix(spec: &GroundMetricSpec, n: usize) -> Result<GroundMatrix> {
    if n < 2 {
        return Err(Error::TooFewBins(n));
    }
    if let GroundMetricSpec::Custom(m) = spec {
        return custom_with_size(m, n);
    }
    spec.validate()?;
    // circulant: one row of distinct costs is enough
    let by_distance = (0..=n / 2)
        .map(|d| eval_cost(spec, d as f64, n))
        .collect::<Result<Vec<_>>>()?;
    GroundMatrix::from_fn(n, |i, j| Ok(by_distance[arc(i, j, n)]))
}

/// `cost[i][j] = f(|i − j|)` for bins on a line.
pub fn build_line_matrix(spec: &GroundMetricSpec, n: usize) -> Result<GroundMatrix> {
    if n < 2 {
        return Err(Error::TooFewBins(n));
    }
    if let GroundMetricSpec::Custom(m) = spec {
        return custom_with_size(m, n);
    }
    spec.validate()?;
    let by_distance = (0..n)
        .map(|d| eval_cost(spec, d as f64, n))
        .collect::<Result<Vec<_>>>()?;
    GroundMatrix::from_fn(n, |i, j| Ok(by_distance[i.abs_diff(j)]))
}

fn custom_with_size(m: &GroundMatrix, n: usize) -> Result<GroundMatrix> {
    if m.n_bins() != n {
        return Err(Error::DimensionMismatch { left: m.n_bins(), right: n });
    }
    Ok(m.clone())
}
