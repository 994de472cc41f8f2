//! Discrete distributions on `N` equally spaced positions of a circle (or a
//! line) and their cumulative distributions.

use crate::error::{Error, Result};

/// Default slack on `|Σ mass − 1|` accepted by [`CircularHistogram::validate`].
pub const DEFAULT_SUM_TOLERANCE: f64 = 1e-6;

/// Slack used when comparing a quantile level against cumulative values.
const QUANTILE_EPS: f64 = 1e-12;

/// `N` nonnegative masses on positions `0..N`.
///
/// Masses are kept exactly as given; [`CircularHistogram::validate`] never
/// renormalizes. Use [`CircularHistogram::normalize`] for that.
#[derive(Debug, Clone, PartialEq)]
pub struct CircularHistogram {
    mass: Vec<f64>,
}

impl CircularHistogram {
    /// Checks `values` with the default sum tolerance.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::validate(values, DEFAULT_SUM_TOLERANCE)
    }

    /// Accepts `values` iff there are at least two bins, every entry is
    /// nonnegative and the total is within `tolerance` of one.
    pub fn validate(values: Vec<f64>, tolerance: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty);
        }
        check_nonnegative(&values)?;
        if values.len() < 2 {
            return Err(Error::TooFewBins(values.len()));
        }
        let sum: f64 = values.iter().sum();
        if !((sum - 1.0).abs() <= tolerance) {
            return Err(Error::BadSum(sum));
        }
        Ok(Self { mass: values })
    }

    /// Divides every entry by the total.
    pub fn normalize(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty);
        }
        check_nonnegative(values)?;
        let sum: f64 = values.iter().sum();
        if sum <= 0.0 {
            return Err(Error::ZeroTotalMass);
        }
        let mass: Vec<f64> = values.iter().map(|v| v / sum).collect();
        Self::validate(mass, 1e-12)
    }

    /// Wraps `values` without the sum check. Entries must still be finite and
    /// nonnegative; callers own the total (e.g. a one-hot target whose peak is
    /// set to the prediction's total).
    pub fn from_masses_unchecked(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooFewBins(values.len()));
        }
        check_nonnegative(&values)?;
        Ok(Self { mass: values })
    }

    pub fn n_bins(&self) -> usize {
        self.mass.len()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.mass
    }

    /// Running sums `cum[i] = Σ_{k≤i} mass[k]`.
    pub fn cumulative(&self) -> CumulativeDistribution {
        let mut acc = 0.0;
        let cum = self
            .mass
            .iter()
            .map(|m| {
                acc += m;
                acc
            })
            .collect();
        CumulativeDistribution { cum }
    }

    /// Moves the mass in bin `i` to bin `(i + offset) mod N`.
    pub fn rotate(&self, offset: i64) -> Self {
        let n = self.mass.len();
        let shift = offset.rem_euclid(n as i64) as usize;
        let mut mass = vec![0.0; n];
        for (i, &m) in self.mass.iter().enumerate() {
            mass[(i + shift) % n] = m;
        }
        Self { mass }
    }

    /// Index of the largest mass (lowest index on ties).
    pub fn argmax(&self) -> usize {
        argmax(&self.mass)
    }
}

fn check_nonnegative(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
        Some(i) => Err(Error::NegativeMass(i)),
        None => Ok(()),
    }
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Nondecreasing running sums of a [`CircularHistogram`].
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeDistribution {
    cum: Vec<f64>,
}

impl CumulativeDistribution {
    pub fn n_bins(&self) -> usize {
        self.cum.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.cum
    }

    pub fn total(&self) -> f64 {
        *self.cum.last().expect("nonempty")
    }

    /// Periodic extension: one full turn adds the total mass, so
    /// `at(i + N) = at(i) + 1` for a normalized histogram.
    pub fn at(&self, i: i64) -> f64 {
        let n = self.cum.len() as i64;
        let turns = i.div_euclid(n);
        self.cum[i.rem_euclid(n) as usize] + turns as f64 * self.total()
    }

    /// Smallest bin `i` with `cum[i] ≥ m`.
    pub fn pseudo_inverse(&self, m: f64) -> Result<usize> {
        if !(m > 0.0 && m <= self.total() + DEFAULT_SUM_TOLERANCE) {
            return Err(Error::OutOfRange(m));
        }
        let idx = self.cum.partition_point(|&c| c < m - QUANTILE_EPS);
        Ok(idx.min(self.cum.len() - 1))
    }

    /// Per-bin differences, the inverse of [`CircularHistogram::cumulative`].
    pub fn differences(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.cum
            .iter()
            .map(|&c| {
                let d = c - prev;
                prev = c;
                d
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn validate_accepts_exact_and_tolerated_sums() {
        let h = CircularHistogram::validate(vec![0.5, 0.5], 1e-6).unwrap();
        assert_eq!(h.n_bins(), 2);
        let h = CircularHistogram::validate(vec![0.5, 0.4999999], 1e-6).unwrap();
        assert_eq!(h.mass(), &[0.5, 0.4999999]);
    }

    #[test]
    fn validate_errors() {
        assert_eq!(
            CircularHistogram::new(vec![0.7, -0.1, 0.4]),
            Err(Error::NegativeMass(1))
        );
        assert_eq!(CircularHistogram::new(vec![1.0]), Err(Error::TooFewBins(1)));
        assert_eq!(CircularHistogram::new(vec![]), Err(Error::Empty));
        assert!(matches!(
            CircularHistogram::new(vec![0.5, 0.6]),
            Err(Error::BadSum(_))
        ));
        assert!(matches!(
            CircularHistogram::new(vec![f64::NAN, 1.0]),
            Err(Error::NegativeMass(0))
        ));
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(CircularHistogram::normalize(&[2.0, 2.0]).unwrap().mass(), &[0.5, 0.5]);
        assert_eq!(
            CircularHistogram::normalize(&[1.0, 0.0, 0.0, 0.0]).unwrap().mass(),
            &[1.0, 0.0, 0.0, 0.0]
        );
        assert_eq!(
            CircularHistogram::normalize(&[1.0, 2.0, 1.0]).unwrap().mass(),
            &[0.25, 0.5, 0.25]
        );
        assert_eq!(CircularHistogram::normalize(&[0.0, 0.0]), Err(Error::ZeroTotalMass));
        assert_eq!(
            CircularHistogram::normalize(&[1.0, -1.0]),
            Err(Error::NegativeMass(1))
        );
    }

    #[test]
    fn cumulative_examples() {
        let h = CircularHistogram::new(vec![0.25, 0.25, 0.5]).unwrap();
        assert_eq!(h.cumulative().values(), &[0.25, 0.5, 1.0]);
        let h = CircularHistogram::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(h.cumulative().values(), &[1.0, 1.0, 1.0]);
        let h = CircularHistogram::new(vec![0.25; 4]).unwrap();
        assert_eq!(h.cumulative().values(), &[0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn periodic_extension() {
        let c = CircularHistogram::new(vec![0.25, 0.25, 0.5]).unwrap().cumulative();
        assert_eq!(c.at(4), 1.5);
        assert_eq!(c.at(-1), 0.0);
        assert_eq!(c.at(-3), -0.75);
    }

    #[test]
    fn pseudo_inverse_examples() {
        let c = CircularHistogram::new(vec![0.25, 0.25, 0.5]).unwrap().cumulative();
        assert_eq!(c.pseudo_inverse(0.5).unwrap(), 1);
        assert_eq!(c.pseudo_inverse(0.51).unwrap(), 2);
        let c = CircularHistogram::new(vec![1.0, 0.0, 0.0]).unwrap().cumulative();
        assert_eq!(c.pseudo_inverse(0.3).unwrap(), 0);
        assert_eq!(c.pseudo_inverse(0.0), Err(Error::OutOfRange(0.0)));
        assert_eq!(c.pseudo_inverse(1.5), Err(Error::OutOfRange(1.5)));
    }

    #[test]
    fn rotate_examples() {
        let h = CircularHistogram::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(h.rotate(1).mass(), &[0.0, 1.0, 0.0]);
        assert_eq!(h.rotate(3), h);
        let h = CircularHistogram::new(vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        assert_eq!(h.rotate(-1).mass(), &[0.5, 0.0, 0.0, 0.5]);
    }

    fn weights() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..10.0, 2..24)
            .prop_filter("positive total", |v| v.iter().sum::<f64>() > 1e-3)
    }

    proptest! {
        #[test]
        fn normalize_always_validates(v in weights()) {
            let h = CircularHistogram::normalize(&v).unwrap();
            prop_assert!(CircularHistogram::validate(h.into_vec(), 1e-12).is_ok());
        }

        #[test]
        fn pseudo_inverse_is_monotone(v in weights(), a in 1e-9f64..1.0, b in 1e-9f64..1.0) {
            let c = CircularHistogram::normalize(&v).unwrap().cumulative();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(c.pseudo_inverse(lo).unwrap() <= c.pseudo_inverse(hi).unwrap());
        }

        #[test]
        fn rotations_compose(v in weights(), a in -50i64..50, b in -50i64..50) {
            let h = CircularHistogram::normalize(&v).unwrap();
            let n = h.n_bins() as i64;
            prop_assert_eq!(h.rotate(a).rotate(b), h.rotate((a + b).rem_euclid(n)));
        }

        #[test]
        fn differencing_recovers_masses(v in weights()) {
            let h = CircularHistogram::normalize(&v).unwrap();
            let back = h.cumulative().differences();
            for (x, y) in back.iter().zip(h.mass()) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }
    }
}
