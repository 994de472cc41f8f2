//! One-hot and conservative targets: a sampled unimodal distribution wrapped
//! around the circle at the true class, mixed with the one-hot and uniform
//! distributions.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::histogram::{argmax, CircularHistogram};

const PMF_SUM_TOLERANCE: f64 = 1e-12;

/// Probabilities on `K + 1` consecutive bins with a single peak.
#[derive(Debug, Clone, PartialEq)]
pub struct UnimodalPmf {
    probs: Vec<f64>,
    mode: usize,
}

impl UnimodalPmf {
    /// Checks the total and the single-peak shape. The mode is the lowest
    /// index of the maximum.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(i) = probs.iter().position(|p| !(*p >= 0.0)) {
            return Err(Error::NegativeMass(i));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PMF_SUM_TOLERANCE {
            return Err(Error::BadSum(sum));
        }
        let mode = argmax(&probs);
        let slack = 1e-15;
        let rising = probs[..=mode].windows(2).all(|w| w[1] >= w[0] - slack);
        let falling = probs[mode..].windows(2).all(|w| w[1] <= w[0] + slack);
        if !(rising && falling) {
            return Err(Error::InvalidParameter("distribution is not unimodal".into()));
        }
        Ok(Self { probs, mode })
    }

    pub fn support_size(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn mode(&self) -> usize {
        self.mode
    }
}

/// How Gaussian density samples become probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GaussianNormalization {
    /// Softmax over the density values (temperature 1).
    #[default]
    Softmax,
    /// Divide by the sum of the density values.
    Plain,
}

/// Unimodal family sampled on `0..=K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UnimodalFamily {
    Binomial { k: usize, p: f64 },
    Poisson { k: usize, lambda: f64 },
    Gaussian { k: usize, sigma2: f64, normalization: GaussianNormalization },
}

impl UnimodalFamily {
    pub fn sample(&self) -> Result<UnimodalPmf> {
        match *self {
            Self::Binomial { k, p } => binomial_pmf(k, p),
            Self::Poisson { k, lambda } => poisson_pmf(k, lambda),
            Self::Gaussian { k, sigma2, normalization } => gaussian_pmf(k, sigma2, normalization),
        }
    }
}

/// Binomial(K, p) masses. Used as-is, without a normalization pass.
pub fn binomial_pmf(k: usize, p: f64) -> Result<UnimodalPmf> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("binomial p must lie in (0, 1), got {p}")));
    }
    let q = 1.0 - p;
    let mut coeff = 1.0;
    let mut probs = Vec::with_capacity(k + 1);
    for i in 0..=k {
        if i > 0 {
            coeff = coeff * (k + 1 - i) as f64 / i as f64;
        }
        probs.push(coeff * p.powi(i as i32) * q.powi((k - i) as i32));
    }
    UnimodalPmf::new(probs)
}

/// Poisson(λ) masses on `0..=K`, renormalized after truncation.
pub fn poisson_pmf(k: usize, lambda: f64) -> Result<UnimodalPmf> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("poisson lambda must be positive, got {lambda}")));
    }
    let mut term = (-lambda).exp();
    let mut raw = Vec::with_capacity(k + 1);
    raw.push(term);
    for i in 1..=k {
        // λ/i first so integer λ gives the exact tie p_{λ-1} = p_λ
        term *= lambda / i as f64;
        raw.push(term);
    }
    normalized_pmf(raw)
}

/// Gaussian density with mean `K/2` sampled at `0..=K`, then normalized.
pub fn gaussian_pmf(k: usize, sigma2: f64, normalization: GaussianNormalization) -> Result<UnimodalPmf> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::InvalidParameter(format!("gaussian variance must be positive, got {sigma2}")));
    }
    let mu = k as f64 / 2.0;
    let norm = (2.0 * PI * sigma2).sqrt();
    let density = (0..=k).map(|x| {
        let t = x as f64 - mu;
        (-t * t / (2.0 * sigma2)).exp() / norm
    });
    let raw: Vec<f64> = match normalization {
        GaussianNormalization::Softmax => density.map(f64::exp).collect(),
        GaussianNormalization::Plain => density.collect(),
    };
    normalized_pmf(raw)
}

fn normalized_pmf(raw: Vec<f64>) -> Result<UnimodalPmf> {
    let total: f64 = raw.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroTotalMass);
    }
    UnimodalPmf::new(raw.into_iter().map(|v| v / total).collect())
}

/// `peak_mass` at `j_star`, zero elsewhere. The unit-sum check is waived so
/// the peak may be set to the prediction's total instead of one.
pub fn one_hot(n: usize, j_star: usize, peak_mass: f64) -> Result<CircularHistogram> {
    if j_star >= n {
        return Err(Error::IndexOutOfRange { index: j_star, n });
    }
    if !(peak_mass > 0.0 && peak_mass <= 1.0 + crate::histogram::DEFAULT_SUM_TOLERANCE) {
        return Err(Error::InvalidParameter(format!("peak mass must lie in (0, 1], got {peak_mass}")));
    }
    let mut mass = vec![0.0; n];
    mass[j_star] = peak_mass;
    CircularHistogram::from_masses_unchecked(mass)
}

/// Places the pmf on `n` circular bins with its mode on `j_star`. Mass that
/// wraps onto an occupied bin accumulates.
pub fn wrap_to_circle(pmf: &UnimodalPmf, n: usize, j_star: usize) -> Result<CircularHistogram> {
    if n < 2 {
        return Err(Error::TooFewBins(n));
    }
    if j_star >= n {
        return Err(Error::IndexOutOfRange { index: j_star, n });
    }
    let mut out = vec![0.0; n];
    let base = j_star as i64 - pmf.mode() as i64;
    for (k, &p) in pmf.probs().iter().enumerate() {
        out[(base + k as i64).rem_euclid(n as i64) as usize] += p;
    }
    CircularHistogram::from_masses_unchecked(out)
}

/// `(1 − ξ − η)·t + ξ·wrapped + η/N`, bin by bin.
pub fn conservative_target(
    t: &CircularHistogram,
    wrapped: &CircularHistogram,
    xi: f64,
    eta: f64,
) -> Result<CircularHistogram> {
    let n = t.n_bins();
    if wrapped.n_bins() != n {
        return Err(Error::DimensionMismatch { left: n, right: wrapped.n_bins() });
    }
    check_weights(xi, eta)?;
    let keep = 1.0 - xi - eta;
    let floor = eta / n as f64;
    let out = t
        .mass()
        .iter()
        .zip(wrapped.mass())
        .map(|(&tj, &pj)| keep * tj + xi * pj + floor)
        .collect();
    CircularHistogram::from_masses_unchecked(out)
}

fn check_weights(xi: f64, eta: f64) -> Result<()> {
    if !(xi >= 0.0 && eta >= 0.0 && xi + eta <= 1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "mixture weights need xi, eta >= 0 and xi + eta <= 1, got xi={xi}, eta={eta}"
        )));
    }
    Ok(())
}

/// Mixture weights plus the unimodal family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingSpec {
    pub xi: f64,
    pub eta: f64,
    pub family: UnimodalFamily,
}

impl SmoothingSpec {
    /// The conservative target for class `j_star` out of `n`, built from a
    /// unit one-hot.
    pub fn target(&self, n: usize, j_star: usize) -> Result<CircularHistogram> {
        check_weights(self.xi, self.eta)?;
        let t = one_hot(n, j_star, 1.0)?;
        let wrapped = wrap_to_circle(&self.family.sample()?, n, j_star)?;
        conservative_target(&t, &wrapped, self.xi, self.eta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn one_hot_examples() {
        assert_eq!(one_hot(4, 2, 1.0).unwrap().mass(), &[0.0, 0.0, 1.0, 0.0]);
        assert_eq!(one_hot(8, 0, 1.0).unwrap().mass()[0], 1.0);
        assert_eq!(one_hot(3, 1, 0.99999999).unwrap().mass(), &[0.0, 0.99999999, 0.0]);
        assert_eq!(one_hot(3, 3, 1.0), Err(Error::IndexOutOfRange { index: 3, n: 3 }));
        assert!(one_hot(3, 0, 0.0).is_err());
    }

    #[test]
    fn binomial_examples() {
        let p = binomial_pmf(4, 0.5).unwrap();
        assert_eq!(p.probs(), &[0.0625, 0.25, 0.375, 0.25, 0.0625]);
        assert_eq!(p.mode(), 2);
        assert_eq!(binomial_pmf(0, 0.5).unwrap().probs(), &[1.0]);
        assert!(close(binomial_pmf(1, 0.3).unwrap().probs(), &[0.7, 0.3], 1e-15));
        assert!(binomial_pmf(3, 1.0).is_err());
    }

    #[test]
    fn poisson_examples() {
        assert!(close(poisson_pmf(2, 1.0).unwrap().probs(), &[0.4, 0.4, 0.2], 1e-15));
        assert_eq!(poisson_pmf(0, 5.0).unwrap().probs(), &[1.0]);
        let p = poisson_pmf(10, 5.0).unwrap();
        assert_eq!(p.probs()[4], p.probs()[5]);
        assert_eq!(p.mode(), 4);
        assert!(poisson_pmf(3, 0.0).is_err());
    }

    #[test]
    fn gaussian_examples() {
        let p = gaussian_pmf(2, 2.5, GaussianNormalization::Softmax).unwrap();
        // densities at offsets 1, 0, 1 from the mean, then softmax
        let g = |t: f64| (-t * t / 5.0).exp() / (5.0 * PI).sqrt();
        let e = [g(1.0).exp(), g(0.0).exp(), g(1.0).exp()];
        let z: f64 = e.iter().sum();
        let expected: Vec<f64> = e.iter().map(|v| v / z).collect();
        assert!(close(p.probs(), &expected, 1e-15));
        assert_eq!(p.probs()[0], p.probs()[2]);
        assert!(p.probs()[1] > p.probs()[0]);
        assert_eq!(p.mode(), 1);

        assert_eq!(gaussian_pmf(0, 3.0, GaussianNormalization::Softmax).unwrap().probs(), &[1.0]);
        let plain = gaussian_pmf(2, 2.5, GaussianNormalization::Plain).unwrap();
        let z = g(1.0) * 2.0 + g(0.0);
        assert!(close(plain.probs(), &[g(1.0) / z, g(0.0) / z, g(1.0) / z], 1e-15));
        assert!(gaussian_pmf(2, 0.0, GaussianNormalization::Plain).is_err());
    }

    #[test]
    fn symmetry_of_generated_pmfs() {
        for k in (0..=30).step_by(2) {
            for norm in [GaussianNormalization::Softmax, GaussianNormalization::Plain] {
                let p = gaussian_pmf(k, 2.5, norm).unwrap();
                for i in 0..=k {
                    assert!((p.probs()[i] - p.probs()[k - i]).abs() <= 1e-16);
                }
            }
        }
        let sym = binomial_pmf(7, 0.5).unwrap();
        assert!((0..=7).all(|i| sym.probs()[i] == sym.probs()[7 - i]));
        let skew = binomial_pmf(7, 0.3).unwrap();
        assert!((0..=7).any(|i| (skew.probs()[i] - skew.probs()[7 - i]).abs() > 1e-6));
    }

    #[test]
    fn unimodal_checks() {
        assert!(UnimodalPmf::new(vec![0.4, 0.2, 0.4]).is_err());
        assert!(UnimodalPmf::new(vec![0.6, 0.4]).is_ok());
        assert!(UnimodalPmf::new(vec![0.3, 0.4, 0.2, 0.1]).is_ok());
        assert!(UnimodalPmf::new(vec![0.3, 0.1, 0.2, 0.4]).is_err());
    }

    #[test]
    fn wrap_examples() {
        let p = binomial_pmf(4, 0.5).unwrap();
        let w = wrap_to_circle(&p, 8, 0).unwrap();
        assert_eq!(w.mass(), &[0.375, 0.25, 0.0625, 0.0, 0.0, 0.0, 0.0625, 0.25]);

        let dirac = UnimodalPmf::new(vec![1.0]).unwrap();
        assert_eq!(wrap_to_circle(&dirac, 5, 3).unwrap().mass(), &[0.0, 0.0, 0.0, 1.0, 0.0]);

        let full = UnimodalPmf::new(vec![0.1, 0.2, 0.4, 0.3]).unwrap();
        let w = wrap_to_circle(&full, 4, 0).unwrap();
        assert_eq!(w.mass(), &[0.4, 0.3, 0.1, 0.2]);

        // K + 1 > N accumulates
        let wide = binomial_pmf(4, 0.5).unwrap();
        let w = wrap_to_circle(&wide, 3, 0).unwrap();
        assert_eq!(w.mass(), &[0.375, 0.25 + 0.0625, 0.0625 + 0.25]);
        assert!(wrap_to_circle(&wide, 3, 3).is_err());
    }

    #[test]
    fn wrapped_shape_decreases_from_peak() {
        for (k, n) in [(4, 8), (10, 36), (20, 36), (7, 8)] {
            let p = binomial_pmf(k, 0.5).unwrap();
            for j in [0, n / 2, n - 1] {
                let w = wrap_to_circle(&p, n, j).unwrap();
                let m = w.mass();
                let peak = m.iter().cloned().fold(0.0, f64::max);
                assert_eq!(m[j], peak);
                assert!((w.total() - 1.0).abs() <= 1e-12);
                for step in 1..n / 2 {
                    assert!(m[(j + step) % n] <= m[(j + step - 1) % n]);
                    assert!(m[(j + n - step) % n] <= m[(j + n - step + 1) % n]);
                }
            }
        }
    }

    #[test]
    fn conservative_examples() {
        let t = one_hot(8, 0, 1.0).unwrap();
        let w = wrap_to_circle(&binomial_pmf(4, 0.5).unwrap(), 8, 0).unwrap();
        let c = conservative_target(&t, &w, 0.1, 0.05).unwrap();
        let expected = [0.89375, 0.03125, 0.0125, 0.00625, 0.00625, 0.00625, 0.0125, 0.03125];
        assert!(close(c.mass(), &expected, 1e-15));
        assert!((c.total() - 1.0).abs() < 1e-15);

        assert_eq!(conservative_target(&t, &w, 0.0, 0.0).unwrap(), t);
        let u = conservative_target(&t, &w, 0.0, 1.0).unwrap();
        assert!(u.mass().iter().all(|&v| v == 0.125));

        let small = one_hot(4, 0, 1.0).unwrap();
        assert_eq!(
            conservative_target(&t, &small, 0.1, 0.1),
            Err(Error::DimensionMismatch { left: 8, right: 4 })
        );
        assert!(conservative_target(&t, &w, 0.7, 0.5).is_err());
        assert!(conservative_target(&t, &w, -0.1, 0.5).is_err());
    }
}
