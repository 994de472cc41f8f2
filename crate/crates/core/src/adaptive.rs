//! Alternating ground-metric updates: class centroids of feature vectors,
//! their ℓ1 distances, and a blend with the geometric cost whose weight
//! decays over training rounds.

use crate::error::{Error, Result};
use crate::metric::{arc, eval_cost, GroundMatrix, GroundMetricSpec};

/// Feature vectors grouped by class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassFeatureSet {
    dim: usize,
    features: Vec<Vec<Vec<f64>>>,
}

impl ClassFeatureSet {
    /// Groups `(class, vector)` rows into `n_classes` classes.
    pub fn from_rows(n_classes: usize, rows: Vec<(usize, Vec<f64>)>) -> Result<Self> {
        let dim = rows.first().map(|(_, v)| v.len()).ok_or(Error::Empty)?;
        let mut features = vec![Vec::new(); n_classes];
        for (class, v) in rows {
            if class >= n_classes {
                return Err(Error::IndexOutOfRange { index: class, n: n_classes });
            }
            if v.len() != dim {
                return Err(Error::DimensionMismatch { left: dim, right: v.len() });
            }
            features[class].push(v);
        }
        Ok(Self { dim, features })
    }

    pub fn n_classes(&self) -> usize {
        self.features.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn class(&self, c: usize) -> &[Vec<f64>] {
        &self.features[c]
    }

    /// Rescales every vector to unit ℓ2 norm (zero vectors are left alone).
    pub fn l2_normalized(mut self) -> Self {
        for v in self.features.iter_mut().flatten() {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                v.iter_mut().for_each(|x| *x /= norm);
            }
        }
        self
    }
}

/// Elementwise mean of each class's vectors.
pub fn class_centroids(fs: &ClassFeatureSet) -> Result<Vec<Vec<f64>>> {
    fs.features
        .iter()
        .enumerate()
        .map(|(c, vectors)| {
            if vectors.is_empty() {
                return Err(Error::EmptyClass(c));
            }
            let mut mean = vec![0.0; fs.dim];
            for v in vectors {
                mean.iter_mut().zip(v).for_each(|(m, x)| *m += x);
            }
            let count = vectors.len() as f64;
            mean.iter_mut().for_each(|m| *m /= count);
            Ok(mean)
        })
        .collect()
}

/// `d̄[i][j] = ‖centroid_i − centroid_j‖₁`.
pub fn centroid_l1_distances(centroids: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let dim = centroids.first().map(Vec::len).ok_or(Error::Empty)?;
    if let Some(bad) = centroids.iter().find(|c| c.len() != dim) {
        return Err(Error::DimensionMismatch { left: dim, right: bad.len() });
    }
    Ok(centroids
        .iter()
        .map(|a| {
            centroids
                .iter()
                .map(|b| a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum())
                .collect()
        })
        .collect())
}

/// `D[i][j] = (f(d̄[i][j]) + α·f(d(i, j))) / (1 + α)` with `d` the arc
/// length on `n` bins.
///
/// Chord costs are rejected since `d̄` may exceed half the circle.
pub fn blend_ground_matrix(
    d_bar: &[Vec<f64>],
    n: usize,
    spec: &GroundMetricSpec,
    alpha_blend: f64,
) -> Result<GroundMatrix> {
    if !(alpha_blend >= 0.0 && alpha_blend.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "blend weight must be a finite real >= 0, got {alpha_blend}"
        )));
    }
    match spec {
        GroundMetricSpec::Chord => {
            return Err(Error::InvalidParameter(
                "chord cost is only defined up to half the circle".into(),
            ))
        }
        GroundMetricSpec::Custom(_) => {
            return Err(Error::InvalidParameter("blend needs a cost function, not a matrix".into()))
        }
        _ => spec.validate()?,
    }
    check_distance_matrix(d_bar, n)?;
    let rows = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let learned = eval_cost(spec, d_bar[i][j], n)?;
                    let geometric = eval_cost(spec, arc(i, j, n) as f64, n)?;
                    Ok((learned + alpha_blend * geometric) / (1.0 + alpha_blend))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    GroundMatrix::from_rows(rows)
}

fn check_distance_matrix(d: &[Vec<f64>], n: usize) -> Result<()> {
    if d.len() != n {
        return Err(Error::DimensionMismatch { left: n, right: d.len() });
    }
    for (i, row) in d.iter().enumerate() {
        if row.len() != n {
            return Err(Error::InvalidMatrix(format!("row {i} has {} entries, expected {n}", row.len())));
        }
        if row[i] != 0.0 {
            return Err(Error::InvalidMatrix(format!("nonzero diagonal at {i}")));
        }
        for (j, &v) in row.iter().enumerate() {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidMatrix(format!("bad entry {v} at ({i}, {j})")));
            }
            if v != d[j][i] {
                return Err(Error::InvalidMatrix(format!("asymmetric at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

/// Blend weight decaying linearly from `alpha_start` to `alpha_end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlendSchedule {
    pub alpha_start: f64,
    pub alpha_end: f64,
    pub total_rounds: usize,
}

impl BlendSchedule {
    /// From 10 down to 0.
    pub fn new(total_rounds: usize) -> Self {
        Self { alpha_start: 10.0, alpha_end: 0.0, total_rounds }
    }
}

pub fn alpha_at(schedule: &BlendSchedule, round: usize) -> Result<f64> {
    let BlendSchedule { alpha_start, alpha_end, total_rounds } = *schedule;
    if !(alpha_start >= alpha_end && alpha_end >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "schedule needs alpha_start >= alpha_end >= 0, got {alpha_start} and {alpha_end}"
        )));
    }
    if round >= total_rounds {
        return Err(Error::RoundOutOfRange { round, total: total_rounds });
    }
    if total_rounds == 1 {
        return Ok(alpha_start);
    }
    if round == total_rounds - 1 {
        return Ok(alpha_end);
    }
    let frac = round as f64 / (total_rounds - 1) as f64;
    Ok(alpha_start + (alpha_end - alpha_start) * frac)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centroid_examples() {
        let fs = ClassFeatureSet::from_rows(
            3,
            vec![
                (0, vec![3.0, -1.0]),
                (1, vec![0.0, 0.0]),
                (1, vec![2.0, 4.0]),
                (2, vec![0.5, 0.5]),
                (2, vec![0.5, 0.5]),
                (2, vec![0.5, 0.5]),
            ],
        )
        .unwrap();
        let c = class_centroids(&fs).unwrap();
        assert_eq!(c, vec![vec![3.0, -1.0], vec![1.0, 2.0], vec![0.5, 0.5]]);
    }

    #[test]
    fn centroid_errors() {
        let fs = ClassFeatureSet::from_rows(3, vec![(0, vec![1.0]), (2, vec![2.0])]).unwrap();
        assert_eq!(class_centroids(&fs), Err(Error::EmptyClass(1)));
        assert!(ClassFeatureSet::from_rows(2, vec![(0, vec![1.0]), (1, vec![1.0, 2.0])]).is_err());
        assert!(ClassFeatureSet::from_rows(2, vec![(2, vec![1.0])]).is_err());
    }

    #[test]
    fn l2_normalization() {
        let fs = ClassFeatureSet::from_rows(1, vec![(0, vec![3.0, 4.0]), (0, vec![0.0, 0.0])])
            .unwrap()
            .l2_normalized();
        assert_eq!(fs.class(0), &[vec![0.6, 0.8], vec![0.0, 0.0]]);
    }

    #[test]
    fn l1_distance_examples() {
        let d = centroid_l1_distances(&[vec![0.0, 0.0], vec![1.0, 2.0]]).unwrap();
        assert_eq!(d, vec![vec![0.0, 3.0], vec![3.0, 0.0]]);
        let d = centroid_l1_distances(&vec![vec![1.0, 1.0]; 3]).unwrap();
        assert!(d.iter().flatten().all(|v| *v == 0.0));
        let d = centroid_l1_distances(&[vec![0.0], vec![1.0], vec![3.0]]).unwrap();
        assert_eq!(d, vec![vec![0.0, 1.0, 3.0], vec![1.0, 0.0, 2.0], vec![3.0, 2.0, 0.0]]);
        assert!(centroid_l1_distances(&[vec![0.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn blend_examples() {
        // N = 4, bins 0 and 2 are two steps apart
        let mut d_bar = vec![vec![0.0; 4]; 4];
        d_bar[0][2] = 3.0;
        d_bar[2][0] = 3.0;
        let m = blend_ground_matrix(&d_bar, 4, &GroundMetricSpec::ArcLength, 10.0).unwrap();
        assert_eq!(m.get(0, 2), 23.0 / 11.0);

        let big = blend_ground_matrix(&d_bar, 4, &GroundMetricSpec::ArcLength, 1e6).unwrap();
        assert!((big.get(0, 2) - 2.0).abs() < 1e-5);
        let zero = blend_ground_matrix(&d_bar, 4, &GroundMetricSpec::Power(2.0), 0.0).unwrap();
        assert_eq!(zero.get(0, 2), 9.0);
        assert_eq!(zero.get(0, 1), 0.0);
    }

    #[test]
    fn blend_rejects_bad_inputs() {
        let d_bar = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert!(blend_ground_matrix(&d_bar, 2, &GroundMetricSpec::Chord, 1.0).is_err());
        assert!(blend_ground_matrix(&d_bar, 2, &GroundMetricSpec::ArcLength, -1.0).is_err());
        assert!(blend_ground_matrix(&d_bar, 3, &GroundMetricSpec::ArcLength, 1.0).is_err());
        let asym = vec![vec![0.0, 1.0], vec![2.0, 0.0]];
        assert!(blend_ground_matrix(&asym, 2, &GroundMetricSpec::ArcLength, 1.0).is_err());
    }

    #[test]
    fn schedule_examples() {
        let s = BlendSchedule::new(11);
        assert_eq!(alpha_at(&s, 0).unwrap(), 10.0);
        assert_eq!(alpha_at(&s, 10).unwrap(), 0.0);
        assert_eq!(alpha_at(&s, 5).unwrap(), 5.0);
        assert_eq!(alpha_at(&s, 11), Err(Error::RoundOutOfRange { round: 11, total: 11 }));
        let rounds: Vec<f64> = (0..37).map(|r| alpha_at(&BlendSchedule::new(37), r).unwrap()).collect();
        assert!(rounds.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(alpha_at(&BlendSchedule::new(1), 0).unwrap(), 10.0);
    }
}
