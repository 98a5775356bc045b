//! Replacement of a fraction of a sample by adversarial points.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::depth::PointCloud;
use crate::error::{Error, Result};
use crate::rng::{seeded, NormalStream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    /// All replaced points at `centroid + radius * direction`.
    FarCluster { direction: Vec<f64>, radius: f64 },
    /// Replaced points uniform in the ball of `radius` around the centroid.
    Smear { radius: f64 },
    /// Replaced points taken in order from a supplied list.
    Replay { points: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContaminationPlan {
    pub epsilon: f64,
    pub strategy: Strategy,
}

/// `floor(epsilon * n)`, robust to the product landing just below an integer.
pub fn replaced_count(epsilon: f64, n: usize) -> usize {
    (epsilon * n as f64 + 1e-9).floor() as usize
}

impl ContaminationPlan {
    pub fn far_cluster(epsilon: f64, direction: Vec<f64>, radius: f64) -> Self {
        ContaminationPlan {
            epsilon,
            strategy: Strategy::FarCluster { direction, radius },
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(0.0..0.5).contains(&self.epsilon) {
            return Err(Error::EpsilonOutOfRange(self.epsilon));
        }
        match &self.strategy {
            Strategy::FarCluster { direction, radius } => {
                if direction.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: direction.len(),
                    });
                }
                let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
                if !(norm > 0.0 && norm.is_finite()) {
                    return Err(Error::invalid("far_cluster direction must be a nonzero vector"));
                }
                if !radius.is_finite() {
                    return Err(Error::invalid("radius must be finite"));
                }
            }
            Strategy::Smear { radius } => {
                if !(radius.is_finite() && *radius >= 0.0) {
                    return Err(Error::invalid("smear radius must be a nonnegative number"));
                }
            }
            Strategy::Replay { points } => {
                if let Some(p) = points.iter().find(|p| p.len() != dim) {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: p.len(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Replaces `floor(epsilon n)` points chosen uniformly by `seed`; the rest
/// of the sample keeps its values and order.
pub fn contaminate(cloud: &PointCloud, plan: &ContaminationPlan, seed: u64) -> Result<PointCloud> {
    let d = cloud.dim();
    plan.validate(d)?;
    let n = cloud.len();
    let m = replaced_count(plan.epsilon, n);
    if let Strategy::Replay { points } = &plan.strategy {
        if points.len() < m {
            return Err(Error::invalid(format!(
                "replay supplies {} points but {m} are needed",
                points.len()
            )));
        }
    }
    let mut out = cloud.clone();
    if m == 0 {
        return Ok(out);
    }
    let mut normals = NormalStream::new(seeded(seed));
    let mut chosen = index::sample(normals.rng_mut(), n, m).into_vec();
    chosen.sort_unstable();
    let centroid = cloud.mean();
    for (slot, &i) in chosen.iter().enumerate() {
        let p: Vec<f64> = match &plan.strategy {
            Strategy::FarCluster { direction, radius } => {
                let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
                centroid
                    .iter()
                    .zip(direction)
                    .map(|(c, u)| c + radius * u / norm)
                    .collect()
            }
            Strategy::Smear { radius } => {
                let u = normals.unit_vector(d);
                let r = radius * normals.rng_mut().gen::<f64>().powf(1.0 / d as f64);
                centroid.iter().zip(&u).map(|(c, x)| c + r * x).collect()
            }
            Strategy::Replay { points } => points[slot].clone(),
        };
        out.set_point(i, &p);
    }
    Ok(out)
}
