//! Elliptically symmetric samplers.
//!
//! Samples are `mu + S Y` with `S` the symmetric square root of the shape
//! matrix and `Y` a spherical vector: standard normal, standard normal over
//! `sqrt(W / nu)` with `W` chi-square, or a uniform unit vector. With this
//! convention the Gaussian model has covariance exactly `shape`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand_distr::{ChiSquared, Distribution};
use serde::{Deserialize, Serialize};

use crate::depth::PointCloud;
use crate::error::{Error, Result};
use crate::rng::{seeded, NormalStream};

pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Radial {
    Gaussian,
    StudentT { nu: f64 },
    UnitRadius,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticalModel {
    pub mu: Vec<f64>,
    pub shape: Vec<Vec<f64>>,
    pub radial: Radial,
}

impl EllipticalModel {
    /// Centered model with identity shape.
    pub fn standard(dim: usize, radial: Radial) -> Self {
        let shape = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        EllipticalModel {
            mu: vec![0.0; dim],
            shape,
            radial,
        }
    }

    pub fn gaussian(mu: Vec<f64>, shape: Vec<Vec<f64>>) -> Self {
        EllipticalModel {
            mu,
            shape,
            radial: Radial::Gaussian,
        }
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.mu.is_empty() {
            return Err(Error::invalid("model center is empty"));
        }
        if self.mu.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("model center is not finite"));
        }
        if let Radial::StudentT { nu } = self.radial {
            if !(nu > 0.0 && nu.is_finite()) {
                return Err(Error::invalid(format!("degrees of freedom must be positive, got {nu}")));
            }
        }
        let d = self.dim();
        if self.shape.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: self.shape.len(),
            });
        }
        shape_summary(&self.shape).map(|_| ())
    }

    /// Symmetric square root of the shape matrix, row-major.
    pub fn sqrt_shape(&self) -> Result<Vec<Vec<f64>>> {
        matrix_power(&self.shape, 0.5)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: EllipticalModel = serde_json::from_str(text)?;
        m.validate()?;
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeSummary {
    pub trace: f64,
    pub spectral_norm: f64,
    pub effective_rank: f64,
}

fn to_matrix(shape: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let d = shape.len();
    if d == 0 {
        return Err(Error::invalid("empty shape matrix"));
    }
    if let Some(row) = shape.iter().find(|r| r.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: row.len(),
        });
    }
    if shape.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::invalid("shape matrix is not finite"));
    }
    let asymmetry = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .map(|(i, j)| (shape[i][j] - shape[j][i]).abs())
        .fold(0.0, f64::max);
    if asymmetry > SYMMETRY_TOL {
        return Err(Error::Asymmetric { asymmetry });
    }
    Ok(DMatrix::from_fn(d, d, |i, j| 0.5 * (shape[i][j] + shape[j][i])))
}

fn is_diagonal(shape: &[Vec<f64>]) -> bool {
    shape
        .iter()
        .enumerate()
        .all(|(i, r)| r.iter().enumerate().all(|(j, &x)| i == j || x == 0.0))
}

fn eigenvalues(shape: &[Vec<f64>]) -> Result<Vec<f64>> {
    let m = to_matrix(shape)?;
    let eig = SymmetricEigen::new(m);
    let vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    Ok(vals)
}

/// `shape^p` for a symmetric positive definite matrix. Diagonal input is
/// handled entrywise so the identity maps to itself exactly.
pub fn matrix_power(shape: &[Vec<f64>], p: f64) -> Result<Vec<Vec<f64>>> {
    let m = to_matrix(shape)?;
    let d = shape.len();
    if is_diagonal(shape) {
        let diag: Vec<f64> = (0..d).map(|i| shape[i][i]).collect();
        if let Some(&bad) = diag.iter().find(|&&x| x <= 0.0) {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: bad });
        }
        return Ok((0..d)
            .map(|i| (0..d).map(|j| if i == j { diag[i].powf(p) } else { 0.0 }).collect())
            .collect());
    }
    let eig = SymmetricEigen::new(m);
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    let scaled = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.powf(p)));
    let r = &eig.eigenvectors * scaled * eig.eigenvectors.transpose();
    Ok((0..d).map(|i| (0..d).map(|j| r[(i, j)]).collect()).collect())
}

pub fn shape_summary(shape: &[Vec<f64>]) -> Result<ShapeSummary> {
    let vals = eigenvalues(shape)?;
    let trace: f64 = (0..shape.len()).map(|i| shape[i][i]).sum();
    let spectral_norm = vals.iter().copied().fold(0.0, f64::max);
    Ok(ShapeSummary {
        trace,
        spectral_norm,
        effective_rank: trace / spectral_norm,
    })
}

/// `x = mu + S y`, summed in a fixed order.
pub fn affine_apply(mu: &[f64], s: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    mu.iter()
        .zip(s)
        .map(|(m, row)| m + row.iter().zip(y).map(|(a, b)| a * b).sum::<f64>())
        .collect()
}

/// Draws `n` points; deterministic in `(model, n, seed)`.
pub fn sample_elliptical(model: &EllipticalModel, n: usize, seed: u64) -> Result<PointCloud> {
    model.validate()?;
    if n == 0 {
        return Err(Error::invalid("sample size must be at least 1"));
    }
    let d = model.dim();
    let s = model.sqrt_shape()?;
    let chi = match model.radial {
        Radial::StudentT { nu } => {
            Some(ChiSquared::new(nu).map_err(|e| Error::invalid(e.to_string()))?)
        }
        _ => None,
    };
    let mut normals = NormalStream::new(seeded(seed));
    let mut y = vec![0.0; d];
    let mut coords = Vec::with_capacity(n * d);
    for _ in 0..n {
        match model.radial {
            Radial::Gaussian => normals.fill(&mut y),
            Radial::StudentT { nu } => {
                normals.fill(&mut y);
                let w: f64 = chi.as_ref().map(|c| c.sample(normals.rng_mut())).unwrap_or(nu);
                let scale = (w / nu).sqrt();
                y.iter_mut().for_each(|v| *v /= scale);
            }
            Radial::UnitRadius => y = normals.unit_vector(d),
        }
        coords.extend(affine_apply(&model.mu, &s, &y));
    }
    PointCloud::new(d, coords)
}
