//! Limit of the centered depth process for the standard planar Gaussian:
//! `W(z) = min_v G(v) - <z, v> / sqrt(2 pi)`, with `G` the Gaussian bridge
//! indexed by halfplanes through the origin, discretized on a grid of
//! directions.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{convex_hull, rotating_calipers, Point2};
use crate::rng::{seeded, NormalStream};

/// Standard normal density at zero.
pub const DRIFT: f64 = 0.398_942_280_401_432_7;

pub const DEFAULT_DIRECTIONS: usize = 512;
pub const DEFAULT_RADIUS: f64 = 8.0;
pub const DEFAULT_SPACING: f64 = 0.1;
/// Slack defining the minimizing directions at the maximizer.
pub const MINIMIZER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionGrid {
    m: usize,
    angles: Vec<f64>,
}

impl DirectionGrid {
    /// `m` equispaced angles `2 pi i / m`; `m` must be even and at least 8.
    pub fn new(m: usize) -> Result<Self> {
        if m < 8 || m % 2 != 0 {
            return Err(Error::invalid(format!("direction count must be even and >= 8, got {m}")));
        }
        let angles = (0..m).map(|i| TAU * i as f64 / m as f64).collect();
        Ok(DirectionGrid { m, angles })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn directions(&self) -> Vec<Point2> {
        self.angles.iter().map(|&a| Point2::from_angle(a)).collect()
    }
}

/// Covariance of the bridge at two directions `theta` apart; the angle is
/// folded into `[0, pi]` first.
pub fn bridge_covariance(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    let t = if t > PI { TAU - t } else { t };
    (PI - t) / TAU - 0.25
}

/// Factorized covariance of the bridge on the first half of a grid.
#[derive(Debug, Clone)]
pub struct BridgeSampler {
    grid: DirectionGrid,
    /// `h x h` factor with `F F^T` the half-grid covariance.
    factor: DMatrix<f64>,
}

impl BridgeSampler {
    pub fn new(grid: DirectionGrid) -> Result<Self> {
        let h = grid.m / 2;
        let step = TAU / grid.m as f64;
        let cov = DMatrix::from_fn(h, h, |i, j| bridge_covariance(step * i.abs_diff(j) as f64));
        let eig = SymmetricEigen::new(cov);
        let max = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
        let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -1e-8 * max.max(1.0) {
            return Err(Error::Factorization { min_eigenvalue: min });
        }
        let root = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
        let factor = eig.eigenvectors * DMatrix::from_diagonal(&root);
        Ok(BridgeSampler { grid, factor })
    }

    pub fn grid(&self) -> &DirectionGrid {
        &self.grid
    }

    /// One draw of `G` on the whole grid; the second half is the negated
    /// first half.
    pub fn sample(&self, seed: u64) -> Vec<f64> {
        let h = self.grid.m / 2;
        let mut normals = NormalStream::new(seeded(seed));
        let mut z = vec![0.0; h];
        normals.fill(&mut z);
        let mut g = vec![0.0; 2 * h];
        for i in 0..h {
            let mut acc = 0.0;
            for (k, zk) in z.iter().enumerate() {
                acc += self.factor[(i, k)] * zk;
            }
            g[i] = acc;
            g[i + h] = -acc;
        }
        g
    }
}

pub fn simulate_bridge(grid: &DirectionGrid, seed: u64) -> Result<Vec<f64>> {
    Ok(BridgeSampler::new(grid.clone())?.sample(seed))
}

/// Lattice `spacing * (i, j)` restricted to the closed ball of `radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub radius: f64,
    pub spacing: f64,
}

impl Default for Lattice {
    fn default() -> Self {
        Lattice {
            radius: DEFAULT_RADIUS,
            spacing: DEFAULT_SPACING,
        }
    }
}

impl Lattice {
    pub fn new(radius: f64, spacing: f64) -> Result<Self> {
        if !(radius > 0.0 && spacing > 0.0 && radius.is_finite() && spacing <= radius) {
            return Err(Error::invalid("lattice needs 0 < spacing <= radius"));
        }
        Ok(Lattice { radius, spacing })
    }

    /// Number of steps from the center to the edge along an axis.
    pub fn half_width(&self) -> usize {
        (self.radius / self.spacing + 1e-9).floor() as usize
    }

    pub fn side(&self) -> usize {
        2 * self.half_width() + 1
    }

    pub fn point(&self, row: usize, col: usize) -> Point2 {
        let h = self.half_width() as f64;
        Point2::new((col as f64 - h) * self.spacing, (row as f64 - h) * self.spacing)
    }

    pub fn inside(&self, p: Point2) -> bool {
        p.norm() <= self.radius * (1.0 + 1e-12)
    }
}

/// Maximizer of the piecewise linear concave `W` over the whole plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Maximizer {
    pub argmax: Point2,
    pub w_max: f64,
    /// Grid indices whose affine piece is active at the maximizer.
    pub active: Vec<usize>,
}

/// Solves `max t` subject to `t + c <z, v_i> <= g_i` through its dual
/// `min g^T l, sum l_i (1, c v_i) = (1, 0, 0), l >= 0` by a revised simplex
/// with Bland's rule.
pub fn maximize_w(grid: &DirectionGrid, bridge: &[f64]) -> Result<Maximizer> {
    let m = grid.m;
    if bridge.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: bridge.len(),
        });
    }
    let dirs = grid.directions();
    let col = |j: usize| Vector3::new(1.0, DRIFT * dirs[j].x, DRIFT * dirs[j].y);
    let b = Vector3::new(1.0, 0.0, 0.0);
    // feasible start: an antipodal pair with equal weights
    let mut basis = [0usize, m / 2, 1];
    let mut y = Vector3::zeros();
    let max_iter = 50 * m;
    for iter in 0..=max_iter {
        if iter == max_iter {
            return Err(Error::invalid("simplex iteration limit reached"));
        }
        let bm = Matrix3::from_columns(&[col(basis[0]), col(basis[1]), col(basis[2])]);
        let binv = bm
            .try_inverse()
            .ok_or_else(|| Error::invalid("singular simplex basis"))?;
        let x = binv * b;
        let cb = Vector3::new(bridge[basis[0]], bridge[basis[1]], bridge[basis[2]]);
        y = binv.transpose() * cb;
        let entering = (0..m).find(|&j| !basis.contains(&j) && bridge[j] - y.dot(&col(j)) < -1e-13);
        let Some(j) = entering else { break };
        let d = binv * col(j);
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..3 {
            if d[r] > 1e-12 {
                let ratio = x[r].max(0.0) / d[r];
                let better = match leave {
                    None => true,
                    Some((lr, best)) => {
                        ratio < best - 1e-15 || (ratio <= best + 1e-15 && basis[r] < basis[lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        let (r, _) = leave.ok_or_else(|| Error::invalid("unbounded dual program"))?;
        basis[r] = j;
    }
    let argmax = Point2::new(y[1], y[2]);
    let w_max = evaluate_at(&dirs, bridge, argmax);
    let active = (0..m)
        .filter(|&i| bridge[i] - DRIFT * argmax.dot(dirs[i]) - w_max <= MINIMIZER_TOL)
        .collect();
    Ok(Maximizer {
        argmax,
        w_max,
        active,
    })
}

fn evaluate_at(dirs: &[Point2], bridge: &[f64], z: Point2) -> f64 {
    dirs.iter()
        .zip(bridge)
        .map(|(v, g)| g - DRIFT * z.dot(*v))
        .fold(f64::INFINITY, f64::min)
}

/// `W(z)` for a single point.
pub fn w_at(grid: &DirectionGrid, bridge: &[f64], z: Point2) -> f64 {
    evaluate_at(&grid.directions(), bridge, z)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitField {
    pub grid: DirectionGrid,
    pub bridge: Vec<f64>,
    pub lattice: Lattice,
    /// Row-major over the square lattice; `NaN` outside the ball.
    pub w: Vec<f64>,
    /// Lattice maximizer and its value.
    pub argmax: Point2,
    pub w_max: f64,
    /// Maximizer over the plane; its active directions form the
    /// minimizing set.
    pub refined: Maximizer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSummary {
    pub argmax: Point2,
    pub w_max: f64,
    pub minimizer_angles: Vec<f64>,
    pub lattice_argmax: Point2,
    pub lattice_w_max: f64,
    pub lattice_spacing: f64,
    pub directions: usize,
}

/// Evaluates `W` on the lattice and locates its maximizers.
pub fn evaluate_w(grid: &DirectionGrid, bridge: &[f64], lattice: Lattice) -> Result<LimitField> {
    let m = grid.m;
    if bridge.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: bridge.len(),
        });
    }
    let h = m / 2;
    let antisymmetric = (0..h).all(|i| bridge[i + h] == -bridge[i]);
    let dirs = grid.directions();
    let cx: Vec<f64> = dirs.iter().map(|v| DRIFT * v.x).collect();
    let cy: Vec<f64> = dirs.iter().map(|v| DRIFT * v.y).collect();
    let side = lattice.side();
    let mut w = vec![f64::NAN; side * side];
    let (mut argmax, mut w_max) = (Point2::default(), f64::NEG_INFINITY);
    for row in 0..side {
        for colm in 0..side {
            let z = lattice.point(row, colm);
            if !lattice.inside(z) {
                continue;
            }
            let value = if antisymmetric {
                let mut worst: f64 = 0.0;
                for i in 0..h {
                    worst = worst.max((bridge[i] - cx[i] * z.x - cy[i] * z.y).abs());
                }
                -worst
            } else {
                let mut best = f64::INFINITY;
                for i in 0..m {
                    best = best.min(bridge[i] - cx[i] * z.x - cy[i] * z.y);
                }
                best
            };
            w[row * side + colm] = value;
            if value > w_max {
                w_max = value;
                argmax = z;
            }
        }
    }
    Ok(LimitField {
        grid: grid.clone(),
        bridge: bridge.to_vec(),
        lattice,
        w,
        argmax,
        w_max,
        refined: maximize_w(grid, bridge)?,
    })
}

impl LimitField {
    /// Lattice points inside the ball with their values.
    pub fn points(&self) -> impl Iterator<Item = (Point2, f64)> + '_ {
        let side = self.lattice.side();
        (0..side * side)
            .filter(|&k| !self.w[k].is_nan())
            .map(move |k| (self.lattice.point(k / side, k % side), self.w[k]))
    }

    pub fn minimizer_angles(&self) -> Vec<f64> {
        self.refined
            .active
            .iter()
            .map(|&i| self.grid.angles[i])
            .collect()
    }

    pub fn summary(&self) -> LimitSummary {
        LimitSummary {
            argmax: self.refined.argmax,
            w_max: self.refined.w_max,
            minimizer_angles: self.minimizer_angles(),
            lattice_argmax: self.argmax,
            lattice_w_max: self.w_max,
            lattice_spacing: self.lattice.spacing,
            directions: self.grid.m,
        }
    }

    /// Largest second difference of `W` along lattice rows and columns.
    pub fn max_second_difference(&self) -> f64 {
        let side = self.lattice.side();
        let at = |r: usize, c: usize| self.w[r * side + c];
        let mut worst = f64::NEG_INFINITY;
        for a in 0..side {
            for b in 1..side.saturating_sub(1) {
                for (p, q, s) in [
                    (at(a, b - 1), at(a, b), at(a, b + 1)),
                    (at(b - 1, a), at(b, a), at(b + 1, a)),
                ] {
                    if !(p.is_nan() || q.is_nan() || s.is_nan()) {
                        worst = worst.max(p - 2.0 * q + s);
                    }
                }
            }
        }
        worst
    }

    /// Whether the origin lies in the convex hull of the minimizing
    /// directions, up to `tol`.
    pub fn origin_in_minimizer_hull(&self, tol: f64) -> bool {
        let pts: Vec<Point2> = self
            .refined
            .active
            .iter()
            .map(|&i| Point2::from_angle(self.grid.angles[i]))
            .collect();
        origin_in_hull(&pts, tol)
    }
}

/// Whether the origin is within `tol` of the convex hull of unit vectors.
pub fn origin_in_hull(points: &[Point2], tol: f64) -> bool {
    let hull = convex_hull(points);
    match hull.len() {
        0 => false,
        1 => hull[0].norm() <= tol,
        2 => crate::geom::segment_distance(Point2::default(), hull[0], hull[1]) <= tol,
        n => (0..n).all(|i| {
            let a = hull[i];
            let b = hull[(i + 1) % n];
            (b - a).cross(-a) / a.dist(b) >= -tol
        }),
    }
}

/// Diameter of the lattice points with `W >= max W - beta`.
pub fn limit_region_diameter(field: &LimitField, beta: f64) -> Result<f64> {
    if !(beta >= 0.0) {
        return Err(Error::invalid("beta must be nonnegative"));
    }
    let level = field.w_max - beta;
    let pts: Vec<Point2> = field.points().filter(|&(_, w)| w >= level).map(|(z, _)| z).collect();
    Ok(rotating_calipers(&convex_hull(&pts)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinementCheck {
    pub coarse_m: usize,
    pub fine_m: usize,
    /// Largest change of `W` over the lattice.
    pub max_abs_change: f64,
    /// `W` on the fine grid never exceeds `W` on the coarse one.
    pub monotone: bool,
    pub argmax_shift: f64,
}

/// Compares `W` on a grid of `m` directions with `W` on `2m` directions,
/// the coarse bridge being the even-indexed values of the fine one.
pub fn grid_refinement_check(m: usize, seed: u64, lattice: Lattice) -> Result<RefinementCheck> {
    let coarse = DirectionGrid::new(m)?;
    let fine = DirectionGrid::new(2 * m)?;
    let g_fine = simulate_bridge(&fine, seed)?;
    let g_coarse: Vec<f64> = g_fine.iter().step_by(2).copied().collect();
    let fc = evaluate_w(&coarse, &g_coarse, lattice)?;
    let ff = evaluate_w(&fine, &g_fine, lattice)?;
    let mut max_abs_change: f64 = 0.0;
    let mut monotone = true;
    for (a, b) in fc.w.iter().zip(&ff.w) {
        if a.is_nan() {
            continue;
        }
        max_abs_change = max_abs_change.max((a - b).abs());
        monotone &= *b <= *a + 1e-12;
    }
    Ok(RefinementCheck {
        coarse_m: m,
        fine_m: 2 * m,
        max_abs_change,
        monotone,
        argmax_shift: fc.refined.argmax.dist(ff.refined.argmax),
    })
}
