//! Homogeneous geodesics evaluated in the defining representation:
//! `gamma(t) = exp(t (X + F)) . o` for the solved generator `F`, plus
//! trajectory diagnostics (unit-norm preservation, best-2-plane residual)
//! and a spectral estimate of the closure dimension of the orbit.

use nalgebra::{DMatrix, DVector};

use crate::goverify::{self, Verdict};
use crate::homspace::{HomogeneousSpace, MetricOperator};
use crate::{Error, Result, Tolerances};

/// A sampled orbit in the ambient representation sphere.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub space_id: String,
    /// Generator `Z = X + F` in algebra coordinates.
    pub generator: DVector<f64>,
    pub times: Vec<f64>,
    pub points: Vec<DVector<f64>>,
    pub metric: String,
}

const GO_GATE_SEED: u64 = 0x600d_5eed;

/// Evaluate the homogeneous geodesic through the base point.
///
/// Rejects spaces without a cataloged base point and metrics whose
/// geodesic-orbit certificate is not `Go` (the orbit would not be a
/// geodesic). Each point is computed by its own matrix exponential.
pub fn orbit_trajectory(
    space: &HomogeneousSpace,
    metric: &MetricOperator,
    x_dir: &DVector<f64>,
    t_max: f64,
    n_steps: usize,
    tol: &Tolerances,
) -> Result<Trajectory> {
    let base = space
        .base_point
        .as_ref()
        .ok_or_else(|| Error::MissingBasePoint(space.catalog_id.clone()))?;
    if x_dir.norm() == 0.0 {
        return Err(Error::InvalidInput("X must be nonzero".into()));
    }
    if n_steps < 2 || t_max.is_nan() || t_max <= 0.0 {
        return Err(Error::InvalidInput("need t_max > 0 and at least 2 steps".into()));
    }
    let gate = goverify::go_check(space, metric, 8, GO_GATE_SEED, tol)?;
    if gate.verdict != Verdict::Go {
        return Err(Error::NotGeodesicOrbit(format!(
            "{} with {} (max residual {:.3e})",
            space.catalog_id,
            metric.spec.describe(),
            gate.max_residual
        )));
    }
    let x = x_dir / x_dir.norm();
    let solve = goverify::solve_geodesic_generator(space, metric, &x, tol)?;
    let z = &x + &solve.generator_h;
    let zm = space.g.matrix_of(&z);
    let mut times = Vec::with_capacity(n_steps);
    let mut points = Vec::with_capacity(n_steps);
    for k in 0..n_steps {
        let t = t_max * k as f64 / (n_steps - 1) as f64;
        let gmat = crate::kernels::expm(&(&zm * t))?;
        let p = &gmat * base;
        let drift = (p.norm() - 1.0).abs();
        if drift > 1e-9 {
            return Err(Error::StructuralInvariant {
                what: format!("trajectory point at t = {t} left the unit sphere"),
                residual: drift,
            });
        }
        times.push(t);
        points.push(p);
    }
    Ok(Trajectory {
        space_id: space.catalog_id.clone(),
        generator: z,
        times,
        points,
        metric: metric.spec.describe(),
    })
}

impl Trajectory {
    pub fn max_unit_norm_drift(&self) -> f64 {
        self.points
            .iter()
            .map(|p| (p.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Finite-difference speeds along the grid.
    pub fn chord_speeds(&self) -> Vec<f64> {
        self.points
            .windows(2)
            .zip(self.times.windows(2))
            .map(|(p, t)| (&p[1] - &p[0]).norm() / (t[1] - t[0]))
            .collect()
    }

    /// CSV export: `t, x0, x1, ...` per row.
    pub fn to_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        let dim = self.points.first().map(|p| p.len()).unwrap_or(0);
        let header: Vec<String> = std::iter::once("t".to_string())
            .chain((0..dim).map(|i| format!("x{i}")))
            .collect();
        writeln!(w, "{}", header.join(","))?;
        for (t, p) in self.times.iter().zip(&self.points) {
            let row: Vec<String> = std::iter::once(format!("{t:.17e}"))
                .chain(p.iter().map(|v| format!("{v:.17e}")))
                .collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Root-mean-square distance of the point cloud to its best 2-plane
/// through the origin, relative to the RMS point norm.
pub fn planarity_residual(traj: &Trajectory) -> Result<f64> {
    if traj.points.len() < 16 {
        return Err(Error::InvalidInput(format!(
            "planarity needs at least 16 points, got {}",
            traj.points.len()
        )));
    }
    let dim = traj.points[0].len();
    let mut cloud = DMatrix::<f64>::zeros(traj.points.len(), dim);
    for (i, p) in traj.points.iter().enumerate() {
        cloud.row_mut(i).copy_from(&p.transpose());
    }
    let svals = crate::kernels::jacobi_svd(&cloud).svals;
    let total: f64 = svals.iter().map(|s| s * s).sum();
    let off_plane: f64 = svals.iter().skip(2).map(|s| s * s).sum();
    Ok((off_plane / total).sqrt())
}

/// Spectral closure-dimension estimate for the orbit of `exp(t Z)` through
/// the base point.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ClosureEstimate {
    /// Number of rational-dependence classes among the retained
    /// frequencies: the dimension of the closure torus.
    pub dim: usize,
    /// Frequencies whose invariant plane carries the base point.
    pub retained: Vec<f64>,
    /// A frequency ratio whose rationality decision sits near the
    /// denominator bound, if any.
    pub ambiguous_ratio: Option<f64>,
}

pub const RATIO_DENOMINATOR_BOUND: u64 = 64;
pub const RATIO_TOL: f64 = 1e-9;
const AMPLITUDE_TOL: f64 = 1e-8;

/// Smallest denominator `q <= limit` with `|r - p/q| <= tol`, if any.
fn rational_denominator(r: f64, tol: f64, limit: u64) -> Option<u64> {
    for q in 1..=limit {
        let p = (r * q as f64).round();
        if (r - p / q as f64).abs() <= tol {
            return Some(q);
        }
    }
    None
}

pub fn closure_dim_estimate(
    space: &HomogeneousSpace,
    z: &DVector<f64>,
) -> Result<ClosureEstimate> {
    let base = space
        .base_point
        .as_ref()
        .ok_or_else(|| Error::MissingBasePoint(space.catalog_id.clone()))?;
    if z.norm() == 0.0 {
        return Err(Error::InvalidInput("Z must be nonzero".into()));
    }
    let zm = space.g.matrix_of(z);
    // Z^2 is symmetric negative semidefinite; its eigenvalue -theta^2 has
    // the invariant planes of the frequency theta as eigenspace.
    let z2 = &zm * &zm;
    let eig = z2.symmetric_eigen();
    let thetas: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|mu| (-mu).max(0.0).sqrt())
        .collect();
    let theta_max = thetas.iter().cloned().fold(0.0_f64, f64::max);
    if theta_max == 0.0 {
        return Err(Error::InvalidInput("Z acts trivially".into()));
    }

    // cluster equal frequencies and accumulate the base-point amplitude
    let mut order: Vec<usize> = (0..thetas.len()).collect();
    order.sort_by(|&a, &b| thetas[a].partial_cmp(&thetas[b]).unwrap());
    let cluster_tol = 1e-9 * theta_max;
    let mut clusters: Vec<(f64, f64)> = Vec::new(); // (theta, squared amplitude)
    for idx in order {
        let theta = thetas[idx];
        let amp2 = eig.eigenvectors.column(idx).dot(base).powi(2);
        match clusters.last_mut() {
            Some((t, a)) if (theta - *t).abs() <= cluster_tol => *a += amp2,
            _ => clusters.push((theta, amp2)),
        }
    }
    let retained: Vec<f64> = clusters
        .into_iter()
        .filter(|(theta, amp2)| *theta > 1e-12 * theta_max && amp2.sqrt() > AMPLITUDE_TOL)
        .map(|(theta, _)| theta)
        .collect();
    if retained.is_empty() {
        // base point sits in the fixed space of Z: a single point
        return Ok(ClosureEstimate {
            dim: 0,
            retained,
            ambiguous_ratio: None,
        });
    }

    // union-find over rational dependence of frequency ratios
    let n = retained.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    let mut ambiguous_ratio = None;
    for i in 0..n {
        for j in (i + 1)..n {
            let ratio = retained[j].max(retained[i]) / retained[j].min(retained[i]);
            match rational_denominator(ratio, RATIO_TOL, 2 * RATIO_DENOMINATOR_BOUND) {
                Some(q) if q <= RATIO_DENOMINATOR_BOUND => {
                    if q > RATIO_DENOMINATOR_BOUND * 3 / 4 {
                        ambiguous_ratio = Some(ratio);
                    }
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    if ri != rj {
                        parent[ri] = rj;
                    }
                }
                Some(_) => {
                    // matches a rational just above the bound
                    ambiguous_ratio = Some(ratio);
                }
                None => {}
            }
        }
    }
    let mut roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    roots.sort_unstable();
    roots.dedup();
    Ok(ClosureEstimate {
        dim: roots.len(),
        retained,
        ambiguous_ratio,
    })
}
