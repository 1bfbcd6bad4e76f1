//! Shared numerical kernels: rank decisions, nullspaces, least squares,
//! and the matrix exponential.
//!
//! Every rank decision in the crate routes through [`numeric_rank`] so that
//! a single relative threshold governs all of them and the worst margin
//! (`gap`) can be reported globally.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Relative singular-value threshold: singular values above
/// `rel_tol * sigma_max` count toward rank.
pub const DEFAULT_SVD_REL_TOL: f64 = 1e-8;

/// Outcome of a thresholded rank decision.
#[derive(Debug, Clone, Copy)]
pub struct RankDecision {
    pub rank: usize,
    /// Smallest retained singular value over the largest discarded one.
    /// `INFINITY` when nothing was discarded or the matrix is exactly zero.
    pub gap: f64,
}

impl RankDecision {
    pub fn full(rank: usize) -> Self {
        RankDecision {
            rank,
            gap: f64::INFINITY,
        }
    }
}

/// Decide the rank of a singular spectrum with a relative threshold.
pub fn numeric_rank(svals: &[f64], rel_tol: f64) -> RankDecision {
    numeric_rank_floored(svals, rel_tol, 0.0)
}

/// Rank decision with an additional absolute floor, for matrices whose
/// entries have a known O(1) scale and may vanish identically (pure
/// rounding noise must not count toward rank).
pub fn numeric_rank_floored(svals: &[f64], rel_tol: f64, abs_floor: f64) -> RankDecision {
    let sigma_max = svals.iter().cloned().fold(0.0_f64, f64::max);
    if sigma_max <= abs_floor {
        return RankDecision {
            rank: 0,
            gap: f64::INFINITY,
        };
    }
    let thresh = (rel_tol * sigma_max).max(abs_floor);
    let mut retained_min = f64::INFINITY;
    let mut discarded_max = 0.0_f64;
    let mut rank = 0;
    for &s in svals {
        if s > thresh {
            rank += 1;
            retained_min = retained_min.min(s);
        } else {
            discarded_max = discarded_max.max(s);
        }
    }
    let gap = if discarded_max == 0.0 {
        f64::INFINITY
    } else {
        retained_min / discarded_max
    };
    RankDecision { rank, gap }
}

/// One-sided Jacobi (Hestenes) singular value decomposition.
///
/// Orthogonalizes the columns of `A` by plane rotations accumulated into
/// `V`; on convergence `A V = U diag(sigma)`. `V` is always the full
/// `n x n` orthogonal factor, so kernels of wide matrices are complete.
/// Left vectors are paired with their singular values by construction.
/// Rotations are applied until every column pair is numerically
/// orthogonal, which for the small dense matrices in this crate is
/// reached in a handful of sweeps.
pub struct JacobiSvd {
    /// Singular values, descending.
    pub svals: Vec<f64>,
    /// Left vectors (columns; zero where the singular value vanishes).
    pub u: DMatrix<f64>,
    /// Right vectors (columns), a full orthogonal basis of R^n.
    pub v: DMatrix<f64>,
}

pub fn jacobi_svd(a: &DMatrix<f64>) -> JacobiSvd {
    let (rows, cols) = a.shape();
    let mut w = a.clone();
    let mut v = DMatrix::<f64>::identity(cols, cols);
    let tol = 1e-15_f64;
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let wp = w.column(p);
                let wq = w.column(q);
                let app = wp.dot(&wp);
                let aqq = wq.dot(&wq);
                let apq = wp.dot(&wq);
                if apq.abs() <= tol * (app * aqq).sqrt() || apq == 0.0 {
                    continue;
                }
                rotated = true;
                // rotation diagonalizing [[app, apq], [apq, aqq]]
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for r in 0..rows {
                    let wp_r = w[(r, p)];
                    let wq_r = w[(r, q)];
                    w[(r, p)] = cs * wp_r - sn * wq_r;
                    w[(r, q)] = sn * wp_r + cs * wq_r;
                }
                for r in 0..cols {
                    let vp_r = v[(r, p)];
                    let vq_r = v[(r, q)];
                    v[(r, p)] = cs * vp_r - sn * vq_r;
                    v[(r, q)] = sn * vp_r + cs * vq_r;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    // extract singular values and sort descending
    let mut order: Vec<usize> = (0..cols).collect();
    let norms: Vec<f64> = (0..cols).map(|j| w.column(j).norm()).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());
    let mut svals = Vec::with_capacity(cols);
    let mut u = DMatrix::<f64>::zeros(rows, cols);
    let mut v_sorted = DMatrix::<f64>::zeros(cols, cols);
    for (out, &j) in order.iter().enumerate() {
        let s = norms[j];
        svals.push(s);
        if s > 0.0 {
            u.set_column(out, &(w.column(j) / s));
        }
        v_sorted.set_column(out, &v.column(j).into_owned());
    }
    JacobiSvd {
        svals,
        u,
        v: v_sorted,
    }
}

/// Orthonormal basis of the kernel of `a` together with the rank decision.
///
/// The returned matrix has `a.ncols()` rows and `dim ker` columns.
pub fn kernel_basis(a: &DMatrix<f64>, rel_tol: f64) -> (DMatrix<f64>, RankDecision) {
    kernel_basis_floored(a, rel_tol, 0.0)
}

/// Kernel basis with an absolute singular-value floor (see
/// [`numeric_rank_floored`]).
pub fn kernel_basis_floored(
    a: &DMatrix<f64>,
    rel_tol: f64,
    abs_floor: f64,
) -> (DMatrix<f64>, RankDecision) {
    let cols = a.ncols();
    if cols == 0 {
        return (DMatrix::zeros(0, 0), RankDecision::full(0));
    }
    if a.nrows() == 0 {
        return (DMatrix::identity(cols, cols), RankDecision::full(0));
    }
    let svd = jacobi_svd(a);
    let decision = numeric_rank_floored(&svd.svals, rel_tol, abs_floor);
    let kdim = cols - decision.rank;
    let mut kernel = DMatrix::<f64>::zeros(cols, kdim);
    for (out, col) in (decision.rank..cols).enumerate() {
        kernel.set_column(out, &svd.v.column(col).into_owned());
    }
    (kernel, decision)
}

/// Minimum-norm least-squares solution of `a x = b`.
#[derive(Debug, Clone)]
pub struct Lstsq {
    pub solution: DVector<f64>,
    /// Euclidean norm of `a x - b`.
    pub residual: f64,
    pub decision: RankDecision,
}

pub fn lstsq_min_norm(a: &DMatrix<f64>, b: &DVector<f64>, rel_tol: f64) -> Lstsq {
    let (rows, cols) = a.shape();
    assert_eq!(rows, b.len(), "lstsq shape mismatch");
    if cols == 0 {
        return Lstsq {
            solution: DVector::zeros(0),
            residual: b.norm(),
            decision: RankDecision::full(0),
        };
    }
    let svd = jacobi_svd(a);
    let decision = numeric_rank(&svd.svals, rel_tol);
    // truncated pseudoinverse: the minimum-norm least-squares solution
    let mut x = DVector::<f64>::zeros(cols);
    for i in 0..decision.rank {
        let coef = svd.u.column(i).dot(b) / svd.svals[i];
        x += svd.v.column(i) * coef;
    }
    let residual = (a * &x - b).norm();
    Lstsq {
        solution: x,
        residual,
        decision,
    }
}

/// Orthonormal basis of the column span of `a` (columns need not be
/// independent); the span's dimension is decided by `rel_tol`.
pub fn column_span_basis(a: &DMatrix<f64>, rel_tol: f64) -> (DMatrix<f64>, RankDecision) {
    if a.ncols() == 0 {
        return (
            DMatrix::<f64>::zeros(a.nrows(), 0),
            RankDecision::full(0),
        );
    }
    let svd = jacobi_svd(a);
    let decision = numeric_rank(&svd.svals, rel_tol);
    let basis = svd.u.columns(0, decision.rank).into_owned();
    (basis, decision)
}

/// Orthonormal basis of the orthogonal complement of `span` inside R^n,
/// where `span` has orthonormal columns and n = `span.nrows()`.
pub fn orthogonal_complement(span: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let (kernel, _) = kernel_basis(&span.transpose(), rel_tol);
    kernel
}

/// Orthonormalize a set of vectors that is expected to be linearly
/// independent; rejects rank-deficient input.
pub fn orthonormalize_exact(a: &DMatrix<f64>, rel_tol: f64) -> Result<DMatrix<f64>> {
    let (basis, decision) = column_span_basis(a, rel_tol);
    if decision.rank != a.ncols() {
        return Err(Error::DegenerateBasis {
            expected: a.ncols(),
            got: decision.rank,
        });
    }
    Ok(basis)
}

/// Matrix exponential by scaling and squaring with a Taylor core.
///
/// Rejects arguments with Frobenius norm above 1e6; beyond that the
/// squaring chain grows without a practical use case here.
pub fn expm(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    let norm = a.norm();
    if !norm.is_finite() || norm > 1e6 {
        return Err(Error::ExpOverflow(norm));
    }
    let squarings = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a / 2f64.powi(squarings as i32);
    let mut result = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for k in 1..=40 {
        term = (&term * &scaled) / (k as f64);
        result += &term;
        if term.norm() < 1e-18 * result.norm() {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    Ok(result)
}
