//! Homogeneous-space data: orthogonal decompositions `g = h + l + m`,
//! invariant metric operators on `v = l + m`, and metric Hamiltonians.
//!
//! A [`HomogeneousSpace`] is immutable after construction and every
//! structural claim it carries (orthogonality, reductivity, closure of
//! `k = h + l`, cataloged bracket flags, base-point stabilization) is
//! verified numerically at build time; see [`HomogeneousSpace::validate`].

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::kernels;
use crate::liealg::LieAlgebraRep;
use crate::poisson::{InvariantPolynomial, PolyDomain, PolyKind};
use crate::{Error, Result, Tolerances};

/// Designates a distinguished subspace of the decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Submodule {
    V,
    L,
    M,
}

/// A subspace of the algebra, stored as orthonormal columns in the
/// coefficient space of the parent algebra's basis.
#[derive(Debug, Clone)]
pub struct Subspace {
    basis: DMatrix<f64>,
}

impl Subspace {
    pub fn new(basis: DMatrix<f64>) -> Self {
        Subspace { basis }
    }

    pub fn empty(parent_dim: usize) -> Self {
        Subspace {
            basis: DMatrix::zeros(parent_dim, 0),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn column(&self, j: usize) -> DVector<f64> {
        self.basis.column(j).into_owned()
    }

    /// Coordinates of `x` relative to this subspace basis.
    pub fn coords(&self, x: &DVector<f64>) -> DVector<f64> {
        self.basis.transpose() * x
    }

    /// Embed subspace coordinates back into the parent space.
    pub fn from_coords(&self, c: &DVector<f64>) -> DVector<f64> {
        &self.basis * c
    }

    /// Orthogonal projection of `x` onto the subspace.
    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.basis * (self.basis.transpose() * x)
    }
}

/// Cataloged structural claims; every `true` flag is re-verified
/// numerically when a space is built.
#[derive(Debug, Clone, Copy, Default, serde::Serialize)]
pub struct SpaceFlags {
    /// `[l, h] = 0`
    pub l_h_commute: bool,
    /// `[l, l]` stays in `l`
    pub l_closed: bool,
    /// `[l, l] = 0`
    pub l_abelian: bool,
    /// `(g, k)` is a symmetric pair: `[m, m]` stays in `k`
    pub gk_symmetric: bool,
    /// generic isotropy dimensions satisfy `dim g_x = dim g_{x_m}`
    /// (equality certified downstream, not at build time)
    pub isotropy_equality: bool,
}

/// Dimension summary of a decomposition.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct Dims {
    pub g: usize,
    pub h: usize,
    pub l: usize,
    pub m: usize,
    pub v: usize,
}

/// Residuals of the build-time structural checks.
#[derive(Debug, Clone, serde::Serialize)]
pub struct StructuralReport {
    pub gram_residual: f64,
    pub h_closure_residual: f64,
    pub k_closure_residual: f64,
    pub reductivity_residual: f64,
    pub l_h_commute_residual: Option<f64>,
    pub l_closed_residual: Option<f64>,
    pub l_abelian_residual: Option<f64>,
    pub gk_symmetric_residual: Option<f64>,
    pub base_point_residual: Option<f64>,
}

/// A triple `(G, K, H)` with its orthogonal decomposition. Pairs `(G, H)`
/// are represented with `K = H`, so `l = 0` and `m = v`.
#[derive(Debug)]
pub struct HomogeneousSpace {
    pub g: LieAlgebraRep,
    pub h: Subspace,
    pub l: Subspace,
    pub m: Subspace,
    /// `v = l + m`, columns ordered l-block first.
    pub v: Subspace,
    /// `k = h + l`, columns ordered h-block first.
    pub k: Subspace,
    pub catalog_id: String,
    pub label: String,
    pub flags: SpaceFlags,
    /// Unit vector in the ambient representation stabilized by `H`
    /// (modulo a right phase when `base_point_phase` is set).
    pub base_point: Option<DVector<f64>>,
    /// The base point is fixed by `H` only up to the right-multiplication
    /// phase circle (projective models).
    pub base_point_phase: bool,
    /// Tangent of the phase circle at the base point, when applicable.
    pub phase_tangent: Option<DVector<f64>>,
}

pub type SpaceRef = Arc<HomogeneousSpace>;

impl HomogeneousSpace {
    pub fn dims(&self) -> Dims {
        Dims {
            g: self.g.dim(),
            h: self.h.dim(),
            l: self.l.dim(),
            m: self.m.dim(),
            v: self.v.dim(),
        }
    }

    pub fn is_pair(&self) -> bool {
        self.l.dim() == 0
    }

    pub fn subspace(&self, sub: Submodule) -> &Subspace {
        match sub {
            Submodule::V => &self.v,
            Submodule::L => &self.l,
            Submodule::M => &self.m,
        }
    }

    /// Standard-normal sample in the given submodule, normalized to unit
    /// invariant norm, returned in algebra coordinates.
    pub fn random_unit_in<R: Rng>(&self, sub: Submodule, rng: &mut R) -> DVector<f64> {
        let basis = self.subspace(sub);
        assert!(basis.dim() > 0, "cannot sample from a zero subspace");
        loop {
            let c = DVector::from_fn(basis.dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
            let n = c.norm();
            if n > 1e-6 {
                return basis.from_coords(&(c / n));
            }
        }
    }

    /// Max-norm residual of all structural invariants; errors carry the
    /// first failing check.
    pub fn validate(&self, tol: &Tolerances) -> Result<StructuralReport> {
        let dims = self.dims();
        if dims.h + dims.l + dims.m != dims.g {
            return Err(Error::StructuralInvariant {
                what: format!(
                    "dimension split {} + {} + {} != {}",
                    dims.h, dims.l, dims.m, dims.g
                ),
                residual: f64::NAN,
            });
        }

        // Gram matrix of the concatenated basis must be the identity.
        let mut full = DMatrix::<f64>::zeros(dims.g, dims.g);
        full.view_mut((0, 0), (dims.g, dims.h)).copy_from(self.h.basis());
        full.view_mut((0, dims.h), (dims.g, dims.l)).copy_from(self.l.basis());
        full.view_mut((0, dims.h + dims.l), (dims.g, dims.m))
            .copy_from(self.m.basis());
        let gram_residual = (full.transpose() * &full - DMatrix::<f64>::identity(dims.g, dims.g))
            .abs()
            .max();
        let mut report = StructuralReport {
            gram_residual,
            h_closure_residual: 0.0,
            k_closure_residual: 0.0,
            reductivity_residual: 0.0,
            l_h_commute_residual: None,
            l_closed_residual: None,
            l_abelian_residual: None,
            gk_symmetric_residual: None,
            base_point_residual: None,
        };
        let fail = |what: &str, residual: f64| Error::StructuralInvariant {
            what: what.to_string(),
            residual,
        };
        if gram_residual >= tol.eps_zero {
            return Err(fail("orthonormality of h|l|m", gram_residual));
        }

        // [h, h] stays in h.
        let mut h_res = 0.0_f64;
        for i in 0..dims.h {
            for j in (i + 1)..dims.h {
                let br = self
                    .g
                    .bracket_coeffs(&self.h.column(i), &self.h.column(j));
                h_res = h_res.max(self.v.coords(&br).norm());
            }
        }
        report.h_closure_residual = h_res;
        if h_res >= tol.eps_zero {
            return Err(fail("closure of h", h_res));
        }

        // [k, k] stays in k = h + l.
        let mut k_res = 0.0_f64;
        for i in 0..dims.h + dims.l {
            for j in (i + 1)..dims.h + dims.l {
                let br = self
                    .g
                    .bracket_coeffs(&self.k.column(i), &self.k.column(j));
                k_res = k_res.max(self.m.coords(&br).norm());
            }
        }
        report.k_closure_residual = k_res;
        if k_res >= tol.eps_zero {
            return Err(fail("closure of k", k_res));
        }

        // [h, v] stays in v.
        let mut red_res = 0.0_f64;
        for i in 0..dims.h {
            for j in 0..dims.v {
                let br = self
                    .g
                    .bracket_coeffs(&self.h.column(i), &self.v.column(j));
                red_res = red_res.max(self.h.coords(&br).norm());
            }
        }
        report.reductivity_residual = red_res;
        if red_res >= tol.eps_zero {
            return Err(fail("reductivity [h, v] in v", red_res));
        }

        if self.flags.l_h_commute {
            let mut r = 0.0_f64;
            for i in 0..dims.l {
                for j in 0..dims.h {
                    r = r.max(
                        self.g
                            .bracket_coeffs(&self.l.column(i), &self.h.column(j))
                            .norm(),
                    );
                }
            }
            report.l_h_commute_residual = Some(r);
            if r >= tol.eps_zero {
                return Err(fail("[l, h] = 0", r));
            }
        }
        if self.flags.l_closed || self.flags.l_abelian {
            let mut closed = 0.0_f64;
            let mut abelian = 0.0_f64;
            for i in 0..dims.l {
                for j in (i + 1)..dims.l {
                    let br = self
                        .g
                        .bracket_coeffs(&self.l.column(i), &self.l.column(j));
                    abelian = abelian.max(br.norm());
                    closed = closed.max((&br - self.l.project(&br)).norm());
                }
            }
            if self.flags.l_closed {
                report.l_closed_residual = Some(closed);
                if closed >= tol.eps_zero {
                    return Err(fail("[l, l] in l", closed));
                }
            }
            if self.flags.l_abelian {
                report.l_abelian_residual = Some(abelian);
                if abelian >= tol.eps_zero {
                    return Err(fail("[l, l] = 0", abelian));
                }
            }
        }
        if self.flags.gk_symmetric {
            let mut r = 0.0_f64;
            for i in 0..dims.m {
                for j in (i + 1)..dims.m {
                    let br = self
                        .g
                        .bracket_coeffs(&self.m.column(i), &self.m.column(j));
                    r = r.max(self.m.coords(&br).norm());
                }
            }
            report.gk_symmetric_residual = Some(r);
            if r >= tol.eps_zero {
                return Err(fail("[m, m] in k", r));
            }
        }
        if let Some(o) = &self.base_point {
            let mut r = (o.norm() - 1.0).abs();
            for j in 0..dims.h {
                let img = self.g.matrix_of(&self.h.column(j)) * o;
                let res = match (&self.base_point_phase, &self.phase_tangent) {
                    (true, Some(u)) => (&img - u * u.dot(&img)).norm(),
                    _ => img.norm(),
                };
                r = r.max(res);
            }
            report.base_point_residual = Some(r);
            if r >= tol.eps_zero {
                return Err(fail("base point stabilized by h", r));
            }
        }
        Ok(report)
    }
}

/// An invariant metric on `v`, described by its positive operator `I`.
#[derive(Debug, Clone)]
pub enum MetricSpec {
    /// `I = id` (normal metric).
    Normal,
    /// `I = lambda` on `l` and identity on `m`.
    Lambda(f64),
    /// `I = a_l` on `l` (in l-coordinates) and `lambda_m` on `m`.
    Fiber { a_l: DMatrix<f64>, lambda_m: f64 },
}

impl MetricSpec {
    pub fn describe(&self) -> String {
        match self {
            MetricSpec::Normal => "normal".to_string(),
            MetricSpec::Lambda(l) => format!("lambda({l})"),
            MetricSpec::Fiber { a_l, lambda_m } => {
                let d: Vec<String> = (0..a_l.nrows())
                    .map(|i| format!("{:.6}", a_l[(i, i)]))
                    .collect();
                format!("fiber(a_l~[{}], lambda_m={lambda_m})", d.join(","))
            }
        }
    }
}

/// Realized metric operator: `I` and `A = I^{-1}` on v-coordinates
/// (l-block first, matching the ordering of `space.v`).
#[derive(Debug, Clone)]
pub struct MetricOperator {
    pub spec: MetricSpec,
    pub i_v: DMatrix<f64>,
    pub a_v: DMatrix<f64>,
    /// Commutation residual of `I` with the `ad_h`-action on `v`.
    pub ad_invariance_residual: f64,
}

impl MetricOperator {
    /// Apply `I` to an algebra-coordinate vector lying in `v`.
    pub fn apply_i(&self, space: &HomogeneousSpace, x: &DVector<f64>) -> DVector<f64> {
        space.v.from_coords(&(&self.i_v * space.v.coords(x)))
    }

    /// Apply `A = I^{-1}` likewise.
    pub fn apply_a(&self, space: &HomogeneousSpace, x: &DVector<f64>) -> DVector<f64> {
        space.v.from_coords(&(&self.a_v * space.v.coords(x)))
    }

    /// Largest eigenvalue of `I` (used for residual normalization).
    pub fn operator_norm(&self) -> f64 {
        self.i_v
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(0.0_f64, |a, b| a.max(b.abs()))
    }
}

/// Matrix of `ad_eta` restricted to `v`, in v-coordinates.
pub fn ad_matrix_on_v(space: &HomogeneousSpace, eta: &DVector<f64>) -> DMatrix<f64> {
    let dv = space.v.dim();
    let mut n = DMatrix::<f64>::zeros(dv, dv);
    for j in 0..dv {
        let br = space.g.bracket_coeffs(eta, &space.v.column(j));
        n.set_column(j, &space.v.coords(&br));
    }
    n
}

/// Build `(I, A)` for a metric specification, rejecting non-positive
/// operators and operators that fail `Ad_H`-invariance.
pub fn metric_operator(space: &HomogeneousSpace, spec: &MetricSpec) -> Result<MetricOperator> {
    let dl = space.l.dim();
    let dv = space.v.dim();
    let (i_v, a_v) = match spec {
        MetricSpec::Normal => (DMatrix::identity(dv, dv), DMatrix::identity(dv, dv)),
        MetricSpec::Lambda(lambda) => {
            if lambda.is_nan() || *lambda <= 0.0 {
                return Err(Error::InvalidMetric(format!(
                    "lambda must be positive, got {lambda}"
                )));
            }
            let mut i_v = DMatrix::<f64>::identity(dv, dv);
            let mut a_v = DMatrix::<f64>::identity(dv, dv);
            for j in 0..dl {
                i_v[(j, j)] = *lambda;
                a_v[(j, j)] = 1.0 / lambda;
            }
            (i_v, a_v)
        }
        MetricSpec::Fiber { a_l, lambda_m } => {
            if dl == 0 {
                return Err(Error::InvalidMetric(
                    "fiber operator needs a nontrivial l".to_string(),
                ));
            }
            if a_l.nrows() != dl || a_l.ncols() != dl {
                return Err(Error::InvalidMetric(format!(
                    "fiber block is {}x{}, l has dimension {dl}",
                    a_l.nrows(),
                    a_l.ncols()
                )));
            }
            if (a_l - a_l.transpose()).abs().max() > 1e-12 {
                return Err(Error::InvalidMetric("fiber block must be symmetric".into()));
            }
            if lambda_m.is_nan() || *lambda_m <= 0.0 {
                return Err(Error::InvalidMetric(format!(
                    "lambda_m must be positive, got {lambda_m}"
                )));
            }
            let eig = a_l.clone().symmetric_eigen();
            let min_eig = eig.eigenvalues.min();
            if min_eig <= 0.0 {
                return Err(Error::IndefiniteForm(min_eig));
            }
            let mut i_v = DMatrix::<f64>::identity(dv, dv) * *lambda_m;
            i_v.view_mut((0, 0), (dl, dl)).copy_from(a_l);
            // blockwise exact inverse
            let a_l_inv = eig.recompose_inverse();
            let mut a_v = DMatrix::<f64>::identity(dv, dv) / *lambda_m;
            a_v.view_mut((0, 0), (dl, dl)).copy_from(&a_l_inv);
            (i_v, a_v)
        }
    };

    let mut ad_res = 0.0_f64;
    for j in 0..space.h.dim() {
        let n = ad_matrix_on_v(space, &space.h.column(j));
        let comm = (&i_v * &n - &n * &i_v).abs().max();
        let scale = i_v.abs().max() * n.abs().max().max(1e-300);
        ad_res = ad_res.max(comm / scale.max(1e-300));
    }
    if ad_res >= 1e-9 {
        return Err(Error::InvalidMetric(format!(
            "operator is not Ad_H-invariant (residual {ad_res:.3e})"
        )));
    }
    Ok(MetricOperator {
        spec: spec.clone(),
        i_v,
        a_v,
        ad_invariance_residual: ad_res,
    })
}

trait RecomposeInverse {
    fn recompose_inverse(&self) -> DMatrix<f64>;
}

impl RecomposeInverse for nalgebra::SymmetricEigen<f64, nalgebra::Dyn> {
    fn recompose_inverse(&self) -> DMatrix<f64> {
        let mut d = DMatrix::<f64>::zeros(self.eigenvalues.len(), self.eigenvalues.len());
        for (i, ev) in self.eigenvalues.iter().enumerate() {
            d[(i, i)] = 1.0 / ev;
        }
        &self.eigenvectors * d * self.eigenvectors.transpose()
    }
}

/// The metric Hamiltonian `h_A(x) = <A x, x>/2` together with the split
/// `h_0` and `delta` components of the lambda-deformation.
pub struct HamiltonianSet {
    pub h_metric: InvariantPolynomial,
    pub h0: InvariantPolynomial,
    pub delta: InvariantPolynomial,
}

pub fn hamiltonian(space: &SpaceRef, metric: &MetricOperator) -> HamiltonianSet {
    let domain = PolyDomain {
        space: space.clone(),
        submodule: Submodule::V,
    };
    HamiltonianSet {
        h_metric: InvariantPolynomial::new(
            format!("h[{}]", metric.spec.describe()),
            2,
            domain.clone(),
            PolyKind::MetricHamiltonian {
                a_v: metric.a_v.clone(),
            },
        ),
        h0: InvariantPolynomial::new("h0".to_string(), 2, domain.clone(), PolyKind::NormHalf {
            restrict: Submodule::V,
        }),
        delta: InvariantPolynomial::new("delta".to_string(), 2, domain, PolyKind::NormHalf {
            restrict: Submodule::L,
        }),
    }
}

/// `h_{lambda,A} = h_lambda + <x_l, A_l x_l>/2`, accepted only when the
/// total quadratic form is positive definite; returns the Hamiltonian and
/// the certified smallest eigenvalue.
pub fn perturbed_hamiltonian(
    space: &SpaceRef,
    lambda: f64,
    a_l: &DMatrix<f64>,
) -> Result<(InvariantPolynomial, f64)> {
    let dl = space.l.dim();
    let dv = space.v.dim();
    if dl == 0 {
        return Err(Error::InapplicableRecipe(
            "perturbed Hamiltonian needs a nontrivial l".to_string(),
        ));
    }
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::InvalidMetric(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if a_l.nrows() != dl || a_l.ncols() != dl || (a_l - a_l.transpose()).abs().max() > 1e-12 {
        return Err(Error::InvalidMetric(
            "perturbation block must be symmetric on l".to_string(),
        ));
    }
    // quadratic form of the Hamiltonian: A_lambda + A_l (+) 0
    let mut form = DMatrix::<f64>::identity(dv, dv);
    for j in 0..dl {
        form[(j, j)] = 1.0 / lambda;
    }
    let l_block = form.view((0, 0), (dl, dl)) + a_l;
    form.view_mut((0, 0), (dl, dl)).copy_from(&l_block);
    let min_eig = form.clone().symmetric_eigen().eigenvalues.min();
    if min_eig <= 0.0 {
        return Err(Error::IndefiniteForm(min_eig));
    }
    let poly = InvariantPolynomial::new(
        format!("h[lambda({lambda})+perturbation]"),
        2,
        PolyDomain {
            space: space.clone(),
            submodule: Submodule::V,
        },
        PolyKind::MetricHamiltonian { a_v: form },
    );
    Ok((poly, min_eig))
}

/// Orthonormal decomposition helper used by the catalog: splits `g` into
/// `h`, `l = k - h`, `m = g - k` from raw (independent) spanning sets.
pub fn decompose(
    g: LieAlgebraRep,
    h_mats: &[DMatrix<f64>],
    k_mats: &[DMatrix<f64>],
    rel_tol: f64,
) -> Result<(LieAlgebraRep, Subspace, Subspace, Subspace)> {
    let dim_g = g.dim();
    let to_coords = |mats: &[DMatrix<f64>]| -> DMatrix<f64> {
        let mut out = DMatrix::<f64>::zeros(dim_g, mats.len());
        for (j, m) in mats.iter().enumerate() {
            out.set_column(j, &g.coeffs_of(m));
        }
        out
    };
    let h_raw = to_coords(h_mats);
    let k_raw = to_coords(k_mats);
    // Raw spans must be exact: re-realized matrices must match.
    for (j, m) in h_mats.iter().chain(k_mats.iter()).enumerate() {
        let back = g.matrix_of(&g.coeffs_of(m));
        let res = (&back - m).norm() / m.norm().max(1e-300);
        if res > 1e-9 {
            return Err(Error::StructuralInvariant {
                what: format!("embedding column {j} leaves the algebra span"),
                residual: res,
            });
        }
    }
    let h_basis = if h_mats.is_empty() {
        DMatrix::<f64>::zeros(dim_g, 0)
    } else {
        kernels::orthonormalize_exact(&h_raw, rel_tol)?
    };
    let k_basis = if k_mats.is_empty() {
        DMatrix::<f64>::zeros(dim_g, 0)
    } else {
        kernels::orthonormalize_exact(&k_raw, rel_tol)?
    };
    // l: component of k orthogonal to h.
    let dl = k_basis.ncols() - h_basis.ncols();
    let l_basis = if dl == 0 {
        DMatrix::<f64>::zeros(dim_g, 0)
    } else {
        let projected = &k_basis - h_basis.clone() * (h_basis.transpose() * &k_basis);
        let (l_basis, decision) = kernels::column_span_basis(&projected, rel_tol);
        if l_basis.ncols() != dl {
            return Err(Error::DegenerateBasis {
                expected: dl,
                got: decision.rank,
            });
        }
        l_basis
    };
    let m_basis = if k_basis.ncols() == 0 {
        DMatrix::<f64>::identity(dim_g, dim_g)
    } else {
        kernels::orthogonal_complement(&k_basis, rel_tol)
    };
    Ok((
        g,
        Subspace::new(h_basis),
        Subspace::new(l_basis),
        Subspace::new(m_basis),
    ))
}

/// Assemble the composite subspaces `v = l + m` and `k = h + l`.
#[allow(clippy::too_many_arguments)]
pub fn assemble(
    g: LieAlgebraRep,
    h: Subspace,
    l: Subspace,
    m: Subspace,
    catalog_id: String,
    label: String,
    flags: SpaceFlags,
    base_point: Option<DVector<f64>>,
    base_point_phase: bool,
    phase_tangent: Option<DVector<f64>>,
) -> HomogeneousSpace {
    let dim_g = g.dim();
    let mut v = DMatrix::<f64>::zeros(dim_g, l.dim() + m.dim());
    v.view_mut((0, 0), (dim_g, l.dim())).copy_from(l.basis());
    v.view_mut((0, l.dim()), (dim_g, m.dim())).copy_from(m.basis());
    let mut k = DMatrix::<f64>::zeros(dim_g, h.dim() + l.dim());
    k.view_mut((0, 0), (dim_g, h.dim())).copy_from(h.basis());
    k.view_mut((0, h.dim()), (dim_g, l.dim())).copy_from(l.basis());
    HomogeneousSpace {
        g,
        h,
        l,
        m,
        v: Subspace::new(v),
        k: Subspace::new(k),
        catalog_id,
        label,
        flags,
        base_point,
        base_point_phase,
        phase_tangent,
    }
}
