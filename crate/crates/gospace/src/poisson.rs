//! Invariant polynomials on the isotropy module and the restriction of the
//! Lie-Poisson bracket: `{f, g}(x) = -<x, [grad f(x), grad g(x)]>`.
//!
//! Polynomials carry exact gradients; a finite-difference cross-check is
//! part of the type's contract and is exercised by the tests. Families
//! built from the standard recipes (restricted traces, linear functions on
//! the fiber `l`, the deformation components `h0`/`delta`, quadratic fiber
//! perturbations) can be checked for commutativity and for completeness
//! against the `(ddim + dind)/2` target of the invariant algebra.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::homspace::{HomogeneousSpace, SpaceRef, Submodule};
use crate::kernels;
use crate::structure;
use crate::{Error, Result, Tolerances};

/// Where a polynomial lives: a space together with the submodule carrying
/// the relevant group action (`v` with `h`, or `m` with `k`).
#[derive(Clone)]
pub struct PolyDomain {
    pub space: SpaceRef,
    pub submodule: Submodule,
}

impl PolyDomain {
    pub fn same(&self, other: &PolyDomain) -> bool {
        self.submodule == other.submodule
            && (std::sync::Arc::ptr_eq(&self.space, &other.space)
                || (self.space.catalog_id == other.space.catalog_id
                    && self.space.g.dim() == other.space.g.dim()
                    && self.space.h.dim() == other.space.h.dim()
                    && self.space.l.dim() == other.space.l.dim()))
    }

    fn acting_basis(&self) -> &crate::homspace::Subspace {
        match self.submodule {
            Submodule::M => &self.space.k,
            _ => &self.space.h,
        }
    }
}

/// Evaluator/gradient pair for an invariant polynomial.
#[derive(Clone)]
pub enum PolyKind {
    /// `tr(x_r^{2k})` where `x_r` is the projection to `restrict`.
    TracePower { half_power: usize, restrict: Submodule },
    /// `<direction, x>`.
    Linear { direction: DVector<f64> },
    /// `<x_l, a_l x_l>/2` with `a_l` on l-coordinates.
    QuadOnL { a_l: DMatrix<f64> },
    /// `<a_v x, x>/2` with `a_v` on v-coordinates.
    MetricHamiltonian { a_v: DMatrix<f64> },
    /// `<x_r, x_r>/2` (h0 for `restrict = V`, delta for `restrict = L`).
    NormHalf { restrict: Submodule },
}

pub struct InvariantPolynomial {
    pub label: String,
    pub degree: u32,
    pub domain: PolyDomain,
    pub kind: PolyKind,
}

fn odd_power(m: &DMatrix<f64>, half_power: usize) -> DMatrix<f64> {
    // x^(2k-1)
    let mut acc = m.clone();
    for _ in 1..(2 * half_power - 1) {
        acc = &acc * m;
    }
    acc
}

impl InvariantPolynomial {
    pub fn new(label: String, degree: u32, domain: PolyDomain, kind: PolyKind) -> Self {
        InvariantPolynomial {
            label,
            degree,
            domain,
            kind,
        }
    }

    /// Evaluate at `x` (algebra coordinates, lying in the domain module).
    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        let space = &self.domain.space;
        match &self.kind {
            PolyKind::TracePower {
                half_power,
                restrict,
            } => {
                let xr = space.subspace(*restrict).project(x);
                let xm = space.g.matrix_of(&xr);
                let odd = odd_power(&xm, *half_power);
                (&odd * &xm).trace()
            }
            PolyKind::Linear { direction } => direction.dot(x),
            PolyKind::QuadOnL { a_l } => {
                let cl = space.l.coords(x);
                0.5 * cl.dot(&(a_l * &cl))
            }
            PolyKind::MetricHamiltonian { a_v } => {
                let cv = space.v.coords(x);
                0.5 * cv.dot(&(a_v * &cv))
            }
            PolyKind::NormHalf { restrict } => {
                let xr = space.subspace(*restrict).project(x);
                0.5 * xr.dot(&xr)
            }
        }
    }

    /// Exact gradient at `x`, in algebra coordinates.
    pub fn grad(&self, x: &DVector<f64>) -> DVector<f64> {
        let space = &self.domain.space;
        match &self.kind {
            PolyKind::TracePower {
                half_power,
                restrict,
            } => {
                let sub = space.subspace(*restrict);
                let xr = sub.project(x);
                let xm = space.g.matrix_of(&xr);
                let odd = odd_power(&xm, *half_power);
                // <A, B> = -tr(AB) pins the sign: grad tr(x^{2k}) = -2k pr(x^{2k-1})
                sub.project(&space.g.coeffs_of(&odd)) * (-2.0 * *half_power as f64)
            }
            PolyKind::Linear { direction } => direction.clone(),
            PolyKind::QuadOnL { a_l } => space.l.from_coords(&(a_l * space.l.coords(x))),
            PolyKind::MetricHamiltonian { a_v } => {
                space.v.from_coords(&(a_v * space.v.coords(x)))
            }
            PolyKind::NormHalf { restrict } => space.subspace(*restrict).project(x),
        }
    }

    /// Max over acting-basis directions of `|<grad f(x), [eta, x]>|`,
    /// the infinitesimal form of Ad-invariance.
    pub fn invariance_residual(&self, x: &DVector<f64>) -> f64 {
        let space = &self.domain.space;
        let grad = self.grad(x);
        let acting = self.domain.acting_basis();
        let mut res = 0.0_f64;
        for j in 0..acting.dim() {
            let br = space.g.bracket_coeffs(&acting.column(j), x);
            res = res.max(grad.dot(&br).abs());
        }
        res
    }

    /// Relative disagreement between the exact gradient and central finite
    /// differences along the domain module.
    pub fn gradient_fd_error(&self, x: &DVector<f64>) -> f64 {
        let space = &self.domain.space;
        let module = space.subspace(self.domain.submodule);
        let step = 1e-5;
        let exact = self.grad(x);
        let mut fd = DVector::<f64>::zeros(module.dim());
        for j in 0..module.dim() {
            let dir = module.column(j);
            let plus = self.eval(&(x + &dir * step));
            let minus = self.eval(&(x - &dir * step));
            fd[j] = (plus - minus) / (2.0 * step);
        }
        let exact_m = module.coords(&exact);
        let scale = exact_m.norm().max(fd.norm()).max(1e-9);
        (fd - exact_m).norm() / scale
    }
}

/// `{f, g}(x) = -<x, [grad f(x), grad g(x)]>`.
pub fn lie_poisson_bracket(
    f: &InvariantPolynomial,
    g: &InvariantPolynomial,
    x: &DVector<f64>,
) -> Result<f64> {
    if !f.domain.same(&g.domain) {
        return Err(Error::DomainMismatch);
    }
    let space = &f.domain.space;
    let br = space.g.bracket_coeffs(&f.grad(x), &g.grad(x));
    Ok(-x.dot(&br))
}

/// A family of invariant polynomials sharing one domain.
pub struct PolynomialFamily {
    pub members: Vec<InvariantPolynomial>,
    pub recipe: String,
    pub domain: PolyDomain,
}

/// The built-in family recipes.
#[derive(Debug, Clone)]
pub enum FamilyRecipe {
    /// `p_i = tr(x^{2i})`, `i = 1..=k_max`, restricted to the submodule.
    Traces { k_max: usize, domain: Submodule },
    /// One linear function per basis vector of `l`.
    LinearOnL,
    /// `{h0, delta, q_A}` with `A = diag(a_diag)` on `l`.
    DeformationWithQuad { a_diag: Vec<f64> },
    /// Traces restricted to `m` (extended to `v`) plus linear functions
    /// on `l`: the fibered completion of a base family.
    TracesOnMPlusLinear { k_max: usize },
}

pub fn build_family(space: &SpaceRef, recipe: &FamilyRecipe) -> Result<PolynomialFamily> {
    let v_domain = PolyDomain {
        space: space.clone(),
        submodule: Submodule::V,
    };
    match recipe {
        FamilyRecipe::Traces { k_max, domain } => {
            if *k_max == 0 {
                return Err(Error::InapplicableRecipe("k_max must be positive".into()));
            }
            if *domain == Submodule::M && space.m.dim() == 0 {
                return Err(Error::InapplicableRecipe("m is trivial".into()));
            }
            let d = PolyDomain {
                space: space.clone(),
                submodule: *domain,
            };
            let members = (1..=*k_max)
                .map(|i| {
                    InvariantPolynomial::new(
                        format!("p{i}"),
                        2 * i as u32,
                        d.clone(),
                        PolyKind::TracePower {
                            half_power: i,
                            restrict: *domain,
                        },
                    )
                })
                .collect();
            Ok(PolynomialFamily {
                members,
                recipe: format!("traces(k_max={k_max})"),
                domain: d,
            })
        }
        FamilyRecipe::LinearOnL => {
            if space.l.dim() == 0 {
                return Err(Error::InapplicableRecipe(
                    "linear functions on l need a nontrivial l".into(),
                ));
            }
            let members = (0..space.l.dim())
                .map(|j| {
                    InvariantPolynomial::new(
                        format!("ell{}", j + 1),
                        1,
                        v_domain.clone(),
                        PolyKind::Linear {
                            direction: space.l.column(j),
                        },
                    )
                })
                .collect();
            Ok(PolynomialFamily {
                members,
                recipe: "linear_on_l".to_string(),
                domain: v_domain,
            })
        }
        FamilyRecipe::DeformationWithQuad { a_diag } => {
            let dl = space.l.dim();
            if dl == 0 {
                return Err(Error::InapplicableRecipe(
                    "the deformation family needs a nontrivial l".into(),
                ));
            }
            if a_diag.len() != dl {
                return Err(Error::InapplicableRecipe(format!(
                    "a_diag has {} entries, l has dimension {dl}",
                    a_diag.len()
                )));
            }
            let mut a_l = DMatrix::<f64>::zeros(dl, dl);
            for (j, a) in a_diag.iter().enumerate() {
                a_l[(j, j)] = *a;
            }
            let members = vec![
                InvariantPolynomial::new("h0".into(), 2, v_domain.clone(), PolyKind::NormHalf {
                    restrict: Submodule::V,
                }),
                InvariantPolynomial::new("delta".into(), 2, v_domain.clone(), PolyKind::NormHalf {
                    restrict: Submodule::L,
                }),
                InvariantPolynomial::new("qA".into(), 2, v_domain.clone(), PolyKind::QuadOnL {
                    a_l,
                }),
            ];
            Ok(PolynomialFamily {
                members,
                recipe: "h0_delta_qA".to_string(),
                domain: v_domain,
            })
        }
        FamilyRecipe::TracesOnMPlusLinear { k_max } => {
            if space.l.dim() == 0 || space.m.dim() == 0 {
                return Err(Error::InapplicableRecipe(
                    "the fibered family needs a genuine triple".into(),
                ));
            }
            let mut members: Vec<InvariantPolynomial> = (1..=*k_max)
                .map(|i| {
                    InvariantPolynomial::new(
                        format!("p{i}|m"),
                        2 * i as u32,
                        v_domain.clone(),
                        PolyKind::TracePower {
                            half_power: i,
                            restrict: Submodule::M,
                        },
                    )
                })
                .collect();
            for j in 0..space.l.dim() {
                members.push(InvariantPolynomial::new(
                    format!("ell{}", j + 1),
                    1,
                    v_domain.clone(),
                    PolyKind::Linear {
                        direction: space.l.column(j),
                    },
                ));
            }
            Ok(PolynomialFamily {
                members,
                recipe: format!("traces_on_m(k_max={k_max})+linear_on_l"),
                domain: v_domain,
            })
        }
    }
}

/// Worst normalized bracket value over all pairs and samples.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CommutativityReport {
    pub max_residual: f64,
    pub worst_pair: Option<(String, String)>,
    pub n_samples: usize,
    pub seed: u64,
}

pub fn commutativity_residual(
    family: &PolynomialFamily,
    n_samples: usize,
    seed: u64,
) -> CommutativityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_residual = 0.0_f64;
    let mut worst_pair = None;
    for _ in 0..n_samples {
        let x = family
            .domain
            .space
            .random_unit_in(family.domain.submodule, &mut rng);
        for (i, f) in family.members.iter().enumerate() {
            for g in family.members.iter().skip(i + 1) {
                let val = lie_poisson_bracket(f, g, &x).expect("family shares a domain");
                let scale = (f.grad(&x).norm() * g.grad(&x).norm()).max(1e-300);
                let res = val.abs() / scale;
                if res > max_residual {
                    max_residual = res;
                    worst_pair = Some((f.label.clone(), g.label.clone()));
                }
            }
        }
    }
    CommutativityReport {
        max_residual,
        worst_pair,
        n_samples,
        seed,
    }
}

/// Completeness of a commutative family against the target
/// `(ddim + dind)/2` of the ambient invariant algebra.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CompletenessReport {
    pub ddim_b: usize,
    pub target: usize,
    pub complete: bool,
    pub commutativity: CommutativityReport,
}

pub fn completeness_check(
    family: &PolynomialFamily,
    n_samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<CompletenessReport> {
    if family.members.is_empty() {
        return Err(Error::InvalidInput("empty family".into()));
    }
    let commutativity = commutativity_residual(family, n_samples, seed);
    if commutativity.max_residual >= tol.accept_tol {
        let (f, g) = commutativity.worst_pair.clone().unwrap();
        return Err(Error::NonCommutingFamily {
            f,
            g,
            residual: commutativity.max_residual,
        });
    }
    let space = &family.domain.space;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e3779b97f4a7c15);
    let mut ddim_b = 0usize;
    for _ in 0..n_samples.max(8) {
        let x = space.random_unit_in(family.domain.submodule, &mut rng);
        let mut grads = DMatrix::<f64>::zeros(space.g.dim(), family.members.len());
        for (j, f) in family.members.iter().enumerate() {
            grads.set_column(j, &f.grad(&x));
        }
        let (_, decision) = kernels::column_span_basis(&grads, tol.svd_rel_tol);
        ddim_b = ddim_b.max(decision.rank);
    }
    let counts = structure::complexity_on_submodule(
        space,
        family.domain.submodule,
        8,
        seed ^ 0xdeadbeef,
        tol,
    )?;
    let target = (counts.ddim + counts.dind) / 2;
    Ok(CompletenessReport {
        ddim_b,
        target,
        complete: ddim_b == target,
        commutativity,
    })
}

/// Sampled test for centrality: `grad f(x)` must lie in the projection of
/// the isotropy algebra `g_x` onto the module at every sample.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CentralityOutcome {
    pub central: bool,
    pub max_residual: f64,
}

pub fn centrality_test(
    f: &InvariantPolynomial,
    n_samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> CentralityOutcome {
    let space = &f.domain.space;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_residual = 0.0_f64;
    for _ in 0..n_samples {
        let x = space.random_unit_in(f.domain.submodule, &mut rng);
        let grad = f.grad(&x);
        let gn = grad.norm();
        if gn < 1e-13 {
            continue;
        }
        let span = central_span(space, f.domain.submodule, &x, tol);
        let res = if span.ncols() == 0 {
            gn
        } else {
            (&grad - &span * (span.transpose() * &grad)).norm()
        };
        max_residual = max_residual.max(res / gn);
    }
    CentralityOutcome {
        central: max_residual < tol.accept_tol,
        max_residual,
    }
}

/// Orthonormal basis of `pr_module(g_x)`, the kernel of the reduced
/// Poisson 2-form at `x`.
pub fn central_span(
    space: &HomogeneousSpace,
    sub: Submodule,
    x: &DVector<f64>,
    tol: &Tolerances,
) -> DMatrix<f64> {
    let g = &space.g;
    let dim_g = g.dim();
    let mut ad_g = DMatrix::<f64>::zeros(dim_g, dim_g);
    for j in 0..dim_g {
        let mut e = DVector::<f64>::zeros(dim_g);
        e[j] = 1.0;
        ad_g.set_column(j, &g.bracket_coeffs(&e, x));
    }
    let (g_x, _) = kernels::kernel_basis(&ad_g, tol.svd_rel_tol);
    let module = space.subspace(sub);
    let mut projected = DMatrix::<f64>::zeros(dim_g, g_x.ncols());
    for j in 0..g_x.ncols() {
        projected.set_column(j, &module.project(&g_x.column(j).into_owned()));
    }
    let (span, _) = kernels::column_span_basis(&projected, tol.svd_rel_tol);
    span
}
