//! Geodesic-orbit certification by three independent criteria.
//!
//! 1. The geodesic lemma: for `X` in `v`, find `F` in `h` with
//!    `<I X, [X + F, Y]> = 0` for all `Y` in `v` (linear least squares).
//! 2. Centrality: with `x = I X` and `A = I^{-1}`, the metric is
//!    geodesic-orbit iff some `a` in `h` solves `[a + A x, x] = 0`.
//! 3. Gordon's split condition, specific to the fiber deformations on a
//!    genuine triple: `[a, x_l] = 0` and `[a + x_l, x_m] = 0`.
//!
//! All residuals are normalized to be invariant under `x -> c x`; a
//! certificate accepts only when every sample is below `accept_tol`,
//! rejects when a sample exceeds `reject_tol`, and reports the gap in
//! between as indeterminate.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::homspace::{HomogeneousSpace, MetricOperator, Submodule};
use crate::kernels;
use crate::{Error, Result, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Verdict {
    Go,
    NotGo,
    Indeterminate,
}

/// Output of the geodesic-lemma solver at one direction `X`.
#[derive(Debug, Clone)]
pub struct GeodesicSolve {
    /// Minimum-norm `F` in algebra coordinates (lies in `h`); `F` is only
    /// determined modulo the isotropy `h_x`.
    pub generator_h: DVector<f64>,
    /// `|r(F)| / |X|^2`.
    pub residual: f64,
    /// Residual of the trivial candidate `F = 0`, same normalization.
    pub rhs_norm: f64,
    pub rank: usize,
    pub rank_gap: f64,
}

/// Solve `min_F |<I X, [X + F, Y_j]>|_j` over `F` in `h`.
pub fn solve_geodesic_generator(
    space: &HomogeneousSpace,
    metric: &MetricOperator,
    x_dir: &DVector<f64>,
    tol: &Tolerances,
) -> Result<GeodesicSolve> {
    let norm = x_dir.norm();
    if norm == 0.0 {
        return Err(Error::InvalidInput("X must be nonzero".into()));
    }
    let x = x_dir / norm;
    let ix = metric.apply_i(space, &x);
    let dv = space.v.dim();
    let dh = space.h.dim();
    // Because I x lies in v, the v-projection of the bracket is free:
    // <I x, pr_v W> = <I x, W>.
    let mut m = DMatrix::<f64>::zeros(dv, dh);
    let mut b = DVector::<f64>::zeros(dv);
    for j in 0..dv {
        let yj = space.v.column(j);
        b[j] = -ix.dot(&space.g.bracket_coeffs(&x, &yj));
        for a in 0..dh {
            m[(j, a)] = ix.dot(&space.g.bracket_coeffs(&space.h.column(a), &yj));
        }
    }
    let sol = kernels::lstsq_min_norm(&m, &b, tol.svd_rel_tol);
    Ok(GeodesicSolve {
        generator_h: space.h.basis() * &sol.solution,
        residual: sol.residual,
        rhs_norm: b.norm(),
        rank: sol.decision.rank,
        rank_gap: sol.decision.gap,
    })
}

/// Centrality residual of the metric Hamiltonian at the momentum `x`:
/// `min_a |[a + A x, x]| / |x|^2`, plus the `h`-component of `[x, A x]`
/// which must vanish for any `Ad_H`-invariant operator.
#[derive(Debug, Clone)]
pub struct CentralityResidual {
    pub residual: f64,
    pub h_part: f64,
}

pub fn centrality_residual(
    space: &HomogeneousSpace,
    metric: &MetricOperator,
    x_in: &DVector<f64>,
    tol: &Tolerances,
) -> Result<CentralityResidual> {
    let norm = x_in.norm();
    if norm == 0.0 {
        return Err(Error::InvalidInput("x must be nonzero".into()));
    }
    let x = x_in / norm;
    let ax = metric.apply_a(space, &x);
    let h_part = space.h.coords(&space.g.bracket_coeffs(&x, &ax)).norm();
    if h_part >= tol.eps_zero {
        return Err(Error::InvalidMetric(format!(
            "[x, Ax] has an h-component ({h_part:.3e}); the operator is not Ad_H-invariant"
        )));
    }
    let dg = space.g.dim();
    let dh = space.h.dim();
    let mut m = DMatrix::<f64>::zeros(dg, dh);
    for a in 0..dh {
        m.set_column(a, &space.g.bracket_coeffs(&space.h.column(a), &x));
    }
    let b = -space.g.bracket_coeffs(&ax, &x);
    let sol = kernels::lstsq_min_norm(&m, &b, tol.svd_rel_tol);
    Ok(CentralityResidual {
        residual: sol.residual,
        h_part,
    })
}

/// Gordon's condition for the lambda-deformations on a genuine triple:
/// joint least squares over `a` in `h` of `[a, x_l]` and `[a + x_l, x_m]`.
#[derive(Debug, Clone)]
pub struct GordonResidual {
    pub residual_l: f64,
    pub residual_m: f64,
}

pub fn gordon_check(
    space: &HomogeneousSpace,
    lambda: f64,
    x_in: &DVector<f64>,
    tol: &Tolerances,
) -> Result<GordonResidual> {
    if space.l.dim() == 0 {
        return Err(Error::InvalidInput(
            "Gordon's condition degenerates on a pair (l = 0)".into(),
        ));
    }
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::InvalidMetric(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let norm = x_in.norm();
    if norm == 0.0 {
        return Err(Error::InvalidInput("x must be nonzero".into()));
    }
    let x = x_in / norm;
    let xl = space.l.project(&x);
    let xm = space.m.project(&x);
    let dg = space.g.dim();
    let dh = space.h.dim();
    let mut m = DMatrix::<f64>::zeros(2 * dg, dh);
    for a in 0..dh {
        let col = space.h.column(a);
        m.view_mut((0, a), (dg, 1))
            .copy_from(&space.g.bracket_coeffs(&col, &xl));
        m.view_mut((dg, a), (dg, 1))
            .copy_from(&space.g.bracket_coeffs(&col, &xm));
    }
    let mut b = DVector::<f64>::zeros(2 * dg);
    b.rows_mut(dg, dg)
        .copy_from(&(-space.g.bracket_coeffs(&xl, &xm)));
    let sol = kernels::lstsq_min_norm(&m, &b, tol.svd_rel_tol);
    let r = &m * &sol.solution - &b;
    Ok(GordonResidual {
        residual_l: r.rows(0, dg).norm(),
        residual_m: r.rows(dg, dg).norm(),
    })
}

/// Symmetrized natural-reductivity residual
/// `max |<I Z, [X, Y]_v> + <I Y, [X, Z]_v>|` over v-basis triples,
/// normalized by the operator norm of `I`.
pub fn natural_reductivity_residual(space: &HomogeneousSpace, metric: &MetricOperator) -> f64 {
    let dv = space.v.dim();
    // bracket table over the v-basis
    let mut table: Vec<Vec<DVector<f64>>> = vec![Vec::with_capacity(dv); dv];
    for i in 0..dv {
        for j in 0..dv {
            table[i].push(
                space
                    .g
                    .bracket_coeffs(&space.v.column(i), &space.v.column(j)),
            );
        }
    }
    let iy: Vec<DVector<f64>> = (0..dv)
        .map(|j| metric.apply_i(space, &space.v.column(j)))
        .collect();
    let mut res = 0.0_f64;
    for x in 0..dv {
        for y in 0..dv {
            for z in 0..dv {
                let val = iy[z].dot(&table[x][y]) + iy[y].dot(&table[x][z]);
                res = res.max(val.abs());
            }
        }
    }
    res / metric.operator_norm()
}

/// Which solvability criterion produced a certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Criterion {
    GeodesicLemma,
    Centrality,
    Gordon,
}

/// One sampled direction of a certificate.
#[derive(Debug, Clone, serde::Serialize)]
pub struct GoSample {
    pub x: Vec<f64>,
    /// Solver output (`F` for the geodesic lemma, `a` unused otherwise).
    pub solver_output: Option<Vec<f64>>,
    pub residual: f64,
}

/// Sampled evidence for or against the geodesic-orbit property. A `Go`
/// verdict is a sampled certificate, not a proof.
#[derive(Debug, Clone, serde::Serialize)]
pub struct GoCertificate {
    pub space_id: String,
    pub metric: String,
    pub criterion: Criterion,
    pub samples: Vec<GoSample>,
    pub max_residual: f64,
    pub verdict: Verdict,
    pub accept_tol: f64,
    pub reject_tol: f64,
    pub seed: u64,
    /// Samples discarded for non-generic isotropy (logged, never used).
    pub n_degenerate: usize,
}

fn verdict_from(residuals: &[f64], tol: &Tolerances) -> Verdict {
    let max = residuals.iter().cloned().fold(0.0_f64, f64::max);
    if max < tol.accept_tol {
        Verdict::Go
    } else if residuals.iter().any(|r| *r > tol.reject_tol) {
        Verdict::NotGo
    } else {
        Verdict::Indeterminate
    }
}

/// Draw unit samples in `v`, discarding directions whose isotropy in `h`
/// jumps above the generic value.
fn sample_directions(
    space: &HomogeneousSpace,
    n_samples: usize,
    rng: &mut ChaCha8Rng,
    tol: &Tolerances,
) -> (Vec<DVector<f64>>, usize) {
    let mut raw: Vec<(DVector<f64>, usize)> = Vec::new();
    for _ in 0..n_samples {
        let x = space.random_unit_in(Submodule::V, rng);
        let hx = isotropy_in_h(space, &x, tol);
        raw.push((x, hx));
    }
    let generic = raw.iter().map(|(_, hx)| *hx).min().unwrap();
    let mut degenerate = 0usize;
    let mut out = Vec::with_capacity(n_samples);
    for (x, hx) in raw {
        if hx > generic {
            degenerate += 1;
            // redraw once; a second degenerate draw is kept and will show
            // up in the residuals if it matters
            let y = space.random_unit_in(Submodule::V, rng);
            out.push(y);
        } else {
            out.push(x);
        }
    }
    (out, degenerate)
}

fn isotropy_in_h(space: &HomogeneousSpace, x: &DVector<f64>, tol: &Tolerances) -> usize {
    if space.h.dim() == 0 {
        return 0;
    }
    let mut ad = DMatrix::<f64>::zeros(space.g.dim(), space.h.dim());
    for a in 0..space.h.dim() {
        ad.set_column(a, &space.g.bracket_coeffs(&space.h.column(a), x));
    }
    let (_, dec) = kernels::kernel_basis(&ad, tol.svd_rel_tol);
    space.h.dim() - dec.rank
}

/// Sampled geodesic-lemma certificate.
pub fn go_check(
    space: &HomogeneousSpace,
    metric: &MetricOperator,
    n_samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<GoCertificate> {
    if n_samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (dirs, n_degenerate) = sample_directions(space, n_samples, &mut rng, tol);
    let mut samples = Vec::with_capacity(n_samples);
    for x in dirs {
        let solve = solve_geodesic_generator(space, metric, &x, tol)?;
        samples.push(GoSample {
            x: x.iter().cloned().collect(),
            solver_output: Some(solve.generator_h.iter().cloned().collect()),
            residual: solve.residual,
        });
    }
    let residuals: Vec<f64> = samples.iter().map(|s| s.residual).collect();
    Ok(GoCertificate {
        space_id: space.catalog_id.clone(),
        metric: metric.spec.describe(),
        criterion: Criterion::GeodesicLemma,
        max_residual: residuals.iter().cloned().fold(0.0, f64::max),
        verdict: verdict_from(&residuals, tol),
        samples,
        accept_tol: tol.accept_tol,
        reject_tol: tol.reject_tol,
        seed,
        n_degenerate,
    })
}

/// Sampled certificate through the centrality criterion.
pub fn go_check_centrality(
    space: &HomogeneousSpace,
    metric: &MetricOperator,
    n_samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<GoCertificate> {
    if n_samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (dirs, n_degenerate) = sample_directions(space, n_samples, &mut rng, tol);
    let mut samples = Vec::with_capacity(n_samples);
    for x in dirs {
        let c = centrality_residual(space, metric, &x, tol)?;
        samples.push(GoSample {
            x: x.iter().cloned().collect(),
            solver_output: None,
            residual: c.residual,
        });
    }
    let residuals: Vec<f64> = samples.iter().map(|s| s.residual).collect();
    Ok(GoCertificate {
        space_id: space.catalog_id.clone(),
        metric: metric.spec.describe(),
        criterion: Criterion::Centrality,
        max_residual: residuals.iter().cloned().fold(0.0, f64::max),
        verdict: verdict_from(&residuals, tol),
        samples,
        accept_tol: tol.accept_tol,
        reject_tol: tol.reject_tol,
        seed,
        n_degenerate,
    })
}

/// Sampled certificate through Gordon's condition (lambda metrics on
/// genuine triples only).
pub fn go_check_gordon(
    space: &HomogeneousSpace,
    lambda: f64,
    n_samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<GoCertificate> {
    if n_samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (dirs, n_degenerate) = sample_directions(space, n_samples, &mut rng, tol);
    let mut samples = Vec::with_capacity(n_samples);
    for x in dirs {
        let g = gordon_check(space, lambda, &x, tol)?;
        samples.push(GoSample {
            x: x.iter().cloned().collect(),
            solver_output: None,
            residual: g.residual_l.hypot(g.residual_m),
        });
    }
    let residuals: Vec<f64> = samples.iter().map(|s| s.residual).collect();
    Ok(GoCertificate {
        space_id: space.catalog_id.clone(),
        metric: format!("lambda({lambda})"),
        criterion: Criterion::Gordon,
        max_residual: residuals.iter().cloned().fold(0.0, f64::max),
        verdict: verdict_from(&residuals, tol),
        samples,
        accept_tol: tol.accept_tol,
        reject_tol: tol.reject_tol,
        seed,
        n_degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build_space, CatalogId, Params};
    use crate::homspace::{metric_operator, MetricSpec};
    use rand::SeedableRng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn fiber_123(space: &HomogeneousSpace) -> MetricOperator {
        let mut a_l = DMatrix::<f64>::identity(3, 3);
        a_l[(1, 1)] = 2.0;
        a_l[(2, 2)] = 3.0;
        metric_operator(space, &MetricSpec::Fiber { a_l, lambda_m: 1.0 }).unwrap()
    }

    #[test]
    fn normal_metric_solves_with_zero_generator() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (id, p) in [
            (CatalogId::Row(9), Params::n(1)),
            (CatalogId::Row(1), Params::n(2)),
            (CatalogId::Sphere, Params::n(4)),
            (CatalogId::SoTrivial, Params::n(4)),
        ] {
            let s = build_space(id, &p).unwrap();
            let m = metric_operator(&s, &MetricSpec::Normal).unwrap();
            for _ in 0..4 {
                let x = s.random_unit_in(Submodule::V, &mut rng);
                let sol = solve_geodesic_generator(&s, &m, &x, &tol()).unwrap();
                assert!(sol.rhs_norm < 1e-12, "{id}: rhs {}", sol.rhs_norm);
                assert!(sol.residual < 1e-12, "{id}: residual {}", sol.residual);
            }
        }
    }

    #[test]
    fn lambda_metrics_are_geodesic_orbit_on_row9() {
        let s = build_space(CatalogId::Row(9), &Params::n(1)).unwrap();
        let m = metric_operator(&s, &MetricSpec::Lambda(2.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..6 {
            let x = s.random_unit_in(Submodule::V, &mut rng);
            let sol = solve_geodesic_generator(&s, &m, &x, &tol()).unwrap();
            assert!(sol.residual < 1e-10, "residual {}", sol.residual);
        }

        // at n = 2 the generator is only determined modulo h_x != 0; the
        // minimum-norm solve must still certify solvability
        let s2 = build_space(CatalogId::Row(9), &Params::n(2)).unwrap();
        let m2 = metric_operator(&s2, &MetricSpec::Lambda(0.5)).unwrap();
        for _ in 0..4 {
            let x = s2.random_unit_in(Submodule::V, &mut rng);
            let sol = solve_geodesic_generator(&s2, &m2, &x, &tol()).unwrap();
            assert!(sol.residual < 1e-10, "n=2 residual {}", sol.residual);
            assert!(sol.rank < s2.h.dim(), "system should be rank-deficient");
        }
    }

    #[test]
    fn fiber_metric_has_a_residual_floor_on_row9() {
        // dense scan: the failure is uniform over generic directions
        let s = build_space(CatalogId::Row(9), &Params::n(1)).unwrap();
        let m = fiber_123(&s);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut min_res = f64::INFINITY;
        for _ in 0..300 {
            let x = s.random_unit_in(Submodule::V, &mut rng);
            let sol = solve_geodesic_generator(&s, &m, &x, &tol()).unwrap();
            min_res = min_res.min(sol.residual);
        }
        assert!(min_res > 1e-3, "floor {min_res}");
    }

    #[test]
    fn certificates_and_verdicts() {
        let s5 = build_space(CatalogId::Row(5), &Params::n(2)).unwrap();
        let m5 = metric_operator(&s5, &MetricSpec::Lambda(0.5)).unwrap();
        let cert = go_check(&s5, &m5, 8, 42, &tol()).unwrap();
        assert_eq!(cert.verdict, Verdict::Go);
        assert_eq!(cert.samples.len(), 8);

        let s9 = build_space(CatalogId::Row(9), &Params::n(1)).unwrap();
        let normal = metric_operator(&s9, &MetricSpec::Normal).unwrap();
        let cert = go_check(&s9, &normal, 8, 42, &tol()).unwrap();
        assert_eq!(cert.verdict, Verdict::Go);
        assert!(cert.max_residual < 1e-12);

        let fiber = fiber_123(&s9);
        let cert = go_check(&s9, &fiber, 8, 42, &tol()).unwrap();
        assert_eq!(cert.verdict, Verdict::NotGo);
    }

    #[test]
    fn centrality_agrees_with_the_geodesic_lemma() {
        let s = build_space(CatalogId::Row(9), &Params::n(1)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let lam = metric_operator(&s, &MetricSpec::Lambda(3.0)).unwrap();
        for _ in 0..5 {
            let x = s.random_unit_in(Submodule::V, &mut rng);
            let c = centrality_residual(&s, &lam, &x, &tol()).unwrap();
            assert!(c.residual < 1e-10);
            assert!(c.h_part < 1e-12);
        }
        let fiber = fiber_123(&s);
        let mut above = 0;
        for _ in 0..8 {
            let x = s.random_unit_in(Submodule::V, &mut rng);
            let c = centrality_residual(&s, &fiber, &x, &tol()).unwrap();
            if c.residual > 1e-3 {
                above += 1;
            }
        }
        assert!(above >= 7);

        // verdict-level agreement
        for metric in [
            metric_operator(&s, &MetricSpec::Normal).unwrap(),
            metric_operator(&s, &MetricSpec::Lambda(0.3)).unwrap(),
            fiber_123(&s),
        ] {
            let a = go_check(&s, &metric, 8, 3, &tol()).unwrap().verdict;
            let b = go_check_centrality(&s, &metric, 8, 3, &tol()).unwrap().verdict;
            assert_eq!(a, b, "{}", metric.spec.describe());
        }
    }

    #[test]
    fn gordon_condition_on_row9() {
        let s = build_space(CatalogId::Row(9), &Params::n(1)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..5 {
            let x = s.random_unit_in(Submodule::V, &mut rng);
            let g = gordon_check(&s, 2.0, &x, &tol()).unwrap();
            assert!(g.residual_l < 1e-10 && g.residual_m < 1e-10);
        }
        // x entirely in m: the l-component residual vanishes identically
        let xm = s.random_unit_in(Submodule::M, &mut rng);
        let g = gordon_check(&s, 2.0, &xm, &tol()).unwrap();
        assert_eq!(g.residual_l, 0.0);

        // pairs are out of this criterion's domain
        let pair = build_space(CatalogId::SpSphere, &Params::n(1)).unwrap();
        let x = pair.random_unit_in(Submodule::V, &mut rng);
        assert!(gordon_check(&pair, 2.0, &x, &tol()).is_err());
    }

    #[test]
    fn natural_reductivity_residuals() {
        let s9 = build_space(CatalogId::Row(9), &Params::n(1)).unwrap();
        let normal = metric_operator(&s9, &MetricSpec::Normal).unwrap();
        assert!(natural_reductivity_residual(&s9, &normal) < 1e-9);
        let lam1 = metric_operator(&s9, &MetricSpec::Lambda(1.0)).unwrap();
        assert!(natural_reductivity_residual(&s9, &lam1) < 1e-9);

        // the lambda-deformed flag metric is not naturally reductive with
        // respect to this group and decomposition
        let s1 = build_space(CatalogId::Row(1), &Params::n(2)).unwrap();
        let lam2 = metric_operator(&s1, &MetricSpec::Lambda(2.0)).unwrap();
        assert!(natural_reductivity_residual(&s1, &lam2) > 1e-3);
    }

    #[test]
    fn residuals_are_scale_invariant() {
        let s = build_space(CatalogId::Row(9), &Params::n(1)).unwrap();
        let lam = metric_operator(&s, &MetricSpec::Lambda(2.0)).unwrap();
        let fiber = fiber_123(&s);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let x = s.random_unit_in(Submodule::V, &mut rng);
        let scaled = &x * 7.5;
        for m in [&lam, &fiber] {
            let a = solve_geodesic_generator(&s, m, &x, &tol()).unwrap().residual;
            let b = solve_geodesic_generator(&s, m, &scaled, &tol())
                .unwrap()
                .residual;
            assert!((a - b).abs() < 1e-12);
            let ca = centrality_residual(&s, m, &x, &tol()).unwrap().residual;
            let cb = centrality_residual(&s, m, &scaled, &tol()).unwrap().residual;
            assert!((ca - cb).abs() < 1e-12);
        }
    }

    #[test]
    fn verdicts_do_not_depend_on_lambda() {
        let s = build_space(CatalogId::Row(9), &Params::n(1)).unwrap();
        let verdicts: Vec<Verdict> = [0.3, 0.5, 2.0, 5.0]
            .iter()
            .map(|l| {
                let m = metric_operator(&s, &MetricSpec::Lambda(*l)).unwrap();
                go_check(&s, &m, 8, 23, &tol()).unwrap().verdict
            })
            .collect();
        assert!(verdicts.iter().all(|v| *v == Verdict::Go));
    }
}
