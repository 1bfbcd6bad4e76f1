//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line with the measured quantities. Stated runtime limits are enforced
//! in optimized builds and relaxed (x20) under debug assertions, where
//! they measure the build profile rather than the algorithms.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gospace::catalog::{build_space, manifest, CatalogId, Params};
use gospace::goverify::{self, Verdict};
use gospace::homspace::{
    metric_operator, HomogeneousSpace, MetricOperator, MetricSpec, Submodule,
};
use gospace::liealg::{Family, LieAlgebraRep};
use gospace::poisson::{self, FamilyRecipe};
use gospace::report::TABLE1_LAMBDAS;
use gospace::structure;
use gospace::{flow, Tolerances};

const SEED: u64 = 20110504;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn runtime_budget(stated: Duration) -> Duration {
    if cfg!(debug_assertions) {
        stated * 20
    } else {
        stated
    }
}

fn fiber_123(space: &HomogeneousSpace) -> MetricOperator {
    let mut a_l = DMatrix::<f64>::identity(3, 3);
    a_l[(1, 1)] = 2.0;
    a_l[(2, 2)] = 3.0;
    metric_operator(space, &MetricSpec::Fiber { a_l, lambda_m: 1.0 }).unwrap()
}

#[test]
fn criterion_01_quaternionic_sphere_counts() {
    for n in [1usize, 2] {
        let start = Instant::now();
        let s = build_space(CatalogId::SpSphere, &Params::n(n)).unwrap();
        let rep = structure::generic_dims(&s, 8, SEED, &tol()).unwrap();
        let elapsed = start.elapsed();
        assert!(rep.consistent, "n={n}: {:?}", rep.flagged);
        assert_eq!(
            (rep.ddim, rep.dind, rep.complexity),
            (4, 2, 1),
            "n={n}: got ddim={} dind={} c={}",
            rep.ddim,
            rep.dind,
            rep.complexity
        );
        assert!(
            elapsed < runtime_budget(Duration::from_secs(10)),
            "n={n} took {elapsed:?}"
        );
        println!(
            "ACCEPTANCE C1 (Sp({})/Sp({n})): ddim=4 dind=2 c=1 in {elapsed:?} .. PASS",
            n + 1
        );
    }
}

#[test]
fn criterion_02_complex_sphere_counts() {
    for n in [2usize, 3] {
        let s = build_space(CatalogId::SuSphere, &Params::n(n)).unwrap();
        let rep = structure::generic_dims(&s, 8, SEED, &tol()).unwrap();
        assert!(rep.consistent, "n={n}: {:?}", rep.flagged);
        assert_eq!((rep.ddim, rep.dind, rep.complexity), (2, 2, 0), "n={n}");
        println!("ACCEPTANCE C2 (SU({})/SU({n})): ddim=dind=2 c=0 .. PASS", n + 1);
    }
}

#[test]
fn criterion_03_complex_projective_counts() {
    for n in [1usize, 2] {
        let s = build_space(CatalogId::CpOdd, &Params::n(n)).unwrap();
        let rep = structure::generic_dims(&s, 8, SEED, &tol()).unwrap();
        assert!(rep.consistent, "n={n}: {:?}", rep.flagged);
        assert_eq!(rep.complexity, 0, "n={n}: got c={}", rep.complexity);
        println!(
            "ACCEPTANCE C3 (Sp({})/(U(1)xSp({n}))): c=0 .. PASS",
            n + 1
        );
    }
}

#[test]
fn criterion_04_flag_manifold_counts() {
    for n in [2usize, 3] {
        let s = build_space(CatalogId::FlagSu, &Params::n(n)).unwrap();
        // on m with the u(n)-action
        let on_m = structure::complexity_on_submodule(&s, Submodule::M, 8, SEED, &tol()).unwrap();
        assert!(on_m.consistent, "n={n}: {:?}", on_m.flagged);
        assert_eq!(
            (on_m.ddim, on_m.dind, on_m.complexity),
            (n, n, 0),
            "n={n} on m"
        );
        // on v with the su(n)-action
        let on_v = structure::generic_dims(&s, 8, SEED, &tol()).unwrap();
        assert!(on_v.consistent, "n={n}: {:?}", on_v.flagged);
        assert_eq!(on_v.complexity, 1, "n={n} on v");
        println!(
            "ACCEPTANCE C4 (SO({})/U({n}) on m: ddim=dind={n} c=0; SO({})/SU({n}) on v: c=1) .. PASS",
            2 * n + 1,
            2 * n + 1
        );
    }
}

#[test]
fn criterion_05_classification_rows_are_go_at_every_lambda() {
    let start = Instant::now();
    let rows = gospace::catalog::supported_rows();
    assert_eq!(rows.len(), 9);
    for (id, params) in &rows {
        let s = build_space(*id, params).unwrap();
        let mut verdicts = Vec::new();
        for lambda in TABLE1_LAMBDAS {
            let metric = metric_operator(&s, &MetricSpec::Lambda(lambda)).unwrap();
            let cert = goverify::go_check(&s, &metric, 8, SEED, &tol()).unwrap();
            assert_eq!(
                cert.verdict,
                Verdict::Go,
                "{id} at lambda={lambda}: max residual {:.3e}",
                cert.max_residual
            );
            assert!(
                cert.max_residual < 1e-8,
                "{id} at lambda={lambda}: residual {:.3e}",
                cert.max_residual
            );
            verdicts.push(cert.verdict);
        }
        assert!(
            verdicts.windows(2).all(|w| w[0] == w[1]),
            "{id}: verdicts differ across lambda"
        );
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed < runtime_budget(Duration::from_secs(300)),
        "took {elapsed:?}"
    );
    println!(
        "ACCEPTANCE C5 (9 rows x 4 lambdas GO, residuals < 1e-8, lambda-independent) in {elapsed:?} .. PASS"
    );
}

#[test]
fn criterion_06_three_criteria_agree() {
    let rows = gospace::catalog::supported_rows();
    for (id, params) in &rows {
        let s = build_space(*id, params).unwrap();
        for lambda in TABLE1_LAMBDAS {
            let metric = metric_operator(&s, &MetricSpec::Lambda(lambda)).unwrap();
            let lemma = goverify::go_check(&s, &metric, 8, SEED, &tol()).unwrap();
            let cent = goverify::go_check_centrality(&s, &metric, 8, SEED, &tol()).unwrap();
            let gordon = goverify::go_check_gordon(&s, lambda, 8, SEED, &tol()).unwrap();
            for cert in [&lemma, &cent, &gordon] {
                assert_ne!(
                    cert.verdict,
                    Verdict::Indeterminate,
                    "{id} lambda={lambda}: {:?} is indeterminate",
                    cert.criterion
                );
            }
            assert!(
                lemma.verdict == cent.verdict && cent.verdict == gordon.verdict,
                "{id} lambda={lambda}: verdicts disagree ({:?}/{:?}/{:?})",
                lemma.verdict,
                cent.verdict,
                gordon.verdict
            );
        }
    }
    println!("ACCEPTANCE C6 (geodesic-lemma = centrality = Gordon on all rows/lambdas, no INDETERMINATE) .. PASS");
}

#[test]
fn criterion_07_normal_metric_baseline() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for e in manifest().into_iter().filter(|e| e.supported) {
        let id: CatalogId = e.id.parse().unwrap();
        let s = build_space(id, &e.minimal).unwrap();
        let metric = metric_operator(&s, &MetricSpec::Normal).unwrap();
        for _ in 0..8 {
            let x = s.random_unit_in(Submodule::V, &mut rng);
            let solve = goverify::solve_geodesic_generator(&s, &metric, &x, &tol()).unwrap();
            assert!(
                solve.rhs_norm < 1e-12,
                "{}: F = 0 residual {:.3e}",
                e.id,
                solve.rhs_norm
            );
            assert!(solve.residual < 1e-12, "{}: {:.3e}", e.id, solve.residual);
        }
        let nr = goverify::natural_reductivity_residual(&s, &metric);
        assert!(nr < 1e-9, "{}: natural reductivity {:.3e}", e.id, nr);
    }
    println!("ACCEPTANCE C7 (normal metrics: F=0 residual < 1e-12, natural reductivity < 1e-9, all entries) .. PASS");
}

#[test]
fn criterion_08_fiber_metric_negative_control() {
    let s = build_space(CatalogId::Row(9), &Params::n(1)).unwrap();
    let metric = fiber_123(&s);

    // oracle: dense random scan certifying the residual floor
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0xabcdef);
    let mut floor = f64::INFINITY;
    for _ in 0..1000 {
        let x = s.random_unit_in(Submodule::V, &mut rng);
        let solve = goverify::solve_geodesic_generator(&s, &metric, &x, &tol()).unwrap();
        floor = floor.min(solve.residual);
    }
    assert!(floor > 1e-3, "dense scan floor {floor:.3e}");

    let cert = goverify::go_check(&s, &metric, 8, SEED, &tol()).unwrap();
    assert_eq!(cert.verdict, Verdict::NotGo);
    let above = cert.samples.iter().filter(|s| s.residual > 1e-3).count();
    assert!(above >= 7, "only {above}/8 samples above 1e-3");

    let cent = goverify::go_check_centrality(&s, &metric, 8, SEED, &tol()).unwrap();
    assert_eq!(cent.verdict, Verdict::NotGo, "centrality disagrees");
    println!(
        "ACCEPTANCE C8 (fiber diag(1,2,3) NOT_GO, {above}/8 samples > 1e-3, dense floor {floor:.3e}, centrality agrees) .. PASS"
    );
}

#[test]
fn criterion_09_poisson_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let s9 = std::sync::Arc::new(build_space(CatalogId::Row(9), &Params::n(1)).unwrap());
    let flag = std::sync::Arc::new(build_space(CatalogId::Flag, &Params::n(2)).unwrap());

    // built families for this criterion
    let deformation = poisson::build_family(
        &s9,
        &FamilyRecipe::DeformationWithQuad {
            a_diag: vec![1.0, 2.0, 3.0],
        },
    )
    .unwrap();
    let traces = poisson::build_family(
        &flag,
        &FamilyRecipe::Traces {
            k_max: 2,
            domain: Submodule::M,
        },
    )
    .unwrap();
    let fibered = poisson::build_family(&s9, &FamilyRecipe::TracesOnMPlusLinear { k_max: 2 }).unwrap();

    // {h0, f} < 1e-10 for every member of every built family
    for fam in [&deformation, &traces, &fibered] {
        // h0 restricted to the family's domain is its central norm-half
        let h0 = poisson::InvariantPolynomial::new(
            "h0".into(),
            2,
            fam.domain.clone(),
            poisson::PolyKind::NormHalf {
                restrict: fam.domain.submodule,
            },
        );
        for f in &fam.members {
            for _ in 0..8 {
                let x = fam.domain.space.random_unit_in(fam.domain.submodule, &mut rng);
                let val = poisson::lie_poisson_bracket(&h0, f, &x).unwrap();
                assert!(
                    val.abs() < 1e-10,
                    "{{h0, {}}} = {val:.3e} on {}",
                    f.label,
                    fam.recipe
                );
            }
        }
    }

    // restricted traces commute on (SO(5), U(2))
    let comm = poisson::commutativity_residual(&traces, 8, SEED);
    assert!(comm.max_residual < 1e-8, "{:.3e}", comm.max_residual);

    // {h0, delta, qA} commutes and is complete with ddim_B = 3 = (4+2)/2
    let completeness = poisson::completeness_check(&deformation, 8, SEED, &tol()).unwrap();
    assert!(completeness.commutativity.max_residual < 1e-8);
    assert_eq!(completeness.target, 3);
    assert_eq!(completeness.ddim_b, 3);
    assert!(completeness.complete);

    // gradients match finite differences everywhere
    for fam in [&deformation, &traces, &fibered] {
        for f in &fam.members {
            for _ in 0..4 {
                let x = fam.domain.space.random_unit_in(fam.domain.submodule, &mut rng);
                let err = f.gradient_fd_error(&x);
                assert!(err < 1e-6, "{}: fd error {err:.3e}", f.label);
            }
        }
    }
    println!("ACCEPTANCE C9 (poisson: h0 central, traces commute < 1e-8, {{h0,delta,qA}} complete ddim_B=3, gradients < 1e-6) .. PASS");
}

#[test]
fn criterion_10_structure_identities_everywhere() {
    for e in manifest().into_iter().filter(|e| e.supported) {
        let id: CatalogId = e.id.parse().unwrap();
        let s = build_space(id, &e.minimal).unwrap();
        let on_v = structure::generic_dims(&s, 8, SEED, &tol()).unwrap();
        assert!(on_v.consistent, "{} on v: {:?}", e.id, on_v.flagged);
        assert_eq!(on_v.generic.j_x, on_v.ddim, "{} j_x", e.id);
        assert_eq!(on_v.generic.ker_lambda, on_v.dind, "{} ker", e.id);
        if s.m.dim() > 0 {
            let on_m =
                structure::complexity_on_submodule(&s, Submodule::M, 8, SEED, &tol()).unwrap();
            assert!(on_m.consistent, "{} on m: {:?}", e.id, on_m.flagged);
            assert_eq!(on_m.generic.j_x, on_m.ddim, "{} j_x on m", e.id);
            assert_eq!(on_m.generic.ker_lambda, on_m.dind, "{} ker on m", e.id);
        }
    }
    println!("ACCEPTANCE C10 (dim j_x = ddim and dim ker L_x = dind on every entry, v and m, 8 samples) .. PASS");
}

#[test]
fn criterion_11_flow_suite_as_stated() {
    // (a) great circles on the round sphere
    let sphere = build_space(CatalogId::Sphere, &Params::n(4)).unwrap();
    let normal = metric_operator(&sphere, &MetricSpec::Normal).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let x = sphere.random_unit_in(Submodule::M, &mut rng);
    let great = flow::orbit_trajectory(&sphere, &normal, &x, 50.0, 256, &tol()).unwrap();
    let great_planarity = flow::planarity_residual(&great).unwrap();
    assert!(great_planarity < 1e-8, "great circle planarity {great_planarity:.3e}");

    // (b) unit-norm preservation over t in [0, 200] at lambda = 2
    let s9 = build_space(CatalogId::Row(9), &Params::n(1)).unwrap();
    let lam2 = metric_operator(&s9, &MetricSpec::Lambda(2.0)).unwrap();
    let x = s9.random_unit_in(Submodule::V, &mut rng);
    let steps = if cfg!(debug_assertions) { 1024 } else { 4096 };
    let traj = flow::orbit_trajectory(&s9, &lam2, &x, 200.0, steps, &tol()).unwrap();
    let drift = traj.max_unit_norm_drift();
    assert!(drift < 1e-9, "unit-norm drift {drift:.3e}");
    println!("ACCEPTANCE C11a/b (great-circle planarity {great_planarity:.3e} < 1e-8; unit-norm drift {drift:.3e} < 1e-9) .. PASS");

    // (c) closure_dim_estimate = 2 for >= 90% of 50 random X at lambda = 2,
    // and (d) planarity > 1e-2 for those trajectories -- as stated.
    let mut closure_two = 0usize;
    let mut planarities = Vec::new();
    for k in 0..50 {
        let x = s9.random_unit_in(Submodule::V, &mut rng);
        let solve = goverify::solve_geodesic_generator(&s9, &lam2, &x, &tol()).unwrap();
        let z = &x + &solve.generator_h;
        let est = flow::closure_dim_estimate(&s9, &z).unwrap();
        if est.dim == 2 {
            closure_two += 1;
        }
        if k < 8 {
            let t = flow::orbit_trajectory(&s9, &lam2, &x, 200.0, 512, &tol()).unwrap();
            planarities.push(flow::planarity_residual(&t).unwrap());
        }
    }
    let min_planarity = planarities.iter().cloned().fold(f64::INFINITY, f64::min);
    let pass = closure_two * 10 >= 50 * 9 && min_planarity > 1e-2;
    println!(
        "ACCEPTANCE C11c/d (lambda=2: closure dim 2 on {closure_two}/50, need >= 45; planarity min {min_planarity:.3e}, need > 1e-2) .. {}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(
        pass,
        "lambda = 2 is the fully resonant deformation on Sp(n+1)/Sp(n): the solved \
         generator satisfies Z^2 o = -theta^2 o, so every homogeneous geodesic through \
         o closes (closure dim 1, planar). Got closure dim 2 on {closure_two}/50 and \
         min planarity {min_planarity:.3e}. The stated expectation holds at any \
         non-resonant lambda (see the supplement test); the resonance analysis is \
         pinned by the unit test lambda_two_is_resonant_on_the_quaternionic_sphere."
    );
}

#[test]
fn criterion_11_supplement_torus_filling_at_nonresonant_lambda() {
    // The torus-filling behavior the flow suite targets, demonstrated at a
    // non-resonant deformation (lambda = 3) with the same thresholds.
    let s9 = build_space(CatalogId::Row(9), &Params::n(1)).unwrap();
    let lam3 = metric_operator(&s9, &MetricSpec::Lambda(3.0)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut closure_two = 0usize;
    let mut planarities = Vec::new();
    for k in 0..50 {
        let x = s9.random_unit_in(Submodule::V, &mut rng);
        let solve = goverify::solve_geodesic_generator(&s9, &lam3, &x, &tol()).unwrap();
        let z = &x + &solve.generator_h;
        if flow::closure_dim_estimate(&s9, &z).unwrap().dim == 2 {
            closure_two += 1;
        }
        if k < 8 {
            let t = flow::orbit_trajectory(&s9, &lam3, &x, 200.0, 512, &tol()).unwrap();
            planarities.push(flow::planarity_residual(&t).unwrap());
        }
    }
    let min_planarity = planarities.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(closure_two * 10 >= 50 * 9, "{closure_two}/50");
    assert!(min_planarity > 1e-2, "{min_planarity:.3e}");
    println!(
        "ACCEPTANCE C11 supplement (lambda=3: closure dim 2 on {closure_two}/50, planarity min {min_planarity:.3e}) .. PASS"
    );
}

#[test]
fn criterion_12_algebra_axioms_up_to_ambient_30() {
    let mut algebras: Vec<LieAlgebraRep> = Vec::new();
    for n in 3..=10 {
        algebras.push(LieAlgebraRep::new(Family::So, n).unwrap());
    }
    algebras.push(LieAlgebraRep::new(Family::So, 20).unwrap());
    algebras.push(LieAlgebraRep::new(Family::So, 30).unwrap());
    for n in 2..=6 {
        algebras.push(LieAlgebraRep::new(Family::Su, n).unwrap());
    }
    algebras.push(LieAlgebraRep::new(Family::Su, 15).unwrap());
    for n in 1..=4 {
        algebras.push(LieAlgebraRep::new(Family::U, n).unwrap());
    }
    for n in 1..=5 {
        algebras.push(LieAlgebraRep::new(Family::Sp, n).unwrap());
    }
    algebras.push(LieAlgebraRep::new(Family::Sp, 7).unwrap());

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for rep in &algebras {
        assert!(rep.ambient_dim() <= 30, "{}", rep.id());
        let triples = if rep.ambient_dim() > 15 { 20 } else { 50 };
        let mut worst_jacobi = 0.0_f64;
        let mut worst_ad = 0.0_f64;
        for _ in 0..triples {
            let rand_el = |rng: &mut ChaCha8Rng| {
                let c = DVector::from_fn(rep.dim(), |_, _| rng.random::<f64>() * 2.0 - 1.0);
                let n = c.norm();
                rep.element(c / n).unwrap()
            };
            let x = rand_el(&mut rng);
            let y = rand_el(&mut rng);
            let z = rand_el(&mut rng);
            let j1 = rep.bracket(&x, &rep.bracket(&y, &z).unwrap()).unwrap();
            let j2 = rep.bracket(&y, &rep.bracket(&z, &x).unwrap()).unwrap();
            let j3 = rep.bracket(&z, &rep.bracket(&x, &y).unwrap()).unwrap();
            worst_jacobi = worst_jacobi.max((j1.coeffs + j2.coeffs + j3.coeffs).norm());
            let a = rep.inner(&rep.bracket(&z, &x).unwrap(), &y).unwrap();
            let b = rep.inner(&x, &rep.bracket(&z, &y).unwrap()).unwrap();
            worst_ad = worst_ad.max((a + b).abs());
        }
        assert!(worst_jacobi < 1e-10, "{}: Jacobi {worst_jacobi:.3e}", rep.id());
        assert!(worst_ad < 1e-10, "{}: ad-invariance {worst_ad:.3e}", rep.id());
    }
    println!(
        "ACCEPTANCE C12 (Jacobi and ad-invariance < 1e-10 on {} algebras up to ambient 30) .. PASS",
        algebras.len()
    );
}
