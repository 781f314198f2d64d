use super::*;
use crate::assembly::{assemble_custom, assemble_lr, assemble_tr, AssemblyOptions};
use crate::geometry::catalog::CatalogSurface;
use crate::geometry::discretize::discretize;
use crate::geometry::mat2;
use crate::geometry::DiscreteSurface;

pub(crate) fn sphere(level: u32) -> DiscreteSurface {
    let imm = CatalogSurface::Sphere { radius: 1.0 }.immersion().unwrap();
    discretize(&imm, level).unwrap()
}

pub(crate) fn hemisphere(res: u32) -> DiscreteSurface {
    let imm = CatalogSurface::Hemisphere { radius: 1.0 }.immersion().unwrap();
    discretize(&imm, res).unwrap()
}

/// Constant-drift advection-diffusion T = Delta + b . grad on the unit square
/// with Dirichlet boundary; closed-form principal eigenvalue of -T is
/// |b|^2/4 + 2 pi^2 (ground-state transform).
pub(crate) fn drifted_square(m: u32, b: [f64; 2]) -> (DiscreteSurface, DiscreteOperator) {
    let imm = CatalogSurface::FlatTorus {
        period: 1.0,
        periodic: false,
    }
    .immersion()
    .unwrap();
    let s = discretize(&imm, m).unwrap();
    let n = s.n_nodes();
    let phi = vec![mat2::IDENTITY; n];
    let w = vec![b; n];
    let q = vec![0.0; n];
    let op = assemble_custom(&s, &phi, Some(&w), &q, &AssemblyOptions::default()).unwrap();
    (s, op)
}

#[test]
fn closed_sphere_laplacian_kernel() {
    // -Delta on the closed unit sphere: first eigenvalue 0, constant eigenfunction
    let s = sphere(3);
    let op = assemble_lr(&s, 0, &AssemblyOptions::default()).unwrap();
    let r = principal_eigen_selfadjoint(&op, &SolverOptions::default()).unwrap();
    assert!(r.lambda.abs() < 1e-8, "lambda {}", r.lambda);
    let mean: f64 = r.eigenfunction.iter().sum::<f64>() / r.eigenfunction.len() as f64;
    for v in &r.eigenfunction {
        assert!((v - mean).abs() < 1e-5);
    }
    assert!(r.positivity_margin > 0.0);
}

#[test]
fn closed_sphere_shifted_spectrum() {
    // -(Delta + 2): principal eigenvalue -2 with constant eigenfunction, exact
    // in the discrete setting (constants are discrete eigenvectors)
    let s = sphere(3);
    for r in [0usize, 1] {
        let op = assemble_tr(&s, r, &AssemblyOptions::default()).unwrap();
        let got = principal_eigen_selfadjoint(&op, &SolverOptions::default()).unwrap();
        assert!(
            (got.lambda + 2.0).abs() < 0.02,
            "r={r}: lambda {}",
            got.lambda
        );
        assert!(got.residual <= 1e-8 * 2.0_f64.max(1.0));
    }
}

#[test]
fn hemisphere_dirichlet_eigenvalue() {
    // first Dirichlet eigenvalue of -Delta on the unit hemisphere is exactly 2
    // (eigenfunction = height); so -T_0 = -(Delta + 2) has lambda ~ 0
    let s = hemisphere(24);
    let lap = assemble_lr(&s, 0, &AssemblyOptions::default()).unwrap();
    let r = principal_eigen_selfadjoint(&lap, &SolverOptions::default()).unwrap();
    assert!(
        (r.lambda - 2.0).abs() < 0.02,
        "Dirichlet eigenvalue {}",
        r.lambda
    );
    // eigenfunction proportional to z
    let mut worst = 0.0f64;
    let top = s
        .mesh
        .points
        .iter()
        .enumerate()
        .max_by(|a, b| a.1[2].total_cmp(&b.1[2]))
        .unwrap()
        .0;
    let scale = r.eigenfunction[top] / s.mesh.points[top][2];
    for i in 0..s.n_nodes() {
        worst = worst.max((r.eigenfunction[i] - scale * s.mesh.points[i][2]).abs());
    }
    assert!(worst < 0.05, "eigenfunction deviates by {worst}");

    let op = assemble_tr(&s, 0, &AssemblyOptions::default()).unwrap();
    let r = principal_eigen_selfadjoint(&op, &SolverOptions::default()).unwrap();
    assert!(r.lambda.abs() < 0.02, "marginal lambda {}", r.lambda);
}

#[test]
fn selfadjoint_consistency_through_nonselfadjoint_path() {
    let s = sphere(2);
    let op = assemble_tr(&s, 0, &AssemblyOptions::default()).unwrap();
    let a = principal_eigen_selfadjoint(&op, &SolverOptions::default()).unwrap();
    let b = principal_eigen_nonselfadjoint(&op, &SolverOptions::default()).unwrap();
    assert!(
        (a.lambda - b.lambda).abs() <= 1e-8 * a.lambda.abs().max(1.0),
        "{} vs {}",
        a.lambda,
        b.lambda
    );
    // Ritz sweep reports the bottom of the spectrum at the principal pair
    let ritz = b.ritz.as_ref().unwrap();
    assert!(!ritz.is_empty());
    assert!((ritz[0].0 - b.lambda).abs() < 1e-6 * b.lambda.abs().max(1.0));
}

#[test]
fn drifted_square_closed_form() {
    let b = [1.2, 0.6];
    let (_, op) = drifted_square(32, b);
    let r = principal_eigen_nonselfadjoint(&op, &SolverOptions::default()).unwrap();
    let exact = (b[0] * b[0] + b[1] * b[1]) / 4.0 + 2.0 * std::f64::consts::PI.powi(2);
    let rel = (r.lambda - exact).abs() / exact;
    assert!(rel < 0.01, "lambda {} vs {exact} (rel {rel:.4})", r.lambda);
    assert!(r.positivity_margin > 0.0);
}

#[test]
fn adjoint_shares_the_principal_eigenvalue() {
    let (_, op) = drifted_square(20, [2.0, 1.0]);
    let chk = adjoint_spectrum_check(&op, &SolverOptions::default()).unwrap();
    assert!(chk.gap <= 1e-8 * chk.lambda.abs().max(1.0), "gap {}", chk.gap);
    // the adjoint eigenfunction is positive too
    let min = chk
        .adjoint_eigenfunction
        .iter()
        .zip(&op.dirichlet)
        .filter(|(_, &d)| !d)
        .map(|(v, _)| *v)
        .fold(f64::INFINITY, f64::min);
    assert!(min > 0.0);
}

#[test]
fn zero_operator_adjoint_check() {
    let s = sphere(1);
    let n = s.n_nodes();
    let phi = vec![[[0.0; 2]; 2]; n];
    let op = assemble_custom(&s, &phi, None, &vec![0.0; n], &AssemblyOptions::default()).unwrap();
    let chk = adjoint_spectrum_check(&op, &SolverOptions::default()).unwrap();
    assert!(chk.lambda.abs() < 1e-10);
    assert!(chk.lambda_adjoint.abs() < 1e-10);
}

#[test]
fn collatz_wielandt_bounds() {
    let s = sphere(2);
    let op = assemble_tr(&s, 0, &AssemblyOptions::default()).unwrap();
    let sol = principal_eigen_selfadjoint(&op, &SolverOptions::default()).unwrap();
    // constant test function: T 1 = 2, so inf(-T1/1) = -2 exactly = lambda
    let ones = vec![1.0; op.n];
    let cw = collatz_wielandt_lower(&op, &ones).unwrap();
    assert!((cw + 2.0).abs() < 1e-10, "cw {cw}");
    // principal eigenfunction achieves lambda within residual tolerance
    let cw_eig = collatz_wielandt_lower(&op, &sol.eigenfunction).unwrap();
    assert!((cw_eig - sol.lambda).abs() < 1e-6);
    // any positive u gives a lower bound
    let mut rng = crate::rng::SplitMix64::new(31);
    for _ in 0..50 {
        let u: Vec<f64> = (0..op.n).map(|_| rng.uniform(0.1, 1.0)).collect();
        let cw = collatz_wielandt_lower(&op, &u).unwrap();
        assert!(cw <= sol.lambda + 1e-8, "cw {cw} > lambda {}", sol.lambda);
    }
    // rejection of sign-changing test functions
    let mut bad = vec![1.0; op.n];
    bad[7] = -1.0;
    assert!(matches!(
        collatz_wielandt_lower(&op, &bad),
        Err(Error::NonPositiveTestFunction { .. })
    ));
}

#[test]
fn certificate_closed_sphere_unstable() {
    let s = sphere(2);
    let op = assemble_tr(&s, 0, &AssemblyOptions::default()).unwrap();
    let cert = stability_certificate(&op, CertificateMode::Eigen, &CertificateOptions::default())
        .unwrap();
    assert_eq!(cert.verdict, Verdict::Unstable);
    assert!(cert.lambda.unwrap() < -1.9);
    assert!(cert.reverify(&op).unwrap());
    // the supersolution attempt must fail to produce a witness
    let cert = stability_certificate(
        &op,
        CertificateMode::Supersolution,
        &CertificateOptions::default(),
    )
    .unwrap();
    assert_eq!(cert.verdict, Verdict::Inconclusive);
}

#[test]
fn certificate_cap_stable_both_modes() {
    // spherical cap strictly inside the hemisphere: lambda > 0, stable.
    // Build as the hemisphere surface with an extra Dirichlet collar.
    let s = hemisphere(20);
    let op = assemble_tr(&s, 0, &AssemblyOptions::default()).unwrap();
    // constrain nodes with z < 0.4 (cap above height 0.4)
    let mask: Vec<bool> = (0..s.n_nodes())
        .map(|i| s.mesh.boundary[i] || s.mesh.points[i][2] < 0.4)
        .collect();
    let cap = op.with_mask(mask);
    let eig = stability_certificate(&cap, CertificateMode::Eigen, &CertificateOptions::default())
        .unwrap();
    assert_eq!(eig.verdict, Verdict::Stable, "lambda {:?}", eig.lambda);
    assert!(eig.reverify(&cap).unwrap());
    let sup = stability_certificate(
        &cap,
        CertificateMode::Supersolution,
        &CertificateOptions::default(),
    )
    .unwrap();
    assert_eq!(sup.verdict, Verdict::Stable);
    assert!(sup.reverify(&cap).unwrap());
    if let Some(Witness::Supersolution { strict, .. }) = sup.witness {
        assert!(strict);
    } else {
        panic!("expected supersolution witness");
    }
}

#[test]
fn certificate_hemisphere_marginal() {
    let s = hemisphere(24);
    let op = assemble_tr(&s, 0, &AssemblyOptions::default()).unwrap();
    let opts = CertificateOptions {
        margin_tol: 0.05,
        ..CertificateOptions::default()
    };
    let cert = stability_certificate(&op, CertificateMode::Eigen, &opts).unwrap();
    assert_eq!(cert.verdict, Verdict::Inconclusive);
}

#[test]
fn supersolution_iff_nonnegative_eigenvalue_on_caps() {
    // self-adjoint space-form case: lambda >= 0 iff a positive supersolution
    // exists; test both directions on a stable cap and the full sphere
    let s = hemisphere(20);
    let op = assemble_tr(&s, 0, &AssemblyOptions::default()).unwrap();
    let mask: Vec<bool> = (0..s.n_nodes())
        .map(|i| s.mesh.boundary[i] || s.mesh.points[i][2] < 0.3)
        .collect();
    let cap = op.with_mask(mask);
    let eig = principal_eigen_selfadjoint(&cap, &SolverOptions::default()).unwrap();
    assert!(eig.lambda > 0.0);
    let sup = stability_certificate(
        &cap,
        CertificateMode::Supersolution,
        &CertificateOptions::default(),
    )
    .unwrap();
    assert_eq!(sup.verdict, Verdict::Stable);

    // unstable closed sphere: no positive supersolution
    let s2 = sphere(2);
    let op2 = assemble_tr(&s2, 0, &AssemblyOptions::default()).unwrap();
    let sup2 = stability_certificate(
        &op2,
        CertificateMode::Supersolution,
        &CertificateOptions::default(),
    )
    .unwrap();
    assert_ne!(sup2.verdict, Verdict::Stable);
}

#[test]
fn scaling_invariance() {
    let s = sphere(2);
    let op = assemble_tr(&s, 0, &AssemblyOptions::default()).unwrap();
    let scaled = op.scaled(3.5);
    let a = principal_eigen_selfadjoint(&op, &SolverOptions::default()).unwrap();
    let b = principal_eigen_selfadjoint(&scaled, &SolverOptions::default()).unwrap();
    assert!((b.lambda - 3.5 * a.lambda).abs() < 1e-6 * a.lambda.abs().max(1.0) * 3.5);
    // eigenfunction unchanged (up to sign/scale already normalized)
    for i in 0..op.n {
        assert!((a.eigenfunction[i] - b.eigenfunction[i]).abs() < 1e-4);
    }
}

#[test]
fn domain_monotonicity_on_caps() {
    // nested free-node sets: the smaller domain has the larger eigenvalue
    let s = hemisphere(20);
    let op = assemble_lr(&s, 0, &AssemblyOptions::default()).unwrap();
    let mut lambdas = Vec::new();
    for zmin in [0.5, 0.3, 0.0] {
        let mask: Vec<bool> = (0..s.n_nodes())
            .map(|i| s.mesh.boundary[i] || s.mesh.points[i][2] < zmin)
            .collect();
        let sub = op.with_mask(mask);
        let r = principal_eigen_selfadjoint(&sub, &SolverOptions::default()).unwrap();
        lambdas.push(r.lambda);
    }
    assert!(
        lambdas[0] > lambdas[1] && lambdas[1] > lambdas[2],
        "{lambdas:?}"
    );
}

#[test]
fn quadratic_form_eigen_identity() {
    let s = sphere(2);
    let op = assemble_tr(&s, 0, &AssemblyOptions::default()).unwrap();
    let r = principal_eigen_selfadjoint(&op, &SolverOptions::default()).unwrap();
    let i_ff = op.quadratic_form(&r.eigenfunction);
    let norm2 = op.mass_dot(&r.eigenfunction, &r.eigenfunction);
    assert!(
        (i_ff - r.lambda * norm2).abs() < 1e-6 * norm2,
        "I(f,f) {} vs lambda ||f||^2 {}",
        i_ff,
        r.lambda * norm2
    );
    // zero function
    assert_eq!(op.quadratic_form(&vec![0.0; op.n]), 0.0);
}

#[test]
fn eigenfunction_residual_convention() {
    // audit: T g + lambda g ~ 0 as stated, for every solve
    let s = sphere(2);
    let op = assemble_tr(&s, 1, &AssemblyOptions::default()).unwrap();
    let r = principal_eigen_selfadjoint(&op, &SolverOptions::default()).unwrap();
    let tg = op.apply(&r.eigenfunction);
    let mut worst = 0.0f64;
    for i in 0..op.n {
        worst = worst.max((tg[i] + r.lambda * r.eigenfunction[i]).abs());
    }
    assert!(worst < 1e-6, "convention violated by {worst}");
    assert_eq!(r.convention, EIGEN_CONVENTION);
}
