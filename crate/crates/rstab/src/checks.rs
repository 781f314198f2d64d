//! Named verification suites, shared by `rstab verify` and the acceptance
//! test target. Every tolerance is pinned here.

use crate::assembly::{
    assemble_custom, assemble_tr, drift_field, drift_norm_max, linearization_residual,
    second_variation_r_area, symmetrize, symmetrize_custom, AssemblyOptions, SecondVariationOptions,
    VariationRoute,
};
use crate::bounds::{ball_domain, pinching_check, verify_bound, VerifyOptions};
use crate::error::{Error, Result};
use crate::geometry::catalog::CatalogSurface;
use crate::geometry::discretize::{discretize, discretize_with, GeometrySource};
use crate::geometry::mat2;
use crate::geometry::variation::VariationFunction;
use crate::geometry::{DiscreteSurface, Point};
use crate::newton::trace_identities_report;
use crate::rng::SplitMix64;
use crate::spectral::{
    adjoint_spectrum_check, collatz_wielandt_lower, principal_eigen_nonselfadjoint,
    principal_eigen_selfadjoint, stability_certificate, CertificateMode, CertificateOptions,
    SolverOptions, Verdict,
};

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub details: String,
}

impl CheckOutcome {
    fn new(name: &str, pass: bool, details: String) -> Self {
        Self {
            name: name.to_string(),
            pass,
            details,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{}: {} — {}",
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.details
        )
    }
}

pub const SUITES: &[&str] = &[
    "identities",
    "drift",
    "linearization",
    "spectra",
    "second_variation",
    "symmetrization",
    "adjoint",
    "collatz",
    "bound",
    "nonselfadjoint",
];

/// Run one named suite (or "all").
pub fn run_suite(name: &str) -> Result<Vec<CheckOutcome>> {
    match name {
        "identities" => Ok(vec![check_identities()?]),
        "drift" => Ok(vec![check_drift_vanishing()?]),
        "linearization" => Ok(vec![check_linearization()?]),
        "spectra" => check_spectra(),
        "second_variation" => Ok(vec![check_second_variation()?]),
        "symmetrization" => check_symmetrization(),
        "adjoint" => Ok(vec![check_adjoint()?]),
        "collatz" => Ok(vec![check_collatz()?]),
        "bound" => check_bound(),
        "nonselfadjoint" => Ok(vec![check_nonselfadjoint_oracle()?]),
        "all" => {
            let mut out = Vec::new();
            for s in SUITES {
                out.extend(run_suite(s)?);
            }
            Ok(out)
        }
        other => Err(Error::ConfigField(format!(
            "unknown suite `{other}`; available: {}, all",
            SUITES.join(", ")
        ))),
    }
}

fn sphere(level: u32) -> Result<DiscreteSurface> {
    discretize(&CatalogSurface::Sphere { radius: 1.0 }.immersion()?, level)
}

/// Acceptance check: Newton identity suite over 1000 random symmetric operators,
/// n in 2..=8, all r <= n-1; the four trace-identity residuals stay below
/// 1e-10 (the S_r reference values come from an eigendecomposition).
pub fn check_identities() -> Result<CheckOutcome> {
    let mut rng = SplitMix64::new(0x1de27);
    let mut worst = 0.0f64;
    let mut count = 0usize;
    for _ in 0..1000 {
        let n = 2 + rng.next_usize(7);
        let mut a = nalgebra::DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = rng.uniform(-1.0, 1.0);
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        for r in 1..n {
            let rep = trace_identities_report(&a, r)?;
            worst = worst.max(rep.max_residual());
            count += 1;
        }
    }
    let pass = worst <= 1e-10;
    Ok(CheckOutcome::new(
        "identities",
        pass,
        format!("{count} identity batteries, worst residual {worst:.3e} (tol 1e-10)"),
    ))
}

/// Acceptance check: on sphere(1) and geodesic_sphere(1) with mesh-estimated
/// geometry, the measured drift ||trace(grad P_r)||_max decays at order >= 1
/// over two refinements, for r in {0, 1}. P_0 = I gives exact zeros, counted
/// as passing (stronger than decay).
pub fn check_drift_vanishing() -> Result<CheckOutcome> {
    let mut details = String::new();
    let mut pass = true;
    for cat in [
        CatalogSurface::Sphere { radius: 1.0 },
        CatalogSurface::GeodesicSphere { radius: 1.0 },
    ] {
        let imm = cat.immersion()?;
        for r in [0usize, 1] {
            let mut norms = Vec::new();
            for level in [3u32, 4, 5] {
                let s = discretize_with(&imm, level, GeometrySource::MeshFit)?;
                norms.push(drift_norm_max(&drift_field(&s, r)?));
            }
            let floor = 1e-12;
            let (verdict, order_txt) = if norms.iter().all(|&n| n < floor) {
                (true, "exact".to_string())
            } else {
                let o1 = (norms[0] / norms[1]).log2();
                let o2 = (norms[1] / norms[2]).log2();
                let mean = 0.5 * (o1 + o2);
                (mean >= 1.0, format!("orders {o1:.2},{o2:.2}"))
            };
            pass &= verdict;
            details.push_str(&format!(
                "{} r={r}: norms {:.2e},{:.2e},{:.2e} ({order_txt}); ",
                cat.name(),
                norms[0],
                norms[1],
                norms[2]
            ));
        }
    }
    details.push_str("requirement: order >= 1");
    Ok(CheckOutcome::new("drift", pass, details))
}

/// Acceptance check: first variation of S_{r+1} on sphere(1) for r in {0, 1} with
/// a degree-2 spherical-harmonic f: the centered difference matches the
/// assembled right-hand side within 1e-2 relative (L2) at the finest level,
/// and the pointwise identity residual decays at order ~2 in t.
pub fn check_linearization() -> Result<CheckOutcome> {
    let s = sphere(5)?;
    let f = VariationFunction::closure(|p: &Point| p[2] * p[2] - 1.0 / 3.0);
    let mut details = String::new();
    let mut pass = true;
    for r in [0usize, 1] {
        let mut pointwise = Vec::new();
        let mut finest_rel = f64::NAN;
        for &t in &[0.2, 0.1, 0.05] {
            let rep = linearization_residual(&s, r, &f, t, VariationRoute::LocalChart)?;
            let (max_pw, _) = rep
                .residual_vs_pointwise(&s)
                .expect("geodesic local charts on the sphere");
            pointwise.push(max_pw);
            finest_rel = rep.residual_l2_rel;
        }
        let o1 = (pointwise[0] / pointwise[1]).log2();
        let o2 = (pointwise[1] / pointwise[2]).log2();
        let order_ok = o1 > 1.6 && o1 < 2.4 && o2 > 1.6 && o2 < 2.4;
        let match_ok = finest_rel <= 1e-2;
        pass &= order_ok && match_ok;
        details.push_str(&format!(
            "r={r}: rel err {finest_rel:.3e} (tol 1e-2), t-orders {o1:.2},{o2:.2} (target ~2); "
        ));
    }
    Ok(CheckOutcome::new("linearization", pass, details))
}

/// Acceptance check: spectra oracles. Closed unit sphere, r in {0,1}: principal
/// eigenvalue of -T_r equals -2 within 1%. Hemisphere with Dirichlet
/// boundary, r = 0: lambda = 0 within 10x a two-level discretization
/// estimate, verdict marginal.
pub fn check_spectra() -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    let opts = SolverOptions::default();
    let s = sphere(4)?;
    let mut pass = true;
    let mut details = String::new();
    for r in [0usize, 1] {
        let op = assemble_tr(&s, r, &AssemblyOptions::default())?;
        let sol = principal_eigen_selfadjoint(&op, &opts)?;
        let rel = (sol.lambda + 2.0).abs() / 2.0;
        pass &= rel <= 0.01;
        details.push_str(&format!("sphere r={r}: lambda {:+.6} (exact -2, rel {rel:.2e}); ", sol.lambda));
    }
    out.push(CheckOutcome::new(
        "spectra/closed-sphere",
        pass,
        details + "tol 1%",
    ));

    // hemisphere: marginal within 10x two-level estimate
    let lam = |res: u32| -> Result<f64> {
        let imm = CatalogSurface::Hemisphere { radius: 1.0 }.immersion()?;
        let s = discretize(&imm, res)?;
        let op = assemble_tr(&s, 0, &AssemblyOptions::default())?;
        Ok(principal_eigen_selfadjoint(&op, &opts)?.lambda)
    };
    let coarse = lam(16)?;
    let fine = lam(32)?;
    let margin = 10.0 * (fine - coarse).abs();
    let pass = fine.abs() <= margin;
    // and the certificate reports the marginal verdict
    let imm = CatalogSurface::Hemisphere { radius: 1.0 }.immersion()?;
    let sh = discretize(&imm, 32)?;
    let op = assemble_tr(&sh, 0, &AssemblyOptions::default())?;
    let cert = stability_certificate(
        &op,
        CertificateMode::Eigen,
        &CertificateOptions {
            margin_tol: margin,
            ..Default::default()
        },
    )?;
    let pass = pass && cert.verdict == Verdict::Inconclusive;
    out.push(CheckOutcome::new(
        "spectra/hemisphere",
        pass,
        format!(
            "lambda {fine:+.5e} within 10x two-level estimate {margin:.3e}; verdict {}",
            cert.verdict
        ),
    ));
    Ok(out)
}

/// Acceptance check: second variation of the r-area on sphere(1), r in {0,1}, two
/// choices of f: |lhs - rhs|/|rhs| <= 1e-2 with observed order ~2 in t.
pub fn check_second_variation() -> Result<CheckOutcome> {
    let s = sphere(5)?;
    let fs: Vec<(&str, VariationFunction)> = vec![
        (
            "Y2",
            VariationFunction::closure(|p: &Point| p[2] * p[2] - 1.0 / 3.0),
        ),
        (
            "xy",
            VariationFunction::closure(|p: &Point| p[0] * p[1]),
        ),
    ];
    let mut pass = true;
    let mut details = String::new();
    for r in [0usize, 1] {
        for (fname, f) in &fs {
            // The truncation error is O(t^2) on top of an O(h^2) quadrature
            // floor; the order is measured on a t-range where truncation
            // dominates, the match at the smallest t.
            let mut errs = Vec::new();
            let mut finest_rel = f64::NAN;
            for &t in &[0.4, 0.2, 0.1] {
                let rep =
                    second_variation_r_area(&s, r, f, t, &SecondVariationOptions::default())?;
                errs.push(rep.residual);
                finest_rel = rep.residual / rep.rhs.abs();
            }
            let o1 = (errs[0] / errs[1]).log2();
            let order_ok = o1 > 1.5 && o1 < 2.6;
            let match_ok = finest_rel <= 1e-2;
            pass &= order_ok && match_ok;
            details.push_str(&format!(
                "r={r} f={fname}: rel {finest_rel:.2e}, t-order {o1:.2}; "
            ));
        }
    }
    Ok(CheckOutcome::new(
        "second_variation",
        pass,
        details + "tol 1e-2, order ~2",
    ))
}

/// Acceptance check: symmetrization. In space forms the potential gap between the
/// symmetrized operator and T_r decays like the mesh size; on a manufactured
/// drift field the stability witness forces lambda_1 of the symmetrized
/// operator >= -tol and 100 random quadratic-form samples >= -tol.
pub fn check_symmetrization() -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    // || curly-T_r - T_r ||: the stiffness parts agree exactly, so the gap is
    // the potential difference, measured in the mass-weighted L2 norm (the
    // natural weak-operator norm; the max norm stalls at irregular vertices).
    // With closed-form geometry the identity holds to round-off; with
    // mesh-estimated geometry the gap is discretization noise and must decay
    // like the mesh size.
    let mut pass = true;
    let mut details = String::new();
    let gap_l2 = |s: &DiscreteSurface, r: usize| -> Result<f64> {
        let tr = assemble_tr(s, r, &AssemblyOptions::default())?;
        let (st, _) = symmetrize(s, r, &AssemblyOptions::default())?;
        let mut num = 0.0;
        let mut area = 0.0;
        for i in 0..tr.n {
            let d = tr.potential[i] - st.potential[i];
            num += s.geom[i].weight * d * d;
            area += s.geom[i].weight;
        }
        Ok((num / area).sqrt())
    };
    for cat in [
        CatalogSurface::Sphere { radius: 1.0 },
        CatalogSurface::GeodesicSphere { radius: 1.0 },
    ] {
        let imm = cat.immersion()?;
        // closed-form geometry: the closing identity curly-T_r = T_r is exact
        let s = discretize(&imm, 3)?;
        for r in [0usize, 1] {
            let exact_gap = gap_l2(&s, r)?;
            pass &= exact_gap <= 1e-12;
            details.push_str(&format!("{} r={r}: analytic gap {exact_gap:.1e}; ", cat.name()));
        }
        // estimated geometry: gap <= C h with measured decay
        for r in [0usize, 1] {
            let mut gaps = Vec::new();
            let mut hs = Vec::new();
            for level in [3u32, 4, 5] {
                let s = discretize_with(&imm, level, GeometrySource::MeshFit)?;
                gaps.push(gap_l2(&s, r)?);
                hs.push(s.max_edge());
            }
            let floor = 1e-12;
            if gaps.iter().all(|&g| g < floor) {
                details.push_str(&format!("{} r={r}: estimated gap exact; ", cat.name()));
                continue;
            }
            let o1 = (gaps[0] / gaps[1]).log2();
            let o2 = (gaps[1] / gaps[2]).log2();
            let order_ok = 0.5 * (o1 + o2) >= 0.8;
            pass &= order_ok;
            let c = gaps
                .iter()
                .zip(&hs)
                .map(|(g, h)| g / h)
                .fold(0.0f64, f64::max);
            details.push_str(&format!(
                "{} r={r}: estimated gaps {:.2e},{:.2e},{:.2e} (orders {o1:.2},{o2:.2}, C {c:.2}); ",
                cat.name(),
                gaps[0],
                gaps[1],
                gaps[2]
            ));
        }
    }
    out.push(CheckOutcome::new(
        "symmetrization/space-form",
        pass,
        details + "requirement: exact with closed forms, order >= 1 decay when estimated",
    ));

    // manufactured drift on the Dirichlet square: T = div(phi grad .) +
    // <phi X, grad .> + q with q <= -0.1 < 0, so u = 1 is a strict witness
    let imm = CatalogSurface::FlatTorus {
        period: std::f64::consts::TAU,
        periodic: false,
    }
    .immersion()?;
    let s = discretize(&imm, 24)?;
    let n = s.n_nodes();
    let chart = s.mesh.chart.clone().expect("chart");
    let phi: Vec<mat2::Mat2> = chart
        .iter()
        .map(|&[u, v]| {
            // positive definite, spatially varying
            let a = 1.0 + 0.3 * u.sin() * v.cos();
            let b = 0.2 * (u + v).sin();
            let c = 1.0 + 0.3 * (u * 0.5).cos();
            [[a, b], [b, c]]
        })
        .collect();
    let x_field: Vec<[f64; 2]> = chart
        .iter()
        .map(|&[u, v]| [0.4 * v.sin(), -0.3 * u.cos()])
        .collect();
    let q: Vec<f64> = chart.iter().map(|&[u, _]| -0.2 - 0.1 * u.sin().powi(2)).collect();
    // T itself: drift coefficient w = phi X
    let w: Vec<[f64; 2]> = (0..n).map(|i| mat2::matvec(&phi[i], &x_field[i])).collect();
    let t_op = assemble_custom(&s, &phi, Some(&w), &q, &AssemblyOptions::default())?;
    // u = 1 is a positive supersolution: T 1 = q < 0 (strict witness)
    let ones = vec![1.0; n];
    let tu = t_op.apply(&ones);
    let max_tu = (0..n)
        .filter(|&i| !t_op.dirichlet[i])
        .map(|i| tu[i])
        .fold(f64::NEG_INFINITY, f64::max);
    let witness_ok = max_tu < 0.0;
    // symmetrized operator: lambda_1 >= -tol and quadratic forms >= -tol
    let (sym_op, _) = symmetrize_custom(&s, &phi, &x_field, &q, &AssemblyOptions::default())?;
    let sol = principal_eigen_selfadjoint(&sym_op, &SolverOptions::default())?;
    let tol = 1e-8;
    let lambda_ok = sol.lambda >= -tol;
    let mut rng = SplitMix64::new(0x44);
    let mut min_quad = f64::INFINITY;
    for _ in 0..100 {
        let f: Vec<f64> = (0..n)
            .map(|i| {
                if t_op.dirichlet[i] {
                    0.0
                } else {
                    rng.uniform(-1.0, 1.0)
                }
            })
            .collect();
        min_quad = min_quad.min(sym_op.quadratic_form(&f));
    }
    let quad_ok = min_quad >= -tol;
    // third consequence: the symmetrized operator admits its own positive
    // supersolution (checked through the certificate machinery)
    let sym_cert = stability_certificate(
        &sym_op,
        CertificateMode::Supersolution,
        &CertificateOptions::default(),
    )?;
    let super_ok = sym_cert.verdict == Verdict::Stable && sym_cert.reverify(&sym_op)?;
    out.push(CheckOutcome::new(
        "symmetrization/manufactured-drift",
        witness_ok && lambda_ok && quad_ok && super_ok,
        format!(
            "witness max Tu = {max_tu:.3e} (< 0); lambda_1(sym) = {:+.4e} >= -{tol:.0e}; min of 100 quadratic forms {min_quad:+.4e} >= -{tol:.0e}; positive supersolution of the symmetrized operator: {super_ok}",
            sol.lambda
        ),
    ));
    Ok(out)
}

fn drifted_square(m: u32, b: [f64; 2]) -> Result<(DiscreteSurface, crate::assembly::DiscreteOperator)> {
    let imm = CatalogSurface::FlatTorus {
        period: 1.0,
        periodic: false,
    }
    .immersion()?;
    let s = discretize(&imm, m)?;
    let n = s.n_nodes();
    let phi = vec![mat2::IDENTITY; n];
    let w = vec![b; n];
    let q = vec![0.0; n];
    let op = assemble_custom(&s, &phi, Some(&w), &q, &AssemblyOptions::default())?;
    Ok((s, op))
}

/// Acceptance check: the adjoint shares the principal eigenvalue (gap <= 1e-8 on
/// the drifted-square fixture) and <Tf, g>_M = <f, T*g>_M to 1e-10 on 20
/// random pairs.
pub fn check_adjoint() -> Result<CheckOutcome> {
    let (_, op) = drifted_square(24, [2.0, 1.0])?;
    let tight = SolverOptions {
        tol: 1e-11,
        ..Default::default()
    };
    let chk = adjoint_spectrum_check(&op, &tight)?;
    let gap_ok = chk.gap <= 1e-8 * chk.lambda.abs().max(1.0);
    let adj = op.adjoint();
    let mut rng = SplitMix64::new(0xad01);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let f: Vec<f64> = (0..op.n).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let g: Vec<f64> = (0..op.n).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let lhs = op.mass_dot(&op.apply(&f), &g);
        let rhs = op.mass_dot(&f, &adj.apply(&g));
        worst = worst.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
    }
    let dual_ok = worst <= 1e-10;
    Ok(CheckOutcome::new(
        "adjoint",
        gap_ok && dual_ok,
        format!(
            "lambda gap {:.3e} (tol 1e-8 rel), duality defect {worst:.3e} on 20 pairs (tol 1e-10)",
            chk.gap
        ),
    ))
}

/// Acceptance check: Collatz-Wielandt. On each fixture, 50 random positive u give
/// inf(-Tu/u) <= lambda + tol, and the principal eigenfunction achieves
/// lambda within residual tolerance.
pub fn check_collatz() -> Result<CheckOutcome> {
    let opts = SolverOptions::default();
    let mut details = String::new();
    let mut pass = true;
    // fixtures: closed sphere (r = 0 and 1), hemisphere, drifted square
    let mut fixtures: Vec<(String, crate::assembly::DiscreteOperator)> = Vec::new();
    let s = sphere(3)?;
    for r in [0usize, 1] {
        fixtures.push((
            format!("sphere r={r}"),
            assemble_tr(&s, r, &AssemblyOptions::default())?,
        ));
    }
    let imm = CatalogSurface::Hemisphere { radius: 1.0 }.immersion()?;
    let hs = discretize(&imm, 20)?;
    fixtures.push((
        "hemisphere r=0".into(),
        assemble_tr(&hs, 0, &AssemblyOptions::default())?,
    ));
    let (_, dr) = drifted_square(24, [1.2, 0.6])?;
    fixtures.push(("drifted square".into(), dr));

    let mut rng = SplitMix64::new(0xc011a7);
    for (name, op) in fixtures {
        let sol = if op.symmetric {
            principal_eigen_selfadjoint(&op, &opts)?
        } else {
            principal_eigen_nonselfadjoint(&op, &opts)?
        };
        let tol = 1e-8 * sol.lambda.abs().max(1.0);
        let mut worst_violation = f64::NEG_INFINITY;
        for _ in 0..50 {
            let u: Vec<f64> = (0..op.n)
                .map(|i| if op.dirichlet[i] { 0.0 } else { rng.uniform(0.05, 1.0) })
                .collect();
            let cw = collatz_wielandt_lower(&op, &u)?;
            worst_violation = worst_violation.max(cw - sol.lambda);
        }
        let eig_cw = collatz_wielandt_lower(&op, &sol.eigenfunction)?;
        let attained = (eig_cw - sol.lambda).abs() <= 1e-5 * sol.lambda.abs().max(1.0);
        let ok = worst_violation <= tol && attained;
        pass &= ok;
        details.push_str(&format!(
            "{name}: sup-inf slack {worst_violation:+.2e} (<= {tol:.0e}), eigenfunction gap {:.2e}; ",
            (eig_cw - sol.lambda).abs()
        ));
    }
    Ok(CheckOutcome::new("collatz", pass, details))
}

/// Acceptance check: the geodesic-ball lower bound on the horosphere and on
/// equidistant surfaces d in {0.3, 0.5, 1.0}, r = 0, R in {0.3, 0.5, 0.8}:
/// computed lambda(Omega) >= bound - tol in all 12 cases; the pinching gate
/// rejects the Euclidean sphere.
pub fn check_bound() -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    let radii = [0.3, 0.5, 0.8];
    let mut pass = true;
    let mut details = String::new();
    let mut run_cases = |label: String,
                         surf_at: &dyn Fn(u32) -> Result<DiscreteSurface>,
                         center: &dyn Fn(&DiscreteSurface) -> Point|
     -> Result<()> {
        for &radius in &radii {
            // two-level tolerance: 10x the eigenvalue shift under refinement
            let mut lams = Vec::new();
            let mut slack_fine = 0.0;
            let mut bound_val = 0.0;
            for res in [16u32, 32] {
                let s = surf_at(res)?;
                let ball = ball_domain(&s, &center(&s), radius)?;
                let v = verify_bound(&s, 0, &ball, &VerifyOptions::default())?;
                lams.push(v.lambda);
                slack_fine = v.slack;
                bound_val = v.bound.operative;
            }
            let tol = 10.0 * (lams[1] - lams[0]).abs();
            let ok = slack_fine >= -tol;
            pass &= ok;
            details.push_str(&format!(
                "{label} R={radius}: lambda {:.3} >= bound {:.3} (slack {:+.3}); ",
                lams[1], bound_val, slack_fine
            ));
        }
        Ok(())
    };
    let horo = |res: u32| discretize(&CatalogSurface::Horosphere { extent: 1.0 }.immersion()?, res);
    run_cases(
        "horosphere".into(),
        &horo,
        &|_s| Point::new(1.0, 0.0, 0.0, 0.0),
    )?;
    for d in [0.3, 0.5, 1.0] {
        let eq = move |res: u32| {
            discretize(
                &CatalogSurface::Equidistant {
                    distance: d,
                    extent: 1.0,
                }
                .immersion()?,
                res,
            )
        };
        let center = move |_s: &DiscreteSurface| {
            // chart origin: (cosh d, 0, 0, sinh d)
            Point::new(d.cosh(), 0.0, 0.0, d.sinh())
        };
        run_cases(format!("equidistant d={d}"), &eq, &center)?;
    }
    out.push(CheckOutcome::new("bound/12-case-matrix", pass, details));

    // pinching gate on the Euclidean sphere
    let s = sphere(2)?;
    let pin = pinching_check(&s, 0)?;
    let ball = ball_domain(&s, &Point::new(0.0, 0.0, 1.0, 0.0), 0.5)?;
    let gate = verify_bound(&s, 0, &ball, &VerifyOptions::default());
    let gate_ok = !pin.holds && matches!(gate, Err(Error::PinchingFails { .. }));
    out.push(CheckOutcome::new(
        "bound/pinching-gate",
        gate_ok,
        format!(
            "Euclidean sphere ratio {:.3} vs -Sec = 0: rejected = {gate_ok}",
            pin.worst_ratio
        ),
    ));
    Ok(out)
}

/// Acceptance check: non-self-adjoint solver oracle. Constant-drift advection-
/// diffusion on the Dirichlet unit square matches the closed-form principal
/// eigenvalue |b|^2/4 + 2 pi^2 within 1%.
pub fn check_nonselfadjoint_oracle() -> Result<CheckOutcome> {
    let b = [1.2, 0.6];
    let (_, op) = drifted_square(64, b)?;
    let sol = principal_eigen_nonselfadjoint(&op, &SolverOptions::default())?;
    let exact = (b[0] * b[0] + b[1] * b[1]) / 4.0 + 2.0 * std::f64::consts::PI.powi(2);
    let rel = (sol.lambda - exact).abs() / exact;
    let ritz_ok = sol
        .ritz
        .as_ref()
        .map(|r| !r.is_empty())
        .unwrap_or(false);
    Ok(CheckOutcome::new(
        "nonselfadjoint",
        rel <= 0.01 && ritz_ok && sol.positivity_margin > 0.0,
        format!(
            "lambda {:+.6} vs closed form {exact:+.6} (rel {rel:.3e}, tol 1%); positivity margin {:+.3e}",
            sol.lambda, sol.positivity_margin
        ),
    ))
}
