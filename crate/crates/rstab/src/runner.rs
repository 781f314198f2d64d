//! Run orchestration: analyze, verify, and sweep entry points behind the CLI.

use std::io::Write as _;
use std::path::Path;

use crate::assembly::{
    assemble_tr, drift_field, drift_norm_max, surface_admissibility, AssemblyOptions,
    DiscreteOperator,
};
use crate::bounds::{ball_domain, pinching_check, verify_bound, VerifyOptions};
use crate::checks::{run_suite, CheckOutcome};
use crate::config::{DomainSpec, RunConfig, SurfaceSpec};
use crate::error::{Error, Result};
use crate::geometry::catalog::CatalogSurface;
use crate::geometry::discretize::{estimate_geometry, GeometrySource};
use crate::geometry::mesh::{adjacency, load_off};
use crate::geometry::{Ambient, DiscreteSurface, Model, NodeGeometry};
use crate::report::{
    AdmissibilityBlock, BoundsBlock, Measured, OperatorBlock, Provenance, Report, SpectralBlock,
    StabilityBlock,
};
use crate::spectral::{
    principal_eigen_nonselfadjoint, principal_eigen_selfadjoint, stability_certificate,
    CertificateMode, CertificateOptions, SolverOptions, SpectralResult, Witness,
};

/// Build a discrete surface from an OFF triangle mesh (positions only): the
/// shape operator comes from the local fitting estimator, flagged
/// lower-accuracy relative to catalog closed forms.
pub fn surface_from_off(path: &Path) -> Result<DiscreteSurface> {
    let mesh = load_off(path)?;
    let adj = adjacency(&mesh);
    let model = Model::Euclidean3;
    let est = estimate_geometry(model, &mesh, &adj)?;
    let mut weights = vec![0.0; mesh.n_nodes()];
    for t in 0..mesh.tris.len() {
        let p = mesh.tri_points(t);
        let area = crate::geometry::discretize::triangle_area(model, &p[0], &p[1], &p[2]);
        for &i in &mesh.tris[t] {
            weights[i] += area / 3.0;
        }
    }
    let geom = est
        .into_iter()
        .enumerate()
        .map(|(i, (normal, frame, shape, asym))| NodeGeometry {
            normal,
            frame,
            shape,
            weight: weights[i],
            asym,
        })
        .collect();
    Ok(DiscreteSurface {
        ambient: Ambient::space_form(model),
        mesh,
        geom,
        adjacency: adj,
        geometry_source: GeometrySource::MeshFit,
        label: format!("off({})", path.display()),
        normal_field: None,
        local_charts: None,
        provenance: None,
    })
}

fn solver_options(cfg: &RunConfig) -> SolverOptions {
    SolverOptions {
        tol: cfg.solver.tol,
        max_iter: cfg.solver.max_iter,
        seed: cfg.solver.seed,
    }
}

struct SolveOutcome {
    surface: DiscreteSurface,
    op: DiscreteOperator,
    spectral: SpectralResult,
    margin_tol: f64,
}

fn solve_for(cfg: &RunConfig, resolution: Option<u32>) -> Result<SolveOutcome> {
    let surface = cfg.build_surface_at(resolution)?;
    let op = assemble_tr(&surface, cfg.r, &AssemblyOptions::default())?;
    let op = match &cfg.domain {
        DomainSpec::Whole => op,
        DomainSpec::Ball { center, radius } => {
            let ball = ball_domain(&surface, center, *radius)?;
            op.with_mask(ball.mask)
        }
    };
    let opts = solver_options(cfg);
    let spectral = if op.symmetric {
        principal_eigen_selfadjoint(&op, &opts)?
    } else {
        principal_eigen_nonselfadjoint(&op, &opts)?
    };
    Ok(SolveOutcome {
        surface,
        op,
        spectral,
        margin_tol: 0.0,
    })
}

/// The tolerance used for verdicts: 10x a two-level refinement estimate of
/// the eigenvalue discretization error, never a bare constant (falls back to
/// 100x the solver tolerance when no refinement is available).
fn margin_from_refinement(cfg: &RunConfig, base: &SolveOutcome) -> Result<f64> {
    let fallback = 100.0 * cfg.solver.tol * base.spectral.lambda.abs().max(1.0);
    if !cfg.solver.margin_refine {
        return Ok(fallback);
    }
    let Some(fine_res) = cfg.refined_resolution() else {
        return Ok(fallback);
    };
    let fine = solve_for(cfg, Some(fine_res))?;
    Ok((10.0 * (fine.spectral.lambda - base.spectral.lambda).abs()).max(fallback))
}

/// Run the full pipeline (admissibility -> assembly -> spectrum -> stability
/// certificate, plus the ball bound when applicable) and produce a report.
pub fn cmd_analyze(cfg: &RunConfig) -> Result<Report> {
    let mut outcome = solve_for(cfg, None)?;
    outcome.margin_tol = margin_from_refinement(cfg, &outcome)?;
    let surface = &outcome.surface;
    let op = &outcome.op;

    let adm = surface_admissibility(surface, cfg.r, None)?;
    let mut criteria = Vec::new();
    if adm.criteria.h2_positive {
        criteria.push("H_2 > 0 (criterion a)".to_string());
    }
    if adm.criteria.hr1_positive_with_elliptic_point {
        criteria.push("H_{r+1} > 0 with an elliptic node (criterion b)".to_string());
    }
    if adm.criteria.hr1_zero_full_rank {
        criteria.push("H_{r+1} = 0 with rank(A) > r (criterion c)".to_string());
    }

    let drift = drift_field(surface, cfg.r)?;
    let mut identity_worst = 0.0f64;
    for i in 0..surface.n_nodes() {
        identity_worst = identity_worst
            .max((surface.trace_a2_pr(i, cfg.r) - surface.trace_a2_pr_identity(i, cfg.r)).abs());
    }

    let cert = stability_certificate(
        op,
        CertificateMode::Eigen,
        &CertificateOptions {
            solver: solver_options(cfg),
            margin_tol: outcome.margin_tol,
            ..Default::default()
        },
    )?;
    let reverified = cert.reverify(op)?;
    let witness_desc = match &cert.witness {
        Some(Witness::Eigenpair { lambda, .. }) => {
            format!("eigenpair (lambda = {lambda:+.6e}, max-normalized eigenfunction)")
        }
        Some(Witness::Supersolution { min_u, max_tu, strict, .. }) => format!(
            "supersolution (min u = {min_u:.3e}, max Tu = {max_tu:+.3e}, strict = {strict})"
        ),
        None => "none".to_string(),
    };

    let bounds_block = match &cfg.domain {
        DomainSpec::Ball { center, radius } => {
            let pin = pinching_check(surface, cfg.r)?;
            if pin.holds {
                let ball = ball_domain(surface, center, *radius)?;
                let v = verify_bound(
                    surface,
                    cfg.r,
                    &ball,
                    &VerifyOptions {
                        solver: solver_options(cfg),
                        tol: outcome.margin_tol,
                    },
                )?;
                Some(BoundsBlock {
                    pinching_holds: true,
                    worst_ratio: Measured::new(pin.worst_ratio, 1e-12),
                    bound: Measured::new(v.bound.operative, 0.0),
                    statement_form: v.bound.statement_form,
                    slack: Measured::new(v.slack, outcome.margin_tol),
                    pass: v.pass,
                })
            } else {
                Some(BoundsBlock {
                    pinching_holds: false,
                    worst_ratio: Measured::new(pin.worst_ratio, 1e-12),
                    bound: Measured::new(f64::NAN, 0.0),
                    statement_form: f64::NAN,
                    slack: Measured::new(f64::NAN, 0.0),
                    pass: false,
                })
            }
        }
        DomainSpec::Whole => None,
    };

    if let Some(path) = &cfg.output.eigenfunction_csv {
        write_eigenfunction_csv(path, surface, &outcome.spectral)?;
    }
    if let Some(stem) = &cfg.output.operator_mtx {
        op.export_matrix_market(stem)?;
    }

    let report = Report {
        title: format!("analyze {}", surface.label),
        r: cfg.r,
        admissibility: Some(AdmissibilityBlock {
            admissible: adm.admissible,
            sign: adm.sign,
            class: adm.class.tag.to_string(),
            margin: Some(Measured::new(adm.class.margin, adm.tol)),
            criteria,
        }),
        operator: Some(OperatorBlock {
            drift_norm: Some(Measured::new(drift_norm_max(&drift), 0.0)),
            identity_residual: Some(Measured::new(identity_worst, 1e-9)),
            stiffness_asymmetry: Some(Measured::new(op.stiffness.max_asymmetry(), 1e-12)),
            symmetric: op.symmetric,
            sign: op.sign,
        }),
        spectral: Some(SpectralBlock {
            lambda: Measured::new(outcome.spectral.lambda, outcome.margin_tol),
            convention: outcome.spectral.convention.to_string(),
            residual: outcome.spectral.residual,
            positivity_margin: outcome.spectral.positivity_margin,
            iterations: outcome.spectral.iterations,
        }),
        stability: Some(StabilityBlock {
            verdict: cert.verdict,
            method: cert.method.clone(),
            witness: witness_desc,
            margin_tol: outcome.margin_tol,
            reverified,
        }),
        bounds: bounds_block,
        notes: Vec::new(),
        provenance: provenance(cfg, surface),
    };
    if let Some(path) = &cfg.output.report {
        std::fs::write(path, report.render())?;
    }
    Ok(report)
}

fn provenance(cfg: &RunConfig, surface: &DiscreteSurface) -> Provenance {
    Provenance {
        config_hash: cfg.hash(),
        label: surface.label.clone(),
        nodes: surface.n_nodes(),
        triangles: surface.mesh.n_tris(),
        boundary_nodes: surface.n_boundary(),
        max_edge: surface.max_edge(),
        version: env!("CARGO_PKG_VERSION").to_string(),
    }
}

fn write_eigenfunction_csv(path: &Path, surface: &DiscreteSurface, sol: &SpectralResult) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "node,u,v,value")?;
    for i in 0..surface.n_nodes() {
        let [u, v] = surface
            .mesh
            .chart
            .as_ref()
            .map_or([f64::NAN, f64::NAN], |c| c[i]);
        writeln!(f, "{},{},{},{:.17e}", i, u, v, sol.eigenfunction[i])?;
    }
    Ok(())
}

/// Run the named verification suites; returns the outcomes and whether all
/// passed.
pub fn cmd_verify(cfg: &RunConfig, suite_override: Option<&str>) -> Result<(Vec<CheckOutcome>, bool)> {
    let suites: Vec<String> = match suite_override {
        Some(s) => vec![s.to_string()],
        None => cfg.verify_suites.clone(),
    };
    let mut outcomes = Vec::new();
    for s in &suites {
        outcomes.extend(run_suite(s)?);
    }
    let all = outcomes.iter().all(|o| o.pass);
    Ok((outcomes, all))
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub param: f64,
    pub lambda: f64,
    pub verdict: String,
    pub bound: Option<f64>,
    pub slack: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Parameter values where lambda changes sign, bisected to the requested
    /// parameter tolerance.
    pub marginal_params: Vec<f64>,
    pub csv: String,
}

fn apply_param(cfg: &RunConfig, name: &str, value: f64) -> Result<RunConfig> {
    let mut out = cfg.clone();
    match (&mut out.surface, name) {
        (SurfaceSpec::Catalog { surface, .. }, "radius") => match surface {
            CatalogSurface::Sphere { radius }
            | CatalogSurface::Hemisphere { radius }
            | CatalogSurface::Cylinder { radius, .. }
            | CatalogSurface::GeodesicSphere { radius } => *radius = value,
            _ => {
                return Err(Error::ConfigField(format!(
                    "surface `{}` has no radius parameter",
                    surface.name()
                )))
            }
        },
        (SurfaceSpec::Catalog { surface, .. }, "distance") => match surface {
            CatalogSurface::Equidistant { distance, .. } => *distance = value,
            _ => {
                return Err(Error::ConfigField(format!(
                    "surface `{}` has no distance parameter",
                    surface.name()
                )))
            }
        },
        (SurfaceSpec::Catalog { surface, .. }, "ratio") => match surface {
            CatalogSurface::CliffordTorus { a } => *a = value,
            _ => {
                return Err(Error::ConfigField(format!(
                    "surface `{}` has no ratio parameter",
                    surface.name()
                )))
            }
        },
        (_, "ball_radius") => match &mut out.domain {
            DomainSpec::Ball { radius, .. } => *radius = value,
            DomainSpec::Whole => {
                return Err(Error::ConfigField(
                    "sweep.param = ball_radius needs domain.kind = ball".into(),
                ))
            }
        },
        (_, other) => {
            return Err(Error::ConfigField(format!(
                "unknown sweep parameter `{other}` (radius|distance|ratio|ball_radius)"
            )))
        }
    }
    Ok(out)
}

fn sweep_eval(cfg: &RunConfig, name: &str, value: f64) -> Result<SweepRow> {
    let cfg_v = apply_param(cfg, name, value)?;
    let outcome = solve_for(&cfg_v, None)?;
    let (bound, slack) = match &cfg_v.domain {
        DomainSpec::Ball { center, radius } => {
            let pin = pinching_check(&outcome.surface, cfg_v.r)?;
            if pin.holds {
                let ball = ball_domain(&outcome.surface, center, *radius)?;
                match verify_bound(&outcome.surface, cfg_v.r, &ball, &VerifyOptions::default()) {
                    Ok(v) => (Some(v.bound.operative), Some(v.slack)),
                    Err(_) => (None, None),
                }
            } else {
                (None, None)
            }
        }
        DomainSpec::Whole => (None, None),
    };
    let margin = 100.0 * cfg_v.solver.tol * outcome.spectral.lambda.abs().max(1.0);
    let verdict = if outcome.spectral.lambda >= margin {
        "stable"
    } else if outcome.spectral.lambda <= -margin {
        "unstable"
    } else {
        "marginal"
    };
    Ok(SweepRow {
        param: value,
        lambda: outcome.spectral.lambda,
        verdict: verdict.to_string(),
        bound,
        slack,
    })
}

/// Sweep one parameter: per-value analyze, CSV rows, and bisection of any
/// lambda sign change down to `sweep.bisect_tol` in the parameter.
pub fn cmd_sweep(cfg: &RunConfig, param: &str, from: f64, to: f64, steps: usize) -> Result<SweepResult> {
    if steps < 2 || !(to > from) {
        return Err(Error::ConfigField(format!(
            "sweep needs at least 2 steps and to > from (got {from}..{to} x{steps})"
        )));
    }
    let values: Vec<f64> = (0..steps)
        .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
        .collect();
    let workers: usize = std::env::var("RSTAB_WORKERS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(1);
    let mut rows: Vec<SweepRow> = Vec::with_capacity(values.len());
    if workers <= 1 {
        for &v in &values {
            rows.push(sweep_eval(cfg, param, v)?);
        }
    } else {
        let results: Vec<Result<SweepRow>> = std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for chunk in values.chunks(values.len().div_ceil(workers)) {
                let cfg = cfg.clone();
                let param = param.to_string();
                let chunk = chunk.to_vec();
                handles.push(scope.spawn(move || {
                    chunk
                        .iter()
                        .map(|&v| sweep_eval(&cfg, &param, v))
                        .collect::<Vec<_>>()
                }));
            }
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("sweep worker panicked"))
                .collect()
        });
        for r in results {
            rows.push(r?);
        }
        rows.sort_by(|a, b| a.param.total_cmp(&b.param));
    }

    // bracket and bisect sign changes of lambda
    let mut marginal_params = Vec::new();
    for w in 0..rows.len() - 1 {
        let (a, b) = (&rows[w], &rows[w + 1]);
        if a.lambda == 0.0 || a.lambda.signum() == b.lambda.signum() {
            continue;
        }
        let (mut lo, mut hi) = (a.param, b.param);
        let mut f_lo = a.lambda;
        while hi - lo > cfg.sweep.bisect_tol {
            let mid = 0.5 * (lo + hi);
            let row = sweep_eval(cfg, param, mid)?;
            if row.lambda.signum() == f_lo.signum() {
                lo = mid;
                f_lo = row.lambda;
            } else {
                hi = mid;
            }
        }
        marginal_params.push(0.5 * (lo + hi));
    }

    let mut csv = String::from("param,lambda,verdict,bound,slack\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{:.12e},{},{},{}\n",
            r.param,
            r.lambda,
            r.verdict,
            r.bound.map_or(String::new(), |b| format!("{b:.12e}")),
            r.slack.map_or(String::new(), |s| format!("{s:.12e}")),
        ));
    }
    if let Some(path) = &cfg.output.sweep_csv {
        std::fs::write(path, &csv)?;
    }
    Ok(SweepResult {
        rows,
        marginal_params,
        csv,
    })
}
