//! Variational consistency checks: the first variation of S_{r+1} and the
//! second variation of the r-area.

use super::{assemble_lr, assemble_tr, AssemblyOptions};
use crate::error::{Error, Result};
use crate::geometry::mat2;
use crate::geometry::variation::{VariationFunction, VariationPath};
use crate::geometry::DiscreteSurface;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariationRoute {
    /// Move the nodes and re-estimate curvature from the varied mesh.
    Mesh,
    /// Differentiate the varied local parametrizations (needs f as a closure
    /// and closed-form normals; no mesh error).
    LocalChart,
}

#[derive(Debug, Clone)]
pub struct LinearizationReport {
    /// Centered difference (S_{r+1}(t) - S_{r+1}(-t)) / 2t per node.
    pub lhs: Vec<f64>,
    /// L_r f + f (trace(A^2 P_r) + trace(P_r R_N)) via the assembled operator.
    pub rhs_operator: Vec<f64>,
    /// Same right-hand side with L_r f from local-chart second derivatives
    /// (available on geodesic local charts with the LocalChart route).
    pub rhs_pointwise: Option<Vec<f64>>,
    /// max |lhs - rhs_operator| over interior nodes.
    pub residual_max: f64,
    /// ||lhs - rhs_operator||_M / ||rhs_operator||_M over interior nodes.
    pub residual_l2_rel: f64,
    pub t: f64,
}

impl LinearizationReport {
    /// Residuals against the pointwise right-hand side, when present.
    pub fn residual_vs_pointwise(&self, surface: &DiscreteSurface) -> Option<(f64, f64)> {
        let rhs = self.rhs_pointwise.as_ref()?;
        Some(residuals(surface, &self.lhs, rhs))
    }
}

fn residuals(surface: &DiscreteSurface, lhs: &[f64], rhs: &[f64]) -> (f64, f64) {
    let mut worst = 0.0f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..surface.n_nodes() {
        if surface.mesh.boundary[i] {
            continue;
        }
        let w = surface.geom[i].weight;
        let d = lhs[i] - rhs[i];
        worst = worst.max(d.abs());
        num += w * d * d;
        den += w * rhs[i] * rhs[i];
    }
    (worst, (num / den.max(1e-300)).sqrt())
}

/// Check the first-variation formula for S_{r+1} under the normal variation
/// x_t = exp_x(t f N): the centered difference of S_{r+1} against
/// L_r(f) + f (S_1 S_{r+1} - (r+2) S_{r+2}) + f trace(P_r R_N).
///
/// The residual is expected to be O(t^2) + O(h^2); boundary nodes are skipped
/// (one-sided stencils).
pub fn linearization_residual(
    surface: &DiscreteSurface,
    r: usize,
    f: &VariationFunction,
    t: f64,
    route: VariationRoute,
) -> Result<LinearizationReport> {
    if !(t > 0.0) {
        return Err(Error::BadParams("variation step t must be positive".into()));
    }
    let path = VariationPath::new(surface, f.clone())?;
    let f_nodal = path.f_values().to_vec();
    let n = surface.n_nodes();

    // left side: centered difference of S_{r+1}
    let (s_plus, s_minus) = match route {
        VariationRoute::LocalChart => (path.s_r_local(t, r + 1)?, path.s_r_local(-t, r + 1)?),
        VariationRoute::Mesh => {
            let sp = path.surface_at(t)?;
            let sm = path.surface_at(-t)?;
            (
                (0..n).map(|i| sp.s_r(i, r + 1)).collect::<Vec<_>>(),
                (0..n).map(|i| sm.s_r(i, r + 1)).collect::<Vec<_>>(),
            )
        }
    };
    let lhs: Vec<f64> = (0..n)
        .map(|i| (s_plus[i] - s_minus[i]) / (2.0 * t))
        .collect();

    // right side via the assembled operator: M^{-1}(K + D) f + f q
    let op = assemble_lr(surface, r, &AssemblyOptions::default())?;
    let lf = op.apply(&f_nodal);
    let ambient_term = surface.ambient_curvature_term(r)?;
    let rhs_operator: Vec<f64> = (0..n)
        .map(|i| lf[i] + f_nodal[i] * (surface.trace_a2_pr(i, r) + ambient_term[i]))
        .collect();

    // pointwise right side: trace(P_r Hess f) from local charts, when geodesic
    let rhs_pointwise = pointwise_rhs(surface, r, f, &f_nodal, &ambient_term, route)?;

    let (residual_max, residual_l2_rel) = residuals(surface, &lhs, &rhs_operator);
    Ok(LinearizationReport {
        lhs,
        rhs_operator,
        rhs_pointwise,
        residual_max,
        residual_l2_rel,
        t,
    })
}

fn pointwise_rhs(
    surface: &DiscreteSurface,
    r: usize,
    f: &VariationFunction,
    f_nodal: &[f64],
    ambient_term: &[f64],
    route: VariationRoute,
) -> Result<Option<Vec<f64>>> {
    if route != VariationRoute::LocalChart {
        return Ok(None);
    }
    let closure = match f {
        VariationFunction::Closure(c) => c.clone(),
        VariationFunction::Nodal(_) => return Ok(None),
    };
    let charts = match &surface.local_charts {
        Some(c) if c.geodesic_at_origin => c,
        _ => return Ok(None),
    };
    let n = surface.n_nodes();
    let mut out = Vec::with_capacity(n);
    let delta = 1e-3;
    for i in 0..n {
        let psi = &charts.maps[i];
        let g = |s: f64, t: f64| -> f64 { closure(&psi(s, t)) };
        // centered second differences with one Richardson step
        let hess_at = |d: f64| -> [f64; 3] {
            let c = g(0.0, 0.0);
            let huu = (g(d, 0.0) - 2.0 * c + g(-d, 0.0)) / (d * d);
            let hvv = (g(0.0, d) - 2.0 * c + g(0.0, -d)) / (d * d);
            let huv = (g(d, d) - g(d, -d) - g(-d, d) + g(-d, -d)) / (4.0 * d * d);
            [huu, huv, hvv]
        };
        let a = hess_at(delta);
        let b = hess_at(delta / 2.0);
        let hess = [
            [(4.0 * b[0] - a[0]) / 3.0, (4.0 * b[1] - a[1]) / 3.0],
            [(4.0 * b[1] - a[1]) / 3.0, (4.0 * b[2] - a[2]) / 3.0],
        ];
        let p = surface.p_r(i, r);
        let lrf = mat2::trace(&mat2::mul(&p, &hess));
        out.push(lrf + f_nodal[i] * (surface.trace_a2_pr(i, r) + ambient_term[i]));
    }
    Ok(Some(out))
}

/// Default variation step: the mesh size, balancing the O(t^2) truncation
/// against the O(h^2) spatial error.
pub fn default_variation_step(surface: &DiscreteSurface) -> f64 {
    surface.max_edge()
}

/// Three-point Richardson variant of [`linearization_residual`]: combines the
/// centered differences at t and t/2 to (4 D(t/2) - D(t))/3, cancelling the
/// O(t^2) truncation term.
pub fn linearization_residual_richardson(
    surface: &DiscreteSurface,
    r: usize,
    f: &VariationFunction,
    t: f64,
    route: VariationRoute,
) -> Result<LinearizationReport> {
    let coarse = linearization_residual(surface, r, f, t, route)?;
    let fine = linearization_residual(surface, r, f, t / 2.0, route)?;
    let lhs: Vec<f64> = fine
        .lhs
        .iter()
        .zip(&coarse.lhs)
        .map(|(f, c)| (4.0 * f - c) / 3.0)
        .collect();
    let (residual_max, residual_l2_rel) = residuals(surface, &lhs, &coarse.rhs_operator);
    Ok(LinearizationReport {
        lhs,
        rhs_operator: coarse.rhs_operator,
        rhs_pointwise: coarse.rhs_pointwise,
        residual_max,
        residual_l2_rel,
        t,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct SecondVariationOptions {
    /// Relative tolerance for the constant-H_{r+1} precondition.
    pub hr1_tol: f64,
    pub route: VariationRoute,
}

impl Default for SecondVariationOptions {
    fn default() -> Self {
        Self {
            hr1_tol: 1e-6,
            route: VariationRoute::LocalChart,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SecondVariationReport {
    /// The constrained second variation of the r-area along x_t = exp(t f N),
    /// normalized by (r+1): [D^2_t A_r - (r+1) S_{r+1} int S_1 f^2]/(r+1).
    pub lhs: f64,
    /// -int f (unsigned T_r f) dM via the assembled operator.
    pub rhs: f64,
    pub residual: f64,
    /// Raw centered second difference of the r-area.
    pub second_difference: f64,
    /// The volume-constraint correction (r+1) S_{r+1} int S_1 f^2 dM.
    pub correction: f64,
}

/// Second variation of the r-area at a constant-H_{r+1} surface in a space
/// form, against the quadratic form of the (unsigned) stability operator.
///
/// At a closed H_{r+1}-hypersurface the r-area is only a constrained critical
/// point, so the plain second difference of A_r along the geodesic normal
/// path carries a first-variation term; subtracting the exact correction
/// (r+1) S_{r+1} int S_1 f^2 dM (the second t-derivative of the enclosed
/// volume times the Lagrange multiplier) and dividing by (r+1) yields the
/// variational quadratic form -int f T_r f dM, which is what this check
/// compares. Verified against the concentric-sphere family in closed form.
pub fn second_variation_r_area(
    surface: &DiscreteSurface,
    r: usize,
    f: &VariationFunction,
    t: f64,
    opts: &SecondVariationOptions,
) -> Result<SecondVariationReport> {
    if surface.ambient.space_form_curvature().is_none() {
        return Err(Error::NotSpaceForm);
    }
    // H_{r+1} must be constant (the formula only holds at critical points)
    let n = surface.n_nodes();
    let s_next: Vec<f64> = (0..n).map(|i| surface.s_r(i, r + 1)).collect();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in &s_next {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let scale = lo.abs().max(hi.abs()).max(1.0);
    let variation = (hi - lo) / scale;
    if variation > opts.hr1_tol {
        return Err(Error::NotConstantHr1 {
            variation,
            tol: opts.hr1_tol,
        });
    }
    let s_rp1 = 0.5 * (lo + hi);

    let path = VariationPath::new(surface, f.clone())?;
    let f_nodal = path.f_values().to_vec();
    // compact support on bounded surfaces
    if !surface.is_closed() {
        for i in 0..n {
            if surface.mesh.boundary[i] && f_nodal[i].abs() > 1e-12 {
                return Err(Error::BadParams(
                    "second variation needs f = 0 on the boundary".into(),
                ));
            }
        }
    }

    let area_r = |tt: f64| -> Result<f64> {
        if tt == 0.0 {
            return surface.r_area(r);
        }
        let w = path.varied_weights(tt)?;
        match r {
            0 => Ok(w.iter().sum()),
            1 => {
                let s1 = match opts.route {
                    VariationRoute::LocalChart => path.s_r_local(tt, 1)?,
                    VariationRoute::Mesh => {
                        let s = path.surface_at(tt)?;
                        (0..n).map(|i| s.s_r(i, 1)).collect()
                    }
                };
                Ok(w.iter().zip(&s1).map(|(wi, si)| wi * si).sum())
            }
            _ => Err(Error::BadParams(format!("r = {r} exceeds n - 1 = 1"))),
        }
    };
    let a_plus = area_r(t)?;
    let a_zero = area_r(0.0)?;
    let a_minus = area_r(-t)?;
    let second_difference = (a_plus - 2.0 * a_zero + a_minus) / (t * t);

    // exact t = 0 correction: (r+1) S_{r+1} int S_1 f^2 dM
    let mut int_s1_f2 = 0.0;
    for i in 0..n {
        int_s1_f2 += surface.geom[i].weight * surface.s_r(i, 1) * f_nodal[i] * f_nodal[i];
    }
    let correction = (r + 1) as f64 * s_rp1 * int_s1_f2;
    let lhs = (second_difference - correction) / (r + 1) as f64;

    // rhs through the assembled (unsigned) operator
    let op = assemble_tr(surface, r, &AssemblyOptions::default())?;
    let rhs = op.sign * op.quadratic_form(&f_nodal);

    Ok(SecondVariationReport {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        second_difference,
        correction,
    })
}
