//! Geodesic-ball domains, the pinching hypothesis, and the principal-
//! eigenvalue lower bound
//!
//!   lambda(Omega) >= (2/R^2) ( (n-r) inf_Omega S_r - (r+1) |S_{r+1}| R ),
//!
//! for a connected component Omega of the preimage of an ambient ball of
//! radius R, under 0 < trace(P_r A^2)/trace(P_r) <= -Sec(ambient).
//!
//! The |S_{r+1}| form (the proof's final display) is the operative bound; the
//! statement form with signed S_{r+1} is reported alongside and any verdict
//! difference between the two is flagged.

use crate::assembly::{assemble_tr, AssemblyOptions};
use crate::error::{Error, Result};
use crate::geometry::{AmbientKind, DiscreteSurface, Point};
use crate::spectral::{
    collatz_wielandt_lower, principal_eigen_nonselfadjoint, principal_eigen_selfadjoint,
    SolverOptions, SpectralResult,
};

/// Geodesic distance between points of a model space. Ambients declared as
/// general have no usable distance oracle.
pub fn geodesic_distance(ambient: &crate::geometry::Ambient, p: &Point, q: &Point) -> Result<f64> {
    match ambient.kind {
        AmbientKind::SpaceForm => Ok(ambient.model.distance(p, q)),
        AmbientKind::General { .. } => Err(Error::GeneralAmbientUnsupported),
    }
}

/// One connected component of the surface preimage of a closed ambient ball.
#[derive(Debug, Clone)]
pub struct BallDomain {
    pub center: Point,
    pub radius: f64,
    /// Nodes of the component (closure: includes its in-surface boundary).
    pub nodes: Vec<usize>,
    /// Dirichlet mask for operators restricted to the domain: true = constrained.
    pub mask: Vec<bool>,
    /// Nodes of Omega adjacent to the outside (or on the surface boundary).
    pub rim: Vec<usize>,
    /// Ambient distance to the center per surface node.
    pub distance: Vec<f64>,
    /// True when the ball swallowed the whole (closed) surface: no Dirichlet
    /// boundary remains and the lower bound does not apply.
    pub whole_surface: bool,
}

/// Flood-fill the component of the ball preimage containing the node nearest
/// to the center.
pub fn ball_domain(surface: &DiscreteSurface, center: &Point, radius: f64) -> Result<BallDomain> {
    if !(radius > 0.0) {
        return Err(Error::BadParams(format!("ball radius must be positive, got {radius}")));
    }
    let n = surface.n_nodes();
    let amb = &surface.ambient;
    let mut distance = Vec::with_capacity(n);
    for p in &surface.mesh.points {
        distance.push(geodesic_distance(amb, center, p)?);
    }
    let inside: Vec<bool> = distance.iter().map(|&d| d <= radius).collect();
    let seed = (0..n)
        .filter(|&i| inside[i])
        .min_by(|&a, &b| distance[a].total_cmp(&distance[b]))
        .ok_or(Error::EmptyDomain)?;
    // flood fill over surface edges
    let mut in_comp = vec![false; n];
    let mut stack = vec![seed];
    in_comp[seed] = true;
    while let Some(i) = stack.pop() {
        for &j in &surface.adjacency.nbrs[i] {
            if inside[j] && !in_comp[j] {
                in_comp[j] = true;
                stack.push(j);
            }
        }
    }
    let nodes: Vec<usize> = (0..n).filter(|&i| in_comp[i]).collect();
    let mut rim = Vec::new();
    let mut mask = vec![true; n];
    for &i in &nodes {
        let touches_outside = surface.adjacency.nbrs[i].iter().any(|&j| !in_comp[j]);
        let on_surface_boundary = surface.mesh.boundary[i];
        if touches_outside || on_surface_boundary {
            rim.push(i);
        } else {
            mask[i] = false; // free interior node
        }
    }
    let whole_surface = rim.is_empty();
    Ok(BallDomain {
        center: *center,
        radius,
        nodes,
        mask,
        rim,
        distance,
        whole_surface,
    })
}

#[derive(Debug, Clone)]
pub struct PinchingReport {
    pub holds: bool,
    /// max over nodes of trace(P_r A^2)/trace(P_r).
    pub worst_ratio: f64,
    pub min_ratio: f64,
    pub worst_node: usize,
    /// The -Sec bound the ratio is compared with.
    pub sec_infimum: f64,
}

/// Node-wise check of 0 < trace(P_r A^2)/trace(P_r) <= -Sec(ambient).
pub fn pinching_check(surface: &DiscreteSurface, r: usize) -> Result<PinchingReport> {
    let sec_inf = surface.ambient.sec_infimum().ok_or(Error::MissingSecInfimum)?;
    let bound = -sec_inf;
    let mut worst_ratio = f64::NEG_INFINITY;
    let mut min_ratio = f64::INFINITY;
    let mut worst_node = 0;
    for i in 0..surface.n_nodes() {
        let tr_p = (2 - r) as f64 * surface.s_r(i, r);
        if tr_p.abs() < 1e-14 {
            return Err(Error::BadParams(format!(
                "trace(P_r) vanishes at node {i}; the pinching ratio is undefined"
            )));
        }
        let ratio = surface.trace_a2_pr(i, r) / tr_p;
        if ratio > worst_ratio {
            worst_ratio = ratio;
            worst_node = i;
        }
        min_ratio = min_ratio.min(ratio);
    }
    let slack = 1e-12 * (1.0 + bound.abs());
    let holds = min_ratio > 0.0 && worst_ratio <= bound + slack;
    Ok(PinchingReport {
        holds,
        worst_ratio,
        min_ratio,
        worst_node,
        sec_infimum: sec_inf,
    })
}

#[derive(Debug, Clone)]
pub struct BoundReport {
    /// Operative bound with (r+1) |S_{r+1}| R (the proof's final display).
    pub operative: f64,
    /// Statement form with signed S_{r+1}.
    pub statement_form: f64,
    pub inf_sr: f64,
    pub max_abs_sr1: f64,
    pub r: usize,
    pub radius: f64,
    /// Set when the operative and statement forms straddle zero.
    pub forms_disagree: bool,
}

/// Evaluate the lower bound over a ball domain. Requires the pinching
/// hypothesis and a constant H_{r+1} surface.
pub fn eigenvalue_lower_bound(surface: &DiscreteSurface, r: usize, ball: &BallDomain) -> Result<BoundReport> {
    let pin = pinching_check(surface, r)?;
    if !pin.holds {
        return Err(Error::PinchingFails {
            worst: pin.worst_ratio,
            bound: -pin.sec_infimum,
        });
    }
    check_constant_hr1(surface, r)?;
    let n = 2usize;
    let radius = ball.radius;
    // inf over the closure of Omega (rim nodes included)
    let mut inf_sr = f64::INFINITY;
    let mut max_abs_sr1 = 0.0f64;
    let mut signed_sr1 = f64::NEG_INFINITY;
    for &i in &ball.nodes {
        inf_sr = inf_sr.min(surface.s_r(i, r));
        max_abs_sr1 = max_abs_sr1.max(surface.s_r(i, r + 1).abs());
        signed_sr1 = signed_sr1.max(surface.s_r(i, r + 1));
    }
    let pref = 2.0 / (radius * radius);
    let operative = pref * ((n - r) as f64 * inf_sr - (r + 1) as f64 * max_abs_sr1 * radius);
    let statement_form = pref * ((n - r) as f64 * inf_sr - (r + 1) as f64 * signed_sr1 * radius);
    Ok(BoundReport {
        operative,
        statement_form,
        inf_sr,
        max_abs_sr1,
        r,
        radius,
        forms_disagree: (operative >= 0.0) != (statement_form >= 0.0),
    })
}

fn check_constant_hr1(surface: &DiscreteSurface, r: usize) -> Result<()> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..surface.n_nodes() {
        let v = surface.s_r(i, r + 1);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let scale = lo.abs().max(hi.abs()).max(1.0);
    let variation = (hi - lo) / scale;
    let tol = 1e-6;
    if variation > tol {
        return Err(Error::NotConstantHr1 { variation, tol });
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct BoundVerification {
    pub lambda: f64,
    pub bound: BoundReport,
    pub slack: f64,
    pub pass: bool,
    /// Collatz-Wielandt value of the proof's test function f = R^2 - rho^2.
    pub cw_of_proof_function: f64,
    /// f > 0 on the interior of Omega?
    pub proof_function_positive: bool,
    pub spectral: SpectralResult,
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub solver: SolverOptions,
    /// Slack tolerance: pass iff lambda >= bound - tol.
    pub tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            tol: 1e-6,
        }
    }
}

/// Solve the principal eigenvalue on the ball domain and compare with the
/// lower bound; also exercises the proof's own test function f = R^2 - rho^2
/// through the Collatz-Wielandt mechanism.
pub fn verify_bound(
    surface: &DiscreteSurface,
    r: usize,
    ball: &BallDomain,
    opts: &VerifyOptions,
) -> Result<BoundVerification> {
    if ball.whole_surface {
        return Err(Error::EmptyBoundary);
    }
    let bound = eigenvalue_lower_bound(surface, r, ball)?;
    let op = assemble_tr(surface, r, &AssemblyOptions::default())?.with_mask(ball.mask.clone());
    let spectral = if op.symmetric {
        principal_eigen_selfadjoint(&op, &opts.solver)?
    } else {
        principal_eigen_nonselfadjoint(&op, &opts.solver)?
    };
    let lambda = spectral.lambda;
    let slack = lambda - bound.operative;
    // the proof's test function, positive inside and zero where rho = R
    let f: Vec<f64> = (0..surface.n_nodes())
        .map(|i| {
            let d = ball.distance[i];
            (ball.radius * ball.radius - d * d).max(0.0)
        })
        .collect();
    let proof_function_positive = (0..surface.n_nodes())
        .filter(|&i| !ball.mask[i])
        .all(|i| f[i] > 0.0);
    let cw = collatz_wielandt_lower(&op, &f)?;
    Ok(BoundVerification {
        lambda,
        slack,
        pass: slack >= -opts.tol,
        cw_of_proof_function: cw,
        proof_function_positive,
        bound,
        spectral,
    })
}

/// Node-wise check of the proof's intermediate claim
/// trace(P_r A^2) + trace(P_r R_N) <= 0 when the pinching holds.
pub fn pinching_potential_sign(surface: &DiscreteSurface, r: usize) -> Result<f64> {
    let ambient_term = surface.ambient_curvature_term(r)?;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..surface.n_nodes() {
        worst = worst.max(surface.trace_a2_pr(i, r) + ambient_term[i]);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::catalog::CatalogSurface;
    use crate::geometry::discretize::discretize;
    use crate::geometry::{Ambient, Model};

    fn horosphere(res: u32) -> DiscreteSurface {
        let imm = CatalogSurface::Horosphere { extent: 1.0 }.immersion().unwrap();
        discretize(&imm, res).unwrap()
    }

    fn equidistant(d: f64, res: u32) -> DiscreteSurface {
        let imm = CatalogSurface::Equidistant {
            distance: d,
            extent: 1.0,
        }
        .immersion()
        .unwrap();
        discretize(&imm, res).unwrap()
    }

    #[test]
    fn model_distances() {
        let e = Ambient::space_form(Model::Euclidean3);
        let p = Point::new(0.0, 0.0, 0.0, 0.0);
        let q = Point::new(3.0, 4.0, 0.0, 0.0);
        assert_eq!(geodesic_distance(&e, &p, &q).unwrap(), 5.0);

        let h = Ambient::space_form(Model::Hyperbolic3);
        let apex = Point::new(1.0, 0.0, 0.0, 0.0);
        for s in [0.4, 1.3] {
            let q = Model::Hyperbolic3.exp(&apex, &Point::new(0.0, s, 0.0, 0.0));
            assert!((geodesic_distance(&h, &apex, &q).unwrap() - s).abs() < 1e-12);
        }

        let sph = Ambient::space_form(Model::Sphere3);
        let a = Point::new(1.0, 0.0, 0.0, 0.0);
        let b = Point::new(-1.0, 0.0, 0.0, 0.0);
        assert!((geodesic_distance(&sph, &a, &b).unwrap() - std::f64::consts::PI).abs() < 1e-14);

        // general ambients have no distance oracle
        let g = Ambient::wrapped_space_form(Model::Euclidean3);
        assert!(matches!(
            geodesic_distance(&g, &p, &q),
            Err(Error::GeneralAmbientUnsupported)
        ));
    }

    #[test]
    fn ball_on_horosphere_is_intrinsic_disc() {
        // ambient distance R from a point on the horosphere cuts an intrinsic
        // disc of radius 2 sinh(R/2) in the flat chart metric
        let s = horosphere(24);
        let p = Point::new(1.0, 0.0, 0.0, 0.0);
        let ball = ball_domain(&s, &p, 0.5).unwrap();
        assert!(!ball.whole_surface);
        let intrinsic = 2.0 * (0.25f64).sinh();
        let h = s.max_edge();
        let chart = s.mesh.chart.as_ref().unwrap();
        for &i in &ball.nodes {
            let [u, v] = chart[i];
            let rad = (u * u + v * v).sqrt();
            assert!(rad <= intrinsic + h, "node at chart radius {rad}");
        }
        // interior nodes exist
        assert!(ball.mask.iter().filter(|&&m| !m).count() > 10);
    }

    #[test]
    fn ball_on_sphere_hemisphere_at_sqrt2() {
        // chord radius sqrt(2) from the north pole cuts the upper hemisphere
        let imm = CatalogSurface::Sphere { radius: 1.0 }.immersion().unwrap();
        let s = discretize(&imm, 3).unwrap();
        let north = Point::new(0.0, 0.0, 1.0, 0.0);
        let ball = ball_domain(&s, &north, std::f64::consts::SQRT_2).unwrap();
        let h = s.max_edge();
        for &i in &ball.nodes {
            assert!(s.mesh.points[i][2] >= -h);
        }
        let inside_count = ball.nodes.len();
        assert!((inside_count as f64) > 0.4 * s.n_nodes() as f64);
        assert!((inside_count as f64) < 0.6 * s.n_nodes() as f64);

        // a huge ball swallows the surface: no boundary remains
        let ball = ball_domain(&s, &north, 10.0).unwrap();
        assert!(ball.whole_surface);
        assert!(matches!(
            verify_bound(&s, 0, &ball, &VerifyOptions::default()),
            Err(Error::EmptyBoundary)
        ));
    }

    #[test]
    fn empty_ball() {
        let s = horosphere(12);
        let far = Model::Hyperbolic3.exp(
            &Point::new(1.0, 0.0, 0.0, 0.0),
            &Point::new(0.0, 0.0, 0.0, -5.0),
        );
        assert!(matches!(
            ball_domain(&s, &far, 0.1),
            Err(Error::EmptyDomain)
        ));
    }

    #[test]
    fn pinching_closed_forms() {
        // horosphere: ratio = |A|^2/2 = 1 <= 1, holds with equality
        let s = horosphere(12);
        let rep = pinching_check(&s, 0).unwrap();
        assert!(rep.holds);
        assert!((rep.worst_ratio - 1.0).abs() < 1e-12);

        // equidistant(d): ratio = tanh^2(d) < 1, strict
        let s = equidistant(0.5, 12);
        let rep = pinching_check(&s, 0).unwrap();
        assert!(rep.holds);
        assert!((rep.worst_ratio - 0.5f64.tanh().powi(2)).abs() < 1e-12);
        assert!(rep.worst_ratio < 1.0);

        // Euclidean sphere: -Sec = 0 < ratio, fails
        let imm = CatalogSurface::Sphere { radius: 1.0 }.immersion().unwrap();
        let s = discretize(&imm, 2).unwrap();
        let rep = pinching_check(&s, 0).unwrap();
        assert!(!rep.holds);

        // intermediate claim: q <= 0 node-wise when the pinching holds
        let s = equidistant(0.3, 10);
        assert!(pinching_potential_sign(&s, 0).unwrap() <= 1e-12);
        let s = horosphere(10);
        assert!(pinching_potential_sign(&s, 0).unwrap() <= 1e-12);
    }

    #[test]
    fn bound_formula_closed_forms() {
        // horosphere r=0: (2/R^2)(2 - 2R); R=1/2 -> 8, R=1 -> 0
        let s = horosphere(16);
        let p = Point::new(1.0, 0.0, 0.0, 0.0);
        let ball = ball_domain(&s, &p, 0.5).unwrap();
        let rep = eigenvalue_lower_bound(&s, 0, &ball).unwrap();
        assert!((rep.operative - 8.0).abs() < 1e-9, "bound {}", rep.operative);
        assert!((rep.statement_form - 8.0).abs() < 1e-9);
        assert!(!rep.forms_disagree);

        let imm = CatalogSurface::Horosphere { extent: 1.4 }.immersion().unwrap();
        let s = discretize(&imm, 20).unwrap();
        let ball = ball_domain(&s, &p, 1.0).unwrap();
        let rep = eigenvalue_lower_bound(&s, 0, &ball).unwrap();
        assert!(rep.operative.abs() < 1e-9, "bound {}", rep.operative);

        // equidistant(d): (2/R^2)(2 - 2 tanh(d) R)
        let s = equidistant(0.5, 16);
        let center = s.mesh.points[s
            .mesh
            .chart
            .as_ref()
            .unwrap()
            .iter()
            .enumerate()
            .min_by(|a, b| {
                let ra = a.1[0].hypot(a.1[1]);
                let rb = b.1[0].hypot(b.1[1]);
                ra.total_cmp(&rb)
            })
            .unwrap()
            .0];
        let ball = ball_domain(&s, &center, 0.4).unwrap();
        let rep = eigenvalue_lower_bound(&s, 0, &ball).unwrap();
        let expect = (2.0 / 0.16) * (2.0 - 2.0 * 0.5f64.tanh() * 0.4);
        assert!((rep.operative - expect).abs() < 1e-9);

        // pinching gate
        let imm = CatalogSurface::Sphere { radius: 1.0 }.immersion().unwrap();
        let sp = discretize(&imm, 2).unwrap();
        let ball = ball_domain(&sp, &Point::new(0.0, 0.0, 1.0, 0.0), 0.5).unwrap();
        assert!(matches!(
            eigenvalue_lower_bound(&sp, 0, &ball),
            Err(Error::PinchingFails { .. })
        ));
    }

    #[test]
    fn verify_bound_horosphere() {
        let s = horosphere(28);
        let p = Point::new(1.0, 0.0, 0.0, 0.0);
        for radius in [0.3, 0.5, 0.8] {
            let ball = ball_domain(&s, &p, radius).unwrap();
            let v = verify_bound(&s, 0, &ball, &VerifyOptions::default()).unwrap();
            assert!(v.pass, "R={radius}: lambda {} bound {}", v.lambda, v.bound.operative);
            assert!(v.proof_function_positive);
            assert!(v.cw_of_proof_function <= v.lambda + 1e-6);
        }
        // spectral cross-check against the flat disc of intrinsic radius
        // 2 sinh(R/2): the rim convention shrinks the discrete domain by
        // about one mesh cell, so the eigenvalue over-estimates at O(h);
        // check it decreases toward the closed form under refinement.
        let radius = 0.8f64;
        let j01 = 2.404825557695773;
        let intr = 2.0 * (radius / 2.0).sinh();
        let approx = (j01 / intr).powi(2);
        let mut gaps = Vec::new();
        for res in [20u32, 40] {
            let s = horosphere(res);
            let ball = ball_domain(&s, &p, radius).unwrap();
            let v = verify_bound(&s, 0, &ball, &VerifyOptions::default()).unwrap();
            assert!(v.lambda >= approx - 0.05 * approx, "under-shoot at res {res}");
            gaps.push(v.lambda - approx);
        }
        assert!(gaps[1] < gaps[0], "gaps {gaps:?}");
        assert!(gaps[1] / approx < 0.15, "relative gap {}", gaps[1] / approx);
    }

    #[test]
    fn bound_monotone_in_radius() {
        let s = equidistant(0.5, 20);
        let center_idx = s
            .mesh
            .chart
            .as_ref()
            .unwrap()
            .iter()
            .enumerate()
            .min_by(|a, b| a.1[0].hypot(a.1[1]).total_cmp(&b.1[0].hypot(b.1[1])))
            .unwrap()
            .0;
        let center = s.mesh.points[center_idx];
        let mut prev_bound = f64::INFINITY;
        for radius in [0.3, 0.45, 0.6, 0.75] {
            let ball = ball_domain(&s, &center, radius).unwrap();
            let rep = eigenvalue_lower_bound(&s, 0, &ball).unwrap();
            assert!(rep.operative < prev_bound);
            prev_bound = rep.operative;
            let v = verify_bound(&s, 0, &ball, &VerifyOptions::default()).unwrap();
            assert!(v.pass, "R={radius} slack {}", v.slack);
        }
    }
}
