//! Discretization: meshes an immersion and computes per-node geometry.
//!
//! Two geometry sources:
//! - `Analytic`: catalog closed forms where attached, otherwise jets of the
//!   chart map by centered finite differences with one Richardson step.
//! - `MeshFit`: nothing but node positions and connectivity is used; normals
//!   come from incident faces and the shape operator from a local cubic
//!   least-squares height fit over the two-ring (quadratic on small stencils).
//!   This is the lower-accuracy path used for OFF meshes and varied surfaces.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::ambient::{Model, Point};
use super::catalog::{ChartSpec, Immersion, MeshPlan, ShapeForm};
use super::mat2::{self, Mat2};
use super::mesh::{self, Adjacency, Mesh};
use super::{tangent_frame, DiscreteSurface, LocalCharts, LocalMap, NodeGeometry};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometrySource {
    Analytic,
    MeshFit,
}

/// First and second derivatives of a chart map at a point.
#[derive(Debug, Clone)]
pub struct Jet2 {
    pub x: Point,
    pub xu: Point,
    pub xv: Point,
    pub xuu: Point,
    pub xuv: Point,
    pub xvv: Point,
}

/// Centered finite-difference jet with one Richardson extrapolation.
pub fn fd_jet(map: &dyn Fn(f64, f64) -> Point, u: f64, v: f64, delta: f64) -> Jet2 {
    let x = map(u, v);
    let stencil = |d: f64| {
        let fpu = map(u + d, v);
        let fmu = map(u - d, v);
        let fpv = map(u, v + d);
        let fmv = map(u, v - d);
        let fpp = map(u + d, v + d);
        let fpm = map(u + d, v - d);
        let fmp = map(u - d, v + d);
        let fmm = map(u - d, v - d);
        let xu = (fpu - fmu) / (2.0 * d);
        let xv = (fpv - fmv) / (2.0 * d);
        let xuu = (fpu - x * 2.0 + fmu) / (d * d);
        let xvv = (fpv - x * 2.0 + fmv) / (d * d);
        let xuv = (fpp - fpm - fmp + fmm) / (4.0 * d * d);
        (xu, xv, xuu, xuv, xvv)
    };
    let coarse = stencil(delta);
    let fine = stencil(delta / 2.0);
    let rich = |f: Point, c: Point| (f * 4.0 - c) / 3.0;
    Jet2 {
        x,
        xu: rich(fine.0, coarse.0),
        xv: rich(fine.1, coarse.1),
        xuu: rich(fine.2, coarse.2),
        xuv: rich(fine.3, coarse.3),
        xvv: rich(fine.4, coarse.4),
    }
}

/// First fundamental form, frame, normal, and shape operator from a jet.
///
/// `hint` orients the normal; without it the (x_u, x_v) winding decides.
/// Returns (normal, frame, shape in frame, asymmetry defect, frame-change B)
/// where B maps frame components to chart components (columns are the chart
/// coordinates of e1, e2).
pub struct JetGeometry {
    pub normal: Point,
    pub frame: [Point; 2],
    pub shape: Mat2,
    pub asym: f64,
    pub frame_to_chart: Mat2,
}

pub fn node_geometry_from_jet(
    model: Model,
    jet: &Jet2,
    hint: Option<&Point>,
    node: usize,
) -> Result<JetGeometry> {
    let e = model.dot(&jet.xu, &jet.xu);
    let f = model.dot(&jet.xu, &jet.xv);
    let g = model.dot(&jet.xv, &jet.xv);
    let det = e * g - f * f;
    if !(e > 0.0) || det <= 1e-14 * (e + g) * (e + g) {
        return Err(Error::DegenerateMetric { node });
    }
    let mut normal = model.normal_complete(&jet.x, &[jet.xu, jet.xv])?;
    if let Some(h) = hint {
        if model.dot(&normal, h) < 0.0 {
            normal = -normal;
        }
    }
    // second fundamental form: for the quadric models the chart second
    // derivatives pair with the (model-tangent) normal directly
    let h11 = model.dot(&jet.xuu, &normal);
    let h12 = model.dot(&jet.xuv, &normal);
    let h22 = model.dot(&jet.xvv, &normal);
    // Weingarten in chart coordinates: g^{-1} h
    let ginv = mat2::inverse(&[[e, f], [f, g]]).expect("checked above");
    let a_chart = mat2::mul(&ginv, &[[h11, h12], [h12, h22]]);
    // orthonormal frame by Gram-Schmidt on (x_u, x_v)
    let se = e.sqrt();
    let e1 = jet.xu / se;
    let e2_raw = jet.xv - e1 * (f / se);
    let e2 = e2_raw / model.norm(&e2_raw);
    // frame-change: chart components -> frame components
    let c = [[se, f / se], [0.0, (det / e).sqrt()]];
    let c_inv = [
        [1.0 / c[0][0], -c[0][1] / (c[0][0] * c[1][1])],
        [0.0, 1.0 / c[1][1]],
    ];
    let a_frame = mat2::mul(&c, &mat2::mul(&a_chart, &c_inv));
    let (shape, asym) = mat2::symmetrize(&a_frame);
    Ok(JetGeometry {
        normal,
        frame: [e1, e2],
        shape,
        asym,
        frame_to_chart: c_inv,
    })
}

/// Area of the (chordal) triangle through three model points.
pub fn triangle_area(model: Model, p0: &Point, p1: &Point, p2: &Point) -> f64 {
    let d1 = p1 - p0;
    let d2 = p2 - p0;
    let a = model.dot(&d1, &d1);
    let b = model.dot(&d1, &d2);
    let c = model.dot(&d2, &d2);
    let det = a * c - b * b;
    if det <= 0.0 {
        return 0.0;
    }
    0.5 * det.sqrt()
}

fn lumped_weights(model: Model, mesh: &Mesh) -> Vec<f64> {
    let mut w = vec![0.0; mesh.n_nodes()];
    for t in 0..mesh.tris.len() {
        let p = mesh.tri_points(t);
        let area = triangle_area(model, &p[0], &p[1], &p[2]);
        for &i in &mesh.tris[t] {
            w[i] += area / 3.0;
        }
    }
    w
}

/// Per-node (normal, frame, shape operator, symmetrization defect).
pub type EstimatedGeometry = Vec<(Point, [Point; 2], Mat2, f64)>;

/// Normals, frames, and shape operators estimated from the mesh alone.
pub fn estimate_geometry(
    model: Model,
    mesh: &Mesh,
    adj: &Adjacency,
) -> Result<EstimatedGeometry> {
    if mesh.lift.is_some() {
        return Err(Error::BadParams(
            "mesh-fit estimation is unsupported on periodically-identified charts".into(),
        ));
    }
    let n = mesh.n_nodes();
    // area-weighted face normals respecting the winding
    let mut normals = vec![Point::zeros(); n];
    for t in &mesh.tris {
        let area = triangle_area(
            model,
            &mesh.points[t[0]],
            &mesh.points[t[1]],
            &mesh.points[t[2]],
        );
        for k in 0..3 {
            let i = t[k];
            let j = t[(k + 1) % 3];
            let l = t[(k + 2) % 3];
            let p = &mesh.points[i];
            let t1 = model.log(p, &mesh.points[j]);
            let t2 = model.log(p, &mesh.points[l]);
            if let Ok(fnorm) = model.normal_complete(p, &[t1, t2]) {
                normals[i] += fnorm * area;
            }
        }
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let nn = model.norm(&normals[i]);
        if nn < 1e-30 {
            return Err(Error::DegenerateMetric { node: i });
        }
        let normal = normals[i] / nn;
        let frame = tangent_frame(model, &mesh.points[i], &normal);
        // local height samples over the two-ring
        let ring = mesh::two_ring(adj, i);
        let p = &mesh.points[i];
        let mut rows: Vec<[f64; 3]> = Vec::with_capacity(ring.len() + 1);
        rows.push([0.0, 0.0, 0.0]);
        for &k in &ring {
            let lg = model.log(p, &mesh.points[k]);
            let s = model.dot(&lg, &frame[0]);
            let t = model.dot(&lg, &frame[1]);
            let h = model.dot(&lg, &normal);
            rows.push([s, t, h]);
        }
        let cubic = rows.len() >= 12;
        let ncoef = if cubic { 10 } else { 6 };
        if rows.len() < 6 {
            return Err(Error::InsufficientStencil {
                node: i,
                rows: rows.len(),
                unknowns: 6,
            });
        }
        let mut a = DMatrix::<f64>::zeros(rows.len(), ncoef);
        let mut b = DVector::<f64>::zeros(rows.len());
        for (r, row) in rows.iter().enumerate() {
            let (s, t) = (row[0], row[1]);
            a[(r, 0)] = 1.0;
            a[(r, 1)] = s;
            a[(r, 2)] = t;
            a[(r, 3)] = s * s;
            a[(r, 4)] = s * t;
            a[(r, 5)] = t * t;
            if cubic {
                a[(r, 6)] = s * s * s;
                a[(r, 7)] = s * s * t;
                a[(r, 8)] = s * t * t;
                a[(r, 9)] = t * t * t;
            }
            b[r] = row[2];
        }
        let svd = a.svd(true, true);
        let coef = svd
            .solve(&b, 1e-12)
            .map_err(|_| Error::InsufficientStencil {
                node: i,
                rows: rows.len(),
                unknowns: ncoef,
            })?;
        let grad = [coef[1], coef[2]];
        let hess = [[2.0 * coef[3], coef[4]], [coef[4], 2.0 * coef[5]]];
        // Weingarten of the height graph at the origin
        let g2 = 1.0 + grad[0] * grad[0] + grad[1] * grad[1];
        let gmat = [
            [1.0 + grad[0] * grad[0], grad[0] * grad[1]],
            [grad[0] * grad[1], 1.0 + grad[1] * grad[1]],
        ];
        let ginv = mat2::inverse(&gmat).expect("metric of a graph");
        let w = mat2::mul(&ginv, &mat2::scale(&hess, 1.0 / g2.sqrt()));
        let (shape, asym) = mat2::symmetrize(&w);
        out.push((normal, frame, shape, asym));
    }
    Ok(out)
}

fn chart_grid(spec: &ChartSpec, resolution: u32) -> Result<Mesh> {
    if resolution < 8 {
        return Err(Error::ResolutionTooCoarse {
            got: resolution,
            need: 8,
        });
    }
    let cells = |density: f64| ((resolution as f64 * density).round() as usize).max(8);
    let m_u = cells(spec.density.0);
    let m_v = cells(spec.density.1);
    let mut mesh = mesh::grid_chart(
        spec.u_range,
        spec.v_range,
        m_u,
        m_v,
        spec.periodic_u,
        spec.periodic_v,
    );
    let chart = mesh.chart.as_ref().expect("grid meshes carry chart coords");
    mesh.points = chart.iter().map(|&[u, v]| (spec.map)(u, v)).collect();
    // the lift carries unwrapped chart coordinates; map them into ambient
    // positions and drop the lift entirely when the map itself is periodic
    if let Some(lift) = mesh.lift.take() {
        let mapped: Vec<[Point; 3]> = lift
            .iter()
            .map(|t| t.map(|p| (spec.map)(p[0], p[1])))
            .collect();
        let mut redundant = true;
        'outer: for (ti, tri) in mesh.tris.iter().enumerate() {
            for k in 0..3 {
                if (mapped[ti][k] - mesh.points[tri[k]]).norm() > 1e-9 {
                    redundant = false;
                    break 'outer;
                }
            }
        }
        mesh.lift = (!redundant).then_some(mapped);
    }
    Ok(mesh)
}

fn fd_delta(spec: &ChartSpec) -> f64 {
    let span = (spec.u_range.1 - spec.u_range.0).abs() + (spec.v_range.1 - spec.v_range.0).abs();
    1.5e-3 * 0.5 * span
}

pub fn discretize(imm: &Immersion, resolution: u32) -> Result<DiscreteSurface> {
    discretize_with(imm, resolution, GeometrySource::Analytic)
}

pub fn discretize_with(
    imm: &Immersion,
    resolution: u32,
    source: GeometrySource,
) -> Result<DiscreteSurface> {
    let model = imm.ambient.model;
    let mut mesh = match &imm.plan {
        MeshPlan::Icosphere { map } => {
            if resolution < 1 {
                return Err(Error::ResolutionTooCoarse {
                    got: resolution,
                    need: 1,
                });
            }
            let mut m = mesh::icosphere(resolution);
            for p in &mut m.points {
                *p = map(p);
            }
            m
        }
        MeshPlan::Chart(spec) => chart_grid(spec, resolution)?,
        MeshPlan::Disc { map } => {
            if resolution < 4 {
                return Err(Error::ResolutionTooCoarse {
                    got: resolution,
                    need: 4,
                });
            }
            let mut m = mesh::disc(resolution as usize);
            let chart = m.chart.as_ref().expect("disc meshes carry chart coords");
            m.points = chart.iter().map(|&[u, v]| map(u, v)).collect();
            m
        }
    };

    // Align mesh winding with the catalog normal so the estimated path sees
    // the same orientation as the closed forms.
    if let Some(nf) = &imm.normal_field {
        let pts = mesh.tri_points(0);
        let t1 = model.log(&pts[0], &pts[1]);
        let t2 = model.log(&pts[0], &pts[2]);
        if let Ok(face_n) = model.normal_complete(&pts[0], &[t1, t2]) {
            if model.dot(&face_n, &nf(&pts[0])) < 0.0 {
                mesh.flip_orientation();
            }
        }
    }

    let adjacency = mesh::adjacency(&mesh);
    let weights = lumped_weights(model, &mesh);
    for (i, &w) in weights.iter().enumerate() {
        if !(w > 0.0) {
            return Err(Error::DegenerateMetric { node: i });
        }
    }

    let mut geom: Vec<NodeGeometry> = Vec::with_capacity(mesh.n_nodes());
    let mut frame_to_chart: Option<Vec<Mat2>> = None;

    match source {
        GeometrySource::Analytic => match (&imm.shape_form, &imm.plan) {
            (Some(form), _) => {
                for (i, x) in mesh.points.iter().enumerate() {
                    let normal = imm
                        .normal_field
                        .as_ref()
                        .map(|nf| nf(x))
                        .ok_or_else(|| Error::BadParams("closed-form shape without normal".into()))?;
                    let frame = tangent_frame(model, x, &normal);
                    let shape = match form {
                        ShapeForm::Umbilic(kappa) => mat2::scale(&mat2::IDENTITY, kappa(x)),
                        ShapeForm::Principal(dirs) => {
                            let (d, k) = dirs(x);
                            let mut m = [[0.0; 2]; 2];
                            for (dk, kk) in d.iter().zip(k.iter()) {
                                let c = [model.dot(dk, &frame[0]), model.dot(dk, &frame[1])];
                                for a in 0..2 {
                                    for b in 0..2 {
                                        m[a][b] += kk * c[a] * c[b];
                                    }
                                }
                            }
                            m
                        }
                    };
                    geom.push(NodeGeometry {
                        normal,
                        frame,
                        shape,
                        weight: weights[i],
                        asym: 0.0,
                    });
                }
            }
            (None, MeshPlan::Chart(spec)) => {
                // user chart: jets of the map
                let chart = mesh.chart.as_ref().expect("chart mesh");
                let delta = fd_delta(spec);
                let mut b_store = Vec::with_capacity(mesh.n_nodes());
                for (i, &[u, v]) in chart.iter().enumerate() {
                    let jet = fd_jet(&*spec.map, u, v, delta);
                    let jg = node_geometry_from_jet(model, &jet, None, i)?;
                    b_store.push(jg.frame_to_chart);
                    geom.push(NodeGeometry {
                        normal: jg.normal,
                        frame: jg.frame,
                        shape: jg.shape,
                        weight: weights[i],
                        asym: jg.asym,
                    });
                }
                frame_to_chart = Some(b_store);
            }
            (None, _) => {
                return Err(Error::BadParams(
                    "immersion has neither closed-form shape nor a chart".into(),
                ))
            }
        },
        GeometrySource::MeshFit => {
            let est = estimate_geometry(model, &mesh, &adjacency)?;
            for (i, (normal, frame, shape, asym)) in est.into_iter().enumerate() {
                geom.push(NodeGeometry {
                    normal,
                    frame,
                    shape,
                    weight: weights[i],
                    asym,
                });
            }
        }
    }

    // Local smooth-surface parametrizations per node, used by variations.
    let local_charts = build_local_charts(imm, &mesh, &geom, frame_to_chart.as_deref());

    Ok(DiscreteSurface {
        ambient: imm.ambient.clone(),
        mesh,
        geom,
        adjacency,
        geometry_source: source,
        label: imm.label.clone(),
        normal_field: imm.normal_field.clone(),
        local_charts,
        provenance: Some((imm.clone(), resolution)),
    })
}

fn build_local_charts(
    imm: &Immersion,
    mesh: &Mesh,
    geom: &[NodeGeometry],
    frame_to_chart: Option<&[Mat2]>,
) -> Option<LocalCharts> {
    let model = imm.ambient.model;
    match &imm.plan {
        MeshPlan::Icosphere { .. } => {
            let mut maps: Vec<LocalMap> = Vec::with_capacity(mesh.n_nodes());
            match model {
                Model::Euclidean3 => {
                    for (i, p) in mesh.points.iter().enumerate() {
                        let p = *p;
                        let rho = p.norm();
                        let e = geom[i].frame;
                        maps.push(Arc::new(move |s: f64, t: f64| {
                            let w = e[0] * s + e[1] * t;
                            let wl = w.norm();
                            if wl < 1e-300 {
                                return p;
                            }
                            let theta = wl / rho;
                            p * theta.cos() + w * (rho * theta.sin() / wl)
                        }));
                    }
                }
                Model::Hyperbolic3 => {
                    for (i, p) in mesh.points.iter().enumerate() {
                        let p = *p;
                        let cosh_rho = p[0];
                        let sinh_rho = (cosh_rho * cosh_rho - 1.0).sqrt();
                        let u = Point::new(0.0, p[1], p[2], p[3]) / sinh_rho;
                        let e = geom[i].frame;
                        // frame vectors have zero time component on this surface
                        maps.push(Arc::new(move |s: f64, t: f64| {
                            let w = e[0] * s + e[1] * t;
                            let wl = w.norm(); // spatial
                            if wl < 1e-300 {
                                return p;
                            }
                            let alpha = wl / sinh_rho;
                            let dir = w / wl;
                            let unew = u * alpha.cos() + dir * alpha.sin();
                            Point::new(
                                cosh_rho,
                                sinh_rho * unew[1],
                                sinh_rho * unew[2],
                                sinh_rho * unew[3],
                            )
                        }));
                    }
                }
                Model::Sphere3 => return None,
            }
            Some(LocalCharts {
                maps,
                geodesic_at_origin: true,
            })
        }
        MeshPlan::Chart(spec) => {
            let b_default;
            let b_all: &[Mat2] = match frame_to_chart {
                Some(b) => b,
                None => {
                    // closed-form geometry path: recover B from jets
                    let chart = mesh.chart.as_ref()?;
                    let delta = fd_delta(spec);
                    let mut bs = Vec::with_capacity(mesh.n_nodes());
                    for (i, &[u, v]) in chart.iter().enumerate() {
                        let jet = fd_jet(&*spec.map, u, v, delta);
                        let hint = geom[i].normal;
                        match node_geometry_from_jet(model, &jet, Some(&hint), i) {
                            Ok(jg) => bs.push(jg.frame_to_chart),
                            Err(_) => return None,
                        }
                    }
                    b_default = bs;
                    &b_default
                }
            };
            let chart = mesh.chart.as_ref()?;
            let mut maps: Vec<LocalMap> = Vec::with_capacity(mesh.n_nodes());
            for (i, &[u0, v0]) in chart.iter().enumerate() {
                let b = b_all[i];
                let map = spec.map.clone();
                maps.push(Arc::new(move |s: f64, t: f64| {
                    let du = b[0][0] * s + b[0][1] * t;
                    let dv = b[1][0] * s + b[1][1] * t;
                    map(u0 + du, v0 + dv)
                }));
            }
            Some(LocalCharts {
                maps,
                geodesic_at_origin: spec.constant_metric,
            })
        }
        MeshPlan::Disc { map } => {
            let chart = mesh.chart.as_ref()?;
            // jets for the frame change
            let dummy_spec_delta = 1.5e-3;
            let mut maps: Vec<LocalMap> = Vec::with_capacity(mesh.n_nodes());
            for (i, &[u0, v0]) in chart.iter().enumerate() {
                let jet = fd_jet(&**map, u0, v0, dummy_spec_delta);
                let hint = geom[i].normal;
                let jg = match node_geometry_from_jet(model, &jet, Some(&hint), i) {
                    Ok(jg) => jg,
                    Err(_) => return None,
                };
                let b = jg.frame_to_chart;
                let map = map.clone();
                maps.push(Arc::new(move |s: f64, t: f64| {
                    let du = b[0][0] * s + b[0][1] * t;
                    let dv = b[1][0] * s + b[1][1] * t;
                    map(u0 + du, v0 + dv)
                }));
            }
            Some(LocalCharts {
                maps,
                geodesic_at_origin: false,
            })
        }
    }
}
