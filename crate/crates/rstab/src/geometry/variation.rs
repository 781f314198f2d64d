//! Normal variations x_t = exp_x(t f N) of a discrete surface.
//!
//! Two evaluation routes for the varied geometry:
//! - mesh route: move the nodes, re-estimate curvature from the varied mesh
//!   (works for any nodal f);
//! - local-chart route: differentiate the varied local parametrization
//!   psi_t(w) = exp_{psi(w)}(t f(psi(w)) N(psi(w))) by finite differences,
//!   which needs f as a closure and the closed-form normal field, and has no
//!   mesh error (used by the convergence studies).

use std::sync::Arc;

use super::ambient::Point;
use super::discretize::{
    estimate_geometry, fd_jet, node_geometry_from_jet, triangle_area, GeometrySource,
};
use super::mat2;
use super::{DiscreteSurface, NodeGeometry};
use crate::error::{Error, Result};

#[derive(Clone)]
pub enum VariationFunction {
    Nodal(Vec<f64>),
    Closure(Arc<dyn Fn(&Point) -> f64 + Send + Sync>),
}

impl VariationFunction {
    pub fn nodal(values: Vec<f64>) -> Self {
        VariationFunction::Nodal(values)
    }

    pub fn closure(f: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        VariationFunction::Closure(Arc::new(f))
    }

    pub fn values(&self, surface: &DiscreteSurface) -> Result<Vec<f64>> {
        match self {
            VariationFunction::Nodal(v) => {
                if v.len() != surface.n_nodes() {
                    return Err(Error::BadParams(format!(
                        "variation function has {} values for {} nodes",
                        v.len(),
                        surface.n_nodes()
                    )));
                }
                Ok(v.clone())
            }
            VariationFunction::Closure(f) => {
                Ok(surface.mesh.points.iter().map(|p| f(p)).collect())
            }
        }
    }
}

/// A variation path around a base surface: t -> exp_x(t f N).
pub struct VariationPath<'a> {
    pub base: &'a DiscreteSurface,
    f: VariationFunction,
    f_nodal: Vec<f64>,
}

impl<'a> VariationPath<'a> {
    pub fn new(base: &'a DiscreteSurface, f: VariationFunction) -> Result<Self> {
        let f_nodal = f.values(base)?;
        Ok(Self { base, f, f_nodal })
    }

    pub fn f_values(&self) -> &[f64] {
        &self.f_nodal
    }

    /// Varied node positions at parameter t.
    pub fn varied_points(&self, t: f64) -> Vec<Point> {
        let model = self.base.model();
        self.base
            .mesh
            .points
            .iter()
            .zip(&self.base.geom)
            .zip(&self.f_nodal)
            .map(|((p, g), &fv)| model.exp(p, &(g.normal * (t * fv))))
            .collect()
    }

    /// Varied per-triangle corner positions honoring the geometric lift.
    fn varied_lift(&self, t: f64) -> Option<Vec<[Point; 3]>> {
        let lift = self.base.mesh.lift.as_ref()?;
        let model = self.base.model();
        Some(
            lift.iter()
                .zip(&self.base.mesh.tris)
                .map(|(corners, tri)| {
                    let mut out = *corners;
                    for k in 0..3 {
                        let node = tri[k];
                        let g = &self.base.geom[node];
                        out[k] = model.exp(&corners[k], &(g.normal * (t * self.f_nodal[node])));
                    }
                    out
                })
                .collect(),
        )
    }

    /// Rebuild a full surface at parameter t; geometry is re-estimated from
    /// the varied mesh. x_0 equals the base surface exactly (same nodes).
    pub fn surface_at(&self, t: f64) -> Result<DiscreteSurface> {
        let model = self.base.model();
        let mut mesh = self.base.mesh.clone();
        mesh.points = self.varied_points(t);
        mesh.lift = self.varied_lift(t);
        // immersion check: every triangle keeps positive area
        for ti in 0..mesh.tris.len() {
            let p = mesh.tri_points(ti);
            let area = triangle_area(model, &p[0], &p[1], &p[2]);
            if !(area > 0.0) {
                return Err(Error::ImmersionLost { node: mesh.tris[ti][0], t });
            }
        }
        let adjacency = self.base.adjacency.clone();
        let est = estimate_geometry(model, &mesh, &adjacency)?;
        let mut weights = vec![0.0; mesh.n_nodes()];
        for ti in 0..mesh.tris.len() {
            let p = mesh.tri_points(ti);
            let area = triangle_area(model, &p[0], &p[1], &p[2]);
            for &i in &mesh.tris[ti] {
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
            ambient: self.base.ambient.clone(),
            mesh,
            geom,
            adjacency,
            geometry_source: GeometrySource::MeshFit,
            label: format!("{} (varied t={t})", self.base.label),
            normal_field: None,
            local_charts: None,
            provenance: None,
        })
    }

    /// True when the high-accuracy local-chart route is available.
    pub fn has_local_route(&self) -> bool {
        matches!(self.f, VariationFunction::Closure(_))
            && self.base.local_charts.is_some()
            && self.base.normal_field.is_some()
    }

    /// S_r per node of the varied surface via the local-chart route.
    pub fn s_r_local(&self, t: f64, r: usize) -> Result<Vec<f64>> {
        let f = match &self.f {
            VariationFunction::Closure(f) => f.clone(),
            VariationFunction::Nodal(_) => {
                return Err(Error::BadParams(
                    "local-chart variation route needs f as a closure".into(),
                ))
            }
        };
        let charts = self
            .base
            .local_charts
            .as_ref()
            .ok_or_else(|| Error::BadParams("surface has no local charts".into()))?;
        let nf = self
            .base
            .normal_field
            .as_ref()
            .ok_or_else(|| Error::BadParams("surface has no closed-form normal field".into()))?
            .clone();
        let model = self.base.model();
        let mut out = Vec::with_capacity(self.base.n_nodes());
        let delta = 1e-3;
        for i in 0..self.base.n_nodes() {
            let psi = charts.maps[i].clone();
            let f = f.clone();
            let nf = nf.clone();
            let varied = move |s: f64, u: f64| -> Point {
                let p = psi(s, u);
                let n = nf(&p);
                model.exp(&p, &(n * (t * f(&p))))
            };
            let jet = fd_jet(&varied, 0.0, 0.0, delta);
            let hint = self.base.geom[i].normal;
            let jg = node_geometry_from_jet(model, &jet, Some(&hint), i)?;
            let s_r = match r {
                0 => 1.0,
                1 => mat2::trace(&jg.shape),
                2 => mat2::det(&jg.shape),
                _ => 0.0,
            };
            out.push(s_r);
        }
        Ok(out)
    }

    /// Area weights of the varied mesh (no re-estimation).
    pub fn varied_weights(&self, t: f64) -> Result<Vec<f64>> {
        let model = self.base.model();
        let points = self.varied_points(t);
        let lift = self.varied_lift(t);
        let mut weights = vec![0.0; points.len()];
        for (ti, tri) in self.base.mesh.tris.iter().enumerate() {
            let p = match &lift {
                Some(l) => l[ti],
                None => [points[tri[0]], points[tri[1]], points[tri[2]]],
            };
            let area = triangle_area(model, &p[0], &p[1], &p[2]);
            if !(area > 0.0) {
                return Err(Error::ImmersionLost { node: tri[0], t });
            }
            for &i in tri {
                weights[i] += area / 3.0;
            }
        }
        Ok(weights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::catalog::CatalogSurface;
    use crate::geometry::discretize::discretize;

    #[test]
    fn zero_variation_is_identity() {
        let imm = CatalogSurface::Sphere { radius: 1.0 }.immersion().unwrap();
        let s = discretize(&imm, 2).unwrap();
        let path = VariationPath::new(&s, VariationFunction::closure(|_| 1.0)).unwrap();
        let p0 = path.varied_points(0.0);
        for (a, b) in p0.iter().zip(&s.mesh.points) {
            assert!((a - b).norm() == 0.0);
        }
    }

    #[test]
    fn constant_variation_shrinks_sphere() {
        // inward normal: f = 1 moves toward the center, radius rho - t
        let imm = CatalogSurface::Sphere { radius: 1.0 }.immersion().unwrap();
        let s = discretize(&imm, 3).unwrap();
        let path = VariationPath::new(&s, VariationFunction::closure(|_| 1.0)).unwrap();
        let t = 0.25;
        for p in path.varied_points(t) {
            assert!((p.norm() - 0.75).abs() < 1e-12);
        }
        // local route: S_1 of the varied sphere = 2 / (1 - t)
        let s1 = path.s_r_local(t, 1).unwrap();
        for v in s1 {
            assert!((v - 2.0 / 0.75).abs() < 1e-7, "{v}");
        }
        // mesh route agrees to estimation error (order-2 in h; ~3% at this level)
        let varied = path.surface_at(t).unwrap();
        for i in 0..varied.n_nodes() {
            assert!((varied.s_r(i, 1) - 2.0 / 0.75).abs() < 0.1);
        }
    }

    #[test]
    fn geodesic_sphere_variation_stays_on_model() {
        let imm = CatalogSurface::GeodesicSphere { radius: 1.0 }.immersion().unwrap();
        let s = discretize(&imm, 2).unwrap();
        let path = VariationPath::new(&s, VariationFunction::closure(|p: &Point| p[1])).unwrap();
        let pts = path.varied_points(0.1);
        for p in pts {
            assert!(s.model().on_model(&p, 1e-10));
        }
        // inward normal: f = 1 shrinks the geodesic radius by t
        let path = VariationPath::new(&s, VariationFunction::closure(|_| 1.0)).unwrap();
        let t = 0.2;
        for p in path.varied_points(t) {
            let rho = p[0].acosh();
            assert!((rho - 0.8).abs() < 1e-10, "rho {rho}");
        }
        // S_1 of a geodesic sphere of radius 0.8: 2 coth(0.8)
        let s1 = path.s_r_local(t, 1).unwrap();
        let expect = 2.0 / 0.8f64.tanh();
        for v in s1 {
            assert!((v - expect).abs() < 1e-6, "{v} vs {expect}");
        }
    }

    #[test]
    fn immersion_lost_detected() {
        let imm = CatalogSurface::Sphere { radius: 1.0 }.immersion().unwrap();
        let s = discretize(&imm, 1).unwrap();
        let path = VariationPath::new(&s, VariationFunction::closure(|_| 1.0)).unwrap();
        // t = 1 collapses the sphere to the origin
        assert!(matches!(
            path.surface_at(1.0),
            Err(Error::ImmersionLost { .. }) | Err(Error::DegenerateMetric { .. })
        ));
    }
}
