//! Ambient model spaces, immersions, and discrete hypersurfaces.
//!
//! The discrete pipeline produces, per node: an orthonormal tangent frame, a
//! unit normal, the shape operator in that frame (convention A = -dN, with
//! catalog spheres using the inward normal so that k_i = 1/rho > 0), and a
//! lumped area weight.

pub mod ambient;
pub mod catalog;
pub mod discretize;
pub mod mat2;
pub mod mesh;
pub mod variation;

use std::sync::Arc;

pub use ambient::{Ambient, AmbientKind, CurvatureOracle, Model, Point};
pub use catalog::{CatalogSurface, ChartSpec, Immersion};
pub use discretize::{discretize, discretize_with, GeometrySource};
pub use mesh::{Adjacency, Mesh};

use crate::error::{Error, Result};
use crate::newton::elementary_symmetric;
use mat2::Mat2;

/// Per-node first- and second-order data in an orthonormal tangent frame.
#[derive(Debug, Clone)]
pub struct NodeGeometry {
    pub normal: Point,
    pub frame: [Point; 2],
    /// Shape operator in the frame, symmetric.
    pub shape: Mat2,
    /// Lumped area weight.
    pub weight: f64,
    /// Symmetrization defect recorded when the shape operator was built.
    pub asym: f64,
}

/// A local parametrization w -> point of the smooth surface with w = (0,0) at
/// the node and orthonormal coordinate basis there.
pub type LocalMap = Arc<dyn Fn(f64, f64) -> Point + Send + Sync>;

#[derive(Clone)]
pub struct LocalCharts {
    pub maps: Vec<LocalMap>,
    /// True when the coordinates are geodesic at the origin (vanishing
    /// Christoffel symbols), so surface Hessians are plain second derivatives.
    pub geodesic_at_origin: bool,
}

/// Closed-form unit normal field of a catalog surface, usable at (and near)
/// surface points.
pub type NormalField = Arc<dyn Fn(&Point) -> Point + Send + Sync>;

/// Sampled immersion: mesh, per-node geometry, boundary, ambient handle.
#[derive(Clone)]
pub struct DiscreteSurface {
    pub ambient: Ambient,
    pub mesh: Mesh,
    pub geom: Vec<NodeGeometry>,
    pub adjacency: Adjacency,
    pub geometry_source: GeometrySource,
    pub label: String,
    pub normal_field: Option<NormalField>,
    pub local_charts: Option<LocalCharts>,
    /// The immersion and resolution this surface came from, when known;
    /// enables refinement for two-level error estimates.
    pub provenance: Option<(Immersion, u32)>,
}

impl std::fmt::Debug for DiscreteSurface {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiscreteSurface")
            .field("label", &self.label)
            .field("nodes", &self.mesh.n_nodes())
            .field("tris", &self.mesh.n_tris())
            .field("geometry_source", &self.geometry_source)
            .finish_non_exhaustive()
    }
}

impl DiscreteSurface {
    pub fn n_nodes(&self) -> usize {
        self.mesh.n_nodes()
    }

    pub fn model(&self) -> Model {
        self.ambient.model
    }

    /// Principal curvatures at a node, ascending.
    pub fn principal_curvatures(&self, i: usize) -> [f64; 2] {
        mat2::sym_eigenvalues(&self.geom[i].shape)
    }

    /// S_r at a node (n = 2): S_0 = 1, S_1 = trace A, S_2 = det A, else 0.
    pub fn s_r(&self, i: usize, r: usize) -> f64 {
        match r {
            0 => 1.0,
            1 => mat2::trace(&self.geom[i].shape),
            2 => mat2::det(&self.geom[i].shape),
            _ => 0.0,
        }
    }

    /// Newton tensor P_r at a node in the node frame (n = 2).
    pub fn p_r(&self, i: usize, r: usize) -> Mat2 {
        match r {
            0 => mat2::IDENTITY,
            1 => mat2::adjugate(&self.geom[i].shape),
            _ => {
                // P_n = adj(A) A ... = S_n I - A P_{n-1}; for n = 2 and r = 2
                // this is S_2 I - A P_1 = 0 by Cayley-Hamilton.
                let a = &self.geom[i].shape;
                let s2 = mat2::det(a);
                mat2::add(
                    &mat2::scale(&mat2::IDENTITY, s2),
                    &mat2::scale(&mat2::mul(a, &self.p_r(i, r - 1)), -1.0),
                )
            }
        }
    }

    /// The shape-operator field as dense matrices (for the newton module).
    pub fn shape_field(&self) -> Vec<nalgebra::DMatrix<f64>> {
        self.geom
            .iter()
            .map(|g| {
                nalgebra::DMatrix::from_row_slice(
                    2,
                    2,
                    &[g.shape[0][0], g.shape[0][1], g.shape[1][0], g.shape[1][1]],
                )
            })
            .collect()
    }

    /// trace(A^2 P_r) at a node, evaluated directly.
    pub fn trace_a2_pr(&self, i: usize, r: usize) -> f64 {
        let a = &self.geom[i].shape;
        let a2 = mat2::mul(a, a);
        mat2::trace(&mat2::mul(&a2, &self.p_r(i, r)))
    }

    /// trace(A^2 P_r) via the identity S_1 S_{r+1} - (r+2) S_{r+2}.
    pub fn trace_a2_pr_identity(&self, i: usize, r: usize) -> f64 {
        self.s_r(i, 1) * self.s_r(i, r + 1) - (r + 2) as f64 * self.s_r(i, r + 2)
    }

    pub fn total_area(&self) -> f64 {
        self.geom.iter().map(|g| g.weight).sum()
    }

    pub fn max_edge(&self) -> f64 {
        self.mesh.max_edge()
    }

    pub fn n_boundary(&self) -> usize {
        self.mesh.boundary.iter().filter(|&&b| b).count()
    }

    pub fn is_closed(&self) -> bool {
        self.n_boundary() == 0
    }

    /// Flip the orientation: N -> -N node-wise, A -> -A; mesh windings follow.
    /// The tangent frame is kept, so the shape matrix simply negates.
    pub fn orientation_flipped(&self) -> DiscreteSurface {
        let mut out = self.clone();
        for g in &mut out.geom {
            g.normal = -g.normal;
            g.shape = mat2::scale(&g.shape, -1.0);
        }
        out.mesh.flip_orientation();
        // closed-form fields and provenance describe the original orientation
        out.normal_field = None;
        out.provenance = None;
        out.label = format!("{} (orientation flipped)", self.label);
        out
    }

    /// Per-node trace(P_r R_N): space forms use c (n - r) S_r without any
    /// oracle; general ambients query the curvature oracle over the frame.
    pub fn ambient_curvature_term(&self, r: usize) -> Result<Vec<f64>> {
        let n = 2usize;
        match &self.ambient.kind {
            AmbientKind::SpaceForm => {
                let c = self.ambient.model.curvature();
                Ok((0..self.n_nodes())
                    .map(|i| c * (n - r) as f64 * self.s_r(i, r))
                    .collect())
            }
            AmbientKind::General { oracle, .. } => {
                let model = self.ambient.model;
                let mut out = Vec::with_capacity(self.n_nodes());
                for i in 0..self.n_nodes() {
                    let g = &self.geom[i];
                    let p = self.p_r(i, r);
                    let x = &self.mesh.points[i];
                    let mut term = 0.0;
                    for (a, ea) in g.frame.iter().enumerate() {
                        let w = oracle(x, ea, &g.normal).map_err(|e| Error::OracleFailure {
                            node: i,
                            reason: e.to_string(),
                        })?;
                        if !w.iter().all(|v| v.is_finite()) {
                            return Err(Error::OracleFailure {
                                node: i,
                                reason: "non-finite oracle output".into(),
                            });
                        }
                        // trace(P R_N) = sum_{a,b} P_{b a} <R(e_a,N)N, e_b>
                        for (b, eb) in g.frame.iter().enumerate() {
                            term += p[b][a] * model.dot(&w, eb);
                        }
                    }
                    out.push(term);
                }
                Ok(out)
            }
        }
    }

    /// The r-area integrand F_r and its integral over the surface.
    /// Requires a declared space form.
    pub fn r_area(&self, r: usize) -> Result<f64> {
        let c = self.ambient.space_form_curvature().ok_or(Error::NotSpaceForm)?;
        if r > 1 {
            return Err(Error::BadParams(format!("r = {r} exceeds n - 1 = 1")));
        }
        let mut total = 0.0;
        for i in 0..self.n_nodes() {
            let s: Vec<f64> = (0..=2).map(|j| self.s_r(i, j)).collect();
            let f = f_r_integrand(&s, r, c, 2);
            total += self.geom[i].weight * f;
        }
        Ok(total)
    }

    /// Nodal values of a function of position.
    pub fn sample(&self, f: &dyn Fn(&Point) -> f64) -> Vec<f64> {
        self.mesh.points.iter().map(f).collect()
    }

    /// Weighted L2 inner product of nodal functions.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter()
            .zip(&self.geom)
            .map(|(v, g)| v * g.weight)
            .sum()
    }
}

/// F_r by the recursion F_0 = 1, F_1 = S_1, F_r = S_r + c (n-r+1)/(r-1) F_{r-2},
/// from the list s = [S_0, S_1, ...].
pub fn f_r_integrand(s: &[f64], r: usize, c: f64, n: usize) -> f64 {
    match r {
        0 => 1.0,
        1 => s.get(1).copied().unwrap_or(0.0),
        _ => {
            let sr = s
                .get(r)
                .copied()
                .unwrap_or_else(|| elementary_symmetric(&[], r));
            sr + c * (n - r + 1) as f64 / (r - 1) as f64 * f_r_integrand(s, r - 2, c, n)
        }
    }
}

/// Deterministic orthonormal tangent frame at a model point with unit normal n.
pub fn tangent_frame(model: Model, x: &Point, n: &Point) -> [Point; 2] {
    // pick the coordinate axis least aligned with n (and with x for curved models)
    let mut best_axis = 0;
    let mut best_score = f64::INFINITY;
    let axis_range = match model {
        Model::Euclidean3 => 0..3,
        _ => 0..4,
    };
    for a in axis_range {
        let mut e = Point::zeros();
        e[a] = 1.0;
        let mut score = model.dot(&e, n).abs();
        if model != Model::Euclidean3 {
            score += model.dot(&e, x).abs();
        }
        if model == Model::Hyperbolic3 && a == 0 {
            score += 10.0; // avoid the timelike axis
        }
        if score < best_score {
            best_score = score;
            best_axis = a;
        }
    }
    let mut e1 = Point::zeros();
    e1[best_axis] = 1.0;
    // project out the normal (and the position for curved models)
    e1 -= n * model.dot(&e1, n);
    if model != Model::Euclidean3 {
        let sx = model.dot(x, x); // +1 on the sphere, -1 on the hyperboloid
        e1 -= x * (model.dot(&e1, x) / sx);
    }
    let e1 = e1 / model.norm(&e1);
    let e2 = match model {
        Model::Euclidean3 => {
            let v = Point::new(
                n[1] * e1[2] - n[2] * e1[1],
                n[2] * e1[0] - n[0] * e1[2],
                n[0] * e1[1] - n[1] * e1[0],
                0.0,
            );
            v / v.norm()
        }
        _ => model
            .normal_complete(x, &[*n, e1])
            .expect("frame completion"),
    };
    [e1, e2]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_r_recursion_values() {
        // n = 4, c = -1: F_2 = S_2 + c*(4-2+1)/(1) * F_0 = S_2 - 3
        let s = [1.0, 2.0, 5.0, 1.5, 0.25];
        assert_eq!(f_r_integrand(&s, 0, -1.0, 4), 1.0);
        assert_eq!(f_r_integrand(&s, 1, -1.0, 4), 2.0);
        assert_eq!(f_r_integrand(&s, 2, -1.0, 4), 5.0 - 3.0);
        // F_3 = S_3 + c*(4-3+1)/2 * F_1 = 1.5 - 1.0*2.0 = -0.5
        assert_eq!(f_r_integrand(&s, 3, -1.0, 4), 1.5 - 2.0);
    }

    #[test]
    fn tangent_frames_are_orthonormal() {
        for model in [Model::Euclidean3, Model::Sphere3, Model::Hyperbolic3] {
            let (x, n) = match model {
                Model::Euclidean3 => (
                    Point::new(1.0, 2.0, 3.0, 0.0),
                    Point::new(0.6, 0.8, 0.0, 0.0),
                ),
                Model::Sphere3 => {
                    let x = Model::Sphere3.project_point(&Point::new(0.2, -0.5, 0.7, 0.4));
                    let n_raw = Point::new(0.5, 0.5, 0.1, -0.3);
                    let n = n_raw - x * x.dot(&n_raw);
                    (x, n / n.norm())
                }
                Model::Hyperbolic3 => {
                    let x = Model::Hyperbolic3.project_point(&Point::new(0.0, 0.3, -0.2, 0.5));
                    let n_raw = Point::new(0.0, 0.2, 0.9, 0.1);
                    let n = n_raw + x * Model::Hyperbolic3.dot(&x, &n_raw);
                    let n = n / Model::Hyperbolic3.norm(&n);
                    (x, n)
                }
            };
            let [e1, e2] = tangent_frame(model, &x, &n);
            assert!((model.dot(&e1, &e1) - 1.0).abs() < 1e-12, "{model:?}");
            assert!((model.dot(&e2, &e2) - 1.0).abs() < 1e-12);
            assert!(model.dot(&e1, &e2).abs() < 1e-12);
            assert!(model.dot(&e1, &n).abs() < 1e-12);
            assert!(model.dot(&e2, &n).abs() < 1e-12);
            if model != Model::Euclidean3 {
                assert!(model.dot(&e1, &x).abs() < 1e-12);
                assert!(model.dot(&e2, &x).abs() < 1e-12);
            }
        }
    }
}
