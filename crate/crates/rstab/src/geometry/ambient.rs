//! The three model ambient spaces and general (oracle-backed) ambients.
//!
//! Points and tangent vectors live in a fixed 4-component coordinate vector:
//! Euclidean 3-space uses the first three components (fourth is zero), the
//! round 3-sphere is the unit sphere of R^4, and hyperbolic 3-space is the
//! upper hyperboloid <<x,x>> = -1 in Minkowski coordinates (t, x, y, z) with
//! <<a,b>> = -a_t b_t + a.b. All Minkowski bookkeeping is confined to this
//! module.

use std::sync::Arc;

use nalgebra::Vector4;

use crate::error::{Error, Result};

pub type Point = Vector4<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Euclidean3,
    Sphere3,
    Hyperbolic3,
}

impl Model {
    /// Sectional curvature of the model.
    pub fn curvature(self) -> f64 {
        match self {
            Model::Euclidean3 => 0.0,
            Model::Sphere3 => 1.0,
            Model::Hyperbolic3 => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Model::Euclidean3 => "euclidean",
            Model::Sphere3 => "sphere",
            Model::Hyperbolic3 => "hyperbolic",
        }
    }

    /// Signature-aware inner product.
    pub fn dot(self, a: &Point, b: &Point) -> f64 {
        match self {
            Model::Euclidean3 | Model::Sphere3 => a.dot(b),
            Model::Hyperbolic3 => -a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3],
        }
    }

    /// Norm of a spacelike vector.
    pub fn norm(self, a: &Point) -> f64 {
        self.dot(a, a).max(0.0).sqrt()
    }

    /// Geodesic distance between model points.
    pub fn distance(self, p: &Point, q: &Point) -> f64 {
        match self {
            Model::Euclidean3 => (q - p).norm(),
            Model::Sphere3 => p.dot(q).clamp(-1.0, 1.0).acos(),
            Model::Hyperbolic3 => {
                let c = (-self.dot(p, q)).max(1.0);
                c.acosh()
            }
        }
    }

    /// Geodesic exponential map; v must be tangent at p.
    pub fn exp(self, p: &Point, v: &Point) -> Point {
        match self {
            Model::Euclidean3 => p + v,
            Model::Sphere3 => {
                let t = v.norm();
                if t < 1e-300 {
                    return *p;
                }
                p * t.cos() + v * (t.sin() / t)
            }
            Model::Hyperbolic3 => {
                let t = self.norm(v);
                if t < 1e-300 {
                    return *p;
                }
                p * t.cosh() + v * (t.sinh() / t)
            }
        }
    }

    /// Inverse of `exp`: the tangent vector at p pointing to q with length
    /// `distance(p, q)`.
    pub fn log(self, p: &Point, q: &Point) -> Point {
        match self {
            Model::Euclidean3 => q - p,
            Model::Sphere3 => {
                let c = p.dot(q).clamp(-1.0, 1.0);
                let theta = c.acos();
                let w = q - p * c;
                let n = w.norm();
                if n < 1e-300 {
                    return Point::zeros();
                }
                w * (theta / n)
            }
            Model::Hyperbolic3 => {
                let c = (-self.dot(p, q)).max(1.0);
                let theta = c.acosh();
                let w = q - p * c;
                let n = self.norm(&w);
                if n < 1e-300 {
                    return Point::zeros();
                }
                w * (theta / n)
            }
        }
    }

    /// Parallel transport of a tangent vector v from p to q along the
    /// connecting geodesic.
    pub fn transport(self, p: &Point, q: &Point, v: &Point) -> Point {
        match self {
            Model::Euclidean3 => *v,
            Model::Sphere3 => {
                let c = p.dot(q);
                if (1.0 + c).abs() < 1e-14 {
                    return *v; // antipodal: transport undefined, keep v
                }
                v - (p + q) * (q.dot(v) / (1.0 + c))
            }
            Model::Hyperbolic3 => {
                let c = self.dot(p, q); // = -cosh d
                v + (p + q) * (self.dot(q, v) / (1.0 - c))
            }
        }
    }

    /// Re-project a drifting point back onto the model (no-op for Euclidean).
    pub fn project_point(self, p: &Point) -> Point {
        match self {
            Model::Euclidean3 => {
                let mut q = *p;
                q[3] = 0.0;
                q
            }
            Model::Sphere3 => p / p.norm(),
            Model::Hyperbolic3 => {
                let s = p[1] * p[1] + p[2] * p[2] + p[3] * p[3];
                let mut q = *p;
                q[0] = (1.0 + s).sqrt();
                q
            }
        }
    }

    /// Check that p sits on the model within tol.
    pub fn on_model(self, p: &Point, tol: f64) -> bool {
        match self {
            Model::Euclidean3 => p[3].abs() <= tol,
            Model::Sphere3 => (p.norm() - 1.0).abs() <= tol,
            Model::Hyperbolic3 => (self.dot(p, p) + 1.0).abs() <= tol && p[0] > 0.0,
        }
    }

    /// Unit vector orthogonal (in the model tangent space at p) to the given
    /// tangent vectors: the generalized cross product. `sign` follows the
    /// orientation of the pair `(ts[0], ts[1])`.
    pub fn normal_complete(self, p: &Point, ts: &[Point; 2]) -> Result<Point> {
        let w = match self {
            Model::Euclidean3 => {
                let a = &ts[0];
                let b = &ts[1];
                Point::new(
                    a[1] * b[2] - a[2] * b[1],
                    a[2] * b[0] - a[0] * b[2],
                    a[0] * b[1] - a[1] * b[0],
                    0.0,
                )
            }
            Model::Sphere3 => cross4(p, &ts[0], &ts[1]),
            Model::Hyperbolic3 => {
                let c = cross4(p, &ts[0], &ts[1]);
                Point::new(-c[0], c[1], c[2], c[3])
            }
        };
        let n = self.dot(&w, &w);
        if n <= 1e-28 {
            return Err(Error::DegenerateMetric { node: usize::MAX });
        }
        Ok(w / n.sqrt())
    }
}

/// Euclidean generalized cross product in R^4: <cross4(a,b,c), y> = det[y a b c].
pub fn cross4(a: &Point, b: &Point, c: &Point) -> Point {
    let det3 = |m: [[f64; 3]; 3]| -> f64 {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let minor = |skip: usize| -> f64 {
        let cols: Vec<usize> = (0..4).filter(|&j| j != skip).collect();
        det3([
            [a[cols[0]], a[cols[1]], a[cols[2]]],
            [b[cols[0]], b[cols[1]], b[cols[2]]],
            [c[cols[0]], c[cols[1]], c[cols[2]]],
        ])
    };
    Point::new(minor(0), -minor(1), minor(2), -minor(3))
}

/// Callback returning the tangential vector R(Y, N)N of the ambient curvature
/// tensor, given (point, tangent Y, unit normal N), in ambient coordinates.
pub type CurvatureOracle = dyn Fn(&Point, &Point, &Point) -> Result<Point> + Send + Sync;

#[derive(Clone)]
pub enum AmbientKind {
    /// A declared space form: curvature terms use c(n-r)S_r and the drift
    /// vanishes identically.
    SpaceForm,
    /// General ambient: curvature terms go through the oracle and the drift
    /// term is kept.
    General {
        oracle: Arc<CurvatureOracle>,
        sec_infimum: Option<f64>,
    },
}

impl std::fmt::Debug for AmbientKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AmbientKind::SpaceForm => f.write_str("SpaceForm"),
            AmbientKind::General { sec_infimum, .. } => f
                .debug_struct("General")
                .field("sec_infimum", sec_infimum)
                .finish_non_exhaustive(),
        }
    }
}

/// The ambient space a surface is immersed in: one of the three models,
/// declared either as a space form or as a general ambient with a curvature
/// oracle.
#[derive(Debug, Clone)]
pub struct Ambient {
    pub model: Model,
    pub kind: AmbientKind,
}

impl Ambient {
    pub fn space_form(model: Model) -> Self {
        Self {
            model,
            kind: AmbientKind::SpaceForm,
        }
    }

    /// A space form wrapped as a general ambient: the oracle returns c.Y, the
    /// sectional-curvature infimum is c. Used for consistency checks of the
    /// oracle-backed assembly path.
    pub fn wrapped_space_form(model: Model) -> Self {
        let c = model.curvature();
        Self {
            model,
            kind: AmbientKind::General {
                oracle: Arc::new(move |_p, y, _n| Ok(y * c)),
                sec_infimum: Some(c),
            },
        }
    }

    pub fn general(model: Model, oracle: Arc<CurvatureOracle>, sec_infimum: Option<f64>) -> Self {
        Self {
            model,
            kind: AmbientKind::General {
                oracle,
                sec_infimum,
            },
        }
    }

    pub fn is_space_form(&self) -> bool {
        matches!(self.kind, AmbientKind::SpaceForm)
    }

    /// Space-form curvature, if declared as one.
    pub fn space_form_curvature(&self) -> Option<f64> {
        self.is_space_form().then(|| self.model.curvature())
    }

    pub fn sec_infimum(&self) -> Option<f64> {
        match &self.kind {
            AmbientKind::SpaceForm => Some(self.model.curvature()),
            AmbientKind::General { sec_infimum, .. } => *sec_infimum,
        }
    }
}
