//! Catalog immersions with closed-form normals and shape operators, plus
//! user-supplied chart immersions.
//!
//! Closed forms (with the inward/"center-facing" orientation fixed once):
//! sphere(rho) and hemisphere(rho) in R^3: A = (1/rho) I; cylinder(rho):
//! k = (1/rho, 0); flat torus chart: A = 0; geodesic sphere(rho) in H^3:
//! A = coth(rho) I; horosphere: A = I; equidistant(d): A = tanh(d) I;
//! Clifford torus(a) in S^3: k = (a/b, -b/a) with b = sqrt(1 - a^2).

use std::sync::Arc;

use super::ambient::{Ambient, Model, Point};
use super::NormalField;
use crate::error::{Error, Result};

/// Map (u, v) -> ambient point.
pub type ChartMap = Arc<dyn Fn(f64, f64) -> Point + Send + Sync>;

#[derive(Clone)]
pub struct ChartSpec {
    pub u_range: (f64, f64),
    pub v_range: (f64, f64),
    pub periodic_u: bool,
    pub periodic_v: bool,
    pub map: ChartMap,
    /// Relative mesh densities along u and v (cells per axis are
    /// resolution * density, at least 8 / at least 1 each).
    pub density: (f64, f64),
    /// True when the chart metric is constant (coordinate lines are geodesics
    /// after an affine change), e.g. flat or product charts.
    pub constant_metric: bool,
}

impl std::fmt::Debug for ChartSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChartSpec")
            .field("u_range", &self.u_range)
            .field("v_range", &self.v_range)
            .field("periodic", &(self.periodic_u, self.periodic_v))
            .finish_non_exhaustive()
    }
}

/// Principal directions and curvatures at a surface point.
pub type PrincipalData = ([Point; 2], [f64; 2]);

/// Closed-form shape operator attached to a catalog surface.
#[derive(Clone)]
pub enum ShapeForm {
    /// A = kappa(point) I.
    Umbilic(Arc<dyn Fn(&Point) -> f64 + Send + Sync>),
    /// Orthonormal principal directions with fixed curvatures.
    Principal(Arc<dyn Fn(&Point) -> PrincipalData + Send + Sync>),
}

/// How to mesh the immersion.
#[derive(Clone)]
pub enum MeshPlan {
    /// Subdivided icosahedron mapped through `map` (level = resolution).
    Icosphere { map: Arc<dyn Fn(&Point) -> Point + Send + Sync> },
    /// Tensor grid on the chart.
    Chart(ChartSpec),
    /// Disc rings in the unit-disc chart mapped through `map`.
    Disc { map: ChartMap },
}

/// An immersion: ambient handle, meshing plan, and whatever closed forms are
/// known for it.
#[derive(Clone)]
pub struct Immersion {
    pub ambient: Ambient,
    pub label: String,
    pub plan: MeshPlan,
    pub normal_field: Option<NormalField>,
    pub shape_form: Option<ShapeForm>,
}

impl std::fmt::Debug for Immersion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Immersion")
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

impl Immersion {
    /// A user-supplied chart immersion in one of the model spaces. The shape
    /// operator will be computed from finite-difference jets of the map.
    pub fn from_chart(ambient: Ambient, label: &str, chart: ChartSpec) -> Self {
        Self {
            ambient,
            label: label.to_string(),
            plan: MeshPlan::Chart(chart),
            normal_field: None,
            shape_form: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CatalogSurface {
    Sphere { radius: f64 },
    Hemisphere { radius: f64 },
    Cylinder { radius: f64, height: f64 },
    FlatTorus { period: f64, periodic: bool },
    GeodesicSphere { radius: f64 },
    Horosphere { extent: f64 },
    Equidistant { distance: f64, extent: f64 },
    CliffordTorus { a: f64 },
}

impl CatalogSurface {
    pub fn name(&self) -> &'static str {
        match self {
            CatalogSurface::Sphere { .. } => "sphere",
            CatalogSurface::Hemisphere { .. } => "hemisphere",
            CatalogSurface::Cylinder { .. } => "cylinder",
            CatalogSurface::FlatTorus { .. } => "flat_torus",
            CatalogSurface::GeodesicSphere { .. } => "geodesic_sphere",
            CatalogSurface::Horosphere { .. } => "horosphere",
            CatalogSurface::Equidistant { .. } => "equidistant",
            CatalogSurface::CliffordTorus { .. } => "clifford_torus",
        }
    }

    pub fn immersion(&self) -> Result<Immersion> {
        match *self {
            CatalogSurface::Sphere { radius } => {
                positive(radius, "radius")?;
                let map = Arc::new(move |u: &Point| u * radius);
                Ok(Immersion {
                    ambient: Ambient::space_form(Model::Euclidean3),
                    label: format!("sphere(radius={radius})"),
                    plan: MeshPlan::Icosphere { map },
                    normal_field: Some(Arc::new(|x: &Point| -x / x.norm())),
                    shape_form: Some(ShapeForm::Umbilic(Arc::new(move |_| 1.0 / radius))),
                })
            }
            CatalogSurface::Hemisphere { radius } => {
                positive(radius, "radius")?;
                // stereographic chart from the south pole: the closed unit
                // disc covers the upper hemisphere, equator on the boundary
                let map = Arc::new(move |u: f64, v: f64| {
                    let s = 1.0 + u * u + v * v;
                    Point::new(
                        radius * 2.0 * u / s,
                        radius * 2.0 * v / s,
                        radius * (2.0 - s) / s,
                        0.0,
                    )
                });
                Ok(Immersion {
                    ambient: Ambient::space_form(Model::Euclidean3),
                    label: format!("hemisphere(radius={radius})"),
                    plan: MeshPlan::Disc { map },
                    normal_field: Some(Arc::new(|x: &Point| -x / x.norm())),
                    shape_form: Some(ShapeForm::Umbilic(Arc::new(move |_| 1.0 / radius))),
                })
            }
            CatalogSurface::Cylinder { radius, height } => {
                positive(radius, "radius")?;
                positive(height, "height")?;
                let chart = ChartSpec {
                    u_range: (0.0, std::f64::consts::TAU),
                    v_range: (-height / 2.0, height / 2.0),
                    periodic_u: true,
                    periodic_v: false,
                    map: Arc::new(move |u: f64, v: f64| {
                        Point::new(radius * u.cos(), radius * u.sin(), v, 0.0)
                    }),
                    density: (1.0, (height / (std::f64::consts::TAU * radius)).max(0.05)),
                    constant_metric: true,
                };
                Ok(Immersion {
                    ambient: Ambient::space_form(Model::Euclidean3),
                    label: format!("cylinder(radius={radius}, height={height})"),
                    plan: MeshPlan::Chart(chart),
                    normal_field: Some(Arc::new(|x: &Point| {
                        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
                        Point::new(-x[0] / r, -x[1] / r, 0.0, 0.0)
                    })),
                    shape_form: Some(ShapeForm::Principal(Arc::new(move |x: &Point| {
                        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
                        let e_theta = Point::new(-x[1] / r, x[0] / r, 0.0, 0.0);
                        let e_z = Point::new(0.0, 0.0, 1.0, 0.0);
                        ([e_theta, e_z], [1.0 / radius, 0.0])
                    }))),
                })
            }
            CatalogSurface::FlatTorus { period, periodic } => {
                positive(period, "period")?;
                let chart = ChartSpec {
                    u_range: (0.0, period),
                    v_range: (0.0, period),
                    periodic_u: periodic,
                    periodic_v: periodic,
                    map: Arc::new(|u: f64, v: f64| Point::new(u, v, 0.0, 0.0)),
                    density: (1.0, 1.0),
                    constant_metric: true,
                };
                let label = if periodic {
                    format!("flat_torus(period={period})")
                } else {
                    format!("flat_square(side={period})")
                };
                Ok(Immersion {
                    ambient: Ambient::space_form(Model::Euclidean3),
                    label,
                    plan: MeshPlan::Chart(chart),
                    normal_field: Some(Arc::new(|_: &Point| Point::new(0.0, 0.0, 1.0, 0.0))),
                    shape_form: Some(ShapeForm::Umbilic(Arc::new(|_| 0.0))),
                })
            }
            CatalogSurface::GeodesicSphere { radius } => {
                positive(radius, "radius")?;
                let (ch, sh) = (radius.cosh(), radius.sinh());
                let map = Arc::new(move |u: &Point| {
                    Point::new(ch, sh * u[0], sh * u[1], sh * u[2])
                });
                Ok(Immersion {
                    ambient: Ambient::space_form(Model::Hyperbolic3),
                    label: format!("geodesic_sphere(radius={radius})"),
                    plan: MeshPlan::Icosphere { map },
                    normal_field: Some(Arc::new(move |x: &Point| {
                        let sp = Point::new(0.0, x[1], x[2], x[3]);
                        let u = sp / sp.norm();
                        -(Point::new(sh, ch * u[1], ch * u[2], ch * u[3]))
                    })),
                    shape_form: Some(ShapeForm::Umbilic(Arc::new(move |_| 1.0 / radius.tanh()))),
                })
            }
            CatalogSurface::Horosphere { extent } => {
                positive(extent, "extent")?;
                let chart = ChartSpec {
                    u_range: (-extent, extent),
                    v_range: (-extent, extent),
                    periodic_u: false,
                    periodic_v: false,
                    map: Arc::new(|u: f64, v: f64| {
                        let q = 0.5 * (u * u + v * v);
                        Point::new(1.0 + q, u, v, q)
                    }),
                    density: (1.0, 1.0),
                    constant_metric: true, // the chart is a global isometry with the flat plane
                };
                Ok(Immersion {
                    ambient: Ambient::space_form(Model::Hyperbolic3),
                    label: format!("horosphere(extent={extent})"),
                    plan: MeshPlan::Chart(chart),
                    normal_field: Some(Arc::new(|x: &Point| {
                        Point::new(1.0 - x[0], -x[1], -x[2], 1.0 - x[3])
                    })),
                    shape_form: Some(ShapeForm::Umbilic(Arc::new(|_| 1.0))),
                })
            }
            CatalogSurface::Equidistant { distance, extent } => {
                if distance < 0.0 {
                    return Err(Error::BadParams("distance must be >= 0".into()));
                }
                positive(extent, "extent")?;
                let (ch, sh) = (distance.cosh(), distance.sinh());
                let chart = ChartSpec {
                    u_range: (-extent, extent),
                    v_range: (-extent, extent),
                    periodic_u: false,
                    periodic_v: false,
                    map: Arc::new(move |u: f64, v: f64| {
                        let q0 = (1.0 + u * u + v * v).sqrt();
                        Point::new(ch * q0, ch * u, ch * v, sh)
                    }),
                    density: (1.0, 1.0),
                    constant_metric: false,
                };
                Ok(Immersion {
                    ambient: Ambient::space_form(Model::Hyperbolic3),
                    label: format!("equidistant(distance={distance}, extent={extent})"),
                    plan: MeshPlan::Chart(chart),
                    normal_field: Some(Arc::new(move |x: &Point| {
                        // q = (x - sinh(d) e3) / cosh(d); N = -(sinh(d) q + cosh(d) e3)
                        let q = Point::new(x[0] / ch, x[1] / ch, x[2] / ch, (x[3] - sh) / ch);
                        -(q * sh + Point::new(0.0, 0.0, 0.0, ch))
                    })),
                    shape_form: Some(ShapeForm::Umbilic(Arc::new(move |_| distance.tanh()))),
                })
            }
            CatalogSurface::CliffordTorus { a } => {
                if !(0.0 < a && a < 1.0) {
                    return Err(Error::BadParams(format!(
                        "clifford torus ratio a = {a} must lie in (0, 1)"
                    )));
                }
                let b = (1.0 - a * a).sqrt();
                let chart = ChartSpec {
                    u_range: (0.0, std::f64::consts::TAU),
                    v_range: (0.0, std::f64::consts::TAU),
                    periodic_u: true,
                    periodic_v: true,
                    map: Arc::new(move |u: f64, v: f64| {
                        Point::new(a * u.cos(), a * u.sin(), b * v.cos(), b * v.sin())
                    }),
                    density: (a / a.max(b), b / a.max(b)),
                    constant_metric: true,
                };
                Ok(Immersion {
                    ambient: Ambient::space_form(Model::Sphere3),
                    label: format!("clifford_torus(a={a})"),
                    plan: MeshPlan::Chart(chart),
                    normal_field: Some(Arc::new(move |x: &Point| {
                        Point::new(b / a * x[0], b / a * x[1], -a / b * x[2], -a / b * x[3])
                    })),
                    shape_form: Some(ShapeForm::Principal(Arc::new(move |x: &Point| {
                        let na = (x[0] * x[0] + x[1] * x[1]).sqrt();
                        let nb = (x[2] * x[2] + x[3] * x[3]).sqrt();
                        let e_beta = Point::new(0.0, 0.0, -x[3] / nb, x[2] / nb);
                        let e_alpha = Point::new(-x[1] / na, x[0] / na, 0.0, 0.0);
                        ([e_beta, e_alpha], [a / b, -b / a])
                    }))),
                })
            }
        }
    }
}

fn positive(v: f64, what: &str) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::BadParams(format!("{what} must be positive, got {v}")))
    }
}
