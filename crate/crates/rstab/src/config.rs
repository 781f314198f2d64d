//! Run configuration: a flat `key = value` text format with dotted keys,
//! `#` comments, and a canonical (sorted) emitter so that parse -> emit is
//! idempotent. The full key list is documented in the repository README.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geometry::{
    discretize_with, Ambient, CatalogSurface, DiscreteSurface, GeometrySource, Model,
    Point,
};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub surface: SurfaceSpec,
    pub wrapped_oracle: bool,
    pub sec_infimum: Option<f64>,
    pub r: usize,
    pub domain: DomainSpec,
    pub solver: SolverSpec,
    pub output: OutputSpec,
    pub sweep: SweepSpec,
    pub verify_suites: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SurfaceSpec {
    Catalog {
        surface: CatalogSurface,
        resolution: u32,
        estimated: bool,
    },
    OffMesh {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomainSpec {
    Whole,
    Ball { center: Point, radius: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSpec {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Estimate the stability margin from a two-level refinement.
    pub margin_refine: bool,
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 40_000,
            seed: 0x5eed,
            margin_refine: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputSpec {
    pub report: Option<PathBuf>,
    pub eigenfunction_csv: Option<PathBuf>,
    pub operator_mtx: Option<PathBuf>,
    pub sweep_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: Option<String>,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    pub bisect_tol: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            param: None,
            from: 0.0,
            to: 1.0,
            steps: 0,
            bisect_tol: 1e-3,
        }
    }
}

const KNOWN_KEYS: &[&str] = &[
    "ambient.kind",
    "ambient.wrapped_oracle",
    "ambient.sec_infimum",
    "surface.kind",
    "surface.radius",
    "surface.distance",
    "surface.ratio",
    "surface.extent",
    "surface.height",
    "surface.period",
    "surface.path",
    "surface.resolution",
    "surface.geometry",
    "run.r",
    "domain.kind",
    "domain.center",
    "domain.radius",
    "solver.tol",
    "solver.max_iter",
    "solver.seed",
    "solver.margin_refine",
    "output.report",
    "output.eigenfunction_csv",
    "output.operator_mtx",
    "output.sweep_csv",
    "sweep.param",
    "sweep.from",
    "sweep.to",
    "sweep.steps",
    "sweep.bisect_tol",
    "verify.suites",
];

struct RawConfig {
    pairs: BTreeMap<String, (usize, String)>,
}

impl RawConfig {
    fn parse(text: &str) -> Result<Self> {
        let mut pairs = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(Error::Config {
                line: lineno + 1,
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::Config {
                    line: lineno + 1,
                    msg: format!("unknown key `{key}`"),
                });
            }
            if pairs.insert(key.clone(), (lineno + 1, value)).is_some() {
                return Err(Error::Config {
                    line: lineno + 1,
                    msg: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(Self { pairs })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.pairs.get(key).map(|(_, v)| v.as_str())
    }

    fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.typed(key, "number", str::parse::<f64>)
    }

    fn usize(&self, key: &str) -> Result<Option<usize>> {
        self.typed(key, "integer", str::parse::<usize>)
    }

    fn bool(&self, key: &str) -> Result<Option<bool>> {
        self.typed(key, "boolean", str::parse::<bool>)
    }

    fn typed<T, E>(&self, key: &str, what: &str, parse: impl Fn(&str) -> std::result::Result<T, E>) -> Result<Option<T>> {
        match self.pairs.get(key) {
            None => Ok(None),
            Some((line, v)) => parse(v).map(Some).map_err(|_| Error::Config {
                line: *line,
                msg: format!("`{key}` must be a {what}, got `{v}`"),
            }),
        }
    }

    fn line_of(&self, key: &str) -> usize {
        self.pairs.get(key).map_or(0, |(l, _)| *l)
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::ConfigField(format!(
            "cannot read config {}: {e}",
            path.display()
        )))?;
        Self::parse_str(&text)
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        let raw = RawConfig::parse(text)?;
        let surface = Self::parse_surface(&raw)?;
        let wrapped_oracle = raw.bool("ambient.wrapped_oracle")?.unwrap_or(false);
        let sec_infimum = raw.f64("ambient.sec_infimum")?;

        // declared ambient kind must match the surface's model
        if let Some(kind) = raw.get("ambient.kind") {
            let model = Self::surface_model(&surface)?;
            if kind != model.name() {
                return Err(Error::Config {
                    line: raw.line_of("ambient.kind"),
                    msg: format!(
                        "ambient.kind `{kind}` does not match the surface's model `{}`",
                        model.name()
                    ),
                });
            }
        }

        let r = raw.usize("run.r")?.unwrap_or(0);
        if r > 1 {
            return Err(Error::Config {
                line: raw.line_of("run.r"),
                msg: format!("run.r = {r} exceeds n - 1 = 1 for surface geometry"),
            });
        }

        let domain = match raw.get("domain.kind").unwrap_or("whole") {
            "whole" => DomainSpec::Whole,
            "ball" => {
                let center_str = raw.get("domain.center").ok_or(Error::ConfigField(
                    "domain.kind = ball requires domain.center".into(),
                ))?;
                let parts: Vec<f64> = center_str
                    .split(',')
                    .map(|p| p.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::Config {
                        line: raw.line_of("domain.center"),
                        msg: format!("domain.center must be comma-separated numbers, got `{center_str}`"),
                    })?;
                if parts.len() < 3 || parts.len() > 4 {
                    return Err(Error::Config {
                        line: raw.line_of("domain.center"),
                        msg: "domain.center needs 3 or 4 coordinates".into(),
                    });
                }
                let mut center = Point::zeros();
                for (i, &v) in parts.iter().enumerate() {
                    center[i] = v;
                }
                let radius = raw.f64("domain.radius")?.ok_or(Error::ConfigField(
                    "domain.kind = ball requires domain.radius".into(),
                ))?;
                if wrapped_oracle {
                    return Err(Error::ConfigField(
                        "ball domains need a model-space ambient (ambient.wrapped_oracle must be false)"
                            .into(),
                    ));
                }
                DomainSpec::Ball { center, radius }
            }
            other => {
                return Err(Error::Config {
                    line: raw.line_of("domain.kind"),
                    msg: format!("unknown domain.kind `{other}`"),
                })
            }
        };

        let solver = SolverSpec {
            tol: raw.f64("solver.tol")?.unwrap_or(1e-8),
            max_iter: raw.usize("solver.max_iter")?.unwrap_or(40_000),
            seed: raw.usize("solver.seed")?.unwrap_or(0x5eed) as u64,
            margin_refine: raw.bool("solver.margin_refine")?.unwrap_or(true),
        };

        let output = OutputSpec {
            report: raw.get("output.report").map(PathBuf::from),
            eigenfunction_csv: raw.get("output.eigenfunction_csv").map(PathBuf::from),
            operator_mtx: raw.get("output.operator_mtx").map(PathBuf::from),
            sweep_csv: raw.get("output.sweep_csv").map(PathBuf::from),
        };

        let sweep = SweepSpec {
            param: raw.get("sweep.param").map(str::to_string),
            from: raw.f64("sweep.from")?.unwrap_or(0.0),
            to: raw.f64("sweep.to")?.unwrap_or(1.0),
            steps: raw.usize("sweep.steps")?.unwrap_or(0),
            bisect_tol: raw.f64("sweep.bisect_tol")?.unwrap_or(1e-3),
        };

        let verify_suites = raw
            .get("verify.suites")
            .map(|v| v.split(',').map(|s| s.trim().to_string()).collect())
            .unwrap_or_else(|| vec!["all".to_string()]);

        Ok(Self {
            surface,
            wrapped_oracle,
            sec_infimum,
            r,
            domain,
            solver,
            output,
            sweep,
            verify_suites,
        })
    }

    fn parse_surface(raw: &RawConfig) -> Result<SurfaceSpec> {
        let kind = raw.get("surface.kind").ok_or(Error::ConfigField(
            "surface.kind is required".into(),
        ))?;
        if kind == "off" {
            if raw.get("surface.radius").is_some() || raw.get("surface.distance").is_some() {
                return Err(Error::ConfigField(
                    "surface.kind = off takes only surface.path (exactly one surface source)".into(),
                ));
            }
            let path = raw.get("surface.path").ok_or(Error::ConfigField(
                "surface.kind = off requires surface.path".into(),
            ))?;
            return Ok(SurfaceSpec::OffMesh {
                path: PathBuf::from(path),
            });
        }
        if raw.get("surface.path").is_some() {
            return Err(Error::ConfigField(
                "surface.path is only valid with surface.kind = off".into(),
            ));
        }
        let radius = raw.f64("surface.radius")?.unwrap_or(1.0);
        let extent = raw.f64("surface.extent")?.unwrap_or(1.0);
        let surface = match kind {
            "sphere" => CatalogSurface::Sphere { radius },
            "hemisphere" => CatalogSurface::Hemisphere { radius },
            "cylinder" => CatalogSurface::Cylinder {
                radius,
                height: raw.f64("surface.height")?.unwrap_or(2.0),
            },
            "flat_torus" => CatalogSurface::FlatTorus {
                period: raw.f64("surface.period")?.unwrap_or(std::f64::consts::TAU),
                periodic: true,
            },
            "flat_square" => CatalogSurface::FlatTorus {
                period: raw.f64("surface.period")?.unwrap_or(1.0),
                periodic: false,
            },
            "geodesic_sphere" => CatalogSurface::GeodesicSphere { radius },
            "horosphere" => CatalogSurface::Horosphere { extent },
            "equidistant" => CatalogSurface::Equidistant {
                distance: raw.f64("surface.distance")?.unwrap_or(0.5),
                extent,
            },
            "clifford_torus" => CatalogSurface::CliffordTorus {
                a: raw.f64("surface.ratio")?.unwrap_or(std::f64::consts::FRAC_1_SQRT_2),
            },
            other => return Err(Error::UnknownSurface(other.to_string())),
        };
        let resolution = raw.usize("surface.resolution")?.unwrap_or(16) as u32;
        let estimated = match raw.get("surface.geometry").unwrap_or("analytic") {
            "analytic" => false,
            "estimated" => true,
            other => {
                return Err(Error::Config {
                    line: raw.line_of("surface.geometry"),
                    msg: format!("surface.geometry must be analytic|estimated, got `{other}`"),
                })
            }
        };
        Ok(SurfaceSpec::Catalog {
            surface,
            resolution,
            estimated,
        })
    }

    fn surface_model(spec: &SurfaceSpec) -> Result<Model> {
        Ok(match spec {
            SurfaceSpec::OffMesh { .. } => Model::Euclidean3,
            SurfaceSpec::Catalog { surface, .. } => surface.immersion()?.ambient.model,
        })
    }

    /// Canonical emission: sorted keys, one per line. Parsing the output
    /// reproduces the config exactly.
    pub fn emit(&self) -> String {
        let mut pairs: Vec<(String, String)> = Vec::new();
        let mut push = |k: &str, v: String| pairs.push((k.to_string(), v));
        match &self.surface {
            SurfaceSpec::Catalog {
                surface,
                resolution,
                estimated,
            } => {
                match *surface {
                    CatalogSurface::Sphere { radius } => {
                        push("surface.kind", "sphere".into());
                        push("surface.radius", fmt_f64(radius));
                    }
                    CatalogSurface::Hemisphere { radius } => {
                        push("surface.kind", "hemisphere".into());
                        push("surface.radius", fmt_f64(radius));
                    }
                    CatalogSurface::Cylinder { radius, height } => {
                        push("surface.kind", "cylinder".into());
                        push("surface.radius", fmt_f64(radius));
                        push("surface.height", fmt_f64(height));
                    }
                    CatalogSurface::FlatTorus { period, periodic } => {
                        push(
                            "surface.kind",
                            if periodic { "flat_torus" } else { "flat_square" }.into(),
                        );
                        push("surface.period", fmt_f64(period));
                    }
                    CatalogSurface::GeodesicSphere { radius } => {
                        push("surface.kind", "geodesic_sphere".into());
                        push("surface.radius", fmt_f64(radius));
                    }
                    CatalogSurface::Horosphere { extent } => {
                        push("surface.kind", "horosphere".into());
                        push("surface.extent", fmt_f64(extent));
                    }
                    CatalogSurface::Equidistant { distance, extent } => {
                        push("surface.kind", "equidistant".into());
                        push("surface.distance", fmt_f64(distance));
                        push("surface.extent", fmt_f64(extent));
                    }
                    CatalogSurface::CliffordTorus { a } => {
                        push("surface.kind", "clifford_torus".into());
                        push("surface.ratio", fmt_f64(a));
                    }
                }
                push("surface.resolution", resolution.to_string());
                push(
                    "surface.geometry",
                    if *estimated { "estimated" } else { "analytic" }.into(),
                );
            }
            SurfaceSpec::OffMesh { path } => {
                push("surface.kind", "off".into());
                push("surface.path", path.display().to_string());
            }
        }
        push("ambient.wrapped_oracle", self.wrapped_oracle.to_string());
        if let Some(s) = self.sec_infimum {
            push("ambient.sec_infimum", fmt_f64(s));
        }
        push("run.r", self.r.to_string());
        match &self.domain {
            DomainSpec::Whole => push("domain.kind", "whole".into()),
            DomainSpec::Ball { center, radius } => {
                push("domain.kind", "ball".into());
                push(
                    "domain.center",
                    format!(
                        "{},{},{},{}",
                        fmt_f64(center[0]),
                        fmt_f64(center[1]),
                        fmt_f64(center[2]),
                        fmt_f64(center[3])
                    ),
                );
                push("domain.radius", fmt_f64(*radius));
            }
        }
        push("solver.tol", fmt_f64(self.solver.tol));
        push("solver.max_iter", self.solver.max_iter.to_string());
        push("solver.seed", self.solver.seed.to_string());
        push("solver.margin_refine", self.solver.margin_refine.to_string());
        if let Some(p) = &self.output.report {
            push("output.report", p.display().to_string());
        }
        if let Some(p) = &self.output.eigenfunction_csv {
            push("output.eigenfunction_csv", p.display().to_string());
        }
        if let Some(p) = &self.output.operator_mtx {
            push("output.operator_mtx", p.display().to_string());
        }
        if let Some(p) = &self.output.sweep_csv {
            push("output.sweep_csv", p.display().to_string());
        }
        if let Some(param) = &self.sweep.param {
            push("sweep.param", param.clone());
            push("sweep.from", fmt_f64(self.sweep.from));
            push("sweep.to", fmt_f64(self.sweep.to));
            push("sweep.steps", self.sweep.steps.to_string());
            push("sweep.bisect_tol", fmt_f64(self.sweep.bisect_tol));
        }
        push("verify.suites", self.verify_suites.join(","));
        pairs.sort();
        let mut out = String::new();
        for (k, v) in pairs {
            out.push_str(&k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        }
        out
    }

    /// FNV-1a hash of the canonical emission: the provenance config hash.
    pub fn hash(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in self.emit().bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h
    }

    /// Build the discrete surface this config describes.
    pub fn build_surface(&self) -> Result<DiscreteSurface> {
        self.build_surface_at(None)
    }

    /// Build with an overridden resolution (used for two-level refinement).
    pub fn build_surface_at(&self, resolution: Option<u32>) -> Result<DiscreteSurface> {
        let mut s = match &self.surface {
            SurfaceSpec::Catalog {
                surface,
                resolution: res,
                estimated,
            } => {
                let imm = surface.immersion()?;
                let source = if *estimated {
                    GeometrySource::MeshFit
                } else {
                    GeometrySource::Analytic
                };
                discretize_with(&imm, resolution.unwrap_or(*res), source)?
            }
            SurfaceSpec::OffMesh { path } => crate::runner::surface_from_off(path)?,
        };
        if self.wrapped_oracle {
            let mut amb = Ambient::wrapped_space_form(s.ambient.model);
            if let Some(sec) = self.sec_infimum {
                if let crate::geometry::AmbientKind::General { sec_infimum, .. } = &mut amb.kind {
                    *sec_infimum = Some(sec);
                }
            }
            s.ambient = amb;
        }
        Ok(s)
    }

    /// Resolution doubling (grid) or increment (subdivision level) for the
    /// two-level error estimate.
    pub fn refined_resolution(&self) -> Option<u32> {
        match &self.surface {
            SurfaceSpec::Catalog {
                surface,
                resolution,
                ..
            } => Some(match surface {
                CatalogSurface::Sphere { .. } | CatalogSurface::GeodesicSphere { .. } => {
                    resolution + 1
                }
                _ => resolution * 2,
            }),
            SurfaceSpec::OffMesh { .. } => None,
        }
    }
}

fn fmt_f64(v: f64) -> String {
    // shortest representation that round-trips
    let s = format!("{v}");
    if s.parse::<f64>() == Ok(v) {
        s
    } else {
        format!("{v:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "
# analyze the unit sphere
surface.kind = sphere
surface.radius = 1.0
surface.resolution = 3
run.r = 1
solver.tol = 1e-9
";

    #[test]
    fn parse_and_roundtrip() {
        let cfg = RunConfig::parse_str(SAMPLE).unwrap();
        assert_eq!(cfg.r, 1);
        assert_eq!(cfg.solver.tol, 1e-9);
        match cfg.surface {
            SurfaceSpec::Catalog {
                surface: CatalogSurface::Sphere { radius },
                resolution,
                estimated,
            } => {
                assert_eq!(radius, 1.0);
                assert_eq!(resolution, 3);
                assert!(!estimated);
            }
            _ => panic!("wrong surface"),
        }
        // round trip: parse(emit(cfg)) == cfg, emit idempotent
        let emitted = cfg.emit();
        let cfg2 = RunConfig::parse_str(&emitted).unwrap();
        assert_eq!(cfg, cfg2);
        assert_eq!(emitted, cfg2.emit());
        assert_eq!(cfg.hash(), cfg2.hash());
    }

    #[test]
    fn unknown_key_rejected_with_line() {
        let text = "surface.kind = sphere\nsurface.radiusx = 2\n";
        match RunConfig::parse_str(text) {
            Err(Error::Config { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn r_gate() {
        let text = "surface.kind = sphere\nrun.r = 2\n";
        assert!(RunConfig::parse_str(text).is_err());
    }

    #[test]
    fn ball_requires_model_space() {
        let text = "surface.kind = horosphere\nambient.wrapped_oracle = true\ndomain.kind = ball\ndomain.center = 1,0,0,0\ndomain.radius = 0.5\n";
        assert!(RunConfig::parse_str(text).is_err());
        let text = "surface.kind = horosphere\ndomain.kind = ball\ndomain.center = 1,0,0,0\ndomain.radius = 0.5\n";
        let cfg = RunConfig::parse_str(text).unwrap();
        assert!(matches!(cfg.domain, DomainSpec::Ball { .. }));
    }

    #[test]
    fn exactly_one_surface_source() {
        let text = "surface.kind = sphere\nsurface.path = mesh.off\n";
        assert!(RunConfig::parse_str(text).is_err());
        let text = "surface.kind = off\n";
        assert!(RunConfig::parse_str(text).is_err());
    }
}
