//! Structured analysis reports: deterministic text with every numeric field
//! carrying its tolerance.

use std::fmt::Write as _;

use crate::spectral::Verdict;

#[derive(Debug, Clone)]
pub struct Measured {
    pub value: f64,
    pub tol: f64,
}

impl Measured {
    pub fn new(value: f64, tol: f64) -> Self {
        Self { value, tol }
    }
}

impl std::fmt::Display for Measured {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:+.9e} (tol {:.2e})", self.value, self.tol)
    }
}

#[derive(Debug, Clone, Default)]
pub struct AdmissibilityBlock {
    pub admissible: bool,
    pub sign: f64,
    pub class: String,
    pub margin: Option<Measured>,
    pub criteria: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct OperatorBlock {
    pub drift_norm: Option<Measured>,
    pub identity_residual: Option<Measured>,
    pub stiffness_asymmetry: Option<Measured>,
    pub symmetric: bool,
    pub sign: f64,
}

#[derive(Debug, Clone)]
pub struct SpectralBlock {
    pub lambda: Measured,
    pub convention: String,
    pub residual: f64,
    pub positivity_margin: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct StabilityBlock {
    pub verdict: Verdict,
    pub method: String,
    pub witness: String,
    pub margin_tol: f64,
    pub reverified: bool,
}

#[derive(Debug, Clone)]
pub struct BoundsBlock {
    pub pinching_holds: bool,
    pub worst_ratio: Measured,
    pub bound: Measured,
    pub statement_form: f64,
    pub slack: Measured,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct Provenance {
    pub config_hash: u64,
    pub label: String,
    pub nodes: usize,
    pub triangles: usize,
    pub boundary_nodes: usize,
    pub max_edge: f64,
    pub version: String,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub title: String,
    pub r: usize,
    pub admissibility: Option<AdmissibilityBlock>,
    pub operator: Option<OperatorBlock>,
    pub spectral: Option<SpectralBlock>,
    pub stability: Option<StabilityBlock>,
    pub bounds: Option<BoundsBlock>,
    pub notes: Vec<String>,
    pub provenance: Provenance,
}

impl Report {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "== {} ==", self.title);
        let _ = writeln!(s, "r = {}", self.r);
        if let Some(a) = &self.admissibility {
            let _ = writeln!(s, "[admissibility]");
            let _ = writeln!(
                s,
                "  admissible = {} (P_r {}, sign {:+})",
                a.admissible, a.class, a.sign
            );
            if let Some(m) = &a.margin {
                let _ = writeln!(s, "  margin = {m}");
            }
            if a.criteria.is_empty() {
                let _ = writeln!(s, "  criteria = none");
            } else {
                let _ = writeln!(s, "  criteria = {}", a.criteria.join(", "));
            }
        }
        if let Some(o) = &self.operator {
            let _ = writeln!(s, "[operator]");
            let _ = writeln!(s, "  symmetric = {} (sign {:+})", o.symmetric, o.sign);
            if let Some(d) = &o.drift_norm {
                let _ = writeln!(s, "  drift_norm = {d}");
            }
            if let Some(i) = &o.identity_residual {
                let _ = writeln!(s, "  identity_residual = {i}");
            }
            if let Some(k) = &o.stiffness_asymmetry {
                let _ = writeln!(s, "  stiffness_asymmetry = {k}");
            }
        }
        if let Some(sp) = &self.spectral {
            let _ = writeln!(s, "[spectral]");
            let _ = writeln!(s, "  lambda = {}", sp.lambda);
            let _ = writeln!(s, "  convention = {}", sp.convention);
            let _ = writeln!(s, "  residual = {:.3e}", sp.residual);
            let _ = writeln!(s, "  positivity_margin = {:+.6e}", sp.positivity_margin);
            let _ = writeln!(s, "  iterations = {}", sp.iterations);
        }
        if let Some(st) = &self.stability {
            let _ = writeln!(s, "[stability]");
            let _ = writeln!(s, "  verdict = {}", st.verdict);
            let _ = writeln!(s, "  method = {}", st.method);
            let _ = writeln!(s, "  witness = {}", st.witness);
            let _ = writeln!(s, "  margin_tol = {:.3e}", st.margin_tol);
            let _ = writeln!(s, "  witness_reverified = {}", st.reverified);
        }
        if let Some(b) = &self.bounds {
            let _ = writeln!(s, "[bounds]");
            let _ = writeln!(s, "  pinching_holds = {}", b.pinching_holds);
            let _ = writeln!(s, "  worst_ratio = {}", b.worst_ratio);
            let _ = writeln!(s, "  lower_bound = {}", b.bound);
            let _ = writeln!(s, "  statement_form = {:+.9e}", b.statement_form);
            let _ = writeln!(s, "  slack = {}", b.slack);
            let _ = writeln!(s, "  pass = {}", b.pass);
        }
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        let p = &self.provenance;
        let _ = writeln!(s, "[provenance]");
        let _ = writeln!(s, "  config_hash = {:016x}", p.config_hash);
        let _ = writeln!(s, "  surface = {}", p.label);
        let _ = writeln!(
            s,
            "  mesh = {} nodes, {} triangles, {} boundary, h_max {:.6e}",
            p.nodes, p.triangles, p.boundary_nodes, p.max_edge
        );
        let _ = writeln!(s, "  version = {}", p.version);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_is_deterministic() {
        let rep = Report {
            title: "probe".into(),
            r: 0,
            admissibility: None,
            operator: None,
            spectral: Some(SpectralBlock {
                lambda: Measured::new(-2.0, 1e-4),
                convention: "T g + lambda g = 0".into(),
                residual: 1e-9,
                positivity_margin: 0.5,
                iterations: 12,
            }),
            stability: None,
            bounds: None,
            notes: vec!["probe note".into()],
            provenance: Provenance {
                config_hash: 0xdead_beef,
                label: "sphere".into(),
                nodes: 42,
                triangles: 80,
                boundary_nodes: 0,
                max_edge: 0.3,
                version: "0.1.0".into(),
            },
        };
        assert_eq!(rep.render(), rep.render());
        assert!(rep.render().contains("lambda"));
    }
}
