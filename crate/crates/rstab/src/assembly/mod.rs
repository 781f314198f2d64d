//! Finite element assembly of the discrete operators.
//!
//! Piecewise-linear elements on triangles, assembled per element from the
//! chordal Gram matrix, with a lumped (diagonal) mass matrix; a consistent
//! mass is available behind a flag for convergence studies. The stiffness is
//! the weak form -int <P_r grad phi_i, grad phi_j>; the drift matrix is
//! int phi_i <w, grad phi_j>; the potential is diagonal against the lumped
//! mass. Dirichlet conditions act by row/column elimination (the solvers
//! work on the free-node subspace), keeping the stiffness symmetric.
//!
//! For declared space forms the drift term is dropped exactly (the continuous
//! field trace(grad P_r) vanishes there); the discrete drift field remains
//! available as a diagnostic.

mod variational;

pub use variational::{
    default_variation_step, linearization_residual, linearization_residual_richardson,
    second_variation_r_area, LinearizationReport, SecondVariationOptions, SecondVariationReport,
    VariationRoute,
};

use crate::error::{Error, Result};
use crate::geometry::mat2::{self, Mat2};
use crate::geometry::mesh::two_ring;
use crate::geometry::{DiscreteSurface, Model, Point};
use crate::linalg::{CsrMatrix, Triplets};
use crate::newton::{admissibility, Admissibility};

#[derive(Debug, Clone, Copy, Default)]
pub struct AssemblyOptions {
    /// Assemble a consistent mass matrix alongside the lumped one.
    pub consistent_mass: bool,
    /// Override for the admissibility tolerance.
    pub definiteness_tol: Option<f64>,
}

/// Sparse operator with mass data and Dirichlet mask.
///
/// The operator action is T f = M^{-1} (K + D + M diag(q)) f on free nodes;
/// the negative-definite sign flip is already folded into K, D, and q, recorded
/// in `sign`.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub n: usize,
    pub stiffness: CsrMatrix,
    pub drift: Option<CsrMatrix>,
    /// Nodal potential q (multiplies the lumped mass on the diagonal).
    pub potential: Vec<f64>,
    pub mass: Vec<f64>,
    pub consistent_mass: Option<CsrMatrix>,
    /// True = node is constrained to zero.
    pub dirichlet: Vec<bool>,
    pub sign: f64,
    pub symmetric: bool,
}

pub const EIGEN_CONVENTION: &str = "T g + lambda g = 0 (lambda is the spectrum bottom of -T)";

impl DiscreteOperator {
    pub fn free_indices(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| !self.dirichlet[i]).collect()
    }

    pub fn n_free(&self) -> usize {
        self.dirichlet.iter().filter(|&&d| !d).count()
    }

    /// K + D + diag(M q), full-size.
    pub fn weak_matrix(&self) -> CsrMatrix {
        let kd = match &self.drift {
            Some(d) => self.stiffness.plus(d),
            None => self.stiffness.clone(),
        };
        let diag: Vec<f64> = self
            .potential
            .iter()
            .zip(&self.mass)
            .map(|(q, m)| q * m)
            .collect();
        kd.plus_diagonal(&diag)
    }

    /// T f with Dirichlet nodes zeroed on input and output.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let mut g = f.to_vec();
        for i in 0..self.n {
            if self.dirichlet[i] {
                g[i] = 0.0;
            }
        }
        let mut y = self.stiffness.matvec(&g);
        if let Some(d) = &self.drift {
            let dy = d.matvec(&g);
            for i in 0..self.n {
                y[i] += dy[i];
            }
        }
        for i in 0..self.n {
            y[i] += self.mass[i] * self.potential[i] * g[i];
        }
        for i in 0..self.n {
            y[i] = if self.dirichlet[i] { 0.0 } else { y[i] / self.mass[i] };
        }
        y
    }

    /// I_r(f, f) = -int f T f dM = -f^T (K + D + Mq) f, with f masked.
    pub fn quadratic_form(&self, f: &[f64]) -> f64 {
        self.bilinear_form(f, f)
    }

    /// I_r(f, g) = -int f T g dM.
    pub fn bilinear_form(&self, f: &[f64], g: &[f64]) -> f64 {
        let mut gm = g.to_vec();
        for i in 0..self.n {
            if self.dirichlet[i] {
                gm[i] = 0.0;
            }
        }
        let mut y = self.stiffness.matvec(&gm);
        if let Some(d) = &self.drift {
            let dy = d.matvec(&gm);
            for i in 0..self.n {
                y[i] += dy[i];
            }
        }
        for i in 0..self.n {
            y[i] += self.mass[i] * self.potential[i] * gm[i];
        }
        let mut acc = 0.0;
        for i in 0..self.n {
            if !self.dirichlet[i] {
                acc -= f[i] * y[i];
            }
        }
        acc
    }

    /// M-weighted inner product over free nodes.
    pub fn mass_dot(&self, f: &[f64], g: &[f64]) -> f64 {
        (0..self.n)
            .filter(|&i| !self.dirichlet[i])
            .map(|i| self.mass[i] * f[i] * g[i])
            .sum()
    }

    pub fn mass_norm(&self, f: &[f64]) -> f64 {
        self.mass_dot(f, f).sqrt()
    }

    /// Formal adjoint with respect to the (lumped) L2 inner product:
    /// T* = M^{-1} (M T)^T, which transposes the drift and keeps K and q.
    pub fn adjoint(&self) -> DiscreteOperator {
        DiscreteOperator {
            drift: self.drift.as_ref().map(CsrMatrix::transpose),
            ..self.clone()
        }
    }

    /// Same operator restricted to a different Dirichlet mask.
    pub fn with_mask(&self, dirichlet: Vec<bool>) -> DiscreteOperator {
        assert_eq!(dirichlet.len(), self.n);
        DiscreteOperator {
            dirichlet,
            ..self.clone()
        }
    }

    /// alpha T (alpha > 0 preserves eigen-structure up to scale).
    pub fn scaled(&self, alpha: f64) -> DiscreteOperator {
        DiscreteOperator {
            stiffness: self.stiffness.scaled(alpha),
            drift: self.drift.as_ref().map(|d| d.scaled(alpha)),
            potential: self.potential.iter().map(|q| q * alpha).collect(),
            ..self.clone()
        }
    }

    /// max_i sum_j |(M^{-1} A)_{ij}| over free rows of the weak matrix.
    pub fn max_t_row_sum(&self) -> f64 {
        let a = self.weak_matrix();
        let mut worst = 0.0f64;
        for i in 0..self.n {
            if self.dirichlet[i] {
                continue;
            }
            let s: f64 = a
                .row(i)
                .filter(|(j, _)| !self.dirichlet[*j])
                .map(|(_, v)| v.abs())
                .sum();
            worst = worst.max(s / self.mass[i]);
        }
        worst
    }

    /// Export the weak matrix and the mass to Matrix Market files
    /// `<stem>.mtx` and `<stem>.mass.mtx`.
    pub fn export_matrix_market(&self, stem: &std::path::Path) -> Result<()> {
        let weak = self.weak_matrix();
        weak.write_matrix_market(&stem.with_extension("mtx"))?;
        let mut mt = Triplets::new(self.n, self.n);
        for (i, &m) in self.mass.iter().enumerate() {
            mt.push(i, i, m);
        }
        mt.to_csr()
            .write_matrix_market(&stem.with_extension("mass.mtx"))?;
        Ok(())
    }
}

struct ElementBasis {
    area: f64,
    grads: [[f64; 2]; 3],
    frame: [Point; 2],
}

fn element_basis(model: Model, p: [&Point; 3]) -> Option<ElementBasis> {
    let d1 = p[1] - p[0];
    let d2 = p[2] - p[0];
    let a = model.dot(&d1, &d1);
    let b = model.dot(&d1, &d2);
    let c = model.dot(&d2, &d2);
    let det = a * c - b * b;
    if !(det > 0.0) || !(a > 0.0) {
        return None;
    }
    let area = 0.5 * det.sqrt();
    let sa = a.sqrt();
    // isometric unfolding: q0 = (0,0), q1 = (sa, 0), q2 = (b/sa, 2 area/sa)
    let q = [[0.0, 0.0], [sa, 0.0], [b / sa, 2.0 * area / sa]];
    let mut grads = [[0.0; 2]; 3];
    for i in 0..3 {
        let j = (i + 1) % 3;
        let k = (i + 2) % 3;
        let e = [q[k][0] - q[j][0], q[k][1] - q[j][1]];
        grads[i] = [-e[1] / (2.0 * area), e[0] / (2.0 * area)];
    }
    let f1 = d1 / sa;
    let f2_raw = d2 - f1 * (b / sa);
    let f2 = f2_raw / model.norm(&f2_raw);
    Some(ElementBasis {
        area,
        grads,
        frame: [f1, f2],
    })
}

/// Map a nodal 2x2 tensor (in the node frame) into the element frame.
fn tensor_to_element(model: Model, surface: &DiscreteSurface, node: usize, t: &Mat2, eb: &ElementBasis) -> Mat2 {
    let e = &surface.geom[node].frame;
    let mut r = [[0.0; 2]; 2];
    for a in 0..2 {
        for c in 0..2 {
            r[a][c] = model.dot(&e[a], &eb.frame[c]);
        }
    }
    // R^T t R
    let tr = mat2::mul(&mat2::transpose(&r), &mat2::mul(t, &r));
    mat2::symmetrize(&tr).0
}

/// Map a nodal frame vector into element-frame components.
fn vector_to_element(model: Model, surface: &DiscreteSurface, node: usize, v: &[f64; 2], eb: &ElementBasis) -> [f64; 2] {
    let e = &surface.geom[node].frame;
    let amb = e[0] * v[0] + e[1] * v[1];
    [model.dot(&amb, &eb.frame[0]), model.dot(&amb, &eb.frame[1])]
}

struct RawAssembly {
    stiffness: CsrMatrix,
    drift: Option<CsrMatrix>,
    mass: Vec<f64>,
    consistent_mass: Option<CsrMatrix>,
}

/// Assemble K (anisotropic stiffness for the tensor field `phi`) and, when
/// given, D for the drift coefficient field `w` (the + <w, grad f> term).
fn assemble_parts(
    surface: &DiscreteSurface,
    phi: &[Mat2],
    w: Option<&[[f64; 2]]>,
    opts: &AssemblyOptions,
) -> Result<RawAssembly> {
    let model = surface.model();
    let n = surface.n_nodes();
    let mut kt = Triplets::new(n, n);
    let mut dt = w.map(|_| Triplets::new(n, n));
    let mut mass = vec![0.0; n];
    let mut mt = opts.consistent_mass.then(|| Triplets::new(n, n));
    for ti in 0..surface.mesh.tris.len() {
        let tri = &surface.mesh.tris[ti];
        let pts = surface.mesh.tri_points(ti);
        let eb = element_basis(model, [&pts[0], &pts[1], &pts[2]])
            .ok_or(Error::DegenerateMetric { node: tri[0] })?;
        // element coefficient: average of the vertex tensors
        let mut phi_e = [[0.0; 2]; 2];
        for &v in tri {
            let te = tensor_to_element(model, surface, v, &phi[v], &eb);
            phi_e = mat2::add(&phi_e, &te);
        }
        phi_e = mat2::scale(&phi_e, 1.0 / 3.0);
        for i in 0..3 {
            for j in i..3 {
                let gi = eb.grads[i];
                let pj = mat2::matvec(&phi_e, &eb.grads[j]);
                let kij = -eb.area * (gi[0] * pj[0] + gi[1] * pj[1]);
                kt.push(tri[i], tri[j], kij);
                if j > i {
                    kt.push(tri[j], tri[i], kij);
                }
            }
        }
        if let (Some(dt), Some(wf)) = (&mut dt, w) {
            for i in 0..3 {
                let wi = vector_to_element(model, surface, tri[i], &wf[tri[i]], &eb);
                for j in 0..3 {
                    let gj = eb.grads[j];
                    dt.push(tri[i], tri[j], eb.area / 3.0 * (wi[0] * gj[0] + wi[1] * gj[1]));
                }
            }
        }
        for &v in tri {
            mass[v] += eb.area / 3.0;
        }
        if let Some(mt) = &mut mt {
            for i in 0..3 {
                for j in 0..3 {
                    let val = if i == j { eb.area / 6.0 } else { eb.area / 12.0 };
                    mt.push(tri[i], tri[j], val);
                }
            }
        }
    }
    Ok(RawAssembly {
        stiffness: kt.to_csr(),
        drift: dt.map(|t| t.to_csr()),
        mass,
        consistent_mass: mt.map(|t| t.to_csr()),
    })
}

/// Admissibility of the surface's P_r field (the direct definiteness test,
/// plus the informational criteria report).
pub fn surface_admissibility(
    surface: &DiscreteSurface,
    r: usize,
    tol: Option<f64>,
) -> Result<Admissibility> {
    let field = surface.shape_field();
    admissibility(&field, r, tol)
}

/// The covariant-derivative trace of the P_r tensor field, per node, in node
/// frame components. Computed by least-squares differences of the tensor
/// components over the two-ring, with neighbor frames parallel-transported to
/// the node (first-order connection correction).
pub fn drift_field(surface: &DiscreteSurface, r: usize) -> Result<Vec<[f64; 2]>> {
    let field: Vec<Mat2> = (0..surface.n_nodes()).map(|i| surface.p_r(i, r)).collect();
    tensor_field_divergence(surface, &field)
}

/// trace(grad T) for an arbitrary symmetric 2x2 tensor field in node frames.
///
/// On periodically-identified charts (the flat torus) the stencil offsets are
/// wrapped chart differences, which assumes the node frames align with the
/// chart axes; the catalog torus satisfies this by construction.
pub fn tensor_field_divergence(surface: &DiscreteSurface, field: &[Mat2]) -> Result<Vec<[f64; 2]>> {
    let model = surface.model();
    let n = surface.n_nodes();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let ring = two_ring(&surface.adjacency, i);
        if ring.len() < 4 {
            return Err(Error::InsufficientStencil {
                node: i,
                rows: ring.len() + 1,
                unknowns: 3,
            });
        }
        let p = &surface.mesh.points[i];
        let gi = &surface.geom[i];
        // rows: (s, t, [P00, P01, P11] transported)
        let mut rows: Vec<([f64; 2], Mat2)> = Vec::with_capacity(ring.len() + 1);
        rows.push(([0.0, 0.0], field[i]));
        let lifted_chart = surface.mesh.lift.is_some();
        let chart = surface.mesh.chart.as_deref();
        for &k in &ring {
            let (s, t) = if lifted_chart {
                // periodically-identified chart: offsets from wrapped chart
                // differences expressed in the node frame via the chart map
                let chart = chart.expect("lifted meshes carry chart coords");
                let periods = surface.mesh.periods;
                let wrap = |d: f64, period: Option<f64>| -> f64 {
                    match period {
                        Some(p) => {
                            let mut d = d % p;
                            if d > p / 2.0 {
                                d -= p;
                            }
                            if d < -p / 2.0 {
                                d += p;
                            }
                            d
                        }
                        None => d,
                    }
                };
                let du = wrap(chart[k][0] - chart[i][0], periods[0]);
                let dv = wrap(chart[k][1] - chart[i][1], periods[1]);
                (du, dv)
            } else {
                let lg = model.log(p, &surface.mesh.points[k]);
                (
                    model.dot(&lg, &gi.frame[0]),
                    model.dot(&lg, &gi.frame[1]),
                )
            };
            // transport the neighbor frame to the node and express in our frame
            let gk = &surface.geom[k];
            let mut r = [[0.0; 2]; 2];
            for b in 0..2 {
                let tb = model.transport(&surface.mesh.points[k], p, &gk.frame[b]);
                r[0][b] = model.dot(&tb, &gi.frame[0]);
                r[1][b] = model.dot(&tb, &gi.frame[1]);
            }
            // orthonormalize the 2x2 (columns)
            let c0n = (r[0][0] * r[0][0] + r[1][0] * r[1][0]).sqrt();
            r[0][0] /= c0n;
            r[1][0] /= c0n;
            let d = r[0][0] * r[0][1] + r[1][0] * r[1][1];
            r[0][1] -= d * r[0][0];
            r[1][1] -= d * r[1][0];
            let c1n = (r[0][1] * r[0][1] + r[1][1] * r[1][1]).sqrt();
            r[0][1] /= c1n;
            r[1][1] /= c1n;
            let transported = mat2::mul(&r, &mat2::mul(&field[k], &mat2::transpose(&r)));
            rows.push(([s, t], transported));
        }
        // linear LS fit per independent component: value ~ c + g . w
        let mut grads = [[0.0; 2]; 3]; // gradients of P00, P01, P11
        for (comp, grad) in grads.iter_mut().enumerate() {
            let (a, b) = match comp {
                0 => (0, 0),
                1 => (0, 1),
                _ => (1, 1),
            };
            // normal equations for [c, gs, gt]
            let mut ata = [[0.0f64; 3]; 3];
            let mut atb = [0.0f64; 3];
            for (w, tens) in &rows {
                let row = [1.0, w[0], w[1]];
                let val = tens[a][b];
                for x in 0..3 {
                    for y in 0..3 {
                        ata[x][y] += row[x] * row[y];
                    }
                    atb[x] += row[x] * val;
                }
            }
            let m = nalgebra::Matrix3::from_fn(|x, y| ata[x][y]);
            let rhs = nalgebra::Vector3::from_column_slice(&atb);
            let sol = m.lu().solve(&rhs).ok_or(Error::InsufficientStencil {
                node: i,
                rows: rows.len(),
                unknowns: 3,
            })?;
            *grad = [sol[1], sol[2]];
        }
        // v_a = sum_b (grad P_{ab})_b
        let v = [
            grads[0][0] + grads[1][1], // d_s P00 + d_t P01
            grads[1][0] + grads[2][1], // d_s P01 + d_t P11
        ];
        out.push(v);
    }
    Ok(out)
}

/// Max frame-component norm of a drift field.
pub fn drift_norm_max(field: &[[f64; 2]]) -> f64 {
    field
        .iter()
        .map(|v| (v[0] * v[0] + v[1] * v[1]).sqrt())
        .fold(0.0, f64::max)
}

/// Weak divergence of a tangent vector field given in node frame components:
/// div v at node i is -(1/M_i) sum_e int <v, grad phi_i>.
pub fn weak_divergence(surface: &DiscreteSurface, v: &[[f64; 2]]) -> Result<Vec<f64>> {
    let model = surface.model();
    let n = surface.n_nodes();
    let mut acc = vec![0.0; n];
    let mut mass = vec![0.0; n];
    for ti in 0..surface.mesh.tris.len() {
        let tri = &surface.mesh.tris[ti];
        let pts = surface.mesh.tri_points(ti);
        let eb = element_basis(model, [&pts[0], &pts[1], &pts[2]])
            .ok_or(Error::DegenerateMetric { node: tri[0] })?;
        let mut ve = [0.0; 2];
        for &k in tri {
            let vk = vector_to_element(model, surface, k, &v[k], &eb);
            ve[0] += vk[0] / 3.0;
            ve[1] += vk[1] / 3.0;
        }
        for i in 0..3 {
            let g = eb.grads[i];
            acc[tri[i]] -= eb.area * (ve[0] * g[0] + ve[1] * g[1]);
            mass[tri[i]] += eb.area / 3.0;
        }
    }
    Ok(acc
        .iter()
        .zip(&mass)
        .map(|(a, m)| if *m > 0.0 { a / m } else { 0.0 })
        .collect())
}

/// L_r = div(P_r grad .) - <trace(grad P_r), grad .> as a discrete operator
/// (stiffness and drift parts only; no potential, no sign flip).
pub fn assemble_lr(surface: &DiscreteSurface, r: usize, opts: &AssemblyOptions) -> Result<DiscreteOperator> {
    let adm = surface_admissibility(surface, r, opts.definiteness_tol)?;
    if !adm.admissible {
        return Err(Error::NotAdmissible {
            r,
            class: adm.class.tag.to_string(),
        });
    }
    let phi: Vec<Mat2> = (0..surface.n_nodes()).map(|i| surface.p_r(i, r)).collect();
    let drift_coeff = if surface.ambient.is_space_form() {
        None
    } else {
        // w = -trace(grad P_r)
        let d = drift_field(surface, r)?;
        Some(d.iter().map(|v| [-v[0], -v[1]]).collect::<Vec<_>>())
    };
    let raw = assemble_parts(surface, &phi, drift_coeff.as_deref(), opts)?;
    let symmetric = raw.drift.is_none();
    Ok(DiscreteOperator {
        n: surface.n_nodes(),
        stiffness: raw.stiffness,
        drift: raw.drift,
        potential: vec![0.0; surface.n_nodes()],
        mass: raw.mass,
        consistent_mass: raw.consistent_mass,
        dirichlet: surface.mesh.boundary.clone(),
        sign: 1.0,
        symmetric,
    })
}

/// The r-stability operator T_r = L_r + trace(A^2 P_r) + trace(P_r R_N),
/// multiplied by -1 when P_r is negative definite.
///
/// trace(A^2 P_r) is evaluated directly and cross-checked at every node
/// against the identity S_1 S_{r+1} - (r+2) S_{r+2}.
pub fn assemble_tr(surface: &DiscreteSurface, r: usize, opts: &AssemblyOptions) -> Result<DiscreteOperator> {
    let adm = surface_admissibility(surface, r, opts.definiteness_tol)?;
    if !adm.admissible {
        return Err(Error::NotAdmissible {
            r,
            class: adm.class.tag.to_string(),
        });
    }
    let mut op = assemble_lr(surface, r, opts)?;
    let ambient_term = surface.ambient_curvature_term(r)?;
    let mut q = Vec::with_capacity(surface.n_nodes());
    for i in 0..surface.n_nodes() {
        let direct = surface.trace_a2_pr(i, r);
        let via_identity = surface.trace_a2_pr_identity(i, r);
        let defect = (direct - via_identity).abs();
        if defect > 1e-9 * (1.0 + direct.abs()) {
            return Err(Error::IdentityCrossCheck { node: i, defect });
        }
        q.push(direct + ambient_term[i]);
    }
    op.potential = q;
    if adm.sign < 0.0 {
        op.stiffness.scale(-1.0);
        if let Some(d) = &mut op.drift {
            d.scale(-1.0);
        }
        for v in &mut op.potential {
            *v = -*v;
        }
        op.sign = -1.0;
    }
    Ok(op)
}

/// Assemble div(phi grad .) + <w, grad .> + q from explicit coefficient
/// fields (phi and w in node frames). Fixture/manufactured entry; no
/// admissibility gate, sign +1.
pub fn assemble_custom(
    surface: &DiscreteSurface,
    phi: &[Mat2],
    drift_coeff: Option<&[[f64; 2]]>,
    q: &[f64],
    opts: &AssemblyOptions,
) -> Result<DiscreteOperator> {
    let raw = assemble_parts(surface, phi, drift_coeff, opts)?;
    let symmetric = raw.drift.is_none();
    Ok(DiscreteOperator {
        n: surface.n_nodes(),
        stiffness: raw.stiffness,
        drift: raw.drift,
        potential: q.to_vec(),
        mass: raw.mass,
        consistent_mass: raw.consistent_mass,
        dirichlet: surface.mesh.boundary.clone(),
        sign: 1.0,
        symmetric,
    })
}

/// Data produced by the symmetrization: the absorbed drift X, the corrected
/// potential Q, and diagnostics.
#[derive(Debug, Clone)]
pub struct SymmetrizedData {
    /// X = -P_r^{-1} trace(grad P_r), node frame components.
    pub x_field: Vec<[f64; 2]>,
    /// Q = q - div(P_r X)/2 - <X, P_r X>/4 (before the sign flip).
    pub q_corrected: Vec<f64>,
    /// The raw zeroth-order term q (before the sign flip).
    pub q_raw: Vec<f64>,
    /// max node norm of the measured drift trace(grad P_r).
    pub drift_norm: f64,
}

/// The symmetrized r-stability operator div(P_r grad .) + Q with
/// X = -P_r^{-1} trace(grad P_r) and
/// Q = q - div(P_r X)/2 - |sqrt(P_r) X|^2 / 4, sign-flipped when P_r is
/// negative definite. Self-adjoint by construction (no drift part).
pub fn symmetrize(
    surface: &DiscreteSurface,
    r: usize,
    opts: &AssemblyOptions,
) -> Result<(DiscreteOperator, SymmetrizedData)> {
    let adm = surface_admissibility(surface, r, opts.definiteness_tol)?;
    if !adm.admissible {
        return Err(Error::NotAdmissible {
            r,
            class: adm.class.tag.to_string(),
        });
    }
    let n = surface.n_nodes();
    let phi: Vec<Mat2> = (0..n).map(|i| surface.p_r(i, r)).collect();
    let d = drift_field(surface, r)?;
    let mut x_field = Vec::with_capacity(n);
    for i in 0..n {
        let det = mat2::det(&phi[i]);
        let scale = 1.0 + mat2::trace(&phi[i]).abs();
        if det.abs() < 1e-14 * scale * scale {
            return Err(Error::SingularPr { node: i, det });
        }
        let inv = mat2::inverse(&phi[i]).expect("checked determinant");
        let x = mat2::matvec(&inv, &d[i]);
        x_field.push([-x[0], -x[1]]);
    }
    let ambient_term = surface.ambient_curvature_term(r)?;
    let q_raw: Vec<f64> = (0..n)
        .map(|i| surface.trace_a2_pr(i, r) + ambient_term[i])
        .collect();
    let (op, data) = symmetrize_with_fields(surface, &phi, &x_field, &q_raw, adm.sign, opts)?;
    let mut data = data;
    data.drift_norm = drift_norm_max(&d);
    Ok((op, data))
}

/// Symmetrization from explicit fields (used by manufactured fixtures):
/// given T = div(phi grad .) + <phi X, grad .> + q, build
/// curly-T = div(phi grad .) + Q with Q = q - div(phi X)/2 - <X, phi X>/4.
pub fn symmetrize_custom(
    surface: &DiscreteSurface,
    phi: &[Mat2],
    x_field: &[[f64; 2]],
    q: &[f64],
    opts: &AssemblyOptions,
) -> Result<(DiscreteOperator, SymmetrizedData)> {
    symmetrize_with_fields(surface, phi, x_field, q, 1.0, opts)
}

fn symmetrize_with_fields(
    surface: &DiscreteSurface,
    phi: &[Mat2],
    x_field: &[[f64; 2]],
    q_raw: &[f64],
    sign: f64,
    opts: &AssemblyOptions,
) -> Result<(DiscreteOperator, SymmetrizedData)> {
    let n = surface.n_nodes();
    let phi_x: Vec<[f64; 2]> = (0..n).map(|i| mat2::matvec(&phi[i], &x_field[i])).collect();
    let div_phi_x = weak_divergence(surface, &phi_x)?;
    let mut q_corrected = Vec::with_capacity(n);
    for i in 0..n {
        let xpx = x_field[i][0] * phi_x[i][0] + x_field[i][1] * phi_x[i][1];
        q_corrected.push(q_raw[i] - 0.5 * div_phi_x[i] - 0.25 * xpx);
    }
    let raw = assemble_parts(surface, phi, None, opts)?;
    let mut op = DiscreteOperator {
        n,
        stiffness: raw.stiffness,
        drift: None,
        potential: q_corrected.clone(),
        mass: raw.mass,
        consistent_mass: raw.consistent_mass,
        dirichlet: surface.mesh.boundary.clone(),
        sign: 1.0,
        symmetric: true,
    };
    if sign < 0.0 {
        op.stiffness.scale(-1.0);
        for v in &mut op.potential {
            *v = -*v;
        }
        op.sign = -1.0;
    }
    Ok((
        op,
        SymmetrizedData {
            x_field: x_field.to_vec(),
            q_corrected,
            q_raw: q_raw.to_vec(),
            drift_norm: 0.0,
        },
    ))
}

#[cfg(test)]
mod tests;
