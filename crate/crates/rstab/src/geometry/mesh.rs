//! Triangle meshes: subdivided icosahedra, periodic and open tensor grids,
//! disc meshes, adjacency, and OFF file I/O.

use std::collections::HashMap;
use std::path::Path;

use super::ambient::Point;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Mesh {
    pub points: Vec<Point>,
    pub tris: Vec<[usize; 3]>,
    /// True at nodes on the mesh boundary (edges with a single incident face).
    pub boundary: Vec<bool>,
    /// Chart coordinates per node, when the mesh came from a chart.
    pub chart: Option<Vec<[f64; 2]>>,
    /// Per-triangle corner positions for periodically-identified charts whose
    /// ambient map does not wrap (e.g. the flat torus): the geometric lift.
    pub lift: Option<Vec<[Point; 3]>>,
    /// Chart periods per axis for periodically-identified charts.
    pub periods: [Option<f64>; 2],
}

impl Mesh {
    pub fn n_nodes(&self) -> usize {
        self.points.len()
    }

    /// Corner positions of a triangle, honoring the geometric lift.
    pub fn tri_points(&self, t: usize) -> [Point; 3] {
        match &self.lift {
            Some(l) => l[t],
            None => {
                let tri = self.tris[t];
                [self.points[tri[0]], self.points[tri[1]], self.points[tri[2]]]
            }
        }
    }

    pub fn n_tris(&self) -> usize {
        self.tris.len()
    }

    /// Longest edge (Euclidean coordinate chord) — the mesh size h.
    pub fn max_edge(&self) -> f64 {
        let mut h = 0.0f64;
        for t in 0..self.tris.len() {
            let p = self.tri_points(t);
            for e in 0..3 {
                h = h.max((p[e] - p[(e + 1) % 3]).norm());
            }
        }
        h
    }

    pub fn flip_orientation(&mut self) {
        for t in &mut self.tris {
            t.swap(1, 2);
        }
        if let Some(lift) = &mut self.lift {
            for l in lift {
                l.swap(1, 2);
            }
        }
    }

    /// Recompute boundary flags from face incidence; errors if any edge is
    /// shared by more than two faces or windings are inconsistent.
    pub fn rebuild_boundary(&mut self) -> Result<()> {
        let mut edges: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for t in &self.tris {
            for e in 0..3 {
                let a = t[e];
                let b = t[(e + 1) % 3];
                let key = (a.min(b), a.max(b));
                let dir = usize::from(a > b);
                let entry = edges.entry(key).or_insert((0, 0));
                entry.0 += 1;
                entry.1 += dir;
            }
        }
        self.boundary = vec![false; self.points.len()];
        for (&(a, b), &(count, dirsum)) in &edges {
            match count {
                1 => {
                    self.boundary[a] = true;
                    self.boundary[b] = true;
                }
                2 => {
                    // interior edge must appear once in each direction
                    if dirsum != 1 {
                        return Err(Error::NotOrientable);
                    }
                }
                _ => {
                    return Err(Error::MeshParse(format!(
                        "edge ({a},{b}) shared by {count} faces"
                    )))
                }
            }
        }
        Ok(())
    }
}

/// One-ring node adjacency and node-to-triangle incidence.
#[derive(Debug, Clone)]
pub struct Adjacency {
    pub nbrs: Vec<Vec<usize>>,
    pub node_tris: Vec<Vec<usize>>,
}

pub fn adjacency(mesh: &Mesh) -> Adjacency {
    let n = mesh.n_nodes();
    let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut node_tris: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (ti, t) in mesh.tris.iter().enumerate() {
        for e in 0..3 {
            let a = t[e];
            let b = t[(e + 1) % 3];
            if !nbrs[a].contains(&b) {
                nbrs[a].push(b);
            }
            if !nbrs[b].contains(&a) {
                nbrs[b].push(a);
            }
            node_tris[t[e]].push(ti);
        }
    }
    for v in &mut nbrs {
        v.sort_unstable();
    }
    Adjacency { nbrs, node_tris }
}

/// Nodes within graph distance 2 (excluding the node itself), sorted.
pub fn two_ring(adj: &Adjacency, i: usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    for &j in &adj.nbrs[i] {
        if !out.contains(&j) {
            out.push(j);
        }
        for &k in &adj.nbrs[j] {
            if k != i && !out.contains(&k) {
                out.push(k);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Subdivided icosahedron on the unit sphere of R^3 (fourth coordinate zero).
/// Faces are wound so the right-hand normal points outward.
pub fn icosphere(level: u32) -> Mesh {
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let verts = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let faces: [[usize; 3]; 20] = [
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    let mut points: Vec<Point> = verts
        .iter()
        .map(|v| {
            let p = Point::new(v[0], v[1], v[2], 0.0);
            p / p.norm()
        })
        .collect();
    let mut tris: Vec<[usize; 3]> = faces.to_vec();
    for _ in 0..level {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut new_tris = Vec::with_capacity(tris.len() * 4);
        let mut mid = |a: usize, b: usize, points: &mut Vec<Point>| -> usize {
            let key = (a.min(b), a.max(b));
            if let Some(&m) = midpoint.get(&key) {
                return m;
            }
            let p = (points[a] + points[b]) / 2.0;
            let p = p / p.norm();
            points.push(p);
            let m = points.len() - 1;
            midpoint.insert(key, m);
            m
        };
        for t in &tris {
            let ab = mid(t[0], t[1], &mut points);
            let bc = mid(t[1], t[2], &mut points);
            let ca = mid(t[2], t[0], &mut points);
            new_tris.push([t[0], ab, ca]);
            new_tris.push([t[1], bc, ab]);
            new_tris.push([t[2], ca, bc]);
            new_tris.push([ab, bc, ca]);
        }
        tris = new_tris;
    }
    let n = points.len();
    Mesh {
        points,
        tris,
        boundary: vec![false; n],
        chart: None,
        lift: None,
        periods: [None, None],
    }
}

/// Tensor grid on `[u0,u1] x [v0,v1]` with m_u x m_v cells, optionally periodic
/// per axis; each quad is split into two triangles with alternating diagonals.
/// Points are stored as chart coordinates only (chart field set, positions
/// must be mapped afterwards).
pub fn grid_chart(
    u_range: (f64, f64),
    v_range: (f64, f64),
    m_u: usize,
    m_v: usize,
    periodic_u: bool,
    periodic_v: bool,
) -> Mesh {
    let nu = if periodic_u { m_u } else { m_u + 1 };
    let nv = if periodic_v { m_v } else { m_v + 1 };
    let du = (u_range.1 - u_range.0) / m_u as f64;
    let dv = (v_range.1 - v_range.0) / m_v as f64;
    let idx = |i: usize, j: usize| -> usize {
        let ii = if periodic_u { i % m_u } else { i };
        let jj = if periodic_v { j % m_v } else { j };
        ii * nv + jj
    };
    let mut chart = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            chart.push([u_range.0 + i as f64 * du, v_range.0 + j as f64 * dv]);
        }
    }
    let mut tris = Vec::with_capacity(2 * m_u * m_v);
    let mut lift_uv: Vec<[[f64; 2]; 3]> = Vec::new();
    let uv = |i: usize, j: usize| -> [f64; 2] {
        [u_range.0 + i as f64 * du, v_range.0 + j as f64 * dv]
    };
    for i in 0..m_u {
        for j in 0..m_v {
            let a = idx(i, j);
            let b = idx(i + 1, j);
            let c = idx(i + 1, j + 1);
            let d = idx(i, j + 1);
            let (qa, qb, qc, qd) = (uv(i, j), uv(i + 1, j), uv(i + 1, j + 1), uv(i, j + 1));
            if (i + j) % 2 == 0 {
                tris.push([a, b, c]);
                tris.push([a, c, d]);
                lift_uv.push([qa, qb, qc]);
                lift_uv.push([qa, qc, qd]);
            } else {
                tris.push([a, b, d]);
                tris.push([b, c, d]);
                lift_uv.push([qa, qb, qd]);
                lift_uv.push([qb, qc, qd]);
            }
        }
    }
    let n = nu * nv;
    let periodic = periodic_u || periodic_v;
    let mut mesh = Mesh {
        points: vec![Point::zeros(); n],
        tris,
        boundary: vec![false; n],
        chart: Some(chart),
        lift: periodic.then(|| lift_uv.iter().map(|t| t.map(|[u, v]| Point::new(u, v, 0.0, 0.0))).collect()),
        periods: [
            periodic_u.then_some(u_range.1 - u_range.0),
            periodic_v.then_some(v_range.1 - v_range.0),
        ],
    };
    // stash the unwrapped chart coordinates in the lift's first two slots for
    // the caller to map into ambient positions
    mesh.rebuild_boundary().expect("grid meshes are manifold");
    mesh
}

/// Disc mesh on the closed unit disc: concentric rings j = 0..=m with 6j
/// nodes on ring j at radius j/m. Boundary = outermost ring. Chart
/// coordinates are the disc coordinates.
pub fn disc(m: usize) -> Mesh {
    assert!(m >= 1);
    let mut chart: Vec<[f64; 2]> = vec![[0.0, 0.0]];
    let mut ring_start = vec![0usize; m + 1];
    for j in 1..=m {
        ring_start[j] = chart.len();
        let count = 6 * j;
        let r = j as f64 / m as f64;
        for k in 0..count {
            let th = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
            chart.push([r * th.cos(), r * th.sin()]);
        }
    }
    let ring_count = |j: usize| if j == 0 { 1 } else { 6 * j };
    let ring_node = |j: usize, k: usize| {
        if j == 0 {
            0
        } else {
            ring_start[j] + k % (6 * j)
        }
    };
    let mut tris = Vec::new();
    for j in 1..=m {
        let outer = ring_count(j);
        if j == 1 {
            for k in 0..outer {
                tris.push([ring_node(1, k), ring_node(1, k + 1), 0]);
            }
            continue;
        }
        let inner = ring_count(j - 1);
        // walk around the annulus advancing whichever pointer lags in angle
        let mut ko = 0usize; // outer pointer
        let mut ki = 0usize; // inner pointer
        let angle = |count: usize, k: usize| 2.0 * std::f64::consts::PI * k as f64 / count as f64;
        while ko < outer || ki < inner {
            let next_outer = if ko < outer {
                angle(outer, ko + 1)
            } else {
                f64::INFINITY
            };
            let next_inner = if ki < inner {
                angle(inner, ki + 1)
            } else {
                f64::INFINITY
            };
            if next_outer <= next_inner {
                tris.push([
                    ring_node(j, ko),
                    ring_node(j, ko + 1),
                    ring_node(j - 1, ki),
                ]);
                ko += 1;
            } else {
                tris.push([
                    ring_node(j, ko),
                    ring_node(j - 1, ki + 1),
                    ring_node(j - 1, ki),
                ]);
                ki += 1;
            }
        }
    }
    let n = chart.len();
    let mut mesh = Mesh {
        points: vec![Point::zeros(); n],
        tris,
        boundary: vec![false; n],
        chart: Some(chart),
        lift: None,
        periods: [None, None],
    };
    mesh.rebuild_boundary().expect("disc mesh is manifold");
    mesh
}

/// Load an ASCII OFF triangle mesh (positions only).
pub fn load_off(path: &Path) -> Result<Mesh> {
    let text = std::fs::read_to_string(path)
        .map_err(|_| Error::MeshNotFound(path.display().to_string()))?;
    let tok: Vec<&str> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace)
        .collect();
    let get = |pos: usize, what: &str| -> Result<&str> {
        tok.get(pos)
            .copied()
            .ok_or_else(|| Error::MeshParse(format!("missing {what}")))
    };
    if get(0, "header")? != "OFF" {
        return Err(Error::MeshParse(format!(
            "expected OFF header, got `{}`",
            tok[0]
        )));
    }
    let parse_usize = |pos: usize, what: &str| -> Result<usize> {
        get(pos, what)?
            .parse()
            .map_err(|e| Error::MeshParse(format!("bad {what}: {e}")))
    };
    let parse_f64 = |pos: usize, what: &str| -> Result<f64> {
        get(pos, what)?
            .parse()
            .map_err(|e| Error::MeshParse(format!("bad {what}: {e}")))
    };
    let nv = parse_usize(1, "vertex count")?;
    let nf = parse_usize(2, "face count")?;
    let mut points = Vec::with_capacity(nv);
    for i in 0..nv {
        let base = 4 + 3 * i;
        let x = parse_f64(base, "vertex coordinate")?;
        let y = parse_f64(base + 1, "vertex coordinate")?;
        let z = parse_f64(base + 2, "vertex coordinate")?;
        points.push(Point::new(x, y, z, 0.0));
        let _ = i;
    }
    let mut pos = 4 + 3 * nv;
    let mut tris = Vec::with_capacity(nf);
    for f in 0..nf {
        let arity = parse_usize(pos, "face arity")?;
        if arity != 3 {
            return Err(Error::MeshParse(format!(
                "face {f} has {arity} vertices; only triangles are supported"
            )));
        }
        let mut t = [0usize; 3];
        for (k, slot) in t.iter_mut().enumerate() {
            *slot = parse_usize(pos + 1 + k, "face index")?;
            if *slot >= nv {
                return Err(Error::MeshParse(format!(
                    "face {f} references vertex {} of {nv}",
                    *slot
                )));
            }
        }
        pos += 4;
        tris.push(t);
    }
    let n = points.len();
    let mut mesh = Mesh {
        points,
        tris,
        boundary: vec![false; n],
        chart: None,
        lift: None,
        periods: [None, None],
    };
    mesh.rebuild_boundary()?;
    Ok(mesh)
}

/// Write an ASCII OFF triangle mesh (positions only, first three coordinates).
pub fn save_off(path: &Path, mesh: &Mesh) -> Result<()> {
    use std::io::Write;
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "OFF")?;
    writeln!(f, "{} {} 0", mesh.n_nodes(), mesh.n_tris())?;
    for p in &mesh.points {
        writeln!(f, "{:.17} {:.17} {:.17}", p[0], p[1], p[2])?;
    }
    for t in &mesh.tris {
        writeln!(f, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosphere_counts() {
        for level in 0..4u32 {
            let m = icosphere(level);
            let faces = 20 * 4usize.pow(level);
            assert_eq!(m.n_tris(), faces);
            assert_eq!(m.n_nodes(), faces / 2 + 2); // V = F/2 + 2 on a sphere
            for p in &m.points {
                assert!((p.norm() - 1.0).abs() < 1e-14);
            }
            assert!(m.boundary.iter().all(|&b| !b));
        }
    }

    #[test]
    fn icosphere_orientable_closed() {
        let mut m = icosphere(2);
        m.rebuild_boundary().unwrap();
        assert!(m.boundary.iter().all(|&b| !b));
    }

    #[test]
    fn periodic_grid_has_no_boundary() {
        let m = grid_chart((0.0, 1.0), (0.0, 1.0), 8, 8, true, true);
        assert_eq!(m.n_nodes(), 64);
        assert_eq!(m.n_tris(), 128);
        assert!(m.boundary.iter().all(|&b| !b));
    }

    #[test]
    fn open_grid_boundary() {
        let m = grid_chart((0.0, 1.0), (0.0, 2.0), 4, 8, false, false);
        assert_eq!(m.n_nodes(), 45);
        let nb = m.boundary.iter().filter(|&&b| b).count();
        assert_eq!(nb, 2 * 4 + 2 * 8); // perimeter nodes
    }

    #[test]
    fn cylinder_like_grid_boundary() {
        let m = grid_chart((0.0, 1.0), (0.0, 1.0), 8, 4, true, false);
        let nb = m.boundary.iter().filter(|&&b| b).count();
        assert_eq!(nb, 16); // two rings of 8
    }

    #[test]
    fn disc_mesh_shape() {
        let m = disc(4);
        assert_eq!(m.n_nodes(), 1 + 6 * (1 + 2 + 3 + 4));
        let nb = m.boundary.iter().filter(|&&b| b).count();
        assert_eq!(nb, 24);
        // Euler characteristic of a disc: V - E + F = 1
        let mut edges = std::collections::HashSet::new();
        for t in &m.tris {
            for e in 0..3 {
                let a = t[e];
                let b = t[(e + 1) % 3];
                edges.insert((a.min(b), a.max(b)));
            }
        }
        let chi = m.n_nodes() as i64 - edges.len() as i64 + m.n_tris() as i64;
        assert_eq!(chi, 1);
    }

    #[test]
    fn off_roundtrip() {
        let dir = std::env::temp_dir().join("rstab_mesh_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("ico.off");
        let m = icosphere(1);
        save_off(&path, &m).unwrap();
        let m2 = load_off(&path).unwrap();
        assert_eq!(m.n_nodes(), m2.n_nodes());
        assert_eq!(m.n_tris(), m2.n_tris());
        for (p, q) in m.points.iter().zip(&m2.points) {
            assert!((p - q).norm() < 1e-14);
        }
    }

    #[test]
    fn inconsistent_winding_detected() {
        let mut m = icosphere(0);
        m.tris[0].swap(0, 1); // flip one face against its neighbors
        assert!(matches!(m.rebuild_boundary(), Err(Error::NotOrientable)));
    }

    #[test]
    fn off_missing_file() {
        assert!(matches!(
            load_off(Path::new("/nonexistent/mesh.off")),
            Err(Error::MeshNotFound(_))
        ));
    }

    #[test]
    fn adjacency_two_ring() {
        let m = icosphere(1);
        let adj = adjacency(&m);
        for i in 0..m.n_nodes() {
            let deg = adj.nbrs[i].len();
            assert!(deg == 5 || deg == 6);
            let ring2 = two_ring(&adj, i);
            assert!(ring2.len() >= 10);
            assert!(!ring2.contains(&i));
        }
    }
}
