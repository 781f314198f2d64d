//! First variation of S_{r+1} under normal variations: the centered
//! difference of S_{r+1} along x_t = exp(t f N) converges at second order in
//! t to L_r(f) + f trace(A^2 P_r) + f trace(P_r R_N).
//!
//! Run: cargo run --release --example linearization_check

use rstab::assembly::{linearization_residual, VariationRoute};
use rstab::geometry::catalog::CatalogSurface;
use rstab::geometry::discretize::discretize;
use rstab::geometry::variation::VariationFunction;
use rstab::geometry::Point;

fn main() {
    let imm = CatalogSurface::Sphere { radius: 1.0 }.immersion().unwrap();
    let s = discretize(&imm, 4).unwrap();
    println!("unit sphere, {} nodes\n", s.n_nodes());

    // degree-2 spherical harmonic sample
    let f = VariationFunction::closure(|p: &Point| p[2] * p[2] - 1.0 / 3.0);

    for r in [0usize, 1] {
        println!("r = {r}: d/dt S_{} vs L_{r}(f) + f q", r + 1);
        println!(
            "  {:>6} {:>16} {:>14} {:>8}",
            "t", "pointwise max", "operator L2", "order"
        );
        let mut prev: Option<f64> = None;
        for &t in &[0.4, 0.2, 0.1, 0.05] {
            let rep = linearization_residual(&s, r, &f, t, VariationRoute::LocalChart).unwrap();
            let (pw, _) = rep.residual_vs_pointwise(&s).unwrap();
            let order = prev.map_or(String::from("   -"), |p: f64| format!("{:6.2}", (p / pw).log2()));
            println!("  {t:>6.3} {pw:>16.4e} {:>14.4e} {order:>8}", rep.residual_l2_rel);
            prev = Some(pw);
        }
        println!();
    }

    println!("constant variation f = 1 (concentric spheres): dS_1/dt = |A|^2 = 2");
    let rep = linearization_residual(
        &s,
        0,
        &VariationFunction::closure(|_| 1.0),
        0.05,
        VariationRoute::LocalChart,
    )
    .unwrap();
    println!(
        "  lhs at a node = {:+.6}, rhs = {:+.6} (Hessian term vanishes)",
        rep.lhs[0], rep.rhs_operator[0]
    );

    println!("\nmesh route (nodal f, curvature re-estimated on the varied mesh):");
    let f_nodal = VariationFunction::nodal(s.sample(&|p: &Point| p[2] * p[2] - 1.0 / 3.0));
    let rep = linearization_residual(&s, 0, &f_nodal, 0.1, VariationRoute::Mesh).unwrap();
    println!(
        "  t = 0.1: weighted relative residual = {:.3e} (discretization-limited)",
        rep.residual_l2_rel
    );
}
