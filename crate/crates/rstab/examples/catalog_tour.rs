//! Tour of the catalog surfaces: discretize each and compare curvatures and
//! areas with the closed forms.
//!
//! Run: cargo run --release --example catalog_tour

use rstab::geometry::catalog::CatalogSurface;
use rstab::geometry::discretize::{discretize, discretize_with, GeometrySource};

fn main() {
    let pi = std::f64::consts::PI;
    let surfaces = vec![
        (CatalogSurface::Sphere { radius: 1.0 }, 3u32, Some(4.0 * pi)),
        (CatalogSurface::Hemisphere { radius: 1.0 }, 12, Some(2.0 * pi)),
        (
            CatalogSurface::Cylinder { radius: 0.5, height: 2.0 },
            16,
            Some(2.0 * pi),
        ),
        (
            CatalogSurface::FlatTorus { period: std::f64::consts::TAU, periodic: true },
            16,
            Some(std::f64::consts::TAU.powi(2)),
        ),
        (
            CatalogSurface::GeodesicSphere { radius: 1.0 },
            3,
            Some(4.0 * pi * 1.0f64.sinh().powi(2)),
        ),
        (CatalogSurface::Horosphere { extent: 1.0 }, 16, Some(4.0)),
        (CatalogSurface::Equidistant { distance: 0.5, extent: 1.0 }, 16, None),
        (
            CatalogSurface::CliffordTorus { a: std::f64::consts::FRAC_1_SQRT_2 },
            16,
            Some(2.0 * pi * pi), // 4 pi^2 a b with a = b = 1/sqrt(2)
        ),
    ];

    println!(
        "{:<28} {:>7} {:>6} {:>22} {:>12} {:>12}",
        "surface", "nodes", "bdry", "principal curvatures", "area", "exact"
    );
    for (cat, res, exact_area) in surfaces {
        let s = discretize(&cat.immersion().unwrap(), res).unwrap();
        let k = s.principal_curvatures(0);
        let area = s.total_area();
        println!(
            "{:<28} {:>7} {:>6} {:>10.4} {:>10.4} {:>12.5} {:>12}",
            cat.name(),
            s.n_nodes(),
            s.n_boundary(),
            k[0],
            k[1],
            area,
            exact_area.map_or("-".to_string(), |a| format!("{a:.5}")),
        );
    }

    println!("\nEstimated-geometry convergence on the unit sphere (curvature error):");
    let imm = CatalogSurface::Sphere { radius: 1.0 }.immersion().unwrap();
    let mut prev: Option<f64> = None;
    for level in [2u32, 3, 4] {
        let s = discretize_with(&imm, level, GeometrySource::MeshFit).unwrap();
        let mut worst = 0.0f64;
        for i in 0..s.n_nodes() {
            let k = s.principal_curvatures(i);
            worst = worst.max((k[0] - 1.0).abs()).max((k[1] - 1.0).abs());
        }
        let order = prev.map_or(String::from("    -"), |p: f64| format!("{:5.2}", (p / worst).log2()));
        println!("  level {level}: max |k - 1| = {worst:.3e}   observed order {order}");
        prev = Some(worst);
    }

    println!("\nr-area of the unit sphere: A_0 = {:.5} (4 pi = {:.5}), A_1 = {:.5} (8 pi = {:.5})",
        discretize(&imm, 4).unwrap().r_area(0).unwrap(),
        4.0 * pi,
        discretize(&imm, 4).unwrap().r_area(1).unwrap(),
        8.0 * pi,
    );
}
