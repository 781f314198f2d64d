//! The geodesic-ball lower bound: for surfaces satisfying the pinching
//! hypothesis 0 < trace(P_r A^2)/trace(P_r) <= -Sec, the principal eigenvalue
//! over a ball-preimage component Omega obeys
//!     lambda(Omega) >= (2/R^2)((n-r) inf S_r - (r+1)|S_{r+1}| R).
//!
//! Run: cargo run --release --example ball_lower_bound

use rstab::bounds::{ball_domain, pinching_check, verify_bound, VerifyOptions};
use rstab::geometry::catalog::CatalogSurface;
use rstab::geometry::discretize::discretize;
use rstab::geometry::Point;

fn main() {
    println!("=== Pinching hypothesis ===\n");
    let fixtures: Vec<(&str, rstab::geometry::DiscreteSurface, Point)> = vec![
        (
            "horosphere",
            discretize(&CatalogSurface::Horosphere { extent: 1.0 }.immersion().unwrap(), 24).unwrap(),
            Point::new(1.0, 0.0, 0.0, 0.0),
        ),
        (
            "equidistant d=0.5",
            discretize(
                &CatalogSurface::Equidistant { distance: 0.5, extent: 1.0 }.immersion().unwrap(),
                24,
            )
            .unwrap(),
            Point::new(0.5f64.cosh(), 0.0, 0.0, 0.5f64.sinh()),
        ),
        (
            "sphere in R^3",
            discretize(&CatalogSurface::Sphere { radius: 1.0 }.immersion().unwrap(), 3).unwrap(),
            Point::new(0.0, 0.0, 1.0, 0.0),
        ),
    ];
    for (name, s, _) in &fixtures {
        let pin = pinching_check(s, 0).unwrap();
        println!(
            "  {name:<18} ratio in [{:.4}, {:.4}] vs -Sec = {:+.1}: holds = {}",
            pin.min_ratio, pin.worst_ratio, -pin.sec_infimum, pin.holds
        );
    }

    println!("\n=== Bound vs computed eigenvalue (r = 0) ===\n");
    println!(
        "  {:<18} {:>5} {:>12} {:>12} {:>12} {:>7}",
        "surface", "R", "lambda", "bound", "slack", "pass"
    );
    for (name, s, center) in &fixtures[..2] {
        for radius in [0.3, 0.5, 0.8] {
            let ball = ball_domain(s, center, radius).unwrap();
            let v = verify_bound(s, 0, &ball, &VerifyOptions::default()).unwrap();
            println!(
                "  {name:<18} {radius:>5.2} {:>12.4} {:>12.4} {:>12.4} {:>7}",
                v.lambda, v.bound.operative, v.slack, v.pass
            );
        }
    }

    println!("\n=== The proof's own test function f = R^2 - rho^2 ===\n");
    let (name, s, center) = &fixtures[0];
    let ball = ball_domain(s, center, 0.5).unwrap();
    let v = verify_bound(s, 0, &ball, &VerifyOptions::default()).unwrap();
    println!("  {name}, R = 0.5:");
    println!("    f > 0 on the interior of Omega: {}", v.proof_function_positive);
    println!(
        "    Collatz-Wielandt value of f: {:.4} <= lambda = {:.4}",
        v.cw_of_proof_function, v.lambda
    );
    println!(
        "    (the closed-form bound at R = 0.5 is (2/R^2)(2 - 2R) = {:.1})",
        v.bound.operative
    );

    println!("\n=== Pinching gate: the Euclidean sphere is rejected ===\n");
    let (_, s, center) = &fixtures[2];
    let ball = ball_domain(s, center, 0.5).unwrap();
    match verify_bound(s, 0, &ball, &VerifyOptions::default()) {
        Err(e) => println!("  verify_bound: {e}"),
        Ok(_) => println!("  unexpected pass"),
    }
}
