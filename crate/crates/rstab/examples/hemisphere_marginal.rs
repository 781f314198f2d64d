//! The hemisphere sits exactly on the stability boundary: the first
//! Dirichlet eigenvalue of -Delta equals |A|^2, so the stability operator is
//! marginal and the verdict is reported as inconclusive rather than forced.
//!
//! Run: cargo run --release --example hemisphere_marginal

use rstab::assembly::{assemble_tr, AssemblyOptions};
use rstab::geometry::catalog::CatalogSurface;
use rstab::geometry::discretize::discretize;
use rstab::spectral::{
    principal_eigen_selfadjoint, stability_certificate, CertificateMode, CertificateOptions,
    SolverOptions,
};

fn main() {
    println!("=== Hemisphere: lambda under refinement ===\n");
    let mut lambdas = Vec::new();
    for res in [12u32, 24, 48] {
        let imm = CatalogSurface::Hemisphere { radius: 1.0 }.immersion().unwrap();
        let s = discretize(&imm, res).unwrap();
        let op = assemble_tr(&s, 0, &AssemblyOptions::default()).unwrap();
        let sol = principal_eigen_selfadjoint(&op, &SolverOptions::default()).unwrap();
        println!(
            "  resolution {res:>2}: {} nodes, lambda = {:+.6e}",
            s.n_nodes(),
            sol.lambda
        );
        lambdas.push(sol.lambda);
    }
    let margin = 10.0 * (lambdas[2] - lambdas[1]).abs();
    println!("\n  two-level margin tolerance: {margin:.3e}");

    let imm = CatalogSurface::Hemisphere { radius: 1.0 }.immersion().unwrap();
    let s = discretize(&imm, 48).unwrap();
    let op = assemble_tr(&s, 0, &AssemblyOptions::default()).unwrap();
    let cert = stability_certificate(
        &op,
        CertificateMode::Eigen,
        &CertificateOptions {
            margin_tol: margin,
            ..Default::default()
        },
    )
    .unwrap();
    println!("  verdict: {}\n", cert.verdict);

    println!("=== Strict caps are stable (domain monotonicity) ===\n");
    println!("  cap = nodes above height z_min; eigenvalues grow as the cap shrinks\n");
    println!("  {:>6} {:>12} {:>14}", "z_min", "lambda", "verdict");
    for z_min in [0.0, 0.2, 0.4, 0.6] {
        let mask: Vec<bool> = (0..s.n_nodes())
            .map(|i| s.mesh.boundary[i] || s.mesh.points[i][2] < z_min)
            .collect();
        let cap = op.with_mask(mask);
        let cert = stability_certificate(
            &cap,
            CertificateMode::Eigen,
            &CertificateOptions {
                margin_tol: margin,
                ..Default::default()
            },
        )
        .unwrap();
        println!(
            "  {z_min:>6.2} {:>12.6} {:>14}",
            cert.lambda.unwrap(),
            cert.verdict.to_string()
        );
    }

    println!("\n=== A supersolution witness on a strict cap ===\n");
    let mask: Vec<bool> = (0..s.n_nodes())
        .map(|i| s.mesh.boundary[i] || s.mesh.points[i][2] < 0.4)
        .collect();
    let cap = op.with_mask(mask);
    let cert = stability_certificate(
        &cap,
        CertificateMode::Supersolution,
        &CertificateOptions::default(),
    )
    .unwrap();
    println!("  method: {}", cert.method);
    println!("  verdict: {}", cert.verdict);
    println!("  witness re-verified: {}", cert.reverify(&cap).unwrap());
}
