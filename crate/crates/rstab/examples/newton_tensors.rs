//! Elementary symmetric functions, Newton tensors, and admissibility.
//!
//! Run: cargo run --release --example newton_tensors

use nalgebra::DMatrix;
use rstab::newton::{
    admissibility, elementary_symmetric, newton_tensor, trace_identities_report, CurvatureSpectrum,
};

fn main() {
    println!("=== Curvature spectra and S_r ===\n");
    let spectrum = CurvatureSpectrum::new(&[0.3, -1.7, 2.2, 0.9]).unwrap();
    for r in 0..=4 {
        println!("  S_{r} = {:+.6}", spectrum.elementary(r));
    }
    println!("  H_2 = {:+.6}", spectrum.mean_curvature(2));
    println!(
        "  S_2 with k_1 removed (restricted): {:+.6}\n",
        spectrum.restricted(0, 2).unwrap()
    );

    println!("=== Newton tensors of diag(1, 2, 3) ===\n");
    let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0, 3.0]));
    for r in 0..=2 {
        let p = newton_tensor(&a, r).unwrap();
        let d: Vec<f64> = (0..3).map(|i| p.matrix[(i, i)]).collect();
        println!("  P_{r} = diag({:.1}, {:.1}, {:.1}),  S_{r} = {:.1}", d[0], d[1], d[2], p.s[r]);
    }

    println!("\n=== Trace identities (residuals should be at round-off) ===\n");
    for r in 1..=2 {
        let rep = trace_identities_report(&a, r).unwrap();
        println!(
            "  r = {r}: |tr P_r - (n-r)S_r| = {:.2e}, |tr AP_r - (r+1)S_r+1| = {:.2e},",
            rep.trace_pr, rep.trace_apr
        );
        println!(
            "          |tr A^2P_r - (S_1 S_r+1 - (r+2)S_r+2)| = {:.2e}, restricted-sum = {:.2e}",
            rep.trace_a2pr, rep.restricted_sum
        );
    }

    println!("\n=== Admissibility of shape-operator fields (n = 2) ===\n");
    let cases: Vec<(&str, Vec<DMatrix<f64>>)> = vec![
        (
            "round sphere (A = I)",
            (0..8).map(|_| DMatrix::identity(2, 2)).collect(),
        ),
        (
            "flat plane (A = 0)",
            (0..8).map(|_| DMatrix::zeros(2, 2)).collect(),
        ),
        (
            "cylinder (k = (1, 0))",
            (0..8)
                .map(|_| DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.0])))
                .collect(),
        ),
    ];
    for (name, field) in cases {
        let adm = admissibility(&field, 1, None).unwrap();
        println!(
            "  {name}: admissible = {}, P_1 is {}, sign = {:+}, margin = {:.3}",
            adm.admissible, adm.class.tag, adm.sign, adm.class.margin
        );
        println!(
            "    criteria: H_2>0 = {}, H_r+1>0 with elliptic node = {}, H_r+1=0 & rank>r = {}",
            adm.criteria.h2_positive,
            adm.criteria.hr1_positive_with_elliptic_point,
            adm.criteria.hr1_zero_full_rank
        );
    }

    println!("\n=== Stability of the S_r recurrence (against brute force) ===\n");
    let k = [0.3, -1.7, 2.2, 0.9];
    println!(
        "  S_3(0.3, -1.7, 2.2, 0.9) = {:+.12} (brute-force subset sum gives -4.353)",
        elementary_symmetric(&k, 3)
    );
}
