//! Elementary symmetric functions, Newton tensors, and admissibility.
//!
//! All operations are pure functions on immutable inputs and are generic in
//! the dimension n (capped at 16). The elementary symmetric functions S_r are
//! evaluated with the one-pass polynomial-coefficient recurrence (coefficients
//! of prod(1 + k_i t)); the Newton tensors P_r use the trace recursion
//! S_j = trace(A P_{j-1}) / j, P_j = S_j I - A P_{j-1}, so no eigendecomposition
//! is needed on the main path. Brute-force subset sums and eigen-based routes
//! live in the tests as independent oracles.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 16;

/// Binomial coefficient as f64 (n small).
pub fn binomial(n: usize, r: usize) -> f64 {
    if r > n {
        return 0.0;
    }
    let r = r.min(n - r);
    let mut acc = 1.0f64;
    for i in 0..r {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// S_r of the given values via the polynomial-coefficient recurrence.
///
/// Total on any input: S_0 = 1 and S_r = 0 for r > len.
pub fn elementary_symmetric(k: &[f64], r: usize) -> f64 {
    if r == 0 {
        return 1.0;
    }
    if r > k.len() {
        return 0.0;
    }
    elementary_symmetric_all(k)[r]
}

/// All of S_0 .. S_n in one pass.
pub fn elementary_symmetric_all(k: &[f64]) -> Vec<f64> {
    let n = k.len();
    let mut e = vec![0.0; n + 1];
    e[0] = 1.0;
    for (i, &ki) in k.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            e[j] += ki * e[j - 1];
        }
    }
    e
}

/// Ordered principal curvatures at a sample point, with derived S_r and H_r.
#[derive(Debug, Clone)]
pub struct CurvatureSpectrum {
    k: Vec<f64>,
}

impl CurvatureSpectrum {
    pub fn new(k: &[f64]) -> Result<Self> {
        let n = k.len();
        if n < 1 || n > MAX_DIM {
            return Err(Error::UnsupportedDimension {
                n,
                min: 1,
                max: MAX_DIM,
            });
        }
        Ok(Self { k: k.to_vec() })
    }

    pub fn n(&self) -> usize {
        self.k.len()
    }

    pub fn k(&self) -> &[f64] {
        &self.k
    }

    /// S_r.
    pub fn elementary(&self, r: usize) -> f64 {
        elementary_symmetric(&self.k, r)
    }

    /// H_r = S_r / binom(n, r).
    pub fn mean_curvature(&self, r: usize) -> f64 {
        if r > self.n() {
            return 0.0;
        }
        self.elementary(r) / binomial(self.n(), r)
    }

    /// S_r(A_i): the r-th symmetric function with k_i removed (i zero-based).
    pub fn restricted(&self, i: usize, r: usize) -> Result<f64> {
        if i >= self.n() {
            return Err(Error::IndexOutOfRange {
                index: i,
                n: self.n(),
            });
        }
        let reduced: Vec<f64> = self
            .k
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &v)| v)
            .collect();
        Ok(elementary_symmetric(&reduced, r))
    }
}

/// S_r(A_i) for a raw spectrum (i zero-based).
pub fn restricted_symmetric(k: &[f64], i: usize, r: usize) -> Result<f64> {
    CurvatureSpectrum::new(k)?.restricted(i, r)
}

/// A Newton tensor P_r together with its order and the S_1..S_r it consumed.
#[derive(Debug, Clone)]
pub struct NewtonTensor {
    pub n: usize,
    pub r: usize,
    pub matrix: DMatrix<f64>,
    /// S_0 .. S_r from the trace recursion.
    pub s: Vec<f64>,
}

fn check_symmetric(a: &DMatrix<f64>, tol: f64) -> Result<()> {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    if worst > tol {
        return Err(Error::NonSymmetricInput {
            asymmetry: worst,
            tol,
        });
    }
    Ok(())
}

/// P_r by the recursion P_0 = I, P_j = S_j I - A P_{j-1}.
///
/// S_j is taken from traces (S_j = trace(A P_{j-1}) / j), which is Newton's
/// identity in recursive form; this avoids an eigendecomposition of A.
pub fn newton_tensor(a: &DMatrix<f64>, r: usize) -> Result<NewtonTensor> {
    let seq = newton_tensor_sequence(a, r)?;
    Ok(seq.into_iter().last().expect("nonempty sequence"))
}

/// P_0 .. P_r in one sweep of the recursion.
pub fn newton_tensor_sequence(a: &DMatrix<f64>, r_max: usize) -> Result<Vec<NewtonTensor>> {
    let n = a.nrows();
    if n == 0 || n > MAX_DIM {
        return Err(Error::UnsupportedDimension {
            n,
            min: 1,
            max: MAX_DIM,
        });
    }
    if a.ncols() != n {
        return Err(Error::BadParams(format!(
            "shape operator must be square, got {}x{}",
            n,
            a.ncols()
        )));
    }
    if r_max > n {
        return Err(Error::BadParams(format!("r = {r_max} exceeds dimension {n}")));
    }
    check_symmetric(a, 1e-10 * (1.0 + a.amax()))?;

    let mut out = Vec::with_capacity(r_max + 1);
    let mut p = DMatrix::<f64>::identity(n, n);
    let mut s = vec![1.0f64];
    out.push(NewtonTensor {
        n,
        r: 0,
        matrix: p.clone(),
        s: s.clone(),
    });
    for j in 1..=r_max {
        let ap = a * &p;
        let s_j = ap.trace() / j as f64;
        s.push(s_j);
        p = DMatrix::<f64>::identity(n, n) * s_j - ap;
        out.push(NewtonTensor {
            n,
            r: j,
            matrix: p.clone(),
            s: s.clone(),
        });
    }
    Ok(out)
}

/// The four absolute residuals of the trace identities for (A, r):
///
/// |trace(P_r) - (n-r) S_r|, |trace(A P_r) - (r+1) S_{r+1}|,
/// |trace(A^2 P_r) - (S_1 S_{r+1} - (r+2) S_{r+2})|, and
/// |sum_i S_r(A_i) - (n-r) S_r|.
#[derive(Debug, Clone)]
pub struct TraceIdentityReport {
    pub trace_pr: f64,
    pub trace_apr: f64,
    pub trace_a2pr: f64,
    pub restricted_sum: f64,
}

impl TraceIdentityReport {
    pub fn max_residual(&self) -> f64 {
        self.trace_pr
            .max(self.trace_apr)
            .max(self.trace_a2pr)
            .max(self.restricted_sum)
    }
}

pub fn trace_identities_report(a: &DMatrix<f64>, r: usize) -> Result<TraceIdentityReport> {
    let n = a.nrows();
    let p = newton_tensor(a, r)?;
    // S-values from the eigenvalue route, independent of the recursion.
    let eig = SymmetricEigen::new(a.clone());
    let k: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let spectrum = CurvatureSpectrum::new(&k)?;
    let s_r = spectrum.elementary(r);
    let s_r1 = spectrum.elementary(r + 1);
    let s_r2 = spectrum.elementary(r + 2);
    let s_1 = spectrum.elementary(1);

    let trace_pr = (p.matrix.trace() - (n - r) as f64 * s_r).abs();
    let apr = a * &p.matrix;
    let trace_apr = (apr.trace() - (r + 1) as f64 * s_r1).abs();
    let a2pr = a * &apr;
    let trace_a2pr = (a2pr.trace() - (s_1 * s_r1 - (r + 2) as f64 * s_r2)).abs();
    let mut rsum = 0.0;
    for i in 0..n {
        rsum += spectrum.restricted(i, r)?;
    }
    let restricted_sum = (rsum - (n - r) as f64 * s_r).abs();

    Ok(TraceIdentityReport {
        trace_pr,
        trace_apr,
        trace_a2pr,
        restricted_sum,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Definiteness {
    Positive,
    Negative,
    Indefinite,
    Degenerate,
}

impl std::fmt::Display for Definiteness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Definiteness::Positive => "positive definite",
            Definiteness::Negative => "negative definite",
            Definiteness::Indefinite => "indefinite",
            Definiteness::Degenerate => "degenerate",
        };
        f.write_str(s)
    }
}

/// Joint definiteness of a tensor field over all sampled nodes.
#[derive(Debug, Clone)]
pub struct DefinitenessClass {
    pub tag: Definiteness,
    /// min over nodes of min |eigenvalue|.
    pub margin: f64,
}

/// Classify a field of symmetric operators over all sampled nodes jointly.
pub fn classify_definiteness(field: &[DMatrix<f64>], tol: f64) -> Result<DefinitenessClass> {
    if field.is_empty() {
        return Err(Error::EmptyField);
    }
    let mut min_eig = f64::INFINITY;
    let mut max_eig = f64::NEG_INFINITY;
    let mut min_abs = f64::INFINITY;
    for m in field {
        let eig = SymmetricEigen::new(m.clone());
        for &l in eig.eigenvalues.iter() {
            min_eig = min_eig.min(l);
            max_eig = max_eig.max(l);
            min_abs = min_abs.min(l.abs());
        }
    }
    let tag = if min_abs <= tol {
        Definiteness::Degenerate
    } else if min_eig > tol {
        Definiteness::Positive
    } else if max_eig < -tol {
        Definiteness::Negative
    } else {
        Definiteness::Indefinite
    };
    Ok(DefinitenessClass { tag, margin: min_abs })
}

/// Which sufficient admissibility criteria hold (informational; the direct
/// definiteness test is authoritative).
#[derive(Debug, Clone, Copy, Default)]
pub struct CriteriaReport {
    /// (a) r = 1 and H_2 > 0 at every node.
    pub h2_positive: bool,
    /// (b) H_{r+1} > 0 everywhere (after a proper orientation) and some node
    /// has all principal curvatures positive in that orientation.
    pub hr1_positive_with_elliptic_point: bool,
    /// (c) H_{r+1} = 0 everywhere and rank(A) > r everywhere.
    pub hr1_zero_full_rank: bool,
}

#[derive(Debug, Clone)]
pub struct Admissibility {
    pub admissible: bool,
    /// +1 when P_r is positive definite, -1 when negative definite, 0 otherwise.
    pub sign: f64,
    pub criteria: CriteriaReport,
    pub class: DefinitenessClass,
    pub tol: f64,
}

/// Scale-aware default tolerance: P_r entries scale like curvature^r.
pub fn default_definiteness_tol(shape_ops: &[DMatrix<f64>], r: usize) -> f64 {
    let max_k = shape_ops.iter().map(nalgebra::DMatrix::amax).fold(0.0, f64::max);
    1e-9 * (1.0 + max_k).powi(r as i32)
}

/// Run the direct definiteness test on the P_r field of a shape-operator
/// field, and report which sufficient criteria hold.
pub fn admissibility(shape_ops: &[DMatrix<f64>], r: usize, tol: Option<f64>) -> Result<Admissibility> {
    if shape_ops.is_empty() {
        return Err(Error::EmptyField);
    }
    let tol = tol.unwrap_or_else(|| default_definiteness_tol(shape_ops, r));
    let mut p_field = Vec::with_capacity(shape_ops.len());
    let mut spectra = Vec::with_capacity(shape_ops.len());
    for a in shape_ops {
        let p = newton_tensor(a, r)?;
        p_field.push(p.matrix);
        let eig = SymmetricEigen::new(a.clone());
        spectra.push(CurvatureSpectrum::new(eig.eigenvalues.as_slice())?);
    }
    let class = classify_definiteness(&p_field, tol)?;
    let admissible = matches!(class.tag, Definiteness::Positive | Definiteness::Negative);
    let sign = match class.tag {
        Definiteness::Positive => 1.0,
        Definiteness::Negative => -1.0,
        _ => 0.0,
    };

    let h2_positive = r == 1 && spectra.iter().all(|s| s.mean_curvature(2) > 0.0);
    let hr1_positive = |flip: f64| {
        let all_pos = spectra
            .iter()
            .all(|s| flip.powi((r + 1) as i32) * s.elementary(r + 1) > 0.0);
        let elliptic = spectra.iter().any(|s| s.k().iter().all(|&ki| flip * ki > 0.0));
        all_pos && elliptic
    };
    let hr1_positive_with_elliptic_point = hr1_positive(1.0) || hr1_positive(-1.0);
    let hr1_zero_full_rank = spectra.iter().all(|s| {
        let scale = 1.0 + s.k().iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        s.elementary(r + 1).abs() <= tol * scale
            && s.k().iter().filter(|&&ki| ki.abs() > tol).count() > r
    });

    Ok(Admissibility {
        admissible,
        sign,
        criteria: CriteriaReport {
            h2_positive,
            hr1_positive_with_elliptic_point,
            hr1_zero_full_rank,
        },
        class,
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    /// Independent oracle: brute-force sum over all r-subsets.
    fn brute_elementary(k: &[f64], r: usize) -> f64 {
        fn rec(k: &[f64], start: usize, r: usize, prod: f64, acc: &mut f64) {
            if r == 0 {
                *acc += prod;
                return;
            }
            for i in start..k.len() {
                rec(k, i + 1, r - 1, prod * k[i], acc);
            }
        }
        if r == 0 {
            return 1.0;
        }
        if r > k.len() {
            return 0.0;
        }
        let mut acc = 0.0;
        rec(k, 0, r, 1.0, &mut acc);
        acc
    }

    fn random_symmetric(rng: &mut SplitMix64, n: usize) -> DMatrix<f64> {
        let mut m = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = rng.uniform(-1.0, 1.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    #[test]
    fn elementary_trivial_values() {
        assert_eq!(elementary_symmetric(&[1.0, 1.0, 1.0], 2), 3.0);
        assert_eq!(elementary_symmetric(&[1.0, 2.0, 3.0], 2), 11.0);
        assert_eq!(elementary_symmetric(&[1.0, 2.0], 0), 1.0);
        assert_eq!(elementary_symmetric(&[1.0, 2.0], 5), 0.0);
    }

    #[test]
    fn elementary_matches_brute_force() {
        // Frozen from the subset-enumeration oracle:
        // S_3(0.3, -1.7, 2.2, 0.9) = -1.122 - 0.459 + 0.594 - 3.366 = -4.353
        let k = [0.3, -1.7, 2.2, 0.9];
        let oracle = brute_elementary(&k, 3);
        assert!((oracle - (-4.353)).abs() < 1e-12);
        let got = elementary_symmetric(&k, 3);
        assert!((got - oracle).abs() <= 1e-12 * oracle.abs());

        let mut rng = SplitMix64::new(11);
        for _ in 0..50 {
            let n = 2 + rng.next_usize(9); // up to 10
            let k: Vec<f64> = (0..n).map(|_| rng.uniform(-2.0, 2.0)).collect();
            for r in 0..=n {
                let a = elementary_symmetric(&k, r);
                let b = brute_elementary(&k, r);
                let scale = 1.0f64.max(b.abs());
                assert!((a - b).abs() <= 1e-12 * scale, "n={n} r={r}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn restricted_values() {
        let s = CurvatureSpectrum::new(&[1.0, 2.0, 3.0]).unwrap();
        // i is zero-based: drop k_2 = 2.0
        assert_eq!(s.restricted(1, 2).unwrap(), 3.0);
        let s = CurvatureSpectrum::new(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.restricted(0, 3).unwrap(), 24.0);
        // umbilic closed form binom(n-1, r) c^r
        let c = 0.7;
        let s = CurvatureSpectrum::new(&[c; 6]).unwrap();
        for i in 0..6 {
            for r in 0..=5 {
                let expect = binomial(5, r) * c.powi(r as i32);
                assert!((s.restricted(i, r).unwrap() - expect).abs() < 1e-12);
            }
        }
        assert!(s.restricted(6, 1).is_err());
    }

    #[test]
    fn newton_tensor_trivial() {
        // P_1 = S_1 I - A for a diagonal shape operator
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0, 3.0]));
        let p1 = newton_tensor(&a, 1).unwrap();
        let expect = [5.0, 4.0, 3.0];
        for i in 0..3 {
            assert!((p1.matrix[(i, i)] - expect[i]).abs() < 1e-13);
        }
        // identity: P_r = binom(n-1, r) I
        for n in 2..=6 {
            let a = DMatrix::<f64>::identity(n, n);
            for r in 0..=n - 1 {
                let p = newton_tensor(&a, r).unwrap();
                for i in 0..n {
                    assert!((p.matrix[(i, i)] - binomial(n - 1, r)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn newton_tensor_eigenvalues_are_restricted_symmetric() {
        // P_r e_i = S_r(A_i) e_i. Oracle: diagonalize A, drop one
        // eigenvalue, brute-force the r-subset sums.
        let mut rng = SplitMix64::new(5);
        let a = random_symmetric(&mut rng, 5);
        let p3 = newton_tensor(&a, 3).unwrap();
        let eig = SymmetricEigen::new(a.clone());
        for i in 0..5 {
            let v = eig.eigenvectors.column(i);
            let pv = &p3.matrix * v;
            let reduced: Vec<f64> = (0..5)
                .filter(|&j| j != i)
                .map(|j| eig.eigenvalues[j])
                .collect();
            let expect = brute_elementary(&reduced, 3);
            let got = v.dot(&pv);
            assert!(
                (got - expect).abs() < 1e-10 * (1.0 + expect.abs()),
                "eigenvalue mismatch: {got} vs {expect}"
            );
        }
    }

    #[test]
    fn non_symmetric_rejected() {
        let mut a = DMatrix::<f64>::zeros(3, 3);
        a[(0, 1)] = 1.0;
        assert!(matches!(
            newton_tensor(&a, 1),
            Err(Error::NonSymmetricInput { .. })
        ));
    }

    #[test]
    fn trace_identities_diag123() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0, 3.0]));
        let rep = trace_identities_report(&a, 1).unwrap();
        assert!(rep.max_residual() <= 1e-12, "residuals {rep:?}");
        // trace(A^2 P_1) = 48 for this spectrum
        let p1 = newton_tensor(&a, 1).unwrap();
        let a2p = &a * &a * &p1.matrix;
        assert!((a2p.trace() - 48.0).abs() < 1e-12);
    }

    #[test]
    fn trace_identities_zero_matrix() {
        let a = DMatrix::<f64>::zeros(4, 4);
        for r in 1..4 {
            let rep = trace_identities_report(&a, r).unwrap();
            assert_eq!(rep.max_residual(), 0.0);
        }
    }

    #[test]
    fn trace_identities_random_battery() {
        let mut rng = SplitMix64::new(2024);
        for _ in 0..100 {
            let n = 2 + rng.next_usize(7); // 2..=8
            let a = random_symmetric(&mut rng, n);
            for r in 1..n {
                let rep = trace_identities_report(&a, r).unwrap();
                assert!(
                    rep.max_residual() <= 1e-10,
                    "n={n} r={r}: {:?}",
                    rep
                );
            }
        }
    }

    #[test]
    fn spectrum_and_trace_recursion_agree() {
        // S_r from the coefficient recurrence on the eigenvalues matches the
        // S_r produced by the P_r trace recursion, to 1e-12 relative
        let mut rng = SplitMix64::new(0x5eed5);
        for _ in 0..30 {
            let n = 2 + rng.next_usize(7);
            let k: Vec<f64> = (0..n).map(|_| rng.uniform(-2.0, 2.0)).collect();
            let a = DMatrix::from_fn(n, n, |i, j| if i == j { k[i] } else { 0.0 });
            let seq = newton_tensor_sequence(&a, n).unwrap();
            let spectrum = CurvatureSpectrum::new(&k).unwrap();
            for r in 0..=n {
                let via_traces = seq[n].s[r];
                let via_spectrum = spectrum.elementary(r);
                let scale = 1.0f64.max(via_spectrum.abs());
                assert!(
                    (via_traces - via_spectrum).abs() <= 1e-12 * scale,
                    "n={n} r={r}: {via_traces} vs {via_spectrum}"
                );
            }
        }
    }

    #[test]
    fn orientation_flip_parity() {
        let mut rng = SplitMix64::new(9);
        for _ in 0..20 {
            let n = 2 + rng.next_usize(5);
            let a = random_symmetric(&mut rng, n);
            let neg = -a.clone();
            for r in 0..=n - 1 {
                let p = newton_tensor(&a, r).unwrap();
                let pn = newton_tensor(&neg, r).unwrap();
                let parity = (-1.0f64).powi(r as i32);
                // S_r -> (-1)^r S_r
                assert!((pn.s[r] - parity * p.s[r]).abs() < 1e-10 * (1.0 + p.s[r].abs()));
                // P_r -> (-1)^r P_r
                let diff = (&pn.matrix - &p.matrix * parity).amax();
                assert!(diff < 1e-10 * (1.0 + p.matrix.amax()));
            }
        }
    }

    #[test]
    fn classify_fields() {
        let umbilic = |c: f64| DMatrix::<f64>::identity(2, 2) * c;
        // P_1 field of a round sphere: margin = binom(n-1,1)/rho = 1/rho for n=2
        let rho = 2.0;
        let field: Vec<DMatrix<f64>> = (0..10).map(|_| umbilic(1.0 / rho)).collect();
        let c = classify_definiteness(&field, 1e-9).unwrap();
        assert_eq!(c.tag, Definiteness::Positive);
        assert!((c.margin - 1.0 / rho).abs() < 1e-14);

        let mixed = vec![umbilic(1.0), umbilic(-1.0)];
        assert_eq!(
            classify_definiteness(&mixed, 1e-9).unwrap().tag,
            Definiteness::Indefinite
        );

        let singular = vec![umbilic(1.0), DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.0]))];
        assert_eq!(
            classify_definiteness(&singular, 1e-9).unwrap().tag,
            Definiteness::Degenerate
        );

        assert!(matches!(
            classify_definiteness(&[], 1e-9),
            Err(Error::EmptyField)
        ));
    }

    #[test]
    fn admissibility_sphere_plane_cylinder() {
        // Unit sphere in R^3: A = I (n = 2), r = 1 -> admissible, +1, criteria a and b.
        let sphere: Vec<DMatrix<f64>> = (0..6).map(|_| DMatrix::<f64>::identity(2, 2)).collect();
        let adm = admissibility(&sphere, 1, None).unwrap();
        assert!(adm.admissible);
        assert_eq!(adm.sign, 1.0);
        assert!(adm.criteria.h2_positive);
        assert!(adm.criteria.hr1_positive_with_elliptic_point);

        // Flat plane: P_1 = 0, degenerate, not admissible.
        let plane: Vec<DMatrix<f64>> = (0..6).map(|_| DMatrix::<f64>::zeros(2, 2)).collect();
        let adm = admissibility(&plane, 1, None).unwrap();
        assert!(!adm.admissible);
        assert_eq!(adm.class.tag, Definiteness::Degenerate);

        // Cylinder k = (1, 0): P_1 = diag(0, 1) degenerate -> not admissible.
        let cyl: Vec<DMatrix<f64>> = (0..6)
            .map(|_| DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.0])))
            .collect();
        let adm = admissibility(&cyl, 1, None).unwrap();
        assert!(!adm.admissible);
        assert_eq!(adm.class.tag, Definiteness::Degenerate);
    }
}
