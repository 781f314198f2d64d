//! Small helpers for symmetric 2x2 matrices stored as [[f64; 2]; 2].

pub type Mat2 = [[f64; 2]; 2];

pub const IDENTITY: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

pub fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

pub fn matvec(a: &Mat2, x: &[f64; 2]) -> [f64; 2] {
    [
        a[0][0] * x[0] + a[0][1] * x[1],
        a[1][0] * x[0] + a[1][1] * x[1],
    ]
}

pub fn add(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [a[0][0] + b[0][0], a[0][1] + b[0][1]],
        [a[1][0] + b[1][0], a[1][1] + b[1][1]],
    ]
}

pub fn scale(a: &Mat2, s: f64) -> Mat2 {
    [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]]
}

pub fn trace(a: &Mat2) -> f64 {
    a[0][0] + a[1][1]
}

pub fn det(a: &Mat2) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

pub fn transpose(a: &Mat2) -> Mat2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

pub fn symmetrize(a: &Mat2) -> (Mat2, f64) {
    let asym = (a[0][1] - a[1][0]).abs();
    let m = 0.5 * (a[0][1] + a[1][0]);
    ([[a[0][0], m], [m, a[1][1]]], asym)
}

pub fn inverse(a: &Mat2) -> Option<Mat2> {
    let d = det(a);
    if d.abs() < 1e-300 {
        return None;
    }
    Some([
        [a[1][1] / d, -a[0][1] / d],
        [-a[1][0] / d, a[0][0] / d],
    ])
}

/// Adjugate: for a 2x2 shape operator this is exactly P_1 = S_1 I - A.
pub fn adjugate(a: &Mat2) -> Mat2 {
    [[a[1][1], -a[0][1]], [-a[1][0], a[0][0]]]
}

/// Eigenvalues of a symmetric 2x2, ascending (tiny asymmetry averaged away).
pub fn sym_eigenvalues(a: &Mat2) -> [f64; 2] {
    let half_tr = 0.5 * trace(a);
    let half_diff = 0.5 * (a[0][0] - a[1][1]);
    let off = 0.5 * (a[0][1] + a[1][0]);
    let s = (half_diff * half_diff + off * off).sqrt();
    [half_tr - s, half_tr + s]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjugate_is_p1() {
        let a = [[3.0, 1.0], [1.0, 2.0]];
        // P_1 = tr(A) I - A
        let p1 = adjugate(&a);
        assert_eq!(p1, [[2.0, -1.0], [-1.0, 3.0]]);
        let tr_i_minus_a = add(&scale(&IDENTITY, trace(&a)), &scale(&a, -1.0));
        assert_eq!(p1, tr_i_minus_a);
    }

    #[test]
    fn eigenvalues_closed_form() {
        let a = [[2.0, 1.0], [1.0, 2.0]];
        let e = sym_eigenvalues(&a);
        assert!((e[0] - 1.0).abs() < 1e-14);
        assert!((e[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn inverse_roundtrip() {
        let a = [[2.0, 0.5], [0.5, 1.5]];
        let inv = inverse(&a).unwrap();
        let id = mul(&a, &inv);
        assert!((id[0][0] - 1.0).abs() < 1e-14);
        assert!(id[0][1].abs() < 1e-14);
    }
}
