//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;

pub fn to_complex(m: &RMatrix) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn det(m: &CMatrix) -> Complex64 {
    if m.nrows() == 1 {
        return m[(0, 0)];
    }
    m.clone().lu().determinant()
}

/// Derivative of `det M(nu)` given `M` and `dM/dnu`, by summing the
/// determinants obtained by replacing one column at a time.
pub fn det_derivative(m: &CMatrix, dm: &CMatrix) -> Complex64 {
    let n = m.ncols();
    if n == 1 {
        return dm[(0, 0)];
    }
    let mut total = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let mut mj = m.clone();
        mj.set_column(j, &dm.column(j));
        total += mj.lu().determinant();
    }
    total
}

/// Singular value decomposition with singular values sorted in
/// decreasing order. Columns of `u` and `v` follow the same order.
#[derive(Debug, Clone)]
pub struct SortedSvd {
    pub u: RMatrix,
    pub sigma: Vec<f64>,
    pub v: RMatrix,
}

pub fn sorted_svd(m: &RMatrix) -> SortedSvd {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("left vectors requested");
    let vt = svd.v_t.expect("right vectors requested");
    let k = svd.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sigma = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u_sorted = RMatrix::from_fn(u.nrows(), k, |r, c| u[(r, order[c])]);
    let v_sorted = RMatrix::from_fn(vt.ncols(), k, |r, c| vt[(order[c], r)]);
    SortedSvd {
        u: u_sorted,
        sigma,
        v: v_sorted,
    }
}

/// Singular values of a complex matrix, decreasing.
pub fn complex_singular_values(m: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Fixes the sign of a real vector so that its largest-magnitude entry is
/// positive.
pub fn normalize_sign(v: &mut DVector<f64>) {
    let idx = v.iamax();
    if v[idx] < 0.0 {
        v.neg_mut();
    }
}

/// Orthonormal basis (as columns) of the complement of a unit vector.
pub fn orthonormal_complement(v: &DVector<f64>) -> RMatrix {
    let n = v.len();
    if n <= 1 {
        return RMatrix::zeros(n, 0);
    }
    let u = v / v.norm();
    // Householder reflection sending u to +-e_0; its remaining columns span u-perp.
    let mut w = u.clone();
    let s = if u[0] >= 0.0 { 1.0 } else { -1.0 };
    w[0] += s;
    let wn = w.norm_squared();
    let h = RMatrix::identity(n, n) - (&w * w.transpose()) * (2.0 / wn);
    h.columns(1, n - 1).into_owned()
}

pub fn sup_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_derivative_matches_finite_difference() {
        let m = |t: f64| {
            CMatrix::from_row_slice(
                3,
                3,
                &[
                    Complex64::new(t.sin(), 0.1),
                    Complex64::new(1.0, 0.0),
                    Complex64::new(t * t, 0.0),
                    Complex64::new(0.5, t),
                    Complex64::new(t.cos(), 0.0),
                    Complex64::new(2.0, 0.0),
                    Complex64::new(t, 0.0),
                    Complex64::new(0.0, 1.0),
                    Complex64::new(t.exp(), 0.0),
                ],
            )
        };
        let dm = |t: f64| {
            CMatrix::from_row_slice(
                3,
                3,
                &[
                    Complex64::new(t.cos(), 0.0),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(2.0 * t, 0.0),
                    Complex64::new(0.0, 1.0),
                    Complex64::new(-t.sin(), 0.0),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(1.0, 0.0),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(t.exp(), 0.0),
                ],
            )
        };
        let t = 0.37;
        let h = 1e-6;
        let fd = (det(&m(t + h)) - det(&m(t - h))) / (2.0 * h);
        assert!((det_derivative(&m(t), &dm(t)) - fd).norm() < 1e-8);
    }

    #[test]
    fn complement_is_orthonormal() {
        let v = DVector::from_vec(vec![0.3, -0.5, 0.8, 0.1]);
        let c = orthonormal_complement(&(v.clone() / v.norm()));
        let g = c.transpose() * &c;
        assert!((g - RMatrix::identity(3, 3)).norm() < 1e-14);
        assert!((c.transpose() * v).norm() < 1e-14);
    }

    #[test]
    fn sorted_svd_reconstructs() {
        let m = RMatrix::from_fn(5, 5, |i, j| ((i * 7 + j * 3) % 5) as f64 - 1.5 + if i == j { 3.0 } else { 0.0 });
        let s = sorted_svd(&m);
        assert!(s.sigma.windows(2).all(|w| w[0] >= w[1]));
        let rec = &s.u * RMatrix::from_diagonal(&DVector::from_vec(s.sigma.clone())) * s.v.transpose();
        assert!((rec - m).norm() < 1e-12);
    }
}
