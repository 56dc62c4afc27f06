//! Pointwise nonlinearities `N: R^n -> R^n` with `N(0) = 0`, `N'(0) = 0`.

use crate::error::{Error, Result};
use crate::linalg::RMatrix;
use nalgebra::DVector;
use std::sync::Arc;

type ValueFn = dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync;
type JacobianFn = dyn Fn(&DVector<f64>) -> RMatrix + Send + Sync;

#[derive(Clone)]
pub struct Nonlinearity {
    value: Arc<ValueFn>,
    jacobian: Arc<JacobianFn>,
    degree: Option<usize>,
    label: String,
}

impl std::fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Nonlinearity({})", self.label)
    }
}

impl Nonlinearity {
    /// Componentwise polynomial `N(u)_i = sum_k coeffs[k] u_i^k`; the
    /// constant and linear coefficients must vanish.
    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().take(2).any(|c| *c != 0.0) || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(
                "nonlinearity must satisfy N(0) = 0 and N'(0) = 0 with finite coefficients".into(),
            ));
        }
        let degree = coeffs.iter().rposition(|c| *c != 0.0).unwrap_or(0);
        let label = format!("polynomial{coeffs:?}");
        let c1 = coeffs.clone();
        let c2 = coeffs;
        Ok(Self {
            value: Arc::new(move |u| u.map(|x| horner(&c1, x).0)),
            jacobian: Arc::new(move |u| RMatrix::from_diagonal(&u.map(|x| horner(&c2, x).1))),
            degree: Some(degree),
            label,
        })
    }

    pub fn quadratic() -> Self {
        Self::polynomial(vec![0.0, 0.0, 1.0]).expect("valid coefficients")
    }

    pub fn cubic() -> Self {
        Self::polynomial(vec![0.0, 0.0, 0.0, 1.0]).expect("valid coefficients")
    }

    /// Arbitrary smooth map given by value and Jacobian callbacks.
    pub fn custom<V, J>(label: &str, value: V, jacobian: J) -> Self
    where
        V: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
        J: Fn(&DVector<f64>) -> RMatrix + Send + Sync + 'static,
    {
        Self {
            value: Arc::new(value),
            jacobian: Arc::new(jacobian),
            degree: None,
            label: label.to_string(),
        }
    }

    pub fn value(&self, u: &DVector<f64>) -> DVector<f64> {
        (self.value)(u)
    }

    pub fn jacobian(&self, u: &DVector<f64>) -> RMatrix {
        (self.jacobian)(u)
    }

    /// Polynomial degree, if known.
    pub fn degree(&self) -> Option<usize> {
        self.degree
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `A^{-1} N`, the nonlinearity of the equation written for `v = u`
    /// with kernel `k A`.
    pub fn premultiplied(&self, m: RMatrix) -> Self {
        let (n1, n2) = (self.clone(), self.clone());
        let (m1, m2) = (m.clone(), m);
        Self {
            value: Arc::new(move |u| &m1 * n1.value(u)),
            jacobian: Arc::new(move |u| &m2 * n2.jacobian(u)),
            degree: self.degree,
            label: format!("M*{}", self.label),
        }
    }
}

fn horner(c: &[f64], x: f64) -> (f64, f64) {
    let (mut p, mut dp) = (0.0, 0.0);
    for &ck in c.iter().rev() {
        dp = dp * x + p;
        p = p * x + ck;
    }
    (p, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_value_and_jacobian() {
        let n = Nonlinearity::polynomial(vec![0.0, 0.0, 1.0, -2.0]).unwrap();
        let u = DVector::from_vec(vec![0.5, -1.0]);
        let v = n.value(&u);
        assert!((v[0] - (0.25 - 0.25)).abs() < 1e-15);
        assert!((v[1] - (1.0 + 2.0)).abs() < 1e-15);
        let j = n.jacobian(&u);
        assert!((j[(0, 0)] - (1.0 - 1.5)).abs() < 1e-15);
        assert_eq!(j[(0, 1)], 0.0);
        assert_eq!(n.degree(), Some(3));
        assert!(Nonlinearity::polynomial(vec![0.0, 1.0]).is_err());
    }
}
