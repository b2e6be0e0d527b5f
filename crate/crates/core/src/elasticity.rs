//! Isotropic linear elasticity in two dimensions.

use std::ops::{Add, AddAssign, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real 2x2 matrix. Used for displacement gradients, strains, stresses and
/// the dyadic jumps of vector fields.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Tensor2(pub [[f64; 2]; 2]);

impl Tensor2 {
    pub const ZERO: Tensor2 = Tensor2([[0.0; 2]; 2]);
    pub const IDENTITY: Tensor2 = Tensor2([[1.0, 0.0], [0.0, 1.0]]);

    pub fn new(a: [[f64; 2]; 2]) -> Self {
        Tensor2(a)
    }

    /// x ⊗ y, entries x_i y_j.
    pub fn outer(x: [f64; 2], y: [f64; 2]) -> Self {
        Tensor2([[x[0] * y[0], x[0] * y[1]], [x[1] * y[0], x[1] * y[1]]])
    }

    pub fn transpose(&self) -> Self {
        let a = self.0;
        Tensor2([[a[0][0], a[1][0]], [a[0][1], a[1][1]]])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    /// Frobenius inner product ψ:χ.
    pub fn ddot(&self, other: &Tensor2) -> f64 {
        let (a, b) = (self.0, other.0);
        a[0][0] * b[0][0] + a[0][1] * b[0][1] + a[1][0] * b[1][0] + a[1][1] * b[1][1]
    }

    pub fn norm(&self) -> f64 {
        self.ddot(self).sqrt()
    }

    pub fn mul_vec(&self, v: [f64; 2]) -> [f64; 2] {
        let a = self.0;
        [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (self.0[0][1] - self.0[1][0]).abs() <= tol
    }
}

impl Add for Tensor2 {
    type Output = Tensor2;
    fn add(self, rhs: Tensor2) -> Tensor2 {
        let (a, b) = (self.0, rhs.0);
        Tensor2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl AddAssign for Tensor2 {
    fn add_assign(&mut self, rhs: Tensor2) {
        *self = *self + rhs;
    }
}

impl Sub for Tensor2 {
    type Output = Tensor2;
    fn sub(self, rhs: Tensor2) -> Tensor2 {
        self + rhs * -1.0
    }
}

impl Mul<f64> for Tensor2 {
    type Output = Tensor2;
    fn mul(self, s: f64) -> Tensor2 {
        let a = self.0;
        Tensor2([[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]])
    }
}

/// Lamé parameters of a homogeneous isotropic body.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub mu: f64,
    pub lambda: f64,
}

impl Material {
    pub fn new(mu: f64, lambda: f64) -> Result<Self> {
        if !(mu > 0.0 && lambda > 0.0 && mu.is_finite() && lambda.is_finite()) {
            return Err(Error::InvalidMaterial { mu, lambda });
        }
        Ok(Self { mu, lambda })
    }

    /// Lamé parameters from Young's modulus and Poisson's ratio.
    pub fn from_young_poisson(young: f64, poisson: f64) -> Result<Self> {
        let mu = young / (2.0 * (1.0 + poisson));
        let lambda = young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
        Self::new(mu, lambda)
    }

    /// Poisson's ratio ν = λ / (2(λ + μ)).
    pub fn poisson_ratio(&self) -> f64 {
        self.lambda / (2.0 * (self.lambda + self.mu))
    }
}

/// Symmetric part of a displacement gradient `grad[i][j] = ∂_j u_i`.
pub fn strain(grad: Tensor2) -> Tensor2 {
    (grad + grad.transpose()) * 0.5
}

/// Hooke's law σ = 2με + λ tr(ε) Id.
pub fn stress(eps: Tensor2, mat: &Material) -> Tensor2 {
    eps * (2.0 * mat.mu) + Tensor2::IDENTITY * (mat.lambda * eps.trace())
}

/// Normal component `(t n)·n` and tangential part `t n - σ_n n`.
pub fn normal_tangential_split(t: Tensor2, n: [f64; 2]) -> (f64, [f64; 2]) {
    let tn = t.mul_vec(n);
    let sn = tn[0] * n[0] + tn[1] * n[1];
    (sn, [tn[0] - sn * n[0], tn[1] - sn * n[1]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn strain_examples() {
        assert_eq!(strain(Tensor2([[0.0, 1.0], [-1.0, 0.0]])), Tensor2::ZERO);
        assert_eq!(strain(Tensor2::IDENTITY), Tensor2::IDENTITY);
        assert_eq!(
            strain(Tensor2([[1.0, 2.0], [0.0, 3.0]])),
            Tensor2([[1.0, 1.0], [1.0, 3.0]])
        );
    }

    #[test]
    fn stress_examples() {
        let unit = Material::new(1.0, 1.0).unwrap();
        assert_eq!(stress(Tensor2::ZERO, &unit), Tensor2::ZERO);
        assert_eq!(stress(Tensor2::IDENTITY, &unit), Tensor2::IDENTITY * 4.0);
    }

    #[test]
    fn young_poisson_conversion() {
        let m = Material::from_young_poisson(500.0, 0.3).unwrap();
        assert!((m.mu - 192.307692).abs() < 1e-6);
        assert!((m.lambda - 288.461538).abs() < 1e-6);
        assert!((m.poisson_ratio() - 0.3).abs() < 1e-14);
        assert_eq!(Material::new(1.0, 1.0).unwrap().poisson_ratio(), 0.25);
        assert!(Material::new(0.0, 1.0).is_err());
        assert!(Material::new(1.0, -1.0).is_err());
    }

    #[test]
    fn split_examples() {
        let (sn, st) = normal_tangential_split(Tensor2::IDENTITY * 3.5, [0.6, 0.8]);
        assert!((sn - 3.5).abs() < 1e-15);
        assert!(st[0].abs() < 1e-15 && st[1].abs() < 1e-15);
        let (sn, st) = normal_tangential_split(Tensor2([[0.0, 1.0], [1.0, 0.0]]), [1.0, 0.0]);
        assert_eq!(sn, 0.0);
        assert_eq!(st, [0.0, 1.0]);
    }

    fn tensor() -> impl Strategy<Value = Tensor2> {
        prop::array::uniform2(prop::array::uniform2(-10.0..10.0f64)).prop_map(Tensor2)
    }

    proptest! {
        #[test]
        fn decomposition_identity(t in tensor(), angle in 0.0..std::f64::consts::TAU,
                                  v in prop::array::uniform2(-5.0..5.0f64)) {
            let n = [angle.cos(), angle.sin()];
            let (sn, st) = normal_tangential_split(t, n);
            let tn = t.mul_vec(n);
            let vn = v[0] * n[0] + v[1] * n[1];
            let vt = [v[0] - vn * n[0], v[1] - vn * n[1]];
            let lhs = tn[0] * v[0] + tn[1] * v[1];
            let rhs = sn * vn + st[0] * vt[0] + st[1] * vt[1];
            prop_assert!((lhs - rhs).abs() < 1e-11);
        }

        #[test]
        fn stress_sees_only_symmetric_part(g in tensor(), mu in 0.1..100.0f64, lambda in 0.1..100.0f64) {
            let mat = Material::new(mu, lambda).unwrap();
            let s1 = stress(strain(g), &mat);
            let s2 = stress(strain(g.transpose()), &mat);
            prop_assert!((s1 - s2).norm() < 1e-12);
            prop_assert!(s1.is_symmetric(1e-12));
        }

        #[test]
        fn energy_bounded_below(g in tensor(), mu in 0.1..100.0f64, lambda in 0.1..100.0f64) {
            let mat = Material::new(mu, lambda).unwrap();
            let eps = strain(g);
            let energy = stress(eps, &mat).ddot(&eps);
            prop_assert!(energy >= 2.0 * mu * eps.ddot(&eps) - 1e-9);
        }

        #[test]
        fn stress_is_linear(a in tensor(), b in tensor(), s in -3.0..3.0f64) {
            let mat = Material::new(1.3, 2.1).unwrap();
            let lhs = stress(strain(a) * s + strain(b), &mat);
            let rhs = stress(strain(a), &mat) * s + stress(strain(b), &mat);
            prop_assert!((lhs - rhs).norm() < 1e-10);
        }
    }
}
