//! Dense kernels: LU, Householder QR, Hessenberg + shifted QR eigenvalues,
//! Golub-Kahan bidiagonalization + implicit QR singular values.
//!
//! Everything is written for a generic scalar so real input runs the real path
//! at a quarter of the complex cost.

pub mod eigen;
pub mod lu;
pub mod qr;
pub mod svd;

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;

pub use eigen::{eigenvalues, eigenvalues_real};
pub use lu::Lu;
pub use qr::orthonormal_columns;
pub use svd::{singular_values, singular_values_real};

pub trait Scalar:
    Copy
    + Send
    + Sync
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn conj(self) -> Self;
    fn modulus(self) -> f64;
    /// |re| + |im|, the cheap norm used in deflation tests.
    fn abs1(self) -> f64;
    fn re(self) -> f64;
    fn im(self) -> f64;
    fn scale(self, c: f64) -> Self;
    fn to_c64(self) -> Complex64;
    fn is_finite(self) -> bool;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn conj(self) -> Self {
        self
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn abs1(self) -> f64 {
        self.abs()
    }
    fn re(self) -> f64 {
        self
    }
    fn im(self) -> f64 {
        0.0
    }
    fn scale(self, c: f64) -> Self {
        self * c
    }
    fn to_c64(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn abs1(self) -> f64 {
        self.re.abs() + self.im.abs()
    }
    fn re(self) -> f64 {
        self.re
    }
    fn im(self) -> f64 {
        self.im
    }
    fn scale(self, c: f64) -> Self {
        self * c
    }
    fn to_c64(self) -> Complex64 {
        self
    }
    fn is_finite(self) -> bool {
        Complex64::is_finite(self)
    }
}

/// Euclidean norm with scaling against overflow.
pub(crate) fn vec_norm<T: Scalar>(x: &[T]) -> f64 {
    let mut scale = 0.0f64;
    let mut ssq = 1.0f64;
    for v in x {
        for a in [v.re().abs(), v.im().abs()] {
            if a == 0.0 {
                continue;
            }
            if scale < a {
                ssq = 1.0 + ssq * (scale / a).powi(2);
                scale = a;
            } else {
                ssq += (a / scale).powi(2);
            }
        }
    }
    scale * ssq.sqrt()
}

/// Elementary reflector H = I - tau v v^H with v[0] = 1 such that
/// H^H x = beta e1 with beta real. On return x[1..] holds v[1..].
pub(crate) fn householder<T: Scalar>(x: &mut [T]) -> (T, f64) {
    let alpha = x[0];
    let xnorm = vec_norm(&x[1..]);
    if xnorm == 0.0 && alpha.im() == 0.0 {
        return (T::zero(), alpha.re());
    }
    let mut beta = alpha.modulus().hypot(xnorm);
    if alpha.re() >= 0.0 {
        beta = -beta;
    }
    let tau = (T::from_f64(beta) - alpha) / T::from_f64(beta);
    let inv = T::one() / (alpha - T::from_f64(beta));
    for v in &mut x[1..] {
        *v *= inv;
    }
    (tau, beta)
}

/// A[rows, cols] <- (I - conj(tau) v v^H) A[rows, cols], row-major with stride `ld`.
/// `v` has v[0] = 1 and covers rows r0..r0+v.len().
#[allow(clippy::too_many_arguments)]
pub(crate) fn apply_left<T: Scalar>(
    a: &mut [T],
    ld: usize,
    r0: usize,
    c0: usize,
    c1: usize,
    v: &[T],
    tau: T,
    w: &mut Vec<T>,
) {
    if tau == T::zero() || c0 >= c1 {
        return;
    }
    w.clear();
    w.resize(c1 - c0, T::zero());
    for (k, vk) in v.iter().enumerate() {
        let vc = vk.conj();
        let row = &a[(r0 + k) * ld + c0..(r0 + k) * ld + c1];
        for (wj, &aij) in w.iter_mut().zip(row) {
            *wj += vc * aij;
        }
    }
    let tc = tau.conj();
    for (k, &vk) in v.iter().enumerate() {
        let f = tc * vk;
        let row = &mut a[(r0 + k) * ld + c0..(r0 + k) * ld + c1];
        for (aij, &wj) in row.iter_mut().zip(w.iter()) {
            *aij -= f * wj;
        }
    }
}

/// A[rows, cols] <- A[rows, cols] (I - tau v v^H); `v` covers columns c0..c0+v.len().
pub(crate) fn apply_right<T: Scalar>(a: &mut [T], ld: usize, r0: usize, r1: usize, c0: usize, v: &[T], tau: T) {
    if tau == T::zero() {
        return;
    }
    let m = v.len();
    for i in r0..r1 {
        let row = &mut a[i * ld + c0..i * ld + c0 + m];
        let mut d = T::zero();
        for (&aij, &vj) in row.iter().zip(v) {
            d += aij * vj;
        }
        let f = tau * d;
        for (aij, &vj) in row.iter_mut().zip(v) {
            *aij -= f * vj.conj();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflector_annihilates() {
        let x0 = vec![Complex64::new(0.3, -1.0), Complex64::new(2.0, 0.5), Complex64::new(-1.0, 1.0)];
        let mut x = x0.clone();
        let (tau, beta) = householder(&mut x);
        let mut v = x.clone();
        v[0] = Complex64::new(1.0, 0.0);
        // H^H x0 = x0 - conj(tau) v (v^H x0)
        let vh_x: Complex64 = v.iter().zip(&x0).map(|(a, b)| a.conj() * b).sum();
        let y: Vec<Complex64> = x0.iter().zip(&v).map(|(xi, vi)| xi - tau.conj() * vi * vh_x).collect();
        assert!((y[0] - Complex64::new(beta, 0.0)).norm() < 1e-14);
        assert!(y[1].norm() < 1e-14 && y[2].norm() < 1e-14);
        assert!((beta.abs() - vec_norm(&x0)).abs() < 1e-14);
    }
}
