use num_bigint::BigInt;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::Lu;
use crate::matrix::ComplexMatrix;

/// Largest order handled by the minor expansion.
pub const MAX_ORDER: usize = 12;

/// Rational matrix stored as integer numerators over one common denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    pub n: usize,
    pub data: Vec<BigInt>,
    pub denominator: BigInt,
}

impl IntMatrix {
    pub fn from_i64(n: usize, data: &[i64]) -> Result<Self> {
        Self::new(n, data.iter().map(|&x| BigInt::from(x)).collect(), BigInt::from(1))
    }

    pub fn new(n: usize, data: Vec<BigInt>, denominator: BigInt) -> Result<Self> {
        if data.len() != n * n {
            return invalid(format!("expected {} entries, got {}", n * n, data.len()));
        }
        if denominator <= BigInt::from(0) {
            return invalid("denominator must be positive");
        }
        Ok(Self { n, data, denominator })
    }
}

/// Fraction-free Gaussian elimination; exact for integer input.
pub fn det_bareiss(n: usize, data: &[BigInt]) -> BigInt {
    if n == 0 {
        return BigInt::from(1);
    }
    let zero = BigInt::from(0);
    let mut a = data.to_vec();
    let mut sign = 1;
    let mut prev = BigInt::from(1);
    for k in 0..n - 1 {
        if a[k * n + k] == zero {
            match (k + 1..n).find(|&i| a[i * n + k] != zero) {
                Some(p) => {
                    for j in 0..n {
                        a.swap(k * n + j, p * n + j);
                    }
                    sign = -sign;
                }
                None => return zero,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i * n + j] * &a[k * n + k] - &a[i * n + k] * &a[k * n + j];
                a[i * n + j] = v / &prev;
            }
        }
        prev = a[k * n + k].clone();
    }
    let d = a[n * n - 1].clone();
    if sign < 0 {
        -d
    } else {
        d
    }
}

fn minor<T: Clone>(n: usize, data: &[T], row: usize, col: usize) -> Vec<T> {
    let mut out = Vec::with_capacity((n - 1) * (n - 1));
    for i in (0..n).filter(|&i| i != row) {
        for j in (0..n).filter(|&j| j != col) {
            out.push(data[i * n + j].clone());
        }
    }
    out
}

/// Splits M = [[m11, v^T], [u, A]].
fn blocks<T: Clone>(n: usize, data: &[T]) -> (T, Vec<T>, Vec<T>, Vec<T>) {
    let v = data[1..n].to_vec();
    let u = (1..n).map(|i| data[i * n].clone()).collect();
    (data[0].clone(), v, u, minor(n, data, 0, 0))
}

fn check_order(n: usize) -> Result<()> {
    if !(2..=MAX_ORDER).contains(&n) {
        return invalid(format!("cofactor identity needs order in 2..={MAX_ORDER}, got {n}"));
    }
    Ok(())
}

pub struct ExactCofactorCheck {
    /// det M times denominator^n.
    pub lhs: BigInt,
    /// m11 det A - v^T adj(A) u, on the same scale.
    pub rhs: BigInt,
    pub defect: BigInt,
    pub scale: BigInt,
}

pub fn cofactor_bilinear_identity_exact(m: &IntMatrix) -> Result<ExactCofactorCheck> {
    let n = m.n;
    check_order(n)?;
    let (m11, v, u, a) = blocks(n, &m.data);
    let k = n - 1;
    let det_a = det_bareiss(k, &a);
    let mut quad = BigInt::from(0);
    #[allow(clippy::needless_range_loop)]
    for i in 0..k {
        for j in 0..k {
            // adj(A)_ij = (-1)^(i+j) det A with row j and column i removed
            let c = det_bareiss(k - 1, &minor(k, &a, j, i));
            let term = &v[i] * c * &u[j];
            if (i + j) % 2 == 0 {
                quad += term;
            } else {
                quad -= term;
            }
        }
    }
    let lhs = det_bareiss(n, &m.data);
    let rhs = m11 * det_a - quad;
    let defect = &lhs - &rhs;
    Ok(ExactCofactorCheck { lhs, rhs, defect, scale: m.denominator.pow(n as u32) })
}

fn det_float(n: usize, data: Vec<Complex64>) -> Complex64 {
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    Lu::factor(n, data).map_or(Complex64::new(0.0, 0.0), |lu| lu.det())
}

/// The coefficients c_ij with det M = m11 det A + sum_ij c_ij m_1i m_j1,
/// namely minus the adjugate of A.
pub fn bilinear_coefficients(a: &ComplexMatrix) -> ComplexMatrix {
    let k = a.n();
    if k == 1 {
        return ComplexMatrix::from_fn(1, |_, _| Complex64::new(-1.0, 0.0));
    }
    ComplexMatrix::from_fn(k, |i, j| {
        let c = det_float(k - 1, minor(k, a.as_slice(), j, i));
        if (i + j) % 2 == 0 {
            -c
        } else {
            c
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CofactorCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub defect: f64,
}

/// Floating-point version of the first row/column expansion of det M.
pub fn cofactor_bilinear_identity(m: &ComplexMatrix) -> Result<CofactorCheck> {
    let n = m.n();
    check_order(n)?;
    let (m11, v, u, a) = blocks(n, m.as_slice());
    let a = ComplexMatrix::from_vec(n - 1, a)?;
    let c = bilinear_coefficients(&a);
    let mut rhs = m11 * det_float(n - 1, a.into_vec());
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            rhs += c[(i, j)] * v[i] * u[j];
        }
    }
    let lhs = det_float(n, m.as_slice().to_vec());
    Ok(CofactorCheck { lhs, rhs, defect: (lhs - rhs).norm() })
}
