//! Empirical resolvent traces of the Hermitized block
//! V(z) = [[0, X/sqrt(n) - z], [X*/sqrt(n) - conj(z), 0]].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::Lu;
use crate::matrix::ComplexMatrix;

/// The 2n x 2n Hermitized block V(z).
pub fn hermitized_block(x: &ComplexMatrix, z: Complex64) -> ComplexMatrix {
    let n = x.n();
    let y = x.scaled(1.0 / (n as f64).sqrt()).shifted(z);
    let mut v = ComplexMatrix::zeros(2 * n);
    for i in 0..n {
        for j in 0..n {
            v[(i, n + j)] = y[(i, j)];
            v[(n + j, i)] = y[(i, j)].conj();
        }
    }
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResolventMethod {
    /// LU of the full 2n x 2n shifted block.
    FullBlock,
    /// LU of the n x n Schur complement Y Y* - alpha^2; the four blocks of the
    /// resolvent are alpha G, G Y, Y* G and alpha (Y*Y - alpha^2)^{-1} with
    /// G = (Y Y* - alpha^2)^{-1}.
    Schur,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolventTraces {
    pub s: Complex64,
    pub t: Complex64,
    pub u: Complex64,
}

/// s = (1/2n) tr R, t = (1/n) sum R_{i+n,i}, u = (1/n) sum R_{i,i+n} with R = (V(z) - alpha)^{-1}.
pub fn empirical_stu(x: &ComplexMatrix, z: Complex64, alpha: Complex64) -> Result<ResolventTraces> {
    let method = if x.n() <= 200 { ResolventMethod::FullBlock } else { ResolventMethod::Schur };
    empirical_stu_with(x, z, alpha, method)
}

pub fn empirical_stu_with(
    x: &ComplexMatrix,
    z: Complex64,
    alpha: Complex64,
    method: ResolventMethod,
) -> Result<ResolventTraces> {
    if alpha.im == 0.0 {
        return invalid("empirical resolvent needs Im(alpha) != 0");
    }
    let n = x.n();
    let nf = n as f64;
    match method {
        ResolventMethod::FullBlock => {
            let m = 2 * n;
            let mut v = hermitized_block(x, z).into_vec();
            for i in 0..m {
                v[i * m + i] -= alpha;
            }
            let r = Lu::factor(m, v)?.inverse();
            let tr: Complex64 = (0..m).map(|i| r[i * m + i]).sum();
            let t: Complex64 = (0..n).map(|i| r[(i + n) * m + i]).sum();
            let u: Complex64 = (0..n).map(|i| r[i * m + i + n]).sum();
            Ok(ResolventTraces { s: tr / (2.0 * nf), t: t / nf, u: u / nf })
        }
        ResolventMethod::Schur => {
            let y = x.scaled(1.0 / nf.sqrt()).shifted(z);
            let mut g = y.matmul(&y.adjoint()).into_vec();
            let a2 = alpha * alpha;
            for i in 0..n {
                g[i * n + i] -= a2;
            }
            let g = Lu::factor(n, g)?.inverse();
            let ys = y.as_slice();
            let tr_g: Complex64 = (0..n).map(|i| g[i * n + i]).sum();
            // tr(Y* G) = sum_{k,i} conj(y_ki) g_ki ; tr(G Y) = sum_{i,k} g_ik y_ki
            let mut t = Complex64::new(0.0, 0.0);
            let mut u = Complex64::new(0.0, 0.0);
            for i in 0..n {
                for k in 0..n {
                    t += ys[k * n + i].conj() * g[k * n + i];
                    u += g[i * n + k] * ys[k * n + i];
                }
            }
            Ok(ResolventTraces { s: alpha * tr_g / nf, t: t / nf, u: u / nf })
        }
    }
}

/// s_n from the singular values of X/sqrt(n) - z: (1/n) sum alpha / (sigma^2 - alpha^2).
pub fn s_from_singular_values(sv: &[f64], alpha: Complex64) -> Complex64 {
    let a2 = alpha * alpha;
    sv.iter().map(|&s| alpha / (s * s - a2)).sum::<Complex64>() / sv.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_block_gives_minus_inverse_alpha() {
        let n = 4;
        let z = Complex64::new(0.4, -0.2);
        let x = ComplexMatrix::identity(n).scaled(0.0).shifted(-z * (n as f64).sqrt());
        let a = Complex64::new(0.1, 0.7);
        for method in [ResolventMethod::FullBlock, ResolventMethod::Schur] {
            let r = empirical_stu_with(&x, z, a, method).unwrap();
            assert!((r.s + 1.0 / a).norm() < 1e-13);
            assert!(r.t.norm() < 1e-13 && r.u.norm() < 1e-13);
        }
    }

    #[test]
    fn one_by_one_closed_form() {
        let z = Complex64::new(0.5, 0.25);
        let w = Complex64::new(0.3, -0.4);
        let x = ComplexMatrix::from_vec(1, vec![z + w]).unwrap();
        let a = Complex64::new(0.2, 0.5);
        let r = empirical_stu(&x, z, a).unwrap();
        let m = w.norm();
        let want = 0.5 * (1.0 / (m - a) + 1.0 / (-m - a));
        assert!((r.s - want).norm() < 1e-14);
    }
}
