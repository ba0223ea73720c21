//! Singular values by Householder bidiagonalization and implicit-shift QR on
//! the bidiagonal (values only).

use super::{apply_left, apply_right, householder, Scalar};
use crate::error::{LabError, Result};
use crate::matrix::ComplexMatrix;

/// Reduce a square row-major matrix to upper bidiagonal form; returns the
/// diagonal and superdiagonal as nonnegative reals (signs do not change the
/// singular values).
pub(crate) fn bidiagonalize<T: Scalar>(a: &mut [T], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n.saturating_sub(1)];
    let mut v = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for k in 0..n {
        // left reflector: zero column k below the diagonal
        v.clear();
        v.extend((k..n).map(|i| a[i * n + k]));
        let (tau, beta) = householder(&mut v);
        v[0] = T::one();
        d[k] = beta.abs();
        apply_left(a, n, k, k + 1, n, &v, tau, &mut w);
        if k + 1 < n {
            // right reflector on row k, built from the conjugated row
            v.clear();
            v.extend((k + 1..n).map(|j| a[k * n + j].conj()));
            let (tau, beta) = householder(&mut v);
            v[0] = T::one();
            e[k] = beta.abs();
            apply_right(a, n, k + 1, n, k + 1, &v, tau);
        }
    }
    (d, e)
}

/// Singular values of an upper bidiagonal matrix, sorted descending.
pub fn bidiagonal_singular_values(d: &[f64], e: &[f64]) -> Result<Vec<f64>> {
    let n = d.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut w = d.to_vec();
    // rv[i] couples w[i-1] and w[i]; rv[0] is always zero
    let mut rv = vec![0.0; n];
    rv[1..n].copy_from_slice(&e[..n - 1]);
    let anorm = (0..n).map(|i| w[i].abs() + rv[i].abs()).fold(0.0, f64::max);
    let eps = f64::EPSILON;
    let small = |x: f64| x.abs() <= eps * anorm;
    const MAX_ITS: usize = 75;
    for k in (0..n).rev() {
        let mut its = 0;
        loop {
            let mut l = k;
            let mut cancel = true;
            loop {
                if l == 0 || small(rv[l]) {
                    cancel = false;
                    break;
                }
                if small(w[l - 1]) {
                    break;
                }
                l -= 1;
            }
            if cancel {
                // w[l-1] is negligible: chase rv[l] out with rotations
                let (mut c, mut s) = (0.0, 1.0);
                for i in l..=k {
                    let f = s * rv[i];
                    rv[i] *= c;
                    if small(f) {
                        break;
                    }
                    let g = w[i];
                    let h = f.hypot(g);
                    w[i] = h;
                    c = g / h;
                    s = -f / h;
                }
            }
            let z = w[k];
            if l == k {
                w[k] = z.abs();
                break;
            }
            if its == MAX_ITS {
                let partial = w[k + 1..].iter().map(|&x| num_complex::Complex64::new(x, 0.0)).collect();
                return Err(LabError::NonConvergence { routine: "bidiagonal QR", iterations: its, partial });
            }
            its += 1;
            // shift from the trailing 2x2 block
            let nm = k - 1;
            let mut x = w[l];
            let mut y = w[nm];
            let mut g = rv[nm];
            let mut h = rv[k];
            let mut f = ((y - z) * (y + z) + (g - h) * (g + h)) / (2.0 * h * y);
            g = f.hypot(1.0);
            let sg = if f >= 0.0 { g.abs() } else { -g.abs() };
            f = ((x - z) * (x + z) + h * ((y / (f + sg)) - h)) / x;
            let (mut c, mut s) = (1.0, 1.0);
            for j in l..=nm {
                let i = j + 1;
                g = rv[i];
                y = w[i];
                h = s * g;
                g *= c;
                let mut zz = f.hypot(h);
                rv[j] = zz;
                c = f / zz;
                s = h / zz;
                f = x * c + g * s;
                g = g * c - x * s;
                h = y * s;
                y *= c;
                zz = f.hypot(h);
                w[j] = zz;
                if zz != 0.0 {
                    c = f / zz;
                    s = h / zz;
                }
                f = c * g + s * y;
                x = c * y - s * g;
            }
            rv[l] = 0.0;
            rv[k] = f;
            w[k] = x;
        }
    }
    w.sort_by(|a, b| b.total_cmp(a));
    Ok(w)
}

pub fn singular_values_real(n: usize, a: &[f64]) -> Result<Vec<f64>> {
    let mut b = a.to_vec();
    let (d, e) = bidiagonalize(&mut b, n);
    bidiagonal_singular_values(&d, &e)
}

/// Singular values sorted descending.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let n = m.n();
    if m.is_real() {
        return singular_values_real(n, &m.real_parts());
    }
    let mut b = m.as_slice().to_vec();
    let (d, e) = bidiagonalize(&mut b, n);
    bidiagonal_singular_values(&d, &e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn small_cases() {
        assert_eq!(singular_values_real(2, &[0.0, 2.0, 0.0, 0.0]).unwrap(), vec![2.0, 0.0]);
        let s = singular_values_real(2, &[3.0, 0.0, 4.0, 5.0]).unwrap();
        // A^T A = [[25, 20], [20, 25]] has eigenvalues 45 and 5
        assert!((s[0] - 45f64.sqrt()).abs() < 1e-13 && (s[1] - 5f64.sqrt()).abs() < 1e-13);
        assert!(singular_values_real(0, &[]).unwrap().is_empty());
        let m = ComplexMatrix::from_vec(1, vec![Complex64::new(3.0, 4.0)]).unwrap();
        assert!((singular_values(&m).unwrap()[0] - 5.0).abs() < 1e-14);
    }

    #[test]
    fn bidiagonal_with_zero_diagonal() {
        let s = bidiagonal_singular_values(&[1.0, 0.0, 2.0], &[1.0, 1.0]).unwrap();
        // B B^T eigenvalues computed by hand: B = [[1,1,0],[0,0,1],[0,0,2]]
        let fro: f64 = s.iter().map(|x| x * x).sum();
        assert!((fro - 7.0).abs() < 1e-12);
        assert!(s[2].abs() < 1e-14);
    }
}
