//! Eigenvalues of dense matrices: Householder reduction to upper Hessenberg
//! form, then Francis double-shift QR (real input) or single-shift complex QR.

use num_complex::Complex64;

use super::{apply_left, apply_right, householder, Scalar};
use crate::error::{LabError, Result};
use crate::matrix::ComplexMatrix;

/// Reduce a row-major n x n matrix to upper Hessenberg form in place by
/// unitary similarity.
pub(crate) fn hessenberg<T: Scalar>(a: &mut [T], n: usize) {
    let mut v = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for k in 0..n.saturating_sub(2) {
        v.clear();
        v.extend((k + 1..n).map(|i| a[i * n + k]));
        let (tau, beta) = householder(&mut v);
        if tau == T::zero() {
            continue;
        }
        v[0] = T::one();
        a[(k + 1) * n + k] = T::from_f64(beta);
        for i in k + 2..n {
            a[i * n + k] = T::zero();
        }
        apply_left(a, n, k + 1, k + 1, n, &v, tau, &mut w);
        apply_right(a, n, 0, n, k + 1, &v, tau);
    }
}

fn hess_norm<T: Scalar>(a: &[T], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            s += a[i * n + j].abs1();
        }
    }
    s
}

fn sweep_cap(n: usize) -> usize {
    50 * n.max(1)
}

/// Eigenvalues of a real matrix (row-major), complex pairs returned adjacent.
pub fn eigenvalues_real(n: usize, a: &[f64]) -> Result<Vec<Complex64>> {
    let mut h = a.to_vec();
    hessenberg(&mut h, n);
    hqr(&mut h, n)
}

/// Eigenvalues of a general complex matrix; real input takes the real path.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let n = m.n();
    if m.is_real() {
        return eigenvalues_real(n, &m.real_parts());
    }
    let mut h = m.as_slice().to_vec();
    hessenberg(&mut h, n);
    complex_qr(&mut h, n)
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Francis double-shift QR on a real upper Hessenberg matrix, eigenvalues only.
fn hqr(a: &mut [f64], n: usize) -> Result<Vec<Complex64>> {
    let idx = |i: usize, j: usize| i * n + j;
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];
    let anorm = hess_norm(a, n);
    let cap = sweep_cap(n);
    let mut total = 0usize;
    let mut t = 0.0;
    let mut nn = n as isize - 1;
    while nn >= 0 {
        let mut its = 0;
        loop {
            let nu = nn as usize;
            // look for a single small subdiagonal element
            let mut l = nu;
            while l >= 1 {
                let mut s = a[idx(l - 1, l - 1)].abs() + a[idx(l, l)].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[idx(l, l - 1)].abs() + s == s {
                    a[idx(l, l - 1)] = 0.0;
                    break;
                }
                l -= 1;
            }
            let x = a[idx(nu, nu)];
            if l == nu {
                wr[nu] = x + t;
                wi[nu] = 0.0;
                nn -= 1;
                break;
            }
            let y = a[idx(nu - 1, nu - 1)];
            let w = a[idx(nu, nu - 1)] * a[idx(nu - 1, nu)];
            if l + 1 == nu {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                let x = x + t;
                if q >= 0.0 {
                    let z = p + sign(z, p);
                    wr[nu - 1] = x + z;
                    wr[nu] = if z != 0.0 { x - w / z } else { x + z };
                    wi[nu - 1] = 0.0;
                    wi[nu] = 0.0;
                } else {
                    wr[nu - 1] = x + p;
                    wr[nu] = x + p;
                    wi[nu - 1] = -z;
                    wi[nu] = z;
                }
                nn -= 2;
                break;
            }
            if total >= cap {
                let partial = (nu + 1..n).map(|k| Complex64::new(wr[k], wi[k])).collect();
                return Err(LabError::NonConvergence { routine: "real Hessenberg QR", iterations: total, partial });
            }
            let (mut x, mut y, mut w) = (x, y, w);
            if its > 0 && its % 10 == 0 {
                // exceptional shift
                t += x;
                for i in 0..=nu {
                    a[idx(i, i)] -= x;
                }
                let s = a[idx(nu, nu - 1)].abs() + a[idx(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            total += 1;
            // form the shift and look for two consecutive small subdiagonals
            let mut m = nu - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = a[idx(m, m)];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[idx(m + 1, m)] + a[idx(m, m + 1)];
                q = a[idx(m + 1, m + 1)] - z - rr - ss;
                r = a[idx(m + 2, m + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[idx(m, m - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[idx(m - 1, m - 1)].abs() + z.abs() + a[idx(m + 1, m + 1)].abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                a[idx(i, i - 2)] = 0.0;
                if i != m + 2 {
                    a[idx(i, i - 3)] = 0.0;
                }
            }
            // double-shift QR step on rows l..nu, columns m..nu
            let mut k = m;
            while k < nu {
                let mut xk = 0.0;
                if k != m {
                    p = a[idx(k, k - 1)];
                    q = a[idx(k + 1, k - 1)];
                    r = if k + 1 != nu { a[idx(k + 2, k - 1)] } else { 0.0 };
                    xk = p.abs() + q.abs() + r.abs();
                    if xk != 0.0 {
                        p /= xk;
                        q /= xk;
                        r /= xk;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a[idx(k, k - 1)] = -a[idx(k, k - 1)];
                        }
                    } else {
                        a[idx(k, k - 1)] = -s * xk;
                    }
                    p += s;
                    let xx = p / s;
                    let yy = q / s;
                    let zz = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nu {
                        let mut pp = a[idx(k, j)] + q * a[idx(k + 1, j)];
                        if k + 1 != nu {
                            pp += r * a[idx(k + 2, j)];
                            a[idx(k + 2, j)] -= pp * zz;
                        }
                        a[idx(k + 1, j)] -= pp * yy;
                        a[idx(k, j)] -= pp * xx;
                    }
                    let mmin = if nu < k + 3 { nu } else { k + 3 };
                    for i in l..=mmin {
                        let mut pp = xx * a[idx(i, k)] + yy * a[idx(i, k + 1)];
                        if k + 1 != nu {
                            pp += zz * a[idx(i, k + 2)];
                            a[idx(i, k + 2)] -= pp * r;
                        }
                        a[idx(i, k + 1)] -= pp * q;
                        a[idx(i, k)] -= pp;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(wr.into_iter().zip(wi).map(|(r, i)| Complex64::new(r, i)).collect())
}

/// Givens rotation [c s; -conj(s) c] with real c that maps (x, y) to (r, 0).
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let r = ax.hypot(ay);
    (ax / r, (x / ax) * y.conj() / r)
}

fn wilkinson(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    // eigenvalue of [[a, b], [c, d]] closer to d
    let tr_half = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (tr_half * tr_half - det).sqrt();
    let l1 = tr_half + disc;
    let l2 = tr_half - disc;
    if (l1 - d).norm() < (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Single-shift implicit QR on a complex upper Hessenberg matrix.
fn complex_qr(h: &mut [Complex64], n: usize) -> Result<Vec<Complex64>> {
    let idx = |i: usize, j: usize| i * n + j;
    let zero = Complex64::new(0.0, 0.0);
    let mut eig = vec![zero; n];
    let anorm = hess_norm(h, n);
    let ulp = f64::EPSILON;
    let cap = sweep_cap(n);
    let mut total = 0usize;
    let mut hi = n as isize - 1;
    let mut its = 0usize;
    while hi >= 0 {
        let hu = hi as usize;
        let mut l = hu;
        while l > 0 {
            let mut s = h[idx(l - 1, l - 1)].abs1() + h[idx(l, l)].abs1();
            if s == 0.0 {
                s = anorm;
            }
            if h[idx(l, l - 1)].abs1() <= ulp * s {
                h[idx(l, l - 1)] = zero;
                break;
            }
            l -= 1;
        }
        if l == hu {
            eig[hu] = h[idx(hu, hu)];
            hi -= 1;
            its = 0;
            continue;
        }
        if total >= cap {
            let partial = eig[hu + 1..].to_vec();
            return Err(LabError::NonConvergence { routine: "complex Hessenberg QR", iterations: total, partial });
        }
        its += 1;
        total += 1;
        let shift = if its.is_multiple_of(10) {
            let s = h[idx(hu, hu - 1)].re.abs() + if hu >= 2 { h[idx(hu - 1, hu - 2)].re.abs() } else { 0.0 };
            h[idx(hu, hu)] + s
        } else {
            wilkinson(h[idx(hu - 1, hu - 1)], h[idx(hu - 1, hu)], h[idx(hu, hu - 1)], h[idx(hu, hu)])
        };
        let mut x = h[idx(l, l)] - shift;
        let mut y = h[idx(l + 1, l)];
        for k in l..hu {
            if k > l {
                x = h[idx(k, k - 1)];
                y = h[idx(k + 1, k - 1)];
            }
            let (c, s) = givens(x, y);
            let j0 = if k > l { k - 1 } else { l };
            for j in j0..=hu {
                let a = h[idx(k, j)];
                let b = h[idx(k + 1, j)];
                h[idx(k, j)] = a * c + s * b;
                h[idx(k + 1, j)] = -s.conj() * a + b * c;
            }
            if k > l {
                h[idx(k + 1, k - 1)] = zero;
            }
            let i1 = (k + 2).min(hu);
            for i in l..=i1 {
                let a = h[idx(i, k)];
                let b = h[idx(i, k + 1)];
                h[idx(i, k)] = a * c + b * s.conj();
                h[idx(i, k + 1)] = -s * a + b * c;
            }
        }
    }
    Ok(eig)
}
