use super::Scalar;
use crate::error::{LabError, Result};

/// LU factorization with partial pivoting, P A = L U, stored in place.
#[derive(Clone, Debug)]
pub struct Lu<T: Scalar> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
    odd: bool,
}

impl<T: Scalar> Lu<T> {
    pub fn factor(n: usize, mut a: Vec<T>) -> Result<Self> {
        assert_eq!(a.len(), n * n);
        let mut perm: Vec<usize> = (0..n).collect();
        let mut odd = false;
        for k in 0..n {
            let (mut p, mut best) = (k, a[k * n + k].abs1());
            for i in k + 1..n {
                let v = a[i * n + k].abs1();
                if v > best {
                    p = i;
                    best = v;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(LabError::Singular(format!("zero pivot in column {k}")));
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                odd = !odd;
            }
            let (top, bottom) = a.split_at_mut((k + 1) * n);
            let pivot_row = &top[k * n..];
            let inv = T::one() / pivot_row[k];
            for i in 0..n - k - 1 {
                let row = &mut bottom[i * n..(i + 1) * n];
                let l = row[k] * inv;
                row[k] = l;
                if l == T::zero() {
                    continue;
                }
                for (x, &u) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..n]) {
                    *x -= l * u;
                }
            }
        }
        Ok(Self { n, lu: a, perm, odd })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let mut s = x[i];
            for (l, xj) in row.iter().zip(&x[..i]) {
                s -= *l * *xj;
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n..(i + 1) * n];
            let mut s = x[i];
            for j in i + 1..n {
                s -= row[j] * x[j];
            }
            x[i] = s / row[i];
        }
        x
    }

    /// Full inverse, row-major. Solves against all unit vectors at once so the
    /// inner loops run along rows.
    pub fn inverse(&self) -> Vec<T> {
        let n = self.n;
        // X = P^T-permuted identity, then L Y = X, U Z = Y, all row operations
        let mut x = vec![T::zero(); n * n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[i * n + p] = T::one();
        }
        for i in 0..n {
            let (done, rest) = x.split_at_mut(i * n);
            let xi = &mut rest[..n];
            for j in 0..i {
                let l = self.lu[i * n + j];
                if l == T::zero() {
                    continue;
                }
                for (a, &b) in xi.iter_mut().zip(&done[j * n..(j + 1) * n]) {
                    *a -= l * b;
                }
            }
        }
        for i in (0..n).rev() {
            let (head, tail) = x.split_at_mut((i + 1) * n);
            let xi = &mut head[i * n..];
            for j in i + 1..n {
                let u = self.lu[i * n + j];
                if u == T::zero() {
                    continue;
                }
                let xj = &tail[(j - i - 1) * n..(j - i) * n];
                for (a, &b) in xi.iter_mut().zip(xj) {
                    *a -= u * b;
                }
            }
            let inv = T::one() / self.lu[i * n + i];
            for a in xi.iter_mut() {
                *a *= inv;
            }
        }
        x
    }

    /// log |det A|.
    pub fn log_abs_det(&self) -> f64 {
        (0..self.n).map(|i| self.lu[i * self.n + i].modulus().ln()).sum()
    }

    pub fn det(&self) -> T {
        let mut d = if self.odd { -T::one() } else { T::one() };
        for i in 0..self.n {
            d *= self.lu[i * self.n + i];
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn solve_and_inverse() {
        let n = 4;
        let a: Vec<Complex64> =
            (0..n * n).map(|k| Complex64::new(((k * 7) % 5) as f64 - 2.0, ((k * 3) % 4) as f64 * 0.5)).collect();
        let lu = Lu::factor(n, a.clone()).unwrap();
        let inv = lu.inverse();
        for i in 0..n {
            for j in 0..n {
                let s: Complex64 = (0..n).map(|k| a[i * n + k] * inv[k * n + j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((s - want).norm() < 1e-12);
            }
        }
        let b = vec![Complex64::new(1.0, 2.0); n];
        let x = lu.solve(&b);
        for i in 0..n {
            let s: Complex64 = (0..n).map(|k| a[i * n + k] * x[k]).sum();
            assert!((s - b[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn determinant_sign() {
        let lu = Lu::factor(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!(lu.det(), -1.0);
        assert!(Lu::factor(2, vec![1.0, 2.0, 2.0, 4.0]).is_err());
    }
}
