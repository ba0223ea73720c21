use super::{apply_left, householder, Scalar};

/// Orthonormal basis of the column span of an m x k row-major matrix (k <= m),
/// via Householder QR; returns Q as m x k row-major.
pub fn orthonormal_columns<T: Scalar>(m: usize, k: usize, a: &[T]) -> Vec<T> {
    assert!(k <= m && a.len() == m * k);
    let mut r = a.to_vec();
    let mut reflectors = Vec::with_capacity(k);
    let mut v = Vec::with_capacity(m);
    let mut w = Vec::with_capacity(k);
    for j in 0..k {
        v.clear();
        v.extend((j..m).map(|i| r[i * k + j]));
        let (tau, _) = householder(&mut v);
        v[0] = T::one();
        apply_left(&mut r, k, j, j, k, &v, tau, &mut w);
        reflectors.push((v.clone(), tau));
    }
    // Q = H_0 H_1 ... H_{k-1} applied to the first k unit vectors
    let mut q = vec![T::zero(); m * k];
    for j in 0..k {
        q[j * k + j] = T::one();
    }
    for (j, (v, tau)) in reflectors.iter().enumerate().rev() {
        // H_j = I - tau v v^H; apply_left uses conj(tau), so pass conj
        apply_left(&mut q, k, j, 0, k, v, tau.conj(), &mut w);
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn columns_are_orthonormal_and_span() {
        let (m, k) = (5, 3);
        let a: Vec<Complex64> = (0..m * k).map(|t| Complex64::new((t as f64).sin(), (t as f64 * 0.7).cos())).collect();
        let q = orthonormal_columns(m, k, &a);
        for c1 in 0..k {
            for c2 in 0..k {
                let g: Complex64 = (0..m).map(|i| q[i * k + c1].conj() * q[i * k + c2]).sum();
                let want = if c1 == c2 { 1.0 } else { 0.0 };
                assert!((g - want).norm() < 1e-13);
            }
        }
        // each column of A lies in span(Q)
        for c in 0..k {
            let col: Vec<Complex64> = (0..m).map(|i| a[i * k + c]).collect();
            let coef: Vec<Complex64> = (0..k).map(|j| (0..m).map(|i| q[i * k + j].conj() * col[i]).sum()).collect();
            for i in 0..m {
                let proj: Complex64 = (0..k).map(|j| q[i * k + j] * coef[j]).sum();
                assert!((proj - col[i]).norm() < 1e-12);
            }
        }
    }
}
