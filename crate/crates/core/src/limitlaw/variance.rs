use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::EnsembleSpec;
use crate::error::{invalid, Result};
use crate::matrix::ComplexMatrix;
use crate::rng::RandomStream;
use crate::spectra::shifted_singular_values;

/// (1/n) tr H_n(alpha) with H_n(alpha) = (R*R - alpha)^{-1}, R = X/sqrt(n) - z.
pub fn trace_resolvent(x: &ComplexMatrix, z: Complex64, alpha: Complex64) -> Result<Complex64> {
    let sv = shifted_singular_values(x, z)?;
    Ok(sv.iter().map(|&s| 1.0 / (s * s - alpha)).sum::<Complex64>() / sv.len() as f64)
}

/// Sample mean and unbiased sample variance E|Y - EY|^2 of complex samples.
pub fn complex_mean_var(ys: &[Complex64]) -> (Complex64, f64) {
    let k = ys.len() as f64;
    let mean = ys.iter().sum::<Complex64>() / k;
    let var = if ys.len() > 1 { ys.iter().map(|y| (y - mean).norm_sqr()).sum::<f64>() / (k - 1.0) } else { 0.0 };
    (mean, var)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceProbe {
    pub n: usize,
    pub trials: usize,
    pub mean_n: Complex64,
    pub var_n: f64,
    pub mean_2n: Complex64,
    pub var_2n: f64,
    /// var_n / var_2n.
    pub ratio: f64,
}

/// Sample variance of (1/n) tr H_n(alpha) at sizes n and 2n for a matrix generator.
pub fn variance_probe_from<G>(
    generator: G,
    n: usize,
    z: Complex64,
    alpha: Complex64,
    trials: usize,
) -> Result<VarianceProbe>
where
    G: Fn(usize, u64) -> Result<ComplexMatrix> + Sync,
{
    if alpha.im == 0.0 {
        return invalid("variance probe needs Im(alpha) != 0");
    }
    if trials < 2 {
        return invalid("variance probe needs at least two trials");
    }
    let stats = |size: usize| -> Result<(Complex64, f64)> {
        let ys = (0..trials as u64)
            .into_par_iter()
            .map(|t| trace_resolvent(&generator(size, t)?, z, alpha))
            .collect::<Result<Vec<_>>>()?;
        Ok(complex_mean_var(&ys))
    };
    let (mean_n, var_n) = stats(n)?;
    let (mean_2n, var_2n) = stats(2 * n)?;
    let ratio = if var_2n > 0.0 {
        var_n / var_2n
    } else if var_n == 0.0 {
        1.0
    } else {
        f64::INFINITY
    };
    Ok(VarianceProbe { n, trials, mean_n, var_n, mean_2n, var_2n, ratio })
}

pub fn variance_scaling_probe(
    spec: &EnsembleSpec,
    z: Complex64,
    alpha: Complex64,
    trials: usize,
) -> Result<VarianceProbe> {
    spec.validate()?;
    variance_probe_from(
        |size, t| {
            let s = EnsembleSpec {
                n: size,
                seed: RandomStream::derive_seed(spec.seed, &format!("variance-n{size}")),
                ..spec.clone()
            };
            s.generate_trial(t)
        },
        spec.n,
        z,
        alpha,
        trials,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_generator_has_zero_variance() {
        let p = variance_probe_from(
            |n, _| Ok(ComplexMatrix::identity(n)),
            5,
            Complex64::new(0.2, 0.0),
            Complex64::new(0.0, 1.0),
            4,
        )
        .unwrap();
        assert!(p.var_n < 1e-30 && p.var_2n < 1e-30);
    }
}
