//! Least singular value tails of M_n = F_n + X_n.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::EnsembleSpec;
use crate::error::{invalid, LabError, Result};
use crate::linalg::{singular_values, Lu};
use crate::matrix::ComplexMatrix;
use crate::stats::{slope, wilson, Interval, Z95};
use crate::Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub t: f64,
    pub count: u64,
    pub p: f64,
    pub ci: Interval,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub spec: EnsembleSpec,
    pub trials: u64,
    /// Trials whose singular values could not be computed; excluded from the tails.
    pub failures: u64,
    pub tail_probs: Vec<TailPoint>,
    /// Slope of log p against log t over thresholds with 0 < p < 1.
    pub fitted_exponent: Option<f64>,
    pub sigma_min: Vec<f64>,
}

impl TailReport {
    pub fn write_csv(&self, w: &mut impl std::io::Write) -> std::io::Result<()> {
        writeln!(w, "t,p,ci_lo,ci_hi")?;
        for p in &self.tail_probs {
            writeln!(w, "{:e},{},{},{}", p.t, p.p, p.ci.lo, p.ci.hi)?;
        }
        Ok(())
    }
}

/// Smallest singular value of every trial's M_n, in trial order.
pub fn sigma_min_samples(spec: &EnsembleSpec, trials: u64) -> Result<Vec<Result<f64>>> {
    spec.validate()?;
    Ok((0..trials)
        .into_par_iter()
        .map(|t| {
            let m = spec.generate_trial(t)?;
            let sv = singular_values(&m)?;
            Ok(sv.last().copied().unwrap_or(0.0))
        })
        .collect())
}

pub fn lsv_tail(spec: &EnsembleSpec, thresholds: &[f64], trials: u64) -> Result<TailReport> {
    if trials < 100 {
        return invalid(format!("lsv_tail needs at least 100 trials, got {trials}"));
    }
    if thresholds.is_empty() || thresholds.iter().any(|t| !(*t >= 0.0)) {
        return invalid("thresholds must be a nonempty list of nonnegative numbers");
    }
    let samples = sigma_min_samples(spec, trials)?;
    let sigma_min: Vec<f64> = samples.iter().filter_map(|r| r.as_ref().ok().copied()).collect();
    let failures = trials - sigma_min.len() as u64;
    let ok = sigma_min.len() as u64;
    let mut ts = thresholds.to_vec();
    ts.sort_by(f64::total_cmp);
    let tail_probs: Vec<TailPoint> = ts
        .iter()
        .map(|&t| {
            let count = sigma_min.iter().filter(|&&s| s <= t).count() as u64;
            TailPoint { t, count, p: count as f64 / ok.max(1) as f64, ci: wilson(count, ok, Z95) }
        })
        .collect();
    let fit: Vec<(f64, f64)> =
        tail_probs.iter().filter(|p| p.p > 0.0 && p.p < 1.0 && p.t > 0.0).map(|p| (p.t.ln(), p.p.ln())).collect();
    let (x, y): (Vec<f64>, Vec<f64>) = fit.into_iter().unzip();
    Ok(TailReport { spec: spec.clone(), trials, failures, tail_probs, fitted_exponent: slope(&x, &y), sigma_min })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularityReport {
    pub trials: u64,
    pub singular: u64,
    pub rate: f64,
    pub ci: Interval,
}

/// Relative threshold below which a matrix counts as numerically singular.
pub const SINGULAR_RTOL: f64 = 1e-12;

fn is_singular(m: &ComplexMatrix) -> Result<bool> {
    let sv = singular_values(m)?;
    let s1 = sv.first().copied().unwrap_or(0.0);
    Ok(sv.last().copied().unwrap_or(0.0) <= SINGULAR_RTOL * s1)
}

/// Fraction of trials with sigma_n <= 1e-12 sigma_1.
pub fn singularity_rate(spec: &EnsembleSpec, trials: u64) -> Result<SingularityReport> {
    spec.validate()?;
    if trials == 0 {
        return invalid("need at least one trial");
    }
    let flags: Vec<bool> =
        (0..trials).into_par_iter().map(|t| is_singular(&spec.generate_trial(t)?)).collect::<Result<_>>()?;
    let singular = flags.iter().filter(|&&s| s).count() as u64;
    Ok(SingularityReport { trials, singular, rate: singular as f64 / trials as f64, ci: wilson(singular, trials, Z95) })
}

/// Exact singularity probability by enumerating every matrix of a
/// finite-support ensemble (tiny n only).
pub fn singularity_rate_exact(spec: &EnsembleSpec) -> Result<f64> {
    spec.validate()?;
    let n = spec.n;
    let unsupported = || LabError::Unsupported("exact singularity rate needs finite-support laws".into());
    let pairs = spec.pair.finite_support().ok_or_else(unsupported)?;
    let diag = spec.diagonal_law().support().ok_or_else(unsupported)?;
    let npairs = n * (n - 1) / 2;
    let count = (diag.len() as u128).pow(n as u32) * (pairs.len() as u128).pow(npairs as u32);
    if count > 1_000_000 {
        return Err(LabError::TooLarge { size: count, cap: 1_000_000 });
    }
    let f = spec.perturbation.matrix(n);
    let sizes: Vec<usize> =
        std::iter::repeat_n(diag.len(), n).chain(std::iter::repeat_n(pairs.len(), npairs)).collect();
    let mut idx = vec![0usize; sizes.len()];
    let mut rate = 0.0;
    loop {
        let mut m = ComplexMatrix::zeros(n);
        let mut p = 1.0;
        for i in 0..n {
            m[(i, i)] = Complex64::new(diag[idx[i]].value, 0.0);
            p *= diag[idx[i]].p;
        }
        let mut k = n;
        for i in 0..n {
            for j in i + 1..n {
                let a = pairs[idx[k]];
                m[(i, j)] = a.xi1;
                m[(j, i)] = a.xi2;
                p *= a.p;
                k += 1;
            }
        }
        if let Some(f) = &f {
            m = m.add(f)?;
        }
        if is_singular(&m)? {
            rate += p;
        }
        let mut d = 0;
        while d < idx.len() {
            idx[d] += 1;
            if idx[d] < sizes[d] {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
        if d == idx.len() {
            return Ok(rate);
        }
    }
}

/// Upper estimate of sigma_n from power iteration on (M^-1)(M^-1)*; the
/// returned value is ||M x|| for the final unit vector x, so it never
/// undershoots the true sigma_n.
pub fn sigma_min_power(m: &ComplexMatrix, iterations: usize) -> Result<f64> {
    let n = m.n();
    let lu = Lu::factor(n, m.as_slice().to_vec())?;
    let w = ComplexMatrix::from_vec(n, lu.inverse())?;
    let wh = w.adjoint();
    let mut x: Vec<Complex64> =
        (0..n).map(|i| Complex64::new(1.0 + (i % 7) as f64 * 0.1, (i % 3) as f64 * 0.1)).collect();
    for _ in 0..iterations {
        x = w.matvec(&wh.matvec(&x));
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(LabError::Singular("power iteration collapsed".into()));
        }
        x.iter_mut().for_each(|z| *z /= norm);
    }
    // W W* = V S^-2 V*, so x tends to the right singular vector of sigma_n
    let my = m.matvec(&x);
    Ok(my.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::AtomPairSpec;

    #[test]
    fn two_by_two_signs() {
        // [[d1, a], [b, d2]] with independent signs is singular iff d1 d2 = a b
        let spec = EnsembleSpec::new(2, AtomPairSpec::discrete_mix(0.0), 3);
        assert_eq!(singularity_rate_exact(&spec).unwrap(), 0.5);
        let mc = singularity_rate(&spec, 4000).unwrap();
        assert!(mc.ci.lo <= 0.5 && 0.5 <= mc.ci.hi, "{mc:?}");
    }

    #[test]
    fn gaussian_never_singular() {
        let spec = EnsembleSpec::new(20, AtomPairSpec::gaussian_real(0.3), 1);
        assert_eq!(singularity_rate(&spec, 50).unwrap().singular, 0);
    }

    #[test]
    fn huge_threshold_gives_one() {
        let spec = EnsembleSpec::new(10, AtomPairSpec::gaussian_real(0.0), 2);
        let r = lsv_tail(&spec, &[1e-3, 1e9], 100).unwrap();
        assert_eq!(r.tail_probs[1].p, 1.0);
        assert!(r.tail_probs[0].p <= r.tail_probs[1].p);
        assert!(lsv_tail(&spec, &[1.0], 10).is_err());
    }

    #[test]
    fn power_iteration_bounds_sigma_min() {
        let spec = EnsembleSpec::new(12, AtomPairSpec::gaussian_complex(0.5, 0.2), 8);
        let m = spec.generate().unwrap();
        let s = *singular_values(&m).unwrap().last().unwrap();
        let p = sigma_min_power(&m, 200).unwrap();
        assert!(p >= s * (1.0 - 1e-10));
        assert!(p <= s * (1.0 + 1e-6), "{p} vs {s}");
    }
}
