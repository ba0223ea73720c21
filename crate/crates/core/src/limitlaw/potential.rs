use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::stieltjes::{default_grid, limit_potential, nu_z_density};
use crate::error::{invalid, LabError, Result};
use crate::matrix::ComplexMatrix;
use crate::spectra::{shifted_singular_values, EmpiricalMeasure1D};

/// -(1/n) sum log sigma_i.
pub fn log_potential(nu: &EmpiricalMeasure1D) -> Result<f64> {
    if nu.is_empty() {
        return invalid("log potential of an empty measure");
    }
    if nu.points[0] <= 0.0 {
        return Err(LabError::Singular("zero singular value in log potential".into()));
    }
    Ok(-nu.points.iter().map(|s| s.ln()).sum::<f64>() / nu.len() as f64)
}

/// (integral s^p d nu, integral s^-p d nu).
pub fn uniform_integrability_diag(nu: &EmpiricalMeasure1D, p: f64) -> Result<(f64, f64)> {
    if !(p > 0.0 && p < 1.0) {
        return invalid(format!("moment exponent {p} outside (0, 1)"));
    }
    if nu.is_empty() {
        return invalid("empty measure");
    }
    if nu.points[0] <= 0.0 {
        return Err(LabError::Singular("zero singular value in negative moment".into()));
    }
    let w = nu.weight();
    let pos = nu.points.iter().map(|s| s.powf(p)).sum::<f64>() * w;
    let neg = nu.points.iter().map(|s| s.powf(-p)).sum::<f64>() * w;
    Ok((pos, neg))
}

/// Indices i in [n^{1-gamma}, n-1] with sigma_{n-i} < c0 i / n, where `sv`
/// is sorted descending and sigma_k (1-based) is sv[k-1].
pub fn small_sigma_profile(sv: &[f64], c0: f64, gamma: f64) -> Vec<usize> {
    let n = sv.len();
    if n < 2 {
        return Vec::new();
    }
    let start = ((n as f64).powf(1.0 - gamma).ceil() as usize).max(1);
    (start..n).filter(|&i| sv[n - i - 1] < c0 * i as f64 / n as f64).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialOptions {
    pub epsilon: f64,
    pub grid_step: f64,
}

impl Default for PotentialOptions {
    fn default() -> Self {
        Self { epsilon: 1e-3, grid_step: 1e-2 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialMatch {
    pub z: Complex64,
    pub u_emp: f64,
    /// None in empirical-only mode.
    pub u_limit: Option<f64>,
    pub gap: Option<f64>,
}

/// Compare -(1/n) log|det(X/sqrt(n) - z)| with the potential of the limiting
/// nu_z; with `rho = None` only the empirical side is computed.
pub fn potential_match(
    x: &ComplexMatrix,
    rho: Option<f64>,
    z: Complex64,
    opts: &PotentialOptions,
) -> Result<PotentialMatch> {
    let sv = shifted_singular_values(x, z)?;
    let u_emp = log_potential(&EmpiricalMeasure1D::new(sv))?;
    let u_limit = match rho {
        Some(r) => Some(limit_potential_at(r, z, opts)?),
        None => None,
    };
    Ok(PotentialMatch { z, u_emp, u_limit, gap: u_limit.map(|u| (u - u_emp).abs()) })
}

pub fn limit_potential_at(rho: f64, z: Complex64, opts: &PotentialOptions) -> Result<f64> {
    let grid = default_grid(z, opts.grid_step);
    let nu = nu_z_density(rho, z, &grid, opts.epsilon)?;
    Ok(limit_potential(&nu))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_examples() {
        assert_eq!(log_potential(&EmpiricalMeasure1D::new(vec![1.0; 5])).unwrap(), 0.0);
        assert!(log_potential(&EmpiricalMeasure1D::new(vec![2.0, 0.5])).unwrap().abs() < 1e-15);
        assert!(log_potential(&EmpiricalMeasure1D::new(vec![0.0, 1.0])).is_err());
        let z = Complex64::new(2.0, 0.0);
        let m = potential_match(&ComplexMatrix::zeros(3), None, z, &PotentialOptions::default()).unwrap();
        assert!((m.u_emp + 2f64.ln()).abs() < 1e-14);
        assert!(m.u_limit.is_none());
    }

    #[test]
    fn integrability_examples() {
        let (a, b) = uniform_integrability_diag(&EmpiricalMeasure1D::new(vec![1.0]), 0.5).unwrap();
        assert_eq!((a, b), (1.0, 1.0));
        let (a, b) = uniform_integrability_diag(&EmpiricalMeasure1D::new(vec![0.25, 4.0]), 0.5).unwrap();
        assert!((a - 1.25).abs() < 1e-15 && (b - 1.25).abs() < 1e-15);
    }

    #[test]
    fn profile_examples() {
        let n = 50;
        // sigma_{n-i} = i/n
        let ramp: Vec<f64> = (0..n).map(|k| (n - 1 - k) as f64 / n as f64).collect();
        assert!(small_sigma_profile(&ramp, 0.5, 0.3).is_empty());
        assert!(small_sigma_profile(&vec![1.0; n], 0.5, 0.3).is_empty());
        let mut bad = vec![1.0; n];
        bad[n - 2] = 1e-6;
        assert_eq!(small_sigma_profile(&bad, 0.5, 1.0), vec![1]);
    }
}
