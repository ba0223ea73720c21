//! Hermitization, logarithmic potentials, resolvent traces and the limiting
//! (s, t, u) system.

pub mod levy;
pub mod moments;
pub mod potential;
pub mod resolvent;
pub mod stieltjes;
pub mod variance;

use num_complex::Complex64;

pub use levy::{levy_distance, levy_distance_empirical, Cdf};
pub use moments::{moments_match, MomentMatch};
pub use potential::{
    log_potential, potential_match, small_sigma_profile, uniform_integrability_diag, PotentialMatch, PotentialOptions,
};
pub use resolvent::{
    empirical_stu, empirical_stu_with, hermitized_block, s_from_singular_values, ResolventMethod, ResolventTraces,
};
pub use stieltjes::{nu_z_density, solve_stu_system, solve_stu_system_with, NuZ, SolverOptions, StieltjesState};
pub use variance::{variance_probe_from, variance_scaling_probe, VarianceProbe};

use crate::atoms::AtomPairSpec;
use crate::ensemble::{truncate_standardize, EnsembleSpec};
use crate::error::Result;
use crate::matrix::ComplexMatrix;
use crate::spectra::{shifted_singular_values, EmpiricalMeasure1D};

/// Eigenvalue measure of H = (X/sqrt(n) - z)^* (X/sqrt(n) - z).
pub fn h_measure(x: &ComplexMatrix, z: Complex64) -> Result<EmpiricalMeasure1D> {
    let sv = shifted_singular_values(x, z)?;
    Ok(EmpiricalMeasure1D::new(sv.iter().map(|s| s * s).collect()))
}

/// Levy distance between the eigenvalue measures of H_n and of its truncated,
/// re-standardized counterpart.
pub fn truncation_distance(x: &ComplexMatrix, pair: &AtomPairSpec, delta: f64, z: Complex64) -> Result<f64> {
    let xt = truncate_standardize(x, delta, pair)?;
    Ok(levy_distance_empirical(&h_measure(x, z)?, &h_measure(&xt, z)?))
}

/// Convenience wrapper drawing X from `spec` for one trial.
pub fn truncation_distance_trial(spec: &EnsembleSpec, trial: u64, delta: f64, z: Complex64) -> Result<f64> {
    truncation_distance(&spec.generate_trial(trial)?, &spec.pair, delta, z)
}
