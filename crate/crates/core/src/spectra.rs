//! Eigenvalues, singular values and the empirical measures built from them.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg;
use crate::matrix::ComplexMatrix;

pub use crate::linalg::{eigenvalues, singular_values};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    pub eigenvalues: Vec<Complex64>,
    /// Sorted descending.
    pub singular_values: Vec<f64>,
}

impl SpectralData {
    pub fn of(a: &ComplexMatrix) -> Result<Self> {
        Ok(Self { eigenvalues: linalg::eigenvalues(a)?, singular_values: linalg::singular_values(a)? })
    }

    /// log |prod lambda| - log prod sigma; zero up to rounding.
    pub fn log_det_defect(&self) -> f64 {
        let le: f64 = self.eigenvalues.iter().map(|l| l.norm().ln()).sum();
        let ls: f64 = self.singular_values.iter().map(|s| s.ln()).sum();
        le - ls
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure2D {
    pub points: Vec<Complex64>,
}

impl EmpiricalMeasure2D {
    pub fn new(points: Vec<Complex64>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.points.len() as f64
    }

    pub fn cdf(&self, x: f64, y: f64) -> f64 {
        esd_eval(&self.points, x, y)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure1D {
    /// Sorted ascending.
    pub points: Vec<f64>,
}

impl EmpiricalMeasure1D {
    pub fn new(mut points: Vec<f64>) -> Self {
        points.sort_by(f64::total_cmp);
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.points.len() as f64
    }

    /// Mass of (-inf, x].
    pub fn cdf(&self, x: f64) -> f64 {
        self.points.partition_point(|&p| p <= x) as f64 / self.points.len() as f64
    }

    /// Mass of (-inf, x).
    pub fn cdf_left(&self, x: f64) -> f64 {
        self.points.partition_point(|&p| p < x) as f64 / self.points.len() as f64
    }
}

/// Fraction of eigenvalues with Re <= x and Im <= y.
pub fn esd_eval(eigs: &[Complex64], x: f64, y: f64) -> f64 {
    if eigs.is_empty() {
        return 0.0;
    }
    eigs.iter().filter(|l| l.re <= x && l.im <= y).count() as f64 / eigs.len() as f64
}

/// Eigenvalue measure of A / sqrt(n) and singular-value measure of A / sqrt(n) - z I.
pub fn scaled_measures(a: &ComplexMatrix, z: Complex64) -> Result<(EmpiricalMeasure2D, EmpiricalMeasure1D)> {
    let scaled = a.scaled(1.0 / (a.n() as f64).sqrt());
    let eigs = linalg::eigenvalues(&scaled)?;
    let sv = linalg::singular_values(&scaled.shifted(z))?;
    Ok((EmpiricalMeasure2D::new(eigs), EmpiricalMeasure1D::new(sv)))
}

/// Singular values of A / sqrt(n) - z I, sorted descending.
pub fn shifted_singular_values(a: &ComplexMatrix, z: Complex64) -> Result<Vec<f64>> {
    let scaled = a.scaled(1.0 / (a.n() as f64).sqrt());
    linalg::singular_values(&scaled.shifted(z))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumChecks {
    /// max |lambda| - sigma_1 (should be <= rounding).
    pub weyl_excess: f64,
    /// |sum lambda - tr A|.
    pub trace_defect: f64,
    /// |sum sigma^2 - ||A||_2^2| / ||A||_2^2.
    pub hs_defect: f64,
}

pub fn check_spectrum(a: &ComplexMatrix, data: &SpectralData) -> SpectrumChecks {
    let max_l = data.eigenvalues.iter().map(|l| l.norm()).fold(0.0, f64::max);
    let s1 = data.singular_values.first().copied().unwrap_or(0.0);
    let sum: Complex64 = data.eigenvalues.iter().sum();
    let hs2 = crate::matrix::hs_norm(a).powi(2);
    let sv2: f64 = data.singular_values.iter().map(|s| s * s).sum();
    SpectrumChecks {
        weyl_excess: max_l - s1,
        trace_defect: (sum - a.trace()).norm(),
        hs_defect: if hs2 > 0.0 { (sv2 - hs2).abs() / hs2 } else { sv2 },
    }
}

pub fn write_eigenvalues_csv(w: &mut impl Write, eigs: &[Complex64]) -> std::io::Result<()> {
    writeln!(w, "re,im")?;
    for l in eigs {
        writeln!(w, "{:.12e},{:.12e}", l.re, l.im)?;
    }
    Ok(())
}

pub fn write_singular_values_csv(w: &mut impl Write, sv: &[f64]) -> std::io::Result<()> {
    writeln!(w, "sigma")?;
    for s in sv {
        writeln!(w, "{s:.12e}")?;
    }
    Ok(())
}
