//! The elliptic law: region, density, CDF and empirical discrepancy.
//!
//! For complex rho = |rho| e^{i theta} the region is the real-parameter
//! ellipse for |rho| rotated by theta/2, i.e. z is inside when
//! z e^{-i theta/2} lies in the ellipse with semi-axes 1 + |rho|, 1 - |rho|.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::quad::integrate_pieces;
use crate::spectra::EmpiricalMeasure2D;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticLaw {
    pub rho: Complex64,
}

impl EllipticLaw {
    pub fn new(rho: Complex64) -> Result<Self> {
        if !(rho.norm() < 1.0) {
            return invalid(format!("elliptic law needs |rho| < 1, got {rho}"));
        }
        Ok(Self { rho })
    }

    pub fn real(rho: f64) -> Result<Self> {
        Self::new(Complex64::new(rho, 0.0))
    }

    pub fn theta(&self) -> f64 {
        if self.rho.im == 0.0 {
            0.0
        } else {
            self.rho.arg()
        }
    }

    /// Semi-axes along Re and Im of the axis frame. For real rho these are
    /// 1 + rho and 1 - rho, so negative rho stretches the imaginary axis.
    pub fn semi_axes(&self) -> (f64, f64) {
        if self.rho.im == 0.0 {
            return (1.0 + self.rho.re, 1.0 - self.rho.re);
        }
        let r = self.rho.norm();
        (1.0 + r, 1.0 - r)
    }

    pub fn area(&self) -> f64 {
        let (a, b) = self.semi_axes();
        PI * a * b
    }

    /// Rotate a point into the frame where the ellipse is axis-aligned.
    pub fn to_axis_frame(&self, z: Complex64) -> Complex64 {
        let th = self.theta();
        if th == 0.0 {
            z
        } else {
            z * Complex64::from_polar(1.0, -0.5 * th)
        }
    }

    pub fn contains(&self, z: Complex64, inflation: f64) -> bool {
        let (a, b) = self.semi_axes();
        let w = self.to_axis_frame(z);
        let (a, b) = (a * inflation, b * inflation);
        (w.re / a).powi(2) + (w.im / b).powi(2) <= 1.0 + 4.0 * f64::EPSILON
    }

    pub fn density(&self, z: Complex64) -> f64 {
        if self.contains(z, 1.0) {
            1.0 / self.area()
        } else {
            0.0
        }
    }

    /// Normalized area of the ellipse intersected with {Re <= x, Im <= y}
    /// (real rho only).
    pub fn cdf(&self, x: f64, y: f64) -> Result<f64> {
        if self.rho.im != 0.0 {
            return Err(LabError::Unsupported("CDF of the rotated complex-rho law".into()));
        }
        let (a, b) = self.semi_axes();
        if x <= -a || y <= -b {
            return Ok(0.0);
        }
        // t = a sin(phi): the vertical chord at t has half-height b cos(phi)
        let phi_hi = if x >= a { FRAC_PI_2 } else { (x / a).asin() };
        let chord = |phi: f64| {
            let h = b * phi.cos();
            let below = (y + h).clamp(0.0, 2.0 * h);
            below * a * phi.cos()
        };
        let mut breaks = Vec::new();
        if y.abs() < b {
            let c = (y.abs() / b).acos();
            breaks.extend([-c, c]);
        }
        let area = integrate_pieces(chord, -FRAC_PI_2, phi_hi, &breaks, 1e-11 * self.area());
        Ok((area / self.area()).clamp(0.0, 1.0))
    }

    /// Corner lattice spanning [-(1+|rho|)-0.2, (1+|rho|)+0.2] in both axes.
    pub fn grid(&self, resolution: usize) -> Vec<f64> {
        let hi = 1.0 + self.rho.norm() + 0.2;
        let m = (resolution - 1) as f64;
        // symmetric construction keeps 0 exactly on the lattice for odd resolution
        (0..resolution).map(|k| hi * (2.0 * k as f64 - m) / m).collect()
    }
}

/// sup over the corner lattice of |F_emp - F_rho|.
pub fn discrepancy(mu: &EmpiricalMeasure2D, law: &EllipticLaw, grid: usize) -> Result<f64> {
    if grid < 2 {
        return invalid("discrepancy grid needs at least 2 points per axis");
    }
    if law.rho.im != 0.0 {
        return Err(LabError::Unsupported(
            "discrepancy against a complex-rho law; rotate the sample with rotate_to_axis_frame first".into(),
        ));
    }
    let g = law.grid(grid);
    let emp = lattice_cdf(&mu.points, &g);
    let mut worst: f64 = 0.0;
    for (i, &x) in g.iter().enumerate() {
        for (j, &y) in g.iter().enumerate() {
            worst = worst.max((emp[i * g.len() + j] - law.cdf(x, y)?).abs());
        }
    }
    Ok(worst)
}

/// sup over the corner lattice (sized for `rho`) of |F_a - F_b|.
pub fn discrepancy_between(a: &EmpiricalMeasure2D, b: &EmpiricalMeasure2D, rho: f64, grid: usize) -> Result<f64> {
    if grid < 2 {
        return invalid("discrepancy grid needs at least 2 points per axis");
    }
    let g = EllipticLaw::real(rho)?.grid(grid);
    let fa = lattice_cdf(&a.points, &g);
    let fb = lattice_cdf(&b.points, &g);
    Ok(fa.iter().zip(&fb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

/// Empirical CDF on all lattice corners, row index = x.
fn lattice_cdf(points: &[Complex64], g: &[f64]) -> Vec<f64> {
    let k = g.len();
    let mut counts = vec![0usize; k * k];
    for p in points {
        let i0 = g.partition_point(|&x| x < p.re);
        let j0 = g.partition_point(|&y| y < p.im);
        if i0 < k && j0 < k {
            counts[i0 * k + j0] += 1;
        }
    }
    // 2D prefix sums turn cell counts into corner CDF values
    for i in 0..k {
        for j in 0..k {
            let mut c = counts[i * k + j];
            if i > 0 {
                c += counts[(i - 1) * k + j];
            }
            if j > 0 {
                c += counts[i * k + j - 1];
            }
            if i > 0 && j > 0 {
                c -= counts[(i - 1) * k + j - 1];
            }
            counts[i * k + j] = c;
        }
    }
    let n = points.len().max(1) as f64;
    counts.into_iter().map(|c| c as f64 / n).collect()
}

pub fn inside_fraction(mu: &EmpiricalMeasure2D, law: &EllipticLaw, inflation: f64) -> f64 {
    if mu.is_empty() {
        return 1.0;
    }
    mu.points.iter().filter(|&&z| law.contains(z, inflation)).count() as f64 / mu.len() as f64
}

/// Map a sample for complex rho into the frame of the real law with parameter |rho|.
pub fn rotate_to_axis_frame(mu: &EmpiricalMeasure2D, rho: Complex64) -> Result<(EmpiricalMeasure2D, EllipticLaw)> {
    let law = EllipticLaw::new(rho)?;
    if rho.im == 0.0 {
        return Ok((mu.clone(), law));
    }
    let pts = mu.points.iter().map(|&z| law.to_axis_frame(z)).collect();
    Ok((EmpiricalMeasure2D::new(pts), EllipticLaw::real(rho.norm())?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership_examples() {
        let law = EllipticLaw::real(0.5).unwrap();
        assert!(law.contains(Complex64::new(1.5, 0.0), 1.0));
        assert!(!law.contains(Complex64::new(1.5, 0.01), 1.0));
        let disk = EllipticLaw::real(0.0).unwrap();
        assert!(disk.contains(Complex64::from_polar(1.0, 0.7), 1.0));
        let rot = EllipticLaw::new(Complex64::from_polar(0.5, FRAC_PI_2)).unwrap();
        let q = std::f64::consts::FRAC_PI_4;
        assert!(rot.contains(Complex64::from_polar(1.5, q), 1.0));
        assert!(!rot.contains(Complex64::from_polar(1.5, -q), 1.0));
        let neg = EllipticLaw::real(-0.5).unwrap();
        assert!(neg.contains(Complex64::new(0.0, 1.4), 1.0));
        assert!(!neg.contains(Complex64::new(1.4, 0.0), 1.0));
        // the same set as the complex parametrization with theta = pi
        let flip = EllipticLaw::new(Complex64::from_polar(0.5, PI - 1e-9)).unwrap();
        for k in 0..40 {
            let z = Complex64::from_polar(0.3 + 0.03 * k as f64, 0.4 * k as f64);
            assert_eq!(neg.contains(z, 1.0), flip.contains(z, 1.0), "{z}");
        }
    }

    #[test]
    fn cdf_examples() {
        let law = EllipticLaw::real(0.5).unwrap();
        assert!((law.cdf(f64::INFINITY, f64::INFINITY).unwrap() - 1.0).abs() < 1e-12);
        assert!((law.cdf(0.0, f64::INFINITY).unwrap() - 0.5).abs() < 1e-10);
        let disk = EllipticLaw::real(0.0).unwrap();
        let want = (FRAC_PI_2 + PI / 6.0 + 3f64.sqrt() / 4.0) / PI;
        assert!((disk.cdf(0.5, f64::INFINITY).unwrap() - want).abs() < 1e-9);
        assert_eq!(law.cdf(-2.0, 0.3).unwrap(), 0.0);
        assert!(EllipticLaw::new(Complex64::new(0.0, 0.5)).unwrap().cdf(0.0, 0.0).is_err());
    }

    #[test]
    fn point_mass_discrepancy() {
        let mu = EmpiricalMeasure2D::new(vec![Complex64::new(0.0, 0.0)]);
        let law = EllipticLaw::real(0.0).unwrap();
        assert!((discrepancy(&mu, &law, 41).unwrap() - 0.75).abs() < 1e-9);
        assert!(discrepancy(&mu, &law, 1).is_err());
    }

    #[test]
    fn lattice_cdf_matches_direct_count() {
        let pts: Vec<Complex64> =
            (0..50).map(|k| Complex64::new((k as f64 * 0.37).sin(), (k as f64 * 0.91).cos())).collect();
        let g = EllipticLaw::real(0.3).unwrap().grid(9);
        let lat = lattice_cdf(&pts, &g);
        for (i, &x) in g.iter().enumerate() {
            for (j, &y) in g.iter().enumerate() {
                assert_eq!(lat[i * 9 + j], crate::spectra::esd_eval(&pts, x, y));
            }
        }
    }
}
