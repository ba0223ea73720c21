//! The self-consistent (s, t, u) system for the Hermitized resolvent and its
//! solution by Newton continuation in Im(alpha).
//!
//! With the o(1) terms dropped the system reads
//!   1 + alpha s + s^2 + (rho/2)(u^2 + t^2) + (conj(z)/2) u + (z/2) t = 0
//!   alpha t + t s + rho s u + conj(z) s = 0
//!   alpha u + u s + rho s t + z s = 0.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::linalg::Lu;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StieltjesState {
    pub alpha: Complex64,
    pub z: Complex64,
    pub s: Complex64,
    pub t: Complex64,
    pub u: Complex64,
    /// max modulus of the three equation defects.
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Im(alpha) where the continuation starts from s = -1/alpha, t = u = 0.
    pub start_im: f64,
    /// Geometric factor applied to Im(alpha) per continuation step.
    pub step_factor: f64,
    pub tolerance: f64,
    pub max_newton: usize,
    pub max_halvings: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { start_im: 100.0, step_factor: 0.8, tolerance: 1e-12, max_newton: 40, max_halvings: 30 }
    }
}

pub fn residuals(rho: f64, z: Complex64, alpha: Complex64, s: Complex64, t: Complex64, u: Complex64) -> [Complex64; 3] {
    let zc = z.conj();
    [
        1.0 + alpha * s + s * s + 0.5 * rho * (u * u + t * t) + 0.5 * zc * u + 0.5 * z * t,
        alpha * t + t * s + rho * s * u + zc * s,
        alpha * u + u * s + rho * s * t + z * s,
    ]
}

fn max_norm(r: &[Complex64; 3]) -> f64 {
    r.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn jacobian(rho: f64, z: Complex64, alpha: Complex64, s: Complex64, t: Complex64, u: Complex64) -> Vec<Complex64> {
    let zc = z.conj();
    vec![
        alpha + 2.0 * s,
        rho * t + 0.5 * z,
        rho * u + 0.5 * zc,
        t + rho * u + zc,
        alpha + s,
        rho * s,
        u + rho * t + z,
        rho * s,
        alpha + s,
    ]
}

/// Newton iteration from `x`; returns the converged point or None.
fn newton(
    rho: f64,
    z: Complex64,
    alpha: Complex64,
    mut x: [Complex64; 3],
    opts: &SolverOptions,
) -> Option<([Complex64; 3], f64)> {
    let mut r = residuals(rho, z, alpha, x[0], x[1], x[2]);
    let mut res = max_norm(&r);
    for _ in 0..opts.max_newton {
        if res <= 0.1 * opts.tolerance {
            break;
        }
        let lu = Lu::factor(3, jacobian(rho, z, alpha, x[0], x[1], x[2])).ok()?;
        let dx = lu.solve(&r);
        let mut next = x;
        for k in 0..3 {
            next[k] -= dx[k];
        }
        let r_next = residuals(rho, z, alpha, next[0], next[1], next[2]);
        let res_next = max_norm(&r_next);
        if !res_next.is_finite() {
            return None;
        }
        let step = dx.iter().map(|d| d.norm()).fold(0.0, f64::max);
        x = next;
        r = r_next;
        let stalled = res_next >= res && step <= 1e-15 * (1.0 + x[0].norm());
        res = res_next;
        if stalled {
            break;
        }
    }
    (res <= opts.tolerance).then_some((x, res))
}

pub fn solve_stu_system(rho: f64, z: Complex64, alpha: Complex64) -> Result<StieltjesState> {
    solve_stu_system_with(rho, z, alpha, &SolverOptions::default())
}

pub fn solve_stu_system_with(rho: f64, z: Complex64, alpha: Complex64, opts: &SolverOptions) -> Result<StieltjesState> {
    if !(alpha.im > 0.0) {
        return invalid(format!("Stieltjes system needs Im(alpha) > 0, got {alpha}"));
    }
    if !(rho > -1.0 && rho < 1.0) {
        return invalid(format!("rho = {rho} outside (-1, 1)"));
    }
    if !(opts.step_factor > 0.0 && opts.step_factor < 1.0) {
        return invalid("continuation step factor must lie in (0, 1)");
    }
    let target = alpha.im;
    let mut im = target.max(opts.start_im);
    let a0 = Complex64::new(alpha.re, im);
    let seed = [-1.0 / a0, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
    let state = |a: Complex64, x: [Complex64; 3], res: f64| StieltjesState {
        alpha: a,
        z,
        s: x[0],
        t: x[1],
        u: x[2],
        residual: res,
    };
    let fail = |last: StieltjesState| LabError::NonConvergence {
        routine: "Stieltjes continuation",
        iterations: opts.max_halvings,
        partial: vec![last.alpha, last.s, last.t, last.u],
    };
    let Some((mut x, mut res)) = newton(rho, z, a0, seed, opts).filter(|(x, _)| x[0].im > 0.0) else {
        return Err(fail(state(a0, seed, f64::NAN)));
    };
    let mut prev: Option<(f64, [Complex64; 3])> = None;
    while im > target {
        let mut next_im = (im * opts.step_factor).max(target);
        let mut halvings = 0;
        loop {
            // secant predictor in log(Im alpha) once two points are known
            let guess = match prev {
                Some((pim, px)) => {
                    let w = (next_im.ln() - im.ln()) / (im.ln() - pim.ln());
                    std::array::from_fn(|k| x[k] + (x[k] - px[k]) * w)
                }
                None => x,
            };
            let a = Complex64::new(alpha.re, next_im);
            let attempt =
                newton(rho, z, a, guess, opts).or_else(|| newton(rho, z, a, x, opts)).filter(|(y, _)| y[0].im > 0.0);
            if let Some((y, r)) = attempt {
                prev = Some((im, x));
                x = y;
                res = r;
                im = next_im;
                break;
            }
            halvings += 1;
            if halvings > opts.max_halvings {
                return Err(fail(state(Complex64::new(alpha.re, im), x, res)));
            }
            next_im = (im * next_im).sqrt();
            prev = None;
        }
    }
    Ok(state(alpha, x, res))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NuZ {
    pub rho: f64,
    pub z: Complex64,
    pub epsilon: f64,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
}

impl NuZ {
    /// Midpoint-rule mass; assumes an equally spaced grid.
    pub fn total_mass(&self) -> f64 {
        if self.grid.len() < 2 {
            return 0.0;
        }
        let h = self.grid[1] - self.grid[0];
        self.density.iter().sum::<f64>() * h
    }
}

/// Symmetric midpoint grid with spacing h covering the support of nu_z.
pub fn default_grid(z: Complex64, h: f64) -> Vec<f64> {
    let half = z.norm() + 3.0;
    let m = (half / h).ceil() as usize;
    (0..2 * m).map(|k| (k as f64 - m as f64 + 0.5) * h).collect()
}

/// Density of the symmetrized nu_z by Stieltjes inversion at height epsilon.
pub fn nu_z_density(rho: f64, z: Complex64, grid: &[f64], epsilon: f64) -> Result<NuZ> {
    if !(epsilon > 0.0) {
        return invalid("Stieltjes inversion height must be positive");
    }
    let density = grid
        .par_iter()
        .map(|&x| solve_stu_system(rho, z, Complex64::new(x.abs(), epsilon)).map(|st| st.s.im / std::f64::consts::PI))
        .collect::<Result<Vec<f64>>>()?;
    Ok(NuZ { rho, z, epsilon, grid: grid.to_vec(), density })
}

/// U(z) = -integral_0^inf log(x) d nu_z(x), from a symmetric midpoint grid.
pub fn limit_potential(nu: &NuZ) -> f64 {
    if nu.grid.len() < 2 {
        return 0.0;
    }
    let h = nu.grid[1] - nu.grid[0];
    -nu.grid.iter().zip(&nu.density).filter(|(&x, _)| x > 0.0).map(|(&x, &d)| x.ln() * 2.0 * d * h).sum::<f64>()
}
