//! Condition-C0 random matrices X_n, deterministic perturbations F_n and M_n = F_n + X_n.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::atoms::{AtomPairSpec, PairKind, ScalarAtomSpec};
use crate::error::{invalid, LabError, Result};
use crate::linalg::singular_values;
use crate::matrix::{hs_norm, ComplexMatrix};
use crate::quad::integrate_pieces;
use crate::rng::RandomStream;

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PerturbationSpec {
    #[default]
    Zero,
    /// F = scale * n * sum_k u_k u_k^T with orthonormal real u_k, so that
    /// (1/n^2) ||F||_2^2 = rank * scale^2.
    LowRank { rank: usize, scale: f64 },
    /// f_ij = n^alpha cos(2 pi i j / n).
    EntryBounded { alpha: f64 },
}

impl PerturbationSpec {
    pub fn validate(&self, n: usize) -> Result<()> {
        match *self {
            Self::LowRank { rank, scale } if rank > n || !scale.is_finite() => {
                invalid(format!("low-rank perturbation needs rank <= n and finite scale (rank {rank}, n {n})"))
            }
            Self::EntryBounded { alpha } if !alpha.is_finite() => invalid("entry bound exponent must be finite"),
            _ => Ok(()),
        }
    }

    pub fn matrix(&self, n: usize) -> Option<ComplexMatrix> {
        match *self {
            Self::Zero => None,
            Self::LowRank { rank, scale } => {
                let u: Vec<Vec<f64>> = (0..rank).map(|k| dct_vector(n, k)).collect();
                Some(ComplexMatrix::from_fn(n, |i, j| {
                    let s: f64 = u.iter().map(|v| v[i] * v[j]).sum();
                    Complex64::new(scale * n as f64 * s, 0.0)
                }))
            }
            Self::EntryBounded { alpha } => {
                let b = (n as f64).powf(alpha);
                Some(ComplexMatrix::from_fn(n, |i, j| {
                    let phase = ((i * j) % n) as f64 / n as f64;
                    Complex64::new(b * (2.0 * PI * phase).cos(), 0.0)
                }))
            }
        }
    }
}

/// k-th DCT-II basis vector of length n (unit norm).
fn dct_vector(n: usize, k: usize) -> Vec<f64> {
    let nf = n as f64;
    if k == 0 {
        return vec![1.0 / nf.sqrt(); n];
    }
    let c = (2.0 / nf).sqrt();
    (0..n).map(|i| c * (PI * k as f64 * (i as f64 + 0.5) / nf).cos()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n: usize,
    pub pair: AtomPairSpec,
    /// Defaults to the standardized law of Re xi1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagonal: Option<ScalarAtomSpec>,
    #[serde(default)]
    pub perturbation: PerturbationSpec,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(n: usize, pair: AtomPairSpec, seed: u64) -> Self {
        Self { n, pair, diagonal: None, perturbation: PerturbationSpec::Zero, seed }
    }

    pub fn with_perturbation(mut self, p: PerturbationSpec) -> Self {
        self.perturbation = p;
        self
    }

    pub fn with_diagonal(mut self, d: ScalarAtomSpec) -> Self {
        self.diagonal = Some(d);
        self
    }

    pub fn diagonal_law(&self) -> ScalarAtomSpec {
        self.diagonal.clone().unwrap_or_else(|| self.pair.default_diagonal())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return invalid("ensemble dimension must be at least 1");
        }
        self.pair.validate()?;
        let d = self.diagonal_law();
        d.validate()?;
        if d.mean().abs() > 1e-12 {
            return invalid("diagonal law must have mean zero");
        }
        self.perturbation.validate(self.n)
    }

    pub fn generate(&self) -> Result<ComplexMatrix> {
        self.generate_trial(0)
    }

    /// Draw M_n = F_n + X_n for one trial. Row i uses its own random stream
    /// (seed, trial, i) for x_ii and the pairs (x_ij, x_ji), j > i.
    pub fn generate_trial(&self, trial: u64) -> Result<ComplexMatrix> {
        self.validate()?;
        let n = self.n;
        let diag = self.diagonal_law();
        let mut m = ComplexMatrix::zeros(n);
        for i in 0..n {
            let mut rng = RandomStream::new(self.seed, trial, i as u64);
            m[(i, i)] = Complex64::new(diag.sample(&mut rng), 0.0);
            for j in i + 1..n {
                let (a, b) = self.pair.sample(&mut rng);
                m[(i, j)] = a;
                m[(j, i)] = b;
            }
        }
        if let Some(f) = self.perturbation.matrix(n) {
            m = m.add(&f)?;
        }
        Ok(m)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationReport {
    pub numerical_rank: usize,
    pub normalized_hs_sq: f64,
    pub max_entry: f64,
    pub ok: bool,
}

/// Check rank, Hilbert-Schmidt and entry bounds of the perturbation for dimension n.
pub fn check_perturbation(p: &PerturbationSpec, n: usize) -> Result<PerturbationReport> {
    let Some(f) = p.matrix(n) else {
        return Ok(PerturbationReport { numerical_rank: 0, normalized_hs_sq: 0.0, max_entry: 0.0, ok: true });
    };
    let sv = singular_values(&f)?;
    let tol = sv.first().copied().unwrap_or(0.0) * n as f64 * f64::EPSILON * 16.0;
    let numerical_rank = sv.iter().filter(|&&s| s > tol).count();
    let normalized_hs_sq = hs_norm(&f).powi(2) / (n as f64 * n as f64);
    let max_entry = f.max_abs();
    let ok = match *p {
        PerturbationSpec::Zero => true,
        PerturbationSpec::LowRank { rank, scale } => {
            numerical_rank <= rank && normalized_hs_sq <= rank as f64 * scale * scale * (1.0 + 1e-9)
        }
        PerturbationSpec::EntryBounded { alpha } => max_entry <= (n as f64).powf(alpha) * (1.0 + 1e-12),
    };
    Ok(PerturbationReport { numerical_rank, normalized_hs_sq, max_entry, ok })
}

/// Truncated first and second moments of a marginal: (E[x 1{|x|<=T}], E[|x|^2 1{|x|<=T}]).
fn truncated_moments(pair: &AtomPairSpec, second: bool, threshold: f64) -> (Complex64, f64) {
    if let Some(support) = pair.finite_support() {
        let mut m = Complex64::new(0.0, 0.0);
        let mut s = 0.0;
        for a in support {
            let x = if second { a.xi2 } else { a.xi1 };
            if x.norm() <= threshold {
                m += x * a.p;
                s += a.p * x.norm_sqr();
            }
        }
        return (m, s);
    }
    // Gaussian marginals are symmetric, so the truncated mean vanishes.
    let key = (pair.mu.to_bits(), threshold.to_bits());
    static CACHE: OnceLock<Mutex<HashMap<(u64, u64), f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&s) = cache.lock().unwrap().get(&key) {
        return (Complex64::new(0.0, 0.0), s);
    }
    let s = gaussian_truncated_second_moment(pair.mu, threshold);
    cache.lock().unwrap().insert(key, s);
    (Complex64::new(0.0, 0.0), s)
}

fn normal_pdf(x: f64, var: f64) -> f64 {
    (-0.5 * x * x / var).exp() / (2.0 * PI * var).sqrt()
}

/// Integral of f against N(0, var) over [-lim, lim]. Panels are one standard
/// deviation wide so the adaptive rule cannot miss the bulk.
fn gaussian_integral<F: Fn(f64) -> f64>(f: F, var: f64, lim: f64, tol: f64) -> f64 {
    let sd = var.sqrt();
    let lim = lim.min(40.0 * sd);
    let breaks: Vec<f64> = (-40..=40).map(|k| k as f64 * sd).collect();
    integrate_pieces(|x| f(x) * normal_pdf(x, var), -lim, lim, &breaks, tol)
}

/// E[|x|^2 1{|x| <= T}] for x = a + i b, a ~ N(0, mu), b ~ N(0, 1 - mu) independent.
fn gaussian_truncated_second_moment(mu: f64, t: f64) -> f64 {
    let tol = 1e-12;
    if mu == 1.0 || mu == 0.0 {
        return gaussian_integral(|a| a * a, 1.0, t, tol);
    }
    let (va, vb) = (mu, 1.0 - mu);
    gaussian_integral(
        |a| {
            let c = (t * t - a * a).max(0.0).sqrt();
            gaussian_integral(|b| a * a + b * b, vb, c, tol)
        },
        va,
        t,
        tol,
    )
}

/// Zero the diagonal and replace each off-diagonal entry by its truncated,
/// recentred and rescaled version at threshold n^delta.
pub fn truncate_standardize(a: &ComplexMatrix, delta: f64, pair: &AtomPairSpec) -> Result<ComplexMatrix> {
    if !(delta > 0.0 && delta < 0.5) {
        return invalid(format!("truncation exponent {delta} outside (0, 1/2)"));
    }
    let n = a.n();
    let t = (n as f64).powf(delta);
    let stats = |second: bool| -> Result<(Complex64, f64)> {
        let (m, s2) = truncated_moments(pair, second, t);
        let var = s2 - m.norm_sqr();
        if !(var > 1e-300) {
            return Err(LabError::Validation(format!("degenerate truncation at threshold {t}")));
        }
        Ok((m, var.sqrt()))
    };
    let upper = stats(false)?;
    let lower = if pair.kind == PairKind::GaussianReal { upper } else { stats(true)? };
    Ok(ComplexMatrix::from_fn(n, |i, j| {
        if i == j {
            return Complex64::new(0.0, 0.0);
        }
        let (m, s) = if i < j { upper } else { lower };
        let x = a[(i, j)];
        let kept = if x.norm() <= t { x } else { Complex64::new(0.0, 0.0) };
        (kept - m) / s
    }))
}
