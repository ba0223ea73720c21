use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atoms::ScalarAtomSpec;
use crate::error::{invalid, Result};
use crate::linalg::orthonormal_columns;
use crate::rng::RandomStream;
use crate::stats::{mean_se, wilson, Interval, Z95};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubspaceKind {
    /// Column span of a fresh Gaussian n x d matrix in every trial.
    Random,
    /// span(e_1, ..., e_d).
    Coordinate,
}

/// R = (xi_1, ..., xi_n) + v with xi_i ~ x for i < y_count and ~ y otherwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistQuery {
    pub n: usize,
    pub d: usize,
    pub x: ScalarAtomSpec,
    #[serde(default)]
    pub y: Option<ScalarAtomSpec>,
    /// Number of leading coordinates drawn from y.
    #[serde(default)]
    pub y_count: usize,
    #[serde(default)]
    pub shift: Option<Vec<f64>>,
    pub subspace: SubspaceKind,
    /// Admissible dimensions satisfy d <= n - n^(1 - gamma).
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

fn default_gamma() -> f64 {
    0.5
}

impl DistQuery {
    pub fn new(n: usize, d: usize, x: ScalarAtomSpec, subspace: SubspaceKind) -> Self {
        Self { n, d, x, y: None, y_count: 0, shift: None, subspace, gamma: default_gamma() }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n as f64;
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return invalid(format!("gamma = {} outside (0, 1)", self.gamma));
        }
        if self.d < 1 || self.d as f64 > n - n.powf(1.0 - self.gamma) {
            return invalid(format!("subspace dimension {} outside [1, n - n^(1-gamma)] for n = {}", self.d, self.n));
        }
        if self.y_count > self.n {
            return invalid("y_count exceeds n");
        }
        if self.y_count > 0 && self.y.is_none() {
            return invalid("y_count > 0 needs a second law y");
        }
        if let Some(v) = &self.shift {
            if v.len() != self.n || v.iter().any(|x| !x.is_finite()) {
                return invalid("shift must be a finite vector of length n");
            }
        }
        self.x.validate()?;
        if let Some(y) = &self.y {
            y.validate()?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistReport {
    pub n: usize,
    pub d: usize,
    pub trials: u64,
    pub failures: u64,
    pub failure_rate: f64,
    pub ci: Interval,
    pub mean_dist_sq: f64,
    pub se_dist_sq: f64,
}

/// Empirical P(dist(R, H) <= sqrt(n - d) / 2).
pub fn dist_subspace_experiment(q: &DistQuery, trials: u64, seed: u64) -> Result<DistReport> {
    q.validate()?;
    if trials == 0 {
        return invalid("need at least one trial");
    }
    let (n, d) = (q.n, q.d);
    let cutoff = 0.25 * (n - d) as f64;
    let dist_sq: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = RandomStream::for_trial(seed, t);
            let r: Vec<f64> = (0..n)
                .map(|i| {
                    let law = if i < q.y_count { q.y.as_ref().unwrap() } else { &q.x };
                    law.sample(&mut rng) + q.shift.as_ref().map_or(0.0, |v| v[i])
                })
                .collect();
            match q.subspace {
                SubspaceKind::Coordinate => r[d..].iter().map(|x| x * x).sum(),
                SubspaceKind::Random => {
                    let g: Vec<f64> = (0..n * d).map(|_| rng.sample(StandardNormal)).collect();
                    let basis = orthonormal_columns(n, d, &g);
                    let mut proj = vec![0.0; d];
                    for i in 0..n {
                        let row = &basis[i * d..(i + 1) * d];
                        for (p, b) in proj.iter_mut().zip(row) {
                            *p += b * r[i];
                        }
                    }
                    let total: f64 = r.iter().map(|x| x * x).sum();
                    (total - proj.iter().map(|p| p * p).sum::<f64>()).max(0.0)
                }
            }
        })
        .collect();
    let failures = dist_sq.iter().filter(|&&s| s <= cutoff).count() as u64;
    let (mean, se) = mean_se(&dist_sq);
    Ok(DistReport {
        n,
        d,
        trials,
        failures,
        failure_rate: failures as f64 / trials as f64,
        ci: wilson(failures, trials, Z95),
        mean_dist_sq: mean,
        se_dist_sq: se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinate_mean() {
        let q = DistQuery::new(60, 20, ScalarAtomSpec::GaussianReal, SubspaceKind::Coordinate);
        let r = dist_subspace_experiment(&q, 400, 5).unwrap();
        assert!((r.mean_dist_sq - 40.0).abs() <= 3.0 * r.se_dist_sq, "{r:?}");
        assert_eq!(r.failures, 0);
    }

    #[test]
    fn bernoulli_on_coordinates_is_deterministic() {
        // with signs, dist^2 to a coordinate subspace is exactly n - d
        let q = DistQuery::new(30, 10, ScalarAtomSpec::Bernoulli, SubspaceKind::Coordinate);
        let r = dist_subspace_experiment(&q, 50, 1).unwrap();
        assert!((r.mean_dist_sq - 20.0).abs() < 1e-12);
    }

    #[test]
    fn random_subspace_mixed_laws() {
        let mut q = DistQuery::new(40, 10, ScalarAtomSpec::GaussianReal, SubspaceKind::Random);
        q.y = Some(ScalarAtomSpec::Bernoulli);
        q.y_count = 20;
        let r = dist_subspace_experiment(&q, 200, 2).unwrap();
        assert!((r.mean_dist_sq - 30.0).abs() <= 4.0 * r.se_dist_sq, "{r:?}");
    }

    #[test]
    fn full_dimension_rejected() {
        let q = DistQuery::new(10, 10, ScalarAtomSpec::GaussianReal, SubspaceKind::Random);
        assert!(dist_subspace_experiment(&q, 10, 1).is_err());
        let q = DistQuery::new(10, 0, ScalarAtomSpec::GaussianReal, SubspaceKind::Random);
        assert!(dist_subspace_experiment(&q, 10, 1).is_err());
    }
}
