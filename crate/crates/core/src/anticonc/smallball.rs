use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gap::{gap_enumerate, GapProgression};
use super::{convolve, empirical_ball_count, max_ball_mass, merge_cloud, Cloud};
use crate::atoms::{AtomPairSpec, ScalarAtomSpec};
use crate::error::{invalid, LabError, Result};
use crate::quad::integrate_pieces;
use crate::rng::RandomStream;
use crate::stats::{wilson, Interval, Z95};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomLaw {
    Scalar(ScalarAtomSpec),
    Pair(AtomPairSpec),
}

/// sup_a P(|sum a_i (x_i + f_i) + b_i (x'_i + f'_i) - a| <= beta), where
/// x_i are i.i.d. scalar atoms, or (x_i, x'_i) are i.i.d. pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallBallQuery {
    pub a: Vec<Complex64>,
    #[serde(default)]
    pub b: Option<Vec<Complex64>>,
    #[serde(default)]
    pub f: Option<Vec<Complex64>>,
    #[serde(default)]
    pub f2: Option<Vec<Complex64>>,
    pub atom: AtomLaw,
    pub beta: f64,
}

impl SmallBallQuery {
    pub fn scalar(a: Vec<Complex64>, atom: ScalarAtomSpec, beta: f64) -> Self {
        Self { a, b: None, f: None, f2: None, atom: AtomLaw::Scalar(atom), beta }
    }

    pub fn mixing(a: Vec<Complex64>, b: Vec<Complex64>, pair: AtomPairSpec, beta: f64) -> Self {
        Self { a, b: Some(b), f: None, f2: None, atom: AtomLaw::Pair(pair), beta }
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.a.len();
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return invalid(format!("radius beta = {} must be positive", self.beta));
        }
        for (name, v) in [("b", &self.b), ("f", &self.f), ("f2", &self.f2)] {
            if let Some(v) = v {
                if v.len() != n {
                    return invalid(format!("{name} has length {} but a has length {n}", v.len()));
                }
                if v.iter().any(|z| !z.is_finite()) {
                    return invalid(format!("{name} has non-finite entries"));
                }
            }
        }
        if self.a.iter().any(|z| !z.is_finite()) {
            return invalid("a has non-finite entries");
        }
        match &self.atom {
            AtomLaw::Scalar(s) => {
                if self.b.is_some() || self.f2.is_some() {
                    return invalid("second coefficient list requires a pair law");
                }
                s.validate()
            }
            AtomLaw::Pair(p) => p.validate(),
        }
    }

    fn second(&self, i: usize) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        (self.b.as_ref().map_or(zero, |b| b[i]), self.f2.as_ref().map_or(zero, |f| f[i]))
    }

    fn shift(&self, i: usize) -> Complex64 {
        self.f.as_ref().map_or(Complex64::new(0.0, 0.0), |f| f[i])
    }

    /// Law of the i-th summand when the atom has finite support.
    fn term(&self, i: usize) -> Option<Cloud> {
        let (a, f) = (self.a[i], self.shift(i));
        match &self.atom {
            AtomLaw::Scalar(s) => Some(s.support()?.iter().map(|p| (a * (p.value + f), p.p)).collect()),
            AtomLaw::Pair(pair) => {
                let (b, f2) = self.second(i);
                Some(pair.finite_support()?.iter().map(|t| (a * (t.xi1 + f) + b * (t.xi2 + f2), t.p)).collect())
            }
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..self.n() {
            let f = self.shift(i);
            match &self.atom {
                AtomLaw::Scalar(atom) => s += self.a[i] * (atom.sample(rng) + f),
                AtomLaw::Pair(pair) => {
                    let (b, f2) = self.second(i);
                    let (x, y) = pair.sample(rng);
                    s += self.a[i] * (x + f) + b * (y + f2);
                }
            }
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallBall {
    pub gamma: f64,
    pub upper: f64,
    pub exact: bool,
    pub center: Complex64,
    /// Number of distinct values of the form.
    pub atoms: usize,
}

/// Exact small-ball probability by enumerating the law of the form.
pub fn small_ball_exact(q: &SmallBallQuery) -> Result<SmallBall> {
    q.validate()?;
    let terms: Vec<Cloud> = (0..q.n()).map(|i| q.term(i)).collect::<Option<_>>().ok_or_else(|| {
        LabError::Unsupported("exact small-ball needs finite-support atoms; use small_ball_mc".into())
    })?;
    let scale: f64 = terms.iter().map(|t| t.iter().map(|(z, _)| z.norm()).fold(0.0, f64::max)).sum::<f64>().max(q.beta);
    let quantum = 1e-12 * scale;
    let mut cloud: Cloud = vec![(Complex64::new(0.0, 0.0), 1.0)];
    for t in &terms {
        cloud = convolve(&cloud, &merge_cloud(t.iter().copied(), quantum), quantum)?;
    }
    let m = max_ball_mass(&cloud, q.beta);
    Ok(SmallBall { gamma: m.gamma, upper: m.upper, exact: m.exact, center: m.center, atoms: cloud.len() })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub gamma: f64,
    pub ci: Interval,
    pub trials: u64,
    pub center: Complex64,
}

pub(crate) fn mc_from_values(values: &[Complex64], beta: f64) -> McEstimate {
    let (k, center) = empirical_ball_count(values, beta);
    let n = values.len() as u64;
    McEstimate { gamma: k as f64 / n.max(1) as f64, ci: wilson(k, n, Z95), trials: n, center }
}

/// Monte Carlo small-ball estimate; trial t draws from stream (seed, t).
pub fn small_ball_mc(q: &SmallBallQuery, trials: u64, seed: u64) -> Result<McEstimate> {
    q.validate()?;
    if trials < 1000 {
        return invalid(format!("small_ball_mc needs at least 1000 trials, got {trials}"));
    }
    let values: Vec<Complex64> =
        (0..trials).into_par_iter().map(|t| q.sample(&mut RandomStream::for_trial(seed, t))).collect();
    Ok(mc_from_values(&values, q.beta))
}

fn frac_dist_sq(x: f64) -> f64 {
    let d = x - x.round();
    d * d
}

/// Fourier-analytic upper bound on the small-ball probability at radius r:
/// exp(pi r^2) times the integral over t in C of
/// exp(-sum_i E||Re(2 (x_i - y_i) a_i t + 2 (x'_i - y'_i) b_i t)||^2 - pi |t|^2),
/// with (y, y') an independent copy. Needs finite-support atoms.
pub fn claim_fourier_bound(q: &SmallBallQuery, r: f64) -> Result<f64> {
    q.validate()?;
    if !(r > 0.0) {
        return invalid("radius must be positive");
    }
    let unsupported = || LabError::Unsupported("Fourier bound needs finite-support atoms".into());
    // each index contributes E||Re(d t)||^2 for a finite law of d
    let diffs: Vec<Vec<(Complex64, f64)>> = (0..q.n())
        .map(|i| -> Result<Vec<(Complex64, f64)>> {
            let a = q.a[i];
            let raw: Vec<(Complex64, f64)> = match &q.atom {
                AtomLaw::Scalar(s) => {
                    let sup = s.support().ok_or_else(unsupported)?;
                    sup.iter()
                        .flat_map(|x| sup.iter().map(move |y| (a * (2.0 * (x.value - y.value)), x.p * y.p)))
                        .collect()
                }
                AtomLaw::Pair(p) => {
                    let (b, _) = q.second(i);
                    let sup = p.finite_support().ok_or_else(unsupported)?;
                    sup.iter()
                        .flat_map(|x| {
                            sup.iter().map(move |y| (a * 2.0 * (x.xi1 - y.xi1) + b * 2.0 * (x.xi2 - y.xi2), x.p * y.p))
                        })
                        .collect()
                }
            };
            Ok(merge_cloud(raw, 1e-14))
        })
        .collect::<Result<_>>()?;
    let exponent = |t: Complex64| -> f64 {
        let s: f64 = diffs.iter().map(|law| law.iter().map(|(d, p)| p * frac_dist_sq((d * t).re)).sum::<f64>()).sum();
        s + std::f64::consts::PI * t.norm_sqr()
    };
    // exp(-pi |t|^2) is below 1e-49 past |t| = 6
    let lim = 6.0;
    let breaks: Vec<f64> = (-24..=24).map(|k| k as f64 * 0.25).collect();
    let integral = integrate_pieces(
        |x| integrate_pieces(|y| (-exponent(Complex64::new(x, y))).exp(), -lim, lim, &breaks, 1e-9),
        -lim,
        lim,
        &breaks,
        1e-8,
    );
    Ok((std::f64::consts::PI * r * r).exp() * integral)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapConcentration {
    pub gamma: f64,
    pub exact: bool,
    /// c / (|Q| sqrt n) with c = 0.1.
    pub floor: f64,
    pub holds: bool,
    pub coefficients: Vec<Complex64>,
}

pub const GAP_FLOOR_CONSTANT: f64 = 0.1;

/// Draws n coefficients uniformly from the box of Q, moves each by at most
/// delta, and measures the small-ball probability of the resulting form.
#[allow(clippy::too_many_arguments)]
pub fn forward_gap_concentration(
    q: &GapProgression,
    n: usize,
    atom: &ScalarAtomSpec,
    beta: f64,
    delta: f64,
    trials: u64,
    seed: u64,
) -> Result<GapConcentration> {
    q.validate()?;
    if n == 0 {
        return invalid("need at least one coefficient");
    }
    if !(0.0..=beta).contains(&delta) {
        return invalid(format!("perturbation {delta} must lie in [0, beta]"));
    }
    let mut rng = RandomStream::new(seed, 0, u64::MAX - 1);
    let coefficients: Vec<Complex64> = (0..n)
        .map(|_| {
            let mut z = q.g0;
            for (i, g) in q.generators.iter().enumerate() {
                z += g * rng.random_range(q.lower[i]..=q.upper[i]) as f64;
            }
            let r = delta * rng.random::<f64>().sqrt();
            let phi = std::f64::consts::TAU * rng.random::<f64>();
            z + Complex64::from_polar(r, phi)
        })
        .collect();
    let query = SmallBallQuery::scalar(coefficients.clone(), atom.clone(), beta);
    let (gamma, exact) = match small_ball_exact(&query) {
        Ok(s) => (s.gamma, s.exact),
        Err(LabError::TooLarge { .. }) | Err(LabError::Unsupported(_)) => {
            (small_ball_mc(&query, trials.max(1000), seed)?.gamma, false)
        }
        Err(e) => return Err(e),
    };
    let size = match gap_enumerate(q) {
        Ok(img) => img.size as f64,
        Err(_) => q.box_size() as f64,
    };
    let floor = GAP_FLOOR_CONSTANT / (size * (n as f64).sqrt());
    Ok(GapConcentration { gamma, exact, floor, holds: gamma >= floor, coefficients })
}
