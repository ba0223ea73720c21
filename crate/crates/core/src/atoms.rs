//! Atom-variable pairs from (mu, rho)-families and scalar atom laws.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

const PROB_TOL: f64 = 1e-12;
const MOMENT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    GaussianReal,
    GaussianComplex,
    DiscreteMix,
    CustomFinite,
}

/// One atom of a finite-support pair law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairAtom {
    pub xi1: Complex64,
    pub xi2: Complex64,
    pub p: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomPairSpec {
    pub kind: PairKind,
    #[serde(default = "one")]
    pub mu: f64,
    pub rho: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<Vec<PairAtom>>,
    /// (c1, c1', c2, c2') with xi1 = c1 psi1 + c1' psi2, xi2 = c2 psi1 + c2' psi2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mix_coeffs: Option<[f64; 4]>,
}

fn one() -> f64 {
    1.0
}

impl AtomPairSpec {
    pub fn gaussian_real(rho: f64) -> Self {
        Self { kind: PairKind::GaussianReal, mu: 1.0, rho, support: None, mix_coeffs: None }
    }

    pub fn gaussian_complex(mu: f64, rho: f64) -> Self {
        Self { kind: PairKind::GaussianComplex, mu, rho, support: None, mix_coeffs: None }
    }

    /// Bernoulli mixture with the default coefficients (1, 0, rho, sqrt(1 - rho^2)).
    pub fn discrete_mix(rho: f64) -> Self {
        Self { kind: PairKind::DiscreteMix, mu: 1.0, rho, support: None, mix_coeffs: None }
    }

    pub fn discrete_mix_mu(mu: f64, rho: f64) -> Self {
        Self { mu, ..Self::discrete_mix(rho) }
    }

    pub fn custom(mu: f64, rho: f64, support: Vec<PairAtom>) -> Self {
        Self { kind: PairKind::CustomFinite, mu, rho, support: Some(support), mix_coeffs: None }
    }

    pub fn with_rho(&self, rho: f64) -> Self {
        Self { rho, ..self.clone() }
    }

    pub fn coeffs(&self) -> [f64; 4] {
        self.mix_coeffs.unwrap_or([1.0, 0.0, self.rho, (1.0 - self.rho * self.rho).sqrt()])
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.mu) {
            return invalid(format!("mu = {} outside [0, 1]", self.mu));
        }
        if !(self.rho > -1.0 && self.rho < 1.0) {
            return invalid(format!("rho = {} outside (-1, 1)", self.rho));
        }
        match self.kind {
            PairKind::GaussianReal => {
                if self.mu != 1.0 {
                    return invalid("gaussian_real pairs are real-valued and need mu = 1");
                }
            }
            PairKind::GaussianComplex => {}
            PairKind::DiscreteMix => {
                let [c1, c1p, c2, c2p] = self.coeffs();
                let defects = [c1 * c1 + c1p * c1p - 1.0, c2 * c2 + c2p * c2p - 1.0, c1 * c2 + c1p * c2p - self.rho];
                if defects.iter().any(|d| d.abs() > MOMENT_TOL) {
                    return invalid("mix_coeffs must satisfy c1^2+c1'^2 = c2^2+c2'^2 = 1 and c1 c2 + c1' c2' = rho");
                }
            }
            PairKind::CustomFinite => {
                let support = match &self.support {
                    Some(s) if !s.is_empty() => s,
                    _ => return invalid("custom_finite needs a nonempty support"),
                };
                if support.iter().any(|a| !(a.p >= 0.0) || !a.xi1.is_finite() || !a.xi2.is_finite()) {
                    return invalid("support probabilities must be nonnegative and atoms finite");
                }
                let total: f64 = support.iter().map(|a| a.p).sum();
                if (total - 1.0).abs() > PROB_TOL {
                    return invalid(format!("support probabilities sum to {total}, not 1"));
                }
                let got = finite_covariance(support);
                let want = family_covariance(self.mu, self.rho);
                let mean = finite_mean(support);
                if mean.iter().any(|m| m.abs() > MOMENT_TOL) {
                    return invalid("custom support does not have mean zero");
                }
                for i in 0..4 {
                    for j in 0..4 {
                        if (got[i][j] - want[i][j]).abs() > MOMENT_TOL {
                            return invalid(format!(
                                "custom support violates the (mu, rho) covariance at ({i}, {j}): {} vs {}",
                                got[i][j], want[i][j]
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Finite support of the pair law, if it has one.
    pub fn finite_support(&self) -> Option<Vec<PairAtom>> {
        match self.kind {
            PairKind::CustomFinite => self.support.clone(),
            PairKind::DiscreteMix => {
                let [c1, c1p, c2, c2p] = self.coeffs();
                let signs = [-1.0, 1.0];
                let mut out = Vec::new();
                if self.mu == 1.0 || self.mu == 0.0 {
                    // purely real, or purely imaginary with the sign flip on xi2
                    let (unit, flip) =
                        if self.mu == 1.0 { (Complex64::new(1.0, 0.0), 1.0) } else { (Complex64::new(0.0, 1.0), -1.0) };
                    for &a in &signs {
                        for &b in &signs {
                            out.push(PairAtom {
                                xi1: unit * (c1 * a + c1p * b),
                                xi2: unit * (flip * (c2 * a + c2p * b)),
                                p: 0.25,
                            });
                        }
                    }
                } else {
                    let (sr, si) = (self.mu.sqrt(), (1.0 - self.mu).sqrt());
                    for &a in &signs {
                        for &b in &signs {
                            for &c in &signs {
                                for &d in &signs {
                                    out.push(PairAtom {
                                        xi1: Complex64::new(sr * (c1 * a + c1p * b), si * (c1 * c + c1p * d)),
                                        xi2: Complex64::new(sr * (c2 * a + c2p * b), -si * (c2 * c + c2p * d)),
                                        p: 1.0 / 16.0,
                                    });
                                }
                            }
                        }
                    }
                }
                Some(out)
            }
            _ => None,
        }
    }

    pub fn is_real(&self) -> bool {
        match self.kind {
            PairKind::GaussianReal => true,
            PairKind::GaussianComplex => self.mu == 1.0,
            PairKind::DiscreteMix => self.mu == 1.0,
            PairKind::CustomFinite => {
                self.support.as_ref().is_some_and(|s| s.iter().all(|a| a.xi1.im == 0.0 && a.xi2.im == 0.0))
            }
        }
    }

    /// Diagonal law used when an ensemble does not name one: the law of Re xi1
    /// (Im xi1 when mu = 0), rescaled to unit variance.
    pub fn default_diagonal(&self) -> ScalarAtomSpec {
        match self.finite_support() {
            Some(support) => {
                let (part, scale): (fn(Complex64) -> f64, f64) =
                    if self.mu > 0.0 { (|c| c.re, self.mu.sqrt()) } else { (|c| c.im, 1.0) };
                let mut values: Vec<ScalarPoint> =
                    support.iter().map(|a| ScalarPoint { value: part(a.xi1) / scale, p: a.p }).collect();
                merge_points(&mut values);
                ScalarAtomSpec::CustomFinite { support: values }
            }
            None => ScalarAtomSpec::GaussianReal,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (Complex64, Complex64) {
        match self.kind {
            PairKind::GaussianReal => {
                let g1: f64 = rng.sample(StandardNormal);
                let g2: f64 = rng.sample(StandardNormal);
                let r = self.rho;
                (Complex64::new(g1, 0.0), Complex64::new(r * g1 + (1.0 - r * r).sqrt() * g2, 0.0))
            }
            PairKind::GaussianComplex => {
                let l = psd_cholesky(&family_covariance(self.mu, self.rho));
                let g: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
                let mut x = [0.0; 4];
                for i in 0..4 {
                    x[i] = (0..=i).map(|k| l[i][k] * g[k]).sum();
                }
                (Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3]))
            }
            PairKind::DiscreteMix => {
                let [c1, c1p, c2, c2p] = self.coeffs();
                let mut sign = || if rng.random::<bool>() { 1.0 } else { -1.0 };
                let (a, b) = (sign(), sign());
                if self.mu == 1.0 {
                    (Complex64::new(c1 * a + c1p * b, 0.0), Complex64::new(c2 * a + c2p * b, 0.0))
                } else if self.mu == 0.0 {
                    (Complex64::new(0.0, c1 * a + c1p * b), Complex64::new(0.0, -(c2 * a + c2p * b)))
                } else {
                    let (c, d) = (sign(), sign());
                    let (sr, si) = (self.mu.sqrt(), (1.0 - self.mu).sqrt());
                    (
                        Complex64::new(sr * (c1 * a + c1p * b), si * (c1 * c + c1p * d)),
                        Complex64::new(sr * (c2 * a + c2p * b), -si * (c2 * c + c2p * d)),
                    )
                }
            }
            PairKind::CustomFinite => {
                let support = self.support.as_deref().unwrap_or(&[]);
                let idx = pick(rng, support.iter().map(|a| a.p));
                (support[idx].xi1, support[idx].xi2)
            }
        }
    }

    /// Mixed moment E[Re(xi1)^i Im(xi1)^j Re(xi2)^l Im(xi2)^m], exact for
    /// finite support and by Isserlis' theorem for the Gaussian kinds.
    pub fn moment(&self, powers: [u32; 4]) -> f64 {
        match self.finite_support() {
            Some(support) => support
                .iter()
                .map(|a| {
                    let c = [a.xi1.re, a.xi1.im, a.xi2.re, a.xi2.im];
                    a.p * (0..4).map(|k| c[k].powi(powers[k] as i32)).product::<f64>()
                })
                .sum(),
            None => {
                let cov = family_covariance(self.mu, self.rho);
                let mut idx = Vec::new();
                for (k, &p) in powers.iter().enumerate() {
                    idx.extend(std::iter::repeat_n(k, p as usize));
                }
                isserlis(&cov, &idx)
            }
        }
    }
}

/// The covariance of (Re xi1, Im xi1, Re xi2, Im xi2) for a (mu, rho)-family member.
pub fn family_covariance(mu: f64, rho: f64) -> [[f64; 4]; 4] {
    let a = mu * rho;
    let b = -(1.0 - mu) * rho;
    [[mu, 0.0, a, 0.0], [0.0, 1.0 - mu, 0.0, b], [a, 0.0, mu, 0.0], [0.0, b, 0.0, 1.0 - mu]]
}

/// Exact covariance: summed over the support for finite laws, closed form otherwise.
pub fn pair_covariance(spec: &AtomPairSpec) -> [[f64; 4]; 4] {
    match spec.finite_support() {
        Some(s) => finite_covariance(&s),
        None => family_covariance(spec.mu, spec.rho),
    }
}

fn finite_mean(support: &[PairAtom]) -> [f64; 4] {
    let mut m = [0.0; 4];
    for a in support {
        let c = [a.xi1.re, a.xi1.im, a.xi2.re, a.xi2.im];
        for k in 0..4 {
            m[k] += a.p * c[k];
        }
    }
    m
}

fn finite_covariance(support: &[PairAtom]) -> [[f64; 4]; 4] {
    let mean = finite_mean(support);
    let mut cov = [[0.0; 4]; 4];
    for a in support {
        let c = [a.xi1.re, a.xi1.im, a.xi2.re, a.xi2.im];
        for i in 0..4 {
            for j in 0..4 {
                cov[i][j] += a.p * (c[i] - mean[i]) * (c[j] - mean[j]);
            }
        }
    }
    cov
}

/// Cholesky factor of a positive semidefinite matrix; columns with a zero
/// pivot are left empty, which drops the degenerate coordinates.
fn psd_cholesky(c: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let mut l = [[0.0; 4]; 4];
    for j in 0..4 {
        let d = c[j][j] - (0..j).map(|k| l[j][k] * l[j][k]).sum::<f64>();
        if d <= 1e-14 {
            continue;
        }
        l[j][j] = d.sqrt();
        for i in j + 1..4 {
            l[i][j] = (c[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>()) / l[j][j];
        }
    }
    l
}

fn isserlis(cov: &[[f64; 4]; 4], idx: &[usize]) -> f64 {
    if idx.is_empty() {
        return 1.0;
    }
    if idx.len() % 2 == 1 {
        return 0.0;
    }
    let first = idx[0];
    let rest = &idx[1..];
    let mut total = 0.0;
    for k in 0..rest.len() {
        let c = cov[first][rest[k]];
        if c == 0.0 {
            continue;
        }
        let remaining: Vec<usize> = rest.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, &v)| v).collect();
        total += c * isserlis(cov, &remaining);
    }
    total
}

pub(crate) fn pick<R: Rng + ?Sized>(rng: &mut R, probs: impl Iterator<Item = f64>) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, p) in probs.enumerate() {
        acc += p;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarPoint {
    pub value: f64,
    pub p: f64,
}

fn merge_points(points: &mut Vec<ScalarPoint>) {
    points.sort_by(|a, b| a.value.total_cmp(&b.value));
    let mut merged: Vec<ScalarPoint> = Vec::with_capacity(points.len());
    for p in points.drain(..) {
        match merged.last_mut() {
            Some(last) if (last.value - p.value).abs() <= 1e-12 * (1.0 + p.value.abs()) => last.p += p.p,
            _ => merged.push(p),
        }
    }
    *points = merged;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarAtomSpec {
    /// +1 or -1 with probability 1/2 each.
    Bernoulli,
    /// +1 or -1 with probability mu/2 each, 0 with probability 1 - mu.
    ModifiedBernoulli {
        mu: f64,
    },
    GaussianReal,
    CustomFinite {
        support: Vec<ScalarPoint>,
    },
}

impl ScalarAtomSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::ModifiedBernoulli { mu } if !(0.0..=1.0).contains(mu) => {
                invalid(format!("modified Bernoulli parameter {mu} outside [0, 1]"))
            }
            Self::CustomFinite { support } => {
                if support.is_empty() || support.iter().any(|s| !(s.p >= 0.0) || !s.value.is_finite()) {
                    return invalid("scalar support must be nonempty with nonnegative probabilities");
                }
                let total: f64 = support.iter().map(|s| s.p).sum();
                if (total - 1.0).abs() > PROB_TOL {
                    return invalid(format!("scalar support probabilities sum to {total}"));
                }
                if self.mean().abs() > MOMENT_TOL {
                    return invalid("scalar law must have mean zero");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn support(&self) -> Option<Vec<ScalarPoint>> {
        match self {
            Self::Bernoulli => Some(vec![ScalarPoint { value: -1.0, p: 0.5 }, ScalarPoint { value: 1.0, p: 0.5 }]),
            Self::ModifiedBernoulli { mu } => {
                let mut s = vec![ScalarPoint { value: -1.0, p: mu / 2.0 }];
                if *mu < 1.0 {
                    s.push(ScalarPoint { value: 0.0, p: 1.0 - mu });
                }
                s.push(ScalarPoint { value: 1.0, p: mu / 2.0 });
                Some(s)
            }
            Self::GaussianReal => None,
            Self::CustomFinite { support } => Some(support.clone()),
        }
    }

    pub fn mean(&self) -> f64 {
        match self.support() {
            Some(s) => s.iter().map(|p| p.p * p.value).sum(),
            None => 0.0,
        }
    }

    pub fn variance(&self) -> f64 {
        match self.support() {
            Some(s) => {
                let m = self.mean();
                s.iter().map(|p| p.p * (p.value - m).powi(2)).sum()
            }
            None => 1.0,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Bernoulli => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Self::ModifiedBernoulli { mu } => {
                let u: f64 = rng.random();
                if u < mu / 2.0 {
                    1.0
                } else if u < *mu {
                    -1.0
                } else {
                    0.0
                }
            }
            Self::GaussianReal => rng.sample(StandardNormal),
            Self::CustomFinite { support } => support[pick(rng, support.iter().map(|s| s.p))].value,
        }
    }
}

/// A rectangle [re.0, re.1] x [im.0, im.1] in the plane of ratios omega1 / omega2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioCell {
    pub re: (f64, f64),
    pub im: (f64, f64),
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationWitness {
    pub found: bool,
    pub delta: f64,
    pub alpha: f64,
    pub c0: f64,
    pub c_big: f64,
    pub regions: Vec<RatioCell>,
    pub exact: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationOptions {
    pub c0: f64,
    pub c_big: f64,
    /// Grid cells per side of the ratio window.
    pub k: usize,
    /// The ratio window is cut at this quantile of |omega1 / omega2|.
    pub quantile: f64,
}

impl Default for SeparationOptions {
    fn default() -> Self {
        Self { c0: 0.05, c_big: 20.0, k: 16, quantile: 0.95 }
    }
}

/// Search for two ratio cells that carry mass at least delta each and are
/// far enough apart that omega1/omega2 separates them by at least alpha.
/// Here (omega1, omega2) = ((xi1 - xi1') / 2, (xi2 - xi2') / 2).
pub fn separation_witness<R: Rng + ?Sized>(
    spec: &AtomPairSpec,
    trials: usize,
    opts: SeparationOptions,
    rng: &mut R,
) -> Result<SeparationWitness> {
    spec.validate()?;
    if opts.k < 3 || !(opts.c0 > 0.0 && opts.c_big > opts.c0) {
        return invalid("separation search needs k >= 3 and 0 < c0 < C0");
    }
    // weighted ratio samples restricted to the annulus c0 < |omega_i| < C0
    let mut ratios: Vec<(Complex64, f64)> = Vec::new();
    let keep = |w1: Complex64, w2: Complex64| {
        let (a, b) = (w1.norm(), w2.norm());
        a > opts.c0 && a < opts.c_big && b > opts.c0 && b < opts.c_big
    };
    let exact = match spec.finite_support() {
        Some(support) => {
            for x in &support {
                for y in &support {
                    let w1 = (x.xi1 - y.xi1) / 2.0;
                    let w2 = (x.xi2 - y.xi2) / 2.0;
                    if keep(w1, w2) {
                        ratios.push((w1 / w2, x.p * y.p));
                    }
                }
            }
            true
        }
        None => {
            if trials == 0 {
                return invalid("Monte Carlo separation search needs trials > 0");
            }
            let w = 1.0 / trials as f64;
            for _ in 0..trials {
                let (x1, x2) = spec.sample(rng);
                let (y1, y2) = spec.sample(rng);
                let (w1, w2) = ((x1 - y1) / 2.0, (x2 - y2) / 2.0);
                if keep(w1, w2) {
                    ratios.push((w1 / w2, w));
                }
            }
            false
        }
    };
    let empty = SeparationWitness {
        found: false,
        delta: 0.0,
        alpha: 0.0,
        c0: opts.c0,
        c_big: opts.c_big,
        regions: Vec::new(),
        exact,
    };
    if ratios.is_empty() {
        return Ok(empty);
    }
    // window half-width from the quantile of |ratio| (cells outside are simply unused)
    let mut mags: Vec<(f64, f64)> = ratios.iter().map(|(r, p)| (r.re.abs().max(r.im.abs()), *p)).collect();
    mags.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = mags.iter().map(|m| m.1).sum();
    let mut acc = 0.0;
    let mut q = mags.last().map(|m| m.0).unwrap_or(1.0);
    for (m, p) in &mags {
        acc += p;
        if acc >= opts.quantile * total {
            q = *m;
            break;
        }
    }
    let half = (1.05 * q).clamp(1e-9, opts.c_big / opts.c0);
    let k = opts.k;
    let h = 2.0 * half / k as f64;
    let mut mass = vec![0.0; k * k];
    for (r, p) in &ratios {
        let i = ((r.re + half) / h).floor();
        let j = ((r.im + half) / h).floor();
        if i >= 0.0 && j >= 0.0 && (i as usize) < k && (j as usize) < k {
            mass[i as usize * k + j as usize] += p;
        }
    }
    let mut order: Vec<usize> = (0..k * k).filter(|&c| mass[c] > 0.0).collect();
    order.sort_by(|&a, &b| mass[b].total_cmp(&mass[a]).then(a.cmp(&b)));
    let mut best: Option<(f64, f64, usize, usize)> = None;
    for (pos, &a) in order.iter().enumerate() {
        for &b in &order[pos + 1..] {
            let (ai, aj, bi, bj) = (a / k, a % k, b / k, b % k);
            let gx = (ai.abs_diff(bi) as f64 - 1.0).max(0.0) * h;
            let gy = (aj.abs_diff(bj) as f64 - 1.0).max(0.0) * h;
            let gap = gx.hypot(gy);
            if gap <= 0.0 {
                continue;
            }
            let d = mass[a].min(mass[b]);
            if best.is_none_or(|(bd, bg, _, _)| d > bd || (d == bd && gap > bg)) {
                best = Some((d, gap, a, b));
            }
            // later partners of `a` have no more mass than this one
            break;
        }
    }
    let Some((delta, alpha, a, b)) = best else {
        return Ok(empty);
    };
    let cell = |c: usize| {
        let (i, j) = ((c / k) as f64, (c % k) as f64);
        RatioCell {
            re: (-half + i * h, -half + (i + 1.0) * h),
            im: (-half + j * h, -half + (j + 1.0) * h),
            mass: mass[c],
        }
    };
    Ok(SeparationWitness { found: true, delta, alpha, regions: vec![cell(a), cell(b)], ..empty })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomStream;

    #[test]
    fn displayed_covariance() {
        let c = pair_covariance(&AtomPairSpec::gaussian_real(0.5));
        assert_eq!(c, [[1.0, 0.0, 0.5, 0.0], [0.0; 4], [0.5, 0.0, 1.0, 0.0], [0.0; 4]]);
        let c = family_covariance(0.5, 0.0);
        for (i, row) in c.iter().enumerate() {
            assert_eq!(row[i], 0.5);
        }
        let c = family_covariance(0.5, 0.4);
        assert!((c[0][2] - 0.2).abs() < 1e-15 && (c[1][3] + 0.2).abs() < 1e-15);
    }

    #[test]
    fn discrete_mix_moments_exact() {
        for &(mu, rho) in &[(1.0, 0.6), (0.5, -0.3), (0.0, 0.4), (0.25, 0.9)] {
            let spec = AtomPairSpec::discrete_mix_mu(mu, rho);
            spec.validate().unwrap();
            let got = pair_covariance(&spec);
            let want = family_covariance(mu, rho);
            for i in 0..4 {
                for j in 0..4 {
                    assert!((got[i][j] - want[i][j]).abs() < 1e-14, "{mu} {rho} {i} {j}");
                }
            }
        }
        let spec = AtomPairSpec::discrete_mix(0.6);
        let e: Complex64 = spec.finite_support().unwrap().iter().map(|a| a.xi1 * a.xi2 * a.p).sum();
        assert!((e.re - 0.6).abs() < 1e-15 && e.im.abs() < 1e-15);
    }

    #[test]
    fn validation_rejects_bad_specs() {
        assert!(AtomPairSpec::gaussian_real(1.0).validate().is_err());
        assert!(AtomPairSpec::gaussian_real(-1.0).validate().is_err());
        assert!(AtomPairSpec::gaussian_complex(1.5, 0.0).validate().is_err());
        let bad = AtomPairSpec::custom(
            1.0,
            0.0,
            vec![PairAtom { xi1: Complex64::new(1.0, 0.0), xi2: Complex64::new(1.0, 0.0), p: 0.7 }],
        );
        assert!(bad.validate().is_err());
        assert!(ScalarAtomSpec::ModifiedBernoulli { mu: 2.0 }.validate().is_err());
    }

    #[test]
    fn isserlis_fourth_moment() {
        let g = AtomPairSpec::gaussian_real(0.5);
        assert!((g.moment([4, 0, 0, 0]) - 3.0).abs() < 1e-14);
        // E[x^2 y^2] = 1 + 2 rho^2
        assert!((g.moment([2, 0, 2, 0]) - 1.5).abs() < 1e-14);
        assert_eq!(g.moment([1, 0, 2, 0]), 0.0);
    }

    #[test]
    fn modified_bernoulli_frequencies() {
        let law = ScalarAtomSpec::ModifiedBernoulli { mu: 0.4 };
        let mut rng = RandomStream::for_trial(1, 0);
        let n = 200_000;
        let zeros = (0..n).filter(|_| law.sample(&mut rng) == 0.0).count();
        assert!((zeros as f64 / n as f64 - 0.6).abs() < 0.01);
        assert!((law.variance() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn default_diagonal_is_standardized() {
        let d = AtomPairSpec::discrete_mix_mu(0.5, 0.3).default_diagonal();
        assert!(d.mean().abs() < 1e-15);
        assert!((d.variance() - 1.0).abs() < 1e-12);
        assert_eq!(AtomPairSpec::gaussian_real(0.2).default_diagonal(), ScalarAtomSpec::GaussianReal);
    }

    #[test]
    fn json_shape() {
        let spec: AtomPairSpec = serde_json::from_str(r#"{"kind":"gaussian_real","mu":1,"rho":0.5}"#).unwrap();
        assert_eq!(spec, AtomPairSpec::gaussian_real(0.5));
        let s: ScalarAtomSpec = serde_json::from_str(r#"{"kind":"modified_bernoulli","mu":0.5}"#).unwrap();
        assert_eq!(s, ScalarAtomSpec::ModifiedBernoulli { mu: 0.5 });
    }
}
