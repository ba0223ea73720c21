use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::smallball::{mc_from_values, McEstimate, SmallBall};
use super::{convolve, max_ball_mass, merge_cloud, Cloud, ENUMERATION_CAP};
use crate::atoms::{AtomPairSpec, PairAtom};
use crate::error::{invalid, LabError, Result};
use crate::matrix::{hs_norm, ComplexMatrix};
use crate::rng::RandomStream;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn check_len(name: &str, v: Option<&[Complex64]>, n: usize) -> Result<()> {
    match v {
        Some(v) if v.len() != n => invalid(format!("{name} has length {} but the matrix has order {n}", v.len())),
        _ => Ok(()),
    }
}

/// sum_ij a_ij (x_i + f_i)(y_j + g_j) + sum_i b_i x_i + sum_i b'_i y_i.
fn form(
    a: &ComplexMatrix,
    x: &[Complex64],
    y: &[Complex64],
    f: Option<&[Complex64]>,
    g: Option<&[Complex64]>,
    b: Option<&[Complex64]>,
    b2: Option<&[Complex64]>,
) -> Complex64 {
    let n = a.n();
    let at = |v: Option<&[Complex64]>, i: usize| v.map_or(zero(), |v| v[i]);
    let mut s = zero();
    for i in 0..n {
        let xi = x[i] + at(f, i);
        let row = &a.as_slice()[i * n..(i + 1) * n];
        let inner: Complex64 = row.iter().zip(y).enumerate().map(|(j, (aij, yj))| aij * (yj + at(g, j))).sum();
        s += xi * inner + at(b, i) * x[i] + at(b2, i) * y[i];
    }
    s
}

fn draw_pairs(pair: &AtomPairSpec, n: usize, stream: &mut RandomStream) -> (Vec<Complex64>, Vec<Complex64>) {
    (0..n).map(|_| pair.sample(stream)).unzip()
}

/// The matrix rescaled to unit Hilbert-Schmidt norm, and whether that changed it.
fn normalized(a: &ComplexMatrix) -> (ComplexMatrix, bool) {
    let h = hs_norm(a);
    if h == 0.0 || (h - 1.0).abs() <= 1e-12 {
        (a.clone(), false)
    } else {
        (a.scaled(1.0 / h), true)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BilinearEstimate {
    pub estimate: McEstimate,
    /// True when the coefficients were rescaled to unit Hilbert-Schmidt norm.
    pub normalized: bool,
}

/// Monte Carlo small-ball estimate for sum a_ij (x_i + f_i)(x'_j + f'_j)
/// with (x_i, x'_i) i.i.d. pairs.
pub fn bilinear_small_ball(
    a: &ComplexMatrix,
    pair: &AtomPairSpec,
    f: Option<&[Complex64]>,
    f2: Option<&[Complex64]>,
    beta: f64,
    trials: u64,
    seed: u64,
) -> Result<BilinearEstimate> {
    pair.validate()?;
    let n = a.n();
    check_len("f", f, n)?;
    check_len("f'", f2, n)?;
    if !(beta > 0.0) {
        return invalid("radius beta must be positive");
    }
    if trials == 0 {
        return invalid("need at least one trial");
    }
    let (a, flag) = normalized(a);
    let values: Vec<Complex64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut s = RandomStream::for_trial(seed, t);
            let (x, y) = draw_pairs(pair, n, &mut s);
            form(&a, &x, &y, f, f2, None, None)
        })
        .collect();
    Ok(BilinearEstimate { estimate: mc_from_values(&values, beta), normalized: flag })
}

fn support_of(pair: &AtomPairSpec) -> Result<Vec<PairAtom>> {
    pair.finite_support()
        .ok_or_else(|| LabError::Unsupported("exact enumeration needs a finite-support pair law".into()))
}

/// Visits every assignment of `n` indices to `k` alternatives.
fn odometer(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    let mut idx = vec![0usize; n];
    loop {
        f(&idx);
        let mut i = 0;
        while i < n {
            idx[i] += 1;
            if idx[i] < k {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
        if i == n {
            return;
        }
    }
}

fn full_form_cloud(
    a: &ComplexMatrix,
    pair: &AtomPairSpec,
    f: Option<&[Complex64]>,
    f2: Option<&[Complex64]>,
    b: Option<&[Complex64]>,
    b2: Option<&[Complex64]>,
) -> Result<Cloud> {
    let support = support_of(pair)?;
    let n = a.n();
    let count = (support.len() as u128).saturating_pow(n as u32);
    if count > ENUMERATION_CAP as u128 {
        return Err(LabError::TooLarge { size: count, cap: ENUMERATION_CAP as u128 });
    }
    let mut raw = Vec::with_capacity(count as usize);
    let (mut x, mut y) = (vec![zero(); n], vec![zero(); n]);
    odometer(n, support.len(), |idx| {
        let mut p = 1.0;
        for (i, &k) in idx.iter().enumerate() {
            x[i] = support[k].xi1;
            y[i] = support[k].xi2;
            p *= support[k].p;
        }
        raw.push((form(a, &x, &y, f, f2, b, b2), p));
    });
    let scale = raw.iter().map(|(z, _)| z.norm()).fold(0.0, f64::max).max(1.0);
    Ok(merge_cloud(raw, 1e-12 * scale))
}

/// Exact small-ball probability of the bilinear form by enumeration.
pub fn bilinear_small_ball_exact(
    a: &ComplexMatrix,
    pair: &AtomPairSpec,
    f: Option<&[Complex64]>,
    f2: Option<&[Complex64]>,
    beta: f64,
) -> Result<SmallBall> {
    pair.validate()?;
    check_len("f", f, a.n())?;
    check_len("f'", f2, a.n())?;
    if !(beta > 0.0) {
        return invalid("radius beta must be positive");
    }
    let (a, _) = normalized(a);
    let cloud = full_form_cloud(&a, pair, f, f2, None, None)?;
    let m = max_ball_mass(&cloud, beta);
    Ok(SmallBall { gamma: m.gamma, upper: m.upper, exact: m.exact, center: m.center, atoms: cloud.len() })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecouplingOptions {
    pub c: f64,
    /// The decoupled radius is beta sqrt(log n) k.
    pub k: f64,
    pub trials: u64,
    /// Enumerate both sides when the supports allow it.
    pub allow_exact: bool,
}

impl Default for DecouplingOptions {
    fn default() -> Self {
        Self { c: 1e-3, k: 10.0, trials: 2000, allow_exact: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecouplingReport {
    pub gamma: f64,
    pub gamma_decoupled: f64,
    pub radius: f64,
    pub threshold: f64,
    pub ok: bool,
    pub exact: bool,
}

/// Budget for the exact decoupled enumeration, in assignments.
const DECOUPLED_CAP: u128 = 100_000_000;

/// Compares gamma for sum a_ij x_i x'_j + sum b_i x_i + sum b'_i x'_i (at the
/// given b, b') with the probability that the form restricted to the U x Ubar
/// and Ubar x U blocks, in differenced variables, is within
/// beta sqrt(log n) k of zero.
#[allow(clippy::too_many_arguments)]
pub fn decoupling_check(
    a: &ComplexMatrix,
    u: &[usize],
    pair: &AtomPairSpec,
    b: Option<&[Complex64]>,
    b2: Option<&[Complex64]>,
    beta: f64,
    opts: &DecouplingOptions,
    seed: u64,
) -> Result<DecouplingReport> {
    pair.validate()?;
    let n = a.n();
    check_len("b", b, n)?;
    check_len("b'", b2, n)?;
    if !(beta > 0.0) {
        return invalid("radius beta must be positive");
    }
    let mut in_u = vec![false; n];
    for &i in u {
        if i >= n {
            return invalid(format!("index {i} outside 0..{n}"));
        }
        in_u[i] = true;
    }
    let uu: Vec<usize> = (0..n).filter(|&i| in_u[i]).collect();
    let ubar: Vec<usize> = (0..n).filter(|&i| !in_u[i]).collect();
    if uu.is_empty() || ubar.is_empty() {
        return invalid("U and its complement must both be nonempty");
    }
    let radius = beta * (n as f64).ln().sqrt() * opts.k;

    let diff = pair.finite_support().map(|s| {
        let raw = s.iter().flat_map(|p| s.iter().map(move |q| (p.xi1 - q.xi1, p.xi2 - q.xi2, p.p * q.p)));
        let mut out: Vec<(Complex64, Complex64, f64)> = Vec::new();
        for (v, w, p) in raw {
            match out.iter_mut().find(|e| (e.0 - v).norm() < 1e-12 && (e.1 - w).norm() < 1e-12) {
                Some(e) => e.2 += p,
                None => out.push((v, w, p)),
            }
        }
        out
    });
    let exact_ok = opts.allow_exact
        && diff.as_ref().is_some_and(|d| {
            let s = support_of(pair).map(|s| s.len()).unwrap_or(usize::MAX) as u128;
            s.saturating_pow(n as u32) <= 1_000_000 && (d.len() as u128).saturating_pow(n as u32) <= DECOUPLED_CAP
        });

    if exact_ok {
        let diff = diff.unwrap();
        let cloud = full_form_cloud(a, pair, None, None, b, b2)?;
        let gamma = max_ball_mass(&cloud, beta).gamma;
        let eps = 1e-9 * (radius + 1.0);
        let quantum = 1e-12 * (1.0 + hs_norm(a)) * 4.0;
        let mut total = 0.0;
        let mut failed: Option<LabError> = None;
        odometer(ubar.len(), diff.len(), |idx| {
            if failed.is_some() {
                return;
            }
            let p_out: f64 = idx.iter().map(|&k| diff[k].2).product();
            let mut cloud: Cloud = vec![(zero(), 1.0)];
            for &i in &uu {
                let (mut c, mut d) = (zero(), zero());
                for (&j, &k) in ubar.iter().zip(idx) {
                    c += a[(i, j)] * diff[k].1;
                    d += a[(j, i)] * diff[k].0;
                }
                let term = merge_cloud(diff.iter().map(|&(v, w, p)| (c * v + d * w, p)), quantum);
                match convolve(&cloud, &term, quantum) {
                    Ok(next) => cloud = next,
                    Err(e) => {
                        failed = Some(e);
                        return;
                    }
                }
            }
            let inside: f64 = cloud.iter().filter(|(z, _)| z.norm() <= radius + eps).map(|(_, p)| p).sum();
            total += p_out * inside;
        });
        if let Some(e) = failed {
            return Err(e);
        }
        let threshold = opts.c * gamma.powi(4);
        let gamma_decoupled = total.min(1.0);
        return Ok(DecouplingReport {
            gamma,
            gamma_decoupled,
            radius,
            threshold,
            ok: gamma_decoupled >= threshold,
            exact: true,
        });
    }

    if opts.trials == 0 {
        return invalid("need at least one trial");
    }
    let full: Vec<Complex64> = (0..opts.trials)
        .into_par_iter()
        .map(|t| {
            let mut s = RandomStream::new(seed, t, 0);
            let (x, y) = draw_pairs(pair, n, &mut s);
            form(a, &x, &y, None, None, b, b2)
        })
        .collect();
    let gamma = mc_from_values(&full, beta).gamma;
    let hits: u64 = (0..opts.trials)
        .into_par_iter()
        .map(|t| {
            let mut s = RandomStream::new(seed, t, 1);
            let (x1, y1) = draw_pairs(pair, n, &mut s);
            let (x2, y2) = draw_pairs(pair, n, &mut s);
            let v: Vec<Complex64> = x1.iter().zip(&x2).map(|(p, q)| p - q).collect();
            let w: Vec<Complex64> = y1.iter().zip(&y2).map(|(p, q)| p - q).collect();
            let mut d = zero();
            for &i in &uu {
                for &j in &ubar {
                    d += a[(i, j)] * v[i] * w[j] + a[(j, i)] * v[j] * w[i];
                }
            }
            u64::from(d.norm() <= radius)
        })
        .sum();
    let gamma_decoupled = hits as f64 / opts.trials as f64;
    let threshold = opts.c * gamma.powi(4);
    Ok(DecouplingReport { gamma, gamma_decoupled, radius, threshold, ok: gamma_decoupled >= threshold, exact: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_matrix() {
        let a = ComplexMatrix::zeros(4);
        let pair = AtomPairSpec::discrete_mix(0.0);
        let est = bilinear_small_ball(&a, &pair, None, None, 0.1, 1000, 1).unwrap();
        assert_eq!(est.estimate.gamma, 1.0);
        let r = decoupling_check(&a, &[0, 1], &pair, None, None, 0.1, &DecouplingOptions::default(), 1).unwrap();
        assert!(r.exact && r.ok);
        assert_eq!((r.gamma, r.gamma_decoupled), (1.0, 1.0));
    }

    #[test]
    fn rank_one_corner() {
        // A = e1 e1^T: the form is (x_1 + f_1)(x'_1 + f'_1) with independent signs
        let mut a = ComplexMatrix::zeros(2);
        a[(0, 0)] = Complex64::new(1.0, 0.0);
        let pair = AtomPairSpec::discrete_mix(0.0);
        let f = [Complex64::new(0.5, 0.0), zero()];
        let g = [Complex64::new(0.0, 0.0), zero()];
        // values (+-1 + 0.5)(+-1): {1.5, -1.5, -0.5, 0.5}, each 1/4
        let e = bilinear_small_ball_exact(&a, &pair, Some(&f), Some(&g), 0.5).unwrap();
        assert!((e.gamma - 0.5).abs() < 1e-15);
        let mc = bilinear_small_ball(&a, &pair, Some(&f), Some(&g), 0.5, 4000, 9).unwrap();
        assert!(mc.estimate.ci.lo <= 0.5 && 0.5 <= mc.estimate.ci.hi);
    }

    #[test]
    fn exact_decoupling_small() {
        let n = 5;
        let a = ComplexMatrix::from_fn(n, |i, j| Complex64::new(((i * 3 + j * 5) % 7) as f64 - 3.0, 0.0));
        let pair = AtomPairSpec::discrete_mix(0.0);
        let r = decoupling_check(&a, &[0, 1], &pair, None, None, 0.5, &DecouplingOptions::default(), 1).unwrap();
        assert!(r.exact && r.ok, "{r:?}");
        assert!(r.gamma <= 1.0 && r.gamma_decoupled <= 1.0);
    }

    #[test]
    fn rejects_trivial_split() {
        let a = ComplexMatrix::identity(3);
        let pair = AtomPairSpec::discrete_mix(0.0);
        let opts = DecouplingOptions::default();
        assert!(decoupling_check(&a, &[], &pair, None, None, 0.1, &opts, 1).is_err());
        assert!(decoupling_check(&a, &[0, 1, 2], &pair, None, None, 0.1, &opts, 1).is_err());
    }
}
