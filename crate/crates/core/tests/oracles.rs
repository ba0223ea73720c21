//! Cross-checks of the dense kernels and estimators against independent
//! reference computations written here from scratch.

use elliptic_lab::anticonc::{
    cofactor_bilinear_identity, decoupling_check, small_ball_exact, small_ball_mc, DecouplingOptions, SmallBallQuery,
};
use elliptic_lab::atoms::{AtomPairSpec, ScalarAtomSpec};
use elliptic_lab::ensemble::EnsembleSpec;
use elliptic_lab::linalg::{eigenvalues, singular_values};
use elliptic_lab::lsvlab::singularity_rate_exact;
use elliptic_lab::rng::RandomStream;
use elliptic_lab::{Complex64, ComplexMatrix};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

/// Cyclic Jacobi eigenvalues of a real symmetric matrix (row-major).
fn jacobi_symmetric(n: usize, mut a: Vec<f64>) -> Vec<f64> {
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].powi(2))
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut d: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    d.sort_by(f64::total_cmp);
    d
}

/// Eigenvalues of a Hermitian matrix via its real 2n x 2n embedding; each
/// eigenvalue appears twice there.
fn hermitian_oracle(h: &ComplexMatrix) -> Vec<f64> {
    let n = h.n();
    let m = 2 * n;
    let mut a = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = h.as_slice()[i * n + j];
            a[i * m + j] = z.re;
            a[(i + n) * m + j + n] = z.re;
            a[i * m + j + n] = -z.im;
            a[(i + n) * m + j] = z.im;
        }
    }
    jacobi_symmetric(m, a).into_iter().step_by(2).collect()
}

fn gaussian_complex(n: usize, seed: u64) -> ComplexMatrix {
    let mut rng = RandomStream::new(seed, 0, 0);
    ComplexMatrix::from_fn(n, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

#[test]
fn hermitian_eigenvalues_match_jacobi() {
    for (n, seed) in [(3, 1), (8, 2), (17, 3)] {
        let g = gaussian_complex(n, seed);
        let h = g.add(&g.adjoint()).unwrap();
        let mut got: Vec<f64> = eigenvalues(&h).unwrap().iter().map(|z| z.re).collect();
        got.sort_by(f64::total_cmp);
        let want = hermitian_oracle(&h);
        let scale = want.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-9 * scale, "n={n}: {a} vs {b}");
        }
    }
}

#[test]
fn singular_values_match_gram_eigenvalues() {
    for (n, seed) in [(4, 5), (12, 6), (25, 7)] {
        let m = gaussian_complex(n, seed);
        let gram = m.adjoint().matmul(&m);
        let mut want: Vec<f64> = hermitian_oracle(&gram).iter().map(|l| l.max(0.0).sqrt()).collect();
        want.reverse();
        let got = singular_values(&m).unwrap();
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-8 * want[0], "n={n}: {a} vs {b}");
        }
    }
}

#[test]
fn eigenvalue_sum_and_product_match_trace_and_determinant() {
    let m = gaussian_complex(6, 9);
    let eigs = eigenvalues(&m).unwrap();
    let sum: Complex64 = eigs.iter().sum();
    assert!((sum - m.trace()).norm() < 1e-9);
    let prod: Complex64 = eigs.iter().product();
    let det = elliptic_lab::linalg::Lu::factor(6, m.as_slice().to_vec()).unwrap().det();
    assert!((prod - det).norm() < 1e-8 * det.norm().max(1.0));
}

/// sup_c #{sign patterns with |sum +-a_i - c| <= beta} / 2^n, scanning every
/// sum and every centre of a radius-beta circle through two sums.
fn brute_small_ball(a: &[Complex64], beta: f64) -> f64 {
    let n = a.len();
    let sums: Vec<Complex64> =
        (0..1u32 << n).map(|mask| (0..n).map(|i| if mask >> i & 1 == 1 { a[i] } else { -a[i] }).sum()).collect();
    let mut centers = sums.clone();
    for i in 0..sums.len() {
        for j in i + 1..sums.len() {
            let (p, q) = (sums[i], sums[j]);
            let d = (q - p).norm();
            if d > 0.0 && d <= 2.0 * beta {
                let mid = (p + q) / 2.0;
                let h = (beta * beta - d * d / 4.0).max(0.0).sqrt();
                let perp = (q - p) * Complex64::new(0.0, 1.0) / d;
                centers.push(mid + perp * h);
                centers.push(mid - perp * h);
            }
        }
    }
    let tol = 1e-9 * (beta + a.iter().map(|z| z.norm()).sum::<f64>());
    centers.iter().map(|c| sums.iter().filter(|s| (*s - c).norm() <= beta + tol).count()).max().unwrap() as f64
        / sums.len() as f64
}

#[test]
fn small_ball_matches_brute_force_enumeration() {
    let a =
        vec![Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.5), Complex64::new(-0.3, 1.1), Complex64::new(0.2, -0.7)];
    let got = small_ball_exact(&SmallBallQuery::scalar(a.clone(), ScalarAtomSpec::Bernoulli, 0.8)).unwrap();
    assert!(got.exact);
    assert_eq!(got.gamma, brute_small_ball(&a, 0.8));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn planar_sup_matches_brute_force(
        a in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..8),
        beta in 0.05f64..2.5,
    ) {
        let a: Vec<Complex64> = a.into_iter().map(|(x, y)| Complex64::new(x, y)).collect();
        let got = small_ball_exact(&SmallBallQuery::scalar(a.clone(), ScalarAtomSpec::Bernoulli, beta)).unwrap();
        prop_assert_eq!(got.gamma, brute_small_ball(&a, beta));
    }
}

#[test]
fn monte_carlo_small_ball_brackets_exact_value() {
    let mut rng = RandomStream::new(21, 0, 0);
    let a: Vec<Complex64> =
        (0..12).map(|_| Complex64::from_polar(1.0, std::f64::consts::TAU * rng.random::<f64>())).collect();
    let q = SmallBallQuery::scalar(a, ScalarAtomSpec::Bernoulli, 0.7);
    let exact = small_ball_exact(&q).unwrap().gamma;
    let mc = small_ball_mc(&q, 20_000, 4).unwrap();
    // the histogram-mode center search can only underestimate the supremum
    assert!(mc.gamma <= exact + 4.0 * (exact / 20_000f64).sqrt(), "{} vs {exact}", mc.gamma);
    assert!(mc.ci.hi >= 0.5 * exact);
}

#[test]
fn tiny_bernoulli_singularity_by_enumeration() {
    // 2x2 with independent +-1 entries: singular iff ad = bc, half of the 16 sign patterns
    let spec = EnsembleSpec::new(2, AtomPairSpec::discrete_mix(0.0), 1);
    assert_eq!(singularity_rate_exact(&spec).unwrap(), 0.5);
}

#[test]
fn exact_decoupling_on_small_bernoulli_form() {
    let n = 8;
    let mut rng = RandomStream::new(33, 0, 0);
    let a = ComplexMatrix::from_fn(n, |_, _| Complex64::new(rng.sample(StandardNormal), 0.0));
    let pair = AtomPairSpec::discrete_mix(0.5);
    let u: Vec<usize> = (0..4).collect();
    let r = decoupling_check(&a, &u, &pair, None, None, 0.2, &DecouplingOptions::default(), 8).unwrap();
    assert!(r.exact);
    assert!(r.gamma > 0.0 && r.gamma <= 1.0 && r.gamma_decoupled <= 1.0);
    assert_eq!(r.ok, r.gamma_decoupled >= r.threshold);
}

#[test]
fn float_cofactor_identity_on_random_matrices() {
    for seed in 0..5 {
        let m = gaussian_complex(5, 100 + seed);
        let c = cofactor_bilinear_identity(&m).unwrap();
        assert!(c.defect < 1e-9 * c.lhs.norm().max(1.0), "{c:?}");
    }
}
