//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::Instant;

use elliptic_lab::anticonc::{
    cofactor_bilinear_identity_exact, decoupling_check, dist_subspace_experiment, small_ball_exact, small_ball_mc,
    DecouplingOptions, DistQuery, IntMatrix, SmallBallQuery, SubspaceKind,
};
use elliptic_lab::atoms::{AtomPairSpec, ScalarAtomSpec};
use elliptic_lab::elliptic::{discrepancy, discrepancy_between, inside_fraction, EllipticLaw};
use elliptic_lab::ensemble::{EnsembleSpec, PerturbationSpec};
use elliptic_lab::limitlaw::potential::limit_potential_at;
use elliptic_lab::limitlaw::stieltjes::default_grid;
use elliptic_lab::limitlaw::{
    empirical_stu, nu_z_density, potential_match, s_from_singular_values, small_sigma_profile, solve_stu_system,
    truncation_distance_trial, variance_scaling_probe, PotentialOptions,
};
use elliptic_lab::linalg::eigenvalues;
use elliptic_lab::lsvlab::lsv_tail;
use elliptic_lab::matrix::hs_norm;
use elliptic_lab::rng::RandomStream;
use elliptic_lab::spectra::{shifted_singular_values, EmpiricalMeasure2D};
use elliptic_lab::{Complex64, ComplexMatrix, Result};
use rand::Rng;
use rand_distr::StandardNormal;

const SEED: u64 = 2024;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn seed(tag: &str) -> u64 {
    RandomStream::derive_seed(SEED, tag)
}

fn esd(m: &ComplexMatrix) -> Result<EmpiricalMeasure2D> {
    let scaled = m.scaled(1.0 / (m.n() as f64).sqrt());
    Ok(EmpiricalMeasure2D::new(eigenvalues(&scaled)?))
}

fn elliptic_convergence() -> Result<(bool, String)> {
    let mut ok = true;
    let mut detail = Vec::new();
    for rho in [0.0, 0.5, -0.5] {
        let start = Instant::now();
        let spec = EnsembleSpec::new(1000, AtomPairSpec::gaussian_real(rho), seed(&format!("c1/{rho}")));
        let law = EllipticLaw::real(rho)?;
        let (mut min_inside, mut disc) = (1.0f64, 0.0);
        for t in 0..5 {
            let mu = esd(&spec.generate_trial(t)?)?;
            min_inside = min_inside.min(inside_fraction(&mu, &law, 1.05));
            disc += discrepancy(&mu, &law, 20)? / 5.0;
        }
        let secs = start.elapsed().as_secs_f64();
        ok &= min_inside >= 0.98 && disc <= 0.06 && secs <= 300.0;
        detail.push(format!("rho={rho}: min inside {min_inside:.4}, mean disc {disc:.4}, {secs:.0}s"));
    }
    Ok((ok, detail.join("; ")))
}

fn universality() -> Result<(bool, String)> {
    let n = 800;
    let gauss = EnsembleSpec::new(n, AtomPairSpec::gaussian_real(0.5), seed("c2/gauss"));
    let discrete = EnsembleSpec::new(n, AtomPairSpec::discrete_mix(0.5), seed("c2/discrete"));
    let (z, alpha) = (c(0.3, 0.2), c(0.5, 0.1));
    let mut diff = 0.0;
    for t in 0..20 {
        let sg = s_from_singular_values(&shifted_singular_values(&gauss.generate_trial(t)?, z)?, alpha);
        let sd = s_from_singular_values(&shifted_singular_values(&discrete.generate_trial(t)?, z)?, alpha);
        diff += (sg - sd).norm() / 20.0;
    }
    let d = discrepancy_between(&esd(&gauss.generate()?)?, &esd(&discrete.generate()?)?, 0.5, 20)?;
    Ok((diff <= 0.05 && d <= 0.08, format!("mean |s diff| {diff:.4}, ESD discrepancy {d:.4}")))
}

fn low_rank_invariance() -> Result<(bool, String)> {
    let n = 1000;
    let base = EnsembleSpec::new(n, AtomPairSpec::gaussian_real(0.5), seed("c3"));
    let pert = base.clone().with_perturbation(PerturbationSpec::LowRank { rank: 1, scale: 1.0 });
    let f = pert.perturbation.matrix(n).unwrap();
    let norm = hs_norm(&f).powi(2) / (n * n) as f64;
    let d = discrepancy_between(&esd(&base.generate()?)?, &esd(&pert.generate()?)?, 0.5, 20)?;
    Ok(((norm - 1.0).abs() < 1e-9 && d <= 0.05, format!("(1/n^2)||F||^2 = {norm:.6}, discrepancy {d:.4}")))
}

fn stieltjes_system() -> Result<(bool, String)> {
    let st = solve_stu_system(0.0, c(0.0, 0.0), c(0.0, 2.0))?;
    let root_err = (st.s - c(0.0, 2f64.sqrt() - 1.0)).norm();

    let grid = default_grid(c(0.0, 0.0), 0.01);
    let nu = nu_z_density(0.0, c(0.0, 0.0), &grid, 1e-3)?;
    let sup = grid
        .iter()
        .zip(&nu.density)
        .map(|(x, d)| (d - (4.0 - x * x).max(0.0).sqrt() / (2.0 * std::f64::consts::PI)).abs())
        .fold(0.0, f64::max);

    let x = EnsembleSpec::new(500, AtomPairSpec::gaussian_real(0.5), seed("c4")).generate()?;
    let zs = [c(0.0, 0.0), c(0.3, 0.2), c(0.5, -0.4), c(1.0, 0.0), c(1.2, 0.8)];
    let alphas = [c(0.3, 0.5), c(-0.2, 1.0)];
    let mut hits = 0;
    let mut worst: f64 = 0.0;
    for z in zs {
        for alpha in alphas {
            let emp = empirical_stu(&x, z, alpha)?;
            let lim = solve_stu_system(0.5, z, alpha)?;
            let gap = (emp.s - lim.s).norm();
            worst = worst.max(gap);
            hits += usize::from(gap <= 0.1);
        }
    }
    Ok((
        root_err <= 1e-10 && sup <= 2e-2 && hits >= 9,
        format!(
            "root error {root_err:.1e}, semicircle sup error {sup:.4}, {hits}/10 points within 0.1 (worst {worst:.4})"
        ),
    ))
}

fn log_potential() -> Result<(bool, String)> {
    let opts = PotentialOptions::default();
    let mut ok = true;
    let mut detail = Vec::new();
    for rho in [0.0, 0.5] {
        for z in [c(2.0, 0.0), c(3.0, 0.0), c(1.0, 1.5)] {
            let limit = limit_potential_at(rho, z, &opts)?;
            let spec = EnsembleSpec::new(800, AtomPairSpec::gaussian_real(rho), seed(&format!("c5/{rho}/{z}")));
            let (mut gap, mut emp) = (0.0, 0.0);
            for t in 0..5 {
                let m = potential_match(&spec.generate_trial(t)?, None, z, &opts)?;
                gap += (m.u_emp - limit).abs() / 5.0;
                emp += m.u_emp / 5.0;
            }
            ok &= gap <= 0.05;
            if rho == 0.0 && z == c(2.0, 0.0) {
                let e = (emp + 2f64.ln()).abs();
                ok &= e <= 0.05;
                detail.push(format!("|U+log2| {e:.4}"));
            }
            detail.push(format!("rho={rho} z={z}: {gap:.4}"));
        }
    }
    Ok((ok, detail.join(", ")))
}

fn least_singular_value() -> Result<(bool, String)> {
    let n = 100;
    let t = (n as f64).powi(-3);
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, pair) in [("gaussian", AtomPairSpec::gaussian_real(0.5)), ("bernoulli", AtomPairSpec::discrete_mix(0.5))]
    {
        for (pname, p) in
            [("F=0", PerturbationSpec::Zero), ("F bounded", PerturbationSpec::EntryBounded { alpha: 0.5 })]
        {
            let spec = EnsembleSpec::new(n, pair.clone(), seed(&format!("c6/{name}/{pname}"))).with_perturbation(p);
            let r = lsv_tail(&spec, &[t], 1000)?;
            let p = r.tail_probs[0].p;
            ok &= p <= 0.05 && r.failures == 0;
            detail.push(format!("{name} {pname}: {p:.3}"));
        }
    }
    Ok((ok, detail.join(", ")))
}

fn small_singular_profile() -> Result<(bool, String)> {
    let spec = EnsembleSpec::new(400, AtomPairSpec::gaussian_real(0.5), seed("c7"));
    let mut clean = 0;
    for t in 0..100 {
        let sv = shifted_singular_values(&spec.generate_trial(t)?, c(0.3, 0.2))?;
        clean += usize::from(small_sigma_profile(&sv, 0.01, 0.4).is_empty());
    }
    Ok((clean >= 99, format!("{clean}/100 trials without violations")))
}

fn distance_to_subspace() -> Result<(bool, String)> {
    let random = DistQuery::new(200, 100, ScalarAtomSpec::GaussianReal, SubspaceKind::Random);
    let r = dist_subspace_experiment(&random, 1000, seed("c8/random"))?;
    let coord = DistQuery::new(200, 100, ScalarAtomSpec::GaussianReal, SubspaceKind::Coordinate);
    let q = dist_subspace_experiment(&coord, 1000, seed("c8/coord"))?;
    let z = (q.mean_dist_sq - 100.0).abs() / q.se_dist_sq;
    Ok((
        r.failure_rate <= 0.01 && z <= 3.0,
        format!("failure rate {:.4}, coordinate mean {:.2} ({z:.2} SE from n-d)", r.failure_rate, q.mean_dist_sq),
    ))
}

fn anti_concentration() -> Result<(bool, String)> {
    let ones = vec![c(1.0, 0.0); 10];
    let g = small_ball_exact(&SmallBallQuery::scalar(ones, ScalarAtomSpec::Bernoulli, 0.5))?.gamma;
    let binomial = g == 252.0 / 1024.0;

    let mut scaling: f64 = 0.0;
    for n in [25usize, 100, 400] {
        let mut rng = RandomStream::new(seed("c9/coeffs"), n as u64, 0);
        let a: Vec<Complex64> =
            (0..n).map(|_| Complex64::from_polar(1.0, std::f64::consts::TAU * rng.random::<f64>())).collect();
        let est = small_ball_mc(
            &SmallBallQuery::scalar(a, ScalarAtomSpec::Bernoulli, 1.0),
            10_000,
            seed(&format!("c9/lo/{n}")),
        )?;
        scaling = scaling.max(est.gamma * (n as f64).sqrt());
    }

    let n = 40;
    let pair = AtomPairSpec::discrete_mix(0.5);
    let u: Vec<usize> = (0..n / 2).collect();
    let opts = DecouplingOptions::default();
    let mut ok_runs = 0;
    for run in 0..100u64 {
        let mut rng = RandomStream::new(seed("c9/decoupling"), run, 0);
        let a = ComplexMatrix::from_fn(n, |_, _| c(rng.sample(StandardNormal), 0.0));
        let a = a.scaled(1.0 / hs_norm(&a));
        let r = decoupling_check(&a, &u, &pair, None, None, 0.1, &opts, seed(&format!("c9/dec/{run}")))?;
        ok_runs += usize::from(r.ok);
    }

    let mut rng = RandomStream::new(seed("c9/cofactor"), 0, 0);
    let mut exact_zero = 0;
    for _ in 0..100 {
        let k = rng.random_range(2..=6usize);
        let data: Vec<i64> = (0..k * k).map(|_| rng.random_range(-9..=9)).collect();
        let r = cofactor_bilinear_identity_exact(&IntMatrix::from_i64(k, &data)?)?;
        exact_zero += usize::from(r.defect == 0.into());
    }

    Ok((
        binomial && scaling <= 5.0 && ok_runs >= 95 && exact_zero == 100,
        format!(
            "gamma(n=10) = {g} ({}), max gamma sqrt(n) {scaling:.3}, decoupling ok {ok_runs}/100, cofactor exact {exact_zero}/100",
            if binomial { "exact" } else { "mismatch" }
        ),
    ))
}

fn truncation() -> Result<(bool, String)> {
    let spec = EnsembleSpec::new(200, AtomPairSpec::gaussian_real(0.5), seed("c10"));
    let mut mean = 0.0;
    for t in 0..10 {
        mean += truncation_distance_trial(&spec, t, 0.4, c(0.3, 0.2))? / 10.0;
    }
    Ok((mean <= 0.05, format!("mean Levy distance {mean:.4}")))
}

fn variance_decay() -> Result<(bool, String)> {
    let spec = EnsembleSpec::new(100, AtomPairSpec::gaussian_real(0.5), seed("c11"));
    let p = variance_scaling_probe(&spec, c(0.3, 0.2), c(0.0, 1.0), 400)?;
    Ok((
        (1.0..=4.0).contains(&p.ratio),
        format!("var(n=100) {:.3e}, var(n=200) {:.3e}, ratio {:.3}", p.var_n, p.var_2n, p.ratio),
    ))
}

type Criterion = fn() -> Result<(bool, String)>;

fn main() {
    let criteria: [(&str, Criterion); 11] = [
        ("elliptic law convergence", elliptic_convergence),
        ("universality", universality),
        ("low-rank perturbation", low_rank_invariance),
        ("Stieltjes system", stieltjes_system),
        ("log-potential identity", log_potential),
        ("least singular value", least_singular_value),
        ("small singular value profile", small_singular_profile),
        ("distance to a subspace", distance_to_subspace),
        ("anti-concentration oracles", anti_concentration),
        ("truncation", truncation),
        ("variance decay", variance_decay),
    ];
    let only: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if only.is_some_and(|k| k != i + 1) {
            continue;
        }
        let start = Instant::now();
        let (ok, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!ok);
        println!(
            "{} [{:>2}] {name}: {detail} ({:.1}s)",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
