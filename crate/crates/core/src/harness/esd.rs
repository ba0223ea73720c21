use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::svg::Plot;
use super::{execute, nonempty, Assertion, Csv, Ctx, RunRecord};
use crate::atoms::{AtomPairSpec, ScalarAtomSpec};
use crate::elliptic::{discrepancy, inside_fraction, EllipticLaw};
use crate::ensemble::{EnsembleSpec, PerturbationSpec};
use crate::error::{invalid, Result};
use crate::linalg::eigenvalues;
use crate::rng::RandomStream;
use crate::spectra::{write_eigenvalues_csv, EmpiricalMeasure2D};
use crate::Complex64;

fn gaussian() -> AtomPairSpec {
    AtomPairSpec::gaussian_real(0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EsdConfig {
    pub sizes: Vec<usize>,
    pub rhos: Vec<f64>,
    /// Pair law; its rho is replaced by each sweep value.
    #[serde(default = "gaussian")]
    pub pair: AtomPairSpec,
    #[serde(default)]
    pub diagonal: Option<ScalarAtomSpec>,
    #[serde(default)]
    pub perturbation: PerturbationSpec,
    #[serde(default = "default_inflation")]
    pub inflation: f64,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_min_inside")]
    pub min_inside: f64,
    #[serde(default = "default_max_discrepancy")]
    pub max_discrepancy: f64,
}

fn default_inflation() -> f64 {
    1.05
}
fn default_grid() -> usize {
    20
}
fn default_min_inside() -> f64 {
    0.98
}
fn default_max_discrepancy() -> f64 {
    0.06
}

impl EsdConfig {
    pub fn validate(&self) -> Result<()> {
        nonempty("sizes", &self.sizes)?;
        nonempty("rhos", &self.rhos)?;
        if self.sizes.contains(&0) {
            return invalid("sizes must be positive");
        }
        if self.grid == 0 || !(self.inflation >= 1.0) {
            return invalid("grid must be positive and inflation at least 1");
        }
        for &rho in &self.rhos {
            EllipticLaw::real(rho)?;
            self.spec(self.sizes[0], rho, 0).validate()?;
        }
        Ok(())
    }

    fn spec(&self, n: usize, rho: f64, seed: u64) -> EnsembleSpec {
        EnsembleSpec {
            n,
            pair: self.pair.with_rho(rho),
            diagonal: self.diagonal.clone(),
            perturbation: self.perturbation.clone(),
            seed: RandomStream::derive_seed(seed, &format!("esd/n{n}/rho{rho}")),
        }
    }
}

struct Trial {
    eigs: Vec<Complex64>,
    inside: f64,
    disc: f64,
}

fn trial(cfg: &EsdConfig, n: usize, rho: f64, seed: u64, t: u64) -> Result<Trial> {
    let m = cfg.spec(n, rho, seed).generate_trial(t)?;
    let eigs = eigenvalues(&m.scaled(1.0 / (n as f64).sqrt()))?;
    let law = EllipticLaw::real(rho)?;
    let mu = EmpiricalMeasure2D::new(eigs);
    let inside = inside_fraction(&mu, &law, cfg.inflation);
    let disc = discrepancy(&mu, &law, cfg.grid)?;
    Ok(Trial { eigs: mu.points, inside, disc })
}

fn ellipse(rho: f64) -> Vec<(f64, f64)> {
    let (a, b) = (1.0 + rho.abs(), 1.0 - rho.abs());
    let rot = if rho < 0.0 { std::f64::consts::FRAC_PI_2 } else { 0.0 };
    (0..=200)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / 200.0;
            let (x, y) = (a * t.cos(), b * t.sin());
            (x * rot.cos() - y * rot.sin(), x * rot.sin() + y * rot.cos())
        })
        .collect()
}

pub(super) fn run(cfg: &EsdConfig, ctx: &mut Ctx) -> Result<Vec<RunRecord>> {
    let trials = ctx.trials_or(5);
    let points: Vec<(usize, f64)> = cfg.sizes.iter().flat_map(|&n| cfg.rhos.iter().map(move |&r| (n, r))).collect();
    let tasks: Vec<(usize, u64)> = (0..points.len()).flat_map(|p| (0..trials).map(move |t| (p, t))).collect();
    let seed = ctx.seed;
    let results: Vec<Result<Trial>> =
        tasks.par_iter().map(|&(p, t)| trial(cfg, points[p].0, points[p].1, seed, t)).collect();

    let mut summary = Csv::new(&["n", "rho", "trial", "inside_fraction", "discrepancy"]);
    let mut records = Vec::new();
    let mut results = results.into_iter();
    for &(n, rho) in &points {
        let batch: Vec<Result<Trial>> = results.by_ref().take(trials as usize).collect();
        let mut files: Vec<(String, Vec<u8>)> = Vec::new();
        let record = execute(format!("esd n={n} rho={rho}"), |run| {
            let batch: Vec<Trial> = batch.into_iter().collect::<Result<_>>()?;
            for (t, tr) in batch.iter().enumerate() {
                summary.row(&[&n, &rho, &t, &tr.inside, &tr.disc]);
            }
            let min_inside = batch.iter().map(|t| t.inside).fold(1.0, f64::min);
            let mean_disc = batch.iter().map(|t| t.disc).sum::<f64>() / batch.len() as f64;
            run.metric("min_inside_fraction", min_inside);
            run.metric("mean_discrepancy", mean_disc);
            run.check(Assertion::at_least(
                format!("inside_fraction({}) in every trial", cfg.inflation),
                min_inside,
                cfg.min_inside,
            ));
            run.check(Assertion::at_most("mean grid discrepancy", mean_disc, cfg.max_discrepancy));

            let first = &batch[0].eigs;
            let mut buf = Vec::new();
            write_eigenvalues_csv(&mut buf, first)?;
            files.push((format!("eigenvalues_n{n}_rho{rho}.csv"), buf));
            let pts: Vec<(f64, f64)> = first.iter().map(|z| (z.re, z.im)).collect();
            let outline = ellipse(rho);
            let xs: Vec<f64> = pts.iter().chain(&outline).map(|p| p.0).collect();
            let ys: Vec<f64> = pts.iter().chain(&outline).map(|p| p.1).collect();
            let mut plot = Plot::fit(&format!("eigenvalues of X/sqrt(n), n={n}, rho={rho}"), "Re", "Im", &xs, &ys);
            plot.scatter(&pts, "steelblue").line(&outline, "firebrick");
            files.push((format!("esd_n{n}_rho{rho}.svg"), plot.render().into_bytes()));
            Ok(())
        });
        for (name, bytes) in files {
            ctx.out.write(&name, &bytes)?;
        }
        records.push(record);
    }
    ctx.out.write("esd_summary.csv", summary.bytes())?;
    Ok(records)
}
