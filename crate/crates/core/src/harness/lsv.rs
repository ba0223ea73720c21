use serde::{Deserialize, Serialize};

use super::svg::Plot;
use super::{execute, nonempty, Assertion, Csv, Ctx, RunRecord};
use crate::atoms::AtomPairSpec;
use crate::ensemble::{EnsembleSpec, PerturbationSpec};
use crate::error::{invalid, Result};
use crate::lsvlab::{lsv_tail, singularity_rate};
use crate::rng::RandomStream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LsvConfig {
    pub sizes: Vec<usize>,
    pub pairs: Vec<AtomPairSpec>,
    #[serde(default = "zero_only")]
    pub perturbations: Vec<PerturbationSpec>,
    /// Thresholds t = n^-e for each listed e.
    pub threshold_exponents: Vec<f64>,
    /// Asserts P(sigma_n <= n^-assert_exponent) <= max_tail.
    #[serde(default = "default_exponent")]
    pub assert_exponent: f64,
    #[serde(default = "default_max_tail")]
    pub max_tail: f64,
    /// Also report the numerical singularity rate.
    #[serde(default)]
    pub singularity: bool,
}

fn zero_only() -> Vec<PerturbationSpec> {
    vec![PerturbationSpec::Zero]
}
fn default_exponent() -> f64 {
    3.0
}
fn default_max_tail() -> f64 {
    0.05
}

impl LsvConfig {
    pub fn validate(&self) -> Result<()> {
        nonempty("sizes", &self.sizes)?;
        nonempty("pairs", &self.pairs)?;
        nonempty("perturbations", &self.perturbations)?;
        nonempty("threshold_exponents", &self.threshold_exponents)?;
        if self.sizes.contains(&0) {
            return invalid("sizes must be positive");
        }
        for p in &self.pairs {
            p.validate()?;
        }
        for f in &self.perturbations {
            for &n in &self.sizes {
                f.validate(n)?;
            }
        }
        Ok(())
    }
}

fn label(p: &PerturbationSpec) -> String {
    match p {
        PerturbationSpec::Zero => "zero".into(),
        PerturbationSpec::LowRank { rank, scale } => format!("low_rank(r={rank},s={scale})"),
        PerturbationSpec::EntryBounded { alpha } => format!("entry_bounded(a={alpha})"),
    }
}

pub(super) fn run(cfg: &LsvConfig, ctx: &mut Ctx) -> Result<Vec<RunRecord>> {
    let trials = ctx.trials_or(1000);
    let mut summary = Csv::new(&["run", "n", "pair", "rho", "perturbation", "t", "count", "p", "ci_lo", "ci_hi"]);
    let mut records = Vec::new();
    let mut k = 0usize;
    for &n in &cfg.sizes {
        for pair in &cfg.pairs {
            for pert in &cfg.perturbations {
                let name = format!("lsv n={n} pair={:?} rho={} F={}", pair.kind, pair.rho, label(pert));
                let tag = format!("lsv/{k}");
                let spec = EnsembleSpec {
                    n,
                    pair: pair.clone(),
                    diagonal: None,
                    perturbation: pert.clone(),
                    seed: RandomStream::derive_seed(ctx.seed, &tag),
                };
                let mut files: Vec<(String, Vec<u8>)> = Vec::new();
                let mut mark = cfg.threshold_exponents.clone();
                if !mark.contains(&cfg.assert_exponent) {
                    mark.push(cfg.assert_exponent);
                }
                let record = execute(name, |run| {
                    let ts: Vec<f64> = mark.iter().map(|e| (n as f64).powf(-e)).collect();
                    let report = lsv_tail(&spec, &ts, trials)?;
                    let at = (n as f64).powf(-cfg.assert_exponent);
                    let p = report.tail_probs.iter().find(|p| p.t == at).map_or(f64::NAN, |p| p.p);
                    run.check(Assertion::at_most(format!("P(sigma_n <= n^-{})", cfg.assert_exponent), p, cfg.max_tail));
                    run.metric("failures", report.failures);
                    run.metric("fitted_exponent", report.fitted_exponent);
                    if cfg.singularity {
                        run.metric("singularity_rate", singularity_rate(&spec, trials)?.rate);
                    }
                    for tp in &report.tail_probs {
                        summary.row(&[
                            &k,
                            &n,
                            &format!("{:?}", pair.kind),
                            &pair.rho,
                            &label(pert),
                            &tp.t,
                            &tp.count,
                            &tp.p,
                            &tp.ci.lo,
                            &tp.ci.hi,
                        ]);
                    }
                    let mut buf = Vec::new();
                    report.write_csv(&mut buf)?;
                    files.push((format!("lsv_tail_{k}.csv"), buf));
                    let pts: Vec<(f64, f64)> = report.tail_probs.iter().map(|p| (p.t.log10(), p.p)).collect();
                    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
                    let ys: Vec<f64> = pts.iter().map(|p| p.1).chain([0.0]).collect();
                    let mut plot =
                        Plot::fit(&format!("least singular value tail, n={n}"), "log10 t", "P(sigma_n <= t)", &xs, &ys);
                    plot.line(&pts, "steelblue").scatter(&pts, "steelblue");
                    files.push((format!("lsv_tail_{k}.svg"), plot.render().into_bytes()));
                    Ok(())
                });
                for (name, bytes) in files {
                    ctx.out.write(&name, &bytes)?;
                }
                records.push(record);
                k += 1;
            }
        }
    }
    ctx.out.write("lsv_summary.csv", summary.bytes())?;
    Ok(records)
}
