use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{execute, nonempty, Assertion, Csv, Ctx, RunRecord};
use crate::anticonc::{
    cofactor_bilinear_identity_exact, decoupling_check, delta_close, dist_subspace_experiment, gap_enumerate,
    small_ball_exact, small_ball_mc, DecouplingOptions, DistQuery, GapProgression, IntMatrix, SmallBallQuery,
    MAX_ORDER,
};
use crate::atoms::{AtomPairSpec, ScalarAtomSpec};
use crate::error::{invalid, Result};
use crate::matrix::hs_norm;
use crate::rng::RandomStream;
use crate::{Complex64, ComplexMatrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmallBallCase {
    pub query: SmallBallQuery,
    /// Use Monte Carlo instead of exact enumeration.
    #[serde(default)]
    pub mc: bool,
    /// Expected exact value, checked to 1e-12.
    #[serde(default)]
    pub expect: Option<f64>,
    #[serde(default)]
    pub max_gamma: Option<f64>,
}

/// Random unit-modulus coefficients, Bernoulli atoms; checks gamma sqrt(n) <= bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErdosSweep {
    pub sizes: Vec<usize>,
    #[serde(default = "unit")]
    pub beta: f64,
    #[serde(default = "five")]
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecouplingSweep {
    pub n: usize,
    pub runs: u64,
    pub beta: f64,
    pub pair: AtomPairSpec,
    #[serde(default)]
    pub options: Option<DecouplingOptions>,
    #[serde(default = "min_ok")]
    pub min_ok_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistCase {
    pub query: DistQuery,
    #[serde(default = "max_failure")]
    pub max_failure_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CofactorSweep {
    pub runs: u64,
    #[serde(default = "six")]
    pub max_n: usize,
    #[serde(default = "nine")]
    pub entry_bound: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapCase {
    pub progression: GapProgression,
    /// Optional delta-closeness query.
    #[serde(default)]
    pub point: Option<Complex64>,
    #[serde(default)]
    pub delta: Option<f64>,
}

fn unit() -> f64 {
    1.0
}
fn five() -> f64 {
    5.0
}
fn min_ok() -> f64 {
    0.95
}
fn max_failure() -> f64 {
    0.01
}
fn six() -> usize {
    6
}
fn nine() -> i64 {
    9
}

/// Anti-concentration experiments. Trials is the Monte Carlo sample size
/// (default 10000; dist default 1000).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnticoncConfig {
    #[serde(default)]
    pub small_ball: Vec<SmallBallCase>,
    #[serde(default)]
    pub erdos: Option<ErdosSweep>,
    #[serde(default)]
    pub decoupling: Option<DecouplingSweep>,
    #[serde(default)]
    pub dist: Option<DistCase>,
    #[serde(default)]
    pub cofactor: Option<CofactorSweep>,
    #[serde(default)]
    pub gaps: Vec<GapCase>,
}

impl AnticoncConfig {
    pub fn validate(&self) -> Result<()> {
        if self.small_ball.is_empty()
            && self.erdos.is_none()
            && self.decoupling.is_none()
            && self.dist.is_none()
            && self.cofactor.is_none()
            && self.gaps.is_empty()
        {
            return invalid("anticonc config has no experiment sections");
        }
        for c in &self.small_ball {
            c.query.validate()?;
        }
        if let Some(e) = &self.erdos {
            nonempty("erdos.sizes", &e.sizes)?;
            if e.sizes.contains(&0) || !(e.beta > 0.0) {
                return invalid("erdos sizes and beta must be positive");
            }
        }
        if let Some(d) = &self.decoupling {
            d.pair.validate()?;
            if d.n < 2 || d.runs == 0 || !(d.beta > 0.0) {
                return invalid("decoupling needs n >= 2, runs >= 1 and beta > 0");
            }
        }
        if let Some(d) = &self.dist {
            d.query.validate()?;
        }
        if let Some(c) = &self.cofactor {
            if c.max_n < 2 || c.max_n > MAX_ORDER || c.entry_bound < 0 {
                return invalid(format!(
                    "cofactor max_n must lie in 2..={} and entry_bound be non-negative",
                    MAX_ORDER
                ));
            }
        }
        for g in &self.gaps {
            g.progression.validate()?;
            if g.point.is_some() != g.delta.is_some() {
                return invalid("gap point and delta must be given together");
            }
        }
        Ok(())
    }
}

fn seed_for(seed: u64, tag: &str) -> u64 {
    RandomStream::derive_seed(seed, tag)
}

pub(super) fn run(cfg: &AnticoncConfig, ctx: &mut Ctx) -> Result<Vec<RunRecord>> {
    let trials = ctx.trials_or(10_000);
    let seed = ctx.seed;
    let mut records = Vec::new();

    if !cfg.small_ball.is_empty() {
        let mut csv = Csv::new(&["case", "n", "beta", "method", "gamma", "upper_or_ci_hi", "center_re", "center_im"]);
        for (k, case) in cfg.small_ball.iter().enumerate() {
            let record = execute(format!("small_ball {k}"), |run| {
                let q = &case.query;
                let gamma = if case.mc {
                    let e = small_ball_mc(q, trials, seed_for(seed, &format!("small_ball/{k}")))?;
                    csv.row(&[&k, &q.n(), &q.beta, &"mc", &e.gamma, &e.ci.hi, &e.center.re, &e.center.im]);
                    e.gamma
                } else {
                    let e = small_ball_exact(q)?;
                    csv.row(&[
                        &k,
                        &q.n(),
                        &q.beta,
                        &if e.exact { "exact" } else { "approx" },
                        &e.gamma,
                        &e.upper,
                        &e.center.re,
                        &e.center.im,
                    ]);
                    run.metric("exact", e.exact);
                    e.gamma
                };
                run.metric("gamma", gamma);
                if let Some(x) = case.expect {
                    run.check(Assertion::at_most("|gamma - expected|", (gamma - x).abs(), 1e-12));
                }
                if let Some(m) = case.max_gamma {
                    run.check(Assertion::at_most("gamma", gamma, m));
                }
                Ok(())
            });
            records.push(record);
        }
        ctx.out.write("small_ball.csv", csv.bytes())?;
    }

    if let Some(e) = &cfg.erdos {
        let mut csv = Csv::new(&["n", "gamma", "ci_lo", "ci_hi", "gamma_sqrt_n"]);
        let record = execute("erdos scaling", |run| {
            let mut worst: f64 = 0.0;
            for &n in &e.sizes {
                let mut rng = RandomStream::new(seed_for(seed, "erdos/coefficients"), n as u64, 0);
                let a: Vec<Complex64> =
                    (0..n).map(|_| Complex64::from_polar(1.0, std::f64::consts::TAU * rng.random::<f64>())).collect();
                let q = SmallBallQuery::scalar(a, ScalarAtomSpec::Bernoulli, e.beta);
                let est = small_ball_mc(&q, trials, seed_for(seed, &format!("erdos/{n}")))?;
                let scaled = est.gamma * (n as f64).sqrt();
                worst = worst.max(scaled);
                csv.row(&[&n, &est.gamma, &est.ci.lo, &est.ci.hi, &scaled]);
            }
            run.check(Assertion::at_most("max gamma sqrt(n)", worst, e.bound));
            Ok(())
        });
        ctx.out.write("erdos.csv", csv.bytes())?;
        records.push(record);
    }

    if let Some(d) = &cfg.decoupling {
        let opts = d.options.unwrap_or_default();
        let mut csv = Csv::new(&["run", "gamma", "gamma_decoupled", "threshold", "ok", "exact"]);
        let record = execute(format!("decoupling n={}", d.n), |run| {
            let u: Vec<usize> = (0..d.n / 2).collect();
            let mut ok = 0u64;
            for r in 0..d.runs {
                let mut rng = RandomStream::new(seed_for(seed, "decoupling/matrix"), r, 0);
                let a = ComplexMatrix::from_fn(d.n, |_, _| Complex64::new(rng.sample(StandardNormal), 0.0));
                let a = a.scaled(1.0 / hs_norm(&a));
                let rep = decoupling_check(
                    &a,
                    &u,
                    &d.pair,
                    None,
                    None,
                    d.beta,
                    &opts,
                    seed_for(seed, &format!("decoupling/{r}")),
                )?;
                ok += u64::from(rep.ok);
                csv.row(&[&r, &rep.gamma, &rep.gamma_decoupled, &rep.threshold, &rep.ok, &rep.exact]);
            }
            run.check(Assertion::at_least(
                "fraction of runs satisfying the decoupling inequality",
                ok as f64 / d.runs as f64,
                d.min_ok_rate,
            ));
            Ok(())
        });
        ctx.out.write("decoupling.csv", csv.bytes())?;
        records.push(record);
    }

    if let Some(d) = &cfg.dist {
        let dist_trials = ctx.trials_or(1000);
        let record = execute(format!("dist n={} d={}", d.query.n, d.query.d), |run| {
            let rep = dist_subspace_experiment(&d.query, dist_trials, seed_for(seed, "dist"))?;
            let mut csv = Csv::new(&[
                "n",
                "d",
                "trials",
                "failures",
                "failure_rate",
                "ci_lo",
                "ci_hi",
                "mean_dist_sq",
                "se_dist_sq",
            ]);
            csv.row(&[
                &rep.n,
                &rep.d,
                &rep.trials,
                &rep.failures,
                &rep.failure_rate,
                &rep.ci.lo,
                &rep.ci.hi,
                &rep.mean_dist_sq,
                &rep.se_dist_sq,
            ]);
            ctx.out.write("dist.csv", csv.bytes())?;
            run.metric("mean_dist_sq", rep.mean_dist_sq);
            run.check(Assertion::at_most("P(dist <= sqrt(n - d)/2)", rep.failure_rate, d.max_failure_rate));
            Ok(())
        });
        records.push(record);
    }

    if let Some(c) = &cfg.cofactor {
        let mut csv = Csv::new(&["run", "n", "det", "rhs", "defect"]);
        let record = execute("cofactor identity", |run| {
            let mut rng = RandomStream::new(seed_for(seed, "cofactor"), 0, 0);
            let mut zero = 0u64;
            for r in 0..c.runs {
                let n = rng.random_range(2..=c.max_n);
                let data: Vec<i64> = (0..n * n).map(|_| rng.random_range(-c.entry_bound..=c.entry_bound)).collect();
                let chk = cofactor_bilinear_identity_exact(&IntMatrix::from_i64(n, &data)?)?;
                zero += u64::from(chk.defect == 0.into());
                csv.row(&[&r, &n, &chk.lhs, &chk.rhs, &chk.defect]);
            }
            run.check(Assertion::at_least("runs with zero defect", zero as f64, c.runs as f64));
            Ok(())
        });
        ctx.out.write("cofactor.csv", csv.bytes())?;
        records.push(record);
    }

    if !cfg.gaps.is_empty() {
        let mut csv = Csv::new(&["case", "rank", "box_size", "distinct", "proper", "symmetric", "close", "distance"]);
        for (k, g) in cfg.gaps.iter().enumerate() {
            let record = execute(format!("gap {k}"), |run| {
                let img = gap_enumerate(&g.progression)?;
                let (close, dist) = match (g.point, g.delta) {
                    (Some(a), Some(delta)) => {
                        let r = delta_close(&g.progression, a, delta)?;
                        (r.close.to_string(), r.distance)
                    }
                    _ => (String::new(), f64::NAN),
                };
                run.metric("distinct", img.size as f64);
                run.metric("proper", img.proper);
                csv.row(&[
                    &k,
                    &g.progression.rank(),
                    &img.box_size,
                    &img.size,
                    &img.proper,
                    &g.progression.symmetric,
                    &close,
                    &dist,
                ]);
                Ok(())
            });
            records.push(record);
        }
        ctx.out.write("gaps.csv", csv.bytes())?;
    }
    Ok(records)
}
