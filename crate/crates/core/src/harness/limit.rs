use serde::{Deserialize, Serialize};

use super::svg::Plot;
use super::{execute, nonempty, Assertion, Csv, Ctx, RunRecord};
use crate::atoms::AtomPairSpec;
use crate::ensemble::EnsembleSpec;
use crate::error::{invalid, Result};
use crate::limitlaw::potential::limit_potential_at;
use crate::limitlaw::stieltjes::default_grid;
use crate::limitlaw::{
    empirical_stu, nu_z_density, potential_match, solve_stu_system, truncation_distance_trial, variance_scaling_probe,
    PotentialOptions,
};
use crate::rng::RandomStream;
use crate::Complex64;

fn pair_for(pair: &Option<AtomPairSpec>, rho: f64) -> AtomPairSpec {
    pair.as_ref().map_or_else(|| AtomPairSpec::gaussian_real(rho), |p| p.with_rho(rho))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StieltjesSweep {
    pub rhos: Vec<f64>,
    pub zs: Vec<Complex64>,
    pub alphas: Vec<Complex64>,
    /// Compare with empirical traces of one matrix of this size.
    #[serde(default)]
    pub empirical_n: Option<usize>,
    #[serde(default)]
    pub pair: Option<AtomPairSpec>,
    #[serde(default = "tenth")]
    pub tolerance: f64,
    #[serde(default = "nine_tenths")]
    pub min_pass_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySweep {
    pub rhos: Vec<f64>,
    pub zs: Vec<Complex64>,
    #[serde(default = "milli")]
    pub epsilon: f64,
    #[serde(default = "centi")]
    pub grid_step: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSweep {
    pub n: usize,
    pub rhos: Vec<f64>,
    pub zs: Vec<Complex64>,
    #[serde(default)]
    pub pair: Option<AtomPairSpec>,
    #[serde(default = "twentieth")]
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarianceCase {
    pub n: usize,
    pub rho: f64,
    pub z: Complex64,
    pub alpha: Complex64,
    #[serde(default)]
    pub pair: Option<AtomPairSpec>,
    #[serde(default = "one")]
    pub min_ratio: f64,
    #[serde(default = "four")]
    pub max_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationCase {
    pub n: usize,
    pub rho: f64,
    pub delta: f64,
    pub z: Complex64,
    #[serde(default)]
    pub pair: Option<AtomPairSpec>,
    #[serde(default = "twentieth")]
    pub max_levy: f64,
}

fn tenth() -> f64 {
    0.1
}
fn nine_tenths() -> f64 {
    0.9
}
fn milli() -> f64 {
    1e-3
}
fn centi() -> f64 {
    1e-2
}
fn twentieth() -> f64 {
    0.05
}
fn one() -> f64 {
    1.0
}
fn four() -> f64 {
    4.0
}

/// Limit-law experiments. Trials: seeds for the potential sweep (default 5),
/// Monte Carlo draws for the variance probe (400) and truncation (10).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitConfig {
    #[serde(default)]
    pub stieltjes: Option<StieltjesSweep>,
    #[serde(default)]
    pub density: Option<DensitySweep>,
    #[serde(default)]
    pub potential: Option<PotentialSweep>,
    #[serde(default)]
    pub variance: Option<VarianceCase>,
    #[serde(default)]
    pub truncation: Option<TruncationCase>,
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho.abs() < 1.0) {
        return invalid(format!("rho = {rho} must satisfy |rho| < 1"));
    }
    Ok(())
}

impl LimitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.stieltjes.is_none()
            && self.density.is_none()
            && self.potential.is_none()
            && self.variance.is_none()
            && self.truncation.is_none()
        {
            return invalid("limit config has no experiment sections");
        }
        if let Some(s) = &self.stieltjes {
            nonempty("stieltjes.rhos", &s.rhos)?;
            nonempty("stieltjes.zs", &s.zs)?;
            nonempty("stieltjes.alphas", &s.alphas)?;
            s.rhos.iter().try_for_each(|&r| check_rho(r))?;
            if s.alphas.iter().any(|a| !(a.im > 0.0)) {
                return invalid("stieltjes alphas need Im(alpha) > 0");
            }
        }
        if let Some(d) = &self.density {
            nonempty("density.rhos", &d.rhos)?;
            nonempty("density.zs", &d.zs)?;
            d.rhos.iter().try_for_each(|&r| check_rho(r))?;
        }
        if let Some(p) = &self.potential {
            nonempty("potential.rhos", &p.rhos)?;
            nonempty("potential.zs", &p.zs)?;
            p.rhos.iter().try_for_each(|&r| check_rho(r))?;
        }
        if let Some(v) = &self.variance {
            check_rho(v.rho)?;
        }
        if let Some(t) = &self.truncation {
            check_rho(t.rho)?;
        }
        Ok(())
    }
}

fn spec(n: usize, pair: AtomPairSpec, seed: u64, tag: &str) -> EnsembleSpec {
    EnsembleSpec::new(n, pair, RandomStream::derive_seed(seed, tag))
}

pub(super) fn run(cfg: &LimitConfig, ctx: &mut Ctx) -> Result<Vec<RunRecord>> {
    let mut records = Vec::new();
    let seed = ctx.seed;

    if let Some(s) = &cfg.stieltjes {
        for &rho in &s.rhos {
            let mut csv = Csv::new(&[
                "rho", "z_re", "z_im", "alpha_re", "alpha_im", "s_re", "s_im", "t_re", "t_im", "u_re", "u_im",
                "s_emp_re", "s_emp_im", "gap",
            ]);
            let record = execute(format!("stieltjes rho={rho}"), |run| {
                let x = match s.empirical_n {
                    Some(n) => Some(spec(n, pair_for(&s.pair, rho), seed, &format!("stieltjes/{rho}")).generate()?),
                    None => None,
                };
                let (mut pass, mut total, mut worst) = (0usize, 0usize, 0.0f64);
                for &z in &s.zs {
                    for &alpha in &s.alphas {
                        let st = solve_stu_system(rho, z, alpha)?;
                        let (emp, gap) = match &x {
                            Some(x) => {
                                let e = empirical_stu(x, z, alpha)?.s;
                                (e, (e - st.s).norm())
                            }
                            None => (Complex64::new(f64::NAN, f64::NAN), f64::NAN),
                        };
                        if x.is_some() {
                            total += 1;
                            pass += usize::from(gap <= s.tolerance);
                            worst = worst.max(gap);
                        }
                        csv.row(&[
                            &rho, &z.re, &z.im, &alpha.re, &alpha.im, &st.s.re, &st.s.im, &st.t.re, &st.t.im, &st.u.re,
                            &st.u.im, &emp.re, &emp.im, &gap,
                        ]);
                    }
                }
                if total > 0 {
                    run.metric("worst_gap", worst);
                    run.check(Assertion::at_least(
                        "fraction of points with |s_emp - s| <= tolerance",
                        pass as f64 / total as f64,
                        s.min_pass_fraction,
                    ));
                }
                Ok(())
            });
            ctx.out.write(&format!("stieltjes_rho{rho}.csv"), csv.bytes())?;
            records.push(record);
        }
    }

    if let Some(d) = &cfg.density {
        for &rho in &d.rhos {
            for &z in &d.zs {
                let mut files = Vec::new();
                let record = execute(format!("nu_z rho={rho} z={z}"), |run| {
                    let nu = nu_z_density(rho, z, &default_grid(z, d.grid_step), d.epsilon)?;
                    let mass = nu.total_mass();
                    run.metric("total_mass", mass);
                    let mut csv = Csv::new(&["x", "density"]);
                    for (x, y) in nu.grid.iter().zip(&nu.density) {
                        csv.row(&[x, y]);
                    }
                    let pts: Vec<(f64, f64)> = nu.grid.iter().copied().zip(nu.density.iter().copied()).collect();
                    let mut plot =
                        Plot::fit(&format!("nu_z density, rho={rho}, z={z}"), "x", "density", &nu.grid, &nu.density);
                    plot.line(&pts, "steelblue");
                    files.push((format!("nu_z_rho{rho}_z{}_{}.csv", z.re, z.im), csv.bytes().to_vec()));
                    files.push((format!("nu_z_rho{rho}_z{}_{}.svg", z.re, z.im), plot.render().into_bytes()));
                    Ok(())
                });
                for (name, bytes) in files {
                    ctx.out.write(&name, &bytes)?;
                }
                records.push(record);
            }
        }
    }

    if let Some(p) = &cfg.potential {
        let trials = ctx.trials_or(5);
        let opts = PotentialOptions::default();
        let mut csv = Csv::new(&["rho", "z_re", "z_im", "trial", "u_emp", "u_limit"]);
        for &rho in &p.rhos {
            for &z in &p.zs {
                let record = execute(format!("potential rho={rho} z={z}"), |run| {
                    let limit = limit_potential_at(rho, z, &opts)?;
                    let sp = spec(p.n, pair_for(&p.pair, rho), seed, &format!("potential/{rho}/{z}"));
                    let mut gap = 0.0;
                    for t in 0..trials {
                        let m = potential_match(&sp.generate_trial(t)?, None, z, &opts)?;
                        gap += (m.u_emp - limit).abs() / trials as f64;
                        csv.row(&[&rho, &z.re, &z.im, &t, &m.u_emp, &limit]);
                    }
                    run.metric("u_limit", limit);
                    run.check(Assertion::at_most("mean |U_emp - U_limit|", gap, p.tolerance));
                    Ok(())
                });
                records.push(record);
            }
        }
        ctx.out.write("potential.csv", csv.bytes())?;
    }

    if let Some(v) = &cfg.variance {
        let trials = ctx.trials_or(400) as usize;
        let record = execute(format!("variance n={} rho={}", v.n, v.rho), |run| {
            let sp = spec(v.n, pair_for(&v.pair, v.rho), seed, "variance");
            let probe = variance_scaling_probe(&sp, v.z, v.alpha, trials)?;
            let mut csv = Csv::new(&["n", "mean_re", "mean_im", "variance"]);
            csv.row(&[&v.n, &probe.mean_n.re, &probe.mean_n.im, &probe.var_n]);
            csv.row(&[&(2 * v.n), &probe.mean_2n.re, &probe.mean_2n.im, &probe.var_2n]);
            ctx.out.write("variance.csv", csv.bytes())?;
            run.metric("ratio", probe.ratio);
            run.check(Assertion::at_least("var_n / var_2n", probe.ratio, v.min_ratio));
            run.check(Assertion::at_most("var_n / var_2n", probe.ratio, v.max_ratio));
            Ok(())
        });
        records.push(record);
    }

    if let Some(tc) = &cfg.truncation {
        let trials = ctx.trials_or(10);
        let record = execute(format!("truncation n={} delta={}", tc.n, tc.delta), |run| {
            let sp = spec(tc.n, pair_for(&tc.pair, tc.rho), seed, "truncation");
            let mut csv = Csv::new(&["trial", "levy_distance"]);
            let mut mean = 0.0;
            for t in 0..trials {
                let d = truncation_distance_trial(&sp, t, tc.delta, tc.z)?;
                mean += d / trials as f64;
                csv.row(&[&t, &d]);
            }
            ctx.out.write("truncation.csv", csv.bytes())?;
            run.check(Assertion::at_most("mean Levy distance", mean, tc.max_levy));
            Ok(())
        });
        records.push(record);
    }
    Ok(records)
}
