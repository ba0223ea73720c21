//! Levy distance between distribution functions on the line.

use crate::spectra::EmpiricalMeasure1D;

/// A distribution function: an empirical step function, or a piecewise-linear
/// interpolant of tabulated values (0 left of the table, last value right of it).
#[derive(Clone, Debug, PartialEq)]
pub enum Cdf {
    Empirical(EmpiricalMeasure1D),
    Gridded { x: Vec<f64>, f: Vec<f64> },
}

impl Cdf {
    fn value(&self, t: f64) -> f64 {
        match self {
            Cdf::Empirical(m) => m.cdf(t),
            Cdf::Gridded { x, f } => interp(x, f, t, false),
        }
    }

    fn left(&self, t: f64) -> f64 {
        match self {
            Cdf::Empirical(m) => m.cdf_left(t),
            Cdf::Gridded { x, f } => interp(x, f, t, true),
        }
    }

    fn breakpoints(&self) -> &[f64] {
        match self {
            Cdf::Empirical(m) => &m.points,
            Cdf::Gridded { x, .. } => x,
        }
    }
}

fn interp(x: &[f64], f: &[f64], t: f64, left: bool) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    if t < x[0] || (left && t == x[0]) {
        return 0.0;
    }
    let k = x.partition_point(|&v| v <= t);
    if k >= x.len() {
        return *f.last().unwrap();
    }
    let (x0, x1) = (x[k - 1], x[k]);
    let w = (t - x0) / (x1 - x0);
    f[k - 1] + w * (f[k] - f[k - 1])
}

fn sandwiched(f: &Cdf, g: &Cdf, eps: f64) -> bool {
    let slack = 1e-14;
    let mut cands: Vec<f64> = Vec::new();
    cands.extend_from_slice(g.breakpoints());
    for &b in f.breakpoints() {
        cands.push(b - eps);
        cands.push(b + eps);
    }
    cands.iter().all(|&c| {
        g.value(c) <= f.value(c + eps) + eps + slack
            && g.left(c) <= f.left(c + eps) + eps + slack
            && f.value(c - eps) - eps <= g.value(c) + slack
            && f.left(c - eps) - eps <= g.left(c) + slack
    })
}

/// inf { eps : F(x - eps) - eps <= G(x) <= F(x + eps) + eps for all x }, by
/// bisection to 1e-12 with exact checks at all breakpoints and their left limits.
pub fn levy_distance(f: &Cdf, g: &Cdf) -> f64 {
    if sandwiched(f, g, 0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if sandwiched(f, g, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

pub fn levy_distance_empirical(a: &EmpiricalMeasure1D, b: &EmpiricalMeasure1D) -> f64 {
    levy_distance(&Cdf::Empirical(a.clone()), &Cdf::Empirical(b.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_masses() {
        let a = EmpiricalMeasure1D::new(vec![0.0]);
        let b = EmpiricalMeasure1D::new(vec![0.3]);
        assert!((levy_distance_empirical(&a, &b) - 0.3).abs() < 1e-11);
        assert_eq!(levy_distance_empirical(&a, &a), 0.0);
    }

    #[test]
    fn far_apart_masses_cap_at_one() {
        let a = EmpiricalMeasure1D::new(vec![0.0]);
        let b = EmpiricalMeasure1D::new(vec![5.0]);
        assert!((levy_distance_empirical(&a, &b) - 1.0).abs() < 1e-11);
    }

    #[test]
    fn continuous_vs_itself() {
        let u = Cdf::Gridded { x: vec![0.0, 1.0], f: vec![0.0, 1.0] };
        assert_eq!(levy_distance(&u, &u), 0.0);
    }
}
