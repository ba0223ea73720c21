//! Generalized arithmetic progressions and small-ball probabilities of linear
//! and bilinear forms, plus the cofactor expansion of a determinant along its
//! first row and column.

mod bilinear;
mod cofactor;
mod dist;
mod gap;
mod smallball;

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub use bilinear::{
    bilinear_small_ball, bilinear_small_ball_exact, decoupling_check, DecouplingOptions, DecouplingReport,
};
pub use cofactor::{
    bilinear_coefficients, cofactor_bilinear_identity, cofactor_bilinear_identity_exact, det_bareiss, CofactorCheck,
    ExactCofactorCheck, IntMatrix, MAX_ORDER,
};
pub use dist::{dist_subspace_experiment, DistQuery, DistReport, SubspaceKind};
pub use gap::{delta_close, gap_enumerate, DeltaClose, GapImage, GapProgression};
pub use smallball::{
    claim_fourier_bound, forward_gap_concentration, small_ball_exact, small_ball_mc, AtomLaw, GapConcentration,
    McEstimate, SmallBall, SmallBallQuery,
};

/// Cap on the number of distinct partial sums an exact enumeration may hold.
pub const ENUMERATION_CAP: usize = 10_000_000;
/// Largest point cloud for which the exact two-dimensional ball search runs.
pub const EXACT_CLOUD_CAP: usize = 10_000;

/// Weighted point cloud: distinct values with their probabilities.
pub(crate) type Cloud = Vec<(Complex64, f64)>;

fn key(z: Complex64, q: f64) -> (i64, i64) {
    ((z.re / q).round() as i64, (z.im / q).round() as i64)
}

pub(crate) fn merge_cloud(points: impl IntoIterator<Item = (Complex64, f64)>, quantum: f64) -> Cloud {
    let mut index: HashMap<(i64, i64), usize> = HashMap::new();
    let mut out: Cloud = Vec::new();
    for (z, p) in points {
        if p == 0.0 {
            continue;
        }
        match index.entry(key(z, quantum)) {
            std::collections::hash_map::Entry::Occupied(e) => out[*e.get()].1 += p,
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(out.len());
                out.push((z, p));
            }
        }
    }
    out
}

/// Distribution of X + Y for independent clouds X and Y.
pub(crate) fn convolve(x: &Cloud, y: &Cloud, quantum: f64) -> Result<Cloud> {
    let raw = x.len().saturating_mul(y.len());
    let out = merge_cloud(x.iter().flat_map(|&(a, p)| y.iter().map(move |&(b, q)| (a + b, p * q))), quantum);
    if out.len() > ENUMERATION_CAP {
        return Err(LabError::TooLarge { size: raw as u128, cap: ENUMERATION_CAP as u128 });
    }
    Ok(out)
}

/// Heaviest closed ball of radius beta.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallMass {
    pub gamma: f64,
    /// Upper bound on the sup; equal to gamma when exact.
    pub upper: f64,
    pub exact: bool,
    pub center: Complex64,
}

fn slack(cloud: &Cloud, beta: f64) -> f64 {
    let scale = cloud.iter().map(|(z, _)| z.norm()).fold(0.0, f64::max);
    1e-9 * (beta + scale)
}

struct Grid<'a> {
    cloud: &'a Cloud,
    cell: f64,
    cells: HashMap<(i64, i64), Vec<usize>>,
}

impl<'a> Grid<'a> {
    fn new(cloud: &'a Cloud, cell: f64) -> Self {
        let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, (z, _)) in cloud.iter().enumerate() {
            cells.entry(Self::cell_of(*z, cell)).or_default().push(i);
        }
        Self { cloud, cell, cells }
    }

    fn cell_of(z: Complex64, cell: f64) -> (i64, i64) {
        ((z.re / cell).floor() as i64, (z.im / cell).floor() as i64)
    }

    /// Calls `f` on every point within `reach` cells of `c`.
    fn visit(&self, c: Complex64, reach: i64, mut f: impl FnMut(usize)) {
        let (cx, cy) = Self::cell_of(c, self.cell);
        for dx in -reach..=reach {
            for dy in -reach..=reach {
                if let Some(list) = self.cells.get(&(cx + dx, cy + dy)) {
                    list.iter().for_each(|&i| f(i));
                }
            }
        }
    }

    fn mass_within(&self, c: Complex64, r: f64, reach: i64) -> f64 {
        let mut m = 0.0;
        self.visit(c, reach, |i| {
            if (self.cloud[i].0 - c).norm() <= r {
                m += self.cloud[i].1;
            }
        });
        m
    }
}

/// Heaviest ball of radius beta with `p` on its boundary: each neighbour q
/// is covered for an arc of centre angles around arg(q - p), and a sweep over
/// the arc endpoints finds the deepest overlap. Returns (mass, centre).
fn boundary_sweep(grid: &Grid, i: usize, beta: f64, eps: f64) -> Option<(f64, Complex64)> {
    use std::f64::consts::TAU;
    let (p, w) = grid.cloud[i];
    let mut events: Vec<(f64, f64)> = Vec::new();
    let mut base = w;
    let mut wrapped = 0.0;
    grid.visit(p, 1, |j| {
        let (q, wq) = grid.cloud[j];
        let d = (q - p).norm();
        if j == i {
            return;
        }
        if d == 0.0 {
            base += wq;
            return;
        }
        if d > 2.0 * beta + eps {
            return;
        }
        let half = (d / (2.0 * beta)).min(1.0).acos() + 1e-10;
        let start = ((q - p).arg() - half).rem_euclid(TAU);
        let end = start + 2.0 * half;
        events.push((start, wq));
        if end >= TAU {
            wrapped += wq;
            events.push((end - TAU, -wq));
        } else {
            events.push((end, -wq));
        }
    });
    if events.is_empty() {
        return None;
    }
    // entries before exits at equal angles so touching arcs overlap
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    let (mut depth, mut best, mut at) = (wrapped, wrapped, 0.0);
    for &(phi, dw) in &events {
        depth += dw;
        if depth > best {
            best = depth;
            at = phi;
        }
    }
    // step just inside the arc that produced the maximum
    let at = at + 5e-11;
    Some((base + best, p + Complex64::from_polar(beta, at)))
}

/// Sup over centers of the mass of a closed ball of radius beta.
///
/// On the real line a sliding window is exact. In the plane an optimal ball
/// can be moved until an atom sits on its boundary, so an angular sweep
/// around every atom is exact; past EXACT_CLOUD_CAP atoms we
/// fall back to atom-centred balls, which give gamma, and their doubled
/// versions, which bound the sup from above.
pub(crate) fn max_ball_mass(cloud: &Cloud, beta: f64) -> BallMass {
    if cloud.is_empty() {
        return BallMass { gamma: 0.0, upper: 0.0, exact: true, center: Complex64::new(0.0, 0.0) };
    }
    let eps = slack(cloud, beta);
    if cloud.iter().all(|(z, _)| z.im == 0.0) {
        let mut pts: Vec<(f64, f64)> = cloud.iter().map(|(z, p)| (z.re, *p)).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (mut best, mut at) = (0.0, pts[0].0);
        let (mut j, mut window) = (0, 0.0);
        for i in 0..pts.len() {
            while j < pts.len() && pts[j].0 - pts[i].0 <= 2.0 * beta + eps {
                window += pts[j].1;
                j += 1;
            }
            if window > best {
                best = window;
                at = pts[i].0 + beta;
            }
            window -= pts[i].1;
        }
        let best = best.min(1.0);
        return BallMass { gamma: best, upper: best, exact: true, center: Complex64::new(at, 0.0) };
    }

    let grid = Grid::new(cloud, 2.0 * beta.max(eps));
    let r = beta + eps;
    let mut best = (0.0, cloud[0].0);
    let consider = |c: Complex64, best: &mut (f64, Complex64)| {
        let m = grid.mass_within(c, r, 1);
        if m > best.0 {
            *best = (m, c);
        }
    };
    if cloud.len() <= EXACT_CLOUD_CAP {
        for (i, &(p, _)) in cloud.iter().enumerate() {
            consider(p, &mut best);
            if let Some((m, c)) = boundary_sweep(&grid, i, beta, eps) {
                if m > best.0 {
                    consider(c, &mut best);
                }
            }
        }
        let g = best.0.min(1.0);
        return BallMass { gamma: g, upper: g, exact: true, center: best.1 };
    }
    let mut upper: f64 = 0.0;
    for &(p, _) in cloud {
        consider(p, &mut best);
        upper = upper.max(grid.mass_within(p, 2.0 * beta + eps, 2));
    }
    BallMass { gamma: best.0.min(1.0), upper: upper.min(1.0), exact: false, center: best.1 }
}

/// Empirical sup over centres from samples. On the real line this is the
/// exact sup of the empirical measure; in the plane the centre is searched
/// among the most populated cells of a beta-grid, which can only undercount.
pub(crate) fn empirical_ball_count(values: &[Complex64], beta: f64) -> (u64, Complex64) {
    if values.is_empty() {
        return (0, Complex64::new(0.0, 0.0));
    }
    let w = 1.0 / values.len() as f64;
    let scale = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let eps = 1e-9 * (beta + scale);
    if values.iter().all(|z| z.im == 0.0) {
        let mut xs: Vec<f64> = values.iter().map(|z| z.re).collect();
        xs.sort_by(f64::total_cmp);
        let (mut best, mut at, mut j) = (0usize, xs[0], 0usize);
        for i in 0..xs.len() {
            while j < xs.len() && xs[j] - xs[i] <= 2.0 * beta + eps {
                j += 1;
            }
            if j - i > best {
                best = j - i;
                at = xs[i] + beta;
            }
        }
        return (best as u64, Complex64::new(at, 0.0));
    }
    let cloud: Cloud = values.iter().map(|&z| (z, w)).collect();
    let grid = Grid::new(&cloud, beta.max(eps));
    let mut counts: Vec<((i64, i64), usize)> = grid.cells.iter().map(|(k, v)| (*k, v.len())).collect();
    counts.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut best = (0u64, values[0]);
    let r = beta + eps;
    for (k, _) in counts.iter().take(16) {
        let members = &grid.cells[k];
        let mean = members.iter().map(|&i| values[i]).sum::<Complex64>() / members.len() as f64;
        let centre = Complex64::new((k.0 as f64 + 0.5) * grid.cell, (k.1 as f64 + 0.5) * grid.cell);
        let mut cands = vec![mean, centre];
        cands.extend(members.iter().take(8).map(|&i| values[i]));
        for c in cands {
            let mut n = 0u64;
            grid.visit(c, 2, |i| {
                if (values[i] - c).norm() <= r {
                    n += 1;
                }
            });
            if n > best.0 {
                best = (n, c);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn real_window() {
        let cloud: Cloud = vec![(c(0.0, 0.0), 0.25), (c(1.0, 0.0), 0.5), (c(3.0, 0.0), 0.25)];
        let b = max_ball_mass(&cloud, 0.5);
        assert!((b.gamma - 0.75).abs() < 1e-15 && b.exact);
        assert!((max_ball_mass(&cloud, 0.4).gamma - 0.5).abs() < 1e-15);
    }

    #[test]
    fn planar_ball_through_two_atoms() {
        // three corners of a unit square: any radius-0.75 ball holds at most two
        let cloud: Cloud = vec![(c(0.0, 0.0), 0.3), (c(1.0, 0.0), 0.3), (c(0.0, 1.0), 0.4)];
        let b = max_ball_mass(&cloud, 0.5);
        assert!((b.gamma - 0.7).abs() < 1e-12, "{b:?}");
        let b = max_ball_mass(&cloud, 0.75);
        assert!((b.gamma - 1.0).abs() < 1e-12, "{b:?}");
    }
}
