use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ENUMERATION_CAP;
use crate::error::{invalid, LabError, Result};

/// Q = { g0 + k_1 g_1 + ... + k_r g_r : lower_i <= k_i <= upper_i }.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapProgression {
    pub g0: Complex64,
    pub generators: Vec<Complex64>,
    pub lower: Vec<i64>,
    pub upper: Vec<i64>,
    pub symmetric: bool,
}

impl GapProgression {
    pub fn new(g0: Complex64, generators: Vec<Complex64>, lower: Vec<i64>, upper: Vec<i64>) -> Result<Self> {
        let symmetric = g0 == Complex64::new(0.0, 0.0) && lower.iter().zip(&upper).all(|(l, u)| *l == -*u);
        let q = Self { g0, generators, lower, upper, symmetric };
        q.validate()?;
        Ok(q)
    }

    /// Symmetric progression with |k_i| <= dims_i.
    pub fn symmetric(generators: Vec<Complex64>, dims: &[i64]) -> Result<Self> {
        let lower = dims.iter().map(|d| -d).collect();
        Self::new(Complex64::new(0.0, 0.0), generators, lower, dims.to_vec())
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.generators.len();
        if self.lower.len() != r || self.upper.len() != r {
            return invalid("progression bounds must match the number of generators");
        }
        if self.lower.iter().zip(&self.upper).any(|(l, u)| l > u) {
            return invalid("progression lower bound exceeds upper bound");
        }
        if !self.g0.is_finite() || self.generators.iter().any(|g| !g.is_finite()) {
            return invalid("progression steps must be finite");
        }
        let sym = self.g0 == Complex64::new(0.0, 0.0) && self.lower.iter().zip(&self.upper).all(|(l, u)| *l == -*u);
        if sym != self.symmetric {
            return invalid("symmetric flag disagrees with g0 and the bounds");
        }
        Ok(())
    }

    /// Number of points of the integer box, before any collisions.
    pub fn box_size(&self) -> u128 {
        self.lower.iter().zip(&self.upper).map(|(l, u)| (u - l + 1) as u128).fold(1u128, |a, b| a.saturating_mul(b))
    }

    fn scale(&self) -> f64 {
        self.g0.norm()
            + self
                .generators
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .map(|(g, (l, u))| g.norm() * (l.abs().max(u.abs()) as f64))
                .sum::<f64>()
    }

    fn point(&self, k: &[i64]) -> Complex64 {
        self.g0 + self.generators.iter().zip(k).map(|(g, &k)| g * k as f64).sum::<Complex64>()
    }

    /// Visits every box point in odometer order.
    fn for_each(&self, mut f: impl FnMut(Complex64)) {
        let mut k = self.lower.clone();
        loop {
            f(self.point(&k));
            let mut i = 0;
            while i < k.len() {
                if k[i] < self.upper[i] {
                    k[i] += 1;
                    break;
                }
                k[i] = self.lower[i];
                i += 1;
            }
            if i == k.len() {
                return;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapImage {
    /// Distinct image points with their multiplicities, sorted.
    pub elements: Vec<(Complex64, u64)>,
    pub proper: bool,
    /// Number of distinct image points.
    pub size: usize,
    pub box_size: u128,
}

pub fn gap_enumerate(q: &GapProgression) -> Result<GapImage> {
    q.validate()?;
    let box_size = q.box_size();
    if box_size > ENUMERATION_CAP as u128 {
        return Err(LabError::TooLarge { size: box_size, cap: ENUMERATION_CAP as u128 });
    }
    // collisions are decided up to a tolerance relative to the progression's extent
    let quantum = 1e-9 * q.scale().max(1e-300);
    let mut index: HashMap<(i64, i64), usize> = HashMap::new();
    let mut elements: Vec<(Complex64, u64)> = Vec::new();
    q.for_each(|z| {
        let key = ((z.re / quantum).round() as i64, (z.im / quantum).round() as i64);
        let slot = *index.entry(key).or_insert_with(|| {
            elements.push((z, 0));
            elements.len() - 1
        });
        elements[slot].1 += 1;
    });
    elements.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    let size = elements.len();
    Ok(GapImage { elements, proper: size as u128 == box_size, size, box_size })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaClose {
    pub close: bool,
    pub nearest: Complex64,
    pub distance: f64,
    /// False when the box was too large and nearest came from lattice rounding.
    pub exact: bool,
}

/// Whether some point of Q lies within delta of a.
pub fn delta_close(q: &GapProgression, a: Complex64, delta: f64) -> Result<DeltaClose> {
    q.validate()?;
    if q.box_size() <= ENUMERATION_CAP as u128 {
        let mut best = (f64::INFINITY, q.g0);
        q.for_each(|z| {
            let d = (z - a).norm();
            if d < best.0 {
                best = (d, z);
            }
        });
        return Ok(DeltaClose { close: best.0 <= delta, nearest: best.1, distance: best.0, exact: true });
    }
    // coordinate descent on the real least-squares problem, rounded and clamped
    let mut k: Vec<i64> = q.lower.iter().zip(&q.upper).map(|(l, u)| (l + u) / 2).collect();
    for _ in 0..50 {
        let mut changed = false;
        for i in 0..k.len() {
            let g = q.generators[i];
            if g.norm_sqr() == 0.0 {
                continue;
            }
            let rest = q.point(&k) - g * k[i] as f64;
            let t = ((a - rest) * g.conj()).re / g.norm_sqr();
            let ki = (t.round() as i64).clamp(q.lower[i], q.upper[i]);
            if ki != k[i] {
                k[i] = ki;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let nearest = q.point(&k);
    let distance = (nearest - a).norm();
    Ok(DeltaClose { close: distance <= delta, nearest, distance, exact: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn enumerate_examples() {
        let q = GapProgression::symmetric(vec![c(1.0, 0.0)], &[2]).unwrap();
        let img = gap_enumerate(&q).unwrap();
        let values: Vec<f64> = img.elements.iter().map(|e| e.0.re).collect();
        assert_eq!(values, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert!(img.proper && img.size == 5);

        let q = GapProgression::symmetric(vec![c(1.0, 0.0), c(2.0, 0.0)], &[1, 1]).unwrap();
        let img = gap_enumerate(&q).unwrap();
        assert_eq!(img.size, 7);
        assert_eq!(img.box_size, 9);
        assert!(!img.proper);
        assert_eq!(img.elements.iter().map(|e| e.1).sum::<u64>(), 9);

        let q = GapProgression::new(c(5.0, 0.0), vec![], vec![], vec![]).unwrap();
        let img = gap_enumerate(&q).unwrap();
        assert_eq!(img.elements, vec![(c(5.0, 0.0), 1)]);
        assert!(img.proper && !q.symmetric);
    }

    #[test]
    fn closeness_examples() {
        let q = GapProgression::symmetric(vec![c(1.0, 0.0)], &[2]).unwrap();
        assert!(delta_close(&q, c(1.05, 0.0), 0.1).unwrap().close);
        assert!(!delta_close(&q, c(2.5, 0.0), 0.1).unwrap().close);
        let q = GapProgression::symmetric(vec![c(1.0, 0.0), c(0.0, 1.0)], &[3, 3]).unwrap();
        let r = delta_close(&q, c(2.0, 2.9), 0.15).unwrap();
        assert!(r.close && r.exact);
        assert!((r.nearest - c(2.0, 3.0)).norm() < 1e-12);
    }

    #[test]
    fn rounding_fallback_on_huge_box() {
        let q = GapProgression::symmetric(vec![c(1.0, 0.0), c(0.0, 1.0)], &[100_000, 100_000]).unwrap();
        let r = delta_close(&q, c(123.4, -56.6), 0.6).unwrap();
        assert!(!r.exact && r.close);
        assert!((r.nearest - c(123.0, -57.0)).norm() < 1e-9);
    }

    #[test]
    fn flag_must_match_bounds() {
        let bad = GapProgression {
            g0: c(0.0, 0.0),
            generators: vec![c(1.0, 0.0)],
            lower: vec![0],
            upper: vec![2],
            symmetric: true,
        };
        assert!(gap_enumerate(&bad).is_err());
    }
}
