use serde::{Deserialize, Serialize};

use crate::atoms::AtomPairSpec;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentMatch {
    pub matches: bool,
    pub max_defect: f64,
    /// Exponents (Re xi1, Im xi1, Re xi2, Im xi2) of the worst mixed moment.
    pub worst: [u32; 4],
}

/// Compare all mixed moments of total degree <= k. Both finite-support and
/// Gaussian moments are exact, so the tolerance only absorbs rounding.
pub fn moments_match(a: &AtomPairSpec, b: &AtomPairSpec, k: u32) -> MomentMatch {
    let tol = 1e-9;
    let mut worst = [0; 4];
    let mut max_defect: f64 = 0.0;
    for i in 0..=k {
        for j in 0..=k - i {
            for l in 0..=k - i - j {
                for m in 0..=k - i - j - l {
                    let p = [i, j, l, m];
                    let d = (a.moment(p) - b.moment(p)).abs();
                    if d > max_defect {
                        max_defect = d;
                        worst = p;
                    }
                }
            }
        }
    }
    MomentMatch { matches: max_defect <= tol, max_defect, worst }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let g = AtomPairSpec::gaussian_real(0.5);
        let d = AtomPairSpec::discrete_mix(0.5);
        let m = moments_match(&g, &d, 2);
        assert!(m.matches && m.max_defect < 1e-15);
        assert!(moments_match(&g, &g, 6).matches);
        let m = moments_match(&g, &AtomPairSpec::gaussian_real(0.6), 2);
        assert!(!m.matches);
        assert!((m.max_defect - 0.1).abs() < 1e-12);
        assert_eq!(m.worst, [1, 0, 1, 0]);
        // the Bernoulli mixture differs at fourth order: E psi^4 = 1 vs 3
        assert!(!moments_match(&g, &d, 4).matches);
    }
}
