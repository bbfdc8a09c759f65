use serde::{Deserialize, Serialize};

use super::ConditionError;
use crate::weights::Exponents;

/// Default radius of the disk around `(1/p₀, 1/q₀)`.
pub const DEFAULT_DISK_RADIUS: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    /// `p' ≥ q`: line `y = (p₀'/q₀)(1 − x)`.
    A,
    /// `p' ≤ q`: line `y = 1 − (p₀/q₀')x`.
    B,
}

/// Line `y = slope·x + intercept` in the `(1/p, 1/q)` square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub slope: f64,
    pub intercept: f64,
}

impl Line {
    pub fn at(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: [f64; 2],
    pub radius: f64,
}

/// Line, disk and triangle `T = {(x, y) ∈ (0,1)² : y ≤ x}` around an
/// exponent pair, with their common part along the line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub case: Case,
    pub p0: f64,
    pub q0: f64,
    pub line: Line,
    pub disk: Disk,
    /// Endpoints of `ℓ ∩ D ∩ T` as points; `None` when empty.
    pub segment: Option<[[f64; 2]; 2]>,
    /// Side condition fails: `p₀ = 2` in case a, `q₀ = 2` in case b.
    pub degenerate: bool,
    /// The center lies in the interior of `T` (`q₀ > p₀`), so the segment
    /// extends on both sides of it.
    pub center_interior: bool,
}

impl RegionSpec {
    /// Whether `(x, y)` lies on the segment.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        match self.segment {
            Some([a, b]) => x >= a[0] && x <= b[0] && (y - self.line.at(x)).abs() <= 1e-12,
            None => false,
        }
    }

    /// `k` evenly spaced exponent pairs strictly inside the segment.
    pub fn sample_exponents(&self, k: usize) -> Vec<Exponents> {
        let Some([a, b]) = self.segment else { return vec![] };
        (1..=k)
            .filter_map(|i| {
                let x = a[0] + (b[0] - a[0]) * i as f64 / (k + 1) as f64;
                Exponents::new(1.0 / x, 1.0 / self.line.at(x)).ok()
            })
            .collect()
    }
}

/// Line through `(1/p₀, 1/q₀)` along which the conditions carry over, the
/// disk of radius `radius` about that point, and their intersection with `T`.
pub fn inherited_region(exps: &Exponents, case: Case, radius: f64) -> Result<RegionSpec, ConditionError> {
    let (p0, q0) = (exps.p, exps.q);
    let line = match case {
        Case::A => {
            if exps.p_conj < q0 {
                return Err(ConditionError::CaseMismatch { case: "a".into(), requirement: "p' >= q".into() });
            }
            let k = exps.p_conj / q0;
            Line { slope: -k, intercept: k }
        }
        Case::B => {
            if exps.p_conj > q0 {
                return Err(ConditionError::CaseMismatch { case: "b".into(), requirement: "p' <= q".into() });
            }
            Line { slope: -p0 / exps.q_conj, intercept: 1.0 }
        }
    };
    if !(radius.is_finite() && radius > 0.0) {
        return Err(ConditionError::ExponentOutOfRange(radius));
    }
    let (cx, cy) = (1.0 / p0, 1.0 / q0);
    let m = line.slope;
    let b = line.intercept;
    let reach = radius / (1.0 + m * m).sqrt();
    let lo = (cx - reach).max(0.0).max((1.0 - b) / m).max(b / (1.0 - m));
    let hi = (cx + reach).min(1.0).min(-b / m);
    let segment = (lo < hi).then(|| [[lo, line.at(lo)], [hi, line.at(hi)]]);
    let degenerate = match case {
        Case::A => (p0 - 2.0).abs() <= 1e-12,
        Case::B => (q0 - 2.0).abs() <= 1e-12,
    };
    Ok(RegionSpec {
        case,
        p0,
        q0,
        line,
        disk: Disk { center: [cx, cy], radius },
        segment,
        degenerate,
        center_interior: cy < cx,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_b_example_line() {
        let r = inherited_region(&Exponents::new(2.0, 4.0).unwrap(), Case::B, DEFAULT_DISK_RADIUS).unwrap();
        assert!((r.line.slope + 1.5).abs() < 1e-15);
        assert!((r.line.at(0.5) - 0.25).abs() < 1e-15);
        let [a, b] = r.segment.unwrap();
        assert!(a[0] < 0.5 && b[0] > 0.5);
        assert!(!r.degenerate && r.center_interior);
    }

    #[test]
    fn case_mismatch_is_rejected() {
        let e = Exponents::new(2.0, 4.0).unwrap();
        assert_eq!(inherited_region(&e, Case::A, 0.05).unwrap_err().name(), "CaseMismatch");
    }
}
