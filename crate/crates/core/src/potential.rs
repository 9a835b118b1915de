//! Piecewise-constant potentials with zero extension, exact integrals of the
//! negative part, and the uniform local L¹ constant C₁.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real potential that is constant on each cell `[x_{i-1}, x_i)` of a
/// strictly increasing list of breakpoints and zero outside `[x_0, x_n]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPotential", into = "RawPotential")]
pub struct PiecewisePotential {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawPotential {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawPotential> for PiecewisePotential {
    type Error = Error;

    fn try_from(raw: RawPotential) -> Result<Self> {
        PiecewisePotential::new(raw.breakpoints, raw.values)
    }
}

impl From<PiecewisePotential> for RawPotential {
    fn from(v: PiecewisePotential) -> Self {
        RawPotential {
            breakpoints: v.breakpoints,
            values: v.values,
        }
    }
}

/// A maximal interval on which the potential is constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
}

impl PiecewisePotential {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidPotential("need at least one cell".into()));
        }
        if breakpoints.len() != values.len() + 1 {
            return Err(Error::InvalidPotential(format!(
                "{} breakpoints for {} cells (expected {})",
                breakpoints.len(),
                values.len(),
                values.len() + 1
            )));
        }
        if let Some(b) = breakpoints.iter().find(|b| !b.is_finite()) {
            return Err(Error::InvalidPotential(format!("non-finite breakpoint {b}")));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidPotential(format!("non-finite value {v}")));
        }
        if let Some(w) = breakpoints.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPotential(format!(
                "breakpoints not strictly increasing at {} >= {}",
                w[0], w[1]
            )));
        }
        Ok(Self { breakpoints, values })
    }

    /// `V = value` on `[lo, hi)`.
    pub fn constant(lo: f64, hi: f64, value: f64) -> Result<Self> {
        Self::new(vec![lo, hi], vec![value])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cell_count(&self) -> usize {
        self.values.len()
    }

    /// The described interval `[x_0, x_n]`; outside it V is zero.
    pub fn domain(&self) -> (f64, f64) {
        (self.breakpoints[0], *self.breakpoints.last().unwrap())
    }

    pub fn value_at(&self, x: f64) -> f64 {
        let (lo, hi) = self.domain();
        if x < lo || x >= hi {
            return 0.0;
        }
        let i = self.breakpoints.partition_point(|&b| b <= x);
        self.values[i - 1]
    }

    pub fn negative_part_at(&self, x: f64) -> f64 {
        (-self.value_at(x)).max(0.0)
    }

    /// Constant pieces covering `[a, b]`, including the zero extension.
    /// Every breakpoint strictly inside `(a, b)` is a segment boundary.
    pub fn segments(&self, a: f64, b: f64) -> Vec<Segment> {
        let mut cuts = vec![a];
        cuts.extend(self.breakpoints.iter().copied().filter(|&x| x > a && x < b));
        cuts.push(b);
        cuts.windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| Segment {
                lo: w[0],
                hi: w[1],
                value: self.value_at(0.5 * (w[0] + w[1])),
            })
            .collect()
    }

    /// Exact ∫ₐᵇ V₋(y) dy.
    pub fn negative_part_integral(&self, a: f64, b: f64) -> Result<f64> {
        if !a.is_finite() || !b.is_finite() || a > b {
            return Err(Error::InvalidInterval { a, b });
        }
        Ok(self.negative_part_integral_unchecked(a, b))
    }

    fn negative_part_integral_unchecked(&self, a: f64, b: f64) -> f64 {
        let (lo, hi) = self.domain();
        let a = a.max(lo);
        let b = b.min(hi);
        if a >= b {
            return 0.0;
        }
        // first cell whose right edge exceeds a
        let mut i = self.breakpoints.partition_point(|&x| x <= a).max(1);
        let mut total = 0.0;
        while i < self.breakpoints.len() && self.breakpoints[i - 1] < b {
            let l = self.breakpoints[i - 1].max(a);
            let r = self.breakpoints[i].min(b);
            let neg = (-self.values[i - 1]).max(0.0);
            if r > l && neg > 0.0 {
                total += neg * (r - l);
            }
            i += 1;
        }
        total
    }

    /// Exact supremum of `F(x) = ∫ₓ^{x+1} V₋`.
    ///
    /// F is continuous and piecewise linear with kinks only where `x` or
    /// `x + 1` crosses a breakpoint, so its maximum is attained on the
    /// candidate set `{x_i} ∪ {x_i - 1}`.
    pub fn c1_sup(&self) -> WindowIntegralProfile {
        let mut candidates: Vec<f64> = self.breakpoints.iter().flat_map(|&x| [x, x - 1.0]).collect();
        candidates.sort_by(f64::total_cmp);
        candidates.dedup();
        let integrals: Vec<f64> = candidates
            .iter()
            .map(|&x| self.negative_part_integral_unchecked(x, x + 1.0))
            .collect();
        let supremum = integrals.iter().copied().fold(0.0, f64::max);
        // ties resolve to the smallest abscissa
        let tie = 1e-12 * supremum.max(1.0);
        let idx = integrals.iter().position(|&f| f >= supremum - tie).unwrap_or(0);
        WindowIntegralProfile {
            argmax: candidates[idx],
            candidates,
            integrals,
            supremum,
        }
    }

    pub fn translated(&self, t: f64) -> Result<Self> {
        Self::new(self.breakpoints.iter().map(|x| x + t).collect(), self.values.clone())
    }

    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        Self::new(
            self.breakpoints.clone(),
            self.values.iter().map(|v| v * lambda).collect(),
        )
    }

    /// The potential `x ↦ V(-x)`.
    pub fn reflected(&self) -> Result<Self> {
        Self::new(
            self.breakpoints.iter().rev().map(|x| -x).collect(),
            self.values.iter().rev().copied().collect(),
        )
    }
}

/// Window integrals `F(x) = ∫ₓ^{x+1} V₋` at the candidate abscissae and
/// their maximum, which is C₁.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowIntegralProfile {
    pub candidates: Vec<f64>,
    pub integrals: Vec<f64>,
    pub supremum: f64,
    pub argmax: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_cells() -> PiecewisePotential {
        PiecewisePotential::new(vec![0.0, 0.4, 1.2, 2.0], vec![-3.0, 0.0, -5.0]).unwrap()
    }

    fn riemann(v: &PiecewisePotential, a: f64, b: f64, h: f64) -> f64 {
        let n = ((b - a) / h).round() as usize;
        let h = (b - a) / n as f64;
        (0..n).map(|i| v.negative_part_at(a + (i as f64 + 0.5) * h) * h).sum()
    }

    #[test]
    fn rejects_bad_potentials() {
        assert!(PiecewisePotential::new(vec![0.0], vec![]).is_err());
        assert!(PiecewisePotential::new(vec![0.0, 1.0], vec![1.0, 2.0]).is_err());
        assert!(PiecewisePotential::new(vec![0.0, 0.0], vec![1.0]).is_err());
        assert!(PiecewisePotential::new(vec![0.0, f64::NAN], vec![1.0]).is_err());
        assert!(PiecewisePotential::new(vec![0.0, 1.0], vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn value_lookup_and_zero_extension() {
        let v = three_cells();
        assert_eq!(v.value_at(-0.1), 0.0);
        assert_eq!(v.value_at(0.0), -3.0);
        assert_eq!(v.value_at(0.39), -3.0);
        assert_eq!(v.value_at(0.4), 0.0);
        assert_eq!(v.value_at(1.5), -5.0);
        assert_eq!(v.value_at(2.0), 0.0);
    }

    #[test]
    fn negative_part_integral_examples() {
        let zero = PiecewisePotential::constant(0.0, 10.0, 0.0).unwrap();
        assert_eq!(zero.negative_part_integral(2.0, 5.0).unwrap(), 0.0);

        let well = PiecewisePotential::constant(0.0, 3.0, -2.0).unwrap();
        assert!((well.negative_part_integral(0.5, 1.5).unwrap() - 2.0).abs() < 1e-15);

        let v = three_cells();
        let exact = v.negative_part_integral(1.0, 2.0).unwrap();
        assert!((exact - 4.0).abs() < 1e-12);
        assert!((exact - riemann(&v, 1.0, 2.0, 1e-6)).abs() < 1e-9);
    }

    #[test]
    fn negative_part_integral_rejects_bad_intervals() {
        let v = three_cells();
        assert!(matches!(
            v.negative_part_integral(2.0, 1.0),
            Err(Error::InvalidInterval { .. })
        ));
        assert!(v.negative_part_integral(f64::NEG_INFINITY, 1.0).is_err());
        assert!(v.negative_part_integral(0.0, f64::NAN).is_err());
    }

    #[test]
    fn c1_examples() {
        let zero = PiecewisePotential::constant(0.0, 10.0, 0.0).unwrap();
        assert_eq!(zero.c1_sup().supremum, 0.0);

        // brute force F on a 1e-4 grid
        let brute = |v: &PiecewisePotential| {
            let (lo, hi) = v.domain();
            let n = ((hi - lo + 1.0) / 1e-4).round() as usize;
            (0..=n)
                .map(|i| {
                    let x = lo - 1.0 + i as f64 * 1e-4;
                    v.negative_part_integral(x, x + 1.0).unwrap()
                })
                .fold(0.0, f64::max)
        };

        let well = PiecewisePotential::constant(0.0, 3.0, -2.0).unwrap();
        let p = well.c1_sup();
        assert!((p.supremum - 2.0).abs() < 1e-12);
        assert!((p.supremum - brute(&well)).abs() < 1e-9);
        assert_eq!(p.argmax, 0.0);

        let v = three_cells();
        let p = v.c1_sup();
        assert!((p.supremum - 4.0).abs() < 1e-12);
        assert!((p.supremum - brute(&v)).abs() < 1e-9);
        assert!((p.argmax - 1.0).abs() < 1e-12);
        assert_eq!(p.candidates.len(), p.integrals.len());
    }

    #[test]
    fn segments_cover_and_respect_breakpoints() {
        let v = three_cells();
        let segs = v.segments(-0.5, 1.5);
        assert_eq!(segs.first().unwrap().lo, -0.5);
        assert_eq!(segs.last().unwrap().hi, 1.5);
        let bounds: Vec<f64> = segs.iter().map(|s| s.lo).collect();
        assert_eq!(bounds, vec![-0.5, 0.0, 0.4, 1.2]);
        assert_eq!(segs[0].value, 0.0);
        assert_eq!(segs[1].value, -3.0);
        assert_eq!(segs[3].value, -5.0);
    }

    #[test]
    fn reflection_mirrors_values() {
        let v = three_cells();
        let r = v.reflected().unwrap();
        for x in [0.1, 0.5, 1.3, 1.9] {
            assert_eq!(v.value_at(x), r.value_at(-x));
        }
        assert!((v.c1_sup().supremum - r.c1_sup().supremum).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip_validates() {
        let v = three_cells();
        let s = serde_json::to_string(&v).unwrap();
        let back: PiecewisePotential = serde_json::from_str(&s).unwrap();
        assert_eq!(v, back);
        let bad = r#"{"breakpoints":[1.0,0.0],"values":[1.0]}"#;
        assert!(serde_json::from_str::<PiecewisePotential>(bad).is_err());
    }
}
