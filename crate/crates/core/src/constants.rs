//! Explicit constants of the eigenfunction estimates, computed from C₁ and E.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex spectral parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EnergyRepr")]
pub struct Energy {
    pub re: f64,
    pub im: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum EnergyRepr {
    Real(f64),
    Parts {
        re: f64,
        #[serde(default)]
        im: f64,
    },
}

impl TryFrom<EnergyRepr> for Energy {
    type Error = Error;

    fn try_from(r: EnergyRepr) -> Result<Self> {
        match r {
            EnergyRepr::Real(re) => Energy::new(re, 0.0),
            EnergyRepr::Parts { re, im } => Energy::new(re, im),
        }
    }
}

impl Energy {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !re.is_finite() || !im.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite energy {re} + {im}i")));
        }
        Ok(Self { re, im })
    }

    pub fn real(re: f64) -> Self {
        Self { re, im: 0.0 }
    }

    pub fn modulus(&self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn is_real(&self) -> bool {
        self.im == 0.0
    }

    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

impl From<Complex64> for Energy {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

/// `(C₁, E, C₂, C, K, δ)`.
///
/// `c2 = c1 + |E|`, `c_bound = c2 + 2√c2`, `k_radius = 1/√c2` and
/// `delta = -1/2 + √(1/4 + 1/(2 c2))`. When a floor is applied `c2` is
/// raised to it; larger C₂ keeps every estimate valid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateConstants {
    pub c1: f64,
    pub e: Energy,
    pub c2: f64,
    pub c_bound: f64,
    pub k_radius: f64,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2_floor: Option<f64>,
}

pub fn constants_for(c1: f64, e: Energy) -> Result<EstimateConstants> {
    constants_with_floor(c1, e, None)
}

/// Like [`constants_for`], but with `c2_floor = Some(f)` the value
/// `max(c1 + |E|, f)` is used instead of refusing a vanishing C₂.
pub fn constants_with_floor(c1: f64, e: Energy, c2_floor: Option<f64>) -> Result<EstimateConstants> {
    if !(c1 >= 0.0) || !c1.is_finite() {
        return Err(Error::InvalidArgument(format!("C1 must be finite and >= 0, got {c1}")));
    }
    if let Some(f) = c2_floor {
        if !(f > 0.0) || !f.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "c2 floor must be finite and > 0, got {f}"
            )));
        }
    }
    let raw = c1 + e.modulus();
    let c2 = match c2_floor {
        Some(f) => raw.max(f),
        None => raw,
    };
    if !(c2 > 0.0) {
        return Err(Error::DegenerateConstants);
    }
    let root = c2.sqrt();
    Ok(EstimateConstants {
        c1,
        e,
        c2,
        c_bound: c2 + 2.0 * root,
        k_radius: 1.0 / root,
        delta: delta_for(c2),
        c2_floor: c2_floor.filter(|&f| f > raw),
    })
}

/// `-1/2 + √(1/4 + 1/(2 c2))`, rationalized so large `c2` does not cancel.
fn delta_for(c2: f64) -> f64 {
    let t = 0.5 / c2;
    t / (0.5 + (0.25 + t).sqrt())
}

impl EstimateConstants {
    /// Re-checks every defining identity at relative tolerance `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let close = |a: f64, b: f64| (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0);
        let expected_c2 = match self.c2_floor {
            Some(f) => (self.c1 + self.e.modulus()).max(f),
            None => self.c1 + self.e.modulus(),
        };
        let checks = [
            ("c2", close(self.c2, expected_c2)),
            ("C", close(self.c_bound, self.c2 + 2.0 * self.c2.sqrt())),
            ("K", close(self.k_radius, 1.0 / self.c2.sqrt())),
            ("delta", close(self.delta, delta_for(self.c2))),
            (
                "C = C2(1+2K)",
                close(self.c_bound, self.c2 * (1.0 + 2.0 * self.k_radius)),
            ),
            (
                "C2 delta(delta+1) = 1/2",
                close(self.c2 * self.delta * (self.delta + 1.0), 0.5),
            ),
        ];
        match checks.iter().find(|(_, ok)| !ok) {
            Some((name, _)) => Err(Error::InvalidArgument(format!("constants identity {name} violated"))),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spot_values() {
        let k = constants_for(0.0, Energy::real(1.0)).unwrap();
        assert_eq!(k.c2, 1.0);
        assert!((k.c_bound - 3.0).abs() < 1e-15);
        assert!((k.k_radius - 1.0).abs() < 1e-15);
        assert!((k.delta - (3f64.sqrt() - 1.0) / 2.0).abs() < 1e-15);
        assert!((k.delta - 0.3660254).abs() < 1e-7);

        let k = constants_for(2.0, Energy::new(0.0, 2.0).unwrap()).unwrap();
        assert_eq!(k.c2, 4.0);
        assert!((k.c_bound - 8.0).abs() < 1e-15);
        assert!((k.k_radius - 0.5).abs() < 1e-15);
        assert!((k.delta - (-0.5 + 0.375f64.sqrt())).abs() < 1e-15);
        assert!((k.delta - 0.1123724).abs() < 1e-7);
    }

    #[test]
    fn degenerate_is_refused_not_clamped() {
        assert_eq!(constants_for(0.0, Energy::real(0.0)), Err(Error::DegenerateConstants));
        let k = constants_with_floor(0.0, Energy::real(0.0), Some(1.0)).unwrap();
        assert_eq!(k.c2, 1.0);
        assert_eq!(k.c2_floor, Some(1.0));
        k.validate(1e-12).unwrap();
        // floor below the natural value is not recorded
        let k = constants_with_floor(1.0, Energy::real(1.0), Some(0.5)).unwrap();
        assert_eq!(k.c2, 2.0);
        assert_eq!(k.c2_floor, None);
    }

    #[test]
    fn energy_enters_only_through_modulus() {
        let a = constants_for(0.7, Energy::new(3.0, -4.0).unwrap()).unwrap();
        let b = constants_for(0.7, Energy::real(5.0)).unwrap();
        assert_eq!(
            (a.c2, a.c_bound, a.k_radius, a.delta),
            (b.c2, b.c_bound, b.k_radius, b.delta)
        );
    }

    #[test]
    fn energy_json_forms() {
        let e: Energy = serde_json::from_str("2.5").unwrap();
        assert_eq!(e, Energy::real(2.5));
        let e: Energy = serde_json::from_str(r#"{"re":2,"im":1}"#).unwrap();
        assert_eq!(e, Energy::new(2.0, 1.0).unwrap());
    }

    #[test]
    fn monotone_in_c2() {
        let mut prev: Option<EstimateConstants> = None;
        for i in 0..=120 {
            let c2 = 10f64.powf(-6.0 + 12.0 * i as f64 / 120.0);
            let k = constants_for(c2, Energy::real(0.0)).unwrap();
            if let Some(p) = prev {
                assert!(k.delta < p.delta);
                assert!(k.k_radius < p.k_radius);
                assert!(k.c_bound > p.c_bound);
            }
            prev = Some(k);
        }
    }
}
