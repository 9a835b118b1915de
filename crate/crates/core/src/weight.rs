//! Positive weights and their admissibility bound
//! `sup { w(x)/w(y) : |x - y| <= r }`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightKind {
    /// `e^{a|x|}`
    Exponential { a: f64 },
    /// `(1 + |x|)^alpha`
    Polynomial { alpha: f64 },
    /// Samples `(xs[i], ws[i])`, interpolated linearly in `log w` and held
    /// constant outside the sampled range.
    CustomSamples { xs: Vec<f64>, ws: Vec<f64> },
}

impl WeightKind {
    pub fn label(&self) -> &'static str {
        match self {
            WeightKind::Exponential { .. } => "exponential",
            WeightKind::Polynomial { .. } => "polynomial",
            WeightKind::CustomSamples { .. } => "custom_samples",
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            WeightKind::Exponential { a } => (a * x.abs()).exp(),
            WeightKind::Polynomial { alpha } => (1.0 + x.abs()).powf(*alpha),
            WeightKind::CustomSamples { xs, ws } => log_interp(xs, ws, x).exp(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            WeightKind::Exponential { a } if !a.is_finite() => {
                Err(Error::InadmissibleWeight(format!("exponent a = {a}")))
            }
            WeightKind::Polynomial { alpha } if !alpha.is_finite() => {
                Err(Error::InadmissibleWeight(format!("exponent alpha = {alpha}")))
            }
            WeightKind::CustomSamples { xs, ws } => {
                if xs.is_empty() || xs.len() != ws.len() {
                    return Err(Error::InadmissibleWeight(format!(
                        "{} abscissae for {} samples",
                        xs.len(),
                        ws.len()
                    )));
                }
                if xs.windows(2).any(|w| !(w[0] < w[1])) || !xs.iter().all(|x| x.is_finite()) {
                    return Err(Error::InadmissibleWeight(
                        "sample abscissae must increase strictly".into(),
                    ));
                }
                if let Some(w) = ws.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
                    return Err(Error::InadmissibleWeight(format!("weight sample {w} is not positive")));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `sup_{|x-y| <= r} w(x)/w(y)`.
    pub fn admissibility_bound(&self, r: f64) -> Result<f64> {
        self.validate()?;
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "radius must be finite and >= 0, got {r}"
            )));
        }
        let bound = match self {
            WeightKind::Exponential { a } => (a.abs() * r).exp(),
            // ((1+|x|)/(1+|y|))^|alpha| is largest at y = 0, |x| = r
            WeightKind::Polynomial { alpha } => (1.0 + r).powf(alpha.abs()),
            WeightKind::CustomSamples { xs, ws } => custom_bound(xs, ws, r).exp(),
        };
        if !bound.is_finite() {
            return Err(Error::InadmissibleWeight(format!(
                "{} weight has unbounded ratio over radius {r}",
                self.label()
            )));
        }
        Ok(bound.max(1.0))
    }
}

fn log_interp(xs: &[f64], ws: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ws[0].ln();
    }
    if x >= xs[n - 1] {
        return ws[n - 1].ln();
    }
    let i = xs.partition_point(|&s| s <= x);
    let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    (1.0 - t) * ws[i - 1].ln() + t * ws[i].ln()
}

/// `log w(x) - log w(y)` is piecewise linear over the band `|x - y| <= r`,
/// so its maximum sits at a vertex: a pair of knots, or a knot paired with
/// the point at distance exactly `r` from it.
fn custom_bound(xs: &[f64], ws: &[f64], r: f64) -> f64 {
    let lw = |x: f64| log_interp(xs, ws, x);
    let mut best = 0.0f64;
    let mut lo = 0;
    for (i, &xi) in xs.iter().enumerate() {
        let li = ws[i].ln();
        best = best
            .max(li - lw(xi - r))
            .max(li - lw(xi + r))
            .max(lw(xi - r) - li)
            .max(lw(xi + r) - li);
        while xs[lo] < xi - r {
            lo += 1;
        }
        for j in lo..xs.len() {
            if xs[j] > xi + r {
                break;
            }
            best = best.max(li - ws[j].ln());
        }
    }
    best
}

/// A weight together with its admissibility bound at radius `K + δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub kind: WeightKind,
    pub radius: f64,
    pub admissibility_bound: f64,
}

impl WeightSpec {
    pub fn new(kind: WeightKind, radius: f64) -> Result<Self> {
        let admissibility_bound = kind.admissibility_bound(radius)?;
        Ok(Self {
            kind,
            radius,
            admissibility_bound,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.kind.eval(x)
    }
}
