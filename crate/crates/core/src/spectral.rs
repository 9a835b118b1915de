//! Transfer-matrix growth diagnostics and Prüfer variables.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::Energy;
use crate::error::{Error, Result};
use crate::potential::PiecewisePotential;
use crate::quadrature::{cumulative_trapezoid, trapezoid};
use crate::solver::{operator_norm, transfer_matrices_along, Mat2, SolutionTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    Operator,
    Frobenius,
}

impl NormKind {
    pub fn eval(self, m: &Mat2) -> f64 {
        match self {
            NormKind::Operator => operator_norm(m),
            NormKind::Frobenius => m.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
        }
    }
}

/// Running integral of `1/‖T(E, x, 0)‖²` on `[0, X]`.
///
/// Divergence cannot be decided from a finite curve; `tail_slope` is the
/// least-squares slope of `log cumulative` against `log x` on `[X/2, X]`,
/// near 1 for linear growth and near 0 when saturating.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimonStolzCurve {
    pub xs: Vec<f64>,
    pub norm_t: Vec<f64>,
    pub integrand: Vec<f64>,
    pub cumulative: Vec<f64>,
    pub norm_kind: NormKind,
    pub tail_slope: Option<f64>,
}

impl SimonStolzCurve {
    pub fn total(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }
}

pub fn simon_stolz_curve(v: &PiecewisePotential, e: Energy, x_max: f64, step: f64) -> Result<SimonStolzCurve> {
    simon_stolz_curve_with_norm(v, e, x_max, step, NormKind::Operator)
}

pub fn simon_stolz_curve_with_norm(
    v: &PiecewisePotential,
    e: Energy,
    x_max: f64,
    step: f64,
    norm_kind: NormKind,
) -> Result<SimonStolzCurve> {
    if !e.is_real() {
        return Err(Error::ComplexEnergy { re: e.re, im: e.im });
    }
    if !(x_max >= 0.0) || !x_max.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "X must be finite and >= 0, got {x_max}"
        )));
    }
    if x_max == 0.0 {
        return Ok(SimonStolzCurve {
            xs: vec![0.0],
            norm_t: vec![1.0],
            integrand: vec![1.0],
            cumulative: vec![0.0],
            norm_kind,
            tail_slope: None,
        });
    }
    let (xs, mats) = transfer_matrices_along(v, e, 0.0, x_max, step)?;
    let norm_t: Vec<f64> = mats.iter().map(|m| norm_kind.eval(m)).collect();
    let integrand: Vec<f64> = norm_t.iter().map(|n| 1.0 / (n * n)).collect();
    let cumulative = cumulative_trapezoid(&xs, &integrand);
    let tail_slope = log_log_slope(&xs, &cumulative, 0.5 * x_max);
    Ok(SimonStolzCurve {
        xs,
        norm_t,
        integrand,
        cumulative,
        norm_kind,
        tail_slope,
    })
}

fn log_log_slope(xs: &[f64], ys: &[f64], from: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(&x, &y)| x >= from && x > 0.0 && y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `u = R sin θ`, `u' = k R cos θ` with θ unwrapped along the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruferTrace {
    pub xs: Vec<f64>,
    pub r: Vec<f64>,
    pub theta: Vec<f64>,
    pub k: f64,
}

impl PruferTrace {
    /// `(u, u')` rebuilt from `(R, θ, k)`.
    pub fn reconstruct(&self) -> (Vec<f64>, Vec<f64>) {
        self.r
            .iter()
            .zip(&self.theta)
            .map(|(r, t)| (r * t.sin(), self.k * r * t.cos()))
            .unzip()
    }
}

fn wrap(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

pub fn prufer_decompose(trace: &SolutionTrace, k: f64) -> Result<PruferTrace> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::InvalidArgument(format!("k must be finite and > 0, got {k}")));
    }
    let e = trace.energy();
    if e.im.abs() > 1e-12 || (e.re - k * k).abs() > 1e-12 * (k * k).max(1.0) {
        return Err(Error::NotRealSolution(format!(
            "energy {} + {}i does not equal k² = {}",
            e.re,
            e.im,
            k * k
        )));
    }
    let scale = trace.u().iter().chain(trace.du()).map(|z| z.norm()).fold(1.0, f64::max);
    if trace.max_imag() > 1e-10 * scale {
        return Err(Error::NotRealSolution(format!(
            "imaginary part {} exceeds tolerance",
            trace.max_imag()
        )));
    }
    let xs = trace.xs();
    let u: Vec<f64> = trace.u().iter().map(|z| z.re).collect();
    let du: Vec<f64> = trace.du().iter().map(|z| z.re).collect();
    let mut r = Vec::with_capacity(xs.len());
    for i in 0..xs.len() {
        let ri = (du[i] * du[i] + k * k * u[i] * u[i]).sqrt() / k;
        if !(ri > 0.0) {
            return Err(Error::NotRealSolution(format!(
                "u and u' vanish together at x = {}",
                xs[i]
            )));
        }
        r.push(ri);
    }
    let raw: Vec<f64> = (0..xs.len()).map(|i| (k * u[i]).atan2(du[i])).collect();
    let mut theta = Vec::with_capacity(xs.len());
    theta.push(raw[0]);
    for i in 0..xs.len() - 1 {
        // predicted increment from θ' = k(u'² - u u'') / (k² R²), with u'' by forward difference
        let h = xs[i + 1] - xs[i];
        let predicted = k * (h * du[i] * du[i] - u[i] * (du[i + 1] - du[i])) / (k * k * r[i] * r[i]);
        if !(predicted.abs() < PI) {
            return Err(Error::GridTooCoarse {
                x: xs[i],
                increment: predicted,
            });
        }
        let principal = wrap(raw[i + 1] - raw[i]);
        let turns = ((predicted - principal) / (2.0 * PI)).round();
        let inc = principal + 2.0 * PI * turns;
        if !(inc.abs() < PI) {
            return Err(Error::GridTooCoarse {
                x: xs[i],
                increment: inc,
            });
        }
        theta.push(theta[i] + inc);
    }
    Ok(PruferTrace {
        xs: xs.to_vec(),
        r,
        theta,
        k,
    })
}

/// Worst relative residuals of the Prüfer relations on a trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PruferResiduals {
    /// `max |k²R² - (u'² + k²u²)| / (u'² + k²u²)` together with the
    /// reconstruction errors of `u` and `u'`, relative to `R` and `kR`.
    pub pointwise: f64,
    pub pointwise_x: f64,
    /// `|k²∫R² - (∫u'² + k²∫u²)|` relative to the right side, over the whole trace.
    pub window: f64,
    pub points: usize,
}

pub fn prufer_residuals(trace: &SolutionTrace, k: f64) -> Result<PruferResiduals> {
    let p = prufer_decompose(trace, k)?;
    let (ru, rdu) = p.reconstruct();
    let u: Vec<f64> = trace.u().iter().map(|z| z.re).collect();
    let du: Vec<f64> = trace.du().iter().map(|z| z.re).collect();
    let k2 = k * k;
    let (mut worst, mut worst_x) = (0.0f64, p.xs[0]);
    for i in 0..p.xs.len() {
        let rhs = du[i] * du[i] + k2 * u[i] * u[i];
        let e = ((k2 * p.r[i] * p.r[i] - rhs).abs() / rhs)
            .max((ru[i] - u[i]).abs() / p.r[i])
            .max((rdu[i] - du[i]).abs() / (k * p.r[i]));
        if e > worst {
            worst = e;
            worst_x = p.xs[i];
        }
    }
    let sq = |v: &[f64]| v.iter().map(|x| x * x).collect::<Vec<_>>();
    let lhs = k2 * trapezoid(&p.xs, &sq(&p.r));
    let rhs = trapezoid(&p.xs, &sq(&du)) + k2 * trapezoid(&p.xs, &sq(&u));
    Ok(PruferResiduals {
        pointwise: worst,
        pointwise_x: worst_x,
        window: (lhs - rhs).abs() / rhs,
        points: p.xs.len(),
    })
}
