//! Numerical checks of the eigenfunction estimates on solution traces.
//!
//! Every check reports the worst ratio `LHS / RHS` of an inequality written
//! as `LHS <= RHS`; it passes when `worst_ratio <= 1 + tolerance`.
//!
//! Grid effects are handled in the fail-safe direction:
//! - window maxima of `|u|` are grid maxima inflated by
//!   `max_step · max|u'|` over the same window, an upper bound for the true
//!   maximum when `|u'|` is resolved by the grid;
//! - L^p window integrals are trapezoid sums over the window snapped outward
//!   to grid nodes; weighted left-hand sides are snapped inward.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constants::EstimateConstants;
use crate::error::{Error, Result};
use crate::quadrature::{trapezoid, WindowIntegrals};
use crate::solver::SolutionTrace;
use crate::weight::WeightSpec;
use crate::window::{first_at_or_after, last_at_or_before, last_before, SlidingMax};

pub const DEFAULT_TOLERANCE: f64 = 1e-6;

/// `|u(x)|` below this fraction of the trace maximum counts as a zero.
pub const ZERO_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub points_checked: usize,
    pub worst_ratio: f64,
    pub witness_x: f64,
    pub pass: bool,
    pub tolerance: f64,
    pub margin_notes: String,
}

impl CheckOutcome {
    pub fn new(
        name: impl Into<String>,
        points_checked: usize,
        worst_ratio: f64,
        witness_x: f64,
        tolerance: f64,
        margin_notes: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            points_checked,
            worst_ratio,
            witness_x,
            pass: worst_ratio <= 1.0 + tolerance,
            tolerance,
            margin_notes: margin_notes.into(),
        }
    }
}

/// Sorts outcomes by name, then witness abscissa.
pub fn sort_outcomes(outcomes: &mut [CheckOutcome]) {
    outcomes.sort_by(|a, b| a.name.cmp(&b.name).then(a.witness_x.total_cmp(&b.witness_x)));
}

/// Running maximum over points; ties keep the first witness.
#[derive(Default)]
struct Worst {
    ratio: f64,
    x: f64,
    count: usize,
}

impl Worst {
    fn new() -> Self {
        Self {
            ratio: f64::NEG_INFINITY,
            x: f64::NAN,
            count: 0,
        }
    }

    fn push(&mut self, ratio: f64, x: f64) {
        self.count += 1;
        if ratio > self.ratio || (ratio.is_nan() && !self.ratio.is_nan()) {
            self.ratio = ratio;
            self.x = x;
        }
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!("p must be finite and >= 1, got {p}")));
    }
    Ok(())
}

fn fmt_p(p: f64) -> String {
    if p.fract() == 0.0 {
        format!("{}", p as i64)
    } else {
        format!("{p}")
    }
}

/// Runs checks of one trace against one set of constants.
pub struct Checker<'a> {
    trace: &'a SolutionTrace,
    consts: &'a EstimateConstants,
    tolerance: f64,
    abs_u: Vec<f64>,
    abs_du: Vec<f64>,
    /// max |u| over the trace; every power of |u| is taken after dividing by it
    scale: f64,
}

impl<'a> Checker<'a> {
    pub fn new(trace: &'a SolutionTrace, consts: &'a EstimateConstants) -> Self {
        let abs_u: Vec<f64> = trace.u().iter().map(|z| z.norm()).collect();
        let abs_du: Vec<f64> = trace.du().iter().map(|z| z.norm()).collect();
        let scale = abs_u.iter().copied().fold(0.0, f64::max);
        Self {
            trace,
            consts,
            tolerance: DEFAULT_TOLERANCE,
            abs_u,
            abs_du,
            scale,
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    fn xs(&self) -> &[f64] {
        self.trace.xs()
    }

    /// Indices whose `[x - r, x + r]` lies inside the trace.
    fn interior(&self, r: f64, what: &str) -> Result<(usize, usize)> {
        let xs = self.xs();
        let (a, b) = self.trace.span();
        let lo = first_at_or_after(xs, a + r);
        let hi = last_at_or_before(xs, b - r);
        match hi {
            Some(hi) if lo <= hi => Ok((lo, hi)),
            _ => Err(Error::TraceTooShort(format!(
                "{what}: no grid point has its radius-{r} window inside [{a}, {b}]"
            ))),
        }
    }

    fn normalized_pow(&self, vals: &[f64], p: f64) -> Vec<f64> {
        let s = if self.scale > 0.0 { self.scale } else { 1.0 };
        vals.iter().map(|v| (v / s).powf(p)).collect()
    }

    /// `|u'(x)| <= C max_{[x-K, x+K]} |u|`.
    pub fn derivative_bound(&self) -> Result<CheckOutcome> {
        let xs = self.xs();
        let k = self.consts.k_radius;
        let c = self.consts.c_bound;
        let h = self.trace.max_step();
        let (lo, hi) = self.interior(k, "derivative_bound")?;
        let mut max_u = SlidingMax::new(&self.abs_u);
        let mut max_du = SlidingMax::new(&self.abs_du);
        let mut worst = Worst::new();
        for i in lo..=hi {
            let wl = first_at_or_after(xs, xs[i] - k).min(i);
            let wh = last_at_or_before(xs, xs[i] + k).unwrap_or(i).max(i);
            let m = max_u.query(wl, wh) + h * max_du.query(wl, wh);
            worst.push(ratio(self.abs_du[i], c * m), xs[i]);
        }
        Ok(CheckOutcome::new(
            "derivative_bound",
            worst.count,
            worst.ratio,
            worst.x,
            self.tolerance,
            format!("C={c}, K={k}; window max inflated by max_step*max|u'| (max_step={h})"),
        ))
    }

    /// For `u(x) != 0` with `Re[conj(u(x)) u'(x)] >= 0`: `|u(y)| > |u(x)|/2`
    /// on `[x, x + δ)`. The ratio reported is `(1/2) / min |u(y)|/|u(x)|`.
    pub fn persistence(&self) -> Result<CheckOutcome> {
        let xs = self.xs();
        let d = self.consts.delta;
        let (_, b) = self.trace.span();
        let threshold = ZERO_THRESHOLD * self.scale;
        let (mut near_zero, mut decreasing, mut truncated) = (0usize, 0usize, 0usize);
        let neg: Vec<f64> = self.abs_u.iter().map(|v| -v).collect();
        let mut min_u = SlidingMax::new(&neg);
        let mut worst = Worst::new();
        for i in 0..xs.len() {
            if !(self.abs_u[i] > threshold) {
                near_zero += 1;
                continue;
            }
            if (self.trace.u()[i].conj() * self.trace.du()[i]).re < 0.0 {
                decreasing += 1;
                continue;
            }
            if xs[i] + d > b {
                truncated += 1;
                continue;
            }
            let wh = last_before(xs, xs[i] + d).unwrap_or(i).max(i);
            let min_ratio = -min_u.query(i, wh) / self.abs_u[i];
            worst.push(ratio(0.5, min_ratio), xs[i]);
        }
        if worst.count == 0 {
            return Err(Error::NoEligiblePoints(format!(
                "persistence: {near_zero} near-zero, {decreasing} with decreasing modulus, {truncated} too close to the end"
            )));
        }
        Ok(CheckOutcome::new(
            "persistence",
            worst.count,
            worst.ratio,
            worst.x,
            self.tolerance,
            format!(
                "delta={d}; skipped {near_zero} points with |u| <= {ZERO_THRESHOLD}*max|u|, \
                 {decreasing} with Re[conj(u)u'] < 0, {truncated} without a full window"
            ),
        ))
    }

    fn windowed_lp(&self, name: String, numerator: &[f64], radius: f64, factor: f64, p: f64) -> Result<CheckOutcome> {
        let xs = self.xs();
        let (lo, hi) = self.interior(radius, &name)?;
        let ints = WindowIntegrals::new(xs, self.normalized_pow(&self.abs_u, p));
        let num = self.normalized_pow(numerator, p);
        let mut worst = Worst::new();
        for i in lo..=hi {
            let wl = last_at_or_before(xs, xs[i] - radius).unwrap_or(0);
            let wh = first_at_or_after(xs, xs[i] + radius).min(xs.len() - 1);
            worst.push(ratio(num[i], factor * ints.between(wl, wh)), xs[i]);
        }
        Ok(CheckOutcome::new(
            name,
            worst.count,
            worst.ratio,
            worst.x,
            self.tolerance,
            format!("window radius {radius}, factor {factor}; trapezoid over window snapped outward"),
        ))
    }

    /// `|u(x)|^p <= (2^p/δ) ∫_{x-δ}^{x+δ} |u|^p`.
    pub fn local_lp(&self, p: f64) -> Result<CheckOutcome> {
        check_p(p)?;
        let d = self.consts.delta;
        self.windowed_lp(format!("local_lp[p={}]", fmt_p(p)), &self.abs_u, d, 2f64.powf(p) / d, p)
    }

    /// `|u'(x)|^p <= (2^p C^p/δ) ∫_{x-K-δ}^{x+K+δ} |u|^p`.
    pub fn derivative_lp(&self, p: f64) -> Result<CheckOutcome> {
        check_p(p)?;
        let d = self.consts.delta;
        let r = self.consts.k_radius + d;
        self.windowed_lp(
            format!("derivative_lp[p={}]", fmt_p(p)),
            &self.abs_du,
            r,
            (2.0 * self.consts.c_bound).powf(p) / d,
            p,
        )
    }

    /// Integrated weighted form on `[a, b]`:
    /// `∫ₐᵇ |u'|^p w <= (2^p C^p/δ) · A · 2(K+δ) · ∫_{a-K-δ}^{b+K+δ} |u|^p w`
    /// with `A` the admissibility bound of `w` at radius `K + δ`.
    pub fn weighted(&self, p: f64, weight: &WeightSpec, (a, b): (f64, f64)) -> Result<CheckOutcome> {
        check_p(p)?;
        let xs = self.xs();
        let d = self.consts.delta;
        let r = self.consts.k_radius + d;
        if !(a < b) {
            return Err(Error::InvalidInterval { a, b });
        }
        if (weight.radius - r).abs() > 1e-12 * r.max(1.0) {
            return Err(Error::InadmissibleWeight(format!(
                "admissibility computed at radius {}, need K + delta = {r}",
                weight.radius
            )));
        }
        let (s0, s1) = self.trace.span();
        if a - r < s0 || b + r > s1 {
            return Err(Error::TraceTooShort(format!(
                "weighted: [{}, {}] not inside trace [{s0}, {s1}]",
                a - r,
                b + r
            )));
        }
        let w: Vec<f64> = xs.iter().map(|&x| weight.eval(x)).collect();
        let du_p = self.normalized_pow(&self.abs_du, p);
        let u_p = self.normalized_pow(&self.abs_u, p);
        let li = first_at_or_after(xs, a);
        let hi = last_at_or_before(xs, b).unwrap_or(0);
        let lhs_vals: Vec<f64> = (li..=hi).map(|i| du_p[i] * w[i]).collect();
        let lhs = if hi > li {
            trapezoid(&xs[li..=hi], &lhs_vals)
        } else {
            0.0
        };
        let lo_out = last_at_or_before(xs, a - r).unwrap_or(0);
        let hi_out = first_at_or_after(xs, b + r).min(xs.len() - 1);
        let rhs_vals: Vec<f64> = (lo_out..=hi_out).map(|i| u_p[i] * w[i]).collect();
        let factor = (2.0 * self.consts.c_bound).powf(p) / d * weight.admissibility_bound * 2.0 * r;
        let rhs = factor * trapezoid(&xs[lo_out..=hi_out], &rhs_vals);
        Ok(CheckOutcome::new(
            format!("weighted[p={},{}]", fmt_p(p), weight.kind.label()),
            hi.saturating_sub(li) + 1,
            ratio(lhs, rhs),
            a,
            self.tolerance,
            format!(
                "window [{a}, {b}], admissibility bound {} at radius {r}",
                weight.admissibility_bound
            ),
        ))
    }

    /// Lower Taylor inequality at one `(ω, x, y)`; `x` and `y` snap to the nearest
    /// grid nodes. Reported ratio is
    /// `(Re[ω̄u(x)] + (y-x)Re[ω̄u'(x)] - Re[ω̄u(y)]) / (C₂(y-x)(y-x+1)|ω| M)`.
    pub fn taylor_lower(&self, omega: Complex64, x: f64, y: f64) -> Result<CheckOutcome> {
        let xs = self.xs();
        let (s0, s1) = self.trace.span();
        if !(x <= y) || x < s0 || y > s1 {
            return Err(Error::InvalidArgument(format!(
                "need x <= y inside [{s0}, {s1}], got x={x}, y={y}"
            )));
        }
        let ix = nearest(xs, x);
        let iy = nearest(xs, y).max(ix);
        if !(self.abs_u[ix] > 0.0) {
            return Err(Error::PreconditionFailed(format!("u(x) = 0 at x = {}", xs[ix])));
        }
        let floor = -1e-10 * omega.norm() * self.scale;
        if let Some(t) = (ix..=iy).find(|&t| (omega.conj() * self.trace.u()[t]).re < floor) {
            return Err(Error::PreconditionFailed(format!(
                "Re[conj(omega) u(t)] < 0 at t = {}",
                xs[t]
            )));
        }
        let (r, notes) = self.taylor_ratio(omega, ix, iy);
        Ok(CheckOutcome::new("taylor_lower", 1, r, xs[ix], self.tolerance, notes))
    }

    fn taylor_ratio(&self, omega: Complex64, ix: usize, iy: usize) -> (f64, String) {
        if iy == ix {
            return (0.0, "degenerate interval".into());
        }
        let xs = self.xs();
        let u = self.trace.u();
        let du = self.trace.du();
        let oc = omega.conj();
        let len = xs[iy] - xs[ix];
        let m_grid = self.abs_u[ix..=iy].iter().copied().fold(0.0, f64::max);
        let d_grid = self.abs_du[ix..=iy].iter().copied().fold(0.0, f64::max);
        let m = m_grid + self.trace.max_step() * d_grid;
        let gap = (oc * u[ix]).re + len * (oc * du[ix]).re - (oc * u[iy]).re;
        let allowance = self.consts.c2 * len * (len + 1.0) * omega.norm() * m;
        (ratio(gap, allowance), format!("y-x={len}, slack-inflated max {m}"))
    }

    /// `n` random instances of the lower Taylor inequality. `x` is drawn among nodes with
    /// `|u(x)| > 10⁻³ max|u|`, `ω = s·e^{iφ} u(x)/|u(x)|` with `|φ| < π/2`,
    /// and `y` up to one unit beyond `x`, cut back to the last node before
    /// the sign condition `Re[ω̄u(t)] >= 0` fails.
    pub fn taylor_lower_samples(&self, n: usize, seed: u64) -> Result<CheckOutcome> {
        let xs = self.xs();
        let u = self.trace.u();
        let threshold = ZERO_THRESHOLD * self.scale;
        let candidates: Vec<usize> = (0..xs.len() - 1).filter(|&i| self.abs_u[i] > threshold).collect();
        if candidates.is_empty() || n == 0 {
            return Err(Error::NoEligiblePoints("taylor_lower: no node with u(x) != 0".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, s1) = self.trace.span();
        let (mut cut, mut degenerate) = (0usize, 0usize);
        let mut worst = Worst::new();
        for _ in 0..n {
            let ix = candidates[rng.gen_range(0..candidates.len())];
            let phi = rng.gen_range(-FRAC_PI_2..FRAC_PI_2) * 0.999;
            let mag = rng.gen_range(0.5..2.0);
            let omega = u[ix] / self.abs_u[ix] * Complex64::from_polar(mag, phi);
            let target = (xs[ix] + rng.gen_range(0.0..1.0f64)).min(s1);
            let mut iy = last_at_or_before(xs, target).unwrap_or(ix).max(ix);
            if let Some(t) = (ix..=iy).find(|&t| (omega.conj() * u[t]).re < 0.0) {
                iy = t.saturating_sub(1).max(ix);
                cut += 1;
            }
            if iy == ix {
                degenerate += 1;
            }
            let (r, _) = self.taylor_ratio(omega, ix, iy);
            worst.push(r, xs[ix]);
        }
        Ok(CheckOutcome::new(
            "taylor_lower",
            worst.count,
            worst.ratio,
            worst.x,
            self.tolerance,
            format!(
                "{n} samples (seed {seed}); {cut} intervals cut at the sign condition, {degenerate} degenerate; \
                 max inflated by max_step*max|u'|"
            ),
        ))
    }
}

fn nearest(xs: &[f64], x: f64) -> usize {
    let i = first_at_or_after(xs, x);
    if i == 0 {
        0
    } else if i == xs.len() || x - xs[i - 1] <= xs[i] - x {
        i - 1
    } else {
        i
    }
}

/// Trend surrogate for decay at infinity: the maxima of `|u|` and `|u'|` on
/// the last `tail_fraction` of the trace must be at most `factor` times those
/// on the first `tail_fraction`. Ratio is
/// `max(tail|u|/head|u|, tail|u'|/head|u'|) / factor`.
pub fn check_decay(trace: &SolutionTrace, tail_fraction: f64, factor: f64) -> Result<CheckOutcome> {
    if !(tail_fraction > 0.0 && tail_fraction < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "tail_fraction must lie in (0, 1/2), got {tail_fraction}"
        )));
    }
    if !(factor > 0.0) || !factor.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "decay factor must be > 0, got {factor}"
        )));
    }
    let xs = trace.xs();
    let (a, b) = trace.span();
    let len = b - a;
    let head_end = first_at_or_after(xs, a + tail_fraction * len).min(xs.len() - 1);
    let tail_start = last_at_or_before(xs, b - tail_fraction * len).unwrap_or(0);
    let max_of = |vals: &[Complex64], lo: usize, hi: usize| {
        (lo..=hi)
            .map(|i| (vals[i].norm(), xs[i]))
            .fold((0.0f64, xs[lo]), |acc, v| if v.0 > acc.0 { v } else { acc })
    };
    let n = xs.len() - 1;
    let (hu, _) = max_of(trace.u(), 0, head_end);
    let (hd, _) = max_of(trace.du(), 0, head_end);
    let (tu, xu) = max_of(trace.u(), tail_start, n);
    let (td, xd) = max_of(trace.du(), tail_start, n);
    let ru = ratio(tu, hu);
    let rd = ratio(td, hd);
    let (worst, witness) = if ru >= rd { (ru, xu) } else { (rd, xd) };
    Ok(CheckOutcome::new(
        "decay",
        head_end + 1 + (n - tail_start + 1),
        worst / factor,
        witness,
        0.0,
        format!("head max |u|={hu}, |u'|={hd}; tail max |u|={tu}, |u'|={td}; factor {factor}"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{constants_for, Energy};
    use crate::weight::WeightKind;
    use std::f64::consts::PI;

    fn grid(a: f64, b: f64, h: f64) -> Vec<f64> {
        let n = ((b - a) / h).round() as usize;
        (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
    }

    fn sine(a: f64, b: f64, h: f64) -> SolutionTrace {
        SolutionTrace::analytic(
            grid(a, b, h),
            Energy::real(1.0),
            |x| Complex64::new(x.sin(), 0.0),
            |x| Complex64::new(x.cos(), 0.0),
        )
        .unwrap()
    }

    fn harmonic(a: f64, b: f64, h: f64) -> SolutionTrace {
        SolutionTrace::analytic(
            grid(a, b, h),
            Energy::real(1.0),
            |x| Complex64::new((-x * x / 2.0).exp(), 0.0),
            |x| Complex64::new(-x * (-x * x / 2.0).exp(), 0.0),
        )
        .unwrap()
    }

    fn unit() -> EstimateConstants {
        constants_for(0.0, Energy::real(1.0)).unwrap()
    }

    #[test]
    fn derivative_bound_free_sine() {
        let t = sine(0.0, 20.0, 1e-3);
        let k = unit();
        let o = Checker::new(&t, &k).derivative_bound().unwrap();
        assert!(o.pass);
        // |cos x| / (3 max_{[x-1,x+1]} |sin|) peaks at 1/(3 sin 1) at multiples of π
        assert!(o.worst_ratio <= 1.0 / (3.0 * 1f64.sin()) + 1e-3, "{}", o.worst_ratio);
        assert!(o.worst_ratio > 0.39);
        assert!(o.worst_ratio <= 0.40);
    }

    #[test]
    fn derivative_bound_harmonic_ground_state() {
        let t = harmonic(-6.0, 6.0, 1e-3);
        let k = unit();
        let o = Checker::new(&t, &k).derivative_bound().unwrap();
        let analytic = (-0.5f64).exp() / 3.0;
        assert!(o.pass);
        assert!((o.worst_ratio - analytic).abs() < 1e-3, "{}", o.worst_ratio);
        assert!((o.witness_x.abs() - 1.0).abs() < 1e-2);
    }

    #[test]
    fn derivative_bound_needs_interior() {
        let t = sine(0.0, 1.5, 1e-2);
        let k = unit();
        assert!(matches!(
            Checker::new(&t, &k).derivative_bound(),
            Err(Error::TraceTooShort(_))
        ));
    }

    #[test]
    fn persistence_on_growing_exponential() {
        let t = SolutionTrace::analytic(
            grid(0.0, 5.0, 1e-3),
            Energy::real(-1.0),
            |x| Complex64::new(x.exp(), 0.0),
            |x| Complex64::new(x.exp(), 0.0),
        )
        .unwrap();
        let k = unit();
        let o = Checker::new(&t, &k).persistence().unwrap();
        assert!(o.pass);
        assert!((o.worst_ratio - 0.5).abs() < 1e-12);
    }

    #[test]
    fn persistence_on_sine() {
        let t = sine(0.0, 20.0, 1e-3);
        let k = unit();
        let o = Checker::new(&t, &k).persistence().unwrap();
        assert!(o.pass, "{o:?}");
        // at x = π/2 - 0.1 the window [x, x+δ) stays above sin(π/2-0.1+δ)
        let x: f64 = PI / 2.0 - 0.1;
        let direct = ((x + k.delta).sin() / x.sin()).min(1.0);
        assert!(direct > 0.5);
        assert!(o.margin_notes.contains("skipped"));
    }

    #[test]
    fn persistence_without_eligible_points() {
        // decreasing modulus everywhere
        let t = SolutionTrace::analytic(
            grid(0.0, 5.0, 1e-2),
            Energy::real(-1.0),
            |x| Complex64::new((-x).exp(), 0.0),
            |x| Complex64::new(-(-x).exp(), 0.0),
        )
        .unwrap();
        let k = unit();
        assert!(matches!(
            Checker::new(&t, &k).persistence(),
            Err(Error::NoEligiblePoints(_))
        ));
    }

    #[test]
    fn local_lp_constant_function() {
        let t = SolutionTrace::analytic(
            grid(0.0, 4.0, 1e-3),
            Energy::real(0.0),
            |_| Complex64::new(2.5, 0.0),
            |_| Complex64::new(0.0, 0.0),
        )
        .unwrap();
        let k = unit();
        for p in [1.0, 2.0, 3.5] {
            let o = Checker::new(&t, &k).local_lp(p).unwrap();
            // window snapped outward can only enlarge the integral
            let expected = 2f64.powf(-p - 1.0);
            assert!(o.worst_ratio <= expected * (1.0 + 1e-12));
            assert!(o.worst_ratio >= expected * (1.0 - 1e-2));
        }
    }

    #[test]
    fn local_lp_sine_matches_closed_form() {
        let t = sine(0.0, 20.0, 1e-3);
        let k = unit();
        let d = k.delta;
        let o2 = Checker::new(&t, &k).local_lp(2.0).unwrap();
        let o1 = Checker::new(&t, &k).local_lp(1.0).unwrap();
        assert!(o2.pass && o1.pass);
        assert_ne!(o1.worst_ratio, o2.worst_ratio);
        // ∫_{x-δ}^{x+δ} sin² = δ - cos(2x) sin(2δ)/2
        let closed = |x: f64| x.sin().powi(2) / (4.0 / d * (d - (2.0 * x).cos() * (2.0 * d).sin() / 2.0));
        let sup = (0..200000)
            .map(|i| closed(d + (20.0 - 2.0 * d) * i as f64 / 200000.0))
            .fold(0.0, f64::max);
        // outward snapping widens a window of 2δ by at most two steps
        assert!(o2.worst_ratio <= sup * (1.0 + 1e-9), "{} vs {sup}", o2.worst_ratio);
        assert!(o2.worst_ratio >= sup * (1.0 - 2e-3 / d), "{} vs {sup}", o2.worst_ratio);
    }

    #[test]
    fn derivative_lp_passes_and_composes() {
        for t in [sine(0.0, 20.0, 1e-3), harmonic(-5.0, 5.0, 1e-3)] {
            let k = unit();
            let c = Checker::new(&t, &k);
            for p in [1.0, 2.0] {
                let dlp = c.derivative_lp(p).unwrap();
                assert!(dlp.pass);
                let db = c.derivative_bound().unwrap();
                let llp = c.local_lp(p).unwrap();
                assert!(
                    dlp.worst_ratio <= db.worst_ratio.powf(p) * llp.worst_ratio * 1.01,
                    "{} > {} * {}",
                    dlp.worst_ratio,
                    db.worst_ratio,
                    llp.worst_ratio
                );
            }
        }
    }

    #[test]
    fn weighted_check_reduces_with_unit_weight() {
        let t = harmonic(-6.0, 6.0, 1e-3);
        let k = unit();
        let r = k.k_radius + k.delta;
        let w1 = WeightSpec::new(WeightKind::Polynomial { alpha: 0.0 }, r).unwrap();
        assert_eq!(w1.admissibility_bound, 1.0);
        let c = Checker::new(&t, &k);
        let o = c.weighted(2.0, &w1, (-4.0, 4.0)).unwrap();
        assert!(o.pass);
        let we = WeightSpec::new(WeightKind::Exponential { a: 1.0 }, r).unwrap();
        assert!((we.admissibility_bound - 3.920).abs() < 1e-3);
        assert!(c.weighted(2.0, &we, (-4.0, 4.0)).unwrap().pass);
        let wp = WeightSpec::new(WeightKind::Polynomial { alpha: 2.0 }, r).unwrap();
        assert!(c.weighted(1.0, &wp, (-4.0, 4.0)).unwrap().pass);
        assert!(matches!(
            c.weighted(2.0, &w1, (-5.0, 5.0)),
            Err(Error::TraceTooShort(_))
        ));
        let wrong = WeightSpec::new(WeightKind::Exponential { a: 1.0 }, 0.5).unwrap();
        assert!(matches!(
            c.weighted(2.0, &wrong, (-1.0, 1.0)),
            Err(Error::InadmissibleWeight(_))
        ));
    }

    #[test]
    fn decay_fixtures() {
        let h = harmonic(0.0, 6.0, 1e-3);
        let o = check_decay(&h, 0.2, 1e-2).unwrap();
        assert!(o.pass, "{o:?}");

        let s = sine(0.0, 20.0, 1e-3);
        assert!(!check_decay(&s, 0.2, 1e-2).unwrap().pass);

        let e = SolutionTrace::analytic(
            grid(0.0, 20.0, 1e-3),
            Energy::real(-1.0),
            |x| Complex64::new((-x).exp(), 0.0),
            |x| Complex64::new(-(-x).exp(), 0.0),
        )
        .unwrap();
        let o = check_decay(&e, 0.2, 1.0).unwrap();
        assert!((o.worst_ratio / (-16f64).exp() - 1.0).abs() < 1e-9);
        assert!(check_decay(&e, 0.5, 1.0).is_err());
    }

    #[test]
    fn taylor_lower_free_sine_example() {
        let t = sine(0.0, 2.0, 1e-4);
        let k = unit();
        let c = Checker::new(&t, &k);
        let (x, y) = (PI / 4.0, PI / 3.0);
        let o = c.taylor_lower(Complex64::new(1.0, 0.0), x, y).unwrap();
        assert!(o.pass);
        let len = y - x;
        let lhs = y.sin();
        let rhs = x.sin() + len * x.cos() - len * (len + 1.0) * y.sin();
        assert!((rhs - 0.6061).abs() < 1e-3 && (lhs - 0.8660).abs() < 1e-4);
        let expected = (x.sin() + len * x.cos() - lhs) / (len * (len + 1.0) * y.sin());
        assert!(
            (o.worst_ratio - expected).abs() < 1e-3,
            "{} vs {expected}",
            o.worst_ratio
        );

        let d = c.taylor_lower(Complex64::new(1.0, 0.0), 0.5, 0.5).unwrap();
        assert_eq!(d.worst_ratio, 0.0);

        assert!(matches!(
            c.taylor_lower(Complex64::new(-1.0, 0.0), 0.5, 1.0),
            Err(Error::PreconditionFailed(_))
        ));
    }

    #[test]
    fn taylor_lower_samples_pass_and_are_deterministic() {
        let t = sine(0.0, 20.0, 1e-3);
        let k = unit();
        let c = Checker::new(&t, &k);
        let a = c.taylor_lower_samples(1000, 9).unwrap();
        let b = c.taylor_lower_samples(1000, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.pass, "{a:?}");
        assert_eq!(a.points_checked, 1000);
    }

    #[test]
    fn outcomes_scale_invariant() {
        let t = harmonic(-6.0, 6.0, 2e-3);
        let k = unit();
        let lambda = Complex64::new(-3.0, 7.5);
        let s = t.scaled(lambda);
        let (a, b) = (Checker::new(&t, &k), Checker::new(&s, &k));
        let pairs = [
            (a.derivative_bound().unwrap(), b.derivative_bound().unwrap()),
            (a.persistence().unwrap(), b.persistence().unwrap()),
            (a.local_lp(1.5).unwrap(), b.local_lp(1.5).unwrap()),
            (a.derivative_lp(2.0).unwrap(), b.derivative_lp(2.0).unwrap()),
            (
                a.taylor_lower_samples(200, 4).unwrap(),
                b.taylor_lower_samples(200, 4).unwrap(),
            ),
        ];
        for (x, y) in pairs {
            assert_eq!(x.pass, y.pass);
            assert!(
                (x.worst_ratio - y.worst_ratio).abs() <= 1e-12 * x.worst_ratio.abs().max(1.0),
                "{}",
                x.name
            );
        }
    }
}
