//! Solutions of `-u'' + V u = E u` for piecewise-constant V.
//!
//! The workhorse is the exact per-cell propagator: on a cell where
//! `q = V - E` is constant, `(u, u')` advances by
//!
//! ```text
//! [ cosh(√q h)      sinh(√q h)/√q ]
//! [ √q sinh(√q h)   cosh(√q h)    ]
//! ```
//!
//! which is even in `√q`, so the branch of the root is immaterial. A fixed
//! step RK4 integrator on the same grid serves as an independent check.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize};

use crate::constants::Energy;
use crate::error::{Error, Result};
use crate::potential::PiecewisePotential;

/// Solutions whose modulus exceeds this abort with [`Error::OverflowAtX`].
pub const OVERFLOW_GUARD: f64 = 1e150;

/// Below this value of `|q| h²` the propagator is evaluated by its Taylor series.
pub const SERIES_THRESHOLD: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub type Mat2 = [[Complex64; 2]; 2];

/// Accepts either a real number or a `[re, im]` pair.
pub(crate) fn complex_from_json<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Complex64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Real(f64),
        Pair([f64; 2]),
    }
    Ok(match Repr::deserialize(d)? {
        Repr::Real(re) => Complex64::new(re, 0.0),
        Repr::Pair([re, im]) => Complex64::new(re, im),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub x0: f64,
    #[serde(deserialize_with = "complex_from_json")]
    pub u0: Complex64,
    #[serde(deserialize_with = "complex_from_json")]
    pub du0: Complex64,
}

impl InitialData {
    pub fn new(x0: f64, u0: Complex64, du0: Complex64) -> Self {
        Self { x0, u0, du0 }
    }

    pub fn real(x0: f64, u0: f64, du0: f64) -> Self {
        Self::new(x0, Complex64::new(u0, 0.0), Complex64::new(du0, 0.0))
    }

    fn validate(&self) -> Result<()> {
        let finite = self.x0.is_finite()
            && self.u0.re.is_finite()
            && self.u0.im.is_finite()
            && self.du0.re.is_finite()
            && self.du0.im.is_finite();
        if !finite {
            return Err(Error::InvalidArgument("initial data must be finite".into()));
        }
        if self.u0 == ZERO && self.du0 == ZERO {
            return Err(Error::InvalidArgument(
                "initial data (0, 0) gives the trivial solution".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ExactCell,
    Rk4,
    Analytic,
}

/// Grid samples of `(x, u(x), u'(x))` for one solution.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionTrace {
    xs: Vec<f64>,
    u: Vec<Complex64>,
    du: Vec<Complex64>,
    energy: Energy,
    method: Method,
    max_step: f64,
}

impl SolutionTrace {
    pub fn new(xs: Vec<f64>, u: Vec<Complex64>, du: Vec<Complex64>, energy: Energy, method: Method) -> Result<Self> {
        if xs.len() < 2 || u.len() != xs.len() || du.len() != xs.len() {
            return Err(Error::InvalidArgument(format!(
                "trace needs >= 2 samples of equal length (xs={}, u={}, du={})",
                xs.len(),
                u.len(),
                du.len()
            )));
        }
        if xs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("trace grid must be strictly increasing".into()));
        }
        let finite = |z: &Complex64| z.re.is_finite() && z.im.is_finite();
        if !xs.iter().all(|x| x.is_finite()) || !u.iter().all(finite) || !du.iter().all(finite) {
            return Err(Error::InvalidArgument("trace contains non-finite samples".into()));
        }
        let max_step = xs.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        Ok(Self {
            xs,
            u,
            du,
            energy,
            method,
            max_step,
        })
    }

    /// Samples closed-form `u` and `u'` on `xs`.
    pub fn analytic(
        xs: Vec<f64>,
        energy: Energy,
        u: impl Fn(f64) -> Complex64,
        du: impl Fn(f64) -> Complex64,
    ) -> Result<Self> {
        let uu = xs.iter().map(|&x| u(x)).collect();
        let dd = xs.iter().map(|&x| du(x)).collect();
        Self::new(xs, uu, dd, energy, Method::Analytic)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn u(&self) -> &[Complex64] {
        &self.u
    }

    pub fn du(&self) -> &[Complex64] {
        &self.du
    }

    pub fn energy(&self) -> Energy {
        self.energy
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// Largest grid spacing.
    pub fn max_step(&self) -> f64 {
        self.max_step
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn span(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    pub fn max_abs_u(&self) -> f64 {
        self.u.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest imaginary part of `u` and `u'` in magnitude.
    pub fn max_imag(&self) -> f64 {
        self.u.iter().chain(&self.du).map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// `λ u`.
    pub fn scaled(&self, lambda: Complex64) -> Self {
        Self {
            u: self.u.iter().map(|z| z * lambda).collect(),
            du: self.du.iter().map(|z| z * lambda).collect(),
            ..self.clone()
        }
    }

    /// `x ↦ u(-x)`, which solves the equation with potential `V(-x)`.
    pub fn reflected(&self) -> Self {
        Self {
            xs: self.xs.iter().rev().map(|x| -x).collect(),
            u: self.u.iter().rev().copied().collect(),
            du: self.du.iter().rev().map(|z| -z).collect(),
            ..self.clone()
        }
    }

    /// `u v' - u' v` at every node; both traces must share a grid.
    pub fn wronskian(&self, other: &SolutionTrace) -> Result<Vec<Complex64>> {
        if self.xs != other.xs {
            return Err(Error::InvalidArgument("wronskian needs traces on the same grid".into()));
        }
        Ok((0..self.len())
            .map(|i| self.u[i] * other.du[i] - self.du[i] * other.u[i])
            .collect())
    }
}

/// 2×2 matrix mapping `(u(from), u'(from))` to `(u(to), u'(to))`.
///
/// Its determinant is one in exact arithmetic; numerically the defect grows
/// like `ε‖T‖²`, see [`TransferMatrix::det_defect`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    pub entries: Mat2,
    pub from: f64,
    pub to: f64,
    pub energy: Energy,
}

impl TransferMatrix {
    pub fn identity(at: f64, energy: Energy) -> Self {
        Self {
            entries: [[ONE, ZERO], [ZERO, ONE]],
            from: at,
            to: at,
            energy,
        }
    }

    pub fn det(&self) -> Complex64 {
        let m = &self.entries;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn det_defect(&self) -> f64 {
        (self.det() - ONE).norm()
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        let m = &self.entries;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    /// `self · inner`, i.e. first `inner` then `self`.
    pub fn compose(&self, inner: &TransferMatrix) -> Self {
        Self {
            entries: mat_mul(&self.entries, &inner.entries),
            from: inner.from,
            to: self.to,
            energy: self.energy,
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest singular value, in closed form.
    pub fn operator_norm(&self) -> f64 {
        operator_norm(&self.entries)
    }
}

pub fn operator_norm(m: &Mat2) -> f64 {
    // Rotate by a phase so det is real and nonnegative; then
    // σ₁ ± σ₂ = √(|a ± d̄|² + |b ∓ c̄|²) without cancellation.
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let phase = if det.norm() > 0.0 {
        Complex64::from_polar(1.0, -0.5 * det.arg())
    } else {
        ONE
    };
    let [[a, b], [c, d]] = [[m[0][0] * phase, m[0][1] * phase], [m[1][0] * phase, m[1][1] * phase]];
    let sum = (a + d.conj()).norm().hypot((b - c.conj()).norm());
    let diff = (a - d.conj()).norm().hypot((b + c.conj()).norm());
    0.5 * (sum + diff)
}

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

/// Exact propagator over a signed step `h` for constant `q = V - E`.
pub fn cell_propagator(q: Complex64, h: f64) -> Mat2 {
    if q.norm() * h * h < SERIES_THRESHOLD {
        let h2 = h * h;
        let qh2 = q * h2;
        let ch = ONE + qh2 / 2.0 + qh2 * qh2 / 24.0;
        let sh_over_s = h * (ONE + qh2 / 6.0 + qh2 * qh2 / 120.0);
        let s_sh = q * h * (ONE + qh2 / 6.0);
        return [[ch, sh_over_s], [s_sh, ch]];
    }
    propagator_with_root(q.sqrt(), h)
}

/// Closed-form propagator for a given root `s` with `s² = q`.
pub fn propagator_with_root(s: Complex64, h: f64) -> Mat2 {
    let sh = s * h;
    let (c, sn) = (sh.cosh(), sh.sinh());
    [[c, sn / s], [s * sn, c]]
}

struct Step {
    to: f64,
    h: f64,
    v: f64,
}

/// Steps from `from` to `to`, splitting at every breakpoint and refining so
/// that no step exceeds `max_step`. The forward and backward grids coincide.
fn plan_steps(v: &PiecewisePotential, from: f64, to: f64, max_step: f64) -> Vec<Step> {
    let (lo, hi) = if from < to { (from, to) } else { (to, from) };
    let mut nodes = Vec::new();
    let mut values = Vec::new();
    for seg in v.segments(lo, hi) {
        let n = ((seg.hi - seg.lo) / max_step).ceil().max(1.0) as usize;
        let h = (seg.hi - seg.lo) / n as f64;
        for k in 0..n {
            nodes.push(seg.lo + k as f64 * h);
            values.push(seg.value);
        }
    }
    nodes.push(hi);
    let mut steps: Vec<Step> = (0..values.len())
        .map(|i| Step {
            to: nodes[i + 1],
            h: nodes[i + 1] - nodes[i],
            v: values[i],
        })
        .collect();
    if from > to {
        steps = (0..values.len())
            .rev()
            .map(|i| Step {
                to: nodes[i],
                h: nodes[i] - nodes[i + 1],
                v: values[i],
            })
            .collect();
    }
    steps
}

fn check_step(max_step: f64) -> Result<()> {
    if !(max_step > 0.0) || !max_step.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "step must be finite and > 0, got {max_step}"
        )));
    }
    Ok(())
}

fn guard(x: f64, u: Complex64, du: Complex64) -> Result<()> {
    let ok = |z: Complex64| z.re.is_finite() && z.im.is_finite() && z.norm() <= OVERFLOW_GUARD;
    if ok(u) && ok(du) {
        Ok(())
    } else {
        Err(Error::OverflowAtX { x })
    }
}

fn propagate_with(
    v: &PiecewisePotential,
    e: Energy,
    init: InitialData,
    x_end: f64,
    max_step: f64,
    method: Method,
    mut advance: impl FnMut(Complex64, f64, [Complex64; 2]) -> [Complex64; 2],
) -> Result<SolutionTrace> {
    init.validate()?;
    check_step(max_step)?;
    if !x_end.is_finite() || x_end == init.x0 {
        return Err(Error::InvalidArgument(format!(
            "x_end must be finite and differ from x0 = {}, got {x_end}",
            init.x0
        )));
    }
    let ec = e.as_complex();
    let steps = plan_steps(v, init.x0, x_end, max_step);
    let mut xs = Vec::with_capacity(steps.len() + 1);
    let mut u = Vec::with_capacity(steps.len() + 1);
    let mut du = Vec::with_capacity(steps.len() + 1);
    let mut state = [init.u0, init.du0];
    xs.push(init.x0);
    u.push(state[0]);
    du.push(state[1]);
    for s in &steps {
        state = advance(Complex64::new(s.v, 0.0) - ec, s.h, state);
        guard(s.to, state[0], state[1])?;
        xs.push(s.to);
        u.push(state[0]);
        du.push(state[1]);
    }
    if x_end < init.x0 {
        xs.reverse();
        u.reverse();
        du.reverse();
    }
    SolutionTrace::new(xs, u, du, e, method)
}

/// Exact per-cell propagation from `init.x0` to `x_end` (either direction).
pub fn propagate_exact(
    v: &PiecewisePotential,
    e: Energy,
    init: InitialData,
    x_end: f64,
    max_step: f64,
) -> Result<SolutionTrace> {
    propagate_with(v, e, init, x_end, max_step, Method::ExactCell, |q, h, s| {
        let m = cell_propagator(q, h);
        [m[0][0] * s[0] + m[0][1] * s[1], m[1][0] * s[0] + m[1][1] * s[1]]
    })
}

/// Classical fixed-step RK4 for `(u, u')' = (u', (V - E) u)` on the same
/// grid as [`propagate_exact`].
pub fn propagate_rk(
    v: &PiecewisePotential,
    e: Energy,
    init: InitialData,
    x_end: f64,
    step: f64,
) -> Result<SolutionTrace> {
    propagate_with(v, e, init, x_end, step, Method::Rk4, |q, h, [y0, y1]| {
        let f = |a: Complex64, b: Complex64| (b, q * a);
        let (k1a, k1b) = f(y0, y1);
        let (k2a, k2b) = f(y0 + k1a * (h / 2.0), y1 + k1b * (h / 2.0));
        let (k3a, k3b) = f(y0 + k2a * (h / 2.0), y1 + k2b * (h / 2.0));
        let (k4a, k4b) = f(y0 + k3a * h, y1 + k3b * h);
        [
            y0 + (k1a + k2a * 2.0 + k3a * 2.0 + k4a) * (h / 6.0),
            y1 + (k1b + k2b * 2.0 + k3b * 2.0 + k4b) * (h / 6.0),
        ]
    })
}

/// Exact trace covering `[a, b]` from initial data anywhere in it.
pub fn solve_span(
    v: &PiecewisePotential,
    e: Energy,
    init: InitialData,
    (a, b): (f64, f64),
    max_step: f64,
) -> Result<SolutionTrace> {
    if !(a < b) || !(a <= init.x0 && init.x0 <= b) {
        return Err(Error::InvalidArgument(format!(
            "span [{a}, {b}] must be nonempty and contain x0 = {}",
            init.x0
        )));
    }
    if init.x0 == a {
        return propagate_exact(v, e, init, b, max_step);
    }
    if init.x0 == b {
        return propagate_exact(v, e, init, a, max_step);
    }
    let left = propagate_exact(v, e, init, a, max_step)?;
    let right = propagate_exact(v, e, init, b, max_step)?;
    let mut xs = left.xs;
    let mut u = left.u;
    let mut du = left.du;
    xs.extend_from_slice(&right.xs[1..]);
    u.extend_from_slice(&right.u[1..]);
    du.extend_from_slice(&right.du[1..]);
    SolutionTrace::new(xs, u, du, e, Method::ExactCell)
}

/// `T(E, x, y)`: maps `(u(y), u'(y))` to `(u(x), u'(x))`.
pub fn transfer_matrix(v: &PiecewisePotential, e: Energy, x: f64, y: f64, max_step: f64) -> Result<TransferMatrix> {
    check_step(max_step)?;
    if !x.is_finite() || !y.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite endpoints x={x}, y={y}")));
    }
    if x == y {
        return Ok(TransferMatrix::identity(x, e));
    }
    let ec = e.as_complex();
    let mut m: Mat2 = [[ONE, ZERO], [ZERO, ONE]];
    for s in plan_steps(v, y, x, max_step) {
        m = mat_mul(&cell_propagator(Complex64::new(s.v, 0.0) - ec, s.h), &m);
        if m.iter().flatten().any(|z| !(z.norm() <= OVERFLOW_GUARD)) {
            return Err(Error::OverflowAtX { x: s.to });
        }
    }
    Ok(TransferMatrix {
        entries: m,
        from: y,
        to: x,
        energy: e,
    })
}

/// `T(E, x, x0)` at every node of the grid from `x0` to `x_end`, built from
/// the two basis solutions.
pub fn transfer_matrices_along(
    v: &PiecewisePotential,
    e: Energy,
    x0: f64,
    x_end: f64,
    max_step: f64,
) -> Result<(Vec<f64>, Vec<Mat2>)> {
    let a = propagate_exact(v, e, InitialData::real(x0, 1.0, 0.0), x_end, max_step)?;
    let b = propagate_exact(v, e, InitialData::real(x0, 0.0, 1.0), x_end, max_step)?;
    let mats = (0..a.len()).map(|i| [[a.u[i], b.u[i]], [a.du[i], b.du[i]]]).collect();
    Ok((a.xs, mats))
}
