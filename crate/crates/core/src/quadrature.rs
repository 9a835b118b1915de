//! Trapezoid quadrature on nonuniform grids.

/// Running trapezoid integral; `out[0] = 0`.
pub fn cumulative_trapezoid(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    debug_assert_eq!(xs.len(), ys.len());
    let mut out = Vec::with_capacity(xs.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..xs.len() {
        acc += 0.5 * (xs[i] - xs[i - 1]) * (ys[i] + ys[i - 1]);
        out.push(acc);
    }
    out
}

pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[1] + y[0]))
        .sum()
}

/// Trapezoid integrals of a nonnegative sample over index ranges.
///
/// Differences of the running sum are used unless they would cancel badly
/// (the prefix dwarfs the window), in which case the window is summed
/// directly.
pub struct WindowIntegrals<'a> {
    xs: &'a [f64],
    ys: Vec<f64>,
    prefix: Vec<f64>,
}

const CANCELLATION_RATIO: f64 = 1e4;

impl<'a> WindowIntegrals<'a> {
    pub fn new(xs: &'a [f64], ys: Vec<f64>) -> Self {
        let prefix = cumulative_trapezoid(xs, &ys);
        Self { xs, ys, prefix }
    }

    /// ∫ over `[xs[lo], xs[hi]]`.
    pub fn between(&self, lo: usize, hi: usize) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        let diff = self.prefix[hi] - self.prefix[lo];
        if self.prefix[lo] <= CANCELLATION_RATIO * diff {
            diff
        } else {
            trapezoid(&self.xs[lo..=hi], &self.ys[lo..=hi])
        }
    }
}
