//! Parametrised potential families used for fixtures and randomized sweeps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::PiecewisePotential;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    /// `V = -depth` on `[start, start + width)`.
    SquareWell {
        depth: f64,
        width: f64,
        #[serde(default)]
        start: f64,
    },
    /// Periodic array of inverse-square-root spikes `-g/√|x - m|`, truncated
    /// at `cap` and averaged over cells of width `cell` on `[start, end]`.
    /// Sites sit at the centres of the period cells.
    SpikeLattice {
        g: f64,
        period: f64,
        cap: f64,
        cell: f64,
        start: f64,
        end: f64,
    },
    /// `cells` cells of random width on `[start, start + length]` with values
    /// uniform in `[min, max]`.
    RandomStep {
        cells: usize,
        start: f64,
        length: f64,
        min: f64,
        max: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    /// `V = x²` averaged over cells of width `cell` on `[-half_width, half_width]`.
    Harmonic { half_width: f64, cell: f64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::SquareWell { .. } => "square_well",
            Family::SpikeLattice { .. } => "spike_lattice",
            Family::RandomStep { .. } => "random_step",
            Family::Harmonic { .. } => "harmonic",
        }
    }

    /// True when the family discretizes a potential that is not itself
    /// piecewise constant.
    pub fn is_discretization_surrogate(&self) -> bool {
        matches!(self, Family::SpikeLattice { .. } | Family::Harmonic { .. })
    }
}

/// Builds the potential for `family`. Deterministic in `(family, seed)`; a
/// seed stored in the family parameters takes precedence over `seed`.
pub fn make_family(family: &Family, seed: u64) -> Result<PiecewisePotential> {
    match *family {
        Family::SquareWell { depth, width, start } => {
            if !(width > 0.0) || !width.is_finite() || !depth.is_finite() || !start.is_finite() {
                return Err(Error::InvalidFamily(format!(
                    "square_well needs finite depth and width > 0 (depth={depth}, width={width})"
                )));
            }
            PiecewisePotential::constant(start, start + width, -depth)
        }
        Family::SpikeLattice {
            g,
            period,
            cap,
            cell,
            start,
            end,
        } => spike_lattice(g, period, cap, cell, start, end),
        Family::RandomStep {
            cells,
            start,
            length,
            min,
            max,
            seed: own_seed,
        } => random_step(cells, start, length, min, max, own_seed.unwrap_or(seed)),
        Family::Harmonic { half_width, cell } => harmonic(half_width, cell),
    }
}

fn uniform_cells(start: f64, end: f64, cell: f64) -> Vec<f64> {
    let n = ((end - start) / cell).ceil().max(1.0) as usize;
    let mut bps: Vec<f64> = (0..n).map(|i| start + i as f64 * cell).collect();
    // drop a sliver cell produced by rounding
    if let Some(&last) = bps.last() {
        if end - last < 1e-9 * cell && bps.len() > 1 {
            bps.pop();
        }
    }
    bps.push(end);
    bps
}

fn spike_lattice(g: f64, period: f64, cap: f64, cell: f64, start: f64, end: f64) -> Result<PiecewisePotential> {
    let ok = g >= 0.0 && period > 0.0 && cap > 0.0 && cell > 0.0 && end > start;
    if !ok || ![g, period, cap, cell, start, end].iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidFamily(format!(
            "spike_lattice needs g >= 0, period, cap, cell > 0 and end > start \
             (g={g}, period={period}, cap={cap}, cell={cell}, start={start}, end={end})"
        )));
    }
    let t_star = (g / cap).powi(2);
    // antiderivative of min(g/√s, cap) for s >= 0
    let radial = |s: f64| {
        if s <= t_star {
            cap * s
        } else {
            cap * t_star + 2.0 * g * (s.sqrt() - t_star.sqrt())
        }
    };
    let signed = |t: f64| t.signum() * radial(t.abs());
    let cell_integral = |a: f64, b: f64| {
        let j0 = ((a - start) / period).floor().max(0.0) as usize;
        let mut total = 0.0;
        let mut j = j0;
        loop {
            let lo = start + j as f64 * period;
            if lo >= b {
                break;
            }
            let hi = lo + period;
            let site = lo + 0.5 * period;
            let l = a.max(lo);
            let r = b.min(hi);
            if r > l {
                total += signed(r - site) - signed(l - site);
            }
            j += 1;
        }
        total
    };
    let bps = uniform_cells(start, end, cell);
    let values = bps
        .windows(2)
        .map(|w| -cell_integral(w[0], w[1]) / (w[1] - w[0]))
        .collect();
    PiecewisePotential::new(bps, values)
}

fn random_step(cells: usize, start: f64, length: f64, min: f64, max: f64, seed: u64) -> Result<PiecewisePotential> {
    if cells == 0 || !(length > 0.0) || !(min <= max) || ![start, length, min, max].iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidFamily(format!(
            "random_step needs cells >= 1, length > 0 and min <= max \
             (cells={cells}, length={length}, min={min}, max={max})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let widths: Vec<f64> = (0..cells).map(|_| rng.gen_range(0.25..1.75)).collect();
    let total: f64 = widths.iter().sum();
    let mut bps = Vec::with_capacity(cells + 1);
    let mut x = start;
    bps.push(x);
    for w in &widths[..cells - 1] {
        x += w / total * length;
        bps.push(x);
    }
    bps.push(start + length);
    let values = (0..cells)
        .map(|_| if min == max { min } else { rng.gen_range(min..max) })
        .collect();
    PiecewisePotential::new(bps, values)
}

fn harmonic(half_width: f64, cell: f64) -> Result<PiecewisePotential> {
    if !(half_width > 0.0) || !(cell > 0.0) || !half_width.is_finite() || !cell.is_finite() {
        return Err(Error::InvalidFamily(format!(
            "harmonic needs half_width > 0 and cell > 0 (half_width={half_width}, cell={cell})"
        )));
    }
    let bps = uniform_cells(-half_width, half_width, cell);
    let values = bps
        .windows(2)
        .map(|w| (w[1].powi(3) - w[0].powi(3)) / (3.0 * (w[1] - w[0])))
        .collect();
    PiecewisePotential::new(bps, values)
}
