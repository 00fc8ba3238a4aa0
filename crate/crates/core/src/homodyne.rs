//! Temporal modes, homodyne pulse variances and readout efficiencies for
//! the local-oscillator strategies (delayed read pulse, matched mode,
//! arbitrary profile), plus the long-window spectrum power of a step readout.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::model::DerivedParams;
use crate::profiles::{integrate, PulseShape};

/// Real temporal mode sampled on a strictly increasing grid, linearly
/// interpolated between nodes and zero outside them.
///
/// Values carry units of inverse square-root time, so `<f|f>` is
/// dimensionless. No normalisation is imposed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TemporalMode {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl TemporalMode {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        validate_grid(&grid)?;
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "mode has {} values for {} grid points",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("mode values must be finite".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: &[f64], f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid.to_vec(), grid.iter().map(|&t| f(t)).collect())
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.grid.len();
        if t < self.grid[0] || t > self.grid[n - 1] {
            return 0.0;
        }
        let k = self.grid.partition_point(|&x| x <= t).saturating_sub(1).min(n - 2);
        let (t0, t1) = (self.grid[k], self.grid[k + 1]);
        let s = (t - t0) / (t1 - t0);
        self.values[k] + s * (self.values[k + 1] - self.values[k])
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// The mode restricted to `t <= until`; the cut point is added to the
    /// grid when it falls between nodes. `None` when fewer than two nodes
    /// remain.
    pub fn truncated(&self, until: f64) -> Option<Self> {
        let k = self.grid.partition_point(|&x| x <= until);
        let mut grid = self.grid[..k].to_vec();
        let mut values = self.values[..k].to_vec();
        if k < self.grid.len() && grid.last().is_none_or(|&last| last < until) && k > 0 {
            grid.push(until);
            values.push(self.eval(until));
        }
        (grid.len() >= 2).then_some(Self { grid, values })
    }

    /// `<self|self>`.
    pub fn norm_sq(&self) -> f64 {
        trapezoid(&self.grid, self.values.iter().map(|v| v * v))
    }

    /// Grid point with the largest value.
    pub fn argmax(&self) -> f64 {
        let (i, _) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        self.grid[i]
    }
}

pub(crate) fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid needs at least two points, got {}",
            grid.len()
        )));
    }
    if grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

fn trapezoid(grid: &[f64], values: impl Iterator<Item = f64>) -> f64 {
    let mut acc = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for (&t, v) in grid.iter().zip(values) {
        if let Some((tp, vp)) = prev {
            acc += 0.5 * (t - tp) * (v + vp);
        }
        prev = Some((t, v));
    }
    acc
}

/// `<f|g> = int f(t) g(t) dt` by the trapezoid rule on the union of both
/// grids over their common span, with linear resampling.
pub fn inner_product(f: &TemporalMode, g: &TemporalMode) -> f64 {
    if f.grid == g.grid {
        return trapezoid(&f.grid, f.values.iter().zip(&g.values).map(|(a, b)| a * b));
    }
    let lo = f.grid[0].max(g.grid[0]);
    let hi = f.grid[f.grid.len() - 1].min(g.grid[g.grid.len() - 1]);
    if hi <= lo {
        return 0.0;
    }
    let mut merged: Vec<f64> = f
        .grid
        .iter()
        .chain(&g.grid)
        .copied()
        .filter(|&t| t >= lo && t <= hi)
        .collect();
    merged.push(lo);
    merged.push(hi);
    merged.sort_by(f64::total_cmp);
    merged.dedup();
    trapezoid(&merged, merged.iter().map(|&t| f.eval(t) * g.eval(t)))
}

/// Homodyne pulse noise `P = shot_noise + signal (e^{-2r} - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceResult {
    pub variance: f64,
    pub shot_noise: f64,
    pub signal: f64,
    /// `signal / shot_noise`, the fraction of the input squeezing seen.
    pub efficiency: f64,
}

fn require_lo(norm: f64) -> Result<()> {
    if norm > 0.0 && norm.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "local oscillator must have non-zero finite norm, got {norm}"
        )))
    }
}

/// Normalised variance `int int E C E / int E^2` of the quadrature measured
/// with local oscillator `lo` against kernel `k` (shot noise = 1).
pub fn measured_variance(k: &Kernel, lo: &TemporalMode) -> Result<VarianceResult> {
    let q = k.quadratic_form(lo);
    require_lo(q.norm)?;
    let signal = q.signal / q.norm;
    Ok(VarianceResult {
        variance: 1.0 + k.squeeze_factor() * signal,
        shot_noise: 1.0,
        signal,
        efficiency: signal,
    })
}

/// `(1 - Var) / (1 - e^{-2r})`, the fraction of the input noise reduction
/// retrieved with `lo`.
pub fn readout_efficiency(k: &Kernel, lo: &TemporalMode) -> Result<f64> {
    if k.r() == 0.0 {
        return Err(Error::UndefinedEfficiency);
    }
    let v = measured_variance(k, lo)?;
    Ok((1.0 - v.variance) / -k.squeeze_factor())
}

/// Local oscillator following the read-pulse amplitude shifted earlier by
/// `delay`: `E(t) = sqrt(xi(t + delay))`.
pub fn lo_delayed_read(shape: &PulseShape, delay: f64, grid: &[f64]) -> Result<TemporalMode> {
    shape.validate()?;
    TemporalMode::from_fn(grid, |t| shape.envelope(t + delay).sqrt())
}

/// Optimal shift of the delayed read-pulse oscillator and its efficiency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DelayOptimum {
    /// Signed shift: the oscillator is `sqrt(xi(t + delay))`.
    pub delay: f64,
    /// Readout efficiency at `delay` (includes the factor `eta`).
    pub efficiency: f64,
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Golden-section maximisation of the delayed-read-pulse efficiency over
/// `delay in [0, 5T]` to `1e-4 T`.
pub fn optimize_delay(d: &DerivedParams, shape: &PulseShape, r: f64, grid: &[f64]) -> Result<DelayOptimum> {
    let PulseShape::Gaussian { duration } = *shape else {
        return Err(Error::InvalidArgument(
            "delay optimisation needs a Gaussian read pulse".into(),
        ));
    };
    let af = d.area_function(shape.clone())?;
    let kernel = crate::kernels::readout_kernel(d, &af, r, grid)?;
    let eff = |delay: f64| -> Result<f64> {
        let lo = lo_delayed_read(shape, delay, grid)?;
        readout_efficiency(&kernel, &lo)
    };

    let tol = 1e-4 * duration;
    let (mut a, mut b) = (0.0, 5.0 * duration);
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let mut f1 = eff(x1)?;
    let mut f2 = eff(x2)?;
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = eff(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = eff(x1)?;
        }
    }
    let delay = 0.5 * (a + b);
    Ok(DelayOptimum {
        delay,
        efficiency: eff(delay)?,
    })
}

/// Best efficiency over all oscillators, `eta <f|f>`, reached at `E = f`.
/// Only defined when the smooth part of the kernel is rank one.
pub fn efficiency_bound(k: &Kernel) -> Result<f64> {
    if !k.is_rank_one() {
        return Err(Error::UnsupportedKernel(
            "efficiency bound needs a rank-one smooth part".into(),
        ));
    }
    let term = &k.separable_terms()[0];
    Ok(term.weight * term.mode.norm_sq())
}

/// Noise power of a step readout integrated over `[0, window]` with the
/// oscillator `Theta(t) sqrt(2 g0) e^{-g0 t}`.
///
/// Unnormalised: `shot_noise = <E|E>` over the window and
/// `signal = eta <E|f>^2`, so `variance = shot_noise + signal (e^{-2r} - 1)`
/// and `efficiency = signal / shot_noise -> eta` for long windows.
pub fn spectrum_power(d: &DerivedParams, r: f64, window: f64) -> Result<VarianceResult> {
    if !(window > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "integration window must be positive, got {window}"
        )));
    }
    let g0 = d.gamma_tilde0;
    let lo = |t: f64| (2.0 * g0).sqrt() * (-g0 * t).exp();
    let emission = |t: f64| (2.0 * g0).sqrt() * (-g0 * t).exp();
    let shot_noise = integrate(|t| lo(t) * lo(t), 0.0, window, 1e-13)?.value;
    require_lo(shot_noise)?;
    let overlap = integrate(|t| lo(t) * emission(t), 0.0, window, 1e-13)?.value;
    let signal = d.eta * overlap * overlap;
    Ok(VarianceResult {
        variance: shot_noise + signal * (-2.0 * r).exp_m1(),
        shot_noise,
        signal,
        efficiency: signal / shot_noise,
    })
}
