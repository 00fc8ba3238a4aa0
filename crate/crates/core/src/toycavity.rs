//! Empty cavity with a time-controlled mirror transmission `2 kappa(t) tau`.
//!
//! Written into with squeezed light and read out by opening the mirror
//! again, it behaves exactly like the atomic memory at `eta = 1` with the
//! effective rate replaced by `kappa(t)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::homodyne::{measured_variance, TemporalMode};
use crate::kernels::{kernel_smooth_eval, readout_kernel, Kernel, SeparableTerm};
use crate::model::{write_variance, DerivedParams};
use crate::profiles::{lambert_w0, AreaFunction, PulseShape};

/// Equivalence holds when every deviation is at most this.
pub const EQUIVALENCE_TOL: f64 = 1e-12;

/// Largest number of points per axis used for the pointwise kernel comparison.
const KERNEL_SAMPLES: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct CavityParams {
    /// Round-trip time.
    pub tau: f64,
    /// `kappa(t) = kappa0 xi(t)` and its integral.
    pub kappa: AreaFunction,
    /// Input squeezing.
    pub r: f64,
}

impl CavityParams {
    pub fn new(tau: f64, shape: PulseShape, kappa0: f64, r: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidArgument(format!("round-trip time must be positive, got {tau}")));
        }
        if !r.is_finite() {
            return Err(Error::InvalidArgument(format!("squeezing must be finite, got {r}")));
        }
        Ok(Self {
            tau,
            kappa: AreaFunction::new(shape, kappa0)?,
            r,
        })
    }

    pub fn transmission(&self, t: f64) -> f64 {
        2.0 * self.kappa.rate(t) * self.tau
    }

    /// Warn when the mirror transmission exceeds one anywhere on `grid`.
    /// Returns whether the profile is physical.
    pub fn check_transmission(&self, grid: &[f64]) -> bool {
        let worst = grid
            .iter()
            .map(|&t| self.transmission(t))
            .fold(0.0, f64::max);
        if worst > 1.0 {
            log::warn!("mirror transmission reaches {worst:.4} > 1");
            false
        } else {
            true
        }
    }

    /// `sqrt(2 kappa(t)) e^{-int kappa}`
    pub fn emission_value(&self, t: f64) -> f64 {
        let k = self.kappa.rate(t);
        if k == 0.0 {
            return 0.0;
        }
        (2.0 * k).sqrt() * (-self.kappa.area(t)).exp()
    }
}

/// Intracavity quadrature variance while writing,
/// `e^{-2r} + (1 - e^{-2r}) e^{-2a(t)}`.
pub fn cavity_write_variance(c: &CavityParams, t: f64) -> f64 {
    let squeezed = (-2.0 * c.r).exp();
    squeezed + (1.0 - squeezed) * (-2.0 * c.kappa.area(t)).exp()
}

/// `delta(t-t') + f(t) f(t') (e^{-2r} - 1)` with the cavity emission mode,
/// for an intracavity field prepared with variance `e^{-2r}`.
pub fn cavity_readout_kernel(c: &CavityParams, grid: &[f64]) -> Result<Kernel> {
    c.check_transmission(grid);
    let mode = TemporalMode::from_fn(grid, |t| c.emission_value(t))?;
    Ok(Kernel::new(
        c.r,
        0.0,
        vec![SeparableTerm { weight: 1.0, mode }],
        None,
    ))
}

/// Delay of the emission maximum ahead of a Gaussian opening of duration `T`.
pub fn cavity_emission_peak_delay(kappa0: f64, duration: f64) -> Result<f64> {
    let area = kappa0 * duration;
    let w = lambert_w0(2.0 * area * area / std::f64::consts::PI)?;
    Ok(duration * (0.5 * w).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquivalenceReport {
    /// Atomic `eta` used for the comparison.
    pub eta: f64,
    /// Max over grid pairs of the kernel difference, delta weight included.
    pub kernel_deviation: f64,
    /// Max over the grid of the write-variance difference.
    pub write_variance_deviation: f64,
    /// Difference of the matched-oscillator readout variances.
    pub readout_variance_deviation: f64,
    pub max_deviation: f64,
    pub pass: bool,
}

/// Compare the atomic memory, with `eta` forced to one, against the cavity
/// with `kappa0 = gamma_tilde0`.
pub fn equivalence_report(d: &DerivedParams, shape: &PulseShape, r: f64, grid: &[f64]) -> Result<EquivalenceReport> {
    compare(&d.with_eta(1.0)?, shape, r, grid)
}

/// Same comparison keeping the atomic `eta`; deviations then measure the
/// `(1 - eta)` terms.
pub fn equivalence_report_at_eta(
    d: &DerivedParams,
    shape: &PulseShape,
    r: f64,
    grid: &[f64],
) -> Result<EquivalenceReport> {
    compare(d, shape, r, grid)
}

fn compare(d: &DerivedParams, shape: &PulseShape, r: f64, grid: &[f64]) -> Result<EquivalenceReport> {
    let af = d.area_function(shape.clone())?;
    // tau drops out of normalised quantities; keep the transmission small
    let tau = if d.gamma_tilde0 > 0.0 { 1e-3 / d.gamma_tilde0 } else { 1.0 };
    let cavity = CavityParams::new(tau, shape.clone(), d.gamma_tilde0, r)?;
    let atomic_k = readout_kernel(d, &af, r, grid)?;
    let cavity_k = cavity_readout_kernel(&cavity, grid)?;

    let stride = grid.len().div_ceil(KERNEL_SAMPLES).max(1);
    let sample: Vec<f64> = grid.iter().copied().step_by(stride).collect();
    let mut kernel_deviation = (atomic_k.delta_coeff() - cavity_k.delta_coeff()).abs();
    for &t in &sample {
        for &u in &sample {
            let dev = (kernel_smooth_eval(&atomic_k, t, u) - kernel_smooth_eval(&cavity_k, t, u)).abs();
            kernel_deviation = kernel_deviation.max(dev);
        }
    }

    let write_variance_deviation = grid
        .iter()
        .map(|&t| (write_variance(d, &af, r, t) - cavity_write_variance(&cavity, t)).abs())
        .fold(0.0, f64::max);

    let lo = &cavity_k.separable_terms()[0].mode;
    let readout_variance_deviation = if lo.norm_sq() > 0.0 {
        (measured_variance(&atomic_k, lo)?.variance - measured_variance(&cavity_k, lo)?.variance).abs()
    } else {
        // no pulse: both kernels are a pure delta
        0.0
    };

    let max_deviation = kernel_deviation
        .max(write_variance_deviation)
        .max(readout_variance_deviation);
    Ok(EquivalenceReport {
        eta: d.eta,
        kernel_deviation,
        write_variance_deviation,
        readout_variance_deviation,
        max_deviation,
        pass: max_deviation <= EQUIVALENCE_TOL,
    })
}
