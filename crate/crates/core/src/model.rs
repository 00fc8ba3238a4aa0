//! Physical parameters and the closed-form write/read quantities of the
//! adiabatic memory model.
//!
//! Every downstream formula depends on two composites only: the static
//! transfer efficiency `eta = 2C/(1+2C)` and the static effective rate
//! `gamma_tilde0 = Omega0^2 / (gamma (1+2C))`. The ground-state decay rate is
//! carried for the adiabaticity check and set to zero in all dynamics.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homodyne::{inner_product, TemporalMode};
use crate::profiles::{lambert_w0, AreaFunction, PulseShape};

/// Minimum separation between adjacent rates for the adiabatic reduction.
pub const ADIABATIC_SEPARATION: f64 = 100.0;

/// Raw physical rates of the atom-cavity system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemoryParams {
    /// Optical dipole relaxation rate.
    pub gamma: f64,
    /// Cavity bandwidth.
    pub kappa: f64,
    /// Cavity round-trip time.
    pub tau: f64,
    /// Single atom-field coupling constant.
    pub coupling: f64,
    pub atoms: u64,
    /// Ground-state decay rate.
    pub gamma0: f64,
    /// Peak Rabi frequency of the control field.
    pub omega0: f64,
    /// Squeezing parameter of the input field.
    pub r: f64,
}

impl MemoryParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gamma", self.gamma),
            ("kappa", self.kappa),
            ("tau", self.tau),
            ("coupling", self.coupling),
            ("omega0", self.omega0),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.gamma0.is_finite() && self.gamma0 >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "gamma0 must be non-negative, got {}",
                self.gamma0
            )));
        }
        if self.atoms == 0 {
            return Err(Error::InvalidArgument("atom number must be at least 1".into()));
        }
        if !(self.r.is_finite() && self.r >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "squeezing parameter must be non-negative, got {}",
                self.r
            )));
        }
        Ok(())
    }

    /// Intensity transmission of the coupling mirror, `2 kappa tau`.
    pub fn transmission(&self) -> f64 {
        2.0 * self.kappa * self.tau
    }

    /// Collective coupling `g sqrt(N / tau)` in units where all quadratures
    /// have unit vacuum variance. Cooperativity is `G^2 / (2 kappa gamma)`.
    pub fn collective_coupling(&self) -> f64 {
        self.coupling * (self.atoms as f64 / self.tau).sqrt()
    }
}

/// Composite quantities derived from [`MemoryParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    /// Mirror transmission; unknown when built from composites.
    pub transmission: Option<f64>,
    pub cooperativity: f64,
    /// Static transfer efficiency.
    pub eta: f64,
    /// Static effective relaxation rate.
    pub gamma_tilde0: f64,
    /// Peak field-spin coupling.
    pub beta_e0: f64,
    pub atoms: f64,
}

impl DerivedParams {
    /// Build directly from `(eta, gamma_tilde0, N)`, bypassing the
    /// microscopic rates. `eta = 1` corresponds to infinite cooperativity.
    pub fn from_composites(eta: f64, gamma_tilde0: f64, atoms: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidArgument(format!("eta must lie in [0, 1], got {eta}")));
        }
        if !(gamma_tilde0.is_finite() && gamma_tilde0 >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "gamma_tilde0 must be non-negative, got {gamma_tilde0}"
            )));
        }
        if !(atoms.is_finite() && atoms >= 1.0) {
            return Err(Error::InvalidArgument(format!("atom number must be >= 1, got {atoms}")));
        }
        let cooperativity = if eta < 1.0 {
            eta / (2.0 * (1.0 - eta))
        } else {
            f64::INFINITY
        };
        Ok(Self {
            transmission: None,
            cooperativity,
            eta,
            gamma_tilde0,
            beta_e0: (0.5 * atoms * gamma_tilde0 * eta).sqrt(),
            atoms,
        })
    }

    /// Area function of `shape` at this memory's static rate.
    pub fn area_function(&self, shape: PulseShape) -> Result<AreaFunction> {
        AreaFunction::new(shape, self.gamma_tilde0)
    }

    /// Same memory with `eta` replaced, keeping `gamma_tilde0` and `N`.
    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        Self::from_composites(eta, self.gamma_tilde0, self.atoms)
    }
}

/// `T = 2 kappa tau`, `C = g^2 N / (gamma T)`, `eta = 2C/(1+2C)`,
/// `gamma_tilde0 = Omega0^2 / (gamma (1+2C))` and
/// `beta_E0 = g N Omega0 / (gamma sqrt(T) (1+2C))`.
pub fn derive(p: &MemoryParams) -> Result<DerivedParams> {
    p.validate()?;
    let transmission = p.transmission();
    let n = p.atoms as f64;
    let cooperativity = p.coupling * p.coupling * n / (p.gamma * transmission);
    let denom = 1.0 + 2.0 * cooperativity;
    Ok(DerivedParams {
        transmission: Some(transmission),
        cooperativity,
        eta: 2.0 * cooperativity / denom,
        gamma_tilde0: p.omega0 * p.omega0 / (p.gamma * denom),
        beta_e0: p.coupling * n * p.omega0 / (p.gamma * transmission.sqrt() * denom),
        atoms: n,
    })
}

/// Rate ratios of the adiabatic hierarchy `gamma0 << gamma_tilde << gamma, kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdiabaticReport {
    /// `gamma_tilde0 / gamma0` (infinite when `gamma0 = 0`).
    pub spin_ratio: f64,
    /// `gamma / gamma_tilde0`.
    pub dipole_ratio: f64,
    /// `kappa / gamma_tilde0`.
    pub cavity_ratio: f64,
    pub pass: bool,
}

pub fn check_adiabatic(p: &MemoryParams, d: &DerivedParams) -> AdiabaticReport {
    let spin_ratio = if p.gamma0 == 0.0 {
        f64::INFINITY
    } else {
        d.gamma_tilde0 / p.gamma0
    };
    let dipole_ratio = p.gamma / d.gamma_tilde0;
    let cavity_ratio = p.kappa / d.gamma_tilde0;
    let pass = spin_ratio >= ADIABATIC_SEPARATION
        && dipole_ratio >= ADIABATIC_SEPARATION
        && cavity_ratio >= ADIABATIC_SEPARATION;
    AdiabaticReport {
        spin_ratio,
        dipole_ratio,
        cavity_ratio,
        pass,
    }
}

/// Normalised atomic variance during the write pulse,
/// `e^{-2a} + (1 - e^{-2a}) (eta e^{-2r} + 1 - eta)`.
///
/// The conjugate spin component follows with `r -> -r`.
pub fn write_variance(d: &DerivedParams, af: &AreaFunction, r: f64, t: f64) -> f64 {
    let decay = (-2.0 * af.area(t)).exp();
    let target = d.eta * (-2.0 * r).exp() + 1.0 - d.eta;
    decay + (1.0 - decay) * target
}

/// Write efficiency `eta (1 - e^{-2a(t)})`, independent of `r`.
pub fn write_efficiency(d: &DerivedParams, af: &AreaFunction, t: f64) -> f64 {
    -d.eta * (-2.0 * af.area(t)).exp_m1()
}

/// Homodyne variance of the light emitted during the write pulse up to
/// `t`, measured with the emission mode `f` truncated at `t`.
///
/// With `A = a(t)`, `N = 1 - e^{-2A}` and `s = e^{-2r} - 1`:
///
/// ```text
/// 1 + s [ (2 eta - 1)^2 - eta^2 N + 2 eta (1 - eta) (N - 2A e^{-2A}) / N ]
/// ```
///
/// At `eta = 1` this is `e^{-2r} + (1 - e^{-2r}) N`, which together with
/// [`write_variance`] sums to `1 + e^{-2r}` at every instant.
pub fn write_output_variance(d: &DerivedParams, af: &AreaFunction, r: f64, t: f64) -> f64 {
    let eta = d.eta;
    let area = af.area(t);
    let s = (-2.0 * r).exp_m1();
    let norm = -(-2.0 * area).exp_m1();
    // the exponential term vanishes like A as the emitted norm goes to zero
    let exp_part = if norm > 0.0 {
        if area.is_infinite() {
            1.0
        } else {
            (norm - 2.0 * area * (-2.0 * area).exp()) / norm
        }
    } else {
        0.0
    };
    let signal = (2.0 * eta - 1.0).powi(2) - eta * eta * norm + 2.0 * eta * (1.0 - eta) * exp_part;
    1.0 + s * signal
}

/// Emission mode value `sqrt(2 rate(t)) e^{-a(t)}`.
pub fn emission_value(af: &AreaFunction, t: f64) -> f64 {
    let rate = af.rate(t);
    if rate == 0.0 {
        return 0.0;
    }
    (2.0 * rate).sqrt() * (-af.area(t)).exp()
}

/// Samples of the emission mode `f(t) = sqrt(2 rate(t)) e^{-a(t)}` on `grid`.
///
/// Logs a warning when the trapezoid norm on the grid deviates from the
/// closed form `e^{-2a(t_first)} - e^{-2a(t_last)}` by more than 1e-6.
pub fn emission_mode(af: &AreaFunction, grid: &[f64]) -> Result<TemporalMode> {
    let mode = TemporalMode::from_fn(grid, |t| emission_value(af, t))?;
    let first = grid[0];
    let last = grid[grid.len() - 1];
    let expected = (-2.0 * af.area(first)).exp() - (-2.0 * af.area(last)).exp();
    let numeric = inner_product(&mode, &mode);
    if (numeric - expected).abs() > 1e-6 {
        log::warn!(
            "emission mode grid too coarse: <f|f> = {numeric:.9} on the grid vs {expected:.9} closed form"
        );
    }
    Ok(mode)
}

/// `<f|f> = 1 - e^{-2a(inf)}`, equal to one for an unbounded pulse area.
pub fn mode_norm_closed(af: &AreaFunction) -> f64 {
    let total = af.total();
    if total.is_infinite() {
        1.0
    } else {
        -(-2.0 * total).exp_m1()
    }
}

/// Delay magnitude `t0 = T sqrt(W0(2 gamma_tilde0^2 T^2 / pi) / 2)` of the
/// emission maximum for a Gaussian pulse of duration `T`. The maximum sits
/// at `-t0`, ahead of the pulse centre.
pub fn emission_peak_delay(d: &DerivedParams, duration: f64) -> Result<f64> {
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "pulse duration must be positive, got {duration}"
        )));
    }
    let area = d.gamma_tilde0 * duration;
    let w = lambert_w0(2.0 * area * area / PI)?;
    Ok(duration * (0.5 * w).sqrt())
}
