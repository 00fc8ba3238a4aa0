//! Control-pulse envelopes, their integrated areas, and the special
//! functions the closed forms need.
//!
//! An envelope `xi(t)` is the normalised intensity profile of the control
//! field. The effective relaxation rate follows it, `rate(t) = rate0 * xi(t)`,
//! and the pulse area is `a(t) = int_{-inf}^t rate(s) ds`.

mod quad;
mod special;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use quad::{integrate, integrate_with_breaks, Quadrature};
pub use special::{erf, erfc, lambert_w0};

/// Relative level below which a Gaussian envelope is treated as zero.
pub const ENVELOPE_FLOOR: f64 = 1e-16;

/// Piecewise-linear envelope on a strictly increasing grid, zero outside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSampled", into = "RawSampled")]
pub struct SampledEnvelope {
    times: Vec<f64>,
    values: Vec<f64>,
    cumulative: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawSampled {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawSampled> for SampledEnvelope {
    type Error = Error;

    fn try_from(raw: RawSampled) -> Result<Self> {
        SampledEnvelope::new(raw.times, raw.values)
    }
}

impl From<SampledEnvelope> for RawSampled {
    fn from(s: SampledEnvelope) -> Self {
        RawSampled {
            times: s.times,
            values: s.values,
        }
    }
}

impl SampledEnvelope {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::InvalidShape(format!(
                "sampled envelope needs at least two grid points, got {}",
                times.len()
            )));
        }
        if times.len() != values.len() {
            return Err(Error::InvalidShape(format!(
                "{} grid times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidShape(
                "sampled grid must be finite and strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidShape(
                "sampled values must be finite and non-negative".into(),
            ));
        }
        let mut cumulative = Vec::with_capacity(times.len());
        cumulative.push(0.0);
        for i in 1..times.len() {
            let seg = 0.5 * (times[i] - times[i - 1]) * (values[i] + values[i - 1]);
            cumulative.push(cumulative[i - 1] + seg);
        }
        Ok(Self {
            times,
            values,
            cumulative,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn segment(&self, t: f64) -> Option<usize> {
        let n = self.times.len();
        if t < self.times[0] || t > self.times[n - 1] {
            return None;
        }
        let k = self.times.partition_point(|&x| x <= t);
        Some(k.saturating_sub(1).min(n - 2))
    }

    fn eval(&self, t: f64) -> f64 {
        match self.segment(t) {
            None => 0.0,
            Some(k) => {
                let (t0, t1) = (self.times[k], self.times[k + 1]);
                let s = (t - t0) / (t1 - t0);
                self.values[k] + s * (self.values[k + 1] - self.values[k])
            }
        }
    }

    /// Exact integral of the linear interpolant from the first node to `t`.
    fn integral_to(&self, t: f64) -> f64 {
        let n = self.times.len();
        if t <= self.times[0] {
            return 0.0;
        }
        if t >= self.times[n - 1] {
            return self.cumulative[n - 1];
        }
        let k = self.segment(t).expect("t lies inside the grid");
        let v = self.eval(t);
        self.cumulative[k] + 0.5 * (t - self.times[k]) * (self.values[k] + v)
    }

    fn total(&self) -> f64 {
        self.cumulative[self.cumulative.len() - 1]
    }
}

/// Intensity envelope `xi(t)` of a control pulse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PulseShape {
    /// `xi(t) = exp(-t^2/T^2)/sqrt(pi)`, so that `int xi = T`.
    Gaussian { duration: f64 },
    /// `xi(t) = Theta(t - onset)` with `Theta(0) = 1`.
    Step { onset: f64 },
    /// `xi(t) = 1` for all times.
    Constant,
    /// Linear interpolation of samples, zero outside the grid.
    Sampled(SampledEnvelope),
}

impl PulseShape {
    pub fn gaussian(duration: f64) -> Result<Self> {
        let shape = PulseShape::Gaussian { duration };
        shape.validate()?;
        Ok(shape)
    }

    pub fn step(onset: f64) -> Result<Self> {
        let shape = PulseShape::Step { onset };
        shape.validate()?;
        Ok(shape)
    }

    pub fn sampled(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Ok(PulseShape::Sampled(SampledEnvelope::new(times, values)?))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PulseShape::Gaussian { duration } if !(duration.is_finite() && *duration > 0.0) => Err(
                Error::InvalidShape(format!("Gaussian duration must be positive, got {duration}")),
            ),
            PulseShape::Step { onset } if !onset.is_finite() => {
                Err(Error::InvalidShape("step onset must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    /// `xi(t)`.
    pub fn envelope(&self, t: f64) -> f64 {
        match self {
            PulseShape::Gaussian { duration } => {
                let u = t / duration;
                (-u * u).exp() / PI.sqrt()
            }
            PulseShape::Step { onset } => {
                if t >= *onset {
                    1.0
                } else {
                    0.0
                }
            }
            PulseShape::Constant => 1.0,
            PulseShape::Sampled(s) => s.eval(t),
        }
    }

    /// `int_{-inf}^t xi(s) ds`; infinite for a constant envelope.
    pub fn integral_to(&self, t: f64) -> f64 {
        match self {
            PulseShape::Gaussian { duration } => 0.5 * duration * erfc(-t / duration),
            PulseShape::Step { onset } => (t - onset).max(0.0),
            PulseShape::Constant => f64::INFINITY,
            PulseShape::Sampled(s) => s.integral_to(t),
        }
    }

    /// `int xi` over the whole line.
    pub fn total_integral(&self) -> f64 {
        match self {
            PulseShape::Gaussian { duration } => *duration,
            PulseShape::Step { .. } | PulseShape::Constant => f64::INFINITY,
            PulseShape::Sampled(s) => s.total(),
        }
    }

    /// Natural time unit: the Gaussian duration, otherwise one model unit.
    pub fn time_scale(&self) -> f64 {
        match self {
            PulseShape::Gaussian { duration } => *duration,
            _ => 1.0,
        }
    }

    /// Interval outside which the envelope is zero or below
    /// [`ENVELOPE_FLOOR`] relative to its peak.
    pub fn support(&self) -> (f64, f64) {
        match self {
            PulseShape::Gaussian { duration } => {
                let half = duration * (1.0 / ENVELOPE_FLOOR).ln().sqrt();
                (-half, half)
            }
            PulseShape::Step { onset } => (*onset, f64::INFINITY),
            PulseShape::Constant => (f64::NEG_INFINITY, f64::INFINITY),
            PulseShape::Sampled(s) => (s.times[0], s.times[s.times.len() - 1]),
        }
    }

    /// Points where the envelope is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            PulseShape::Gaussian { .. } | PulseShape::Constant => Vec::new(),
            PulseShape::Step { onset } => vec![*onset],
            PulseShape::Sampled(s) => s.times.clone(),
        }
    }
}

/// `xi(t)` with validation of the shape.
pub fn envelope(shape: &PulseShape, t: f64) -> Result<f64> {
    shape.validate()?;
    Ok(shape.envelope(t))
}

/// Pulse area `a(t) = rate0 * int_{-inf}^t xi` for a given envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaFunction {
    shape: PulseShape,
    rate0: f64,
}

impl AreaFunction {
    pub fn new(shape: PulseShape, rate0: f64) -> Result<Self> {
        shape.validate()?;
        if !(rate0.is_finite() && rate0 >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "rate scale must be finite and non-negative, got {rate0}"
            )));
        }
        Ok(Self { shape, rate0 })
    }

    pub fn shape(&self) -> &PulseShape {
        &self.shape
    }

    /// Peak (static) rate multiplying the envelope.
    pub fn rate0(&self) -> f64 {
        self.rate0
    }

    /// Same envelope, different rate scale.
    pub fn with_rate0(&self, rate0: f64) -> Result<Self> {
        Self::new(self.shape.clone(), rate0)
    }

    /// Instantaneous rate `rate0 * xi(t)`.
    pub fn rate(&self, t: f64) -> f64 {
        self.rate0 * self.shape.envelope(t)
    }

    /// `a(t)`. Closed form for every built-in shape; `+inf` for a constant
    /// envelope with non-zero rate.
    pub fn area(&self, t: f64) -> f64 {
        if self.rate0 == 0.0 || t == f64::NEG_INFINITY {
            return 0.0;
        }
        if t == f64::INFINITY {
            return self.total();
        }
        self.rate0 * self.shape.integral_to(t)
    }

    /// `a(+inf)`.
    pub fn total(&self) -> f64 {
        if self.rate0 == 0.0 {
            0.0
        } else {
            self.rate0 * self.shape.total_integral()
        }
    }

    /// `a(t)` by adaptive quadrature of the rate, independent of the
    /// closed forms used by [`AreaFunction::area`].
    pub fn area_by_quadrature(&self, t: f64, rel_tol: f64) -> Result<f64> {
        if self.rate0 == 0.0 {
            return Ok(0.0);
        }
        let (lo, _) = self.shape.support();
        if t <= lo {
            return Ok(0.0);
        }
        let q = integrate_with_breaks(|s| self.rate(s), lo, t, &self.shape.breakpoints(), rel_tol)?;
        Ok(q.value)
    }
}
