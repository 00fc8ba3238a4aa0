//! Two-time correlation kernels of the output field quadrature.
//!
//! A kernel is stored symbolically as
//!
//! ```text
//! C(t,t') = [1 + s w_d] delta(t-t')
//!         + s sum_k w_k m_k(t) m_k(t')
//!         + s w_e sqrt(rate(t) rate(t')) exp(-|a(t) - a(t')|)
//! ```
//!
//! with `s = e^{-2r} - 1`. Keeping the weights separate from `s` makes the
//! shot-noise and signal parts of a homodyne measurement explicit. Dense
//! evaluation happens only on demand.

use crate::error::Result;
use crate::homodyne::{inner_product, TemporalMode};
use crate::model::{emission_mode, DerivedParams};
use crate::profiles::AreaFunction;

/// `weight * mode(t) * mode(t')`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableTerm {
    pub weight: f64,
    pub mode: TemporalMode,
}

/// `weight * sqrt(rate(t) rate(t')) * exp(-|a(t) - a(t')|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpTerm {
    pub weight: f64,
    pub area: AreaFunction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    r: f64,
    delta_weight: f64,
    separable: Vec<SeparableTerm>,
    exp_term: Option<ExpTerm>,
}

/// Signal part of the quadratic form `int int E C E` for one local oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct QuadraticForm {
    /// `<E|E>`
    pub norm: f64,
    /// Coefficient of `s = e^{-2r} - 1`.
    pub signal: f64,
}

impl Kernel {
    pub fn new(
        r: f64,
        delta_weight: f64,
        separable: Vec<SeparableTerm>,
        exp_term: Option<ExpTerm>,
    ) -> Self {
        Self {
            r,
            delta_weight,
            separable,
            exp_term,
        }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// `e^{-2r} - 1`.
    pub fn squeeze_factor(&self) -> f64 {
        (-2.0 * self.r).exp_m1()
    }

    /// The same correlation structure with a different input squeezing.
    pub fn with_squeezing(&self, r: f64) -> Self {
        Self { r, ..self.clone() }
    }

    /// Coefficient of `delta(t - t')`.
    pub fn delta_coeff(&self) -> f64 {
        1.0 + self.squeeze_factor() * self.delta_weight
    }

    pub fn delta_weight(&self) -> f64 {
        self.delta_weight
    }

    pub fn separable_terms(&self) -> &[SeparableTerm] {
        &self.separable
    }

    /// Full coefficients `s * w_k` of the separable terms.
    pub fn separable_coeffs(&self) -> Vec<f64> {
        let s = self.squeeze_factor();
        self.separable.iter().map(|t| s * t.weight).collect()
    }

    pub fn exp_term(&self) -> Option<&ExpTerm> {
        self.exp_term.as_ref()
    }

    /// Full coefficient `s * w_e` of the exponential term, zero if absent.
    pub fn exp_coeff(&self) -> f64 {
        self.exp_term
            .as_ref()
            .map_or(0.0, |e| self.squeeze_factor() * e.weight)
    }

    /// True when the smooth part is a single separable term.
    pub fn is_rank_one(&self) -> bool {
        self.separable.len() == 1
            && self.exp_term.as_ref().is_none_or(|e| e.weight == 0.0)
            && self.delta_weight == 0.0
    }

    pub(crate) fn quadratic_form(&self, lo: &TemporalMode) -> QuadraticForm {
        let norm = inner_product(lo, lo);
        let mut signal = self.delta_weight * norm;
        for term in &self.separable {
            let overlap = inner_product(lo, &term.mode);
            signal += term.weight * overlap * overlap;
        }
        if let Some(exp) = &self.exp_term {
            if exp.weight != 0.0 {
                signal += exp.weight * exp_quadratic_form(&exp.area, lo);
            }
        }
        QuadraticForm { norm, signal }
    }
}

/// `int int E(t) E(t') sqrt(rate(t) rate(t')) exp(-|a(t)-a(t')|) dt dt'` on
/// the oscillator grid.
///
/// Ordering the pair splits the kernel into `e^{-a(t)} e^{a(t')}` for
/// `t' < t`, so the double integral is twice a running convolution
/// `I(t) = int_{t'<t} u(t') e^{-(a(t)-a(t'))} dt'` with `u = E sqrt(rate)`,
/// advanced by trapezoid steps: O(n) instead of O(n^2).
pub(crate) fn exp_quadratic_form(area: &AreaFunction, lo: &TemporalMode) -> f64 {
    let grid = lo.grid();
    let vals = lo.values();
    let u: Vec<f64> = grid
        .iter()
        .zip(vals)
        .map(|(&t, &e)| e * area.rate(t).sqrt())
        .collect();
    let a: Vec<f64> = grid.iter().map(|&t| area.area(t)).collect();
    let mut running = 0.0;
    let mut total = 0.0;
    for k in 1..grid.len() {
        let h = grid[k] - grid[k - 1];
        let decay = (-(a[k] - a[k - 1])).exp();
        let prev = running;
        running = decay * running + 0.5 * h * (u[k - 1] * decay + u[k]);
        total += 0.5 * h * (u[k - 1] * prev + u[k] * running);
    }
    2.0 * total
}

/// Readout kernel `delta(t-t') + eta f(t) f(t') (e^{-2r} - 1)` for atoms
/// prepared with variance `e^{-2r}` and vacuum input.
pub fn readout_kernel(d: &DerivedParams, af: &AreaFunction, r: f64, grid: &[f64]) -> Result<Kernel> {
    let f = emission_mode(af, grid)?;
    Ok(Kernel::new(
        r,
        0.0,
        vec![SeparableTerm {
            weight: d.eta,
            mode: f,
        }],
        None,
    ))
}

/// Output correlation during the write pulse (squeezed input, coherent
/// spin state):
///
/// ```text
/// delta + s [ (2 eta - 1)^2 delta
///           + 2 eta (1 - eta) sqrt(rate rate') e^{-|a - a'|}
///           - eta^2 f f' ]
/// ```
pub fn write_kernel(d: &DerivedParams, af: &AreaFunction, r: f64, grid: &[f64]) -> Result<Kernel> {
    let eta = d.eta;
    let f = emission_mode(af, grid)?;
    Ok(Kernel::new(
        r,
        (2.0 * eta - 1.0).powi(2),
        vec![SeparableTerm {
            weight: -eta * eta,
            mode: f,
        }],
        Some(ExpTerm {
            weight: 2.0 * eta * (1.0 - eta),
            area: af.clone(),
        }),
    ))
}

/// Readout kernel for a control field switched on abruptly at `t = 0`:
/// `delta + 2 eta g0 e^{-g0 (t + t')} (e^{-2r} - 1)` for `t, t' >= 0`.
///
/// The exponent uses the constant rate `g0`, the only dimensionally
/// consistent reading for a step envelope.
pub fn cw_step_kernel(d: &DerivedParams, r: f64, grid: &[f64]) -> Result<Kernel> {
    let g0 = d.gamma_tilde0;
    let mode = TemporalMode::from_fn(grid, |t| {
        if t >= 0.0 {
            (2.0 * g0).sqrt() * (-g0 * t).exp()
        } else {
            0.0
        }
    })?;
    Ok(Kernel::new(
        r,
        0.0,
        vec![SeparableTerm {
            weight: d.eta,
            mode,
        }],
        None,
    ))
}

/// Smooth (non-delta) part of the kernel at `(t, t')`.
pub fn kernel_smooth_eval(k: &Kernel, t: f64, t_prime: f64) -> f64 {
    let s = k.squeeze_factor();
    let mut acc = 0.0;
    for term in &k.separable {
        acc += term.weight * (term.mode.eval(t) * term.mode.eval(t_prime));
    }
    if let Some(exp) = &k.exp_term {
        let rates = (exp.area.rate(t) * exp.area.rate(t_prime)).sqrt();
        if rates > 0.0 {
            acc += exp.weight * rates * (-(exp.area.area(t) - exp.area.area(t_prime)).abs()).exp();
        }
    }
    s * acc
}
