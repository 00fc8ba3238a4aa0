//! Second-moment propagation of the linear quantum Langevin systems.
//!
//! All three models are linear with white-noise inputs, so the covariance
//! obeys the Lyapunov equation `dS/dt = M S + S M^T + D` exactly and no
//! sampling is needed. Every quadrature is normalised to unit vacuum
//! variance.
//!
//! # Full model
//!
//! State `[X_A, Y_A, X_P, Y_P, J_x, J_y]` for cavity field, optical dipole
//! and collective spin, with `X = a + a^dag`, `Y = i(a^dag - a)`. Writing
//! `G = g sqrt(N/tau)` and `Omega(t) = Omega0 sqrt(xi(t))`, the complex
//! equations
//!
//! ```text
//! dA/dt = -kappa A + i G P + sqrt(2 kappa) A_in
//! dP/dt = -gamma P + i G A + i Omega J + F
//! dJ/dt = i Omega P
//! ```
//!
//! split into
//!
//! ```text
//! dX_A = -kappa X_A - G Y_P + sqrt(2 kappa) X_in
//! dY_A = -kappa Y_A + G X_P + sqrt(2 kappa) Y_in
//! dX_P = -gamma X_P - G Y_A - Omega Y_J + F_x
//! dY_P = -gamma Y_P + G X_A + Omega X_J + F_y
//! dX_J = -Omega Y_P
//! dY_J =  Omega X_P
//! ```
//!
//! The input noise has intensities `e^{-2r}` and `e^{2r}` on the two
//! quadratures. The dipole force gets diffusion `2 gamma` per quadrature,
//! the unique value that keeps every variance at one when `r = 0`. Before
//! the pulse the cavity and dipole sit in their stationary state with
//! `Omega = 0`.
//!
//! # Reduced model
//!
//! With the cavity and dipole adiabatically eliminated,
//!
//! ```text
//! dx_J = -rate x_J dt - sqrt(2 rate eta) dW_in - sqrt(2 rate (1-eta)) dW_F
//! x_out dt = (1 - 2 eta) dW_in - sqrt(2 rate eta) x_J dt - 2 sqrt(eta (1-eta)) dW_F
//! ```
//!
//! The homodyne oracle appends the accumulator `dS = E(t) x_out dt`, whose
//! noise is correlated with the spin noise through `dW_in` and `dW_F`.

mod ode;

use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homodyne::TemporalMode;
use crate::model::{derive, DerivedParams, MemoryParams};
use crate::profiles::{AreaFunction, PulseShape};

pub use ode::Dopri5;

/// Per-step relative tolerance of the full-model integration.
pub const FULL_RTOL: f64 = 1e-9;
const FULL_ATOL: f64 = 1e-12;
const REDUCED_RTOL: f64 = 1e-12;
const REDUCED_ATOL: f64 = 1e-15;

/// Which memory operation the reduced oracle models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// Squeezed input, spin starts in vacuum.
    Write,
    /// Vacuum input, spin starts squeezed by `e^{-2r}`.
    Read,
}

/// Covariance matrix of the quadrature state at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceState {
    pub time: f64,
    pub matrix: DMatrix<f64>,
}

impl CovarianceState {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn variance(&self, i: usize) -> f64 {
        self.matrix[(i, i)]
    }

    pub fn asymmetry(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).amax()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Row-major upper triangle, diagonal included.
    pub fn upper_triangle(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                out.push(self.matrix[(i, j)]);
            }
        }
        out
    }
}

/// Dump a trajectory as CSV: `time` then the row-major upper triangle.
pub fn write_trajectory_csv<W: Write>(mut w: W, trajectory: &[CovarianceState]) -> io::Result<()> {
    let Some(first) = trajectory.first() else {
        return Ok(());
    };
    let n = first.dim();
    let mut header = vec!["time".to_string()];
    for i in 0..n {
        for j in i..n {
            header.push(format!("s{i}{j}"));
        }
    }
    writeln!(w, "{}", header.join(","))?;
    for state in trajectory {
        let mut row = vec![format!("{:.11e}", state.time)];
        row.extend(state.upper_triangle().iter().map(|v| format!("{v:.11e}")));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Output times: non-empty, finite, strictly ascending.
fn validate_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidArgument("no output times requested".into()));
    }
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "output times must be finite and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Earliest time the dynamics can differ from the pre-pulse state.
fn start_time(shape: &PulseShape, first: f64) -> f64 {
    let (lo, _) = shape.support();
    if lo.is_finite() {
        lo.min(first)
    } else {
        first
    }
}

/// Advance `y` from `start` through every knot and output time, calling
/// `record(index, t, y)` at each output. `outputs` must be ascending and
/// not earlier than `start`.
fn integrate_through<F>(
    solver: &Dopri5,
    rhs: &mut F,
    y: &mut [f64],
    start: f64,
    knots: &[f64],
    outputs: &[f64],
    mut record: impl FnMut(usize, f64, &[f64]),
) -> Result<()>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let last = outputs.last().copied().unwrap_or(start);
    let mut stops: Vec<f64> = knots
        .iter()
        .copied()
        .filter(|&t| t > start && t < last)
        .chain(outputs.iter().copied().filter(|&t| t > start))
        .collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();

    let mut next = 0;
    while next < outputs.len() && outputs[next] <= start {
        record(next, outputs[next], y);
        next += 1;
    }
    let mut t = start;
    let mut h = 0.0;
    for stop in stops {
        solver.advance(rhs, t, stop, y, &mut h)?;
        t = stop;
        while next < outputs.len() && outputs[next] <= t {
            record(next, outputs[next], y);
            next += 1;
        }
    }
    Ok(())
}

/// Solve `M S + S M^T + D = 0` through its Kronecker form.
fn stationary_covariance(m: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let op = id.kronecker(m) + m.kronecker(&id);
    let rhs = -DVector::from_column_slice(d.as_slice());
    let sol = op
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::InvalidArgument("pre-pulse dynamics have no stationary state".into()))?;
    let s = DMatrix::from_column_slice(n, n, sol.as_slice());
    Ok(0.5 * (&s + s.transpose()))
}

struct FullSystem {
    kappa: f64,
    gamma: f64,
    g: f64,
    omega0: f64,
    shape: PulseShape,
    diffusion: DMatrix<f64>,
}

impl FullSystem {
    fn new(p: &MemoryParams, shape: &PulseShape, r: f64) -> Self {
        let mut diffusion = DMatrix::zeros(6, 6);
        diffusion[(0, 0)] = 2.0 * p.kappa * (-2.0 * r).exp();
        diffusion[(1, 1)] = 2.0 * p.kappa * (2.0 * r).exp();
        diffusion[(2, 2)] = 2.0 * p.gamma;
        diffusion[(3, 3)] = 2.0 * p.gamma;
        Self {
            kappa: p.kappa,
            gamma: p.gamma,
            g: p.collective_coupling(),
            omega0: p.omega0,
            shape: shape.clone(),
            diffusion,
        }
    }

    fn drift(&self, omega: f64) -> DMatrix<f64> {
        let (k, gm, g) = (self.kappa, self.gamma, self.g);
        let mut m = DMatrix::zeros(6, 6);
        m[(0, 0)] = -k;
        m[(0, 3)] = -g;
        m[(1, 1)] = -k;
        m[(1, 2)] = g;
        m[(2, 2)] = -gm;
        m[(2, 1)] = -g;
        m[(2, 5)] = -omega;
        m[(3, 3)] = -gm;
        m[(3, 0)] = g;
        m[(3, 4)] = omega;
        m[(4, 3)] = -omega;
        m[(5, 2)] = omega;
        m
    }

    fn omega(&self, t: f64) -> f64 {
        self.omega0 * self.shape.envelope(t).sqrt()
    }
}

/// Covariance trajectory of the full cavity/dipole/spin system during a
/// write with input squeezing `r` (overrides `p.r`), sampled on `grid`.
///
/// Matrix order is `[X_A, Y_A, X_P, Y_P, J_x, J_y]`.
pub fn propagate_full(
    p: &MemoryParams,
    shape: &PulseShape,
    r: f64,
    grid: &[f64],
) -> Result<Vec<CovarianceState>> {
    p.validate()?;
    shape.validate()?;
    validate_times(grid)?;
    let d = derive(p)?;
    let sys = FullSystem::new(p, shape, r);

    let start = start_time(shape, grid[0]);
    let pre = sys.drift(0.0).view((0, 0), (4, 4)).into_owned();
    let pre_d = sys.diffusion.view((0, 0), (4, 4)).into_owned();
    let mut sigma0 = DMatrix::<f64>::identity(6, 6);
    sigma0
        .view_mut((0, 0), (4, 4))
        .copy_from(&stationary_covariance(&pre, &pre_d)?);

    let mut solver = Dopri5::new(FULL_RTOL, FULL_ATOL);
    let slow = d.gamma_tilde0.max(f64::MIN_POSITIVE);
    solver.stiffness_hint = p.kappa.max(p.gamma * (1.0 + 2.0 * d.cooperativity)) / slow;

    let mut rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let s = DMatrix::from_column_slice(6, 6, y);
        let m = sys.drift(sys.omega(t));
        let ms = &m * &s;
        let out = &ms + ms.transpose() + &sys.diffusion;
        dy.copy_from_slice(out.as_slice());
    };
    let mut y = sigma0.as_slice().to_vec();
    let mut out = Vec::with_capacity(grid.len());
    integrate_through(&solver, &mut rhs, &mut y, start, &shape.breakpoints(), grid, |_, t, y| {
        let s = DMatrix::from_column_slice(6, 6, y);
        out.push(CovarianceState {
            time: t,
            matrix: 0.5 * (&s + s.transpose()),
        });
    })?;
    Ok(out)
}

/// Spin covariance `[J_x, J_y]` of the adiabatic model during a write,
/// sampled on `grid`. The two quadratures decouple, with input noise
/// `e^{-2r}` and `e^{2r}` respectively.
pub fn propagate_reduced(
    d: &DerivedParams,
    shape: &PulseShape,
    r: f64,
    grid: &[f64],
) -> Result<Vec<CovarianceState>> {
    validate_times(grid)?;
    let af = d.area_function(shape.clone())?;
    let eta = d.eta;
    let targets = [
        eta * (-2.0 * r).exp() + 1.0 - eta,
        eta * (2.0 * r).exp() + 1.0 - eta,
    ];
    let mut rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let rate = af.rate(t);
        for i in 0..2 {
            dy[i] = 2.0 * rate * (targets[i] - y[i]);
        }
    };
    let solver = Dopri5::new(REDUCED_RTOL, REDUCED_ATOL);
    let mut y = [1.0, 1.0];
    let mut out = Vec::with_capacity(grid.len());
    let start = start_time(shape, grid[0]);
    integrate_through(&solver, &mut rhs, &mut y, start, &shape.breakpoints(), grid, |_, t, y| {
        out.push(CovarianceState {
            time: t,
            matrix: DMatrix::from_diagonal(&DVector::from_column_slice(y)),
        });
    })?;
    Ok(out)
}

/// One sample of the extended spin + accumulator propagation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HomodyneSample {
    pub time: f64,
    /// Normalised `J_x` variance.
    pub spin_variance: f64,
    /// `Var(S_t) / <E|E>_t` with `S_t = int_{-inf}^t E x_out`; NaN while
    /// the oscillator has not yet switched on.
    pub output_variance: f64,
    /// `<E|E>_t`
    pub lo_norm: f64,
}

/// Exact `int E^2` over `[g0, g1]` for a linear `E`.
fn segment_norm(g0: f64, g1: f64, e0: f64, e1: f64) -> f64 {
    (g1 - g0) * (e0 * e0 + e0 * e1 + e1 * e1) / 3.0
}

/// `<E|E>` accumulated up to `t`.
fn lo_norm_until(lo: &TemporalMode, t: f64) -> f64 {
    let (g, v) = (lo.grid(), lo.values());
    let mut total = 0.0;
    for k in 1..g.len() {
        if g[k - 1] >= t {
            break;
        }
        if g[k] <= t {
            total += segment_norm(g[k - 1], g[k], v[k - 1], v[k]);
        } else {
            total += segment_norm(g[k - 1], t, v[k - 1], lo.eval(t));
            break;
        }
    }
    total
}

/// Spin variance and accumulated homodyne variance of the reduced model at
/// each of `times` (ascending).
pub fn homodyne_trajectory(
    d: &DerivedParams,
    shape: &PulseShape,
    lo: &TemporalMode,
    phase: Phase,
    r: f64,
    times: &[f64],
) -> Result<Vec<HomodyneSample>> {
    validate_times(times)?;
    let af = d.area_function(shape.clone())?;
    let eta = d.eta;
    let (input_noise, spin0) = match phase {
        Phase::Write => ((-2.0 * r).exp(), 1.0),
        Phase::Read => (1.0, (-2.0 * r).exp()),
    };
    let c_f = 2.0 * (eta * (1.0 - eta)).sqrt();

    // y = [S_JJ, S_JS, S_SS]
    let mut rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let rate = af.rate(t);
        let e = lo.eval(t);
        let c_j = (2.0 * rate * eta).sqrt();
        let d_f = (2.0 * rate * (1.0 - eta)).sqrt();
        // B = [[-c_j, -d_f], [e (1 - 2 eta), -e c_f]], Q = diag(input_noise, 1)
        let b = [[-c_j, -d_f], [e * (1.0 - 2.0 * eta), -e * c_f]];
        let q = [input_noise, 1.0];
        let bqb = |i: usize, j: usize| b[i][0] * q[0] * b[j][0] + b[i][1] * q[1] * b[j][1];
        // M = [[-rate, 0], [-e c_j, 0]]
        let (jj, js) = (y[0], y[1]);
        dy[0] = -2.0 * rate * jj + bqb(0, 0);
        dy[1] = -rate * js - e * c_j * jj + bqb(0, 1);
        dy[2] = -2.0 * e * c_j * js + bqb(1, 1);
    };

    let start = start_time(shape, times[0].min(lo.grid()[0]));
    let mut knots = shape.breakpoints();
    knots.extend_from_slice(lo.grid());
    let solver = Dopri5::new(REDUCED_RTOL, REDUCED_ATOL);
    let mut y = [spin0, 0.0, 0.0];
    let mut out = Vec::with_capacity(times.len());
    integrate_through(&solver, &mut rhs, &mut y, start, &knots, times, |_, t, y| {
        let norm = lo_norm_until(lo, t);
        out.push(HomodyneSample {
            time: t,
            spin_variance: y[0],
            output_variance: if norm > 0.0 { y[2] / norm } else { f64::NAN },
            lo_norm: norm,
        });
    })?;
    Ok(out)
}

/// Normalised homodyne variance `Var(S) / <E|E>` of the whole pulse
/// measured with `lo`.
pub fn homodyne_variance_oracle(
    d: &DerivedParams,
    shape: &PulseShape,
    lo: &TemporalMode,
    phase: Phase,
    r: f64,
) -> Result<f64> {
    let end = lo.grid()[lo.grid().len() - 1];
    let samples = homodyne_trajectory(d, shape, lo, phase, r, &[end])?;
    let v = samples[0].output_variance;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidArgument("local oscillator has zero norm".into()))
    }
}

/// Relative deviation of the full model's final `J_x` variance from the
/// adiabatic closed form, with `gamma = kappa = ratio * gamma_tilde0`.
///
/// `Omega0` and `g` are chosen so the cooperativity is `cooperativity` and
/// the static rate is `gamma_tilde0`. Returns `(full, reduced, rel_error)`.
pub fn adiabatic_deviation(
    ratio: f64,
    cooperativity: f64,
    gamma_tilde0: f64,
    duration: f64,
    r: f64,
) -> Result<(f64, f64, f64)> {
    let rate = ratio * gamma_tilde0;
    let tau = 1e-3 / rate;
    let atoms = 1_000_000u64;
    // C = G^2 / (2 kappa gamma), G^2 = g^2 N / tau
    let coupling = (2.0 * rate * rate * cooperativity * tau / atoms as f64).sqrt();
    let p = MemoryParams {
        gamma: rate,
        kappa: rate,
        tau,
        coupling,
        atoms,
        gamma0: 0.0,
        omega0: (gamma_tilde0 * rate * (1.0 + 2.0 * cooperativity)).sqrt(),
        r,
    };
    let shape = PulseShape::gaussian(duration)?;
    let d = derive(&p)?;
    let end = shape.support().1;
    let traj = propagate_full(&p, &shape, r, &[end])?;
    let full = traj[0].variance(4);
    let af: AreaFunction = d.area_function(shape)?;
    let reduced = crate::model::write_variance(&d, &af, r, end);
    Ok((full, reduced, (full - reduced).abs() / reduced))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{readout_kernel, write_kernel};
    use crate::homodyne::measured_variance;
    use crate::model::{emission_mode, write_variance};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    fn params(ratio: f64, r: f64) -> MemoryParams {
        let rate = ratio;
        let tau = 1e-3 / rate;
        let atoms = 1_000_000u64;
        let c: f64 = 2.0;
        MemoryParams {
            gamma: rate,
            kappa: rate,
            tau,
            coupling: (2.0 * rate * rate * c * tau / atoms as f64).sqrt(),
            atoms,
            gamma0: 0.0,
            omega0: (rate * (1.0 + 2.0 * c)).sqrt(),
            r,
        }
    }

    #[test]
    fn full_params_hit_requested_composites() {
        let d = derive(&params(50.0, 0.0)).unwrap();
        assert_abs_diff_eq!(d.cooperativity, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.gamma_tilde0, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn full_model_preserves_vacuum() {
        let p = params(20.0, 0.0);
        let shape = PulseShape::gaussian(1.0).unwrap();
        let traj = propagate_full(&p, &shape, 0.0, &grid(-4.0, 4.0, 17)).unwrap();
        for s in &traj {
            for i in 0..6 {
                assert_abs_diff_eq!(s.variance(i), 1.0, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn full_model_without_control_keeps_spin() {
        let p = MemoryParams {
            omega0: 1e-300,
            ..params(20.0, 1.0)
        };
        let shape = PulseShape::gaussian(1.0).unwrap();
        let traj = propagate_full(&p, &shape, 1.0, &grid(-4.0, 4.0, 9)).unwrap();
        for s in &traj {
            assert_abs_diff_eq!(s.variance(4), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(s.variance(5), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn full_model_states_are_physical() {
        let p = params(30.0, 1.0);
        let shape = PulseShape::gaussian(1.0).unwrap();
        for s in propagate_full(&p, &shape, 1.0, &grid(-5.0, 5.0, 21)).unwrap() {
            assert!(s.asymmetry() <= 1e-12);
            assert!(s.min_eigenvalue() >= -1e-9);
            assert!(s.variance(4) * s.variance(5) >= 1.0 - 1e-6);
        }
    }

    #[test]
    fn adiabatic_convergence_is_monotone() {
        let mut last = f64::INFINITY;
        for ratio in [10.0, 50.0, 200.0] {
            let (_, _, err) = adiabatic_deviation(ratio, 2.0, 1.0, 1.0, 1.0).unwrap();
            assert!(err < last, "ratio {ratio}: {err} vs {last}");
            last = err;
        }
        assert!(last <= 0.02);
    }

    #[test]
    fn reduced_matches_closed_form() {
        let d = DerivedParams::from_composites(0.8, 1.0, 1e6).unwrap();
        let shape = PulseShape::gaussian(2.0).unwrap();
        let af = d.area_function(shape.clone()).unwrap();
        let g = grid(-12.0, 12.0, 301);
        let traj = propagate_reduced(&d, &shape, 1.0, &g).unwrap();
        for s in &traj {
            assert_abs_diff_eq!(s.variance(0), write_variance(&d, &af, 1.0, s.time), epsilon = 1e-9);
            assert_abs_diff_eq!(s.variance(1), write_variance(&d, &af, -1.0, s.time), epsilon = 1e-9);
        }
    }

    #[test]
    fn reduced_step_and_sampled_shapes() {
        let d = DerivedParams::from_composites(0.9, 0.7, 1e6).unwrap();
        let shapes = [
            PulseShape::step(0.5).unwrap(),
            PulseShape::sampled(vec![-1.0, 0.0, 2.0, 3.0], vec![0.0, 1.0, 0.5, 0.0]).unwrap(),
        ];
        for shape in shapes {
            let af = d.area_function(shape.clone()).unwrap();
            let g = grid(-2.0, 6.0, 81);
            for s in propagate_reduced(&d, &shape, 0.6, &g).unwrap() {
                assert_abs_diff_eq!(s.variance(0), write_variance(&d, &af, 0.6, s.time), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn read_phase_matched_lo_matches_closed_form() {
        let d = DerivedParams::from_composites(0.8, 1.0, 1e6).unwrap();
        let shape = PulseShape::gaussian(1.0).unwrap();
        let af = d.area_function(shape.clone()).unwrap();
        let g = grid(-8.0, 8.0, 4001);
        let f = emission_mode(&af, &g).unwrap();
        let v = homodyne_variance_oracle(&d, &shape, &f, Phase::Read, 1.0).unwrap();
        let kernel = measured_variance(&readout_kernel(&d, &af, 1.0, &g).unwrap(), &f).unwrap();
        let closed = 1.0 + 0.8 * (1.0 - (-2.0f64).exp()) * ((-2.0f64).exp() - 1.0);
        assert_abs_diff_eq!(v, closed, epsilon = 1e-6);
        assert_abs_diff_eq!(v, kernel.variance, epsilon = 1e-6);
    }

    #[test]
    fn write_phase_oracle_matches_write_kernel() {
        // exercises the exponential term of the write kernel
        let d = DerivedParams::from_composites(0.7, 1.0, 1e6).unwrap();
        let shape = PulseShape::gaussian(1.0).unwrap();
        let af = d.area_function(shape.clone()).unwrap();
        let g = grid(-8.0, 8.0, 4001);
        let k = write_kernel(&d, &af, 0.8, &g).unwrap();
        for lo in [
            emission_mode(&af, &g).unwrap(),
            TemporalMode::from_fn(&g, |t| (-(t - 0.5) * (t - 0.5)).exp()).unwrap(),
        ] {
            let oracle = homodyne_variance_oracle(&d, &shape, &lo, Phase::Write, 0.8).unwrap();
            let kernel = measured_variance(&k, &lo).unwrap().variance;
            assert_abs_diff_eq!(oracle, kernel, epsilon = 1e-5);
        }
    }

    #[test]
    fn write_phase_perfect_transfer_consumes_squeezing() {
        let d = DerivedParams::from_composites(1.0, 5.0, 1e6).unwrap();
        let shape = PulseShape::gaussian(1.0).unwrap();
        let af = d.area_function(shape.clone()).unwrap();
        let g = grid(-8.0, 8.0, 4001);
        let f = emission_mode(&af, &g).unwrap();
        let v = homodyne_variance_oracle(&d, &shape, &f, Phase::Write, 1.0).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-4);
    }

    #[test]
    fn no_cloning_sum_from_oracle() {
        let d = DerivedParams::from_composites(1.0, 1.5, 1e6).unwrap();
        let shape = PulseShape::gaussian(1.0).unwrap();
        let af = d.area_function(shape.clone()).unwrap();
        let g = grid(-8.0, 8.0, 4001);
        let f = emission_mode(&af, &g).unwrap();
        let times = grid(-2.0, 2.0, 10);
        for s in homodyne_trajectory(&d, &shape, &f, Phase::Write, 0.5, &times).unwrap() {
            assert_abs_diff_eq!(s.spin_variance + s.output_variance, 1.0 + (-1.0f64).exp(), epsilon = 1e-4);
        }
    }

    #[test]
    fn trajectory_csv_layout() {
        let d = DerivedParams::from_composites(0.5, 1.0, 1e6).unwrap();
        let shape = PulseShape::gaussian(1.0).unwrap();
        let traj = propagate_reduced(&d, &shape, 0.3, &[-1.0, 0.0, 1.0]).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &traj).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "time,s00,s01,s11");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1].split(',').count(), 4);
    }

    #[test]
    fn stationary_solution_solves_lyapunov() {
        let m = DMatrix::from_row_slice(2, 2, &[-1.0, 0.5, -0.3, -2.0]);
        let d = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        let s = stationary_covariance(&m, &d).unwrap();
        let res = &m * &s + &s * m.transpose() + &d;
        assert!(res.amax() < 1e-13);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn reduced_vacuum_input_is_stationary(eta in 0.0f64..=1.0, g0 in 0.1f64..5.0) {
            let d = DerivedParams::from_composites(eta, g0, 1e6).unwrap();
            let shape = PulseShape::gaussian(1.0).unwrap();
            for s in propagate_reduced(&d, &shape, 0.0, &[-3.0, 0.0, 3.0]).unwrap() {
                prop_assert!((s.variance(0) - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn reduced_heisenberg_pairing(eta in 0.0f64..=1.0, g0 in 0.1f64..5.0, r in 0.0f64..1.5) {
            let d = DerivedParams::from_composites(eta, g0, 1e6).unwrap();
            let shape = PulseShape::gaussian(1.0).unwrap();
            for s in propagate_reduced(&d, &shape, r, &grid(-4.0, 4.0, 9)).unwrap() {
                prop_assert!(s.variance(0) * s.variance(1) >= 1.0 - 1e-6);
            }
        }

        #[test]
        fn homodyne_without_squeezing_is_shot_noise(eta in 0.0f64..=1.0, shift in -1.0f64..1.0, read in proptest::bool::ANY) {
            let d = DerivedParams::from_composites(eta, 1.0, 1e6).unwrap();
            let shape = PulseShape::gaussian(1.0).unwrap();
            let g = grid(-6.0, 6.0, 241);
            let lo = TemporalMode::from_fn(&g, |t| (-(t - shift) * (t - shift)).exp()).unwrap();
            let phase = if read { Phase::Read } else { Phase::Write };
            let v = homodyne_variance_oracle(&d, &shape, &lo, phase, 0.0).unwrap();
            prop_assert!((v - 1.0).abs() < 1e-9);
        }
    }
}
