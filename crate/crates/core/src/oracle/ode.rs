//! Dormand–Prince 5(4) with adaptive step size.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// b - b*, the embedded fourth-order error weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Fastest rate over slowest rate of the system, reported on step-size
    /// underflow.
    pub stiffness_hint: f64,
}

impl Dopri5 {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            max_steps: 2_000_000,
            stiffness_hint: f64::NAN,
        }
    }

    fn underflow(&self, t: f64, h: f64) -> Error {
        Error::Stiffness {
            t,
            step: h,
            ratio: self.stiffness_hint,
        }
    }

    /// Advance `y` from `t0` to `t1` in place. `h` carries the step size
    /// between calls; pass `0.0` to let the first call pick one.
    pub fn advance<F>(&self, rhs: &mut F, t0: f64, t1: f64, y: &mut [f64], h: &mut f64) -> Result<usize>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let n = y.len();
        let span = t1 - t0;
        if span <= 0.0 {
            return Ok(0);
        }
        let mut k = vec![vec![0.0; n]; 7];
        let mut tmp = vec![0.0; n];
        let mut y_new = vec![0.0; n];

        let mut t = t0;
        if !(*h > 0.0) {
            *h = span.min(1e-3 * span.max(1e-3));
        }
        rhs(t, y, &mut k[0]);
        let mut steps = 0usize;
        let mut last_rejected = false;

        while t < t1 {
            if steps >= self.max_steps {
                return Err(self.underflow(t, *h));
            }
            let mut step = h.min(t1 - t);
            let final_step = t + step >= t1 || (t1 - (t + step)) < 1e-12 * span;
            if final_step {
                step = t1 - t;
            }
            if step < 1e-14 * t.abs().max(1.0) && !final_step {
                return Err(self.underflow(t, step));
            }

            for i in 0..n {
                tmp[i] = y[i] + step * A21 * k[0][i];
            }
            rhs(t + C2 * step, &tmp, &mut k[1]);
            for i in 0..n {
                tmp[i] = y[i] + step * (A31 * k[0][i] + A32 * k[1][i]);
            }
            rhs(t + C3 * step, &tmp, &mut k[2]);
            for i in 0..n {
                tmp[i] = y[i] + step * (A41 * k[0][i] + A42 * k[1][i] + A43 * k[2][i]);
            }
            rhs(t + C4 * step, &tmp, &mut k[3]);
            for i in 0..n {
                tmp[i] = y[i]
                    + step * (A51 * k[0][i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i]);
            }
            rhs(t + C5 * step, &tmp, &mut k[4]);
            for i in 0..n {
                tmp[i] = y[i]
                    + step
                        * (A61 * k[0][i] + A62 * k[1][i] + A63 * k[2][i] + A64 * k[3][i] + A65 * k[4][i]);
            }
            rhs(t + step, &tmp, &mut k[5]);
            for i in 0..n {
                y_new[i] = y[i]
                    + step * (B1 * k[0][i] + B3 * k[2][i] + B4 * k[3][i] + B5 * k[4][i] + B6 * k[5][i]);
            }
            rhs(t + step, &y_new, &mut k[6]);

            let mut err = 0.0;
            for i in 0..n {
                let e = step
                    * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i]
                        + E7 * k[6][i]);
                let scale = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                err += (e / scale).powi(2);
            }
            let err = (err / n as f64).sqrt();
            steps += 1;

            if !err.is_finite() {
                *h = 0.1 * step;
                last_rejected = true;
                continue;
            }
            if err <= 1.0 {
                t = if final_step { t1 } else { t + step };
                y.copy_from_slice(&y_new);
                k.swap(0, 6);
                let mut factor = if err == 0.0 { 5.0 } else { 0.9 * err.powf(-0.2) };
                factor = factor.clamp(0.2, 5.0);
                if last_rejected {
                    factor = factor.min(1.0);
                }
                // keep the carried step from collapsing onto a short final step
                if !final_step {
                    *h = step * factor;
                } else {
                    *h = h.max(step * factor);
                }
                last_rejected = false;
            } else {
                let factor = (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                *h = step * factor;
                last_rejected = true;
            }
        }
        Ok(steps)
    }
}
