//! Adaptive Dormand–Prince 5(4) integration of the driven damped oscillator
//! `q'' + eta q' + omega0^2 q = f(t)`.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::kernel::ModelParams;

/// Forcing term `f(t)` on the right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Forcing {
    None,
    Constant {
        value: f64,
    },
    Cos {
        amplitude: f64,
        omega: f64,
    },
    /// `amplitude * sin(omega t) / omega`.
    SinOverOmega {
        amplitude: f64,
        omega: f64,
    },
}

impl Forcing {
    fn eval(&self, t: f64) -> f64 {
        match *self {
            Forcing::None => 0.0,
            Forcing::Constant { value } => value,
            Forcing::Cos { amplitude, omega } => amplitude * (omega * t).cos(),
            Forcing::SinOverOmega { amplitude, omega } => amplitude * (omega * t).sin() / omega,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub q: Vec<f64>,
    pub qdot: Vec<f64>,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct OdeTolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_steps: usize,
}

impl Default for OdeTolerance {
    fn default() -> Self {
        Self { rel: 1e-12, abs: 1e-12, max_steps: 5_000_000 }
    }
}

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
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type State = [f64; 2];

fn axpy(y: State, h: f64, terms: &[(f64, State)]) -> State {
    let mut out = y;
    for &(c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

/// Integrates from `(q0, qdot0)` at `t = 0` and reports the state at each
/// requested time. Steps are clipped to land on output times exactly.
pub fn ode_oracle(
    params: &ModelParams,
    forcing: Forcing,
    initial: (f64, f64),
    t_grid: &[f64],
    tol: OdeTolerance,
) -> Result<Trajectory> {
    params.validate()?;
    if t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(domain("output times must be finite, >= 0 and non-decreasing"));
    }
    let w0sq = params.omega0 * params.omega0;
    let eta = params.eta;
    let rhs = |t: f64, y: State| -> State { [y[1], forcing.eval(t) - eta * y[1] - w0sq * y[0]] };

    let mut traj = Trajectory {
        t: Vec::with_capacity(t_grid.len()),
        q: Vec::with_capacity(t_grid.len()),
        qdot: Vec::with_capacity(t_grid.len()),
        steps: 0,
    };
    let mut t = 0.0;
    let mut y: State = [initial.0, initial.1];
    let scale = params.omega0.max(eta).max(1e-300);
    let mut h = 1e-3 / scale;
    let mut k1 = rhs(t, y);

    for &target in t_grid {
        while t < target {
            if traj.steps >= tol.max_steps {
                return Err(Error::OracleFailure(format!("step budget exhausted at t = {t}")));
            }
            let last = t + h >= target;
            let step = if last { target - t } else { h };
            if step < 1e-14 * t.max(1.0) && !last {
                return Err(Error::OracleFailure(format!("step size underflow at t = {t}")));
            }
            let k2 = rhs(t + C2 * step, axpy(y, step, &[(A21, k1)]));
            let k3 = rhs(t + C3 * step, axpy(y, step, &[(A31, k1), (A32, k2)]));
            let k4 = rhs(t + C4 * step, axpy(y, step, &[(A41, k1), (A42, k2), (A43, k3)]));
            let k5 = rhs(t + C5 * step, axpy(y, step, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]));
            let k6 = rhs(t + step, axpy(y, step, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]));
            let y_new = axpy(y, step, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)]);
            let k7 = rhs(t + step, y_new);
            let err_vec = axpy([0.0, 0.0], step, &[(E1, k1), (E3, k3), (E4, k4), (E5, k5), (E6, k6), (E7, k7)]);
            let err = (0..2)
                .map(|i| err_vec[i].abs() / (tol.abs + tol.rel * y[i].abs().max(y_new[i].abs())))
                .fold(0.0, f64::max);
            if !err.is_finite() {
                return Err(Error::OracleFailure(format!("non-finite error estimate at t = {t}")));
            }
            traj.steps += 1;
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                t = if last { target } else { t + step };
                y = y_new;
                k1 = k7;
                // a clipped final step says nothing about the nominal size
                if !last {
                    h = step * factor;
                }
            } else {
                h = step * factor;
            }
        }
        traj.t.push(target);
        traj.q.push(y[0]);
        traj.qdot.push(y[1]);
    }
    Ok(traj)
}
