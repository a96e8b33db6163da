//! Homogeneous solutions of `q'' + eta q' + omega0^2 q = 0`.
//!
//! `a1` starts from `(1, 0)` and `a2` from `(0, 1)`. Everything else in the
//! crate is built from these two functions and their derivatives.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Relative band around `omega0^2 = eta^2 / 4` tagged as critical damping.
pub const CRITICAL_BAND: f64 = 1e-8;

/// Physical constants of the main oscillator and its spin coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Oscillator mass `M`.
    pub mass: f64,
    /// Bare (renormalized) angular frequency `omega0`.
    pub omega0: f64,
    /// Damping rate `eta`.
    pub eta: f64,
    /// Field strength `B`; the wells sit at `±B / omega0^2`.
    pub field: f64,
    pub hbar: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Underdamped,
    Critical,
    Overdamped,
}

impl ModelParams {
    pub fn new(mass: f64, omega0: f64, eta: f64, field: f64, hbar: f64) -> Result<Self> {
        let p = Self { mass, omega0, eta, field, hbar };
        p.validate()?;
        Ok(p)
    }

    /// Builds parameters from the well displacement `d` instead of the field.
    pub fn with_displacement(mass: f64, omega0: f64, eta: f64, d: f64, hbar: f64) -> Result<Self> {
        Self::new(mass, omega0, eta, d * omega0 * omega0, hbar)
    }

    /// `hbar = M = 1`, `omega0 = 2 pi`, `eta = 2`, `d = 3`.
    pub fn figure_defaults() -> Self {
        let omega0 = std::f64::consts::TAU;
        Self { mass: 1.0, omega0, eta: 2.0, field: 3.0 * omega0 * omega0, hbar: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(domain(format!("{name} must be finite and > 0, got {v}")))
            }
        };
        positive("mass", self.mass)?;
        positive("omega0", self.omega0)?;
        positive("hbar", self.hbar)?;
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return Err(domain(format!("eta must be finite and >= 0, got {}", self.eta)));
        }
        if !self.field.is_finite() || !self.displacement().is_finite() {
            return Err(domain(format!("field must give a finite displacement, got {}", self.field)));
        }
        Ok(())
    }

    /// `omega0^2 - eta^2 / 4`, the squared damped frequency (negative when overdamped).
    ///
    /// Factored so it stays accurate near critical damping.
    pub fn damped_frequency_sq(&self) -> f64 {
        (self.omega0 - 0.5 * self.eta) * (self.omega0 + 0.5 * self.eta)
    }

    pub fn regime(&self) -> Regime {
        let disc = self.damped_frequency_sq();
        if disc.abs() < CRITICAL_BAND * self.omega0 * self.omega0 {
            Regime::Critical
        } else if disc > 0.0 {
            Regime::Underdamped
        } else {
            Regime::Overdamped
        }
    }

    /// Real damped frequency `omega`, when the oscillator is underdamped.
    pub fn damped_frequency(&self) -> Option<f64> {
        match self.regime() {
            Regime::Underdamped => Some(self.damped_frequency_sq().sqrt()),
            _ => None,
        }
    }

    /// Well displacement `d = B / omega0^2`.
    pub fn displacement(&self) -> f64 {
        self.field / (self.omega0 * self.omega0)
    }

    /// Ground-state position variance `hbar / (2 M omega0)`.
    pub fn ground_variance(&self) -> f64 {
        self.hbar / (2.0 * self.mass * self.omega0)
    }
}

/// Well displacement `d = B / omega0^2`.
pub fn displacement(params: &ModelParams) -> f64 {
    params.displacement()
}

/// `a1, a2` and their time derivatives at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoeffPair {
    pub a1: f64,
    pub a2: f64,
    pub a1dot: f64,
    pub a2dot: f64,
}

impl CoeffPair {
    /// `a1 a2dot - a1dot a2`.
    pub fn wronskian(&self) -> f64 {
        self.a1.mul_add(self.a2dot, -(self.a1dot * self.a2))
    }
}

/// `e^{-eta t/2} cos(omega t)` and `e^{-eta t/2} sin(omega t) / omega`, with the
/// hyperbolic continuation for imaginary `omega` and a power series when
/// `|omega| t` is small.
pub(crate) fn damped_cos_sin(params: &ModelParams, t: f64) -> (f64, f64) {
    let half_eta = 0.5 * params.eta;
    let disc = params.damped_frequency_sq();
    let x = disc * t * t;
    if x.abs() < 1.0 {
        let (c, s) = cos_sin_series(x);
        let env = (-half_eta * t).exp();
        (env * c, env * s * t)
    } else if disc > 0.0 {
        let w = disc.sqrt();
        let env = (-half_eta * t).exp();
        let (sin, cos) = (w * t).sin_cos();
        (env * cos, env * sin / w)
    } else {
        // slow and fast decaying exponentials; kappa < eta/2 since omega0 > 0
        let kappa = (-disc).sqrt();
        let slow = (-(half_eta - kappa) * t).exp();
        let fast = (-(half_eta + kappa) * t).exp();
        let c = 0.5 * (slow + fast);
        let s = slow * (-(-2.0 * kappa * t).exp_m1()) / (2.0 * kappa);
        (c, s)
    }
}

/// `cos(sqrt(x))` and `sin(sqrt(x)) / sqrt(x)` as entire series in `x`, for `|x| < 1`.
fn cos_sin_series(x: f64) -> (f64, f64) {
    let mut c = 1.0;
    let mut s = 1.0;
    let mut ct = 1.0;
    let mut st = 1.0;
    for k in 1..30 {
        let k = k as f64;
        ct *= -x / ((2.0 * k - 1.0) * (2.0 * k));
        st *= -x / ((2.0 * k) * (2.0 * k + 1.0));
        c += ct;
        s += st;
        if ct.abs() < 1e-18 && st.abs() < 1e-18 {
            break;
        }
    }
    (c, s)
}

/// Homogeneous-solution coefficients at time `t >= 0`.
pub fn coeffs(params: &ModelParams, t: f64) -> Result<CoeffPair> {
    params.validate()?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(domain(format!("time must be finite and >= 0, got {t}")));
    }
    let (ec, es) = damped_cos_sin(params, t);
    let half_eta = 0.5 * params.eta;
    Ok(CoeffPair {
        a1: ec + half_eta * es,
        a2: es,
        a1dot: -params.omega0 * params.omega0 * es,
        a2dot: ec - half_eta * es,
    })
}

/// `a1 a2dot - a1dot a2`, which should equal `e^{-eta t}`.
pub fn wronskian(params: &ModelParams, t: f64) -> Result<f64> {
    Ok(coeffs(params, t)?.wronskian())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    fn params(omega0: f64, eta: f64) -> ModelParams {
        ModelParams::new(1.0, omega0, eta, 0.0, 1.0).unwrap()
    }

    #[test]
    fn initial_conditions() {
        for eta in [0.0, 1.0, 2.0 * TAU, 30.0] {
            let c = coeffs(&params(TAU, eta), 0.0).unwrap();
            assert_eq!((c.a1, c.a2, c.a1dot, c.a2dot), (1.0, 0.0, 0.0, 1.0));
        }
    }

    #[test]
    fn undamped_rotation() {
        let c = coeffs(&params(1.0, 0.0), FRAC_PI_2).unwrap();
        assert!(c.a1.abs() < 1e-15);
        assert_relative_eq!(c.a2, 1.0, epsilon = 1e-15);
        assert_relative_eq!(c.a2dot, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn wronskian_examples() {
        assert_eq!(wronskian(&params(TAU, 2.0), 0.0).unwrap(), 1.0);
        assert_relative_eq!(wronskian(&params(TAU, 2.0), 1.0).unwrap(), (-2.0f64).exp(), max_relative = 1e-13);
        assert_relative_eq!((-2.0f64).exp(), 0.135_335, epsilon = 5e-7);
        for t in [0.3, 7.0, 123.0] {
            assert_relative_eq!(wronskian(&params(3.0, 0.0), t).unwrap(), 1.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn displacement_examples() {
        let p = ModelParams::new(1.0, TAU, 2.0, 3.0 * TAU * TAU, 1.0).unwrap();
        assert_relative_eq!(displacement(&p), 3.0, max_relative = 1e-15);
        assert_eq!(displacement(&params(TAU, 2.0)), 0.0);
        let p = ModelParams::new(1.0, 1.7, 0.4, 1.7 * 1.7, 1.0).unwrap();
        assert_eq!(displacement(&p), 1.0);
        assert_relative_eq!(ModelParams::figure_defaults().displacement(), 3.0, max_relative = 1e-15);
    }

    #[test]
    fn regime_tags() {
        assert_eq!(params(1.0, 1.0).regime(), Regime::Underdamped);
        assert_eq!(params(1.0, 2.0).regime(), Regime::Critical);
        assert_eq!(params(1.0, 2.0 * (1.0 + 1e-10)).regime(), Regime::Critical);
        assert_eq!(params(1.0, 3.0).regime(), Regime::Overdamped);
        assert!(params(1.0, 3.0).damped_frequency().is_none());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ModelParams::new(0.0, 1.0, 0.0, 0.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, -1.0, 0.0, 0.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, -0.1, 0.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, 0.1, f64::NAN, 1.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, 0.1, 0.0, 0.0).is_err());
        assert!(coeffs(&params(1.0, 0.5), -1e-9).is_err());
        assert!(coeffs(&params(1.0, 0.5), f64::INFINITY).is_err());
    }

    #[test]
    fn critical_switch_is_continuous() {
        let w0 = 2.5;
        // omega0 t <= 2: beyond that the true sensitivity to eta alone exceeds 1e-5
        for t in [0.01, 0.3, 0.5, 0.8] {
            let lo = coeffs(&params(w0, 2.0 * w0 * (1.0 - 1e-6)), t).unwrap();
            let mid = coeffs(&params(w0, 2.0 * w0), t).unwrap();
            let hi = coeffs(&params(w0, 2.0 * w0 * (1.0 + 1e-6)), t).unwrap();
            for (x, y) in [(lo.a1, hi.a1), (lo.a2, hi.a2), (lo.a1, mid.a1), (mid.a2dot, hi.a2dot)] {
                assert!((x - y).abs() <= 1e-5 * x.abs().max(y.abs()), "t={t}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn no_jump_across_critical_switch() {
        // the gap across eta = 2 omega0 must shrink linearly with the offset
        let w0 = 2.5;
        for t in [0.5, 4.0, 12.0] {
            let gap = |delta: f64| {
                let lo = coeffs(&params(w0, 2.0 * w0 * (1.0 - delta)), t).unwrap().a1;
                let hi = coeffs(&params(w0, 2.0 * w0 * (1.0 + delta)), t).unwrap().a1;
                (hi - lo).abs()
            };
            let ratio = gap(1e-6) / gap(5e-7);
            assert!((ratio - 2.0).abs() < 1e-2, "t={t}: ratio {ratio}");
        }
    }

    #[test]
    fn critical_closed_form() {
        // eta = 2 omega0: a1 = (1 + omega0 t) e^{-omega0 t}, a2 = t e^{-omega0 t}
        let w0 = 1.3;
        let p = params(w0, 2.0 * w0);
        for t in [0.0, 0.5, 2.0, 40.0] {
            let c = coeffs(&p, t).unwrap();
            let e = (-w0 * t).exp();
            assert_relative_eq!(c.a1, (1.0 + w0 * t) * e, max_relative = 1e-14);
            assert_relative_eq!(c.a2, t * e, max_relative = 1e-14);
        }
    }

    #[test]
    fn overdamped_long_time_stays_finite() {
        let p = params(1.0, 50.0);
        let c = coeffs(&p, 5000.0).unwrap();
        assert!(c.a1.is_finite() && c.a1 > 0.0);
        assert!(c.a2.is_finite() && c.a2 > 0.0);
    }

    #[test]
    fn a1dot_matches_independent_derivative() {
        // differentiate a1 = e^{-eta t/2}(cos wt + eta/(2w) sin wt) by hand
        for (w0, eta) in [(TAU, 2.0), (1.0, 0.3), (4.0, 7.9)] {
            let p = params(w0, eta);
            let w = p.damped_frequency().unwrap();
            for t in [0.1, 1.0, 3.3, 9.0] {
                let env = (-0.5 * eta * t).exp();
                let (s, c) = (w * t).sin_cos();
                let h = 0.5 * eta;
                let d = env * (-h * (c + h / w * s) + (-w * s + h * c));
                let got = coeffs(&p, t).unwrap().a1dot;
                assert!((got - d).abs() <= 1e-12 * d.abs().max(1e-300) + 1e-15 * env, "{got} vs {d}");
            }
        }
    }

    #[test]
    fn underdamped_envelope() {
        let p = params(PI, 1.5);
        let w = p.damped_frequency().unwrap();
        for i in 0..400 {
            let t = i as f64 * 0.05;
            let c = coeffs(&p, t).unwrap();
            assert!(c.a1.abs() <= (-0.75 * t).exp() * (1.0 + 0.75 / w) + 1e-15);
        }
    }
}
