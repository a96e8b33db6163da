//! Ohmic bath: discretization, per-mode response coefficients and the
//! Brownian width they add to the main coordinate.
//!
//! Frequencies are post-renormalization: the counter-term cancels the bath
//! frequency shift exactly, so the main oscillator always runs at `omega0`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::kernel::{coeffs, ModelParams, Regime};
use crate::numerics::compensated_sum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BathOscillator {
    pub mass: f64,
    pub omega: f64,
    /// Coupling `c_j` to the main coordinate.
    pub coupling: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BathScheme {
    UniformFrequency,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BathDiscretization {
    pub oscillators: Vec<BathOscillator>,
    pub omega_cutoff: f64,
    pub spacing: f64,
    pub scheme: BathScheme,
}

impl BathDiscretization {
    pub fn len(&self) -> usize {
        self.oscillators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.oscillators.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WidthMethod {
    Sum,
    AsymptoticClosedForm,
    ThermalSum,
}

/// Variance `<(sum_j xi_j)^2>` contributed by the bath.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BrownianWidth {
    pub sigma_xi_sq: f64,
    pub method: WidthMethod,
    /// Evaluation time; `None` for the `t -> infinity` limit.
    pub t: Option<f64>,
}

/// Uniform-frequency Ohmic bath with `n` unit-mass modes at `(j - 1/2) dw`.
///
/// Couplings follow `c_j^2 = (2 eta M / pi) m_j omega_j^2 dw`, i.e. the Ohmic
/// density `rho = 1 / dw`. With `eta = 0` the couplings vanish.
pub fn build_ohmic_bath(params: &ModelParams, n: usize, omega_cutoff: f64) -> Result<BathDiscretization> {
    params.validate()?;
    if n < 2 {
        return Err(domain(format!("bath needs at least 2 oscillators, got {n}")));
    }
    if !(omega_cutoff.is_finite() && omega_cutoff > 0.0) {
        return Err(domain(format!("cutoff must be finite and > 0, got {omega_cutoff}")));
    }
    let spacing = omega_cutoff / n as f64;
    let strength = 2.0 * params.eta * params.mass / PI;
    let oscillators = (0..n)
        .map(|j| {
            let omega = (j as f64 + 0.5) * spacing;
            let mass = 1.0;
            let coupling = (strength * mass * omega * omega * spacing).sqrt();
            BathOscillator { mass, omega, coupling }
        })
        .collect();
    Ok(BathDiscretization { oscillators, omega_cutoff, spacing, scheme: BathScheme::UniformFrequency })
}

/// Response of the main coordinate to unit initial displacement (`b1`) and
/// unit initial velocity (`b2`) of one bath mode, starting from rest.
///
/// Each is the steady driven response minus the homogeneous solution that
/// cancels it at `t = 0`, which keeps every term real in all damping regimes.
pub fn bath_coeffs(params: &ModelParams, osc: &BathOscillator, t: f64) -> Result<(f64, f64)> {
    let a = coeffs(params, t)?;
    if osc.coupling == 0.0 {
        return Ok((0.0, 0.0));
    }
    if !(osc.omega.is_finite() && osc.omega > 0.0) {
        return Err(domain(format!("bath frequency must be > 0, got {}", osc.omega)));
    }
    let w0sq = params.omega0 * params.omega0;
    let wj = osc.omega;
    let detune = w0sq - wj * wj;
    let friction = params.eta * wj;
    let denom = detune * detune + friction * friction;
    if denom == 0.0 {
        return Err(domain("undamped bath mode on exact resonance has no bounded response"));
    }
    let force = -osc.coupling / params.mass;
    let (sin, cos) = (wj * t).sin_cos();

    // forcing force * cos(wj t)
    let cos_amp = force * detune / denom;
    let sin_amp = force * friction / denom;
    let b1 = cos_amp * cos + sin_amp * sin - cos_amp * a.a1 - sin_amp * wj * a.a2;

    // forcing force * sin(wj t) / wj
    let p0 = -force * params.eta / denom;
    let v0 = force * detune / denom;
    let b2 = force * (detune * sin / wj - params.eta * cos) / denom - p0 * a.a1 - v0 * a.a2;

    Ok((b1, b2))
}

/// `coth(hbar omega / 2 kT)`; exactly one at zero temperature.
pub fn thermal_factor(hbar: f64, omega: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        return 1.0;
    }
    let x = hbar * omega / (2.0 * temperature);
    if x > 20.0 {
        // coth(x) - 1 < 1e-17
        1.0
    } else {
        1.0 / x.tanh()
    }
}

/// Brownian width from the explicit mode sum, optionally with the thermal
/// `coth` factor. `temperature` is `k_B T` in energy units.
///
/// Mode terms are evaluated in parallel and reduced in index order with
/// compensated summation, so the result is independent of thread count.
pub fn sigma_xi_sq_sum(
    params: &ModelParams,
    bath: &BathDiscretization,
    t: f64,
    temperature: f64,
) -> Result<BrownianWidth> {
    if !(temperature.is_finite() && temperature >= 0.0) {
        return Err(domain(format!("temperature must be finite and >= 0, got {temperature}")));
    }
    let terms = bath
        .oscillators
        .par_iter()
        .map(|osc| {
            let (b1, b2) = bath_coeffs(params, osc, t)?;
            let spread = b1 * b1 + osc.omega * osc.omega * b2 * b2;
            Ok(0.5 * spread * params.hbar / (osc.mass * osc.omega)
                * thermal_factor(params.hbar, osc.omega, temperature))
        })
        .collect::<Result<Vec<f64>>>()?;
    let method = if temperature > 0.0 { WidthMethod::ThermalSum } else { WidthMethod::Sum };
    Ok(BrownianWidth { sigma_xi_sq: compensated_sum(&terms), method, t: Some(t) })
}

fn require_underdamped(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    match (params.regime(), params.damped_frequency()) {
        (Regime::Underdamped, Some(w)) if params.eta > 0.0 => Ok(w),
        (Regime::Underdamped, Some(_)) => {
            Err(Error::UnsupportedRegime("the long-time Brownian width needs eta > 0".into()))
        }
        (r, _) => Err(Error::UnsupportedRegime(format!(
            "long-time Brownian width needs a real damped frequency, regime is {r:?}"
        ))),
    }
}

/// Long-time Brownian width of the continuum Ohmic bath:
/// `hbar / (2 pi omega M) * (pi/2 + atan((omega^2 - eta^2/4) / (eta omega)))`.
pub fn sigma_xi_sq_asymptotic(params: &ModelParams) -> Result<BrownianWidth> {
    let w = require_underdamped(params)?;
    let eta = params.eta;
    let value =
        params.hbar / (2.0 * PI * w * params.mass) * (0.5 * PI + ((w * w - 0.25 * eta * eta) / (eta * w)).atan());
    Ok(BrownianWidth { sigma_xi_sq: value, method: WidthMethod::AsymptoticClosedForm, t: None })
}

/// Same limit with the frequency integral truncated at `omega_cutoff`; this
/// is what a discretized bath with that cutoff converges to.
pub fn sigma_xi_sq_asymptotic_truncated(params: &ModelParams, omega_cutoff: f64) -> Result<BrownianWidth> {
    let w = require_underdamped(params)?;
    if !(omega_cutoff.is_finite() && omega_cutoff > 0.0) {
        return Err(domain(format!("cutoff must be finite and > 0, got {omega_cutoff}")));
    }
    let eta = params.eta;
    let centre = w * w - 0.25 * eta * eta;
    let scale = eta * w;
    let upper = omega_cutoff * omega_cutoff;
    let value =
        params.hbar / (2.0 * PI * w * params.mass) * (((upper - centre) / scale).atan() + (centre / scale).atan());
    Ok(BrownianWidth { sigma_xi_sq: value, method: WidthMethod::AsymptoticClosedForm, t: None })
}

/// Weak-damping approximation `hbar / (2 omega M)` of the long-time width.
pub fn sigma_xi_sq_weak_damping(params: &ModelParams) -> Result<f64> {
    let w = params
        .damped_frequency()
        .ok_or_else(|| Error::UnsupportedRegime("weak-damping width needs a real damped frequency".into()))?;
    Ok(params.hbar / (2.0 * w * params.mass))
}
