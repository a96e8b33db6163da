//! Independent numerical oracles for the closed forms.
//!
//! Comparisons only ever run one way: closed forms are checked against the
//! oracles here, never the reverse.

mod eigenbasis;
mod ode;
mod schrodinger;

use std::f64::consts::PI;

use serde::Serialize;

pub use eigenbasis::{eigenfunction, eigenfunction_orthonormality, OrthonormalityReport, SINGULAR_A2};
pub use ode::{ode_oracle, Forcing, OdeTolerance, Trajectory};
pub use schrodinger::{residual_convergence, schrodinger_residual, ResidualGrid, ResidualReport, COARSE_RESIDUAL};

use crate::bath::{bath_coeffs, build_ohmic_bath, sigma_xi_sq_asymptotic, sigma_xi_sq_sum, BathOscillator};
use crate::error::{domain, Result};
use crate::kernel::{coeffs, ModelParams};
use crate::numerics::{gaussian_density, integrate};
use crate::wavepacket::{branch_densities, BlochVector, GridSpec};

/// `(eta hbar / 2 pi M) * int_0^inf du / ((omega0^2 - u)^2 + eta^2 u)`, by
/// adaptive quadrature after mapping `u = omega0^2 s / (1 - s)` onto `[0, 1]`.
pub fn asymptotic_width_quadrature(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    if params.eta <= 0.0 {
        return Err(domain("the long-time width integral needs eta > 0"));
    }
    let w0sq = params.omega0 * params.omega0;
    let eta_sq = params.eta * params.eta;
    let mapped = |s: f64| {
        let u = 1.0 - 2.0 * s;
        1.0 / (w0sq * u * u + eta_sq * s * (1.0 - s))
    };
    let q = integrate(mapped, 0.0, 1.0, 0.0, 1e-13)?;
    Ok(params.eta * params.hbar / (2.0 * PI * params.mass) * q.value)
}

/// Continuum Brownian width at time `t` with the frequency integral cut at
/// `omega_cutoff`: `(eta hbar / pi M) int dw w (M/c)^2 (b1^2 + w^2 b2^2)`.
pub fn brownian_width_quadrature(params: &ModelParams, t: f64, omega_cutoff: f64) -> Result<f64> {
    if !(omega_cutoff.is_finite() && omega_cutoff > 0.0) {
        return Err(domain(format!("cutoff must be finite and > 0, got {omega_cutoff}")));
    }
    // coupling c = M makes (M/c)^2 = 1
    let unit = |omega: f64| BathOscillator { mass: 1.0, omega, coupling: params.mass };
    let integrand = |omega: f64| {
        if omega == 0.0 {
            return 0.0;
        }
        match bath_coeffs(params, &unit(omega), t) {
            Ok((b1, b2)) => omega * (b1 * b1 + omega * omega * b2 * b2),
            Err(_) => f64::NAN,
        }
    };
    let q = integrate(integrand, 0.0, omega_cutoff, 0.0, 1e-11)?;
    Ok(params.eta * params.hbar / (PI * params.mass) * q.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvolutionReport {
    pub t: f64,
    pub sigma_xi_sq: f64,
    pub max_abs_error: f64,
    pub peak_density: f64,
}

/// Convolves the bath-free branch densities with a centred Gaussian of
/// variance `sigma_xi_sq` by trapezoid quadrature and compares with the
/// closed form evaluated at `sigma_Q^2 + sigma_xi^2`.
pub fn convolution_identity(
    params: &ModelParams,
    spin: &BlochVector,
    sigma_xi_sq: f64,
    t: f64,
    q_values: &[f64],
) -> Result<ConvolutionReport> {
    if !(sigma_xi_sq > 0.0 && sigma_xi_sq.is_finite()) {
        return Err(domain("convolution needs a positive Brownian variance"));
    }
    let packet_sq = crate::wavepacket::sigma_Q_sq(params, t)?;
    let sd_xi = sigma_xi_sq.sqrt();
    let step = packet_sq.sqrt().min(sd_xi) / 24.0;
    let reach = 14.0 * sd_xi;
    let n = (2.0 * reach / step).ceil() as usize;
    let step = 2.0 * reach / n as f64;

    let mut max_abs_error: f64 = 0.0;
    let mut peak_density: f64 = 0.0;
    for &q in q_values {
        let mut conv = 0.0;
        for k in 0..=n {
            let xi = -reach + k as f64 * step;
            let w = if k == 0 || k == n { 0.5 } else { 1.0 };
            let (p, m) = branch_densities(params, spin, 0.0, q - xi, t)?;
            conv += w * (p + m) * gaussian_density(xi, 0.0, sigma_xi_sq);
        }
        conv *= step;
        let (p, m) = branch_densities(params, spin, sigma_xi_sq, q, t)?;
        max_abs_error = max_abs_error.max((conv - (p + m)).abs());
        peak_density = peak_density.max(p + m);
    }
    Ok(ConvolutionReport { t, sigma_xi_sq, max_abs_error, peak_density })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
}

impl Check {
    fn below(name: &str, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound, passed: value <= bound }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub checks: Vec<Check>,
    pub residual_levels: Vec<ResidualReport>,
    pub passed: bool,
}

/// Runs a compact version of every oracle on the figure parameter set.
pub fn run_suite() -> Result<SuiteReport> {
    let params = ModelParams::figure_defaults();
    let mut checks = Vec::new();

    let times: Vec<f64> = (0..=100).map(|i| i as f64 * 0.1).collect();
    let a1 = ode_oracle(&params, Forcing::None, (1.0, 0.0), &times, OdeTolerance::default())?;
    let a2 = ode_oracle(&params, Forcing::None, (0.0, 1.0), &times, OdeTolerance::default())?;
    let mut coeff_err: f64 = 0.0;
    for (i, &t) in times.iter().enumerate() {
        let c = coeffs(&params, t)?;
        coeff_err = coeff_err.max((c.a1 - a1.q[i]).abs()).max((c.a2 - a2.q[i]).abs());
    }
    checks.push(Check::below("coefficients-vs-ode", coeff_err, 1e-8));

    let osc = BathOscillator { mass: 1.0, omega: 1.0, coupling: 1.0 };
    let force = -osc.coupling / params.mass;
    let b1 = ode_oracle(
        &params,
        Forcing::Cos { amplitude: force, omega: 1.0 },
        (0.0, 0.0),
        &times,
        OdeTolerance::default(),
    )?;
    let b2 = ode_oracle(
        &params,
        Forcing::SinOverOmega { amplitude: force, omega: 1.0 },
        (0.0, 0.0),
        &times,
        OdeTolerance::default(),
    )?;
    let mut bath_err: f64 = 0.0;
    for (i, &t) in times.iter().enumerate() {
        let (x, y) = bath_coeffs(&params, &osc, t)?;
        bath_err = bath_err.max((x - b1.q[i]).abs()).max((y - b2.q[i]).abs());
    }
    checks.push(Check::below("bath-coefficients-vs-ode", bath_err, 1e-8));

    let mut wr: f64 = 0.0;
    for k in 0..1000 {
        let t = 1e-3 * (1e4f64).powf(k as f64 / 999.0);
        let w = crate::kernel::wronskian(&params, t)?;
        let exact = (-params.eta * t).exp();
        wr = wr.max(((w - exact) / exact).abs());
    }
    checks.push(Check::below("wronskian-relative", wr, 1e-10));

    let closed = sigma_xi_sq_asymptotic(&params)?.sigma_xi_sq;
    let quad = asymptotic_width_quadrature(&params)?;
    checks.push(Check::below("asymptotic-width-vs-quadrature", ((closed - quad) / quad).abs(), 1e-3));

    let cutoff = 50.0 * params.omega0;
    let bath = build_ohmic_bath(&params, 4096, cutoff)?;
    let t_long = 20.0 / params.eta;
    let sum = sigma_xi_sq_sum(&params, &bath, t_long, 0.0)?.sigma_xi_sq;
    let integral = brownian_width_quadrature(&params, t_long, cutoff)?;
    checks.push(Check::below("bath-sum-vs-integral", ((sum - integral) / integral).abs(), 0.02));

    let base = ResidualGrid { h: 0.02, dt: 2e-4, t_samples: vec![0.5, 1.0, 1.5], half_width_sigmas: 8.0 };
    let residual_levels = residual_convergence(&params, &base, 3)?;
    for r in residual_levels.iter().skip(1) {
        let order = r.order_estimate.unwrap_or(f64::NAN);
        checks.push(Check::below("residual-order-deviation", (order - 2.0).abs(), 0.2));
    }

    let window = GridSpec::new(-10.0, 10.0, 20_001)?;
    let ortho = eigenfunction_orthonormality(&params, 0.37, &[-1.0, 0.0, 1.0, 2.0], &window)?;
    checks.push(Check::below("eigenbasis-diagonal", (ortho.diag_numeric / ortho.diag_analytic - 1.0).abs(), 0.01));
    checks.push(Check::below("eigenbasis-offdiagonal", ortho.max_offdiag_ratio, 0.05));

    let spin = BlochVector::new(PI / 4.0, 0.0)?;
    let xi = sigma_xi_sq_sum(&params, &bath, 2.0, 0.0)?.sigma_xi_sq;
    let qs: Vec<f64> = (0..=160).map(|i| -8.0 + 0.1 * i as f64).collect();
    let conv = convolution_identity(&params, &spin, xi, 2.0, &qs)?;
    checks.push(Check::below("convolution-identity", conv.max_abs_error, 1e-8));

    let passed = checks.iter().all(|c| c.passed);
    Ok(SuiteReport { checks, residual_levels, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quadrature_matches_closed_form() {
        for (w0, eta) in [(std::f64::consts::TAU, 2.0), (1.0, 0.05), (3.0, 4.0)] {
            let p = ModelParams::new(1.0, w0, eta, 0.0, 1.0).unwrap();
            let closed = sigma_xi_sq_asymptotic(&p).unwrap().sigma_xi_sq;
            assert_relative_eq!(asymptotic_width_quadrature(&p).unwrap(), closed, max_relative = 1e-10);
        }
    }

    #[test]
    fn finite_time_integral_approaches_truncated_limit() {
        let p = ModelParams::figure_defaults();
        let cutoff = 50.0 * p.omega0;
        let limit = crate::bath::sigma_xi_sq_asymptotic_truncated(&p, cutoff).unwrap().sigma_xi_sq;
        let v = brownian_width_quadrature(&p, 15.0, cutoff).unwrap();
        assert_relative_eq!(v, limit, max_relative = 1e-6);
        assert_eq!(brownian_width_quadrature(&p, 0.0, cutoff).unwrap(), 0.0);
    }

    #[test]
    fn convolution_rejects_zero_variance() {
        let p = ModelParams::figure_defaults();
        let s = BlochVector::new(0.5, 0.0).unwrap();
        assert!(convolution_identity(&p, &s, 0.0, 1.0, &[0.0]).is_err());
    }
}
