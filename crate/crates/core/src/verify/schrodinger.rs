//! Finite-difference residual of the closed-form packet against
//! `i hbar psi_t = -e^{-eta t} hbar^2/(2M) psi_QQ + 1/2 M e^{eta t} omega0^2 Q^2 psi`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::kernel::{coeffs, ModelParams};
use crate::wavepacket::{sigma_Q_sq, GaussianPacket};

/// Residuals above this are flagged as too coarse to be meaningful.
pub const COARSE_RESIDUAL: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport {
    pub grid_h: f64,
    pub grid_dt: f64,
    /// `||R|| / ||H psi||` over all sampled times and positions.
    pub residual_l2: f64,
    /// `log2` of the residual ratio against the next coarser level.
    pub order_estimate: Option<f64>,
    pub coarse: bool,
}

/// Sampling window: `centre ± half_width_sigmas * sigma_Q(t)` at each time.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualGrid {
    pub h: f64,
    pub dt: f64,
    pub t_samples: Vec<f64>,
    pub half_width_sigmas: f64,
}

impl ResidualGrid {
    pub fn refined(&self) -> Self {
        Self { h: 0.5 * self.h, dt: 0.5 * self.dt, ..self.clone() }
    }
}

pub fn schrodinger_residual(params: &ModelParams, grid: &ResidualGrid) -> Result<ResidualReport> {
    if !(grid.h > 0.0 && grid.dt > 0.0 && grid.half_width_sigmas > 0.0) {
        return Err(domain("residual grid needs h, dt and window > 0"));
    }
    let hbar = params.hbar;
    let mut num = 0.0;
    let mut den = 0.0;
    for &t in &grid.t_samples {
        if t < grid.dt {
            return Err(domain(format!("sample time {t} leaves no room for a centred time difference")));
        }
        let before = GaussianPacket::at(params, t - grid.dt)?;
        let now = GaussianPacket::at(params, t)?;
        let after = GaussianPacket::at(params, t + grid.dt)?;
        let centre = -coeffs(params, t)?.a1 * params.displacement();
        let half = grid.half_width_sigmas * sigma_Q_sq(params, t)?.sqrt();
        let n = (2.0 * half / grid.h).ceil() as usize;
        let kinetic = -0.5 * hbar * hbar / params.mass * (-params.eta * t).exp();
        let spring = 0.5 * params.mass * (params.eta * t).exp() * params.omega0 * params.omega0;
        let h2 = grid.h * grid.h;

        let psi = |i: usize| now.amplitude(centre - half + i as f64 * grid.h);
        let mut left = psi(0);
        let mut mid = psi(1);
        for i in 1..n {
            let right = psi(i + 1);
            let q = centre - half + i as f64 * grid.h;
            let dt_psi = (after.amplitude(q) - before.amplitude(q)) / (2.0 * grid.dt);
            let lap = (left - 2.0 * mid + right) / h2;
            let h_psi = kinetic * lap + spring * q * q * mid;
            let r: Complex64 = Complex64::i() * hbar * dt_psi - h_psi;
            num += r.norm_sqr();
            den += h_psi.norm_sqr();
            left = mid;
            mid = right;
        }
    }
    let residual_l2 = (num / den).sqrt();
    Ok(ResidualReport {
        grid_h: grid.h,
        grid_dt: grid.dt,
        residual_l2,
        order_estimate: None,
        coarse: residual_l2 > COARSE_RESIDUAL,
    })
}

/// Residuals on `levels` successively halved grids, with order estimates.
pub fn residual_convergence(params: &ModelParams, base: &ResidualGrid, levels: usize) -> Result<Vec<ResidualReport>> {
    let mut grid = base.clone();
    let mut out: Vec<ResidualReport> = Vec::with_capacity(levels);
    for _ in 0..levels {
        let mut r = schrodinger_residual(params, &grid)?;
        if let Some(prev) = out.last() {
            r.order_estimate = Some((prev.residual_l2 / r.residual_l2).log2());
        }
        out.push(r);
        grid = grid.refined();
    }
    Ok(out)
}
