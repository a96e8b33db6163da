//! Gaussian packet of the main oscillator, split by spin into two branches.
//!
//! Branch `s = ±1` is a normalized Gaussian centred at `s (d - a1 d)` with
//! variance `sigma_Q^2 + sigma_xi^2`, weighted by the Born probability of the
//! initial Bloch vector.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::bath::{sigma_xi_sq_asymptotic, sigma_xi_sq_sum, BathDiscretization};
use crate::error::{domain, Error, Result};
use crate::kernel::{coeffs, ModelParams, Regime};
use crate::numerics::{gaussian_density, normal_interval_mass};

/// Initial spin state `cos(theta/2)|+> + e^{i phi} sin(theta/2)|->`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlochVector {
    pub theta: f64,
    /// Azimuth; carried for completeness, it never enters a density.
    pub phi: f64,
}

impl BlochVector {
    /// `theta` must lie in `[0, pi]`; `phi` is reduced into `[0, 2 pi)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(theta.is_finite() && (0.0..=PI).contains(&theta)) {
            return Err(domain(format!("theta must lie in [0, pi], got {theta}")));
        }
        if !phi.is_finite() {
            return Err(domain(format!("phi must be finite, got {phi}")));
        }
        Ok(Self { theta, phi: phi.rem_euclid(TAU) })
    }
}

/// Born weights `(cos^2(theta/2), sin^2(theta/2))`, constant for all `t > 0`.
pub fn probability_weights(spin: &BlochVector) -> (f64, f64) {
    let (s, c) = (0.5 * spin.theta).sin_cos();
    (c * c, s * s)
}

/// Packet variance of the main coordinate without the bath:
/// `hbar / (2 M omega0) * (omega0^2 a2^2 + a1^2)`.
///
/// Written through `a1, a2`, so it holds in every damping regime.
#[allow(non_snake_case)]
pub fn sigma_Q_sq(params: &ModelParams, t: f64) -> Result<f64> {
    let a = coeffs(params, t)?;
    let w0a2 = params.omega0 * a.a2;
    Ok(params.ground_variance() * (w0a2 * w0a2 + a.a1 * a.a1))
}

/// Descriptors of both branches at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct PacketState {
    pub t: f64,
    pub center_plus: f64,
    pub center_minus: f64,
    pub sigma_Q_sq: f64,
    pub sigma_xi_sq: f64,
    pub sigma_Qxi_sq: f64,
    pub weight_plus: f64,
    pub weight_minus: f64,
}

impl PacketState {
    pub fn new(params: &ModelParams, spin: &BlochVector, sigma_xi_sq: f64, t: f64) -> Result<Self> {
        if !(sigma_xi_sq.is_finite() && sigma_xi_sq >= 0.0) {
            return Err(domain(format!("Brownian variance must be >= 0, got {sigma_xi_sq}")));
        }
        let a = coeffs(params, t)?;
        let d = params.displacement();
        let packet_sq = sigma_Q_sq(params, t)?;
        let (weight_plus, weight_minus) = probability_weights(spin);
        let offset = d - a.a1 * d;
        Ok(Self {
            t,
            center_plus: offset,
            center_minus: -offset,
            sigma_Q_sq: packet_sq,
            sigma_xi_sq,
            sigma_Qxi_sq: packet_sq + sigma_xi_sq,
            weight_plus,
            weight_minus,
        })
    }

    fn total_variance(&self) -> Result<f64> {
        if self.sigma_Qxi_sq > 0.0 {
            Ok(self.sigma_Qxi_sq)
        } else {
            Err(Error::DegenerateWidth { t: self.t })
        }
    }

    /// Point densities `(rho_plus, rho_minus)` at `q`.
    pub fn densities(&self, q: f64) -> Result<(f64, f64)> {
        let var = self.total_variance()?;
        Ok((
            self.weight_plus * gaussian_density(q, self.center_plus, var),
            self.weight_minus * gaussian_density(q, self.center_minus, var),
        ))
    }

    /// Mean densities over the cell `[q - h/2, q + h/2]`.
    pub fn cell_densities(&self, q: f64, h: f64) -> Result<(f64, f64)> {
        let sd = self.total_variance()?.sqrt();
        let mean = |centre: f64| normal_interval_mass((q - 0.5 * h - centre) / sd, (q + 0.5 * h - centre) / sd) / h;
        Ok((self.weight_plus * mean(self.center_plus), self.weight_minus * mean(self.center_minus)))
    }
}

/// Point densities of both branches at `(q, t)`.
pub fn branch_densities(
    params: &ModelParams,
    spin: &BlochVector,
    sigma_xi_sq: f64,
    q: f64,
    t: f64,
) -> Result<(f64, f64)> {
    if !q.is_finite() {
        return Err(domain(format!("q must be finite, got {q}")));
    }
    PacketState::new(params, spin, sigma_xi_sq, t)?.densities(q)
}

/// Where the Brownian variance comes from when building grids and tables.
#[derive(Debug, Clone, Copy)]
pub enum BrownianSource<'a> {
    /// No bath: `sigma_xi^2 = 0`.
    None,
    /// The long-time closed form, applied at every `t`.
    Asymptotic,
    /// Explicit mode sum at each `t`; `temperature` is `k_B T`.
    Bath { bath: &'a BathDiscretization, temperature: f64 },
}

impl BrownianSource<'_> {
    pub fn sigma_xi_sq(&self, params: &ModelParams, t: f64) -> Result<f64> {
        match self {
            BrownianSource::None => Ok(0.0),
            BrownianSource::Asymptotic => Ok(sigma_xi_sq_asymptotic(params)?.sigma_xi_sq),
            BrownianSource::Bath { bath, temperature } => {
                Ok(sigma_xi_sq_sum(params, bath, t, *temperature)?.sigma_xi_sq)
            }
        }
    }
}

/// Uniform axis `min, min + h, ..., max` with `points` samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn new(min: f64, max: f64, points: usize) -> Result<Self> {
        let g = Self { min, max, points };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points == 0 {
            return Err(Error::InvalidGrid("grid needs at least one point".into()));
        }
        if !(self.min.is_finite() && self.max.is_finite()) || self.min > self.max {
            return Err(Error::InvalidGrid(format!("bounds [{}, {}] must be finite and ordered", self.min, self.max)));
        }
        if self.points == 1 && self.min != self.max {
            return Err(Error::InvalidGrid("a one-point grid needs min == max".into()));
        }
        if self.points > 1 && self.min == self.max {
            return Err(Error::InvalidGrid("a multi-point grid needs min < max".into()));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        if self.points > 1 {
            (self.max - self.min) / (self.points - 1) as f64
        } else {
            0.0
        }
    }

    pub fn values(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.points).map(|i| if i + 1 == self.points { self.max } else { self.min + i as f64 * h }).collect()
    }

    /// `q in [-8, 8]`, 641 points.
    pub fn default_q() -> Self {
        Self { min: -8.0, max: 8.0, points: 641 }
    }

    /// `t in [0, 6]`, 301 points.
    pub fn default_t() -> Self {
        Self { min: 0.0, max: 6.0, points: 301 }
    }
}

/// Branch densities on a `(t, q)` grid, stored t-major.
///
/// Each value is the mean density over the cell of width `h` centred on the
/// grid point, so `h * sum(column)` is the exact mass inside the grid even
/// once the packet is narrower than a cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityGrid {
    pub q_axis: Vec<f64>,
    pub t_axis: Vec<f64>,
    pub rho_plus: Vec<f64>,
    pub rho_minus: Vec<f64>,
    pub rho_total: Vec<f64>,
}

/// Integrated branch masses of one grid column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ColumnMass {
    pub t: f64,
    pub plus: f64,
    pub minus: f64,
    pub total: f64,
}

impl DensityGrid {
    pub fn q_step(&self) -> f64 {
        if self.q_axis.len() > 1 {
            self.q_axis[1] - self.q_axis[0]
        } else {
            0.0
        }
    }

    fn column_range(&self, ti: usize) -> std::ops::Range<usize> {
        let nq = self.q_axis.len();
        ti * nq..(ti + 1) * nq
    }

    pub fn column(&self, ti: usize) -> (&[f64], &[f64], &[f64]) {
        let r = self.column_range(ti);
        (&self.rho_plus[r.clone()], &self.rho_minus[r.clone()], &self.rho_total[r])
    }

    /// Trapezoid integral over `q` of each density in column `ti`.
    pub fn column_mass(&self, ti: usize) -> ColumnMass {
        let h = self.q_step();
        let trapz = |xs: &[f64]| {
            let inner: f64 = xs.iter().sum();
            h * (inner - 0.5 * (xs[0] + xs[xs.len() - 1]))
        };
        let (p, m, tot) = self.column(ti);
        ColumnMass { t: self.t_axis[ti], plus: trapz(p), minus: trapz(m), total: trapz(tot) }
    }
}

/// Evaluates both branches over the full grid. With `include_brownian`
/// false the Brownian variance is forced to zero whatever the source.
pub fn density_grid(
    params: &ModelParams,
    spin: &BlochVector,
    source: &BrownianSource<'_>,
    q_spec: &GridSpec,
    t_spec: &GridSpec,
    include_brownian: bool,
) -> Result<DensityGrid> {
    q_spec.validate()?;
    t_spec.validate()?;
    if q_spec.points < 2 {
        return Err(Error::InvalidGrid("q grid needs at least two points".into()));
    }
    let q_axis = q_spec.values();
    let t_axis = t_spec.values();
    let h = q_spec.step();

    let columns = t_axis
        .iter()
        .map(|&t| {
            let xi = if include_brownian { source.sigma_xi_sq(params, t)? } else { 0.0 };
            PacketState::new(params, spin, xi, t)
        })
        .collect::<Result<Vec<_>>>()?;

    let cells: Vec<(f64, f64)> = columns
        .par_iter()
        .flat_map_iter(|state| q_axis.iter().map(move |&q| state.cell_densities(q, h)))
        .collect::<Result<Vec<_>>>()?;

    let rho_plus: Vec<f64> = cells.iter().map(|c| c.0).collect();
    let rho_minus: Vec<f64> = cells.iter().map(|c| c.1).collect();
    let rho_total = cells.iter().map(|c| c.0 + c.1).collect();
    Ok(DensityGrid { q_axis, t_axis, rho_plus, rho_minus, rho_total })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct WidthRow {
    pub t: f64,
    pub sigma_Q: f64,
    pub sigma_xi: f64,
    pub sigma_Qxi: f64,
}

/// Tabulates `sigma_Q`, `sigma_xi` and `sigma_Qxi = sqrt(sigma_Q^2 + sigma_xi^2)`.
pub fn width_curves(params: &ModelParams, source: &BrownianSource<'_>, t_spec: &GridSpec) -> Result<Vec<WidthRow>> {
    t_spec.validate()?;
    t_spec
        .values()
        .into_iter()
        .map(|t| {
            let q = sigma_Q_sq(params, t)?;
            let xi = source.sigma_xi_sq(params, t)?;
            Ok(WidthRow { t, sigma_Q: q.sqrt(), sigma_xi: xi.sqrt(), sigma_Qxi: (q + xi).sqrt() })
        })
        .collect()
}

/// Complex spin-up packet `psi(Q, t) = exp(quad Q^2 + linear Q + log_norm)` in
/// the well-centred coordinate `Q = q - d`, for a ground-width packet
/// released from `q = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPacket {
    pub quad: Complex64,
    pub linear: Complex64,
    pub log_norm: Complex64,
}

impl GaussianPacket {
    pub fn at(params: &ModelParams, t: f64) -> Result<Self> {
        let a = coeffs(params, t)?;
        let w0 = params.omega0;
        let k = params.mass * w0 / params.hbar;
        let d = params.displacement();
        let z = Complex64::new(a.a1, w0 * a.a2);
        let i = Complex64::i();
        let quad = -0.5 * k * (w0 * a.a2 - i * a.a2dot) / (w0 * a.a2 - i * a.a1) * (params.eta * t).exp();
        let linear = -k * d / z;
        let log_norm = 0.25 * (k / PI).ln() - 0.5 * unwrapped_log(params, t, z) - 0.5 * k * a.a1 * d * d / z;
        Ok(Self { quad, linear, log_norm })
    }

    pub fn amplitude(&self, q: f64) -> Complex64 {
        (self.quad * q * q + self.linear * q + self.log_norm).exp()
    }
}

/// `ln z` for `z = a1 + i omega0 a2`, continued in `t` across the negative
/// real axis so that `z^{-1/2}` is smooth in time.
fn unwrapped_log(params: &ModelParams, t: f64, z: Complex64) -> Complex64 {
    let mut arg = z.arg();
    if params.regime() == Regime::Underdamped {
        let w = params.damped_frequency_sq().sqrt();
        let turns = ((w * t + PI) / TAU).floor();
        arg += TAU * turns;
    }
    Complex64::new(z.norm().ln(), arg)
}
