//! Windowed orthonormality of the eigenfunctions `u_{Q1}(Q0, t)` of `Q(t)`.
//!
//! The exact normalization is a delta function, so the overlap is taken
//! against a Hann taper on `[-L, L]`. The diagonal then has the analytic
//! value `|C|^2 L`, and off-diagonal overlaps are the taper's Fourier
//! transform at `M (Q1 - Q2) / (hbar a2)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::kernel::{coeffs, ModelParams};
use crate::wavepacket::GridSpec;

/// `|omega0 a2|` below which the eigenbasis is treated as singular.
pub const SINGULAR_A2: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrthonormalityReport {
    pub t: f64,
    pub a2: f64,
    pub diag_numeric: f64,
    pub diag_analytic: f64,
    pub max_offdiag: f64,
    /// `max_offdiag / diag_analytic`.
    pub max_offdiag_ratio: f64,
}

/// `u_{Q1}(Q0) = C exp[-i M/(2 hbar a2) (a1 Q0^2 - 2 Q1 Q0)]` with
/// `|C|^2 = M / (2 pi hbar |a2|)` and zero phase.
pub fn eigenfunction(params: &ModelParams, t: f64, q1: f64, q0: f64) -> Result<Complex64> {
    let (a1, a2) = checked_coeffs(params, t)?;
    let norm = (params.mass / (2.0 * PI * params.hbar * a2.abs())).sqrt();
    let phase = -params.mass / (2.0 * params.hbar * a2) * (a1 * q0 * q0 - 2.0 * q1 * q0);
    Ok(Complex64::from_polar(norm, phase))
}

fn checked_coeffs(params: &ModelParams, t: f64) -> Result<(f64, f64)> {
    let a = coeffs(params, t)?;
    if (params.omega0 * a.a2).abs() < SINGULAR_A2 {
        return Err(Error::SingularEigenbasis { t, a2: a.a2 });
    }
    Ok((a.a1, a.a2))
}

pub fn eigenfunction_orthonormality(
    params: &ModelParams,
    t: f64,
    q1_list: &[f64],
    window: &GridSpec,
) -> Result<OrthonormalityReport> {
    window.validate()?;
    if window.points < 3 || window.min != -window.max {
        return Err(domain("window must be a symmetric grid [-L, L] with at least 3 points"));
    }
    if q1_list.is_empty() {
        return Err(domain("need at least one eigenvalue"));
    }
    let (_, a2) = checked_coeffs(params, t)?;
    let half = window.max;
    let h = window.step();
    let nodes = window.values();
    let taper: Vec<f64> = nodes.iter().map(|x| (0.5 * PI * x / half).cos().powi(2)).collect();

    let samples = q1_list
        .iter()
        .map(|&q1| nodes.iter().map(|&q0| eigenfunction(params, t, q1, q0)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;

    let overlap = |u: &[Complex64], v: &[Complex64]| -> Complex64 {
        let n = u.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..n {
            let w = if k == 0 || k + 1 == n { 0.5 } else { 1.0 };
            acc += u[k].conj() * v[k] * (w * taper[k]);
        }
        acc * h
    };

    let diag_numeric = overlap(&samples[0], &samples[0]).re;
    let diag_analytic = params.mass / (2.0 * PI * params.hbar * a2.abs()) * half;
    let mut max_offdiag: f64 = 0.0;
    for i in 0..samples.len() {
        for j in (i + 1)..samples.len() {
            max_offdiag = max_offdiag.max(overlap(&samples[j], &samples[i]).norm());
        }
    }
    Ok(OrthonormalityReport {
        t,
        a2,
        diag_numeric,
        diag_analytic,
        max_offdiag,
        max_offdiag_ratio: max_offdiag / diag_analytic,
    })
}
