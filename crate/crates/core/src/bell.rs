//! Singlet correlations and Bell's original three-setting inequality
//! `|P(a,b) - P(a,c)| <= 1 + P(b,c)`.
//!
//! The classical side uses an illustrative local model: a hidden unit vector
//! `lambda`, uniform on the sphere, with outcomes `A = sign(a . lambda)` and
//! `B = -sign(b . lambda)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::wavepacket::{probability_weights, BlochVector};

/// Tolerance on `|v| = 1` for detector settings.
pub const UNIT_TOLERANCE: f64 = 1e-12;
/// Margin used when flagging a violation.
pub const VIOLATION_MARGIN: f64 = 1e-12;

/// Detector orientation (unit 3-vector).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Setting([f64; 3]);

impl Setting {
    pub fn new(v: [f64; 3]) -> Result<Self> {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(domain(format!("setting must be a unit vector, |v| = {norm}")));
        }
        Ok(Self(v))
    }

    /// Unit vector at angle `angle` in the x–z plane, measured from z.
    pub fn planar(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self([s, 0.0, c])
    }

    pub fn from_spherical(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self([st * cp, st * sp, ct])
    }

    pub fn vector(&self) -> [f64; 3] {
        self.0
    }

    pub fn dot(&self, other: &Setting) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    /// Angle in `[0, pi]` between two settings.
    pub fn angle_to(&self, other: &Setting) -> f64 {
        let c = self.cross_norm(other);
        c.atan2(self.dot(other))
    }

    fn cross_norm(&self, o: &Setting) -> f64 {
        let [a0, a1, a2] = self.0;
        let [b0, b1, b2] = o.0;
        let x = a1 * b2 - a2 * b1;
        let y = a2 * b0 - a0 * b2;
        let z = a0 * b1 - a1 * b0;
        (x * x + y * y + z * z).sqrt()
    }
}

/// Singlet expectation `<(sigma_1 . a)(sigma_2 . b)> = -a . b`.
pub fn quantum_correlation(a: &Setting, b: &Setting) -> f64 {
    -a.dot(b)
}

/// The same correlation built from Born weights at the relative angle:
/// `-(cos^2(theta/2) - sin^2(theta/2))`.
pub fn correlation_from_weights(a: &Setting, b: &Setting) -> Result<f64> {
    let spin = BlochVector::new(a.angle_to(b), 0.0)?;
    let (plus, minus) = probability_weights(&spin);
    Ok(-(plus - minus))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct BellReport {
    pub P_ab: f64,
    pub P_ac: f64,
    pub P_bc: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub violated: bool,
    /// Standard error of `lhs - rhs` for Monte Carlo estimates.
    pub standard_error: Option<f64>,
    pub samples: Option<u64>,
}

impl BellReport {
    #[allow(non_snake_case)]
    fn from_correlations(P_ab: f64, P_ac: f64, P_bc: f64) -> Self {
        let lhs = (P_ab - P_ac).abs();
        let rhs = 1.0 + P_bc;
        Self { P_ab, P_ac, P_bc, lhs, rhs, violated: lhs > rhs + VIOLATION_MARGIN, standard_error: None, samples: None }
    }

    /// Whether `lhs <= rhs + k * standard_error` (plain `!violated` without an error bar).
    pub fn holds_within(&self, k: f64) -> bool {
        match self.standard_error {
            Some(se) => self.lhs <= self.rhs + k * se + VIOLATION_MARGIN,
            None => !self.violated,
        }
    }
}

pub fn bell_check(a: &Setting, b: &Setting, c: &Setting) -> BellReport {
    BellReport::from_correlations(quantum_correlation(a, b), quantum_correlation(a, c), quantum_correlation(b, c))
}

/// Number of independent RNG streams; fixed so results do not depend on the
/// thread count.
const PARTITIONS: u64 = 64;

fn sign(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

fn uniform_on_sphere<R: Rng>(rng: &mut R) -> [f64; 3] {
    let z: f64 = rng.gen_range(-1.0..=1.0);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).max(0.0).sqrt();
    [r * phi.cos(), r * phi.sin(), z]
}

#[derive(Default, Clone, Copy)]
struct Moments {
    n: u64,
    // sums of the three products and of the per-sample lhs-rhs proxy
    ab: f64,
    ac: f64,
    bc: f64,
    ab_ac_sq: f64,
    bc_sq: f64,
    diff_bc: f64,
}

/// Monte Carlo estimate of the sign model's correlations from `n` hidden
/// variables. Each of the fixed partitions draws from its own ChaCha stream
/// derived from `seed`, and partitions are reduced in index order.
pub fn classical_bound_monte_carlo(a: &Setting, b: &Setting, c: &Setting, n: u64, seed: u64) -> Result<BellReport> {
    if n == 0 {
        return Err(domain("need at least one sample"));
    }
    let outcome = |s: &Setting, l: &[f64; 3]| sign(s.0[0] * l[0] + s.0[1] * l[1] + s.0[2] * l[2]);
    let parts: Vec<Moments> = (0..PARTITIONS)
        .into_par_iter()
        .map(|p| {
            let count = n / PARTITIONS + u64::from(p < n % PARTITIONS);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(p);
            let mut m = Moments { n: count, ..Moments::default() };
            for _ in 0..count {
                let l = uniform_on_sphere(&mut rng);
                let (sa, sb, sc) = (outcome(a, &l), outcome(b, &l), outcome(c, &l));
                // particle 2 carries the opposite outcome
                let (ab, ac, bc) = (-sa * sb, -sa * sc, -sb * sc);
                m.ab += ab;
                m.ac += ac;
                m.bc += bc;
                m.ab_ac_sq += (ab - ac) * (ab - ac);
                m.bc_sq += bc * bc;
                m.diff_bc += (ab - ac) * bc;
            }
            m
        })
        .collect();

    let mut tot = Moments::default();
    for m in &parts {
        tot.n += m.n;
        tot.ab += m.ab;
        tot.ac += m.ac;
        tot.bc += m.bc;
        tot.ab_ac_sq += m.ab_ac_sq;
        tot.bc_sq += m.bc_sq;
        tot.diff_bc += m.diff_bc;
    }
    let nf = tot.n as f64;
    let (p_ab, p_ac, p_bc) = (tot.ab / nf, tot.ac / nf, tot.bc / nf);
    let mut report = BellReport::from_correlations(p_ab, p_ac, p_bc);

    // lhs - rhs = s (X) - Y - 1 with X = AB - AC, Y = BC, s = sign of mean X
    let s = sign(p_ab - p_ac);
    let mean_x = p_ab - p_ac;
    let var_x = tot.ab_ac_sq / nf - mean_x * mean_x;
    let var_y = tot.bc_sq / nf - p_bc * p_bc;
    let cov = tot.diff_bc / nf - mean_x * p_bc;
    let var = (var_x + var_y - 2.0 * s * cov).max(0.0);
    report.standard_error = Some((var / nf).sqrt());
    report.samples = Some(tot.n);
    Ok(report)
}
