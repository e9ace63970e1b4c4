//! Amplitude-squeezing indicator `D_q` and fourth-order Hong–Mandel squeezing.
//!
//! `D_q = [(ΔZ_1)^2 - <F_q(N)>/2] / (<F_q(N)>/2)` with
//! `Z_1 = (a^q + a†^q)/sqrt 2` and `F_q(N) = [a^q, a†^q]`. A state is
//! `q`-th power amplitude-squeezed when `-1 <= D_q < 0`.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expectations::{moment_numeric, quadrature_stats, MomentSpec};
use crate::fock::{FockVector, ModelParams};
use crate::special::{assoc_laguerre_f64, binomial, log_factorial};

/// Vacuum value of `<(x - <x>)^4>` for `x = (a + a†)/sqrt 2`; smaller values
/// signal fourth-order Hong–Mandel squeezing.
pub const HONG_MANDEL_BOUND: f64 = 0.75;

pub const MAX_COMMUTATOR_ORDER: usize = 12;

/// `F_q(N) = (N+1)(N+2)...(N+q) - N(N-1)...(N-q+1)` with exact integer
/// coefficients, lowest power first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CommutatorPoly {
    pub q: usize,
    pub coefficients: Vec<i64>,
}

impl CommutatorPoly {
    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn eval(&self, n: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * n + c as f64)
    }

    /// `<F_q(N)>` in `state`.
    pub fn expectation(&self, state: &FockVector) -> f64 {
        state
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(n, c)| c.norm_sqr() * self.eval(n as f64))
            .sum()
    }
}

fn poly_mul_linear(poly: &[i128], root_shift: i128) -> Vec<i128> {
    // poly(N) * (N + root_shift)
    let mut out = vec![0i128; poly.len() + 1];
    for (i, &c) in poly.iter().enumerate() {
        out[i] += c * root_shift;
        out[i + 1] += c;
    }
    out
}

pub fn commutator_poly(q: usize) -> Result<CommutatorPoly> {
    if !(1..=MAX_COMMUTATOR_ORDER).contains(&q) {
        return Err(Error::InvalidParameter(format!(
            "commutator order must be in 1..={MAX_COMMUTATOR_ORDER}, got {q}"
        )));
    }
    let mut rising = vec![1i128];
    let mut falling = vec![1i128];
    for i in 0..q as i128 {
        rising = poly_mul_linear(&rising, i + 1);
        falling = poly_mul_linear(&falling, -i);
    }
    let mut diff: Vec<i128> = rising.iter().zip(&falling).map(|(a, b)| a - b).collect();
    while diff.len() > 1 && *diff.last().unwrap() == 0 {
        diff.pop();
    }
    Ok(CommutatorPoly { q, coefficients: diff.into_iter().map(|c| c as i64).collect() })
}

/// `D_q` together with the pieces it is assembled from.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SqueezingReport {
    pub q: usize,
    pub t: Option<f64>,
    pub dq: f64,
    pub squeezed: bool,
    /// `(ΔZ_1)^2`, from direct operator application.
    pub variance: f64,
    /// `<F_q(N)>/2`.
    pub half_commutator: f64,
}

impl SqueezingReport {
    pub fn at_time(self, t: f64) -> Self {
        Self { t: Some(t), ..self }
    }
}

pub fn is_squeezed(dq: f64) -> bool {
    (-1.0 - 1e-12..0.0).contains(&dq)
}

/// `D_q` of `state` from brute-force moments.
pub fn dq_numeric(state: &FockVector, q: usize) -> Result<SqueezingReport> {
    dq_numeric_rotated(state, q, 0.0)
}

/// `D_q` for the rotated quadrature built from `e^{i phi} a^q`; `phi = 0` is
/// `Z_1`, `phi = -pi/2` is `Z_2`.
pub fn dq_numeric_rotated(state: &FockVector, q: usize, phi: f64) -> Result<SqueezingReport> {
    let poly = commutator_poly(q)?;
    let rot = Complex64::from_polar(1.0, phi);
    let aq = rot * moment_numeric(state, MomentSpec::new(0, q))?;
    let a2q = rot * rot * moment_numeric(state, MomentSpec::new(0, 2 * q))?;
    let nq = moment_numeric(state, MomentSpec::new(q, 0))?.re;
    let f = poly.expectation(state);
    let dq = 2.0 * (a2q.re - 2.0 * aq.re * aq.re + nq) / f;

    let variance = rotated_quadrature_variance(state, q, rot);
    let half = 0.5 * f;
    let alt = (variance - half) / half;
    if (alt - dq).abs() > 1e-8 * (1.0 + dq.abs()) {
        return Err(Error::Contract(format!(
            "D_{q} assemblies disagree: moments give {dq}, operator variance gives {alt}"
        )));
    }
    Ok(SqueezingReport { q, t: None, dq, squeezed: is_squeezed(dq), variance, half_commutator: half })
}

// (ΔZ)^2 with Z = (b + b†)/sqrt 2, b = rot a^q, applied on a basis padded by q levels.
fn rotated_quadrature_variance(state: &FockVector, q: usize, rot: Complex64) -> f64 {
    let c = state.amplitudes();
    let len = c.len() + q;
    let ladder = |n: usize| -> f64 {
        // sqrt(n! / (n-q)!)
        (0..q).map(|i| (n - i) as f64).product::<f64>().sqrt()
    };
    let mut z = vec![Complex64::new(0.0, 0.0); len];
    for n in 0..c.len() {
        if n >= q {
            z[n - q] += rot * c[n] * ladder(n);
        }
        z[n + q] += rot.conj() * c[n] * ladder(n + q);
    }
    for v in &mut z {
        *v *= FRAC_1_SQRT_2;
    }
    let mean: f64 = c.iter().zip(&z).map(|(a, b)| (a.conj() * b).re).sum();
    let second: f64 = z.iter().map(|v| v.norm_sqr()).sum();
    second - mean * mean
}

/// `<F_q(N)>` for a coherent state: `q! L_q(-nu) - nu^q`.
fn commutator_mean_cs(q: usize, nu: f64) -> f64 {
    log_factorial(q).exp() * assoc_laguerre_f64(q, 0, -nu) - nu.powi(q as i32)
}

/// `<a†^q a^q>` for the `m`-photon-added state, times `L_m(-nu)`.
fn normal_moment_pacs_scaled(q: usize, m: usize, nu: f64) -> f64 {
    let n_min = q.saturating_sub(m);
    (n_min..=q)
        .map(|n| {
            let ratio = (log_factorial(m) - log_factorial(m + n - q)).exp();
            binomial(q, n as i64) * ratio * nu.powi(n as i32) * assoc_laguerre_f64(m, n, -nu)
        })
        .sum()
}

/// `<F_q(N)>` for the `m`-photon-added state (time independent).
fn commutator_mean_pacs(q: usize, m: usize, nu: f64) -> f64 {
    let lm = assoc_laguerre_f64(m, 0, -nu);
    let anti = (log_factorial(m + q) - log_factorial(m)).exp() * assoc_laguerre_f64(m + q, 0, -nu) / lm;
    anti - normal_moment_pacs_scaled(q, m, nu) / lm
}

/// Closed-form `D_q(T_rev/2)` for an initial coherent state:
/// `(4 nu^q / <F_q>) (sin^2 q theta - e^{-4 nu} cos^2 q theta)` for odd `q`,
/// exactly 0 for even `q`.
pub fn dq_cs_half_revival(q: usize, nu: f64, theta: f64) -> f64 {
    if q.is_multiple_of(2) {
        return 0.0;
    }
    let qt = q as f64 * theta;
    let f = commutator_mean_cs(q, nu);
    4.0 * nu.powi(q as i32) / f * (qt.sin().powi(2) - (-4.0 * nu).exp() * qt.cos().powi(2))
}

#[inline]
fn reduced(k: f64, x: f64) -> f64 {
    (k * x / TAU).rem_euclid(1.0) * TAU
}

/// Closed-form `D_q(t)` for an initial `m`-photon-added coherent state.
pub fn dq_pacs(q: usize, t: f64, params: &ModelParams) -> f64 {
    let (nu, chi, theta, m) = (params.nu, params.chi, params.theta, params.m);
    let qf = q as f64;
    let lm = assoc_laguerre_f64(m, 0, -nu);
    let ct = chi * t;

    let y4 = 4.0 * qf * ct;
    let env4 = (-nu * (1.0 - y4.cos())).exp();
    let mut first = 0.0;
    for n in 0..=m {
        let k = 2.0 * qf * (2 * m + 2 * n + 2 * q) as f64 - 2.0 * qf;
        let arg = reduced(k, ct) + nu * y4.sin() - 2.0 * qf * theta;
        first += binomial(m + 2 * q, (n + 2 * q) as i64) * nu.powi((n + q) as i32) * arg.cos()
            / log_factorial(n).exp();
    }
    first *= env4;

    let y2 = 2.0 * qf * ct;
    let env2 = (-2.0 * nu * (1.0 - y2.cos())).exp();
    let mut inner = 0.0;
    for n in 0..=m {
        let k = qf * (q + 2 * m + 2 * n) as f64 - qf;
        let arg = reduced(k, ct) + nu * y2.sin() - qf * theta;
        inner += binomial(m + q, (n + q) as i64) * nu.powf(n as f64 + 0.5 * qf) * arg.cos()
            / log_factorial(n).exp();
    }
    let second = -2.0 * env2 / lm * inner * inner;

    let third = normal_moment_pacs_scaled(q, m, nu);
    let a = 0.5 * lm * commutator_mean_pacs(q, m, nu);
    (first + second + third) / a
}

/// Closed-form `D_q(T_rev/2)` for an initial `m`-photon-added coherent state.
pub fn dq_pacs_half_revival(q: usize, params: &ModelParams) -> f64 {
    let (nu, theta, m) = (params.nu, params.theta, params.m);
    let qf = q as f64;
    let sign = if q.is_multiple_of(2) { 1.0 } else { -1.0 };
    let lm = assoc_laguerre_f64(m, 0, -nu);

    let first = sign * nu.powi(q as i32) * assoc_laguerre_f64(m, 2 * q, -nu) * (2.0 * qf * theta).cos();
    // e^{-2 nu (1 - cos q pi)}: 1 for even q, e^{-4 nu} for odd q
    let env = if q.is_multiple_of(2) { 1.0 } else { (-4.0 * nu).exp() };
    let lq = assoc_laguerre_f64(m, q, -sign * nu);
    let second = -2.0 * env / lm * nu.powi(q as i32) * lq * lq * (qf * theta).cos().powi(2);
    let third = normal_moment_pacs_scaled(q, m, nu);
    let a = 0.5 * lm * commutator_mean_pacs(q, m, nu);
    (first + second + third) / a
}

/// Fourth central moment of `x` and whether it lies below [`HONG_MANDEL_BOUND`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HongMandel {
    pub moment4: f64,
    pub squeezed: bool,
}

pub fn hong_mandel_m4(state: &FockVector) -> Result<HongMandel> {
    let stats = quadrature_stats(state, 4)?;
    let moment4 = stats.fourth_central_x();
    // the vacuum itself sits on the bound; allow for rounding there
    Ok(HongMandel { moment4, squeezed: moment4 < HONG_MANDEL_BOUND - 1e-12 })
}
