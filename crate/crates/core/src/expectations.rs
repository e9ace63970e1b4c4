//! Normally ordered moments `<a†^r a^(r+s)>` and quadrature statistics.
//!
//! Every closed-form moment here has a brute-force counterpart
//! ([`moment_numeric`], [`quadrature_stats`]) that sums over the truncated
//! number basis.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2, TAU};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{FockVector, ModelParams};
use crate::special::{assoc_laguerre_complex, assoc_laguerre_f64};

/// Selects `<a†^r a^(r+s)>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MomentSpec {
    pub r: usize,
    pub s: usize,
}

impl MomentSpec {
    pub fn new(r: usize, s: usize) -> Self {
        Self { r, s }
    }
}

/// `prod_{i=0}^{j-1} (n - i)`, i.e. `n! / (n-j)!`.
#[inline]
fn falling(n: usize, j: usize) -> f64 {
    (0..j).map(|i| (n - i) as f64).product()
}

/// `e^{-i k x}` with `k x` reduced modulo `2pi` before taking the exponential.
#[inline]
pub(crate) fn phase(k: f64, x: f64) -> Complex64 {
    let turns = (k * x / TAU).rem_euclid(1.0);
    Complex64::from_polar(1.0, -turns * TAU)
}

/// `<psi| a†^r a^(r+s) |psi>` summed over the truncated basis in ascending `n`.
pub fn moment_numeric(state: &FockVector, spec: MomentSpec) -> Result<Complex64> {
    let MomentSpec { r, s } = spec;
    let cutoff = state.cutoff();
    if 2 * r + s > cutoff {
        return Err(Error::CutoffTooSmall {
            cutoff,
            reason: format!("moment (r = {r}, s = {s}) needs cutoff >= {}", 2 * r + s),
        });
    }
    let c = state.amplitudes();
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..c.len().saturating_sub(r + s) {
        let w = (falling(k + r, r) * falling(k + r + s, r + s)).sqrt();
        acc += c[k + r].conj() * c[k + r + s] * w;
    }
    Ok(acc)
}

/// Closed-form moment for an initial coherent state.
pub fn moment_cs(spec: MomentSpec, t: f64, params: &ModelParams) -> Complex64 {
    let MomentSpec { r, s } = spec;
    let (nu, chi) = (params.nu, params.chi);
    let sf = s as f64;
    let x = 2.0 * sf * chi * t;
    let envelope = (-nu * (1.0 - x.cos())).exp();
    let kerr = phase(sf * (sf - 1.0) + 2.0 * (r * s) as f64, chi * t);
    let spin = Complex64::from_polar(1.0, -nu * x.sin());
    params.alpha().powu(s as u32) * nu.powi(r as i32) * envelope * kerr * spin
}

/// Closed-form moment for an initial `m`-photon-added coherent state.
/// With `m = 0` it reduces to [`moment_cs`].
pub fn moment_pacs(spec: MomentSpec, t: f64, params: &ModelParams) -> Complex64 {
    let MomentSpec { r, s } = spec;
    let (nu, chi, m) = (params.nu, params.chi, params.m);
    let sf = s as f64;
    let x = 2.0 * sf * chi * t;
    let envelope = (-nu + nu * x.cos()).exp();
    let prefactor = params.alpha().powu(s as u32)
        * envelope
        * phase((sf - 1.0 + 2.0 * m as f64) * sf, chi * t)
        * Complex64::from_polar(1.0, -nu * x.sin());

    // nu e^{-2 i s chi t}
    let rotated = nu * phase(2.0 * sf, chi * t);
    let norm = assoc_laguerre_f64(m, 0, -nu);
    let mut sum = Complex64::new(0.0, 0.0);
    for n in 0..=r {
        if m + n < r {
            continue;
        }
        // m! / (m - r + n)!
        let ratio = falling(m, r - n);
        let weight = crate::special::binomial(r, n as i64) * ratio;
        sum += weight * rotated.powu(n as u32) * assoc_laguerre_complex(m, s + n, -rotated);
    }
    prefactor * sum / norm
}

/// `<x(t)>` for an initial coherent state.
pub fn mean_x_cs(t: f64, params: &ModelParams) -> f64 {
    let y = 2.0 * params.chi * t;
    let env = (-params.nu * (1.0 - y.cos())).exp();
    let w = params.nu * y.sin();
    env * (params.x0() * w.cos() + params.p0() * w.sin())
}

/// `<p(t)>` for an initial coherent state.
pub fn mean_p_cs(t: f64, params: &ModelParams) -> f64 {
    let y = 2.0 * params.chi * t;
    let env = (-params.nu * (1.0 - y.cos())).exp();
    let w = params.nu * y.sin();
    env * (params.p0() * w.cos() - params.x0() * w.sin())
}

fn z1(t: f64, params: &ModelParams) -> Complex64 {
    let (nu, y) = (params.nu, 2.0 * params.chi * t);
    let rot = Complex64::from_polar(1.0, y);
    (2.0 + nu * rot) / (1.0 + nu) * Complex64::from_polar(1.0, y + nu * y.sin())
}

fn z2(t: f64, params: &ModelParams) -> Complex64 {
    let (nu, y) = (params.nu, 2.0 * params.chi * t);
    let rot = Complex64::from_polar(1.0, y);
    (6.0 + 6.0 * nu * rot + nu * nu * rot * rot) / (2.0 + 4.0 * nu + nu * nu)
        * Complex64::from_polar(1.0, 2.0 * y + nu * y.sin())
}

fn mean_x_from_z(z: Complex64, t: f64, params: &ModelParams) -> f64 {
    let env = (-params.nu * (1.0 - (2.0 * params.chi * t).cos())).exp();
    env * (params.x0() * z.re + params.p0() * z.im)
}

/// `<x(t)>` for an initial one-photon-added coherent state (`params.m` ignored).
pub fn mean_x_pacs_m1(t: f64, params: &ModelParams) -> f64 {
    mean_x_from_z(z1(t, params), t, params)
}

/// `<x(t)>` for an initial two-photon-added coherent state (`params.m` ignored).
pub fn mean_x_pacs_m2(t: f64, params: &ModelParams) -> f64 {
    mean_x_from_z(z2(t, params), t, params)
}

/// `<x^2(t)>` for an initial coherent state.
pub fn mean_x2_cs(t: f64, params: &ModelParams) -> f64 {
    let (x0, p0, nu) = (params.x0(), params.p0(), params.nu);
    let y = 4.0 * params.chi * t;
    let env = (-nu * (1.0 - y.cos())).exp();
    let arg = 2.0 * params.chi * t + nu * y.sin();
    0.5 * (1.0 + x0 * x0 + p0 * p0 + env * ((x0 * x0 - p0 * p0) * arg.cos() + 2.0 * x0 * p0 * arg.sin()))
}

/// Raw and central moments of the quadratures `x` and `p`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadratureStats {
    pub mean_x: f64,
    pub mean_p: f64,
    /// `raw_x[k] = <x^k>`, `k = 0..=max_order`.
    pub raw_x: Vec<f64>,
    pub raw_p: Vec<f64>,
    /// `central_x[k] = <(x - <x>)^k>`.
    pub central_x: Vec<f64>,
    pub central_p: Vec<f64>,
    pub variance_x: f64,
    pub variance_p: f64,
    /// `mu_3^2 / sigma^6`.
    pub skewness2_x: f64,
    pub skewness2_p: f64,
    /// `mu_4 / sigma^4` (3 for a Gaussian).
    pub kurtosis_x: f64,
    pub kurtosis_p: f64,
}

impl QuadratureStats {
    /// `<(x - <x>)^4>`.
    pub fn fourth_central_x(&self) -> f64 {
        self.central_x[4]
    }
}

#[derive(Clone, Copy)]
enum Quadrature {
    X,
    P,
}

// (x v)_n = (sqrt(n) v_{n-1} + sqrt(n+1) v_{n+1}) / sqrt 2
// (p v)_n = -i (sqrt(n+1) v_{n+1} - sqrt(n) v_{n-1}) / sqrt 2
fn apply_shifted(q: Quadrature, v: &[Complex64], shift: f64, sqrt_n: &[f64]) -> Vec<Complex64> {
    let len = v.len();
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for n in 0..len {
        let down = if n > 0 { v[n - 1] * sqrt_n[n] } else { Complex64::new(0.0, 0.0) };
        let up = if n + 1 < len { v[n + 1] * sqrt_n[n + 1] } else { Complex64::new(0.0, 0.0) };
        let w = match q {
            Quadrature::X => (down + up) * FRAC_1_SQRT_2,
            Quadrature::P => (up - down) * Complex64::new(0.0, -FRAC_1_SQRT_2),
        };
        out[n] = w - shift * v[n];
    }
    out
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

// <(q - shift)^k> for k = 0..=order; the state is padded with `order` empty
// levels so the truncated operator acts exactly on it.
fn powers(q: Quadrature, padded: &[Complex64], shift: f64, order: usize, sqrt_n: &[f64]) -> Vec<f64> {
    let half = order / 2 + 1;
    let mut chain = Vec::with_capacity(half + 1);
    chain.push(padded.to_vec());
    for j in 0..half {
        let next = apply_shifted(q, &chain[j], shift, sqrt_n);
        chain.push(next);
    }
    (0..=order)
        .map(|k| inner(&chain[k / 2], &chain[k - k / 2]).re)
        .collect()
}

/// Moments of `x = (a + a†)/sqrt 2` and `p = (a - a†)/(i sqrt 2)` up to
/// `max_order` (between 4 and 8).
pub fn quadrature_stats(state: &FockVector, max_order: usize) -> Result<QuadratureStats> {
    if !(4..=8).contains(&max_order) {
        return Err(Error::InvalidParameter(format!("max_order must be in 4..=8, got {max_order}")));
    }
    if state.cutoff() < max_order {
        return Err(Error::CutoffTooSmall {
            cutoff: state.cutoff(),
            reason: format!("quadrature moments of order {max_order} need cutoff >= {max_order}"),
        });
    }
    let mut padded = state.amplitudes().to_vec();
    padded.resize(state.dim() + max_order + 1, Complex64::new(0.0, 0.0));
    let sqrt_n: Vec<f64> = (0..padded.len()).map(|n| (n as f64).sqrt()).collect();

    let raw_x = powers(Quadrature::X, &padded, 0.0, max_order, &sqrt_n);
    let raw_p = powers(Quadrature::P, &padded, 0.0, max_order, &sqrt_n);
    let (mean_x, mean_p) = (raw_x[1], raw_p[1]);
    let central_x = powers(Quadrature::X, &padded, mean_x, max_order, &sqrt_n);
    let central_p = powers(Quadrature::P, &padded, mean_p, max_order, &sqrt_n);

    let shape = |c: &[f64]| {
        let var = c[2].max(0.0);
        (var, c[3] * c[3] / var.powi(3), c[4] / (var * var))
    };
    let (variance_x, skewness2_x, kurtosis_x) = shape(&central_x);
    let (variance_p, skewness2_p, kurtosis_p) = shape(&central_p);
    Ok(QuadratureStats {
        mean_x,
        mean_p,
        raw_x,
        raw_p,
        central_x,
        central_p,
        variance_x,
        variance_p,
        skewness2_x,
        skewness2_p,
        kurtosis_x,
        kurtosis_p,
    })
}

/// `<x> = sqrt 2 Re <a>`.
pub fn mean_x_from_a(a: Complex64) -> f64 {
    SQRT_2 * a.re
}

/// `<p> = sqrt 2 Im <a>`.
pub fn mean_p_from_a(a: Complex64) -> f64 {
    SQRT_2 * a.im
}
