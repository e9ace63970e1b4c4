//! Exact evolution under `H = chi N (N - 1)` and the revival calendar.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, FockVector};

/// How [`TimeGrid`] endpoints are expressed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeUnit {
    Absolute,
    /// Fractions of the revival time `pi / chi`.
    RevivalFraction,
}

/// Uniform sampling of `[start, end]`, both endpoints included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start: f64,
    pub end: f64,
    pub samples: usize,
    pub unit: TimeUnit,
}

impl TimeGrid {
    pub fn new(start: f64, end: f64, samples: usize, unit: TimeUnit) -> Result<Self> {
        if !(start < end) || !start.is_finite() || !end.is_finite() {
            return Err(Error::InvalidParameter(format!("time grid needs start < end, got [{start}, {end}]")));
        }
        if samples < 2 {
            return Err(Error::InvalidParameter(format!("time grid needs >= 2 samples, got {samples}")));
        }
        Ok(Self { start, end, samples, unit })
    }

    /// `samples` points over `[0, periods * T_rev]`.
    pub fn revival_periods(periods: f64, samples: usize) -> Result<Self> {
        Self::new(0.0, periods, samples, TimeUnit::RevivalFraction)
    }

    /// Absolute sample times for susceptibility `chi`.
    pub fn times(&self, chi: f64) -> Vec<f64> {
        let scale = match self.unit {
            TimeUnit::Absolute => 1.0,
            TimeUnit::RevivalFraction => revival_time(chi),
        };
        let step = (self.end - self.start) / (self.samples - 1) as f64;
        (0..self.samples)
            .map(|i| {
                let u = if i + 1 == self.samples { self.end } else { self.start + step * i as f64 };
                u * scale
            })
            .collect()
    }
}

/// Revival time `pi / chi`.
pub fn revival_time(chi: f64) -> f64 {
    PI / chi
}

/// Fractional revival instants `pi j / (k chi)` with `gcd(j, k) = 1`, so
/// each instant is attributed to the smallest `k` that produces it.
pub fn fractional_revival_times(k: usize, chi: f64) -> Result<Vec<f64>> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("fractional revival order must be >= 2, got {k}")));
    }
    Ok((1..k)
        .filter(|&j| gcd(j, k) == 1)
        .map(|j| PI * j as f64 / (k as f64 * chi))
        .collect())
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Kerr phase angle `chi n (n-1) t`, reduced into `[0, 2pi)`.
#[inline]
pub(crate) fn kerr_phase(n: usize, chi: f64, t: f64) -> f64 {
    // 2pi = TAU + TAU_LO to about 1e-32
    const TAU_LO: f64 = 2.449_293_598_294_706_4e-16;
    let k = (n * n.saturating_sub(1)) as f64;
    // chi t = ct + ct_err and k ct = kt + kt_err, both exactly
    let ct = chi * t;
    let ct_err = chi.mul_add(t, -ct);
    let kt = k * ct;
    let kt_err = k.mul_add(ct, -kt);
    let turns = (kt / TAU).floor();
    let reduced = (-turns).mul_add(TAU, kt) - turns * TAU_LO + (kt_err + k * ct_err);
    reduced.rem_euclid(TAU)
}

/// `c_n(t) = c_n(0) e^{-i chi n(n-1) t}`.
pub fn evolve(state: &FockVector, t: f64, chi: f64) -> FockVector {
    let amplitudes = state
        .amplitudes()
        .par_iter()
        .enumerate()
        .map(|(n, &c)| c * Complex64::from_polar(1.0, -kerr_phase(n, chi, t)))
        .collect();
    FockVector::from_amplitudes(amplitudes).expect("evolution preserves dimension")
}

/// `rho_{ln}(t) = rho_{ln}(0) e^{-i chi [l(l-1) - n(n-1)] t}`.
pub fn evolve_density(rho: &DensityMatrix, t: f64, chi: f64) -> DensityMatrix {
    let phases: Vec<Complex64> = (0..rho.dim())
        .map(|n| Complex64::from_polar(1.0, -kerr_phase(n, chi, t)))
        .collect();
    let out = rho.map_entries(|l, n, v| if l == n { v } else { v * phases[l] * phases[n].conj() });
    DensityMatrix::from_entries(out.dim(), out.entries().to_vec()).expect("same dimension")
}

/// `|<a|b>|^2`.
pub fn autocorrelation(a: &FockVector, b: &FockVector) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    let overlap: Complex64 = a
        .amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| x.conj() * y)
        .sum();
    Ok(overlap.norm_sqr())
}
