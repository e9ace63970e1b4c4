//! Coherent and photon-added coherent states on a truncated number basis.

use std::f64::consts::TAU;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{assoc_laguerre_f64, log_factorial};

/// Default tail probability allowed beyond the Fock cutoff.
pub const DEFAULT_TAIL_EPSILON: f64 = 1e-12;

/// Extra levels appended past the tail cutoff so moments up to order 8
/// do not see the truncation edge.
pub const CUTOFF_HEADROOM: usize = 8;

const CUTOFF_SEARCH_CAP: usize = 1_000_000;

/// Physical configuration of a run together with the Fock truncation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Kerr susceptibility, radians per unit time.
    pub chi: f64,
    /// Mean photon number of the underlying coherent state, `|alpha|^2`.
    pub nu: f64,
    /// Argument of alpha in `[0, 2pi)`.
    pub theta: f64,
    /// Number of added photons.
    pub m: usize,
    /// Highest retained Fock level `N_max`.
    pub cutoff: usize,
}

impl ModelParams {
    /// Builds parameters with a cutoff chosen for [`DEFAULT_TAIL_EPSILON`]
    /// plus [`CUTOFF_HEADROOM`] levels.
    pub fn new(chi: f64, nu: f64, theta: f64, m: usize) -> Result<Self> {
        Self::with_tail_epsilon(chi, nu, theta, m, DEFAULT_TAIL_EPSILON)
    }

    pub fn with_tail_epsilon(chi: f64, nu: f64, theta: f64, m: usize, tail_epsilon: f64) -> Result<Self> {
        if !(chi > 0.0 && chi.is_finite()) {
            return Err(Error::InvalidParameter(format!("chi must be positive, got {chi}")));
        }
        if !(nu >= 0.0 && nu.is_finite()) {
            return Err(Error::InvalidParameter(format!("nu must be >= 0, got {nu}")));
        }
        if !theta.is_finite() {
            return Err(Error::InvalidParameter(format!("theta must be finite, got {theta}")));
        }
        let cutoff = choose_cutoff(nu, m, tail_epsilon)? + CUTOFF_HEADROOM;
        Ok(Self { chi, nu, theta: theta.rem_euclid(TAU), m, cutoff })
    }

    /// Same physics, explicit cutoff.
    pub fn with_cutoff(self, cutoff: usize) -> Self {
        Self { cutoff, ..self }
    }

    pub fn with_m(self, m: usize) -> Self {
        Self { m, ..self }
    }

    /// `alpha = sqrt(nu) e^{i theta}`.
    pub fn alpha(&self) -> Complex64 {
        Complex64::from_polar(self.nu.sqrt(), self.theta)
    }

    /// `x0 = sqrt(2 nu) cos(theta)`.
    pub fn x0(&self) -> f64 {
        (2.0 * self.nu).sqrt() * self.theta.cos()
    }

    /// `p0 = sqrt(2 nu) sin(theta)`.
    pub fn p0(&self) -> f64 {
        (2.0 * self.nu).sqrt() * self.theta.sin()
    }

    pub fn revival_time(&self) -> f64 {
        crate::evolution::revival_time(self.chi)
    }
}

/// Pure state as complex amplitudes `c_0 ..= c_{N_max}`.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    amplitudes: Vec<Complex64>,
}

impl FockVector {
    /// Wraps amplitudes as given (no renormalization).
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidParameter("empty amplitude vector".into()));
        }
        Ok(Self { amplitudes })
    }

    /// Fock vacuum `|0>` on levels `0..=cutoff`.
    pub fn vacuum(cutoff: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); cutoff + 1];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Highest retained level.
    pub fn cutoff(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn photon_distribution(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(n, c)| n as f64 * c.norm_sqr())
            .sum()
    }

    fn renormalized(mut self) -> Self {
        let norm = self.norm_sqr().sqrt();
        for c in &mut self.amplitudes {
            *c /= norm;
        }
        self
    }
}

/// Hermitian density matrix `rho_{ln}` stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    /// Builds from a row-major entry list; the lower triangle is
    /// overwritten by the conjugate of the upper one.
    pub fn from_entries(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { left: dim * dim, right: entries.len() });
        }
        let mut rho = Self { dim, entries };
        for l in 0..dim {
            let d = rho.entries[l * dim + l];
            rho.entries[l * dim + l] = Complex64::new(d.re, 0.0);
            for n in (l + 1)..dim {
                rho.entries[n * dim + l] = rho.entries[l * dim + n].conj();
            }
        }
        Ok(rho)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cutoff(&self) -> usize {
        self.dim - 1
    }

    #[inline]
    pub fn get(&self, l: usize, n: usize) -> Complex64 {
        self.entries[l * self.dim + n]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|l| self.get(l, l).re).sum()
    }

    pub fn is_hermitian(&self) -> bool {
        (0..self.dim).all(|l| (l..self.dim).all(|n| self.get(l, n) == self.get(n, l).conj()))
    }

    pub(crate) fn map_entries(&self, mut f: impl FnMut(usize, usize, Complex64) -> Complex64) -> Self {
        let dim = self.dim;
        let entries = self
            .entries
            .iter()
            .enumerate()
            .map(|(idx, &v)| f(idx / dim, idx % dim, v))
            .collect();
        Self { dim, entries }
    }

    /// Serializes to the sparse JSON layout
    /// `{"dim": D, "entries": [[l, n, re, im], ...]}`.
    pub fn to_json(&self) -> Result<String> {
        let mut entries = Vec::new();
        for l in 0..self.dim {
            for n in 0..self.dim {
                let v = self.get(l, n);
                if v.norm() > 1e-15 {
                    entries.push(SparseEntry(l, n, v.re, v.im));
                }
            }
        }
        Ok(serde_json::to_string(&DensityFile { dim: self.dim, entries })?)
    }

    /// Parses the sparse JSON layout. Each listed entry also sets its
    /// Hermitian partner; a listed partner must agree within 1e-12.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: DensityFile = serde_json::from_str(text)?;
        if file.dim == 0 {
            return Err(Error::Format("dim must be >= 1".into()));
        }
        let dim = file.dim;
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        let mut seen = vec![false; dim * dim];
        for SparseEntry(l, n, re, im) in file.entries {
            if l >= dim || n >= dim {
                return Err(Error::Format(format!("index ({l}, {n}) outside dim {dim}")));
            }
            let v = Complex64::new(re, im);
            if l == n && im.abs() > 1e-12 {
                return Err(Error::Format(format!("diagonal entry ({l}, {l}) is not real")));
            }
            if seen[n * dim + l] && (entries[n * dim + l].conj() - v).norm() > 1e-12 {
                return Err(Error::Format(format!("entries ({l}, {n}) and ({n}, {l}) are not Hermitian partners")));
            }
            entries[l * dim + n] = v;
            entries[n * dim + l] = v.conj();
            seen[l * dim + n] = true;
            seen[n * dim + l] = true;
        }
        Self::from_entries(dim, entries)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
struct DensityFile {
    dim: usize,
    entries: Vec<SparseEntry>,
}

#[derive(Serialize, Deserialize)]
struct SparseEntry(usize, usize, f64, f64);

/// `ln p_n` of the photon-added coherent state, `n >= m`.
fn log_pacs_probability(n: usize, nu: f64, m: usize, log_norm: f64) -> f64 {
    let k = n - m;
    -nu + k as f64 * nu.ln() + log_factorial(n) - 2.0 * log_factorial(k) - log_factorial(m) - log_norm
}

/// Smallest `N_max >= m + 1` such that the photon-number mass of the
/// `m`-photon-added coherent state above `N_max` is below `tail_epsilon`.
pub fn choose_cutoff(nu: f64, m: usize, tail_epsilon: f64) -> Result<usize> {
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(Error::InvalidParameter(format!("nu must be >= 0, got {nu}")));
    }
    if !(tail_epsilon > 0.0 && tail_epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("tail_epsilon must lie in (0, 1), got {tail_epsilon}")));
    }
    if nu == 0.0 {
        // all mass sits on n = m
        return Ok(m + 1);
    }
    let log_norm = assoc_laguerre_f64(m, 0, -nu).ln();
    let floor = tail_epsilon * 1e-4;
    let mut probs = Vec::new();
    let mut n = m;
    loop {
        let p = log_pacs_probability(n, nu, m, log_norm).exp();
        probs.push(p);
        // successive ratio nu (n+1) / (n+1-m)^2 decreases monotonically past the mode
        let ratio = nu * (n + 1) as f64 / (((n + 1 - m) as f64).powi(2));
        if ratio < 0.5 && p < floor {
            break;
        }
        n += 1;
        if n - m > CUTOFF_SEARCH_CAP {
            return Err(Error::CutoffSearchExhausted { nu, m, cap: CUTOFF_SEARCH_CAP });
        }
    }
    // tail[i] = sum of probs strictly above index i
    let mut tail = 0.0;
    let mut answer = m + probs.len() - 1;
    for i in (0..probs.len()).rev() {
        if tail < tail_epsilon {
            answer = m + i;
        } else {
            break;
        }
        tail += probs[i];
    }
    Ok(answer.max(m + 1))
}

fn pacs_amplitudes(params: &ModelParams, m: usize) -> Result<FockVector> {
    if params.cutoff < 1 {
        return Err(Error::CutoffTooSmall { cutoff: params.cutoff, reason: "need at least levels 0 and 1".into() });
    }
    if params.cutoff <= m {
        return Err(Error::CutoffTooSmall {
            cutoff: params.cutoff,
            reason: format!("photon-added state with m = {m} needs cutoff > m"),
        });
    }
    let nu = params.nu;
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); params.cutoff + 1];
    if nu == 0.0 {
        amplitudes[m] = Complex64::new(1.0, 0.0);
        return Ok(FockVector { amplitudes });
    }
    let log_norm = assoc_laguerre_f64(m, 0, -nu).ln();
    let ln_nu = nu.ln();
    for (n, c) in amplitudes.iter_mut().enumerate().skip(m) {
        let k = n - m;
        let log_mod = -0.5 * nu + 0.5 * k as f64 * ln_nu + 0.5 * log_factorial(n)
            - log_factorial(k)
            - 0.5 * log_factorial(m)
            - 0.5 * log_norm;
        let phase = (k as f64 * params.theta).rem_euclid(TAU);
        *c = Complex64::from_polar(log_mod.exp(), phase);
    }
    Ok(FockVector { amplitudes }.renormalized())
}

/// Coherent state `|alpha>`, renormalized on the truncated basis. `params.m`
/// is ignored.
pub fn make_coherent(params: &ModelParams) -> Result<FockVector> {
    pacs_amplitudes(params, 0)
}

/// Photon-added coherent state `|alpha, m> ∝ (a†)^m |alpha>`.
pub fn make_pacs(params: &ModelParams) -> Result<FockVector> {
    pacs_amplitudes(params, params.m)
}

/// Outer product `rho_{ln} = c_l conj(c_n)`.
pub fn density_from_pure(state: &FockVector) -> DensityMatrix {
    let dim = state.dim();
    let c = state.amplitudes();
    let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
    for l in 0..dim {
        entries[l * dim + l] = Complex64::new(c[l].norm_sqr(), 0.0);
        for n in (l + 1)..dim {
            let v = c[l] * c[n].conj();
            entries[l * dim + n] = v;
            entries[n * dim + l] = v.conj();
        }
    }
    DensityMatrix { dim, entries }
}

/// Norm of `(1 - m/(1+N)) a|psi> - alpha|psi>` on the truncated basis.
pub fn verify_nonlinear_eigenstate(state: &FockVector, params: &ModelParams) -> f64 {
    let c = state.amplitudes();
    let alpha = params.alpha();
    let m = params.m as f64;
    let mut acc = 0.0;
    for n in 0..c.len() {
        let lowered = if n + 1 < c.len() {
            c[n + 1] * ((n + 1) as f64).sqrt()
        } else {
            Complex64::new(0.0, 0.0)
        };
        let r = lowered * (1.0 - m / (1.0 + n as f64)) - alpha * c[n];
        acc += r.norm_sqr();
    }
    acc.sqrt()
}
