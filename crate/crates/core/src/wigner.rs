//! Wigner function from the density matrix, closed forms at `t = 0`, and the
//! negativity indicator `delta = ∫|W| d²β - 1`.

use std::f64::consts::FRAC_2_PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{evolve, revival_time, TimeGrid};
use crate::fock::{density_from_pure, DensityMatrix, FockVector, ModelParams};
use crate::special::{assoc_laguerre_f64, log_factorial};

/// Minimum number of nodes per axis on a default grid.
pub const DEFAULT_GRID_POINTS: usize = 201;

/// Largest node spacing a default grid may use.
pub const DEFAULT_MAX_SPACING: f64 = 0.03;

/// Quadrature tolerance used for normalization checks and the `delta` clamp.
pub const DELTA_TOLERANCE: f64 = 2e-3;

/// Boundary values must stay below this fraction of `max |W|`.
pub const BOUNDARY_FRACTION: f64 = 1e-8;

/// Default lobe threshold as a fraction of `max W`.
pub const DEFAULT_LOBE_THRESHOLD: f64 = 0.1;

/// Square, uniformly spaced grid in the complex `beta` plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub center_re: f64,
    pub center_im: f64,
    pub half_extent: f64,
    pub points_per_axis: usize,
}

impl GridSpec {
    pub fn new(center: Complex64, half_extent: f64, points_per_axis: usize) -> Result<Self> {
        if !(half_extent > 0.0 && half_extent.is_finite()) {
            return Err(Error::InvalidParameter(format!("half_extent must be positive, got {half_extent}")));
        }
        if points_per_axis < 9 || points_per_axis.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "points_per_axis must be odd and >= 9, got {points_per_axis}"
            )));
        }
        Ok(Self { center_re: center.re, center_im: center.im, half_extent, points_per_axis })
    }

    /// `|alpha| + 4 max(1, sqrt(nu + m))`.
    pub fn default_extent(nu: f64, m: usize) -> f64 {
        nu.sqrt() + 4.0 * (nu + m as f64).sqrt().max(1.0)
    }

    /// Origin-centred grid with the default resolution for a state. The
    /// extent is [`GridSpec::default_extent`], capped at `sqrt(N_max) + 2`
    /// beyond which no retained Fock level carries weight.
    pub fn for_state(params: &ModelParams) -> Self {
        Self::for_states(std::slice::from_ref(params))
    }

    /// Smallest default grid that covers every state in `params`.
    pub fn for_states(params: &[ModelParams]) -> Self {
        let half_extent = params
            .iter()
            .map(|p| Self::default_extent(p.nu, p.m).min((p.cutoff as f64).sqrt() + 2.0))
            .fold(1.0, f64::max);
        Self { center_re: 0.0, center_im: 0.0, half_extent, points_per_axis: Self::default_points(half_extent) }
    }

    /// At least [`DEFAULT_GRID_POINTS`] nodes, at most [`DEFAULT_MAX_SPACING`] apart.
    pub fn default_points(half_extent: f64) -> usize {
        let needed = (2.0 * half_extent / DEFAULT_MAX_SPACING).ceil() as usize + 1;
        (needed | 1).max(DEFAULT_GRID_POINTS)
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(self.center_re, self.center_im)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_extent / (self.points_per_axis - 1) as f64
    }

    /// Coordinate of node `i` along an axis centred on `c`.
    fn coord(&self, c: f64, i: usize) -> f64 {
        c - self.half_extent + self.spacing() * i as f64
    }

    /// `beta` at node `(i, j)`; `i` indexes `Re beta`, `j` indexes `Im beta`.
    pub fn node(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.coord(self.center_re, i), self.coord(self.center_im, j))
    }

    /// Same window with `2n - 1` nodes per axis.
    pub fn refined(&self) -> Self {
        Self { points_per_axis: 2 * self.points_per_axis - 1, ..*self }
    }
}

/// Precomputed series coefficients for one density matrix.
pub struct WignerEvaluator {
    diagonals: Vec<Diagonal>,
}

/// Offset-`k` diagonal `rho_{l, l+k}` with everything but the `beta`
/// dependence folded into `coef`.
struct Diagonal {
    k: usize,
    /// `-(1/2) ln k!`
    half_log_fact: f64,
    /// `w_k (-1)^l rho_{l,l+k} sqrt(l! k! / (l+k)!)`, `w_0 = 1`, `w_k = 2`
    coef: Vec<Complex64>,
    /// `L_{l+1}^k = (a_l - x inv_l) L_l^k - c_l L_{l-1}^k`
    a: Vec<f64>,
    inv: Vec<f64>,
    c: Vec<f64>,
}

/// Populations below this are dropped; coherences with them are then
/// bounded by `sqrt` of it.
const POPULATION_FLOOR: f64 = 1e-30;

impl WignerEvaluator {
    pub fn new(rho: &DensityMatrix) -> Self {
        let dim = (0..rho.dim())
            .rev()
            .find(|&n| rho.get(n, n).re > POPULATION_FLOOR)
            .map_or(1, |n| n + 1);
        let mut diagonals = Vec::with_capacity(dim);
        for k in 0..dim {
            let len = dim - k;
            let kf = k as f64;
            let weight = if k == 0 { 1.0 } else { 2.0 };
            let mut coef = Vec::with_capacity(len);
            // sqrt(l! k! / (l+k)!)
            let mut norm = 1.0;
            for l in 0..len {
                let sign = if l % 2 == 0 { weight } else { -weight };
                coef.push(rho.get(l, l + k) * (sign * norm));
                norm *= ((l + 1) as f64 / (l + k + 1) as f64).sqrt();
            }
            if coef.iter().all(|c| c.norm_sqr() == 0.0) {
                continue;
            }
            let a = (0..len).map(|l| (2.0 * l as f64 + 1.0 + kf) / (l as f64 + 1.0)).collect();
            let inv = (0..len).map(|l| 1.0 / (l as f64 + 1.0)).collect();
            let c = (0..len).map(|l| (l as f64 + kf) / (l as f64 + 1.0)).collect();
            diagonals.push(Diagonal { k, half_log_fact: -0.5 * log_factorial(k), coef, a, inv, c });
        }
        Self { diagonals }
    }

    /// `W(beta)` from the Fock-basis series, summed over `0 <= l <= n <= N_max`
    /// with `l` ascending inside each diagonal offset `k = n - l`.
    pub fn eval(&self, beta: Complex64) -> f64 {
        let r2 = beta.norm_sqr();
        let x = 4.0 * r2;
        let r = r2.sqrt();
        let log_2r = (2.0 * r).ln();
        let unit = if r > 0.0 { beta / r } else { Complex64::new(1.0, 0.0) };
        let mut total = 0.0;
        for d in &self.diagonals {
            if d.k > 0 && r == 0.0 {
                break;
            }
            let mut prev = 0.0;
            let mut lag = 1.0;
            let (mut re, mut im) = (0.0, 0.0);
            for l in 0..d.coef.len() {
                re += d.coef[l].re * lag;
                im += d.coef[l].im * lag;
                let next = (d.a[l] - x * d.inv[l]) * lag - d.c[l] * prev;
                prev = lag;
                lag = next;
            }
            // e^{-2r^2} (2r)^k / sqrt(k!)
            let kf = d.k as f64;
            let log_base = -2.0 * r2 + if d.k > 0 { kf * log_2r } else { 0.0 } + d.half_log_fact;
            let phase = unit.powu(d.k as u32);
            total += log_base.exp() * (re * phase.re - im * phase.im);
        }
        FRAC_2_PI * total
    }
}

/// `W(beta)` for density matrix `rho`.
pub fn wigner_point(rho: &DensityMatrix, beta: Complex64) -> f64 {
    WignerEvaluator::new(rho).eval(beta)
}

/// `(2/pi) e^{-2|alpha - beta|^2}`.
pub fn wigner_cs_closed(beta: Complex64, params: &ModelParams) -> f64 {
    FRAC_2_PI * (-2.0 * (params.alpha() - beta).norm_sqr()).exp()
}

/// `2 (-1)^m L_m(|2 beta - alpha|^2) e^{-2|alpha - beta|^2} / (pi L_m(-nu))`.
pub fn wigner_pacs_closed(beta: Complex64, params: &ModelParams) -> f64 {
    let alpha = params.alpha();
    let m = params.m;
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let lm = assoc_laguerre_f64(m, 0, -params.nu);
    sign * FRAC_2_PI / lm
        * assoc_laguerre_f64(m, 0, (2.0 * beta - alpha).norm_sqr())
        * (-2.0 * (alpha - beta).norm_sqr()).exp()
}

/// `W` sampled on a [`GridSpec`].
#[derive(Clone, Debug, PartialEq)]
pub struct WignerField {
    pub grid: GridSpec,
    /// Row-major: `values[i * n + j]` at `Re beta` node `i`, `Im beta` node `j`.
    pub values: Vec<f64>,
    pub t: f64,
}

impl WignerField {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.points_per_axis + j]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Nodes with `W < -1e-9 max|W|`.
    pub fn negative_cells(&self) -> usize {
        let scale = self.values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        self.values.iter().filter(|&&v| v < -1e-9 * scale).count()
    }

    /// Simpson estimate of `∫ W d²beta`.
    pub fn integral(&self) -> f64 {
        simpson_2d(&self.values, self.grid.points_per_axis, self.grid.spacing())
    }

    /// Interior nodes strictly larger than all 8 neighbours and above
    /// `threshold_fraction * max W`.
    pub fn count_local_maxima(&self, threshold_fraction: f64) -> usize {
        let n = self.grid.points_per_axis;
        let threshold = threshold_fraction * self.max();
        let mut count = 0;
        for i in 1..n - 1 {
            for j in 1..n - 1 {
                let v = self.get(i, j);
                if v <= threshold {
                    continue;
                }
                let dominant = (i - 1..=i + 1)
                    .flat_map(|a| (j - 1..=j + 1).map(move |b| (a, b)))
                    .filter(|&(a, b)| (a, b) != (i, j))
                    .all(|(a, b)| v > self.get(a, b));
                if dominant {
                    count += 1;
                }
            }
        }
        count
    }

    pub fn boundary_max_abs(&self) -> f64 {
        let n = self.grid.points_per_axis;
        let mut m: f64 = 0.0;
        for k in 0..n {
            for (i, j) in [(0, k), (n - 1, k), (k, 0), (k, n - 1)] {
                m = m.max(self.get(i, j).abs());
            }
        }
        m
    }
}

/// Evaluates `W` on every grid node; output is independent of thread count.
pub fn wigner_grid(rho: &DensityMatrix, grid: &GridSpec) -> WignerField {
    let eval = WignerEvaluator::new(rho);
    let n = grid.points_per_axis;
    let values = (0..n * n)
        .into_par_iter()
        .map(|idx| eval.eval(grid.node(idx / n, idx % n)))
        .collect();
    WignerField { grid: *grid, values, t: 0.0 }
}

fn simpson_weights(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i == 0 || i == n - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            }
        })
        .collect()
}

/// Composite Simpson rule on an `n x n` row-major sample array with spacing `h`.
pub fn simpson_2d(values: &[f64], n: usize, h: f64) -> f64 {
    let w = simpson_weights(n);
    let mut acc = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += w[j] * values[i * n + j];
        }
        acc += w[i] * row;
    }
    acc * (h / 3.0).powi(2)
}

/// Negativity indicator on a grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DeltaValue {
    /// `∫|W| - 1` as integrated.
    pub raw: f64,
    /// `raw`, with small negative values (within [`DELTA_TOLERANCE`]) set to 0.
    pub clamped: f64,
    /// `∫ W`, which should be 1.
    pub integral: f64,
    pub min_w: f64,
    pub max_w: f64,
}

/// `delta` from an already sampled field.
pub fn delta_from_field(field: &WignerField) -> Result<DeltaValue> {
    let max_abs = field.values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let boundary = field.boundary_max_abs();
    if boundary >= BOUNDARY_FRACTION * max_abs {
        return Err(Error::GridTooSmall { boundary, max: max_abs });
    }
    let n = field.grid.points_per_axis;
    let h = field.grid.spacing();
    let abs: Vec<f64> = field.values.iter().map(|v| v.abs()).collect();
    let raw = simpson_2d(&abs, n, h) - 1.0;
    let clamped = if raw < 0.0 && raw > -DELTA_TOLERANCE { 0.0 } else { raw };
    Ok(DeltaValue { raw, clamped, integral: field.integral(), min_w: field.min(), max_w: field.max() })
}

/// `delta = ∫ |W| d²beta - 1` by composite Simpson quadrature.
pub fn delta(rho: &DensityMatrix, grid: &GridSpec) -> Result<DeltaValue> {
    delta_from_field(&wigner_grid(rho, grid))
}

/// One sample of a `delta` time scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DeltaSample {
    pub t: f64,
    pub t_over_trev: f64,
    pub delta: DeltaValue,
}

/// Evolves `state0` over `times` and integrates `delta` at every sample.
pub fn delta_timescan(state0: &FockVector, times: &TimeGrid, grid: &GridSpec, chi: f64) -> Result<Vec<DeltaSample>> {
    let t_rev = revival_time(chi);
    times
        .times(chi)
        .into_par_iter()
        .map(|t| {
            let rho = density_from_pure(&evolve(state0, t, chi));
            let delta = delta(&rho, grid).map_err(|e| e.at_time(t))?;
            Ok(DeltaSample { t, t_over_trev: t / t_rev, delta })
        })
        .collect()
}

/// `W` at time `t` for an initial pure state, on a grid.
pub fn wigner_at(state0: &FockVector, t: f64, chi: f64, grid: &GridSpec) -> WignerField {
    let rho = density_from_pure(&evolve(state0, t, chi));
    WignerField { t, ..wigner_grid(&rho, grid) }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{make_coherent, make_pacs};
    use std::f64::consts::PI;

    const CHI: f64 = 5.0;

    fn params(nu: f64, theta: f64, m: usize) -> ModelParams {
        ModelParams::new(CHI, nu, theta, m).unwrap()
    }

    #[test]
    fn pinned_points() {
        let vac = density_from_pure(&FockVector::vacuum(6));
        assert!((wigner_point(&vac, Complex64::new(0.0, 0.0)) - FRAC_2_PI).abs() < 1e-14);

        let p = params(1.0, 0.0, 0);
        let rho = density_from_pure(&make_coherent(&p).unwrap());
        assert!((wigner_point(&rho, p.alpha()) - FRAC_2_PI).abs() < 1e-10);

        let p = params(1.0, 0.0, 1);
        let rho = density_from_pure(&make_pacs(&p).unwrap());
        let expected = -(-0.5_f64).exp() / PI;
        assert!((wigner_point(&rho, Complex64::new(0.5, 0.0)) - expected).abs() < 1e-8);
        assert!((wigner_pacs_closed(Complex64::new(0.5, 0.0), &p) - expected).abs() < 1e-15);
    }

    #[test]
    fn closed_forms() {
        let p = params(1.0, 0.3, 0);
        assert!((wigner_cs_closed(p.alpha(), &p) - FRAC_2_PI).abs() < 1e-15);
        let beta = p.alpha() + Complex64::from_polar(1.0, 0.4);
        assert!((wigner_cs_closed(beta, &p) - FRAC_2_PI * (-2.0_f64).exp()).abs() < 1e-15);
        for i in 0..10 {
            let beta = Complex64::new(0.3 * i as f64 - 1.0, 0.2 * i as f64 - 0.5);
            assert!((wigner_pacs_closed(beta, &p) - wigner_cs_closed(beta, &p)).abs() < 1e-15);
        }
    }

    #[test]
    fn series_vs_closed_complex_alpha() {
        let p = params(0.8, 2.1, 2);
        let rho = density_from_pure(&make_pacs(&p).unwrap());
        for i in 0..25 {
            let beta = Complex64::from_polar(0.15 * i as f64, 0.7 * i as f64);
            let d = wigner_point(&rho, beta) - wigner_pacs_closed(beta, &p);
            assert!(d.abs() < 1e-8, "beta={beta}");
        }
    }

    #[test]
    fn grid_construction() {
        let g = GridSpec::new(Complex64::new(0.5, -0.5), 2.0, 9).unwrap();
        assert_eq!(g.spacing(), 0.5);
        assert_eq!(g.node(4, 4), Complex64::new(0.5, -0.5));
        assert_eq!(g.node(0, 8), Complex64::new(-1.5, 1.5));
        assert!(GridSpec::new(Complex64::new(0.0, 0.0), 2.0, 10).is_err());
        assert!(GridSpec::new(Complex64::new(0.0, 0.0), 0.0, 11).is_err());
        assert_eq!(g.refined().points_per_axis, 17);
    }

    #[test]
    fn simpson_exact_for_cubics() {
        let n = 11;
        let h = 0.2;
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let (x, y) = (h * i as f64, h * j as f64);
                v[i * n + j] = x * x * x + x * y * y + 1.0;
            }
        }
        // over [0,2]^2: 8 + 16/3 + 4
        assert!((simpson_2d(&v, n, h) - (8.0 + 16.0 / 3.0 + 4.0)).abs() < 1e-12);
    }

    #[test]
    fn vacuum_field() {
        let rho = density_from_pure(&FockVector::vacuum(4));
        let grid = GridSpec::new(Complex64::new(0.0, 0.0), 4.0, 41).unwrap();
        let f = wigner_grid(&rho, &grid);
        let n = grid.points_per_axis;
        assert_eq!(f.get(n / 2, n / 2), f.max());
        // radial symmetry under the grid's 90-degree rotation
        for i in 0..n {
            for j in 0..n {
                assert!((f.get(i, j) - f.get(j, n - 1 - i)).abs() < 1e-10);
            }
        }
        let d = delta_from_field(&f).unwrap();
        assert!(d.raw.abs() < DELTA_TOLERANCE);
        assert!((d.integral - 1.0).abs() < DELTA_TOLERANCE);
        assert_eq!(f.count_local_maxima(DEFAULT_LOBE_THRESHOLD), 1);
    }

    #[test]
    fn grid_too_small() {
        let p = params(4.0, 0.0, 0);
        let rho = density_from_pure(&make_coherent(&p).unwrap());
        let grid = GridSpec::new(Complex64::new(0.0, 0.0), 1.0, 21).unwrap();
        assert!(matches!(delta(&rho, &grid), Err(Error::GridTooSmall { .. })));
    }

    #[test]
    fn negativity_grows_with_m() {
        let grid = GridSpec::new(Complex64::new(0.0, 0.0), 7.0, 141).unwrap();
        let d1 = delta(&density_from_pure(&make_pacs(&params(1.0, 0.0, 1)).unwrap()), &grid).unwrap();
        let d3 = delta(&density_from_pure(&make_pacs(&params(1.0, 0.0, 3)).unwrap()), &grid).unwrap();
        assert!(d1.raw > 0.0 && d3.raw > d1.raw);
        assert!(d1.min_w < 0.0);
    }
}
