//! Joint spectral amplitude of pulsed type-II down-conversion.
//!
//! The amplitude is the product of the pump envelope, evaluated at the sum
//! frequency, and the phase-matching function `sinc(dk L / 2)`. From it we get
//! the polarization visibility (the overlap of the amplitude with its
//! exchange), the coincidence rate after spectral filtering, and the spectral
//! overlap parameter used by the mode model.

mod grid;
mod overlap;
mod sweep;

pub use grid::{FrequencyGrid, GridConfig, SpectralBandwidths, MIN_SPAN_RATIO};
pub use overlap::{spectral_overlap, spectral_overlap_with, OverlapResult};
pub use sweep::{bandwidth_for_visibility, filter_sweep, FilterSweepRow, VisibilityCrossing};

use std::f64::consts::LN_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dispersion::{
    nm_width_to_omega, omega_from_wavelength_um, wavelength_um_from_omega, CrystalSpec,
    Polarization, SellmeierModel,
};
use crate::error::{Error, Result};
use crate::exec::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PumpShape {
    #[default]
    Gaussian,
}

/// Pulsed pump with a Gaussian spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PumpSpec {
    pub center_nm: f64,
    /// Intensity FWHM in nanometers.
    pub fwhm_nm: f64,
    pub shape: PumpShape,
}

impl Default for PumpSpec {
    fn default() -> Self {
        Self {
            center_nm: 390.0,
            fwhm_nm: 1.0,
            shape: PumpShape::Gaussian,
        }
    }
}

impl PumpSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.center_nm > 0.0 && self.center_nm.is_finite()) {
            return Err(Error::invalid("pump.center_nm", "must be > 0"));
        }
        if !(self.fwhm_nm > 0.0 && self.fwhm_nm.is_finite()) {
            return Err(Error::invalid("pump.fwhm_nm", "must be > 0"));
        }
        Ok(())
    }

    pub fn omega(&self) -> Result<f64> {
        self.validate()?;
        Ok(omega_from_wavelength_um(self.center_nm * 1e-3))
    }

    /// Intensity FWHM in rad/s.
    pub fn fwhm_omega(&self) -> f64 {
        nm_width_to_omega(self.fwhm_nm, self.center_nm)
    }

    /// Field envelope at detuning `d` (rad/s) from the pump centre; unity at
    /// `d = 0`, intensity falls to one half at `d = fwhm / 2`.
    pub fn envelope(&self, d: f64) -> f64 {
        let w = self.fwhm_omega();
        (-2.0 * LN_2 * (d / w).powi(2)).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    #[default]
    None,
    Gaussian,
}

/// Identical spectral filters in front of both detectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterSpec {
    pub kind: FilterKind,
    pub center_nm: f64,
    /// Half-width at 1/e of the amplitude transmission, nanometers.
    pub half_width_nm: f64,
}

impl Default for FilterSpec {
    fn default() -> Self {
        Self {
            kind: FilterKind::None,
            center_nm: 780.0,
            half_width_nm: 5.0,
        }
    }
}

impl FilterSpec {
    pub fn gaussian(half_width_nm: f64) -> Self {
        Self {
            kind: FilterKind::Gaussian,
            half_width_nm,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.center_nm > 0.0 && self.center_nm.is_finite()) {
            return Err(Error::invalid("filter.center_nm", "must be > 0"));
        }
        if self.kind == FilterKind::Gaussian && !(self.half_width_nm > 0.0) {
            return Err(Error::invalid("filter.half_width_nm", "must be > 0"));
        }
        Ok(())
    }

    /// Gaussian standard deviation `sigma` (rad/s) of the amplitude
    /// transmission `exp(-(w - wc)^2 / (2 sigma^2))`.
    pub fn sigma_omega(&self) -> f64 {
        nm_width_to_omega(self.half_width_nm, self.center_nm) / std::f64::consts::SQRT_2
    }

    /// Amplitude transmission at `omega`.
    pub fn transmission(&self, omega: f64) -> f64 {
        match self.kind {
            FilterKind::None => 1.0,
            FilterKind::Gaussian => {
                let wc = omega_from_wavelength_um(self.center_nm * 1e-3);
                let s = self.sigma_omega();
                if s.is_infinite() {
                    return 1.0;
                }
                (-(omega - wc).powi(2) / (2.0 * s * s)).exp()
            }
        }
    }
}

/// Options for the phase-matching function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JsaOptions {
    /// Multiply the sinc by `exp(i dk L / 2)`.
    pub propagation_phase: bool,
    /// Remove the relative o/e group delay (half the crystal's birefringent
    /// delay) carried by the propagation phase, as ideal temporal walk-off
    /// compensation does. Only meaningful with `propagation_phase`.
    pub walkoff_compensation: bool,
}

impl Default for JsaOptions {
    fn default() -> Self {
        Self {
            propagation_phase: true,
            walkoff_compensation: true,
        }
    }
}

/// Joint spectral amplitude sampled on a square grid.
///
/// Row index is the ordinary frequency, column index the extraordinary one.
#[derive(Debug, Clone, PartialEq)]
pub struct Jsa {
    grid: FrequencyGrid,
    amplitude: Vec<Complex64>,
    norm: f64,
}

impl Jsa {
    /// Wraps an amplitude matrix (row-major, `n * n`).
    pub fn from_amplitude(grid: FrequencyGrid, amplitude: Vec<Complex64>) -> Result<Self> {
        if amplitude.len() != grid.n * grid.n {
            return Err(Error::invalid("amplitude", "length must be n * n"));
        }
        if amplitude
            .iter()
            .any(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::invalid(
                "amplitude",
                "contains NaN or infinite entries",
            ));
        }
        let norm = norm_of(&grid, &amplitude);
        Ok(Self {
            grid,
            amplitude,
            norm,
        })
    }

    /// Builds `f(w_o, w_e) = g(w_o) h(w_e)` from two sampled functions.
    pub fn factorized(grid: FrequencyGrid, g: &[Complex64], h: &[Complex64]) -> Result<Self> {
        if g.len() != grid.n || h.len() != grid.n {
            return Err(Error::invalid("factors", "length must equal grid size"));
        }
        let amp = g
            .iter()
            .flat_map(|gi| h.iter().map(move |hj| gi * hj))
            .collect();
        Self::from_amplitude(grid, amp)
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn amplitude(&self) -> &[Complex64] {
        &self.amplitude
    }

    pub fn n(&self) -> usize {
        self.grid.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.amplitude[i * self.grid.n + j]
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        let n = self.grid.n;
        &self.amplitude[i * n..(i + 1) * n]
    }

    /// `sum |f|^2 dw^2`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn transposed(&self) -> Jsa {
        let n = self.grid.n;
        let amp = (0..n * n).map(|k| self.get(k % n, k / n)).collect();
        Jsa {
            grid: self.grid,
            amplitude: amp,
            norm: self.norm,
        }
    }

    pub fn scaled(&self, factor: Complex64) -> Result<Jsa> {
        Jsa::from_amplitude(
            self.grid,
            self.amplitude.iter().map(|z| z * factor).collect(),
        )
    }

    /// Ordinary-photon spectral intensity `sum_j |f_ij|^2 dw`.
    pub fn marginal_ordinary(&self) -> Vec<f64> {
        let dw = self.grid.step();
        (0..self.n())
            .map(|i| self.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>() * dw)
            .collect()
    }

    /// Extraordinary-photon spectral intensity `sum_i |f_ij|^2 dw`.
    pub fn marginal_extraordinary(&self) -> Vec<f64> {
        let n = self.n();
        let dw = self.grid.step();
        let mut out = vec![0.0; n];
        for i in 0..n {
            for (acc, z) in out.iter_mut().zip(self.row(i)) {
                *acc += z.norm_sqr();
            }
        }
        out.iter_mut().for_each(|v| *v *= dw);
        out
    }
}

fn norm_of(grid: &FrequencyGrid, amp: &[Complex64]) -> f64 {
    let n = grid.n;
    let dw = grid.step();
    // Row partials then an ordered sum, matching the parallel paths exactly.
    amp.chunks(n)
        .map(|row| row.iter().map(|z| z.norm_sqr()).sum::<f64>())
        .sum::<f64>()
        * dw
        * dw
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Builds the normalized joint spectral amplitude with default options.
pub fn build_jsa(
    crystal: &CrystalSpec,
    pump: &PumpSpec,
    grid: &FrequencyGrid,
    model: &SellmeierModel,
) -> Result<Jsa> {
    build_jsa_with(
        crystal,
        pump,
        grid,
        model,
        &JsaOptions::default(),
        Execution::default(),
    )
}

/// Builds `f = alpha(w_o + w_e) * sinc(dk L/2) [* exp(i dk L/2)]`, normalized
/// so that `sum |f|^2 dw^2 = 1`.
///
/// `dk` uses the collinear wavevectors at the crystal cut angle, referenced to
/// its value at degeneracy so that the degenerate pair is phase matched.
pub fn build_jsa_with(
    crystal: &CrystalSpec,
    pump: &PumpSpec,
    grid: &FrequencyGrid,
    model: &SellmeierModel,
    options: &JsaOptions,
    exec: Execution,
) -> Result<Jsa> {
    crystal.validate()?;
    pump.validate()?;
    let wp = pump.omega()?;
    if (2.0 * grid.center - wp).abs() > grid.half_span {
        return Err(Error::invalid(
            "grid.center",
            "pump frequency is not reachable as a sum of grid frequencies",
        ));
    }
    let bw = SpectralBandwidths::estimate(crystal, pump, model)?;
    let required = MIN_SPAN_RATIO * bw.widest();
    if 2.0 * grid.half_span < required {
        return Err(Error::GridTooNarrow {
            span: 2.0 * grid.half_span,
            required,
        });
    }

    let n = grid.n;
    let len = crystal.length_m();
    let e = crystal.extraordinary();
    let o = Polarization::Ordinary;
    let omegas = grid.omegas();

    let k_o: Vec<f64> = omegas
        .iter()
        .map(|&w| model.wavenumber(w, o))
        .collect::<Result<_>>()?;
    let k_e: Vec<f64> = omegas
        .iter()
        .map(|&w| model.wavenumber(w, e))
        .collect::<Result<_>>()?;
    // Pump wavenumber depends only on i + j.
    let k_p: Vec<f64> = (0..2 * n - 1)
        .map(|s| model.wavenumber(omegas[0] * 2.0 + s as f64 * grid.step(), e))
        .collect::<Result<_>>()?;
    let half = 0.5 * wp;
    let dk0 = model.wavenumber(wp, e)? - model.wavenumber(half, o)? - model.wavenumber(half, e)?;

    let delay = if options.propagation_phase && options.walkoff_compensation {
        let ls = wavelength_um_from_omega(half);
        let kpo = model.inverse_group_velocity(ls, o)?;
        let kpe = model.inverse_group_velocity(ls, e)?;
        0.25 * len * (kpe - kpo)
    } else {
        0.0
    };
    let pump_env: Vec<f64> = (0..2 * n - 1)
        .map(|s| pump.envelope(omegas[0] * 2.0 + s as f64 * grid.step() - wp))
        .collect();

    let rows: Vec<Vec<Complex64>> = exec.map(n, |i| {
        (0..n)
            .map(|j| {
                let x = 0.5 * len * (k_p[i + j] - k_o[i] - k_e[j] - dk0);
                let mag = pump_env[i + j] * sinc(x);
                if options.propagation_phase {
                    let phase = x - delay * (omegas[i] - omegas[j]);
                    Complex64::from_polar(mag, phase)
                } else {
                    Complex64::new(mag, 0.0)
                }
            })
            .collect()
    });
    let mut amp: Vec<Complex64> = rows.into_iter().flatten().collect();
    let raw_norm = norm_of(grid, &amp);
    if !(raw_norm > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let scale = raw_norm.sqrt().recip();
    amp.iter_mut().for_each(|z| *z *= scale);
    Jsa::from_amplitude(*grid, amp)
}

/// Applies the same spectral filter to both photons. The result is not
/// renormalized, so its norm relative to the input is the transmitted
/// coincidence fraction.
pub fn apply_filters(jsa: &Jsa, filter: &FilterSpec) -> Result<Jsa> {
    filter.validate()?;
    if filter.kind == FilterKind::None {
        return Ok(jsa.clone());
    }
    let grid = jsa.grid();
    let wc = omega_from_wavelength_um(filter.center_nm * 1e-3);
    if !grid.contains(wc) {
        return Err(Error::FilterOutsideGrid {
            center_nm: filter.center_nm,
        });
    }
    let t: Vec<f64> = grid
        .omegas()
        .iter()
        .map(|&w| filter.transmission(w))
        .collect();
    let n = grid.n;
    let amp = jsa
        .amplitude()
        .iter()
        .enumerate()
        .map(|(k, z)| z * (t[k / n] * t[k % n]))
        .collect();
    Jsa::from_amplitude(*grid, amp)
}

/// Exchange-overlap visibility
/// `Re[sum f(w1, w2) f*(w2, w1)] / sum |f(w1, w2)|^2`.
pub fn visibility_from_jsa(jsa: &Jsa) -> Result<f64> {
    visibility_from_jsa_with(jsa, Execution::default())
}

pub fn visibility_from_jsa_with(jsa: &Jsa, exec: Execution) -> Result<f64> {
    let n = jsa.n();
    let partials: Vec<(f64, f64)> = exec.map(n, |i| {
        let mut overlap = 0.0;
        let mut norm = 0.0;
        for j in 0..n {
            let a = jsa.get(i, j);
            overlap += (a * jsa.get(j, i).conj()).re;
            norm += a.norm_sqr();
        }
        (overlap, norm)
    });
    let (overlap, norm) = partials
        .iter()
        .fold((0.0, 0.0), |(o, s), (po, ps)| (o + po, s + ps));
    if !(norm > 0.0) {
        return Err(Error::ZeroNorm);
    }
    Ok(overlap / norm)
}

/// Fraction of coincidences transmitted: `sum |f_filtered|^2 / sum |f|^2`.
pub fn relative_count_rate(filtered: &Jsa, unfiltered: &Jsa) -> Result<f64> {
    if filtered.grid() != unfiltered.grid() {
        return Err(Error::GridMismatch);
    }
    if !(unfiltered.norm() > 0.0) {
        return Err(Error::ZeroNorm);
    }
    Ok(filtered.norm() / unfiltered.norm())
}

/// Full width at half maximum of a sampled, single-peaked profile, with linear
/// interpolation between samples. Returns `None` if the profile does not fall
/// below half maximum on both sides.
pub fn fwhm(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let (imax, &ymax) = ys.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    let half = 0.5 * ymax;
    let left = (1..=imax).rev().find(|&i| ys[i - 1] < half)?;
    let right = (imax..ys.len() - 1).find(|&i| ys[i + 1] < half)?;
    let cross = |a: usize, b: usize| xs[a] + (half - ys[a]) * (xs[b] - xs[a]) / (ys[b] - ys[a]);
    Some(cross(right, right + 1) - cross(left - 1, left))
}
