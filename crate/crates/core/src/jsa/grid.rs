use serde::{Deserialize, Serialize};

use crate::dispersion::{nm_width_to_omega, CrystalSpec, SellmeierModel};
use crate::error::{Error, Result};

use super::PumpSpec;

/// Minimum ratio of full grid span to the widest spectral feature.
pub const MIN_SPAN_RATIO: f64 = 6.0;

/// Uniform angular-frequency grid shared by the ordinary and extraordinary
/// axes.
///
/// Samples sit at `center + (i - n/2) * step` for `i in 0..n`, so the centre
/// frequency is a grid point and `omega_i + omega_j = 2 center` holds exactly
/// on the anti-diagonal `i + j = n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub center: f64,
    pub half_span: f64,
    pub n: usize,
}

impl FrequencyGrid {
    pub fn new(center: f64, half_span: f64, n: usize) -> Result<Self> {
        if n < 64 || !n.is_multiple_of(2) {
            return Err(Error::invalid(
                "grid.n",
                format!("{n} must be even and >= 64"),
            ));
        }
        if !(center > 0.0 && center.is_finite()) {
            return Err(Error::invalid("grid.center", "must be positive"));
        }
        if !(half_span > 0.0 && half_span < center) {
            return Err(Error::invalid("grid.half_span", "must be in (0, center)"));
        }
        Ok(Self {
            center,
            half_span,
            n,
        })
    }

    /// Grid centred on the degenerate frequency with a half-span of
    /// `span_factor` times the widest spectral feature.
    pub fn for_setup(
        crystal: &CrystalSpec,
        pump: &PumpSpec,
        model: &SellmeierModel,
        n: usize,
        span_factor: f64,
    ) -> Result<Self> {
        let bw = SpectralBandwidths::estimate(crystal, pump, model)?;
        let center = 0.5 * pump.omega()?;
        Self::new(center, span_factor * bw.widest(), n)
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_span / self.n as f64
    }

    pub fn omega(&self, i: usize) -> f64 {
        self.center + (i as f64 - (self.n / 2) as f64) * self.step()
    }

    pub fn omegas(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.omega(i)).collect()
    }

    pub fn min(&self) -> f64 {
        self.omega(0)
    }

    pub fn max(&self) -> f64 {
        self.omega(self.n - 1)
    }

    pub fn contains(&self, omega: f64) -> bool {
        omega >= self.min() && omega <= self.max()
    }
}

/// Characteristic single-photon bandwidths (rad/s) that the grid must resolve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBandwidths {
    /// Pump intensity FWHM, i.e. the spread of `omega_o + omega_e`.
    pub pump_limited: f64,
    /// Width of the wider phase-matching marginal: `2 pi / (L |k'_p - k'_x|)`
    /// for the daughter whose group velocity is closest to the pump's.
    pub phase_matching_limited: f64,
}

impl SpectralBandwidths {
    pub fn estimate(
        crystal: &CrystalSpec,
        pump: &PumpSpec,
        model: &SellmeierModel,
    ) -> Result<Self> {
        crystal.validate()?;
        pump.validate()?;
        let lp = pump.center_nm * 1e-3;
        let ls = 2.0 * lp;
        let e = crystal.extraordinary();
        let kp = model.inverse_group_velocity(lp, e)?;
        let ko = model.inverse_group_velocity(ls, crate::dispersion::Polarization::Ordinary)?;
        let ke = model.inverse_group_velocity(ls, e)?;
        let mismatch = (kp - ko).abs().min((kp - ke).abs());
        let pm = if mismatch > 0.0 {
            2.0 * std::f64::consts::PI / (crystal.length_m() * mismatch)
        } else {
            0.0
        };
        Ok(Self {
            pump_limited: nm_width_to_omega(pump.fwhm_nm, pump.center_nm),
            phase_matching_limited: pm,
        })
    }

    pub fn widest(&self) -> f64 {
        self.pump_limited.max(self.phase_matching_limited)
    }
}

/// Grid parameters as they appear in run configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub n: usize,
    /// Half-span as a multiple of the widest spectral bandwidth.
    pub span_factor: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n: 512,
            span_factor: 8.0,
        }
    }
}

impl GridConfig {
    pub fn resolve(
        &self,
        crystal: &CrystalSpec,
        pump: &PumpSpec,
        model: &SellmeierModel,
    ) -> Result<FrequencyGrid> {
        if !(self.span_factor * 2.0 >= MIN_SPAN_RATIO) {
            return Err(Error::invalid(
                "grid.span_factor",
                format!("must be >= {}", MIN_SPAN_RATIO / 2.0),
            ));
        }
        FrequencyGrid::for_setup(crystal, pump, model, self.n, self.span_factor)
    }
}
