//! Birefringent-crystal dispersion for negative uniaxial BBO.
//!
//! Principal indices follow the Sellmeier form
//! `n^2 = A + B / (lambda^2 - C) - D lambda^2` with `lambda` the vacuum
//! wavelength in micrometers. The extraordinary wave at angle `theta` to the
//! optical axis uses `1/n^2 = cos^2/n_o^2 + sin^2/n_e^2`. All derivatives are
//! analytic.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

const DEFAULT_BBO_JSON: &str = include_str!("../data/bbo_eimerl.json");
const KATO_BBO_JSON: &str = include_str!("../data/bbo_kato.json");

/// Angular frequency (rad/s) of light with the given vacuum wavelength (um).
pub fn omega_from_wavelength_um(wavelength_um: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / (wavelength_um * 1e-6)
}

/// Vacuum wavelength (um) of light with the given angular frequency (rad/s).
pub fn wavelength_um_from_omega(omega: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / omega * 1e6
}

/// Converts a wavelength interval around `center_nm` into an angular-frequency
/// interval, to first order.
pub fn nm_width_to_omega(width_nm: f64, center_nm: f64) -> f64 {
    let center_m = center_nm * 1e-9;
    2.0 * PI * SPEED_OF_LIGHT * width_nm * 1e-9 / (center_m * center_m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SellmeierCoefficients {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "D")]
    pub d: f64,
}

impl SellmeierCoefficients {
    fn index_squared(&self, l: f64) -> f64 {
        self.a + self.b / (l * l - self.c) - self.d * l * l
    }

    /// d(n^2)/d(lambda).
    fn index_squared_derivative(&self, l: f64) -> f64 {
        let q = l * l - self.c;
        -2.0 * self.b * l / (q * q) - 2.0 * self.d * l
    }
}

/// Principal-index Sellmeier data for a uniaxial crystal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SellmeierModel {
    pub material: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    pub n_o: SellmeierCoefficients,
    pub n_e: SellmeierCoefficients,
    /// Valid vacuum wavelength range in micrometers, inclusive.
    pub range_um: [f64; 2],
}

impl Default for SellmeierModel {
    fn default() -> Self {
        Self::bbo()
    }
}

/// Polarization of a wave inside the crystal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Polarization {
    Ordinary,
    /// Extraordinary wave propagating at `angle_rad` to the optical axis.
    Extraordinary {
        angle_rad: f64,
    },
}

impl SellmeierModel {
    /// The bundled BBO coefficient set (Eimerl et al. 1987).
    pub fn bbo() -> Self {
        Self::from_json_str(DEFAULT_BBO_JSON).expect("bundled BBO data is valid")
    }

    /// Alternate BBO coefficients (Kato 1986).
    pub fn bbo_kato() -> Self {
        Self::from_json_str(KATO_BBO_JSON).expect("bundled BBO data is valid")
    }

    /// Bundled data set by name: `bbo-eimerl` (default) or `bbo-kato`.
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "bbo" | "bbo-eimerl" => Ok(Self::bbo()),
            "bbo-kato" => Ok(Self::bbo_kato()),
            _ => Err(Error::Data(format!(
                "unknown built-in dispersion data `{name}`"
            ))),
        }
    }

    pub fn from_json_str(json: &str) -> Result<Self> {
        let model: SellmeierModel =
            serde_json::from_str(json).map_err(|e| Error::Data(e.to_string()))?;
        model.validate()?;
        Ok(model)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Data(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_json_str(&text)
    }

    fn validate(&self) -> Result<()> {
        let [lo, hi] = self.range_um;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) {
            return Err(Error::Data(format!("invalid range_um [{lo}, {hi}]")));
        }
        for (name, c) in [("n_o", &self.n_o), ("n_e", &self.n_e)] {
            if ![c.a, c.b, c.c, c.d].iter().all(|v| v.is_finite()) {
                return Err(Error::Data(format!("{name}: coefficients must be finite")));
            }
            // The pole at lambda^2 = C must stay below the range.
            if c.c >= lo * lo {
                return Err(Error::Data(format!("{name}: pole inside valid range")));
            }
            for l in [lo, hi] {
                let n2 = c.index_squared(l);
                if !(n2 > 1.0) {
                    return Err(Error::Data(format!("{name}: n <= 1 at {l} um")));
                }
            }
        }
        Ok(())
    }

    fn check_range(&self, wavelength_um: f64) -> Result<()> {
        let [min, max] = self.range_um;
        if wavelength_um.is_finite() && wavelength_um >= min && wavelength_um <= max {
            Ok(())
        } else {
            Err(Error::WavelengthOutOfRange {
                wavelength_um,
                min,
                max,
            })
        }
    }

    pub fn index_ordinary(&self, wavelength_um: f64) -> Result<f64> {
        self.check_range(wavelength_um)?;
        Ok(self.n_o.index_squared(wavelength_um).sqrt())
    }

    /// Principal extraordinary index (propagation perpendicular to the axis).
    pub fn index_extraordinary(&self, wavelength_um: f64) -> Result<f64> {
        self.check_range(wavelength_um)?;
        Ok(self.n_e.index_squared(wavelength_um).sqrt())
    }

    pub fn index_extraordinary_at_angle(&self, wavelength_um: f64, angle_rad: f64) -> Result<f64> {
        check_angle(angle_rad)?;
        let n_o = self.index_ordinary(wavelength_um)?;
        let n_e = self.index_extraordinary(wavelength_um)?;
        Ok(angle_index(n_o, n_e, angle_rad))
    }

    pub fn index(&self, wavelength_um: f64, pol: Polarization) -> Result<f64> {
        match pol {
            Polarization::Ordinary => self.index_ordinary(wavelength_um),
            Polarization::Extraordinary { angle_rad } => {
                self.index_extraordinary_at_angle(wavelength_um, angle_rad)
            }
        }
    }

    /// Analytic dn/d(lambda) in 1/um.
    pub fn index_derivative(&self, wavelength_um: f64, pol: Polarization) -> Result<f64> {
        self.check_range(wavelength_um)?;
        let l = wavelength_um;
        let n_o = self.n_o.index_squared(l).sqrt();
        let dn_o = self.n_o.index_squared_derivative(l) / (2.0 * n_o);
        match pol {
            Polarization::Ordinary => Ok(dn_o),
            Polarization::Extraordinary { angle_rad } => {
                check_angle(angle_rad)?;
                let n_e = self.n_e.index_squared(l).sqrt();
                let dn_e = self.n_e.index_squared_derivative(l) / (2.0 * n_e);
                let n = angle_index(n_o, n_e, angle_rad);
                let (s, c) = angle_rad.sin_cos();
                Ok(n.powi(3) * (c * c * dn_o / n_o.powi(3) + s * s * dn_e / n_e.powi(3)))
            }
        }
    }

    /// Group index `n - lambda dn/dlambda`.
    pub fn group_index(&self, wavelength_um: f64, pol: Polarization) -> Result<f64> {
        let n = self.index(wavelength_um, pol)?;
        let dn = self.index_derivative(wavelength_um, pol)?;
        Ok(n - wavelength_um * dn)
    }

    /// Inverse group velocity dk/domega in s/m.
    pub fn inverse_group_velocity(&self, wavelength_um: f64, pol: Polarization) -> Result<f64> {
        Ok(self.group_index(wavelength_um, pol)? / SPEED_OF_LIGHT)
    }

    /// Wavenumber k(omega) = n omega / c in rad/m.
    pub fn wavenumber(&self, omega: f64, pol: Polarization) -> Result<f64> {
        let l = wavelength_um_from_omega(omega);
        Ok(self.index(l, pol)? * omega / SPEED_OF_LIGHT)
    }
}

fn angle_index(n_o: f64, n_e: f64, angle_rad: f64) -> f64 {
    let (s, c) = angle_rad.sin_cos();
    (c * c / (n_o * n_o) + s * s / (n_e * n_e)).sqrt().recip()
}

fn check_angle(angle_rad: f64) -> Result<()> {
    if (0.0..=FRAC_PI_2).contains(&angle_rad) {
        Ok(())
    } else {
        Err(Error::invalid(
            "angle",
            format!("{angle_rad} rad not in [0, pi/2]"),
        ))
    }
}

/// Nonlinear crystal geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CrystalSpec {
    pub material: String,
    pub length_mm: f64,
    /// Angle between optical axis and pump propagation, degrees.
    pub cut_angle_deg: f64,
}

impl Default for CrystalSpec {
    fn default() -> Self {
        Self {
            material: "BBO".into(),
            length_mm: 2.0,
            cut_angle_deg: 45.0,
        }
    }
}

impl CrystalSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.length_mm > 0.0 && self.length_mm.is_finite()) {
            return Err(Error::invalid("crystal.length_mm", "must be > 0"));
        }
        if !(0.0..=90.0).contains(&self.cut_angle_deg) {
            return Err(Error::invalid(
                "crystal.cut_angle_deg",
                "must be in [0, 90]",
            ));
        }
        Ok(())
    }

    pub fn length_m(&self) -> f64 {
        self.length_mm * 1e-3
    }

    pub fn cut_angle_rad(&self) -> f64 {
        self.cut_angle_deg.to_radians()
    }

    pub fn extraordinary(&self) -> Polarization {
        Polarization::Extraordinary {
            angle_rad: self.cut_angle_rad(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    // Hand-evaluated (30-digit arithmetic) from the bundled coefficients.
    const N_O_780: f64 = 1.661_169_185_975_277;
    const N_E_780: f64 = 1.544_914_808_577_774;

    #[test]
    fn ordinary_index_at_780nm_matches_golden() {
        let m = SellmeierModel::bbo();
        assert!((m.index_ordinary(0.78).unwrap() - N_O_780).abs() < 1e-13);
        assert!((m.index_extraordinary(0.78).unwrap() - N_E_780).abs() < 1e-13);
    }

    #[test]
    fn normal_dispersion_ordering() {
        let m = SellmeierModel::bbo();
        assert!(m.index_ordinary(0.39).unwrap() > m.index_ordinary(0.78).unwrap());
    }

    #[test]
    fn out_of_range_is_an_error() {
        let m = SellmeierModel::bbo();
        assert!(matches!(
            m.index_ordinary(10.0),
            Err(Error::WavelengthOutOfRange { .. })
        ));
        assert!(m.index_ordinary(f64::NAN).is_err());
        assert!(m
            .inverse_group_velocity(0.1, Polarization::Ordinary)
            .is_err());
    }

    #[test]
    fn angle_limits() {
        let m = SellmeierModel::bbo();
        let l = 0.78;
        let at0 = m.index_extraordinary_at_angle(l, 0.0).unwrap();
        let at90 = m.index_extraordinary_at_angle(l, FRAC_PI_2).unwrap();
        assert!((at0 - m.index_ordinary(l).unwrap()).abs() < 1e-15);
        assert!((at90 - m.index_extraordinary(l).unwrap()).abs() < 1e-15);
        let at45 = m.index_extraordinary_at_angle(l, FRAC_PI_4).unwrap();
        assert!(at45 < at0 && at45 > at90);
        assert!(m.index_extraordinary_at_angle(l, 2.0).is_err());
    }

    #[test]
    fn group_index_exceeds_phase_index() {
        let m = SellmeierModel::bbo();
        for pol in [
            Polarization::Ordinary,
            Polarization::Extraordinary {
                angle_rad: FRAC_PI_4,
            },
        ] {
            let l = 0.78;
            let n = m.index(l, pol).unwrap();
            assert!(m.inverse_group_velocity(l, pol).unwrap() >= n / SPEED_OF_LIGHT);
        }
    }

    #[test]
    fn analytic_derivative_matches_central_difference() {
        let m = SellmeierModel::bbo();
        let l = 0.78;
        let h = 1e-5;
        for pol in [
            Polarization::Ordinary,
            Polarization::Extraordinary {
                angle_rad: FRAC_PI_4,
            },
        ] {
            let fd = (m.index(l + h, pol).unwrap() - m.index(l - h, pol).unwrap()) / (2.0 * h);
            let an = m.index_derivative(l, pol).unwrap();
            assert!(((fd - an) / an).abs() < 1e-6, "{fd} vs {an}");
        }
    }

    #[test]
    fn temporal_walkoff_is_nonzero() {
        let m = SellmeierModel::bbo();
        let crystal = CrystalSpec::default();
        let o = m
            .inverse_group_velocity(0.78, Polarization::Ordinary)
            .unwrap();
        let e = m
            .inverse_group_velocity(0.78, crystal.extraordinary())
            .unwrap();
        let delay_fs = (o - e) * crystal.length_m() * 1e15;
        assert!(delay_fs.abs() > 100.0, "delay {delay_fs} fs");
    }

    #[test]
    fn json_round_trip_and_validation() {
        let m = SellmeierModel::bbo();
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(SellmeierModel::from_json_str(&json).unwrap(), m);
        let bad = json.replace("\"range_um\":[0.22,1.06]", "\"range_um\":[0.01,1.06]");
        assert!(SellmeierModel::from_json_str(&bad).is_err());
        assert!(SellmeierModel::from_json_str("{\"material\":\"BBO\"}").is_err());
    }

    #[test]
    fn crystal_validation() {
        assert!(CrystalSpec::default().validate().is_ok());
        let mut c = CrystalSpec {
            length_mm: 0.0,
            ..CrystalSpec::default()
        };
        assert!(c.validate().is_err());
        c.length_mm = 2.0;
        c.cut_angle_deg = 91.0;
        assert!(c.validate().is_err());
    }
}
