//! CSV and JSON artifacts.
//!
//! Numbers are written as plain decimals with 12 significant digits so that
//! golden files compare byte for byte.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use crate::fock::Basis;
use crate::jsa::{FilterSweepRow, FrequencyGrid, Jsa};
use crate::model::{FringeScan, MisalignmentRow, PowerSweepRow};

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Decimal representation with [`SIGNIFICANT_DIGITS`] significant digits and
/// no exponent.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v);
    let (mantissa, exp) = sci
        .split_once('e')
        .expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let point = exp + 1;
    let body = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), digits)
    } else if point as usize >= digits.len() {
        format!("{}{}", digits, "0".repeat(point as usize - digits.len()))
    } else {
        let (int, frac) = digits.split_at(point as usize);
        format!("{int}.{frac}")
    };
    format!("{sign}{body}")
}

fn writer(path: &Path) -> io::Result<csv::Writer<File>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?)
}

fn finish(mut w: csv::Writer<File>) -> io::Result<()> {
    w.flush()
}

/// `bandwidth_nm, visibility, relative_rate`; the unfiltered row has
/// bandwidth `inf`.
pub fn write_filter_sweep(path: &Path, rows: &[FilterSweepRow]) -> io::Result<()> {
    let mut w = writer(path)?;
    w.write_record(["bandwidth_nm", "visibility", "relative_rate"])?;
    for r in rows {
        let bw = r
            .bandwidth_nm
            .map_or_else(|| "inf".to_string(), format_number);
        w.write_record([
            bw,
            format_number(r.visibility),
            format_number(r.relative_rate),
        ])?;
    }
    finish(w)
}

/// `omega_o_rad_s, omega_e_rad_s, re, im`, ordinary frequency outermost.
pub fn write_jsa(path: &Path, jsa: &Jsa) -> io::Result<()> {
    let mut w = writer(path)?;
    w.write_record(["omega_o_rad_s", "omega_e_rad_s", "re", "im"])?;
    let omegas = jsa.grid().omegas();
    for (i, wo) in omegas.iter().enumerate() {
        for (j, we) in omegas.iter().enumerate() {
            let z = jsa.get(i, j);
            w.write_record([
                format_number(*wo),
                format_number(*we),
                format_number(z.re),
                format_number(z.im),
            ])?;
        }
    }
    finish(w)
}

#[derive(Debug, Serialize)]
pub struct JsaMetadata {
    pub grid: FrequencyGrid,
    pub step_rad_s: f64,
    pub omega_min_rad_s: f64,
    pub omega_max_rad_s: f64,
    pub norm: f64,
    pub row_axis: &'static str,
    pub column_axis: &'static str,
}

pub fn jsa_metadata(jsa: &Jsa) -> JsaMetadata {
    let g = *jsa.grid();
    JsaMetadata {
        grid: g,
        step_rad_s: g.step(),
        omega_min_rad_s: g.min(),
        omega_max_rad_s: g.max(),
        norm: jsa.norm(),
        row_axis: "omega_o",
        column_axis: "omega_e",
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> io::Result<()> {
    let mut f = File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")
}

/// `theta_rad, basis, p_xx, p_xy, p_yx, p_yy, rate`.
pub fn write_fringes(path: &Path, scan: &FringeScan) -> io::Result<()> {
    let mut w = writer(path)?;
    w.write_record(["theta_rad", "basis", "p_xx", "p_xy", "p_yx", "p_yy", "rate"])?;
    for p in &scan.points {
        let t = &p.table;
        w.write_record([
            format_number(p.theta),
            p.basis.name().to_string(),
            format_number(t.xx),
            format_number(t.xy),
            format_number(t.yx),
            format_number(t.yy),
            format_number(p.rate),
        ])?;
    }
    finish(w)
}

/// `kappa, kappa_squared, pair_probability, four_photon_probability, visibility`.
pub fn write_power_sweep(path: &Path, rows: &[PowerSweepRow]) -> io::Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "kappa",
        "kappa_squared",
        "pair_probability",
        "four_photon_probability",
        "visibility",
    ])?;
    for r in rows {
        w.write_record([
            format_number(r.kappa),
            format_number(r.kappa * r.kappa),
            format_number(r.pair_probability),
            format_number(r.four_photon_probability),
            format_number(r.visibility),
        ])?;
    }
    finish(w)
}

/// `y_squared, basis, first, second, double`.
pub fn write_misalignment(path: &Path, rows: &[MisalignmentRow]) -> io::Result<()> {
    let mut w = writer(path)?;
    w.write_record(["y_squared", "basis", "first", "second", "double"])?;
    for r in rows {
        w.write_record([
            format_number(r.y_squared),
            r.basis.name().to_string(),
            format_number(r.first),
            format_number(r.second),
            format_number(r.double),
        ])?;
    }
    finish(w)
}

/// `basis, first, second, double`.
pub fn write_pass_compare(path: &Path, rows: &[(Basis, [f64; 3])]) -> io::Result<()> {
    let mut w = writer(path)?;
    w.write_record(["basis", "first", "second", "double"])?;
    for (basis, v) in rows {
        w.write_record([
            basis.name().to_string(),
            format_number(v[0]),
            format_number(v[1]),
            format_number(v[2]),
        ])?;
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_number(0.6212), "0.621200000000");
        assert_eq!(format_number(1.0), "1.00000000000");
        assert_eq!(format_number(-2.5e-5), "-0.0000250000000000");
        assert_eq!(format_number(2.4152e15), "2415200000000000");
        assert_eq!(format_number(123456.7890123456), "123456.789012");
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(f64::INFINITY), "inf");
    }

    #[test]
    fn round_trip_is_close() {
        for v in [0.1, 3.0e-9, 7.77e12, -0.999999999999] {
            let back: f64 = format_number(v).parse().unwrap();
            assert!(((back - v) / v).abs() < 1e-11);
        }
    }
}
