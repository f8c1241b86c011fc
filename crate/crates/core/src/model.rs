//! Single- and double-pass pair Hamiltonians in the two-spectral-mode model,
//! and the observables computed from them.
//!
//! Parameters: `x` is the spectral overlap between the ordinary and
//! extraordinary photons, `y` the amplitude of the `a_h b_v` emission term
//! (`y^2 = 1/2` is perfect alignment), `theta` the relative phase of the two
//! passes and `kappa` the interaction strength.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fock::modes::*;
use crate::fock::{
    coincidence_probabilities, generate_state, Basis, CoincidenceTable, FockState, PairHamiltonian,
    PairTerm, PassTag,
};

const X_TOLERANCE: f64 = 1e-12;
/// Largest `kappa^2` accepted by [`power_sweep`].
pub const MAX_KAPPA_SQUARED: f64 = 0.1;

/// Whether the two passes arrive together (and interfere) or at
/// distinguishable times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PassOverlap {
    #[default]
    Merged,
    Distinct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PassConfig {
    FirstOnly,
    SecondOnly,
    Double,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub x: Complex64,
    pub y: f64,
    pub theta: f64,
    pub kappa: f64,
    pub pass_overlap: PassOverlap,
    pub order: u32,
    pub efficiency: f64,
    pub n_max: u32,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            x: Complex64::new(1.0, 0.0),
            y: FRAC_1_SQRT_2,
            theta: 0.0,
            kappa: 1e-3,
            pass_overlap: PassOverlap::Merged,
            order: 1,
            efficiency: 0.1,
            n_max: 4,
        }
    }
}

impl ModelParams {
    /// Parameters with real overlap `sqrt(x_squared)` and alignment
    /// `sqrt(y_squared)`, other fields at their defaults.
    pub fn from_squares(x_squared: f64, y_squared: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&x_squared) {
            return Err(Error::invalid(
                "x_squared",
                format!("{x_squared} not in [0, 1]"),
            ));
        }
        if !(0.0..=1.0).contains(&y_squared) {
            return Err(Error::invalid(
                "y_squared",
                format!("{y_squared} not in [0, 1]"),
            ));
        }
        let p = Self {
            x: Complex64::new(x_squared.sqrt(), 0.0),
            y: y_squared.sqrt(),
            ..Self::default()
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x.re.is_finite() && self.x.im.is_finite()) || self.x.norm() > 1.0 + X_TOLERANCE {
            return Err(Error::invalid(
                "x",
                format!("|x| = {} exceeds 1", self.x.norm()),
            ));
        }
        if !(0.0..=1.0).contains(&self.y) {
            return Err(Error::invalid("y", format!("{} not in [0, 1]", self.y)));
        }
        if !self.theta.is_finite() {
            return Err(Error::invalid("theta", "must be finite"));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::invalid(
                "kappa",
                format!("{} must be positive", self.kappa),
            ));
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(Error::invalid(
                "efficiency",
                format!("{} not in (0, 1]", self.efficiency),
            ));
        }
        if self.n_max == 0 || !self.n_max.is_multiple_of(2) {
            return Err(Error::invalid(
                "n_max",
                format!("{} must be even and positive", self.n_max),
            ));
        }
        if self.order == 0 || 2 * self.order > self.n_max {
            return Err(Error::TruncationExceeded {
                order: self.order,
                needed: 2 * self.order,
                n_max: self.n_max,
            });
        }
        Ok(())
    }
}

/// `kappa [x (y a_h1 b_v1 - c a_v1 b_h1) + s (y a_h2 b_v1 - c a_v1 b_h2)]`
/// with `c = sqrt(1 - y^2)` and `s = sqrt(1 - |x|^2)`.
pub fn single_pass_hamiltonian(x: Complex64, y: f64, kappa: f64) -> Result<PairHamiltonian> {
    if x.norm() > 1.0 + X_TOLERANCE {
        return Err(Error::invalid("x", format!("|x| = {} exceeds 1", x.norm())));
    }
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::invalid("y", format!("{y} not in [0, 1]")));
    }
    let c = (1.0 - y * y).sqrt();
    let s = (1.0 - x.norm_sqr()).max(0.0).sqrt();
    let r = |v: f64| Complex64::new(v, 0.0);
    let terms = vec![
        PairTerm::new(x * y, A_H1, B_V1, PassTag::Merged),
        PairTerm::new(-x * c, A_V1, B_H1, PassTag::Merged),
        PairTerm::new(r(s * y), A_H2, B_V1, PassTag::Merged),
        PairTerm::new(r(-s * c), A_V1, B_H2, PassTag::Merged),
    ];
    PairHamiltonian::new(kappa, terms)
}

/// First pass: the single pass with both photons' polarizations rotated by
/// 90 degrees on the way back through the crystal.
pub fn first_pass_hamiltonian(params: &ModelParams) -> Result<PairHamiltonian> {
    let h = single_pass_hamiltonian(params.x, params.y, params.kappa)?;
    Ok(h.polarization_rotated().tagged(PassTag::First))
}

/// Second pass: the single pass with relative phase `e^{i theta}`.
pub fn second_pass_hamiltonian(params: &ModelParams) -> Result<PairHamiltonian> {
    let h = single_pass_hamiltonian(params.x, params.y, params.kappa)?;
    Ok(h.scaled(Complex64::from_polar(1.0, params.theta))
        .tagged(PassTag::Second))
}

pub fn double_pass_hamiltonian(params: &ModelParams) -> Result<PairHamiltonian> {
    params.validate()?;
    let first = first_pass_hamiltonian(params)?;
    let second = second_pass_hamiltonian(params)?;
    let h = first.combined(&second)?;
    Ok(match params.pass_overlap {
        PassOverlap::Merged => h.tagged(PassTag::Merged),
        PassOverlap::Distinct => h,
    })
}

pub fn hamiltonian_for(params: &ModelParams, pass_config: PassConfig) -> Result<PairHamiltonian> {
    params.validate()?;
    match pass_config {
        PassConfig::FirstOnly => first_pass_hamiltonian(params),
        PassConfig::SecondOnly => second_pass_hamiltonian(params),
        PassConfig::Double => double_pass_hamiltonian(params),
    }
}

pub fn model_state(params: &ModelParams, pass_config: PassConfig) -> Result<FockState> {
    let h = hamiltonian_for(params, pass_config)?;
    generate_state(&h, params.order, params.n_max)
}

pub fn coincidence_table(
    params: &ModelParams,
    pass_config: PassConfig,
    basis: Basis,
) -> Result<CoincidenceTable> {
    let state = model_state(params, pass_config)?;
    coincidence_probabilities(&state, basis, params.efficiency)
}

/// Coincidence visibility of the configured source in `basis`.
pub fn polarization_visibility(
    params: &ModelParams,
    pass_config: PassConfig,
    basis: Basis,
) -> Result<f64> {
    coincidence_table(params, pass_config, basis)?.visibility()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringePoint {
    pub theta: f64,
    pub basis: Basis,
    pub table: CoincidenceTable,
    /// Anticorrelated coincidence probability `P_XY + P_YX`.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeScan {
    /// Ordered by basis (in the requested order), then by `theta`.
    pub points: Vec<FringePoint>,
    pub fringe_visibility: Vec<(Basis, f64)>,
}

impl FringeScan {
    pub fn visibility(&self, basis: Basis) -> Option<f64> {
        self.fringe_visibility
            .iter()
            .find(|(b, _)| *b == basis)
            .map(|(_, v)| *v)
    }

    pub fn rates(&self, basis: Basis) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .filter(|p| p.basis == basis)
            .map(|p| (p.theta, p.rate))
            .collect()
    }
}

/// `(max - min) / (max + min)` of a rate series.
pub fn fringe_visibility(rates: &[f64]) -> Result<f64> {
    let max = rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = rates.iter().copied().fold(f64::INFINITY, f64::min);
    if !(max + min > 0.0) {
        return Err(Error::EmptyTable);
    }
    Ok((max - min) / (max + min))
}

/// `steps + 1` equally spaced phases from 0 to `2 pi` inclusive. An even
/// step count puts a sample at `pi`.
pub fn theta_grid(steps: usize) -> Vec<f64> {
    (0..=steps)
        .map(|i| TAU * i as f64 / steps.max(1) as f64)
        .collect()
}

/// Coincidence fringes of the double pass versus the relative pass phase.
pub fn phase_sweep(
    params: &ModelParams,
    thetas: &[f64],
    bases: &[Basis],
    exec: Execution,
) -> Result<FringeScan> {
    params.validate()?;
    if thetas.len() < 8 {
        return Err(Error::invalid(
            "thetas",
            format!("need at least 8 samples, got {}", thetas.len()),
        ));
    }
    if thetas.windows(2).any(|w| !(w[1] > w[0])) || thetas.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid(
            "thetas",
            "must be finite and strictly increasing",
        ));
    }
    let span = thetas[thetas.len() - 1] - thetas[0];
    if span < TAU * (1.0 - 1e-12) {
        return Err(Error::invalid(
            "thetas",
            format!("span {span} is less than 2 pi"),
        ));
    }
    if bases.is_empty() {
        return Err(Error::invalid("bases", "must not be empty"));
    }
    let jobs: Vec<(Basis, f64)> = bases
        .iter()
        .flat_map(|&b| thetas.iter().map(move |&t| (b, t)))
        .collect();
    let points = exec
        .map_slice(&jobs, |&(basis, theta)| {
            let p = ModelParams { theta, ..*params };
            let table = coincidence_table(&p, PassConfig::Double, basis)?;
            Ok(FringePoint {
                theta,
                basis,
                table,
                rate: table.anticorrelated(),
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut fringe = Vec::with_capacity(bases.len());
    for &basis in bases {
        let rates: Vec<f64> = points
            .iter()
            .filter(|p| p.basis == basis)
            .map(|p| p.rate)
            .collect();
        fringe.push((basis, fringe_visibility(&rates)?));
    }
    Ok(FringeScan {
        points,
        fringe_visibility: fringe,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSweepRow {
    pub kappa: f64,
    /// Weight of the two-photon component of the generated state.
    pub pair_probability: f64,
    /// Weight of the four-photon component.
    pub four_photon_probability: f64,
    pub visibility: f64,
}

/// Double-pass visibility versus interaction strength at second order.
pub fn power_sweep(
    params: &ModelParams,
    kappas: &[f64],
    basis: Basis,
    exec: Execution,
) -> Result<Vec<PowerSweepRow>> {
    if kappas.is_empty() {
        return Err(Error::invalid("kappas", "must not be empty"));
    }
    if let Some(k) = kappas
        .iter()
        .find(|k| !(**k > 0.0 && **k * **k <= MAX_KAPPA_SQUARED))
    {
        return Err(Error::invalid(
            "kappas",
            format!("{k} outside (0, sqrt({MAX_KAPPA_SQUARED})]"),
        ));
    }
    let base = ModelParams {
        order: 2,
        n_max: params.n_max.max(4),
        ..*params
    };
    base.validate()?;
    exec.map_slice(kappas, |&kappa| {
        let p = ModelParams { kappa, ..base };
        let state = model_state(&p, PassConfig::Double)?;
        let weights = state.photon_number_weights();
        let visibility = coincidence_probabilities(&state, basis, p.efficiency)?.visibility()?;
        Ok(PowerSweepRow {
            kappa,
            pair_probability: weights.get(&2).copied().unwrap_or(0.0),
            four_photon_probability: weights.get(&4).copied().unwrap_or(0.0),
            visibility,
        })
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MisalignmentRow {
    pub y_squared: f64,
    pub basis: Basis,
    pub first: f64,
    pub second: f64,
    pub double: f64,
}

/// Single- and double-pass visibilities for each alignment value.
pub fn misalignment_study(
    params: &ModelParams,
    y_squared: &[f64],
    bases: &[Basis],
    exec: Execution,
) -> Result<Vec<MisalignmentRow>> {
    if y_squared.is_empty() || bases.is_empty() {
        return Err(Error::invalid(
            "y_squared",
            "needs at least one value and one basis",
        ));
    }
    if let Some(y2) = y_squared.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::invalid("y_squared", format!("{y2} not in [0, 1]")));
    }
    let jobs: Vec<(f64, Basis)> = y_squared
        .iter()
        .flat_map(|&y2| bases.iter().map(move |&b| (y2, b)))
        .collect();
    exec.map_slice(&jobs, |&(y2, basis)| {
        let p = ModelParams {
            y: y2.sqrt(),
            ..*params
        };
        Ok(MisalignmentRow {
            y_squared: y2,
            basis,
            first: polarization_visibility(&p, PassConfig::FirstOnly, basis)?,
            second: polarization_visibility(&p, PassConfig::SecondOnly, basis)?,
            double: polarization_visibility(&p, PassConfig::Double, basis)?,
        })
    })
    .into_iter()
    .collect()
}

/// Closed-form single-pass visibility at order 1.
pub fn single_pass_visibility_closed_form(x: Complex64, y: f64, basis: Basis) -> f64 {
    match basis {
        Basis::HV => 1.0,
        Basis::PM | Basis::RL => x.norm_sqr() * 2.0 * y * (1.0 - y * y).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(x2: f64, y2: f64) -> ModelParams {
        ModelParams::from_squares(x2, y2).unwrap()
    }

    #[test]
    fn single_pass_examples() {
        let v =
            polarization_visibility(&params(0.57, 0.5), PassConfig::FirstOnly, Basis::PM).unwrap();
        assert!((v - 0.57).abs() < 1e-9, "{v}");
        let v =
            polarization_visibility(&params(1.0, 0.28), PassConfig::SecondOnly, Basis::PM).unwrap();
        let expect = 2.0 * 0.28f64.sqrt() * 0.72f64.sqrt();
        assert!((v - expect).abs() < 1e-9);
        assert!((expect - 0.8980).abs() < 1e-4);
    }

    #[test]
    fn ideal_single_pass_is_the_singlet() {
        let h = single_pass_hamiltonian(Complex64::new(1.0, 0.0), FRAC_1_SQRT_2, 1.0).unwrap();
        let s = generate_state(&h, 1, 2).unwrap();
        for basis in Basis::ALL {
            let v = coincidence_probabilities(&s, basis, 1.0)
                .unwrap()
                .visibility()
                .unwrap();
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn merged_double_pass_compensates() {
        for x2 in [0.3, 0.7, 0.95] {
            for basis in [Basis::PM, Basis::RL] {
                let v =
                    polarization_visibility(&params(x2, 0.5), PassConfig::Double, basis).unwrap();
                assert!((v - 1.0).abs() < 1e-9);
            }
        }
        for y2 in [0.28, 0.12] {
            let v =
                polarization_visibility(&params(1.0, y2), PassConfig::Double, Basis::PM).unwrap();
            assert!((v - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn distinct_passes_add_incoherently() {
        let p = ModelParams {
            pass_overlap: PassOverlap::Distinct,
            ..params(0.57, 0.5)
        };
        let v = polarization_visibility(&p, PassConfig::Double, Basis::PM).unwrap();
        assert!((v - 0.57).abs() < 1e-9, "{v}");
    }

    #[test]
    fn pm_rate_vanishes_at_pi() {
        let p = ModelParams {
            theta: std::f64::consts::PI,
            ..params(0.91, 0.5)
        };
        let t = coincidence_table(&p, PassConfig::Double, Basis::PM).unwrap();
        assert!(t.anticorrelated() < 1e-12);
    }

    #[test]
    fn phase_sweep_validation() {
        let p = params(0.91, 0.5);
        assert!(phase_sweep(&p, &theta_grid(6), &[Basis::HV], Execution::default()).is_err());
        let short: Vec<f64> = (0..10).map(|i| i as f64 * 0.1).collect();
        assert!(phase_sweep(&p, &short, &[Basis::HV], Execution::default()).is_err());
        let mut bad = theta_grid(16);
        bad.swap(2, 3);
        assert!(phase_sweep(&p, &bad, &[Basis::HV], Execution::default()).is_err());
    }

    #[test]
    fn power_sweep_rejects_large_kappa() {
        let p = params(0.91, 0.5);
        assert!(power_sweep(&p, &[0.5], Basis::PM, Execution::default()).is_err());
        assert!(power_sweep(&p, &[], Basis::PM, Execution::default()).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::from_squares(1.2, 0.5).is_err());
        assert!(ModelParams::from_squares(0.5, -0.1).is_err());
        let p = ModelParams {
            order: 3,
            ..ModelParams::default()
        };
        assert!(matches!(
            p.validate(),
            Err(Error::TruncationExceeded { .. })
        ));
        let p = ModelParams {
            efficiency: 0.0,
            ..ModelParams::default()
        };
        assert!(p.validate().is_err());
    }
}
