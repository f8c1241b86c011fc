//! Polarization analysis and threshold detection.
//!
//! Each arm ends in a polarization analyzer with two output ports `X` and `Y`
//! and one non-number-resolving detector per port. Detectors see both
//! spectral modes (and both pass slots) of their port and register each
//! photon independently with efficiency `eta`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{FockState, Occupation, MAX_MODES, MODES_PER_SLOT};

const NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Basis {
    HV,
    PM,
    RL,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::HV, Basis::PM, Basis::RL];

    /// Jones vectors `(h, v)` of the `X` and `Y` ports.
    pub fn ports(self) -> [[Complex64; 2]; 2] {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let c = |re: f64, im: f64| Complex64::new(re, im);
        match self {
            Basis::HV => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]],
            Basis::PM => [[c(r, 0.0), c(r, 0.0)], [c(r, 0.0), c(-r, 0.0)]],
            Basis::RL => [[c(r, 0.0), c(0.0, r)], [c(r, 0.0), c(0.0, -r)]],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Basis::HV => "HV",
            Basis::PM => "PM",
            Basis::RL => "RL",
        }
    }
}

impl std::str::FromStr for Basis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "HV" => Ok(Basis::HV),
            "PM" => Ok(Basis::PM),
            "RL" => Ok(Basis::RL),
            _ => Err(Error::invalid("basis", format!("unknown basis `{s}`"))),
        }
    }
}

/// Joint click probabilities of the four port pairs `(arm a port, arm b port)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceTable {
    pub basis: Basis,
    pub xx: f64,
    pub xy: f64,
    pub yx: f64,
    pub yy: f64,
}

impl CoincidenceTable {
    pub fn total(&self) -> f64 {
        self.xx + self.xy + self.yx + self.yy
    }

    /// Coincidences between orthogonal ports, `P_XY + P_YX`.
    pub fn anticorrelated(&self) -> f64 {
        self.xy + self.yx
    }

    pub fn visibility(&self) -> Result<f64> {
        visibility(self)
    }
}

/// `(XY + YX - XX - YY) / (XY + YX + XX + YY)`.
pub fn visibility(table: &CoincidenceTable) -> Result<f64> {
    let total = table.total();
    if !(total > 0.0) {
        return Err(Error::EmptyTable);
    }
    Ok((table.xy + table.yx - table.xx - table.yy) / total)
}

/// Expresses `state` in the analyzer port modes of `basis`. In the returned
/// state the polarization label of every mode means port `X` (h) or `Y` (v).
pub fn rotate_to_basis(state: &FockState, basis: Basis) -> FockState {
    if basis == Basis::HV {
        return state.clone();
    }
    let ports = basis.ports();
    // a^dag_p = sum_X conj(<p|X>) a^dag_X
    let u = |p: usize, x: usize| ports[x][p].conj();

    let mut out: BTreeMap<Occupation, Complex64> = BTreeMap::new();
    for (occ, amp) in state.iter() {
        let mut partial: Vec<(Occupation, Complex64)> = vec![(Occupation::vacuum(), *amp)];
        for group in 0..MAX_MODES / 2 {
            // group = (slot, arm, spectral); h and v indices differ by 2.
            let slot = group / 4;
            let arm = (group / 2) % 2;
            let spectral = group % 2;
            let ih = slot * MODES_PER_SLOT + arm * 4 + spectral;
            let iv = ih + 2;
            let nh = occ.get(ih) as usize;
            let nv = occ.get(iv) as usize;
            if nh + nv == 0 {
                continue;
            }
            let expansion = expand_group(nh, nv, &u);
            let mut next = Vec::with_capacity(partial.len() * expansion.len());
            for (base, a) in &partial {
                for &(p, q, c) in &expansion {
                    let mut o = *base;
                    o.set(ih, p as u8);
                    o.set(iv, q as u8);
                    next.push((o, a * c));
                }
            }
            partial = next;
        }
        for (o, a) in partial {
            *out.entry(o).or_default() += a;
        }
    }
    FockState::from_components(out, state.n_max(), state.modes())
        .expect("mode transform preserves photon number")
}

/// `(a^dag_h)^nh (a^dag_v)^nv / sqrt(nh! nv!)` rewritten in port modes, as
/// `(nX, nY, amplitude)` with normalized Fock-state amplitudes.
fn expand_group(
    nh: usize,
    nv: usize,
    u: &impl Fn(usize, usize) -> Complex64,
) -> Vec<(usize, usize, Complex64)> {
    let n = nh + nv;
    let mut coeff = vec![Complex64::default(); n + 1];
    for k in 0..=nh {
        let ck = binomial(nh, k) * u(0, 0).powu(k as u32) * u(0, 1).powu((nh - k) as u32);
        for l in 0..=nv {
            let cl = binomial(nv, l) * u(1, 0).powu(l as u32) * u(1, 1).powu((nv - l) as u32);
            coeff[k + l] += ck * cl;
        }
    }
    let norm_in = (factorial(nh) * factorial(nv)).sqrt();
    coeff
        .into_iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(p, c)| {
            let q = n - p;
            (p, q, c * ((factorial(p) * factorial(q)).sqrt() / norm_in))
        })
        .collect()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Probabilities of the 16 click patterns of the four detectors.
///
/// Pattern bits: 0 = arm a port X, 1 = arm a port Y, 2 = arm b port X,
/// 3 = arm b port Y.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClickDistribution {
    pub basis: Basis,
    pub patterns: [f64; 16],
}

impl ClickDistribution {
    pub const A_X: usize = 1;
    pub const A_Y: usize = 2;
    pub const B_X: usize = 4;
    pub const B_Y: usize = 8;

    /// Probability that all detectors in `mask` click (others unconstrained).
    pub fn joint(&self, mask: usize) -> f64 {
        self.patterns
            .iter()
            .enumerate()
            .filter(|(p, _)| p & mask == mask)
            .map(|(_, w)| w)
            .sum()
    }

    pub fn total(&self) -> f64 {
        self.patterns.iter().sum()
    }

    pub fn coincidences(&self) -> CoincidenceTable {
        CoincidenceTable {
            basis: self.basis,
            xx: self.joint(Self::A_X | Self::B_X),
            xy: self.joint(Self::A_X | Self::B_Y),
            yx: self.joint(Self::A_Y | Self::B_X),
            yy: self.joint(Self::A_Y | Self::B_Y),
        }
    }
}

fn check_detection_inputs(state: &FockState, efficiency: f64) -> Result<()> {
    if !(efficiency > 0.0 && efficiency <= 1.0) {
        return Err(Error::invalid(
            "efficiency",
            format!("{efficiency} not in (0, 1]"),
        ));
    }
    if (state.norm() - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::Unnormalized { norm: state.norm() });
    }
    Ok(())
}

pub fn click_distribution(
    state: &FockState,
    basis: Basis,
    efficiency: f64,
) -> Result<ClickDistribution> {
    check_detection_inputs(state, efficiency)?;
    let rotated = rotate_to_basis(state, basis);
    let miss = 1.0 - efficiency;
    let mut patterns = [0.0; 16];
    for (occ, amp) in rotated.iter() {
        let w = amp.norm_sqr();
        // Photons reaching each detector, bit order as in the pattern index.
        let mut counts = [0u32; 4];
        for m in 0..MAX_MODES {
            let n = occ.get(m) as u32;
            if n == 0 {
                continue;
            }
            let local = m % MODES_PER_SLOT;
            let arm = local / 4;
            let port = (local / 2) % 2;
            counts[arm * 2 + port] += n;
        }
        let no_click: [f64; 4] = counts.map(|n| miss.powi(n as i32));
        for (p, slot) in patterns.iter_mut().enumerate() {
            let prob: f64 = (0..4)
                .map(|d| {
                    if p >> d & 1 == 1 {
                        1.0 - no_click[d]
                    } else {
                        no_click[d]
                    }
                })
                .product();
            *slot += w * prob;
        }
    }
    Ok(ClickDistribution { basis, patterns })
}

/// Probabilities that port `X` of arm a and port `Y` of arm b both click,
/// for every port combination.
pub fn coincidence_probabilities(
    state: &FockState,
    basis: Basis,
    efficiency: f64,
) -> Result<CoincidenceTable> {
    Ok(click_distribution(state, basis, efficiency)?.coincidences())
}
