use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{Arm, ModeId, Pol, MAX_MODES, MODES_PER_SLOT};

/// Which pass through the crystal created a pair.
///
/// `Merged` and `First` terms populate pass slot 0; `Second` terms populate
/// slot 1, a temporally distinguishable copy of the modes. Building a double
/// pass with every term tagged `Merged` therefore lets both passes interfere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PassTag {
    First,
    Second,
    Merged,
}

impl PassTag {
    pub fn slot(self) -> usize {
        match self {
            PassTag::First | PassTag::Merged => 0,
            PassTag::Second => 1,
        }
    }
}

/// `coefficient * a^dag_first b^dag_second`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairTerm {
    pub coefficient: Complex64,
    pub first: ModeId,
    pub second: ModeId,
    pub pass: PassTag,
}

impl PairTerm {
    pub fn new(coefficient: Complex64, first: ModeId, second: ModeId, pass: PassTag) -> Self {
        Self {
            coefficient,
            first,
            second,
            pass,
        }
    }

    pub fn first_index(&self) -> usize {
        self.first.slot_index(self.pass.slot())
    }

    pub fn second_index(&self) -> usize {
        self.second.slot_index(self.pass.slot())
    }
}

/// Creation part of a pair Hamiltonian, `kappa * sum_i c_i a^dag b^dag`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairHamiltonian {
    terms: Vec<PairTerm>,
    kappa: f64,
}

impl PairHamiltonian {
    pub fn new(kappa: f64, terms: Vec<PairTerm>) -> Result<Self> {
        if !kappa.is_finite() {
            return Err(Error::invalid("kappa", "must be finite"));
        }
        for t in &terms {
            if t.first.arm != Arm::A || t.second.arm != Arm::B {
                return Err(Error::invalid(
                    "terms",
                    "each term must create one photon in arm a and one in arm b",
                ));
            }
            if !(t.coefficient.re.is_finite() && t.coefficient.im.is_finite()) {
                return Err(Error::invalid("terms", "coefficients must be finite"));
            }
        }
        Ok(Self { terms, kappa })
    }

    pub fn empty(kappa: f64) -> Self {
        Self {
            terms: Vec::new(),
            kappa,
        }
    }

    pub fn terms(&self) -> &[PairTerm] {
        &self.terms
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    /// Number of modes the Hamiltonian addresses (8, or 16 when it has
    /// second-pass terms).
    pub fn modes(&self) -> usize {
        if self.terms.iter().any(|t| t.pass == PassTag::Second) {
            MAX_MODES
        } else {
            MODES_PER_SLOT
        }
    }

    /// Concatenates the terms of two Hamiltonians with the same `kappa`.
    pub fn combined(&self, other: &PairHamiltonian) -> Result<PairHamiltonian> {
        if self.kappa != other.kappa {
            return Err(Error::invalid(
                "kappa",
                "combined Hamiltonians must share kappa",
            ));
        }
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        PairHamiltonian::new(self.kappa, terms)
    }

    /// Multiplies every coefficient by `factor`.
    pub fn scaled(&self, factor: Complex64) -> PairHamiltonian {
        let terms = self
            .terms
            .iter()
            .map(|t| PairTerm {
                coefficient: t.coefficient * factor,
                ..*t
            })
            .collect();
        PairHamiltonian {
            terms,
            kappa: self.kappa,
        }
    }

    pub fn tagged(&self, pass: PassTag) -> PairHamiltonian {
        let terms = self.terms.iter().map(|t| PairTerm { pass, ..*t }).collect();
        PairHamiltonian {
            terms,
            kappa: self.kappa,
        }
    }

    /// Rotates the polarization of both photons by 90 degrees,
    /// `h -> v`, `v -> -h`.
    pub fn polarization_rotated(&self) -> PairHamiltonian {
        let rot = |m: ModeId| match m.pol {
            Pol::H => (m.with_pol(Pol::V), 1.0),
            Pol::V => (m.with_pol(Pol::H), -1.0),
        };
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let (first, s1) = rot(t.first);
                let (second, s2) = rot(t.second);
                PairTerm {
                    coefficient: t.coefficient * (s1 * s2),
                    first,
                    second,
                    pass: t.pass,
                }
            })
            .collect();
        PairHamiltonian {
            terms,
            kappa: self.kappa,
        }
    }
}
