//! Sparse bosonic Fock-space engine for the two-spectral-mode pair model.
//!
//! Modes are labelled by spatial arm (`a`, `b`), polarization (`h`, `v`) and
//! spectral mode (`1`, `2`). Pair-creation terms additionally carry a pass
//! tag: terms of a pass that arrives at a distinguishable time populate a
//! second, orthogonal copy of the eight modes.

mod detect;
mod hamiltonian;
mod state;

pub use detect::{
    click_distribution, coincidence_probabilities, rotate_to_basis, visibility, Basis,
    ClickDistribution, CoincidenceTable,
};
pub use hamiltonian::{PairHamiltonian, PairTerm, PassTag};
pub use state::{
    apply_pair_creation, generate_state, FockState, Occupation, PairCreation, StateEntry,
};

use serde::{Deserialize, Serialize};

/// Modes per pass slot.
pub const MODES_PER_SLOT: usize = 8;
/// Upper bound on modes (two pass slots).
pub const MAX_MODES: usize = 16;
/// Amplitudes smaller than this are dropped from sparse states.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pol {
    H,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Spectral {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
}

/// One of the eight single-pass modes. Ordering is `a < b`, `h < v`, `1 < 2`
/// with arm most significant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModeId {
    pub arm: Arm,
    pub pol: Pol,
    pub spectral: Spectral,
}

impl ModeId {
    pub const fn new(arm: Arm, pol: Pol, spectral: Spectral) -> Self {
        Self { arm, pol, spectral }
    }

    /// Canonical index in `0..8`.
    pub fn index(self) -> usize {
        (self.arm as usize) * 4 + (self.pol as usize) * 2 + self.spectral as usize
    }

    pub fn from_index(i: usize) -> Self {
        assert!(i < MODES_PER_SLOT);
        let arm = if i & 4 == 0 { Arm::A } else { Arm::B };
        let pol = if i & 2 == 0 { Pol::H } else { Pol::V };
        let spectral = if i & 1 == 0 {
            Spectral::One
        } else {
            Spectral::Two
        };
        Self { arm, pol, spectral }
    }

    /// Index including the pass slot (`0` or `1`).
    pub fn slot_index(self, slot: usize) -> usize {
        slot * MODES_PER_SLOT + self.index()
    }

    pub fn all() -> impl Iterator<Item = ModeId> {
        (0..MODES_PER_SLOT).map(ModeId::from_index)
    }

    pub fn with_pol(self, pol: Pol) -> Self {
        Self { pol, ..self }
    }
}

/// Shorthand constructors for the mode labels used throughout the model.
pub mod modes {
    use super::{Arm, ModeId, Pol, Spectral};

    pub const A_H1: ModeId = ModeId::new(Arm::A, Pol::H, Spectral::One);
    pub const A_H2: ModeId = ModeId::new(Arm::A, Pol::H, Spectral::Two);
    pub const A_V1: ModeId = ModeId::new(Arm::A, Pol::V, Spectral::One);
    pub const A_V2: ModeId = ModeId::new(Arm::A, Pol::V, Spectral::Two);
    pub const B_H1: ModeId = ModeId::new(Arm::B, Pol::H, Spectral::One);
    pub const B_H2: ModeId = ModeId::new(Arm::B, Pol::H, Spectral::Two);
    pub const B_V1: ModeId = ModeId::new(Arm::B, Pol::V, Spectral::One);
    pub const B_V2: ModeId = ModeId::new(Arm::B, Pol::V, Spectral::Two);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_indices_are_canonical_and_distinct() {
        let all: Vec<ModeId> = ModeId::all().collect();
        assert_eq!(all.len(), 8);
        for (i, m) in all.iter().enumerate() {
            assert_eq!(m.index(), i);
            assert_eq!(ModeId::from_index(i), *m);
        }
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(sorted, all);
        assert_eq!(modes::A_H1.index(), 0);
        assert_eq!(modes::B_V2.index(), 7);
    }
}
