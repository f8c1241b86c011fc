use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{PairHamiltonian, MAX_MODES, MODES_PER_SLOT, PRUNE_THRESHOLD};

/// Photon numbers per mode. Unused slots (modes past the state's mode count)
/// are always zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Occupation([u8; MAX_MODES]);

impl Occupation {
    pub fn vacuum() -> Self {
        Self::default()
    }

    pub fn from_counts(counts: &[u8]) -> Result<Self> {
        if counts.len() > MAX_MODES {
            return Err(Error::invalid("occupation", "too many modes"));
        }
        let mut occ = [0u8; MAX_MODES];
        occ[..counts.len()].copy_from_slice(counts);
        Ok(Self(occ))
    }

    pub fn counts(&self) -> &[u8; MAX_MODES] {
        &self.0
    }

    pub fn get(&self, mode: usize) -> u8 {
        self.0[mode]
    }

    pub fn total(&self) -> u32 {
        self.0.iter().map(|&n| n as u32).sum()
    }

    /// Photons in modes whose canonical index has arm bit `arm` (0 = a, 1 = b).
    pub fn arm_total(&self, arm: usize) -> u32 {
        (0..MAX_MODES)
            .filter(|m| (m % MODES_PER_SLOT) / 4 == arm)
            .map(|m| self.0[m] as u32)
            .sum()
    }

    /// `a^dag_mode`: returns the raised occupation and the factor `sqrt(n+1)`.
    pub fn created(&self, mode: usize) -> (Occupation, f64) {
        let mut next = *self;
        let n = next.0[mode];
        next.0[mode] = n + 1;
        (next, ((n + 1) as f64).sqrt())
    }

    pub(crate) fn set(&mut self, mode: usize, n: u8) {
        self.0[mode] = n;
    }
}

/// One entry of the canonical JSON state dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateEntry {
    pub occupation: Vec<u8>,
    pub re: f64,
    pub im: f64,
}

/// Sparse superposition of Fock states truncated at `n_max` photons.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    components: BTreeMap<Occupation, Complex64>,
    n_max: u32,
    modes: usize,
    norm: f64,
}

impl FockState {
    pub fn vacuum(n_max: u32) -> Result<Self> {
        Self::from_components(
            [(Occupation::vacuum(), Complex64::new(1.0, 0.0))],
            n_max,
            MODES_PER_SLOT,
        )
    }

    pub fn zero(n_max: u32, modes: usize) -> Result<Self> {
        Self::from_components(std::iter::empty(), n_max, modes)
    }

    /// Builds a state, summing duplicate occupations and pruning amplitudes
    /// below [`PRUNE_THRESHOLD`].
    pub fn from_components(
        components: impl IntoIterator<Item = (Occupation, Complex64)>,
        n_max: u32,
        modes: usize,
    ) -> Result<Self> {
        if !n_max.is_multiple_of(2) {
            return Err(Error::invalid("n_max", format!("{n_max} must be even")));
        }
        if modes != MODES_PER_SLOT && modes != MAX_MODES {
            return Err(Error::invalid("modes", "must be 8 or 16"));
        }
        let mut map: BTreeMap<Occupation, Complex64> = BTreeMap::new();
        for (occ, amp) in components {
            if occ.total() > n_max {
                return Err(Error::invalid("occupation", "exceeds truncation"));
            }
            if occ.0[modes..].iter().any(|&n| n != 0) {
                return Err(Error::invalid(
                    "occupation",
                    "populates modes beyond the state",
                ));
            }
            *map.entry(occ).or_default() += amp;
        }
        map.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
        let norm = map.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        Ok(Self {
            components: map,
            n_max,
            modes,
            norm,
        })
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn amplitude(&self, occ: &Occupation) -> Complex64 {
        self.components.get(occ).copied().unwrap_or_default()
    }

    /// Components in canonical occupation order.
    pub fn iter(&self) -> impl Iterator<Item = (&Occupation, &Complex64)> {
        self.components.iter()
    }

    pub fn normalized(&self) -> Result<FockState> {
        if !(self.norm > 0.0) {
            return Err(Error::ZeroNorm);
        }
        let s = self.norm.recip();
        Self::from_components(
            self.components.iter().map(|(o, a)| (*o, a * s)),
            self.n_max,
            self.modes,
        )
    }

    pub fn scaled(&self, factor: Complex64) -> FockState {
        Self::from_components(
            self.components.iter().map(|(o, a)| (*o, a * factor)),
            self.n_max,
            self.modes,
        )
        .expect("scaling preserves validity")
    }

    /// Sum of two states with the same truncation; the result spans the
    /// larger mode set.
    pub fn added(&self, other: &FockState) -> Result<FockState> {
        if self.n_max != other.n_max {
            return Err(Error::invalid("n_max", "states have different truncation"));
        }
        Self::from_components(
            self.components
                .iter()
                .chain(other.components.iter())
                .map(|(o, a)| (*o, *a)),
            self.n_max,
            self.modes.max(other.modes),
        )
    }

    /// `sum |amp|^2` grouped by total photon number.
    pub fn photon_number_weights(&self) -> BTreeMap<u32, f64> {
        let mut out = BTreeMap::new();
        for (occ, amp) in &self.components {
            *out.entry(occ.total()).or_insert(0.0) += amp.norm_sqr();
        }
        out
    }

    pub fn to_entries(&self) -> Vec<StateEntry> {
        self.components
            .iter()
            .map(|(occ, amp)| StateEntry {
                occupation: occ.0[..self.modes].to_vec(),
                re: amp.re,
                im: amp.im,
            })
            .collect()
    }

    /// Canonically sorted JSON dump: `[{occupation, re, im}, ...]`.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_entries()).expect("state entries serialize")
    }

    pub fn from_entries(entries: &[StateEntry], n_max: u32) -> Result<FockState> {
        let modes = entries
            .first()
            .map_or(MODES_PER_SLOT, |e| e.occupation.len());
        let comps = entries
            .iter()
            .map(|e| {
                if e.occupation.len() != modes {
                    return Err(Error::invalid("occupation", "inconsistent mode count"));
                }
                Ok((
                    Occupation::from_counts(&e.occupation)?,
                    Complex64::new(e.re, e.im),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_components(comps, n_max, modes)
    }
}

/// Result of one application of the pair-creation operator.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCreation {
    pub state: FockState,
    /// `sum |amp|^2` of components dropped for exceeding the truncation.
    pub discarded_weight: f64,
}

/// `kappa * sum_i c_i a^dag_{m_i} b^dag_{n_i} |state>` with exact bosonic
/// factors. Components above the truncation are dropped and reported.
pub fn apply_pair_creation(state: &FockState, h: &PairHamiltonian) -> PairCreation {
    let mut kept: BTreeMap<Occupation, Complex64> = BTreeMap::new();
    let mut dropped: BTreeMap<Occupation, Complex64> = BTreeMap::new();
    for (occ, amp) in state.iter() {
        for term in h.terms() {
            let (o1, f1) = occ.created(term.first_index());
            let (o2, f2) = o1.created(term.second_index());
            let value = amp * term.coefficient * (h.kappa() * f1 * f2);
            let target = if o2.total() > state.n_max() {
                &mut dropped
            } else {
                &mut kept
            };
            *target.entry(o2).or_default() += value;
        }
    }
    let discarded_weight = dropped.values().map(|a| a.norm_sqr()).sum();
    let state = FockState::from_components(kept, state.n_max(), state.modes().max(h.modes()))
        .expect("creation keeps occupations within truncation");
    PairCreation {
        state,
        discarded_weight,
    }
}

/// Normalized truncated series `sum_{n=0}^{order} (kappa A^dag)^n / n! |0>`.
pub fn generate_state(h: &PairHamiltonian, order: u32, n_max: u32) -> Result<FockState> {
    let needed = 2 * order;
    if needed > n_max {
        return Err(Error::TruncationExceeded {
            order,
            needed,
            n_max,
        });
    }
    let mut term = FockState::vacuum(n_max)?;
    let mut total = term.clone();
    for n in 1..=order {
        term = apply_pair_creation(&term, h)
            .state
            .scaled(Complex64::new(1.0 / n as f64, 0.0));
        total = total.added(&term)?;
    }
    total.normalized()
}
