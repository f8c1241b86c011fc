//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_complex::Complex64;
use pdcsim::fock::{Basis, FockState};
use pdcsim::jsa::{FrequencyGrid, Jsa};
use rand::Rng;

/// Jones vectors `(h, v)` of the X and Y analyzer ports, written out
/// independently of the library.
pub fn jones(basis: Basis) -> [[Complex64; 2]; 2] {
    let r = 0.5f64.sqrt();
    let z = |re: f64, im: f64| Complex64::new(re, im);
    match basis {
        Basis::HV => [[z(1.0, 0.0), z(0.0, 0.0)], [z(0.0, 0.0), z(1.0, 0.0)]],
        Basis::PM => [[z(r, 0.0), z(r, 0.0)], [z(r, 0.0), z(-r, 0.0)]],
        Basis::RL => [[z(r, 0.0), z(0.0, r)], [z(r, 0.0), z(0.0, -r)]],
    }
}

/// `[XX, XY, YX, YY]` of the two-photon part of `state` at unit efficiency,
/// by projecting each spectral/pass block of the 4-dimensional polarization
/// space onto the product analyzer states.
pub fn two_photon_projection(state: &FockState, basis: Basis) -> [f64; 4] {
    // key: (mode of arm-a photon without pol bit, same for arm b)
    let mut blocks: BTreeMap<(usize, usize), [[Complex64; 2]; 2]> = BTreeMap::new();
    for entry in state.to_entries() {
        let occupied: Vec<usize> = entry
            .occupation
            .iter()
            .enumerate()
            .filter(|(_, n)| **n > 0)
            .map(|(m, _)| m)
            .collect();
        if entry.occupation.iter().map(|&n| n as u32).sum::<u32>() != 2 {
            continue;
        }
        assert_eq!(
            occupied.len(),
            2,
            "two-photon terms have one photon per arm"
        );
        let (ma, mb) = (occupied[0], occupied[1]);
        let pol = |m: usize| (m % 8 / 2) % 2;
        let rest = |m: usize| m & !2;
        let block = blocks.entry((rest(ma), rest(mb))).or_default();
        block[pol(ma)][pol(mb)] += Complex64::new(entry.re, entry.im);
    }
    let j = jones(basis);
    let mut out = [0.0; 4];
    for block in blocks.values() {
        for (k, (px, py)) in [(0, 0), (0, 1), (1, 0), (1, 1)].into_iter().enumerate() {
            let mut amp = Complex64::default();
            for pa in 0..2 {
                for pb in 0..2 {
                    amp += j[px][pa].conj() * j[py][pb].conj() * block[pa][pb];
                }
            }
            out[k] += amp.norm_sqr();
        }
    }
    out
}

/// Random smooth complex spectrum on the grid.
pub fn random_spectrum(rng: &mut impl Rng, grid: &FrequencyGrid) -> Vec<Complex64> {
    let c = rng.random_range(-0.3..0.3) * grid.half_span;
    let w = rng.random_range(0.05..0.3) * grid.half_span;
    let chirp = rng.random_range(-3.0..3.0) / (w * w);
    grid.omegas()
        .iter()
        .map(|&o| {
            let d = o - grid.center - c;
            Complex64::from_polar((-d * d / (2.0 * w * w)).exp(), chirp * d * d)
        })
        .collect()
}

pub fn random_factorized(rng: &mut impl Rng, grid: FrequencyGrid) -> Jsa {
    let g = random_spectrum(rng, &grid);
    let h = random_spectrum(rng, &grid);
    Jsa::factorized(grid, &g, &h).unwrap()
}
