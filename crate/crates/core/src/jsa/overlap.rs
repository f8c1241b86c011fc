use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Execution;

use super::Jsa;

const MAX_ITERATIONS: usize = 20_000;
const TOLERANCE: f64 = 1e-15;

/// Dominant-mode factorization `f ~ s0 g(w_o) h(w_e)` of a joint amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapResult {
    /// `sum g*(w) h(w) dw`, with the free phase of the factorization chosen
    /// so that `x` is real and non-negative.
    pub x: Complex64,
    pub x_squared: f64,
    /// `s0^2 / sum s_i^2`.
    pub rank1_fidelity: f64,
    pub singular_value: f64,
    /// Ordinary-photon mode, unit norm under `sum |g|^2 dw`.
    pub ordinary_mode: Vec<Complex64>,
    /// Extraordinary-photon mode, unit norm under `sum |h|^2 dw`.
    pub extraordinary_mode: Vec<Complex64>,
    pub iterations: usize,
}

/// Spectral overlap of the dominant singular modes of `jsa`.
pub fn spectral_overlap(jsa: &Jsa) -> Result<OverlapResult> {
    spectral_overlap_with(jsa, Execution::default())
}

pub fn spectral_overlap_with(jsa: &Jsa, exec: Execution) -> Result<OverlapResult> {
    let n = jsa.n();
    let frob: f64 = jsa.amplitude().iter().map(|z| z.norm_sqr()).sum();
    if !(frob > 0.0) {
        return Err(Error::ZeroNorm);
    }

    // A v
    let apply = |v: &[Complex64]| -> Vec<Complex64> {
        exec.map(n, |i| {
            jsa.row(i)
                .iter()
                .zip(v)
                .fold(Complex64::default(), |acc, (a, b)| acc + a * b)
        })
    };
    // A^H u
    let apply_adjoint = |u: &[Complex64]| -> Vec<Complex64> {
        exec.map(n, |j| {
            (0..n).fold(Complex64::default(), |acc, i| {
                acc + jsa.get(i, j).conj() * u[i]
            })
        })
    };

    let mut u: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(jsa.row(i).iter().map(|z| z.norm()).sum(), 0.0))
        .collect();
    normalize(&mut u).ok_or(Error::ZeroNorm)?;
    let mut v = apply_adjoint(&u);
    let mut sigma = normalize(&mut v).ok_or(Error::ZeroNorm)?;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        u = apply(&v);
        normalize(&mut u).ok_or(Error::ZeroNorm)?;
        let mut v_next = apply_adjoint(&u);
        let s = normalize(&mut v_next).ok_or(Error::ZeroNorm)?;
        let delta: f64 = v_next.iter().zip(&v).map(|(a, b)| (a - b).norm_sqr()).sum();
        v = v_next;
        let converged = (s - sigma).abs() <= TOLERANCE * s && delta < 1e-24;
        sigma = s;
        if converged {
            break;
        }
    }

    // A = sigma u v^H, so g = u and h = conj(v) up to grid scaling.
    let mut x: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b.conj()).sum();
    // u -> e^{i phi} u, v -> e^{i phi} v leaves A unchanged and maps x -> e^{-2 i phi} x.
    let phase = if x.norm() > 0.0 { 0.5 * x.arg() } else { 0.0 };
    let rot = Complex64::from_polar(1.0, phase);
    let scale = jsa.grid().step().sqrt().recip();
    let g: Vec<Complex64> = u.iter().map(|z| z * rot * scale).collect();
    let h: Vec<Complex64> = v.iter().map(|z| (z * rot).conj() * scale).collect();
    x = Complex64::new(x.norm(), 0.0);

    Ok(OverlapResult {
        x,
        x_squared: x.norm_sqr(),
        rank1_fidelity: (sigma * sigma / frob).min(1.0),
        singular_value: sigma * jsa.grid().step(),
        ordinary_mode: g,
        extraordinary_mode: h,
        iterations,
    })
}

fn normalize(v: &mut [Complex64]) -> Option<f64> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return None;
    }
    v.iter_mut().for_each(|z| *z /= norm);
    Some(norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jsa::{visibility_from_jsa, FrequencyGrid};

    fn grid() -> FrequencyGrid {
        FrequencyGrid::new(2.4e15, 1e14, 64).unwrap()
    }

    fn bump(center: f64, width: f64, phase: f64) -> Vec<Complex64> {
        (0..64)
            .map(|i| {
                let t = i as f64;
                Complex64::from_polar(
                    (-(t - center).powi(2) / (2.0 * width * width)).exp(),
                    phase * t,
                )
            })
            .collect()
    }

    #[test]
    fn identical_factors_give_unit_overlap() {
        let g = bump(30.0, 4.0, 0.1);
        let jsa = Jsa::factorized(grid(), &g, &g).unwrap();
        let r = spectral_overlap(&jsa).unwrap();
        assert!((r.x - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((r.rank1_fidelity - 1.0).abs() < 1e-12);
        assert!((r.x_squared - r.x.norm_sqr()).abs() < 1e-12);
    }

    #[test]
    fn disjoint_factors_give_zero_overlap() {
        let g: Vec<Complex64> = (0..64)
            .map(|i| Complex64::new((i < 32) as u8 as f64, 0.0))
            .collect();
        let h: Vec<Complex64> = (0..64)
            .map(|i| Complex64::new((i >= 32) as u8 as f64, 0.0))
            .collect();
        let r = spectral_overlap(&Jsa::factorized(grid(), &g, &h).unwrap()).unwrap();
        assert!(r.x.norm() < 1e-12);
    }

    #[test]
    fn factorized_overlap_equals_visibility() {
        let g = bump(28.0, 3.0, 0.2);
        let h = bump(34.0, 6.0, -0.1);
        let jsa = Jsa::factorized(grid(), &g, &h).unwrap();
        let r = spectral_overlap(&jsa).unwrap();
        let v = visibility_from_jsa(&jsa).unwrap();
        assert!((r.x_squared - v).abs() < 1e-10, "{} {}", r.x_squared, v);
    }

    #[test]
    fn zero_amplitude_errors() {
        let jsa = Jsa::from_amplitude(grid(), vec![Complex64::default(); 64 * 64]).unwrap();
        assert!(matches!(spectral_overlap(&jsa), Err(Error::ZeroNorm)));
    }
}
