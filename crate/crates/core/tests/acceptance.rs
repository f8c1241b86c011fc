//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use pdcsim::dispersion::{CrystalSpec, SellmeierModel};
use pdcsim::fock::modes::{A_H1, B_V1};
use pdcsim::fock::{
    coincidence_probabilities, generate_state, Basis, Occupation, PairHamiltonian, PairTerm,
    PassTag,
};
use pdcsim::jsa::{
    bandwidth_for_visibility, build_jsa, filter_sweep, spectral_overlap, visibility_from_jsa,
    FrequencyGrid, GridConfig, JsaOptions, PumpSpec,
};
use pdcsim::model::{
    coincidence_table, model_state, phase_sweep, polarization_visibility, power_sweep,
    single_pass_visibility_closed_form, theta_grid, ModelParams, PassConfig,
};
use pdcsim::run::{linear_fit, run, RunConfig, Scenario};
use pdcsim::Execution;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn filter_sweep_setup() -> (CrystalSpec, PumpSpec, SellmeierModel) {
    (
        CrystalSpec::default(),
        PumpSpec::default(),
        SellmeierModel::bbo(),
    )
}

fn filter_sweep_endpoints() -> Outcome {
    let (c, p, m) = filter_sweep_setup();
    let start = Instant::now();
    let grid = GridConfig::default().resolve(&c, &p, &m).unwrap();
    let rows = filter_sweep(
        &c,
        &p,
        &grid,
        &m,
        &JsaOptions::default(),
        780.0,
        &[5.0],
        Execution::Parallel,
    )
    .unwrap();
    let per_point = start.elapsed().as_secs_f64() / rows.len() as f64;
    let (v0, v5) = (rows[0].visibility, rows[1].visibility);
    let pass = (v0 - 0.622).abs() <= 0.03
        && (v5 - 0.908).abs() <= 0.03
        && per_point < 5.0
        && grid.n == 512;
    outcome(
        pass,
        format!("unfiltered V = {v0:.4} (0.622 +/- 0.03), 5 nm V = {v5:.4} (0.908 +/- 0.03), {per_point:.3} s per point on {0}x{0}", grid.n),
    )
}

fn half_rate_point() -> Outcome {
    let (c, p, m) = filter_sweep_setup();
    let grid = GridConfig::default().resolve(&c, &p, &m).unwrap();
    let jsa = build_jsa(&c, &p, &grid, &m).unwrap();
    let x = bandwidth_for_visibility(&jsa, 780.0, 0.95, 0.05, 1000.0).unwrap();
    let pass = (x.relative_rate - 0.5).abs() <= 0.1;
    outcome(
        pass,
        format!(
            "V reaches 0.95 at {:.3} nm half-width with relative rate {:.4} (0.5 +/- 0.1)",
            x.bandwidth_nm, x.relative_rate
        ),
    )
}

fn compensation_theorem() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut count = 0;
    for x2 in [0.3, 0.49, 0.57, 0.91] {
        for y2 in [0.12, 0.28, 0.5] {
            let p = ModelParams::from_squares(x2, y2).unwrap();
            for basis in Basis::ALL {
                let v = polarization_visibility(&p, PassConfig::Double, basis).unwrap();
                worst = worst.max((v - 1.0).abs());
                count += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst < 1e-9 && secs < 1.0,
        format!("{count} cases, max |V - 1| = {worst:.2e}, {secs:.3} s"),
    )
}

fn single_pass_laws() -> Outcome {
    let mut rng = StdRng::seed_from_u64(20);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let x = Complex64::from_polar(
            rng.random_range(0.0..1.0f64).sqrt(),
            rng.random_range(0.0..2.0 * PI),
        );
        let y = rng.random_range(0.0..1.0f64).sqrt();
        let p = ModelParams {
            x,
            y,
            ..ModelParams::default()
        };
        for pass in [PassConfig::FirstOnly, PassConfig::SecondOnly] {
            for basis in Basis::ALL {
                let v = polarization_visibility(&p, pass, basis).unwrap();
                worst = worst.max((v - single_pass_visibility_closed_form(x, y, basis)).abs());
            }
        }
    }
    outcome(
        worst < 1e-9,
        format!("20 random (x, y), both passes, 3 bases: max deviation {worst:.2e}"),
    )
}

fn fringe_laws() -> Outcome {
    let thetas = theta_grid(64);
    let mut worst_hv = 0.0f64;
    let mut worst_pm_rl = 0.0f64;
    let mut worst_pi = 0.0f64;
    for x2 in [0.3, 0.57, 0.91] {
        let p = ModelParams::from_squares(x2, 0.5).unwrap();
        let scan = phase_sweep(&p, &thetas, &Basis::ALL, Execution::Parallel).unwrap();
        worst_hv = worst_hv.max((scan.visibility(Basis::HV).unwrap() - x2).abs());
        for b in [Basis::PM, Basis::RL] {
            worst_pm_rl = worst_pm_rl.max((scan.visibility(b).unwrap() - 1.0).abs());
        }
        let at_pi = ModelParams { theta: PI, ..p };
        let t = coincidence_table(&at_pi, PassConfig::Double, Basis::PM).unwrap();
        worst_pi = worst_pi.max(t.anticorrelated());
    }
    outcome(
        worst_hv < 1e-6 && worst_pm_rl < 1e-6 && worst_pi < 1e-12,
        format!(
            "{} samples, |V_HV - x^2| <= {worst_hv:.2e}, |V_PM,RL - 1| <= {worst_pm_rl:.2e}, PM rate at pi <= {worst_pi:.2e}",
            thetas.len()
        ),
    )
}

fn multiphoton_trend() -> Outcome {
    let p = ModelParams::from_squares(0.91, 0.5).unwrap();
    let kappa_sq: Vec<f64> = (1..=20).map(|i| 0.005 * i as f64).collect();
    let kappas: Vec<f64> = kappa_sq.iter().map(|k| k.sqrt()).collect();
    let rows = power_sweep(&p, &kappas, Basis::PM, Execution::Parallel).unwrap();
    let v0 = polarization_visibility(&p, PassConfig::Double, Basis::PM).unwrap();
    let xs: Vec<f64> = std::iter::once(0.0)
        .chain(kappa_sq.iter().copied())
        .collect();
    let vs: Vec<f64> = std::iter::once(v0)
        .chain(rows.iter().map(|r| r.visibility))
        .collect();
    let monotone = vs.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let (slope, intercept) = linear_fit(&xs, &vs);
    let residual = xs
        .iter()
        .zip(&vs)
        .map(|(x, v)| (v - (slope * x + intercept)).abs())
        .fold(0.0, f64::max);
    let drop = vs[0] - vs[vs.len() - 1];
    let ratio = residual / drop;
    outcome(
        monotone && slope < 0.0 && ratio < 0.05,
        format!(
            "monotone = {monotone}, V {:.4} -> {:.4} over kappa^2 in [0, 0.1], slope {slope:.3}, max fit residual {:.1}% of drop (limit 5%)",
            vs[0],
            vs[vs.len() - 1],
            100.0 * ratio
        ),
    )
}

fn fock_oracles() -> Outcome {
    let mut problems = Vec::new();
    // Single-term series against kappa^n |n, n>.
    for kappa in [0.3, 0.7] {
        let h = PairHamiltonian::new(
            kappa,
            vec![PairTerm::new(
                Complex64::new(1.0, 0.0),
                A_H1,
                B_V1,
                PassTag::Merged,
            )],
        )
        .unwrap();
        for order in 0..=3u32 {
            let s = generate_state(&h, order, 6).unwrap();
            let z: f64 = (0..=order)
                .map(|n| kappa.powi(2 * n as i32))
                .sum::<f64>()
                .sqrt();
            for n in 0..=order {
                let mut counts = [0u8; 8];
                counts[A_H1.index()] = n as u8;
                counts[B_V1.index()] = n as u8;
                let a = s.amplitude(&Occupation::from_counts(&counts).unwrap());
                let expect = kappa.powi(n as i32) / z;
                if (a - Complex64::new(expect, 0.0)).norm() > 1e-14 {
                    problems.push(format!(
                        "kappa {kappa} order {order} n {n}: {a} vs {expect}"
                    ));
                }
            }
            if s.len() != order as usize + 1 {
                problems.push(format!("unexpected components at order {order}"));
            }
        }
    }
    // Two-photon tables, norms and parity on model states.
    let mut rng = StdRng::seed_from_u64(7);
    let mut worst_table = 0.0f64;
    let mut worst_norm = 0.0f64;
    for _ in 0..12 {
        let p = ModelParams {
            x: Complex64::from_polar(
                rng.random_range(0.0..1.0f64).sqrt(),
                rng.random_range(0.0..2.0 * PI),
            ),
            y: rng.random_range(0.0..1.0f64).sqrt(),
            theta: rng.random_range(0.0..2.0 * PI),
            kappa: rng.random_range(0.05..0.3),
            ..ModelParams::default()
        };
        for pass in [PassConfig::FirstOnly, PassConfig::Double] {
            let s1 = model_state(&p, pass).unwrap();
            for basis in Basis::ALL {
                let t = coincidence_probabilities(&s1, basis, 1.0).unwrap();
                let o = common::two_photon_projection(&s1, basis);
                for (a, b) in [t.xx, t.xy, t.yx, t.yy].iter().zip(o) {
                    worst_table = worst_table.max((a - b).abs());
                }
            }
            let s2 = model_state(&ModelParams { order: 2, ..p }, pass).unwrap();
            for s in [&s1, &s2] {
                worst_norm = worst_norm.max((s.norm() - 1.0).abs());
                for (occ, _) in s.iter() {
                    if occ.arm_total(0) != occ.arm_total(1) || occ.total() % 2 != 0 {
                        problems.push(format!("parity violated: {:?}", occ.counts()));
                    }
                }
            }
        }
    }
    if worst_table > 1e-10 {
        problems.push(format!("table deviation {worst_table:.2e}"));
    }
    if worst_norm > 1e-12 {
        problems.push(format!("norm deviation {worst_norm:.2e}"));
    }
    outcome(
        problems.is_empty(),
        format!(
            "closed-form series exact, table vs projection oracle {worst_table:.2e}, norm {worst_norm:.2e}{}",
            if problems.is_empty() { String::new() } else { format!("; {}", problems.join("; ")) }
        ),
    )
}

fn jsa_consistency() -> Outcome {
    let mut rng = StdRng::seed_from_u64(5);
    let grid = FrequencyGrid::new(2.4e15, 2e13, 128).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let jsa = common::random_factorized(&mut rng, grid);
        let x2 = spectral_overlap(&jsa).unwrap().x_squared;
        worst = worst.max((x2 - visibility_from_jsa(&jsa).unwrap()).abs());
    }
    let (c, p, m) = filter_sweep_setup();
    let v = |n: usize| {
        let g = GridConfig {
            n,
            ..Default::default()
        }
        .resolve(&c, &p, &m)
        .unwrap();
        visibility_from_jsa(&build_jsa(&c, &p, &g, &m).unwrap()).unwrap()
    };
    let (v512, v1024) = (v(512), v(1024));
    let shift = (v1024 - v512).abs();
    outcome(
        worst < 1e-10 && shift < 0.005,
        format!("factorized |x|^2 vs V max deviation {worst:.2e}; V(512) = {v512:.6}, V(1024) = {v1024:.6}, shift {:.2e} pp", 100.0 * shift),
    )
}

fn csv_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let config = RunConfig::default();
    let mut runs = Vec::new();
    for (label, threads) in [("a", Some(8)), ("b", Some(8)), ("c", Some(1))] {
        let mut all = Vec::new();
        for s in Scenario::ALL {
            let dir = tmp.path().join(label).join(s.name());
            run(s, &config, &dir, threads).unwrap();
            all.extend(
                csv_bytes(&dir)
                    .into_iter()
                    .map(|(f, b)| (format!("{}/{f}", s.name()), b)),
            );
        }
        runs.push(all);
    }
    let files = runs[0].len();
    let bytes: usize = runs[0].iter().map(|(_, b)| b.len()).sum();
    outcome(
        runs[0] == runs[1] && runs[0] == runs[2] && files > 0,
        format!("{files} CSV files ({bytes} bytes) identical across two 8-thread runs and a 1-thread run"),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("filter-sweep-endpoints", filter_sweep_endpoints),
        ("half-rate-point", half_rate_point),
        ("compensation-theorem", compensation_theorem),
        ("single-pass-laws", single_pass_laws),
        ("fringe-laws", fringe_laws),
        ("multiphoton-trend", multiphoton_trend),
        ("fock-oracles", fock_oracles),
        ("jsa-consistency", jsa_consistency),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        let o = check();
        println!(
            "[{}] {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.pass {
            failed.push(name);
        }
    }
    println!(
        "acceptance: {} passed, {} failed",
        criteria.len() - failed.len(),
        failed.len()
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
