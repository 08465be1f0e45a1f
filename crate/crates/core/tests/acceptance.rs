//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

mod common;

use std::f64::consts::{LN_10, PI};
use std::process::ExitCode;
use std::time::Instant;

use lmg::analytic::{
    half_time_and_revival, josephson_mean, log_tau_exact, noninteracting_p0, period_from_splitting, resonance_period,
    resonance_tilt, splitting_symmetric, suppression_threshold_noninteracting, suppression_window,
};
use lmg::dynamics::{fitted_frequency, locate_first_revival, trajectory_all_right, tunneling_amplitude, uniform_grid};
use lmg::entanglement::report_at_period_fraction;
use lmg::fixtures::worked_example as wx;
use lmg::scan::{detect_resonances, tau_vs_n, tilt_sweep, TiltSweepOptions};
use lmg::validation::{resonant_splitting_error, symmetric_splitting_error};
use lmg::{EnergyUnit, ModelParams};

fn short(x: f64) -> String {
    format!("{}", (x * 1e6).round() / 1e6)
}

struct Criterion {
    name: &'static str,
    checks: Vec<(String, bool)>,
}

impl Criterion {
    fn new(name: &'static str) -> Self {
        Criterion { name, checks: Vec::new() }
    }

    fn check(&mut self, detail: impl Into<String>, ok: bool) {
        self.checks.push((detail.into(), ok));
    }

    /// |got − want| ≤ tol.
    fn within(&mut self, label: &str, got: f64, want: f64, tol: f64) {
        self.check(format!("{label} = {got:.6} (want {} ± {})", short(want), short(tol)), (got - want).abs() <= tol);
    }

    /// Relative deviation ≤ rel.
    fn within_rel(&mut self, label: &str, got: f64, want: f64, rel: f64) {
        let dev = ((got - want) / want).abs();
        self.check(format!("{label} = {got:.6} (want {want} ± {:.1}%, off {:.2}%)", rel * 100.0, dev * 100.0), dev <= rel);
    }

    fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|(_, ok)| *ok)
    }
}

fn noninteracting_exactness() -> Criterion {
    let mut c = Criterion::new("noninteracting exactness");
    let start = Instant::now();
    let mut worst = 0.0f64;
    for n in [1, 10, 50] {
        let params = ModelParams::new(n, 1.0, 0.0, 0.0).unwrap();
        // P_0 = cos^{2N}(Jt) has period T = π/J
        let grid = uniform_grid(2.0 * PI, 2000);
        let ts = trajectory_all_right(&params, &grid).unwrap();
        for (t, p) in grid.iter().zip(&ts.probabilities) {
            worst = worst.max((p[0] - *noninteracting_p0(n, 1.0, *t)).abs());
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    c.check(format!("max |P_0 − cos^2N| over [0, 2T] = {worst:.2e} (≤ 1e-10)"), worst <= 1e-10);
    c.check(format!("runtime {elapsed:.3} s (< 1 s)"), elapsed < 1.0);
    c
}

fn tilted_noninteracting() -> Criterion {
    let mut c = Criterion::new("tilted noninteracting");
    let (n, j) = (100, 1.0);
    let params = ModelParams::new(n, j, 0.0, 2.0 * j).unwrap();
    let amp = tunneling_amplitude(&params).unwrap();
    c.within("amplitude at tilt 2J", amp.amplitude, 50.0, 0.5);

    let grid = uniform_grid(20.0, 8000);
    let ts = trajectory_all_right(&params, &grid).unwrap();
    let omega = fitted_frequency(&ts.times, &ts.mean).unwrap_or(f64::NAN);
    c.within_rel("fitted frequency", omega, 2.0 * 2f64.sqrt() * j, 1e-3);

    let tilt = 1.05 * *suppression_threshold_noninteracting(n, j);
    let suppressed = tunneling_amplitude(&params.with_tilt(tilt)).unwrap().amplitude;
    c.check(format!("amplitude at tilt {tilt:.4} = {suppressed:.4} (< 1)"), suppressed < 1.0);
    c
}

fn josephson_modulation() -> Criterion {
    let mut c = Criterion::new("Josephson modulation");
    let (n, u) = (10, 1.0);
    let j = 10.0 * n as f64 * u;
    let params = ModelParams::new(n, j, u, 0.0).unwrap();

    // T = π/J, the tunneling period of the fast oscillation
    let grid = uniform_grid(3.0 * PI / j, 3000);
    let ts = trajectory_all_right(&params, &grid).unwrap();
    let mse = grid.iter().zip(&ts.mean).map(|(t, m)| (m - *josephson_mean(n, j, u, *t)).powi(2)).sum::<f64>() / grid.len() as f64;
    let rms = mse.sqrt() / n as f64;
    c.check(format!("RMS / N over [0, 3T] = {rms:.4} (≤ 0.02)"), rms <= 0.02);

    let env = half_time_and_revival(n, u).unwrap();
    let half = env.half_time.unwrap();
    let grid = uniform_grid(2.0 * PI / u, 8000);
    let ts = trajectory_all_right(&params, &grid).unwrap();
    match locate_first_revival(&ts.times, &ts.mean, n) {
        Some(t) => c.within("first revival", t, env.revival, half),
        None => c.check("first revival not found", false),
    }
    c
}

fn perturbative_splittings() -> Criterion {
    let mut c = Criterion::new("perturbative splittings");
    for zeta in [0.05, 0.1] {
        let worst = (1..=10).map(|n| symmetric_splitting_error(n, zeta).unwrap()).fold(0.0, f64::max);
        let tol = 3.0 * zeta * zeta;
        c.check(format!("zeta {zeta}: top pair worst rel. error {worst:.4} (≤ {})", short(tol)), worst <= tol);
        let worst = (3..=10)
            .flat_map(|n| (1..=n - 2).map(move |p| (n, p)))
            .map(|(n, p)| resonant_splitting_error(n, p, zeta).unwrap())
            .fold(0.0, f64::max);
        c.check(format!("zeta {zeta}: resonant pair worst rel. error {worst:.4} (≤ 0.1)"), worst <= 0.1);
    }
    c
}

fn worked_example() -> Criterion {
    let mut c = Criterion::new("worked example");
    let start = Instant::now();
    let (n, zeta, u) = (wx::N_ATOMS, wx::ZETA, wx::INTERACTION_NK);
    let ms = EnergyUnit::NanoKelvin;
    c.within("U [nK]", u, 0.53299, 5e-6);
    for (atoms, want) in [(1, 466.0), (2, 4840.0), (3, 134000.0)] {
        let t = period_from_splitting(splitting_symmetric(atoms, zeta, u).unwrap().value, ms).to_f64().unwrap();
        c.within_rel(&format!("T_{atoms} [ms]"), t, want, 0.02);
    }
    for (p, period, tilt, window) in [(197, 117.0, 210.0, 0.273), (198, 34.3, 211.0, 1.40), (199, 33.0, 212.0, 2.90)] {
        let t = resonance_period(n, p, zeta, u, ms).unwrap().to_f64().unwrap();
        c.within_rel(&format!("T_200^{p} [ms]"), t, period, 0.05);
        c.within_rel(&format!("tilt_{p} [nK]"), *resonance_tilt(p, u), tilt, 0.01);
        let w = suppression_window(n, p, zeta, u).unwrap().to_f64().unwrap();
        c.within_rel(&format!("window_{p} [nK]"), w, window, 0.05);
    }
    let log_t = period_from_splitting(splitting_symmetric(n, zeta, u).unwrap().value, ms).log10_abs();
    c.within("log10 T_200 [ms]", log_t, 635.06, 0.1);
    let log_w = suppression_window(n, 0, zeta, u).unwrap().log10_abs();
    c.within("log10 symmetric window [nK]", log_w, -635.4, 0.2);
    let elapsed = start.elapsed().as_secs_f64();
    c.check(format!("runtime {elapsed:.4} s (< 1 s)"), elapsed < 1.0);
    c
}

fn resonance_scan() -> Criterion {
    let mut c = Criterion::new("resonance scan");
    let (n, zeta, u) = (5, 0.1, 1.0);
    let params = ModelParams::from_zeta(n, zeta, u, 0.0).unwrap();
    let grid: Vec<f64> = (0..=200).map(|k| 2.0 * u * k as f64 * 0.025).collect();
    let sweep = tilt_sweep(&params, &grid, TiltSweepOptions::default()).unwrap();
    let found = detect_resonances(&sweep, u);
    for p in 1..=4 {
        let step = suppression_window(n, p, zeta, u).unwrap().to_f64().unwrap() / 10.0;
        match found.iter().find(|r| r.p == p) {
            Some(r) => {
                c.check(format!("p={p}: peak offset {:.2e} (≤ refined step {step:.2e})", r.offset), r.offset <= step);
                c.within(&format!("p={p}: amplitude"), r.amplitude, (n - p) as f64, 0.3);
            }
            None => c.check(format!("p={p}: no peak detected"), false),
        }
    }
    let log10_tau = *log_tau_exact(7, 2, zeta).unwrap() / LN_10;
    c.within("N=7, p=2: |log10 tau|", log10_tau.abs(), 5.0, 1.0);
    c
}

fn entanglement_maxima() -> Criterion {
    let mut c = Criterion::new("entanglement maxima");
    let (n, zeta) = (7, 0.1);
    let params = ModelParams::from_zeta(n, zeta, 1.0, 0.0).unwrap();
    let quarter = report_at_period_fraction(&params, 0.25).unwrap();
    c.within("T/4: Q", quarter.q_measure, 0.4375, 1e-3);
    c.within("T/4: S", quarter.entropy, 2f64.ln() / 8f64.ln(), 1e-3);
    c.check(format!("T/4: Schmidt rank {} (want 2)", quarter.schmidt_rank), quarter.schmidt_rank == 2);
    match quarter.mss.applicable() {
        Some(m) => c.check(format!("T/4: C_delta {} (want 7)", m.c_delta), m.c_delta == 7.0),
        None => c.check("T/4: MSS not applicable", false),
    }
    let half = report_at_period_fraction(&params, 0.5).unwrap();
    c.check(format!("T/2: Schmidt rank {} (want 1)", half.schmidt_rank), half.schmidt_rank == 1);
    let bound = 5.0 * zeta * zeta;
    c.check(format!("T/2: Q = {:.5} (≤ {bound})", half.q_measure), half.q_measure <= bound);
    c
}

fn stirling_check() -> Criterion {
    let mut c = Criterion::new("Stirling expansion");
    let zeta = 0.1;
    for q in [10usize, 50, 100] {
        let sweep = tau_vs_n(zeta, &[q], 5 * q..=10 * q).unwrap();
        let worst = sweep.records.iter().map(|r| r.relative_error).fold(0.0, f64::max);
        c.check(format!("p'={q}: worst rel. error over N in [{}, {}] = {worst:.4} (≤ 0.02)", 5 * q, 10 * q), worst <= 0.02);
    }
    c
}

fn property_suite() -> Criterion {
    let mut c = Criterion::new("property suite");
    for (name, cases, outcome) in common::run_suite() {
        match outcome {
            Ok(()) => c.check(format!("{name}: {cases} cases"), true),
            Err(e) => c.check(format!("{name}: {e}"), false),
        }
    }
    c
}

fn main() -> ExitCode {
    let criteria: [fn() -> Criterion; 9] = [
        noninteracting_exactness,
        tilted_noninteracting,
        josephson_modulation,
        perturbative_splittings,
        worked_example,
        resonance_scan,
        entanglement_maxima,
        stirling_check,
        property_suite,
    ];
    let mut failed = 0;
    for (i, f) in criteria.iter().enumerate() {
        let c = f();
        let status = if c.passed() { "PASS" } else { "FAIL" };
        let summary: Vec<&str> = c.checks.iter().map(|(d, _)| d.as_str()).collect();
        println!("{status} [{}] {}: {}", i + 1, c.name, summary.join("; "));
        for (detail, ok) in &c.checks {
            if !ok {
                println!("       failed: {detail}");
            }
        }
        if !c.passed() {
            failed += 1;
        }
    }
    println!("\n{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
