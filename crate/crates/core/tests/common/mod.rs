//! Invariants shared by the property tests and the acceptance runner.
#![allow(dead_code)]

use lmg::analytic::log_tau_exact;
use lmg::dynamics::{evolve, trajectory};
use lmg::entanglement::{entropy, q_measure};
use lmg::{build_hamiltonian, eigendecompose, initial_state_all_right, ModelParams, StateVector};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub const MAX_ATOMS: usize = 12;
pub const CASES: u32 = 256;

pub fn config() -> Config {
    Config { cases: CASES, failure_persistence: None, ..Config::default() }
}

/// Runner with a fixed seed, so acceptance output is reproducible.
pub fn deterministic_runner() -> TestRunner {
    TestRunner::new_with_rng(config(), TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

pub fn any_params() -> impl Strategy<Value = ModelParams> {
    (1..=MAX_ATOMS, 0.0..2.0f64, 0.0..2.0f64, -3.0..3.0f64).prop_map(|(n, j, u, tilt)| ModelParams::new(n, j, u, tilt).unwrap())
}

pub fn untilted_params() -> impl Strategy<Value = ModelParams> {
    any_params().prop_map(|p| p.with_tilt(0.0))
}

pub fn noninteracting_params() -> impl Strategy<Value = ModelParams> {
    (1..=MAX_ATOMS, 0.05..2.0f64, -3.0..3.0f64).prop_map(|(n, j, tilt)| ModelParams::new(n, j, 0.0, tilt).unwrap())
}

/// A normalized state with random complex amplitudes.
pub fn random_state(n: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n + 1).prop_filter_map("zero vector", |v| {
        StateVector::normalized(v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect()).ok()
    })
}

pub fn params_and_state() -> impl Strategy<Value = (ModelParams, StateVector)> {
    any_params().prop_flat_map(|p| {
        let n = p.n_atoms;
        (Just(p), random_state(n))
    })
}

pub fn times() -> impl Strategy<Value = f64> {
    0.0..60.0f64
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

pub fn norm_and_energy_conserved(params: &ModelParams, psi0: &StateVector, t: f64) -> Result<(), TestCaseError> {
    let h = build_hamiltonian(params).unwrap();
    let d = eigendecompose(&h).unwrap();
    let psi = evolve(&d, psi0, t).unwrap();
    let scale = h.max_abs().max(1.0);
    ensure((psi.norm_sqr() - 1.0).abs() <= 1e-10, || format!("norm {}", psi.norm_sqr()))?;
    let (e0, e1) = (h.expectation(psi0), h.expectation(&psi));
    ensure((e0 - e1).abs() <= 1e-10 * scale, || format!("energy {e0} -> {e1}"))
}

/// Without tilt, starting in the left well is the mirror image of starting in the right.
pub fn mirror_symmetry(params: &ModelParams, t: f64) -> Result<(), TestCaseError> {
    let n = params.n_atoms;
    let right = initial_state_all_right(n).unwrap();
    let left = right.mirrored();
    let grid = [t];
    let a = trajectory(params, &right, &grid).unwrap();
    let b = trajectory(params, &left, &grid).unwrap();
    for k in 0..=n {
        let (pa, pb) = (a.probabilities[0][k], b.probabilities[0][n - k]);
        ensure((pa - pb).abs() <= 1e-10, || format!("P_{k} = {pa} vs mirrored {pb}"))?;
    }
    Ok(())
}

/// Without interactions each atom tunnels independently: P_n(t) is binomial in
/// the single-atom transfer probability.
pub fn binomial_separability(params: &ModelParams, t: f64) -> Result<(), TestCaseError> {
    let n = params.n_atoms;
    let (j, dv) = (params.hopping, params.tilt);
    let omega = (4.0 * j * j + dv * dv).sqrt();
    let q = 4.0 * j * j / (omega * omega) * (0.5 * omega * t).sin().powi(2);
    let ts = trajectory(params, &initial_state_all_right(n).unwrap(), &[t]).unwrap();
    let mut binom = 1.0f64;
    for k in 0..=n {
        if k > 0 {
            binom *= (n - k + 1) as f64 / k as f64;
        }
        let expected = binom * q.powi(k as i32) * (1.0 - q).powi((n - k) as i32);
        let got = ts.probabilities[0][k];
        ensure((got - expected).abs() <= 1e-10, || format!("P_{k} = {got}, binomial {expected}"))?;
    }
    Ok(())
}

/// VᵀV = 1, HV = VΛ and Σλ = tr H.
pub fn eigensystem_bounds(params: &ModelParams) -> Result<(), TestCaseError> {
    let h = build_hamiltonian(params).unwrap();
    let d = eigendecompose(&h).unwrap();
    let dim = h.dim();
    let scale = h.max_abs().max(1.0);
    for a in 0..dim {
        for b in a..dim {
            let dot: f64 = (0..dim).map(|i| d.eigenvector(a)[i] * d.eigenvector(b)[i]).sum();
            let target = if a == b { 1.0 } else { 0.0 };
            ensure((dot - target).abs() <= 1e-10, || format!("<v{a}|v{b}> = {dot}"))?;
        }
        let v = d.eigenvector(a);
        let lambda = d.eigenvalue(a);
        for i in 0..dim {
            let mut hv = h.diag[i] * v[i];
            if i > 0 {
                hv += h.off[i - 1] * v[i - 1];
            }
            if i + 1 < dim {
                hv += h.off[i] * v[i + 1];
            }
            ensure((hv - lambda * v[i]).abs() <= 1e-10 * scale, || format!("residual {} in row {i} of pair {a}", hv - lambda * v[i]))?;
        }
    }
    let sum: f64 = d.eigenvalues().iter().sum();
    ensure((sum - h.trace()).abs() <= 1e-10 * scale * dim as f64, || format!("sum {sum} vs trace {}", h.trace()))?;
    let ev = d.eigenvalues();
    ensure(ev.windows(2).all(|w| w[0] <= w[1]), || "eigenvalues not ascending".into())
}

/// Untilted eigenvectors are even or odd under n → N − n.
pub fn parity(params: &ModelParams) -> Result<(), TestCaseError> {
    let d = eigendecompose(&build_hamiltonian(params).unwrap()).unwrap();
    let dim = d.dim();
    for k in 0..dim {
        let v = d.eigenvector(k);
        let even = (0..dim).map(|i| (v[i] - v[dim - 1 - i]).abs()).fold(0.0, f64::max);
        let odd = (0..dim).map(|i| (v[i] + v[dim - 1 - i]).abs()).fold(0.0, f64::max);
        ensure(even.min(odd) <= 1e-8, || format!("eigenvector {k} has no parity ({even}, {odd})"))?;
    }
    Ok(())
}

pub fn measure_bounds(psi: &StateVector) -> Result<(), TestCaseError> {
    let n = psi.n_atoms as f64;
    let q = q_measure(psi);
    let s = entropy(psi);
    let q_max = (n / (n + 1.0)).powi(2);
    ensure((-1e-12..=q_max + 1e-12).contains(&q), || format!("Q = {q} outside [0, {q_max}]"))?;
    ensure((-1e-12..=1.0 + 1e-12).contains(&s), || format!("S = {s} outside [0, 1]"))
}

/// (N, ζ) with ζ·sqrt((N − 1)/2) < 1, where the one-atom resonance is still perturbative.
pub fn perturbative_tau_grid() -> impl Strategy<Value = (usize, f64)> {
    (3..=300usize, 0.001..0.999f64).prop_map(|(n, x)| (n, x * (2.0 / (n - 1) as f64).sqrt().min(1.0)))
}

/// Fewer tunneling atoms means a larger speed-up: ln τ falls as p grows.
pub fn tau_monotone(n: usize, zeta: f64) -> Result<(), TestCaseError> {
    let taus: Vec<f64> = (1..n).map(|p| *log_tau_exact(n, p, zeta).unwrap()).collect();
    ensure(taus.iter().all(|t| *t < 0.0), || format!("ln tau not negative: {taus:?}"))?;
    ensure(taus.windows(2).all(|w| w[1] < w[0]), || format!("ln tau not decreasing in p: {taus:?}"))
}

/// Runs every invariant on a fixed-seed runner; returns (name, cases, outcome).
pub fn run_suite() -> Vec<(&'static str, u32, Result<(), String>)> {
    let mut out = Vec::new();
    let mut record = |name: &'static str, r: Result<(), proptest::test_runner::TestError<String>>| {
        out.push((name, CASES, r.map_err(|e| format!("{e}"))));
    };
    record("norm and energy conservation", deterministic_runner().run(&(params_and_state(), times()), |((p, s), t)| norm_and_energy_conserved(&p, &s, t)).map_err(erase));
    record("untilted mirror symmetry", deterministic_runner().run(&(untilted_params(), times()), |(p, t)| mirror_symmetry(&p, t)).map_err(erase));
    record("noninteracting binomial separability", deterministic_runner().run(&(noninteracting_params(), times()), |(p, t)| binomial_separability(&p, t)).map_err(erase));
    record("orthonormality, reconstruction and trace", deterministic_runner().run(&any_params(), |p| eigensystem_bounds(&p)).map_err(erase));
    record("untilted parity", deterministic_runner().run(&untilted_params(), |p| parity(&p)).map_err(erase));
    record("Q and S bounds", deterministic_runner().run(&(1..=MAX_ATOMS).prop_flat_map(random_state), |s| measure_bounds(&s)).map_err(erase));
    record("ln tau decreasing in p", deterministic_runner().run(&perturbative_tau_grid(), |(n, z)| tau_monotone(n, z)).map_err(erase));
    out
}

fn erase<T: std::fmt::Debug>(e: proptest::test_runner::TestError<T>) -> proptest::test_runner::TestError<String> {
    match e {
        proptest::test_runner::TestError::Abort(r) => proptest::test_runner::TestError::Abort(r),
        proptest::test_runner::TestError::Fail(r, v) => proptest::test_runner::TestError::Fail(r, format!("{v:?}")),
    }
}
