//! Cross-validation of the closed forms against diagonalization.

use std::f64::consts::PI;

use serde::Serialize;

use crate::analytic;
use crate::dynamics::{trajectory_all_right, uniform_grid};
use crate::error::Result;
use crate::model::{build_hamiltonian, ModelParams};
use crate::spectrum::{eigendecompose, resonant_pair_analysis, top_pair_gap};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    /// Worst observed error.
    pub error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckOutcome {
    fn new(name: impl Into<String>, error: f64, tolerance: f64) -> Self {
        CheckOutcome { name: name.into(), error, tolerance, passed: error <= tolerance }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckConfig {
    /// Largest N of the diagonalization grid.
    pub max_atoms: usize,
    /// Multiplies every tolerance.
    pub tolerance_scale: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { max_atoms: 10, tolerance_scale: 1.0 }
    }
}

impl CheckConfig {
    pub fn strict() -> Self {
        CheckConfig { tolerance_scale: 0.5, ..Default::default() }
    }
}

pub const CHECK_ZETAS: [f64; 2] = [0.05, 0.1];

/// Worst relative error of the top-pair splitting against the perturbative formula.
pub fn symmetric_splitting_error(n: usize, zeta: f64) -> Result<f64> {
    let params = ModelParams::from_zeta(n, zeta, 1.0, 0.0)?;
    let decomp = eigendecompose(&build_hamiltonian(&params)?)?;
    let ed = top_pair_gap(&decomp);
    let formula = analytic::splitting_symmetric(n, zeta, 1.0)?;
    Ok(ed.relative_error(&formula))
}

/// Relative error of the resonant-pair splitting at ΔV = 2pU. The diagonalized
/// value is the avoided-crossing gap of the pair, which removes the residual
/// detuning left by unequal second-order shifts of the two branches.
pub fn resonant_splitting_error(n: usize, p: usize, zeta: f64) -> Result<f64> {
    let params = ModelParams::from_zeta(n, zeta, 1.0, *analytic::resonance_tilt(p, 1.0))?;
    let decomp = eigendecompose(&build_hamiltonian(&params)?)?;
    let formula = analytic::splitting_resonance(n, p, zeta, 1.0)?;
    Ok(resonant_pair_analysis(&decomp, p)?.avoided_crossing_gap.relative_error(&formula))
}

/// Runs the suite and returns one outcome per check.
pub fn run_checks(config: CheckConfig) -> Result<Vec<CheckOutcome>> {
    let scale = config.tolerance_scale;
    let mut out = Vec::new();

    for zeta in CHECK_ZETAS {
        let mut worst = 0.0f64;
        for n in 1..=config.max_atoms {
            worst = worst.max(symmetric_splitting_error(n, zeta)?);
        }
        out.push(CheckOutcome::new(format!("top-pair splitting vs perturbative, zeta={zeta}"), worst, scale * 3.0 * zeta * zeta));

        let mut worst = 0.0f64;
        for n in 2..=config.max_atoms {
            for p in 1..=n - 2 {
                worst = worst.max(resonant_splitting_error(n, p, zeta)?);
            }
        }
        out.push(CheckOutcome::new(format!("resonant splitting vs perturbative, zeta={zeta}"), worst, scale * 0.1));
    }

    let mut worst = 0.0f64;
    for n in [1, 10, 50] {
        let params = ModelParams::new(n, 1.0, 0.0, 0.0)?;
        let grid = uniform_grid(2.0 * PI, 400);
        let ts = trajectory_all_right(&params, &grid)?;
        for (t, p) in grid.iter().zip(&ts.probabilities) {
            worst = worst.max((p[0] - *analytic::noninteracting_p0(n, 1.0, *t)).abs());
        }
    }
    out.push(CheckOutcome::new("noninteracting P_0 vs cos^2N", worst, scale * 1e-10));

    let n = 10;
    let params = ModelParams::new(n, 100.0, 1.0, 0.0)?;
    let grid = uniform_grid(3.0 * PI / params.hopping, 3000);
    let ts = trajectory_all_right(&params, &grid)?;
    let mse: f64 = grid
        .iter()
        .zip(&ts.mean)
        .map(|(t, m)| (m - *analytic::josephson_mean(n, params.hopping, 1.0, *t)).powi(2))
        .sum::<f64>()
        / grid.len() as f64;
    out.push(CheckOutcome::new("Josephson mean occupation RMS / N", mse.sqrt() / n as f64, scale * 0.02));

    let mut worst = 0.0f64;
    for n in 1..=config.max_atoms {
        for (zeta, tilt) in [(0.1, 0.0), (0.7, 0.3), (3.0, 1.7)] {
            let h = build_hamiltonian(&ModelParams::from_zeta(n, zeta, 1.0, tilt)?)?;
            let sum: f64 = eigendecompose(&h)?.eigenvalues().iter().sum();
            worst = worst.max((sum - h.trace()).abs() / h.trace().abs().max(1.0));
        }
    }
    out.push(CheckOutcome::new("eigenvalue sum vs trace", worst, scale * 1e-10));
    Ok(out)
}
