//! Fixed parameter sets: the figure reproductions and the ⁸⁷Rb worked example.
//!
//! Natural-unit figures use U = 1 (or J = 1 without interactions), so times
//! are in ħ/U (ħ/J).

use crate::model::EnergyUnit;

/// 200 ⁸⁷Rb atoms at ζ = 0.0964, energies in nK·k_B.
pub mod worked_example {
    /// Atom number.
    pub const N_ATOMS: usize = 200;
    /// Barrier parameter J/U.
    pub const ZETA: f64 = 0.0964;
    /// Tilt of the p = 197 resonance (three atoms tunnel), nK·k_B.
    pub const TILT_P197_NK: f64 = 210.0;
    /// U back-derived from ΔV_197 = 2·197·U.
    pub const INTERACTION_NK: f64 = TILT_P197_NK / 394.0;
    /// Resonances with N − p = 3, 2, 1 tunneling atoms.
    pub const RESONANCES: [usize; 3] = [197, 198, 199];

    pub fn hopping_nk() -> f64 {
        ZETA * INTERACTION_NK
    }
}

pub const FIG1_N_ATOMS: usize = 100;
pub const FIG1_HOPPING: f64 = 1.0;
/// Tilt of the density panel, ΔV = 2J.
pub const FIG1_TILT: f64 = 2.0;
pub const FIG1_T_MAX: f64 = 10.0;
pub const FIG1_T_STEPS: usize = 500;
/// Amplitude/frequency panels: ΔV/J on [0, 30] in steps of 0.25.
pub const FIG1_TILT_MAX: f64 = 30.0;
pub const FIG1_TILT_STEP: f64 = 0.25;

pub const FIG2_N_ATOMS: usize = 10;
/// ζ/N = 10.
pub const FIG2_ZETA_OVER_N: f64 = 10.0;
pub const FIG2_INTERACTION: f64 = 1.0;
/// Two revival periods π/U.
pub const FIG2_T_MAX: f64 = 2.0 * std::f64::consts::PI;
pub const FIG2_T_STEPS: usize = 8000;

pub const FIG3_ZETA: f64 = 0.1;
pub const FIG3_INTERACTION: f64 = 1.0;
/// Density panels: N = 7 untilted and at the p = 2 resonance (ΔV = 4U).
pub const FIG3_DENSITY_N_ATOMS: usize = 7;
pub const FIG3_RESONANCE_P: usize = 2;
pub const FIG3_T_STEPS: usize = 400;
/// Amplitude-vs-tilt panel: N = 5 over ΔV/2U ∈ [0, 5].
pub const FIG3_SCAN_N_ATOMS: usize = 5;
pub const FIG3_SCAN_MAX_OVER_2U: f64 = 5.0;
pub const FIG3_SCAN_STEP_OVER_2U: f64 = 0.025;
/// Inset zoomed around ΔV/2U = 2.
pub const FIG3_ZOOM_P: usize = 2;

pub const FIG4_ZETA: f64 = 0.1;
pub const FIG4_P_PRIMES: [usize; 3] = [10, 50, 100];
pub const FIG4_N_MAX: usize = 1000;

pub const FIG5_ZETA: f64 = 0.1;
pub const FIG5_INTERACTION: f64 = 1.0;
pub const FIG5_N_MAX: usize = 100;
pub const FIG5_P_CURVES: [usize; 7] = [40, 50, 60, 70, 80, 90, 100];
pub const FIG5_UNIT: EnergyUnit = EnergyUnit::Natural;
