//! Model parameters, Fock basis states and the tridiagonal two-mode Hamiltonian.
//!
//! The Fock basis is indexed by the left-well occupation `n_L = 0..=N`, so
//! index 0 is `|0, N⟩` (every atom in the right well). Energies are plain
//! numbers in a caller-chosen unit with ħ = 1; [`PhysicalUnits`] converts
//! between nK·k_B energies and millisecond times.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unit of every energy in a [`ModelParams`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergyUnit {
    /// Dimensionless, ħ = 1; times come out in ħ/(energy unit).
    #[default]
    Natural,
    /// Energies in nK·k_B; times convert to milliseconds.
    #[serde(rename = "nK")]
    NanoKelvin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n_atoms: usize,
    /// Hopping J, kept nonnegative (the sign is a gauge choice).
    pub hopping: f64,
    /// On-site interaction U, in the `U n(n-1)` convention (no factor 1/2).
    pub interaction: f64,
    /// Tilt ΔV, multiplying the left-well occupation.
    pub tilt: f64,
    /// Trap level spacing ħω in the same energy unit; only used by [`validity_chi`].
    #[serde(default)]
    pub trap_frequency: Option<f64>,
    #[serde(default)]
    pub unit: EnergyUnit,
}

impl ModelParams {
    pub fn new(n_atoms: usize, hopping: f64, interaction: f64, tilt: f64) -> Result<Self> {
        let params = ModelParams { n_atoms, hopping, interaction, tilt, trap_frequency: None, unit: EnergyUnit::Natural };
        params.validate()?;
        Ok(params)
    }

    /// Parameters from ζ = J/|U| with the interaction fixed.
    pub fn from_zeta(n_atoms: usize, zeta: f64, interaction: f64, tilt: f64) -> Result<Self> {
        Self::new(n_atoms, zeta * interaction.abs(), interaction, tilt)
    }

    pub fn with_trap_frequency(mut self, hbar_omega: f64) -> Result<Self> {
        self.trap_frequency = Some(hbar_omega);
        self.validate()?;
        Ok(self)
    }

    pub fn with_unit(mut self, unit: EnergyUnit) -> Self {
        self.unit = unit;
        self
    }

    pub fn with_tilt(mut self, tilt: f64) -> Self {
        self.tilt = tilt;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_atoms < 1 {
            return Err(Error::InvalidParams("n_atoms must be at least 1".into()));
        }
        if !(self.hopping >= 0.0) || !self.hopping.is_finite() {
            return Err(Error::InvalidParams(format!("hopping must be finite and nonnegative, got {}", self.hopping)));
        }
        if !self.interaction.is_finite() || !self.tilt.is_finite() {
            return Err(Error::InvalidParams("interaction and tilt must be finite".into()));
        }
        if let Some(w) = self.trap_frequency {
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidParams(format!("trap_frequency must be positive, got {w}")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n_atoms + 1
    }

    /// ζ = J/|U|; infinite for a noninteracting gas.
    pub fn zeta(&self) -> f64 {
        if self.interaction == 0.0 {
            f64::INFINITY
        } else {
            self.hopping / self.interaction.abs()
        }
    }

    /// χ = (N² − 1)U / (2ħω), if a trap frequency is known.
    pub fn chi(&self) -> Option<f64> {
        self.trap_frequency.map(|w| {
            let n = self.n_atoms as f64;
            (n * n - 1.0) * self.interaction / (2.0 * w)
        })
    }

    /// Natural time unit: ħ/|U| when interacting, otherwise ħ/J.
    pub fn time_unit(&self) -> f64 {
        if self.interaction != 0.0 {
            1.0 / self.interaction.abs()
        } else if self.hopping != 0.0 {
            1.0 / self.hopping
        } else {
            1.0
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let params: ModelParams = serde_json::from_str(text)?;
        params.validate()?;
        Ok(params)
    }
}

/// Outcome of the two-mode validity check `χ ≲ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Validity {
    Known { chi: f64, valid: bool },
    /// No trap frequency was supplied.
    Unknown,
}

pub fn validity_chi(params: &ModelParams) -> Validity {
    match params.chi() {
        Some(chi) => Validity::Known { chi, valid: chi <= 1.0 },
        None => Validity::Unknown,
    }
}

/// Symmetric tridiagonal matrix: `diag[i]` and `off[i]` coupling `i` to `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::DimensionMismatch { expected: diag.len().saturating_sub(1), actual: off.len() });
        }
        Ok(SymTridiagonal { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else if i + 1 == j {
            self.off[i]
        } else if j + 1 == i {
            self.off[j]
        } else {
            0.0
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|j| self.get(i, j)).collect()).collect()
    }

    /// max |H_ij|
    pub fn max_abs(&self) -> f64 {
        self.diag.iter().chain(self.off.iter()).fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut y = x[i] * self.diag[i];
                if i > 0 {
                    y += x[i - 1] * self.off[i - 1];
                }
                if i + 1 < n {
                    y += x[i + 1] * self.off[i];
                }
                y
            })
            .collect()
    }

    pub fn expectation(&self, psi: &StateVector) -> f64 {
        let h_psi = self.apply(&psi.amplitudes);
        psi.amplitudes.iter().zip(&h_psi).map(|(c, h)| (c.conj() * h).re).sum()
    }
}

/// Two-mode Hamiltonian in the Fock basis `|n_L, N − n_L⟩`.
///
/// Diagonal: `U[n_L(n_L−1) + n_R(n_R−1)] + ΔV·n_L`; off-diagonal between
/// `n_L` and `n_L+1`: `−J·sqrt((n_L+1)(N−n_L))`. Integer parts are formed
/// exactly so that the ΔV = 0 matrix is bitwise mirror-symmetric.
pub fn build_hamiltonian(params: &ModelParams) -> Result<SymTridiagonal> {
    params.validate()?;
    let n = params.n_atoms as u64;
    let diag = (0..=n)
        .map(|l| {
            let r = n - l;
            let pairs = l * l.saturating_sub(1) + r * r.saturating_sub(1);
            params.interaction * pairs as f64 + params.tilt * l as f64
        })
        .collect();
    let off = (0..n).map(|l| -params.hopping * (((l + 1) * (n - l)) as f64).sqrt()).collect();
    SymTridiagonal::new(diag, off)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub n_atoms: usize,
    pub amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub const NORM_TOLERANCE: f64 = 1e-12;

    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(Error::InvalidParams("a state needs at least two Fock amplitudes".into()));
        }
        let state = StateVector { n_atoms: amplitudes.len() - 1, amplitudes };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > Self::NORM_TOLERANCE {
            return Err(Error::InvalidParams(format!("state is not normalized: sum |c|^2 = {norm}")));
        }
        Ok(state)
    }

    /// Normalizes arbitrary amplitudes.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidParams("cannot normalize the zero vector".into()));
        }
        Self::new(amplitudes.into_iter().map(|c| c / norm).collect())
    }

    pub fn fock(n_atoms: usize, n_left: usize) -> Result<Self> {
        if n_left > n_atoms {
            return Err(Error::InvalidParams(format!("n_L = {n_left} exceeds N = {n_atoms}")));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n_atoms + 1];
        amplitudes[n_left] = Complex64::new(1.0, 0.0);
        Self::new(amplitudes)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    /// Relabels `n_L → N − n_L` (swaps the wells).
    pub fn mirrored(&self) -> Self {
        let mut amplitudes = self.amplitudes.clone();
        amplitudes.reverse();
        StateVector { n_atoms: self.n_atoms, amplitudes }
    }
}

/// `|0, N⟩`: every atom in the right well.
pub fn initial_state_all_right(n_atoms: usize) -> Result<StateVector> {
    if n_atoms < 1 {
        return Err(Error::InvalidParams("n_atoms must be at least 1".into()));
    }
    StateVector::fock(n_atoms, 0)
}

/// Conversions between nK·k_B energies and millisecond times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalUnits;

impl PhysicalUnits {
    /// ħ/k_B in nK·ms.
    pub const HBAR_OVER_KB: f64 = 7.63824;

    /// Period 2πħ/E in ms for an energy in nK·k_B.
    pub fn period_ms(energy_nk: f64) -> f64 {
        2.0 * std::f64::consts::PI * Self::HBAR_OVER_KB / energy_nk
    }

    /// Energy in nK·k_B whose period 2πħ/E is `period_ms`.
    pub fn energy_from_period_ms(period_ms: f64) -> f64 {
        2.0 * std::f64::consts::PI * Self::HBAR_OVER_KB / period_ms
    }

    /// Converts a time measured in ħ/(1 nK·k_B) to ms.
    pub fn natural_time_to_ms(t: f64) -> f64 {
        t * Self::HBAR_OVER_KB
    }

    pub fn ms_to_natural_time(t_ms: f64) -> f64 {
        t_ms / Self::HBAR_OVER_KB
    }
}

impl EnergyUnit {
    /// Factor turning a time in ħ/(energy unit) into the reporting time unit.
    pub fn time_scale(self) -> f64 {
        match self {
            EnergyUnit::Natural => 1.0,
            EnergyUnit::NanoKelvin => PhysicalUnits::HBAR_OVER_KB,
        }
    }

    pub fn time_label(self) -> &'static str {
        match self {
            EnergyUnit::Natural => "hbar/E",
            EnergyUnit::NanoKelvin => "ms",
        }
    }
}
