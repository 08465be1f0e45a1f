//! Spectral time evolution and the occupation observables.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{self, classify_regime, Provenance, Regime, RegimeTag};
use crate::error::{Error, Result};
use crate::logscalar::LogScalar;
use crate::model::{build_hamiltonian, initial_state_all_right, ModelParams, StateVector};
use crate::output::{format_number, CsvTable};
use crate::spectrum::{eigendecompose, near_degenerate_pair_at_resonance, ResonanceSearch, SpectralDecomposition};

/// Eigenstates with |⟨φ_j|ψ(0)⟩|² below this do not set sampling frequencies.
pub const OVERLAP_THRESHOLD: f64 = 1e-6;
pub const MIN_SAMPLES_PER_SLOW_PERIOD: usize = 64;
pub const MIN_SAMPLES_PER_FAST_PERIOD: usize = 8;
pub const MAX_SAMPLES: usize = 1 << 20;
/// Cross terms of n̄_L(t) with |a_j a_k N_jk| at or below this are dropped.
const CROSS_TERM_CUTOFF: f64 = 1e-12;
const PHASOR_RESEED: usize = 4096;
/// Splittings below this fraction of max|H| are taken from perturbation theory.
pub const ED_RESOLVABLE_RELATIVE_GAP: f64 = 1e-10;

/// ψ(0) expanded in the eigenbasis, ready to be evaluated at any time.
#[derive(Debug, Clone)]
pub struct Propagator<'a> {
    decomp: &'a SpectralDecomposition,
    coefficients: Vec<Complex64>,
    reference: usize,
}

impl<'a> Propagator<'a> {
    pub fn new(decomp: &'a SpectralDecomposition, psi0: &StateVector) -> Result<Self> {
        if psi0.dim() != decomp.dim() {
            return Err(Error::DimensionMismatch { expected: decomp.dim(), actual: psi0.dim() });
        }
        let coefficients: Vec<Complex64> = decomp
            .eigenvectors()
            .iter()
            .map(|v| v.iter().zip(&psi0.amplitudes).map(|(x, c)| c * x).sum())
            .collect();
        let reference = (0..coefficients.len())
            .max_by(|&i, &j| coefficients[i].norm_sqr().total_cmp(&coefficients[j].norm_sqr()).then(j.cmp(&i)))
            .unwrap_or(0);
        Ok(Propagator { decomp, coefficients, reference })
    }

    /// ⟨φ_j|ψ(0)⟩.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn state_at(&self, t: f64) -> StateVector {
        let n = self.decomp.dim();
        let mut amps = vec![Complex64::new(0.0, 0.0); n];
        for (j, c) in self.coefficients.iter().enumerate() {
            if *c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let phase = self.decomp.energy_difference(j, self.reference) * t;
            let w = c * Complex64::from_polar(1.0, -phase);
            for (a, x) in amps.iter_mut().zip(self.decomp.eigenvector(j)) {
                *a += w * x;
            }
        }
        let global = Complex64::from_polar(1.0, -self.decomp.eigenvalue(self.reference) * t);
        amps.iter_mut().for_each(|a| *a *= global);
        StateVector { n_atoms: n - 1, amplitudes: amps }
    }
}

/// ψ(t) = Σ_j e^{−iE_j t} |φ_j⟩⟨φ_j|ψ(0)⟩.
pub fn evolve(decomp: &SpectralDecomposition, psi0: &StateVector, t: f64) -> Result<StateVector> {
    Ok(Propagator::new(decomp, psi0)?.state_at(t))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observables {
    pub probabilities: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
}

pub fn observables(psi: &StateVector) -> Observables {
    let probabilities = psi.probabilities();
    let mean: f64 = probabilities.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
    let second: f64 = probabilities.iter().enumerate().map(|(n, p)| (n * n) as f64 * p).sum();
    Observables { probabilities, mean, variance: second - mean * mean }
}

/// Sampled occupation statistics along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    /// `probabilities[i][n]` = P_n at `times[i]`.
    pub probabilities: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Columns: time, P_0..P_N, mean, variance.
    pub fn to_table(&self) -> CsvTable {
        let n = self.probabilities.first().map_or(0, Vec::len);
        let mut header = vec!["time".to_string()];
        header.extend((0..n).map(|k| format!("P_{k}")));
        header.push("mean".into());
        header.push("variance".into());
        let mut table = CsvTable::new(header);
        for i in 0..self.len() {
            let mut row = Vec::with_capacity(n + 3);
            row.push(format_number(self.times[i]));
            row.extend(self.probabilities[i].iter().copied().map(format_number));
            row.push(format_number(self.mean[i]));
            row.push(format_number(self.variance[i]));
            table.push(row);
        }
        table
    }

    /// Same series with times multiplied by `scale` (e.g. to milliseconds).
    pub fn rescaled_time(mut self, scale: f64) -> Self {
        self.times.iter_mut().for_each(|t| *t *= scale);
        self
    }
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParams("time grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Evolves `psi0` over `t_grid` (times in ħ/energy unit).
pub fn trajectory_from(decomp: &SpectralDecomposition, psi0: &StateVector, t_grid: &[f64]) -> Result<TimeSeries> {
    check_grid(t_grid)?;
    let prop = Propagator::new(decomp, psi0)?;
    let obs: Vec<Observables> = t_grid.par_iter().map(|&t| observables(&prop.state_at(t))).collect();
    let mut series = TimeSeries {
        times: t_grid.to_vec(),
        probabilities: Vec::with_capacity(obs.len()),
        mean: Vec::with_capacity(obs.len()),
        variance: Vec::with_capacity(obs.len()),
    };
    for o in obs {
        series.mean.push(o.mean);
        series.variance.push(o.variance);
        series.probabilities.push(o.probabilities);
    }
    Ok(series)
}

pub fn trajectory(params: &ModelParams, psi0: &StateVector, t_grid: &[f64]) -> Result<TimeSeries> {
    let decomp = eigendecompose(&build_hamiltonian(params)?)?;
    trajectory_from(&decomp, psi0, t_grid)
}

/// `steps + 1` equally spaced times on [0, t_max].
pub fn uniform_grid(t_max: f64, steps: usize) -> Vec<f64> {
    if steps == 0 {
        return vec![0.0];
    }
    (0..=steps).map(|i| t_max * i as f64 / steps as f64).collect()
}

/// Evaluates n̄_L(t) = Σ_jk a_j a_k N_jk cos(ω_jk t) for a real initial state.
#[derive(Debug, Clone)]
pub struct MeanOccupationSignal {
    constant: f64,
    terms: Vec<(f64, f64)>,
}

impl MeanOccupationSignal {
    pub fn new(decomp: &SpectralDecomposition, overlaps: &[f64]) -> Self {
        let n = decomp.dim();
        let active: Vec<usize> = (0..n).filter(|&j| overlaps[j] != 0.0).collect();
        let number = |j: usize, k: usize| -> f64 {
            let (vj, vk) = (decomp.eigenvector(j), decomp.eigenvector(k));
            (0..n).map(|m| m as f64 * vj[m] * vk[m]).sum()
        };
        let mut constant = 0.0;
        let mut terms = Vec::new();
        for (x, &j) in active.iter().enumerate() {
            constant += overlaps[j] * overlaps[j] * number(j, j);
            for &k in &active[x + 1..] {
                let amp = 2.0 * overlaps[j] * overlaps[k] * number(j, k);
                if amp.abs() > CROSS_TERM_CUTOFF {
                    terms.push((amp, decomp.energy_difference(k, j)));
                }
            }
        }
        MeanOccupationSignal { constant, terms }
    }

    /// |ω| of the cross term with the largest weight.
    pub fn dominant_frequency(&self) -> Option<f64> {
        self.terms.iter().max_by(|a, b| a.0.abs().total_cmp(&b.0.abs())).map(|(_, w)| w.abs())
    }

    pub fn at(&self, t: f64) -> f64 {
        self.constant + self.terms.iter().map(|(a, w)| a * (w * t).cos()).sum::<f64>()
    }

    /// Maximum over `t = i·dt`, `i = 0..samples`, using phasor recurrences.
    pub fn max_on_grid(&self, dt: f64, samples: usize) -> f64 {
        let steps: Vec<Complex64> = self.terms.iter().map(|(_, w)| Complex64::from_polar(1.0, w * dt)).collect();
        let mut phasors = vec![Complex64::new(1.0, 0.0); self.terms.len()];
        let mut best = f64::NEG_INFINITY;
        for i in 0..samples {
            if i % PHASOR_RESEED == 0 {
                let t = i as f64 * dt;
                for (z, (_, w)) in phasors.iter_mut().zip(&self.terms) {
                    *z = Complex64::from_polar(1.0, w * t);
                }
            }
            let value = self.constant + self.terms.iter().zip(&phasors).map(|((a, _), z)| a * z.re).sum::<f64>();
            best = best.max(value);
            for (z, s) in phasors.iter_mut().zip(&steps) {
                *z *= s;
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmplitudeResult {
    pub amplitude: f64,
    /// Angular frequency of the strongest oscillation component.
    pub frequency: Option<f64>,
    pub samples: usize,
    /// Time span covered: one period of the slowest participating Bohr frequency.
    pub span: f64,
    /// The sampling rule asked for more than [`MAX_SAMPLES`] points.
    pub capped: bool,
}

/// Largest n̄_L(t) reached from |0, N⟩.
pub fn tunneling_amplitude(params: &ModelParams) -> Result<AmplitudeResult> {
    let decomp = eigendecompose(&build_hamiltonian(params)?)?;
    tunneling_amplitude_from(&decomp)
}

pub fn tunneling_amplitude_from(decomp: &SpectralDecomposition) -> Result<AmplitudeResult> {
    let n = decomp.dim();
    let overlaps: Vec<f64> = decomp
        .eigenvectors()
        .iter()
        .map(|v| if v[0] * v[0] >= OVERLAP_THRESHOLD { v[0] } else { 0.0 })
        .collect();
    let active: Vec<usize> = (0..n).filter(|&j| overlaps[j] != 0.0).collect();
    let mut w_min = f64::INFINITY;
    let mut w_max = 0.0f64;
    for (x, &j) in active.iter().enumerate() {
        for &k in &active[x + 1..] {
            let w = decomp.energy_difference(k, j).abs();
            if w > 0.0 {
                w_min = w_min.min(w);
                w_max = w_max.max(w);
            }
        }
    }
    if !w_min.is_finite() {
        return Ok(AmplitudeResult { amplitude: 0.0, frequency: None, samples: 0, span: 0.0, capped: false });
    }
    let wanted = (MIN_SAMPLES_PER_FAST_PERIOD as f64 * w_max / w_min).ceil();
    let wanted = if wanted.is_finite() { wanted.max(MIN_SAMPLES_PER_SLOW_PERIOD as f64) } else { f64::INFINITY };
    let capped = wanted > MAX_SAMPLES as f64;
    let samples = if capped { MAX_SAMPLES } else { wanted as usize };
    let span = 2.0 * PI / w_min;
    let signal = MeanOccupationSignal::new(decomp, &overlaps);
    let amplitude = signal.max_on_grid(span / samples as f64, samples + 1);
    Ok(AmplitudeResult { amplitude, frequency: signal.dominant_frequency(), samples, span, capped })
}

/// Which eigenpair sets the tunneling period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PairKind {
    Top,
    Resonant { p: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodEstimate {
    /// Period in the time unit of `params.unit`.
    pub period: LogScalar,
    pub provenance: Provenance,
    pub pair: PairKind,
    pub regime: RegimeTag,
    /// Period from the diagonalized splitting, when available.
    pub diagonalization: Option<LogScalar>,
    /// Period from the perturbative splitting, when the regime admits one.
    pub perturbative: Option<LogScalar>,
    /// False in the intermediate regime, where no closed form applies.
    pub cross_checked: bool,
}

/// Largest atom number for which the period is diagonalized.
pub const ED_MAX_ATOMS: usize = 2000;

/// Resonance order p with ΔV = 2pU exactly, or within one suppression window.
pub fn nearest_resonance(params: &ModelParams) -> Option<usize> {
    let u = params.interaction;
    if u == 0.0 || params.tilt == 0.0 {
        return None;
    }
    let x = params.tilt / (2.0 * u);
    let p = x.round();
    if p < 1.0 || p >= params.n_atoms as f64 {
        return None;
    }
    let p = p as usize;
    let window = analytic::suppression_window(params.n_atoms, p, params.zeta(), u).ok()?;
    let offset = (params.tilt - 2.0 * p as f64 * u).abs();
    let tolerance = window.to_f64_saturating().max(1e-12 * u.abs() * p as f64);
    (offset <= tolerance).then_some(p)
}

/// Tunneling period 2π/ΔE of the top pair, or of the resonant pair when ΔV = 2pU.
pub fn tunneling_period(params: &ModelParams) -> Result<PeriodEstimate> {
    params.validate()?;
    let n = params.n_atoms;
    let scale = params.unit.time_scale();
    let regime = classify_regime(n, params.hopping, params.interaction);
    let resonance = nearest_resonance(params);
    let pair = resonance.map_or(PairKind::Top, |p| PairKind::Resonant { p });
    let to_period = |gap: LogScalar| LogScalar::from_f64(2.0 * PI * scale) / gap;

    let mut diag_gap = None;
    let mut resolvable = false;
    if n <= ED_MAX_ATOMS {
        let h = build_hamiltonian(params)?;
        let decomp = eigendecompose(&h)?;
        let gap = match pair {
            PairKind::Top => Some(crate::spectrum::top_pair_gap(&decomp)),
            PairKind::Resonant { p } => match near_degenerate_pair_at_resonance(&decomp, p)? {
                ResonanceSearch::Found(found) => Some(found.gap),
                ResonanceSearch::NotAtResonance { .. } => None,
            },
        };
        if let Some(g) = gap.filter(|g| !g.is_zero()) {
            resolvable = g.ln_abs() >= (ED_RESOLVABLE_RELATIVE_GAP * h.max_abs()).ln();
            diag_gap = Some(g);
        }
    }

    let p = match pair {
        PairKind::Top => 0,
        PairKind::Resonant { p } => p,
    };
    let perturbative = match regime.regime {
        Regime::Fock if params.tilt == 0.0 || resonance.is_some() => {
            analytic::splitting_resonance(n, p, params.zeta(), params.interaction).ok().map(|g| g.value)
        }
        _ if params.interaction == 0.0 && params.tilt == 0.0 => Some(LogScalar::from_f64(2.0 * params.hopping)),
        _ => None,
    }
    .filter(|g| !g.is_zero());

    let (gap, provenance) = match (diag_gap, perturbative) {
        (Some(g), _) if resolvable => (g, Provenance::Diagonalization),
        (_, Some(g)) => (g, Provenance::Perturbative),
        (Some(g), None) => (g, Provenance::Diagonalization),
        (None, None) => return Err(Error::OutOfDomain("no tunneling splitting available for these parameters".into())),
    };
    Ok(PeriodEstimate {
        period: to_period(gap),
        provenance,
        pair,
        regime,
        diagonalization: diag_gap.map(to_period),
        perturbative: perturbative.map(to_period),
        cross_checked: regime.regime != Regime::Intermediate && perturbative.is_some(),
    })
}

/// Angular frequency of a sampled oscillation from the spacing of its maxima
/// (each maximum refined by a parabola through three samples).
pub fn fitted_frequency(times: &[f64], values: &[f64]) -> Option<f64> {
    let peaks = refined_peaks(times, values);
    if peaks.len() < 2 {
        return None;
    }
    let span = peaks[peaks.len() - 1].0 - peaks[0].0;
    Some(2.0 * PI * (peaks.len() - 1) as f64 / span)
}

/// Interior local maxima `(time, value)` with parabolic refinement.
pub fn refined_peaks(times: &[f64], values: &[f64]) -> Vec<(f64, f64)> {
    let mut peaks = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        let (a, b, c) = (values[i - 1], values[i], values[i + 1]);
        if b > a && b >= c {
            let denom = a - 2.0 * b + c;
            let shift = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
            let dt = 0.5 * (times[i + 1] - times[i - 1]);
            peaks.push((times[i] + shift * dt, b - 0.25 * (a - c) * shift));
        }
    }
    peaks
}

/// First revival of a collapsing oscillation around N/2: after the peak
/// heights fall below half their initial excursion, the time of the highest
/// peak in the next stretch where they exceed it again.
pub fn locate_first_revival(times: &[f64], mean: &[f64], n_atoms: usize) -> Option<f64> {
    let center = 0.5 * n_atoms as f64;
    let peaks = refined_peaks(times, mean);
    let excursion = |v: f64| (v - center) / center;
    let collapse = peaks.iter().position(|&(_, v)| excursion(v) < 0.5)?;
    let start = collapse + peaks[collapse..].iter().position(|&(_, v)| excursion(v) >= 0.5)?;
    let end = peaks[start..].iter().position(|&(_, v)| excursion(v) < 0.5).map_or(peaks.len(), |k| start + k);
    peaks[start..end].iter().max_by(|a, b| a.1.total_cmp(&b.1)).map(|&(t, _)| t)
}

/// Convenience: trajectory from |0, N⟩.
pub fn trajectory_all_right(params: &ModelParams, t_grid: &[f64]) -> Result<TimeSeries> {
    trajectory(params, &initial_state_all_right(params.n_atoms)?, t_grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_time_returns_initial_state() {
        let params = ModelParams::new(6, 0.3, 1.0, 0.2).unwrap();
        let d = eigendecompose(&build_hamiltonian(&params).unwrap()).unwrap();
        let psi0 = StateVector::normalized((0..7).map(|k| Complex64::new(k as f64, 1.0 - k as f64)).collect()).unwrap();
        let psi = evolve(&d, &psi0, 0.0).unwrap();
        for (a, b) in psi.amplitudes.iter().zip(&psi0.amplitudes) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn rabi_two_state() {
        let params = ModelParams::new(1, 0.7, 0.0, 0.0).unwrap();
        let grid = uniform_grid(10.0, 50);
        let ts = trajectory_all_right(&params, &grid).unwrap();
        for (t, p) in grid.iter().zip(&ts.probabilities) {
            assert!((p[0] - (0.7 * t).cos().powi(2)).abs() < 1e-13);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let params = ModelParams::new(3, 0.3, 1.0, 0.0).unwrap();
        let d = eigendecompose(&build_hamiltonian(&params).unwrap()).unwrap();
        let psi = initial_state_all_right(2).unwrap();
        assert!(matches!(evolve(&d, &psi, 1.0), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn observables_of_fock_state_and_binomial() {
        let o = observables(&initial_state_all_right(5).unwrap());
        assert_eq!((o.mean, o.variance), (0.0, 0.0));
        let params = ModelParams::new(2, 1.0, 0.0, 0.0).unwrap();
        let ts = trajectory_all_right(&params, &[0.0, PI / 4.0]).unwrap();
        for (p, want) in ts.probabilities[1].iter().zip([0.25, 0.5, 0.25]) {
            assert!((p - want).abs() < 1e-14);
        }
        assert!((ts.variance[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn non_increasing_grid_rejected() {
        let params = ModelParams::new(2, 1.0, 0.0, 0.0).unwrap();
        assert!(trajectory_all_right(&params, &[0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn noninteracting_amplitude() {
        for tilt in [0.0, 1.0, 2.0, 5.0] {
            let params = ModelParams::new(8, 1.0, 0.0, tilt).unwrap();
            let a = tunneling_amplitude(&params).unwrap();
            let want = analytic::tilted_amplitude_frequency(8, 1.0, tilt).amplitude;
            assert!((a.amplitude - want).abs() <= 0.01 * want, "tilt {tilt}: {} vs {want}", a.amplitude);
            assert!(!a.capped);
        }
    }

    #[test]
    fn frozen_system_has_zero_amplitude() {
        let params = ModelParams::new(4, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(tunneling_amplitude(&params).unwrap().amplitude, 0.0);
    }

    #[test]
    fn period_examples() {
        let p = tunneling_period(&ModelParams::new(1, 0.5, 0.0, 0.0).unwrap()).unwrap();
        assert!((p.period.to_f64().unwrap() - PI / 0.5).abs() < 1e-12);
        let p = tunneling_period(&ModelParams::from_zeta(2, 0.1, 1.0, 0.0).unwrap()).unwrap();
        assert_eq!(p.provenance, Provenance::Diagonalization);
        let want = 2.0 * PI / (1.04f64.sqrt() - 1.0);
        assert!((p.period.to_f64().unwrap() - want).abs() < 1e-10 * want);
        assert!(p.cross_checked);
    }

    #[test]
    fn intermediate_regime_is_not_cross_checked() {
        let p = tunneling_period(&ModelParams::new(4, 1.0, 1.0, 0.0).unwrap()).unwrap();
        assert!(!p.cross_checked);
        assert_eq!(p.provenance, Provenance::Diagonalization);
    }

    #[test]
    fn fitted_frequency_of_sine() {
        let times = uniform_grid(20.0, 2000);
        let values: Vec<f64> = times.iter().map(|t| (1.3 * t).sin().powi(2)).collect();
        let w = fitted_frequency(&times, &values).unwrap();
        assert!((w - 2.6).abs() < 1e-4, "{w}");
    }
}
