//! Parameter sweeps and resonance detection.
//!
//! Grid points are independent; they are evaluated with rayon and assembled
//! in grid order, so parallel output is identical to serial output.

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{self, classify_regime, Provenance, Regime};
use crate::dynamics::tunneling_amplitude_from;
use crate::error::{Error, Result};
use crate::logscalar::LogScalar;
use crate::model::{build_hamiltonian, EnergyUnit, ModelParams};
use crate::output::{format_number, CsvTable};
use crate::spectrum::eigendecompose;

/// Default largest N for diagonalization-based amplitude sweeps.
pub const DEFAULT_MAX_SWEEP_ATOMS: usize = 12;
/// Refined points per suppression window.
pub const REFINE_POINTS_PER_WINDOW: i32 = 10;
/// Refinement reaches this many windows either side of each resonance.
pub const REFINE_WINDOWS: i32 = 3;
/// Minimum height of a peak above its surroundings.
pub const MIN_PEAK_PROMINENCE: f64 = 0.5;

/// One row of a sweep table.
pub trait SweepRecord {
    fn header() -> Vec<&'static str>;
    fn row(&self) -> Vec<String>;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepMetadata {
    pub kind: String,
    pub params: serde_json::Value,
    pub grid: String,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult<R> {
    pub axis: String,
    /// Distinct axis values, strictly increasing.
    pub grid: Vec<f64>,
    pub records: Vec<R>,
    pub metadata: SweepMetadata,
}

impl<R: SweepRecord> SweepResult<R> {
    pub fn to_table(&self) -> CsvTable {
        let mut table = CsvTable::new(R::header());
        for r in &self.records {
            table.push(r.row());
        }
        table
    }

    pub fn metadata_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Sidecar<'a> {
            axis: &'a str,
            points: usize,
            records: usize,
            #[serde(flatten)]
            metadata: &'a SweepMetadata,
        }
        let sidecar =
            Sidecar { axis: &self.axis, points: self.grid.len(), records: self.records.len(), metadata: &self.metadata };
        Ok(serde_json::to_string_pretty(&sidecar)?)
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

fn opt_number(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TiltRecord {
    pub tilt: f64,
    pub amplitude: f64,
    /// Angular frequency of the strongest oscillation component of n̄_L.
    pub frequency: Option<f64>,
    pub samples: usize,
    pub capped: bool,
    pub regime: Regime,
    /// Resonance order p whose suppression window contains this tilt.
    pub resonance: Option<usize>,
    /// Point added by window refinement rather than taken from the base grid.
    pub refined: bool,
}

impl SweepRecord for TiltRecord {
    fn header() -> Vec<&'static str> {
        vec!["tilt", "amplitude", "frequency", "samples", "capped", "regime", "resonance_p", "refined"]
    }

    fn row(&self) -> Vec<String> {
        vec![
            format_number(self.tilt),
            format_number(self.amplitude),
            opt_number(self.frequency),
            self.samples.to_string(),
            self.capped.to_string(),
            format!("{:?}", self.regime).to_lowercase(),
            self.resonance.map(|p| p.to_string()).unwrap_or_default(),
            self.refined.to_string(),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TiltSweepOptions {
    /// Add ×10 points within ±3 suppression windows of every resonance in range.
    pub refine: bool,
    /// Refuse larger systems unless raised explicitly.
    pub max_atoms: usize,
}

impl Default for TiltSweepOptions {
    fn default() -> Self {
        TiltSweepOptions { refine: true, max_atoms: DEFAULT_MAX_SWEEP_ATOMS }
    }
}

fn check_increasing(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParams("sweep grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// Resonance windows (p, ΔV_p, half-width) of `params` inside [lo, hi].
fn resonance_windows(params: &ModelParams, lo: f64, hi: f64) -> Vec<(usize, f64, f64)> {
    let u = params.interaction;
    if u == 0.0 {
        return Vec::new();
    }
    (0..params.n_atoms)
        .filter_map(|p| {
            let center = *analytic::resonance_tilt(p, u);
            let w = analytic::suppression_window(params.n_atoms, p, params.zeta(), u).ok()?.to_f64_saturating();
            (center >= lo && center <= hi && w > 0.0).then_some((p, center, w))
        })
        .collect()
}

/// Amplitude of tunneling from |0, N⟩ at each tilt.
pub fn tilt_sweep(params: &ModelParams, grid: &[f64], options: TiltSweepOptions) -> Result<SweepResult<TiltRecord>> {
    params.validate()?;
    check_increasing(grid)?;
    if params.n_atoms > options.max_atoms {
        return Err(Error::OutOfDomain(format!(
            "amplitude sweeps are limited to N <= {} (got {}); raise max_atoms to override",
            options.max_atoms, params.n_atoms
        )));
    }
    let mut points: Vec<(f64, bool)> = grid.iter().map(|&x| (x, false)).collect();
    let mut windows = Vec::new();
    if let (Some(&lo), Some(&hi)) = (grid.first(), grid.last()) {
        windows = resonance_windows(params, lo, hi);
        if options.refine {
            for &(_, center, w) in &windows {
                let step = w / REFINE_POINTS_PER_WINDOW as f64;
                let reach = REFINE_POINTS_PER_WINDOW * REFINE_WINDOWS;
                for k in -reach..=reach {
                    let x = center + k as f64 * step;
                    if x >= lo && x <= hi {
                        points.push((x, true));
                    }
                }
            }
        }
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    points.dedup_by(|b, a| a.0 == b.0);

    let records: Vec<TiltRecord> = points
        .par_iter()
        .map(|&(tilt, refined)| {
            let p = params.with_tilt(tilt);
            let decomp = eigendecompose(&build_hamiltonian(&p)?)?;
            let amp = tunneling_amplitude_from(&decomp)?;
            let resonance = windows.iter().find(|&&(_, c, w)| (tilt - c).abs() <= w).map(|&(p, _, _)| p);
            Ok(TiltRecord {
                tilt,
                amplitude: amp.amplitude,
                frequency: amp.frequency,
                samples: amp.samples,
                capped: amp.capped,
                regime: classify_regime(p.n_atoms, p.hopping, p.interaction).regime,
                resonance,
                refined,
            })
        })
        .collect::<Result<_>>()?;

    Ok(SweepResult {
        axis: "tilt".into(),
        grid: records.iter().map(|r| r.tilt).collect(),
        records,
        metadata: SweepMetadata {
            kind: "tilt_sweep".into(),
            params: serde_json::to_value(params)?,
            grid: format!("{} base points{}", grid.len(), if options.refine { ", window refinement" } else { "" }),
            provenance: Provenance::Diagonalization,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectedResonance {
    pub p: usize,
    pub tilt: f64,
    pub amplitude: f64,
    /// |ΔV_peak − 2pU|.
    pub offset: f64,
    /// Width of the interval where the amplitude stays above half the peak.
    pub width: f64,
}

/// Local maxima standing at least 0.5 above the surrounding minima, each
/// assigned to the nearest resonance tilt 2pU.
pub fn detect_resonances(sweep: &SweepResult<TiltRecord>, u: f64) -> Vec<DetectedResonance> {
    let x: Vec<f64> = sweep.records.iter().map(|r| r.tilt).collect();
    let y: Vec<f64> = sweep.records.iter().map(|r| r.amplitude).collect();
    let n = y.len();
    let mut found = Vec::new();
    for i in 0..n {
        let left_ok = i == 0 || y[i] > y[i - 1];
        let right_ok = i + 1 == n || y[i] >= y[i + 1];
        if !(left_ok && right_ok) {
            continue;
        }
        if prominence(&y, i) < MIN_PEAK_PROMINENCE {
            continue;
        }
        let p = if u == 0.0 { 0 } else { (x[i] / (2.0 * u)).round().max(0.0) as usize };
        let target = 2.0 * p as f64 * u;
        found.push(DetectedResonance {
            p,
            tilt: x[i],
            amplitude: y[i],
            offset: (x[i] - target).abs(),
            width: half_max_width(&x, &y, i),
        });
    }
    found
}

/// Height above the higher of the two lowest points reached before climbing
/// above the peak on either side (one-sided at the grid edges).
fn prominence(y: &[f64], i: usize) -> f64 {
    let mut left_min = None;
    let mut m = f64::INFINITY;
    for k in (0..i).rev() {
        if y[k] > y[i] {
            break;
        }
        m = m.min(y[k]);
        left_min = Some(m);
    }
    let mut right_min = None;
    let mut m = f64::INFINITY;
    for &v in &y[i + 1..] {
        if v > y[i] {
            break;
        }
        m = m.min(v);
        right_min = Some(m);
    }
    let base = match (left_min, right_min) {
        (Some(a), Some(b)) => a.max(b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => return 0.0,
    };
    y[i] - base
}

fn half_max_width(x: &[f64], y: &[f64], i: usize) -> f64 {
    let half = 0.5 * y[i];
    let mut left = x[i];
    for k in (0..i).rev() {
        if y[k] < half {
            left = x[k] + (half - y[k]) / (y[k + 1] - y[k]) * (x[k + 1] - x[k]);
            break;
        }
        left = x[k];
    }
    let mut right = x[i];
    for k in i + 1..y.len() {
        if y[k] < half {
            right = x[k - 1] + (y[k - 1] - half) / (y[k - 1] - y[k]) * (x[k] - x[k - 1]);
            break;
        }
        right = x[k];
    }
    right - left
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodRecord {
    pub n_atoms: usize,
    pub p: usize,
    pub period: LogScalar,
    pub log10_period: f64,
}

impl SweepRecord for PeriodRecord {
    fn header() -> Vec<&'static str> {
        vec!["n_atoms", "p", "log10_period", "period"]
    }

    fn row(&self) -> Vec<String> {
        let plain = self.period.to_f64().map(format_number).unwrap_or_default();
        vec![self.n_atoms.to_string(), self.p.to_string(), format_number(self.log10_period), plain]
    }
}

fn period_record(n: usize, p: usize, zeta: f64, u: f64, unit: EnergyUnit) -> Result<PeriodRecord> {
    let period = analytic::resonance_period(n, p, zeta, u, unit)?.value;
    Ok(PeriodRecord { n_atoms: n, p, period, log10_period: period.log10_abs() })
}

fn analytic_metadata(kind: &str, params: serde_json::Value, grid: String, provenance: Provenance) -> SweepMetadata {
    SweepMetadata { kind: kind.into(), params, grid, provenance }
}

/// Symmetric tunneling period T_N for every N in `n_range`.
pub fn period_vs_n(
    zeta: f64,
    n_range: std::ops::RangeInclusive<usize>,
    u: f64,
    unit: EnergyUnit,
) -> Result<SweepResult<PeriodRecord>> {
    let ns: Vec<usize> = n_range.clone().filter(|&n| n >= 1).collect();
    let records = ns.par_iter().map(|&n| period_record(n, 0, zeta, u, unit)).collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        axis: "n_atoms".into(),
        grid: ns.iter().map(|&n| n as f64).collect(),
        records,
        metadata: analytic_metadata(
            "period_vs_n",
            serde_json::json!({ "zeta": zeta, "interaction": u, "unit": unit }),
            format!("N = {}..={}", n_range.start(), n_range.end()),
            Provenance::Perturbative,
        ),
    })
}

/// Resonant periods T_N^p for p = 0..N−1 for every N in `n_list`.
pub fn period_vs_p(zeta: f64, n_list: &[usize], u: f64, unit: EnergyUnit) -> Result<SweepResult<PeriodRecord>> {
    let pairs: Vec<(usize, usize)> = n_list.iter().flat_map(|&n| (0..n).map(move |p| (n, p))).collect();
    let records = pairs.par_iter().map(|&(n, p)| period_record(n, p, zeta, u, unit)).collect::<Result<Vec<_>>>()?;
    let max_n = n_list.iter().copied().max().unwrap_or(0);
    Ok(SweepResult {
        axis: "p".into(),
        grid: (0..max_n).map(|p| p as f64).collect(),
        records,
        metadata: analytic_metadata(
            "period_vs_p",
            serde_json::json!({ "zeta": zeta, "interaction": u, "unit": unit, "n_atoms": n_list }),
            format!("p = 0..N-1 for N in {n_list:?}"),
            Provenance::Perturbative,
        ),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauRecord {
    pub p_prime: usize,
    pub n_atoms: usize,
    pub ln_tau_exact: f64,
    pub ln_tau_stirling: f64,
    pub relative_error: f64,
    pub in_domain: bool,
}

impl SweepRecord for TauRecord {
    fn header() -> Vec<&'static str> {
        vec!["p_prime", "n_atoms", "ln_tau_exact", "ln_tau_stirling", "relative_error", "in_domain"]
    }

    fn row(&self) -> Vec<String> {
        vec![
            self.p_prime.to_string(),
            self.n_atoms.to_string(),
            format_number(self.ln_tau_exact),
            format_number(self.ln_tau_stirling),
            format_number(self.relative_error),
            self.in_domain.to_string(),
        ]
    }
}

/// Exact and Stirling ln τ against N for each NOON size p' = N − p.
pub fn tau_vs_n(
    zeta: f64,
    p_primes: &[usize],
    n_range: std::ops::RangeInclusive<usize>,
) -> Result<SweepResult<TauRecord>> {
    let pairs: Vec<(usize, usize)> =
        p_primes.iter().flat_map(|&q| n_range.clone().filter(move |&n| n >= q && q >= 1).map(move |n| (q, n))).collect();
    let records = pairs
        .par_iter()
        .map(|&(q, n)| {
            let exact = *analytic::log_tau_exact(n, n - q, zeta)?;
            let stirling = analytic::log_tau_stirling(n, q, zeta)?;
            Ok(TauRecord {
                p_prime: q,
                n_atoms: n,
                ln_tau_exact: exact,
                ln_tau_stirling: stirling.ln_tau,
                relative_error: if exact == 0.0 { f64::NAN } else { ((stirling.ln_tau - exact) / exact).abs() },
                in_domain: stirling.in_domain,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        axis: "n_atoms".into(),
        grid: n_range.clone().map(|n| n as f64).collect(),
        records,
        metadata: analytic_metadata(
            "tau_vs_n",
            serde_json::json!({ "zeta": zeta, "p_prime": p_primes }),
            format!("N = {}..={}", n_range.start(), n_range.end()),
            Provenance::Stirling,
        ),
    })
}
