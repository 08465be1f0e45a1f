//! Closed-form and perturbative results for the two-mode model.
//!
//! Energies are in whatever unit the caller uses for U and J, with ħ = 1.
//! Quantities that can leave the f64 range (Fock-regime splittings, periods,
//! speed-up ratios) are returned as [`LogScalar`].

use std::f64::consts::PI;
use std::ops::Deref;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::logscalar::{ln_binomial, ln_factorial, LogScalar};
use crate::model::EnergyUnit;

/// How a reported number was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Closed form, exact within the model.
    Exact,
    /// Lowest-order perturbation theory.
    Perturbative,
    /// Stirling expansion of a perturbative result.
    Stirling,
    /// Numerical diagonalization of the Hamiltonian.
    Diagonalization,
}

/// A value with its provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tagged<T> {
    pub value: T,
    pub provenance: Provenance,
}

impl<T> Tagged<T> {
    pub fn new(value: T, provenance: Provenance) -> Self {
        Tagged { value, provenance }
    }
}

impl<T> Deref for Tagged<T> {
    type Target = T;
    fn deref(&self) -> &T {
        &self.value
    }
}

/// Regime thresholds on ζ = J/|U|.
pub const FOCK_ZETA_MAX: f64 = 0.2;
pub const JOSEPHSON_ZETA_OVER_N_MIN: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    Josephson,
    Fock,
    Intermediate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeTag {
    pub regime: Regime,
    pub zeta: f64,
}

/// Fock if ζ ≤ 0.2, Josephson if ζ/N ≥ 5, otherwise intermediate.
pub fn classify_regime(n: usize, j: f64, u: f64) -> RegimeTag {
    let zeta = if u == 0.0 { f64::INFINITY } else { j / u.abs() };
    let regime = if zeta <= FOCK_ZETA_MAX {
        Regime::Fock
    } else if zeta / n as f64 >= JOSEPHSON_ZETA_OVER_N_MIN {
        Regime::Josephson
    } else {
        Regime::Intermediate
    };
    RegimeTag { regime, zeta }
}

/// Probability that all atoms are still in the right well for U = ΔV = 0: cos^{2N}(Jt).
pub fn noninteracting_p0(n: usize, j: f64, t: f64) -> Tagged<f64> {
    Tagged::new((j * t).cos().powi(2 * n as i32), Provenance::Exact)
}

/// Mean left occupation for U = ΔV = 0: N sin²(Jt).
pub fn noninteracting_mean(n: usize, j: f64, t: f64) -> Tagged<f64> {
    Tagged::new(n as f64 * (j * t).sin().powi(2), Provenance::Exact)
}

/// Variance of n_L for U = ΔV = 0: (N/4) sin²(2Jt).
pub fn noninteracting_variance(n: usize, j: f64, t: f64) -> Tagged<f64> {
    Tagged::new(0.25 * n as f64 * (2.0 * j * t).sin().powi(2), Provenance::Exact)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmplitudeFrequency {
    pub amplitude: f64,
    /// Angular frequency; `None` when J = 0 and nothing oscillates.
    pub frequency: Option<f64>,
}

/// Amplitude N/[1 + (ΔV/2J)²] and frequency 2J·sqrt(1 + (ΔV/2J)²) of the
/// noninteracting mean occupation in a tilted well.
pub fn tilted_amplitude_frequency(n: usize, j: f64, tilt: f64) -> Tagged<AmplitudeFrequency> {
    let value = if j == 0.0 {
        AmplitudeFrequency { amplitude: 0.0, frequency: None }
    } else {
        let r = tilt / (2.0 * j);
        let s = 1.0 + r * r;
        AmplitudeFrequency { amplitude: n as f64 / s, frequency: Some(2.0 * j * s.sqrt()) }
    };
    Tagged::new(value, Provenance::Exact)
}

/// Tilt 2J·sqrt(N − 1) above which fewer than one atom tunnels without interactions.
pub fn suppression_threshold_noninteracting(n: usize, j: f64) -> Tagged<f64> {
    Tagged::new(2.0 * j * (n as f64 - 1.0).sqrt(), Provenance::Exact)
}

/// Josephson-regime mean occupation (N/2)[1 − cos(2Jt) cos^{N−1}(Ut)].
pub fn josephson_mean(n: usize, j: f64, u: f64, t: f64) -> Tagged<f64> {
    let envelope = (u * t).cos().powi(n as i32 - 1);
    Tagged::new(0.5 * n as f64 * (1.0 - (2.0 * j * t).cos() * envelope), Provenance::Perturbative)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeTimes {
    /// Time for the envelope cos^{N−1}(Ut) to fall to 1/2; `None` for N = 1.
    pub half_time: Option<f64>,
    /// Revival period π/U.
    pub revival: f64,
}

pub fn half_time_and_revival(n: usize, u: f64) -> Result<Tagged<EnvelopeTimes>> {
    if u == 0.0 {
        return Err(Error::OutOfDomain("envelope times need U != 0".into()));
    }
    let half_time = (n > 1).then(|| 2f64.powf(-1.0 / (n as f64 - 1.0)).acos() / u.abs());
    Ok(Tagged::new(EnvelopeTimes { half_time, revival: PI / u.abs() }, Provenance::Perturbative))
}

fn check_zeta(zeta: f64) -> Result<()> {
    if !(zeta >= 0.0) || !zeta.is_finite() {
        return Err(Error::OutOfDomain(format!("zeta must be finite and nonnegative, got {zeta}")));
    }
    Ok(())
}

/// ΔE = 4|U|(ζ/2)^n · n/(n−1)! · sqrt(binom(N, p)) with n = N − p.
fn ln_splitting(n_atoms: usize, p: usize, zeta: f64, u: f64) -> f64 {
    let m = (n_atoms - p) as f64;
    (4.0 * u.abs()).ln() + m * (zeta / 2.0).ln() + m.ln() - ln_factorial((n_atoms - p - 1) as u64)
        + 0.5 * ln_binomial(n_atoms as u64, p as u64)
}

/// Top-pair splitting in the untilted Fock regime, 4U(ζ/2)^N · N/(N−1)!.
pub fn splitting_symmetric(n: usize, zeta: f64, u: f64) -> Result<Tagged<LogScalar>> {
    splitting_resonance(n, 0, zeta, u)
}

/// Resonance tilt ΔV_p = 2pU.
pub fn resonance_tilt(p: usize, u: f64) -> Tagged<f64> {
    Tagged::new(2.0 * p as f64 * u, Provenance::Exact)
}

/// Splitting of the resonant pair at ΔV = 2pU.
pub fn splitting_resonance(n: usize, p: usize, zeta: f64, u: f64) -> Result<Tagged<LogScalar>> {
    check_zeta(zeta)?;
    if n < 1 || p >= n {
        return Err(Error::OutOfDomain(format!("resonance order p = {p} needs 0 <= p < N = {n}")));
    }
    if u == 0.0 {
        return Err(Error::OutOfDomain("perturbative splittings need U != 0".into()));
    }
    let value = if zeta == 0.0 { LogScalar::ZERO } else { LogScalar::from_ln(ln_splitting(n, p, zeta, u)) };
    Ok(Tagged::new(value, Provenance::Perturbative))
}

/// Tilt tolerance 2ΔE/(N − p) around the resonance (p = 0 gives 2ΔE_N/N).
pub fn suppression_window(n: usize, p: usize, zeta: f64, u: f64) -> Result<Tagged<LogScalar>> {
    let gap = splitting_resonance(n, p, zeta, u)?;
    Ok(Tagged::new(gap.value * (2.0 / (n - p) as f64), Provenance::Perturbative))
}

/// Period 2π/ΔE in the reporting time unit of `unit`.
pub fn period_from_splitting(gap: LogScalar, unit: EnergyUnit) -> LogScalar {
    LogScalar::from_f64(2.0 * PI * unit.time_scale()) / gap
}

/// Tunneling period of the resonant pair, 2πħ/ΔE_N^p.
pub fn resonance_period(n: usize, p: usize, zeta: f64, u: f64, unit: EnergyUnit) -> Result<Tagged<LogScalar>> {
    let gap = splitting_resonance(n, p, zeta, u)?;
    if gap.is_zero() {
        return Err(Error::OutOfDomain("zero splitting has no period".into()));
    }
    Ok(Tagged::new(period_from_splitting(gap.value, unit), Provenance::Perturbative))
}

/// Resonant sloshing (N − p) sin²(ΔE t/2).
pub fn resonance_mean_occupation(n: usize, p: usize, splitting: f64, t: f64) -> Tagged<f64> {
    Tagged::new((n - p) as f64 * (0.5 * splitting * t).sin().powi(2), Provenance::Perturbative)
}

/// ln τ = ln ΔE_N − ln ΔE_N^p; U cancels.
pub fn log_tau_exact(n: usize, p: usize, zeta: f64) -> Result<Tagged<f64>> {
    let sym = splitting_symmetric(n, zeta, 1.0)?;
    let res = splitting_resonance(n, p, zeta, 1.0)?;
    Ok(Tagged::new(sym.ln_abs() - res.ln_abs(), Provenance::Perturbative))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StirlingTau {
    pub ln_tau: f64,
    /// False when p' is not small compared with N (the expansion assumes p' < N).
    pub in_domain: bool,
}

/// Large-N expansion of ln τ in terms of n = N and the NOON size p' = N − p.
pub fn log_tau_stirling(n: usize, p_prime: usize, zeta: f64) -> Result<Tagged<StirlingTau>> {
    check_zeta(zeta)?;
    if p_prime == 0 || p_prime > n || zeta == 0.0 {
        return Err(Error::OutOfDomain(format!("need 0 < p' <= N and zeta > 0 (p' = {p_prime}, N = {n})")));
    }
    let nf = n as f64;
    let q = p_prime as f64;
    let ln_tau = (-nf.ln() + 1.0 + (zeta / 2.0).ln()) * nf
        + (q / (4.0 * nf) + q * q / (12.0 * nf * nf) - 0.5 * nf.ln()) * q
        + (1.5 * q.ln() - 1.5 + 0.5 * 4f64.ln() - zeta.ln()) * q;
    Ok(Tagged::new(StirlingTau { ln_tau, in_domain: p_prime < n }, Provenance::Stirling))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn p0_examples() {
        assert_eq!(*noninteracting_p0(3, 1.0, 0.0), 1.0);
        assert!(noninteracting_p0(3, 1.0, PI / 2.0).abs() < 1e-40);
        assert!((*noninteracting_p0(50, 1.0, 0.1) - 0.1f64.cos().powi(100)).abs() < 1e-15);
        assert!((*noninteracting_p0(50, 1.0, 0.1) - 0.606024).abs() < 1e-6);
    }

    #[test]
    fn tilted_amplitude_examples() {
        let af = tilted_amplitude_frequency(100, 1.0, 0.0);
        assert_eq!((af.amplitude, af.frequency), (100.0, Some(2.0)));
        let af = tilted_amplitude_frequency(100, 1.0, 2.0);
        assert!((af.amplitude - 50.0).abs() < 1e-12);
        assert!((af.frequency.unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        let threshold = *suppression_threshold_noninteracting(100, 1.0);
        assert!((tilted_amplitude_frequency(100, 1.0, threshold).amplitude - 1.0).abs() < 1e-12);
        let frozen = tilted_amplitude_frequency(4, 0.0, 1.0);
        assert_eq!(frozen.amplitude, 0.0);
        assert!(frozen.frequency.is_none());
    }

    #[test]
    fn suppression_threshold_examples() {
        assert_eq!(*suppression_threshold_noninteracting(1, 1.0), 0.0);
        assert_eq!(*suppression_threshold_noninteracting(2, 1.0), 2.0);
        assert!((*suppression_threshold_noninteracting(101, 1.0) - 20.0).abs() < 1e-12);
    }

    #[test]
    fn josephson_mean_limits() {
        assert_eq!(*josephson_mean(10, 1.0, 0.1, 0.0), 0.0);
        for t in [0.1, 0.7, 2.3] {
            assert!((*josephson_mean(10, 1.0, 0.0, t) - *noninteracting_mean(10, 1.0, t)).abs() < 1e-12);
        }
    }

    #[test]
    fn envelope_times() {
        let e = half_time_and_revival(2, 1.0).unwrap();
        assert!((e.half_time.unwrap() - PI / 3.0).abs() < 1e-14);
        let e10 = half_time_and_revival(10, 1.0).unwrap();
        // arccos(2^{-1/9})
        assert!((e10.half_time.unwrap() - 0.387452).abs() < 1e-6);
        assert_eq!(e10.revival, e.revival);
        assert!(half_time_and_revival(1, 1.0).unwrap().half_time.is_none());
        assert!(half_time_and_revival(5, 0.0).is_err());
    }

    #[test]
    fn splitting_examples() {
        assert!(close(splitting_symmetric(1, 0.3, 1.0).unwrap().to_f64().unwrap(), 0.6, 1e-14));
        assert!(close(splitting_symmetric(2, 0.1, 1.0).unwrap().to_f64().unwrap(), 0.02, 1e-14));
        let r = splitting_resonance(2, 1, 0.1, 1.0).unwrap().to_f64().unwrap();
        assert!(close(r, 0.2 * 2f64.sqrt(), 1e-14));
        assert!(splitting_resonance(3, 3, 0.1, 1.0).is_err());
        for n in [1, 5, 50, 200] {
            let a = splitting_symmetric(n, 0.07, 1.3).unwrap();
            let b = splitting_resonance(n, 0, 0.07, 1.3).unwrap();
            assert_eq!(a.value, b.value);
        }
    }

    #[test]
    fn window_examples() {
        // 2 ΔE / (N − p) with ΔE = 0.2√2
        let w = suppression_window(2, 1, 0.1, 1.0).unwrap().to_f64().unwrap();
        assert!(close(w, 0.4 * 2f64.sqrt(), 1e-14));
        let sym = suppression_window(4, 0, 0.1, 1.0).unwrap().to_f64().unwrap();
        assert!(close(sym, 2.0 * splitting_symmetric(4, 0.1, 1.0).unwrap().to_f64().unwrap() / 4.0, 1e-14));
    }

    #[test]
    fn resonance_occupation() {
        assert_eq!(*resonance_mean_occupation(7, 2, 0.3, 0.0), 0.0);
        let t_half = PI / 0.3;
        assert!((*resonance_mean_occupation(7, 2, 0.3, t_half) - 5.0).abs() < 1e-12);
        assert!((*resonance_mean_occupation(7, 2, 0.3, t_half / 2.0) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn tau_examples() {
        assert_eq!(*log_tau_exact(9, 0, 0.1).unwrap(), 0.0);
        let log10_tau = *log_tau_exact(7, 2, 0.1).unwrap() / std::f64::consts::LN_10;
        assert!((log10_tau.abs() - 5.0).abs() <= 1.0, "{log10_tau}");
        let s = log_tau_stirling(400, 10, 0.1).unwrap();
        let e = *log_tau_exact(400, 390, 0.1).unwrap();
        assert!(s.in_domain);
        assert!(((s.ln_tau - e) / e).abs() < 0.02);
        assert!(!log_tau_stirling(10, 10, 0.1).unwrap().in_domain);
    }

    // The last step p = N−2 → N−1 multiplies the splitting by sqrt(2/(N−1))/ζ,
    // so growth in p stops once ζ·sqrt((N−1)/2) exceeds 1.
    #[test]
    fn splitting_growth_boundary() {
        let step = |n: usize, z: f64| {
            let a = splitting_resonance(n, n - 2, z, 1.0).unwrap().ln_abs();
            let b = splitting_resonance(n, n - 1, z, 1.0).unwrap().ln_abs();
            b - a
        };
        for (n, z) in [(101, 0.1f64), (201, 0.05), (25, 0.25)] {
            let expected = (2.0 / (n - 1) as f64).sqrt().ln() - z.ln();
            assert!((step(n, z) - expected).abs() < 1e-9);
        }
        assert!(step(150, 0.1) > 0.0);
        assert!(step(300, 0.1) < 0.0);
    }

    #[test]
    fn regimes() {
        assert_eq!(classify_regime(7, 0.1, 1.0).regime, Regime::Fock);
        assert_eq!(classify_regime(10, 100.0, 1.0).regime, Regime::Josephson);
        assert_eq!(classify_regime(2, 1.0, 1.0).regime, Regime::Intermediate);
        assert_eq!(classify_regime(2, 1.0, 0.0).regime, Regime::Josephson);
    }
}
