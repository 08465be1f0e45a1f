//! Eigendecomposition of the symmetric tridiagonal Hamiltonian.
//!
//! The bulk of the spectrum comes from an implicit-shift QL sweep. In the
//! Fock regime the two states of each macroscopic-superposition pair are split
//! by amounts far below `eps·‖H‖` (1e-20 is routine, 1e-635 at N = 200), which
//! no f64 eigensolver can resolve. Such pairs are re-solved exactly by
//! partitioning: the two Fock sites that carry the pair are kept, every other
//! site is folded into an energy-dependent 2×2 effective Hamiltonian through
//! chain resolvents, and the tunneling coupling is accumulated in log space as
//! a product of pivots. Energies of a refined pair are stored as a shared
//! anchor plus a small offset so that time evolution sees the true splitting.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::logscalar::{LogScalar, Sign};
use crate::model::SymTridiagonal;

/// QL iterations allowed per eigenvalue before giving up.
pub const MAX_QL_ITERATIONS: usize = 60;

/// Adjacent levels closer than this (relative to max |H_ij|) are refined.
pub const REFINE_RELATIVE_GAP: f64 = 1e-7;

/// A near-degenerate pair re-solved by partitioning onto Fock sites `a < b`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PairAnalysis {
    pub sites: (usize, usize),
    /// Energy the effective Hamiltonian was evaluated at.
    pub center: f64,
    /// Effective on-site energy difference h_aa − h_bb.
    pub detuning: f64,
    /// Effective tunneling matrix element h_ab.
    pub coupling: LogScalar,
    /// Splitting at the actual parameters: sqrt(Δ² + 4h²)/(1 + m̄).
    pub gap: LogScalar,
    /// Splitting at exact degeneracy of the effective levels, 2|h|/(1 + m̄).
    pub avoided_crossing_gap: LogScalar,
    /// Mean weight pushed off the two sites, m̄ = −dΣ/dλ.
    pub dressing: f64,
}

#[derive(Debug, Clone)]
struct RefinedPair {
    lower: usize,
    analysis: PairAnalysis,
}

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    matrix: SymTridiagonal,
    anchors: Vec<f64>,
    offsets: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    refined: Vec<RefinedPair>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.anchors.len()
    }

    pub fn matrix(&self) -> &SymTridiagonal {
        &self.matrix
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.anchors.iter().zip(&self.offsets).map(|(a, o)| a + o).collect()
    }

    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.anchors[k] + self.offsets[k]
    }

    /// Eigenvector `k` (column `k` of V), paired with eigenvalue `k`.
    pub fn eigenvector(&self, k: usize) -> &[f64] {
        &self.vectors[k]
    }

    pub fn eigenvectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    /// E_j − E_k without losing the sub-ulp splitting of refined pairs.
    pub fn energy_difference(&self, j: usize, k: usize) -> f64 {
        (self.anchors[j] - self.anchors[k]) + (self.offsets[j] - self.offsets[k])
    }

    /// E_{k+1} − E_k, exact in log space for refined pairs.
    pub fn gap(&self, k: usize) -> LogScalar {
        match self.refined.iter().find(|r| r.lower == k) {
            Some(r) => r.analysis.gap,
            None => LogScalar::from_f64(self.energy_difference(k + 1, k)),
        }
    }

    /// The partitioning analysis behind a refined pair starting at level `k`.
    pub fn refinement(&self, k: usize) -> Option<&PairAnalysis> {
        self.refined.iter().find(|r| r.lower == k).map(|r| &r.analysis)
    }

    pub fn refined_pairs(&self) -> impl Iterator<Item = (usize, &PairAnalysis)> {
        self.refined.iter().map(|r| (r.lower, &r.analysis))
    }

    /// Re-solves the pair living on Fock sites `a`, `b` around eigenvalue index `k`.
    pub fn analyze_pair(&self, a: usize, b: usize, center: f64) -> Option<PairAnalysis> {
        analyze_pair(&self.matrix, a, b, center).map(|(p, _)| p)
    }
}

/// Diagonalizes a symmetric tridiagonal matrix.
///
/// Eigenvalues ascend; eigenvector signs make the largest-magnitude entry
/// positive (lowest index wins a tie).
pub fn eigendecompose(h: &SymTridiagonal) -> Result<SpectralDecomposition> {
    let n = h.dim();
    let mut d = h.diag.clone();
    let mut e = h.off.clone();
    e.push(0.0);
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    implicit_ql(&mut d, &mut e, &mut z, n)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]).then(i.cmp(&j)));
    let anchors: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vectors: Vec<Vec<f64>> = order.iter().map(|&i| z[i * n..(i + 1) * n].to_vec()).collect();
    for v in vectors.iter_mut() {
        fix_sign(v);
    }

    let mut decomp =
        SpectralDecomposition { matrix: h.clone(), anchors, offsets: vec![0.0; n], vectors, refined: Vec::new() };
    refine_near_degenerate_pairs(&mut decomp);
    Ok(decomp)
}

/// Implicit-shift QL on `d` (diagonal) and `e` (`e[i]` couples i, i+1; `e[n-1] = 0`).
/// `z` is column-major; column j accumulates eigenvector j.
fn implicit_ql(d: &mut [f64], e: &mut [f64], z: &mut [f64], n: usize) -> Result<()> {
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > MAX_QL_ITERATIONS {
                return Err(Error::NoConvergence { index: l, iterations: MAX_QL_ITERATIONS });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let (left, right) = z.split_at_mut((i + 1) * n);
                let zi = &mut left[i * n..];
                let zi1 = &mut right[..n];
                for k in 0..n {
                    let f = zi1[k];
                    zi1[k] = s * zi[k] + c * f;
                    zi[k] = c * zi[k] - s * f;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn refine_near_degenerate_pairs(decomp: &mut SpectralDecomposition) {
    let n = decomp.dim();
    if n < 2 || decomp.matrix.off.iter().all(|&o| o == 0.0) {
        return;
    }
    let scale = decomp.matrix.max_abs().max(f64::MIN_POSITIVE);
    let threshold = REFINE_RELATIVE_GAP * scale;
    let floor = 64.0 * f64::EPSILON * scale;
    let mut k = 0;
    while k + 1 < n {
        let gap = decomp.anchors[k + 1] - decomp.anchors[k];
        let isolation = 1e3 * gap.max(floor);
        let isolated_below = k == 0 || decomp.anchors[k] - decomp.anchors[k - 1] > isolation;
        let isolated_above = k + 2 == n || decomp.anchors[k + 2] - decomp.anchors[k + 1] > isolation;
        if gap < threshold && isolated_below && isolated_above && refine_pair(decomp, k) {
            k += 2;
        } else {
            k += 1;
        }
    }
}

fn refine_pair(decomp: &mut SpectralDecomposition, k: usize) -> bool {
    let n = decomp.dim();
    let weights: Vec<f64> = (0..n).map(|i| decomp.vectors[k][i].powi(2) + decomp.vectors[k + 1][i].powi(2)).collect();
    let mut sites: Vec<usize> = (0..n).collect();
    sites.sort_by(|&i, &j| weights[j].total_cmp(&weights[i]).then(i.cmp(&j)));
    let (a, b) = (sites[0].min(sites[1]), sites[0].max(sites[1]));
    if weights[a] + weights[b] < 1.8 {
        return false;
    }
    let center = 0.5 * (decomp.anchors[k] + decomp.anchors[k + 1]);
    let Some((analysis, (lower, upper))) = analyze_pair(&decomp.matrix, a, b, center) else {
        return false;
    };
    let half = 0.5 * analysis.gap.to_f64_saturating();
    decomp.anchors[k] = center;
    decomp.anchors[k + 1] = center;
    decomp.offsets[k] = -half;
    decomp.offsets[k + 1] = half;
    decomp.vectors[k] = lower;
    decomp.vectors[k + 1] = upper;
    decomp.refined.push(RefinedPair { lower: k, analysis });
    true
}

/// Forward pivots t_k of (λ − T) over sites `s..e`.
fn forward_pivots(h: &SymTridiagonal, s: usize, e: usize, lambda: f64) -> Vec<f64> {
    let mut t = Vec::with_capacity(e - s);
    for k in s..e {
        let mut p = lambda - h.diag[k];
        if k > s {
            p -= h.off[k - 1] * h.off[k - 1] / t[k - s - 1];
        }
        t.push(p);
    }
    t
}

/// Backward pivots u_k of (λ − T) over sites `s..e`, indexed from `s`.
fn backward_pivots(h: &SymTridiagonal, s: usize, e: usize, lambda: f64) -> Vec<f64> {
    let len = e - s;
    let mut u = vec![0.0; len];
    for k in (s..e).rev() {
        let mut p = lambda - h.diag[k];
        if k + 1 < e {
            p -= h.off[k] * h.off[k] / u[k + 1 - s];
        }
        u[k - s] = p;
    }
    u
}

/// Column of (λ − T)^{-1} for the chain `s..e` hitting its last site.
fn green_last_column(h: &SymTridiagonal, s: usize, t: &[f64]) -> Vec<f64> {
    let len = t.len();
    let mut x = vec![0.0; len];
    x[len - 1] = 1.0 / t[len - 1];
    for i in (0..len - 1).rev() {
        x[i] = h.off[s + i] * x[i + 1] / t[i];
    }
    x
}

/// Column of (λ − T)^{-1} for the chain `s..e` hitting its first site.
fn green_first_column(h: &SymTridiagonal, s: usize, u: &[f64]) -> Vec<f64> {
    let len = u.len();
    let mut x = vec![0.0; len];
    x[0] = 1.0 / u[0];
    for i in 1..len {
        x[i] = h.off[s + i - 1] * x[i - 1] / u[i];
    }
    x
}

fn norm_sqr(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Partitions H onto sites {a, b} at energy `center`, returning the pair
/// analysis and the (lower, upper) normalized eigenvectors.
fn analyze_pair(h: &SymTridiagonal, a: usize, b: usize, center: f64) -> Option<(PairAnalysis, (Vec<f64>, Vec<f64>))> {
    let n = h.dim();
    if a >= b || b >= n {
        return None;
    }
    // chains: left 0..a, middle a+1..b, right b+1..n
    let left = (a > 0).then(|| forward_pivots(h, 0, a, center));
    let middle = (b > a + 1).then(|| (forward_pivots(h, a + 1, b, center), backward_pivots(h, a + 1, b, center)));
    let right = (b + 1 < n).then(|| backward_pivots(h, b + 1, n, center));

    let pivots_ok = |p: &[f64]| p.iter().all(|x| x.is_finite() && *x != 0.0);
    if left.as_deref().is_some_and(|p| !pivots_ok(p))
        || middle.as_ref().is_some_and(|(f, u)| !pivots_ok(f) || !pivots_ok(u))
        || right.as_deref().is_some_and(|p| !pivots_ok(p))
    {
        return None;
    }

    let sigma_left = left.as_ref().map_or(0.0, |t| h.off[a - 1].powi(2) / t[t.len() - 1]);
    let sigma_right = right.as_ref().map_or(0.0, |u| h.off[b].powi(2) / u[0]);
    let (sigma_mid_a, sigma_mid_b) =
        middle.as_ref().map_or((0.0, 0.0), |(t, u)| (h.off[a].powi(2) / u[0], h.off[b - 1].powi(2) / t[t.len() - 1]));

    let coupling = match &middle {
        None => LogScalar::from_f64(h.off[a]),
        Some((t, _)) => {
            let mut sign = 1i8;
            let mut ln = 0.0;
            let mut zero = false;
            for k in a..b {
                let o = h.off[k];
                if o == 0.0 {
                    zero = true;
                }
                ln += o.abs().ln();
                if o < 0.0 {
                    sign = -sign;
                }
            }
            for p in t {
                ln -= p.abs().ln();
                if *p < 0.0 {
                    sign = -sign;
                }
            }
            if zero {
                LogScalar::ZERO
            } else {
                LogScalar::from_sign_ln(if sign > 0 { Sign::Positive } else { Sign::Negative }, ln)
            }
        }
    };

    // resolvent columns, reused for the derivative weights and the eigenvectors
    let g_left = left.as_ref().map(|t| green_last_column(h, 0, t));
    let g_mid = middle.as_ref().map(|(t, u)| (green_first_column(h, a + 1, u), green_last_column(h, a + 1, t)));
    let g_right = right.as_ref().map(|u| green_first_column(h, b + 1, u));

    let m_a = g_left.as_ref().map_or(0.0, |g| h.off[a - 1].powi(2) * norm_sqr(g))
        + g_mid.as_ref().map_or(0.0, |(gf, _)| h.off[a].powi(2) * norm_sqr(gf));
    let m_b = g_mid.as_ref().map_or(0.0, |(_, gl)| h.off[b - 1].powi(2) * norm_sqr(gl))
        + g_right.as_ref().map_or(0.0, |g| h.off[b].powi(2) * norm_sqr(g));
    let dressing = 0.5 * (m_a + m_b);

    let detuning = (h.diag[a] - h.diag[b]) + ((sigma_left + sigma_mid_a) - (sigma_right + sigma_mid_b));

    let coupling_abs = coupling.abs();
    let half_detuning = LogScalar::from_f64(0.5 * detuning).abs();
    // r = sqrt(Δ²/4 + h²)
    let r = if half_detuning.is_zero() {
        coupling_abs
    } else if coupling_abs.is_zero() {
        half_detuning
    } else {
        let (big, small) =
            if coupling_abs > half_detuning { (coupling_abs, half_detuning) } else { (half_detuning, coupling_abs) };
        let ratio = (small.ln_abs() - big.ln_abs()).exp();
        LogScalar::from_ln(big.ln_abs() + 0.5 * (ratio * ratio).ln_1p())
    };
    let norm = LogScalar::from_f64(2.0 / (1.0 + dressing));
    let gap = r * norm;
    let avoided_crossing_gap = coupling_abs * norm;

    // mixing angle of the upper state: tan 2θ = 2h/Δ
    let two_theta = if half_detuning.is_zero() {
        match coupling.sign() {
            Sign::Zero => 0.0,
            Sign::Positive => std::f64::consts::FRAC_PI_2,
            Sign::Negative => -std::f64::consts::FRAC_PI_2,
        }
    } else {
        let ln_q = coupling_abs.ln_abs() - half_detuning.ln_abs();
        let q = if ln_q > 700.0 { f64::MAX } else { ln_q.exp() };
        let q = match coupling.sign() {
            Sign::Negative => -q,
            _ => q,
        };
        q.atan2(detuning.signum())
    };
    let (sin_t, cos_t) = (0.5 * two_theta).sin_cos();

    let build = |xa: f64, xb: f64| -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[a] = xa;
        v[b] = xb;
        if let Some(g) = &g_left {
            for (i, gi) in g.iter().enumerate() {
                v[i] = gi * h.off[a - 1] * xa;
            }
        }
        if let Some((gf, gl)) = &g_mid {
            for i in 0..gf.len() {
                v[a + 1 + i] = gf[i] * h.off[a] * xa + gl[i] * h.off[b - 1] * xb;
            }
        }
        if let Some(g) = &g_right {
            for (i, gi) in g.iter().enumerate() {
                v[b + 1 + i] = gi * h.off[b] * xb;
            }
        }
        let norm = norm_sqr(&v).sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        v
    };
    let upper = build(cos_t, sin_t);
    let lower = build(-sin_t, cos_t);

    // symmetric orthonormalization of the pair
    let s: f64 = upper.iter().zip(&lower).map(|(x, y)| x * y).sum();
    let (p, m) = (1.0 / (1.0 + s).sqrt(), 1.0 / (1.0 - s).sqrt());
    let (alpha, beta) = (0.5 * (p + m), 0.5 * (p - m));
    let mut new_lower: Vec<f64> = lower.iter().zip(&upper).map(|(l, u)| alpha * l + beta * u).collect();
    let mut new_upper: Vec<f64> = lower.iter().zip(&upper).map(|(l, u)| beta * l + alpha * u).collect();
    fix_sign(&mut new_lower);
    fix_sign(&mut new_upper);

    Some((
        PairAnalysis { sites: (a, b), center, detuning, coupling, gap, avoided_crossing_gap, dressing },
        (new_lower, new_upper),
    ))
}

/// E_N − E_{N−1}: splitting of the two highest levels.
pub fn splitting_top_pair(decomp: &SpectralDecomposition) -> f64 {
    top_pair_gap(decomp).to_f64_saturating()
}

/// Top-pair splitting in log space (resolves gaps below f64 range).
pub fn top_pair_gap(decomp: &SpectralDecomposition) -> LogScalar {
    let n = decomp.dim();
    decomp.gap(n - 2).abs()
}

/// Eigenpair carrying the resonant superposition of `|N−p, p⟩` and `|0, N⟩`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResonantPair {
    /// Eigenvalue indices, ascending.
    pub indices: (usize, usize),
    /// Fock indices n_L of the two branches, `(0, N − p)`.
    pub branches: (usize, usize),
    /// Splitting at the given tilt.
    pub gap: LogScalar,
    /// Splitting at exact tuning of the branch energies; equals `gap` up to
    /// the residual detuning.
    pub resonant_gap: LogScalar,
    pub detuning: f64,
    /// Mean weight of the two eigenvectors on the branch sites.
    pub support: f64,
    /// Largest |w_a − w_b|/(w_a + w_b) over the two eigenvectors.
    pub asymmetry: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub enum ResonanceSearch {
    Found(ResonantPair),
    NotAtResonance { support: f64, asymmetry: f64 },
}

impl ResonanceSearch {
    pub fn found(&self) -> Option<&ResonantPair> {
        match self {
            ResonanceSearch::Found(p) => Some(p),
            ResonanceSearch::NotAtResonance { .. } => None,
        }
    }
}

pub const RESONANCE_MIN_SUPPORT: f64 = 0.9;
pub const RESONANCE_MAX_ASYMMETRY: f64 = 0.05;

/// Locates the quasi-degenerate pair on branches `n_L = 0` and `n_L = N − p`.
pub fn near_degenerate_pair_at_resonance(decomp: &SpectralDecomposition, p: usize) -> Result<ResonanceSearch> {
    let n_atoms = decomp.dim() - 1;
    if p >= n_atoms {
        return Err(Error::OutOfDomain(format!("resonance order p = {p} must be below N = {n_atoms}")));
    }
    let (a, b) = (0, n_atoms - p);
    let weight = |v: &[f64]| v[a] * v[a] + v[b] * v[b];
    let mut ranked: Vec<usize> = (0..decomp.dim()).collect();
    ranked.sort_by(|&i, &j| weight(&decomp.vectors[j]).total_cmp(&weight(&decomp.vectors[i])).then(i.cmp(&j)));
    let (j, k) = (ranked[0].min(ranked[1]), ranked[0].max(ranked[1]));
    let (vj, vk) = (&decomp.vectors[j], &decomp.vectors[k]);
    let support = 0.5 * (weight(vj) + weight(vk));
    let asym = |v: &[f64]| (v[a] * v[a] - v[b] * v[b]).abs() / weight(v);
    let asymmetry = asym(vj).max(asym(vk));
    if support < RESONANCE_MIN_SUPPORT || asymmetry > RESONANCE_MAX_ASYMMETRY {
        return Ok(ResonanceSearch::NotAtResonance { support, asymmetry });
    }

    let gap = if k == j + 1 { decomp.gap(j).abs() } else { LogScalar::from_f64(decomp.energy_difference(k, j)).abs() };
    let center = 0.5 * (decomp.anchors[j] + decomp.anchors[k]);
    let (resonant_gap, detuning) = match analyze_pair(&decomp.matrix, a, b, center) {
        Some((analysis, _)) => (analysis.avoided_crossing_gap, analysis.detuning),
        None => (gap, f64::NAN),
    };
    Ok(ResonanceSearch::Found(ResonantPair {
        indices: (j, k),
        branches: (a, b),
        gap,
        resonant_gap,
        detuning,
        support,
        asymmetry,
    }))
}

/// Effective two-level problem of the branches `n_L = 0` and `n_L = N − p`,
/// evaluated at the mean energy of the eigenstates dominating each branch.
///
/// Its avoided-crossing gap is the minimum splitting of the resonance, and is
/// available even where the branches are detuned by more than the splitting,
/// which happens when the tuning tilt cannot be represented in f64.
pub fn resonant_pair_analysis(decomp: &SpectralDecomposition, p: usize) -> Result<PairAnalysis> {
    let n_atoms = decomp.dim() - 1;
    if p >= n_atoms {
        return Err(Error::OutOfDomain(format!("resonance order p = {p} must be below N = {n_atoms}")));
    }
    let b = n_atoms - p;
    let dominant = |site: usize| {
        (0..decomp.dim())
            .max_by(|&i, &j| decomp.vectors[i][site].abs().total_cmp(&decomp.vectors[j][site].abs()).then(j.cmp(&i)))
            .unwrap_or(0)
    };
    let center = 0.5 * (decomp.eigenvalue(dominant(0)) + decomp.eigenvalue(dominant(b)));
    analyze_pair(&decomp.matrix, 0, b, center)
        .map(|(a, _)| a)
        .ok_or_else(|| Error::OutOfDomain("resonant pair is not isolated from the rest of the spectrum".into()))
}
