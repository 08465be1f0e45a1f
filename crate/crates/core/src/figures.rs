//! Data tables behind each figure reproduction.

use serde::Serialize;

use crate::analytic;
use crate::dynamics::{trajectory_all_right, tunneling_period, uniform_grid};
use crate::error::{Error, Result};
use crate::fixtures::*;
use crate::model::ModelParams;
use crate::output::{format_number, CsvTable};
use crate::scan::{period_vs_n, period_vs_p, tau_vs_n, tilt_sweep, TiltSweepOptions};

/// One CSV file of a figure, with the ranges a plot needs.
#[derive(Debug, Clone)]
pub struct FigureTable {
    pub name: String,
    pub description: String,
    pub table: CsvTable,
    pub axes: serde_json::Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct FigureSummary {
    pub figure: u8,
    pub files: Vec<FileEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub file: String,
    pub description: String,
    pub rows: usize,
    pub axes: serde_json::Value,
}

fn range(xs: &[f64]) -> [f64; 2] {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    [lo, hi]
}

fn density(name: &str, description: &str, params: &ModelParams, t_max: f64, steps: usize) -> Result<FigureTable> {
    let ts = trajectory_all_right(params, &uniform_grid(t_max, steps))?;
    Ok(FigureTable {
        name: name.into(),
        description: description.into(),
        table: ts.to_table(),
        axes: serde_json::json!({
            "time": range(&ts.times),
            "n_left": [0, params.n_atoms],
            "params": params,
        }),
    })
}

fn figure1() -> Result<Vec<FigureTable>> {
    let n = FIG1_N_ATOMS;
    let j = FIG1_HOPPING;
    let params = ModelParams::new(n, j, 0.0, FIG1_TILT)?;
    let dens = density("fig1_density.csv", "P_n(t) for N = 100, U = 0, tilt 2J", &params, FIG1_T_MAX, FIG1_T_STEPS)?;

    let steps = (FIG1_TILT_MAX / FIG1_TILT_STEP).round() as usize;
    let grid: Vec<f64> = (0..=steps).map(|k| k as f64 * FIG1_TILT_STEP).collect();
    let options = TiltSweepOptions { refine: false, max_atoms: n };
    let sweep = tilt_sweep(&params, &grid, options)?;
    let mut amp = CsvTable::new(["tilt", "amplitude", "amplitude_analytic"]);
    let mut freq = CsvTable::new(["tilt", "frequency", "frequency_analytic"]);
    for r in &sweep.records {
        let af = analytic::tilted_amplitude_frequency(n, j, r.tilt);
        amp.push_numbers(&[r.tilt, r.amplitude, af.amplitude]);
        freq.push(vec![
            format_number(r.tilt),
            r.frequency.map(format_number).unwrap_or_default(),
            af.frequency.map(format_number).unwrap_or_default(),
        ]);
    }
    let axes = serde_json::json!({ "tilt": range(&grid), "threshold": *analytic::suppression_threshold_noninteracting(n, j) });
    Ok(vec![
        dens,
        FigureTable {
            name: "fig1_amplitude.csv".into(),
            description: "tunneling amplitude vs tilt, U = 0".into(),
            table: amp,
            axes: axes.clone(),
        },
        FigureTable {
            name: "fig1_frequency.csv".into(),
            description: "oscillation frequency vs tilt, U = 0".into(),
            table: freq,
            axes,
        },
    ])
}

fn figure2() -> Result<Vec<FigureTable>> {
    let n = FIG2_N_ATOMS;
    let u = FIG2_INTERACTION;
    let j = FIG2_ZETA_OVER_N * n as f64 * u;
    let params = ModelParams::new(n, j, u, 0.0)?;
    let dens = density("fig2_density.csv", "P_n(t), Josephson regime", &params, FIG2_T_MAX, FIG2_T_STEPS)?;
    let mut mean = CsvTable::new(["time", "mean", "mean_analytic"]);
    let ts = trajectory_all_right(&params, &uniform_grid(FIG2_T_MAX, FIG2_T_STEPS))?;
    for (t, m) in ts.times.iter().zip(&ts.mean) {
        mean.push_numbers(&[*t, *m, *analytic::josephson_mean(n, j, u, *t)]);
    }
    let env = analytic::half_time_and_revival(n, u)?;
    Ok(vec![
        dens,
        FigureTable {
            name: "fig2_mean.csv".into(),
            description: "mean left occupation, diagonalization vs modulated signal".into(),
            table: mean,
            axes: serde_json::json!({ "time": [0.0, FIG2_T_MAX], "half_time": env.half_time, "revival": env.revival }),
        },
    ])
}

fn figure3() -> Result<Vec<FigureTable>> {
    let u = FIG3_INTERACTION;
    let n = FIG3_DENSITY_N_ATOMS;
    let p = FIG3_RESONANCE_P;
    let mut out = Vec::new();
    for (name, tilt, what) in [
        ("fig3_density_symmetric.csv", 0.0, "P_n(t), N = 7, untilted, one tunneling period"),
        ("fig3_density_resonant.csv", *analytic::resonance_tilt(p, u), "P_n(t), N = 7, tilt 4U, one tunneling period"),
    ] {
        let params = ModelParams::from_zeta(n, FIG3_ZETA, u, tilt)?;
        let period = tunneling_period(&params)?.period.to_f64()?;
        out.push(density(name, what, &params, period, FIG3_T_STEPS)?);
    }

    let scan_params = ModelParams::from_zeta(FIG3_SCAN_N_ATOMS, FIG3_ZETA, u, 0.0)?;
    let steps = (FIG3_SCAN_MAX_OVER_2U / FIG3_SCAN_STEP_OVER_2U).round() as usize;
    let grid: Vec<f64> = (0..=steps).map(|k| 2.0 * u * k as f64 * FIG3_SCAN_STEP_OVER_2U).collect();
    let sweep = tilt_sweep(&scan_params, &grid, TiltSweepOptions::default())?;
    out.push(FigureTable {
        name: "fig3_amplitude.csv".into(),
        description: "tunneling amplitude vs tilt, N = 5, zeta = 0.1, refined near resonances".into(),
        table: sweep.to_table(),
        axes: serde_json::json!({ "tilt": range(&sweep.grid), "params": scan_params }),
    });

    let window = analytic::suppression_window(FIG3_SCAN_N_ATOMS, FIG3_ZOOM_P, FIG3_ZETA, u)?.to_f64()?;
    let center = *analytic::resonance_tilt(FIG3_ZOOM_P, u);
    let zoom: Vec<f64> = (-40..=40).map(|k| center + k as f64 * window / 10.0).collect();
    let zoom_sweep = tilt_sweep(&scan_params, &zoom, TiltSweepOptions { refine: false, ..Default::default() })?;
    out.push(FigureTable {
        name: "fig3_amplitude_zoom.csv".into(),
        description: "amplitude near tilt 4U on a window-resolved grid".into(),
        table: zoom_sweep.to_table(),
        axes: serde_json::json!({ "tilt": range(&zoom), "window": window }),
    });
    Ok(out)
}

fn figure4() -> Result<Vec<FigureTable>> {
    let sweep = tau_vs_n(FIG4_ZETA, &FIG4_P_PRIMES, 1..=FIG4_N_MAX)?;
    Ok(vec![FigureTable {
        name: "fig4_tau.csv".into(),
        description: "ln tau vs N, exact and Stirling, for each NOON size".into(),
        table: sweep.to_table(),
        axes: serde_json::json!({ "n_atoms": [1, FIG4_N_MAX], "p_prime": FIG4_P_PRIMES, "zeta": FIG4_ZETA }),
    }])
}

fn figure5() -> Result<Vec<FigureTable>> {
    let by_n = period_vs_n(FIG5_ZETA, 1..=FIG5_N_MAX, FIG5_INTERACTION, FIG5_UNIT)?;
    let by_p = period_vs_p(FIG5_ZETA, &FIG5_P_CURVES, FIG5_INTERACTION, FIG5_UNIT)?;
    Ok(vec![
        FigureTable {
            name: "fig5_period_vs_n.csv".into(),
            description: "log10 symmetric tunneling period vs N".into(),
            table: by_n.to_table(),
            axes: serde_json::json!({ "n_atoms": [1, FIG5_N_MAX], "zeta": FIG5_ZETA }),
        },
        FigureTable {
            name: "fig5_period_vs_p.csv".into(),
            description: "log10 resonant tunneling period vs p".into(),
            table: by_p.to_table(),
            axes: serde_json::json!({ "n_atoms": FIG5_P_CURVES, "zeta": FIG5_ZETA }),
        },
    ])
}

/// Tables for figure 1..=5.
pub fn figure_tables(figure: u8) -> Result<Vec<FigureTable>> {
    match figure {
        1 => figure1(),
        2 => figure2(),
        3 => figure3(),
        4 => figure4(),
        5 => figure5(),
        other => Err(Error::InvalidParams(format!("no figure {other}; expected 1..=5"))),
    }
}

pub fn summarize(figure: u8, tables: &[FigureTable]) -> FigureSummary {
    FigureSummary {
        figure,
        files: tables
            .iter()
            .map(|t| FileEntry {
                file: t.name.clone(),
                description: t.description.clone(),
                rows: t.table.rows.len(),
                axes: t.axes.clone(),
            })
            .collect(),
    }
}
