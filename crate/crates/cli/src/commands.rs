//! Experiment runners. Each returns its output files in memory so nothing is
//! written unless the whole run succeeds.

use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use kpb_core::grid::{Grid2D, DEFAULT_DEALIAS_FRACTION};
use kpb_core::illposed::{phi_n_on_grid, scaling_study_with_chi, RESYNC};
use kpb_core::initial::{gaussian, modes};
use kpb_core::norms::{bourgain_norm, equivalence_gap, sobolev_norm, spacetime_norm, DEFAULT_TAPER_FRACTION, MIN_TIME_STEPS};
use kpb_core::report::{fmt_f64, history_csv, ratio_csv, scaling_csv};
use kpb_core::solver::{l2_history, solve_etd, solve_picard, Trajectory, PHI_SERIES_RADIUS};
use kpb_core::verify::{
    bilinear_delta, bilinear_suite, free_suite, smoothing_suite, RatioReport, Resolution, BILINEAR_STEPS, BILINEAR_T,
    DEFAULT_FREE_STEPS, SMOOTHING_SAMPLES, SUITE_KMAX,
};
use kpb_core::{Error, SpectralField};

use crate::config::{
    ExperimentConfig, IllposedConfig, Integrator, NormsConfig, PhiSpec, ResolutionChoice, SolveConfig, VerifyConfig,
};

#[derive(Debug)]
pub enum RunError {
    /// Bad values or inputs; exit code 2.
    Config(String),
    /// Non-convergence or another numerical breakdown; exit code 3.
    Numerical(String),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::Degenerate(_) | Error::EstimateViolation { .. } => RunError::Numerical(e.to_string()),
            _ => RunError::Config(e.to_string()),
        }
    }
}

/// Files to write plus the run-specific part of the manifest.
pub struct RunOutput {
    pub files: Vec<(String, String)>,
    pub tolerances: Value,
    pub results: Value,
}

pub fn run(config: &ExperimentConfig, config_dir: &Path) -> Result<RunOutput, RunError> {
    match config {
        ExperimentConfig::Solve(c) => solve(c),
        ExperimentConfig::Illposed(c) => illposed(c),
        ExperimentConfig::Verify(c) => verify(c),
        ExperimentConfig::Norms(c) => norms(c, config_dir),
    }
}

/// Window and grid parameters shared by every command.
pub fn window_parameters() -> Value {
    json!({
        "taper_fraction": DEFAULT_TAPER_FRACTION,
        "min_time_steps": MIN_TIME_STEPS,
        "dealias_fraction": DEFAULT_DEALIAS_FRACTION,
    })
}

/// Serialized trajectory: interleaved `[re, im]` spectral coefficients per
/// state, row-major in `(kx, ky)`.
#[derive(Serialize, Deserialize)]
pub struct TrajectoryFile {
    pub nx: usize,
    pub ny: usize,
    #[serde(rename = "Lx")]
    pub lx: f64,
    #[serde(rename = "Ly")]
    pub ly: f64,
    pub dealias_fraction: f64,
    pub t0: f64,
    pub dt: f64,
    pub states: Vec<Vec<f64>>,
}

impl TrajectoryFile {
    pub fn from_trajectory(traj: &Trajectory) -> Self {
        let g = traj.grid();
        Self {
            nx: g.nx(),
            ny: g.ny(),
            lx: g.lx(),
            ly: g.ly(),
            dealias_fraction: g.dealias_fraction(),
            t0: traj.t0(),
            dt: traj.dt(),
            states: traj
                .states()
                .iter()
                .map(|s| s.coeffs().iter().flat_map(|c| [c.re, c.im]).collect())
                .collect(),
        }
    }

    pub fn into_trajectory(self) -> Result<Trajectory, Error> {
        let grid = Grid2D::with_dealias_fraction(self.nx, self.ny, self.lx, self.ly, self.dealias_fraction)?;
        let states = self
            .states
            .into_iter()
            .map(|v| {
                if v.len() != 2 * grid.len() {
                    return Err(Error::ShapeMismatch { expected: 2 * grid.len(), got: v.len() });
                }
                let coeffs = v.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
                SpectralField::from_coeffs(&grid, coeffs)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Trajectory::new(self.t0, self.dt, states)
    }
}

fn initial_data(c: &SolveConfig, grid: &Grid2D) -> Result<SpectralField, Error> {
    match &c.phi_spec {
        PhiSpec::PhiN { n, s } => phi_n_on_grid(*n, *s, grid),
        PhiSpec::Gaussian { amplitude, widths } => gaussian(grid, *amplitude, widths[0], widths[1]),
        PhiSpec::Modes { modes: entries } => {
            let list: Vec<(i64, i64, Complex64)> = entries
                .iter()
                .map(|m| (m.k[0], m.k[1], Complex64::new(m.value[0], m.value[1])))
                .collect();
            modes(grid, &list)
        }
    }
}

fn solve(c: &SolveConfig) -> Result<RunOutput, RunError> {
    let grid = Grid2D::new(c.nx, c.ny, c.lx, c.ly)?;
    let phi = initial_data(c, &grid)?;
    let (traj, solver_results) = match c.integrator {
        Integrator::Picard => {
            let (traj, report) = solve_picard(&phi, c.t, c.m, c.tol, c.max_iter)?;
            if !report.converged {
                return Err(RunError::Numerical(format!(
                    "Picard iteration did not reach tol = {:e} in {} iterations (last residual {:e})",
                    c.tol,
                    c.max_iter,
                    report.residual_history.last().copied().unwrap_or(f64::NAN)
                )));
            }
            let results = json!({
                "iterations": report.iterations,
                "residual_history": report.residual_history,
                "converged": report.converged,
            });
            (traj, results)
        }
        Integrator::Etd => (solve_etd(&phi, c.t, c.m)?, json!({})),
    };
    let history = l2_history(&traj);
    let trajectory = serde_json::to_string(&TrajectoryFile::from_trajectory(&traj)).expect("trajectory serializes");
    Ok(RunOutput {
        files: vec![
            ("trajectory.json".into(), trajectory),
            ("history.csv".into(), history_csv(&traj.times(), &history)),
        ],
        tolerances: json!({
            "picard_tol": c.tol,
            "max_iter": c.max_iter,
            "phi_series_radius": PHI_SERIES_RADIUS,
        }),
        results: json!({
            "solver": solver_results,
            "l2_initial": fmt_f64(history[0]),
            "l2_final": fmt_f64(*history.last().expect("at least one state")),
        }),
    })
}

fn illposed(c: &IllposedConfig) -> Result<RunOutput, RunError> {
    let study = scaling_study_with_chi(&c.n_list, c.s, c.eps0, c.cells, c.samples, c.seed)?;
    let measures: Vec<Value> = study
        .rows
        .iter()
        .map(|r| json!({ "N": r.n, "interaction_measure_over_N3": fmt_f64(r.interaction_measure) }))
        .collect();
    Ok(RunOutput {
        files: vec![("scaling.csv".into(), scaling_csv(&study))],
        tolerances: json!({
            "quadrature_cells": c.cells,
            "chi_samples": c.samples,
            "chi_seed": c.seed,
            "phase_resync_interval": RESYNC,
        }),
        results: json!({
            "slope": fmt_f64(study.slope),
            "predicted_slope": fmt_f64(study.predicted_slope()),
            "interaction_measures": measures,
        }),
    })
}

fn resolutions(choice: ResolutionChoice) -> Vec<Resolution> {
    match choice {
        ResolutionChoice::Base => vec![Resolution::Base],
        ResolutionChoice::Refined => vec![Resolution::Refined],
        ResolutionChoice::Both => vec![Resolution::Base, Resolution::Refined],
    }
}

fn resolution_name(r: Resolution) -> &'static str {
    match r {
        Resolution::Base => "base",
        Resolution::Refined => "refined",
    }
}

fn summary(r: &RatioReport) -> Value {
    let p = &r.params;
    json!({
        "b": p.b, "s1": p.s1, "s2": p.s2, "delta": p.delta, "eps": p.eps, "xi": p.xi,
        "samples": r.samples,
        "max_ratio": fmt_f64(r.max_ratio),
        "median_ratio": fmt_f64(r.median_ratio),
        "violations": r.violations,
    })
}

fn verify(c: &VerifyConfig) -> Result<RunOutput, RunError> {
    let p = &c.params;
    let size = c.suite_size;
    let seed = c.seed;
    type Job = Box<dyn Fn(Resolution) -> kpb_core::Result<RatioReport> + Send + Sync>;
    let mut jobs: Vec<Job> = Vec::new();
    let suite_tolerances = match c.estimate_id.as_str() {
        "free" => {
            for &b in &p.b {
                for &s1 in &p.s1 {
                    for &s2 in &p.s2 {
                        jobs.push(Box::new(move |r| free_suite(size, seed, b, s1, s2, r)));
                    }
                }
            }
            json!({ "time_steps": DEFAULT_FREE_STEPS, "grid": [16, 16], "kmax": SUITE_KMAX })
        }
        "smoothing" => {
            for &xi in &p.xi {
                for &delta in &p.delta {
                    jobs.push(Box::new(move |r| smoothing_suite(size, seed, xi, delta, r)));
                }
            }
            json!({ "time_samples": SMOOTHING_SAMPLES })
        }
        _ => {
            let t = p.t.expect("validated");
            for &s1 in &p.s1 {
                jobs.push(Box::new(move |r| bilinear_suite(size, seed, s1, t, r)));
            }
            let deltas: Vec<f64> = p.s1.iter().map(|&s| bilinear_delta(s)).collect();
            json!({
                "grid": [32, 32],
                "kmax": SUITE_KMAX,
                "time_steps_per_window": BILINEAR_STEPS as f64 * t / BILINEAR_T,
                "delta": deltas,
                "eps_over_delta": 0.1,
            })
        }
    };

    let mut files = Vec::new();
    let mut per_resolution = serde_json::Map::new();
    let mut reports_by_res = Vec::new();
    for res in resolutions(p.resolution) {
        let reports = jobs.par_iter().map(|job| job(res)).collect::<Result<Vec<_>, _>>()?;
        let name = match res {
            Resolution::Base => "ratios.csv",
            Resolution::Refined => "ratios_refined.csv",
        };
        files.push((name.to_string(), ratio_csv(&reports)));
        per_resolution.insert(resolution_name(res).into(), reports.iter().map(summary).collect());
        reports_by_res.push(reports);
    }
    let mut results = json!({ "suites": per_resolution });
    if let [base, fine] = reports_by_res.as_slice() {
        let factors: Vec<String> = base.iter().zip(fine).map(|(a, b)| fmt_f64(b.max_ratio / a.max_ratio)).collect();
        results["refinement_factors"] = json!(factors);
    }
    Ok(RunOutput {
        files,
        tolerances: json!({ "suite": suite_tolerances, "seed": seed, "suite_size": size }),
        results,
    })
}

fn norms(c: &NormsConfig, config_dir: &Path) -> Result<RunOutput, RunError> {
    let path = if c.input_path.is_absolute() { c.input_path.clone() } else { config_dir.join(&c.input_path) };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| RunError::Config(format!("invalid `input_path`: cannot read {}: {e}", path.display())))?;
    let file: TrajectoryFile = serde_json::from_str(&text).map_err(|e| {
        RunError::Config(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column()))
    })?;
    let traj = file.into_trajectory()?;
    let x = bourgain_norm(&traj, c.b, c.s1, c.s2)?;
    let st = spacetime_norm(&traj, c.b, c.s1, c.s2)?;
    let gap = equivalence_gap(&traj, c.b, c.s1, c.s2)?;
    let mut summary = String::from("b,s1,s2,bourgain_norm,spacetime_norm,equivalence_ratio\n");
    summary.push_str(&format!(
        "{},{},{},{},{},{}\n",
        fmt_f64(c.b),
        fmt_f64(c.s1),
        fmt_f64(c.s2),
        fmt_f64(x),
        fmt_f64(st),
        fmt_f64(gap)
    ));
    let mut sobolev = String::from("t,sobolev_norm\n");
    for (t, s) in traj.times().iter().zip(traj.states()) {
        sobolev.push_str(&format!("{},{}\n", fmt_f64(*t), fmt_f64(sobolev_norm(s, c.s1, c.s2))));
    }
    Ok(RunOutput {
        files: vec![("norms.csv".into(), summary), ("sobolev.csv".into(), sobolev)],
        tolerances: json!({}),
        results: json!({
            "bourgain_norm": fmt_f64(x),
            "spacetime_norm": fmt_f64(st),
            "equivalence_ratio": fmt_f64(gap),
            "time_samples": traj.steps() + 1,
        }),
    })
}
