//! Single-run orchestration: co-integrates the flow and the reference
//! potential on one grid, streams energy reports, and records the outcome.

use super::config::RunConfig;
use crate::diagnostics::{
    build_window, ApproxDecaySample, EnergyReport, ZIntegralAccumulator,
};
use crate::error::{Error, Result};
use crate::mesh::build_grid;
use crate::potential::{self, PotentialState};
use crate::solver::{self, FlowState};
use crate::transform::{perturbation_support, to_twz};
use serde::Serialize;
use std::collections::VecDeque;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

/// Exact column order of series.csv.
pub const SERIES_COLUMNS: [&str; 19] = [
    "t",
    "E0",
    "E1",
    "E2",
    "Q1",
    "Q2",
    "Q1m",
    "Q2m",
    "Etilde0",
    "Etilde1",
    "Zint",
    "sup_theta_minus",
    "sup_theta_plus",
    "sup_w_minus",
    "sup_w_plus",
    "z_support_radius",
    "hardy_ratio",
    "max_grad_U",
    "max_grad_rho",
];

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ExitStatus {
    Completed { t_end: f64 },
    Blowup { t_star: f64 },
    Aborted { reason: String, t_last: f64 },
}

impl ExitStatus {
    pub fn exit_code(&self) -> i32 {
        match self {
            ExitStatus::Aborted { .. } => 3,
            _ => 0,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub version: String,
    pub status: ExitStatus,
    pub initial_max_grad: f64,
    pub final_max_grad: f64,
    pub peak_max_grad: f64,
    pub steps: usize,
    pub elapsed_s: f64,
    pub final_energy: EnergyReport,
    pub config: RunConfig,
}

/// In-memory artifacts of a run, mirrored on disk when an output directory
/// is given.
#[derive(Debug)]
pub struct RunArtifacts {
    pub status: ExitStatus,
    pub reports: Vec<EnergyReport>,
    pub approx: Vec<ApproxDecaySample>,
    pub initial_max_grad: f64,
    pub final_max_grad: f64,
    pub peak_max_grad: f64,
    pub steps: usize,
    pub out_dir: Option<PathBuf>,
}

pub struct RunOptions {
    /// Compute the energy-report series (diagnostics windows).
    pub diagnostics: bool,
    /// Write field snapshots at the configured stride.
    pub snapshots: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            diagnostics: true,
            snapshots: true,
        }
    }
}

fn format_row(values: &[f64]) -> Vec<String> {
    values.iter().map(|v| v.to_string()).collect()
}

fn write_flow_snapshot(dir: &Path, state: &FlowState) -> Result<()> {
    let path = dir.join(format!("flow_t{:09.3}.csv", state.t));
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["r", "rho", "U", "S"])?;
    for j in 0..state.grid.n {
        w.write_record(format_row(&[
            state.grid.r()[j],
            state.rho[j],
            state.u[j],
            state.s[j],
        ]))?;
    }
    w.flush()?;
    Ok(())
}

fn write_potential_snapshot(dir: &Path, state: &PotentialState) -> Result<()> {
    let rho_a = potential::bernoulli_density(state)?;
    let path = dir.join(format!("potential_t{:09.3}.csv", state.t));
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["r", "phi", "v", "rho_a"])?;
    for j in 0..state.grid.n {
        w.write_record(format_row(&[
            state.grid.r()[j],
            state.phi[j],
            state.v[j],
            rho_a[j],
        ]))?;
    }
    w.flush()?;
    Ok(())
}

/// Runs one configuration; emits series.csv, approx.csv, snapshots/ and
/// report.json under `out_dir` when given.
pub fn cmd_run(
    config: &RunConfig,
    out_dir: Option<&Path>,
    options: &RunOptions,
) -> Result<RunArtifacts> {
    config.validate()?;
    let started = Instant::now();
    let model = config.model()?;
    let grid = Arc::new(build_grid(config.grid.r_max, config.grid.n)?);
    let profiles = config.profiles();
    let m = profiles.support_radius;
    let cfl = config.run.cfl;
    let dt_obs = config.run.dt_obs;
    let t_max = config.run.t_max;

    let mut flow = solver::init_state(&profiles, grid.clone(), model)?;
    let mut pot = potential::init_potential(&profiles, grid.clone(), model)?;
    let z0 = to_twz(&flow)?.z;

    let (_, m0) = solver::detect_blowup(&flow, f64::INFINITY);
    let initial_grad = m0.max_grad();
    let threshold =
        solver::gradient_threshold(initial_grad, config.run.gradient_threshold_mult);

    let (mut series, mut approx_writer, snap_dir) = match out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let mut series = csv::Writer::from_path(dir.join("series.csv"))?;
            series.write_record(SERIES_COLUMNS)?;
            let mut approx = csv::Writer::from_path(dir.join("approx.csv"))?;
            approx.write_record([
                "t",
                "sup_wa_plus",
                "sup_w_plus",
                "sup_grad_theta_a_int",
                "sup_z_phidot_plus",
                "sup_d_phidot_plus",
            ])?;
            let snap = dir.join("snapshots");
            std::fs::create_dir_all(&snap)?;
            (Some(series), Some(approx), Some(snap))
        }
        None => (None, None, None),
    };

    let mut reports: Vec<EnergyReport> = Vec::new();
    let mut approx_rows: Vec<ApproxDecaySample> = Vec::new();
    let mut buffer: VecDeque<(FlowState, PotentialState)> = VecDeque::with_capacity(3);
    let mut z_acc = ZIntegralAccumulator::new();
    let mut peak = initial_grad;
    let mut final_grad = initial_grad;
    let mut steps = 0usize;
    let mut next_snapshot = 0.0f64;

    let emit_report = |reports: &mut Vec<EnergyReport>,
                           approx_rows: &mut Vec<ApproxDecaySample>,
                           z_acc: &mut ZIntegralAccumulator,
                           buffer: &VecDeque<(FlowState, PotentialState)>,
                           series: &mut Option<csv::Writer<std::fs::File>>,
                           approx_writer: &mut Option<csv::Writer<std::fs::File>>|
     -> Result<()> {
        let window = build_window(
            [&buffer[0].0, &buffer[1].0, &buffer[2].0],
            [&buffer[0].1, &buffer[1].1, &buffer[2].1],
            &z0,
            m,
        )?;
        let z_total = z_acc.push(window.ctx.t, window.z_integrand());
        let report = window.report(z_total)?;
        debug_assert!(report.all_finite());
        if let Some(w) = series.as_mut() {
            w.write_record(format_row(&[
                report.t,
                report.e[0],
                report.e[1],
                report.e[2],
                report.q[0],
                report.q[1],
                report.q_minus[0],
                report.q_minus[1],
                report.etilde[0],
                report.etilde[1],
                report.z_integral,
                report.sup_theta_minus,
                report.sup_theta_plus,
                report.sup_w_minus,
                report.sup_w_plus,
                report.z_support_radius,
                report.hardy_ratio,
                report.max_grad_u,
                report.max_grad_rho,
            ]))?;
            w.flush()?;
        }
        let sample = window.approx_sample();
        if let Some(w) = approx_writer.as_mut() {
            w.write_record(format_row(&[
                sample.t,
                sample.sup_wa_plus,
                sample.sup_w_plus,
                sample.sup_grad_theta_a_int,
                sample.sup_z_phidot_plus,
                sample.sup_d_phidot_plus,
            ]))?;
            w.flush()?;
        }
        reports.push(report);
        approx_rows.push(sample);
        Ok(())
    };

    let mut status: Option<ExitStatus> = None;
    let mut obs_index = 0u64;
    buffer.push_back((flow.clone(), pot.clone()));
    if let Some(dir) = &snap_dir {
        if options.snapshots {
            write_flow_snapshot(dir, &flow)?;
            write_potential_snapshot(dir, &pot)?;
            next_snapshot = config.run.snapshot_stride;
        }
    }

    'outer: while flow.t < t_max - 1e-12 {
        let target = ((obs_index + 1) as f64 * dt_obs).min(t_max);
        while flow.t < target - 1e-12 {
            let dt = solver::cfl_dt(&flow, cfl)?
                .min(potential::cfl_dt(&pot, cfl)?)
                .min(target - flow.t);
            let prev = flow.clone();
            flow = match solver::step(&flow, dt, cfl) {
                Ok(s) => s,
                Err(e @ (Error::StateInvalid { .. } | Error::NonPositiveDensity { .. })) => {
                    status = Some(ExitStatus::Aborted {
                        reason: e.to_string(),
                        t_last: prev.t,
                    });
                    flow = prev;
                    break 'outer;
                }
                Err(e) => return Err(e),
            };
            pot = match potential::step(&pot, dt, cfl) {
                Ok(s) => s,
                Err(e @ (Error::StateInvalid { .. } | Error::EnthalpyOutOfRange { .. })) => {
                    status = Some(ExitStatus::Aborted {
                        reason: e.to_string(),
                        t_last: prev.t,
                    });
                    break 'outer;
                }
                Err(e) => return Err(e),
            };
            steps += 1;
            let (fired, metrics) = solver::detect_blowup(&flow, threshold);
            peak = peak.max(metrics.max_grad());
            final_grad = metrics.max_grad();
            if fired {
                let t_star = solver::refine_blowup_time(&prev, dt, threshold, cfl)?;
                status = Some(ExitStatus::Blowup { t_star });
                break 'outer;
            }
        }
        flow.t = target;
        pot.t = target;
        obs_index += 1;

        // cheap coherence guard: the perturbation must stay causally inside
        // the light cone (generous slack for the scheme's spectral tail)
        let support = perturbation_support(&flow, 1e-6);
        if support > m + flow.t + 2.0 {
            status = Some(ExitStatus::Aborted {
                reason: format!(
                    "perturbation support {support} exceeds causal bound {} at t = {}",
                    m + flow.t + 2.0,
                    flow.t
                ),
                t_last: flow.t,
            });
            break 'outer;
        }

        if options.diagnostics {
            buffer.push_back((flow.clone(), pot.clone()));
            if buffer.len() == 3 {
                emit_report(
                    &mut reports,
                    &mut approx_rows,
                    &mut z_acc,
                    &buffer,
                    &mut series,
                    &mut approx_writer,
                )?;
                buffer.pop_front();
            }
        }
        if options.snapshots && flow.t >= next_snapshot - 1e-9 {
            if let Some(dir) = &snap_dir {
                write_flow_snapshot(dir, &flow)?;
                write_potential_snapshot(dir, &pot)?;
            }
            next_snapshot += config.run.snapshot_stride;
        }
    }

    let status = status.unwrap_or(ExitStatus::Completed { t_end: flow.t });
    let final_energy = reports
        .last()
        .cloned()
        .unwrap_or_else(|| EnergyReport::zero(0.0));
    let report = RunReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        status: status.clone(),
        initial_max_grad: initial_grad,
        final_max_grad: final_grad,
        peak_max_grad: peak,
        steps,
        elapsed_s: started.elapsed().as_secs_f64(),
        final_energy,
        config: config.clone(),
    };
    if let Some(dir) = out_dir {
        let mut f = std::fs::File::create(dir.join("report.json"))?;
        writeln!(f, "{}", serde_json::to_string_pretty(&report)?)?;
    }
    Ok(RunArtifacts {
        status,
        reports,
        approx: approx_rows,
        initial_max_grad: initial_grad,
        final_max_grad: final_grad,
        peak_max_grad: peak,
        steps,
        out_dir: out_dir.map(Path::to_path_buf),
    })
}
