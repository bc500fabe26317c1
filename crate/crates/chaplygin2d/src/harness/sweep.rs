//! Lifespan sweeps over amplitude and gas kind.
//!
//! Polytropic points run on an optionally finer grid (gradient blow-up needs
//! resolution to express itself); Chaplygin points run to ten times the
//! longest measured polytropic lifespan, with the domain extended at the base
//! grid spacing so the light cone never reaches the boundary.

use super::config::{GridSection, RunConfig};
use super::run::{cmd_run, ExitStatus, RunOptions};
use crate::eos::GasKind;
use crate::error::{Error, Result};
use serde::Serialize;
use std::path::Path;
use std::time::Instant;

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub eos: String,
    pub epsilon: f64,
    /// completed | blowup | aborted | error
    pub outcome: String,
    /// Lifespan for blow-ups, end time otherwise.
    pub t_star: f64,
    pub t_end: f64,
    pub max_grad_initial: f64,
    pub max_grad_end: f64,
    pub wall_s: f64,
}

#[derive(Debug, Serialize)]
pub struct LifespanFit {
    /// Slope of log T* against log(1/epsilon).
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

#[derive(Debug, Serialize)]
pub struct SweepComparison {
    pub epsilons: Vec<f64>,
    pub polytropic_t_star: Vec<Option<f64>>,
    /// T* strictly increasing as epsilon decreases.
    pub t_star_monotone: bool,
    pub chaplygin_all_completed: bool,
    pub chaplygin_t_max: f64,
    pub lifespan_fit: Option<LifespanFit>,
    pub rows: Vec<SweepRow>,
}

pub struct SweepOptions {
    pub kinds: Vec<GasKind>,
    /// Grid override for the polytropic legs.
    pub poly_grid: Option<GridSection>,
    pub workers: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            kinds: vec![GasKind::Polytropic, GasKind::Chaplygin],
            poly_grid: None,
            workers: 1,
        }
    }
}

fn point_config(base: &RunConfig, kind: GasKind, epsilon: f64) -> RunConfig {
    let mut config = base.clone();
    config.eos.kind = kind;
    config.profile.epsilon = epsilon;
    config
}

fn run_point(config: &RunConfig, dir: &Path) -> SweepRow {
    let started = Instant::now();
    let options = RunOptions {
        diagnostics: false,
        snapshots: false,
    };
    let row = |outcome: String, t_star: f64, t_end: f64, gi: f64, ge: f64| SweepRow {
        eos: config.eos.kind.to_string(),
        epsilon: config.profile.epsilon,
        outcome,
        t_star,
        t_end,
        max_grad_initial: gi,
        max_grad_end: ge,
        wall_s: started.elapsed().as_secs_f64(),
    };
    match cmd_run(config, Some(dir), &options) {
        Ok(artifacts) => match &artifacts.status {
            ExitStatus::Completed { t_end } => row(
                "completed".into(),
                f64::NAN,
                *t_end,
                artifacts.initial_max_grad,
                artifacts.final_max_grad,
            ),
            ExitStatus::Blowup { t_star } => row(
                "blowup".into(),
                *t_star,
                *t_star,
                artifacts.initial_max_grad,
                artifacts.final_max_grad,
            ),
            ExitStatus::Aborted { reason, t_last } => row(
                format!("aborted: {reason}"),
                f64::NAN,
                *t_last,
                artifacts.initial_max_grad,
                artifacts.final_max_grad,
            ),
        },
        Err(e) => row(format!("error: {e}"), f64::NAN, f64::NAN, f64::NAN, f64::NAN),
    }
}

fn point_dir(out_dir: &Path, kind: GasKind, epsilon: f64) -> std::path::PathBuf {
    out_dir.join(format!("{kind}_eps{epsilon:.4}"))
}

/// Runs all (kind, epsilon) points and writes lifespan.csv + comparison.json.
pub fn cmd_sweep(
    base: &RunConfig,
    epsilons: &[f64],
    options: &SweepOptions,
    out_dir: &Path,
) -> Result<SweepComparison> {
    if epsilons.len() < 2 {
        return Err(Error::InsufficientPoints {
            got: epsilons.len(),
        });
    }
    base.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let mut epsilons = epsilons.to_vec();
    epsilons.sort_by(|a, b| b.partial_cmp(a).unwrap());

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;

    // polytropic legs first: their lifespans size the Chaplygin horizon
    let mut rows: Vec<SweepRow> = Vec::new();
    let mut poly_t_star: Vec<Option<f64>> = Vec::new();
    if options.kinds.contains(&GasKind::Polytropic) {
        let configs: Vec<RunConfig> = epsilons
            .iter()
            .map(|&eps| {
                let mut c = point_config(base, GasKind::Polytropic, eps);
                if let Some(g) = &options.poly_grid {
                    c.grid = g.clone();
                }
                c
            })
            .collect();
        let poly_rows: Vec<SweepRow> = pool.install(|| {
            use rayon::prelude::*;
            configs
                .par_iter()
                .map(|c| run_point(c, &point_dir(out_dir, GasKind::Polytropic, c.profile.epsilon)))
                .collect()
        });
        for r in &poly_rows {
            poly_t_star.push((r.outcome == "blowup").then_some(r.t_star));
        }
        rows.extend(poly_rows);
    }

    let max_t_star = poly_t_star
        .iter()
        .flatten()
        .cloned()
        .fold(f64::NAN, f64::max);
    let chap_t_max = if max_t_star.is_finite() {
        (10.0 * max_t_star).max(base.run.t_max)
    } else {
        base.run.t_max
    };

    let mut chap_all_completed = true;
    if options.kinds.contains(&GasKind::Chaplygin) {
        let base_dr = base.grid.r_max / base.grid.n as f64;
        let configs: Vec<RunConfig> = epsilons
            .iter()
            .map(|&eps| {
                let mut c = point_config(base, GasKind::Chaplygin, eps);
                c.run.t_max = chap_t_max;
                let needed = c.profile.support_radius + chap_t_max + 5.0;
                if c.grid.r_max < needed {
                    c.grid.r_max = needed;
                    c.grid.n = (needed / base_dr).ceil() as usize;
                }
                c
            })
            .collect();
        let chap_rows: Vec<SweepRow> = pool.install(|| {
            use rayon::prelude::*;
            configs
                .par_iter()
                .map(|c| run_point(c, &point_dir(out_dir, GasKind::Chaplygin, c.profile.epsilon)))
                .collect()
        });
        chap_all_completed = chap_rows.iter().all(|r| r.outcome == "completed");
        rows.extend(chap_rows);
    }

    // monotone: larger epsilon must blow up sooner
    let fired: Vec<f64> = poly_t_star.iter().flatten().cloned().collect();
    let t_star_monotone = fired.len() == poly_t_star.len()
        && !poly_t_star.is_empty()
        && fired.windows(2).all(|w| w[0] < w[1]);

    let lifespan_fit = if fired.len() >= 2 {
        let pts: Vec<(f64, f64)> = epsilons
            .iter()
            .zip(&poly_t_star)
            .filter_map(|(&eps, t)| t.map(|t| ((1.0 / eps).ln(), t.ln())))
            .collect();
        let n = pts.len() as f64;
        let (sx, sy): (f64, f64) = pts.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
        let (sxx, sxy): (f64, f64) = pts
            .iter()
            .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x * x, b + x * y));
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        Some(LifespanFit {
            slope,
            intercept: (sy - slope * sx) / n,
            points: pts.len(),
        })
    } else {
        None
    };

    let mut writer = csv::Writer::from_path(out_dir.join("lifespan.csv"))?;
    writer.write_record([
        "eos",
        "epsilon",
        "outcome",
        "t_star",
        "t_end",
        "max_grad_initial",
        "max_grad_end",
        "wall_s",
    ])?;
    for r in &rows {
        writer.write_record([
            r.eos.clone(),
            r.epsilon.to_string(),
            r.outcome.clone(),
            r.t_star.to_string(),
            r.t_end.to_string(),
            r.max_grad_initial.to_string(),
            r.max_grad_end.to_string(),
            r.wall_s.to_string(),
        ])?;
    }
    writer.flush()?;

    let comparison = SweepComparison {
        epsilons,
        polytropic_t_star: poly_t_star,
        t_star_monotone,
        chaplygin_all_completed: chap_all_completed,
        chaplygin_t_max: chap_t_max,
        lifespan_fit,
        rows,
    };
    std::fs::write(
        out_dir.join("comparison.json"),
        serde_json::to_string_pretty(&comparison)?,
    )?;
    Ok(comparison)
}
