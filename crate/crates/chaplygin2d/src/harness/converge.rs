//! Grid-refinement convergence study against the finest run as reference.

use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::mesh::{build_grid, Parity};
use crate::potential::{self, PotentialState};
use crate::solver::{self, FlowState};
use serde::Serialize;
use std::path::Path;
use std::sync::Arc;

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub field: String,
    pub n: usize,
    pub error: f64,
    /// Empirical order against the next finer resolution (NaN for the last).
    pub order: f64,
}

#[derive(Debug, Serialize)]
pub struct ConvergenceTable {
    pub resolutions: Vec<usize>,
    pub t_end: f64,
    pub rows: Vec<ConvergenceRow>,
}

fn integrate(config: &RunConfig, n: usize) -> Result<(FlowState, PotentialState)> {
    let grid = Arc::new(build_grid(config.grid.r_max, n)?);
    let model = config.model()?;
    let profiles = config.profiles();
    let cfl = config.run.cfl;
    let mut flow = solver::init_state(&profiles, grid.clone(), model)?;
    let mut pot = potential::init_potential(&profiles, grid, model)?;
    let t_end = config.run.t_max;
    while flow.t < t_end - 1e-12 {
        let dt = solver::cfl_dt(&flow, cfl)?
            .min(potential::cfl_dt(&pot, cfl)?)
            .min(t_end - flow.t);
        flow = solver::step(&flow, dt, cfl)?;
        pot = potential::step(&pot, dt, cfl)?;
    }
    Ok((flow, pot))
}

/// Restricts a fine-grid field to the cell centers of a coarser grid whose
/// cell count divides it. Odd ratios align exactly; even ratios land halfway
/// between fine centers and use cubic interpolation with parity mirroring at
/// the axis.
fn restrict(fine: &[f64], ratio: usize, n_coarse: usize, parity: Parity) -> Vec<f64> {
    let sign = match parity {
        Parity::Even => 1.0,
        Parity::Odd => -1.0,
    };
    let get = |i: isize| -> f64 {
        if i >= 0 {
            fine[i as usize]
        } else {
            sign * fine[(-1 - i) as usize]
        }
    };
    (0..n_coarse)
        .map(|j| {
            if ratio % 2 == 1 {
                fine[ratio * j + (ratio - 1) / 2]
            } else {
                let k = (ratio * j + ratio / 2 - 1) as isize;
                (-get(k - 1) + 9.0 * get(k) + 9.0 * get(k + 1) - get(k + 2)) / 16.0
            }
        })
        .collect()
}

/// Runs the base configuration at each resolution and tabulates errors and
/// empirical orders per field, finest run as reference.
pub fn cmd_converge(
    base: &RunConfig,
    resolutions: &[usize],
    out_dir: Option<&Path>,
) -> Result<ConvergenceTable> {
    if resolutions.len() < 3 {
        return Err(Error::ResolutionMismatch {
            reason: format!("got {} resolutions", resolutions.len()),
        });
    }
    let mut res = resolutions.to_vec();
    res.sort_unstable();
    for pair in res.windows(2) {
        if pair[1] % pair[0] != 0 || pair[1] == pair[0] {
            return Err(Error::ResolutionMismatch {
                reason: format!("{} does not divide {}", pair[0], pair[1]),
            });
        }
    }
    let mut check = base.clone();
    check.grid.n = res[0];
    check.validate()?;

    let runs: Vec<(FlowState, PotentialState)> = res
        .iter()
        .map(|&n| integrate(base, n))
        .collect::<Result<_>>()?;
    let (ref_flow, ref_pot) = runs.last().unwrap();
    let n_ref = *res.last().unwrap();

    let fields: [(&str, Parity); 5] = [
        ("rho", Parity::Even),
        ("U", Parity::Odd),
        ("S", Parity::Even),
        ("phi", Parity::Even),
        ("v", Parity::Even),
    ];
    let extract = |flow: &FlowState, pot: &PotentialState, name: &str| -> Vec<f64> {
        match name {
            "rho" => flow.rho.clone(),
            "U" => flow.u.clone(),
            "S" => flow.s.clone(),
            "phi" => pot.phi.clone(),
            "v" => pot.v.clone(),
            _ => unreachable!(),
        }
    };

    let mut rows = Vec::new();
    for (name, parity) in fields {
        let reference = extract(ref_flow, ref_pot, name);
        let mut errors = Vec::new();
        for (i, &n) in res[..res.len() - 1].iter().enumerate() {
            let (flow, pot) = &runs[i];
            let coarse = extract(flow, pot, name);
            let restricted = restrict(&reference, n_ref / n, n, parity);
            // skip the outermost cells, where the restriction stencil would
            // need data beyond the grid
            let interior = n.saturating_sub(2);
            let diff: Vec<f64> = coarse[..interior]
                .iter()
                .zip(&restricted[..interior])
                .map(|(a, b)| a - b)
                .collect();
            errors.push(flow.grid.l2_radial_range(&diff, 0..interior));
        }
        for (i, &err) in errors.iter().enumerate() {
            let order = if i + 1 < errors.len() {
                let ratio = res[i + 1] as f64 / res[i] as f64;
                (err / errors[i + 1]).log2() / ratio.log2()
            } else {
                f64::NAN
            };
            rows.push(ConvergenceRow {
                field: name.to_string(),
                n: res[i],
                error: err,
                order,
            });
        }
    }

    let table = ConvergenceTable {
        resolutions: res,
        t_end: base.run.t_max,
        rows,
    };
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        let mut w = csv::Writer::from_path(dir.join("convergence.csv"))?;
        w.write_record(["field", "n", "error", "order"])?;
        for row in &table.rows {
            w.write_record([
                row.field.clone(),
                row.n.to_string(),
                row.error.to_string(),
                row.order.to_string(),
            ])?;
        }
        w.flush()?;
    }
    Ok(table)
}
