//! Method-of-lines integrator for the radially symmetric full Euler system
//! in primitive variables (rho, U, S), with blow-up detection and lifespan
//! measurement.
//!
//! The scheme is the classical 4-stage Runge-Kutta over fourth-order
//! centered differences. It targets the smooth regime only: gradient
//! blow-up is detected and the run stops there; shocks are never integrated
//! through.

use crate::eos::GasModel;
use crate::error::{Error, Result};
use crate::mesh::{Parity, RadialGrid};
use std::sync::Arc;

pub const DEFAULT_CFL: f64 = 0.4;

/// Strength of the sixth-difference dissipation added to every tendency.
/// Grid-scale modes are invisible to centered stencils and get pumped by
/// stationary stratified layers (the confined entropy bump); the filter
/// damps them at rate `sigma/dr` while perturbing smooth fields at O(dr^5),
/// below the O(dr^4) truncation of the scheme.
pub const FILTER_SIGMA: f64 = 0.2;

/// Smooth compactly supported even bump, peak value 1 at x = 0, vanishing
/// identically for |x| >= 1.
pub fn bump(x: f64) -> f64 {
    if x.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - x * x)).exp()
    } else {
        0.0
    }
}

/// d(bump)/dx.
pub fn bump_prime(x: f64) -> f64 {
    if x.abs() < 1.0 {
        let q = 1.0 - x * x;
        bump(x) * (-2.0 * x / (q * q))
    } else {
        0.0
    }
}

/// Peak value of `x * bump(x)` on [0, 1], attained at `x = (sqrt(6) - sqrt(2))/2`.
fn odd_bump_peak() -> f64 {
    let x = (6.0f64.sqrt() - 2.0f64.sqrt()) / 2.0;
    x * bump(x)
}

/// Odd-compatible velocity profile: `x * bump(x)` normalized to peak 1.
/// A radial vector amplitude must vanish at the axis for `U(r) x/r` to be
/// smooth there, so the velocity bump carries an extra factor of x.
pub fn odd_bump(x: f64) -> f64 {
    x * bump(x) / odd_bump_peak()
}

pub fn odd_bump_prime(x: f64) -> f64 {
    (bump(x) + x * bump_prime(x)) / odd_bump_peak()
}

/// Initial perturbation profiles: amplitude, support radius, and per-field
/// scale factors applied to the default bumps.
#[derive(Debug, Clone, Copy)]
pub struct InitialProfiles {
    pub epsilon: f64,
    /// Support radius M: all three profiles vanish identically for r >= M.
    pub support_radius: f64,
    pub rho_scale: f64,
    pub u_scale: f64,
    pub s_scale: f64,
}

impl InitialProfiles {
    pub fn new(epsilon: f64, support_radius: f64) -> Self {
        InitialProfiles {
            epsilon,
            support_radius,
            rho_scale: 1.0,
            u_scale: 1.0,
            s_scale: 1.0,
        }
    }

    pub fn rho0(&self, r: f64) -> f64 {
        self.rho_scale * bump(r / self.support_radius)
    }

    pub fn u0(&self, r: f64) -> f64 {
        self.u_scale * odd_bump(r / self.support_radius)
    }

    pub fn s0(&self, r: f64) -> f64 {
        self.s_scale * bump(r / self.support_radius)
    }
}

/// Radial grid fields (rho, U, S) at one time level; the primary evolving
/// object. U is the radial velocity amplitude, u = U x/r.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub t: f64,
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
    pub s: Vec<f64>,
    pub model: GasModel,
    pub grid: Arc<RadialGrid>,
}

/// Field tendencies returned by [`rhs`].
#[derive(Debug, Clone)]
pub struct FlowTendency {
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
    pub s: Vec<f64>,
}

pub fn init_state(
    profiles: &InitialProfiles,
    grid: Arc<RadialGrid>,
    model: GasModel,
) -> Result<FlowState> {
    let eps = profiles.epsilon;
    let mut rho = Vec::with_capacity(grid.n);
    let mut u = Vec::with_capacity(grid.n);
    let mut s = Vec::with_capacity(grid.n);
    for &r in grid.r() {
        let rho_j = model.rho_bar + eps * profiles.rho0(r);
        if rho_j <= 0.0 {
            return Err(Error::VacuumInit { rho: rho_j, r });
        }
        rho.push(rho_j);
        u.push(eps * profiles.u0(r));
        s.push(model.s_bar + eps * profiles.s0(r));
    }
    Ok(FlowState {
        t: 0.0,
        rho,
        u,
        s,
        model,
        grid,
    })
}

/// Tendencies of the radial Euler system:
///
/// ```text
/// d rho/dt = -U drho/dr - rho (dU/dr + U/r)
/// d U/dt   = -U dU/dr - (dP/drho * drho/dr + dP/dS * dS/dr) / rho
/// d S/dt   = -U dS/dr
/// ```
pub fn rhs(state: &FlowState) -> Result<FlowTendency> {
    rhs_filtered(state, FILTER_SIGMA)
}

/// [`rhs`] with an explicit dissipation strength (0 disables the filter).
pub fn rhs_filtered(state: &FlowState, sigma: f64) -> Result<FlowTendency> {
    let grid = &state.grid;
    let n = grid.n;
    let drho = grid.deriv_r_outflow(&state.rho, Parity::Even);
    let du = grid.deriv_r_outflow(&state.u, Parity::Odd);
    let ds = grid.deriv_r_outflow(&state.s, Parity::Even);
    let mut t_rho = vec![0.0; n];
    let mut t_u = vec![0.0; n];
    let mut t_s = vec![0.0; n];
    let model = &state.model;
    let chaplygin = model.kind == crate::eos::GasKind::Chaplygin;
    let a_bar = model.entropy_coeff_bar();
    let poly_k = if chaplygin {
        0.0
    } else {
        model.rho_bar.powf(1.0 - model.gamma) / model.gamma
    };
    for j in 0..n {
        let (rho, u, s, r) = (state.rho[j], state.u[j], state.s[j], grid.r()[j]);
        if rho <= 0.0 {
            return Err(Error::NonPositiveDensity { rho, r });
        }
        // shared-subexpression pressure slopes; one exp (plus one powf for
        // the polytropic law) per cell
        let exp_s = ((s - model.s_bar) / model.c_v).exp();
        let (dp_drho, dp_ds) = if chaplygin {
            let a = a_bar * exp_s;
            (a / (rho * rho), -a / (model.c_v * rho))
        } else {
            let p_over_k = rho.powf(model.gamma) * exp_s;
            (
                poly_k * model.gamma * p_over_k / rho,
                poly_k * p_over_k / model.c_v,
            )
        };
        t_rho[j] = -u * drho[j] - rho * (du[j] + u / r);
        t_u[j] = -u * du[j] - (dp_drho * drho[j] + dp_ds * ds[j]) / rho;
        t_s[j] = -u * ds[j];
    }
    if sigma > 0.0 {
        // rho and U only: the entropy stays purely advected, so its support
        // cannot creep, and the grid-scale feedback loop (entropy layer ->
        // pressure force -> velocity) is broken by damping the U side.
        let nu = sigma / grid.dr;
        let h_rho = grid.hyperdiff6(&state.rho, Parity::Even);
        let h_u = grid.hyperdiff6(&state.u, Parity::Odd);
        for j in 0..n {
            t_rho[j] += nu * h_rho[j];
            t_u[j] += nu * h_u[j];
        }
    }
    Ok(FlowTendency {
        rho: t_rho,
        u: t_u,
        s: t_s,
    })
}

/// Largest stable time step, `cfl * dr / max_j(|U_j| + c_j)`.
pub fn cfl_dt(state: &FlowState, cfl: f64) -> Result<f64> {
    let model = &state.model;
    let chaplygin = model.kind == crate::eos::GasKind::Chaplygin;
    let a_bar = model.entropy_coeff_bar();
    let poly_kg = if chaplygin {
        0.0
    } else {
        model.rho_bar.powf(1.0 - model.gamma)
    };
    let mut speed = 0.0f64;
    for j in 0..state.grid.n {
        let (rho, s) = (state.rho[j], state.s[j]);
        if rho <= 0.0 {
            return Err(Error::NonPositiveDensity {
                rho,
                r: state.grid.r()[j],
            });
        }
        let exp_s = ((s - model.s_bar) / model.c_v).exp();
        let c2 = if chaplygin {
            a_bar * exp_s / (rho * rho)
        } else {
            poly_kg * rho.powf(model.gamma - 1.0) * exp_s
        };
        speed = speed.max(state.u[j].abs() + c2.sqrt());
    }
    Ok(cfl * state.grid.dr / speed)
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yj, xj) in y.iter_mut().zip(x) {
        *yj += a * xj;
    }
}

fn offset(base: &FlowState, a: f64, k: &FlowTendency, t: f64) -> FlowState {
    let mut s = base.clone();
    s.t = t;
    axpy(&mut s.rho, a, &k.rho);
    axpy(&mut s.u, a, &k.u);
    axpy(&mut s.s, a, &k.s);
    s
}

/// Optional source term for manufactured-solution studies: maps (t, r) to
/// tendencies added to (rho, U, S).
pub type Forcing<'a> = &'a dyn Fn(f64, f64) -> [f64; 3];

fn add_forcing(k: &mut FlowTendency, f: Forcing, t: f64, grid: &RadialGrid) {
    for (j, &r) in grid.r().iter().enumerate() {
        let [fr, fu, fs] = f(t, r);
        k.rho[j] += fr;
        k.u[j] += fu;
        k.s[j] += fs;
    }
}

/// One classical RK4 step. `dt` must respect [`cfl_dt`].
pub fn step(state: &FlowState, dt: f64, cfl: f64) -> Result<FlowState> {
    step_impl(state, dt, cfl, None)
}

/// RK4 step with a manufactured source term.
pub fn step_forced(state: &FlowState, dt: f64, cfl: f64, forcing: Forcing) -> Result<FlowState> {
    step_impl(state, dt, cfl, Some(forcing))
}

fn step_impl(state: &FlowState, dt: f64, cfl: f64, forcing: Option<Forcing>) -> Result<FlowState> {
    let limit = cfl_dt(state, cfl)?;
    if dt > limit * (1.0 + 1e-9) {
        return Err(Error::DtExceedsCfl { dt, limit });
    }
    let grid = state.grid.clone();
    let eval = |s: &FlowState| -> Result<FlowTendency> {
        let mut k = rhs(s)?;
        if let Some(f) = forcing {
            add_forcing(&mut k, f, s.t, &grid);
        }
        Ok(k)
    };
    let t = state.t;
    let k1 = eval(state)?;
    let k2 = eval(&offset(state, 0.5 * dt, &k1, t + 0.5 * dt))?;
    let k3 = eval(&offset(state, 0.5 * dt, &k2, t + 0.5 * dt))?;
    let k4 = eval(&offset(state, dt, &k3, t + dt))?;
    let mut next = state.clone();
    next.t = t + dt;
    for j in 0..grid.n {
        next.rho[j] += dt / 6.0 * (k1.rho[j] + 2.0 * k2.rho[j] + 2.0 * k3.rho[j] + k4.rho[j]);
        next.u[j] += dt / 6.0 * (k1.u[j] + 2.0 * k2.u[j] + 2.0 * k3.u[j] + k4.u[j]);
        next.s[j] += dt / 6.0 * (k1.s[j] + 2.0 * k2.s[j] + 2.0 * k3.s[j] + k4.s[j]);
    }
    validate(&next)?;
    Ok(next)
}

/// Positivity and finiteness check; pressure positivity is part of the
/// evolving-state contract.
pub fn validate(state: &FlowState) -> Result<()> {
    let model = &state.model;
    let chaplygin = model.kind == crate::eos::GasKind::Chaplygin;
    let a_bar = model.entropy_coeff_bar();
    for j in 0..state.grid.n {
        let (rho, s, r) = (state.rho[j], state.s[j], state.grid.r()[j]);
        if !rho.is_finite() || !state.u[j].is_finite() || !s.is_finite() {
            return Err(Error::StateInvalid {
                t: state.t,
                reason: format!("non-finite value at r = {r}"),
            });
        }
        if rho <= 0.0 {
            return Err(Error::StateInvalid {
                t: state.t,
                reason: format!("density {rho} <= 0 at r = {r}"),
            });
        }
        // polytropic pressure is positive whenever rho is; only the
        // Chaplygin law can cross zero
        if chaplygin {
            let p = model.p0 - a_bar * ((s - model.s_bar) / model.c_v).exp() / rho;
            if p <= 0.0 {
                return Err(Error::StateInvalid {
                    t: state.t,
                    reason: format!("pressure {p} <= 0 at r = {r}"),
                });
            }
        }
    }
    Ok(())
}

/// Gradient metrics inspected by the blow-up detector.
#[derive(Debug, Clone, Copy)]
pub struct BlowupMetrics {
    pub max_grad_u: f64,
    pub max_grad_rho: f64,
    pub finite: bool,
    pub positive: bool,
}

impl BlowupMetrics {
    pub fn max_grad(&self) -> f64 {
        self.max_grad_u.max(self.max_grad_rho)
    }
}

/// Returns the blow-up flag together with the gradient metrics. The flag is
/// true iff the largest gradient exceeds `gradient_threshold`, positivity is
/// lost, or non-finite values appear.
pub fn detect_blowup(state: &FlowState, gradient_threshold: f64) -> (bool, BlowupMetrics) {
    let du = state.grid.deriv_r(&state.u, Parity::Odd);
    let drho = state.grid.deriv_r(&state.rho, Parity::Even);
    let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    let metrics = BlowupMetrics {
        max_grad_u: max_abs(&du),
        max_grad_rho: max_abs(&drho),
        finite: state
            .rho
            .iter()
            .chain(&state.u)
            .chain(&state.s)
            .all(|v| v.is_finite()),
        positive: state.rho.iter().all(|&v| v > 0.0),
    };
    let fired = metrics.max_grad() > gradient_threshold || !metrics.finite || !metrics.positive;
    (fired, metrics)
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Completed,
    Blowup { t_star: f64 },
    Aborted { reason: String, t_last: f64 },
}

#[derive(Debug)]
pub struct RunOutcome {
    pub status: RunStatus,
    /// Last valid state (final state for completed runs, last good state
    /// otherwise).
    pub state: FlowState,
    pub steps: usize,
    pub initial_max_grad: f64,
    pub final_max_grad: f64,
    pub peak_max_grad: f64,
}

/// Blow-up threshold from the configured multiplier. A zero initial gradient
/// (constant data) disables the gradient trigger; positivity and finiteness
/// are still enforced.
pub fn gradient_threshold(initial_max_grad: f64, multiplier: f64) -> f64 {
    if initial_max_grad > 0.0 {
        multiplier * initial_max_grad
    } else {
        f64::INFINITY
    }
}

/// Advances with adaptive dt = cfl_dt, invoking `observer` at multiples of
/// `obs_stride`. On blow-up the last interval is re-integrated twice with
/// halved steps to refine the reported lifespan.
pub fn run(
    initial: FlowState,
    t_max: f64,
    obs_stride: f64,
    threshold_multiplier: f64,
    cfl: f64,
    mut observer: Option<&mut dyn FnMut(&FlowState)>,
) -> Result<RunOutcome> {
    validate(&initial)?;
    let (_, m0) = detect_blowup(&initial, f64::INFINITY);
    let initial_grad = m0.max_grad();
    let threshold = gradient_threshold(initial_grad, threshold_multiplier);

    let mut state = initial;
    let mut steps = 0usize;
    let mut peak = initial_grad;
    let mut final_grad = initial_grad;
    let mut obs_index = 0u64;
    if let Some(obs) = observer.as_deref_mut() {
        obs(&state);
    }

    while state.t < t_max - 1e-12 {
        let next_obs = (obs_index + 1) as f64 * obs_stride;
        let target = next_obs.min(t_max);
        let dt_cfl = cfl_dt(&state, cfl)?;
        let dt = dt_cfl.min(target - state.t);
        let prev = state.clone();
        state = match step(&state, dt, cfl) {
            Ok(s) => s,
            Err(e @ (Error::StateInvalid { .. } | Error::NonPositiveDensity { .. })) => {
                return Ok(RunOutcome {
                    status: RunStatus::Aborted {
                        reason: e.to_string(),
                        t_last: prev.t,
                    },
                    state: prev,
                    steps,
                    initial_max_grad: initial_grad,
                    final_max_grad: final_grad,
                    peak_max_grad: peak,
                });
            }
            Err(e) => return Err(e),
        };
        steps += 1;
        if (state.t - target).abs() < 1e-9 * obs_stride.max(1.0) {
            state.t = target;
        }
        let (fired, metrics) = detect_blowup(&state, threshold);
        peak = peak.max(metrics.max_grad());
        final_grad = metrics.max_grad();
        if fired {
            let t_star = refine_blowup_time(&prev, dt, threshold, cfl)?;
            return Ok(RunOutcome {
                status: RunStatus::Blowup { t_star },
                state: prev,
                steps,
                initial_max_grad: initial_grad,
                final_max_grad: final_grad,
                peak_max_grad: peak,
            });
        }
        if (state.t - next_obs).abs() < 1e-9 {
            obs_index += 1;
            if let Some(obs) = observer.as_deref_mut() {
                obs(&state);
            }
        }
    }

    Ok(RunOutcome {
        status: RunStatus::Completed,
        state,
        steps,
        initial_max_grad: initial_grad,
        final_max_grad: final_grad,
        peak_max_grad: peak,
    })
}

/// Re-integrates from the last good state with halved steps, twice, and
/// returns the refined first-crossing time.
pub fn refine_blowup_time(
    last_good: &FlowState,
    dt_used: f64,
    threshold: f64,
    cfl: f64,
) -> Result<f64> {
    let mut anchor = last_good.clone();
    let mut dt = dt_used;
    let mut t_star = last_good.t + dt_used;
    for _ in 0..2 {
        dt *= 0.5;
        let mut s = anchor.clone();
        let mut prev = s.clone();
        loop {
            let dt_step = dt.min(cfl_dt(&s, cfl)?);
            s = match step(&s, dt_step, cfl) {
                Ok(next) => next,
                // Positivity loss inside the interval counts as the crossing.
                Err(Error::StateInvalid { .. } | Error::NonPositiveDensity { .. }) => {
                    t_star = prev.t + dt_step;
                    break;
                }
                Err(e) => return Err(e),
            };
            let (fired, _) = detect_blowup(&s, threshold);
            if fired {
                t_star = s.t;
                break;
            }
            prev = s.clone();
        }
        anchor = prev;
    }
    Ok(t_star)
}
