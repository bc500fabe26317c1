//! Change of variables (theta, w, z), the perturbation fields relative to
//! the approximate flow, and exterior potential reconstruction from the
//! velocity field.

use crate::error::{Error, Result};
use crate::mesh::Parity;
use crate::potential::{chaplygin_shadow, ApproximateFlow};
use crate::solver::FlowState;

/// theta = 1 - A(S) rho_bar / (A(S_bar) rho), w amplitude W = U,
/// z = A(S_bar)/A(S) - 1.
#[derive(Debug, Clone)]
pub struct TwzFields {
    pub t: f64,
    pub theta: Vec<f64>,
    pub w: Vec<f64>,
    pub z: Vec<f64>,
}

/// Differences against the approximate flow; all three vanish identically
/// at t = 0 by construction.
#[derive(Debug, Clone)]
pub struct PerturbationFields {
    pub t: f64,
    pub theta_dot: Vec<f64>,
    pub w_dot: Vec<f64>,
    pub z_dot: Vec<f64>,
}

pub fn to_twz(state: &FlowState) -> Result<TwzFields> {
    let n = state.grid.n;
    let a_bar = state.model.entropy_coeff_bar();
    let rho_bar = state.model.rho_bar;
    let mut theta = Vec::with_capacity(n);
    let mut z = Vec::with_capacity(n);
    for j in 0..n {
        let (rho, s) = (state.rho[j], state.s[j]);
        if rho <= 0.0 {
            return Err(Error::NonPositiveDensity {
                rho,
                r: state.grid.r()[j],
            });
        }
        let a = state.model.entropy_coeff(s);
        theta.push(1.0 - a * rho_bar / (a_bar * rho));
        z.push(a_bar / a - 1.0);
    }
    Ok(TwzFields {
        t: state.t,
        theta,
        w: state.u.clone(),
        z,
    })
}

/// Inverse of [`to_twz`]: `rho = rho_bar / ((1 + z)(1 - theta))`,
/// `S = S_bar - c_v ln(1 + z)`.
pub fn twz_inverse(
    twz: &TwzFields,
    model: &crate::eos::GasModel,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let rho: Vec<f64> = twz
        .theta
        .iter()
        .zip(&twz.z)
        .map(|(&th, &z)| model.rho_bar / ((1.0 + z) * (1.0 - th)))
        .collect();
    let s: Vec<f64> = twz
        .z
        .iter()
        .map(|&z| model.s_bar - model.c_v * (1.0 + z).ln())
        .collect();
    (rho, twz.w.clone(), s)
}

/// Perturbations theta_dot = theta - theta_a, w_dot = W - w_a,
/// z_dot = z - z(0, .).
pub fn perturbations(
    twz: &TwzFields,
    approx: &ApproximateFlow,
    z0: &[f64],
) -> Result<PerturbationFields> {
    let n = twz.theta.len();
    if approx.theta_a.len() != n || z0.len() != n {
        return Err(Error::GridMismatch {
            left: n,
            right: approx.theta_a.len().min(z0.len()),
        });
    }
    Ok(PerturbationFields {
        t: twz.t,
        theta_dot: twz
            .theta
            .iter()
            .zip(&approx.theta_a)
            .map(|(a, b)| a - b)
            .collect(),
        w_dot: twz.w.iter().zip(&approx.w_a).map(|(a, b)| a - b).collect(),
        z_dot: twz.z.iter().zip(z0).map(|(a, b)| a - b).collect(),
    })
}

/// Exterior potential reconstructed from the solved velocity,
/// `phi(t, r) = -integral_r^{R_end} U(t, s) ds` with
/// `R_end = min(M + t + 2 dr, R_max)`. Trapezoid with an Euler-Maclaurin
/// endpoint correction, fourth order for smooth U.
pub fn exterior_potential(state: &FlowState, support_radius: f64) -> Vec<f64> {
    let grid = &state.grid;
    let n = grid.n;
    let r_end = (support_radius + state.t + 2.0 * grid.dr).min(grid.r_max);
    let k_end = grid.r().partition_point(|&rj| rj <= r_end);
    let mut phi = vec![0.0; n];
    if k_end < 2 {
        return phi;
    }
    let du = grid.deriv_r(&state.u, Parity::Odd);
    let last = k_end - 1;
    let mut trapz = 0.0;
    for j in (0..last).rev() {
        trapz += 0.5 * (state.u[j] + state.u[j + 1]) * grid.dr;
        phi[j] = -trapz + grid.dr * grid.dr / 12.0 * (du[last] - du[j]);
    }
    phi
}

/// Bernoulli residual `|d phi/dt + U^2/2 + h(rho)|` with the time derivative
/// centered across two neighboring snapshots. The residual is meaningful for
/// r >= M + 1 where the flow is isentropic.
pub fn bernoulli_residual(
    prev: &FlowState,
    mid: &FlowState,
    next: &FlowState,
    support_radius: f64,
) -> Result<Vec<f64>> {
    let dt_minus = mid.t - prev.t;
    let dt_plus = next.t - mid.t;
    if !(dt_minus > 0.0) || !(dt_plus > 0.0) || (dt_minus - dt_plus).abs() > 1e-9 * dt_plus {
        return Err(Error::NeedsTwoSnapshots);
    }
    let phi_prev = exterior_potential(prev, support_radius);
    let phi_next = exterior_potential(next, support_radius);
    let shadow = chaplygin_shadow(&mid.model);
    let mut resid = Vec::with_capacity(mid.grid.n);
    for j in 0..mid.grid.n {
        let dphi_dt = (phi_next[j] - phi_prev[j]) / (dt_minus + dt_plus);
        let h = shadow.enthalpy(mid.rho[j])?;
        resid.push((dphi_dt + 0.5 * mid.u[j] * mid.u[j] + h).abs());
    }
    Ok(resid)
}

/// Time derivative of the reconstruction, obtained by pushing the velocity
/// tendency through the same quadrature:
/// `d phi/dt (t, r) = -integral_r^{R_end} dU/dt (t, s) ds`.
/// Keeping the quadrature identical to [`exterior_potential`] preserves the
/// discrete cancellation in the good derivative Z(phi).
pub fn exterior_potential_dt(state: &FlowState, support_radius: f64) -> Result<Vec<f64>> {
    let k = crate::solver::rhs(state)?;
    let mut surrogate = state.clone();
    surrogate.u = k.u;
    Ok(exterior_potential(&surrogate, support_radius))
}

/// Time derivative of the potential per the Bernoulli law,
/// `-U^2/2 - h(rho)`; agrees with [`exterior_potential_dt`] up to the
/// discretization residual measured by [`bernoulli_residual`].
pub fn bernoulli_potential_dt(state: &FlowState) -> Result<Vec<f64>> {
    let shadow = chaplygin_shadow(&state.model);
    let mut out = Vec::with_capacity(state.grid.n);
    for j in 0..state.grid.n {
        let h = shadow.enthalpy(state.rho[j])?;
        out.push(-0.5 * state.u[j] * state.u[j] - h);
    }
    Ok(out)
}

/// Largest radius helper shared by support checks: max of the three
/// perturbation supports.
pub fn perturbation_support(state: &FlowState, tol: f64) -> f64 {
    let grid = &state.grid;
    let dev_rho: Vec<f64> = state.rho.iter().map(|&v| v - state.model.rho_bar).collect();
    let dev_s: Vec<f64> = state.s.iter().map(|&v| v - state.model.s_bar).collect();
    grid.support_radius(&dev_rho, tol)
        .max(grid.support_radius(&state.u, tol))
        .max(grid.support_radius(&dev_s, tol))
}
