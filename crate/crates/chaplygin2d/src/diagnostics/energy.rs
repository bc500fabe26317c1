//! Snapshot windows and the weighted energies computed from them.

use super::gamma::{GammaOp, GammaWord, Reduced, TimeLevels, WindowCtx, WindowField};
use super::{chi_cutoff, chi_tilde, ghost_weight, sigma_tilde, sigma_weights, EnergyReport};
use crate::error::{Error, Result};
use crate::mesh::Parity;
use crate::potential::{bernoulli_density, potential_rhs, PotentialState};
use crate::solver::{detect_blowup, rhs, FlowState};
use crate::transform::{bernoulli_potential_dt, exterior_potential, to_twz};
use std::f64::consts::PI;
use std::ops::Range;

/// Three consecutive co-snapshots digested into the window fields the
/// energies need. All first time derivatives are exact (right-hand-side
/// evaluations); window differencing is reserved for second and mixed
/// orders.
#[derive(Debug, Clone)]
pub struct SnapshotWindow {
    pub ctx: WindowCtx,
    pub support_radius: f64,
    pub theta_dot: WindowField,
    pub w_dot: WindowField,
    pub z_dot: WindowField,
    pub chi_theta_dot: WindowField,
    pub chi_w_dot: WindowField,
    /// Exterior potential of the flow.
    pub phi_ext: WindowField,
    /// phi_ext minus the reference potential.
    pub phi_dot: WindowField,
    pub theta_a_center: Vec<f64>,
    pub theta_a_dt_center: Vec<f64>,
    pub w_a_center: Vec<f64>,
    pub w_center: Vec<f64>,
    pub z_good_center: Vec<f64>,
    pub z_good_dt_center: Vec<f64>,
    pub max_grad_u: f64,
    pub max_grad_rho: f64,
}

struct LevelFields {
    theta_dot: Vec<f64>,
    theta_dot_dt: Vec<f64>,
    w_dot: Vec<f64>,
    w_dot_dt: Vec<f64>,
    z_dot: Vec<f64>,
    z_dot_dt: Vec<f64>,
    chi_theta_dot: Vec<f64>,
    chi_theta_dot_dt: Vec<f64>,
    chi_w_dot: Vec<f64>,
    chi_w_dot_dt: Vec<f64>,
    phi_ext: Vec<f64>,
    phi_ext_dt: Vec<f64>,
    phi_dot: Vec<f64>,
    phi_dot_dt: Vec<f64>,
    theta_a: Vec<f64>,
    theta_a_dt: Vec<f64>,
    w_a: Vec<f64>,
    u: Vec<f64>,
    u_dt: Vec<f64>,
    /// Z phi_dot assembled from local evolved quantities, and its exact
    /// time derivative by chain rule through the tendencies.
    z_good: Vec<f64>,
    z_good_dt: Vec<f64>,
}

fn level_fields(
    flow: &FlowState,
    pot: &PotentialState,
    z0: &[f64],
    support_radius: f64,
) -> Result<LevelFields> {
    let grid = &flow.grid;
    let n = grid.n;
    let model = flow.model;
    let c_v = model.c_v;
    let a_bar = model.entropy_coeff_bar();
    let rho_bar = model.rho_bar;

    let k = rhs(flow)?;
    let pt = potential_rhs(pot);
    let twz = to_twz(flow)?;
    let rho_a = bernoulli_density(pot)?;

    let mut out = LevelFields {
        theta_dot: vec![0.0; n],
        theta_dot_dt: vec![0.0; n],
        w_dot: vec![0.0; n],
        w_dot_dt: vec![0.0; n],
        z_dot: vec![0.0; n],
        z_dot_dt: vec![0.0; n],
        chi_theta_dot: vec![0.0; n],
        chi_theta_dot_dt: vec![0.0; n],
        chi_w_dot: vec![0.0; n],
        chi_w_dot_dt: vec![0.0; n],
        // the local Bernoulli form of d phi/dt pairs with the native
        // d phi/dr = U link: the good-derivative combination is then built
        // entirely from evolved local quantities
        phi_ext: exterior_potential(flow, support_radius),
        phi_ext_dt: bernoulli_potential_dt(flow)?,
        phi_dot: vec![0.0; n],
        phi_dot_dt: vec![0.0; n],
        theta_a: vec![0.0; n],
        theta_a_dt: vec![0.0; n],
        w_a: pot.ua.clone(),
        u: flow.u.clone(),
        u_dt: k.u.clone(),
        z_good: vec![0.0; n],
        z_good_dt: vec![0.0; n],
    };

    for j in 0..n {
        let theta = twz.theta[j];
        let z = twz.z[j];
        let ra = rho_a[j];
        let theta_a = 1.0 - rho_bar / ra;
        // chain rule through the transforms, using the discrete tendencies
        let dtheta_dt = (1.0 - theta) * (k.rho[j] / flow.rho[j] - k.s[j] / c_v);
        let dz_dt = -(1.0 + z) * k.s[j] / c_v;
        let drho_a_dt = -(pt.v[j] + pot.ua[j] * pt.ua[j]) * ra * ra * ra / a_bar;
        let dtheta_a_dt = rho_bar * drho_a_dt / (ra * ra);

        out.theta_a[j] = theta_a;
        out.theta_a_dt[j] = dtheta_a_dt;
        out.theta_dot[j] = theta - theta_a;
        out.theta_dot_dt[j] = dtheta_dt - dtheta_a_dt;
        out.w_dot[j] = flow.u[j] - pot.ua[j];
        out.w_dot_dt[j] = k.u[j] - pt.ua[j];
        out.z_dot[j] = z - z0[j];
        out.z_dot_dt[j] = dz_dt;
        out.phi_dot[j] = out.phi_ext[j] - pot.phi[j];
        out.phi_dot_dt[j] = out.phi_ext_dt[j] - pot.v[j];

        // Z phi_dot = (d/dt + d/dr)(phi - phi_ref) with d phi/dt from the
        // Bernoulli law and d phi/dr = U: every term is a local evolved
        // quantity, so the good-derivative cancellation survives untouched.
        let h_rho = 0.5 - a_bar / (2.0 * flow.rho[j] * flow.rho[j]);
        out.z_good[j] = (-0.5 * flow.u[j] * flow.u[j] - h_rho - pot.v[j]) + out.w_dot[j];
        out.z_good_dt[j] = -flow.u[j] * k.u[j] - a_bar / flow.rho[j].powi(3) * k.rho[j]
            - pt.v[j]
            + out.w_dot_dt[j];

        let (chi, dchi) = chi_cutoff(flow.t, grid.r()[j], support_radius);
        out.chi_theta_dot[j] = chi * out.theta_dot[j];
        out.chi_theta_dot_dt[j] = dchi * out.theta_dot[j] + chi * out.theta_dot_dt[j];
        out.chi_w_dot[j] = chi * out.w_dot[j];
        out.chi_w_dot_dt[j] = dchi * out.w_dot[j] + chi * out.w_dot_dt[j];
    }

    // Anti-alias the perturbation fields before the energies differentiate
    // them: the flow-minus-reference difference carries top-octave dispersion
    // mismatch that second and mixed derivative words would otherwise
    // amplify. The entropy perturbation is exempt; its support radius is a
    // measured quantity and smoothing would smear it.
    const AA_PASSES: usize = 16;
    for (field, parity) in [
        (&mut out.theta_dot, Parity::Even),
        (&mut out.theta_dot_dt, Parity::Even),
        (&mut out.w_dot, Parity::Odd),
        (&mut out.w_dot_dt, Parity::Odd),
        (&mut out.chi_theta_dot, Parity::Even),
        (&mut out.chi_theta_dot_dt, Parity::Even),
        (&mut out.chi_w_dot, Parity::Odd),
        (&mut out.chi_w_dot_dt, Parity::Odd),
        (&mut out.phi_ext, Parity::Even),
        (&mut out.phi_ext_dt, Parity::Even),
        (&mut out.phi_dot, Parity::Even),
        (&mut out.phi_dot_dt, Parity::Even),
        (&mut out.u, Parity::Odd),
        (&mut out.u_dt, Parity::Odd),
        (&mut out.z_good, Parity::Even),
        (&mut out.z_good_dt, Parity::Even),
    ] {
        *field = grid.antialias(field, parity, AA_PASSES);
    }
    Ok(out)
}

fn window_field(
    minus: &LevelFields,
    center: &LevelFields,
    plus: &LevelFields,
    pick: impl Fn(&LevelFields) -> (&Vec<f64>, &Vec<f64>),
    parity: Parity,
) -> WindowField {
    let (vm, dm) = pick(minus);
    let (vc, dc) = pick(center);
    let (vp, dp) = pick(plus);
    WindowField {
        values: TimeLevels {
            minus: vm.clone(),
            center: vc.clone(),
            plus: vp.clone(),
        },
        dt: Some(TimeLevels {
            minus: dm.clone(),
            center: dc.clone(),
            plus: dp.clone(),
        }),
        dr: None,
        parity,
    }
}

/// Digests three uniformly spaced co-snapshots into a window centered at
/// the middle one.
pub fn build_window(
    flows: [&FlowState; 3],
    pots: [&PotentialState; 3],
    z0: &[f64],
    support_radius: f64,
) -> Result<SnapshotWindow> {
    let dt1 = flows[1].t - flows[0].t;
    let dt2 = flows[2].t - flows[1].t;
    if !(dt1 > 0.0) || (dt1 - dt2).abs() > 1e-9 * dt1 {
        return Err(Error::NeedsTwoSnapshots);
    }
    for i in 0..3 {
        if (flows[i].t - pots[i].t).abs() > 1e-9 {
            return Err(Error::NeedsTwoSnapshots);
        }
        if flows[i].grid.n != flows[1].grid.n || pots[i].grid.n != flows[1].grid.n {
            return Err(Error::GridMismatch {
                left: flows[i].grid.n,
                right: flows[1].grid.n,
            });
        }
    }
    let lv_m = level_fields(flows[0], pots[0], z0, support_radius)?;
    let lv_c = level_fields(flows[1], pots[1], z0, support_radius)?;
    let lv_p = level_fields(flows[2], pots[2], z0, support_radius)?;

    let ctx = WindowCtx {
        t: flows[1].t,
        dt_obs: dt1,
        grid: flows[1].grid.clone(),
    };
    let (_, metrics) = detect_blowup(flows[1], f64::INFINITY);
    let w_dot = window_field(&lv_m, &lv_c, &lv_p, |l| (&l.w_dot, &l.w_dot_dt), Parity::Odd);
    // the reconstructed potentials carry their defining radial derivatives:
    // d(phi_ext)/dr = U and d(phi_dot)/dr = w_dot
    let u_field = window_field(&lv_m, &lv_c, &lv_p, |l| (&l.u, &l.u_dt), Parity::Odd);
    let mut phi_ext = window_field(&lv_m, &lv_c, &lv_p, |l| (&l.phi_ext, &l.phi_ext_dt), Parity::Even);
    phi_ext.dr = Some(Box::new(u_field));
    let mut phi_dot = window_field(&lv_m, &lv_c, &lv_p, |l| (&l.phi_dot, &l.phi_dot_dt), Parity::Even);
    phi_dot.dr = Some(Box::new(w_dot.clone()));
    Ok(SnapshotWindow {
        ctx,
        support_radius,
        theta_dot: window_field(&lv_m, &lv_c, &lv_p, |l| (&l.theta_dot, &l.theta_dot_dt), Parity::Even),
        w_dot,
        z_dot: window_field(&lv_m, &lv_c, &lv_p, |l| (&l.z_dot, &l.z_dot_dt), Parity::Even),
        chi_theta_dot: window_field(
            &lv_m,
            &lv_c,
            &lv_p,
            |l| (&l.chi_theta_dot, &l.chi_theta_dot_dt),
            Parity::Even,
        ),
        chi_w_dot: window_field(&lv_m, &lv_c, &lv_p, |l| (&l.chi_w_dot, &l.chi_w_dot_dt), Parity::Odd),
        phi_ext,
        phi_dot,
        theta_a_center: lv_c.theta_a,
        theta_a_dt_center: lv_c.theta_a_dt,
        w_a_center: lv_c.w_a,
        w_center: flows[1].u.clone(),
        z_good_center: lv_c.z_good,
        z_good_dt_center: lv_c.z_good_dt,
        max_grad_u: metrics.max_grad_u,
        max_grad_rho: metrics.max_grad_rho,
    })
}

impl SnapshotWindow {
    fn weighted_l2_sq(&self, components: &[Vec<f64>], weight: impl Fn(f64) -> f64) -> f64 {
        let grid = &self.ctx.grid;
        let mut sum = 0.0;
        for c in components {
            for (j, &v) in c.iter().enumerate() {
                let w = weight(grid.r()[j]);
                sum += w * w * v * v * grid.r()[j];
            }
        }
        2.0 * PI * sum * grid.dr
    }

    /// E_n: sum over words of length <= n of the squared plane-L2 norms of
    /// the reduced perturbation fields.
    pub fn energy_e(&self, n: usize) -> Result<f64> {
        if n > 2 {
            return Err(Error::WordTooLong { len: n });
        }
        let mut total = 0.0;
        for word in GammaWord::all_up_to(n) {
            for (field, rank) in [(&self.theta_dot, 0), (&self.w_dot, 1), (&self.z_dot, 0)] {
                let red = super::gamma::reduce_word(field, rank, &self.ctx, &word);
                total += self.weighted_l2_sq(&red.components, |_| 1.0);
            }
        }
        Ok(total)
    }

    /// Q_n: sum over words of length <= n-1 of the sigma_- weighted norms of
    /// grad(theta_dot), dt(w_dot), div(w_dot). With `cutoff`, the fields are
    /// premultiplied by chi before any differentiation.
    pub fn energy_q(&self, n: usize, cutoff: bool) -> Result<f64> {
        if n == 0 || n > 2 {
            return Err(Error::WordTooLong { len: n });
        }
        let (th, w) = if cutoff {
            (&self.chi_theta_dot, &self.chi_w_dot)
        } else {
            (&self.theta_dot, &self.w_dot)
        };
        let t = self.ctx.t;
        let weight = |r: f64| sigma_weights(t, r).0;
        let mut total = 0.0;
        for word in GammaWord::all_up_to(n - 1) {
            let red_th = Reduced::apply_word_levels(th, 0, &self.ctx, &word);
            let red_w = Reduced::apply_word_levels(w, 1, &self.ctx, &word);
            let grad = red_th.apply_center(&self.ctx, GammaOp::Dr);
            let dtw = red_w.dt_center(&self.ctx);
            let divw = red_w.divergence_center(&self.ctx);
            total += self.weighted_l2_sq(&grad.components, weight).sqrt()
                + self.weighted_l2_sq(&dtw.components, weight).sqrt()
                + self.weighted_l2_sq(&divw.components, weight).sqrt();
        }
        Ok(total)
    }

    /// Ghost-weighted exterior energy over the potential of the flow.
    pub fn energy_tilde(&self, n: usize) -> Result<f64> {
        if n > 1 {
            return Err(Error::WordTooLong { len: n });
        }
        let grid = &self.ctx.grid;
        let t = self.ctx.t;
        let m = self.support_radius;
        let weights: Vec<f64> = grid
            .r()
            .iter()
            .map(|&r| {
                let cut = chi_tilde(2.0 * r / (t + 2.0 * m + 2.0));
                if cut == 0.0 {
                    0.0
                } else {
                    sigma_tilde(t, r, m).powf(-0.5) * ghost_weight(r - t).exp() * cut
                }
            })
            .collect();
        let mut total = 0.0;
        for word in GammaWord::all_up_to(n) {
            let red = Reduced::apply_word_levels(&self.phi_ext, 0, &self.ctx, &word);
            let dt_part = red.dt_center(&self.ctx);
            let grad_part = red.apply_center(&self.ctx, GammaOp::Dr);
            let mut integrand = dt_part.magnitude_sq(grid.n);
            for (acc, v) in integrand.iter_mut().zip(grad_part.magnitude_sq(grid.n)) {
                *acc += v;
            }
            total += 2.0
                * PI
                * grid.dr
                * integrand
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| weights[j] * v * grid.r()[j])
                    .sum::<f64>();
        }
        Ok(total)
    }

    /// Instantaneous integrand of the space-time Z integral:
    /// `sum_{|mu| <= 1} int_{D+} sigma_-^{-2} |Z Gamma^mu phi_dot|^2 dx`.
    ///
    /// Assembled from the native pieces of the reconstruction
    /// (`d phi_dot/dr = w_dot`, exact time derivatives) so the good-derivative
    /// cancellation is not spoiled by re-differentiating the potential. The
    /// scaling word uses the commutator identity `Z X = (X + 1) Z`.
    pub fn z_integrand(&self) -> f64 {
        let grid = &self.ctx.grid;
        let n = grid.n;
        let t = self.ctx.t;
        let dt_obs = self.ctx.dt_obs;
        let (_, dplus) = grid.region_split(t, self.support_radius);

        let _ = dt_obs;
        let w = self.phi_dot.dr.as_ref().expect("phi_dot carries d/dr = w_dot");
        let w_c = &w.values.center;
        let w_dt = &w.dt.as_ref().expect("w_dot carries exact dt").center;
        let w_dr = grid.deriv_r(w_c, w.parity);
        let g = &self.z_good_center;
        let g_dt = &self.z_good_dt_center;

        let mut z0 = vec![0.0; n]; // Z phi_dot
        let mut z1 = vec![0.0; n]; // Z dt phi_dot = dt (Z phi_dot), exact
        let mut z2a = vec![0.0; n]; // Z dr phi_dot, amplitude part
        let mut z2b = vec![0.0; n]; // Z dr phi_dot, geometric part
        let mut z3 = vec![0.0; n]; // Z X phi_dot = (X + 1) Z phi_dot
        for j in 0..n {
            let r = grid.r()[j];
            z0[j] = g[j];
            z1[j] = g_dt[j];
            z2a[j] = w_dt[j] + w_dr[j];
            z2b[j] = w_c[j] / r;
            z3[j] = t * z1[j] + r * z2a[j] + z0[j];
        }

        let mut total = 0.0;
        for j in dplus {
            let s_minus = sigma_weights(t, grid.r()[j]).0;
            let mag = z0[j] * z0[j]
                + z1[j] * z1[j]
                + z2a[j] * z2a[j]
                + z2b[j] * z2b[j]
                + z3[j] * z3[j];
            total += mag / (s_minus * s_minus) * grid.r()[j];
        }
        2.0 * PI * grid.dr * total
    }

    fn sup_over(&self, f: &[f64], range: Range<usize>) -> f64 {
        f[range].iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    /// Assembles the report row for this window; the accumulated Z integral
    /// is supplied by the caller.
    pub fn report(&self, z_integral: f64) -> Result<EnergyReport> {
        let grid = &self.ctx.grid;
        let t = self.ctx.t;
        let (dminus, dplus) = grid.region_split(t, self.support_radius);
        let hardy = match super::hardy_ratio(
            &self.theta_dot.values.center,
            Parity::Even,
            t,
            self.support_radius,
            grid,
        ) {
            Ok(v) => v,
            Err(Error::ZeroDenominator) => 0.0,
            Err(e) => return Err(e),
        };
        Ok(EnergyReport {
            t,
            e: [self.energy_e(0)?, self.energy_e(1)?, self.energy_e(2)?],
            q: [self.energy_q(1, false)?, self.energy_q(2, false)?],
            q_minus: [self.energy_q(1, true)?, self.energy_q(2, true)?],
            etilde: [self.energy_tilde(0)?, self.energy_tilde(1)?],
            z_integral,
            sup_theta_minus: self.sup_over(&self.theta_dot.values.center, dminus.clone()),
            sup_theta_plus: self.sup_over(&self.theta_dot.values.center, dplus.clone()),
            sup_w_minus: self.sup_over(&self.w_dot.values.center, dminus),
            sup_w_plus: self.sup_over(&self.w_dot.values.center, dplus),
            z_support_radius: grid.support_radius(&self.z_dot.values.center, 1e-10),
            hardy_ratio: hardy,
            max_grad_u: self.max_grad_u,
            max_grad_rho: self.max_grad_rho,
        })
    }

    /// Auxiliary decay samples for the reference-flow and good-derivative
    /// fits.
    pub fn approx_sample(&self) -> ApproxDecaySample {
        let grid = &self.ctx.grid;
        let t = self.ctx.t;
        let (_, dplus) = grid.region_split(t, self.support_radius);
        let interior_end = grid.r().partition_point(|&r| r <= t / 2.0);
        let dtheta_a = grid.deriv_r(&self.theta_a_center, Parity::Even);
        let sup_grad_theta_a_int = (0..interior_end)
            .map(|j| dtheta_a[j].abs().max(self.theta_a_dt_center[j].abs()))
            .fold(0.0f64, f64::max);

        let phid = &self.phi_dot;
        let dt_c = &phid.dt.as_ref().expect("phi_dot carries exact dt").center;
        let dr_c = &phid.dr.as_ref().expect("phi_dot carries d/dr").values.center;
        let mut sup_z = 0.0f64;
        let mut sup_d = 0.0f64;
        for j in dplus.clone() {
            sup_z = sup_z.max(self.z_good_center[j].abs());
            sup_d = sup_d.max(dt_c[j].abs().max(dr_c[j].abs()));
        }
        ApproxDecaySample {
            t,
            sup_wa_plus: self.sup_over(&self.w_a_center, dplus.clone()),
            sup_w_plus: self.sup_over(&self.w_center, dplus),
            sup_grad_theta_a_int,
            sup_z_phidot_plus: sup_z,
            sup_d_phidot_plus: sup_d,
        }
    }
}

/// Row of the auxiliary decay series.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ApproxDecaySample {
    pub t: f64,
    pub sup_wa_plus: f64,
    pub sup_w_plus: f64,
    pub sup_grad_theta_a_int: f64,
    pub sup_z_phidot_plus: f64,
    pub sup_d_phidot_plus: f64,
}

/// Trapezoidal accumulator for the space-time Z integral.
#[derive(Debug, Clone, Default)]
pub struct ZIntegralAccumulator {
    last: Option<(f64, f64)>,
    total: f64,
}

impl ZIntegralAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Pushes the integrand at time t; returns the accumulated integral.
    pub fn push(&mut self, t: f64, integrand: f64) -> f64 {
        if let Some((t0, g0)) = self.last {
            self.total += 0.5 * (g0 + integrand) * (t - t0);
        }
        self.last = Some((t, integrand));
        self.total
    }

    pub fn total(&self) -> f64 {
        self.total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::GasModel;
    use crate::mesh::build_grid;
    use crate::potential::{init_potential, step as pstep};
    use crate::solver::{bump, init_state, step as fstep, InitialProfiles};
    use std::sync::Arc;

    fn chap() -> GasModel {
        GasModel::chaplygin(2.0, 1.0, 0.0, 1.0).unwrap()
    }

    /// Co-integrates to the three times (t-dt, t, t+dt) and builds a window.
    fn window_at(eps: f64, n: usize, r_max: f64, t: f64, dt_obs: f64) -> SnapshotWindow {
        let grid = Arc::new(build_grid(r_max, n).unwrap());
        let profiles = InitialProfiles::new(eps, 1.0);
        let model = chap();
        let mut fs = init_state(&profiles, grid.clone(), model).unwrap();
        let mut ps = init_potential(&profiles, grid.clone(), model).unwrap();
        let z0 = to_twz(&fs).unwrap().z;
        let mut snaps = Vec::new();
        for target in [t - dt_obs, t, t + dt_obs] {
            while fs.t < target - 1e-12 {
                let dt = crate::solver::cfl_dt(&fs, 0.4)
                    .unwrap()
                    .min(crate::potential::cfl_dt(&ps, 0.4).unwrap())
                    .min(target - fs.t);
                fs = fstep(&fs, dt, 0.4).unwrap();
                ps = pstep(&ps, dt, 0.4).unwrap();
            }
            fs.t = target;
            ps.t = target;
            snaps.push((fs.clone(), ps.clone()));
        }
        build_window(
            [&snaps[0].0, &snaps[1].0, &snaps[2].0],
            [&snaps[0].1, &snaps[1].1, &snaps[2].1],
            &z0,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn zero_run_has_zero_energies() {
        let w = window_at(0.0, 128, 8.0, 0.5, 0.1);
        assert_eq!(w.energy_e(0).unwrap(), 0.0);
        assert_eq!(w.energy_e(2).unwrap(), 0.0);
        assert_eq!(w.energy_q(1, false).unwrap(), 0.0);
        assert_eq!(w.energy_q(2, true).unwrap(), 0.0);
        assert_eq!(w.energy_tilde(1).unwrap(), 0.0);
        assert_eq!(w.z_integrand(), 0.0);
        let report = w.report(0.0).unwrap();
        assert!(report.all_finite());
        assert_eq!(report.sup_w_plus, 0.0);
        assert_eq!(report.z_support_radius, 0.0);
    }

    #[test]
    fn energies_monotone_in_order() {
        let w = window_at(0.05, 600, 12.0, 1.0, 0.05);
        let e0 = w.energy_e(0).unwrap();
        let e1 = w.energy_e(1).unwrap();
        let e2 = w.energy_e(2).unwrap();
        assert!(e0 > 0.0);
        assert!(e0 <= e1 && e1 <= e2, "E monotone: {e0} {e1} {e2}");
    }

    #[test]
    fn energy_scales_quadratically() {
        let mut w = window_at(0.05, 400, 10.0, 1.0, 0.05);
        let base: Vec<f64> = (0..=2).map(|n| w.energy_e(n).unwrap()).collect();
        let c = 3.0;
        for field in [&mut w.theta_dot, &mut w.w_dot, &mut w.z_dot] {
            for lv in [&mut field.values.minus, &mut field.values.center, &mut field.values.plus] {
                lv.iter_mut().for_each(|v| *v *= c);
            }
            if let Some(dt) = field.dt.as_mut() {
                for lv in [&mut dt.minus, &mut dt.center, &mut dt.plus] {
                    lv.iter_mut().for_each(|v| *v *= c);
                }
            }
        }
        for (n, &b) in base.iter().enumerate() {
            let scaled = w.energy_e(n).unwrap();
            assert!(
                (scaled / b - c * c).abs() <= 1e-12 * c * c,
                "n = {n}: ratio {}",
                scaled / b
            );
        }
    }

    #[test]
    fn cutoff_q_matches_plain_q_inside_plateau() {
        // Fields supported where chi = 1 identically: Q_n^- = Q_n.
        let grid = Arc::new(build_grid(16.0, 800).unwrap());
        let t = 10.0;
        let dt_obs = 0.05;
        // plateau extends to (t + 2M + 2)/2 = 7; put everything inside r < 3
        let f: Vec<f64> = grid.r().iter().map(|&r| bump(r / 3.0)).collect();
        let fw: Vec<f64> = grid
            .r()
            .iter()
            .map(|&r| (r / 3.0) * bump(r / 3.0))
            .collect();
        let mk = |v: &Vec<f64>, par| WindowField::static_field(v.clone(), par);
        let chi_scaled = |v: &Vec<f64>| -> Vec<f64> {
            v.iter()
                .zip(grid.r())
                .map(|(&x, &r)| chi_cutoff(t, r, 1.0).0 * x)
                .collect()
        };
        let w = SnapshotWindow {
            ctx: WindowCtx {
                t,
                dt_obs,
                grid: grid.clone(),
            },
            support_radius: 1.0,
            theta_dot: mk(&f, Parity::Even),
            w_dot: mk(&fw, Parity::Odd),
            z_dot: mk(&vec![0.0; grid.n], Parity::Even),
            chi_theta_dot: mk(&chi_scaled(&f), Parity::Even),
            chi_w_dot: mk(&chi_scaled(&fw), Parity::Odd),
            phi_ext: mk(&vec![0.0; grid.n], Parity::Even),
            phi_dot: mk(&vec![0.0; grid.n], Parity::Even),
            theta_a_center: vec![0.0; grid.n],
            theta_a_dt_center: vec![0.0; grid.n],
            w_a_center: vec![0.0; grid.n],
            w_center: vec![0.0; grid.n],
            z_good_center: vec![0.0; grid.n],
            z_good_dt_center: vec![0.0; grid.n],
            max_grad_u: 0.0,
            max_grad_rho: 0.0,
        };
        for n in [1usize, 2] {
            let q = w.energy_q(n, false).unwrap();
            let qm = w.energy_q(n, true).unwrap();
            assert!(
                (q - qm).abs() <= 1e-10 * q.max(1.0),
                "n = {n}: {q} vs {qm}"
            );
        }
    }

    #[test]
    fn etilde_matches_quadrature_oracle() {
        // Static Gaussian ring at t = 5: E~_0 = 2 pi int w(r) G'(r)^2 r dr
        // with w the ghost weight, against an independent fine quadrature.
        let grid = Arc::new(build_grid(40.0, 40_000).unwrap());
        let t = 5.0;
        let m = 1.0;
        let gaussian: Vec<f64> = grid.r().iter().map(|&r| (-(r - 6.0_f64).powi(2)).exp()).collect();
        let w = SnapshotWindow {
            ctx: WindowCtx {
                t,
                dt_obs: 0.05,
                grid: grid.clone(),
            },
            support_radius: m,
            theta_dot: WindowField::static_field(vec![0.0; grid.n], Parity::Even),
            w_dot: WindowField::static_field(vec![0.0; grid.n], Parity::Odd),
            z_dot: WindowField::static_field(vec![0.0; grid.n], Parity::Even),
            chi_theta_dot: WindowField::static_field(vec![0.0; grid.n], Parity::Even),
            chi_w_dot: WindowField::static_field(vec![0.0; grid.n], Parity::Odd),
            phi_ext: WindowField::static_field(gaussian, Parity::Even),
            phi_dot: WindowField::static_field(vec![0.0; grid.n], Parity::Even),
            theta_a_center: vec![0.0; grid.n],
            theta_a_dt_center: vec![0.0; grid.n],
            w_a_center: vec![0.0; grid.n],
            w_center: vec![0.0; grid.n],
            z_good_center: vec![0.0; grid.n],
            z_good_dt_center: vec![0.0; grid.n],
            max_grad_u: 0.0,
            max_grad_rho: 0.0,
        };
        let computed = w.energy_tilde(0).unwrap();

        let steps = 2_000_000usize;
        let (a, b) = (0.0, 20.0);
        let dh = (b - a) / steps as f64;
        let mut oracle = 0.0;
        for i in 0..steps {
            let r = a + (i as f64 + 0.5) * dh;
            let gp = -2.0 * (r - 6.0) * (-(r - 6.0f64).powi(2)).exp();
            let weight = sigma_tilde(t, r, m).powf(-0.5)
                * ghost_weight(r - t).exp()
                * chi_tilde(2.0 * r / (t + 2.0 * m + 2.0));
            oracle += weight * gp * gp * r * dh;
        }
        oracle *= 2.0 * PI;
        assert!(
            (computed - oracle).abs() <= 1e-6 * oracle,
            "{computed} vs {oracle}"
        );
    }

    #[test]
    fn ghost_weight_factor_bounds() {
        for &q in &[-50.0, -1.0, 0.0, 3.0, 1e6] {
            let w = ghost_weight(q).exp();
            assert!((1.0..=(4.0f64).exp()).contains(&w));
        }
    }

    #[test]
    fn z_accumulator_monotone() {
        let mut acc = ZIntegralAccumulator::new();
        assert_eq!(acc.push(0.0, 0.0), 0.0);
        let a = acc.push(1.0, 2.0);
        let b = acc.push(2.0, 1.0);
        let c = acc.push(3.0, 0.0);
        assert!(a <= b && b <= c);
        assert!((c - 3.0).abs() < 1e-14);
    }

    #[test]
    fn real_window_report_is_finite_and_consistent() {
        let w = window_at(0.05, 800, 16.0, 2.0, 0.05);
        let report = w.report(0.123).unwrap();
        assert!(report.all_finite());
        assert!(report.e[0] > 0.0);
        assert!(report.e[0] <= report.e[1] && report.e[1] <= report.e[2]);
        assert_eq!(report.z_integral, 0.123);
        assert!(report.z_support_radius <= 1.0 + 1.0 + 2.0 * w.ctx.grid.dr);
        let sample = w.approx_sample();
        assert!(sample.sup_wa_plus >= 0.0 && sample.sup_wa_plus.is_finite());
    }
}
