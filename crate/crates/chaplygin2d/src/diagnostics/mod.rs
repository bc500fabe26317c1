//! Weighted norms and checks: sigma weights, the ghost weight, cutoff
//! functions, vector-field energies, decay-exponent fits, entropy support
//! radii, and the Hardy-quotient ratio.

mod energy;
mod gamma;

pub use energy::{build_window, ApproxDecaySample, SnapshotWindow, ZIntegralAccumulator};

/// Probe helper: full word application at window levels.
pub fn apply_word_levels_pub(
    field: &WindowField,
    rank: usize,
    ctx: &WindowCtx,
    word: &GammaWord,
) -> Reduced {
    Reduced::apply_word_levels(field, rank, ctx, word)
}
pub use gamma::{gamma_apply, reduce_word as reduce_word_pub, CenterReduced, GammaOp, GammaWord, Reduced, TimeLevels, WindowCtx, WindowField};

use crate::error::{Error, Result};
use crate::mesh::{Parity, RadialGrid};
use serde::Serialize;

/// sigma_- = 1 + |t - r|, sigma_+ = 1 + t + r.
pub fn sigma_weights(t: f64, r: f64) -> (f64, f64) {
    (1.0 + (t - r).abs(), 1.0 + t + r)
}

/// sigma~ = sqrt(1 + (r - t - M)^2), the cone-distance weight of the
/// exterior energy.
pub fn sigma_tilde(t: f64, r: f64, support_radius: f64) -> f64 {
    let q = r - t - support_radius;
    (1.0 + q * q).sqrt()
}

/// Ghost weight `phi(q) = integral_{-inf}^q (1 + |s|)^{-3/2} ds`, in closed
/// form: `2 (1-q)^{-1/2}` for q <= 0 and `4 - 2 (1+q)^{-1/2}` for q > 0.
/// Bounded by 0 <= phi < 4 with `phi'(q) = (1 + |q|)^{-3/2}`.
pub fn ghost_weight(q: f64) -> f64 {
    if q <= 0.0 {
        2.0 / (1.0 - q).sqrt()
    } else {
        4.0 - 2.0 / (1.0 + q).sqrt()
    }
}

/// The defining density `(1 + |q|)^{-3/2}` of the ghost weight.
pub fn ghost_weight_density(q: f64) -> f64 {
    (1.0 + q.abs()).powf(-1.5)
}

/// Derivative of the closed-form ghost weight, differentiated branch by
/// branch; agrees with [`ghost_weight_density`] identically.
pub fn ghost_weight_derivative(q: f64) -> f64 {
    if q <= 0.0 {
        (1.0 - q).powf(-1.5)
    } else {
        (1.0 + q).powf(-1.5)
    }
}

/// Seventh-degree polynomial smoothstep: 0 below 0, 1 above 1, C^3 at the
/// junctions, strictly increasing in between.
pub fn smoothstep3(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let x2 = x * x;
        x2 * x2 * (35.0 - 84.0 * x + 70.0 * x2 - 20.0 * x2 * x)
    }
}

fn smoothstep3_deriv(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        let y = x * (1.0 - x);
        140.0 * y * y * y
    }
}

/// Interior cutoff profile: 1 for s <= 1/2, 0 for s >= 3/4, smooth and
/// nonincreasing across the band.
pub fn chi_hat(s: f64) -> f64 {
    1.0 - smoothstep3((s - 0.5) * 4.0)
}

pub fn chi_hat_prime(s: f64) -> f64 {
    -4.0 * smoothstep3_deriv((s - 0.5) * 4.0)
}

/// Interior cutoff chi(t, r) = chi_hat(r / (t + 2M + 2)) and its exact time
/// derivative.
pub fn chi_cutoff(t: f64, r: f64, support_radius: f64) -> (f64, f64) {
    let denom = t + 2.0 * support_radius + 2.0;
    let s = r / denom;
    (chi_hat(s), chi_hat_prime(s) * (-r / (denom * denom)))
}

/// Exterior cutoff profile: 0 for s <= 1/2, 1 for s >= 1.
pub fn chi_tilde(s: f64) -> f64 {
    smoothstep3((s - 0.5) * 2.0)
}

/// All weighted norms and scalar diagnostics of one report time.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    pub t: f64,
    /// E_n for n = 0, 1, 2.
    pub e: [f64; 3],
    /// Q_n for n = 1, 2.
    pub q: [f64; 2],
    /// Cutoff variants Q_n^- for n = 1, 2.
    pub q_minus: [f64; 2],
    /// Ghost-weighted exterior energies for n = 0, 1.
    pub etilde: [f64; 2],
    /// Accumulated space-time Z integral up to this report time.
    pub z_integral: f64,
    pub sup_theta_minus: f64,
    pub sup_theta_plus: f64,
    pub sup_w_minus: f64,
    pub sup_w_plus: f64,
    pub z_support_radius: f64,
    pub hardy_ratio: f64,
    pub max_grad_u: f64,
    pub max_grad_rho: f64,
}

impl EnergyReport {
    pub fn zero(t: f64) -> Self {
        EnergyReport {
            t,
            e: [0.0; 3],
            q: [0.0; 2],
            q_minus: [0.0; 2],
            etilde: [0.0; 2],
            z_integral: 0.0,
            sup_theta_minus: 0.0,
            sup_theta_plus: 0.0,
            sup_w_minus: 0.0,
            sup_w_plus: 0.0,
            z_support_radius: 0.0,
            hardy_ratio: 0.0,
            max_grad_u: 0.0,
            max_grad_rho: 0.0,
        }
    }

    pub fn all_finite(&self) -> bool {
        let vals = [
            self.t,
            self.e[0],
            self.e[1],
            self.e[2],
            self.q[0],
            self.q[1],
            self.q_minus[0],
            self.q_minus[1],
            self.etilde[0],
            self.etilde[1],
            self.z_integral,
            self.sup_theta_minus,
            self.sup_theta_plus,
            self.sup_w_minus,
            self.sup_w_plus,
            self.z_support_radius,
            self.hardy_ratio,
            self.max_grad_u,
            self.max_grad_rho,
        ];
        vals.iter().all(|v| v.is_finite())
    }
}

/// Least-squares slope of log m against log t. Returns (exponent, rms fit
/// residual). Requires at least 8 strictly positive samples spanning a
/// decade in t.
pub fn decay_fit(samples: &[(f64, f64)]) -> Result<(f64, f64)> {
    if samples.len() < 8 {
        return Err(Error::InsufficientSamples {
            reason: format!("{} samples", samples.len()),
        });
    }
    let (t_min, t_max) = samples
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &(t, _)| {
            (lo.min(t), hi.max(t))
        });
    if t_max / t_min < 10.0 * (1.0 - 1e-9) {
        return Err(Error::InsufficientSamples {
            reason: format!("t spans only a factor {:.3}", t_max / t_min),
        });
    }
    for &(t, m) in samples {
        if !(m > 0.0) {
            return Err(Error::NonPositiveValues { value: m, t });
        }
    }
    let n = samples.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(t, m) in samples {
        let (x, y) = (t.ln(), m.ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let mut ss = 0.0;
    for &(t, m) in samples {
        let resid = m.ln() - (intercept + slope * t.ln());
        ss += resid * resid;
    }
    Ok((slope, (ss / n).sqrt()))
}

/// Ratio `||sigma_-^{-1} f||_{r >= M+1} / ||df/dr||_{r >= M+1}` for a field
/// compactly supported inside the light cone (checked with slack for the
/// scheme's spectral leakage).
pub fn hardy_ratio(
    field: &[f64],
    parity: Parity,
    t: f64,
    support_radius: f64,
    grid: &RadialGrid,
) -> Result<f64> {
    let amp = field.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let bound = support_radius + t + 1.5;
    let sr = grid.support_radius(field, 1e-8 * amp.max(1.0));
    if sr > bound {
        return Err(Error::SupportViolation { support: sr, bound });
    }
    let start = grid.r().partition_point(|&rj| rj < support_radius + 1.0);
    let weighted: Vec<f64> = field
        .iter()
        .zip(grid.r())
        .map(|(&f, &r)| f / sigma_weights(t, r).0)
        .collect();
    let num = grid.l2_radial_range(&weighted, start..grid.n);
    let den = grid.l2_radial_range(&grid.deriv_r(field, parity), start..grid.n);
    if den <= f64::MIN_POSITIVE {
        return Err(Error::ZeroDenominator);
    }
    Ok(num / den)
}
