//! Equations of state for Chaplygin and polytropic gases.
//!
//! Both models are normalized so the background sound speed is exactly 1:
//! the entropy coefficient is `A(S) = rho_bar^2 * exp((S - S_bar)/c_v)`
//! (so `A(S_bar) = rho_bar^2`), and the polytropic coefficient is
//! `K = rho_bar^(1-gamma)/gamma`. With identical backgrounds the two gases
//! are directly comparable at the same perturbation amplitude.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GasKind {
    Chaplygin,
    Polytropic,
}

impl std::fmt::Display for GasKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GasKind::Chaplygin => write!(f, "chaplygin"),
            GasKind::Polytropic => write!(f, "polytropic"),
        }
    }
}

/// Equation-of-state parameters and background normalization.
///
/// Chaplygin: `P = P0 - A(S)/rho`. Polytropic: `P = K rho^gamma exp((S-S_bar)/c_v)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GasModel {
    pub kind: GasKind,
    /// Background pressure offset (Chaplygin only; unused for polytropic).
    pub p0: f64,
    pub rho_bar: f64,
    pub s_bar: f64,
    pub c_v: f64,
    /// Adiabatic exponent in (1, 3) (polytropic only; unused for Chaplygin).
    pub gamma: f64,
}

impl GasModel {
    pub fn chaplygin(p0: f64, rho_bar: f64, s_bar: f64, c_v: f64) -> Result<Self> {
        let model = GasModel {
            kind: GasKind::Chaplygin,
            p0,
            rho_bar,
            s_bar,
            c_v,
            gamma: f64::NAN,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn polytropic(gamma: f64, rho_bar: f64, s_bar: f64, c_v: f64) -> Result<Self> {
        let model = GasModel {
            kind: GasKind::Polytropic,
            p0: f64::NAN,
            rho_bar,
            s_bar,
            c_v,
            gamma,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho_bar > 0.0) {
            return Err(Error::Config(format!(
                "rho_bar must be positive, got {}",
                self.rho_bar
            )));
        }
        if !(self.c_v > 0.0) {
            return Err(Error::Config(format!("c_v must be positive, got {}", self.c_v)));
        }
        match self.kind {
            GasKind::Chaplygin => {
                // Background pressure positivity: P0 - A(S_bar)/rho_bar > 0.
                let background_p = self.p0 - self.rho_bar;
                if !(background_p > 0.0) {
                    return Err(Error::Config(format!(
                        "Chaplygin background pressure P0 - rho_bar = {} must be positive",
                        background_p
                    )));
                }
            }
            GasKind::Polytropic => {
                if !(self.gamma > 1.0 && self.gamma < 3.0) {
                    return Err(Error::Config(format!(
                        "polytropic gamma must lie in (1, 3), got {}",
                        self.gamma
                    )));
                }
            }
        }
        Ok(())
    }

    /// Entropy coefficient `A(S) = rho_bar^2 exp((S - S_bar)/c_v)`, strictly positive
    /// with `A'(S_bar) = rho_bar^2/c_v != 0`.
    pub fn entropy_coeff(&self, s: f64) -> f64 {
        self.rho_bar * self.rho_bar * ((s - self.s_bar) / self.c_v).exp()
    }

    /// `A(S_bar) = rho_bar^2`.
    pub fn entropy_coeff_bar(&self) -> f64 {
        self.rho_bar * self.rho_bar
    }

    /// Polytropic coefficient fixed by the unit background sound speed.
    fn poly_k(&self) -> f64 {
        self.rho_bar.powf(1.0 - self.gamma) / self.gamma
    }

    pub fn pressure(&self, rho: f64, s: f64) -> Result<f64> {
        self.check_rho(rho)?;
        Ok(match self.kind {
            GasKind::Chaplygin => self.p0 - self.entropy_coeff(s) / rho,
            GasKind::Polytropic => {
                self.poly_k() * rho.powf(self.gamma) * ((s - self.s_bar) / self.c_v).exp()
            }
        })
    }

    /// `dP/drho` at fixed entropy; equals the sound speed squared.
    pub fn dpressure_drho(&self, rho: f64, s: f64) -> Result<f64> {
        self.check_rho(rho)?;
        Ok(match self.kind {
            GasKind::Chaplygin => self.entropy_coeff(s) / (rho * rho),
            GasKind::Polytropic => {
                self.poly_k()
                    * self.gamma
                    * rho.powf(self.gamma - 1.0)
                    * ((s - self.s_bar) / self.c_v).exp()
            }
        })
    }

    /// `dP/dS` at fixed density. Chaplygin: `-A'(S)/rho`; polytropic: `P/c_v`.
    pub fn dpressure_ds(&self, rho: f64, s: f64) -> Result<f64> {
        self.check_rho(rho)?;
        Ok(match self.kind {
            GasKind::Chaplygin => -self.entropy_coeff(s) / (self.c_v * rho),
            GasKind::Polytropic => {
                self.poly_k() * rho.powf(self.gamma) * ((s - self.s_bar) / self.c_v).exp()
                    / self.c_v
            }
        })
    }

    pub fn sound_speed(&self, rho: f64, s: f64) -> Result<f64> {
        self.check_rho(rho)?;
        Ok(match self.kind {
            GasKind::Chaplygin => self.entropy_coeff(s).sqrt() / rho,
            GasKind::Polytropic => self.dpressure_drho(rho, s)?.sqrt(),
        })
    }

    /// Chaplygin enthalpy `h(rho) = 1/2 - A(S_bar)/(2 rho^2)`, with `h(rho_bar) = 0`.
    pub fn enthalpy(&self, rho: f64) -> Result<f64> {
        if self.kind != GasKind::Chaplygin {
            return Err(Error::WrongKind {
                expected: "chaplygin",
            });
        }
        self.check_rho(rho)?;
        Ok(0.5 - self.entropy_coeff_bar() / (2.0 * rho * rho))
    }

    /// Exact inverse of [`GasModel::enthalpy`]: `rho = sqrt(A(S_bar)/(1 - 2h))`,
    /// defined for `h < 1/2`.
    pub fn enthalpy_inverse(&self, h: f64) -> Result<f64> {
        if self.kind != GasKind::Chaplygin {
            return Err(Error::WrongKind {
                expected: "chaplygin",
            });
        }
        if !(h < 0.5) {
            return Err(Error::EnthalpyOutOfRange { h, r: f64::NAN });
        }
        Ok((self.entropy_coeff_bar() / (1.0 - 2.0 * h)).sqrt())
    }

    fn check_rho(&self, rho: f64) -> Result<()> {
        if rho > 0.0 {
            Ok(())
        } else {
            Err(Error::NonPositiveDensity { rho, r: f64::NAN })
        }
    }
}
