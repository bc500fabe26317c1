//! Run configuration: strict sectioned key = value files plus CLI overrides.
//!
//! Unknown sections or keys are errors, reported with the offending line, so
//! a typo in a sweep script fails loudly instead of silently running with a
//! default.

use crate::eos::{GasKind, GasModel};
use crate::error::{Error, Result};
use crate::solver::InitialProfiles;
use serde::{Deserialize, Serialize};

fn default_rho_bar() -> f64 {
    1.0
}
fn default_c_v() -> f64 {
    1.0
}
fn default_p0() -> f64 {
    2.0
}
fn default_gamma() -> f64 {
    1.4
}
fn default_epsilon() -> f64 {
    0.1
}
fn default_support_radius() -> f64 {
    1.0
}
fn default_scale() -> f64 {
    1.0
}
fn default_r_max() -> f64 {
    120.0
}
fn default_n() -> usize {
    4000
}
fn default_t_max() -> f64 {
    100.0
}
fn default_dt_obs() -> f64 {
    0.05
}
fn default_cfl() -> f64 {
    crate::solver::DEFAULT_CFL
}
fn default_threshold_mult() -> f64 {
    50.0
}
fn default_n_max() -> usize {
    2
}
fn default_snapshot_stride() -> f64 {
    10.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EosSection {
    pub kind: GasKind,
    pub rho_bar: f64,
    pub s_bar: f64,
    pub c_v: f64,
    /// Chaplygin pressure offset.
    pub p0: f64,
    /// Polytropic adiabatic exponent.
    pub gamma: f64,
}

impl Default for EosSection {
    fn default() -> Self {
        EosSection {
            kind: GasKind::Chaplygin,
            rho_bar: default_rho_bar(),
            s_bar: 0.0,
            c_v: default_c_v(),
            p0: default_p0(),
            gamma: default_gamma(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileSection {
    pub epsilon: f64,
    pub support_radius: f64,
    pub rho_scale: f64,
    pub u_scale: f64,
    pub s_scale: f64,
}

impl Default for ProfileSection {
    fn default() -> Self {
        ProfileSection {
            epsilon: default_epsilon(),
            support_radius: default_support_radius(),
            rho_scale: default_scale(),
            u_scale: default_scale(),
            s_scale: default_scale(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub r_max: f64,
    pub n: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            r_max: default_r_max(),
            n: default_n(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub t_max: f64,
    pub dt_obs: f64,
    pub cfl: f64,
    pub gradient_threshold_mult: f64,
    /// Diagnostic derivative-order cap (<= 2).
    pub n_max: usize,
    /// Stride at which full field snapshots are written.
    pub snapshot_stride: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            t_max: default_t_max(),
            dt_obs: default_dt_obs(),
            cfl: default_cfl(),
            gradient_threshold_mult: default_threshold_mult(),
            n_max: default_n_max(),
            snapshot_stride: default_snapshot_stride(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub eos: EosSection,
    pub profile: ProfileSection,
    pub grid: GridSection,
    pub run: RunSection,
}

impl RunConfig {
    /// Parses the sectioned key = value text, mapping parse errors to the
    /// offending line.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let config: RunConfig = toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|span| text[..span.start.min(text.len())].matches('\n').count() + 1)
                .unwrap_or(0);
            Error::Config(format!("line {line}: {}", e.message()))
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.model()?;
        let positive = [
            ("profile.support_radius", self.profile.support_radius),
            ("grid.r_max", self.grid.r_max),
            ("run.t_max", self.run.t_max),
            ("run.dt_obs", self.run.dt_obs),
            ("run.cfl", self.run.cfl),
            ("run.gradient_threshold_mult", self.run.gradient_threshold_mult),
            ("run.snapshot_stride", self.run.snapshot_stride),
        ];
        for (name, value) in positive {
            if !(value > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {value}")));
            }
        }
        if self.profile.epsilon < 0.0 {
            return Err(Error::Config(format!(
                "profile.epsilon must be nonnegative, got {}",
                self.profile.epsilon
            )));
        }
        if self.run.n_max > 2 {
            return Err(Error::Config(format!(
                "run.n_max must be <= 2, got {}",
                self.run.n_max
            )));
        }
        let needed = self.profile.support_radius + self.run.t_max + 5.0;
        if self.grid.r_max < needed {
            return Err(Error::Config(format!(
                "grid.r_max = {} violates r_max >= M + t_max + 5 = {needed}",
                self.grid.r_max
            )));
        }
        if self.grid.n < crate::mesh::MIN_CELLS {
            return Err(Error::TooCoarse {
                n: self.grid.n,
                min: crate::mesh::MIN_CELLS,
            });
        }
        Ok(())
    }

    pub fn model(&self) -> Result<GasModel> {
        match self.eos.kind {
            GasKind::Chaplygin => GasModel::chaplygin(
                self.eos.p0,
                self.eos.rho_bar,
                self.eos.s_bar,
                self.eos.c_v,
            ),
            GasKind::Polytropic => GasModel::polytropic(
                self.eos.gamma,
                self.eos.rho_bar,
                self.eos.s_bar,
                self.eos.c_v,
            ),
        }
    }

    pub fn profiles(&self) -> InitialProfiles {
        InitialProfiles {
            epsilon: self.profile.epsilon,
            support_radius: self.profile.support_radius,
            rho_scale: self.profile.rho_scale,
            u_scale: self.profile.u_scale,
            s_scale: self.profile.s_scale,
        }
    }

    /// Serialized echo embedded in report.json.
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let config = RunConfig::default();
        config.validate().unwrap();
        assert_eq!(config.grid.n, 4000);
        assert_eq!(config.grid.r_max, 120.0);
        assert_eq!(config.run.t_max, 100.0);
        assert_eq!(config.run.dt_obs, 0.05);
        assert_eq!(config.eos.p0, 2.0);
    }

    #[test]
    fn parse_round_trip() {
        let text = r#"
[eos]
kind = "polytropic"
gamma = 1.6

[profile]
epsilon = 0.05

[grid]
r_max = 30.0
n = 1000

[run]
t_max = 10.0
"#;
        let config = RunConfig::parse(text).unwrap();
        assert_eq!(config.eos.kind, GasKind::Polytropic);
        assert_eq!(config.eos.gamma, 1.6);
        assert_eq!(config.profile.epsilon, 0.05);
        assert_eq!(config.run.t_max, 10.0);
        // untouched defaults survive
        assert_eq!(config.run.dt_obs, 0.05);
    }

    #[test]
    fn unknown_key_reports_line() {
        let text = "[run]\nt_max = 10.0\nt_mox = 3.0\n";
        let err = RunConfig::parse(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3"), "{msg}");
        assert!(msg.contains("t_mox"), "{msg}");
    }

    #[test]
    fn unknown_section_rejected() {
        let text = "[grids]\nn = 100\n";
        assert!(RunConfig::parse(text).is_err());
    }

    #[test]
    fn domain_invariant_enforced() {
        let text = "[grid]\nr_max = 20.0\nn = 640\n[run]\nt_max = 50.0\n";
        let err = RunConfig::parse(text).unwrap_err();
        assert!(err.to_string().contains("r_max"), "{err}");
    }

    #[test]
    fn bad_eos_rejected() {
        let text = "[eos]\nkind = \"polytropic\"\ngamma = 5.0\n[grid]\nr_max = 20.0\nn = 64\n[run]\nt_max = 10.0\n";
        assert!(RunConfig::parse(text).is_err());
    }
}
