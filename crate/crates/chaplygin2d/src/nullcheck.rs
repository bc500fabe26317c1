//! Exact verification of the first and second null conditions for the
//! cubic and quartic coefficient tensors of quasilinear wave equations.
//!
//! On the wave cone xi = (-1, cos th, sin th) the contracted symbol is a
//! trigonometric polynomial of degree <= 3 (cubic) or <= 4 (quartic), so 16
//! equispaced samples recover its Fourier coefficients exactly. The residual
//! is the largest coefficient magnitude; no sampling gap, no tolerance
//! tuning.

use crate::eos::{GasKind, GasModel};
use crate::error::{Error, Result};

const SAMPLES: usize = 16;
const HARMONICS: usize = 7;

/// Coefficients g[i][j][k] of `sum g_i^{jk} d_i w d2_{jk} w`, symmetric in
/// the derivative pair (j, k). Index 0 is time.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicForm {
    pub g: [[[f64; 3]; 3]; 3],
}

/// Coefficients g[i][j][k][l] of `sum g_{ij}^{kl} d_k w d_l w d2_{ij} w`,
/// symmetric in the derivative pair (i, j) and the factor pair (k, l).
#[derive(Debug, Clone, PartialEq)]
pub struct QuarticForm {
    pub g: [[[[f64; 3]; 3]; 3]; 3],
}

impl CubicForm {
    pub fn zero() -> Self {
        CubicForm {
            g: [[[0.0; 3]; 3]; 3],
        }
    }

    /// Adds `coeff * d_i w d2_{jk} w`, distributing over the symmetric
    /// derivative pair.
    pub fn add_term(&mut self, i: usize, j: usize, k: usize, coeff: f64) {
        if j == k {
            self.g[i][j][k] += coeff;
        } else {
            self.g[i][j][k] += 0.5 * coeff;
            self.g[i][k][j] += 0.5 * coeff;
        }
    }

    pub fn check_symmetry(&self) -> Result<()> {
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    if (self.g[i][j][k] - self.g[i][k][j]).abs() > 0.0 {
                        return Err(Error::SymmetryViolation {
                            index: vec![i, j, k],
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Symbol N3(xi) = sum g_i^{jk} xi_i xi_j xi_k.
    pub fn symbol(&self, xi: [f64; 3]) -> f64 {
        let mut acc = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    acc += self.g[i][j][k] * xi[i] * xi[j] * xi[k];
                }
            }
        }
        acc
    }
}

impl QuarticForm {
    pub fn zero() -> Self {
        QuarticForm {
            g: [[[[0.0; 3]; 3]; 3]; 3],
        }
    }

    /// Adds `coeff * d_k w d_l w d2_{ij} w`, distributing over both
    /// symmetric pairs.
    pub fn add_term(&mut self, i: usize, j: usize, k: usize, l: usize, coeff: f64) {
        let derivs: &[(usize, usize)] = if i == j { &[(i, j)] } else { &[(i, j), (j, i)] };
        let factors: &[(usize, usize)] = if k == l { &[(k, l)] } else { &[(k, l), (l, k)] };
        let share = coeff / (derivs.len() * factors.len()) as f64;
        for &(a, b) in derivs {
            for &(c, d) in factors {
                self.g[a][b][c][d] += share;
            }
        }
    }

    pub fn check_symmetry(&self) -> Result<()> {
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        if (self.g[i][j][k][l] - self.g[j][i][k][l]).abs() > 0.0
                            || (self.g[i][j][k][l] - self.g[i][j][l][k]).abs() > 0.0
                        {
                            return Err(Error::SymmetryViolation {
                                index: vec![i, j, k, l],
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn symbol(&self, xi: [f64; 3]) -> f64 {
        let mut acc = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        acc += self.g[i][j][k][l] * xi[i] * xi[j] * xi[k] * xi[l];
                    }
                }
            }
        }
        acc
    }
}

fn cone_xi(theta: f64) -> [f64; 3] {
    [-1.0, theta.cos(), theta.sin()]
}

/// Exact Fourier coefficients (a_0, a_k, b_k for k = 1..=HARMONICS) of a
/// degree-bounded trig polynomial sampled at 16 equispaced angles.
fn fourier_coefficients<F: Fn(f64) -> f64>(f: F) -> Vec<f64> {
    let n = SAMPLES as f64;
    let samples: Vec<f64> = (0..SAMPLES)
        .map(|m| f(2.0 * std::f64::consts::PI * m as f64 / n))
        .collect();
    let mut coeffs = Vec::with_capacity(1 + 2 * HARMONICS);
    coeffs.push(samples.iter().sum::<f64>() / n);
    for k in 1..=HARMONICS {
        let (mut a, mut b) = (0.0, 0.0);
        for (m, &s) in samples.iter().enumerate() {
            let ang = 2.0 * std::f64::consts::PI * (k * m) as f64 / n;
            a += s * ang.cos();
            b += s * ang.sin();
        }
        coeffs.push(2.0 * a / n);
        coeffs.push(2.0 * b / n);
    }
    coeffs
}

/// Reconstructs the trig polynomial from recovered coefficients (test aid).
pub fn fourier_reconstruct(coeffs: &[f64], theta: f64) -> f64 {
    let mut acc = coeffs[0];
    for k in 1..=HARMONICS {
        acc += coeffs[2 * k - 1] * (k as f64 * theta).cos();
        acc += coeffs[2 * k] * (k as f64 * theta).sin();
    }
    acc
}

pub fn cubic_coefficients(form: &CubicForm) -> Result<Vec<f64>> {
    form.check_symmetry()?;
    Ok(fourier_coefficients(|th| form.symbol(cone_xi(th))))
}

pub fn quartic_coefficients(form: &QuarticForm) -> Result<Vec<f64>> {
    form.check_symmetry()?;
    Ok(fourier_coefficients(|th| form.symbol(cone_xi(th))))
}

/// Max Fourier coefficient magnitude of the cubic symbol on the null cone.
pub fn cubic_residual(form: &CubicForm) -> Result<f64> {
    Ok(cubic_coefficients(form)?
        .iter()
        .fold(0.0f64, |m, &c| m.max(c.abs())))
}

/// Max Fourier coefficient magnitude of the quartic symbol on the null cone.
pub fn quartic_residual(form: &QuarticForm) -> Result<f64> {
    Ok(quartic_coefficients(form)?
        .iter()
        .fold(0.0f64, |m, &c| m.max(c.abs())))
}

/// Coefficient tensors of the potential equation's quadratic and cubic
/// nonlinearities.
///
/// Chaplygin: `2 sum_j d_j phi d2_{tj} phi - 2 d_t phi Lap phi` and
/// `sum_{jk} d_j phi d_k phi d2_{jk} phi - |grad phi|^2 Lap phi`; both vanish
/// identically on the cone. The polytropic surrogate keeps the same tensors
/// but adds the leading non-null term `-(gamma - 1) d_t phi Lap phi`.
pub fn model_forms(model: &GasModel) -> (CubicForm, QuarticForm) {
    let mut cubic = CubicForm::zero();
    for j in 1..=2 {
        cubic.add_term(j, 0, j, 2.0); // 2 d_j phi d2_{tj} phi
        cubic.add_term(0, j, j, -2.0); // -2 d_t phi d2_{jj} phi
    }
    if model.kind == GasKind::Polytropic {
        for j in 1..=2 {
            cubic.add_term(0, j, j, -(model.gamma - 1.0));
        }
    }

    let mut quartic = QuarticForm::zero();
    for j in 1..=2 {
        for k in 1..=2 {
            quartic.add_term(j, k, j, k, 1.0); // d_j phi d_k phi d2_{jk} phi
            quartic.add_term(j, j, k, k, -1.0); // -(d_k phi)^2 d2_{jj} phi
        }
    }
    (cubic, quartic)
}

/// The explicit null sets used in the basic energy estimate:
/// `g_i^{0i} = g_i^{i0} = -1, g_0^{ii} = 2` and
/// `g_{ij}^{ij} = g_{ij}^{ji} = -1/2, g_{ii}^{jj} = 1` (overlaps summed).
pub fn energy_estimate_forms() -> (CubicForm, QuarticForm) {
    let mut cubic = CubicForm::zero();
    for i in 1..=2 {
        cubic.g[i][0][i] += -1.0;
        cubic.g[i][i][0] += -1.0;
        cubic.g[0][i][i] += 2.0;
    }
    let mut quartic = QuarticForm::zero();
    for i in 1..=2 {
        for j in 1..=2 {
            quartic.g[i][j][i][j] += -0.5;
            quartic.g[i][j][j][i] += -0.5;
            quartic.g[i][i][j][j] += 1.0;
        }
    }
    (cubic, quartic)
}

/// Report emitted by the `nullcheck` CLI subcommand.
#[derive(Debug, Clone, serde::Serialize)]
pub struct NullcheckReport {
    pub model: String,
    pub gamma: Option<f64>,
    pub cubic_residual: f64,
    pub quartic_residual: f64,
}

pub fn nullcheck_report(model: &GasModel) -> Result<NullcheckReport> {
    let (cubic, quartic) = model_forms(model);
    Ok(NullcheckReport {
        model: model.kind.to_string(),
        gamma: match model.kind {
            GasKind::Polytropic => Some(model.gamma),
            GasKind::Chaplygin => None,
        },
        cubic_residual: cubic_residual(&cubic)?,
        quartic_residual: quartic_residual(&quartic)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn chap() -> GasModel {
        GasModel::chaplygin(2.0, 1.0, 0.0, 1.0).unwrap()
    }

    fn poly(gamma: f64) -> GasModel {
        GasModel::polytropic(gamma, 1.0, 0.0, 1.0).unwrap()
    }

    #[test]
    fn zero_forms_are_null() {
        assert_eq!(cubic_residual(&CubicForm::zero()).unwrap(), 0.0);
        assert_eq!(quartic_residual(&QuarticForm::zero()).unwrap(), 0.0);
    }

    #[test]
    fn pure_time_terms() {
        let mut c = CubicForm::zero();
        c.g[0][0][0] = 1.0;
        // xi_0^3 = -1 on the cone
        assert!((cubic_residual(&c).unwrap() - 1.0).abs() < 1e-14);
        let mut q = QuarticForm::zero();
        q.g[0][0][0][0] = 1.0;
        assert!((quartic_residual(&q).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn energy_estimate_sets_are_null() {
        let (c, q) = energy_estimate_forms();
        assert!(cubic_residual(&c).unwrap() < 1e-13);
        assert!(quartic_residual(&q).unwrap() < 1e-13);
    }

    #[test]
    fn chaplygin_forms_are_null() {
        let (c, q) = model_forms(&chap());
        assert!(cubic_residual(&c).unwrap() < 1e-13);
        assert!(quartic_residual(&q).unwrap() < 1e-13);
    }

    #[test]
    fn chaplygin_cubic_identically_zero_off_cone() {
        let (c, _) = model_forms(&chap());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let xi = [
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            ];
            assert!(c.symbol(xi).abs() < 1e-13, "symbol({xi:?})");
        }
    }

    #[test]
    fn polytropic_residual_is_gamma_minus_one() {
        // Oracle: the surrogate's non-null part is -(gamma-1) xi_0 |xi'|^2,
        // which equals gamma - 1 at xi_0 = -1, |xi'| = 1 (constant in theta,
        // so the residual is its mean coefficient).
        for gamma in [1.1, 1.4, 2.0, 2.9] {
            let (c, q) = model_forms(&poly(gamma));
            let res = cubic_residual(&c).unwrap();
            assert!(
                (res - (gamma - 1.0)).abs() < 1e-12,
                "gamma {gamma}: residual {res}"
            );
            assert!(quartic_residual(&q).unwrap() < 1e-13);
        }
    }

    #[test]
    fn gamma_to_one_limit() {
        let (c, _) = model_forms(&poly(1.0 + 1e-12));
        assert!(cubic_residual(&c).unwrap() < 1e-11);
    }

    #[test]
    fn fourier_recovery_matches_dense_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let mut c = CubicForm::zero();
            let mut q = QuarticForm::zero();
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        c.add_term(i, j, k, rng.gen_range(-1.0..1.0));
                        for l in 0..3 {
                            q.add_term(i, j, k, l, rng.gen_range(-1.0..1.0));
                        }
                    }
                }
            }
            let cc = cubic_coefficients(&c).unwrap();
            let qc = quartic_coefficients(&q).unwrap();
            for m in 0..10_000 {
                let th = 2.0 * std::f64::consts::PI * m as f64 / 10_000.0;
                let xi = [-1.0, th.cos(), th.sin()];
                assert!((fourier_reconstruct(&cc, th) - c.symbol(xi)).abs() < 1e-13);
                assert!((fourier_reconstruct(&qc, th) - q.symbol(xi)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn residual_triangle_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let mut f = CubicForm::zero();
            let mut g = CubicForm::zero();
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        f.add_term(i, j, k, rng.gen_range(-1.0..1.0));
                        g.add_term(i, j, k, rng.gen_range(-1.0..1.0));
                    }
                }
            }
            let (a, b): (f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let mut combo = CubicForm::zero();
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        combo.g[i][j][k] = a * f.g[i][j][k] + b * g.g[i][j][k];
                    }
                }
            }
            let lhs = cubic_residual(&combo).unwrap();
            let rhs = a.abs() * cubic_residual(&f).unwrap()
                + b.abs() * cubic_residual(&g).unwrap();
            assert!(lhs <= rhs + 1e-13);
        }
    }

    #[test]
    fn symmetry_violation_detected() {
        let mut c = CubicForm::zero();
        c.g[0][1][2] = 1.0; // missing the (2,1) mirror
        assert!(matches!(
            cubic_residual(&c),
            Err(Error::SymmetryViolation { .. })
        ));
        let mut q = QuarticForm::zero();
        q.g[0][1][0][0] = 1.0;
        assert!(matches!(
            quartic_residual(&q),
            Err(Error::SymmetryViolation { .. })
        ));
    }
}
