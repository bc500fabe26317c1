//! Vector-field words over {Dt, Dr, X} applied to snapshot windows.
//!
//! A window holds three consecutive snapshots at uniform stride plus exact
//! first time derivatives from right-hand-side evaluation. First time
//! derivatives therefore never cost finite-difference accuracy; second and
//! mixed time derivatives fall back to centered differences across the
//! window. The scaling field is X = t Dt + r Dr.
//!
//! Radial reduction: fields are tracked as component sets whose sum of
//! squares is the rotation-invariant magnitude. A gradient on a rank-0
//! scalar contributes only the radial derivative; on higher-rank objects it
//! also contributes the geometric c/r companions, which reproduces
//! |grad w|^2 = (dW/dr)^2 + (W/r)^2 for radial vectors and
//! |Hess f|^2 = (f_rr)^2 + (f_r / r)^2 for scalars. Words that mix beyond
//! these identities use the same rule as a rotation-invariant surrogate.

use crate::error::{Error, Result};
use crate::mesh::{Parity, RadialGrid};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaOp {
    Dt,
    Dr,
    X,
}

/// A derivative word, applied right to left; at most 2 letters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaWord(pub Vec<GammaOp>);

impl GammaWord {
    pub fn new(ops: Vec<GammaOp>) -> Result<Self> {
        if ops.len() > 2 {
            return Err(Error::WordTooLong { len: ops.len() });
        }
        Ok(GammaWord(ops))
    }

    /// All words of length <= n (n <= 2): 1, 4, or 13 words.
    pub fn all_up_to(n: usize) -> Vec<GammaWord> {
        let alphabet = [GammaOp::Dt, GammaOp::Dr, GammaOp::X];
        let mut words = vec![GammaWord(vec![])];
        if n >= 1 {
            words.extend(alphabet.iter().map(|&o| GammaWord(vec![o])));
        }
        if n >= 2 {
            for &a in &alphabet {
                for &b in &alphabet {
                    words.push(GammaWord(vec![a, b]));
                }
            }
        }
        words
    }
}

/// Field values at the three window times.
#[derive(Debug, Clone)]
pub struct TimeLevels {
    pub minus: Vec<f64>,
    pub center: Vec<f64>,
    pub plus: Vec<f64>,
}

impl TimeLevels {
    pub fn constant(values: Vec<f64>) -> Self {
        TimeLevels {
            minus: values.clone(),
            plus: values.clone(),
            center: values,
        }
    }

}

/// One tracked field on the window: values, optional exact time derivative,
/// optional native radial derivative (a field whose discrete values ARE the
/// derivative, e.g. the evolved velocity for a reconstructed potential), and
/// parity under r -> -r.
#[derive(Debug, Clone)]
pub struct WindowField {
    pub values: TimeLevels,
    pub dt: Option<TimeLevels>,
    pub dr: Option<Box<WindowField>>,
    pub parity: Parity,
}

impl WindowField {
    /// A time-independent field (exact time derivative zero), for tests and
    /// synthetic inputs.
    pub fn static_field(values: Vec<f64>, parity: Parity) -> Self {
        let zeros = vec![0.0; values.len()];
        WindowField {
            values: TimeLevels::constant(values),
            dt: Some(TimeLevels::constant(zeros)),
            dr: None,
            parity,
        }
    }
}

/// Window context: center time, stride, grid.
#[derive(Debug, Clone)]
pub struct WindowCtx {
    pub t: f64,
    pub dt_obs: f64,
    pub grid: Arc<RadialGrid>,
}

impl WindowCtx {
    fn times(&self) -> [f64; 3] {
        [self.t - self.dt_obs, self.t, self.t + self.dt_obs]
    }
}

/// Intermediate component with full window levels.
#[derive(Debug, Clone)]
struct Component {
    values: TimeLevels,
    dt: Option<TimeLevels>,
    /// Native radial derivative, used instead of the stencil when present.
    dr: Option<Box<Component>>,
    parity: Parity,
}

impl Component {
    fn from_field(field: &WindowField) -> Self {
        Component {
            values: field.values.clone(),
            dt: field.dt.clone(),
            dr: field.dr.as_ref().map(|f| Box::new(Component::from_field(f))),
            parity: field.parity,
        }
    }

    /// Native or stencil radial derivative at all levels.
    fn deriv(&self, ctx: &WindowCtx) -> Component {
        match &self.dr {
            Some(link) => (**link).clone(),
            None => Component {
                values: deriv_levels(ctx, &self.values, self.parity),
                dt: self.dt.as_ref().map(|d| deriv_levels(ctx, d, self.parity)),
                dr: None,
                parity: self.parity.flip(),
            },
        }
    }
}

/// Rotation-invariant reduction of a word applied to a field: the squared
/// magnitude is the sum of squared components.
#[derive(Debug, Clone)]
pub struct Reduced {
    components: Vec<Component>,
    rank: usize,
}

/// Final (center-time) reduction.
#[derive(Debug, Clone)]
pub struct CenterReduced {
    pub components: Vec<Vec<f64>>,
}

impl CenterReduced {
    /// Pointwise squared magnitude.
    pub fn magnitude_sq(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for c in &self.components {
            for (o, &v) in out.iter_mut().zip(c) {
                *o += v * v;
            }
        }
        out
    }
}

fn deriv_levels(ctx: &WindowCtx, f: &TimeLevels, parity: Parity) -> TimeLevels {
    TimeLevels {
        minus: ctx.grid.deriv_r(&f.minus, parity),
        center: ctx.grid.deriv_r(&f.center, parity),
        plus: ctx.grid.deriv_r(&f.plus, parity),
    }
}

fn over_r_levels(ctx: &WindowCtx, f: &TimeLevels) -> TimeLevels {
    let div = |v: &[f64]| -> Vec<f64> {
        v.iter().zip(ctx.grid.r()).map(|(&x, &r)| x / r).collect()
    };
    TimeLevels {
        minus: div(&f.minus),
        center: div(&f.center),
        plus: div(&f.plus),
    }
}

impl Reduced {
    pub fn base(field: &WindowField, rank: usize) -> Self {
        Reduced {
            components: vec![Component::from_field(field)],
            rank,
        }
    }

    /// Applies one word letter keeping all three window levels. Dt and X
    /// require exact time derivatives (they are only applied as the inner
    /// letter of a word, where the base fields provide them).
    pub fn apply_levels(&self, ctx: &WindowCtx, op: GammaOp) -> Reduced {
        match op {
            GammaOp::Dt => Reduced {
                components: self
                    .components
                    .iter()
                    .map(|c| Component {
                        values: c
                            .dt
                            .clone()
                            .expect("inner Dt requires exact time derivatives"),
                        dt: None,
                        // d/dt and d/dr commute: the derivative link of the
                        // time derivative is the time derivative of the link
                        dr: c.dr.as_ref().and_then(|link| {
                            link.dt.clone().map(|dt| {
                                Box::new(Component {
                                    values: dt,
                                    dt: None,
                                    dr: None,
                                    parity: link.parity,
                                })
                            })
                        }),
                        parity: c.parity,
                    })
                    .collect(),
                rank: self.rank,
            },
            GammaOp::Dr => {
                let mut components = Vec::new();
                for c in &self.components {
                    components.push(c.deriv(ctx));
                    if self.rank >= 1 {
                        components.push(Component {
                            values: over_r_levels(ctx, &c.values),
                            dt: c.dt.as_ref().map(|d| over_r_levels(ctx, d)),
                            dr: None,
                            parity: c.parity.flip(),
                        });
                    }
                }
                Reduced {
                    components,
                    rank: self.rank + 1,
                }
            }
            GammaOp::X => {
                let times = ctx.times();
                Reduced {
                    components: self
                        .components
                        .iter()
                        .map(|c| {
                            let dt = c
                                .dt
                                .as_ref()
                                .expect("inner X requires exact time derivatives");
                            let dr = c.deriv(ctx).values;
                            let x_at = |tau: f64, ft: &[f64], fr: &[f64]| -> Vec<f64> {
                                ft.iter()
                                    .zip(fr)
                                    .zip(ctx.grid.r())
                                    .map(|((&a, &b), &r)| tau * a + r * b)
                                    .collect()
                            };
                            Component {
                                values: TimeLevels {
                                    minus: x_at(times[0], &dt.minus, &dr.minus),
                                    center: x_at(times[1], &dt.center, &dr.center),
                                    plus: x_at(times[2], &dt.plus, &dr.plus),
                                },
                                dt: None,
                                dr: None,
                                parity: c.parity,
                            }
                        })
                        .collect(),
                    rank: self.rank,
                }
            }
        }
    }

    fn component_dt_center(&self, ctx: &WindowCtx, c: &Component) -> Vec<f64> {
        match &c.dt {
            Some(d) => d.center.clone(),
            None => c
                .values
                .plus
                .iter()
                .zip(&c.values.minus)
                .map(|(&p, &m)| (p - m) / (2.0 * ctx.dt_obs))
                .collect(),
        }
    }

    /// Applies the final (outermost) letter, producing center-time values.
    pub fn apply_center(&self, ctx: &WindowCtx, op: GammaOp) -> CenterReduced {
        match op {
            GammaOp::Dt => CenterReduced {
                components: self
                    .components
                    .iter()
                    .map(|c| self.component_dt_center(ctx, c))
                    .collect(),

            },
            GammaOp::Dr => {
                let mut components = Vec::new();
                for c in &self.components {
                    components.push(match &c.dr {
                        Some(link) => link.values.center.clone(),
                        None => ctx.grid.deriv_r(&c.values.center, c.parity),
                    });
                    if self.rank >= 1 {
                        components.push(
                            c.values
                                .center
                                .iter()
                                .zip(ctx.grid.r())
                                .map(|(&x, &r)| x / r)
                                .collect(),
                        );
                    }
                }
                CenterReduced {
                    components,

                }
            }
            GammaOp::X => CenterReduced {
                components: self
                    .components
                    .iter()
                    .map(|c| {
                        let ft = self.component_dt_center(ctx, c);
                        let fr = match &c.dr {
                            Some(link) => link.values.center.clone(),
                            None => ctx.grid.deriv_r(&c.values.center, c.parity),
                        };
                        ft.iter()
                            .zip(&fr)
                            .zip(ctx.grid.r())
                            .map(|((&a, &b), &r)| ctx.t * a + r * b)
                            .collect()
                    })
                    .collect(),

            },
        }
    }

    /// Divergence of a rank >= 1 object: `d c/dr + c/r` per component.
    pub fn divergence_center(&self, ctx: &WindowCtx) -> CenterReduced {
        CenterReduced {
            components: self
                .components
                .iter()
                .map(|c| {
                    let dr = ctx.grid.deriv_r(&c.values.center, c.parity);
                    dr.iter()
                        .zip(&c.values.center)
                        .zip(ctx.grid.r())
                        .map(|((&d, &x), &r)| d + x / r)
                        .collect()
                })
                .collect(),

        }
    }

    /// Probe alias for [`Reduced::z_center`].
    pub fn z_center_pub(&self, ctx: &WindowCtx) -> CenterReduced {
        self.z_center(ctx)
    }

    /// Good derivative Z = (Dt + Dr) with the geometric companions of the
    /// spatial part for rank >= 1 objects.
    pub fn z_center(&self, ctx: &WindowCtx) -> CenterReduced {
        let mut components = Vec::new();
        for c in &self.components {
            let ft = self.component_dt_center(ctx, c);
            let fr = match &c.dr {
                Some(link) => link.values.center.clone(),
                None => ctx.grid.deriv_r(&c.values.center, c.parity),
            };
            components.push(ft.iter().zip(&fr).map(|(&a, &b)| a + b).collect());
            if self.rank >= 1 {
                components.push(
                    c.values
                        .center
                        .iter()
                        .zip(ctx.grid.r())
                        .map(|(&x, &r)| x / r)
                        .collect(),
                );
            }
        }
        CenterReduced {
            components,

        }
    }

    /// Center values without applying any further letter.
    pub fn center(&self) -> CenterReduced {
        CenterReduced {
            components: self.components.iter().map(|c| c.values.center.clone()).collect(),

        }
    }

    /// Exact center time derivative per component (falling back to window
    /// differencing).
    pub fn dt_center(&self, ctx: &WindowCtx) -> CenterReduced {
        CenterReduced {
            components: self
                .components
                .iter()
                .map(|c| self.component_dt_center(ctx, c))
                .collect(),

        }
    }

    /// Applies all letters except the outermost (right to left), keeping
    /// window levels for the final application.
    fn apply_inner(field: &WindowField, rank: usize, ctx: &WindowCtx, word: &GammaWord) -> Reduced {
        let mut red = Reduced::base(field, rank);
        for &op in word.0.iter().skip(1).rev() {
            red = red.apply_levels(ctx, op);
        }
        red
    }

    /// Applies the whole word (right to left) keeping window levels; valid
    /// for words of length <= 1, which is all the trailing-operator energies
    /// need.
    pub fn apply_word_levels(
        field: &WindowField,
        rank: usize,
        ctx: &WindowCtx,
        word: &GammaWord,
    ) -> Reduced {
        let mut red = Reduced::base(field, rank);
        for &op in word.0.iter().rev() {
            red = red.apply_levels(ctx, op);
        }
        red
    }
}

/// Applies a word to a field and returns the reduced component set at the
/// window center.
pub fn reduce_word(
    field: &WindowField,
    rank: usize,
    ctx: &WindowCtx,
    word: &GammaWord,
) -> CenterReduced {
    let red = Reduced::apply_inner(field, rank, ctx, word);
    match word.0.first() {
        None => red.center(),
        Some(&op) => red.apply_center(ctx, op),
    }
}

/// The word applied to the field's amplitude alone (no geometric
/// companions): the first component of the reduction.
pub fn gamma_apply(
    field: &WindowField,
    ctx: &WindowCtx,
    word: &GammaWord,
) -> Result<Vec<f64>> {
    if word.0.len() > 2 {
        return Err(Error::WordTooLong { len: word.0.len() });
    }
    // rank 0 keeps the reduction to pure amplitude composition
    let reduced = reduce_word(field, 0, ctx, word);
    Ok(reduced.components.into_iter().next().unwrap())
}
