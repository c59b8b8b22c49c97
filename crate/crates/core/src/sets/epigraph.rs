//! Smooth convex scalar functions and projection onto their epigraphs.
//!
//! The nearest point of `{(s, t) : t ≥ f(s)}` to an exterior point `(s0, t0)`
//! lies on the graph at the unique root of
//!
//! ```text
//! g(u) = (u - s0) + f'(u) (f(u) - t0)
//! ```
//!
//! inside the component of `{f ≥ t0}` containing `s0`, where `g` is strictly
//! increasing. The root is found by Newton's method kept inside a bisection
//! bracket.

use crate::error::{Error, Result};

/// Absolute step tolerance of the safeguarded Newton iteration.
pub const ROOT_STEP_TOL: f64 = 1e-12;
pub const ROOT_MAX_ITERATIONS: usize = 200;

/// Built-in registry of smooth convex functions `R -> R`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScalarFunction {
    /// `exp(-s)`
    ExpNeg,
    /// `s²`
    Square,
    /// `ln(1 + exp(s))`
    Softplus,
}

impl ScalarFunction {
    pub const ALL: [ScalarFunction; 3] = [
        ScalarFunction::ExpNeg,
        ScalarFunction::Square,
        ScalarFunction::Softplus,
    ];

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "exp-neg" => Ok(ScalarFunction::ExpNeg),
            "square" => Ok(ScalarFunction::Square),
            "softplus" => Ok(ScalarFunction::Softplus),
            other => Err(Error::UnknownFunction(other.to_string())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScalarFunction::ExpNeg => "exp-neg",
            ScalarFunction::Square => "square",
            ScalarFunction::Softplus => "softplus",
        }
    }

    pub fn value(self, s: f64) -> f64 {
        self.eval(s).0
    }

    pub fn derivative(self, s: f64) -> f64 {
        self.eval(s).1
    }

    /// `(f(s), f'(s), f''(s))`.
    pub fn eval(self, s: f64) -> (f64, f64, f64) {
        match self {
            ScalarFunction::ExpNeg => {
                let e = (-s).exp();
                (e, -e, e)
            }
            ScalarFunction::Square => (s * s, 2.0 * s, 2.0),
            ScalarFunction::Softplus => {
                let value = s.max(0.0) + (-s.abs()).exp().ln_1p();
                let sig = if s >= 0.0 {
                    1.0 / (1.0 + (-s).exp())
                } else {
                    let e = s.exp();
                    e / (1.0 + e)
                };
                (value, sig, sig * (1.0 - sig))
            }
        }
    }
}

/// Projects `(s0, t0)` onto the epigraph of `f`.
///
/// Below the graph the nearest point is `(u, f(u))` with `u` a root of
/// `g(u) = (u - s0) + f'(u)(f(u) - t0)`. The root lies on the side where `f`
/// decreases, within `f(s0) - t0` of `s0`, and inside the component of
/// `{f >= t0}` containing `s0`. Newton runs from `s0`; the far end of that
/// bracket is only located and checked once a bisection step is needed.
pub fn project_onto_epigraph(f: ScalarFunction, s0: f64, t0: f64) -> Result<(f64, f64)> {
    let (f0, d0, dd0) = f.eval(s0);
    if t0 >= f0 {
        return Ok((s0, t0));
    }
    if d0 == 0.0 {
        return Ok((s0, f0));
    }
    let reach = f0 - t0;
    let toward = if d0 < 0.0 { 1.0 } else { -1.0 };
    // g has the sign of -toward at `near` and of toward at `far`.
    let mut near = s0;
    let mut far = s0 + toward * reach;
    let mut far_checked = false;
    let settle = |near: f64, far: f64| -> Result<Option<f64>> {
        settle_far(f, (s0, t0), toward, near, far).map_err(|reason| Error::RootFinder {
            s: s0,
            t: t0,
            reason: reason.into(),
        })
    };

    let (mut u, mut v, mut d1, mut d2) = (s0, f0, d0, dd0);
    for _ in 0..ROOT_MAX_ITERATIONS {
        let gu = (u - s0) + d1 * (v - t0);
        if gu == 0.0 {
            return Ok((u, v));
        }
        if gu * toward < 0.0 {
            near = u;
        } else {
            far = u;
            far_checked = true;
        }
        let dg = 1.0 + d1 * d1 + d2 * (v - t0);
        let step = gu / dg;
        if dg > 0.0 && step.abs() < ROOT_STEP_TOL {
            return Ok((u, v));
        }
        let mut next = u - step;
        let inside = (next - near) * toward > 0.0 && (far - next) * toward > 0.0;
        if !(dg > 0.0 && inside) {
            if !far_checked {
                let Some(checked) = settle(near, far)? else {
                    return Ok((s0, f0));
                };
                far = checked;
                far_checked = true;
            }
            next = 0.5 * (near + far);
        }
        (v, d1, d2) = f.eval(next);
        if v < t0 {
            // Newton left the component of {f >= t0}.
            let Some(checked) = settle(near, next)? else {
                return Ok((s0, f0));
            };
            far = checked;
            far_checked = true;
            next = 0.5 * (near + far);
            (v, d1, d2) = f.eval(next);
        }
        if (next - u).abs() < ROOT_STEP_TOL {
            return Ok((next, v));
        }
        u = next;
    }
    Err(Error::RootFinder {
        s: s0,
        t: t0,
        reason: "iteration limit reached".into(),
    })
}

/// Clips `far` to the component of `{f >= t0}` holding `near` and checks
/// that `g` changes sign. `None` means the start is on the graph up to
/// rounding.
fn settle_far(
    f: ScalarFunction,
    (s0, t0): (f64, f64),
    toward: f64,
    near: f64,
    mut far: f64,
) -> Result<Option<f64>, &'static str> {
    if f.value(far) < t0 {
        far = level_crossing(f, t0, far, near);
    }
    let (v, d1, _) = f.eval(far);
    if ((far - s0) + d1 * (v - t0)) * toward >= 0.0 {
        Ok(Some(far))
    } else if (f.value(s0) - t0) < ROOT_STEP_TOL {
        Ok(None)
    } else {
        Err("stationarity equation not bracketed")
    }
}

/// Point between `outside` (where `f < level`) and `inside` (where
/// `f ≥ level`) on the boundary of `{f ≥ level}`, returned on the inside.
fn level_crossing(f: ScalarFunction, level: f64, mut outside: f64, mut inside: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (outside + inside);
        if mid == outside || mid == inside {
            break;
        }
        if f.value(mid) >= level {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}
