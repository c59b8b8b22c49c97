//! Closed-form distances `d(C1, C2) = inf{|x - y| : x ∈ C1, y ∈ C2}` and the
//! least-norm element of `closure(C2 - C1)`.
//!
//! Supported pairs (either order, translations folded in): ball/ball,
//! ball/halfspace, ball/box, halfspace/halfspace, hyperplane/hyperplane,
//! affine/affine, box/box, and the `exp-neg` epigraph against a halfspace
//! bounding `t` from one side. Anything else yields [`Error::NoClosedForm`];
//! [`grid_distance`] is an approximate search for planar exploration.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{AffineSubspace, Ball, BoxSet, ConvexSet, Halfspace, Hyperplane, ScalarFunction};
use crate::error::{Error, Result};
use crate::space::Point;

/// Exact `d(C1, C2)`. `witness` is present iff the infimum is attained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceAnswer {
    pub value: f64,
    pub attained: bool,
    /// `(p, q)` with `p ∈ C1`, `q ∈ C2` and `|p - q| = value`.
    pub witness: Option<(Point, Point)>,
}

impl DistanceAnswer {
    fn attained(p: Point, q: Point) -> Self {
        DistanceAnswer {
            value: p.distance(&q),
            attained: true,
            witness: Some((p, q)),
        }
    }

    fn swapped(self) -> Self {
        DistanceAnswer {
            witness: self.witness.map(|(p, q)| (q, p)),
            ..self
        }
    }
}

/// Distance between two sets from the closed-form table.
pub fn analytic_distance(a: &ConvexSet, b: &ConvexSet) -> Result<DistanceAnswer> {
    Ok(solve_pair(a, b)?.0)
}

/// Point of least norm in `closure(b - a)`; its norm is `d(a, b)`.
pub fn least_norm_difference(a: &ConvexSet, b: &ConvexSet) -> Result<Point> {
    Ok(solve_pair(a, b)?.1)
}

fn solve_pair(a: &ConvexSet, b: &ConvexSet) -> Result<(DistanceAnswer, Point)> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: a.ambient_dim(),
            found: b.ambient_dim(),
        });
    }
    let (ca, cb) = (a.canonical(), b.canonical());

    // Unattained cases carry their own least-norm vector.
    if let Some(res) = epigraph_pair(&ca, &cb)? {
        return Ok(res);
    }
    if let Some(res) = epigraph_pair(&cb, &ca)? {
        let (ans, v) = res;
        // + 0.0 clears negative zeros.
        return Ok((ans.swapped(), v.map(|_, c| -c + 0.0)));
    }

    let answer = attained_pair(&ca, &cb)
        .or_else(|| attained_pair(&cb, &ca).map(DistanceAnswer::swapped))
        .ok_or_else(|| Error::NoClosedForm(a.kind().into(), b.kind().into()))?;
    let (p, q) = answer
        .witness
        .clone()
        .expect("attained answers carry witnesses");
    Ok((answer, &q - &p))
}

fn attained_pair(a: &ConvexSet, b: &ConvexSet) -> Option<DistanceAnswer> {
    use ConvexSet as S;
    Some(match (a, b) {
        (S::Ball(x), S::Ball(y)) => ball_ball(x, y),
        (S::Ball(x), S::Halfspace(h)) => ball_halfspace(x, h),
        (S::Ball(x), S::Box(bx)) => ball_box(x, bx),
        (S::Halfspace(x), S::Halfspace(y)) => halfspace_halfspace(x, y),
        (S::Hyperplane(x), S::Hyperplane(y)) => hyperplane_hyperplane(x, y),
        (S::AffineSubspace(x), S::AffineSubspace(y)) => affine_affine(x, y),
        (S::Box(x), S::Box(y)) => box_box(x, y),
        _ => return None,
    })
}

fn ball_ball(a: &Ball, b: &Ball) -> DistanceAnswer {
    let rel = &b.center - &a.center;
    let gap = rel.norm();
    if gap == 0.0 {
        return DistanceAnswer::attained(a.center.clone(), a.center.clone());
    }
    let dir = rel.scale(1.0 / gap);
    if gap <= a.radius + b.radius {
        let common = if a.radius >= gap {
            b.center.clone()
        } else {
            a.center.add_scaled(a.radius, &dir)
        };
        return DistanceAnswer::attained(common.clone(), common);
    }
    DistanceAnswer::attained(
        a.center.add_scaled(a.radius, &dir),
        b.center.add_scaled(-b.radius, &dir),
    )
}

fn ball_halfspace(a: &Ball, h: &Halfspace) -> DistanceAnswer {
    let unit = h.normal.scale(1.0 / h.normal_sq.sqrt());
    let sigma = h.signed_distance(&a.center);
    if sigma <= a.radius {
        let common = a.center.add_scaled(-sigma.max(0.0), &unit);
        return DistanceAnswer::attained(common.clone(), common);
    }
    DistanceAnswer::attained(
        a.center.add_scaled(-a.radius, &unit),
        a.center.add_scaled(-sigma, &unit),
    )
}

fn ball_box(a: &Ball, b: &BoxSet) -> DistanceAnswer {
    let q = b.clamp(&a.center);
    let gap = q.distance(&a.center);
    if gap <= a.radius {
        return DistanceAnswer::attained(q.clone(), q);
    }
    let p = a.center.add_scaled(a.radius / gap, &(&q - &a.center));
    DistanceAnswer::attained(p, q)
}

fn box_box(a: &BoxSet, b: &BoxSet) -> DistanceAnswer {
    let d = a.lower.dim();
    let mut p = Vec::with_capacity(d);
    let mut q = Vec::with_capacity(d);
    for i in 0..d {
        if a.upper[i] < b.lower[i] {
            p.push(a.upper[i]);
            q.push(b.lower[i]);
        } else if b.upper[i] < a.lower[i] {
            p.push(a.lower[i]);
            q.push(b.upper[i]);
        } else {
            let common = a.lower[i].max(b.lower[i]);
            p.push(common);
            q.push(common);
        }
    }
    DistanceAnswer::attained(Point::from_iter_unchecked(p), Point::from_iter_unchecked(q))
}

fn parallel(n1: &Point, n2: &Point) -> bool {
    let cos = n1.dot(n2) / (n1.norm() * n2.norm());
    cos.abs() >= 1.0 - 1e-12
}

/// A point `x ∈ span{n1, n2}` with `⟨n1,x⟩ = b1` and `⟨n2,x⟩ = b2`.
fn two_plane_point(n1: &Point, b1: f64, n2: &Point, b2: f64) -> Point {
    let (g11, g12, g22) = (n1.dot(n1), n1.dot(n2), n2.dot(n2));
    let det = g11 * g22 - g12 * g12;
    let alpha = (b1 * g22 - b2 * g12) / det;
    let beta = (g11 * b2 - g12 * b1) / det;
    n1.scale(alpha).add_scaled(beta, n2)
}

fn halfspace_halfspace(a: &Halfspace, b: &Halfspace) -> DistanceAnswer {
    if !parallel(&a.normal, &b.normal) {
        let x = two_plane_point(&a.normal, a.offset, &b.normal, b.offset);
        return DistanceAnswer::attained(x.clone(), x);
    }
    let na = a.normal_sq.sqrt();
    let unit = a.normal.scale(1.0 / na);
    let upper_a = a.offset / na;
    let nb = b.normal_sq.sqrt();
    if a.normal.dot(&b.normal) > 0.0 {
        let x = unit.scale(upper_a.min(b.offset / nb));
        return DistanceAnswer::attained(x.clone(), x);
    }
    // b is {⟨unit, x⟩ ≥ lower_b}.
    let lower_b = -b.offset / nb;
    if lower_b <= upper_a {
        let x = unit.scale(upper_a);
        return DistanceAnswer::attained(x.clone(), x);
    }
    DistanceAnswer::attained(unit.scale(upper_a), unit.scale(lower_b))
}

fn hyperplane_hyperplane(a: &Hyperplane, b: &Hyperplane) -> DistanceAnswer {
    if !parallel(&a.normal, &b.normal) {
        let x = two_plane_point(&a.normal, a.offset, &b.normal, b.offset);
        return DistanceAnswer::attained(x.clone(), x);
    }
    let na = a.normal_sq.sqrt();
    let unit = a.normal.scale(1.0 / na);
    let sign = a.normal.dot(&b.normal).signum();
    let level_a = a.offset / na;
    let level_b = sign * b.offset / b.normal_sq.sqrt();
    if level_a == level_b {
        let x = unit.scale(level_a);
        return DistanceAnswer::attained(x.clone(), x);
    }
    DistanceAnswer::attained(unit.scale(level_a), unit.scale(level_b))
}

/// Least squares `U s - V t ≈ anchor_b - anchor_a` over orthonormal bases.
fn affine_affine(a: &AffineSubspace, b: &AffineSubspace) -> DistanceAnswer {
    let d = a.anchor.dim();
    let (ka, kb) = (a.rank(), b.rank());
    if ka + kb == 0 {
        return DistanceAnswer::attained(a.anchor.clone(), b.anchor.clone());
    }
    let m = DMatrix::from_fn(d, ka + kb, |r, c| {
        if c < ka {
            a.orthonormal[c][r]
        } else {
            -b.orthonormal[c - ka][r]
        }
    });
    let rhs = DVector::from_iterator(d, (&b.anchor - &a.anchor).coords().iter().copied());
    let coeffs = m
        .svd(true, true)
        .solve(&rhs, super::RANK_TOL)
        .expect("both factors requested");
    let p = a
        .orthonormal
        .iter()
        .enumerate()
        .fold(a.anchor.clone(), |acc, (i, e)| acc.add_scaled(coeffs[i], e));
    let q = b
        .orthonormal
        .iter()
        .enumerate()
        .fold(b.anchor.clone(), |acc, (i, e)| {
            acc.add_scaled(coeffs[ka + i], e)
        });
    DistanceAnswer::attained(p, q)
}

/// `exp-neg` epigraph (possibly translated) against a halfspace whose normal
/// is vertical. Returns the answer for the order (epigraph, halfspace).
fn epigraph_pair(epi: &ConvexSet, other: &ConvexSet) -> Result<Option<(DistanceAnswer, Point)>> {
    let (function, shift) = match epi {
        ConvexSet::Epigraph1D(f) => (*f, Point::zeros(2)),
        ConvexSet::Translate(t) => match t.inner() {
            ConvexSet::Epigraph1D(f) => (*f, t.shift().clone()),
            _ => return Ok(None),
        },
        _ => return Ok(None),
    };
    if function != ScalarFunction::ExpNeg {
        return Ok(None);
    }
    // Work in the epigraph's own frame.
    let ConvexSet::Halfspace(h) = other.translated(&-&shift)? else {
        return Ok(None);
    };
    let (ns, nt) = (h.normal[0], h.normal[1]);
    if ns.abs() > 1e-14 * nt.abs() || nt == 0.0 {
        return Ok(None);
    }
    let level = h.offset / nt;
    let back = |x: f64, y: f64| &Point::from_iter_unchecked([x, y]) + &shift;

    if nt < 0.0 {
        // {t ≥ level} always meets the epigraph.
        let x = back(0.0, level.max(1.0));
        return Ok(Some((
            DistanceAnswer::attained(x.clone(), x),
            Point::zeros(2),
        )));
    }
    if level > 0.0 {
        let x = back(-level.ln(), level);
        return Ok(Some((
            DistanceAnswer::attained(x.clone(), x),
            Point::zeros(2),
        )));
    }
    // {t ≤ level ≤ 0}: inf over s of exp(-s) - level is -level, never reached.
    // closure(H - epi) = {τ ≤ level}, least-norm element (0, level).
    let answer = DistanceAnswer {
        value: 0.0 - level,
        attained: false,
        witness: None,
    };
    Ok(Some((answer, Point::from_iter_unchecked([0.0, level]))))
}

/// Parameters of the planar grid search fallback.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSearch {
    pub lower: [f64; 2],
    pub upper: [f64; 2],
    /// Grid points per axis.
    pub steps: usize,
    /// Halvings of the pattern-search step after the grid pass.
    pub refinements: usize,
}

impl Default for GridSearch {
    fn default() -> Self {
        GridSearch {
            lower: [-10.0, -10.0],
            upper: [10.0, 10.0],
            steps: 201,
            refinements: 40,
        }
    }
}

/// Approximate distance from [`grid_distance`]; `tolerance` is the final
/// pattern-search step, not a certified bound.
#[derive(Clone, Debug, PartialEq)]
pub struct ApproxDistance {
    pub value: f64,
    pub tolerance: f64,
    pub p: Point,
    pub q: Point,
}

/// Minimizes `|P_a z - P_b P_a z|` over a planar grid of seeds `z`, then
/// refines the best seed by coordinate pattern search.
pub fn grid_distance(a: &ConvexSet, b: &ConvexSet, search: &GridSearch) -> Result<ApproxDistance> {
    for set in [a, b] {
        if set.ambient_dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: set.ambient_dim(),
            });
        }
    }
    if search.steps < 2 {
        return Err(Error::Precondition(
            "grid needs at least 2 steps per axis".into(),
        ));
    }
    let eval = |z: &Point| -> Result<(f64, Point, Point)> {
        let p = a.project(z)?;
        let q = b.project(&p)?;
        Ok((p.distance(&q), p, q))
    };
    let h = [0, 1].map(|i| (search.upper[i] - search.lower[i]) / (search.steps - 1) as f64);
    let mut best: Option<(f64, Point)> = None;
    for i in 0..search.steps {
        for j in 0..search.steps {
            let z = Point::from_iter_unchecked([
                search.lower[0] + i as f64 * h[0],
                search.lower[1] + j as f64 * h[1],
            ]);
            let (v, _, _) = eval(&z)?;
            if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
                best = Some((v, z));
            }
        }
    }
    let (mut value, mut z) = best.expect("grid is nonempty");
    let mut step = h[0].max(h[1]);
    for _ in 0..search.refinements {
        let mut improved = true;
        while improved {
            improved = false;
            for dir in [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]] {
                let cand = Point::from_iter_unchecked([z[0] + step * dir[0], z[1] + step * dir[1]]);
                let (v, _, _) = eval(&cand)?;
                if v < value {
                    value = v;
                    z = cand;
                    improved = true;
                }
            }
        }
        step *= 0.5;
    }
    let (value, p, q) = eval(&z)?;
    Ok(ApproxDistance {
        value,
        tolerance: 2.0 * step,
        p,
        q,
    })
}
