//! Brute-force nearest points in the plane, independent of the closed-form
//! projections.
//!
//! For a point outside a closed convex set the nearest point lies on the
//! boundary, so the search walks the boundary curve at a fixed arc step and
//! keeps the closest sample.

use crate::error::{Error, Result};
use crate::sets::{ConvexSet, ScalarFunction};
use crate::space::Point;

struct Nearest<'a> {
    x: &'a Point,
    best: Option<(f64, Point)>,
}

impl Nearest<'_> {
    fn offer(&mut self, s: f64, t: f64) {
        let d = (self.x[0] - s).hypot(self.x[1] - t);
        if self.best.as_ref().is_none_or(|(b, _)| d < *b) {
            self.best = Some((d, Point::from_slice_unchecked(&[s, t])));
        }
    }

    /// Samples the segment `a + λ(b - a)`, `λ ∈ [0, 1]`, endpoints included.
    fn segment(&mut self, a: (f64, f64), b: (f64, f64), step: f64) {
        let len = (b.0 - a.0).hypot(b.1 - a.1);
        let n = (len / step).ceil().max(1.0) as usize;
        for i in 0..=n {
            let l = i as f64 / n as f64;
            self.offer(a.0 + l * (b.0 - a.0), a.1 + l * (b.1 - a.1));
        }
    }

    /// Samples the line through `anchor` with unit direction `u`, far enough
    /// either side of `anchor` to contain the nearest point.
    fn line(&mut self, anchor: (f64, f64), u: (f64, f64), step: f64) {
        let reach = (self.x[0] - anchor.0).hypot(self.x[1] - anchor.1) + step;
        self.segment(
            (anchor.0 - reach * u.0, anchor.1 - reach * u.1),
            (anchor.0 + reach * u.0, anchor.1 + reach * u.1),
            step,
        );
    }

    /// Coarse-to-fine walk along the graph. Each pass covers the `s` for
    /// which `(s, f(s))` can still beat the best distance `r`: `|s - s0| <= r`
    /// and `f(s) <= t + r`, an interval because `f` is convex.
    fn graph(&mut self, f: ScalarFunction, step: f64) {
        let (s0, t) = (self.x[0], self.x[1]);
        self.offer(s0, f.value(s0));
        let mut h = f64::INFINITY;
        loop {
            let (r, s_best) = match &self.best {
                Some((d, p)) => (*d, p[0]),
                None => unreachable!("offered above"),
            };
            h = (h / 10.0).min(r / 1000.0).max(step);
            let level = t + r;
            let lo = sublevel_end(f, level, s0 - r, s_best);
            let hi = sublevel_end(f, level, s0 + r, s_best);
            let mut s = lo;
            while s < hi {
                self.offer(s, f.value(s));
                s += h / f.derivative(s).hypot(1.0);
            }
            self.offer(hi, f.value(hi));
            if h == step {
                break;
            }
        }
    }
}

/// The end of `{f <= level}` between `outer` and `inner`, where
/// `f(inner) <= level`; `outer` itself if it already qualifies.
fn sublevel_end(f: ScalarFunction, level: f64, outer: f64, inner: f64) -> f64 {
    if f.value(outer) <= level {
        return outer;
    }
    let (mut out, mut inn) = (outer, inner);
    for _ in 0..200 {
        let mid = 0.5 * (out + inn);
        if mid == out || mid == inn {
            break;
        }
        if f.value(mid) <= level {
            inn = mid;
        } else {
            out = mid;
        }
    }
    inn
}

fn normal_line(normal: &Point, offset: f64) -> ((f64, f64), (f64, f64)) {
    let n2 = normal.norm_squared();
    let anchor = (normal[0] * offset / n2, normal[1] * offset / n2);
    let len = n2.sqrt();
    (anchor, (-normal[1] / len, normal[0] / len))
}

/// Nearest point of a planar `set` to `x`, found by sampling the boundary at
/// arc step `step`. Accurate to about `step / 2`.
pub fn brute_force_nearest(set: &ConvexSet, x: &Point, step: f64) -> Result<Point> {
    if set.ambient_dim() != 2 {
        return Err(Error::Precondition(format!(
            "brute-force search is planar, got dimension {}",
            set.ambient_dim()
        )));
    }
    x.check_dim(2)?;
    if !(step > 0.0) {
        return Err(Error::Precondition("step must be positive".into()));
    }
    if set.member(x, 0.0)? {
        return Ok(x.clone());
    }
    if let ConvexSet::Translate(t) = set {
        let local = brute_force_nearest(t.inner(), &(x - t.shift()), step)?;
        return Ok(&local + t.shift());
    }
    let mut search = Nearest { x, best: None };
    match set {
        ConvexSet::Halfspace(h) => {
            let (anchor, u) = normal_line(h.normal(), h.offset());
            search.line(anchor, u, step);
        }
        ConvexSet::Hyperplane(h) => {
            let (anchor, u) = normal_line(h.normal(), h.offset());
            search.line(anchor, u, step);
        }
        ConvexSet::AffineSubspace(a) => {
            let anchor = (a.anchor()[0], a.anchor()[1]);
            match a.orthonormal_basis() {
                [] => search.offer(anchor.0, anchor.1),
                [u] => search.line(anchor, (u[0], u[1]), step),
                _ => return Ok(x.clone()),
            }
        }
        ConvexSet::Box(b) => {
            let (lo, hi) = (b.lower(), b.upper());
            let corners = [
                (lo[0], lo[1]),
                (hi[0], lo[1]),
                (hi[0], hi[1]),
                (lo[0], hi[1]),
            ];
            for i in 0..4 {
                search.segment(corners[i], corners[(i + 1) % 4], step);
            }
        }
        ConvexSet::Ball(b) => {
            let (c, r) = (b.center(), b.radius());
            let n = ((std::f64::consts::TAU * r / step).ceil() as usize).max(1);
            for i in 0..n {
                let a = std::f64::consts::TAU * i as f64 / n as f64;
                search.offer(c[0] + r * a.cos(), c[1] + r * a.sin());
            }
        }
        ConvexSet::Simplex { .. } => search.segment((1.0, 0.0), (0.0, 1.0), step),
        ConvexSet::Epigraph1D(f) => search.graph(*f, step),
        ConvexSet::Translate(_) => unreachable!("handled above"),
    }
    Ok(search
        .best
        .expect("every boundary has at least one sample")
        .1)
}
