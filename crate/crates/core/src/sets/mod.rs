//! Catalog of closed convex sets with exact nearest-point projections.
//!
//! Every [`ConvexSet`] is validated on construction, so a value of this type
//! is always nonempty, closed and convex. Sets serialize to a tagged JSON
//! descriptor (see [`SetDescriptor`]).

mod descriptor;
mod distance;
mod epigraph;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::Point;

pub use descriptor::SetDescriptor;
pub use distance::{
    analytic_distance, grid_distance, least_norm_difference, ApproxDistance, DistanceAnswer,
    GridSearch,
};
pub use epigraph::{project_onto_epigraph, ScalarFunction, ROOT_MAX_ITERATIONS, ROOT_STEP_TOL};

/// Residual below which a Gram–Schmidt direction is treated as dependent.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct Halfspace {
    normal: Point,
    offset: f64,
    normal_sq: f64,
}

impl Halfspace {
    pub fn normal(&self) -> &Point {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// `(⟨normal, x⟩ - offset) / |normal|`, the signed distance to the boundary.
    fn signed_distance(&self, x: &Point) -> f64 {
        (self.normal.dot(x) - self.offset) / self.normal_sq.sqrt()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hyperplane {
    normal: Point,
    offset: f64,
    normal_sq: f64,
}

impl Hyperplane {
    pub fn normal(&self) -> &Point {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }
}

/// `anchor + span(basis)`. The orthonormal basis is computed once.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineSubspace {
    basis: Vec<Point>,
    anchor: Point,
    orthonormal: Vec<Point>,
}

impl AffineSubspace {
    pub fn basis(&self) -> &[Point] {
        &self.basis
    }

    pub fn anchor(&self) -> &Point {
        &self.anchor
    }

    pub fn orthonormal_basis(&self) -> &[Point] {
        &self.orthonormal
    }

    pub fn rank(&self) -> usize {
        self.orthonormal.len()
    }

    /// True when the subspace passes through the origin.
    pub fn is_linear(&self) -> bool {
        let p = self.project_point(&Point::zeros(self.anchor.dim()));
        p.norm() <= RANK_TOL
    }

    fn project_point(&self, x: &Point) -> Point {
        let rel = x - &self.anchor;
        self.orthonormal
            .iter()
            .fold(self.anchor.clone(), |acc, e| acc.add_scaled(rel.dot(e), e))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoxSet {
    lower: Point,
    upper: Point,
}

impl BoxSet {
    pub fn lower(&self) -> &Point {
        &self.lower
    }

    pub fn upper(&self) -> &Point {
        &self.upper
    }

    fn clamp(&self, x: &Point) -> Point {
        x.map(|i, c| c.clamp(self.lower[i], self.upper[i]))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    center: Point,
    radius: f64,
}

impl Ball {
    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Translate {
    inner: Box<ConvexSet>,
    shift: Point,
}

impl Translate {
    pub fn inner(&self) -> &ConvexSet {
        &self.inner
    }

    pub fn shift(&self) -> &Point {
        &self.shift
    }
}

/// A closed convex set from the catalog.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SetDescriptor", into = "SetDescriptor")]
pub enum ConvexSet {
    /// `{x : ⟨normal, x⟩ ≤ offset}`
    Halfspace(Halfspace),
    /// `{x : ⟨normal, x⟩ = offset}`
    Hyperplane(Hyperplane),
    AffineSubspace(AffineSubspace),
    /// Componentwise `lower ≤ x ≤ upper`.
    Box(BoxSet),
    Ball(Ball),
    /// Probability simplex `{x : x_i ≥ 0, Σ x_i = 1}`.
    Simplex {
        dimension: usize,
    },
    /// `{(s, t) ∈ R² : t ≥ f(s)}`
    Epigraph1D(ScalarFunction),
    Translate(Translate),
}

fn finite_scalar(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidSet(format!("{name} must be finite")))
    }
}

impl ConvexSet {
    pub fn halfspace(normal: Point, offset: f64) -> Result<Self> {
        finite_scalar("offset", offset)?;
        let normal_sq = normal.norm_squared();
        if normal_sq == 0.0 {
            return Err(Error::InvalidSet("halfspace normal must be nonzero".into()));
        }
        Ok(ConvexSet::Halfspace(Halfspace {
            normal,
            offset,
            normal_sq,
        }))
    }

    pub fn hyperplane(normal: Point, offset: f64) -> Result<Self> {
        finite_scalar("offset", offset)?;
        let normal_sq = normal.norm_squared();
        if normal_sq == 0.0 {
            return Err(Error::InvalidSet(
                "hyperplane normal must be nonzero".into(),
            ));
        }
        Ok(ConvexSet::Hyperplane(Hyperplane {
            normal,
            offset,
            normal_sq,
        }))
    }

    /// `anchor + span(basis)`. Directions that are numerically dependent on
    /// earlier ones are dropped during orthonormalization.
    pub fn affine_subspace(basis: Vec<Point>, anchor: Point) -> Result<Self> {
        let d = anchor.dim();
        for (i, b) in basis.iter().enumerate() {
            if b.dim() != d {
                return Err(Error::InvalidSet(format!(
                    "basis vector {i} has dimension {}, anchor has {d}",
                    b.dim()
                )));
            }
        }
        let orthonormal = orthonormalize(&basis);
        Ok(ConvexSet::AffineSubspace(AffineSubspace {
            basis,
            anchor,
            orthonormal,
        }))
    }

    /// Linear subspace spanned by `basis` in dimension `dim`.
    pub fn linear_subspace(basis: Vec<Point>, dim: usize) -> Result<Self> {
        Self::affine_subspace(basis, Point::zeros(dim))
    }

    pub fn boxed(lower: Point, upper: Point) -> Result<Self> {
        upper.check_dim(lower.dim())?;
        if let Some(i) = (0..lower.dim()).find(|&i| lower[i] > upper[i]) {
            return Err(Error::InvalidSet(format!(
                "box lower bound exceeds upper bound at index {i}"
            )));
        }
        Ok(ConvexSet::Box(BoxSet { lower, upper }))
    }

    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        finite_scalar("radius", radius)?;
        if radius < 0.0 {
            return Err(Error::InvalidSet("ball radius must be nonnegative".into()));
        }
        Ok(ConvexSet::Ball(Ball { center, radius }))
    }

    pub fn simplex(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidSet(
                "simplex dimension must be at least 1".into(),
            ));
        }
        Ok(ConvexSet::Simplex { dimension })
    }

    pub fn epigraph(function: ScalarFunction) -> Self {
        ConvexSet::Epigraph1D(function)
    }

    pub fn translate(inner: ConvexSet, shift: Point) -> Result<Self> {
        shift.check_dim(inner.ambient_dim())?;
        Ok(ConvexSet::Translate(Translate {
            inner: Box::new(inner),
            shift,
        }))
    }

    /// Variant tag as used in the serialized descriptor.
    pub fn kind(&self) -> &'static str {
        match self {
            ConvexSet::Halfspace(_) => "halfspace",
            ConvexSet::Hyperplane(_) => "hyperplane",
            ConvexSet::AffineSubspace(_) => "affine_subspace",
            ConvexSet::Box(_) => "box",
            ConvexSet::Ball(_) => "ball",
            ConvexSet::Simplex { .. } => "simplex",
            ConvexSet::Epigraph1D(_) => "epigraph1d",
            ConvexSet::Translate(_) => "translate",
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            ConvexSet::Halfspace(h) => h.normal.dim(),
            ConvexSet::Hyperplane(h) => h.normal.dim(),
            ConvexSet::AffineSubspace(a) => a.anchor.dim(),
            ConvexSet::Box(b) => b.lower.dim(),
            ConvexSet::Ball(b) => b.center.dim(),
            ConvexSet::Simplex { dimension } => *dimension,
            ConvexSet::Epigraph1D(_) => 2,
            ConvexSet::Translate(t) => t.shift.dim(),
        }
    }

    /// Nearest point of the set to `x`.
    pub fn project(&self, x: &Point) -> Result<Point> {
        x.check_dim(self.ambient_dim())?;
        self.project_unchecked(x)
    }

    fn project_unchecked(&self, x: &Point) -> Result<Point> {
        Ok(match self {
            ConvexSet::Halfspace(h) => {
                let excess = h.normal.dot(x) - h.offset;
                if excess <= 0.0 {
                    x.clone()
                } else {
                    x.add_scaled(-excess / h.normal_sq, &h.normal)
                }
            }
            ConvexSet::Hyperplane(h) => {
                let excess = h.normal.dot(x) - h.offset;
                x.add_scaled(-excess / h.normal_sq, &h.normal)
            }
            ConvexSet::AffineSubspace(a) => a.project_point(x),
            ConvexSet::Box(b) => b.clamp(x),
            ConvexSet::Ball(b) => {
                let rel = x - &b.center;
                let dist = rel.norm();
                if dist <= b.radius {
                    x.clone()
                } else {
                    b.center.add_scaled(b.radius / dist, &rel)
                }
            }
            ConvexSet::Simplex { .. } => project_simplex(x),
            ConvexSet::Epigraph1D(f) => {
                let (s, t) = project_onto_epigraph(*f, x[0], x[1])?;
                Point::from_slice_unchecked(&[s, t])
            }
            ConvexSet::Translate(t) => {
                let local = t.inner.project_unchecked(&(x - &t.shift))?;
                &local + &t.shift
            }
        })
    }

    /// True iff every defining constraint holds within `tol`. Linear
    /// constraints are measured as Euclidean distances to their boundary.
    pub fn member(&self, x: &Point, tol: f64) -> Result<bool> {
        if !(tol >= 0.0) {
            return Err(Error::Precondition(
                "membership tolerance must be >= 0".into(),
            ));
        }
        x.check_dim(self.ambient_dim())?;
        Ok(self.member_unchecked(x, tol))
    }

    fn member_unchecked(&self, x: &Point, tol: f64) -> bool {
        match self {
            ConvexSet::Halfspace(h) => h.signed_distance(x) <= tol,
            ConvexSet::Hyperplane(h) => {
                ((h.normal.dot(x) - h.offset) / h.normal_sq.sqrt()).abs() <= tol
            }
            ConvexSet::AffineSubspace(a) => a.project_point(x).distance(x) <= tol,
            ConvexSet::Box(b) => {
                (0..x.dim()).all(|i| x[i] >= b.lower[i] - tol && x[i] <= b.upper[i] + tol)
            }
            ConvexSet::Ball(b) => x.distance(&b.center) <= b.radius + tol,
            ConvexSet::Simplex { .. } => {
                x.coords().iter().all(|&c| c >= -tol)
                    && (x.coords().iter().sum::<f64>() - 1.0).abs() <= tol
            }
            ConvexSet::Epigraph1D(f) => x[1] >= f.value(x[0]) - tol,
            ConvexSet::Translate(t) => t.inner.member_unchecked(&(x - &t.shift), tol),
        }
    }

    /// `|x - P_C x|`.
    pub fn distance_to(&self, x: &Point) -> Result<f64> {
        Ok(self.project(x)?.distance(x))
    }

    /// The set `self + shift`, folding the shift into the parameters where the
    /// variant allows it.
    pub fn translated(&self, shift: &Point) -> Result<ConvexSet> {
        shift.check_dim(self.ambient_dim())?;
        Ok(match self {
            ConvexSet::Halfspace(h) => {
                ConvexSet::halfspace(h.normal.clone(), h.offset + h.normal.dot(shift))?
            }
            ConvexSet::Hyperplane(h) => {
                ConvexSet::hyperplane(h.normal.clone(), h.offset + h.normal.dot(shift))?
            }
            ConvexSet::AffineSubspace(a) => ConvexSet::AffineSubspace(AffineSubspace {
                basis: a.basis.clone(),
                anchor: &a.anchor + shift,
                orthonormal: a.orthonormal.clone(),
            }),
            ConvexSet::Box(b) => ConvexSet::boxed(&b.lower + shift, &b.upper + shift)?,
            ConvexSet::Ball(b) => ConvexSet::ball(&b.center + shift, b.radius)?,
            ConvexSet::Translate(t) => t.inner.translated(&(&t.shift + shift))?,
            ConvexSet::Simplex { .. } | ConvexSet::Epigraph1D(_) => {
                ConvexSet::translate(self.clone(), shift.clone())?
            }
        })
    }

    /// Equivalent set with every foldable translation absorbed.
    pub fn canonical(&self) -> ConvexSet {
        match self {
            ConvexSet::Translate(t) => t
                .inner
                .translated(&t.shift)
                .expect("translate shift dimension validated on construction"),
            other => other.clone(),
        }
    }
}

/// Modified Gram–Schmidt with one re-orthogonalization pass.
fn orthonormalize(vectors: &[Point]) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for e in &out {
                w = w.add_scaled(-w.dot(e), e);
            }
        }
        let n = w.norm();
        if n >= RANK_TOL {
            out.push(w.scale(1.0 / n));
        }
    }
    out
}

/// Sort-and-threshold projection onto the probability simplex.
fn project_simplex(x: &Point) -> Point {
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (j + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    x.map(|_, c| (c - theta).max(0.0))
}

#[cfg(test)]
mod tests;
