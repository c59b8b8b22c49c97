//! Finite-dimensional real inner-product space.
//!
//! [`Point`] is an immutable coordinate vector; every operation returns a new
//! value. Points of dimension four or less live inline without a heap
//! allocation, which keeps the hot projection loops cheap in the plane.

use std::fmt;
use std::ops::{Add, Index, Neg, Sub};

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

type Coords = SmallVec<[f64; 4]>;

/// A vector in d-dimensional Euclidean space with finite coordinates.
#[derive(PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Coords);

impl Clone for Point {
    fn clone(&self) -> Self {
        Point(Coords::from_slice(&self.0))
    }
}

impl Point {
    /// Builds a point, rejecting empty input and NaN/Inf coordinates.
    pub fn new(coords: impl Into<Vec<f64>>) -> Result<Self> {
        let coords: Vec<f64> = coords.into();
        if coords.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if let Some(index) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Point(Coords::from_vec(coords)))
    }

    pub fn zeros(dim: usize) -> Self {
        Point(smallvec::smallvec![0.0; dim])
    }

    /// Unit coordinate vector `e_axis` in dimension `dim`.
    pub fn basis(dim: usize, axis: usize) -> Self {
        let mut p = Self::zeros(dim);
        p.0[axis] = 1.0;
        p
    }

    /// Constructs without validation. Callers guarantee finiteness.
    pub(crate) fn from_iter_unchecked(it: impl IntoIterator<Item = f64>) -> Self {
        Point(it.into_iter().collect())
    }

    pub(crate) fn from_slice_unchecked(coords: &[f64]) -> Self {
        Point(Coords::from_slice(coords))
    }

    /// Coordinatewise `f(self_i, other_i)`, filled in place.
    fn zip_with(&self, other: &Point, f: impl Fn(f64, f64) -> f64) -> Point {
        assert_same_dim(self, other);
        let mut out = self.clone();
        for (o, &b) in out.0.iter_mut().zip(&other.0) {
            *o = f(*o, b);
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.0.to_vec()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected,
                found: self.dim(),
            })
        }
    }

    /// `⟨self, other⟩` without the dimension check.
    pub(crate) fn dot(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// `|self - other|`.
    pub fn distance(&self, other: &Point) -> f64 {
        assert_same_dim(self, other);
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&self, factor: f64) -> Point {
        self.map(|_, c| c * factor)
    }

    /// `self + factor * direction`.
    pub fn add_scaled(&self, factor: f64, direction: &Point) -> Point {
        self.zip_with(direction, |a, d| a + factor * d)
    }

    pub fn map(&self, mut f: impl FnMut(usize, f64) -> f64) -> Point {
        let mut out = self.clone();
        for (i, c) in out.0.iter_mut().enumerate() {
            *c = f(i, *c);
        }
        out
    }

    /// Midpoint-style convex combination `(1 - w) * self + w * other`.
    pub fn lerp(&self, other: &Point, w: f64) -> Point {
        self.zip_with(other, |a, b| (1.0 - w) * a + w * b)
    }
}

fn assert_same_dim(a: &Point, b: &Point) {
    assert_eq!(
        a.dim(),
        b.dim(),
        "point dimensions differ ({} vs {})",
        a.dim(),
        b.dim()
    );
}

/// Inner product `Σ x_i y_i`.
pub fn inner(x: &Point, y: &Point) -> Result<f64> {
    y.check_dim(x.dim())?;
    Ok(x.dot(y))
}

/// Euclidean norm induced by [`inner`].
pub fn norm(x: &Point) -> f64 {
    x.norm()
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.to_vec()
    }
}

impl Index<usize> for Point {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for &Point {
    type Output = Point;

    fn add(self, rhs: &Point) -> Point {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Point {
    type Output = Point;

    fn sub(self, rhs: &Point) -> Point {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &Point {
    type Output = Point;

    fn neg(self) -> Point {
        self.scale(-1.0)
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}
