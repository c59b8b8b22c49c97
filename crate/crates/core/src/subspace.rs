//! Direct (non-iterative) orthogonal projector onto `S1 ∩ S2` for two linear
//! subspaces.
//!
//! A vector lies in the intersection iff both complement projectors
//! `I - P1` and `I - P2` annihilate it, so an orthonormal basis of
//! `S1 ∩ S2` is a basis of the null space of the stacked `2d × d` matrix
//! `[I - P1; I - P2]`, read off its singular value decomposition.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::sets::{AffineSubspace, ConvexSet};
use crate::space::Point;

/// Singular values below this count as zero.
pub const NULL_SPACE_TOL: f64 = 1e-10;

/// Orthogonal projector onto a linear subspace given by an orthonormal basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceProjector {
    dim: usize,
    basis: Vec<Point>,
}

impl SubspaceProjector {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Point] {
        &self.basis
    }

    pub fn apply(&self, x: &Point) -> Result<Point> {
        x.check_dim(self.dim)?;
        Ok(self
            .basis
            .iter()
            .fold(Point::zeros(self.dim), |acc, e| acc.add_scaled(x.dot(e), e)))
    }

    /// Dense `d × d` matrix of the projector.
    pub fn matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for e in &self.basis {
            let v = nalgebra::DVector::from_column_slice(e.coords());
            m += &v * v.transpose();
        }
        m
    }
}

fn linear_part(set: &ConvexSet) -> Result<&AffineSubspace> {
    match set {
        ConvexSet::AffineSubspace(a) if a.is_linear() => Ok(a),
        ConvexSet::AffineSubspace(_) => Err(Error::Precondition(
            "subspace intersection needs subspaces through the origin".into(),
        )),
        other => Err(Error::Precondition(format!(
            "expected a linear subspace, got {}",
            other.kind()
        ))),
    }
}

fn complement(a: &AffineSubspace, dim: usize) -> DMatrix<f64> {
    let mut m = DMatrix::identity(dim, dim);
    for e in a.orthonormal_basis() {
        let v = nalgebra::DVector::from_column_slice(e.coords());
        m -= &v * v.transpose();
    }
    m
}

/// `P_S` for `S = S1 ∩ S2`.
pub fn subspace_intersection_projector(
    s1: &ConvexSet,
    s2: &ConvexSet,
) -> Result<SubspaceProjector> {
    let (a, b) = (linear_part(s1)?, linear_part(s2)?);
    let dim = s1.ambient_dim();
    if s2.ambient_dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: s2.ambient_dim(),
        });
    }
    let (qa, qb) = (complement(a, dim), complement(b, dim));
    let stacked = DMatrix::from_fn(2 * dim, dim, |r, c| {
        if r < dim {
            qa[(r, c)]
        } else {
            qb[(r - dim, c)]
        }
    });
    let svd = stacked.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let basis = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s < NULL_SPACE_TOL)
        .map(|(i, _)| Point::from_iter_unchecked(v_t.row(i).iter().copied()))
        .collect();
    Ok(SubspaceProjector { dim, basis })
}

fn projector_matrix(a: &AffineSubspace, dim: usize) -> DMatrix<f64> {
    DMatrix::identity(dim, dim) - complement(a, dim)
}

/// Cosine of the Friedrichs angle between two linear subspaces, computed as
/// `‖P2 P1 - P_S‖`. Alternating projections approach `P_S x0` at this rate
/// squared per pair, so values near 1 mean very slow convergence.
pub fn friedrichs_cosine(s1: &ConvexSet, s2: &ConvexSet) -> Result<f64> {
    let p_s = subspace_intersection_projector(s1, s2)?.matrix();
    let dim = s1.ambient_dim();
    let (a, b) = (linear_part(s1)?, linear_part(s2)?);
    let m = projector_matrix(b, dim) * projector_matrix(a, dim) - p_s;
    Ok(m.singular_values().max())
}
