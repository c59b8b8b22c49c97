use serde::{Deserialize, Serialize};

use super::{ConvexSet, ScalarFunction};
use crate::error::Error;
use crate::space::Point;

/// Serialized form of a [`ConvexSet`]: a `type` tag plus numeric parameters.
///
/// ```json
/// {"type": "ball", "center": [4.0, 0.0], "radius": 1.0}
/// {"type": "epigraph1d", "function": "exp-neg"}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetDescriptor {
    Halfspace {
        normal: Point,
        offset: f64,
    },
    Hyperplane {
        normal: Point,
        offset: f64,
    },
    AffineSubspace {
        basis: Vec<Point>,
        anchor: Point,
    },
    Box {
        lower: Point,
        upper: Point,
    },
    Ball {
        center: Point,
        radius: f64,
    },
    Simplex {
        dimension: usize,
    },
    #[serde(rename = "epigraph1d")]
    Epigraph1D {
        function: String,
    },
    Translate {
        inner: Box<SetDescriptor>,
        shift: Point,
    },
}

impl TryFrom<SetDescriptor> for ConvexSet {
    type Error = Error;

    fn try_from(d: SetDescriptor) -> Result<Self, Error> {
        match d {
            SetDescriptor::Halfspace { normal, offset } => ConvexSet::halfspace(normal, offset),
            SetDescriptor::Hyperplane { normal, offset } => ConvexSet::hyperplane(normal, offset),
            SetDescriptor::AffineSubspace { basis, anchor } => {
                ConvexSet::affine_subspace(basis, anchor)
            }
            SetDescriptor::Box { lower, upper } => ConvexSet::boxed(lower, upper),
            SetDescriptor::Ball { center, radius } => ConvexSet::ball(center, radius),
            SetDescriptor::Simplex { dimension } => ConvexSet::simplex(dimension),
            SetDescriptor::Epigraph1D { function } => {
                Ok(ConvexSet::epigraph(ScalarFunction::from_name(&function)?))
            }
            SetDescriptor::Translate { inner, shift } => {
                ConvexSet::translate(ConvexSet::try_from(*inner)?, shift)
            }
        }
    }
}

impl From<ConvexSet> for SetDescriptor {
    fn from(set: ConvexSet) -> Self {
        match set {
            ConvexSet::Halfspace(h) => SetDescriptor::Halfspace {
                normal: h.normal,
                offset: h.offset,
            },
            ConvexSet::Hyperplane(h) => SetDescriptor::Hyperplane {
                normal: h.normal,
                offset: h.offset,
            },
            ConvexSet::AffineSubspace(a) => SetDescriptor::AffineSubspace {
                basis: a.basis,
                anchor: a.anchor,
            },
            ConvexSet::Box(b) => SetDescriptor::Box {
                lower: b.lower,
                upper: b.upper,
            },
            ConvexSet::Ball(b) => SetDescriptor::Ball {
                center: b.center,
                radius: b.radius,
            },
            ConvexSet::Simplex { dimension } => SetDescriptor::Simplex { dimension },
            ConvexSet::Epigraph1D(f) => SetDescriptor::Epigraph1D {
                function: f.name().to_string(),
            },
            ConvexSet::Translate(t) => SetDescriptor::Translate {
                inner: Box::new(SetDescriptor::from(*t.inner)),
                shift: t.shift,
            },
        }
    }
}
