//! Seeded random sets and points for property suites.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::sets::{ConvexSet, ScalarFunction};
use crate::space::Point;
use crate::subspace::friedrichs_cosine;

/// Name of the generator recorded alongside seeds in reports.
pub const GENERATOR_NAME: &str = "ChaCha8Rng";

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Catalog variants, used to enumerate property-suite cases.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetKind {
    Halfspace,
    Hyperplane,
    AffineSubspace,
    Box,
    Ball,
    Simplex,
    Epigraph1D,
    Translate,
}

impl SetKind {
    pub const ALL: [SetKind; 8] = [
        SetKind::Halfspace,
        SetKind::Hyperplane,
        SetKind::AffineSubspace,
        SetKind::Box,
        SetKind::Ball,
        SetKind::Simplex,
        SetKind::Epigraph1D,
        SetKind::Translate,
    ];

    /// Epigraphs only exist in the plane.
    pub fn supports_dim(self, dim: usize) -> bool {
        match self {
            SetKind::Epigraph1D => dim == 2,
            _ => dim >= 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SetKind::Halfspace => "halfspace",
            SetKind::Hyperplane => "hyperplane",
            SetKind::AffineSubspace => "affine_subspace",
            SetKind::Box => "box",
            SetKind::Ball => "ball",
            SetKind::Simplex => "simplex",
            SetKind::Epigraph1D => "epigraph1d",
            SetKind::Translate => "translate",
        }
    }
}

pub fn gaussian_point<R: Rng>(dim: usize, scale: f64, rng: &mut R) -> Point {
    Point::from_iter_unchecked((0..dim).map(|_| scale * rng.sample::<f64, _>(StandardNormal)))
}

pub fn uniform_point<R: Rng>(dim: usize, half_width: f64, rng: &mut R) -> Point {
    Point::from_iter_unchecked((0..dim).map(|_| rng.random_range(-half_width..=half_width)))
}

fn nonzero_gaussian<R: Rng>(dim: usize, rng: &mut R) -> Point {
    loop {
        let p = gaussian_point(dim, 1.0, rng);
        if p.norm() > 1e-3 {
            return p;
        }
    }
}

/// A random member of the catalog of the given kind in dimension `dim`.
pub fn random_set<R: Rng>(kind: SetKind, dim: usize, rng: &mut R) -> ConvexSet {
    assert!(
        kind.supports_dim(dim),
        "{kind:?} does not exist in dimension {dim}"
    );
    let set = match kind {
        SetKind::Halfspace => {
            ConvexSet::halfspace(nonzero_gaussian(dim, rng), rng.random_range(-1.0..1.0))
        }
        SetKind::Hyperplane => {
            ConvexSet::hyperplane(nonzero_gaussian(dim, rng), rng.random_range(-1.0..1.0))
        }
        SetKind::AffineSubspace => {
            let k = rng.random_range(0..=dim);
            let basis = (0..k).map(|_| gaussian_point(dim, 1.0, rng)).collect();
            ConvexSet::affine_subspace(basis, gaussian_point(dim, 1.0, rng))
        }
        SetKind::Box => {
            let lower = uniform_point(dim, 2.0, rng);
            let upper = lower.map(|_, c| c + rng.random_range(0.0..2.0));
            ConvexSet::boxed(lower, upper)
        }
        SetKind::Ball => ConvexSet::ball(gaussian_point(dim, 1.0, rng), rng.random_range(0.0..2.0)),
        SetKind::Simplex => ConvexSet::simplex(dim),
        SetKind::Epigraph1D => {
            let f = ScalarFunction::ALL[rng.random_range(0..ScalarFunction::ALL.len())];
            Ok(ConvexSet::epigraph(f))
        }
        SetKind::Translate => {
            let inner_kind = if dim == 2 && rng.random_bool(0.5) {
                SetKind::Epigraph1D
            } else {
                SetKind::Simplex
            };
            let inner = random_set(inner_kind, dim, rng);
            ConvexSet::translate(inner, gaussian_point(dim, 1.0, rng))
        }
    };
    set.expect("random parameters are valid by construction")
}

/// Largest Friedrichs cosine accepted by [`random_subspace_pair`].
pub const MAX_FRIEDRICHS_COSINE: f64 = 0.99;

/// Two random linear subspaces of `R^dim` with 2 to 4 Gaussian spanning
/// vectors each. Pairs whose Friedrichs cosine exceeds
/// [`MAX_FRIEDRICHS_COSINE`] are redrawn; the second value counts redraws.
pub fn random_subspace_pair<R: Rng>(dim: usize, rng: &mut R) -> ((ConvexSet, ConvexSet), usize) {
    let span = |rng: &mut R| {
        let k = rng.random_range(2..=4.min(dim));
        let basis = (0..k).map(|_| gaussian_point(dim, 1.0, rng)).collect();
        ConvexSet::linear_subspace(basis, dim).expect("Gaussian bases are valid")
    };
    for redraws in 0.. {
        let pair = (span(rng), span(rng));
        let c = friedrichs_cosine(&pair.0, &pair.1).expect("both are linear subspaces");
        if c <= MAX_FRIEDRICHS_COSINE {
            return (pair, redraws);
        }
    }
    unreachable!()
}

/// A random point of `set`, drawn without using the projection.
pub fn random_member<R: Rng>(set: &ConvexSet, rng: &mut R) -> Point {
    let dim = set.ambient_dim();
    match set {
        ConvexSet::Halfspace(h) => {
            let z = gaussian_point(dim, 2.0, rng);
            let excess = h.normal().dot(&z) - h.offset();
            if excess <= 0.0 {
                z
            } else {
                z.add_scaled(-2.0 * excess / h.normal().norm_squared(), h.normal())
            }
        }
        ConvexSet::Hyperplane(h) => {
            let z = gaussian_point(dim, 2.0, rng);
            let excess = h.normal().dot(&z) - h.offset();
            z.add_scaled(-excess / h.normal().norm_squared(), h.normal())
        }
        ConvexSet::AffineSubspace(a) => a.basis().iter().fold(a.anchor().clone(), |acc, b| {
            acc.add_scaled(rng.random_range(-2.0..2.0), b)
        }),
        ConvexSet::Box(b) => b
            .lower()
            .map(|i, lo| lo + rng.random::<f64>() * (b.upper()[i] - lo)),
        ConvexSet::Ball(b) => {
            let dir = nonzero_gaussian(dim, rng);
            let r = b.radius() * rng.random::<f64>().powf(1.0 / dim as f64);
            b.center().add_scaled(r / dir.norm(), &dir)
        }
        ConvexSet::Simplex { .. } => {
            let w: Vec<f64> = (0..dim)
                .map(|_| -(1.0 - rng.random::<f64>()).ln())
                .collect();
            let total: f64 = w.iter().sum();
            Point::from_iter_unchecked(w.into_iter().map(|x| x / total))
        }
        ConvexSet::Epigraph1D(f) => {
            let s = rng.random_range(-3.0..3.0);
            let t = f.value(s) + rng.random::<f64>() * 2.0;
            Point::from_iter_unchecked([s, t])
        }
        ConvexSet::Translate(t) => &random_member(t.inner(), rng) + t.shift(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn members_are_members() {
        let mut rng = rng_from_seed(11);
        for kind in SetKind::ALL {
            for dim in [1, 2, 3, 10] {
                if !kind.supports_dim(dim) {
                    continue;
                }
                for _ in 0..50 {
                    let set = random_set(kind, dim, &mut rng);
                    let y = random_member(&set, &mut rng);
                    assert!(set.member(&y, 1e-9).unwrap(), "{kind:?} d={dim}: {y:?}");
                }
            }
        }
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        let a = random_set(SetKind::Ball, 3, &mut rng_from_seed(5));
        let b = random_set(SetKind::Ball, 3, &mut rng_from_seed(5));
        assert_eq!(a, b);
    }
}
