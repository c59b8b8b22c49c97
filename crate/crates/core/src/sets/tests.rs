use proptest::prelude::*;

use super::*;
use crate::sampling::{random_member, random_set, rng_from_seed, uniform_point, SetKind};

fn p(c: &[f64]) -> Point {
    Point::new(c.to_vec()).unwrap()
}

fn close(a: &Point, b: &Point, tol: f64) -> bool {
    a.distance(b) <= tol
}

#[test]
fn projection_examples() {
    let h = ConvexSet::halfspace(p(&[0.0, 1.0]), 0.0).unwrap();
    assert_eq!(h.project(&p(&[3.0, 2.0])).unwrap(), p(&[3.0, 0.0]));

    let ball = ConvexSet::ball(p(&[0.0, 0.0]), 1.0).unwrap();
    assert!(close(
        &ball.project(&p(&[3.0, 4.0])).unwrap(),
        &p(&[0.6, 0.8]),
        1e-15
    ));

    let simplex = ConvexSet::simplex(3).unwrap();
    let third = 1.0 / 3.0;
    assert!(close(
        &simplex.project(&p(&[0.5, 0.5, 0.5])).unwrap(),
        &p(&[third, third, third]),
        1e-15
    ));

    let unit_box = ConvexSet::boxed(p(&[0.0, 0.0]), p(&[1.0, 1.0])).unwrap();
    assert_eq!(unit_box.project(&p(&[2.0, -1.0])).unwrap(), p(&[1.0, 0.0]));

    let epi = ConvexSet::epigraph(ScalarFunction::ExpNeg);
    let e = epi.project(&p(&[0.0, 0.0])).unwrap();
    // Grid minimizer of s² + exp(-2s), see the epigraph module tests.
    assert!(close(
        &e,
        &p(&[0.426_302_751_006_862_7, 0.652_918_640_419_204_7]),
        1e-10
    ));
}

#[test]
fn membership_examples() {
    let ball = ConvexSet::ball(p(&[0.0, 0.0]), 1.0).unwrap();
    assert!(ball.member(&p(&[0.6, 0.8]), 1e-9).unwrap());
    let unit_box = ConvexSet::boxed(p(&[0.0, 0.0]), p(&[1.0, 1.0])).unwrap();
    assert!(!unit_box.member(&p(&[1.1, 0.5]), 1e-9).unwrap());
    let third = 1.0 / 3.0;
    assert!(ConvexSet::simplex(3)
        .unwrap()
        .member(&p(&[third, third, third]), 1e-9)
        .unwrap());
    assert!(ball.member(&p(&[0.6, 0.8]), -1.0).is_err());
}

#[test]
fn construction_validates_parameters() {
    assert!(ConvexSet::halfspace(p(&[0.0, 0.0]), 1.0).is_err());
    assert!(ConvexSet::hyperplane(p(&[0.0]), 1.0).is_err());
    assert!(ConvexSet::boxed(p(&[0.0, 2.0]), p(&[1.0, 1.0])).is_err());
    assert!(ConvexSet::boxed(p(&[0.0]), p(&[1.0, 1.0])).is_err());
    assert!(ConvexSet::ball(p(&[0.0]), -0.5).is_err());
    assert!(ConvexSet::ball(p(&[0.0]), f64::NAN).is_err());
    assert!(ConvexSet::simplex(0).is_err());
    assert!(ConvexSet::affine_subspace(vec![p(&[1.0, 0.0, 0.0])], p(&[0.0, 0.0])).is_err());
    assert!(ConvexSet::translate(ConvexSet::simplex(3).unwrap(), p(&[1.0])).is_err());
}

#[test]
fn projection_rejects_dimension_mismatch() {
    let ball = ConvexSet::ball(p(&[0.0, 0.0]), 1.0).unwrap();
    assert_eq!(
        ball.project(&p(&[1.0, 2.0, 3.0])).unwrap_err(),
        Error::DimensionMismatch {
            expected: 2,
            found: 3
        }
    );
    assert!(ball.member(&p(&[1.0]), 0.0).is_err());
}

#[test]
fn affine_basis_drops_dependent_directions() {
    let set = ConvexSet::affine_subspace(
        vec![
            p(&[1.0, 1.0, 0.0]),
            p(&[2.0, 2.0, 0.0]),
            p(&[0.0, 0.0, 0.0]),
            p(&[0.0, 1.0, 0.0]),
        ],
        p(&[0.0, 0.0, 5.0]),
    )
    .unwrap();
    let ConvexSet::AffineSubspace(a) = &set else {
        unreachable!()
    };
    assert_eq!(a.rank(), 2);
    assert!(close(
        &set.project(&p(&[3.0, -4.0, 1.0])).unwrap(),
        &p(&[3.0, -4.0, 5.0]),
        1e-14
    ));
}

#[test]
fn translate_shifts_projection() {
    let inner = ConvexSet::simplex(2).unwrap();
    let t = ConvexSet::translate(inner, p(&[10.0, 0.0])).unwrap();
    let got = t.project(&p(&[11.0, 1.0])).unwrap();
    assert!(close(&got, &p(&[10.5, 0.5]), 1e-15));
    assert!(t.member(&got, 1e-12).unwrap());
}

#[test]
fn descriptor_round_trip_and_strictness() {
    let json = r#"{"type":"translate","inner":{"type":"epigraph1d","function":"softplus"},"shift":[1.0,-2.0]}"#;
    let set: ConvexSet = serde_json::from_str(json).unwrap();
    assert_eq!(serde_json::to_string(&set).unwrap(), json);

    let bad = r#"{"type":"ball","center":[0,0],"radius":1,"color":"red"}"#;
    assert!(serde_json::from_str::<ConvexSet>(bad).is_err());
    let invalid = r#"{"type":"ball","center":[0,0],"radius":-1}"#;
    assert!(serde_json::from_str::<ConvexSet>(invalid).is_err());
    let unknown = r#"{"type":"epigraph1d","function":"cosh"}"#;
    assert!(serde_json::from_str::<ConvexSet>(unknown).is_err());
}

#[test]
fn analytic_distance_examples() {
    let b1 = ConvexSet::ball(p(&[0.0, 0.0]), 1.0).unwrap();
    let b2 = ConvexSet::ball(p(&[4.0, 0.0]), 1.0).unwrap();
    let ans = analytic_distance(&b1, &b2).unwrap();
    assert_eq!(ans.value, 2.0);
    assert!(ans.attained);
    assert_eq!(ans.witness, Some((p(&[1.0, 0.0]), p(&[3.0, 0.0]))));

    let h = ConvexSet::halfspace(p(&[0.0, 1.0]), 0.0).unwrap();
    let epi = ConvexSet::epigraph(ScalarFunction::ExpNeg);
    let ans = analytic_distance(&h, &epi).unwrap();
    assert_eq!(ans.value, 0.0);
    assert!(!ans.attained);
    assert!(ans.witness.is_none());

    let b3 = ConvexSet::ball(p(&[1.0, 0.0]), 1.0).unwrap();
    let ans = analytic_distance(&b1, &b3).unwrap();
    assert_eq!(ans.value, 0.0);
    assert!(ans.attained);
}

#[test]
fn least_norm_examples() {
    let b1 = ConvexSet::ball(p(&[0.0, 0.0]), 1.0).unwrap();
    let b2 = ConvexSet::ball(p(&[4.0, 0.0]), 1.0).unwrap();
    assert_eq!(least_norm_difference(&b1, &b2).unwrap(), p(&[2.0, 0.0]));

    let b3 = ConvexSet::ball(p(&[1.0, 0.0]), 1.0).unwrap();
    assert_eq!(least_norm_difference(&b1, &b3).unwrap(), p(&[0.0, 0.0]));

    let below = ConvexSet::halfspace(p(&[0.0, 1.0]), 0.0).unwrap();
    let above = ConvexSet::halfspace(p(&[0.0, -1.0]), -1.0).unwrap();
    assert_eq!(
        least_norm_difference(&below, &above).unwrap(),
        p(&[0.0, 1.0])
    );
    assert_eq!(
        least_norm_difference(&above, &below).unwrap(),
        p(&[0.0, -1.0])
    );
}

#[test]
fn unattained_epigraph_gap_with_negative_level() {
    // t ≤ -0.5 against t ≥ exp(-s): d = 0.5, never attained.
    let h = ConvexSet::halfspace(p(&[0.0, 2.0]), -1.0).unwrap();
    let epi = ConvexSet::epigraph(ScalarFunction::ExpNeg);
    let ans = analytic_distance(&h, &epi).unwrap();
    assert_eq!(ans.value, 0.5);
    assert!(!ans.attained);
    assert_eq!(least_norm_difference(&h, &epi).unwrap(), p(&[0.0, 0.5]));
    assert_eq!(least_norm_difference(&epi, &h).unwrap(), p(&[0.0, -0.5]));

    // Translating the epigraph up by 1 moves the gap to 1.5.
    let lifted = ConvexSet::translate(epi, p(&[3.0, 1.0])).unwrap();
    assert_eq!(analytic_distance(&h, &lifted).unwrap().value, 1.5);

    // A positive level meets the epigraph.
    let h2 = ConvexSet::halfspace(p(&[0.0, 1.0]), 0.25).unwrap();
    let ans = analytic_distance(&h2, &ConvexSet::epigraph(ScalarFunction::ExpNeg)).unwrap();
    assert!(ans.attained && ans.value == 0.0);
}

#[test]
fn unsupported_pair_has_no_closed_form() {
    let s = ConvexSet::simplex(2).unwrap();
    let b = ConvexSet::ball(p(&[3.0, 3.0]), 1.0).unwrap();
    assert!(matches!(
        analytic_distance(&s, &b),
        Err(Error::NoClosedForm(_, _))
    ));
    assert!(matches!(
        least_norm_difference(&b, &s),
        Err(Error::NoClosedForm(_, _))
    ));
}

#[test]
fn grid_fallback_approximates_simplex_ball_gap() {
    // Segment from (1,0) to (0,1) vs ball at (3,3), radius 1:
    // d = |(3,3) - (0.5,0.5)| - 1.
    let s = ConvexSet::simplex(2).unwrap();
    let b = ConvexSet::ball(p(&[3.0, 3.0]), 1.0).unwrap();
    let approx = grid_distance(&s, &b, &GridSearch::default()).unwrap();
    let exact = 2.5 * 2f64.sqrt() - 1.0;
    assert!((approx.value - exact).abs() < 1e-6, "{approx:?}");
    let three_d = ConvexSet::simplex(3).unwrap();
    assert!(grid_distance(&three_d, &three_d, &GridSearch::default()).is_err());
}

#[test]
fn witnesses_are_mutual_projections() {
    let mut rng = rng_from_seed(3);
    for dim in [1, 2, 3, 6] {
        for _ in 0..200 {
            let pairs = [
                (
                    random_set(SetKind::Ball, dim, &mut rng),
                    random_set(SetKind::Ball, dim, &mut rng),
                ),
                {
                    let h = random_set(SetKind::Halfspace, dim, &mut rng);
                    let ConvexSet::Halfspace(inner) = &h else {
                        unreachable!()
                    };
                    let flipped = ConvexSet::halfspace(
                        inner.normal().scale(-rng_scale(&mut rng)),
                        rng_offset(&mut rng),
                    )
                    .unwrap();
                    (h, flipped)
                },
            ];
            for (a, b) in pairs {
                let ans = analytic_distance(&a, &b).unwrap();
                let (wp, wq) = ans.witness.clone().unwrap();
                assert!((wp.distance(&wq) - ans.value).abs() <= 1e-10);
                if ans.value > 0.0 {
                    assert!(close(&a.project(&wq).unwrap(), &wp, 1e-8), "{a:?} {b:?}");
                    assert!(close(&b.project(&wp).unwrap(), &wq, 1e-8), "{a:?} {b:?}");
                }
            }
        }
    }
}

fn rng_scale(rng: &mut impl rand::Rng) -> f64 {
    rng.random_range(0.5..2.0)
}

fn rng_offset(rng: &mut impl rand::Rng) -> f64 {
    rng.random_range(-3.0..3.0)
}

/// Kinds that have a closed-form distance against themselves.
const SELF_PAIRS: [SetKind; 5] = [
    SetKind::Ball,
    SetKind::Box,
    SetKind::Halfspace,
    SetKind::Hyperplane,
    SetKind::AffineSubspace,
];

#[test]
fn analytic_distance_matches_alternating_bound() {
    // |p - P_b p| ≥ d for every p ∈ a, with equality at the witness.
    let mut rng = rng_from_seed(21);
    for kind in SELF_PAIRS {
        for dim in [1, 2, 3, 5] {
            for _ in 0..40 {
                let a = random_set(kind, dim, &mut rng);
                let b = random_set(kind, dim, &mut rng);
                let ans = analytic_distance(&a, &b).unwrap();
                let v = least_norm_difference(&a, &b).unwrap();
                assert!((v.norm() - ans.value).abs() <= 1e-9);
                for _ in 0..20 {
                    let y = random_member(&a, &mut rng);
                    assert!(b.distance_to(&y).unwrap() >= ans.value - 1e-9, "{kind:?}");
                }
                let (wp, wq) = ans.witness.unwrap();
                assert!(a.member(&wp, 1e-9).unwrap() && b.member(&wq, 1e-9).unwrap());
            }
        }
    }
}

fn case() -> impl Strategy<Value = (usize, usize, u64)> {
    (
        0..SetKind::ALL.len(),
        prop::sample::select(vec![1usize, 2, 3, 10]),
        any::<u64>(),
    )
}

fn build(kind_index: usize, dim: usize, seed: u64) -> Option<(ConvexSet, rand_chacha::ChaCha8Rng)> {
    let kind = SetKind::ALL[kind_index];
    if !kind.supports_dim(dim) {
        return None;
    }
    let mut rng = rng_from_seed(seed);
    let set = random_set(kind, dim, &mut rng);
    Some((set, rng))
}

proptest! {
    #[test]
    fn nearest_point_inequality((k, d, seed) in case()) {
        if let Some((set, mut rng)) = build(k, d, seed) {
            let x = uniform_point(d, 5.0, &mut rng);
            let y = random_member(&set, &mut rng);
            let px = set.project(&x).unwrap();
            let lhs = y.distance(&px).powi(2) + x.distance(&px).powi(2);
            prop_assert!(lhs <= x.distance(&y).powi(2) + 1e-9);
        }
    }

    #[test]
    fn firmly_nonexpansive((k, d, seed) in case()) {
        if let Some((set, mut rng)) = build(k, d, seed) {
            let x = uniform_point(d, 5.0, &mut rng);
            let y = uniform_point(d, 5.0, &mut rng);
            let (px, py) = (set.project(&x).unwrap(), set.project(&y).unwrap());
            let diff = &px - &py;
            prop_assert!(diff.norm_squared() <= diff.dot(&(&x - &y)) + 1e-9);
            prop_assert!(diff.norm() <= x.distance(&y) + 1e-12);
        }
    }

    #[test]
    fn idempotent_and_identity_on_set((k, d, seed) in case()) {
        if let Some((set, mut rng)) = build(k, d, seed) {
            let x = uniform_point(d, 5.0, &mut rng);
            let px = set.project(&x).unwrap();
            prop_assert!(set.member(&px, 1e-9).unwrap());
            prop_assert!(close(&set.project(&px).unwrap(), &px, 1e-10));
            let y = random_member(&set, &mut rng);
            prop_assert!(close(&set.project(&y).unwrap(), &y, 1e-10));
        }
    }

    #[test]
    fn projection_is_nearest_among_members((k, d, seed) in case()) {
        if let Some((set, mut rng)) = build(k, d, seed) {
            let x = uniform_point(d, 5.0, &mut rng);
            let dist = set.distance_to(&x).unwrap();
            for _ in 0..16 {
                let y = random_member(&set, &mut rng);
                prop_assert!(dist <= x.distance(&y) + 1e-12);
            }
        }
    }
}
