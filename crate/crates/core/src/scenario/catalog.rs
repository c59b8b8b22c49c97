//! Built-in scenarios, one per result they exercise.

use super::{Expected, RandomSpec, RandomStart, ScenarioConfig, StartPoint, SCHEMA_VERSION};
use crate::diagnostics::TrajectoryClass;
use crate::iteration::{Algorithm, StopRule};
use crate::sampling::{gaussian_point, rng_from_seed};
use crate::sets::SetDescriptor;
use crate::space::Point;

#[derive(Clone, Copy, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    /// The result the scenario exercises.
    pub result: &'static str,
    build: fn() -> ScenarioConfig,
}

impl CatalogEntry {
    pub fn config(&self) -> ScenarioConfig {
        (self.build)()
    }
}

const ENTRIES: [CatalogEntry; 8] = [
    CatalogEntry {
        name: "vn-subspaces",
        result: "von Neumann: subspaces converge to the projection onto the intersection",
        build: vn_subspaces,
    },
    CatalogEntry {
        name: "bregman-intersection",
        result: "intersecting sets: iterates converge into the intersection",
        build: bregman_intersection,
    },
    CatalogEntry {
        name: "attained-balls",
        result: "gap limit equals the set distance (attained)",
        build: attained_balls,
    },
    CatalogEntry {
        name: "unattained-epigraph",
        result: "distance not attained: iterates diverge in norm",
        build: unattained_epigraph,
    },
    CatalogEntry {
        name: "symmetric-sets",
        result: "symmetric sets: iterates converge in norm",
        build: symmetric_sets,
    },
    CatalogEntry {
        name: "displacement-balls",
        result: "displacements converge to the least-norm difference",
        build: displacement_balls,
    },
    CatalogEntry {
        name: "dykstra-contrast",
        result: "Dykstra's variant reaches the nearest intersection point",
        build: dykstra_contrast,
    },
    CatalogEntry {
        name: "trivial",
        result: "start inside the intersection is a fixed point",
        build: trivial,
    },
];

pub fn catalog() -> &'static [CatalogEntry] {
    &ENTRIES
}

pub fn builtin(name: &str) -> Option<ScenarioConfig> {
    ENTRIES
        .iter()
        .find(|e| e.name == name)
        .map(CatalogEntry::config)
}

fn pt(c: &[f64]) -> Point {
    Point::new(c.to_vec()).expect("catalog points are finite")
}

fn ball(center: &[f64], radius: f64) -> SetDescriptor {
    SetDescriptor::Ball {
        center: pt(center),
        radius,
    }
}

fn unit_box() -> SetDescriptor {
    SetDescriptor::Box {
        lower: pt(&[0.0, 0.0]),
        upper: pt(&[1.0, 1.0]),
    }
}

fn below_diagonal() -> SetDescriptor {
    SetDescriptor::Halfspace {
        normal: pt(&[1.0, 1.0]),
        offset: 1.0,
    }
}

fn expect(distance: f64, attained: bool, v: &[f64], class: TrajectoryClass) -> Expected {
    Expected {
        distance: Some(distance),
        attained: Some(attained),
        v: Some(pt(v)),
        verdict_class: Some(class),
        ..Expected::default()
    }
}

fn config(name: &str, set_a: SetDescriptor, set_b: SetDescriptor, x0: &[f64]) -> ScenarioConfig {
    ScenarioConfig {
        schema_version: SCHEMA_VERSION,
        name: name.to_string(),
        dimension: x0.len(),
        set_a,
        set_b,
        x0: StartPoint::Fixed(pt(x0)),
        stop: StopRule::default(),
        algorithm: Algorithm::Alternate,
        expected: None,
    }
}

/// Seed for the subspace bases of `vn-subspaces`.
const SUBSPACE_SEED: u64 = 6;

fn vn_subspaces() -> ScenarioConfig {
    let dim = 6;
    let mut rng = rng_from_seed(SUBSPACE_SEED);
    let mut span = |k: usize| SetDescriptor::AffineSubspace {
        basis: (0..k).map(|_| gaussian_point(dim, 1.0, &mut rng)).collect(),
        anchor: Point::zeros(dim),
    };
    // A 4- and a 3-dimensional subspace of R^6 meet in a line.
    let (s1, s2) = (span(4), span(3));
    let mut c = config("vn-subspaces", s1, s2, &[0.0; 6]);
    c.x0 = StartPoint::Random(RandomSpec {
        random: RandomStart {
            seed: 1,
            scale: 1.0,
        },
    });
    c.expected = Some(expect(
        0.0,
        true,
        &[0.0; 6],
        TrajectoryClass::ConvergedIntoIntersection,
    ));
    c
}

fn bregman_intersection() -> ScenarioConfig {
    let mut c = config(
        "bregman-intersection",
        unit_box(),
        below_diagonal(),
        &[2.0, 0.5],
    );
    c.expected = Some(Expected {
        limit: Some(pt(&[0.75, 0.25])),
        ..expect(
            0.0,
            true,
            &[0.0, 0.0],
            TrajectoryClass::ConvergedIntoIntersection,
        )
    });
    c
}

fn attained_balls() -> ScenarioConfig {
    let mut c = config(
        "attained-balls",
        ball(&[0.0, 0.0], 1.0),
        ball(&[4.0, 0.0], 1.0),
        &[0.0, 3.0],
    );
    c.stop.max_pairs = 2_000;
    c.expected = Some(expect(
        2.0,
        true,
        &[2.0, 0.0],
        TrajectoryClass::ConvergedAttainedGap,
    ));
    c
}

fn unattained_epigraph() -> ScenarioConfig {
    let mut c = config(
        "unattained-epigraph",
        SetDescriptor::Halfspace {
            normal: pt(&[0.0, 1.0]),
            offset: 0.0,
        },
        SetDescriptor::Epigraph1D {
            function: "exp-neg".into(),
        },
        &[0.0, 0.0],
    );
    // The gap falls like (2n)^(-1/2); the budget leaves room to reach 1e-4.
    c.stop.max_pairs = 100_000_000;
    c.expected = Some(Expected {
        distance_tol: Some(1e-4),
        ..expect(0.0, false, &[0.0, 0.0], TrajectoryClass::DivergingNorm)
    });
    c
}

fn symmetric_sets() -> ScenarioConfig {
    let mut c = config(
        "symmetric-sets",
        SetDescriptor::Box {
            lower: pt(&[-1.0, -0.5]),
            upper: pt(&[1.0, 0.5]),
        },
        SetDescriptor::Hyperplane {
            normal: pt(&[2.0, -1.0]),
            offset: 0.0,
        },
        &[3.0, 1.0],
    );
    c.expected = Some(expect(
        0.0,
        true,
        &[0.0, 0.0],
        TrajectoryClass::ConvergedIntoIntersection,
    ));
    c
}

fn displacement_balls() -> ScenarioConfig {
    let mut c = config(
        "displacement-balls",
        ball(&[0.0, 0.0], 1.5),
        ball(&[4.0, 0.0], 0.5),
        &[-1.0, 2.0],
    );
    c.expected = Some(expect(
        2.0,
        true,
        &[2.0, 0.0],
        TrajectoryClass::ConvergedAttainedGap,
    ));
    c
}

fn dykstra_contrast() -> ScenarioConfig {
    let mut c = config(
        "dykstra-contrast",
        unit_box(),
        below_diagonal(),
        &[1.0, 1.0],
    );
    c.algorithm = Algorithm::Dykstra;
    c.expected = Some(Expected {
        limit: Some(pt(&[0.5, 0.5])),
        ..expect(
            0.0,
            true,
            &[0.0, 0.0],
            TrajectoryClass::ConvergedIntoIntersection,
        )
    });
    c
}

fn trivial() -> ScenarioConfig {
    let mut c = config(
        "trivial",
        ball(&[0.0, 0.0], 1.0),
        SetDescriptor::Halfspace {
            normal: pt(&[1.0, 0.0]),
            offset: 0.5,
        },
        &[0.0, 0.0],
    );
    c.stop.max_pairs = 1;
    c.expected = Some(Expected {
        limit: Some(pt(&[0.0, 0.0])),
        ..expect(
            0.0,
            true,
            &[0.0, 0.0],
            TrajectoryClass::ConvergedIntoIntersection,
        )
    });
    c
}
