//! Self-check: property suites plus every builtin against its expectations.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{catalog, Overrides, ScenarioError, ScenarioReport, SCHEMA_VERSION};
use crate::diagnostics::{
    displacement_series, gap_limit_estimate, gap_series, parallelogram_bound_check,
    strong_nonexpansiveness_probe, DisplacementSeries, MONOTONE_SLACK, PARALLELOGRAM_SLACK,
};
use crate::error::Result;
use crate::iteration::{alternate, fixed_point_residual, StopRule, Trace};
use crate::oracle::brute_force_nearest;
use crate::sampling::{
    gaussian_point, random_member, random_set, random_subspace_pair, rng_from_seed, SetKind,
    GENERATOR_NAME,
};
use crate::sets::{analytic_distance, ConvexSet};
use crate::space::Point;
use crate::subspace::subspace_intersection_projector;

/// Projection used by the projection suites; swapped out to inject faults.
pub type Projector<'a> = &'a dyn Fn(&ConvexSet, &Point) -> Result<Point>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Reduced sample counts.
    pub quick: bool,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            quick: false,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyRow {
    pub result: String,
    pub check: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl VerifyRow {
    fn describe(&self) -> String {
        let mut s = match (self.residual, self.tolerance) {
            (Some(r), Some(t)) => format!("{r:.3e} (tol {t:.0e})"),
            (Some(r), None) => format!("{r:.3e}"),
            _ => String::new(),
        };
        if !self.detail.is_empty() {
            if !s.is_empty() {
                s.push_str("; ");
            }
            s.push_str(&self.detail);
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub generator: String,
    pub seed: u64,
    pub quick: bool,
    pub rows: Vec<VerifyRow>,
    pub scenarios: Vec<ScenarioReport>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn first_failure(&self) -> Option<&VerifyRow> {
        self.rows.iter().find(|r| !r.passed)
    }

    /// 0 when every row passed, 2 otherwise.
    pub fn exit_code(&self) -> u8 {
        if self.passed {
            0
        } else {
            2
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    /// One line per check, grouped under the result it supports.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let mut current = "";
        for row in &self.rows {
            if row.result != current {
                current = &row.result;
                let _ = writeln!(out, "{current}");
            }
            let status = if row.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "  {status}  {:<52} {}", row.check, row.describe());
        }
        let total = self.rows.len();
        let failed = self.rows.iter().filter(|r| !r.passed).count();
        let _ = writeln!(out, "{} of {total} checks passed", total - failed);
        out
    }
}

struct Rows(Vec<VerifyRow>);

impl Rows {
    fn bound(&mut self, result: &str, check: String, residual: f64, tolerance: f64) {
        self.0.push(VerifyRow {
            result: result.to_string(),
            check,
            passed: residual <= tolerance,
            residual: Some(residual),
            tolerance: Some(tolerance),
            detail: String::new(),
        });
    }

    fn failed(&mut self, result: &str, check: String, detail: String) {
        self.0.push(VerifyRow {
            result: result.to_string(),
            check,
            passed: false,
            residual: None,
            tolerance: None,
            detail,
        });
    }
}

const NEAREST_POINT: &str = "nearest-point characterization of projections";
const ORACLE: &str = "projections agree with brute-force nearest points";
const MONOTONE: &str = "gap sequences are nonincreasing";
const GAP_LIMIT: &str = "gap limit equals the set distance";
const DISPLACEMENT: &str = "displacements converge to the least-norm difference";
const VON_NEUMANN: &str = "von Neumann: subspaces converge to the projection onto the intersection";
const FIXED_POINTS: &str = "fixed points of P2 P1 realize the set distance";
const STRONG: &str = "projections are strongly nonexpansive along the iteration";
const REGULAR: &str = "compositions of projections are asymptotically regular";
const PARALLELOGRAM: &str = "parallelogram bound for the least-norm difference";

/// Property suites, in the order `verify` runs them: projection-level
/// suites first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    NearestPoint,
    Oracle,
    Monotone,
    Distance,
    VonNeumann,
    FixedPoint,
    StrongNonexpansive,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::NearestPoint,
        Suite::Oracle,
        Suite::Monotone,
        Suite::Distance,
        Suite::VonNeumann,
        Suite::FixedPoint,
        Suite::StrongNonexpansive,
    ];
}

/// Runs one property suite. Each suite draws from its own stream, so the
/// rows do not depend on which other suites ran.
pub fn run_suite(suite: Suite, opts: &VerifyOptions, projector: Projector<'_>) -> Vec<VerifyRow> {
    let mut rows = Rows(Vec::new());
    let scale = |full: usize, quick: usize| if opts.quick { quick } else { full };
    let k = Suite::ALL.iter().position(|&s| s == suite).expect("listed") as u64 + 1;
    let rng = &mut rng_from_seed(opts.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ k);
    match suite {
        Suite::NearestPoint => nearest_point_suite(&mut rows, projector, scale(1000, 100), rng),
        Suite::Oracle => oracle_suite(&mut rows, projector, scale(3, 1), rng),
        Suite::Monotone => monotone_suite(&mut rows, scale(200, 40), rng),
        Suite::Distance => distance_suite(&mut rows, scale(200, 40), rng),
        Suite::VonNeumann => von_neumann_suite(&mut rows, scale(20, 5), rng),
        Suite::FixedPoint => fixed_point_suite(&mut rows),
        Suite::StrongNonexpansive => strong_nonexpansive_suite(&mut rows),
    }
    rows.0
}

/// Every property suite, then every builtin with its expectations.
pub fn verify(
    opts: &VerifyOptions,
    projector: Projector<'_>,
    out_dir: Option<&Path>,
) -> std::result::Result<VerifyReport, ScenarioError> {
    let mut rows = Rows(
        Suite::ALL
            .iter()
            .flat_map(|&s| run_suite(s, opts, projector))
            .collect(),
    );

    let mut scenarios = Vec::new();
    for entry in catalog() {
        let outcome = match entry
            .config()
            .prepare(Overrides::default())
            .and_then(|s| s.execute())
        {
            Ok(o) => o,
            Err(e) => {
                rows.failed(entry.result, format!("{}: run", entry.name), e.to_string());
                continue;
            }
        };
        if let Some(dir) = out_dir {
            outcome.write(dir)?;
        }
        let report = &outcome.report;
        for check in report.checks.iter().flatten() {
            rows.0.push(VerifyRow {
                result: entry.result.to_string(),
                check: format!("{}: {}", entry.name, check.name),
                passed: check.passed,
                residual: check.residual,
                tolerance: check.tolerance,
                detail: format!("expected {}, observed {}", check.expected, check.observed),
            });
        }
        rows.bound(
            MONOTONE,
            format!("{}: worst gap increase", entry.name),
            outcome.trace.gap_monitor().worst_increase.max(0.0),
            MONOTONE_SLACK,
        );
        rows.bound(
            REGULAR,
            format!("{}: tail of |x_(2n+2) - x_2n|", entry.name),
            report.asymptotic_regularity_tail,
            1e-5,
        );
        if report.verdict.class == crate::diagnostics::TrajectoryClass::ConvergedAttainedGap {
            parallelogram_rows(&mut rows, entry.name, &outcome.trace);
        }
        scenarios.push(outcome.report);
    }

    let passed = rows.0.iter().all(|r| r.passed);
    Ok(VerifyReport {
        schema_version: SCHEMA_VERSION,
        generator: GENERATOR_NAME.to_string(),
        seed: opts.seed,
        quick: opts.quick,
        rows: rows.0,
        scenarios,
        passed,
    })
}

const SUITE_DIMS: [usize; 4] = [1, 2, 3, 10];

fn nearest_point_suite<R: Rng>(rows: &mut Rows, project: Projector<'_>, cases: usize, rng: &mut R) {
    for kind in SetKind::ALL {
        let mut worst_ineq = 0.0_f64;
        let mut worst_firm = 0.0_f64;
        let mut error = None;
        let mut count = 0;
        for &dim in SUITE_DIMS.iter().filter(|&&d| kind.supports_dim(d)) {
            for _ in 0..cases {
                let set = random_set(kind, dim, rng);
                let x = gaussian_point(dim, 3.0, rng);
                let z = gaussian_point(dim, 3.0, rng);
                let y = random_member(&set, rng);
                let (px, pz) = match (project(&set, &x), project(&set, &z)) {
                    (Ok(px), Ok(pz)) => (px, pz),
                    (Err(e), _) | (_, Err(e)) => {
                        error.get_or_insert(format!("dimension {dim}: {e}"));
                        continue;
                    }
                };
                count += 1;
                let ineq =
                    y.distance(&px).powi(2) + x.distance(&px).powi(2) - x.distance(&y).powi(2);
                let diff = &px - &pz;
                let firm = diff.norm_squared() - diff.dot(&(&x - &z));
                worst_ineq = worst_ineq.max(ineq);
                worst_firm = worst_firm.max(firm);
            }
        }
        let name = kind.name();
        if let Some(e) = error {
            rows.failed(NEAREST_POINT, format!("{name}: projection"), e);
        }
        rows.bound(
            NEAREST_POINT,
            format!("{name}: |y-Px|^2+|x-Px|^2 <= |x-y|^2 ({count} cases)"),
            worst_ineq,
            1e-9,
        );
        rows.bound(
            NEAREST_POINT,
            format!("{name}: firm nonexpansiveness ({count} cases)"),
            worst_firm,
            1e-9,
        );
    }
}

fn oracle_suite<R: Rng>(rows: &mut Rows, project: Projector<'_>, sets: usize, rng: &mut R) {
    for kind in SetKind::ALL {
        let mut worst = 0.0_f64;
        let mut error = None;
        for _ in 0..sets {
            let set = random_set(kind, 2, rng);
            for _ in 0..5 {
                let x = gaussian_point(2, 3.0, rng);
                match (project(&set, &x), brute_force_nearest(&set, &x, 1e-3)) {
                    (Ok(p), Ok(b)) => worst = worst.max(p.distance(&b)),
                    (Err(e), _) | (_, Err(e)) => {
                        error.get_or_insert(e.to_string());
                    }
                }
            }
        }
        let check = format!(
            "{}: planar grid step 1e-3, {} queries",
            kind.name(),
            5 * sets
        );
        match error {
            Some(e) => rows.failed(ORACLE, check, e),
            None => rows.bound(ORACLE, check, worst, 2e-3),
        }
    }
}

fn random_pair<R: Rng>(kinds: &[SetKind], dims: &[usize], rng: &mut R) -> (ConvexSet, ConvexSet) {
    loop {
        let dim = dims[rng.random_range(0..dims.len())];
        let ka = kinds[rng.random_range(0..kinds.len())];
        let kb = kinds[rng.random_range(0..kinds.len())];
        if ka.supports_dim(dim) && kb.supports_dim(dim) {
            return (random_set(ka, dim, rng), random_set(kb, dim, rng));
        }
    }
}

fn monotone_suite<R: Rng>(rows: &mut Rows, cases: usize, rng: &mut R) {
    let rule = StopRule {
        max_pairs: 500,
        ..StopRule::default()
    };
    let mut worst = 0.0_f64;
    for _ in 0..cases {
        let (a, b) = random_pair(&SetKind::ALL, &[2, 3], rng);
        let x0 = gaussian_point(a.ambient_dim(), 3.0, rng);
        match alternate(&a, &b, &x0, rule).and_then(|t| gap_series(&t)) {
            Ok(g) => worst = worst.max(g.worst_increase()),
            Err(e) => {
                rows.failed(MONOTONE, "random pairs: run".into(), e.to_string());
                return;
            }
        }
    }
    rows.bound(
        MONOTONE,
        format!("random catalog pairs: worst gap increase ({cases} runs)"),
        worst.max(0.0),
        MONOTONE_SLACK,
    );
}

/// Pairs whose boundaries are nearly parallel converge too slowly for a
/// fixed budget; the property suite leaves them out.
fn well_conditioned(a: &ConvexSet, b: &ConvexSet) -> bool {
    let normal = |s: &ConvexSet| match s {
        ConvexSet::Halfspace(h) => Some(h.normal().clone()),
        ConvexSet::Hyperplane(h) => Some(h.normal().clone()),
        _ => None,
    };
    match (normal(a), normal(b)) {
        (Some(n), Some(m)) => {
            let cos = (n.dot(&m) / (n.norm() * m.norm())).abs();
            !(0.99..=1.0 - 1e-12).contains(&cos)
        }
        _ => true,
    }
}

fn distance_suite<R: Rng>(rows: &mut Rows, cases: usize, rng: &mut R) {
    let kinds = [
        SetKind::Ball,
        SetKind::Halfspace,
        SetKind::Hyperplane,
        SetKind::Box,
    ];
    let mut worst_gap = 0.0_f64;
    let mut worst_disp = 0.0_f64;
    let mut run = 0;
    let mut attempts = 0;
    while run < cases && attempts < 20 * cases {
        attempts += 1;
        let (a, b) = random_pair(&kinds, &[2, 3], rng);
        let Ok(answer) = analytic_distance(&a, &b) else {
            continue;
        };
        if !answer.attained || !well_conditioned(&a, &b) {
            continue;
        }
        let x0 = gaussian_point(a.ambient_dim(), 3.0, rng);
        let result = alternate(&a, &b, &x0, StopRule::default()).and_then(|t| {
            let gap = gap_limit_estimate(&gap_series(&t)?)?;
            let disp = displacement_series(&t)?;
            Ok((gap, disp))
        });
        let (gap, disp) = match result {
            Ok(r) => r,
            Err(e) => {
                rows.failed(GAP_LIMIT, "random pairs: run".into(), e.to_string());
                return;
            }
        };
        run += 1;
        let excess = (gap.value - answer.value).abs() - gap.uncertainty.max(1e-5);
        worst_gap = worst_gap.max(excess);
        if let (Some((p, q)), Some(last)) = (&answer.witness, disp.even_disp.last()) {
            worst_disp = worst_disp.max(last.distance(&(q - p)));
        }
    }
    rows.bound(
        GAP_LIMIT,
        format!("random analytic pairs: |gap - d| beyond max(1e-5, uncertainty) ({run} runs)"),
        worst_gap,
        0.0,
    );
    rows.bound(
        DISPLACEMENT,
        format!("random analytic pairs: |displacement - v| ({run} runs)"),
        worst_disp,
        1e-4,
    );
}

fn von_neumann_suite<R: Rng>(rows: &mut Rows, cases: usize, rng: &mut R) {
    let dim = 6;
    let mut worst = 0.0_f64;
    let mut redraws = 0;
    for _ in 0..cases {
        let ((s1, s2), r) = random_subspace_pair(dim, rng);
        redraws += r;
        let result = (|| {
            let x0 = gaussian_point(dim, 1.0, rng);
            let target = subspace_intersection_projector(&s1, &s2)?.apply(&x0)?;
            let t = alternate(&s1, &s2, &x0, StopRule::default())?;
            Ok::<_, crate::error::Error>(t.last().distance(&target))
        })();
        match result {
            Ok(d) => worst = worst.max(d),
            Err(e) => {
                rows.failed(VON_NEUMANN, "random subspaces: run".into(), e.to_string());
                return;
            }
        }
    }
    rows.bound(
        VON_NEUMANN,
        format!(
            "random subspace pairs in R^6: |x_N - P_S x0| ({cases} runs, {redraws} near-parallel redrawn)"
        ),
        worst,
        1e-6,
    );
}

fn two_balls() -> (ConvexSet, ConvexSet) {
    let c = |x: f64, r: f64| ConvexSet::ball(Point::from_slice_unchecked(&[x, 0.0]), r);
    (
        c(0.0, 1.0).expect("valid ball"),
        c(4.0, 1.0).expect("valid ball"),
    )
}

/// Disagreements between "z is fixed by P2 P1" and "|z - P1 z| = d" over a
/// polar grid of the second ball, which contains the unique fixed point.
fn fixed_point_suite(rows: &mut Rows) {
    let (b1, b2) = two_balls();
    let mut disagreements = 0usize;
    for i in 0..10 {
        for j in 0..10 {
            let r = i as f64 / 9.0;
            let a = std::f64::consts::PI + std::f64::consts::TAU * j as f64 / 10.0;
            let z = Point::from_slice_unchecked(&[4.0 + r * a.cos(), r * a.sin()]);
            let fixed = fixed_point_residual(&b1, &b2, &z).is_ok_and(|f| f <= 1e-8);
            let gap = b1.distance_to(&z).is_ok_and(|g| (g - 2.0).abs() <= 1e-6);
            if fixed != gap {
                disagreements += 1;
            }
        }
    }
    rows.bound(
        FIXED_POINTS,
        "two balls, 100 grid points: fixed <=> gap = d (disagreements)".into(),
        disagreements as f64,
        0.0,
    );
}

fn strong_nonexpansive_suite(rows: &mut Rows) {
    let (b1, b2) = two_balls();
    let rule = StopRule {
        max_pairs: 200,
        gap_stall_tol: 0.0,
        ..StopRule::default()
    };
    let x0 = Point::from_slice_unchecked(&[0.0, 3.0]);
    let check = "two balls: odd iterates against P1 z = (1, 0)".to_string();
    let result = alternate(&b1, &b2, &x0, rule).and_then(|t| {
        let odds: Vec<Point> = t.stored().iter().skip(1).step_by(2).cloned().collect();
        let anchor = vec![Point::from_slice_unchecked(&[1.0, 0.0]); odds.len()];
        strong_nonexpansiveness_probe(&b2, &odds, &anchor)
    });
    match result {
        Ok(r) => rows.bound(STRONG, check, r, 1e-6),
        Err(e) => rows.failed(STRONG, check, e.to_string()),
    }
}

/// Checks the bound at every retained displacement that lies in `C2 - C1`.
fn parallelogram_rows(rows: &mut Rows, name: &str, t: &Trace) {
    let (a, b) = t.sets();
    let check = format!("{name}: every displacement y, v from the oracle");
    let result = (|| {
        let v = crate::sets::least_norm_difference(a, b)?;
        let ds: DisplacementSeries = displacement_series(t)?;
        let skip_first = usize::from(ds.first_pair == 0);
        let mut violations = 0usize;
        let mut worst = f64::NEG_INFINITY;
        for y in ds
            .even_disp
            .iter()
            .chain(ds.odd_disp.iter().skip(skip_first))
        {
            if !parallelogram_bound_check(y, &v)? {
                violations += 1;
            }
            worst = worst.max(y.distance(&v).powi(2) - 2.0 * (y.norm_squared() - v.norm_squared()));
        }
        Ok::<_, crate::error::Error>((violations, worst))
    })();
    match result {
        Ok((0, worst)) => rows.bound(PARALLELOGRAM, check, worst.max(0.0), PARALLELOGRAM_SLACK),
        Ok((n, worst)) => rows.0.push(VerifyRow {
            result: PARALLELOGRAM.to_string(),
            check,
            passed: false,
            residual: Some(worst),
            tolerance: Some(PARALLELOGRAM_SLACK),
            detail: format!("{n} violations"),
        }),
        Err(e) => rows.failed(PARALLELOGRAM, check, e.to_string()),
    }
}
