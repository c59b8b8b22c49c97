//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use altproj::diagnostics::{
    displacement_estimate, displacement_series, gap_series, parallelogram_bound_check, tail_max,
    TrajectoryClass,
};
use altproj::sampling::{gaussian_point, random_subspace_pair, rng_from_seed};
use altproj::scenario::{
    builtin, catalog, run_suite, verify, Outcome, Overrides, Suite, VerifyOptions, VerifyRow,
};
use altproj::subspace::subspace_intersection_projector;
use altproj::{alternate, ConvexSet, Point, StopReason, StopRule};

struct Verdict {
    passed: bool,
    summary: String,
}

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Verdict + 'a>);

fn verdict(passed: bool, summary: String) -> Verdict {
    Verdict { passed, summary }
}

fn pt(c: &[f64]) -> Point {
    Point::new(c.to_vec()).unwrap()
}

fn execute(name: &str) -> Outcome {
    builtin(name)
        .unwrap_or_else(|| panic!("no builtin {name}"))
        .prepare(Overrides::default())
        .unwrap()
        .execute()
        .unwrap()
}

fn project(set: &ConvexSet, x: &Point) -> altproj::Result<Point> {
    set.project(x)
}

fn all_rows_pass(rows: &[VerifyRow]) -> (bool, String) {
    let failed: Vec<String> = rows
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.check.clone())
        .collect();
    let summary = if failed.is_empty() {
        format!("{} checks", rows.len())
    } else {
        format!(
            "{} of {} checks failed: {}",
            failed.len(),
            rows.len(),
            failed.join("; ")
        )
    };
    (failed.is_empty(), summary)
}

fn attained() -> Verdict {
    let start = Instant::now();
    let o = execute("attained-balls");
    let secs = start.elapsed().as_secs_f64();
    let g = gap_series(&o.trace).unwrap();
    let err = (o.report.gap_limit.value - 2.0).abs();
    let worst = g.worst_increase();
    verdict(
        o.trace.pairs() <= 2_000 && err <= 1e-5 && g.is_monotone(1e-12) && secs < 1.0,
        format!(
            "{} pairs, |gap - 2| = {err:.2e}, worst gap increase {worst:.2e}, {secs:.3} s",
            o.trace.pairs()
        ),
    )
}

fn unattained(o: &Outcome, secs: f64) -> Verdict {
    let g = gap_series(&o.trace).unwrap();
    let even_tail = tail_max(&g.even);
    let x0 = o.trace.x0().norm();
    let growth = o.trace.last().norm() / (1.0 + x0);
    let class = o.report.verdict.class;
    let before_budget = o.trace.stop_reason() != StopReason::MaxIterations;
    verdict(
        even_tail <= 1e-4
            && growth > 100.0
            && before_budget
            && class == TrajectoryClass::DivergingNorm
            && secs < 5.0,
        format!(
            "even-gap tail {even_tail:.3e}, |x_N|/(1+|x_0|) = {growth:.3}, stopped by {:?} after {} pairs, verdict {class:?}, {secs:.2} s",
            o.trace.stop_reason(),
            o.trace.pairs()
        ),
    )
}

fn displacement() -> Verdict {
    let o = execute("displacement-balls");
    let ds = displacement_series(&o.trace).unwrap();
    let est = displacement_estimate(&ds).unwrap();
    let v = pt(&[2.0, 0.0]);
    let err = est.value.distance(&v);
    // x_0 - x_1 is not a difference of points of the two sets.
    let skip = usize::from(ds.first_pair == 0);
    let ys: Vec<&Point> = ds
        .even_disp
        .iter()
        .chain(ds.odd_disp.iter().skip(skip))
        .collect();
    let violations = ys
        .iter()
        .filter(|y| !parallelogram_bound_check(y, &v).unwrap())
        .count();
    verdict(
        err <= 1e-4 && est.residual <= 1e-4 && violations == 0,
        format!(
            "|estimate - (2,0)| = {err:.2e}, |even - odd| = {:.2e}, bound violated at {violations} of {} displacements",
            est.residual,
            ys.len()
        ),
    )
}

fn von_neumann() -> Verdict {
    let start = Instant::now();
    let mut rng = rng_from_seed(4);
    let mut worst = 0.0_f64;
    let mut redraws = 0;
    for _ in 0..20 {
        let ((s1, s2), r) = random_subspace_pair(6, &mut rng);
        redraws += r;
        let x0 = gaussian_point(6, 1.0, &mut rng);
        let target = subspace_intersection_projector(&s1, &s2)
            .unwrap()
            .apply(&x0)
            .unwrap();
        let t = alternate(&s1, &s2, &x0, StopRule::default()).unwrap();
        worst = worst.max(t.last().distance(&target));
    }
    let builtin_run = execute("vn-subspaces");
    let builtin_ok = builtin_run.report.passed == Some(true);
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst <= 1e-6 && builtin_ok && secs < 2.0,
        format!(
            "worst |x_N - P_S x0| = {worst:.2e} over 20 pairs ({redraws} near-parallel redrawn), builtin passed: {builtin_ok}, {secs:.3} s"
        ),
    )
}

fn intersection() -> Verdict {
    let b = execute("bregman-intersection");
    let e = &b.report.verdict.evidence;
    let membership = e.membership_residual[0].max(e.membership_residual[1]);
    let spread = e.tail_spread;
    let d = execute("dykstra-contrast");
    let dykstra_err = d.trace.last().distance(&pt(&[0.5, 0.5]));
    verdict(
        membership <= 1e-6 && spread < 1e-6 && dykstra_err <= 1e-6,
        format!(
            "membership residual {membership:.2e}, tail diameter {spread:.2e}, Dykstra |x_N - (0.5,0.5)| = {dykstra_err:.2e}"
        ),
    )
}

fn nearest_point() -> Verdict {
    let start = Instant::now();
    let rows = run_suite(Suite::NearestPoint, &VerifyOptions::default(), &project);
    let secs = start.elapsed().as_secs_f64();
    let (ok, summary) = all_rows_pass(&rows);
    verdict(ok && secs < 10.0, format!("{summary}, {secs:.2} s"))
}

fn regularity(unattained: &Outcome) -> Verdict {
    let mut worst = (0.0_f64, "");
    for entry in catalog() {
        let tail = if entry.name == "unattained-epigraph" {
            unattained.report.asymptotic_regularity_tail
        } else {
            execute(entry.name).report.asymptotic_regularity_tail
        };
        if tail >= worst.0 {
            worst = (tail, entry.name);
        }
    }
    verdict(
        worst.0 < 1e-5,
        format!(
            "largest tail {:.2e} ({}) over {} builtins",
            worst.0,
            worst.1,
            catalog().len()
        ),
    )
}

fn fixed_points() -> Verdict {
    let (ok, summary) = all_rows_pass(&run_suite(
        Suite::FixedPoint,
        &VerifyOptions::default(),
        &project,
    ));
    verdict(ok, summary)
}

fn oracle() -> Verdict {
    let (ok, summary) = all_rows_pass(&run_suite(
        Suite::Oracle,
        &VerifyOptions::default(),
        &project,
    ));
    verdict(ok, summary)
}

fn quick_verify(out: &Path) -> (Vec<u8>, Vec<u8>) {
    let output = Command::new(env!("CARGO_BIN_EXE_altproj"))
        .args(["verify", "--quick", "--seed", "1", "--out"])
        .arg(out)
        .output()
        .unwrap();
    (
        output.stdout,
        std::fs::read(out.join("verify.report.json")).unwrap(),
    )
}

fn determinism() -> Verdict {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (out_a, json_a) = quick_verify(a.path());
    let (out_b, json_b) = quick_verify(b.path());
    let mut same_files = true;
    for entry in std::fs::read_dir(a.path()).unwrap() {
        let name = entry.unwrap().file_name();
        same_files &=
            std::fs::read(a.path().join(&name)).ok() == std::fs::read(b.path().join(&name)).ok();
    }
    let identical = out_a == out_b && json_a == json_b && same_files;

    let start = Instant::now();
    let full = verify(&VerifyOptions::default(), &project, None).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let passed = full.rows.iter().filter(|r| r.passed).count();
    verdict(
        identical && secs < 60.0,
        format!(
            "quick reports identical: {identical}; full verify {secs:.1} s with {passed} of {} checks passing",
            full.rows.len()
        ),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let unattained_run = execute("unattained-epigraph");
    let unattained_secs = start.elapsed().as_secs_f64();

    let criteria: Vec<Criterion> = vec![
        ("attained gap between two balls", Box::new(attained)),
        (
            "unattained gap, diverging iterates",
            Box::new(|| unattained(&unattained_run, unattained_secs)),
        ),
        (
            "displacement vector and parallelogram bound",
            Box::new(displacement),
        ),
        ("random subspace pairs in R^6", Box::new(von_neumann)),
        (
            "intersecting sets and Dykstra contrast",
            Box::new(intersection),
        ),
        (
            "nearest-point inequalities, 1000 cases per set and dimension",
            Box::new(nearest_point),
        ),
        (
            "asymptotic regularity on every builtin",
            Box::new(|| regularity(&unattained_run)),
        ),
        ("fixed points versus gap on a grid", Box::new(fixed_points)),
        ("projections against brute-force search", Box::new(oracle)),
        ("determinism and full verify runtime", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        let status = if v.passed { "PASS" } else { "FAIL" };
        if !v.passed {
            failed += 1;
        }
        println!("criterion {:>2}: {status}  {name}: {}", i + 1, v.summary);
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
