//! Quantitative verdicts on a finished [`Trace`]: gap limits, displacement
//! vectors, asymptotic regularity and trajectory classification.
//!
//! Limits are read off the last iterates. Both gap subsequences decrease
//! monotonically, so the last even gap is an upper bound on their common
//! limit; no extrapolation is attempted.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iteration::{fixed_point_residual, StopReason, Trace};
use crate::sets::ConvexSet;
use crate::space::Point;

/// Slack allowed in the monotone gap chain.
pub const MONOTONE_SLACK: f64 = 1e-12;
/// Slack in the parallelogram bound `|y - v|² ≤ 2(|y|² - |v|²)`.
pub const PARALLELOGRAM_SLACK: f64 = 1e-9;
/// Number of trailing entries inspected by tail diagnostics.
pub const TAIL_LEN: usize = 10;

/// `odd[k] = |x_{2k+1} - x_{2k}|`, `even[k] = |x_{2k+2} - x_{2k+1}|` for
/// `k = first_pair, first_pair + 1, ...`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapSeries {
    pub first_pair: usize,
    pub odd: Vec<f64>,
    pub even: Vec<f64>,
}

/// Drops a leading odd-indexed iterate so the slice starts at some `x_{2k}`.
fn align_even(first_index: usize, points: &[Point]) -> (usize, &[Point]) {
    if first_index % 2 == 1 && !points.is_empty() {
        (first_index + 1, &points[1..])
    } else {
        (first_index, points)
    }
}

impl GapSeries {
    /// Builds the series from contiguous iterates `x_{first_index}, ...`.
    pub fn from_iterates(first_index: usize, points: &[Point]) -> Result<Self> {
        let (start, pts) = align_even(first_index, points);
        if pts.len() < 3 {
            return Err(Error::TraceTooShort {
                needed: 3,
                have: pts.len(),
            });
        }
        let pairs = (pts.len() - 1) / 2;
        let mut odd = Vec::with_capacity(pairs);
        let mut even = Vec::with_capacity(pairs);
        for k in 0..pairs {
            odd.push(pts[2 * k + 1].distance(&pts[2 * k]));
            even.push(pts[2 * k + 2].distance(&pts[2 * k + 1]));
        }
        Ok(GapSeries {
            first_pair: start / 2,
            odd,
            even,
        })
    }

    pub fn len(&self) -> usize {
        self.even.len()
    }

    pub fn is_empty(&self) -> bool {
        self.even.is_empty()
    }

    /// Gaps in iterate order, skipping `|x_1 - x_0|` (the start point is
    /// arbitrary, so the chain begins at `|x_2 - x_1|`).
    fn chain(&self) -> impl Iterator<Item = f64> + '_ {
        self.odd
            .iter()
            .zip(&self.even)
            .enumerate()
            .flat_map(move |(k, (&o, &e))| {
                let skip_odd = self.first_pair + k == 0;
                (!skip_odd)
                    .then_some(o)
                    .into_iter()
                    .chain(std::iter::once(e))
            })
    }

    /// Largest increase between consecutive gaps of the chain
    /// `even[k] ≤ odd[k] ≤ even[k-1]`; nonpositive when it is monotone.
    pub fn worst_increase(&self) -> f64 {
        let gaps: Vec<f64> = self.chain().collect();
        gaps.windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_monotone(&self, slack: f64) -> bool {
        self.worst_increase() <= slack
    }
}

pub fn gap_series(t: &Trace) -> Result<GapSeries> {
    GapSeries::from_iterates(t.first_index(), t.stored())
}

/// Upper-bound estimate of the common gap limit with a one-sided error bar.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    pub value: f64,
    /// `(last odd - last even) + |last even - previous even|`.
    pub uncertainty: f64,
}

pub fn gap_limit_estimate(g: &GapSeries) -> Result<GapEstimate> {
    let (Some(&odd), Some(&even)) = (g.odd.last(), g.even.last()) else {
        return Err(Error::TraceTooShort { needed: 3, have: 0 });
    };
    let stall = match g.even.len() {
        n if n >= 2 => (even - g.even[n - 2]).abs(),
        _ => 0.0,
    };
    Ok(GapEstimate {
        value: even,
        uncertainty: (odd - even).max(0.0) + stall,
    })
}

/// `even_disp[k] = x_{2k+2} - x_{2k+1}`, `odd_disp[k] = x_{2k} - x_{2k+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DisplacementSeries {
    pub first_pair: usize,
    pub even_disp: Vec<Point>,
    pub odd_disp: Vec<Point>,
}

impl DisplacementSeries {
    pub fn from_iterates(first_index: usize, points: &[Point]) -> Result<Self> {
        let (start, pts) = align_even(first_index, points);
        if pts.len() < 3 {
            return Err(Error::TraceTooShort {
                needed: 3,
                have: pts.len(),
            });
        }
        let pairs = (pts.len() - 1) / 2;
        let (mut even_disp, mut odd_disp) = (Vec::with_capacity(pairs), Vec::with_capacity(pairs));
        for k in 0..pairs {
            even_disp.push(&pts[2 * k + 2] - &pts[2 * k + 1]);
            odd_disp.push(&pts[2 * k] - &pts[2 * k + 1]);
        }
        Ok(DisplacementSeries {
            first_pair: start / 2,
            even_disp,
            odd_disp,
        })
    }
}

pub fn displacement_series(t: &Trace) -> Result<DisplacementSeries> {
    DisplacementSeries::from_iterates(t.first_index(), t.stored())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisplacementEstimate {
    pub value: Point,
    /// `|even_disp[last] - odd_disp[last]|`; both sequences share the limit.
    pub residual: f64,
}

pub fn displacement_estimate(ds: &DisplacementSeries) -> Result<DisplacementEstimate> {
    let (Some(e), Some(o)) = (ds.even_disp.last(), ds.odd_disp.last()) else {
        return Err(Error::TraceTooShort { needed: 3, have: 0 });
    };
    Ok(DisplacementEstimate {
        value: e.clone(),
        residual: e.distance(o),
    })
}

/// Checks `|y - v|² ≤ 2(|y|² - |v|²)` for `y ∈ K` and `v` the least-norm
/// point of the closed convex set `K`. The caller vouches for
/// `|(y + v)/2| ≥ |v|`; a violation means `v` is not least-norm.
pub fn parallelogram_bound_check(y: &Point, v: &Point) -> Result<bool> {
    y.check_dim(v.dim())?;
    let mid = y.lerp(v, 0.5).norm();
    if mid < v.norm() - PARALLELOGRAM_SLACK {
        return Err(Error::Precondition(format!(
            "|(y + v)/2| = {mid} < |v| = {}: v is not the least-norm point",
            v.norm()
        )));
    }
    let lhs = y.distance(v).powi(2);
    let rhs = 2.0 * (y.norm_squared() - v.norm_squared());
    Ok(lhs <= rhs + PARALLELOGRAM_SLACK)
}

/// `r_k = |x_{2k+2} - x_{2k}|` over the retained even iterates.
pub fn asymptotic_regularity_series(t: &Trace) -> Result<Vec<f64>> {
    ar_from_iterates(t.first_index(), t.stored())
}

pub fn ar_from_iterates(first_index: usize, points: &[Point]) -> Result<Vec<f64>> {
    let (_, pts) = align_even(first_index, points);
    let evens: Vec<&Point> = pts.iter().step_by(2).collect();
    if evens.len() < 2 {
        return Err(Error::TraceTooShort {
            needed: 3,
            have: pts.len(),
        });
    }
    Ok(evens.windows(2).map(|w| w[1].distance(w[0])).collect())
}

/// Tail of the asymptotic-regularity series. `r_0 = |x_2 - x_0|` involves
/// the arbitrary start and is left out whenever later entries exist.
pub fn asymptotic_regularity_tail(t: &Trace) -> Result<f64> {
    let series = asymptotic_regularity_series(t)?;
    let skip = usize::from(t.first_index() == 0 && series.len() > 1);
    Ok(tail_max(&series[skip..]))
}

/// Maximum over the last [`TAIL_LEN`] entries.
pub fn tail_max(series: &[f64]) -> f64 {
    series[series.len().saturating_sub(TAIL_LEN)..]
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Tail max of `|(x_n - y_n) - (P x_n - P y_n)|` over paired sequences.
pub fn strong_nonexpansiveness_probe(set: &ConvexSet, xs: &[Point], ys: &[Point]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.is_empty() {
        return Err(Error::Precondition("probe needs at least one pair".into()));
    }
    let start = xs.len().saturating_sub(TAIL_LEN);
    let mut worst: f64 = 0.0;
    for (x, y) in xs[start..].iter().zip(&ys[start..]) {
        let moved = &set.project(x)? - &set.project(y)?;
        worst = worst.max((x - y).distance(&moved));
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryClass {
    ConvergedIntoIntersection,
    ConvergedAttainedGap,
    DivergingNorm,
    Undetermined,
}

/// Thresholds for [`classify_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassifierConfig {
    pub gap_zero_tol: f64,
    pub membership_tol: f64,
    pub cauchy_tol: f64,
    pub fixed_point_tol: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            gap_zero_tol: 1e-6,
            membership_tol: 1e-6,
            cauchy_tol: 1e-6,
            fixed_point_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub gap_limit: f64,
    pub gap_uncertainty: f64,
    /// Distances of the final iterate to `C1` and `C2`.
    pub membership_residual: [f64; 2],
    /// Largest distance from the final even iterate to the even iterates of
    /// the second half of the run (retained ones and checkpoints).
    pub tail_spread: f64,
    pub fixed_point_residual: f64,
    pub final_norm: f64,
    /// Norms of the trailing even iterates are nondecreasing.
    pub norm_growing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryVerdict {
    pub class: TrajectoryClass,
    pub gap_limit_estimate: f64,
    pub displacement_estimate: Point,
    pub evidence: Evidence,
}

fn tail_spread(t: &Trace) -> f64 {
    let last = t.last();
    let n = t.pairs();
    let stored = t
        .stored()
        .iter()
        .enumerate()
        .map(|(i, x)| (t.first_index() + i, x))
        .filter(|(idx, _)| idx % 2 == 0 && *idx >= n)
        .map(|(_, x)| x);
    let checkpoints = t
        .checkpoints()
        .iter()
        .filter(|(pair, _)| 2 * pair >= n)
        .map(|(_, x)| x);
    stored
        .chain(checkpoints)
        .map(|x| x.distance(last))
        .fold(0.0, f64::max)
}

fn norm_growing(t: &Trace) -> bool {
    let norms: Vec<f64> = t
        .stored()
        .iter()
        .enumerate()
        .filter(|(i, _)| (t.first_index() + i).is_multiple_of(2))
        .map(|(_, x)| x.norm())
        .collect();
    let tail = &norms[norms.len().saturating_sub(TAIL_LEN)..];
    tail.len() >= 2 && tail.windows(2).all(|w| w[1] >= w[0])
}

pub fn classify(t: &Trace, g: &GapSeries) -> Result<TrajectoryVerdict> {
    classify_with(t, g, &ClassifierConfig::default())
}

pub fn classify_with(
    t: &Trace,
    g: &GapSeries,
    cfg: &ClassifierConfig,
) -> Result<TrajectoryVerdict> {
    let (c1, c2) = t.sets();
    let last = t.last();
    let gap = gap_limit_estimate(g)?;
    let disp = displacement_estimate(&displacement_series(t)?)?;
    let evidence = Evidence {
        gap_limit: gap.value,
        gap_uncertainty: gap.uncertainty,
        membership_residual: [c1.distance_to(last)?, c2.distance_to(last)?],
        tail_spread: tail_spread(t),
        fixed_point_residual: fixed_point_residual(c1, c2, last)?,
        final_norm: last.norm(),
        norm_growing: norm_growing(t),
    };
    let in_both = evidence
        .membership_residual
        .iter()
        .all(|&r| r <= cfg.membership_tol);
    let class = if gap.value <= cfg.gap_zero_tol && in_both {
        TrajectoryClass::ConvergedIntoIntersection
    } else if evidence.tail_spread < cfg.cauchy_tol
        && evidence.fixed_point_residual < cfg.fixed_point_tol
    {
        TrajectoryClass::ConvergedAttainedGap
    } else if t.stop_reason() == StopReason::NormExploded && evidence.norm_growing {
        TrajectoryClass::DivergingNorm
    } else {
        TrajectoryClass::Undetermined
    };
    Ok(TrajectoryVerdict {
        class,
        gap_limit_estimate: gap.value,
        displacement_estimate: disp.value,
        evidence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iteration::{alternate, StopRule};
    use crate::sets::{least_norm_difference, ScalarFunction};

    fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    fn two_balls() -> (ConvexSet, ConvexSet) {
        (
            ConvexSet::ball(p(&[0.0, 0.0]), 1.0).unwrap(),
            ConvexSet::ball(p(&[4.0, 0.0]), 1.0).unwrap(),
        )
    }

    fn run(c1: &ConvexSet, c2: &ConvexSet, x0: &[f64], max_pairs: usize) -> Trace {
        let rule = StopRule {
            max_pairs,
            ..StopRule::default()
        };
        alternate(c1, c2, &p(x0), rule).unwrap()
    }

    #[test]
    fn constant_trace_has_zero_gaps() {
        let ball = ConvexSet::ball(p(&[0.0, 0.0]), 1.0).unwrap();
        let t = run(&ball, &ball, &[0.2, 0.3], 1);
        let g = gap_series(&t).unwrap();
        assert_eq!((g.odd.clone(), g.even.clone()), (vec![0.0], vec![0.0]));
        assert_eq!(asymptotic_regularity_series(&t).unwrap(), vec![0.0]);
        let v = classify(&t, &g).unwrap();
        assert_eq!(v.class, TrajectoryClass::ConvergedIntoIntersection);
    }

    #[test]
    fn two_balls_gap_and_displacement() {
        let (b1, b2) = two_balls();
        // Without the stall rule the run uses the whole budget.
        let rule = StopRule {
            max_pairs: 200,
            gap_stall_tol: 0.0,
            ..StopRule::default()
        };
        let t = alternate(&b1, &b2, &p(&[0.0, 3.0]), rule).unwrap();
        assert_eq!(t.pairs(), 200);
        let g = gap_series(&t).unwrap();
        assert!(g.is_monotone(MONOTONE_SLACK));
        assert!(g.even.iter().all(|&e| e >= 2.0 - 1e-12));
        let est = gap_limit_estimate(&g).unwrap();
        assert!((est.value - 2.0).abs() < 1e-6);
        let d = displacement_estimate(&displacement_series(&t).unwrap()).unwrap();
        assert!(d.value.distance(&p(&[2.0, 0.0])) < 1e-5);
        assert!(tail_max(&asymptotic_regularity_series(&t).unwrap()) < 1e-6);
        let v = classify(&t, &g).unwrap();
        assert_eq!(v.class, TrajectoryClass::ConvergedAttainedGap);
    }

    #[test]
    fn two_lines_gap_to_zero() {
        let x_axis = ConvexSet::hyperplane(p(&[0.0, 1.0]), 0.0).unwrap();
        let diagonal = ConvexSet::hyperplane(p(&[1.0, -1.0]), 0.0).unwrap();
        let t = run(&x_axis, &diagonal, &[1.0, 1.0], 100);
        let g = gap_series(&t).unwrap();
        assert!(g.is_monotone(MONOTONE_SLACK));
        assert!(gap_limit_estimate(&g).unwrap().value < 1e-12);
    }

    #[test]
    fn parallel_halfspaces_displacement_is_exact() {
        let below = ConvexSet::halfspace(p(&[0.0, 1.0]), 0.0).unwrap();
        let above = ConvexSet::halfspace(p(&[0.0, -1.0]), -1.0).unwrap();
        let t = run(&below, &above, &[5.0, 7.0], 3);
        let d = displacement_estimate(&displacement_series(&t).unwrap()).unwrap();
        assert_eq!(d.value, p(&[0.0, 1.0]));
        assert_eq!(d.residual, 0.0);
    }

    #[test]
    fn parallelogram_bound() {
        let v = p(&[2.0, 0.0]);
        assert!(parallelogram_bound_check(&v, &v).unwrap());
        assert!(parallelogram_bound_check(&p(&[3.0, -4.0]), &p(&[0.0, 0.0])).unwrap());
        let (b1, b2) = two_balls();
        let t = run(&b1, &b2, &[0.0, 3.0], 20);
        let y5 = &t.get(12).unwrap().clone() - t.get(11).unwrap();
        assert!(parallelogram_bound_check(&y5, &v).unwrap());
        // (0.1, 0) is not least-norm in closure(C2 - C1): precondition fails.
        assert!(matches!(
            parallelogram_bound_check(&p(&[-3.0, 0.0]), &v),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn probe_examples() {
        let (b1, b2) = two_balls();
        let xs = vec![p(&[5.0, 1.0]); 4];
        assert_eq!(strong_nonexpansiveness_probe(&b1, &xs, &xs).unwrap(), 0.0);

        let h = ConvexSet::halfspace(p(&[0.0, 1.0]), 0.0).unwrap();
        let inside_x = vec![p(&[1.0, -1.0]), p(&[2.0, -3.0])];
        let inside_y = vec![p(&[0.0, -2.0]), p(&[5.0, -0.5])];
        assert_eq!(
            strong_nonexpansiveness_probe(&h, &inside_x, &inside_y).unwrap(),
            0.0
        );

        // Odd iterates against the constant P1 z = (1, 0), projected by P2.
        let t = run(&b1, &b2, &[0.0, 3.0], 200);
        let odds: Vec<Point> = t.stored().iter().skip(1).step_by(2).cloned().collect();
        let anchor = vec![p(&[1.0, 0.0]); odds.len()];
        assert!(strong_nonexpansiveness_probe(&b2, &odds, &anchor).unwrap() < 1e-6);

        assert!(matches!(
            strong_nonexpansiveness_probe(&b1, &xs, &xs[..2]),
            Err(Error::LengthMismatch(4, 2))
        ));
    }

    #[test]
    fn unattained_gap_shrinks_while_iterates_drift() {
        let h = ConvexSet::halfspace(p(&[0.0, 1.0]), 0.0).unwrap();
        let epi = ConvexSet::epigraph(ScalarFunction::ExpNeg);
        let t = run(&h, &epi, &[0.0, 0.0], 5000);
        let g = gap_series(&t).unwrap();
        assert!(g.is_monotone(MONOTONE_SLACK));
        let est = gap_limit_estimate(&g).unwrap();
        assert!(est.value < 0.02);
        assert!(t.last()[0] > t.get(2).unwrap()[0] + 3.0);
        let v = least_norm_difference(&h, &epi).unwrap();
        assert_eq!(v, p(&[0.0, 0.0]));
        // The drift over the second half keeps this short run from
        // looking converged.
        let verdict = classify(&t, &g).unwrap();
        assert_eq!(verdict.class, TrajectoryClass::Undetermined);
    }

    #[test]
    fn too_short_inputs_are_rejected() {
        assert!(GapSeries::from_iterates(0, &[p(&[0.0]), p(&[1.0])]).is_err());
        assert!(ar_from_iterates(1, &[p(&[0.0]), p(&[1.0]), p(&[2.0])]).is_err());
        let empty = GapSeries {
            first_pair: 0,
            odd: vec![],
            even: vec![],
        };
        assert!(gap_limit_estimate(&empty).is_err());
    }

    #[test]
    fn odd_aligned_slices_start_on_even_index() {
        let pts: Vec<Point> = (0..6).map(|i| p(&[i as f64])).collect();
        let g = GapSeries::from_iterates(3, &pts).unwrap();
        assert_eq!(g.first_pair, 2);
        assert_eq!(g.len(), 2);
    }
}
