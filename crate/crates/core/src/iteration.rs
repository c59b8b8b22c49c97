//! Alternating projections `x_{2n+1} = P1 x_{2n}`, `x_{2n+2} = P2 x_{2n+1}`
//! and Dykstra's corrected variant.
//!
//! Iterates are indexed from `x_0`; odd indices come from `P1`, even indices
//! from `P2`. A "pair" is one `P1` step followed by one `P2` step, so a run of
//! `N` pairs yields `2N + 1` iterates.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sets::ConvexSet;
use crate::space::Point;

/// Consecutive pairs whose even-gap change must stay below tolerance.
pub const STALL_PAIRS: usize = 8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    #[default]
    Alternate,
    Dykstra,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxIterations,
    GapStalled,
    NormExploded,
}

/// Which operator produced an iterate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Start,
    P1,
    P2,
}

impl Role {
    pub fn of_index(n: usize) -> Role {
        match n {
            0 => Role::Start,
            n if n % 2 == 1 => Role::P1,
            _ => Role::P2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Role::Start => "start",
            Role::P1 => "P1",
            Role::P2 => "P2",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StopRule {
    pub max_pairs: usize,
    /// Stop once successive even gaps differ by less than this for
    /// [`STALL_PAIRS`] consecutive pairs.
    pub gap_stall_tol: f64,
    /// Divergence sentinel: stop when `|x_n| > 1e3 * factor * (1 + |x_0|)`.
    pub norm_explosion_factor: f64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            max_pairs: 10_000,
            gap_stall_tol: 1e-12,
            norm_explosion_factor: 1.0,
        }
    }
}

impl StopRule {
    pub fn validate(&self) -> Result<()> {
        if self.max_pairs < 1 {
            return Err(Error::InvalidStopRule(
                "max_pairs must be at least 1".into(),
            ));
        }
        if !(self.gap_stall_tol >= 0.0) || !self.gap_stall_tol.is_finite() {
            return Err(Error::InvalidStopRule(
                "gap_stall_tol must be finite and >= 0".into(),
            ));
        }
        if !(self.norm_explosion_factor >= 1.0) || !self.norm_explosion_factor.is_finite() {
            return Err(Error::InvalidStopRule(
                "norm_explosion_factor must be finite and >= 1".into(),
            ));
        }
        Ok(())
    }

    pub fn norm_limit(&self, x0: &Point) -> f64 {
        1e3 * self.norm_explosion_factor * (1.0 + x0.norm())
    }
}

/// How much of a run is kept in memory.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Storage {
    /// Runs up to this many pairs keep every iterate.
    pub full_pairs: usize,
    /// Longer runs keep only the most recent iterates.
    pub window: usize,
}

impl Default for Storage {
    fn default() -> Self {
        Storage {
            full_pairs: 10_000,
            window: 64,
        }
    }
}

/// Running check of the monotone gap chain
/// `|x_{k+2} - x_{k+1}| ≤ |x_{k+1} - x_k|` for `k ≥ 1`, over the whole run
/// (including iterates that were not retained).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GapMonitor {
    last: Option<f64>,
    /// Largest observed increase between consecutive gaps (≤ 0 when monotone).
    pub worst_increase: f64,
    pub observed: usize,
}

impl GapMonitor {
    fn observe(&mut self, gap: f64) {
        if let Some(prev) = self.last {
            let inc = gap - prev;
            if self.observed == 1 || inc > self.worst_increase {
                self.worst_increase = inc;
            }
        }
        self.last = Some(gap);
        self.observed += 1;
    }

    pub fn is_monotone(&self, slack: f64) -> bool {
        self.observed < 2 || self.worst_increase <= slack
    }
}

/// The iterate sequence of one run.
#[derive(Clone, Debug)]
pub struct Trace {
    algorithm: Algorithm,
    c1: ConvexSet,
    c2: ConvexSet,
    x0: Point,
    first_index: usize,
    points: Vec<Point>,
    pairs: usize,
    stop_reason: StopReason,
    checkpoints: Vec<(usize, Point)>,
    monitor: GapMonitor,
}

impl Trace {
    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn sets(&self) -> (&ConvexSet, &ConvexSet) {
        (&self.c1, &self.c2)
    }

    pub fn x0(&self) -> &Point {
        &self.x0
    }

    /// Number of completed pairs `N`.
    pub fn pairs(&self) -> usize {
        self.pairs
    }

    /// Total iterates generated, `2N + 1`.
    pub fn len(&self) -> usize {
        2 * self.pairs + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn stop_reason(&self) -> StopReason {
        self.stop_reason
    }

    /// Index of the first retained iterate (0 unless the run was windowed).
    pub fn first_index(&self) -> usize {
        self.first_index
    }

    /// Retained iterates, contiguous from [`Trace::first_index`].
    pub fn stored(&self) -> &[Point] {
        &self.points
    }

    pub fn is_complete(&self) -> bool {
        self.first_index == 0
    }

    pub fn get(&self, n: usize) -> Option<&Point> {
        n.checked_sub(self.first_index)
            .and_then(|i| self.points.get(i))
    }

    pub fn last(&self) -> &Point {
        self.points
            .last()
            .expect("a trace holds at least three iterates")
    }

    /// `x_{2N-1}`, the final `P1` iterate.
    pub fn last_odd(&self) -> &Point {
        &self.points[self.points.len() - 2]
    }

    /// Even iterates `x_{2n}` kept at pair indices `n = 1, 2, 4, 8, ...`.
    pub fn checkpoints(&self) -> &[(usize, Point)] {
        &self.checkpoints
    }

    pub fn gap_monitor(&self) -> &GapMonitor {
        &self.monitor
    }

    /// Recomputes every retained iterate from its predecessor and reports
    /// whether the stored values are reproduced bit for bit.
    pub fn replays_exactly(&self) -> Result<bool> {
        if self.algorithm != Algorithm::Alternate {
            return Err(Error::Precondition(
                "only alternating-projection traces are replayable step by step".into(),
            ));
        }
        for (i, w) in self.points.windows(2).enumerate() {
            let n = self.first_index + i + 1;
            let set = if n % 2 == 1 { &self.c1 } else { &self.c2 };
            if set.project(&w[0])? != w[1] {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

struct Recorder {
    storage: Storage,
    first_index: usize,
    points: VecDeque<Point>,
    checkpoints: Vec<(usize, Point)>,
    monitor: GapMonitor,
    pairs: usize,
}

impl Recorder {
    fn new(storage: Storage, x0: Point) -> Self {
        let mut points = VecDeque::new();
        points.push_back(x0);
        Recorder {
            storage,
            first_index: 0,
            points,
            checkpoints: Vec::new(),
            monitor: GapMonitor::default(),
            pairs: 0,
        }
    }

    fn push_pair(&mut self, odd: Point, even: Point, gap_odd: f64, gap_even: f64) {
        // |x_1 - x_0| sits outside the monotone chain: x_0 is arbitrary.
        if self.pairs > 0 {
            self.monitor.observe(gap_odd);
        }
        self.monitor.observe(gap_even);
        self.pairs += 1;
        if self.pairs.is_power_of_two() {
            self.checkpoints.push((self.pairs, even.clone()));
        }
        self.points.push_back(odd);
        self.points.push_back(even);
        if self.pairs > self.storage.full_pairs {
            // Keep an odd count so the window starts on an even index.
            let keep = (self.storage.window.max(2) / 2) * 2 + 1;
            while self.points.len() > keep {
                self.points.pop_front();
                self.first_index += 1;
            }
        }
    }

    fn last(&self) -> &Point {
        self.points.back().expect("recorder always holds x0")
    }

    fn finish(
        self,
        algorithm: Algorithm,
        c1: &ConvexSet,
        c2: &ConvexSet,
        x0: Point,
        stop_reason: StopReason,
    ) -> Trace {
        Trace {
            algorithm,
            c1: c1.clone(),
            c2: c2.clone(),
            x0,
            first_index: self.first_index,
            points: self.points.into(),
            pairs: self.pairs,
            stop_reason,
            checkpoints: self.checkpoints,
            monitor: self.monitor,
        }
    }
}

struct StopState {
    rule: StopRule,
    norm_limit: f64,
    prev_even_gap: Option<f64>,
    stall_run: usize,
}

impl StopState {
    fn new(rule: StopRule, x0: &Point) -> Self {
        StopState {
            rule,
            norm_limit: rule.norm_limit(x0),
            prev_even_gap: None,
            stall_run: 0,
        }
    }

    fn check(&mut self, odd: &Point, even: &Point, gap_even: f64) -> Option<StopReason> {
        let limit_sq = self.norm_limit * self.norm_limit;
        if odd.norm_squared() > limit_sq || even.norm_squared() > limit_sq {
            return Some(StopReason::NormExploded);
        }
        if let Some(prev) = self.prev_even_gap.replace(gap_even) {
            if (gap_even - prev).abs() < self.rule.gap_stall_tol {
                self.stall_run += 1;
            } else {
                self.stall_run = 0;
            }
        }
        (self.stall_run >= STALL_PAIRS).then_some(StopReason::GapStalled)
    }
}

fn check_inputs(c1: &ConvexSet, c2: &ConvexSet, x0: &Point, rule: &StopRule) -> Result<()> {
    rule.validate()?;
    if c1.ambient_dim() != c2.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: c1.ambient_dim(),
            found: c2.ambient_dim(),
        });
    }
    x0.check_dim(c1.ambient_dim())
}

fn at(index: usize) -> impl FnOnce(Error) -> Error {
    move |e| Error::Projection {
        index,
        source: Box::new(e),
    }
}

/// Runs alternating projections from `x0` with the default [`Storage`].
pub fn alternate(c1: &ConvexSet, c2: &ConvexSet, x0: &Point, rule: StopRule) -> Result<Trace> {
    alternate_with(c1, c2, x0, rule, Storage::default())
}

pub fn alternate_with(
    c1: &ConvexSet,
    c2: &ConvexSet,
    x0: &Point,
    rule: StopRule,
    storage: Storage,
) -> Result<Trace> {
    check_inputs(c1, c2, x0, &rule)?;
    let mut rec = Recorder::new(storage, x0.clone());
    let mut stop = StopState::new(rule, x0);
    for n in 0..rule.max_pairs {
        let x = rec.last();
        let odd = c1.project(x).map_err(at(2 * n + 1))?;
        let even = c2.project(&odd).map_err(at(2 * n + 2))?;
        let gap_odd = odd.distance(x);
        let gap_even = even.distance(&odd);
        let reason = stop.check(&odd, &even, gap_even);
        rec.push_pair(odd, even, gap_odd, gap_even);
        if let Some(reason) = reason {
            return Ok(rec.finish(Algorithm::Alternate, c1, c2, x0.clone(), reason));
        }
    }
    Ok(rec.finish(
        Algorithm::Alternate,
        c1,
        c2,
        x0.clone(),
        StopReason::MaxIterations,
    ))
}

/// Two-set Dykstra iteration with correction terms starting at zero. Odd
/// iterates are `P1(x + p)`, even iterates `P2(y + q)`.
pub fn dykstra(c1: &ConvexSet, c2: &ConvexSet, x0: &Point, rule: StopRule) -> Result<Trace> {
    dykstra_with(c1, c2, x0, rule, Storage::default())
}

pub fn dykstra_with(
    c1: &ConvexSet,
    c2: &ConvexSet,
    x0: &Point,
    rule: StopRule,
    storage: Storage,
) -> Result<Trace> {
    check_inputs(c1, c2, x0, &rule)?;
    let dim = x0.dim();
    let mut rec = Recorder::new(storage, x0.clone());
    let mut stop = StopState::new(rule, x0);
    let (mut p, mut q) = (Point::zeros(dim), Point::zeros(dim));
    let mut x = x0.clone();
    for n in 0..rule.max_pairs {
        let shifted = &x + &p;
        let odd = c1.project(&shifted).map_err(at(2 * n + 1))?;
        p = &shifted - &odd;
        let shifted = &odd + &q;
        let even = c2.project(&shifted).map_err(at(2 * n + 2))?;
        q = &shifted - &even;
        let gap_odd = odd.distance(&x);
        let gap_even = even.distance(&odd);
        let reason = stop.check(&odd, &even, gap_even);
        rec.push_pair(odd, even.clone(), gap_odd, gap_even);
        x = even;
        if let Some(reason) = reason {
            return Ok(rec.finish(Algorithm::Dykstra, c1, c2, x0.clone(), reason));
        }
    }
    Ok(rec.finish(
        Algorithm::Dykstra,
        c1,
        c2,
        x0.clone(),
        StopReason::MaxIterations,
    ))
}

/// `|z - P2(P1 z)|`; zero exactly on the fixed-point set of `P2 P1`.
pub fn fixed_point_residual(c1: &ConvexSet, c2: &ConvexSet, z: &Point) -> Result<f64> {
    Ok(z.distance(&c2.project(&c1.project(z)?)?))
}
