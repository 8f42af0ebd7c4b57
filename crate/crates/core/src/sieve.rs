//! The interval sieve: forbidden sets, dyadic covers, survivor tracking.
//!
//! Stage `n` forbids a closed segment of radius `δ_n/t_n` around every grid
//! point `a/t_n`, `a = 0..⌈t_n⌉`, clipped to `[0,1]`. The stage's dyadic
//! cover consists of every level-`l_n` cell whose overlap with a forbidden
//! segment has positive measure; a grid point sitting exactly on a cell
//! boundary therefore marks the cells on both sides, while a segment endpoint
//! that only touches a boundary does not reach across it.
//!
//! The integer form of the marking predicate: with `D_n = ⌈δ_n^{hi}·2^{l_n}⌉`
//! (the removal half-width snapped outward to the cell grid) a candidate `a`
//! marks exactly the cells
//!
//! ```text
//!   b ∈ [ ⌊(a·2^l − D)/t⌋ , ⌈(a·2^l + D)/t⌉ − 1 ]
//! ```
//!
//! Because `D ≥ δ_n·2^{l_n}` for the true `δ_n`, every point of an unmarked
//! cell's interior keeps a distance strictly greater than `δ_n^{hi}/t_n` from
//! every grid point — the certificate module re-derives exactly this
//! inequality, so a witness extracted from the survivors passes certification
//! by construction, not by luck.
//!
//! Survivors are kept as sorted maximal index runs at the current level
//! inside a dyadic window. Runs refine by a left shift when the level grows;
//! removals merge-subtract in one pass. Higher working precision shrinks
//! `δ^{hi}` and therefore `D`, so enclosure refinement can only hand cells
//! back, never take them away.

use crate::dyadic::Enclosure;
use crate::params::{ParamsError, SieveParams};
use crate::sequence::{ExactValue, GrowthSequence, SequenceError};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hard ceiling on cell levels so run indices fit in `u128`.
pub const MAX_LEVEL: u32 = 126;
/// Enumeration ceiling for the brute-force oracle.
pub const BRUTE_FORCE_LEVEL_CAP: u32 = 25;

#[derive(Debug, Error)]
pub enum SieveError {
    #[error("sieve: window level {window} exceeds stage level {level} at n = {n}")]
    WindowTooDeep { window: u32, level: u32, n: u64 },
    #[error("sieve: level {0} exceeds supported maximum {MAX_LEVEL}")]
    LevelOverflow(u32),
    #[error("sieve: survivors empty after subtracting stage n = {at_n}")]
    EmptySurvivors { at_n: u64 },
    #[error("sieve: run count {runs} exceeds memory budget {budget}; narrow the window")]
    Capacity { runs: usize, budget: usize },
    #[error("sieve: step expects n = {expected}, got {got}")]
    OutOfOrder { expected: u64, got: u64 },
    #[error("sieve: brute force needs l_(n_to) = {level} <= cap {cap} <= {BRUTE_FORCE_LEVEL_CAP}")]
    BruteForceCap { level: u32, cap: u32 },
    #[error("sieve: sequence not increasing at n = {0} (lazy re-check)")]
    NotIncreasing(u64),
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
}

/// Half-open dyadic interval `[index/2^level, (index+1)/2^level)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicCell {
    pub level: u32,
    pub index: u128,
}

impl DyadicCell {
    pub fn new(level: u32, index: u128) -> Self {
        debug_assert!(level <= MAX_LEVEL);
        debug_assert!(index < (1u128 << level.min(127)) || level == 0 && index == 0);
        DyadicCell { level, index }
    }

    pub fn unit() -> Self {
        DyadicCell { level: 0, index: 0 }
    }

    pub fn lower_bound(&self) -> BigRational {
        BigRational::new(BigInt::from(self.index), BigInt::one() << self.level as usize)
    }

    pub fn upper_bound(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.index + 1),
            BigInt::one() << self.level as usize,
        )
    }

    pub fn midpoint(&self) -> BigRational {
        BigRational::new(
            BigInt::from(2 * self.index + 1),
            BigInt::one() << (self.level + 1) as usize,
        )
    }

    /// Index range covered at a finer level.
    pub fn range_at(&self, level: u32) -> (u128, u128) {
        debug_assert!(level >= self.level && level <= MAX_LEVEL);
        let shift = level - self.level;
        (self.index << shift, (self.index + 1) << shift)
    }

    pub fn contains(&self, other: &DyadicCell) -> bool {
        if other.level < self.level {
            return false;
        }
        (other.index >> (other.level - self.level)) == self.index
    }
}

/// A set of level-`level` cells as sorted, disjoint, maximal `[lo, hi)` runs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicSet {
    level: u32,
    runs: Vec<(u128, u128)>,
}

impl DyadicSet {
    pub fn empty(level: u32) -> Self {
        DyadicSet { level, runs: Vec::new() }
    }

    pub fn full_cell(cell: &DyadicCell, level: u32) -> Self {
        let (lo, hi) = cell.range_at(level);
        DyadicSet { level, runs: vec![(lo, hi)] }
    }

    pub fn from_runs(level: u32, mut runs: Vec<(u128, u128)>) -> Self {
        runs.retain(|r| r.1 > r.0);
        runs.sort_unstable();
        let mut merged: Vec<(u128, u128)> = Vec::with_capacity(runs.len());
        for r in runs {
            match merged.last_mut() {
                Some(last) if r.0 <= last.1 => last.1 = last.1.max(r.1),
                _ => merged.push(r),
            }
        }
        DyadicSet { level, runs: merged }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn runs(&self) -> &[(u128, u128)] {
        &self.runs
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn run_count(&self) -> usize {
        self.runs.len()
    }

    /// Total number of cells.
    pub fn cell_count(&self) -> u128 {
        self.runs.iter().map(|r| r.1 - r.0).sum()
    }

    /// Lebesgue measure: `cell_count · 2^-level`.
    pub fn measure(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.cell_count()),
            BigInt::one() << self.level as usize,
        )
    }

    /// Refine every run to a finer level (exact; measure preserved).
    pub fn refine_to(&self, level: u32) -> Result<DyadicSet, SieveError> {
        if level > MAX_LEVEL {
            return Err(SieveError::LevelOverflow(level));
        }
        assert!(level >= self.level, "refinement cannot coarsen");
        let shift = level - self.level;
        Ok(DyadicSet {
            level,
            runs: self.runs.iter().map(|&(a, b)| (a << shift, b << shift)).collect(),
        })
    }

    /// Subtract sorted disjoint removal runs; returns the remainder and the
    /// number of cells actually removed.
    pub fn subtract(&self, removals: &[(u128, u128)]) -> (DyadicSet, u128) {
        let mut out: Vec<(u128, u128)> = Vec::with_capacity(self.runs.len() + removals.len());
        let mut removed: u128 = 0;
        let mut ri = 0usize;
        for &(lo, hi) in &self.runs {
            let mut cur = lo;
            while ri < removals.len() && removals[ri].1 <= cur {
                ri += 1;
            }
            let mut k = ri;
            while cur < hi {
                if k >= removals.len() || removals[k].0 >= hi {
                    out.push((cur, hi));
                    break;
                }
                let (rlo, rhi) = removals[k];
                if rlo > cur {
                    out.push((cur, rlo));
                }
                let cut_lo = rlo.max(cur);
                let cut_hi = rhi.min(hi);
                if cut_hi > cut_lo {
                    removed += cut_hi - cut_lo;
                }
                if rhi >= hi {
                    break;
                }
                cur = cut_hi.max(cur);
                k += 1;
            }
        }
        (DyadicSet { level: self.level, runs: out }, removed)
    }

    /// Refinement-aware subset test: every cell of `self` lies inside `other`.
    pub fn subset_of(&self, other: &DyadicSet) -> bool {
        let level = self.level.max(other.level);
        let a = self.refine_to(level).expect("level in range");
        let b = other.refine_to(level).expect("level in range");
        let mut i = 0usize;
        for &(lo, hi) in &a.runs {
            loop {
                if i >= b.runs.len() {
                    return false;
                }
                let (blo, bhi) = b.runs[i];
                if bhi <= lo {
                    i += 1;
                    continue;
                }
                if blo <= lo && hi <= bhi {
                    break;
                }
                return false;
            }
        }
        true
    }

    pub fn contains_cell(&self, idx: u128) -> bool {
        self.runs
            .binary_search_by(|&(lo, hi)| {
                if idx < lo {
                    std::cmp::Ordering::Greater
                } else if idx >= hi {
                    std::cmp::Ordering::Less
                } else {
                    std::cmp::Ordering::Equal
                }
            })
            .is_ok()
    }
}

/// Per-stage removal geometry, shared by the sieve, the brute-force oracle
/// and the measure-accounting kernel.
#[derive(Clone, Debug)]
pub struct StageGeometry {
    pub n: u64,
    pub level: u32,
    pub t: ExactValue,
    pub delta: Enclosure,
    /// `D = ⌈δ^{hi}·2^{level}⌉`: removal half-width in level-scale units.
    pub halfwidth: BigInt,
}

impl StageGeometry {
    pub fn compute(
        seq: &GrowthSequence,
        params: &SieveParams,
        n: u64,
    ) -> Result<Self, SieveError> {
        let level = params.dyadic_level(seq, n)?;
        if level > MAX_LEVEL {
            return Err(SieveError::LevelOverflow(level));
        }
        let delta = params.delta(n)?;
        let t = seq.eval(n, params.precision().max(level + 32))?;
        let halfwidth = delta.hi().shifted(level as i64).ceil_int();
        debug_assert!(halfwidth.is_positive());
        Ok(StageGeometry { n, level, t, delta, halfwidth })
    }

    /// Marked-cell block for candidate `a`, before clipping:
    /// `[⌊(a·2^l − D)/t⌋, ⌈(a·2^l + D)/t⌉ − 1]`.
    fn block(&self, a: &BigInt) -> (BigInt, BigInt) {
        let x = a << self.level as usize;
        match &self.t {
            ExactValue::Exact(t) => {
                let p = t.numer();
                let q = t.denom();
                let lo = ((&x - &self.halfwidth) * q).div_floor(p);
                let hi = ((&x + &self.halfwidth) * q).div_ceil(p) - 1;
                (lo, hi)
            }
            ExactValue::Interval(t) => {
                // Conservative: widest possible block across the t-enclosure.
                let tl = t.lo().to_ratio();
                let th = t.hi().to_ratio();
                let num_lo = BigRational::from(&x - &self.halfwidth);
                let num_hi = BigRational::from(&x + &self.halfwidth);
                let s0 = if num_lo.is_negative() { &num_lo / &tl } else { &num_lo / &th };
                let s1 = if num_hi.is_negative() { &num_hi / &th } else { &num_hi / &tl };
                (s0.floor().to_integer(), s1.ceil().to_integer() - BigInt::one())
            }
        }
    }

    /// Candidate grid indices whose blocks can meet `[w_lo, w_hi]` (rationals
    /// in [0,1]); clipped to the grid range `[0, ⌈t⌉]`.
    fn candidate_range(&self, w_lo: &BigRational, w_hi: &BigRational) -> (BigInt, BigInt) {
        let t_lo = self.t.lo_ratio();
        let t_hi = self.t.hi_ratio();
        let a_lo = (&t_lo * w_lo).floor().to_integer() - BigInt::one();
        let a_lo = a_lo.max(BigInt::zero());
        let grid_max = t_hi.ceil().to_integer();
        let a_hi = (&t_hi * w_hi).ceil().to_integer() + BigInt::one();
        let a_hi = a_hi.min(grid_max);
        (a_lo, a_hi)
    }

    /// Sorted, merged removal runs at this stage's level, clipped to the
    /// half-open index range `[b0, b1)`.
    pub fn marked_runs_in(&self, b0: u128, b1: u128) -> Vec<(u128, u128)> {
        if b1 <= b0 {
            return Vec::new();
        }
        let scale = BigInt::one() << self.level as usize;
        let w_lo = BigRational::new(BigInt::from(b0), scale.clone());
        let w_hi = BigRational::new(BigInt::from(b1), scale);
        let (a_lo, a_hi) = self.candidate_range(&w_lo, &w_hi);
        let mut out: Vec<(u128, u128)> = Vec::new();
        let mut a = a_lo;
        while a <= a_hi {
            let (lo, hi) = self.block(&a);
            // clip to [b0, b1)
            let lo = lo.max(BigInt::from(b0));
            let hi = hi.min(BigInt::from(b1) - 1);
            if lo <= hi {
                let lo = lo.to_u128().expect("clipped block fits u128");
                let hi = hi.to_u128().expect("clipped block fits u128") + 1;
                match out.last_mut() {
                    Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                    _ => out.push((lo, hi)),
                }
            }
            a += 1;
        }
        out
    }
}

/// Exactly the level-`l_n` cells inside `window` whose overlap with the
/// stage-`n` forbidden set has positive measure.
pub fn cells_hitting_e(
    seq: &GrowthSequence,
    params: &SieveParams,
    n: u64,
    window: &DyadicCell,
) -> Result<Vec<(u128, u128)>, SieveError> {
    let geom = StageGeometry::compute(seq, params, n)?;
    if geom.level < window.level {
        return Err(SieveError::WindowTooDeep {
            window: window.level,
            level: geom.level,
            n,
        });
    }
    let (b0, b1) = window.range_at(geom.level);
    Ok(geom.marked_runs_in(b0, b1))
}

/// Per-stage sieve statistics.
#[derive(Clone, Debug, Serialize)]
pub struct StageStats {
    pub n: u64,
    pub level: u32,
    pub delta: f64,
    pub cells_removed: u128,
    /// Survivor measure within the window, exact.
    #[serde(serialize_with = "serialize_ratio")]
    pub survivor_measure: BigRational,
}

fn serialize_ratio<S: serde::Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// Zoom / extraction strategies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZoomStrategy {
    Leftmost,
    MaxRun,
    SeededRandom,
}

impl std::str::FromStr for ZoomStrategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "leftmost" => Ok(ZoomStrategy::Leftmost),
            "max-run" => Ok(ZoomStrategy::MaxRun),
            "seeded-random" => Ok(ZoomStrategy::SeededRandom),
            other => Err(format!("unknown strategy `{other}`")),
        }
    }
}

/// Survivor region of the sieve restricted to a window.
#[derive(Clone, Debug)]
pub struct SurvivorState {
    window: DyadicCell,
    processed_up_to: u64,
    survivors: DyadicSet,
    stats: Vec<StageStats>,
    zoom_path: Vec<DyadicCell>,
    prev_t: Option<BigRational>,
    run_budget: usize,
}

pub const DEFAULT_RUN_BUDGET: usize = 1 << 25;

impl SurvivorState {
    /// Fresh state: the full window survives, nothing processed yet.
    pub fn fresh(window: DyadicCell, n_before: u64) -> Self {
        SurvivorState {
            survivors: DyadicSet::full_cell(&window, window.level),
            window,
            processed_up_to: n_before,
            stats: Vec::new(),
            zoom_path: vec![window],
            prev_t: None,
            run_budget: DEFAULT_RUN_BUDGET,
        }
    }

    pub fn with_run_budget(mut self, budget: usize) -> Self {
        self.run_budget = budget;
        self
    }

    pub fn window(&self) -> &DyadicCell {
        &self.window
    }

    pub fn processed_up_to(&self) -> u64 {
        self.processed_up_to
    }

    pub fn survivors(&self) -> &DyadicSet {
        &self.survivors
    }

    pub fn stats(&self) -> &[StageStats] {
        &self.stats
    }

    pub fn zoom_path(&self) -> &[DyadicCell] {
        &self.zoom_path
    }

    pub fn level(&self) -> u32 {
        self.survivors.level()
    }

    /// Apply stage `n = processed_up_to + 1`.
    pub fn subtract_step(
        &mut self,
        seq: &GrowthSequence,
        params: &SieveParams,
        n: u64,
    ) -> Result<(), SieveError> {
        if n != self.processed_up_to + 1 {
            return Err(SieveError::OutOfOrder { expected: self.processed_up_to + 1, got: n });
        }
        let geom = StageGeometry::compute(seq, params, n)?;
        if geom.level < self.window.level {
            return Err(SieveError::WindowTooDeep {
                window: self.window.level,
                level: geom.level,
                n,
            });
        }
        // Lazy monotonicity re-check past the eagerly scanned prefix.
        if let Some(prev) = &self.prev_t {
            if &geom.t.lo_ratio() <= prev && geom.t.hi_ratio() <= *prev {
                return Err(SieveError::NotIncreasing(n));
            }
        }
        if let Some(exact) = geom.t.as_exact() {
            self.prev_t = Some(exact.clone());
        }

        if geom.level > self.survivors.level() {
            self.survivors = self.survivors.refine_to(geom.level)?;
        }
        let (b0, b1) = self.window.range_at(geom.level);
        let removals = geom.marked_runs_in(b0, b1);
        let (next, removed) = self.survivors.subtract(&removals);
        self.survivors = next;
        self.processed_up_to = n;
        let measure = self.survivors.measure();
        if let Some(last) = self.stats.last() {
            debug_assert!(measure <= last.survivor_measure, "survivor measure increased");
        }
        self.stats.push(StageStats {
            n,
            level: geom.level,
            delta: geom.delta.to_f64(),
            cells_removed: removed,
            survivor_measure: measure,
        });
        if self.survivors.is_empty() {
            return Err(SieveError::EmptySurvivors { at_n: n });
        }
        if self.survivors.run_count() > self.run_budget {
            return Err(SieveError::Capacity {
                runs: self.survivors.run_count(),
                budget: self.run_budget,
            });
        }
        Ok(())
    }

    /// Narrow the window to a single surviving cell at the current level.
    pub fn zoom(
        &mut self,
        strategy: ZoomStrategy,
        rng: &mut ChaCha8Rng,
    ) -> Result<DyadicCell, SieveError> {
        let idx = select_cell(&self.survivors, strategy, rng)
            .ok_or(SieveError::EmptySurvivors { at_n: self.processed_up_to })?;
        let cell = DyadicCell::new(self.survivors.level(), idx);
        self.window = cell;
        self.survivors = DyadicSet::full_cell(&cell, cell.level);
        self.zoom_path.push(cell);
        Ok(cell)
    }

    /// Pick a surviving cell per strategy without changing the state.
    pub fn select_survivor(
        &self,
        strategy: ZoomStrategy,
        rng: &mut ChaCha8Rng,
    ) -> Option<DyadicCell> {
        select_cell(&self.survivors, strategy, rng)
            .map(|idx| DyadicCell::new(self.survivors.level(), idx))
    }
}

fn select_cell(set: &DyadicSet, strategy: ZoomStrategy, rng: &mut ChaCha8Rng) -> Option<u128> {
    if set.is_empty() {
        return None;
    }
    match strategy {
        ZoomStrategy::Leftmost => Some(set.runs()[0].0),
        ZoomStrategy::MaxRun => {
            let mut best = set.runs()[0];
            for &r in set.runs() {
                if r.1 - r.0 > best.1 - best.0 {
                    best = r;
                }
            }
            Some(best.0 + (best.1 - best.0) / 2)
        }
        ZoomStrategy::SeededRandom => {
            let total = set.cell_count();
            let mut pick = rng.gen_range(0..total);
            for &(lo, hi) in set.runs() {
                let len = hi - lo;
                if pick < len {
                    return Some(lo + pick);
                }
                pick -= len;
            }
            unreachable!("pick within total cell count")
        }
    }
}

/// Fold `subtract_step` over `n ∈ [n_from, n_to]` inside `window`.
pub fn sieve_range(
    seq: &GrowthSequence,
    params: &SieveParams,
    window: DyadicCell,
    n_from: u64,
    n_to: u64,
    run_budget: usize,
) -> Result<SurvivorState, SieveError> {
    let mut state = SurvivorState::fresh(window, n_from.saturating_sub(1))
        .with_run_budget(run_budget);
    if n_to < n_from {
        return Ok(state);
    }
    for n in n_from..=n_to {
        state.subtract_step(seq, params, n)?;
    }
    Ok(state)
}

/// Like [`sieve_range`] but an emptied survivor set is a terminal state, not
/// an error: returns the state (empty from the fatal stage on) plus the stage
/// that emptied it, if any.
pub fn sieve_range_lenient(
    seq: &GrowthSequence,
    params: &SieveParams,
    window: DyadicCell,
    n_from: u64,
    n_to: u64,
    run_budget: usize,
) -> Result<(SurvivorState, Option<u64>), SieveError> {
    let mut state = SurvivorState::fresh(window, n_from.saturating_sub(1))
        .with_run_budget(run_budget);
    if n_to < n_from {
        return Ok((state, None));
    }
    for n in n_from..=n_to {
        match state.subtract_step(seq, params, n) {
            Ok(()) => {}
            Err(SieveError::EmptySurvivors { at_n }) => return Ok((state, Some(at_n))),
            Err(e) => return Err(e),
        }
    }
    Ok((state, None))
}

/// Independent oracle: enumerate every level-`l_(n_to)` cell of `[0,1)` and
/// keep those whose ancestor at every stage level avoids that stage's
/// forbidden set. Shares the stage geometry (it *is* the definition of the
/// removal set) but no survivor-set machinery with `sieve_range`.
pub fn brute_force_survivors(
    seq: &GrowthSequence,
    params: &SieveParams,
    n_from: u64,
    n_to: u64,
    level_cap: u32,
) -> Result<DyadicSet, SieveError> {
    if level_cap > BRUTE_FORCE_LEVEL_CAP {
        return Err(SieveError::BruteForceCap { level: level_cap, cap: level_cap });
    }
    let mut stages = Vec::new();
    for n in n_from..=n_to {
        stages.push(StageGeometry::compute(seq, params, n)?);
    }
    let final_level = stages.last().map(|g| g.level).unwrap_or(0);
    if final_level > level_cap {
        return Err(SieveError::BruteForceCap { level: final_level, cap: level_cap });
    }
    let mut runs: Vec<(u128, u128)> = Vec::new();
    'cells: for idx in 0u128..(1u128 << final_level) {
        for geom in &stages {
            let anc = idx >> (final_level - geom.level);
            if cell_hits_stage(geom, anc) {
                continue 'cells;
            }
        }
        match runs.last_mut() {
            Some(last) if last.1 == idx => last.1 = idx + 1,
            _ => runs.push((idx, idx + 1)),
        }
    }
    Ok(DyadicSet::from_runs(final_level, runs))
}

/// Membership test for one cell against one stage, written as an
/// exists-a-grid-point query rather than a marked-run construction.
fn cell_hits_stage(geom: &StageGeometry, cell: u128) -> bool {
    // Positive overlap with the segment around a/t demands
    //   t·cell·2^-l − D·2^-l < a < t·(cell+1)·2^-l + D·2^-l
    // for some integer a in [0, ⌈t⌉].
    let cell = BigInt::from(cell);
    let (t_lo, t_hi) = (geom.t.lo_ratio(), geom.t.hi_ratio());
    let scale = BigRational::new(BigInt::one(), BigInt::one() << geom.level as usize);
    let d = BigRational::from(geom.halfwidth.clone()) * &scale;
    let x_lo = &t_lo * BigRational::from(cell.clone()) * &scale - &d;
    let x_hi = &t_hi * (BigRational::from(cell) + BigRational::one()) * &scale + &d;
    // smallest integer strictly greater than x_lo
    let a_min: BigInt = x_lo.floor().to_integer() + BigInt::one();
    // largest integer strictly less than x_hi
    let a_max = if x_hi.is_integer() {
        x_hi.to_integer() - 1
    } else {
        x_hi.floor().to_integer()
    };
    let a_min = a_min.max(BigInt::zero());
    let a_max = a_max.min(t_hi.ceil().to_integer());
    a_min <= a_max
}
