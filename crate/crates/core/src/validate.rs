//! Empirical checks of the measure-retention lemmas and the dimension count.
//!
//! Three lemmas are measured, not assumed:
//!
//! 1. *Cover density*: for a survivor cell `J` at level `l_n` and a gap stage
//!    `m ≥ h(n)`, the covered fraction `μ(J ∩ A_m)/(δ_m·μ(J))` against the
//!    claimed bound 5. Measured exactly by cell counting. Samples exceeding
//!    the bound are flagged as findings in the report rather than silently
//!    dropped: at the *minimal* effective gap the dyadic cover spends 3-5
//!    cells per grid point (a forbidden segment is wider than two cells), so
//!    the constant 5 does not always hold there — the sharp worst case is 8.
//! 2. *Retention*: `μ(J∩B_M) ≥ 5/6·μ(J∩B_m)` across a ladder step. Two
//!    methods: exact sieving of `J` through stage `M` (small scales), or a
//!    certified lower bound — subtract the *sum* of per-stage covered
//!    measures, each counted exactly in O(log) time by floor-sum
//!    identities. Union subadditivity makes the bound rigorous; at desk
//!    scales the slack is far smaller than the margin.
//! 3. *Good children*: among the `r` level-`l_m` cells of `J∩B_m`, at least
//!    `⌊2r/3⌋` retain half their measure at stage `M`. The certified method
//!    uses the same removal budget: a fully-surviving cell can only turn bad
//!    if the budget spends at least half a cell on it.
//!
//! The dimension estimate applies the guaranteed-count formula
//! `N_{k+1} = ⌊(1/3)·2^{l_{n_{k+1}}−l_{n_k}}⌋` along a ladder and reports
//! `D_k = ln(N_1···N_k)/(l_{n_k}·ln 2)`.

use crate::dyadic::{ln_enclosure, ln_u64_enclosure, Dyadic, Enclosure};
use crate::params::{self, CMode, Ladder, ParamsError, SieveParams};
use crate::sequence::{GrowthSequence, SequenceError};
use crate::sieve::{
    sieve_range, sieve_range_lenient, DyadicCell, SieveError, StageGeometry, SurvivorState,
    ZoomStrategy, DEFAULT_RUN_BUDGET,
};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ValidateError {
    #[error("validate: {op} requires {need}")]
    Precondition { op: &'static str, need: String },
    #[error("validate: sample cell level {got} does not match stage level {want}")]
    SampleLevel { got: u32, want: u32 },
    #[error("validate: no survivor cells available for sampling in the window")]
    NoSamples,
    #[error("validate: stage blocks overlap; exact accounting needs sparser removals")]
    BlocksOverlap,
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Sieve(#[from] SieveError),
}

/// Generic lemma report: `worst_ratio` is the extremal measured value in the
/// adverse direction (max for upper bounds, min for lower bounds).
#[derive(Clone, Debug, Serialize)]
pub struct LemmaReport<D> {
    pub lemma_id: String,
    pub samples: usize,
    pub skipped: usize,
    pub worst_ratio: f64,
    pub bound: f64,
    pub pass: bool,
    /// Samples violating the bound (reported as findings, not dropped).
    pub flagged: usize,
    pub details: Vec<D>,
}

// ---------------------------------------------------------------------------
// Lemma 1: cover density within one survivor cell
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct Lemma1Sample {
    pub n: u64,
    pub m: u64,
    pub level_n: u32,
    pub level_m: u32,
    pub cell_index: String,
    pub covered_cells: String,
    pub ratio: f64,
    pub ratio_exact: String,
    pub exceeds_bound: bool,
}

/// Measure `μ(J ∩ A_m)/(δ_m·μ(J))` exactly for each `(n, m, J)` sample and
/// compare against the claimed bound 5.
pub fn lemma1_check(
    seq: &GrowthSequence,
    params: &SieveParams,
    samples: &[(u64, u64, DyadicCell)],
) -> Result<LemmaReport<Lemma1Sample>, ValidateError> {
    let mut details = Vec::with_capacity(samples.len());
    let mut worst: Option<BigRational> = None;
    let bound = BigRational::from(BigInt::from(5));
    for (n, m, cell) in samples {
        let level_n = params.dyadic_level(seq, *n)?;
        if cell.level != level_n {
            return Err(ValidateError::SampleLevel { got: cell.level, want: level_n });
        }
        let geom = StageGeometry::compute(seq, params, *m)?;
        let (b0, b1) = cell.range_at(geom.level);
        let covered: u128 = geom
            .marked_runs_in(b0, b1)
            .iter()
            .map(|&(lo, hi)| hi - lo)
            .sum();
        // ratio = covered·2^{l_n − l_m} / δ_m, with the lower δ endpoint so the
        // reported value can only overstate the true ratio.
        let ratio = BigRational::new(
            BigInt::from(covered) << level_n as usize,
            BigInt::one() << geom.level as usize,
        ) / geom.delta.lo().to_ratio();
        let exceeds = ratio > bound;
        details.push(Lemma1Sample {
            n: *n,
            m: *m,
            level_n,
            level_m: geom.level,
            cell_index: cell.index.to_string(),
            covered_cells: covered.to_string(),
            ratio: ratio.to_f64().unwrap_or(f64::NAN),
            ratio_exact: ratio.to_string(),
            exceeds_bound: exceeds,
        });
        worst = Some(match worst {
            Some(w) if w >= ratio => w,
            _ => ratio,
        });
    }
    let worst = worst.unwrap_or_else(BigRational::zero);
    let flagged = details.iter().filter(|d| d.exceeds_bound).count();
    Ok(LemmaReport {
        lemma_id: "L1".into(),
        samples: details.len(),
        skipped: 0,
        worst_ratio: worst.to_f64().unwrap_or(f64::NAN),
        bound: 5.0,
        pass: worst <= bound,
        flagged,
        details,
    })
}

/// Draw `(n, m = h_eff(n), J)` triples with `J` a random survivor cell of a
/// freshly sieved random window — samples come from the actual construction,
/// never synthesized.
pub fn sample_lemma1_triples(
    seq: &GrowthSequence,
    params: &SieveParams,
    n_lo: u64,
    n_hi: u64,
    count: usize,
    seed: u64,
) -> Result<Vec<(u64, u64, DyadicCell)>, ValidateError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let first_stage = params.n_start().max(seq.n_min()).min(n_lo).max(2);
    // the window must be no deeper than the first sieved stage's level
    let window_level = params.dyadic_level(seq, first_stage)?.min(10);
    let span = 1u128 << window_level;
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        if attempts > count * 20 {
            return Err(ValidateError::NoSamples);
        }
        let n = rng.gen_range(n_lo..=n_hi);
        let m = params.h_effective(seq, n)?;
        // interior window, away from the always-removed edges
        let widx = rng.gen_range(span / 8..span - span / 8);
        let window = DyadicCell::new(window_level, widx);
        let n_start = params.n_start().max(seq.n_min()).min(n);
        let state = match sieve_range(seq, params, window, n_start, n, DEFAULT_RUN_BUDGET) {
            Ok(s) => s,
            Err(SieveError::EmptySurvivors { .. }) => continue,
            Err(e) => return Err(e.into()),
        };
        if let Some(cell) = state.select_survivor(ZoomStrategy::SeededRandom, &mut rng) {
            out.push((n, m, cell));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Floor-sum kernel: exact marked-cell counts in O(log) per stage
// ---------------------------------------------------------------------------

/// `Σ_{i=0}^{n-1} ⌊(a·i + b)/m⌋` for `m > 0`, with 128-bit checked arithmetic.
fn floor_sum_i128(mut n: i128, mut m: i128, mut a: i128, mut b: i128) -> Option<i128> {
    debug_assert!(n >= 0 && m > 0);
    let mut ans: i128 = 0;
    if a < 0 {
        let a2 = a.rem_euclid(m);
        let shift = (a2 - a) / m;
        ans = ans.checked_sub((n.checked_mul(n - 1)? / 2).checked_mul(shift)?)?;
        a = a2;
    }
    if b < 0 {
        let b2 = b.rem_euclid(m);
        let shift = (b2 - b) / m;
        ans = ans.checked_sub(n.checked_mul(shift)?)?;
        b = b2;
    }
    loop {
        if a >= m {
            ans = ans.checked_add((n.checked_mul(n - 1)? / 2).checked_mul(a / m)?)?;
            a %= m;
        }
        if b >= m {
            ans = ans.checked_add(n.checked_mul(b / m)?)?;
            b %= m;
        }
        let y_max = a.checked_mul(n)?.checked_add(b)?;
        if y_max < m {
            break;
        }
        n = y_max / m;
        b = y_max % m;
        std::mem::swap(&mut m, &mut a);
    }
    Some(ans)
}

/// Big-integer fallback of [`floor_sum_i128`].
fn floor_sum_big(mut n: BigInt, mut m: BigInt, mut a: BigInt, mut b: BigInt) -> BigInt {
    let mut ans = BigInt::zero();
    let two = BigInt::from(2);
    if a.is_negative() {
        let a2 = a.mod_floor(&m);
        let shift = (&a2 - &a) / &m;
        ans -= &n * (&n - 1) / &two * shift;
        a = a2;
    }
    if b.is_negative() {
        let b2 = b.mod_floor(&m);
        let shift = (&b2 - &b) / &m;
        ans -= &n * shift;
        b = b2;
    }
    loop {
        if a >= m {
            ans += &n * (&n - 1) / &two * (&a / &m);
            a = a.mod_floor(&m);
        }
        if b >= m {
            ans += &n * (&b / &m);
            b = b.mod_floor(&m);
        }
        let y_max = &a * &n + &b;
        if y_max < m {
            break;
        }
        n = &y_max / &m;
        b = y_max.mod_floor(&m);
        std::mem::swap(&mut m, &mut a);
    }
    ans
}

/// Exact number of marked level-`l` cells of one stage inside `[b0, b1)`,
/// in O(log) arithmetic operations. Requires an exact rational `t` and
/// pairwise-disjoint candidate blocks (`(2^l − 2D)·q ≥ p`).
pub fn stage_covered_cells(
    geom: &StageGeometry,
    b0: u128,
    b1: u128,
) -> Result<BigUint, ValidateError> {
    let t = geom
        .t
        .as_exact()
        .ok_or(ValidateError::Precondition {
            op: "stage_covered_cells",
            need: "an exact rational t_n".into(),
        })?;
    let p = t.numer().clone();
    let q = t.denom().clone();
    let pow_l = BigInt::one() << geom.level as usize;
    let d = &geom.halfwidth;
    // disjointness of consecutive blocks: gap (2^l − 2D)/t ≥ one cell
    if (&pow_l - d * 2) * &q < p {
        return Err(ValidateError::BlocksOverlap);
    }
    if b1 <= b0 {
        return Ok(BigUint::zero());
    }
    let alpha = &pow_l * &q; // slope of a ↦ (a·2^l ± D)·q
    let big_b0 = BigInt::from(b0);
    let big_b1 = BigInt::from(b1);
    // first candidate whose block reaches b0: a > (b0·p − D·q)/(2^l·q)
    let a_first: BigInt = (&big_b0 * &p - d * &q).div_floor(&alpha) + BigInt::one();
    let a_first = a_first.max(BigInt::zero());
    // last candidate whose block starts before b1: a < (b1·p + D·q)/(2^l·q)
    let a_last: BigInt = (&big_b1 * &p + d * &q).div_ceil(&alpha) - BigInt::one();
    let a_last = a_last.min(t.ceil().to_integer());
    if a_first > a_last {
        return Ok(BigUint::zero());
    }

    let clipped_len = |a: &BigInt| -> BigInt {
        let x = a << geom.level as usize;
        let lo: BigInt = ((&x - d) * &q).div_floor(&p).max(big_b0.clone());
        let hi: BigInt = (((&x + d) * &q).div_ceil(&p) - BigInt::one()).min(&big_b1 - BigInt::one());
        if lo <= hi {
            hi - lo + 1
        } else {
            BigInt::zero()
        }
    };

    let mut total = clipped_len(&a_first);
    if a_last > a_first {
        total += clipped_len(&a_last);
    }
    // interior candidates: blocks fully inside [b0, b1) by disjointness
    let int_lo = &a_first + 1;
    let int_hi = &a_last - 1;
    if int_lo <= int_hi {
        let cnt = (&int_hi - &int_lo) + 1;
        // Σ b_hi(a) + cnt = Σ ⌈(a·2^l + D)q/p⌉ = Σ ⌊((a·2^l + D)q + p − 1)/p⌋
        // Σ len = Σ(b_hi − b_lo + 1) = S1 − S0 with
        let beta1 = (&int_lo * &pow_l + d) * &q + &p - 1;
        let beta0 = (&int_lo * &pow_l - d) * &q;
        let s1 = floor_sum_auto(&cnt, &p, &alpha, &beta1);
        let s0 = floor_sum_auto(&cnt, &p, &alpha, &beta0);
        total += s1 - s0;
    }
    debug_assert!(!total.is_negative());
    Ok(total.to_biguint().expect("nonnegative count"))
}

fn floor_sum_auto(n: &BigInt, m: &BigInt, a: &BigInt, b: &BigInt) -> BigInt {
    if let (Some(ni), Some(mi), Some(ai), Some(bi)) =
        (n.to_i128(), m.to_i128(), a.to_i128(), b.to_i128())
    {
        // keep well clear of i128 saturation inside the recursion
        if ni.checked_mul(ai).and_then(|v| v.checked_add(bi)).is_some()
            && ai.checked_mul(4).is_some()
            && bi.checked_mul(4).is_some()
        {
            if let Some(v) = floor_sum_i128(ni, mi, ai, bi) {
                return BigInt::from(v);
            }
        }
    }
    floor_sum_big(n.clone(), m.clone(), a.clone(), b.clone())
}

// ---------------------------------------------------------------------------
// Lemmas 2 and 3: retention across a ladder step
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RetentionMethod {
    /// Sieve `J` all the way to `M` and count.
    Exact,
    /// Exact per-stage covered-measure sums + union subadditivity.
    CertifiedLowerBound,
}

#[derive(Clone, Debug, Serialize)]
pub struct RetentionSample {
    pub cell_index: String,
    pub hypothesis_ratio: f64,
    pub hypothesis_met: bool,
    /// Exact retention (method Exact) or a certified lower bound.
    pub retention: f64,
    pub retention_exact: String,
    pub r_children: u64,
    /// Exact good count (Exact) or a certified lower bound.
    pub good_children: u64,
    pub good_threshold: u64,
    pub lemma2_pass: bool,
    pub lemma3_pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RetentionOutcome {
    pub n: u64,
    pub m: u64,
    pub m2: u64,
    pub method: RetentionMethod,
    pub bound: f64,
    pub samples: Vec<RetentionSample>,
    pub skipped_hypothesis: usize,
}

/// Shared runner for the retention lemmas over the ladder step
/// `(n, m, M) = (n_k, n_{k+1}, n_{k+2})`.
pub fn retention_check(
    seq: &GrowthSequence,
    params: &SieveParams,
    step: (u64, u64, u64),
    window: &DyadicCell,
    method: RetentionMethod,
    max_samples: usize,
    seed: u64,
) -> Result<RetentionOutcome, ValidateError> {
    let (n, m, m2) = step;
    if !(n < m && m <= m2) {
        return Err(ValidateError::Precondition {
            op: "retention_check",
            need: format!("an increasing ladder step (got {n}, {m}, {m2})"),
        });
    }
    let level_n = params.dyadic_level(seq, n)?;
    if window.level > level_n {
        return Err(ValidateError::Precondition {
            op: "retention_check",
            need: format!("window level ≤ l_n = {level_n}"),
        });
    }
    let n_start = params.n_start().max(seq.n_min()).min(n);
    let (state_n, emptied) =
        sieve_range_lenient(seq, params, *window, n_start, n, DEFAULT_RUN_BUDGET)?;
    if emptied.is_some() {
        return Err(ValidateError::NoSamples);
    }

    // Candidate J cells: leftmost plus seeded-random picks, deduplicated.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells: Vec<DyadicCell> = Vec::new();
    if let Some(c) = state_n.select_survivor(ZoomStrategy::Leftmost, &mut rng) {
        cells.push(c);
    }
    let mut guard = 0;
    while cells.len() < max_samples && guard < max_samples * 10 {
        guard += 1;
        if let Some(c) = state_n.select_survivor(ZoomStrategy::SeededRandom, &mut rng) {
            if !cells.contains(&c) {
                cells.push(c);
            }
        }
    }
    if cells.is_empty() {
        return Err(ValidateError::NoSamples);
    }

    let bound = retention_bound(params, m, m2)?;
    let bound_f = bound.to_f64().unwrap_or(5.0 / 6.0);
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut skipped = 0usize;

    // Hypothesis phase: J ∩ B_m exactly for every candidate; an emptied J
    // simply fails the ≥ 1/2 hypothesis.
    struct Kept {
        cell: DyadicCell,
        state_m: SurvivorState,
        mu_jm: BigRational,
        hyp_ratio: f64,
        r: u64,
    }
    let mut kept: Vec<Kept> = Vec::new();
    let mut rejected: Vec<(DyadicCell, f64)> = Vec::new();
    for cell in cells {
        let (state_m, _) = sieve_range_lenient(seq, params, cell, n + 1, m, DEFAULT_RUN_BUDGET)?;
        let mu_j = BigRational::new(BigInt::one(), BigInt::one() << cell.level as usize);
        let mu_jm = state_m.survivors().measure();
        let hyp_ratio = &mu_jm / &mu_j;
        if hyp_ratio < half {
            skipped += 1;
            rejected.push((cell, hyp_ratio.to_f64().unwrap_or(f64::NAN)));
            continue;
        }
        let r = state_m.survivors().cell_count().to_u64().unwrap_or(u64::MAX);
        kept.push(Kept {
            cell,
            state_m,
            mu_jm,
            hyp_ratio: hyp_ratio.to_f64().unwrap_or(f64::NAN),
            r,
        });
    }

    // Removal phase. The certified method walks the stage range once and
    // charges every kept cell in the same pass, so the per-stage geometry
    // (one ln enclosure per stage) is shared across samples.
    let mut results: Vec<(BigRational, u64)> = Vec::with_capacity(kept.len());
    match method {
        RetentionMethod::Exact => {
            for k in &kept {
                let level_m = k.state_m.level();
                results.push(retention_exact(seq, params, &k.state_m, m, m2, level_m)?);
            }
        }
        RetentionMethod::CertifiedLowerBound => {
            let prec = params.precision().max(80);
            let c = params.c_enclosure(prec);
            let mut removed: Vec<Dyadic> = vec![Dyadic::zero(); kept.len()];
            for j in m + 1..=m2 {
                let geom = stage_geometry_fast(seq, params, &c, j, prec)?;
                for (i, k) in kept.iter().enumerate() {
                    let (b0, b1) = k.cell.range_at(geom.level);
                    let covered = stage_covered_cells(&geom, b0, b1)?;
                    removed[i] = removed[i]
                        .add(&Dyadic::new(BigInt::from(covered), -(geom.level as i64)));
                }
            }
            for (k, rem) in kept.iter().zip(removed) {
                let removed_ratio = rem.to_ratio();
                let retention_lb =
                    ((&k.mu_jm - &removed_ratio) / &k.mu_jm).max(BigRational::zero());
                // Markov: a fully surviving level-l_m cell goes bad only if the
                // removal budget spends at least half a cell on it.
                let level_m = k.state_m.level();
                let half_cell =
                    BigRational::new(BigInt::one(), BigInt::one() << (level_m + 1) as usize);
                let bad = (&removed_ratio / &half_cell)
                    .floor()
                    .to_integer()
                    .to_u64()
                    .unwrap_or(u64::MAX);
                results.push((retention_lb, k.r.saturating_sub(bad)));
            }
        }
    }

    let mut samples = Vec::new();
    for (k, (retention, good)) in kept.iter().zip(results) {
        let threshold = (2 * k.r) / 3;
        samples.push(RetentionSample {
            cell_index: k.cell.index.to_string(),
            hypothesis_ratio: k.hyp_ratio,
            hypothesis_met: true,
            retention: retention.to_f64().unwrap_or(f64::NAN),
            retention_exact: retention.to_string(),
            r_children: k.r,
            good_children: good,
            good_threshold: threshold,
            lemma2_pass: retention >= bound,
            lemma3_pass: good >= threshold,
        });
    }
    for (cell, hyp) in rejected {
        samples.push(RetentionSample {
            cell_index: cell.index.to_string(),
            hypothesis_ratio: hyp,
            hypothesis_met: false,
            retention: f64::NAN,
            retention_exact: String::new(),
            r_children: 0,
            good_children: 0,
            good_threshold: 0,
            lemma2_pass: true,
            lemma3_pass: true,
        });
    }
    Ok(RetentionOutcome {
        n,
        m,
        m2,
        method,
        bound: bound_f,
        samples,
        skipped_hypothesis: skipped,
    })
}

/// Retention bound: 5/6 for the paper constant; `1 − (10/c)·ln(ln M/ln m)`
/// for a custom `c` (upper endpoint of the enclosure, so passing the
/// comparison implies the true inequality).
fn retention_bound(params: &SieveParams, m: u64, m2: u64) -> Result<BigRational, ValidateError> {
    if params.c_mode() == CMode::Paper {
        return Ok(BigRational::new(BigInt::from(5), BigInt::from(6)));
    }
    if m2 == m {
        return Ok(BigRational::zero());
    }
    let prec = params.precision().max(80);
    let ln_m = ln_u64_enclosure(m, prec);
    let ln_m2 = ln_u64_enclosure(m2, prec);
    let ratio = ln_m2.div_scaled(&ln_m, prec);
    let log_ratio = enclosure_ln(&ratio, prec);
    let ten_over_c = params
        .inv_c_enclosure(prec)
        .mul(&Enclosure::point(Dyadic::from_u64(10)));
    let sub = ten_over_c.mul_scaled(&log_ratio, prec);
    let bound = Enclosure::point(Dyadic::one()).sub(&sub);
    Ok(bound.hi().to_ratio())
}

/// `ln` of an enclosure via monotonicity.
pub fn enclosure_ln(e: &Enclosure, prec: u32) -> Enclosure {
    let lo = ln_enclosure(&e.lo().to_ratio(), prec);
    let hi = ln_enclosure(&e.hi().to_ratio(), prec);
    Enclosure::new(lo.lo().clone(), hi.hi().clone())
}

fn retention_exact(
    seq: &GrowthSequence,
    params: &SieveParams,
    state_m: &SurvivorState,
    m: u64,
    m2: u64,
    level_m: u32,
) -> Result<(BigRational, u64), ValidateError> {
    let mut state = state_m.clone();
    for j in m + 1..=m2 {
        match state.subtract_step(seq, params, j) {
            Ok(()) => {}
            Err(SieveError::EmptySurvivors { .. }) => break,
            Err(e) => return Err(e.into()),
        }
    }
    let _ = level_m;
    let retention = state.survivors().measure() / state_m.survivors().measure();
    // good children: level-l_m cells retaining half their measure
    let level_fin = state.level();
    let shift = level_fin - level_m;
    let half_cell = 1u128 << shift.saturating_sub(1);
    let mut good = 0u64;
    let mut current: Option<(u128, u128)> = None; // (ancestor, fine count)
    for &(lo, hi) in state.survivors().runs() {
        let mut x = lo;
        while x < hi {
            let anc = x >> shift;
            let anc_end = (anc + 1) << shift;
            let take = hi.min(anc_end) - x;
            match current {
                Some((a, cnt)) if a == anc => current = Some((a, cnt + take)),
                Some((_, cnt)) => {
                    if cnt >= half_cell {
                        good += 1;
                    }
                    current = Some((anc, take));
                }
                None => current = Some((anc, take)),
            }
            x += take;
        }
    }
    if let Some((_, cnt)) = current {
        if cnt >= half_cell {
            good += 1;
        }
    }
    Ok((retention, good))
}

/// One-ln-per-stage geometry for the hot accounting loop; mirrors
/// `StageGeometry::compute` exactly at equal precision.
fn stage_geometry_fast(
    seq: &GrowthSequence,
    params: &SieveParams,
    c: &Enclosure,
    n: u64,
    prec: u32,
) -> Result<StageGeometry, ValidateError> {
    let ln_n = ln_u64_enclosure(n, prec);
    let mut delta = params::delta_given(c, n, &ln_n, prec);
    if !delta.rel_width_within(64) {
        // rare: fall back to the adaptive path
        delta = params.delta(n)?;
    }
    let t = seq.eval(n, prec)?;
    let t_enc = t.enclosure(prec);
    let level = match params::level_given(c, &t_enc, n, &ln_n, prec) {
        Some(l) => l as u32,
        None => params.dyadic_level(seq, n)?,
    };
    let halfwidth = delta.hi().shifted(level as i64).ceil_int();
    Ok(StageGeometry { n, level, t, delta, halfwidth })
}

/// Lemma 2 retention check across a ladder step.
pub fn lemma2_check(
    seq: &GrowthSequence,
    params: &SieveParams,
    step: (u64, u64, u64),
    window: &DyadicCell,
    method: RetentionMethod,
    max_samples: usize,
    seed: u64,
) -> Result<LemmaReport<RetentionSample>, ValidateError> {
    let outcome = retention_check(seq, params, step, window, method, max_samples, seed)?;
    Ok(lemma2_report(&outcome))
}

pub fn lemma2_report(outcome: &RetentionOutcome) -> LemmaReport<RetentionSample> {
    let kept: Vec<&RetentionSample> =
        outcome.samples.iter().filter(|s| s.hypothesis_met).collect();
    let worst = kept.iter().map(|s| s.retention).fold(f64::INFINITY, f64::min);
    let flagged = kept.iter().filter(|s| !s.lemma2_pass).count();
    LemmaReport {
        lemma_id: "L2".into(),
        samples: kept.len(),
        skipped: outcome.skipped_hypothesis,
        worst_ratio: if kept.is_empty() { f64::NAN } else { worst },
        bound: outcome.bound,
        pass: flagged == 0 && !kept.is_empty(),
        flagged,
        details: outcome.samples.clone(),
    }
}

/// Lemma 3 good-children check across a ladder step.
pub fn lemma3_check(
    seq: &GrowthSequence,
    params: &SieveParams,
    step: (u64, u64, u64),
    window: &DyadicCell,
    method: RetentionMethod,
    max_samples: usize,
    seed: u64,
) -> Result<LemmaReport<RetentionSample>, ValidateError> {
    let outcome = retention_check(seq, params, step, window, method, max_samples, seed)?;
    Ok(lemma3_report(&outcome))
}

pub fn lemma3_report(outcome: &RetentionOutcome) -> LemmaReport<RetentionSample> {
    let kept: Vec<&RetentionSample> =
        outcome.samples.iter().filter(|s| s.hypothesis_met && s.r_children >= 3).collect();
    let worst = kept
        .iter()
        .map(|s| s.good_children as f64 / s.r_children as f64)
        .fold(f64::INFINITY, f64::min);
    let flagged = kept.iter().filter(|s| !s.lemma3_pass).count();
    LemmaReport {
        lemma_id: "L3".into(),
        samples: kept.len(),
        skipped: outcome.samples.len() - kept.len(),
        worst_ratio: if kept.is_empty() { f64::NAN } else { worst },
        bound: 2.0 / 3.0,
        pass: flagged == 0 && !kept.is_empty(),
        flagged,
        details: outcome.samples.clone(),
    }
}

// ---------------------------------------------------------------------------
// Removal budget
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct BudgetReport {
    pub m: u64,
    pub m2: u64,
    pub delta_sum: f64,
    pub delta_sum_hi: String,
    pub bound: f64,
    /// `Σδ_j ≤ (1/c)·ln(ln M/ln m)` verified with certified endpoints.
    pub integral_inequality_holds: bool,
    /// `1 − 10·Σδ_j` (lower endpoint).
    pub retention_constant: f64,
}

/// Check the stage-budget inequality `Σ_{j=m+1}^{M} δ_j ≤ (1/c)·ln(ln M/ln m)`.
pub fn budget_check(params: &SieveParams, m: u64, m2: u64) -> Result<BudgetReport, ValidateError> {
    if !(2 <= m && m < m2) {
        return Err(ValidateError::Precondition {
            op: "budget_check",
            need: format!("2 <= m < M (got {m}, {m2})"),
        });
    }
    let prec = params.precision().max(80);
    let c = params.c_enclosure(prec);
    let mut sum = Enclosure::point(Dyadic::zero());
    for j in m + 1..=m2 {
        let ln_j = ln_u64_enclosure(j, prec);
        let d = params::delta_given(&c, j, &ln_j, prec);
        sum = sum.add(&d).round_outward(prec + 16);
    }
    let ln_m = ln_u64_enclosure(m, prec);
    let ln_m2 = ln_u64_enclosure(m2, prec);
    let ratio = ln_m2.div_scaled(&ln_m, prec);
    let bound = params
        .inv_c_enclosure(prec)
        .mul_scaled(&enclosure_ln(&ratio, prec), prec);
    let holds = sum.hi().to_ratio() <= bound.lo().to_ratio();
    let retention = Enclosure::point(Dyadic::one())
        .sub(&sum.mul(&Enclosure::point(Dyadic::from_u64(10))));
    Ok(BudgetReport {
        m,
        m2,
        delta_sum: sum.to_f64(),
        delta_sum_hi: sum.hi().to_ratio().to_string(),
        bound: bound.to_f64(),
        integral_inequality_holds: holds,
        retention_constant: retention.lo().to_f64(),
    })
}

// ---------------------------------------------------------------------------
// Dimension-count estimate
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct DimensionEstimate {
    pub entries: Vec<u64>,
    pub levels: Vec<u32>,
    /// Guaranteed child counts `N_k = ⌊(1/3)·2^{l_{n_k}−l_{n_{k-1}}}⌋`.
    pub counts: Vec<String>,
    pub d_k: Vec<f64>,
    /// Comparison-series terms `(Δ_{k−1}/Δ_k)·(R_k·Δ_k^ν)^{-1}` at ν = v.
    pub series_terms: Vec<f64>,
    pub valid: bool,
    pub offending_k: Option<usize>,
}

/// Apply the guaranteed-count formula along a ladder.
pub fn eggleston_estimate(
    seq: &GrowthSequence,
    params: &SieveParams,
    ladder: &Ladder,
) -> Result<DimensionEstimate, ValidateError> {
    if ladder.entries.len() < 2 {
        return Err(ValidateError::Precondition {
            op: "eggleston_estimate",
            need: "a ladder with at least 2 entries".into(),
        });
    }
    let mut levels = Vec::with_capacity(ladder.entries.len());
    for &n in &ladder.entries {
        levels.push(params.dyadic_level(seq, n)?);
    }
    let mut counts: Vec<BigUint> = Vec::new();
    let mut valid = true;
    let mut offending = None;
    for k in 1..levels.len() {
        let gap = levels[k] - levels[k - 1];
        let n_k = (BigUint::one() << gap as usize) / BigUint::from(3u32);
        if n_k <= BigUint::one() && valid {
            valid = false;
            offending = Some(k);
        }
        counts.push(n_k);
    }
    let ln2 = std::f64::consts::LN_2;
    let mut ln_r = 0.0f64;
    let mut d_k = Vec::new();
    for (k, n_k) in counts.iter().enumerate() {
        ln_r += ln_biguint(n_k);
        let d = ln_r / (levels[k + 1] as f64 * ln2);
        debug_assert!(!valid || (0.0..=1.0).contains(&d));
        d_k.push(d);
    }
    // series terms for k >= 2 (1-indexed over counts)
    let v = params.v().to_f64().unwrap_or(0.6);
    let mut log2_r = 0.0f64;
    let mut series_terms = Vec::new();
    for (k, n_k) in counts.iter().enumerate() {
        log2_r += ln_biguint(n_k) / ln2;
        if k >= 1 {
            // Δ_{k-1}/Δ_k = 2^{l_k − l_{k-1}}; (R_k·Δ_k^ν)^{-1} = 2^{ν·l_k}/R_k
            let e = (levels[k + 1] - levels[k]) as f64 + v * levels[k + 1] as f64 - log2_r;
            series_terms.push(e.exp2());
        }
    }
    Ok(DimensionEstimate {
        entries: ladder.entries.clone(),
        levels,
        counts: counts.iter().map(|c| c.to_string()).collect(),
        d_k,
        series_terms,
        valid,
        offending_k: offending,
    })
}

/// `ln` of a big unsigned integer in f64, good to ~1e-15 relative.
pub fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 53 {
        return x.to_f64().unwrap_or(1.0).ln();
    }
    let shift = bits - 53;
    let m = (x >> shift).to_f64().unwrap_or(1.0);
    m.ln() + shift as f64 * std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::HMode;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn square_seq() -> GrowthSequence {
        GrowthSequence::polynomial(
            vec![BigRational::one(), BigRational::zero(), BigRational::zero()],
            2,
        )
        .unwrap()
    }

    fn params_g2() -> SieveParams {
        SieveParams::new(ratio(2, 1)).unwrap()
    }

    #[test]
    fn floor_sum_matches_naive() {
        let naive = |n: i128, m: i128, a: i128, b: i128| -> i128 {
            (0..n).map(|i| (a * i + b).div_euclid(m)).sum()
        };
        for &(n, m, a, b) in &[
            (10i128, 7i128, 3i128, 2i128),
            (50, 13, -5, 100),
            (100, 9, 17, -40),
            (1, 5, 0, 0),
            (0, 3, 2, 1),
            (37, 11, -13, -29),
            (64, 1, 5, 7),
        ] {
            assert_eq!(
                floor_sum_i128(n, m, a, b).unwrap(),
                naive(n, m, a, b),
                "i128 floor_sum mismatch at {n},{m},{a},{b}"
            );
            assert_eq!(
                floor_sum_big(BigInt::from(n), BigInt::from(m), BigInt::from(a), BigInt::from(b)),
                BigInt::from(naive(n, m, a, b)),
                "big floor_sum mismatch at {n},{m},{a},{b}"
            );
        }
    }

    #[test]
    fn covered_cells_matches_enumeration() {
        // cross-validate the O(log) counting against marked_runs_in
        let seq = square_seq();
        let params = params_g2();
        for n in [18u64, 32, 100, 250] {
            let geom = StageGeometry::compute(&seq, &params, n).unwrap();
            let span = 1u128 << geom.level;
            for (b0, b1) in [
                (0u128, span),
                (span / 4, span / 2),
                (span / 3, span / 3 + 1000),
                (span - 500, span),
            ] {
                let fast = stage_covered_cells(&geom, b0, b1).unwrap();
                let slow: u128 = geom
                    .marked_runs_in(b0, b1)
                    .iter()
                    .map(|&(lo, hi)| hi - lo)
                    .sum();
                assert_eq!(
                    fast,
                    BigUint::from(slow),
                    "count mismatch at n = {n}, range ({b0}, {b1})"
                );
            }
        }
    }

    #[test]
    fn lemma1_toy_enumeration() {
        // t = n², effective step (2, 18): every level-l_2 cell measured; the
        // worst ratio lands near 4·q(2,18) ≈ 5.59, exceeding the claimed 5.
        let seq = square_seq();
        let params = params_g2();
        let l2 = params.dyadic_level(&seq, 2).unwrap();
        assert_eq!(l2, 9);
        let samples: Vec<(u64, u64, DyadicCell)> =
            (0..512u128).map(|i| (2, 18, DyadicCell::new(9, i))).collect();
        let report = lemma1_check(&seq, &params, &samples).unwrap();
        assert_eq!(report.samples, 512);
        // frozen from independent enumeration: max ratio = 5.5865...
        assert!((report.worst_ratio - 5.5865).abs() < 2e-3, "worst {}", report.worst_ratio);
        assert!(!report.pass);
        assert!(report.flagged > 0);
        // the dominant covered count per occupied cell is 4
        let max_cells: u64 = report
            .details
            .iter()
            .map(|d| d.covered_cells.parse::<u64>().unwrap())
            .max()
            .unwrap();
        assert_eq!(max_cells, 4);
    }

    #[test]
    fn lemma1_disjoint_cell_ratio_zero() {
        let seq = square_seq();
        let params = params_g2();
        // J between grid segments of stage m = 18: ratio 0
        // grid spacing 1/324 ≈ 2^9·0.63 cells at level 9 — pick a cell between
        // two grid points: cell 5 spans [5/512, 6/512] ≈ [0.00977, 0.0117];
        // grid points 3/324 = 0.00926 and 4/324 = 0.01235 with radius ~2.9e-6
        let report =
            lemma1_check(&seq, &params, &[(2, 18, DyadicCell::new(9, 5))]).unwrap();
        assert_eq!(report.worst_ratio, 0.0);
        assert!(report.pass);
    }

    #[test]
    fn retention_exact_vs_certified_small() {
        // real paper-c effective triple at n0 = 2: exact enumeration is
        // affordable and must dominate the certified lower bound
        let seq = square_seq();
        let params = params_g2().with_n_start(2);
        let m = params.h_effective(&seq, 2).unwrap();
        let m2 = params.h_effective(&seq, m).unwrap();
        assert_eq!((m, m2), (18, 963)); // frozen by the scan oracle
        let window = DyadicCell::new(7, 43);
        let exact =
            retention_check(&seq, &params, (2, m, m2), &window, RetentionMethod::Exact, 2, 1)
                .unwrap();
        let cert = retention_check(
            &seq,
            &params,
            (2, m, m2),
            &window,
            RetentionMethod::CertifiedLowerBound,
            2,
            1,
        )
        .unwrap();
        assert_eq!(exact.samples.len(), cert.samples.len());
        let mut compared = 0;
        for (e, c) in exact.samples.iter().zip(cert.samples.iter()) {
            if !e.hypothesis_met {
                continue;
            }
            compared += 1;
            let ex: BigRational = e.retention_exact.parse::<BigRational>().unwrap();
            let lb: BigRational = c.retention_exact.parse::<BigRational>().unwrap();
            assert!(lb <= ex, "certified bound {lb} above exact {ex}");
            assert!(c.good_children <= e.good_children);
            // at this scale both comfortably clear 5/6
            assert!(e.lemma2_pass && c.lemma2_pass);
            assert!(e.lemma3_pass && c.lemma3_pass);
        }
        assert!(compared >= 1, "no sample met the hypothesis");
    }

    #[test]
    fn retention_degenerate_step() {
        // M = m: empty removal range, retention exactly 1
        let seq = square_seq();
        let params = params_g2();
        let out = retention_check(
            &seq,
            &params,
            (32, 2499, 2499),
            &DyadicCell::new(16, 40_000),
            RetentionMethod::Exact,
            1,
            0,
        )
        .unwrap();
        assert_eq!(out.method, RetentionMethod::Exact);
        let s = out.samples.iter().find(|s| s.hypothesis_met).unwrap();
        assert_eq!(s.retention, 1.0);
        assert_eq!(s.good_children, s.r_children);
    }

    #[test]
    fn budget_check_paper_pair() {
        let params = params_g2();
        let rep = budget_check(&params, 100, 4606).unwrap();
        // Σ δ_j < (1/c)·ln(ln 4606/ln 100): the integral comparison holds
        assert!(rep.integral_inequality_holds);
        assert!(rep.delta_sum > 0.0 && rep.delta_sum < rep.bound);
        // frozen from direct summation: Σ ≈ 0.01095, bound ≈ 0.011011
        assert!((rep.delta_sum - 0.01095).abs() < 2e-4, "sum {}", rep.delta_sum);
        assert!((rep.bound - 0.011011).abs() < 2e-4);
        // degenerate
        let one = budget_check(&params, 100, 101).unwrap();
        assert!(one.delta_sum > 0.0);
        assert!(budget_check(&params, 100, 100).is_err());
    }

    #[test]
    fn budget_retention_constant_at_paper_ratio() {
        // with paper c and ln M/ln m = 2 + 1/γ the retention constant is
        // 1 − (10/c)·ln(2+1/γ) = 1 − 1/6 = 5/6 exactly
        let params = params_g2();
        let prec = 96;
        let arg = ratio(5, 2); // 2 + 1/2
        let ln_arg = ln_enclosure(&arg, prec);
        let ten_over_c = params
            .inv_c_enclosure(prec)
            .mul(&Enclosure::point(Dyadic::from_u64(10)));
        let product = ten_over_c.mul(&ln_arg);
        // product encloses exactly 1/6
        assert!(product.contains_ratio(&ratio(1, 6)));
        assert!(product.rel_width_within(60));
    }

    #[test]
    fn eggleston_basics() {
        // level gap 10: N = ⌊1024/3⌋ = 341
        let gap_n = (BigUint::one() << 10usize) / BigUint::from(3u32);
        assert_eq!(gap_n, BigUint::from(341u32));

        let seq = square_seq();
        let params = params_g2().with_h_mode(HMode::Effective);
        let ladder = params.build_ladder(&seq, 32, 3).unwrap();
        let est = eggleston_estimate(&seq, &params, &ladder).unwrap();
        assert!(est.valid);
        assert_eq!(est.levels, vec![23, 43, 74, 121]);
        assert_eq!(
            est.counts,
            vec!["349525".to_string(), "715827882".into(), "46912496118442".into()]
        );
        // D_k positive and nondecreasing
        assert!(est.d_k.iter().all(|&d| d > 0.0 && d <= 1.0));
        assert!(est.d_k.windows(2).all(|w| w[0] <= w[1]));
        // single-step ladder: D_1 = ln N_1/(l_1 ln 2)
        let short = Ladder { entries: vec![32, 2499], mode: HMode::Effective };
        let est1 = eggleston_estimate(&seq, &params, &short).unwrap();
        let expect = (349525f64).ln() / (43.0 * std::f64::consts::LN_2);
        assert!((est1.d_k[0] - expect).abs() < 1e-12);
    }

    #[test]
    fn eggleston_invalid_count() {
        // consecutive entries with equal levels give N = 0: invalid, with k
        let seq = square_seq();
        let params = params_g2();
        let ladder = Ladder { entries: vec![100, 101], mode: HMode::Paper };
        let est = eggleston_estimate(&seq, &params, &ladder).unwrap();
        assert!(!est.valid);
        assert_eq!(est.offending_k, Some(1));
    }

    #[test]
    fn budget_monotone_in_depth() {
        // Σδ grows with M; the derived retention constant shrinks
        let params = params_g2();
        let a = budget_check(&params, 100, 1000).unwrap();
        let b = budget_check(&params, 100, 2000).unwrap();
        let c = budget_check(&params, 100, 4606).unwrap();
        assert!(a.delta_sum < b.delta_sum && b.delta_sum < c.delta_sum);
        assert!(a.retention_constant > b.retention_constant);
        assert!(b.retention_constant > c.retention_constant);
    }

    #[test]
    fn dimension_estimate_refinement_invariance() {
        // Scaling every level by +Δl while multiplying the counts by 2^Δl
        // leaves D_k = ln(ΠN_j)/(l_k·ln 2) fixed only in the continuum
        // identity; verify the discrete identity directly on the formula:
        // D computed from (levels, counts) equals D from (levels+Δ·k, counts·2^Δ)
        // when the count product absorbs exactly the level growth.
        let levels = [23u32, 43, 74];
        let delta_l = 6u32;
        let counts: Vec<BigUint> = levels
            .windows(2)
            .map(|w| (BigUint::one() << (w[1] - w[0]) as usize) / BigUint::from(3u32))
            .collect();
        let shifted_levels: Vec<u32> =
            levels.iter().enumerate().map(|(i, &l)| l + delta_l * i as u32).collect();
        let shifted_counts: Vec<BigUint> =
            counts.iter().map(|c| c << delta_l as usize).collect();
        let d = |lv: &[u32], ct: &[BigUint]| -> Vec<f64> {
            let mut ln_r = 0.0;
            ct.iter()
                .enumerate()
                .map(|(k, c)| {
                    ln_r += ln_biguint(c);
                    ln_r / (lv[k + 1] as f64 * std::f64::consts::LN_2)
                })
                .collect()
        };
        let base = d(&levels, &counts);
        let shifted = d(&shifted_levels, &shifted_counts);
        // the last D_k: numerator gains Σ Δl·ln2·k terms matching the level
        // growth Δl·k in the denominator scale only when counts track levels;
        // check the algebraic identity ln(N·2^Δ) = ln N + Δ·ln 2 exactly
        for (k, (b_k, s_k)) in base.iter().zip(&shifted).enumerate() {
            let lv = levels[k + 1] as f64;
            let sv = shifted_levels[k + 1] as f64;
            let num_b = b_k * lv;
            let num_s = s_k * sv;
            let added: f64 = (1..=k + 1).map(|_| delta_l as f64).sum();
            assert!(
                (num_s - num_b - added).abs() < 1e-9,
                "refinement identity fails at k = {k}"
            );
        }
    }

    #[test]
    fn good_children_threshold_formula() {
        // r = 9 requires ⌊2·9/3⌋ = 6 good children
        assert_eq!((2 * 9u64) / 3, 6);
        // generalized constant: retention r_c gives (2·r_c − 1)·r
        let r_c = ratio(5, 6);
        let general = (ratio(2, 1) * &r_c - BigRational::one()) * ratio(9, 1);
        assert_eq!(general, ratio(6, 1));
    }

    #[test]
    fn ln_biguint_accuracy() {
        let x = BigUint::from(349525u64);
        assert!((ln_biguint(&x) - (349525f64).ln()).abs() < 1e-12);
        let huge = BigUint::one() << 200usize;
        assert!((ln_biguint(&huge) - 200.0 * std::f64::consts::LN_2).abs() < 1e-9);
    }
}
