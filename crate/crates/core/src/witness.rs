//! Witness extraction and independent certification.
//!
//! A witness is the midpoint of a surviving cell: `α = (2b+1)/2^{L+1}` for
//! the final cell `[b/2^L, (b+1)/2^L)`. The midpoint never lies on a dyadic
//! boundary of any level ≤ L, so it sits in the *interior* of every cell of
//! its nested chain, and the sieve's marking convention then guarantees
//! `‖α·t_n‖ > δ_n^{hi}` strictly for every sieved stage.
//!
//! [`certify`] re-derives that inequality from scratch: it shares no survivor
//! data with the sieve, evaluating `‖α·t_n‖` with exact rational arithmetic
//! for every `n` in the range and cross-checking against the same `δ_n`
//! enclosures. The certificate's per-`n` scores are exact lower bounds on
//! `n·ln n·‖α·t_n‖`, using the lower endpoint of the `n·ln n` enclosure so a
//! reported score can only understate the truth.

use crate::dyadic::{Dyadic, Enclosure, Round};
use crate::params::{ParamsError, SieveParams};
use crate::sequence::{ExactValue, GrowthSequence, SequenceError};
use crate::sieve::{DyadicCell, SieveError, SurvivorState, ZoomStrategy};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WitnessError {
    #[error("witness: survivor set is empty")]
    EmptySurvivors,
    #[error("witness: certify requires n_from >= 2 (got {0})")]
    RangeTooSmall(u64),
    #[error("witness: alpha numerator {num} exceeds 2^{level}")]
    AlphaOutOfRange { num: String, level: u32 },
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Sieve(#[from] SieveError),
}

/// A dyadic rational `num / 2^level` in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicRational {
    num: BigUint,
    level: u32,
}

impl DyadicRational {
    pub fn new(num: BigUint, level: u32) -> Result<Self, WitnessError> {
        if num > (BigUint::one() << level as usize) {
            return Err(WitnessError::AlphaOutOfRange { num: num.to_string(), level });
        }
        Ok(DyadicRational { num, level })
    }

    pub fn num(&self) -> &BigUint {
        &self.num
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn to_ratio(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.num.clone()),
            BigInt::one() << self.level as usize,
        )
    }

    pub fn to_f64(&self) -> f64 {
        self.to_ratio().to_f64().unwrap_or(f64::NAN)
    }

    /// Midpoint of a cell, expressed one level deeper.
    pub fn cell_midpoint(cell: &DyadicCell) -> Self {
        DyadicRational {
            num: BigUint::from(2 * cell.index + 1),
            level: cell.level + 1,
        }
    }
}

/// `‖α·t‖`: distance from `α·t` to the nearest integer, in `[0, 1/2]`.
/// Exact when `t` is a point rational.
pub fn fractional_distance(alpha: &DyadicRational, t: &ExactValue) -> ExactValue {
    match t {
        ExactValue::Exact(t) => ExactValue::Exact(distance_exact(&(alpha.to_ratio() * t))),
        ExactValue::Interval(enc) => {
            let a = alpha.to_ratio();
            let x_lo = &a * enc.lo().to_ratio();
            let x_hi = &a * enc.hi().to_ratio();
            let f_lo = x_lo.floor();
            let f_hi = x_hi.floor();
            if f_lo == f_hi {
                // same unit interval: distance is a tent function, min at the
                // endpoints closest to an integer, max possibly 1/2
                let d_lo = distance_exact(&x_lo);
                let d_hi = distance_exact(&x_hi);
                let (mut dmin, mut dmax) = if d_lo <= d_hi {
                    (d_lo.clone(), d_hi.clone())
                } else {
                    (d_hi.clone(), d_lo.clone())
                };
                let half = BigRational::new(BigInt::one(), BigInt::from(2));
                let mid = &f_lo + &half;
                if x_lo <= mid && mid <= x_hi {
                    dmax = half;
                }
                if x_lo <= f_lo.clone() + BigRational::one()
                    && f_lo.clone() + BigRational::one() <= x_hi
                {
                    dmin = BigRational::zero();
                }
                interval_from_ratios(&dmin, &dmax)
            } else {
                // spans an integer: distance can be anything in [0, 1/2]
                interval_from_ratios(
                    &BigRational::zero(),
                    &BigRational::new(BigInt::one(), BigInt::from(2)),
                )
            }
        }
    }
}

fn interval_from_ratios(lo: &BigRational, hi: &BigRational) -> ExactValue {
    let scale = 128;
    ExactValue::Interval(Enclosure::new(
        Dyadic::from_ratio(lo, scale, Round::Down),
        Dyadic::from_ratio(hi, scale, Round::Up),
    ))
}

fn distance_exact(x: &BigRational) -> BigRational {
    let frac = x - x.floor();
    let complement = BigRational::one() - &frac;
    if frac <= complement {
        frac
    } else {
        complement
    }
}

/// Extract `α` as the midpoint of a surviving cell chosen by `strategy`,
/// together with its full nested cell chain (zoom path + final cell).
pub fn extract_witness(
    state: &SurvivorState,
    strategy: ZoomStrategy,
    rng: &mut ChaCha8Rng,
) -> Result<(DyadicRational, Vec<DyadicCell>), WitnessError> {
    let cell = state
        .select_survivor(strategy, rng)
        .ok_or(WitnessError::EmptySurvivors)?;
    let mut chain = state.zoom_path().to_vec();
    chain.push(cell);
    Ok((DyadicRational::cell_midpoint(&cell), chain))
}

/// One certified score row: `score = n·ln n·‖α·t_n‖`, reported as an exact
/// lower bound.
#[derive(Clone, Debug)]
pub struct ScoreRow {
    pub n: u64,
    /// Exact lower bound on the score (dyadic rational).
    pub score_lower: BigRational,
    /// `‖α·t_n‖ > δ_n^{hi}` held strictly.
    pub clears_delta: bool,
}

/// The finite-range witness certificate.
#[derive(Clone, Debug)]
pub struct WitnessCertificate {
    pub alpha: DyadicRational,
    pub n_from: u64,
    pub n_to: u64,
    pub scores: Vec<ScoreRow>,
    pub min_score: BigRational,
    pub argmin_n: u64,
    /// Enclosure of the target `1/c`.
    pub target: Enclosure,
    pub verdict: bool,
}

/// Verify `n·ln n·‖α·t_n‖ > 1/c` over `[n_from, n_to]` with exact
/// arithmetic. Independent of any sieve state.
pub fn certify(
    alpha: &DyadicRational,
    seq: &GrowthSequence,
    params: &SieveParams,
    n_from: u64,
    n_to: u64,
) -> Result<WitnessCertificate, WitnessError> {
    if n_from < 2 {
        return Err(WitnessError::RangeTooSmall(n_from));
    }
    let ns: Vec<u64> = (n_from.max(seq.n_min())..=n_to).collect();
    let rows: Result<Vec<ScoreRow>, WitnessError> = ns
        .par_iter()
        .map(|&n| score_row(alpha, seq, params, n))
        .collect();
    let rows = rows?;
    let mut min_score = BigRational::one() * BigRational::from(BigInt::from(u64::MAX));
    let mut argmin_n = n_from;
    let mut verdict = !rows.is_empty();
    for row in &rows {
        if row.score_lower < min_score {
            min_score = row.score_lower.clone();
            argmin_n = row.n;
        }
        verdict &= row.clears_delta;
    }
    let target = params.inv_c_enclosure(params.precision().max(80));
    Ok(WitnessCertificate {
        alpha: alpha.clone(),
        n_from,
        n_to,
        scores: rows,
        min_score,
        argmin_n,
        target,
        verdict,
    })
}

fn score_row(
    alpha: &DyadicRational,
    seq: &GrowthSequence,
    params: &SieveParams,
    n: u64,
) -> Result<ScoreRow, WitnessError> {
    let prec = params.precision().max(80);
    let t = seq.eval(n, prec)?;
    let dist = fractional_distance(alpha, &t);
    let delta = params.delta(n)?;
    // strict comparison against the upper δ endpoint: exact cross-multiplication
    let clears = dist.lo_ratio() > delta.hi().to_ratio();
    let n_ln_n = params.n_ln_n(n)?;
    let dist_lo = Dyadic::from_ratio(&dist.lo_ratio(), prec + 32, Round::Down);
    let score_lower = dist_lo.mul(n_ln_n.lo()).round_to_scale(prec + 32, Round::Down);
    Ok(ScoreRow {
        n,
        score_lower: score_lower.to_ratio(),
        clears_delta: clears,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sieve::{sieve_range, DEFAULT_RUN_BUDGET};
    use num_traits::Signed;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn dy(num: u64, level: u32) -> DyadicRational {
        DyadicRational::new(BigUint::from(num), level).unwrap()
    }

    fn square_seq() -> GrowthSequence {
        GrowthSequence::polynomial(
            vec![BigRational::one(), BigRational::zero(), BigRational::zero()],
            2,
        )
        .unwrap()
    }

    #[test]
    fn fractional_distance_examples() {
        // α = 1/2, t = 4: ‖2‖ = 0
        let d = fractional_distance(&dy(1, 1), &ExactValue::Exact(ratio(4, 1)));
        assert_eq!(d.as_exact().unwrap(), &ratio(0, 1));
        // α = 1/4, t = 2: ‖1/2‖ = 1/2 (maximum)
        let d = fractional_distance(&dy(1, 2), &ExactValue::Exact(ratio(2, 1)));
        assert_eq!(d.as_exact().unwrap(), &ratio(1, 2));
        // α = 3/8, t = 3: ‖9/8‖ = 1/8
        let d = fractional_distance(&dy(3, 3), &ExactValue::Exact(ratio(3, 1)));
        assert_eq!(d.as_exact().unwrap(), &ratio(1, 8));
    }

    #[test]
    fn midpoint_formula() {
        let cell = DyadicCell::new(10, 513);
        let alpha = DyadicRational::cell_midpoint(&cell);
        assert_eq!(alpha.num(), &BigUint::from(1027u32));
        assert_eq!(alpha.level(), 11);
        assert_eq!(alpha.to_ratio(), ratio(1027, 2048));
    }

    #[test]
    fn alpha_range_check() {
        assert!(DyadicRational::new(BigUint::from(5u32), 2).is_err());
        assert!(DyadicRational::new(BigUint::from(4u32), 2).is_ok());
    }

    #[test]
    fn certify_small_denominator_fails() {
        // α = 1/2 has ‖α·4‖ = 0 at n = 2: min score 0 at the argmin, verdict false
        let seq = square_seq();
        let params = SieveParams::new(ratio(2, 1)).unwrap();
        let cert = certify(&dy(1, 1), &seq, &params, 2, 100).unwrap();
        assert!(!cert.verdict);
        assert_eq!(cert.argmin_n, 2);
        assert!(cert.min_score.is_zero());
        // α = 0: all scores zero
        let cert0 = certify(&dy(0, 1), &seq, &params, 2, 50).unwrap();
        assert!(!cert0.verdict);
        assert!(cert0.min_score.is_zero());
    }

    #[test]
    fn scores_cover_range_without_gaps() {
        let seq = square_seq();
        let params = SieveParams::new(ratio(2, 1)).unwrap();
        let cert = certify(&dy(1, 1), &seq, &params, 5, 40).unwrap();
        let ns: Vec<u64> = cert.scores.iter().map(|r| r.n).collect();
        assert_eq!(ns, (5..=40).collect::<Vec<_>>());
    }

    #[test]
    fn sieve_certificate_agreement_small() {
        // The central soundness property at toy scale: any witness extracted
        // from a survivor state passes certify over the same range.
        let seq = square_seq();
        let params = SieveParams::new(ratio(2, 1))
            .unwrap()
            .with_custom_c(ratio(45, 100))
            .unwrap()
            .with_n_start(8);
        let state = sieve_range(&seq, &params, DyadicCell::unit(), 8, 64, DEFAULT_RUN_BUDGET)
            .unwrap();
        for (strategy, seed) in [
            (ZoomStrategy::Leftmost, 0u64),
            (ZoomStrategy::MaxRun, 0),
            (ZoomStrategy::SeededRandom, 1),
            (ZoomStrategy::SeededRandom, 42),
        ] {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (alpha, chain) = extract_witness(&state, strategy, &mut rng).unwrap();
            // the witness lies strictly inside every cell of its chain
            let a = alpha.to_ratio();
            for cell in &chain {
                assert!(cell.lower_bound() < a && a < cell.upper_bound());
            }
            let cert = certify(&alpha, &seq, &params, 8, 64).unwrap();
            assert!(cert.verdict, "witness failed certification ({strategy:?})");
            // every per-n distance clears δ_n strictly, so min_score > 0
            assert!(cert.min_score.is_positive());
        }
    }

    #[test]
    fn extraction_reproducible() {
        let seq = square_seq();
        let params = SieveParams::new(ratio(2, 1))
            .unwrap()
            .with_custom_c(ratio(45, 100))
            .unwrap()
            .with_n_start(8);
        let state =
            sieve_range(&seq, &params, DyadicCell::unit(), 8, 30, DEFAULT_RUN_BUDGET).unwrap();
        let mut r1 = ChaCha8Rng::seed_from_u64(3);
        let mut r2 = ChaCha8Rng::seed_from_u64(3);
        let (a1, _) = extract_witness(&state, ZoomStrategy::SeededRandom, &mut r1).unwrap();
        let (a2, _) = extract_witness(&state, ZoomStrategy::SeededRandom, &mut r2).unwrap();
        assert_eq!(a1, a2);
    }

    #[test]
    fn interval_distance_is_sound() {
        // generic-power sequence: distances come back as enclosures containing
        // the float approximation
        let seq =
            GrowthSequence::generic_power(ratio(3, 2), BigRational::one(), 2).unwrap();
        let params = SieveParams::new(ratio(3, 2)).unwrap();
        let alpha = dy(29, 6); // 29/64
        for n in [2u64, 3, 5, 9] {
            let t = seq.eval(n, 96).unwrap();
            let d = fractional_distance(&alpha, &t);
            let x = 29.0 / 64.0 * (n as f64).powf(1.5);
            let truth = (x - x.round()).abs();
            assert!(
                d.lo_ratio().to_f64().unwrap() <= truth + 1e-9
                    && truth - 1e-9 <= d.hi_ratio().to_f64().unwrap(),
                "interval distance misses truth at n = {n}"
            );
        }
        let _ = params;
    }

    proptest! {
        #[test]
        fn distance_symmetry(num in 0u64..1024, t in 1u64..500) {
            // ‖α·t‖ = ‖(1−α)·t‖ for integer t
            let alpha = dy(num, 10);
            let mirror = dy(1024 - num, 10);
            let tv = ExactValue::Exact(ratio(t as i64, 1));
            let d1 = fractional_distance(&alpha, &tv);
            let d2 = fractional_distance(&mirror, &tv);
            prop_assert_eq!(d1.as_exact().unwrap(), d2.as_exact().unwrap());
        }

        #[test]
        fn distance_in_unit_range(num in 0u64..4096, tn in 1i64..1000, td in 1i64..50) {
            let alpha = dy(num, 12);
            let tv = ExactValue::Exact(ratio(tn, td));
            let d = fractional_distance(&alpha, &tv);
            let v = d.as_exact().unwrap();
            prop_assert!(v >= &BigRational::zero());
            prop_assert!(v <= &ratio(1, 2));
        }
    }
}
