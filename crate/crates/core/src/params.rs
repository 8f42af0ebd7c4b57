//! The sieve's parameter system.
//!
//! Everything here is derived from the growth exponent `γ`:
//!
//! - `c = 60·ln(2 + 1/γ)` (natural logarithm throughout — the source writes
//!   `log` without a base, and only constants shift with the choice);
//! - removal widths `δ_n = 1/(c·n·ln n)`, strictly decreasing;
//! - the depth-gap function `h(n)`, in two flavors: the closed form
//!   `h(n) = n^{1+1/γ}·ln^{2/γ} n`, and the *effective* variant
//!   `h_eff(n) = min{m > n : t_m/t_n ≥ 1/δ_n}`. The closed form only
//!   guarantees the depth condition `t_m/t_n ≥ 1/δ_n` once `ln n ≳ c`,
//!   i.e. for `n` beyond e^55 at γ=2 — unreachable — so ladders meant to be
//!   *checked* are built in effective mode, where the depth condition holds
//!   at every desk-scale `n` by construction;
//! - dyadic levels `l_n` with `2^{l_n} ≤ 2·t_n/δ_n < 2^{l_n+1}`;
//! - ladders `n_0 < n_1 < ...` iterating `h`, and the series exponent
//!   `ω = ((1 + 1/γ + ε₂)·v − 1)(γ + 1)` governing the dimension count.
//!
//! Enclosure endpoints are consumed directionally: removal decisions take the
//! endpoint that can only enlarge the removed set (the upper end of `δ_n`),
//! witness verification the endpoint that can only shrink a claimed score.

use crate::dyadic::{ln_enclosure, ln_u64_enclosure, Dyadic, Enclosure};
use crate::sequence::{format_rational, GrowthSequence, SequenceError};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

/// Default working precision (bits) for parameter enclosures.
pub const DEFAULT_PRECISION: u32 = 96;
/// Precision ceiling for straddle-resolution retries.
const MAX_PRECISION: u32 = 384;

#[derive(Debug, Error)]
pub enum ParamsError {
    #[error("params: gamma must be positive")]
    GammaNotPositive,
    #[error("params: c must be positive")]
    CNotPositive,
    #[error("params: {op} requires n >= 2 (got {n})")]
    DomainTooSmall { op: &'static str, n: u64 },
    #[error("params: index cap {cap} exceeded while computing {op} from n = {n}")]
    IndexCap { op: &'static str, n: u64, cap: u64 },
    #[error("params: unresolvable enclosure straddle at precision {0} bits")]
    Precision(u32),
    #[error("params: v must lie in (0, 1)")]
    VOutOfRange,
    #[error("params: ladder too short for {op} (need >= {need} entries)")]
    LadderTooShort { op: &'static str, need: usize },
    #[error(transparent)]
    Sequence(#[from] SequenceError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CMode {
    Paper,
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HMode {
    Paper,
    Effective,
}

/// All tunables in one immutable value object.
#[derive(Clone, Debug)]
pub struct SieveParams {
    gamma: BigRational,
    c_mode: CMode,
    /// Custom c value (rational) when `c_mode == Custom`.
    c_custom: Option<BigRational>,
    h_mode: HMode,
    n_start: u64,
    eps2: BigRational,
    v: BigRational,
    index_cap: u64,
    precision: u32,
}

impl SieveParams {
    pub fn new(gamma: BigRational) -> Result<Self, ParamsError> {
        if !gamma.is_positive() {
            return Err(ParamsError::GammaNotPositive);
        }
        Ok(SieveParams {
            gamma,
            c_mode: CMode::Paper,
            c_custom: None,
            h_mode: HMode::Effective,
            n_start: 32,
            eps2: BigRational::new(BigInt::from(1), BigInt::from(100)),
            v: BigRational::new(BigInt::from(3), BigInt::from(5)),
            index_cap: 10_u64.pow(13),
            precision: DEFAULT_PRECISION,
        })
    }

    pub fn with_custom_c(mut self, c: BigRational) -> Result<Self, ParamsError> {
        if !c.is_positive() {
            return Err(ParamsError::CNotPositive);
        }
        self.c_mode = CMode::Custom;
        self.c_custom = Some(c);
        Ok(self)
    }

    pub fn with_h_mode(mut self, mode: HMode) -> Self {
        self.h_mode = mode;
        self
    }

    pub fn with_n_start(mut self, n_start: u64) -> Self {
        self.n_start = n_start;
        self
    }

    pub fn with_eps2(mut self, eps2: BigRational) -> Self {
        self.eps2 = eps2;
        self
    }

    pub fn with_v(mut self, v: BigRational) -> Result<Self, ParamsError> {
        if v <= BigRational::zero() || v >= BigRational::one() {
            return Err(ParamsError::VOutOfRange);
        }
        self.v = v;
        Ok(self)
    }

    pub fn with_index_cap(mut self, cap: u64) -> Self {
        self.index_cap = cap;
        self
    }

    pub fn with_precision(mut self, precision: u32) -> Self {
        self.precision = precision;
        self
    }

    pub fn gamma(&self) -> &BigRational {
        &self.gamma
    }

    pub fn c_mode(&self) -> CMode {
        self.c_mode
    }

    pub fn h_mode(&self) -> HMode {
        self.h_mode
    }

    pub fn n_start(&self) -> u64 {
        self.n_start
    }

    pub fn eps2(&self) -> &BigRational {
        &self.eps2
    }

    pub fn v(&self) -> &BigRational {
        &self.v
    }

    pub fn index_cap(&self) -> u64 {
        self.index_cap
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Enclosure of the constant `c` at the given precision.
    pub fn c_enclosure(&self, prec: u32) -> Enclosure {
        match (&self.c_mode, &self.c_custom) {
            (CMode::Custom, Some(c)) => Enclosure::from_rational(c, prec + 16),
            _ => c_of_gamma_prec(&self.gamma, prec),
        }
    }

    /// Enclosure of `1/c`.
    pub fn inv_c_enclosure(&self, prec: u32) -> Enclosure {
        self.c_enclosure(prec + 8).recip_scaled(prec + 8)
    }

    /// Enclosure of `δ_n = 1/(c·n·ln n)`, relative width ≤ 2^-64.
    ///
    /// Consumers take `hi` when deciding removals (the removed set can only
    /// grow past the true one) and compare witness distances against `hi` as
    /// well, so a passing comparison implies the true inequality.
    pub fn delta(&self, n: u64) -> Result<Enclosure, ParamsError> {
        if n < 2 {
            return Err(ParamsError::DomainTooSmall { op: "delta", n });
        }
        let mut prec = self.precision.max(80);
        loop {
            let d = self.delta_at(n, prec);
            if d.rel_width_within(64) {
                return Ok(d);
            }
            prec *= 2;
            if prec > MAX_PRECISION {
                return Err(ParamsError::Precision(prec));
            }
        }
    }

    fn delta_at(&self, n: u64, prec: u32) -> Enclosure {
        let ln_n = ln_u64_enclosure(n, prec);
        let c = self.c_enclosure(prec);
        delta_given(&c, n, &ln_n, prec)
    }

    /// Enclosure of `n·ln n` (the score multiplier in certificates).
    pub fn n_ln_n(&self, n: u64) -> Result<Enclosure, ParamsError> {
        if n < 2 {
            return Err(ParamsError::DomainTooSmall { op: "n_ln_n", n });
        }
        let prec = self.precision.max(80);
        let ln_n = ln_u64_enclosure(n, prec);
        Ok(ln_n.mul(&Enclosure::point(Dyadic::from_u64(n))))
    }

    /// Closed-form gap `h(n) = ceil(n^{1+1/γ}·ln^{2/γ} n)`, forced ≥ n+1.
    pub fn h_paper(&self, n: u64) -> Result<u64, ParamsError> {
        if n < 2 {
            return Err(ParamsError::DomainTooSmall { op: "h_paper", n });
        }
        let p = self.gamma.numer().to_u64().expect("gamma numerator fits u64");
        let q = self.gamma.denom().to_u64().expect("gamma denominator fits u64");
        // n^{1+1/γ} = n^{(p+q)/p}, ln^{2/γ} n = (ln n)^{2q/p}
        let mut prec = self.precision.max(80);
        loop {
            let n_enc = Enclosure::point(Dyadic::from_u64(n));
            let a = n_enc.pow_ratio(p + q, p as u32, prec);
            let ln_n = ln_u64_enclosure(n, prec);
            let b = ln_n.pow_ratio(2 * q, p as u32, prec);
            let v = a.mul_scaled(&b, prec);
            if let Some(ceil) = v.ceil_unique() {
                let m = ceil.to_u64().ok_or(ParamsError::IndexCap {
                    op: "h_paper",
                    n,
                    cap: self.index_cap,
                })?;
                let m = m.max(n + 1);
                if m > self.index_cap {
                    return Err(ParamsError::IndexCap { op: "h_paper", n, cap: self.index_cap });
                }
                return Ok(m);
            }
            prec *= 2;
            if prec > MAX_PRECISION {
                return Err(ParamsError::Precision(prec));
            }
        }
    }

    /// Effective gap: smallest `m > n` with `t_m/t_n ≥ 1/δ_n`, by
    /// exponential-then-binary search on the exact condition.
    pub fn h_effective(&self, seq: &GrowthSequence, n: u64) -> Result<u64, ParamsError> {
        if n < 2.max(seq.n_min()) {
            return Err(ParamsError::DomainTooSmall { op: "h_effective", n });
        }
        let prec = self.precision.max(80);
        // threshold = upper bound of t_n / δ_n = t_n * (1/δ_n)_hi
        let delta = self.delta(n)?;
        let tn = seq.eval(n, prec)?;
        let meets = |m: u64| -> Result<bool, ParamsError> {
            let tm = seq.eval(m, prec)?;
            // t_m ≥ t_n / δ: compare t_m * δ_lo ≥ t_n conservatively fails only
            // when within the enclosure width; use the directed form
            // t_m * δ_hi' with δ'= lower endpoint? The proof-safe direction is
            // t_m/t_n ≥ (1/δ_n)_hi, i.e. t_m * δ_lo ≥ t_n.
            let lhs = tm.lo_ratio() * delta.lo().to_ratio();
            Ok(lhs >= tn.hi_ratio())
        };
        let mut hi = n + 1;
        while !meets(hi)? {
            let next = hi.saturating_mul(2).min(self.index_cap);
            if next == hi {
                return Err(ParamsError::IndexCap { op: "h_effective", n, cap: self.index_cap });
            }
            hi = next;
            if hi == self.index_cap && !meets(hi)? {
                return Err(ParamsError::IndexCap { op: "h_effective", n, cap: self.index_cap });
            }
        }
        let mut lo = n + 1; // invariant: everything below lo fails
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if meets(mid)? {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Ok(lo)
    }

    /// Gap function under the active mode.
    pub fn h(&self, seq: &GrowthSequence, n: u64) -> Result<u64, ParamsError> {
        match self.h_mode {
            HMode::Paper => self.h_paper(n),
            HMode::Effective => self.h_effective(seq, n),
        }
    }

    /// Dyadic level `l_n = floor(log2(2·t_n/δ_n))`.
    pub fn dyadic_level(&self, seq: &GrowthSequence, n: u64) -> Result<u32, ParamsError> {
        if n < 2 {
            return Err(ParamsError::DomainTooSmall { op: "dyadic_level", n });
        }
        let mut prec = self.precision.max(80);
        loop {
            // 2 t_n / δ_n = 2 t_n * c * n * ln n
            let ln_n = ln_u64_enclosure(n, prec);
            let c = self.c_enclosure(prec);
            let t = seq.eval(n, prec)?.enclosure(prec);
            if let Some(l) = level_given(&c, &t, n, &ln_n, prec) {
                debug_assert!(l >= 0, "dyadic level must be nonnegative");
                return Ok(l as u32);
            }
            prec *= 2;
            if prec > MAX_PRECISION {
                return Err(ParamsError::Precision(prec));
            }
        }
    }

    /// Iterate the gap function `depth` times starting from `n0`.
    pub fn build_ladder(
        &self,
        seq: &GrowthSequence,
        n0: u64,
        depth: u32,
    ) -> Result<Ladder, ParamsError> {
        if n0 < 2.max(seq.n_min()) {
            return Err(ParamsError::DomainTooSmall { op: "build_ladder", n: n0 });
        }
        let mut entries = vec![n0];
        for _ in 0..depth {
            let last = *entries.last().expect("nonempty");
            let next = self.h(seq, last)?;
            debug_assert!(next > last);
            entries.push(next);
        }
        Ok(Ladder { entries, mode: self.h_mode })
    }

    /// Per-step inequality report for a ladder.
    pub fn check_ladder(
        &self,
        seq: &GrowthSequence,
        ladder: &Ladder,
    ) -> Result<LadderReport, ParamsError> {
        let prec = self.precision.max(80);
        let mut steps = Vec::new();
        let mut all_eq7 = true;
        let mut all_eq6 = true;
        for w in ladder.entries.windows(2) {
            let (a, b) = (w[0], w[1]);
            // depth-condition check: t_b/t_a >= 1/δ_a (directed as in h_effective)
            let delta = self.delta(a)?;
            let ta = seq.eval(a, prec)?;
            let tb = seq.eval(b, prec)?;
            let depth_ok = tb.lo_ratio() * delta.lo().to_ratio() >= ta.hi_ratio();
            // growth-window check: a^{1+1/γ} ≤ b ≤ a^{1+1/γ+ε₂}, exact via
            // cross-powers with rational exponents.
            let lower_ok = rational_pow_le(a, &(BigRational::one() + self.gamma.recip()), b);
            let upper_exp = BigRational::one() + self.gamma.recip() + &self.eps2;
            let upper_ok = rational_pow_ge(a, &upper_exp, b);
            let log_ratio = (b as f64).ln() / (a as f64).ln();
            all_eq7 &= lower_ok && upper_ok;
            all_eq6 &= depth_ok;
            steps.push(LadderStep {
                n_prev: a,
                n_next: b,
                window_lower_ok: lower_ok,
                window_upper_ok: upper_ok,
                depth_ok,
                log_ratio,
            });
        }
        Ok(LadderReport {
            mode: ladder.mode,
            eps2: format_rational(&self.eps2),
            steps,
            window_pass: all_eq7,
            depth_pass: all_eq6,
        })
    }

    /// Series exponent `ω = ((1 + 1/γ + ε₂)·v − 1)·(γ + 1)`, exactly.
    pub fn omega(&self, v: &BigRational, eps2: &BigRational) -> BigRational {
        let inner = (BigRational::one() + self.gamma.recip() + eps2) * v - BigRational::one();
        inner * (&self.gamma + BigRational::one())
    }

    /// Terms of the comparison series along a ladder, with trend verdict.
    pub fn series_report(
        &self,
        seq: &GrowthSequence,
        ladder: &Ladder,
        v: &BigRational,
    ) -> Result<SeriesReport, ParamsError> {
        if v <= &BigRational::zero() || v >= &BigRational::one() {
            return Err(ParamsError::VOutOfRange);
        }
        if ladder.entries.len() < 3 {
            return Err(ParamsError::LadderTooShort { op: "series_report", need: 3 });
        }
        let prec = self.precision.max(80);
        let omega = self.omega(v, &self.eps2);
        let vp = v.numer().to_u64().expect("v numerator fits u64");
        let vq = v.denom().to_u32().expect("v denominator fits u32");
        let mut terms = Vec::new();
        for k in 2..ladder.entries.len() {
            let nk = ladder.entries[k];
            let nk1 = ladder.entries[k - 1];
            // 3^k * t_{n_k}^v / t_{n_{k-1}} * δ_{n_{k-1}} / δ_{n_k}^v
            let t_k = seq.eval(nk, prec)?.enclosure(prec).pow_ratio_rel(vp, vq, prec);
            let t_k1 = seq.eval(nk1, prec)?.enclosure(prec);
            let d_k = self.delta(nk)?.pow_ratio_rel(vp, vq, prec);
            let d_k1 = self.delta(nk1)?;
            let three_k = Enclosure::point(Dyadic::from_bigint(num_traits::Pow::pow(
                &BigInt::from(3),
                k as u32,
            )));
            let term = three_k
                .mul_scaled(&t_k, prec)
                .div_scaled(&t_k1, prec)
                .mul_scaled(&d_k1, prec)
                .div_scaled(&d_k, prec);
            terms.push(term.to_f64());
        }
        // "Convergent trend": ω < 0 and the tail of the term list decreases.
        let decreasing_tail = terms.windows(2).rev().take(2).all(|w| w[1] < w[0]);
        let verdict = if omega.is_negative() && decreasing_tail {
            "convergent-trend"
        } else if !omega.is_negative() {
            "omega-nonnegative"
        } else {
            "no-trend"
        };
        Ok(SeriesReport {
            omega_exact: format_rational(&omega),
            omega: omega.to_f64().unwrap_or(f64::NAN),
            v: format_rational(v),
            eps2: format_rational(&self.eps2),
            terms,
            verdict: verdict.to_string(),
        })
    }
}

/// `δ_n` from precomputed enclosures of `c` and `ln n` — the hot-loop form.
/// Must mirror `delta_at` operation for operation so both paths agree bit
/// for bit at equal precision.
pub(crate) fn delta_given(c: &Enclosure, n: u64, ln_n: &Enclosure, prec: u32) -> Enclosure {
    let n_enc = Enclosure::point(Dyadic::from_u64(n));
    let den = c.mul_scaled(&n_enc, prec).mul_scaled(&ln_n, prec);
    den.recip_scaled(prec)
}

/// `floor(log2(2·t_n/δ_n))` from precomputed enclosures; `None` on straddle.
pub(crate) fn level_given(
    c: &Enclosure,
    t: &Enclosure,
    n: u64,
    ln_n: &Enclosure,
    prec: u32,
) -> Option<i64> {
    let n_enc = Enclosure::point(Dyadic::from_u64(n));
    let val = t
        .mul_scaled(c, prec)
        .mul_scaled(&n_enc, prec)
        .mul_scaled(ln_n, prec);
    val.floor_log2().map(|l| l + 1)
}

/// `c = 60·ln(2 + 1/γ)` at default precision.
pub fn c_of_gamma(gamma: &BigRational) -> Result<Enclosure, ParamsError> {
    if !gamma.is_positive() {
        return Err(ParamsError::GammaNotPositive);
    }
    Ok(c_of_gamma_prec(gamma, DEFAULT_PRECISION))
}

fn c_of_gamma_prec(gamma: &BigRational, prec: u32) -> Enclosure {
    let arg = BigRational::from(BigInt::from(2)) + gamma.recip();
    let ln = ln_enclosure(&arg, prec + 8);
    ln.mul(&Enclosure::point(Dyadic::from_u64(60)))
}

/// Exact test `a^e <= b` for rational exponent `e = p/q > 0`: `a^p <= b^q`.
fn rational_pow_le(a: u64, e: &BigRational, b: u64) -> bool {
    let p = e.numer().to_u64().expect("exponent numerator fits u64");
    let q = e.denom().to_u64().expect("exponent denominator fits u64");
    let lhs = num_traits::Pow::pow(&BigInt::from(a), p);
    let rhs = num_traits::Pow::pow(&BigInt::from(b), q);
    lhs <= rhs
}

/// Exact test `a^e >= b` for rational exponent `e = p/q > 0`.
fn rational_pow_ge(a: u64, e: &BigRational, b: u64) -> bool {
    let p = e.numer().to_u64().expect("exponent numerator fits u64");
    let q = e.denom().to_u64().expect("exponent denominator fits u64");
    let lhs = num_traits::Pow::pow(&BigInt::from(a), p);
    let rhs = num_traits::Pow::pow(&BigInt::from(b), q);
    lhs >= rhs
}

/// A chain `n_0 < n_1 < ... < n_K` of gap iterates.
#[derive(Clone, Debug)]
pub struct Ladder {
    pub entries: Vec<u64>,
    pub mode: HMode,
}

impl Ladder {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LadderStep {
    pub n_prev: u64,
    pub n_next: u64,
    /// `n_prev^{1+1/γ} ≤ n_next`
    pub window_lower_ok: bool,
    /// `n_next ≤ n_prev^{1+1/γ+ε₂}`
    pub window_upper_ok: bool,
    /// `t_{n_next}/t_{n_prev} ≥ 1/δ_{n_prev}`
    pub depth_ok: bool,
    pub log_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LadderReport {
    pub mode: HMode,
    pub eps2: String,
    pub steps: Vec<LadderStep>,
    pub window_pass: bool,
    pub depth_pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesReport {
    pub omega_exact: String,
    pub omega: f64,
    pub v: String,
    pub eps2: String,
    pub terms: Vec<f64>,
    pub verdict: String,
}
