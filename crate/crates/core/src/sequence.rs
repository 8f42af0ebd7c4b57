//! Growth sequences `t_n` driving the sieve.
//!
//! Two kinds are supported. `Polynomial` sequences have exact rational
//! coefficients, so every `t_n` is a point rational and all downstream
//! membership decisions are exact; the growth exponent `γ` equals the degree.
//! `GenericPower` sequences are `t_n = n^γ` for a positive rational `γ`,
//! evaluated as certified enclosures of requested width.
//!
//! Monotonicity and `t_{n_min} ≥ 1` are scanned eagerly on a 1000-index
//! prefix at construction; consumers that walk `n` upward re-check
//! consecutive pairs as they go, so a pathological tail cannot slip through.

use crate::dyadic::{Dyadic, Enclosure};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

const EAGER_SCAN: u64 = 1000;

#[derive(Debug, Error)]
pub enum SequenceError {
    #[error("sequence: polynomial must have degree >= 1 (got degree {0})")]
    DegreeTooSmall(usize),
    #[error("sequence: leading coefficient must be positive")]
    LeadingCoefficient,
    #[error("sequence: n_min must be >= 2 (got {0})")]
    NMinTooSmall(u64),
    #[error("sequence: t({n}) = {value} < 1 violates t >= 1")]
    BelowOne { n: u64, value: String },
    #[error("sequence: t({n}) <= t({prev}) violates monotonicity")]
    NotIncreasing { prev: u64, n: u64 },
    #[error("sequence: gamma must be positive")]
    GammaNotPositive,
    #[error("sequence: n = {n} below n_min = {n_min}")]
    BelowDomain { n: u64, n_min: u64 },
    #[error("sequence: cannot parse spec string `{0}`")]
    Parse(String),
}

/// An exact value: a point rational, or a certified enclosure.
#[derive(Clone, Debug)]
pub enum ExactValue {
    Exact(BigRational),
    Interval(Enclosure),
}

impl ExactValue {
    pub fn lo_ratio(&self) -> BigRational {
        match self {
            ExactValue::Exact(r) => r.clone(),
            ExactValue::Interval(e) => e.lo().to_ratio(),
        }
    }

    pub fn hi_ratio(&self) -> BigRational {
        match self {
            ExactValue::Exact(r) => r.clone(),
            ExactValue::Interval(e) => e.hi().to_ratio(),
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            ExactValue::Exact(r) => Some(r),
            ExactValue::Interval(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExactValue::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            ExactValue::Interval(e) => e.to_f64(),
        }
    }

    /// Enclosure view (zero-width for exact values), at the given scale.
    pub fn enclosure(&self, scale: u32) -> Enclosure {
        match self {
            ExactValue::Exact(r) => Enclosure::from_rational(r, scale),
            ExactValue::Interval(e) => e.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SequenceKind {
    Polynomial,
    GenericPower,
}

/// The sequence `t_n`.
#[derive(Clone, Debug)]
pub struct GrowthSequence {
    kind: SequenceKind,
    /// Polynomial coefficients, highest degree first (polynomial kind).
    coeffs: Vec<BigRational>,
    /// Growth exponent: the degree for polynomials, the exponent for powers.
    gamma: BigRational,
    /// Error exponent in the growth condition; fixed at 1 for polynomials.
    eps1: BigRational,
    n_min: u64,
}

impl GrowthSequence {
    /// Polynomial `t_n = c_d n^d + ... + c_0`, coefficients highest-first.
    pub fn polynomial(coeffs: Vec<BigRational>, n_min: u64) -> Result<Self, SequenceError> {
        if coeffs.len() < 2 {
            return Err(SequenceError::DegreeTooSmall(coeffs.len().saturating_sub(1)));
        }
        if !coeffs[0].is_positive() {
            return Err(SequenceError::LeadingCoefficient);
        }
        if n_min < 2 {
            return Err(SequenceError::NMinTooSmall(n_min));
        }
        let degree = coeffs.len() as u64 - 1;
        let seq = GrowthSequence {
            kind: SequenceKind::Polynomial,
            coeffs,
            gamma: BigRational::from(BigInt::from(degree)),
            eps1: BigRational::one(),
            n_min,
        };
        seq.scan_prefix()?;
        Ok(seq)
    }

    /// `t_n = n^gamma` for positive rational `gamma`.
    pub fn generic_power(
        gamma: BigRational,
        eps1: BigRational,
        n_min: u64,
    ) -> Result<Self, SequenceError> {
        if !gamma.is_positive() {
            return Err(SequenceError::GammaNotPositive);
        }
        if n_min < 2 {
            return Err(SequenceError::NMinTooSmall(n_min));
        }
        Ok(GrowthSequence {
            kind: SequenceKind::GenericPower,
            coeffs: Vec::new(),
            gamma,
            eps1,
            n_min,
        })
    }

    /// Parse `poly:c_d,...,c_0` or `power:gamma=<r>,eps1=<r>` (rationals as `p/q`).
    pub fn parse(spec: &str) -> Result<Self, SequenceError> {
        Self::parse_with_n_min(spec, 2)
    }

    pub fn parse_with_n_min(spec: &str, n_min: u64) -> Result<Self, SequenceError> {
        if let Some(rest) = spec.strip_prefix("poly:") {
            let coeffs: Result<Vec<_>, _> = rest
                .split(',')
                .map(|s| parse_rational(s.trim()).ok_or_else(|| SequenceError::Parse(spec.into())))
                .collect();
            return GrowthSequence::polynomial(coeffs?, n_min);
        }
        if let Some(rest) = spec.strip_prefix("power:") {
            let mut gamma = None;
            let mut eps1 = None;
            for part in rest.split(',') {
                let (k, v) = part
                    .split_once('=')
                    .ok_or_else(|| SequenceError::Parse(spec.into()))?;
                match k.trim() {
                    "gamma" => gamma = parse_rational(v.trim()),
                    "eps1" => eps1 = parse_rational(v.trim()),
                    _ => return Err(SequenceError::Parse(spec.into())),
                }
            }
            let gamma = gamma.ok_or_else(|| SequenceError::Parse(spec.into()))?;
            let eps1 = eps1.unwrap_or_else(BigRational::one);
            return GrowthSequence::generic_power(gamma, eps1, n_min);
        }
        Err(SequenceError::Parse(spec.into()))
    }

    pub fn kind(&self) -> SequenceKind {
        self.kind
    }

    pub fn gamma(&self) -> &BigRational {
        &self.gamma
    }

    pub fn eps1(&self) -> &BigRational {
        &self.eps1
    }

    pub fn n_min(&self) -> u64 {
        self.n_min
    }

    pub fn spec_string(&self) -> String {
        match self.kind {
            SequenceKind::Polynomial => {
                let parts: Vec<String> = self.coeffs.iter().map(format_rational).collect();
                format!("poly:{}", parts.join(","))
            }
            SequenceKind::GenericPower => format!(
                "power:gamma={},eps1={}",
                format_rational(&self.gamma),
                format_rational(&self.eps1)
            ),
        }
    }

    fn scan_prefix(&self) -> Result<(), SequenceError> {
        let first = self.eval_rational_unchecked(self.n_min);
        if first < BigRational::one() {
            return Err(SequenceError::BelowOne {
                n: self.n_min,
                value: first.to_string(),
            });
        }
        let mut prev = first;
        for n in self.n_min + 1..=self.n_min + EAGER_SCAN {
            let cur = self.eval_rational_unchecked(n);
            if cur <= prev {
                return Err(SequenceError::NotIncreasing { prev: n - 1, n });
            }
            prev = cur;
        }
        Ok(())
    }

    fn eval_rational_unchecked(&self, n: u64) -> BigRational {
        let x = BigRational::from(BigInt::from(n));
        let mut acc = BigRational::zero();
        for c in &self.coeffs {
            acc = acc * &x + c;
        }
        acc
    }

    /// Exact rational value; `None` for the generic-power kind.
    pub fn eval_rational(&self, n: u64) -> Result<Option<BigRational>, SequenceError> {
        if n < self.n_min {
            return Err(SequenceError::BelowDomain { n, n_min: self.n_min });
        }
        match self.kind {
            SequenceKind::Polynomial => Ok(Some(self.eval_rational_unchecked(n))),
            SequenceKind::GenericPower => Ok(None),
        }
    }

    /// `t_n` as an exact rational (polynomial) or an enclosure of width
    /// at most `2^-precision` (generic power).
    pub fn eval(&self, n: u64, precision: u32) -> Result<ExactValue, SequenceError> {
        if n < self.n_min {
            return Err(SequenceError::BelowDomain { n, n_min: self.n_min });
        }
        match self.kind {
            SequenceKind::Polynomial => Ok(ExactValue::Exact(self.eval_rational_unchecked(n))),
            SequenceKind::GenericPower => {
                // n^(p/q) = (n^p)^(1/q)
                let p = self
                    .gamma
                    .numer()
                    .to_u64()
                    .expect("gamma numerator fits u64");
                let q = self
                    .gamma
                    .denom()
                    .to_u32()
                    .expect("gamma denominator fits u32");
                let base = Enclosure::point(Dyadic::from_u64(n));
                let val = base.pow_ratio(p, q, precision + 4);
                if let Some(exact) = exact_power(n, p, q) {
                    return Ok(ExactValue::Exact(exact));
                }
                Ok(ExactValue::Interval(val))
            }
        }
    }

    /// Growth-condition report over `[n_lo, n_hi]`: the empirical constant in
    /// `|t_{n+1}/t_n − 1 − γ/n| ≤ C/n^{1+ε₁}` and the comparability band
    /// `(t_m/t_n)/(m/n)^γ` over a geometric grid of pairs.
    pub fn validate_growth(&self, n_lo: u64, n_hi: u64) -> Result<GrowthReport, SequenceError> {
        if n_lo < self.n_min || n_lo >= n_hi {
            return Err(SequenceError::BelowDomain { n: n_lo, n_min: self.n_min });
        }
        let prec = 96u32;
        let mut o_constant = BigRational::zero();
        let mut o_exact = true;
        let mut prev = self.eval(n_lo, prec)?;
        for n in n_lo..n_hi {
            let next = self.eval(n + 1, prec)?;
            match (&prev, &next) {
                (ExactValue::Exact(a), ExactValue::Exact(b)) => {
                    let nn = BigRational::from(BigInt::from(n));
                    let dev = (b / a - BigRational::one() - &self.gamma / &nn).abs();
                    // ε₁ = 1 for polynomials: multiplier n^{1+ε₁} = n²
                    let weighted = dev * &nn * &nn;
                    if weighted > o_constant {
                        o_constant = weighted;
                    }
                }
                _ => {
                    o_exact = false;
                    let a = prev.enclosure(prec);
                    let b = next.enclosure(prec);
                    let nn = BigRational::from(BigInt::from(n));
                    let ratio = b.div_scaled(&a, prec);
                    let drift = Enclosure::from_rational(
                        &(BigRational::one() + &self.gamma / &nn),
                        prec,
                    );
                    let dev_hi = ratio.sub(&drift);
                    let dev = dev_hi.hi().to_f64().abs().max(dev_hi.lo().to_f64().abs());
                    // weight n^{1+eps1} via f64 (report-only for generic kind)
                    let w = (n as f64).powf(1.0 + self.eps1.to_f64().unwrap_or(1.0));
                    let weighted = dev * w;
                    let cur = o_constant.to_f64().unwrap_or(0.0);
                    if weighted > cur {
                        o_constant = BigRational::from_float(weighted)
                            .unwrap_or_else(BigRational::zero);
                    }
                }
            }
            prev = next;
        }

        // Comparability band over a geometric pair grid.
        let mut band_min: Option<BigRational> = None;
        let mut band_max: Option<BigRational> = None;
        let mut grid = vec![n_lo];
        let mut v = n_lo;
        while v < n_hi {
            v = (v * 2).min(n_hi);
            grid.push(v);
        }
        for i in 0..grid.len() {
            for j in i + 1..grid.len() {
                let (n, m) = (grid[i], grid[j]);
                let band = self.band_value(n, m)?;
                band_min = Some(match band_min {
                    Some(b) if b < band => b,
                    _ => band.clone(),
                });
                band_max = Some(match band_max {
                    Some(b) if b > band => b,
                    _ => band,
                });
            }
        }
        Ok(GrowthReport {
            n_lo,
            n_hi,
            o_constant,
            o_constant_exact: o_exact,
            band_min: band_min.unwrap_or_else(BigRational::one),
            band_max: band_max.unwrap_or_else(BigRational::one),
        })
    }

    /// `(t_m/t_n) / (m/n)^γ` — exact when γ is a nonnegative integer and the
    /// sequence is polynomial; otherwise a midpoint approximation.
    pub fn band_value(&self, n: u64, m: u64) -> Result<BigRational, SequenceError> {
        let prec = 96u32;
        let tn = self.eval(n, prec)?;
        let tm = self.eval(m, prec)?;
        if let (Some(a), Some(b), Some(g)) =
            (tn.as_exact(), tm.as_exact(), self.gamma.to_integer().to_u32().into())
        {
            let g: Option<u32> = g;
            if self.gamma.is_integer() {
                let g = g.unwrap_or(0);
                let ratio = b / a;
                let mn = BigRational::new(BigInt::from(m), BigInt::from(n));
                let pow = num_traits::Pow::pow(&mn, g);
                return Ok(ratio / pow);
            }
        }
        let a = tn.enclosure(prec);
        let b = tm.enclosure(prec);
        let p = self.gamma.numer().to_u64().unwrap_or(1);
        let q = self.gamma.denom().to_u32().unwrap_or(1);
        let mn = Enclosure::from_rational(
            &BigRational::new(BigInt::from(m), BigInt::from(n)),
            prec,
        )
        .pow_ratio(p, q, prec);
        let band = b.div_scaled(&a, prec).div_scaled(&mn, prec);
        Ok(BigRational::from_float(band.to_f64()).unwrap_or_else(BigRational::one))
    }
}

/// n^(p/q) as an exact rational when the root is exact.
fn exact_power(n: u64, p: u64, q: u32) -> Option<BigRational> {
    let big = num_traits::Pow::pow(&num_bigint::BigUint::from(n), p);
    let root = num_integer::Roots::nth_root(&big, q);
    if num_traits::Pow::pow(&root, q) == big {
        Some(BigRational::from(BigInt::from(root)))
    } else {
        None
    }
}

#[derive(Clone, Debug)]
pub struct GrowthReport {
    pub n_lo: u64,
    pub n_hi: u64,
    /// Max over the range of `|t_{n+1}/t_n − 1 − γ/n| · n^{1+ε₁}`.
    pub o_constant: BigRational,
    /// Whether the O-constant was computed with exact arithmetic.
    pub o_constant_exact: bool,
    pub band_min: BigRational,
    pub band_max: BigRational,
}

pub fn parse_rational(s: &str) -> Option<BigRational> {
    if let Some((p, q)) = s.split_once('/') {
        let num: BigInt = p.trim().parse().ok()?;
        let den: BigInt = q.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(BigRational::new(num, den));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        // decimal literal
        let negative = int_part.trim_start().starts_with('-');
        let ip: BigInt = if int_part.is_empty() || int_part == "-" {
            BigInt::zero()
        } else {
            int_part.trim().parse().ok()?
        };
        let digits = frac_part.trim();
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let scale = num_traits::Pow::pow(&BigInt::from(10), digits.len());
        let fp: BigInt = digits.parse().ok()?;
        let fp = if negative { -fp } else { fp };
        return Some(BigRational::new(ip * &scale + fp, scale));
    }
    let v: BigInt = s.trim().parse().ok()?;
    Some(BigRational::from(v))
}

pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
