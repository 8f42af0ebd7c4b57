//! Exact dyadic arithmetic with directed rounding.
//!
//! Every real-valued parameter in the sieve (the constant `c`, the removal
//! widths `δ_n`, the products `n·ln n`) is carried as an [`Enclosure`]: a pair
//! of dyadic rationals `lo ≤ x ≤ hi` whose endpoints are exact. Downstream
//! code then picks the endpoint that errs on the safe side — widths that can
//! only enlarge a removed set, scores that can only shrink a claimed bound —
//! so no floating-point rounding can ever flip a verdict.
//!
//! A [`Dyadic`] is `mant · 2^exp` with a big-integer mantissa. Addition,
//! subtraction and multiplication are exact; division and the transcendental
//! functions round in a caller-chosen direction at a caller-chosen scale.
//!
//! The natural logarithm uses the standard argument reduction
//! `ln x = e·ln 2 + ln m` with `m ∈ [1, 2)` followed by the atanh series
//! `ln m = 2·Σ z^(2k+1)/(2k+1)`, `z = (m−1)/(m+1) ∈ [0, 1/3)`. The lower
//! endpoint evaluates the series with all-floor rounding on a rounded-down
//! `z`; the upper endpoint with all-ceil rounding on a rounded-up `z` plus a
//! tail bound. Both are genuine bounds, not error estimates.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::sync::OnceLock;

/// Rounding direction for inexact operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Round {
    Down,
    Up,
}

/// An exact dyadic rational `mant · 2^exp`.
#[derive(Clone, Debug)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn new(mant: BigInt, exp: i64) -> Self {
        Dyadic { mant, exp }
    }

    pub fn zero() -> Self {
        Dyadic { mant: BigInt::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Dyadic { mant: BigInt::one(), exp: 0 }
    }

    pub fn from_u64(v: u64) -> Self {
        Dyadic { mant: BigInt::from(v), exp: 0 }
    }

    pub fn from_bigint(v: BigInt) -> Self {
        Dyadic { mant: v, exp: 0 }
    }

    /// 2^k.
    pub fn pow2(k: i64) -> Self {
        Dyadic { mant: BigInt::one(), exp: k }
    }

    pub fn mant(&self) -> &BigInt {
        &self.mant
    }

    pub fn exp(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.mant.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    /// Shift the value by 2^k (exact).
    pub fn shifted(&self, k: i64) -> Self {
        Dyadic { mant: self.mant.clone(), exp: self.exp + k }
    }

    pub fn neg(&self) -> Self {
        Dyadic { mant: -self.mant.clone(), exp: self.exp }
    }

    /// Exact comparison of values.
    pub fn cmp_value(&self, other: &Dyadic) -> Ordering {
        match (self.mant.sign(), other.mant.sign()) {
            (Sign::Minus, Sign::NoSign) | (Sign::Minus, Sign::Plus) => return Ordering::Less,
            (Sign::NoSign, Sign::Minus) | (Sign::Plus, Sign::Minus) => return Ordering::Greater,
            (Sign::NoSign, Sign::NoSign) => return Ordering::Equal,
            (Sign::NoSign, Sign::Plus) => return Ordering::Less,
            (Sign::Plus, Sign::NoSign) => return Ordering::Greater,
            _ => {}
        }
        if self.exp >= other.exp {
            let shifted = &self.mant << (self.exp - other.exp) as u64;
            shifted.cmp(&other.mant)
        } else {
            let shifted = &other.mant << (other.exp - self.exp) as u64;
            self.mant.cmp(&shifted)
        }
    }

    /// Exact sum.
    pub fn add(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let exp = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - exp) as u64;
        let b = &other.mant << (other.exp - exp) as u64;
        Dyadic { mant: a + b, exp }
    }

    /// Exact difference.
    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        self.add(&other.neg())
    }

    /// Exact product.
    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        Dyadic { mant: &self.mant * &other.mant, exp: self.exp + other.exp }
    }

    /// Round so that `exp == -(scale)`, in the given direction.
    pub fn round_to_scale(&self, scale: u32, round: Round) -> Dyadic {
        let target = -(scale as i64);
        if self.exp >= target {
            // Exactly representable: just shift the mantissa left.
            return Dyadic {
                mant: &self.mant << (self.exp - target) as u64,
                exp: target,
            };
        }
        let shift = (target - self.exp) as u64;
        let mant = match round {
            Round::Down => floor_shr(&self.mant, shift),
            Round::Up => ceil_shr(&self.mant, shift),
        };
        Dyadic { mant, exp: target }
    }

    /// `self / other` rounded at `scale` bits after the binary point.
    /// `other` must be nonzero.
    pub fn div_to_scale(&self, other: &Dyadic, scale: u32, round: Round) -> Dyadic {
        assert!(!other.is_zero(), "dyadic division by zero");
        let target = -(scale as i64);
        // self/other = (self.mant / other.mant) * 2^(self.exp - other.exp)
        // want mant' with mant' * 2^target <= (or >=) value
        let e = self.exp - other.exp - target;
        let (num, den) = if e >= 0 {
            (&self.mant << e as u64, other.mant.clone())
        } else {
            (self.mant.clone(), &other.mant << (-e) as u64)
        };
        let mant = match round {
            Round::Down => num.div_floor(&den),
            Round::Up => num.div_ceil(&den),
        };
        Dyadic { mant, exp: target }
    }

    pub fn from_ratio(r: &BigRational, scale: u32, round: Round) -> Dyadic {
        let num = Dyadic::from_bigint(r.numer().clone());
        let den = Dyadic::from_bigint(r.denom().clone());
        num.div_to_scale(&den, scale, round)
    }

    /// Exact conversion to a big rational.
    pub fn to_ratio(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from(&self.mant << self.exp as u64)
        } else {
            BigRational::new(self.mant.clone(), BigInt::one() << (-self.exp) as u64)
        }
    }

    pub fn to_f64(&self) -> f64 {
        // Reduce the mantissa to ~64 significant bits first so huge values
        // do not overflow the BigInt-to-f64 conversion.
        let bits = self.mant.bits() as i64;
        if bits <= 64 {
            return self.mant.to_f64().unwrap_or(0.0) * 2f64.powi(self.exp as i32);
        }
        let shift = bits - 64;
        let m = floor_shr(&self.mant, shift as u64);
        m.to_f64().unwrap_or(0.0) * 2f64.powi((self.exp + shift) as i32)
    }

    /// `floor(log2(value))` for a positive value.
    pub fn floor_log2(&self) -> i64 {
        assert!(self.is_positive(), "floor_log2 of non-positive dyadic");
        self.mant.bits() as i64 - 1 + self.exp
    }

    /// Largest integer `<= value`.
    pub fn floor_int(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << self.exp as u64
        } else {
            floor_shr(&self.mant, (-self.exp) as u64)
        }
    }

    /// Smallest integer `>= value`.
    pub fn ceil_int(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << self.exp as u64
        } else {
            ceil_shr(&self.mant, (-self.exp) as u64)
        }
    }
}

fn floor_shr(v: &BigInt, shift: u64) -> BigInt {
    // BigInt >> is an arithmetic shift (rounds toward -inf), which is floor.
    v >> shift
}

fn ceil_shr(v: &BigInt, shift: u64) -> BigInt {
    -(&(-v) >> shift)
}

/// A certified enclosure `[lo, hi]` of a real number.
#[derive(Clone, Debug)]
pub struct Enclosure {
    lo: Dyadic,
    hi: Dyadic,
}

impl Enclosure {
    pub fn new(lo: Dyadic, hi: Dyadic) -> Self {
        debug_assert!(lo.cmp_value(&hi) != Ordering::Greater, "inverted enclosure");
        Enclosure { lo, hi }
    }

    /// Zero-width enclosure.
    pub fn point(d: Dyadic) -> Self {
        Enclosure { lo: d.clone(), hi: d }
    }

    pub fn from_rational(r: &BigRational, scale: u32) -> Self {
        Enclosure {
            lo: Dyadic::from_ratio(r, scale, Round::Down),
            hi: Dyadic::from_ratio(r, scale, Round::Up),
        }
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn width(&self) -> Dyadic {
        self.hi.sub(&self.lo)
    }

    pub fn to_f64(&self) -> f64 {
        0.5 * (self.lo.to_f64() + self.hi.to_f64())
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn contains_ratio(&self, r: &BigRational) -> bool {
        let lo = self.lo.to_ratio();
        let hi = self.hi.to_ratio();
        &lo <= r && r <= &hi
    }

    /// Relative width check: `hi - lo <= 2^-bits * lo` (requires `lo > 0`).
    pub fn rel_width_within(&self, bits: u32) -> bool {
        if !self.lo.is_positive() {
            return false;
        }
        let w = self.width();
        let allowed = self.lo.shifted(-(bits as i64));
        w.cmp_value(&allowed) != Ordering::Greater
    }

    pub fn add(&self, other: &Enclosure) -> Enclosure {
        Enclosure { lo: self.lo.add(&other.lo), hi: self.hi.add(&other.hi) }
    }

    pub fn sub(&self, other: &Enclosure) -> Enclosure {
        Enclosure { lo: self.lo.sub(&other.hi), hi: self.hi.sub(&other.lo) }
    }

    /// Exact product enclosure (no rounding; mantissas grow).
    pub fn mul(&self, other: &Enclosure) -> Enclosure {
        let c1 = self.lo.mul(&other.lo);
        let c2 = self.lo.mul(&other.hi);
        let c3 = self.hi.mul(&other.lo);
        let c4 = self.hi.mul(&other.hi);
        let mut lo = c1.clone();
        let mut hi = c1;
        for c in [c2, c3, c4] {
            if c.cmp_value(&lo) == Ordering::Less {
                lo = c.clone();
            }
            if c.cmp_value(&hi) == Ordering::Greater {
                hi = c;
            }
        }
        Enclosure { lo, hi }
    }

    /// Product followed by outward rounding at `scale` (keeps mantissas small).
    pub fn mul_scaled(&self, other: &Enclosure, scale: u32) -> Enclosure {
        let e = self.mul(other);
        Enclosure {
            lo: e.lo.round_to_scale(scale, Round::Down),
            hi: e.hi.round_to_scale(scale, Round::Up),
        }
    }

    /// `self / other` for `other.lo > 0`, rounded outward at `scale`.
    pub fn div_scaled(&self, other: &Enclosure, scale: u32) -> Enclosure {
        assert!(other.lo.is_positive(), "enclosure division requires positive divisor");
        let lo = if self.lo.is_negative() {
            self.lo.div_to_scale(&other.lo, scale, Round::Down)
        } else {
            self.lo.div_to_scale(&other.hi, scale, Round::Down)
        };
        let hi = if self.hi.is_negative() {
            self.hi.div_to_scale(&other.hi, scale, Round::Up)
        } else {
            self.hi.div_to_scale(&other.lo, scale, Round::Up)
        };
        Enclosure { lo, hi }
    }

    /// Reciprocal of a positive enclosure.
    pub fn recip_scaled(&self, scale: u32) -> Enclosure {
        Enclosure::point(Dyadic::one()).div_scaled(self, scale)
    }

    /// Integer power with outward rounding (exponent >= 0).
    pub fn pow_u64(&self, mut e: u64, scale: u32) -> Enclosure {
        let mut result = Enclosure::point(Dyadic::one());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_scaled(&base, scale);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_scaled(&base, scale);
            }
        }
        result
    }

    /// q-th root of a nonnegative enclosure, rounded outward at `scale`.
    pub fn nth_root(&self, q: u32, scale: u32) -> Enclosure {
        assert!(q >= 1);
        assert!(!self.lo.is_negative(), "nth_root of negative enclosure");
        Enclosure {
            lo: dyadic_root(&self.lo, q, scale, Round::Down),
            hi: dyadic_root(&self.hi, q, scale, Round::Up),
        }
    }

    /// Rational power `x^(num/den)` of a nonnegative enclosure.
    /// Absolute precision: adequate for values of magnitude near 1 or above.
    pub fn pow_ratio(&self, num: u64, den: u32, scale: u32) -> Enclosure {
        let guard = scale + 8;
        self.pow_u64(num, guard).nth_root(den, scale)
    }

    /// Rational power with *relative* precision: factors out the binary
    /// magnitude first, so tiny positive values (like δ_n^p) do not underflow
    /// the working scale. Requires `lo > 0`.
    pub fn pow_ratio_rel(&self, num: u64, den: u32, prec: u32) -> Enclosure {
        assert!(self.lo.is_positive(), "pow_ratio_rel requires a positive enclosure");
        let k = self.lo.floor_log2();
        // m = x * 2^-k lies in [1, hi/2^k]; for narrow enclosures that is < 4.
        let m = Enclosure {
            lo: self.lo.shifted(-k),
            hi: self.hi.shifted(-k),
        };
        let m_pow = m.pow_ratio(num, den, prec + 8);
        // 2^(k*num/den) = 2^q_int * (2^r)^(1/den), r = (k*num) mod den
        let e = k * num as i64;
        let q_int = e.div_euclid(den as i64);
        let r = e.rem_euclid(den as i64) as u32;
        let scaled = Enclosure {
            lo: m_pow.lo.shifted(q_int),
            hi: m_pow.hi.shifted(q_int),
        };
        if r == 0 {
            return scaled;
        }
        let frac = Enclosure::point(Dyadic::pow2(r as i64)).nth_root(den, prec + 8);
        let out = scaled.mul(&frac);
        // Round outward at relative scale: prec bits below the magnitude.
        let mag = out.lo.floor_log2();
        let s = (prec as i64 - mag).max(1) as u32;
        out.round_outward(s)
    }

    /// `floor(log2 x)` when both endpoints agree on it; `None` on a straddle.
    pub fn floor_log2(&self) -> Option<i64> {
        if !self.lo.is_positive() {
            return None;
        }
        let a = self.lo.floor_log2();
        let b = self.hi.floor_log2();
        if a == b {
            Some(a)
        } else {
            None
        }
    }

    /// `ceil(x)` when unambiguous across the enclosure.
    pub fn ceil_unique(&self) -> Option<BigInt> {
        let a = self.lo.ceil_int();
        let b = self.hi.ceil_int();
        if a == b {
            Some(a)
        } else {
            None
        }
    }

    pub fn round_outward(&self, scale: u32) -> Enclosure {
        Enclosure {
            lo: self.lo.round_to_scale(scale, Round::Down),
            hi: self.hi.round_to_scale(scale, Round::Up),
        }
    }
}

/// q-th root of a nonnegative dyadic, rounded in the given direction at `scale`.
fn dyadic_root(x: &Dyadic, q: u32, scale: u32, round: Round) -> Dyadic {
    assert!(!x.is_negative());
    if x.is_zero() {
        return Dyadic::zero();
    }
    // value = mant * 2^exp; result mantissa m at scale s satisfies
    //   m ~ (mant * 2^(exp + q*s))^(1/q)
    let target = -(scale as i64);
    let e = x.exp() + (q as i64) * (scale as i64);
    let shifted: BigUint = if e >= 0 {
        (x.mant().magnitude()) << e as u64
    } else {
        match round {
            // Rounding the radicand down keeps the root a lower bound.
            Round::Down => x.mant().magnitude() >> (-e) as u64,
            Round::Up => {
                let m = x.mant().magnitude();
                let shift = (-e) as u64;
                let down = m >> shift;
                // ceil shift
                if &(&down << shift) == m {
                    down
                } else {
                    down + 1u32
                }
            }
        }
    };
    let root = num_integer::Roots::nth_root(&shifted, q);
    let mant = match round {
        Round::Down => BigInt::from(root),
        Round::Up => {
            // root^q <= shifted; bump unless exact
            if num_traits::Pow::pow(&root, q) == shifted {
                BigInt::from(root)
            } else {
                BigInt::from(root + 1u32)
            }
        }
    };
    Dyadic { mant, exp: target }
}

/// Certified enclosure of `ln x` for a positive rational `x`.
///
/// The result has absolute error below roughly `2^-(prec)` on each side
/// (the endpoints are true bounds regardless).
pub fn ln_enclosure(x: &BigRational, prec: u32) -> Enclosure {
    assert!(x.is_positive(), "ln of non-positive rational");
    let scale = prec + 24;
    if x.is_one() {
        return Enclosure::point(Dyadic::zero());
    }
    // Reduce x = m * 2^e with m in [1, 2).
    let e = rational_floor_log2(x);
    let m = if e >= 0 {
        x / BigRational::from(BigInt::one() << e as u64)
    } else {
        x * BigRational::from(BigInt::one() << (-e) as u64)
    };
    debug_assert!(m >= BigRational::one() && m < BigRational::from(BigInt::from(2)));
    let ln_m = atanh_series_ln(&m, scale);
    if e == 0 {
        return ln_m;
    }
    let ln2 = ln2_enclosure(scale);
    let e_enc = Enclosure::point(Dyadic::from_bigint(BigInt::from(e)));
    e_enc.mul(&ln2).add(&ln_m).round_outward(scale)
}

/// Convenience: `ln n` for an integer `n >= 1`.
pub fn ln_u64_enclosure(n: u64, prec: u32) -> Enclosure {
    ln_enclosure(&BigRational::from(BigInt::from(n)), prec)
}

/// `floor(log2 x)` of a positive rational, exactly.
pub fn rational_floor_log2(x: &BigRational) -> i64 {
    assert!(x.is_positive());
    let mut e = x.numer().bits() as i64 - x.denom().bits() as i64;
    // candidate may be off by one in either direction
    loop {
        let lo = pow2_ratio(e);
        if x < &lo {
            e -= 1;
            continue;
        }
        let hi = pow2_ratio(e + 1);
        if x >= &hi {
            e += 1;
            continue;
        }
        return e;
    }
}

fn pow2_ratio(e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from(BigInt::one() << e as u64)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-e) as u64)
    }
}

/// `ln m` for rational `m in [1, 2)` via the atanh series, with certified
/// directed rounding: the Down pass underestimates every quantity, the Up
/// pass overestimates and adds a tail bound.
fn atanh_series_ln(m: &BigRational, scale: u32) -> Enclosure {
    if m.is_one() {
        return Enclosure::point(Dyadic::zero());
    }
    // z = (m-1)/(m+1) in (0, 1/3)
    let one = BigRational::one();
    let z = (m - &one) / (m + &one);
    let z_lo = Dyadic::from_ratio(&z, scale, Round::Down);
    let z_hi = Dyadic::from_ratio(&z, scale, Round::Up);

    let sum_lo = atanh_sum(&z_lo, scale, Round::Down);
    let sum_hi_raw = atanh_sum(&z_hi, scale, Round::Up);
    // Tail of the Up pass: the loop stops once a term rounds up to <= 1 ulp;
    // the remaining tail is below term * z^2/(1-z^2) <= term/8 * 9/8 < 1 ulp.
    // One extra ulp also covers the final doubling.
    let tail = Dyadic::new(BigInt::from(2), -(scale as i64));
    let sum_hi = sum_hi_raw.add(&tail);

    Enclosure {
        lo: sum_lo.shifted(1), // ln m = 2 * atanh z
        hi: sum_hi.shifted(1),
    }
}

/// Directed evaluation of `Σ_{k>=0} z^(2k+1)/(2k+1)` at fixed-point `scale`.
fn atanh_sum(z: &Dyadic, scale: u32, round: Round) -> Dyadic {
    let z2 = z.mul(z).round_to_scale(scale, round);
    let mut power = z.round_to_scale(scale, round);
    let mut sum = power.clone();
    let mut k: u64 = 1;
    loop {
        power = power.mul(&z2).round_to_scale(scale, round);
        if power.is_zero() {
            break;
        }
        k += 2;
        let term = power.div_to_scale(&Dyadic::from_u64(k), scale, round);
        if term.is_zero() && round == Round::Down {
            break;
        }
        sum = sum.add(&term);
        if term.mant().bits() <= 1 {
            // term is at most 1 ulp; geometric tail covered by caller's bound
            break;
        }
    }
    sum
}

/// Shared enclosure of `ln 2`, computed once at high precision.
pub fn ln2_enclosure(scale: u32) -> Enclosure {
    static LN2: OnceLock<Enclosure> = OnceLock::new();
    const CACHED_SCALE: u32 = 448;
    assert!(
        scale <= CACHED_SCALE - 8,
        "requested ln2 precision beyond cached {CACHED_SCALE} bits"
    );
    let cached = LN2.get_or_init(|| {
        // ln 2 = 2 atanh(1/3)
        let third = BigRational::new(BigInt::one(), BigInt::from(3));
        let z_lo = Dyadic::from_ratio(&third, CACHED_SCALE, Round::Down);
        let z_hi = Dyadic::from_ratio(&third, CACHED_SCALE, Round::Up);
        let lo = atanh_sum(&z_lo, CACHED_SCALE, Round::Down).shifted(1);
        let hi = atanh_sum(&z_hi, CACHED_SCALE, Round::Up)
            .add(&Dyadic::new(BigInt::from(2), -(CACHED_SCALE as i64)))
            .shifted(1);
        Enclosure { lo, hi }
    });
    cached.round_outward(scale)
}
