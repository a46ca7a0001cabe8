//! Exact rationals and outward-rounded dyadic enclosures.
//!
//! Rationals are `num-rational` big rationals. Irrational quantities that
//! show up in `T`-parameterized sums, namely `x^t` and `2^e` for rational
//! `t` and `e`, are enclosed in intervals whose endpoints are dyadic
//! (`m · 2^k`). Roots are taken with integer n-th root extraction, so an
//! enclosure at `k` bits is exactly `[⌊x^t·2^k⌋, ⌈x^t·2^k⌉] · 2^-k`.

use alloc::format;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Exact `2^e` as a rational.
pub fn pow2(e: i64) -> Rational {
    let magnitude = BigInt::one() << e.unsigned_abs();
    if e >= 0 {
        Rational::from_integer(magnitude)
    } else {
        Rational::new_raw(BigInt::one(), magnitude)
    }
}

/// Parses `p/q` or `p` (optional sign, surrounding whitespace ignored).
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || Error::InvalidParameter(format!("not a rational: {text:?}"));
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

/// Splits a positive rational into `(numerator, denominator)` as machine words.
fn small_parts(r: &Rational) -> Result<(u32, u32)> {
    let num = r.numer().to_u32();
    let den = r.denom().to_u32();
    match (num, den) {
        (Some(n), Some(d)) => Ok((n, d)),
        _ => Err(Error::Unsupported(
            "exponent numerator or denominator exceeds 32 bits",
        )),
    }
}

/// A dyadic rational `mantissa · 2^exponent`, kept with an odd mantissa
/// (or the canonical zero `0 · 2^0`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mantissa: BigInt,
    exponent: i64,
}

impl Dyadic {
    pub fn new(mantissa: BigInt, exponent: i64) -> Self {
        match mantissa.trailing_zeros() {
            None => Self::zero(),
            Some(0) => Self { mantissa, exponent },
            Some(tz) => Self {
                mantissa: mantissa >> tz,
                exponent: exponent + tz as i64,
            },
        }
    }

    pub fn zero() -> Self {
        Self {
            mantissa: BigInt::zero(),
            exponent: 0,
        }
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Self::new(n.into(), 0)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    /// Largest multiple of `2^-bits` that is `<= r`.
    pub fn floor(r: &Rational, bits: u32) -> Self {
        let scaled = r.numer() << bits;
        Self::new(scaled.div_floor(r.denom()), -i64::from(bits))
    }

    /// Smallest multiple of `2^-bits` that is `>= r`.
    pub fn ceil(r: &Rational, bits: u32) -> Self {
        let scaled = r.numer() << bits;
        Self::new(Integer::div_ceil(&scaled, r.denom()), -i64::from(bits))
    }

    /// Exact value, if `r` is a dyadic rational.
    pub fn try_from_rational(r: &Rational) -> Option<Self> {
        let den = r.denom();
        let tz = den.trailing_zeros()?;
        if (den >> tz).is_one() {
            Some(Self::new(r.numer().clone(), -(tz as i64)))
        } else {
            None
        }
    }

    pub fn to_rational(&self) -> Rational {
        if self.exponent >= 0 {
            Rational::from_integer(&self.mantissa << self.exponent as u64)
        } else {
            // An odd mantissa over a power of two is already in lowest terms.
            Rational::new_raw(
                self.mantissa.clone(),
                BigInt::one() << self.exponent.unsigned_abs(),
            )
        }
    }

    /// Both mantissas rescaled to the smaller exponent.
    fn aligned(&self, other: &Self) -> (BigInt, BigInt, i64) {
        let e = self.exponent.min(other.exponent);
        let a = &self.mantissa << (self.exponent - e) as u64;
        let b = &other.mantissa << (other.exponent - e) as u64;
        (a, b, e)
    }
}

impl Default for Dyadic {
    fn default() -> Self {
        Self::zero()
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.mantissa.sign(), other.mantissa.sign()) {
            (a, b) if a != b => sign_rank(a).cmp(&sign_rank(b)),
            _ => {
                let (a, b, _) = self.aligned(other);
                a.cmp(&b)
            }
        }
    }
}

fn sign_rank(s: Sign) -> i8 {
    match s {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        let (a, b, e) = self.aligned(rhs);
        Dyadic::new(a + b, e)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        &self + &rhs
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        let (a, b, e) = self.aligned(rhs);
        Dyadic::new(a - b, e)
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: Dyadic) -> Dyadic {
        &self - &rhs
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            mantissa: -self.mantissa,
            exponent: self.exponent,
        }
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        Dyadic::new(&self.mantissa * &rhs.mantissa, self.exponent + rhs.exponent)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_rational(), f)
    }
}

fn dyadic_op(
    a: &Rational,
    b: &Rational,
    op: impl Fn(&Dyadic, &Dyadic) -> Dyadic,
) -> Option<Rational> {
    let x = Dyadic::try_from_rational(a)?;
    let y = Dyadic::try_from_rational(b)?;
    Some(op(&x, &y).to_rational())
}

/// Ordering by cross-multiplication, without continued-fraction steps.
pub fn exact_cmp(a: &Rational, b: &Rational) -> Ordering {
    match (Dyadic::try_from_rational(a), Dyadic::try_from_rational(b)) {
        (Some(x), Some(y)) => x.cmp(&y),
        _ => (a.numer() * b.denom()).cmp(&(b.numer() * a.denom())),
    }
}

/// `a + b`. Dyadic operands skip the gcd reduction.
pub fn exact_add(a: &Rational, b: &Rational) -> Rational {
    dyadic_op(a, b, |x, y| x + y).unwrap_or_else(|| a + b)
}

/// `a − b`. Dyadic operands skip the gcd reduction.
pub fn exact_sub(a: &Rational, b: &Rational) -> Rational {
    dyadic_op(a, b, |x, y| x - y).unwrap_or_else(|| a - b)
}

/// `a · b`. Dyadic operands skip the gcd reduction.
pub fn exact_mul(a: &Rational, b: &Rational) -> Rational {
    dyadic_op(a, b, |x, y| x * y).unwrap_or_else(|| a * b)
}

/// Closed interval `[lo, hi]` with dyadic endpoints.
///
/// `prec` records the bit precision the enclosure was produced at; sums
/// keep the smallest precision of their operands.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicInterval {
    lo: Dyadic,
    hi: Dyadic,
    prec: u32,
}

impl DyadicInterval {
    pub fn new(lo: Dyadic, hi: Dyadic, prec: u32) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidParameter(format!(
                "interval endpoints out of order: [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi, prec })
    }

    pub fn point(value: Dyadic, prec: u32) -> Self {
        Self {
            lo: value.clone(),
            hi: value,
            prec,
        }
    }

    pub fn zero(prec: u32) -> Self {
        Self::point(Dyadic::zero(), prec)
    }

    /// Outward enclosure of a rational on the `2^-prec` grid.
    pub fn enclose(r: &Rational, prec: u32) -> Self {
        Self {
            lo: Dyadic::floor(r, prec),
            hi: Dyadic::ceil(r, prec),
            prec,
        }
    }

    /// Outward enclosure of the rational range `[lo, hi]` on the `2^-prec` grid.
    pub fn enclose_range(lo: &Rational, hi: &Rational, prec: u32) -> Result<Self> {
        Self::new(Dyadic::floor(lo, prec), Dyadic::ceil(hi, prec), prec)
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn lo_rational(&self) -> Rational {
        self.lo.to_rational()
    }

    pub fn hi_rational(&self) -> Rational {
        self.hi.to_rational()
    }

    pub fn width(&self) -> Dyadic {
        &self.hi - &self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    /// `true` when `width <= 2^-bits`.
    pub fn width_at_most(&self, bits: u32) -> bool {
        self.width() <= Dyadic::new(BigInt::one(), -i64::from(bits))
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo_rational() <= x && x <= &self.hi_rational()
    }

    pub fn contains_dyadic(&self, x: &Dyadic) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// Exact interval sum.
    pub fn add(&self, other: &Self) -> Self {
        Self {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
            prec: self.prec.min(other.prec),
        }
    }

    /// Shift both endpoints by an exact dyadic amount.
    pub fn offset(&self, by: &Dyadic) -> Self {
        Self {
            lo: &self.lo + by,
            hi: &self.hi + by,
            prec: self.prec,
        }
    }

    /// Multiply by a non-negative integer.
    pub fn scale(&self, factor: &BigUint) -> Self {
        let f = Dyadic::from_integer(BigInt::from(factor.clone()));
        Self {
            lo: &self.lo * &f,
            hi: &self.hi * &f,
            prec: self.prec,
        }
    }
}

impl fmt::Display for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// The temperature parameter `T`, a rational with `0 < T <= 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Temperature(Rational);

impl Temperature {
    pub fn new(value: Rational) -> Result<Self> {
        if value.is_positive() && value <= Rational::one() {
            Ok(Self(value))
        } else {
            Err(Error::TemperatureOutOfRange(value))
        }
    }

    pub fn one() -> Self {
        Self(Rational::one())
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }
}

impl fmt::Display for Temperature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl TryFrom<Rational> for Temperature {
    type Error = Error;
    fn try_from(value: Rational) -> Result<Self> {
        Self::new(value)
    }
}

fn pow_rational(x: &Rational, e: u32) -> Rational {
    Rational::new_raw(
        num_traits::pow(x.numer().clone(), e as usize),
        num_traits::pow(x.denom().clone(), e as usize),
    )
}

/// `[⌊y^(1/degree)·2^bits⌋, ⌈y^(1/degree)·2^bits⌉] · 2^-bits` for `y >= 0`.
fn root_enclosure(y: &Rational, degree: u32, bits: u32) -> DyadicInterval {
    debug_assert!(!y.is_negative());
    if degree == 1 {
        return DyadicInterval::enclose(y, bits);
    }
    let num = y.numer().magnitude();
    let den = y.denom().magnitude();
    let scaled = num << (u64::from(bits) * u64::from(degree));
    let (floor_n, rem) = scaled.div_rem(den);
    let lo = floor_n.nth_root(degree);
    let ceil_n = if rem.is_zero() {
        floor_n
    } else {
        floor_n + 1u32
    };
    let mut hi = ceil_n.nth_root(degree);
    if hi.pow(degree) != ceil_n {
        hi += 1u32;
    }
    let e = -i64::from(bits);
    DyadicInterval {
        lo: Dyadic::new(BigInt::from(lo), e),
        hi: Dyadic::new(BigInt::from(hi), e),
        prec: bits,
    }
}

/// Enclosure of `x^t` with width at most `2^-prec`.
///
/// `t = u/v` in lowest terms is evaluated as the `v`-th root of `x^u`.
pub fn pow_interval(x: &Rational, t: &Rational, prec: u32) -> Result<DyadicInterval> {
    if prec == 0 {
        return Err(Error::ZeroPrecision);
    }
    if x.is_negative() {
        return Err(Error::NegativeBase(x.clone()));
    }
    if !t.is_positive() {
        return Err(Error::NonPositiveExponent(t.clone()));
    }
    let (u, v) = small_parts(t)?;
    Ok(root_enclosure(&pow_rational(x, u), v, prec))
}

/// Enclosure of `2^e` with width at most `2^-prec`; a point for integer `e`.
pub fn two_pow_interval(e: &Rational, prec: u32) -> Result<DyadicInterval> {
    if prec == 0 {
        return Err(Error::ZeroPrecision);
    }
    let num = e
        .numer()
        .to_i64()
        .ok_or(Error::Unsupported("exponent numerator exceeds 64 bits"))?;
    let den = e
        .denom()
        .to_u32()
        .ok_or(Error::Unsupported("exponent denominator exceeds 32 bits"))?;
    if den == 1 {
        return Ok(DyadicInterval::point(Dyadic::new(BigInt::one(), num), prec));
    }
    Ok(root_enclosure(&pow2(num), den, prec))
}

/// The exponent `-len / T` of a program's weight `2^(-len/T)`.
pub fn weight_exponent(len: u64, t: &Temperature) -> Rational {
    -Rational::from_integer(BigInt::from(len)) / t.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    /// Bisection on the `2^-bits` grid using only rational comparisons.
    fn bisect_root(y: &Rational, degree: u32, bits: u32) -> (Rational, Rational) {
        let mut lo = Rational::zero();
        let mut hi = if *y > Rational::one() {
            y.clone()
        } else {
            Rational::one()
        };
        let step = pow2(-i64::from(bits));
        while &hi - &lo > step {
            let mid = (&lo + &hi) / Rational::from_integer(BigInt::from(2));
            if pow_rational(&mid, degree) <= *y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo, hi)
    }

    #[test]
    fn perfect_square_is_exact() {
        let iv = pow_interval(&q(1, 4), &q(1, 2), 10).unwrap();
        assert!(iv.contains(&q(1, 2)));
        assert!(iv.is_point());
        assert!(iv.width_at_most(10));
    }

    #[test]
    fn identity_exponent() {
        let x = q(3, 8);
        let iv = pow_interval(&x, &Rational::one(), 5).unwrap();
        assert!(iv.is_point());
        assert_eq!(iv.lo_rational(), x);
        let iv = pow_interval(&q(1, 3), &Rational::one(), 12).unwrap();
        assert!(iv.contains(&q(1, 3)));
        assert!(iv.width_at_most(12));
    }

    #[test]
    fn cube_root_of_half_matches_bisection() {
        let iv = pow_interval(&q(1, 2), &q(1, 3), 20).unwrap();
        let (olo, ohi) = bisect_root(&q(1, 2), 3, 40);
        assert!(iv.lo_rational() <= olo && ohi <= iv.hi_rational());
        assert!(iv.width_at_most(20));
        // 2^(-1/3) = 0.7937005...
        assert!(iv.contains(&q(7_937_005, 10_000_000)) || iv.contains(&q(7_937_006, 10_000_000)));
    }

    #[test]
    fn integer_powers_of_two_are_exact() {
        let iv = two_pow_interval(&q(-3, 1), 1).unwrap();
        assert!(iv.is_point());
        assert_eq!(iv.lo_rational(), q(1, 8));
        let t = Temperature::new(q(1, 2)).unwrap();
        let iv = two_pow_interval(&weight_exponent(1, &t), 4).unwrap();
        assert_eq!(weight_exponent(1, &t), q(-2, 1));
        assert!(iv.is_point());
        assert_eq!(iv.lo_rational(), q(1, 4));
    }

    #[test]
    fn inverse_sqrt_two() {
        let iv = two_pow_interval(&q(-1, 2), 20).unwrap();
        let (olo, ohi) = bisect_root(&q(1, 2), 2, 40);
        assert!(iv.lo_rational() <= olo && ohi <= iv.hi_rational());
        assert!(iv.width_at_most(20));
        assert!(iv.contains(&q(7_071_067, 10_000_000)) || iv.contains(&q(7_071_068, 10_000_000)));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(
            pow_interval(&q(-1, 2), &q(1, 2), 8),
            Err(Error::NegativeBase(q(-1, 2)))
        );
        assert_eq!(
            pow_interval(&q(1, 2), &Rational::zero(), 8),
            Err(Error::NonPositiveExponent(Rational::zero()))
        );
        assert_eq!(
            pow_interval(&q(1, 2), &q(1, 2), 0),
            Err(Error::ZeroPrecision)
        );
        assert!(Temperature::new(q(3, 2)).is_err());
        assert!(Temperature::new(Rational::zero()).is_err());
        assert!(Temperature::new(Rational::one()).is_ok());
    }

    #[test]
    fn zero_base() {
        let iv = pow_interval(&Rational::zero(), &q(2, 3), 8).unwrap();
        assert!(iv.is_point());
        assert!(iv.lo().is_zero());
    }

    #[test]
    fn refinement_is_nested() {
        let mut prev: Option<DyadicInterval> = None;
        for prec in 1..40 {
            let iv = pow_interval(&q(5, 7), &q(3, 4), prec).unwrap();
            if let Some(p) = &prev {
                assert!(iv.is_subset_of(p), "prec {prec}");
            }
            prev = Some(iv);
        }
    }

    #[test]
    fn dyadic_arithmetic() {
        let a = Dyadic::floor(&q(3, 8), 10);
        assert_eq!(a.mantissa(), &BigInt::from(3));
        assert_eq!(a.exponent(), -3);
        let b = Dyadic::from_integer(-2);
        assert_eq!((&a + &b).to_rational(), q(-13, 8));
        assert_eq!((&a - &b).to_rational(), q(19, 8));
        assert_eq!((&a * &b).to_rational(), q(-3, 4));
        assert!(b < a);
        assert_eq!(
            Dyadic::try_from_rational(&q(5, 8)).unwrap().to_rational(),
            q(5, 8)
        );
        assert!(Dyadic::try_from_rational(&q(1, 3)).is_none());
        let mut v: Vec<Dyadic> = [q(1, 2), q(-1, 4), q(0, 1)]
            .iter()
            .map(|r| Dyadic::try_from_rational(r).unwrap())
            .collect();
        v.sort();
        assert_eq!(v[0].to_rational(), q(-1, 4));
    }

    #[test]
    fn parse() {
        assert_eq!(parse_rational("21/64").unwrap(), q(21, 64));
        assert_eq!(parse_rational(" -3 ").unwrap(), q(-3, 1));
        assert_eq!(parse_rational("2/4").unwrap(), q(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("0.5").is_err());
    }
}
