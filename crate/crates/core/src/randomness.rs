//! Finite evidence about partial randomness: bit extraction, complexity
//! profiles, weak Chaitin `T`-randomness and `T`-compressibility checks,
//! dimension estimates, and Martin-Löf `T`-tests.
//!
//! Every randomness notion here is asymptotic. The functions only describe
//! finite prefixes and never certify a real as random.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{pow2, two_pow_interval, DyadicInterval, Rational, Temperature};
use crate::machine::{
    brute_force_h, BitString, ComplexityProfile, HValue, PrefixMachine, ProfileEntry,
};

type RefineFn = dyn Fn(u32) -> Result<DyadicInterval> + Send + Sync;

/// Where the bits of a real come from.
#[derive(Clone)]
pub enum BitSource {
    Exact(Rational),
    /// A real known through enclosures that tighten with precision.
    Enclosure {
        name: String,
        refine: Arc<RefineFn>,
        max_prec: u32,
    },
}

impl BitSource {
    pub fn exact(value: Rational) -> Self {
        Self::Exact(value)
    }

    pub fn enclosure(
        name: impl Into<String>,
        max_prec: u32,
        refine: impl Fn(u32) -> Result<DyadicInterval> + Send + Sync + 'static,
    ) -> Self {
        Self::Enclosure {
            name: name.into(),
            refine: Arc::new(refine),
            max_prec,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Self::Exact(r) => format!("{r}"),
            Self::Enclosure { name, .. } => name.clone(),
        }
    }
}

impl fmt::Debug for BitSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exact(r) => f.debug_tuple("Exact").field(r).finish(),
            Self::Enclosure { name, max_prec, .. } => f
                .debug_struct("Enclosure")
                .field("name", name)
                .field("max_prec", max_prec)
                .finish_non_exhaustive(),
        }
    }
}

/// The low `n` bits of `k` (most significant first).
fn low_bits(k: &BigInt, n: usize) -> BitString {
    let bytes = k.magnitude();
    BitString::from_bits((0..n as u64).rev().map(|i| bytes.bit(i)).collect())
}

/// `⌊x·2^n⌋`
fn scaled_floor(x: &Rational, n: usize) -> BigInt {
    (x.numer() << n).div_floor(x.denom())
}

/// `α↾n`: the first `n` bits of the fractional part of `α`, using the
/// expansion with infinitely many zeros. `None` when an enclosure source
/// cannot separate the prefix from a dyadic boundary within `max_prec`.
pub fn rest_bits(src: &BitSource, n: usize) -> Option<BitString> {
    let modulus = BigInt::one() << n;
    match src {
        BitSource::Exact(x) => Some(low_bits(&scaled_floor(x, n).mod_floor(&modulus), n)),
        BitSource::Enclosure {
            refine, max_prec, ..
        } => {
            let mut prec = (n as u32).saturating_add(8);
            loop {
                let iv = refine(prec.min(*max_prec)).ok()?;
                let lo = scaled_floor(&iv.lo_rational(), n);
                let hi = scaled_floor(&iv.hi_rational(), n);
                if lo == hi {
                    return Some(low_bits(&lo.mod_floor(&modulus), n));
                }
                if prec >= *max_prec {
                    return None;
                }
                prec = prec.saturating_mul(2);
            }
        }
    }
}

/// `n ↦ H(α↾n)` for `n = 1..=nmax` by brute-force search capped at `lmax`.
pub fn complexity_profile(
    machine: &PrefixMachine,
    src: &BitSource,
    nmax: usize,
    lmax: u32,
) -> ComplexityProfile {
    let entries = (1..=nmax)
        .map(|n| {
            let prefix = rest_bits(src, n);
            let h = prefix
                .as_ref()
                .map_or(HValue::Unknown, |p| brute_force_h(machine, p, lmax).into());
            ProfileEntry { n, prefix, h }
        })
        .collect();
    ComplexityProfile {
        subject: src.describe(),
        machine_id: machine.id().into(),
        search_limit: lmax,
        entries,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Check {
    Pass,
    Fail,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeakChaitinReport {
    /// Verdict of `Tn − c ≤ H(α↾n)` per `n`.
    pub verdicts: Vec<(usize, Check)>,
    /// `min_n H(α↾n) − Tn` over the known entries; the best `c` is its negation.
    pub witness: Option<Rational>,
    pub first_failure: Option<usize>,
}

fn require_profile(profile: &ComplexityProfile) -> Result<()> {
    if profile.entries.is_empty() {
        return Err(Error::InvalidParameter("profile is empty".into()));
    }
    Ok(())
}

fn require_nonnegative(t: &Rational) -> Result<()> {
    if t.is_negative() {
        return Err(Error::InvalidParameter(format!(
            "T = {t} must be non-negative"
        )));
    }
    Ok(())
}

fn int(n: usize) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Weak Chaitin `T`-randomness on a finite profile: `Tn − c ≤ H(α↾n)`.
/// `T` is any non-negative rational here.
pub fn weak_chaitin_t_check(
    profile: &ComplexityProfile,
    t: &Rational,
    c: &Rational,
) -> Result<WeakChaitinReport> {
    require_profile(profile)?;
    require_nonnegative(t)?;
    let mut witness: Option<Rational> = None;
    let verdicts: Vec<(usize, Check)> = profile
        .entries
        .iter()
        .map(|e| match e.h.known() {
            None => (e.n, Check::Unknown),
            Some(h) => {
                let gap = int(h as usize) - t * int(e.n);
                let pass = &gap + c >= Rational::zero();
                witness = Some(match witness.take() {
                    Some(w) if w <= gap => w,
                    _ => gap,
                });
                (e.n, if pass { Check::Pass } else { Check::Fail })
            }
        })
        .collect();
    let first_failure = verdicts
        .iter()
        .find(|(_, v)| *v == Check::Fail)
        .map(|(n, _)| *n);
    Ok(WeakChaitinReport {
        verdicts,
        witness,
        first_failure,
    })
}

pub const DEFAULT_SLACK: (i64, i64) = (1, 8);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompressibilityTrend {
    pub ratios: Vec<(usize, Rational)>,
    pub window: usize,
    /// Largest `H(α↾n)/n` among the last `window` entries.
    pub window_max: Option<Rational>,
    pub slack: Rational,
    /// `window_max ≤ T + slack`; `None` when the window holds no known entry.
    pub consistent: Option<bool>,
}

/// Ratios `H(α↾n)/n` and the tail-window maximum compared with `T + slack`.
/// `window` defaults to half the profile length.
pub fn t_compressibility_trend(
    profile: &ComplexityProfile,
    t: &Rational,
    slack: &Rational,
    window: Option<usize>,
) -> Result<CompressibilityTrend> {
    require_profile(profile)?;
    require_nonnegative(t)?;
    let nmax = profile.entries.iter().map(|e| e.n).max().unwrap_or(0);
    let window = window.unwrap_or(nmax / 2).max(1);
    let ratios: Vec<(usize, Rational)> = profile
        .known()
        .map(|(n, h)| (n, Rational::new(BigInt::from(h), BigInt::from(n))))
        .collect();
    let window_max = ratios
        .iter()
        .filter(|(n, _)| n + window > nmax)
        .map(|(_, r)| r)
        .max()
        .cloned();
    let consistent = window_max.as_ref().map(|m| *m <= t + slack);
    Ok(CompressibilityTrend {
        ratios,
        window,
        window_max,
        slack: slack.clone(),
        consistent,
    })
}

/// `H(α↾n) − Tn` per `n`; `None` where `H` is unknown.
pub fn chaitin_t_trend(
    profile: &ComplexityProfile,
    t: &Rational,
) -> Vec<(usize, Option<Rational>)> {
    profile
        .entries
        .iter()
        .map(|e| (e.n, e.h.known().map(|h| int(h as usize) - t * int(e.n))))
        .collect()
}

/// Finite surrogate of `liminf H(α↾n)/n`: the minimum ratio over the last
/// `window` known entries.
pub fn dimension_estimate(profile: &ComplexityProfile, window: usize) -> Result<Option<Rational>> {
    if window == 0 || profile.entries.len() < window {
        return Err(Error::InvalidParameter(format!(
            "window {window} needs at least that many profile entries, found {}",
            profile.entries.len()
        )));
    }
    let known: Vec<(usize, u32)> = profile.known().collect();
    Ok(known
        .iter()
        .rev()
        .take(window)
        .map(|&(n, h)| Rational::new(BigInt::from(h), BigInt::from(n)))
        .min())
}

/// A finitely presented Martin-Löf `T`-test: level `n` holds the set `C_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MLTTest {
    pub temperature: Temperature,
    pub levels: BTreeMap<u32, BTreeSet<BitString>>,
}

impl MLTTest {
    pub fn new(
        temperature: Temperature,
        pairs: impl IntoIterator<Item = (u32, BitString)>,
    ) -> Result<Self> {
        let mut levels: BTreeMap<u32, BTreeSet<BitString>> = BTreeMap::new();
        for (n, s) in pairs {
            if n == 0 {
                return Err(Error::InvalidParameter(format!(
                    "test level must be positive (string {s})"
                )));
            }
            levels.entry(n).or_default().insert(s);
        }
        Ok(Self {
            temperature,
            levels,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelValidation {
    pub level: u32,
    pub verdict: Check,
    /// Exact level sum when every `T|s|` is an integer.
    pub exact: Option<Rational>,
    pub enclosure: DyadicInterval,
}

/// Checks `Σ_{s ∈ C_n} 2^(-T|s|) ≤ 2^-n` level by level.
pub fn ml_t_test_validate(test: &MLTTest, prec: u32) -> Result<Vec<LevelValidation>> {
    if prec == 0 {
        return Err(Error::ZeroPrecision);
    }
    let t = test.temperature.value();
    test.levels
        .iter()
        .map(|(&level, strings)| {
            let bound = pow2(-i64::from(level));
            let exponents: Vec<Rational> = strings.iter().map(|s| -(t * int(s.len()))).collect();
            if exponents.iter().all(|e| e.is_integer()) {
                let exact: Rational = exponents
                    .iter()
                    .map(|e| two_pow_interval(e, prec).map(|iv| iv.lo_rational()))
                    .sum::<Result<Rational>>()?;
                let verdict = if exact <= bound {
                    Check::Pass
                } else {
                    Check::Fail
                };
                return Ok(LevelValidation {
                    level,
                    verdict,
                    enclosure: DyadicInterval::enclose(&exact, prec),
                    exact: Some(exact),
                });
            }
            let mut sum = DyadicInterval::zero(prec);
            for e in &exponents {
                sum = sum.add(&two_pow_interval(e, prec)?);
            }
            let verdict = if sum.hi_rational() <= bound {
                Check::Pass
            } else if sum.lo_rational() > bound {
                Check::Fail
            } else {
                Check::Unknown
            };
            Ok(LevelValidation {
                level,
                verdict,
                exact: None,
                enclosure: sum,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelHits {
    pub level: u32,
    /// Every `k ≤ kmax` with `α↾k ∈ C_n`.
    pub hits: Vec<usize>,
    /// Prefix lengths whose bits were undetermined.
    pub unknown: Vec<usize>,
}

/// Which prefixes `α↾k`, `k ≤ kmax`, fall in each requested level.
/// Finite evidence only. Refuses tests with a failing level.
pub fn ml_t_test_member(
    test: &MLTTest,
    src: &BitSource,
    levels: &[u32],
    kmax: usize,
    prec: u32,
) -> Result<Vec<LevelHits>> {
    if let Some(bad) = ml_t_test_validate(test, prec)?
        .iter()
        .find(|v| v.verdict == Check::Fail)
    {
        return Err(Error::InvalidParameter(format!(
            "level {} violates the measure condition; not a Martin-Löf T-test",
            bad.level
        )));
    }
    let prefixes: Vec<Option<BitString>> = (1..=kmax).map(|k| rest_bits(src, k)).collect();
    let empty = BTreeSet::new();
    Ok(levels
        .iter()
        .map(|&level| {
            let set = test.levels.get(&level).unwrap_or(&empty);
            let mut hits = Vec::new();
            let mut unknown = Vec::new();
            for (i, p) in prefixes.iter().enumerate() {
                match p {
                    Some(p) if set.contains(p) => hits.push(i + 1),
                    Some(_) => {}
                    None => unknown.push(i + 1),
                }
            }
            LevelHits {
                level,
                hits,
                unknown,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    fn bs(s: &str) -> BitString {
        BitString::parse(s).unwrap()
    }

    fn ceil_half(nmax: usize) -> ComplexityProfile {
        let values: Vec<Option<u32>> = (1..=nmax).map(|n| Some(n.div_ceil(2) as u32)).collect();
        ComplexityProfile::from_values("ceil(n/2)", &values)
    }

    fn identity(nmax: usize) -> ComplexityProfile {
        let values: Vec<Option<u32>> = (1..=nmax).map(|n| Some(n as u32)).collect();
        ComplexityProfile::from_values("n", &values)
    }

    #[test]
    fn bits_of_rationals() {
        assert_eq!(rest_bits(&BitSource::exact(q(5, 8)), 6), Some(bs("101000")));
        assert_eq!(rest_bits(&BitSource::exact(q(0, 1)), 3), Some(bs("000")));
        assert_eq!(rest_bits(&BitSource::exact(q(1, 3)), 4), Some(bs("0101")));
        // Only the fractional part counts, and negatives wrap.
        assert_eq!(rest_bits(&BitSource::exact(q(21, 8)), 3), Some(bs("101")));
        assert_eq!(rest_bits(&BitSource::exact(q(-3, 8)), 3), Some(bs("101")));
    }

    #[test]
    fn bits_from_enclosures() {
        let src = BitSource::enclosure("1/3", 256, |p| Ok(DyadicInterval::enclose(&q(1, 3), p)));
        assert_eq!(rest_bits(&src, 8), Some(bs("01010101")));
        // A dyadic value approached from both sides never separates.
        let src = BitSource::enclosure("1/2±", 64, |p| {
            DyadicInterval::enclose_range(
                &(q(1, 2) - pow2(-i64::from(p))),
                &(q(1, 2) + pow2(-i64::from(p))),
                p,
            )
        });
        assert_eq!(rest_bits(&src, 4), None);
    }

    #[test]
    fn profiles() {
        let toy =
            PrefixMachine::from_pairs("toy3", &[("0", ""), ("10", "0"), ("110", "1")]).unwrap();
        let p = complexity_profile(&toy, &BitSource::exact(q(0, 1)), 1, 24);
        assert_eq!(p.entries[0].h, HValue::Known(2));
        let empty = crate::machine::build_universal("empty", &[]);
        let p = complexity_profile(&empty, &BitSource::exact(q(5, 8)), 4, 24);
        assert!(p.entries.iter().all(|e| e.h == HValue::Unknown));
        assert!(complexity_profile(&toy, &BitSource::exact(q(0, 1)), 0, 24)
            .entries
            .is_empty());
    }

    #[test]
    fn weak_chaitin_examples() {
        let p = ceil_half(12);
        let r = weak_chaitin_t_check(&p, &q(3, 4), &q(9, 1)).unwrap();
        assert!(r.verdicts.iter().all(|(_, v)| *v == Check::Pass));
        let r = weak_chaitin_t_check(&p, &q(0, 1), &q(0, 1)).unwrap();
        assert!(r.verdicts.iter().all(|(_, v)| *v == Check::Pass));
        // Oracle: first n with 3n/4 − 1 > ⌈n/2⌉.
        let oracle = (1..=12usize)
            .find(|&n| q(3 * n as i64, 4) - q(1, 1) > q(n.div_ceil(2) as i64, 1))
            .unwrap();
        let r = weak_chaitin_t_check(&p, &q(3, 4), &q(1, 1)).unwrap();
        assert_eq!(r.first_failure, Some(oracle));
        assert_eq!(oracle, 6);
        // min_n ⌈n/2⌉ − 3n/4 over n ≤ 12 is 6 − 9 = −3.
        assert_eq!(r.witness, Some(q(-3, 1)));
    }

    #[test]
    fn compressibility_examples() {
        let one = q(1, 1);
        let slack = q(1, 8);
        let t = t_compressibility_trend(&identity(16), &one, &slack, None).unwrap();
        assert!(t.ratios.iter().all(|(_, r)| *r == one));
        assert_eq!(t.consistent, Some(true));
        let t = t_compressibility_trend(&ceil_half(40), &q(1, 2), &slack, None).unwrap();
        assert_eq!(t.consistent, Some(true));
        let t = t_compressibility_trend(&identity(16), &q(1, 2), &slack, None).unwrap();
        assert_eq!(t.consistent, Some(false));
    }

    #[test]
    fn chaitin_trend_examples() {
        let d = chaitin_t_trend(&identity(6), &q(1, 2));
        assert!(d.windows(2).all(|w| w[0].1 < w[1].1));
        let d = chaitin_t_trend(&ceil_half(9), &q(1, 2));
        assert!(d.iter().all(|(_, v)| {
            let v = v.clone().unwrap();
            v == q(0, 1) || v == q(1, 2)
        }));
        let empty = ComplexityProfile::from_values("empty", &[]);
        assert!(chaitin_t_trend(&empty, &q(1, 2)).is_empty());
    }

    #[test]
    fn dimension_examples() {
        assert_eq!(dimension_estimate(&identity(10), 5).unwrap(), Some(q(1, 1)));
        let est = dimension_estimate(&ceil_half(21), 7).unwrap().unwrap();
        assert!(est >= q(1, 2) && est <= q(1, 2) + q(1, 2 * 15));
        let values: Vec<Option<u32>> = (1..=20usize)
            .map(|n| {
                Some(if n % 2 == 0 {
                    n as u32
                } else {
                    n.div_ceil(2) as u32
                })
            })
            .collect();
        let alt = ComplexityProfile::from_values("alt", &values);
        let est = dimension_estimate(&alt, 10).unwrap().unwrap();
        assert_eq!(est, q(10, 19));
        let unknown = ComplexityProfile::from_values("u", &[None, None, None]);
        assert_eq!(dimension_estimate(&unknown, 2).unwrap(), None);
        assert!(dimension_estimate(&unknown, 4).is_err());
    }

    fn zeros_test(levels: u32) -> MLTTest {
        MLTTest::new(
            Temperature::new(q(1, 2)).unwrap(),
            (1..=levels).map(|n| (n, BitString::zeros(2 * n as usize))),
        )
        .unwrap()
    }

    #[test]
    fn ml_test_validation() {
        let v = ml_t_test_validate(&zeros_test(5), 32).unwrap();
        assert!(v
            .iter()
            .all(|l| l.verdict == Check::Pass && l.exact.is_some()));
        let bad = MLTTest::new(
            Temperature::new(q(1, 2)).unwrap(),
            [(1, bs("0")), (1, bs("1"))],
        )
        .unwrap();
        let v = ml_t_test_validate(&bad, 32).unwrap();
        assert_eq!(v[0].verdict, Check::Fail);
        let empty = MLTTest::new(Temperature::one(), []).unwrap();
        assert!(ml_t_test_validate(&empty, 32).unwrap().is_empty());
        assert!(MLTTest::new(Temperature::one(), [(0, bs("1"))]).is_err());
    }

    #[test]
    fn ml_test_membership() {
        let test = zeros_test(4);
        let hits =
            ml_t_test_member(&test, &BitSource::exact(q(0, 1)), &[1, 2, 3, 4], 10, 32).unwrap();
        for h in &hits {
            assert_eq!(h.hits, [2 * h.level as usize]);
        }
        let t = MLTTest::new(Temperature::new(q(1, 2)).unwrap(), [(1, bs("111"))]).unwrap();
        let hits = ml_t_test_member(&t, &BitSource::exact(q(5, 8)), &[1], 6, 32).unwrap();
        assert!(hits[0].hits.is_empty());
        let empty = MLTTest::new(Temperature::one(), []).unwrap();
        let hits = ml_t_test_member(&empty, &BitSource::exact(q(0, 1)), &[1], 6, 32).unwrap();
        assert!(hits[0].hits.is_empty());
        let bad = MLTTest::new(
            Temperature::new(q(1, 2)).unwrap(),
            [(1, bs("0")), (1, bs("1"))],
        )
        .unwrap();
        assert!(ml_t_test_member(&bad, &BitSource::exact(q(0, 1)), &[1], 4, 32).is_err());
    }
}
