//! Computable increasing sequences of rationals and their `T`-sums
//! `Σ (a_{n+1} − a_n)^T`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{
    exact_cmp, exact_mul, exact_sub, pow_interval, Dyadic, DyadicInterval, Rational, Temperature,
};

type TermFn = dyn Fn(usize) -> Rational + Send + Sync;

#[derive(Clone)]
enum Family {
    /// `a_n = L(1 − ρ^n)`
    Geometric {
        limit: Rational,
        ratio: Rational,
        dyadic: Option<(Dyadic, Dyadic)>,
    },
    /// `a_0 = 0`, `a_{n+1} − a_n = (n+1)^-s`
    PowerLaw {
        exponent: u32,
    },
    /// A finite list of terms.
    Terms(Arc<[Rational]>),
    Custom(Arc<TermFn>),
}

/// A lazily materialized, strictly increasing sequence of rationals.
///
/// Terms are cached on first access and strictness is checked as they
/// arrive. An optional tail bound `n ↦ (limit − a_n)` upper bound makes
/// limit enclosures available.
#[derive(Clone)]
pub struct IncreasingSequence {
    name: String,
    family: Family,
    tail: Option<Arc<TermFn>>,
    cache: Vec<Rational>,
    /// `L − a_n` for the last cached term of a dyadic geometric sequence.
    gap: Option<Dyadic>,
}

impl fmt::Debug for IncreasingSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IncreasingSequence")
            .field("name", &self.name)
            .field("materialized", &self.cache.len())
            .field("tail_bound", &self.tail.is_some())
            .finish()
    }
}

impl IncreasingSequence {
    /// `a_n = L(1 − ρ^n)` with `L > 0` and `0 < ρ < 1`; limit `L`.
    pub fn geometric(limit: Rational, ratio: Rational) -> Result<Self> {
        if !limit.is_positive() {
            return Err(Error::InvalidParameter(format!(
                "geometric limit {limit} must be positive"
            )));
        }
        if !ratio.is_positive() || ratio >= Rational::one() {
            return Err(Error::InvalidParameter(format!(
                "geometric ratio {ratio} must lie in (0, 1)"
            )));
        }
        let tail_limit = limit.clone();
        let tail_ratio = ratio.clone();
        Ok(Self {
            name: format!("geom:{limit},{ratio}"),
            family: Family::Geometric {
                dyadic: Dyadic::try_from_rational(&limit).zip(Dyadic::try_from_rational(&ratio)),
                limit,
                ratio,
            },
            tail: Some(Arc::new(move |n| {
                &tail_limit * num_traits::pow(tail_ratio.clone(), n)
            })),
            cache: Vec::new(),
            gap: None,
        })
    }

    /// Partial sums of `k^-s`: `a_0 = 0`, increments `(n+1)^-s`, `s >= 1`.
    /// A tail bound exists for `s >= 2`.
    pub fn power_law(exponent: u32) -> Result<Self> {
        if exponent == 0 {
            return Err(Error::InvalidParameter(
                "power-law exponent must be at least 1".into(),
            ));
        }
        let tail: Option<Arc<TermFn>> = (exponent >= 2).then(|| {
            let s = BigInt::from(exponent);
            let s1 = BigInt::from(exponent - 1);
            // Σ_{k>n} k^-s ≤ ∫_n^∞ x^-s dx = n^(1−s)/(s−1), and s/(s−1) at n = 0.
            Arc::new(move |n: usize| {
                if n == 0 {
                    Rational::new(s.clone(), s1.clone())
                } else {
                    Rational::new(
                        BigInt::one(),
                        &s1 * num_traits::pow(BigInt::from(n), (exponent - 1) as usize),
                    )
                }
            }) as Arc<TermFn>
        });
        Ok(Self {
            name: format!("powerlaw:{exponent}"),
            family: Family::PowerLaw { exponent },
            tail,
            cache: Vec::new(),
            gap: None,
        })
    }

    /// A finite sequence. Indices past the end report [`Error::Exhausted`].
    pub fn from_terms(name: impl Into<String>, terms: Vec<Rational>) -> Self {
        Self {
            name: name.into(),
            family: Family::Terms(terms.into()),
            tail: None,
            cache: Vec::new(),
            gap: None,
        }
    }

    pub fn custom(
        name: impl Into<String>,
        term: impl Fn(usize) -> Rational + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            family: Family::Custom(Arc::new(term)),
            tail: None,
            cache: Vec::new(),
            gap: None,
        }
    }

    /// Attach an upper bound `n ↦ limit − a_n`.
    pub fn with_tail_bound(
        mut self,
        tail: impl Fn(usize) -> Rational + Send + Sync + 'static,
    ) -> Self {
        self.tail = Some(Arc::new(tail));
        self
    }

    /// A copy with the same generator and an empty cache.
    pub fn fresh(&self) -> Self {
        Self {
            cache: Vec::new(),
            gap: None,
            ..self.clone()
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rename(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Number of terms for finite sequences.
    pub fn len_hint(&self) -> Option<usize> {
        match &self.family {
            Family::Terms(t) => Some(t.len()),
            _ => None,
        }
    }

    pub fn has_tail_bound(&self) -> bool {
        self.tail.is_some()
    }

    pub fn tail_bound(&self, n: usize) -> Option<Rational> {
        self.tail.as_ref().map(|t| t(n))
    }

    pub fn materialized(&self) -> &[Rational] {
        &self.cache
    }

    fn generate(&self, n: usize) -> Result<Rational> {
        let prev = n.checked_sub(1).map(|k| &self.cache[k]);
        Ok(match (&self.family, prev) {
            (Family::Geometric { .. }, None) | (Family::PowerLaw { .. }, None) => Rational::zero(),
            (Family::Geometric { limit, ratio, .. }, Some(p)) => {
                exact_sub(limit, &exact_mul(&exact_sub(limit, p), ratio))
            }
            (Family::PowerLaw { exponent }, Some(p)) => {
                p + Rational::new(
                    BigInt::one(),
                    num_traits::pow(BigInt::from(n), *exponent as usize),
                )
            }
            (Family::Terms(terms), _) => terms.get(n).cloned().ok_or(Error::Exhausted {
                requested: n,
                available: terms.len(),
            })?,
            (Family::Custom(f), _) => f(n),
        })
    }

    /// Materializes `a_0..=a_n`, checking strict monotonicity.
    pub fn prefix(&mut self, n: usize) -> Result<&[Rational]> {
        while self.cache.len() <= n {
            let k = self.cache.len();
            let term = match &self.family {
                Family::Geometric {
                    dyadic: Some((l, rho)),
                    ..
                } => {
                    let gap = match &self.gap {
                        Some(g) if k > 0 => g * rho,
                        _ => l.clone(),
                    };
                    let term = (l - &gap).to_rational();
                    self.gap = Some(gap);
                    term
                }
                _ => self.generate(k)?,
            };
            if let Some(prev) = self.cache.last() {
                if exact_cmp(&term, prev).is_le() {
                    return Err(Error::NotIncreasing { index: k });
                }
            }
            self.cache.push(term);
        }
        Ok(&self.cache[..=n])
    }

    pub fn term(&mut self, n: usize) -> Result<Rational> {
        Ok(self.prefix(n)?[n].clone())
    }

    /// `a_{n+1} − a_n`
    pub fn increment(&mut self, n: usize) -> Result<Rational> {
        let p = self.prefix(n + 1)?;
        Ok(exact_sub(&p[n + 1], &p[n]))
    }

    /// A certified upper bound on the full `T`-sum `Σ_{n≥0} (a_{n+1} − a_n)^T`,
    /// where one is known in closed form.
    pub fn t_sum_upper_bound(&mut self, t: &Temperature, prec: u32) -> Result<Option<Rational>> {
        if t.is_one() {
            if let Some(tail) = self.tail_bound(0) {
                return Ok(Some(tail));
            }
        }
        let tv = t.value();
        match self.family.clone() {
            Family::Geometric { limit, ratio, .. } => {
                // Δ_n = L(1−ρ)ρ^n, so the sum is (L(1−ρ))^T / (1 − ρ^T).
                let head = pow_interval(&(&limit * (Rational::one() - &ratio)), tv, prec)?;
                let rho_t = pow_interval(&ratio, tv, prec)?;
                let denom = Rational::one() - rho_t.hi_rational();
                Ok(denom.is_positive().then(|| head.hi_rational() / denom))
            }
            Family::PowerLaw { exponent } => {
                // Σ_{k≥1} k^-σ ≤ σ/(σ−1) for σ = sT > 1.
                let sigma = Rational::from_integer(BigInt::from(exponent)) * tv;
                Ok((sigma > Rational::one()).then(|| &sigma / (&sigma - Rational::one())))
            }
            Family::Terms(terms) => {
                let n = terms.len().saturating_sub(1);
                if n == 0 {
                    return Ok(Some(Rational::zero()));
                }
                let sum = t_sum_partial(self, t, n, prec)?;
                Ok(Some(sum.upper()))
            }
            // limit − a_0 ≤ tail(0)
            Family::Custom(_) => Ok(if t.is_one() { self.tail_bound(0) } else { None }),
        }
    }
}

/// `(u, v)` with `t = u/v`, as machine integers.
fn exponent_parts(t: &Rational) -> Option<(u32, u32)> {
    Some((t.numer().to_u32()?, t.denom().to_u32()?))
}

/// `x^t` when it is rational, i.e. numerator and denominator of `x^u` are
/// perfect `v`-th powers.
pub fn exact_pow(x: &Rational, t: &Rational) -> Option<Rational> {
    if x.is_negative() || !t.is_positive() {
        return None;
    }
    let (u, v) = exponent_parts(t)?;
    let num = num_traits::pow(x.numer().clone(), u as usize);
    let den = num_traits::pow(x.denom().clone(), u as usize);
    let root = |n: &BigInt| {
        let r = n.nth_root(v);
        (num_traits::pow(r.clone(), v as usize) == *n).then_some(r)
    };
    Some(Rational::new(root(&num)?, root(&den)?))
}

/// Enclosure of `x^t`, plus its exact value when rational.
pub fn power_term(
    x: &Rational,
    t: &Rational,
    prec: u32,
) -> Result<(DyadicInterval, Option<Rational>)> {
    if let Some(exact) = exact_pow(x, t) {
        return Ok((DyadicInterval::enclose(&exact, prec), Some(exact)));
    }
    Ok((pow_interval(x, t, prec)?, None))
}

/// Running `Σ x_n^T` with an exact value kept while every term is rational.
#[derive(Clone, Debug)]
pub(crate) struct PowerSum {
    interval: DyadicInterval,
    exact: Option<Rational>,
    terms: usize,
}

impl PowerSum {
    pub(crate) fn new(prec: u32) -> Self {
        Self {
            interval: DyadicInterval::zero(prec),
            exact: Some(Rational::zero()),
            terms: 0,
        }
    }

    pub(crate) fn push(&mut self, x: &Rational, t: &Rational, prec: u32) -> Result<()> {
        let (iv, exact) = power_term(x, t, prec)?;
        self.interval = self.interval.add(&iv);
        self.exact = match (self.exact.take(), exact) {
            (Some(acc), Some(e)) => Some(acc + e),
            _ => None,
        };
        self.terms += 1;
        Ok(())
    }

    pub(crate) fn finish(self) -> TSum {
        let partial_sum = match &self.exact {
            Some(e) => DyadicInterval::enclose(e, self.interval.prec()),
            None => self.interval,
        };
        TSum {
            partial_sum,
            exact: self.exact,
            terms_used: self.terms,
        }
    }
}

/// A finite `T`-sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TSum {
    pub partial_sum: DyadicInterval,
    /// The exact sum when every term `Δ^T` is rational.
    pub exact: Option<Rational>,
    pub terms_used: usize,
}

impl TSum {
    /// Certified lower bound.
    pub fn lower(&self) -> Rational {
        self.exact
            .clone()
            .unwrap_or_else(|| self.partial_sum.lo_rational())
    }

    /// Certified upper bound.
    pub fn upper(&self) -> Rational {
        self.exact
            .clone()
            .unwrap_or_else(|| self.partial_sum.hi_rational())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TVerdict {
    BoundedSoFar {
        bound: Rational,
    },
    /// The certified lower bound of the first `at_index` terms exceeds `bound`.
    ExceededBound {
        bound: Rational,
        at_index: usize,
    },
}

/// `T`-convergence evidence for a finite prefix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TSumReport {
    pub sum: TSum,
    pub verdict: TVerdict,
}

impl TSumReport {
    pub fn is_bounded(&self) -> bool {
        matches!(self.verdict, TVerdict::BoundedSoFar { .. })
    }
}

/// Enclosure of `Σ_{n<N} (a_{n+1} − a_n)^T`; width at most `N · 2^-prec`.
pub fn t_sum_partial(
    seq: &mut IncreasingSequence,
    t: &Temperature,
    terms: usize,
    prec: u32,
) -> Result<TSum> {
    if terms == 0 {
        return Err(Error::InvalidParameter(
            "a T-sum needs at least one term".into(),
        ));
    }
    if prec == 0 {
        return Err(Error::ZeroPrecision);
    }
    seq.prefix(terms)?;
    if t.is_one() {
        let a = seq.materialized();
        let exact = &a[terms] - &a[0];
        return Ok(TSum {
            partial_sum: DyadicInterval::enclose(&exact, prec),
            exact: Some(exact),
            terms_used: terms,
        });
    }
    let mut sum = PowerSum::new(prec);
    for n in 0..terms {
        let a = seq.materialized();
        let delta = &a[n + 1] - &a[n];
        sum.push(&delta, t.value(), prec)?;
    }
    Ok(sum.finish())
}

/// Adds terms one at a time and stops as soon as the certified lower
/// bound of the partial sum strictly exceeds `bound`.
pub fn t_convergence_probe(
    seq: &mut IncreasingSequence,
    t: &Temperature,
    bound: &Rational,
    max_terms: usize,
    prec: u32,
) -> Result<TSumReport> {
    if !bound.is_positive() {
        return Err(Error::InvalidParameter(format!(
            "bound {bound} must be positive"
        )));
    }
    if prec == 0 {
        return Err(Error::ZeroPrecision);
    }
    let mut sum = PowerSum::new(prec);
    for n in 0..max_terms {
        let delta = seq.increment(n)?;
        sum.push(&delta, t.value(), prec)?;
        let lower = match &sum.exact {
            Some(e) => e.clone(),
            None => sum.interval.lo_rational(),
        };
        if lower > *bound {
            return Ok(TSumReport {
                sum: sum.finish(),
                verdict: TVerdict::ExceededBound {
                    bound: bound.clone(),
                    at_index: n + 1,
                },
            });
        }
    }
    Ok(TSumReport {
        sum: sum.finish(),
        verdict: TVerdict::BoundedSoFar {
            bound: bound.clone(),
        },
    })
}

/// `Σ x^T` over explicit positive terms.
pub fn t_power_sum(terms: &[Rational], t: &Temperature, prec: u32) -> Result<TSum> {
    if prec == 0 {
        return Err(Error::ZeroPrecision);
    }
    let mut sum = PowerSum::new(prec);
    for x in terms {
        sum.push(x, t.value(), prec)?;
    }
    Ok(sum.finish())
}

/// Attaches a verdict against `bound` to a finished sum.
pub fn bounded_report(sum: TSum, bound: &Rational) -> TSumReport {
    let verdict = if sum.lower() > *bound {
        TVerdict::ExceededBound {
            bound: bound.clone(),
            at_index: sum.terms_used,
        }
    } else {
        TVerdict::BoundedSoFar {
            bound: bound.clone(),
        }
    };
    TSumReport { sum, verdict }
}

/// `[a_N, a_N + tail(N)]`, rounded outward to the `2^-prec` grid.
pub fn limit_enclosure(
    seq: &mut IncreasingSequence,
    n: usize,
    prec: u32,
) -> Result<DyadicInterval> {
    let tail = seq
        .tail_bound(n)
        .ok_or(Error::Unsupported("sequence has no tail bound"))?;
    let a = seq.term(n)?;
    let hi = &a + tail;
    DyadicInterval::enclose_range(&a, &hi, prec)
}
