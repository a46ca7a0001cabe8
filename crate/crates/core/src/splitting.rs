//! The decomposition `α = β + qγ` built from a `T`-convergent `{c_n}`.
//!
//! Given increasing `{a_n} → α` and `{c_n} → γ` with `c_0 = 0`, and
//! `q = rε` such that `a_{n+1} − a_n > q(c_{n+1} − c_n)`, the terms
//! `b_n = a_{n+1} − a_n − q(c_{n+1} − c_n)` are positive and
//! `a_N = a_0 + Σ_{n<N} b_n + q(c_N − c_0)` holds exactly for every `N`.

use alloc::format;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{pow2, two_pow_interval, Dyadic, DyadicInterval, Rational, Temperature};
use crate::reducibility::Verdict;
use crate::sequences::{t_power_sum, IncreasingSequence, TSum, TSumReport};

/// Largest `k` tried for `ε = 2^-k`.
pub const MAX_EPSILON_BITS: u32 = 4096;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsilonChoice {
    pub epsilon: Rational,
    /// `ε = 2^-k`
    pub k: u32,
    /// Certified upper bound of `Σ (c_{n+1} − c_n)^T`.
    pub t_sum_bound: Rational,
    /// Upper bound of `ε^T · t_sum_bound`; at most one.
    pub product_upper: Rational,
    /// `Σ_{n<max_terms} (ε(c_{n+1} − c_n))^T`, a finite check of the same inequality.
    pub scaled_partial: TSum,
}

/// Smallest `k` such that `(2^-k)^T` times a certified bound of the
/// `T`-sum of `{c_n}` is at most one.
pub fn epsilon_search(
    c_seq: &mut IncreasingSequence,
    t: &Temperature,
    max_terms: usize,
    prec: u32,
) -> Result<EpsilonChoice> {
    if !c_seq.term(0)?.is_zero() {
        return Err(Error::InvalidParameter(format!(
            "{} must start at c_0 = 0",
            c_seq.name()
        )));
    }
    let bound = c_seq.t_sum_upper_bound(t, prec)?.ok_or(Error::Unsupported(
        "no certified T-sum bound for this sequence",
    ))?;
    let one = Rational::one();
    let mut choice = None;
    for k in 0..=MAX_EPSILON_BITS {
        let e = -Rational::from_integer(BigInt::from(k)) * t.value();
        let eps_t = two_pow_interval(&e, prec)?;
        let product = eps_t.hi_rational() * &bound;
        if product <= one {
            choice = Some((k, product));
            break;
        }
    }
    let (k, product_upper) =
        choice.ok_or(Error::Unsupported("T-sum bound too large for ε search"))?;
    let epsilon = pow2(-i64::from(k));
    let scaled: Vec<Rational> = (0..max_terms)
        .map(|n| c_seq.increment(n).map(|d| d * &epsilon))
        .collect::<Result<_>>()?;
    let scaled_partial = t_power_sum(&scaled, t, prec)?;
    Ok(EpsilonChoice {
        epsilon,
        k,
        t_sum_bound: bound,
        product_upper,
        scaled_partial,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitResult {
    pub q: Rational,
    pub a0: Rational,
    /// `b_0..b_{N-1}`, all positive.
    pub b_prefix: Vec<Rational>,
    pub identity_checked_to: usize,
    /// `a_N − (a_0 + Σ_{n<N} b_n + q(c_N − c_0))`
    pub residual: Rational,
    /// The identity held exactly at every `M ≤ N`.
    pub all_residuals_zero: bool,
    /// `a_0 + Σ_{n<N} b_n`, a lower bound of `β`.
    pub beta_lower: Rational,
    pub beta_nonnegative: bool,
    /// Enclosure of `β` when both sequences carry tail bounds.
    pub beta_enclosure: Option<DyadicInterval>,
}

type SplitCore = (Vec<Rational>, Rational, Rational, bool);

/// The loop over integers scaled by a common denominator `S`, so only the
/// outputs need reducing.
fn split_rational(a: &[Rational], c: &[Rational], q: &Rational) -> Result<SplitCore> {
    let d = a
        .iter()
        .chain(c)
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let s = &d * q.denom();
    let ai: Vec<BigInt> = a.iter().map(|x| x.numer() * (&s / x.denom())).collect();
    // `q·c_i·S`
    let ci: Vec<BigInt> = c
        .iter()
        .map(|x| q.numer() * x.numer() * (&d / x.denom()))
        .collect();
    let scaled = |x: BigInt| Rational::new(x, s.clone());
    let mut b_prefix = Vec::with_capacity(a.len() - 1);
    let mut partial = ai[0].clone();
    let mut all_zero = true;
    let mut residual = BigInt::zero();
    for k in 0..a.len() - 1 {
        let increment = &ai[k + 1] - &ai[k];
        let demand = &ci[k + 1] - &ci[k];
        let b = &increment - &demand;
        if !b.is_positive() {
            return Err(Error::NotPositive {
                index: k,
                increment: scaled(increment),
                demand: scaled(demand),
            });
        }
        partial += &b;
        b_prefix.push(scaled(b));
        residual = &ai[k + 1] - &partial - (&ci[k + 1] - &ci[0]);
        all_zero &= residual.is_zero();
    }
    Ok((b_prefix, scaled(partial), scaled(residual), all_zero))
}

/// The same loop carried out in dyadic arithmetic, when every input is dyadic.
fn split_dyadic(a: &[Rational], c: &[Rational], q: &Rational) -> Option<Result<SplitCore>> {
    let conv = |xs: &[Rational]| {
        xs.iter()
            .map(Dyadic::try_from_rational)
            .collect::<Option<Vec<_>>>()
    };
    let a = conv(a)?;
    let c = conv(c)?;
    let q = Dyadic::try_from_rational(q)?;
    let mut b_prefix = Vec::with_capacity(a.len() - 1);
    let mut partial = a[0].clone();
    let mut all_zero = true;
    let mut residual = Dyadic::zero();
    for k in 0..a.len() - 1 {
        let increment = &a[k + 1] - &a[k];
        let demand = &q * &(&c[k + 1] - &c[k]);
        let b = &increment - &demand;
        if b.is_negative() || b.is_zero() {
            return Some(Err(Error::NotPositive {
                index: k,
                increment: increment.to_rational(),
                demand: demand.to_rational(),
            }));
        }
        partial = &partial + &b;
        b_prefix.push(b.to_rational());
        let drift = &q * &(&c[k + 1] - &c[0]);
        residual = &a[k + 1] - &(&partial + &drift);
        all_zero &= residual.is_zero();
    }
    Some(Ok((
        b_prefix,
        partial.to_rational(),
        residual.to_rational(),
        all_zero,
    )))
}

/// Builds `b_n` for `n < N` and verifies the telescoping identity exactly.
pub fn split_sequences(
    a_seq: &mut IncreasingSequence,
    c_seq: &mut IncreasingSequence,
    r: &Rational,
    epsilon: &Rational,
    n: usize,
    prec: u32,
) -> Result<SplitResult> {
    if !r.is_positive() {
        return Err(Error::InvalidParameter(format!("r = {r} must be positive")));
    }
    if !epsilon.is_positive() {
        return Err(Error::InvalidParameter(format!(
            "ε = {epsilon} must be positive"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    let q = r * epsilon;
    let a = a_seq.prefix(n)?.to_vec();
    let c = c_seq.prefix(n)?.to_vec();
    if !c[0].is_zero() {
        return Err(Error::InvalidParameter(format!(
            "{} must start at c_0 = 0",
            c_seq.name()
        )));
    }

    let (b_prefix, partial, residual, all_zero) = match split_dyadic(&a, &c, &q) {
        Some(r) => r?,
        None => split_rational(&a, &c, &q)?,
    };

    let beta_enclosure = match (a_seq.tail_bound(n), c_seq.tail_bound(n)) {
        (Some(ta), Some(_)) => {
            // β = a_0 + Σ_{all n} b_n, and the unseen terms sum to at most α − a_N.
            let hi = &partial + ta;
            Some(DyadicInterval::enclose_range(&partial, &hi, prec)?)
        }
        _ => None,
    };
    Ok(SplitResult {
        q,
        a0: a[0].clone(),
        b_prefix,
        identity_checked_to: n,
        residual,
        all_residuals_zero: all_zero,
        beta_nonnegative: !partial.is_negative(),
        beta_lower: partial,
        beta_enclosure,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KsReport {
    /// `a_{n+1} − a_n > q·d_n` per index.
    pub per_index: Vec<bool>,
    pub first_failure: Option<usize>,
    /// `a_0 > α − ε₀`, decided against the enclosure of `α`.
    pub start_condition: Verdict,
}

impl KsReport {
    pub fn holds(&self) -> bool {
        self.first_failure.is_none() && self.start_condition == Verdict::Holds
    }
}

/// Checks `a_{n+1} − a_n > q·d_n` for `n < N` and `a_0 > α − ε₀`, given
/// evidence that `Σ d_n^T ≤ 1`.
pub fn ks_condition_check(
    a_seq: &mut IncreasingSequence,
    d_seq: &[Rational],
    q: &Rational,
    eps0: &Rational,
    alpha: &DyadicInterval,
    evidence: Option<&TSumReport>,
    n: usize,
) -> Result<KsReport> {
    if !q.is_positive() {
        return Err(Error::InvalidParameter(format!("q = {q} must be positive")));
    }
    match evidence {
        None => {
            return Err(Error::MissingEvidence(
                "Σ d_n^T ≤ 1 was not supplied".into(),
            ))
        }
        Some(r) if !r.is_bounded() || r.sum.upper() > Rational::one() => {
            return Err(Error::MissingEvidence(
                "supplied T-sum of d_n is not bounded by 1".into(),
            ))
        }
        Some(_) => {}
    }
    if d_seq.len() < n {
        return Err(Error::Exhausted {
            requested: n,
            available: d_seq.len(),
        });
    }
    if let Some(i) = d_seq.iter().position(|d| !d.is_positive()) {
        return Err(Error::InvalidParameter(format!(
            "d_{i} = {} must be positive",
            d_seq[i]
        )));
    }
    let a = a_seq.prefix(n)?;
    let per_index: Vec<bool> = (0..n).map(|k| &a[k + 1] - &a[k] > q * &d_seq[k]).collect();
    let first_failure = per_index.iter().position(|ok| !ok);
    let start_condition = if a[0] > alpha.hi_rational() - eps0 {
        Verdict::Holds
    } else if a[0] <= alpha.lo_rational() - eps0 {
        Verdict::Fails
    } else {
        Verdict::Unknown
    };
    Ok(KsReport {
        per_index,
        first_failure,
        start_condition,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KsFailureReason {
    /// Even the limit of the base sequence cannot meet the demand.
    TailTooSmall,
    /// No qualifying index up to the search horizon.
    HorizonExhausted,
    /// The base sequence ran out of terms.
    SequenceExhausted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KsExtraction {
    /// `n_0 < n_1 < …` with `a_{n_{k+1}} − a_{n_k} > q·d_k`.
    pub indices: Vec<usize>,
    pub failure: Option<(usize, KsFailureReason)>,
}

/// Greedy search for a subsequence of `base` whose increments beat
/// `q·d_k`: each `n_{k+1}` is the first index past `n_k` that qualifies.
/// Failure is part of the result, not an error.
pub fn ks_extract(
    base: &mut IncreasingSequence,
    d_seq: &[Rational],
    q: &Rational,
    horizon: usize,
) -> Result<KsExtraction> {
    if !q.is_positive() {
        return Err(Error::InvalidParameter(format!("q = {q} must be positive")));
    }
    let mut indices = alloc::vec![0usize];
    for (k, d) in d_seq.iter().enumerate() {
        let current = *indices.last().expect("non-empty");
        let target = base.term(current)? + q * d;
        if let Some(tail) = base.tail_bound(current) {
            if base.term(current)? + tail <= target {
                return Ok(KsExtraction {
                    indices,
                    failure: Some((k, KsFailureReason::TailTooSmall)),
                });
            }
        }
        let mut next = None;
        for m in current + 1..=horizon {
            match base.term(m) {
                Ok(a) if a > target => {
                    next = Some(m);
                    break;
                }
                Ok(_) => {}
                Err(Error::Exhausted { .. }) => {
                    return Ok(KsExtraction {
                        indices,
                        failure: Some((k, KsFailureReason::SequenceExhausted)),
                    })
                }
                Err(e) => return Err(e),
            }
        }
        match next {
            Some(m) => indices.push(m),
            None => {
                return Ok(KsExtraction {
                    indices,
                    failure: Some((k, KsFailureReason::HorizonExhausted)),
                })
            }
        }
    }
    Ok(KsExtraction {
        indices,
        failure: None,
    })
}
