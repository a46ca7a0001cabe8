//! Domination between r.e. reals presented as increasing sequences.
//!
//! `α` dominates `β` through `{a_n}`, `{b_n}` and `c` when
//! `c(α − a_n) ≥ β − b_n` for every `n`. Limits are only known through
//! enclosures, so each index gets a three-valued verdict.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{DyadicInterval, Rational};
use crate::machine::{brute_force_h, PrefixMachine};
use crate::randomness::{rest_bits, BitSource};
use crate::sequences::{limit_enclosure, IncreasingSequence, TSumReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Holds,
    Fails,
    Unknown,
}

#[derive(Clone, Debug)]
pub struct DominationInstance {
    pub a_seq: IncreasingSequence,
    pub b_seq: IncreasingSequence,
    pub alpha: Option<DyadicInterval>,
    pub beta: Option<DyadicInterval>,
    pub c: u64,
}

fn enclosures<'a>(
    alpha: Option<&'a DyadicInterval>,
    beta: Option<&'a DyadicInterval>,
) -> Result<(&'a DyadicInterval, &'a DyadicInterval)> {
    match (alpha, beta) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(Error::Unsupported(
            "domination needs enclosures of both limits",
        )),
    }
}

fn verdict_at(
    c: &Rational,
    alpha: &DyadicInterval,
    beta: &DyadicInterval,
    a_n: &Rational,
    b_n: &Rational,
) -> Verdict {
    if c * (alpha.lo_rational() - a_n) >= beta.hi_rational() - b_n {
        Verdict::Holds
    } else if c * (alpha.hi_rational() - a_n) < beta.lo_rational() - b_n {
        Verdict::Fails
    } else {
        Verdict::Unknown
    }
}

/// Verdicts of `c(α − a_n) ≥ β − b_n` for `n < indices`.
pub fn domination_check(inst: &mut DominationInstance, indices: usize) -> Result<Vec<Verdict>> {
    if indices == 0 {
        return Err(Error::InvalidParameter("need at least one index".into()));
    }
    if inst.c == 0 {
        return Err(Error::InvalidParameter(
            "domination constant must be positive".into(),
        ));
    }
    let (alpha, beta) = enclosures(inst.alpha.as_ref(), inst.beta.as_ref())?;
    let c = Rational::from_integer(BigInt::from(inst.c));
    let a = inst.a_seq.prefix(indices - 1)?;
    let b = inst.b_seq.prefix(indices - 1)?;
    Ok(a.iter()
        .zip(b)
        .map(|(a_n, b_n)| verdict_at(&c, alpha, beta, a_n, b_n))
        .collect())
}

/// Smallest `c` in `1..=c_max` for which every index `n < indices` holds.
///
/// Holding at `n` is `c · (α_lo − a_n) ≥ β_hi − b_n`, monotone in `c`, so
/// the answer is the largest per-index threshold.
pub fn find_domination_constant(
    a_seq: &mut IncreasingSequence,
    b_seq: &mut IncreasingSequence,
    alpha: Option<&DyadicInterval>,
    beta: Option<&DyadicInterval>,
    indices: usize,
    c_max: u64,
) -> Result<Option<u64>> {
    if c_max == 0 {
        return Err(Error::InvalidParameter("c_max must be at least 1".into()));
    }
    if indices == 0 {
        return Err(Error::InvalidParameter("need at least one index".into()));
    }
    let (alpha, beta) = enclosures(alpha, beta)?;
    let (alpha_lo, beta_hi) = (alpha.lo_rational(), beta.hi_rational());
    let a = a_seq.prefix(indices - 1)?;
    let b = b_seq.prefix(indices - 1)?;
    let mut needed = BigInt::from(1);
    for (a_n, b_n) in a.iter().zip(b) {
        let demand = &beta_hi - b_n;
        if !demand.is_positive() {
            continue;
        }
        let supply = &alpha_lo - a_n;
        if !supply.is_positive() {
            return Ok(None);
        }
        let ratio = demand / supply;
        let threshold = Integer::div_ceil(ratio.numer(), ratio.denom());
        if threshold > needed {
            needed = threshold;
        }
    }
    Ok(needed.to_u64().filter(|&c| c <= c_max))
}

/// A candidate dominated real together with its `T`-convergence evidence.
#[derive(Clone, Debug)]
pub struct FamilyMember {
    pub name: String,
    pub seq: IncreasingSequence,
    pub enclosure: Option<DyadicInterval>,
    pub evidence: Option<TSumReport>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MemberOutcome {
    /// Smallest passing constant within `c_max`, or `None`.
    Checked(Option<u64>),
    Rejected(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemberResult {
    pub name: String,
    pub outcome: MemberOutcome,
}

fn member_evidence(member: &FamilyMember) -> Option<String> {
    match &member.evidence {
        None => Some(format!(
            "{}: no T-convergence evidence supplied",
            member.name
        )),
        Some(r) if !r.is_bounded() => Some(format!(
            "{}: T-sum evidence exceeded its bound",
            member.name
        )),
        Some(_) => None,
    }
}

/// Evidence that `α` dominates each `T`-convergent member of a declared
/// family. This never proves the universally quantified property.
pub fn omega_t_likeness_check(
    alpha_seq: &mut IncreasingSequence,
    alpha: &DyadicInterval,
    family: &mut [FamilyMember],
    indices: usize,
    c_max: u64,
) -> Result<Vec<MemberResult>> {
    family
        .iter_mut()
        .map(|member| {
            let outcome = match member_evidence(member) {
                Some(reason) => MemberOutcome::Rejected(reason),
                None => MemberOutcome::Checked(find_domination_constant(
                    alpha_seq,
                    &mut member.seq,
                    Some(alpha),
                    member.enclosure.as_ref(),
                    indices,
                    c_max,
                )?),
            };
            Ok(MemberResult {
                name: member.name.clone(),
                outcome,
            })
        })
        .collect()
}

/// Sequence-level variant: limits come from each sequence's own tail bound
/// at index `indices`, enclosed at `prec` bits.
pub fn t_universality_check(
    a_seq: &mut IncreasingSequence,
    family: &mut [FamilyMember],
    indices: usize,
    c_max: u64,
    prec: u32,
) -> Result<Vec<MemberResult>> {
    let alpha = limit_enclosure(a_seq, indices, prec)?;
    family
        .iter_mut()
        .map(|member| {
            let outcome = match member_evidence(member) {
                Some(reason) => MemberOutcome::Rejected(reason),
                None => {
                    let beta = limit_enclosure(&mut member.seq, indices, prec)?;
                    MemberOutcome::Checked(find_domination_constant(
                        a_seq,
                        &mut member.seq,
                        Some(&alpha),
                        Some(&beta),
                        indices,
                        c_max,
                    )?)
                }
            };
            Ok(MemberResult {
                name: member.name.clone(),
                outcome,
            })
        })
        .collect()
}

/// `H(β↾n) − H(α↾n)` for `n = 1..=nmax`; `None` where either side is unknown.
pub fn solovay_empirical(
    machine: &PrefixMachine,
    alpha: &BitSource,
    beta: &BitSource,
    nmax: usize,
    lmax: u32,
) -> Vec<Option<i64>> {
    let h = |src: &BitSource, n: usize| {
        rest_bits(src, n).and_then(|p| brute_force_h(machine, &p, lmax))
    };
    (1..=nmax)
        .map(|n| {
            let (ha, hb) = (h(alpha, n)?, h(beta, n)?);
            Some(i64::from(hb) - i64::from(ha))
        })
        .collect()
}

/// `max |d|` over known differences, zero when there are none.
pub fn max_abs_difference(diffs: &[Option<i64>]) -> i64 {
    diffs
        .iter()
        .flatten()
        .map(|d| d.abs())
        .max()
        .unwrap_or_else(Zero::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::pow2;
    use alloc::vec;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    fn point(r: Rational) -> DyadicInterval {
        DyadicInterval::enclose(&r, 64)
    }

    fn geom(rho: Rational) -> IncreasingSequence {
        IncreasingSequence::geometric(q(1, 1), rho).unwrap()
    }

    #[test]
    fn identity_holds() {
        let mut inst = DominationInstance {
            a_seq: geom(q(1, 2)),
            b_seq: geom(q(1, 2)),
            alpha: Some(point(q(1, 1))),
            beta: Some(point(q(1, 1))),
            c: 1,
        };
        assert!(domination_check(&mut inst, 30)
            .unwrap()
            .iter()
            .all(|v| *v == Verdict::Holds));
    }

    #[test]
    fn halving_holds() {
        let mut inst = DominationInstance {
            a_seq: geom(q(1, 3)),
            b_seq: IncreasingSequence::geometric(q(1, 2), q(1, 3)).unwrap(),
            alpha: Some(point(q(1, 1))),
            beta: Some(point(q(1, 2))),
            c: 1,
        };
        assert!(domination_check(&mut inst, 20)
            .unwrap()
            .iter()
            .all(|v| *v == Verdict::Holds));
    }

    #[test]
    fn fast_vs_slow_fails_after_three() {
        let mut inst = DominationInstance {
            a_seq: geom(q(1, 4)),
            b_seq: geom(q(1, 2)),
            alpha: Some(point(q(1, 1))),
            beta: Some(point(q(1, 1))),
            c: 8,
        };
        let v = domination_check(&mut inst, 12).unwrap();
        for (n, verdict) in v.iter().enumerate() {
            // Closed form: 8·4^-n < 2^-n iff 2^(3−2n) < 2^-n iff n > 3.
            let fails = pow2(3 - 2 * n as i64) < pow2(-(n as i64));
            assert_eq!(*verdict == Verdict::Fails, fails, "n = {n}");
            assert_eq!(*verdict == Verdict::Holds, !fails, "n = {n}");
        }
    }

    #[test]
    fn constants() {
        let one = point(q(1, 1));
        let c = find_domination_constant(
            &mut geom(q(1, 2)),
            &mut geom(q(1, 2)),
            Some(&one),
            Some(&one),
            20,
            10,
        )
        .unwrap();
        assert_eq!(c, Some(1));
        let half = point(q(1, 2));
        let c = find_domination_constant(
            &mut geom(q(1, 2)),
            &mut IncreasingSequence::geometric(q(1, 2), q(1, 2)).unwrap(),
            Some(&one),
            Some(&half),
            20,
            10,
        )
        .unwrap();
        assert_eq!(c, Some(1));
        // The per-index threshold is 2^n, so indices 0..=20 need 2^20 > 10^6.
        let c = find_domination_constant(
            &mut geom(q(1, 4)),
            &mut geom(q(1, 2)),
            Some(&one),
            Some(&one),
            21,
            1_000_000,
        )
        .unwrap();
        assert_eq!(c, None);
        let c = find_domination_constant(
            &mut geom(q(1, 4)),
            &mut geom(q(1, 2)),
            Some(&one),
            Some(&one),
            20,
            1_000_000,
        )
        .unwrap();
        assert_eq!(c, Some(1 << 19));
        assert!(find_domination_constant(
            &mut geom(q(1, 4)),
            &mut geom(q(1, 2)),
            None,
            Some(&one),
            5,
            5
        )
        .is_err());
    }

    #[test]
    fn likeness_rejects_members_without_evidence() {
        let one = point(q(1, 1));
        let mut family = vec![FamilyMember {
            name: "bare".into(),
            seq: geom(q(1, 2)),
            enclosure: Some(one.clone()),
            evidence: None,
        }];
        let r = omega_t_likeness_check(&mut geom(q(1, 2)), &one, &mut family, 10, 10).unwrap();
        assert!(matches!(r[0].outcome, MemberOutcome::Rejected(_)));
    }

    #[test]
    fn solovay_identity() {
        let m =
            PrefixMachine::from_pairs("m", &[("0", "1"), ("10", "10"), ("110", "101")]).unwrap();
        let src = BitSource::exact(q(5, 8));
        let d = solovay_empirical(&m, &src, &src, 3, 10);
        assert_eq!(d, [Some(0), Some(0), Some(0)]);
        assert_eq!(max_abs_difference(&d), 0);
    }
}
