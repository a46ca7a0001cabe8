//! Lower approximations of the generalized halting probability
//! `Ω_V(T) = Σ_{p ∈ Dom V} 2^(-|p|/T)`.
//!
//! Programs are taken in dovetailed discovery order. The `i`-th term is
//! enclosed at `prec + i + ⌈|p|/T⌉ + 1` bits, which keeps its lower endpoint
//! strictly positive, so the emitted lower bounds are strictly increasing
//! rationals.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{
    two_pow_interval, weight_exponent, Dyadic, DyadicInterval, Rational, Temperature,
};
use crate::machine::{enumerate_domain, BitString, PrefixMachine};
use crate::sequences::{IncreasingSequence, TSum, TSumReport, TVerdict};

/// Validates a temperature for `Ω_V(T)`: values above one diverge.
pub fn omega_temperature(t: &Rational) -> Result<Temperature> {
    if *t > Rational::one() {
        return Err(Error::DivergentParameter(t.clone()));
    }
    Temperature::new(t.clone())
}

/// Enclosure of `2^(-len/T)` for the term discovered at `index`.
pub fn term_enclosure(
    len: usize,
    t: &Temperature,
    prec: u32,
    index: usize,
) -> Result<DyadicInterval> {
    let e = weight_exponent(len as u64, t);
    let magnitude = Integer::div_ceil(&-e.numer().clone(), e.denom());
    let extra = magnitude
        .to_u32()
        .ok_or(Error::Unsupported("program weight exponent too large"))?;
    let index =
        u32::try_from(index).map_err(|_| Error::Unsupported("discovery index too large"))?;
    two_pow_interval(&e, prec + index + extra + 1)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OmegaApproximation {
    pub machine_id: String,
    pub temperature: Temperature,
    pub budget: u64,
    pub prec: u32,
    /// `Σ_{j≤i} lo(2^(-|p_j|/T))`, one per discovered program.
    pub lower_bounds: Vec<Rational>,
    pub program_lengths: Vec<usize>,
    /// Width of the enclosure of each partial sum.
    pub widths: Vec<Dyadic>,
    /// Enclosure of `Ω_V(T)` itself, present when the domain was fully enumerated.
    pub enclosure: Option<DyadicInterval>,
    /// Exact Kraft sum `Σ 2^-|p|` of the discovered programs.
    pub kraft_sum: Rational,
}

impl OmegaApproximation {
    pub fn final_bound(&self) -> Rational {
        self.lower_bounds
            .last()
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// The bounds as a sequence `0, b_0, b_1, …`, with a tail bound when
    /// the enclosure is known.
    pub fn to_sequence(&self) -> IncreasingSequence {
        let mut terms = Vec::with_capacity(self.lower_bounds.len() + 1);
        terms.push(Rational::zero());
        terms.extend(self.lower_bounds.iter().cloned());
        let name = alloc::format!("omega:{},{}", self.machine_id, self.temperature);
        let seq = IncreasingSequence::from_terms(name, terms.clone());
        match &self.enclosure {
            Some(enc) => {
                let hi = enc.hi_rational();
                seq.with_tail_bound(move |n| {
                    let a = terms.get(n).unwrap_or_else(|| terms.last().unwrap());
                    &hi - a
                })
            }
            None => seq,
        }
    }
}

/// Lower bounds of `Ω_V(T)` along the dovetailed enumeration.
pub fn omega_lower(
    machine: &PrefixMachine,
    t: &Rational,
    budget: u64,
    prec: u32,
) -> Result<OmegaApproximation> {
    let temperature = omega_temperature(t)?;
    if prec == 0 {
        return Err(Error::ZeroPrecision);
    }
    let enumeration = enumerate_domain(machine, budget)?;
    let mut lower = Rational::zero();
    let mut sum = DyadicInterval::zero(prec);
    let mut approx = OmegaApproximation {
        machine_id: machine.id().into(),
        temperature,
        budget,
        prec,
        lower_bounds: Vec::with_capacity(enumeration.events.len()),
        program_lengths: Vec::with_capacity(enumeration.events.len()),
        widths: Vec::with_capacity(enumeration.events.len()),
        enclosure: None,
        kraft_sum: enumeration
            .kraft_trace
            .last()
            .cloned()
            .unwrap_or_else(Rational::zero),
    };
    for (i, event) in enumeration.events.iter().enumerate() {
        let len = event.program.len();
        let term = term_enclosure(len, &approx.temperature, prec, i)?;
        debug_assert!(!term.lo().is_zero());
        lower += term.lo_rational();
        sum = sum.add(&term);
        approx.lower_bounds.push(lower.clone());
        approx.program_lengths.push(len);
        approx.widths.push(sum.width());
    }
    if enumeration.complete {
        approx.enclosure = Some(sum);
    }
    Ok(approx)
}

/// `T`-convergence of the partial sums `Σ_{j≤i} 2^(-|p_j|/T)`.
///
/// The increments are `2^(-|p|/T)` and their `T`-th powers are `2^-|p|`, so
/// the `T`-sum is the exact Kraft sum of the discovered programs. The
/// identity is checked on exponents, not through intervals.
pub fn omega_t_convergence_report(
    machine: &PrefixMachine,
    t: &Rational,
    budget: u64,
    prec: u32,
) -> Result<TSumReport> {
    let approx = omega_lower(machine, t, budget, prec)?;
    let temperature = &approx.temperature;
    let mut exact = Rational::zero();
    for &len in &approx.program_lengths {
        // (2^(-|p|/T))^T = 2^(-|p|/T · T)
        let e = weight_exponent(len as u64, temperature) * temperature.value();
        debug_assert_eq!(e, -Rational::from_integer(BigInt::from(len)));
        let e = e
            .to_integer()
            .to_i64()
            .ok_or(Error::Unsupported("program length exceeds 64 bits"))?;
        exact += crate::exactnum::pow2(e);
    }
    let one = Rational::one();
    let verdict = if exact > one {
        TVerdict::ExceededBound {
            bound: one,
            at_index: approx.program_lengths.len(),
        }
    } else {
        TVerdict::BoundedSoFar { bound: one }
    };
    Ok(TSumReport {
        sum: TSum {
            partial_sum: DyadicInterval::enclose(&exact, prec),
            exact: Some(exact),
            terms_used: approx.program_lengths.len(),
        },
        verdict,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MPowerApproximation {
    pub machine_id: String,
    pub temperature: Temperature,
    /// Non-decreasing lower bounds of `Σ_s 2^(-H(s)/T)`, one per event.
    pub lower_bounds: Vec<Rational>,
    /// Best program length found per output.
    pub best: BTreeMap<BitString, usize>,
}

impl MPowerApproximation {
    pub fn final_bound(&self) -> Rational {
        self.lower_bounds
            .last()
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// `Σ_s 2^-H(s)` over the discovered outputs, exactly.
    pub fn semimeasure_mass(&self) -> Rational {
        self.best
            .values()
            .map(|&len| crate::exactnum::pow2(-(len as i64)))
            .sum()
    }
}

/// Lower bounds of `Σ_s m(s)^(1/T)` with `m(s) = 2^-H(s)`, using the
/// shortest program found so far for each output (programs longer than
/// `lmax` are ignored).
///
/// Every bound is a sub-sum of the matching [`omega_lower`] bound: both
/// use the same per-event term enclosures.
pub fn sum_m_power(
    machine: &PrefixMachine,
    t: &Rational,
    budget: u64,
    lmax: u32,
    prec: u32,
) -> Result<MPowerApproximation> {
    let temperature = omega_temperature(t)?;
    if prec == 0 {
        return Err(Error::ZeroPrecision);
    }
    let enumeration = enumerate_domain(machine, budget)?;
    let mut best: BTreeMap<BitString, (usize, Rational)> = BTreeMap::new();
    let mut total = Rational::zero();
    let mut lower_bounds = Vec::with_capacity(enumeration.events.len());
    for (i, event) in enumeration.events.iter().enumerate() {
        let len = event.program.len();
        if len <= lmax as usize {
            let improves = best.get(&event.output).is_none_or(|(l, _)| len < *l);
            if improves {
                let lo = term_enclosure(len, &temperature, prec, i)?.lo_rational();
                if let Some((_, old)) = best.insert(event.output.clone(), (len, lo.clone())) {
                    total -= old;
                }
                total += lo;
            }
        }
        lower_bounds.push(total.clone());
    }
    Ok(MPowerApproximation {
        machine_id: machine.id().into(),
        temperature,
        lower_bounds,
        best: best.into_iter().map(|(s, (len, _))| (s, len)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    fn toy3() -> PrefixMachine {
        PrefixMachine::from_pairs("toy3", &[("0", ""), ("10", "0"), ("110", "1")]).unwrap()
    }

    #[test]
    fn toy_machine_exact_values() {
        let a = omega_lower(&toy3(), &q(1, 1), 100, 32).unwrap();
        assert_eq!(a.final_bound(), q(7, 8));
        assert_eq!(a.lower_bounds, [q(1, 2), q(3, 4), q(7, 8)]);
        assert!(a.enclosure.as_ref().unwrap().is_point());
        let a = omega_lower(&toy3(), &q(1, 2), 100, 32).unwrap();
        assert_eq!(a.final_bound(), q(21, 64));
        assert!(omega_lower(&toy3(), &q(1, 2), 0, 32)
            .unwrap()
            .lower_bounds
            .is_empty());
    }

    #[test]
    fn temperature_errors() {
        assert_eq!(
            omega_lower(&toy3(), &q(3, 2), 10, 32).unwrap_err(),
            Error::DivergentParameter(q(3, 2))
        );
        assert!(matches!(
            omega_lower(&toy3(), &q(0, 1), 10, 32),
            Err(Error::TemperatureOutOfRange(_))
        ));
    }

    #[test]
    fn irrational_terms_stay_increasing_and_enclosed() {
        let a = omega_lower(&toy3(), &q(2, 3), 100, 20).unwrap();
        assert!(a.lower_bounds.windows(2).all(|w| w[0] < w[1]));
        let enc = a.enclosure.clone().unwrap();
        assert!(enc.lo_rational() <= a.final_bound());
        // 2^-1.5 + 2^-3 + 2^-4.5 = 0.52274756...
        assert!(enc.lo_rational() <= q(5_227_476, 10_000_000));
        assert!(enc.hi_rational() >= q(5_227_475, 10_000_000));
        assert!(enc.width_at_most(18));
    }

    #[test]
    fn t_convergence_report_is_exact() {
        let r = omega_t_convergence_report(&toy3(), &q(1, 2), 100, 32).unwrap();
        assert_eq!(r.sum.exact, Some(q(7, 8)));
        assert_eq!(r.verdict, TVerdict::BoundedSoFar { bound: q(1, 1) });
        let complete = PrefixMachine::from_pairs("c", &[("0", ""), ("1", "")]).unwrap();
        let r = omega_t_convergence_report(&complete, &q(1, 1), 10, 32).unwrap();
        assert_eq!(r.sum.exact, Some(q(1, 1)));
        assert!(r.is_bounded());
    }

    #[test]
    fn m_power_sums() {
        let m = sum_m_power(&toy3(), &q(1, 1), 100, 24, 32).unwrap();
        assert_eq!(m.final_bound(), q(7, 8));
        let m = sum_m_power(&toy3(), &q(1, 2), 100, 24, 32).unwrap();
        assert_eq!(m.final_bound(), q(21, 64));
        let dup = PrefixMachine::from_pairs("dup", &[("0", ""), ("10", "")]).unwrap();
        let m = sum_m_power(&dup, &q(1, 1), 100, 24, 32).unwrap();
        assert_eq!(m.final_bound(), q(1, 2));
        assert_eq!(
            omega_lower(&dup, &q(1, 1), 100, 32).unwrap().final_bound(),
            q(3, 4)
        );
        assert_eq!(m.semimeasure_mass(), q(1, 2));
    }

    #[test]
    fn lower_sequence_has_tail() {
        let a = omega_lower(&toy3(), &q(1, 1), 100, 32).unwrap();
        let mut s = a.to_sequence();
        assert_eq!(s.term(3).unwrap(), q(7, 8));
        assert_eq!(s.tail_bound(1), Some(q(3, 8)));
    }
}
