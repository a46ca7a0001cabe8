use num_bigint::BigInt;
use num_traits::{One, Zero};
use omegalab_core::exactnum::{pow_interval, Rational, Temperature};
use omegalab_core::machine::{
    check_prefix_free, enumerate_domain, grow_prefix_code, kraft_check, BitString,
    ComplexityProfile, Entry, PrefixMachine,
};
use omegalab_core::omega::{omega_lower, sum_m_power};
use omegalab_core::randomness::{
    dimension_estimate, rest_bits, weak_chaitin_t_check, BitSource, Check,
};
use omegalab_core::sequences::IncreasingSequence;
use omegalab_core::splitting::split_sequences;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn code(seed: u64, leaves: usize) -> Vec<BitString> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    grow_prefix_code(leaves, 12, |n| rng.gen_range(0..n))
}

fn machine_from(id: &str, programs: &[BitString], seed: u64) -> PrefixMachine {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = programs
        .iter()
        .map(|p| {
            let out = BitString::from_packed(3, rng.gen_range(0..8));
            Entry::new(
                p.clone(),
                out.prefix(rng.gen_range(0..=3)),
                rng.gen_range(1..20),
            )
        })
        .collect();
    PrefixMachine::table(id, entries).unwrap()
}

fn rational() -> impl Strategy<Value = Rational> {
    (1i64..10_000, 1i64..10_000).prop_map(|(n, d)| q(n, d))
}

fn temperature() -> impl Strategy<Value = Rational> {
    (1i64..=12, 1i64..=12)
        .prop_filter_map("T must lie in (0, 1]", |(n, d)| (n <= d).then(|| q(n, d)))
}

proptest! {
    #[test]
    fn pow_interval_refines(x in rational(), tn in 1i64..12, td in 1i64..12, prec in 4u32..80) {
        let t = q(tn, td);
        let coarse = pow_interval(&x, &t, prec).unwrap();
        let fine = pow_interval(&x, &t, 2 * prec).unwrap();
        prop_assert!(coarse.width_at_most(prec));
        prop_assert!(fine.is_subset_of(&coarse));
    }

    #[test]
    fn generated_codes_are_prefix_free(seed in any::<u64>(), leaves in 1usize..40) {
        let c = code(seed, leaves);
        prop_assert!(check_prefix_free(&c).is_ok());
        prop_assert!(kraft_check(&c).unwrap().sum <= Rational::one());
    }

    #[test]
    fn injected_prefix_is_caught(seed in any::<u64>(), leaves in 2usize..40, pick in any::<prop::sample::Index>()) {
        let mut c = code(seed, leaves);
        let victim = c[pick.index(c.len())].clone();
        if victim.is_empty() {
            c.push(BitString::parse("0").unwrap());
        } else {
            c.push(victim.prefix(victim.len() - 1));
        }
        prop_assert!(check_prefix_free(&c).is_err());
        prop_assert!(kraft_check(&c).is_err());
    }

    #[test]
    fn omega_monotone_in_temperature(seed in any::<u64>(), t1 in temperature(), t2 in temperature()) {
        let (lo_t, hi_t) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let m = machine_from("gen", &code(seed, 12), seed);
        let a = omega_lower(&m, &lo_t, 64, 48).unwrap();
        let b = omega_lower(&m, &hi_t, 64, 48).unwrap();
        let (ea, eb) = (a.enclosure.unwrap(), b.enclosure.unwrap());
        prop_assert!(ea.lo_rational() <= eb.hi_rational());
        for w in a.lower_bounds.windows(2) {
            prop_assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn m_power_is_a_subsum(seed in any::<u64>(), t in temperature()) {
        let m = machine_from("gen", &code(seed, 16), seed);
        let omega = omega_lower(&m, &t, 64, 40).unwrap();
        let mp = sum_m_power(&m, &t, 64, 24, 40).unwrap();
        for (x, y) in mp.lower_bounds.iter().zip(&omega.lower_bounds) {
            prop_assert!(x <= y);
        }
        prop_assert!(mp.semimeasure_mass() <= Rational::one());
    }

    #[test]
    fn enumeration_kraft_trace_is_bounded(seed in any::<u64>(), budget in 1u64..40) {
        let m = machine_from("gen", &code(seed, 20), seed);
        let e = enumerate_domain(&m, budget).unwrap();
        for w in e.kraft_trace.windows(2) {
            prop_assert!(w[0] < w[1]);
        }
        prop_assert!(e.kraft_trace.last().is_none_or(|k| *k <= Rational::one()));
    }

    #[test]
    fn bits_extend(x in rational(), n in 0usize..64) {
        let src = BitSource::exact(x);
        let short = rest_bits(&src, n).unwrap();
        let long = rest_bits(&src, n + 1).unwrap();
        prop_assert_eq!(long.len(), n + 1);
        prop_assert!(short.is_prefix_of(&long));
    }

    #[test]
    fn threshold_coherence(values in prop::collection::vec(prop::option::of(1u32..40), 1..30), t in temperature()) {
        let profile = ComplexityProfile::from_values("p", &values);
        let known = profile.known().count();
        prop_assume!(known > 0);
        let est = dimension_estimate(&profile, known).unwrap().unwrap();
        prop_assume!(t < est);
        let report = weak_chaitin_t_check(&profile, &t, &Rational::zero()).unwrap();
        for ((n, h), (m, verdict)) in profile.known().zip(report.verdicts.iter().filter(|(_, v)| *v != Check::Unknown)) {
            prop_assert_eq!(n, *m);
            if q(h as i64, n as i64) >= est {
                prop_assert_eq!(*verdict, Check::Pass);
            }
        }
    }

    #[test]
    fn splitting_telescopes(
        l in 1i64..50,
        rho_a in 1i64..8,
        lc in 1i64..50,
        n in 1usize..60,
        k in 1u32..8,
    ) {
        // Same ratio for both, with Δc_n/Δa_n = lc/(64L) < 1 and q ≤ 1/2.
        let mut a = IncreasingSequence::geometric(q(l, 1), q(rho_a, 16)).unwrap();
        let mut c = IncreasingSequence::geometric(q(lc, 64), q(rho_a, 16)).unwrap();
        let eps = q(1, 1 << k);
        let r = split_sequences(&mut a, &mut c, &q(1, 1), &eps, n, 32).unwrap();
        prop_assert!(r.all_residuals_zero);
        prop_assert!(r.residual.is_zero());
        prop_assert!(r.b_prefix.iter().all(|b| *b > Rational::zero()));
    }
}

#[test]
fn temperature_rejects_out_of_range() {
    assert!(Temperature::new(q(0, 1)).is_err());
    assert!(Temperature::new(q(3, 2)).is_err());
    assert!(Temperature::new(q(1, 1)).is_ok());
}
