//! Worker pools for the brute-force searches. Results never depend on the
//! number of workers: searches keep the first hit in program order and
//! profiles are collected in index order.

use omegalab_core::machine::{
    search_lengths, search_range, ComplexityProfile, HValue, ProfileEntry,
};
use omegalab_core::randomness::{rest_bits, BitSource};
use omegalab_core::{BitString, PrefixMachine};
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

const CHUNK: u64 = 1 << 12;

/// A pool with `workers` threads; zero picks the rayon default.
pub fn pool(workers: usize) -> ThreadPool {
    ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool")
}

/// Shortest, then lexicographically first, program of length at most
/// `lmax` that outputs `s`, searching each length in parallel chunks.
pub fn shortest_program(
    pool: &ThreadPool,
    machine: &PrefixMachine,
    s: &BitString,
    lmax: u32,
) -> Option<BitString> {
    pool.install(|| {
        search_lengths(machine, lmax).find_map(|len| {
            let total = 1u64 << len;
            let chunks = total.div_ceil(CHUNK);
            (0..chunks)
                .into_par_iter()
                .find_map_first(|c| {
                    let start = c * CHUNK;
                    search_range(machine, s, len, start..(start + CHUNK).min(total))
                })
                .map(|v| BitString::from_packed(len, v))
        })
    })
}

pub fn brute_force_h(
    pool: &ThreadPool,
    machine: &PrefixMachine,
    s: &BitString,
    lmax: u32,
) -> Option<u32> {
    shortest_program(pool, machine, s, lmax).map(|p| p.len() as u32)
}

/// `n ↦ H(α↾n)` for `n = 1..=nmax`, one search per `n` on the pool.
pub fn complexity_profile(
    pool: &ThreadPool,
    machine: &PrefixMachine,
    src: &BitSource,
    nmax: usize,
    lmax: u32,
) -> ComplexityProfile {
    let entries = pool.install(|| {
        (1..=nmax)
            .into_par_iter()
            .map(|n| {
                let prefix = rest_bits(src, n);
                let h = prefix.as_ref().map_or(HValue::Unknown, |p| {
                    omegalab_core::machine::brute_force_h(machine, p, lmax).into()
                });
                ProfileEntry { n, prefix, h }
            })
            .collect()
    });
    ComplexityProfile {
        subject: src.describe(),
        machine_id: machine.id().into(),
        search_limit: lmax,
        entries,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use omegalab_core::machine::build_universal;
    use omegalab_core::randomness;
    use omegalab_core::Rational;

    #[test]
    fn matches_sequential() {
        let a =
            PrefixMachine::from_pairs("a", &[("0", "1"), ("10", "10"), ("110", "101")]).unwrap();
        let b =
            PrefixMachine::from_pairs("b", &[("00", "1"), ("01", "0"), ("1", "101000")]).unwrap();
        let u = build_universal("U", &[a, b]);
        let src = BitSource::exact(Rational::new(5.into(), 8.into()));
        let seq = randomness::complexity_profile(&u, &src, 8, 12);
        for workers in [1, 3] {
            let p = pool(workers);
            assert_eq!(complexity_profile(&p, &u, &src, 8, 12), seq);
            for e in &seq.entries {
                let s = e.prefix.as_ref().unwrap();
                assert_eq!(
                    shortest_program(&p, &u, s, 12),
                    omegalab_core::machine::shortest_program(&u, s, 12)
                );
            }
        }
    }
}
