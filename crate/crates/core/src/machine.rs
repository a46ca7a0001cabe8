//! Prefix-free machines.
//!
//! A machine is a partial map from programs to outputs whose domain is
//! prefix-free. Three kinds exist: finite tables (every program halts after
//! its declared step count), generators (a possibly unbounded list of
//! declared programs), and the universal machine built from an ordered
//! family, which runs `0^i 1 p` as member `i` on `p`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{pow2, Rational};

/// A finite binary string. Ordered lexicographically, so a proper prefix
/// sorts before its extensions.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    /// Parses a string of `0`/`1`. The empty string, `λ` and `-` denote
    /// the empty bit string.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text == "λ" || text == "-" {
            return Ok(Self::new());
        }
        text.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::InvalidParameter(alloc::format!(
                    "not a bit string: {text:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn zeros(n: usize) -> Self {
        Self(alloc::vec![false; n])
    }

    /// `0^i 1`, the self-delimiting header selecting member `i`.
    pub fn header(i: usize) -> Self {
        let mut bits = alloc::vec![false; i];
        bits.push(true);
        Self(bits)
    }

    /// Big-endian packing: the first bit is the most significant.
    pub fn from_packed(len: u32, value: u64) -> Self {
        Self((0..len).rev().map(|k| (value >> k) & 1 == 1).collect())
    }

    pub fn packed(&self) -> Option<(u32, u64)> {
        if self.0.len() > 64 {
            return None;
        }
        let value = self
            .0
            .iter()
            .fold(0u64, |acc, &b| (acc << 1) | u64::from(b));
        Some((self.0.len() as u32, value))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut bits = self.0.clone();
        bits.extend_from_slice(&other.0);
        Self(bits)
    }

    pub fn prefix(&self, n: usize) -> Self {
        Self(self.0[..n].to_vec())
    }

    pub fn is_prefix_of(&self, other: &Self) -> bool {
        other.0.starts_with(&self.0)
    }

    /// `2^-|self|`, exactly.
    pub fn weight(&self) -> Rational {
        pow2(-(self.0.len() as i64))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("λ");
        }
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

/// One halting computation: `program` halts after `steps` steps with `output`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub program: BitString,
    pub output: BitString,
    pub steps: u64,
}

impl Entry {
    pub fn new(program: BitString, output: BitString, steps: u64) -> Self {
        Self {
            program,
            output,
            steps,
        }
    }
}

/// A machine presented as a list of declared programs.
///
/// `entry(i)` describes the `i`-th declared program, or `None` if it never
/// halts. `run` must agree with `entry` on every program.
pub trait ProgramGenerator: Send + Sync + fmt::Debug {
    /// Number of declared programs, `None` when unbounded.
    fn declared(&self) -> Option<usize>;
    fn entry(&self, index: usize) -> Option<Entry>;
    fn run(&self, program: &BitString) -> Option<Entry>;
}

type EntryFn = dyn Fn(usize) -> Option<Entry> + Send + Sync;
type RunFn = dyn Fn(&BitString) -> Option<Entry> + Send + Sync;

/// A [`ProgramGenerator`] from a pair of closures.
#[derive(Clone)]
pub struct FnGenerator {
    declared: Option<usize>,
    entry: Arc<EntryFn>,
    run: Arc<RunFn>,
}

impl FnGenerator {
    pub fn new(
        declared: Option<usize>,
        entry: impl Fn(usize) -> Option<Entry> + Send + Sync + 'static,
        run: impl Fn(&BitString) -> Option<Entry> + Send + Sync + 'static,
    ) -> Self {
        Self {
            declared,
            entry: Arc::new(entry),
            run: Arc::new(run),
        }
    }
}

impl fmt::Debug for FnGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnGenerator")
            .field("declared", &self.declared)
            .finish_non_exhaustive()
    }
}

impl ProgramGenerator for FnGenerator {
    fn declared(&self) -> Option<usize> {
        self.declared
    }

    fn entry(&self, index: usize) -> Option<Entry> {
        (self.entry)(index)
    }

    fn run(&self, program: &BitString) -> Option<Entry> {
        (self.run)(program)
    }
}

#[derive(Debug)]
struct Table {
    entries: Vec<Entry>,
    by_program: BTreeMap<BitString, usize>,
    by_packed: BTreeMap<(u32, u64), usize>,
    max_len: usize,
}

#[derive(Clone, Debug)]
enum Kind {
    Table(Arc<Table>),
    Generator(Arc<dyn ProgramGenerator>),
    Universal(Arc<[PrefixMachine]>),
}

/// A prefix-free machine. Cheap to clone and immutable once built.
#[derive(Clone, Debug)]
pub struct PrefixMachine {
    id: Arc<str>,
    kind: Kind,
}

impl PrefixMachine {
    /// A table machine. Entries keep their given order as declaration order.
    pub fn table(id: impl Into<String>, entries: Vec<Entry>) -> Result<Self> {
        if let Some(e) = entries.iter().find(|e| e.steps == 0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "program {} declares zero steps",
                e.program
            )));
        }
        let programs: Vec<BitString> = entries.iter().map(|e| e.program.clone()).collect();
        let kraft = kraft_check(&programs)?;
        if !kraft.ok {
            return Err(Error::KraftExceeded(kraft.sum));
        }
        let by_program = entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.program.clone(), i))
            .collect();
        let by_packed = entries
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.program.packed().map(|k| (k, i)))
            .collect();
        let max_len = entries.iter().map(|e| e.program.len()).max().unwrap_or(0);
        Ok(Self {
            id: id.into().into(),
            kind: Kind::Table(Arc::new(Table {
                entries,
                by_program,
                by_packed,
                max_len,
            })),
        })
    }

    /// Table machine from `(program, output)` pairs that halt in one step.
    pub fn from_pairs(id: impl Into<String>, pairs: &[(&str, &str)]) -> Result<Self> {
        let entries = pairs
            .iter()
            .map(|(p, o)| Ok(Entry::new(BitString::parse(p)?, BitString::parse(o)?, 1)))
            .collect::<Result<Vec<_>>>()?;
        Self::table(id, entries)
    }

    /// A generator-backed machine. Its prefix-freeness is checked during
    /// enumeration.
    pub fn generator(id: impl Into<String>, generator: impl ProgramGenerator + 'static) -> Self {
        Self {
            id: id.into().into(),
            kind: Kind::Generator(Arc::new(generator)),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Number of declared programs, `None` when unbounded.
    pub fn declared(&self) -> Option<usize> {
        match &self.kind {
            Kind::Table(t) => Some(t.entries.len()),
            Kind::Generator(g) => g.declared(),
            Kind::Universal(members) => {
                let m = members.len();
                members.iter().enumerate().try_fold(0usize, |acc, (i, c)| {
                    let count = c.declared()?;
                    Some(if count == 0 {
                        acc
                    } else {
                        acc.max((count - 1) * m + i + 1)
                    })
                })
            }
        }
    }

    /// The `index`-th declared program. Universal machines interleave their
    /// members round-robin: index `j·m + i` is member `i`'s `j`-th program.
    pub fn entry(&self, index: usize) -> Option<Entry> {
        match &self.kind {
            Kind::Table(t) => t.entries.get(index).cloned(),
            Kind::Generator(g) => g.entry(index),
            Kind::Universal(members) => {
                let m = members.len();
                if m == 0 {
                    return None;
                }
                let (i, j) = (index % m, index / m);
                members[i].entry(j).map(|e| Entry {
                    program: BitString::header(i).concat(&e.program),
                    ..e
                })
            }
        }
    }

    pub fn run(&self, program: &BitString) -> Option<Entry> {
        match &self.kind {
            Kind::Table(t) => t.by_program.get(program).map(|&i| t.entries[i].clone()),
            Kind::Generator(g) => g.run(program),
            Kind::Universal(members) => {
                let i = program.bits().iter().position(|&b| b)?;
                let member = members.get(i)?;
                let rest = BitString::from_bits(program.bits()[i + 1..].to_vec());
                member.run(&rest).map(|e| Entry {
                    program: program.clone(),
                    ..e
                })
            }
        }
    }

    /// Whether the packed program `(len, value)` halts with `target`.
    pub fn produces(&self, len: u32, value: u64, target: &BitString) -> bool {
        match &self.kind {
            Kind::Table(t) => t
                .by_packed
                .get(&(len, value))
                .is_some_and(|&i| t.entries[i].output == *target),
            Kind::Generator(g) => g
                .run(&BitString::from_packed(len, value))
                .is_some_and(|e| e.output == *target),
            Kind::Universal(members) => {
                if value == 0 {
                    return false;
                }
                let significant = 64 - value.leading_zeros();
                let zeros = (len - significant) as usize;
                let Some(member) = members.get(zeros) else {
                    return false;
                };
                let rest_len = significant - 1;
                let rest = value & ((1u64 << rest_len) - 1);
                member.produces(rest_len, rest, target)
            }
        }
    }

    /// Longest program in the domain, when the domain is a known finite set.
    pub fn max_program_len(&self) -> Option<usize> {
        match &self.kind {
            Kind::Table(t) => Some(t.max_len),
            Kind::Generator(_) => None,
            Kind::Universal(members) => {
                members.iter().enumerate().try_fold(0usize, |acc, (i, c)| {
                    Some(acc.max(c.max_program_len()? + i + 1))
                })
            }
        }
    }

    /// Family members of a universal machine.
    pub fn members(&self) -> Option<&[PrefixMachine]> {
        match &self.kind {
            Kind::Universal(m) => Some(m),
            _ => None,
        }
    }
}

/// Universal machine for an ordered family: `U(0^i 1 p) = C_i(p)`.
///
/// Every program of member `i` is simulated with exactly `i + 1` extra bits.
pub fn build_universal(id: impl Into<String>, family: &[PrefixMachine]) -> PrefixMachine {
    PrefixMachine {
        id: id.into().into(),
        kind: Kind::Universal(family.to_vec().into()),
    }
}

/// Finds the lexicographically first `(prefix, extension)` pair, if any.
/// A repeated program counts as a violation with itself.
pub fn check_prefix_free(programs: &[BitString]) -> Result<()> {
    let mut sorted: Vec<&BitString> = programs.iter().collect();
    sorted.sort();
    match sorted.windows(2).find(|w| w[0].is_prefix_of(w[1])) {
        Some(w) => Err(Error::PrefixViolation {
            prefix: w[0].clone(),
            extension: w[1].clone(),
        }),
        None => Ok(()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KraftReport {
    pub sum: Rational,
    pub ok: bool,
}

/// Exact `Σ 2^-|p|` over a prefix-free set, `ok` iff the sum is at most one.
pub fn kraft_check(programs: &[BitString]) -> Result<KraftReport> {
    check_prefix_free(programs)?;
    let sum = kraft_sum(programs.iter());
    let ok = sum <= Rational::one();
    Ok(KraftReport { sum, ok })
}

fn kraft_sum<'a>(programs: impl Iterator<Item = &'a BitString>) -> Rational {
    // Accumulate as an integer numerator over 2^max_len.
    let programs: Vec<&BitString> = programs.collect();
    let max_len = programs.iter().map(|p| p.len()).max().unwrap_or(0);
    let num = programs.iter().fold(BigInt::zero(), |acc, p| {
        acc + (BigInt::one() << (max_len - p.len()))
    });
    Rational::new(num, BigInt::one() << max_len)
}

/// A program discovered while dovetailing a machine's domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumerationEvent {
    pub program: BitString,
    pub output: BitString,
    pub steps: u64,
    pub discovery_index: usize,
    pub machine_id: Arc<str>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enumeration {
    pub events: Vec<EnumerationEvent>,
    /// Every declared program has been accounted for: the domain is finite
    /// and fully listed in `events`.
    pub complete: bool,
    /// Exact Kraft sum after each event.
    pub kraft_trace: Vec<Rational>,
}

/// Dovetails the domain for `budget` rounds.
///
/// Round `k` (from 1) runs declared programs `0..k` for `k` steps, so
/// program `i` halting after `s` steps is discovered in round
/// `max(i + 1, s)`. Discoveries within a round are ordered by
/// `(steps, length, lexicographic)`.
pub fn enumerate_domain(machine: &PrefixMachine, budget: u64) -> Result<Enumeration> {
    let declared = machine.declared();
    let scan = declared.map_or(budget, |d| budget.min(d as u64));
    let mut found = Vec::new();
    let mut complete = declared.is_some();
    for index in 0..scan as usize {
        let Some(entry) = machine.entry(index) else {
            continue;
        };
        let round = (index as u64 + 1).max(entry.steps);
        if round <= budget {
            found.push((round, entry));
        } else {
            complete = false;
        }
    }
    if declared.is_some_and(|d| d as u64 > budget) {
        complete = false;
    }
    found.sort_by(|(ra, a), (rb, b)| {
        (ra, a.steps, a.program.len(), &a.program).cmp(&(rb, b.steps, b.program.len(), &b.program))
    });

    let mut seen: BTreeSet<BitString> = BTreeSet::new();
    let mut events = Vec::with_capacity(found.len());
    let mut kraft_trace = Vec::with_capacity(found.len());
    let mut kraft = Rational::zero();
    for (discovery_index, (_, entry)) in found.into_iter().enumerate() {
        check_insert(&mut seen, &entry.program)?;
        kraft += entry.program.weight();
        if kraft > Rational::one() {
            return Err(Error::KraftExceeded(kraft));
        }
        kraft_trace.push(kraft.clone());
        events.push(EnumerationEvent {
            program: entry.program,
            output: entry.output,
            steps: entry.steps,
            discovery_index,
            machine_id: machine.id.clone(),
        });
    }
    Ok(Enumeration {
        events,
        complete,
        kraft_trace,
    })
}

/// Incremental prefix-freeness: only the lexicographic neighbours of a new
/// program can be its prefix or extension.
fn check_insert(seen: &mut BTreeSet<BitString>, program: &BitString) -> Result<()> {
    if let Some(prev) = seen.range(..=program).next_back() {
        if prev.is_prefix_of(program) {
            return Err(Error::PrefixViolation {
                prefix: prev.clone(),
                extension: program.clone(),
            });
        }
    }
    if let Some(next) = seen.range(program..).next() {
        if program.is_prefix_of(next) {
            return Err(Error::PrefixViolation {
                prefix: program.clone(),
                extension: next.clone(),
            });
        }
    }
    seen.insert(program.clone());
    Ok(())
}

/// Largest program length the brute-force search accepts.
pub const MAX_SEARCH_LEN: u32 = 40;

/// Default search cap.
pub const DEFAULT_LMAX: u32 = 24;

/// First program (in lexicographic order) of length `len` whose packed
/// value lies in `range` and that outputs `target`.
pub fn search_range(
    machine: &PrefixMachine,
    target: &BitString,
    len: u32,
    range: Range<u64>,
) -> Option<u64> {
    range
        .into_iter()
        .find(|&v| machine.produces(len, v, target))
}

/// Lengths worth probing: `0..=lmax`, cut at the longest program when the
/// domain is a known finite set.
pub fn search_lengths(machine: &PrefixMachine, lmax: u32) -> core::ops::RangeInclusive<u32> {
    let lmax = lmax.min(MAX_SEARCH_LEN);
    let top = machine
        .max_program_len()
        .map_or(lmax, |m| lmax.min(m as u32));
    0..=top
}

/// Shortest, then lexicographically first, program of length at most
/// `lmax` that outputs `s`.
pub fn shortest_program(machine: &PrefixMachine, s: &BitString, lmax: u32) -> Option<BitString> {
    search_lengths(machine, lmax).find_map(|len| {
        search_range(machine, s, len, 0..(1u64 << len)).map(|v| BitString::from_packed(len, v))
    })
}

/// `H(s) = min{|p| : M(p) = s}` over programs of length at most `lmax`;
/// `None` when no such program exists.
pub fn brute_force_h(machine: &PrefixMachine, s: &BitString, lmax: u32) -> Option<u32> {
    shortest_program(machine, s, lmax).map(|p| p.len() as u32)
}

/// A program-size complexity value from a capped exhaustive search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HValue {
    Known(u32),
    /// No program within the search cap.
    Unknown,
}

impl From<Option<u32>> for HValue {
    fn from(v: Option<u32>) -> Self {
        v.map_or(HValue::Unknown, HValue::Known)
    }
}

impl HValue {
    pub fn known(self) -> Option<u32> {
        match self {
            HValue::Known(h) => Some(h),
            HValue::Unknown => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProfileEntry {
    pub n: usize,
    /// `α↾n`, absent when the bits could not be determined.
    pub prefix: Option<BitString>,
    pub h: HValue,
}

/// The table `n ↦ H(α↾n)` for `n = 1..=nmax`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexityProfile {
    pub subject: String,
    pub machine_id: String,
    pub search_limit: u32,
    pub entries: Vec<ProfileEntry>,
}

impl ComplexityProfile {
    pub fn known(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.entries
            .iter()
            .filter_map(|e| e.h.known().map(|h| (e.n, h)))
    }

    /// A profile from given values, `None` meaning Unknown. Index `k` holds `n = k + 1`.
    pub fn from_values(subject: impl Into<String>, values: &[Option<u32>]) -> Self {
        Self {
            subject: subject.into(),
            machine_id: String::new(),
            search_limit: 0,
            entries: values
                .iter()
                .enumerate()
                .map(|(k, v)| ProfileEntry {
                    n: k + 1,
                    prefix: None,
                    h: (*v).into(),
                })
                .collect(),
        }
    }
}

/// Grows a random prefix code by repeatedly splitting a leaf of a binary
/// tree, then drops some leaves. `pick(n)` must return a value in `0..n`.
pub fn grow_prefix_code(
    leaves: usize,
    max_len: usize,
    mut pick: impl FnMut(u64) -> u64,
) -> Vec<BitString> {
    let mut code = alloc::vec![BitString::new()];
    let mut attempts = 0;
    while code.len() < leaves.max(1) && attempts < leaves * 64 {
        attempts += 1;
        let k = pick(code.len() as u64) as usize;
        if code[k].len() >= max_len {
            continue;
        }
        let w = code.swap_remove(k);
        let mut zero = w.clone();
        zero.push(false);
        let mut one = w;
        one.push(true);
        code.push(zero);
        code.push(one);
    }
    if code.len() > 1 {
        // Drop roughly a quarter of the leaves, keeping at least one.
        let mut kept: Vec<BitString> = code.iter().filter(|_| pick(4) != 0).cloned().collect();
        if kept.is_empty() {
            kept.push(code[0].clone());
        }
        code = kept;
    }
    code.sort();
    code
}
