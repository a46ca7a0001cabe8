//! Text formats: machine specs (TOML), Martin-Löf test files, sequence
//! families and bit sources.

use std::fs;
use std::path::{Path, PathBuf};

use omegalab_core::exactnum::parse_rational;
use omegalab_core::machine::{check_prefix_free, Entry};
use omegalab_core::omega::omega_lower;
use omegalab_core::randomness::{BitSource, MLTTest};
use omegalab_core::{
    BitString, Error as CoreError, IncreasingSequence, PrefixMachine, Rational, Temperature,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed machine spec: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("entry {index} ({entry}): {reason}")]
    Entry {
        index: usize,
        entry: String,
        reason: String,
    },
    #[error("machine {id}: {reason}\n  {first}\n  {second}")]
    Conflict {
        id: String,
        reason: String,
        first: String,
        second: String,
    },
    #[error("line {line}: {reason}: {text:?}")]
    Line {
        line: usize,
        text: String,
        reason: String,
    },
    #[error("bad family {spec:?}: {reason}")]
    Family { spec: String, reason: String },
    #[error(transparent)]
    Core(#[from] CoreError),
}

pub type Result<T, E = FormatError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineSpec {
    pub id: String,
    #[serde(default, rename = "entry")]
    pub entries: Vec<EntrySpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntrySpec {
    pub program: String,
    pub output: String,
    #[serde(default = "one")]
    pub steps: u64,
}

fn one() -> u64 {
    1
}

impl std::fmt::Display for EntrySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "program = {:?}, output = {:?}, steps = {}",
            self.program, self.output, self.steps
        )
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })
}

impl MachineSpec {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("machine specs always serialize")
    }

    pub fn from_machine(machine: &PrefixMachine) -> Option<Self> {
        let declared = machine.declared()?;
        let entries = (0..declared)
            .map(|i| machine.entry(i))
            .collect::<Option<Vec<_>>>()?
            .into_iter()
            .map(|e| EntrySpec {
                program: e.program.to_string(),
                output: e.output.to_string(),
                steps: e.steps,
            })
            .collect();
        Some(Self {
            id: machine.id().into(),
            entries,
        })
    }

    /// Validates every entry and builds the machine; violations echo the
    /// offending entries.
    pub fn build(&self) -> Result<PrefixMachine> {
        let mut entries = Vec::with_capacity(self.entries.len());
        for (index, spec) in self.entries.iter().enumerate() {
            let bad = |reason: String| FormatError::Entry {
                index,
                entry: spec.to_string(),
                reason,
            };
            let program = BitString::parse(&spec.program).map_err(|e| bad(e.to_string()))?;
            let output = BitString::parse(&spec.output).map_err(|e| bad(e.to_string()))?;
            if spec.steps == 0 {
                return Err(bad("steps must be at least 1".into()));
            }
            entries.push(Entry::new(program, output, spec.steps));
        }
        let programs: Vec<BitString> = entries.iter().map(|e| e.program.clone()).collect();
        if let Err(CoreError::PrefixViolation { prefix, extension }) = check_prefix_free(&programs)
        {
            let find = |p: &BitString, skip: Option<usize>| {
                programs
                    .iter()
                    .enumerate()
                    .position(|(i, q)| q == p && Some(i) != skip)
                    .expect("reported programs come from the table")
            };
            let i = find(&prefix, None);
            let j = find(&extension, Some(i));
            let reason = if prefix == extension {
                "duplicate program".to_string()
            } else {
                format!("{prefix} is a prefix of {extension}; the domain is not prefix-free")
            };
            return Err(FormatError::Conflict {
                id: self.id.clone(),
                reason,
                first: format!("entry {i}: {}", self.entries[i]),
                second: format!("entry {j}: {}", self.entries[j]),
            });
        }
        Ok(PrefixMachine::table(self.id.clone(), entries)?)
    }
}

pub fn load_machine(path: &Path) -> Result<PrefixMachine> {
    MachineSpec::parse(&read(path)?)?.build()
}

/// Parses lines `level n: bitstring`. Blank lines and `#` comments are skipped.
pub fn parse_ml_test(text: &str, temperature: Temperature) -> Result<MLTTest> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |reason: &str| FormatError::Line {
            line: i + 1,
            text: raw.to_string(),
            reason: reason.to_string(),
        };
        let rest = line
            .strip_prefix("level")
            .ok_or_else(|| bad("expected `level n: bitstring`"))?;
        let (level, bits) = rest.split_once(':').ok_or_else(|| bad("missing `:`"))?;
        let level: u32 = level
            .trim()
            .parse()
            .map_err(|_| bad("level is not a natural number"))?;
        let bits = BitString::parse(bits.trim()).map_err(|e| bad(&e.to_string()))?;
        pairs.push((level, bits));
    }
    Ok(MLTTest::new(temperature, pairs)?)
}

pub fn load_ml_test(path: &Path, temperature: Temperature) -> Result<MLTTest> {
    parse_ml_test(&read(path)?, temperature)
}

/// Budget and precision used when a family or source needs an `Ω` run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OmegaSettings {
    pub budget: u64,
    pub prec: u32,
}

fn family_error(spec: &str, reason: impl Into<String>) -> FormatError {
    FormatError::Family {
        spec: spec.to_string(),
        reason: reason.into(),
    }
}

fn omega_args(spec: &str, body: &str) -> Result<(PrefixMachine, Rational)> {
    let (path, t) = body
        .rsplit_once(',')
        .ok_or_else(|| family_error(spec, "expected omega:machine,T"))?;
    let machine = load_machine(Path::new(path.trim()))?;
    let t = parse_rational(t.trim())?;
    Ok((machine, t))
}

/// `geom:L,rho`, `powerlaw:s` or `omega:machine,T`.
pub fn parse_family(spec: &str, settings: OmegaSettings) -> Result<IncreasingSequence> {
    let (kind, body) = spec
        .split_once(':')
        .ok_or_else(|| family_error(spec, "expected kind:arguments"))?;
    let seq = match kind.trim() {
        "geom" => {
            let (l, rho) = body
                .split_once(',')
                .ok_or_else(|| family_error(spec, "expected geom:L,rho"))?;
            IncreasingSequence::geometric(parse_rational(l.trim())?, parse_rational(rho.trim())?)?
        }
        "powerlaw" => {
            let s: u32 = body
                .trim()
                .parse()
                .map_err(|_| family_error(spec, "exponent must be a positive integer"))?;
            IncreasingSequence::power_law(s)?
        }
        "omega" => {
            let (machine, t) = omega_args(spec, body)?;
            omega_lower(&machine, &t, settings.budget, settings.prec)?.to_sequence()
        }
        other => return Err(family_error(spec, format!("unknown family {other:?}"))),
    };
    Ok(seq.rename(spec))
}

/// A rational `p/q` or `omega:machine,T`.
pub fn parse_source(spec: &str, settings: OmegaSettings) -> Result<BitSource> {
    match spec.strip_prefix("omega:") {
        Some(body) => {
            let (machine, t) = omega_args(spec, body)?;
            omega_lower(&machine, &t, settings.budget, settings.prec)?;
            let budget = settings.budget;
            Ok(BitSource::enclosure(spec, settings.prec, move |prec| {
                omega_lower(&machine, &t, budget, prec)?
                    .enclosure
                    .ok_or(CoreError::Unsupported(
                        "domain not exhausted within the budget",
                    ))
            }))
        }
        None => Ok(BitSource::exact(parse_rational(spec.trim())?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY3: &str = r#"
id = "toy3"

[[entry]]
program = "0"
output = ""

[[entry]]
program = "10"
output = "0"

[[entry]]
program = "110"
output = "1"
steps = 3
"#;

    #[test]
    fn machine_round_trip() {
        let m = MachineSpec::parse(TOY3).unwrap().build().unwrap();
        assert_eq!(m.id(), "toy3");
        assert_eq!(m.declared(), Some(3));
        let again = MachineSpec::from_machine(&m).unwrap();
        let m2 = MachineSpec::parse(&again.to_toml())
            .unwrap()
            .build()
            .unwrap();
        assert_eq!(
            MachineSpec::from_machine(&m2).unwrap().entries,
            again.entries
        );
    }

    #[test]
    fn conflict_echoes_entries() {
        let text = TOY3.replace("\"110\"", "\"1\"");
        let err = MachineSpec::parse(&text)
            .unwrap()
            .build()
            .unwrap_err()
            .to_string();
        assert!(err.contains("entry 1: program = \"10\""), "{err}");
        assert!(err.contains("entry 2: program = \"1\""), "{err}");
        let text = TOY3.replace("steps = 3", "steps = 0");
        let err = MachineSpec::parse(&text)
            .unwrap()
            .build()
            .unwrap_err()
            .to_string();
        assert!(err.starts_with("entry 2"), "{err}");
        assert!(MachineSpec::parse("id = 3").is_err());
    }

    #[test]
    fn ml_test_lines() {
        let t = Temperature::one();
        let test = parse_ml_test(
            "# levels\nlevel 1: 00\nlevel 1: 01 \n\nlevel 2: 0000\n",
            t.clone(),
        )
        .unwrap();
        assert_eq!(test.levels[&1].len(), 2);
        assert_eq!(test.levels[&2].len(), 1);
        assert!(parse_ml_test("level x: 0", t.clone()).is_err());
        assert!(parse_ml_test("level 1 0", t.clone()).is_err());
        assert!(parse_ml_test("level 1: 2", t).is_err());
    }

    #[test]
    fn families() {
        let s = OmegaSettings {
            budget: 10,
            prec: 32,
        };
        let mut g = parse_family("geom:1,1/2", s).unwrap();
        assert_eq!(g.term(2).unwrap(), parse_rational("3/4").unwrap());
        assert_eq!(g.name(), "geom:1,1/2");
        let mut p = parse_family("powerlaw:2", s).unwrap();
        assert_eq!(p.term(2).unwrap(), parse_rational("5/4").unwrap());
        assert!(parse_family("geom:1", s).is_err());
        assert!(parse_family("powerlaw:1/2", s).is_err());
        assert!(parse_family("cubic:3", s).is_err());
    }
}
