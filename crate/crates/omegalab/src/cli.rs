//! Command-line plans. Every command returns its rows; nothing is printed
//! until the whole plan has run.

use std::fmt::Display;
use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use omegalab_core::exactnum::parse_rational;
use omegalab_core::machine::{
    build_universal, enumerate_domain, grow_prefix_code, kraft_check, ComplexityProfile, Entry,
};
use omegalab_core::omega::{omega_lower, omega_t_convergence_report};
use omegalab_core::randomness::{
    dimension_estimate, ml_t_test_member, ml_t_test_validate, t_compressibility_trend,
    weak_chaitin_t_check, Check, DEFAULT_SLACK,
};
use omegalab_core::reducibility::{
    domination_check, find_domination_constant, DominationInstance, Verdict,
};
use omegalab_core::sequences::{limit_enclosure, t_convergence_probe, TVerdict};
use omegalab_core::splitting::{epsilon_search, split_sequences};
use omegalab_core::{BitString, PrefixMachine, Rational, Temperature};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::formats::{
    load_machine, load_ml_test, parse_family, parse_source, MachineSpec, OmegaSettings,
};
use crate::parallel;
use crate::records::{Format, Record};

#[derive(Debug, Parser)]
#[command(
    name = "omegalab",
    version,
    about = "Exact experiments on halting probabilities and partial randomness"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub params: Params,
}

#[derive(Debug, Clone, Args)]
pub struct Params {
    /// Temperature `p/q`.
    #[arg(long = "T", global = true, value_name = "p/q")]
    pub t: Option<String>,
    /// Bits of precision for enclosures.
    #[arg(long, global = true, default_value_t = 64)]
    pub prec: u32,
    /// Dovetailing rounds.
    #[arg(long, global = true, default_value_t = 1000)]
    pub budget: u64,
    /// Number of sequence indices.
    #[arg(long = "N", global = true, default_value_t = 32)]
    pub n: usize,
    /// Longest program tried by brute-force searches.
    #[arg(long = "Lmax", global = true, default_value_t = 16)]
    pub lmax: u32,
    /// Largest domination constant tried.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    pub cmax: u64,
    /// Trailing window for dimension and trend estimates.
    #[arg(long, global = true)]
    pub window: Option<usize>,
    /// Slack `p/q` for the compressibility trend.
    #[arg(long, global = true, value_name = "p/q")]
    pub slack: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    #[arg(long, global = true, value_enum, default_value = "records")]
    pub format: Format,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Validate machine specs, or generate a random prefix-free one.
    Machine {
        #[arg(long)]
        machine: Vec<PathBuf>,
        /// Number of leaves of a generated prefix code.
        #[arg(long, value_name = "LEAVES")]
        generate: Option<usize>,
        #[arg(long, default_value_t = 10)]
        max_len: usize,
        /// Write the generated spec here.
        #[arg(long)]
        write: Option<PathBuf>,
    },
    /// Lower bounds of the halting probability at temperature T.
    Omega {
        /// Several specs form a universal machine over the family.
        #[arg(long, required = true)]
        machine: Vec<PathBuf>,
    },
    /// T-convergence probe of a sequence family.
    Tsum {
        #[arg(long)]
        seq: String,
        #[arg(long, default_value = "1")]
        bound: String,
    },
    /// Domination of b by a.
    Dominate {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        /// Report per-index verdicts for this constant.
        #[arg(long)]
        c: Option<u64>,
    },
    /// Split a against the T-convergent c.
    Split {
        #[arg(long)]
        a: String,
        #[arg(long)]
        c: String,
        #[arg(long, default_value = "1")]
        r: String,
        /// Defaults to the largest power of two allowed by a certified bound.
        #[arg(long)]
        eps: Option<String>,
    },
    /// Complexity profile of a real.
    Profile {
        #[arg(long, required = true)]
        machine: Vec<PathBuf>,
        #[arg(long)]
        source: String,
        #[arg(long, default_value_t = 16)]
        nmax: usize,
    },
    /// Validate a Martin-Löf T-test and look for prefixes of a source in it.
    Mltest {
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        source: Option<String>,
        #[arg(long, default_value_t = 16)]
        kmax: usize,
    },
    /// Dimension estimate and randomness diagnostics from a profile.
    Dim {
        #[arg(long, required = true)]
        machine: Vec<PathBuf>,
        #[arg(long)]
        source: String,
        #[arg(long, default_value_t = 16)]
        nmax: usize,
    },
}

impl Command {
    fn defaults_to_t_one(&self) -> bool {
        matches!(
            self,
            Self::Omega { .. }
                | Self::Tsum { .. }
                | Self::Mltest { .. }
                | Self::Split { eps: None, .. }
        )
    }

    fn name(&self) -> &'static str {
        match self {
            Self::Machine { .. } => "machine",
            Self::Omega { .. } => "omega",
            Self::Tsum { .. } => "tsum",
            Self::Dominate { .. } => "dominate",
            Self::Split { .. } => "split",
            Self::Profile { .. } => "profile",
            Self::Mltest { .. } => "mltest",
            Self::Dim { .. } => "dim",
        }
    }
}

struct Ctx<'a> {
    command: &'static str,
    params: &'a Params,
    t: Option<Rational>,
}

impl Ctx<'_> {
    fn row(&self, kind: &str, machine: &str) -> Record {
        Record::new()
            .with("command", self.command)
            .with("kind", kind)
            .with("machine", machine)
            .with_opt("T", self.t.as_ref())
            .with("budget", self.params.budget)
            .with("prec", self.params.prec)
    }

    fn settings(&self) -> OmegaSettings {
        OmegaSettings {
            budget: self.params.budget,
            prec: self.params.prec,
        }
    }

    fn t_or_one(&self) -> Rational {
        self.t
            .clone()
            .unwrap_or_else(|| Rational::from_integer(1.into()))
    }

    fn temperature(&self) -> Result<Temperature> {
        Ok(Temperature::new(self.t_or_one())?)
    }
}

fn load_machines(paths: &[PathBuf]) -> Result<PrefixMachine> {
    let members = paths
        .iter()
        .map(|p| load_machine(p).with_context(|| format!("loading {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    Ok(match members.len() {
        0 => bail!("no machine given"),
        1 => members.into_iter().next().expect("one member"),
        _ => {
            let ids: Vec<&str> = members.iter().map(|m| m.id()).collect();
            build_universal(format!("U({})", ids.join(",")), &members)
        }
    })
}

fn rat(text: &str, what: &str) -> Result<Rational> {
    parse_rational(text).with_context(|| format!("{what} = {text:?}"))
}

fn opt_join<T: Display>(items: &[T]) -> String {
    if items.is_empty() {
        "-".into()
    } else {
        items
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn check_name(c: Check) -> &'static str {
    match c {
        Check::Pass => "pass",
        Check::Fail => "fail",
        Check::Unknown => "unknown",
    }
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Holds => "holds",
        Verdict::Fails => "fails",
        Verdict::Unknown => "unknown",
    }
}

/// Runs one plan and returns its rows in emission order.
pub fn run(cli: &Cli) -> Result<Vec<Record>> {
    let params = &cli.params;
    if params.prec == 0 {
        bail!("--prec must be at least 1");
    }
    let mut t = params.t.as_deref().map(|t| rat(t, "T")).transpose()?;
    if t.is_none() && cli.command.defaults_to_t_one() {
        t = Some(Rational::from_integer(1.into()));
    }
    let ctx = Ctx {
        command: cli.command.name(),
        params,
        t,
    };
    let pool = parallel::pool(params.workers);
    let mut rows = Vec::new();
    match &cli.command {
        Command::Machine {
            machine,
            generate,
            max_len,
            write,
        } => {
            let mut machines = Vec::new();
            for path in machine {
                machines.push(
                    load_machine(path).with_context(|| format!("loading {}", path.display()))?,
                );
            }
            if let Some(leaves) = *generate {
                let m = generate_machine(params.seed, leaves, *max_len)?;
                if let Some(path) = write {
                    let spec =
                        MachineSpec::from_machine(&m).expect("generated machines are tables");
                    fs::write(path, spec.to_toml())
                        .with_context(|| format!("writing {}", path.display()))?;
                }
                machines.push(m);
            }
            if machines.is_empty() {
                bail!("give --machine FILE or --generate LEAVES");
            }
            for m in &machines {
                machine_rows(&ctx, m, &mut rows)?;
            }
        }
        Command::Omega { machine } => {
            let m = load_machines(machine)?;
            let t = ctx.t_or_one();
            let approx = omega_lower(&m, &t, params.budget, params.prec)?;
            let enumeration = enumerate_domain(&m, params.budget)?;
            for (i, (event, bound)) in enumeration
                .events
                .iter()
                .zip(&approx.lower_bounds)
                .enumerate()
            {
                rows.push(
                    ctx.row("event", m.id())
                        .with("index", i)
                        .with("program", &event.program)
                        .with("output", &event.output)
                        .with("steps", event.steps)
                        .with("program_length", approx.program_lengths[i])
                        .with("lower_bound", bound)
                        .with("interval_width", approx.widths[i].to_rational()),
                );
            }
            let enc = approx.enclosure.as_ref();
            rows.push(
                ctx.row("omega", m.id())
                    .with("events", approx.lower_bounds.len())
                    .with("complete", enumeration.complete)
                    .with("lower_bound", approx.final_bound())
                    .with_opt("enclosure_lo", enc.map(|e| e.lo_rational()))
                    .with_opt("enclosure_hi", enc.map(|e| e.hi_rational()))
                    .with("kraft_sum", &approx.kraft_sum),
            );
            let report = omega_t_convergence_report(&m, &t, params.budget, params.prec)?;
            rows.push(
                ctx.row("t_convergence", m.id())
                    .with("t_sum", report.sum.upper())
                    .with("verdict", tverdict_name(&report.verdict))
                    .with("bound", 1),
            );
        }
        Command::Tsum { seq, bound } => {
            let temperature = ctx.temperature()?;
            let bound = rat(bound, "bound")?;
            let mut s = parse_family(seq, ctx.settings())?;
            let certified = s.fresh().t_sum_upper_bound(&temperature, params.prec)?;
            let report = t_convergence_probe(&mut s, &temperature, &bound, params.n, params.prec)?;
            let at = match &report.verdict {
                TVerdict::ExceededBound { at_index, .. } => Some(*at_index),
                TVerdict::BoundedSoFar { .. } => None,
            };
            rows.push(
                ctx.row("tsum", "-")
                    .with("family", seq)
                    .with("terms", report.sum.terms_used)
                    .with("lower", report.sum.lower())
                    .with("upper", report.sum.upper())
                    .with_opt("exact", report.sum.exact.as_ref())
                    .with("bound", &bound)
                    .with("verdict", tverdict_name(&report.verdict))
                    .with_opt("at_index", at)
                    .with_opt("certified_bound", certified),
            );
        }
        Command::Dominate { a, b, c } => {
            let mut a_seq = parse_family(a, ctx.settings())?;
            let mut b_seq = parse_family(b, ctx.settings())?;
            let alpha = limit_enclosure(&mut a_seq, params.n, params.prec)?;
            let beta = limit_enclosure(&mut b_seq, params.n, params.prec)?;
            if let Some(c) = *c {
                let mut inst = DominationInstance {
                    a_seq: a_seq.fresh(),
                    b_seq: b_seq.fresh(),
                    alpha: Some(alpha.clone()),
                    beta: Some(beta.clone()),
                    c,
                };
                for (n, v) in domination_check(&mut inst, params.n)?
                    .into_iter()
                    .enumerate()
                {
                    rows.push(
                        ctx.row("index", "-")
                            .with("n", n)
                            .with("c", c)
                            .with("verdict", verdict_name(v)),
                    );
                }
            }
            let found = find_domination_constant(
                &mut a_seq,
                &mut b_seq,
                Some(&alpha),
                Some(&beta),
                params.n,
                params.cmax,
            )?;
            rows.push(
                ctx.row("dominate", "-")
                    .with("a", a)
                    .with("b", b)
                    .with("indices", params.n)
                    .with("alpha_lo", alpha.lo_rational())
                    .with("alpha_hi", alpha.hi_rational())
                    .with("beta_lo", beta.lo_rational())
                    .with("beta_hi", beta.hi_rational())
                    .with("cmax", params.cmax)
                    .with_opt("c", found),
            );
        }
        Command::Split { a, c, r, eps } => {
            let r = rat(r, "r")?;
            let mut a_seq = parse_family(a, ctx.settings())?;
            let mut c_seq = parse_family(c, ctx.settings())?;
            let eps = match eps {
                Some(e) => rat(e, "eps")?,
                None => {
                    let temperature = ctx.temperature()?;
                    let choice = epsilon_search(&mut c_seq, &temperature, params.n, params.prec)?;
                    rows.push(
                        ctx.row("epsilon", "-")
                            .with("k", choice.k)
                            .with("eps", &choice.epsilon)
                            .with("t_sum_bound", &choice.t_sum_bound)
                            .with("product_upper", &choice.product_upper)
                            .with("scaled_partial_upper", choice.scaled_partial.upper()),
                    );
                    choice.epsilon
                }
            };
            let split = split_sequences(&mut a_seq, &mut c_seq, &r, &eps, params.n, params.prec)?;
            for (n, b) in split.b_prefix.iter().enumerate() {
                rows.push(ctx.row("b", "-").with("n", n).with("b", b));
            }
            let enc = split.beta_enclosure.as_ref();
            rows.push(
                ctx.row("split", "-")
                    .with("a", a)
                    .with("c", c)
                    .with("r", &r)
                    .with("eps", &eps)
                    .with("q", &split.q)
                    .with("a0", &split.a0)
                    .with("checked_to", split.identity_checked_to)
                    .with("residual", &split.residual)
                    .with("all_residuals_zero", split.all_residuals_zero)
                    .with("beta_lower", &split.beta_lower)
                    .with_opt("beta_lo", enc.map(|e| e.lo_rational()))
                    .with_opt("beta_hi", enc.map(|e| e.hi_rational())),
            );
        }
        Command::Profile {
            machine,
            source,
            nmax,
        } => {
            let m = load_machines(machine)?;
            let src = parse_source(source, ctx.settings())?;
            let profile = parallel::complexity_profile(&pool, &m, &src, *nmax, params.lmax);
            profile_rows(&ctx, &profile, &mut rows);
        }
        Command::Mltest { test, source, kmax } => {
            let temperature = ctx.temperature()?;
            let test = load_ml_test(test, temperature)
                .with_context(|| format!("loading {}", test.display()))?;
            let validation = ml_t_test_validate(&test, params.prec)?;
            for v in &validation {
                rows.push(
                    ctx.row("level", "-")
                        .with("level", v.level)
                        .with("strings", test.levels[&v.level].len())
                        .with("bound", omegalab_core::exactnum::pow2(-i64::from(v.level)))
                        .with_opt("measure", v.exact.as_ref())
                        .with("measure_lo", v.enclosure.lo_rational())
                        .with("measure_hi", v.enclosure.hi_rational())
                        .with("verdict", check_name(v.verdict)),
                );
            }
            if let Some(source) = source {
                if validation.iter().any(|v| v.verdict == Check::Fail) {
                    rows.push(
                        ctx.row("member", "-")
                            .with("source", source)
                            .with("status", "refused: a level violates the measure condition"),
                    );
                } else {
                    let src = parse_source(source, ctx.settings())?;
                    let levels: Vec<u32> = test.levels.keys().copied().collect();
                    for h in ml_t_test_member(&test, &src, &levels, *kmax, params.prec)? {
                        rows.push(
                            ctx.row("member", "-")
                                .with("source", source)
                                .with("level", h.level)
                                .with("kmax", kmax)
                                .with("hits", opt_join(&h.hits))
                                .with("unknown", opt_join(&h.unknown)),
                        );
                    }
                }
            }
        }
        Command::Dim {
            machine,
            source,
            nmax,
        } => {
            let m = load_machines(machine)?;
            let src = parse_source(source, ctx.settings())?;
            let profile = parallel::complexity_profile(&pool, &m, &src, *nmax, params.lmax);
            profile_rows(&ctx, &profile, &mut rows);
            let window = params.window.unwrap_or((nmax / 2).max(1));
            let estimate = dimension_estimate(&profile, window)?;
            rows.push(
                ctx.row("dim", m.id())
                    .with("source", source)
                    .with("nmax", nmax)
                    .with("window", window)
                    .with_opt("estimate", estimate),
            );
            if let Some(t) = &ctx.t {
                let weak = weak_chaitin_t_check(&profile, t, &Rational::from_integer(0.into()))?;
                rows.push(
                    ctx.row("weak_chaitin", m.id())
                        .with("c", 0)
                        .with_opt("witness", weak.witness.as_ref())
                        .with_opt("first_failure", weak.first_failure),
                );
                let slack = match &params.slack {
                    Some(s) => rat(s, "slack")?,
                    None => Rational::new(DEFAULT_SLACK.0.into(), DEFAULT_SLACK.1.into()),
                };
                let trend = t_compressibility_trend(&profile, t, &slack, params.window)?;
                rows.push(
                    ctx.row("compressibility", m.id())
                        .with("window", trend.window)
                        .with("slack", &trend.slack)
                        .with_opt("window_max", trend.window_max.as_ref())
                        .with_opt("consistent", trend.consistent),
                );
            }
        }
    }
    Ok(rows)
}

fn tverdict_name(v: &TVerdict) -> &'static str {
    match v {
        TVerdict::BoundedSoFar { .. } => "bounded_so_far",
        TVerdict::ExceededBound { .. } => "exceeded_bound",
    }
}

fn profile_rows(ctx: &Ctx<'_>, profile: &ComplexityProfile, rows: &mut Vec<Record>) {
    for e in &profile.entries {
        rows.push(
            ctx.row("profile", &profile.machine_id)
                .with("source", &profile.subject)
                .with("n", e.n)
                .with_opt("prefix", e.prefix.as_ref())
                .with_opt("H", e.h.known())
                .with("Lmax", profile.search_limit),
        );
    }
}

fn machine_rows(ctx: &Ctx<'_>, m: &PrefixMachine, rows: &mut Vec<Record>) -> Result<()> {
    let declared = m.declared().unwrap_or(0);
    let mut programs = Vec::with_capacity(declared);
    for i in 0..declared {
        let e = m.entry(i).expect("declared entries exist");
        rows.push(
            ctx.row("entry", m.id())
                .with("index", i)
                .with("program", &e.program)
                .with("output", &e.output)
                .with("steps", e.steps),
        );
        programs.push(e.program);
    }
    let kraft = kraft_check(&programs)?;
    let enumeration = enumerate_domain(m, ctx.params.budget)?;
    rows.push(
        ctx.row("machine", m.id())
            .with("entries", declared)
            .with("kraft_sum", &kraft.sum)
            .with("kraft_ok", kraft.ok)
            .with("discovered", enumeration.events.len())
            .with("complete", enumeration.complete),
    );
    Ok(())
}

/// A random prefix-free table: a grown prefix code with random outputs of
/// length at most four and random step counts.
pub fn generate_machine(seed: u64, leaves: usize, max_len: usize) -> Result<PrefixMachine> {
    if leaves == 0 || max_len == 0 {
        bail!("--generate and --max-len must be positive");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let code = grow_prefix_code(leaves, max_len, |n| rng.gen_range(0..n));
    let entries = code
        .into_iter()
        .map(|p| {
            let len = rng.gen_range(0..=4);
            let out = BitString::from_bits((0..len).map(|_| rng.gen()).collect());
            Entry::new(p, out, rng.gen_range(1..=16))
        })
        .collect();
    Ok(PrefixMachine::table(
        format!("gen-{seed}-{leaves}"),
        entries,
    )?)
}
