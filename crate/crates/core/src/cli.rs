//! Command-line front end: argument parsing, dispatch and report emission.
//!
//! Every run produces one JSON report with sorted keys:
//! `command`, `config`, `results`, `verdicts`, `version` and, unless
//! `--no-timing` is given, `wall_time_ms`. Exit codes: 0 success, 1 error,
//! 2 when a verdict reports a broken guarantee.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::approx::{
    build_chain, check_chain_properties, check_s_t_intersecting, minimality_violation, reduce_to_minimal,
    spread_approximate, verify_approximation, Status, Verdict,
};
use crate::error::{Error, Result};
use crate::exact::binomial;
use crate::family::{GroundSet, SetFamily};
use crate::io::{family_to_json, load_set_family, perms_to_json};
use crate::mask::SubsetMask;
use crate::metrics::{
    is_rel_homogeneous, is_rq_spread, is_tau_homogeneous, regularity_check, spread_radius_capped, RegularityParams,
};
use crate::oracle::{
    bound_claimed, count_intersection_classes, derangement_count, fano_plane, hilton_milner_perm_family, is_trivial_t_intersecting,
    max_avoiding, max_regular_intersecting, max_t_intersecting, regular_feasibility, ExtremalResult, DEFAULT_BUDGET,
    DEFAULT_MAX_PERM_N,
};
use crate::perm::{Permutation, PermutationFamily};
use crate::probabilistic::{
    containment_probability, find_disjoint_pair_by_coloring, find_sunflower, spread_lemma_audit, sunflower_thresholds,
    AuditVerdict, RngSpec, DEFAULT_SUNFLOWER_BUDGET,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Largest family `generate` writes without `--force`.
pub const SIZE_GUARD: u64 = 1_000_000;

pub const THREADS_ENV: &str = "SPREADLAB_THREADS";

#[derive(Debug, Parser, Serialize)]
#[command(name = "spreadlab", version, about = "Spread approximations and intersecting families")]
pub struct Cli {
    /// Worker threads; 0 uses every core. SPREADLAB_THREADS takes precedence.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,

    /// Leave wall time out of the report.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub no_timing: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Write an ambient family file.
    Generate(GenerateArgs),
    /// Exact spread radius.
    Spread(SpreadArgs),
    /// τ-homogeneity, or homogeneity relative to an ambient family.
    Homog(HomogArgs),
    /// (r, q)-spreadness of an ambient family.
    RqSpread(RqArgs),
    /// (t, q, ε, θ)-regularity by exhaustive enumeration.
    Regularity(RegularityArgs),
    /// The spread-approximation procedure.
    #[command(subcommand)]
    Approx(ApproxCommand),
    /// Minimal reduction of a t-intersecting family.
    Reduce(ReduceArgs),
    /// The reduction chain and its properties.
    Chain(ChainArgs),
    #[command(subcommand)]
    Sunflower(SunflowerCommand),
    /// Monte Carlo experiments.
    #[command(subcommand)]
    Mc(McCommand),
    /// Random 2-colouring search for a disjoint cross pair.
    PairColor(PairColorArgs),
    /// Exact extremal oracles.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Extensions of the identity on [t] grouped by agreement with π.
    PermClasses(PermClassesArgs),
}

impl Command {
    fn name(&self) -> String {
        let sub = match self {
            Command::Generate(a) => return format!("generate {}", kebab(&a.kind)),
            Command::Spread(_) => return "spread".into(),
            Command::Homog(_) => return "homog".into(),
            Command::RqSpread(_) => return "rq-spread".into(),
            Command::Regularity(_) => return "regularity".into(),
            Command::Reduce(_) => return "reduce".into(),
            Command::Chain(_) => return "chain".into(),
            Command::PairColor(_) => return "pair-color".into(),
            Command::PermClasses(_) => return "perm-classes".into(),
            Command::Approx(ApproxCommand::Run(_)) => ("approx", "run"),
            Command::Sunflower(SunflowerCommand::Find(_)) => ("sunflower", "find"),
            Command::Sunflower(SunflowerCommand::Thresholds(_)) => ("sunflower", "thresholds"),
            Command::Mc(McCommand::SpreadLemma(_)) => ("mc", "spread-lemma"),
            Command::Mc(McCommand::Containment(_)) => ("mc", "containment"),
            Command::Oracle(o) => (
                "oracle",
                match o {
                    OracleCommand::MaxIntersecting(_) => "max-intersecting",
                    OracleCommand::MaxAvoiding(_) => "max-avoiding",
                    OracleCommand::Trivial(_) => "trivial",
                    OracleCommand::HiltonMilner(_) => "hilton-milner",
                    OracleCommand::Derangements(_) => "derangements",
                    OracleCommand::RegularFeasibility(_) => "regular-feasibility",
                    OracleCommand::MaxRegular(_) => "max-regular",
                },
            ),
        };
        format!("{} {}", sub.0, sub.1)
    }
}

fn kebab<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenerateKind {
    /// All k-subsets of [n].
    Ksets,
    /// The symmetric group on [n].
    Perms,
    /// w disjoint copies of [n], one k-subset from each.
    Product,
    /// [n]^k: one element from each of k blocks of size n.
    Cube,
    /// The Fano plane.
    Fano,
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub kind: GenerateKind,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub w: Option<usize>,
    /// Allow families with more than a million members.
    #[arg(long)]
    pub force: bool,
    /// Family file to write; the report goes to --out or stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SpreadArgs {
    #[arg(long)]
    pub family: PathBuf,
    /// Largest |X| scanned; defaults to the largest member size.
    #[arg(long)]
    pub cap: Option<usize>,
    /// Also decide r-spreadness at this r.
    #[arg(long)]
    pub r: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct HomogArgs {
    #[arg(long)]
    pub family: PathBuf,
    #[arg(long)]
    pub tau: f64,
    /// Check homogeneity relative to this ambient family.
    #[arg(long)]
    pub ambient: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct RqArgs {
    #[arg(long)]
    pub ambient: PathBuf,
    #[arg(long)]
    pub r: f64,
    #[arg(long)]
    pub q: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct RegularityArgs {
    #[arg(long)]
    pub ambient: PathBuf,
    #[arg(long)]
    pub t: usize,
    #[arg(long)]
    pub q: usize,
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub theta: f64,
    #[arg(long, default_value_t = 50_000_000)]
    pub budget: u64,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ApproxCommand {
    /// Run and verify the approximation procedure.
    Run(ApproxArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ApproxArgs {
    #[arg(long)]
    pub ambient: PathBuf,
    #[arg(long)]
    pub family: PathBuf,
    #[arg(long)]
    pub tau: f64,
    #[arg(long)]
    pub q: usize,
    /// Also report whether the selectors are t-intersecting.
    #[arg(long)]
    pub t: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct ReduceArgs {
    #[arg(long)]
    pub family: PathBuf,
    #[arg(long)]
    pub t: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct ChainArgs {
    #[arg(long)]
    pub family: PathBuf,
    #[arg(long)]
    pub ambient: PathBuf,
    #[arg(long)]
    pub t: usize,
    #[arg(long)]
    pub q: usize,
    /// Spreadness used in the collapse bound.
    #[arg(long)]
    pub r: Option<f64>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SunflowerCommand {
    /// Exact search for a sunflower.
    Find(SunflowerFindArgs),
    /// Sizes that force a sunflower.
    Thresholds(ThresholdArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SunflowerFindArgs {
    #[arg(long)]
    pub family: PathBuf,
    #[arg(long)]
    pub petals: usize,
    #[arg(long, default_value_t = DEFAULT_SUNFLOWER_BUDGET)]
    pub budget: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct ThresholdArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub l: usize,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum McCommand {
    /// Compare containment in an (mδ)-random set with the spread-lemma bound.
    SpreadLemma(SpreadLemmaArgs),
    /// Probability that a p-random set contains a member.
    Containment(ContainmentArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SpreadLemmaArgs {
    #[arg(long)]
    pub family: PathBuf,
    #[arg(long)]
    pub m: u32,
    #[arg(long)]
    pub delta: f64,
    #[arg(long)]
    pub trials: u64,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct ContainmentArgs {
    #[arg(long)]
    pub family: PathBuf,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub trials: u64,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct PairColorArgs {
    #[arg(long)]
    pub first: PathBuf,
    #[arg(long)]
    pub second: PathBuf,
    #[arg(long)]
    pub trials: u64,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmbientKind {
    /// All k-subsets of [n].
    Sets,
    /// The symmetric group on [n], grid encoded.
    Perms,
}

#[derive(Debug, Args, Serialize)]
pub struct AmbientArgs {
    /// A built-in ambient family; needs --n (and --k for sets).
    #[arg(long, value_enum, conflicts_with = "family")]
    pub ambient: Option<AmbientKind>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Ambient family file.
    #[arg(long)]
    pub family: Option<PathBuf>,
    /// Permit permutation ambients beyond n = 5.
    #[arg(long)]
    pub allow_large: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct ExtremalArgs {
    #[command(flatten)]
    pub ambient: AmbientArgs,
    #[arg(long)]
    pub t: usize,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleCommand {
    /// Largest t-intersecting subfamily.
    MaxIntersecting(ExtremalArgs),
    /// Largest subfamily with no intersection of size exactly t − 1.
    MaxAvoiding(ExtremalArgs),
    /// Whether a t-intersecting family is trivial.
    Trivial(ReduceArgs),
    /// The Hilton–Milner type permutation family.
    HiltonMilner(HiltonMilnerArgs),
    /// Number of derangements of an m-set.
    Derangements(DerangementArgs),
    /// Whether regular intersecting k-set families can exist.
    RegularFeasibility(NkArgs),
    /// Largest regular intersecting family of k-subsets of [n].
    MaxRegular(MaxRegularArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct HiltonMilnerArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub t: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct DerangementArgs {
    #[arg(long)]
    pub m: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct NkArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct MaxRegularArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct PermClassesArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub t: usize,
    /// π in 1-based one-line notation, e.g. 2,1,3,4; omit with --all.
    #[arg(long, value_delimiter = ',', required_unless_present = "all")]
    pub pi: Option<Vec<usize>>,
    /// Sweep every π not containing the identity on [t].
    #[arg(long)]
    pub all: bool,
}

/// A finished run: the report and the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Value,
    pub exit_code: i32,
}

/// Results plus named verdicts, before wrapping into a report.
struct Findings {
    results: Value,
    verdicts: Map<String, Value>,
}

impl Findings {
    fn new(results: impl Serialize) -> Self {
        Self {
            results: to_value(results),
            verdicts: Map::new(),
        }
    }

    fn verdict(mut self, name: &str, v: impl Serialize) -> Self {
        self.verdicts.insert(name.into(), to_value(v));
        self
    }

    /// A verdict that is either pass or fail.
    fn check(self, name: &str, ok: bool) -> Self {
        self.verdict(name, if ok { Status::Pass } else { Status::Fail })
    }

    fn violated(&self) -> bool {
        fn fails(v: &Value) -> bool {
            match v {
                Value::String(s) => s == "fail",
                Value::Object(m) => m.get("status").is_some_and(|s| s == "fail"),
                _ => false,
            }
        }
        self.verdicts.values().any(fails)
    }
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

/// Parses arguments, runs, and writes the report; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            let text = render(&outcome.report);
            let written = match &cli.out {
                Some(path) => fs::write(path, &text).map_err(|source| Error::Read {
                    path: path.clone(),
                    source,
                }),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            match written {
                Ok(()) => outcome.exit_code,
                Err(e) => {
                    eprintln!("error: {e}");
                    1
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// Canonical report text: sorted keys, two-space indent, trailing newline.
pub fn render(report: &Value) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("values serialize");
    s.push('\n');
    s
}

fn thread_count(cli: &Cli) -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("{THREADS_ENV}={v:?} is not a thread count"))),
        Err(_) => Ok(cli.threads),
    }
}

/// Runs one parsed command inside a pool of the requested size.
pub fn run(cli: &Cli) -> Result<Outcome> {
    let threads = thread_count(cli)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start {threads} threads: {e}")))?;
    let start = Instant::now();
    let findings = pool.install(|| dispatch(&cli.command))?;
    let exit_code = if findings.violated() { 2 } else { 0 };

    let mut config = match to_value(&cli.command) {
        Value::Object(m) => m.into_iter().next().map(|(_, v)| v).unwrap_or(Value::Null),
        other => other,
    };
    flatten_subcommand(&mut config);
    let mut report = json!({
        "command": cli.command.name(),
        "config": config,
        "results": findings.results,
        "verdicts": Value::Object(findings.verdicts),
        "version": VERSION,
    });
    if let Value::Object(m) = &mut report["config"] {
        m.insert("threads".into(), json!(threads));
    }
    if !cli.no_timing {
        report["wall_time_ms"] = json!(start.elapsed().as_millis() as u64);
    }
    Ok(Outcome { report, exit_code })
}

/// `{"run": {...}}` → `{...}` for nested subcommands.
fn flatten_subcommand(config: &mut Value) {
    if let Value::Object(m) = config {
        if m.len() == 1 {
            let only = m.values().next().expect("one entry");
            if only.is_object() {
                let inner = only.clone();
                *config = inner;
            }
        }
    }
}

fn load(path: &Path) -> Result<SetFamily> {
    load_set_family(path)
}

fn dispatch(cmd: &Command) -> Result<Findings> {
    match cmd {
        Command::Generate(a) => generate(a),
        Command::Spread(a) => {
            let f = load(&a.family)?;
            let cap = a.cap.unwrap_or_else(|| f.max_member_size());
            let report = spread_radius_capped(&f, cap)?;
            let mut findings = Findings::new(&report);
            if let Some(r) = a.r {
                let r_exact = crate::exact::exact(r)?;
                let holds = report.radius.as_ref().is_none_or(|rad| rad.at_least(&r_exact));
                findings.results["r_spread"] = json!({ "r": r, "holds": holds });
            }
            Ok(findings)
        }
        Command::Homog(a) => {
            let f = load(&a.family)?;
            let v = match &a.ambient {
                None => is_tau_homogeneous(&f, a.tau)?,
                Some(p) => is_rel_homogeneous(&f, &load(p)?, a.tau)?,
            };
            Ok(Findings::new(v))
        }
        Command::RqSpread(a) => {
            if !(a.r >= 1.0) {
                return Err(Error::InvalidArgument(format!("r must be at least 1, got {}", a.r)));
            }
            Ok(Findings::new(is_rq_spread(&load(&a.ambient)?, a.r, a.q)?))
        }
        Command::Regularity(a) => {
            let rep = regularity_check(
                &load(&a.ambient)?,
                RegularityParams {
                    t: a.t,
                    q: a.q,
                    eps: a.eps,
                    theta: a.theta,
                    budget: a.budget,
                },
            )?;
            let complete = rep.complete;
            let f = Findings::new(rep);
            Ok(if complete {
                f
            } else {
                f.verdict("enumeration", Verdict::with_status(Status::Inconclusive, "budget exhausted"))
            })
        }
        Command::Approx(ApproxCommand::Run(a)) => approx_run(a),
        Command::Reduce(a) => {
            let s = load(&a.family)?;
            let r = reduce_to_minimal(&s, a.t)?;
            let minimal = minimality_violation(&r, a.t);
            let sound = r.members().iter().all(|m| s.members().iter().any(|x| m.is_subset(x)));
            Ok(Findings::new(json!({ "reduced": r.members(), "size": r.len() }))
                .check("t_intersecting", r.is_t_intersecting(a.t))
                .check("inside_input_members", sound)
                .check("minimal", minimal.is_none()))
        }
        Command::Chain(a) => {
            let s = load(&a.family)?;
            let amb = load(&a.ambient)?;
            let chain = build_chain(&s, &amb, a.t, a.q)?;
            let v = check_chain_properties(&chain, &amb, a.r)?;
            Ok(Findings::new(&chain)
                .verdict("sizes", to_value(&v.sizes))
                .verdict("coverage", to_value(&v.coverage))
                .verdict("sunflower_free", to_value(&v.sunflower_free))
                .verdict("w_bound", to_value(&v.w_bound))
                .verdict("collapse_bound", to_value(&v.collapse_bound)))
        }
        Command::Sunflower(SunflowerCommand::Find(a)) => {
            let f = load(&a.family)?;
            let found = find_sunflower(&f, a.petals, a.budget)?;
            let valid = found.as_ref().is_none_or(|s| s.is_valid_in(&f));
            let sets: Option<Vec<&SubsetMask>> =
                found.as_ref().map(|s| s.petals.iter().map(|&i| &f.members()[i]).collect());
            Ok(Findings::new(json!({ "found": found.is_some(), "sunflower": found, "sets": sets }))
                .check("valid", valid))
        }
        Command::Sunflower(SunflowerCommand::Thresholds(a)) => Ok(Findings::new(sunflower_thresholds(a.k, a.l)?)),
        Command::Mc(McCommand::SpreadLemma(a)) => {
            let f = load(&a.family)?;
            let audit = spread_lemma_audit(&f, a.m, a.delta, a.trials, RngSpec::new(a.seed))?;
            let verdict = match audit.verdict {
                AuditVerdict::Pass => Status::Pass,
                AuditVerdict::Fail => Status::Fail,
                AuditVerdict::Vacuous => Status::NotApplicable,
            };
            Ok(Findings::new(json!({ "audit": audit, "rng": RngSpec::new(a.seed) })).verdict("bound", verdict))
        }
        Command::Mc(McCommand::Containment(a)) => {
            let f = load(&a.family)?;
            let est = containment_probability(&f, a.p, a.trials, RngSpec::new(a.seed))?;
            Ok(Findings::new(json!({ "estimate": est, "rng": RngSpec::new(a.seed) })))
        }
        Command::PairColor(a) => {
            let g1 = load(&a.first)?;
            let g2 = load(&a.second)?;
            let pair = find_disjoint_pair_by_coloring(&g1, &g2, a.trials, RngSpec::new(a.seed))?;
            let disjoint = pair.as_ref().is_none_or(|p| p.sets.0.is_disjoint(&p.sets.1));
            Ok(Findings::new(json!({ "found": pair.is_some(), "pair": pair, "rng": RngSpec::new(a.seed) }))
                .check("disjoint", disjoint))
        }
        Command::Oracle(o) => oracle(o),
        Command::PermClasses(a) => perm_classes(a),
    }
}

fn approx_run(a: &ApproxArgs) -> Result<Findings> {
    if !(a.tau > 1.0) {
        return Err(Error::InvalidArgument(format!("tau must exceed 1, got {}", a.tau)));
    }
    let amb = load(&a.ambient)?;
    let f = load(&a.family)?;
    let res = spread_approximate(&amb, &f, a.tau, a.q)?;
    let v = verify_approximation(&res, &amb, &f, a.tau, a.q)?;
    let mut findings = Findings::new(&res)
        .verdict("coverage", to_value(&v.coverage))
        .verdict("partition", to_value(&v.partition))
        .verdict("homogeneity", to_value(&v.homogeneity))
        .verdict("selector_sizes", to_value(&v.selector_sizes))
        .verdict("remainder_bound", to_value(&v.remainder_bound));
    findings.results["remainder_size"] = json!(res.remainder.len());
    if let Some(t) = a.t {
        let pair = check_s_t_intersecting(&res.selectors, t);
        findings.results["selectors_t_intersecting"] = json!({ "t": t, "holds": pair.is_none(), "pair": pair });
    }
    Ok(findings)
}

fn generated_size(a: &GenerateArgs) -> Result<(usize, BigUint)> {
    let need = |v: Option<usize>, name: &str| {
        v.ok_or_else(|| Error::InvalidArgument(format!("generate {} needs --{name}", kebab(&a.kind))))
    };
    Ok(match a.kind {
        GenerateKind::Ksets => {
            let (n, k) = (need(a.n, "n")?, need(a.k, "k")?);
            (n, binomial(n, k))
        }
        GenerateKind::Perms => {
            let n = need(a.n, "n")?;
            (n, crate::exact::factorial(n))
        }
        GenerateKind::Product => {
            let (n, k, w) = (need(a.n, "n")?, need(a.k, "k")?, need(a.w, "w")?);
            (n * w, binomial(n, k).pow(w as u32))
        }
        GenerateKind::Cube => {
            let (n, k) = (need(a.n, "n")?, need(a.k, "k")?);
            (n * k, BigUint::from(n).pow(k as u32))
        }
        GenerateKind::Fano => (7, BigUint::from(7u32)),
    })
}

/// `w` blocks of `[n]`; members pick a `k`-subset in every block.
pub fn product_family(n: usize, k: usize, w: usize) -> Result<SetFamily> {
    let layer = SetFamily::all_k_subsets(n, k)?;
    let mut members = vec![SubsetMask::empty()];
    for b in 0..w {
        members = members
            .iter()
            .flat_map(|m| {
                layer
                    .members()
                    .iter()
                    .map(move |s| m.union(&SubsetMask::from_elems(s.iter().map(|x| x + b * n))))
            })
            .collect();
    }
    SetFamily::new(GroundSet::new(n * w)?, members)
}

fn generate(a: &GenerateArgs) -> Result<Findings> {
    let (ground, size) = generated_size(a)?;
    if size > BigUint::from(SIZE_GUARD) && !a.force {
        return Err(Error::InvalidArgument(format!(
            "{} members exceed the limit of {SIZE_GUARD}; pass --force to generate anyway",
            size
        )));
    }
    let text = match a.kind {
        GenerateKind::Ksets => family_to_json(&SetFamily::all_k_subsets(ground, a.k.expect("checked"))?),
        GenerateKind::Perms => perms_to_json(&PermutationFamily::symmetric_group(ground)),
        GenerateKind::Product => {
            family_to_json(&product_family(a.n.expect("checked"), a.k.expect("checked"), a.w.expect("checked"))?)
        }
        GenerateKind::Cube => family_to_json(&product_family(a.n.expect("checked"), 1, a.k.expect("checked"))?),
        GenerateKind::Fano => family_to_json(&fano_plane()),
    };
    let mut results = json!({ "members": size.to_string(), "ground_size": ground });
    match &a.output {
        Some(path) => {
            fs::write(path, &text).map_err(|source| Error::Read {
                path: path.clone(),
                source,
            })?;
            results["output"] = json!(path);
        }
        None => results["family"] = serde_json::from_str(&text).expect("generated JSON parses"),
    }
    Ok(Findings::new(results))
}

fn ambient(a: &AmbientArgs) -> Result<SetFamily> {
    match (a.ambient, &a.family) {
        (_, Some(path)) => load(path),
        (Some(AmbientKind::Sets), None) => {
            let n = a.n.ok_or_else(|| Error::InvalidArgument("--ambient sets needs --n".into()))?;
            let k = a.k.ok_or_else(|| Error::InvalidArgument("--ambient sets needs --k".into()))?;
            SetFamily::all_k_subsets(n, k)
        }
        (Some(AmbientKind::Perms), None) => {
            let n = a.n.ok_or_else(|| Error::InvalidArgument("--ambient perms needs --n".into()))?;
            if n > DEFAULT_MAX_PERM_N && !a.allow_large {
                return Err(Error::InvalidArgument(format!(
                    "permutation oracles stop at n = {DEFAULT_MAX_PERM_N}; pass --allow-large for n = {n}"
                )));
            }
            PermutationFamily::symmetric_group(n).to_set_family()
        }
        (None, None) => Err(Error::InvalidArgument("give --ambient sets|perms or --family".into())),
    }
}

fn extremal_findings(r: ExtremalResult, ok: bool) -> Findings {
    let proved = r.proved_optimal;
    let f = Findings::new(r).check("witness", ok);
    if proved {
        f
    } else {
        f.verdict("optimality", Verdict::with_status(Status::Inconclusive, "budget exhausted"))
    }
}

fn oracle(o: &OracleCommand) -> Result<Findings> {
    match o {
        OracleCommand::MaxIntersecting(a) => {
            let r = max_t_intersecting(&ambient(&a.ambient)?, a.t, a.budget)?;
            let ok = r.witness.is_t_intersecting(a.t);
            Ok(extremal_findings(r, ok))
        }
        OracleCommand::MaxAvoiding(a) => {
            let r = max_avoiding(&ambient(&a.ambient)?, a.t, a.budget)?;
            let ok = r.witness.avoids_intersection(a.t - 1);
            Ok(extremal_findings(r, ok))
        }
        OracleCommand::Trivial(a) => {
            let f = load(&a.family)?;
            let core = is_trivial_t_intersecting(&f, a.t)?;
            Ok(Findings::new(json!({ "trivial": core.is_some(), "core": core })))
        }
        OracleCommand::HiltonMilner(a) => {
            let hm = hilton_milner_perm_family(a.n, a.t)?;
            let perms: Vec<Vec<usize>> = hm.family.members().iter().map(Permutation::to_one_line).collect();
            let nontrivial = if a.t >= 2 {
                if hm.nontrivial {
                    Status::Pass
                } else {
                    Status::Fail
                }
            } else {
                Status::NotApplicable
            };
            let mut results = to_value(&hm);
            results["perms"] = json!(perms);
            Ok(Findings {
                results,
                verdicts: Map::new(),
            }
            .check("avoids", hm.avoids)
            .verdict("nontrivial", nontrivial))
        }
        OracleCommand::Derangements(a) => Ok(Findings::new(json!({
            "m": a.m,
            "count": derangement_count(a.m).to_string(),
        }))),
        OracleCommand::RegularFeasibility(a) => Ok(Findings::new(json!({
            "n": a.n,
            "k": a.k,
            "feasibility": regular_feasibility(a.n, a.k),
        }))),
        OracleCommand::MaxRegular(a) => {
            let r = max_regular_intersecting(a.n, a.k, a.budget)?;
            let ok = r.witness.is_t_intersecting(1) && r.witness.is_regular();
            Ok(extremal_findings(r, ok))
        }
    }
}

fn perm_classes(a: &PermClassesArgs) -> Result<Findings> {
    let pis: Vec<Permutation> = match (&a.pi, a.all) {
        (Some(pi), false) => vec![Permutation::from_one_line(pi)?],
        (None, true) => Permutation::all(a.n)
            .into_iter()
            .filter(|p| !(0..a.t).all(|x| p.apply(x) == x))
            .collect(),
        _ => return Err(Error::InvalidArgument("give exactly one of --pi and --all".into())),
    };
    let classes = pis
        .iter()
        .map(|pi| count_intersection_classes(a.n, a.t, pi))
        .collect::<Result<Vec<_>>>()?;
    let violations: Vec<&Vec<usize>> = classes.iter().filter(|c| !c.bound_holds).map(|c| &c.pi).collect();
    let conserved = classes
        .iter()
        .all(|c| BigUint::from(c.counts.values().sum::<u64>()) == c.total);
    let in_range = bound_claimed(a.n, a.t);
    let bound = match (in_range, violations.is_empty()) {
        (false, _) => Status::NotApplicable,
        (true, true) => Status::Pass,
        (true, false) => Status::Fail,
    };
    let results = json!({
        "classes": classes,
        "violations": violations,
        "violation_count": violations.len(),
    });
    Ok(Findings::new(results).check("mass", conserved).verdict("bound", bound))
}
