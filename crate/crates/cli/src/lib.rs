//! Command-line driver: argument types, dispatch and output rendering.
//!
//! [`run_experiment`] does all the work and returns the primary output as a
//! string, so the binary only has to route it and pick an exit code.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use matchpoa::constructions::{
    default_alpha, default_delta, default_stability_k, verify_construction, Candidate, ConstructionReport,
    EpsSchedule, Family, Outcome,
};
use matchpoa::equilibrium::{
    best_response_dynamics, enumerate_pure_nash, no_regret_dynamics, verify_pure_nash, AgentOrder, Budget,
    DeviationSpace, EquilibriumReport, LearnConfig, Learner, DEFAULT_EVALUATION_BUDGET, DEFAULT_GRID,
    DEFAULT_PROFILE_BUDGET,
};
use matchpoa::format::{parse_instance, parse_strategies, serialize_instance};
use matchpoa::mechanisms::{
    Mechanism, MechanismId, NaiveMaxWelfare, ProbabilisticSerial, RandomDictatorial, RandomPriority, Report,
    RpMode, SerialDictatorship,
};
use matchpoa::properties::{
    check_envy_free, check_truthful_safety, ps_bounds_suite, OpponentSpace, ProfileSource, PropertyReport,
    SuiteSource,
};
use matchpoa::rational::{format_rational, parse_rational, to_f64, Rational};
use matchpoa::welfare::optimal_matching;
use matchpoa::{AssignmentMatrix, Error, PreferenceOrder, PreferenceProfile, ValuationProfile};

/// Parsed command line.
#[derive(Debug, Clone, Parser)]
#[command(name = "matchpoa", version, about = "Exact experiments on one-sided matching mechanisms")]
pub struct ExperimentConfig {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Write the primary output here instead of standard output.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Cap on mechanism evaluations per best-response search.
    #[arg(long, global = true, default_value_t = DEFAULT_EVALUATION_BUDGET as u64)]
    pub max_evaluations: u64,
    /// Cap on strategy profiles for enumeration and tabulation.
    #[arg(long, global = true, default_value_t = DEFAULT_PROFILE_BUDGET as u64)]
    pub max_profiles: u64,
}

impl Common {
    fn budget(&self) -> Budget {
        Budget {
            evaluations: self.max_evaluations as u128,
            profiles: self.max_profiles as u128,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    /// Human-readable report.
    Text,
    /// Plain CSV series for plotting; same as csv where no series exists.
    Plot,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Compute a mechanism's assignment matrix.
    Run {
        #[command(flatten)]
        mech: MechArgs,
        #[arg(long)]
        instance: PathBuf,
        /// Reported orders; truthful (induced) orders when absent.
        #[arg(long)]
        strategies: Option<PathBuf>,
        /// Add approximate decimal columns.
        #[arg(long)]
        decimals: bool,
    },
    /// Optimal matching and its welfare.
    Opt {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Pure Nash equilibrium tools.
    Nash {
        #[command(subcommand)]
        action: NashAction,
    },
    /// No-regret dynamics toward a coarse correlated equilibrium.
    Learn {
        #[command(flatten)]
        mech: MechArgs,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        rounds: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = LearnerKind::RegretMatching)]
        learner: LearnerKind,
        /// Learning rate for multiplicative weights.
        #[arg(long, default_value_t = 0.1)]
        eta: f64,
    },
    /// Property suites.
    Check {
        #[command(subcommand)]
        suite: CheckSuite,
    },
    /// Write an instance from an adversarial family.
    Construct {
        #[command(subcommand)]
        family: FamilyArgs,
        /// Where to write the second profile of two-profile families.
        #[arg(long)]
        prime_output: Option<PathBuf>,
    },
    /// Run a family's full pipeline against a mechanism.
    Audit {
        #[command(flatten)]
        mech: MechArgs,
        #[command(flatten)]
        search: SearchArgs,
        #[command(subcommand)]
        family: FamilyArgs,
    },
    /// Audit a family over a range of sizes and emit plot data.
    Sweep {
        #[command(flatten)]
        mech: MechArgs,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, value_enum)]
        family: FamilyKind,
        /// First size parameter (k for grouped and unit-range, n otherwise).
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
    },
}

#[derive(Debug, Clone, Subcommand)]
pub enum NashAction {
    /// Certify a given profile.
    Verify {
        #[command(flatten)]
        mech: MechArgs,
        #[command(flatten)]
        game: GameArgs,
        /// Strategy file (orders) or, for cardinal mechanisms, an instance
        /// file holding the reports.
        #[arg(long)]
        strategies: PathBuf,
    },
    /// List every pure equilibrium.
    Enumerate {
        #[command(flatten)]
        mech: MechArgs,
        #[command(flatten)]
        game: GameArgs,
    },
    /// Best-response dynamics followed by verification.
    Brd {
        #[command(flatten)]
        mech: MechArgs,
        #[command(flatten)]
        game: GameArgs,
        /// Starting profile; truthful when absent.
        #[arg(long)]
        strategies: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        max_iters: usize,
        /// Shuffle the agent order each pass with this seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct GameArgs {
    /// True valuations.
    #[arg(long)]
    pub instance: PathBuf,
    /// Allowed gain per agent.
    #[arg(long, default_value = "0")]
    pub epsilon: String,
    /// Deviation space: `all`, `top:M`, or `grid:D`.
    #[arg(long)]
    pub space: Option<String>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum CheckSuite {
    /// Probabilistic Serial bound checks on random instances.
    PsSuite {
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        nmin: usize,
        #[arg(long, default_value_t = 5)]
        nmax: usize,
    },
    /// Stochastic-dominance envy-freeness.
    Envy {
        #[command(flatten)]
        mech: MechArgs,
        #[arg(long)]
        n: usize,
        /// Check every profile instead of sampling.
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Truthful reporting as a safe strategy.
    Safe {
        #[command(flatten)]
        mech: MechArgs,
        #[arg(long)]
        n: usize,
        /// Sample this many opponent profiles instead of all of them.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Args)]
pub struct MechArgs {
    #[arg(long, value_enum, default_value_t = MechKind::Ps)]
    pub mechanism: MechKind,
    /// Priority for serial dictatorship, 1-based and comma separated.
    #[arg(long, value_delimiter = ',')]
    pub priority: Option<Vec<usize>>,
    /// Estimate Random Priority from this many sampled orders.
    #[arg(long)]
    pub rp_trials: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub rp_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MechKind {
    Ps,
    Rp,
    Sd,
    Rd,
    Naive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LearnerKind {
    RegretMatching,
    MultiplicativeWeights,
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    #[arg(long, value_enum, default_value_t = CandidateKind::Truthful)]
    pub candidate: CandidateKind,
    #[arg(long, default_value_t = 100)]
    pub max_iters: usize,
    /// Shuffle agents each dynamics pass with this seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CandidateKind {
    Truthful,
    Brd,
    Enumerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyKind {
    Grouped,
    Deterministic,
    Stability,
    UnitRange,
}

#[derive(Debug, Clone, Subcommand)]
pub enum FamilyArgs {
    /// `k` groups of `k` near-uniform agents.
    Grouped {
        #[arg(long)]
        k: usize,
        /// Defaults to 1/n^4.
        #[arg(long)]
        alpha: Option<String>,
    },
    /// Common decreasing row and its switched counterpart.
    Deterministic {
        #[arg(long)]
        n: usize,
        /// Mass spread over unwanted items; defaults to 1/n^3.
        #[arg(long)]
        total: Option<String>,
    },
    /// Single-minded agents against shared-interest agents.
    Stability {
        #[arg(long)]
        n: usize,
        /// Defaults to floor(sqrt(n)).
        #[arg(long)]
        k: Option<usize>,
    },
    /// Unit-range profile with one common top item.
    UnitRange {
        #[arg(long)]
        k: usize,
        /// Defaults to the smallest a/10 with n > 1/delta^4.
        #[arg(long)]
        delta: Option<String>,
    },
}

impl FamilyArgs {
    fn family(&self) -> Result<Family, Error> {
        Ok(match self {
            FamilyArgs::Grouped { k, alpha } => Family::Grouped {
                k: *k,
                alpha: opt_rational(alpha.as_deref())?.unwrap_or_else(|| default_alpha(*k)),
            },
            FamilyArgs::Deterministic { n, total } => {
                let mut schedule = EpsSchedule::default_for(*n);
                if let Some(t) = opt_rational(total.as_deref())? {
                    schedule.total = t;
                }
                Family::Deterministic { n: *n, schedule }
            }
            FamilyArgs::Stability { n, k } => Family::Stability {
                n: *n,
                k: k.unwrap_or_else(|| default_stability_k(*n)),
            },
            FamilyArgs::UnitRange { k, delta } => Family::UnitRange {
                k: *k,
                delta: match opt_rational(delta.as_deref())? {
                    Some(d) => d,
                    None => default_delta(*k)
                        .ok_or_else(|| Error::InvalidParameter(format!("no delta = a/10 works for k = {k}")))?,
                },
            },
        })
    }
}

fn opt_rational(text: Option<&str>) -> Result<Option<Rational>, Error> {
    text.map(parse_rational).transpose()
}

/// What the process should exit with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    /// A property or lower-bound check failed.
    Violation,
    /// A budget ran out or no equilibrium could be certified.
    Inconclusive,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::Violation => 1,
            Status::Inconclusive => 3,
        }
    }
}

/// Exit code for an error: 3 for exhausted budgets, 2 for anything else.
pub fn error_code(e: &CliError) -> u8 {
    match e {
        CliError::Core(Error::Capacity { .. }) => 3,
        _ => 2,
    }
}

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Io { path: PathBuf, source: std::io::Error },
    Usage(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Usage(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

type CliResult<T> = Result<T, CliError>;

/// Primary output of a run plus its status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifacts {
    pub status: Status,
    pub output: String,
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_instance(path: &Path) -> CliResult<ValuationProfile> {
    Ok(parse_instance(&read(path)?)?)
}

fn load_orders(path: &Path, n: usize) -> CliResult<Vec<PreferenceOrder>> {
    let p = parse_strategies(&read(path)?)?;
    if p.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: p.n() }.into());
    }
    Ok(p.into_orders())
}

fn r(x: &Rational) -> String {
    format_rational(x)
}

fn labels<S: Report>(profile: &[S]) -> String {
    profile.iter().map(Report::label).collect::<Vec<_>>().join(" ")
}

struct Csv(csv::Writer<Vec<u8>>);

impl Csv {
    fn new() -> Self {
        Csv(csv::WriterBuilder::new().flexible(true).from_writer(Vec::new()))
    }

    fn row<I, T>(&mut self, fields: I)
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[u8]>,
    {
        self.0.write_record(fields).expect("writing to memory");
    }

    fn finish(self) -> String {
        String::from_utf8(self.0.into_inner().expect("writing to memory")).expect("utf-8 fields")
    }
}

/// Prefixes `# key: value` header lines.
fn with_header(header: &[(&str, String)], body: String) -> String {
    let mut out = String::new();
    for (k, v) in header {
        let _ = writeln!(out, "# {k}: {v}");
    }
    out.push_str(&body);
    out
}

/// Runs one command. Files named by the command (other than `--output`) are
/// read and written here; the primary output is returned.
pub fn run_experiment(config: &ExperimentConfig) -> CliResult<Artifacts> {
    let common = &config.common;
    let budget = common.budget();
    let ok = |output: String| Artifacts {
        status: Status::Success,
        output,
    };
    match &config.command {
        Command::Run {
            mech,
            instance,
            strategies,
            decimals,
        } => {
            let truth = load_instance(instance)?;
            let n = truth.n();
            let (p, times) = match mech.mechanism {
                MechKind::Naive => {
                    if strategies.is_some() {
                        return Err(CliError::Usage("naive reports come from the instance itself".into()));
                    }
                    (NaiveMaxWelfare.allocate(truth.rows())?, None)
                }
                _ => {
                    let orders = match strategies {
                        Some(s) => load_orders(s, n)?,
                        None => truth.induced_profile().into_orders(),
                    };
                    let p = with_ordinal(mech, n, |m| m.allocate(&orders))?;
                    let times = (mech.mechanism == MechKind::Ps).then(|| {
                        let prefs = PreferenceProfile::new(orders.clone()).expect("validated");
                        matchpoa::mechanisms::probabilistic_serial(&prefs).1
                    });
                    (p, times)
                }
            };
            let mut header = vec![("mechanism", mechanism_id(mech, n)?.to_string())];
            if let (MechKind::Rp, Some(trials)) = (mech.mechanism, mech.rp_trials) {
                header.push(("seed", mech.rp_seed.to_string()));
                header.push(("trials", trials.to_string()));
            }
            let body = match common.format {
                Format::Text => {
                    let mut s = matrix_text(&p);
                    if let Some(t) = &times {
                        let ts: Vec<String> = t.as_slice().iter().map(r).collect();
                        let _ = writeln!(s, "exhaustion times: {}", ts.join(" "));
                    }
                    s
                }
                _ => {
                    let mut s = matrix_csv(&p, *decimals);
                    if let Some(t) = &times {
                        let mut w = Csv::new();
                        w.row(["item", "exhaustion_time"]);
                        for (j, tj) in t.as_slice().iter().enumerate() {
                            w.row([(j + 1).to_string(), r(tj)]);
                        }
                        s.push('\n');
                        s.push_str(&w.finish());
                    }
                    s
                }
            };
            Ok(ok(with_header(&header, body)))
        }
        Command::Opt { instance } => {
            let truth = load_instance(instance)?;
            let (m, w) = optimal_matching(&truth)?;
            let items: Vec<String> = m.one_based().iter().map(|x| x.to_string()).collect();
            Ok(ok(match common.format {
                Format::Text => format!("optimal welfare: {}\nmatching: {}\n", r(&w), items.join(" ")),
                _ => {
                    let mut c = Csv::new();
                    c.row(["opt", "matching"]);
                    c.row([r(&w), items.join(" ")]);
                    c.finish()
                }
            }))
        }
        Command::Nash { action } => nash(action, common.format, &budget),
        Command::Learn {
            mech,
            instance,
            rounds,
            seed,
            learner,
            eta,
        } => {
            let truth = load_instance(instance)?;
            let learner = match learner {
                LearnerKind::RegretMatching => Learner::RegretMatching,
                LearnerKind::MultiplicativeWeights => Learner::MultiplicativeWeights { eta: *eta },
            };
            let cfg = LearnConfig::new(*rounds, *seed, learner);
            let n = truth.n();
            let (_, opt) = optimal_matching(&truth)?;
            let dist = if mech.mechanism == MechKind::Naive {
                return Err(CliError::Usage("learning runs over strict orders; pick an ordinal mechanism".into()));
            } else {
                with_ordinal(mech, n, |m| m.learn(&truth, &cfg, &budget))?
            };
            let header = vec![
                ("mechanism", mechanism_id(mech, n)?.to_string()),
                ("seed", seed.to_string()),
                ("rounds", rounds.to_string()),
                ("learner", format!("{learner:?}")),
            ];
            let body = match common.format {
                Format::Text => {
                    let mut s = String::new();
                    for c in &dist.checkpoints {
                        let _ = writeln!(
                            s,
                            "round {}: max regret ~{:.6}, average welfare ~{:.6}",
                            c.round, c.max_regret, c.average_welfare
                        );
                    }
                    for (i, reg) in dist.average_regret.iter().enumerate() {
                        let _ = writeln!(s, "agent {} average regret {}", i + 1, r(reg));
                    }
                    let _ = writeln!(s, "average welfare {} (opt {})", r(&dist.average_welfare), r(&opt));
                    s
                }
                _ => {
                    let mut c = Csv::new();
                    c.row(["round", "max_regret_approx", "average_welfare_approx"]);
                    for cp in &dist.checkpoints {
                        c.row([cp.round.to_string(), format!("{:.9}", cp.max_regret), format!("{:.9}", cp.average_welfare)]);
                    }
                    let mut s = c.finish();
                    let mut c = Csv::new();
                    c.row(["agent", "average_regret"]);
                    for (i, reg) in dist.average_regret.iter().enumerate() {
                        c.row([(i + 1).to_string(), r(reg)]);
                    }
                    c.row(["welfare".to_string(), r(&dist.average_welfare)]);
                    c.row(["opt".to_string(), r(&opt)]);
                    s.push('\n');
                    s.push_str(&c.finish());
                    s
                }
            };
            Ok(ok(with_header(&header, body)))
        }
        Command::Check { suite } => check(suite, common.format, &budget),
        Command::Construct { family, prime_output } => {
            let fam = family.family()?;
            let profiles = fam.generate()?;
            if let Some(path) = prime_output {
                let Some((_, up)) = profiles.get(1) else {
                    return Err(CliError::Usage(format!("the {} family has a single profile", fam.key())));
                };
                write(path, &serialize_instance(up))?;
            }
            Ok(ok(serialize_instance(&profiles[0].1)))
        }
        Command::Audit { mech, search, family } => {
            let fam = family.family()?;
            let id = mechanism_id(mech, fam.n())?;
            let rep = verify_construction(&id, &fam, &candidate(search, &id), &budget)?;
            let status = match rep.outcome {
                Outcome::Confirmed => Status::Success,
                Outcome::Violated => Status::Violation,
                Outcome::Inconclusive(_) => Status::Inconclusive,
            };
            let output = match common.format {
                Format::Text => audit_text(&rep),
                _ => audit_csv(&rep),
            };
            Ok(Artifacts { status, output })
        }
        Command::Sweep {
            mech,
            search,
            family,
            from,
            to,
        } => sweep(mech, search, *family, *from, *to, &budget),
    }
}

fn mechanism_id(mech: &MechArgs, n: usize) -> CliResult<MechanismId> {
    Ok(match mech.mechanism {
        MechKind::Ps => MechanismId::ProbabilisticSerial,
        MechKind::Rp => MechanismId::RandomPriority,
        MechKind::Rd => MechanismId::RandomDictatorial,
        MechKind::Naive => MechanismId::NaiveMaxWelfare,
        MechKind::Sd => MechanismId::SerialDictatorship(priority(mech, n)?),
    })
}

fn priority(mech: &MechArgs, n: usize) -> CliResult<Vec<usize>> {
    match &mech.priority {
        None => Ok((0..n).collect()),
        Some(p) => {
            let zero: Vec<usize> = p.iter().map(|&a| a.wrapping_sub(1)).collect();
            let mut sorted = zero.clone();
            sorted.sort_unstable();
            if sorted != (0..n).collect::<Vec<_>>() {
                return Err(CliError::Usage(format!("priority must be a permutation of 1..{n}")));
            }
            Ok(zero)
        }
    }
}

/// Calls `f` with the ordinal mechanism named by `mech`.
fn with_ordinal<T>(
    mech: &MechArgs,
    n: usize,
    f: impl FnOnce(&dyn DynOrdinal) -> Result<T, Error>,
) -> CliResult<T> {
    let out = match mech.mechanism {
        MechKind::Ps => f(&Wrap(&ProbabilisticSerial)),
        MechKind::Rp => f(&Wrap(&RandomPriority {
            mode: match mech.rp_trials {
                Some(trials) => RpMode::Sample {
                    seed: mech.rp_seed,
                    trials,
                },
                None => RpMode::exact(),
            },
        })),
        MechKind::Rd => f(&Wrap(&RandomDictatorial)),
        MechKind::Sd => f(&Wrap(&SerialDictatorship {
            priority: priority(mech, n)?,
        })),
        MechKind::Naive => return Err(CliError::Usage("this command needs an ordinal mechanism".into())),
    };
    Ok(out?)
}

fn is_zero(x: &Rational) -> bool {
    *x == Rational::from_integer(0.into())
}

/// Object-safe view of an ordinal mechanism, for closures.
pub trait DynOrdinal {
    fn allocate(&self, profile: &[PreferenceOrder]) -> Result<AssignmentMatrix, Error>;
    fn verify(
        &self,
        truth: &ValuationProfile,
        profile: &[PreferenceOrder],
        space: &DeviationSpace<PreferenceOrder>,
        eps: &Rational,
        budget: &Budget,
    ) -> Result<EquilibriumReport<PreferenceOrder>, Error>;
    fn enumerate(
        &self,
        truth: &ValuationProfile,
        space: &DeviationSpace<PreferenceOrder>,
        eps: &Rational,
        budget: &Budget,
    ) -> Result<Vec<EquilibriumReport<PreferenceOrder>>, Error>;
    fn brd(
        &self,
        truth: &ValuationProfile,
        init: &[PreferenceOrder],
        space: &DeviationSpace<PreferenceOrder>,
        max_iters: usize,
        order: AgentOrder,
        budget: &Budget,
    ) -> Result<matchpoa::equilibrium::BrdOutcome<PreferenceOrder>, Error>;
    fn learn(
        &self,
        truth: &ValuationProfile,
        config: &LearnConfig,
        budget: &Budget,
    ) -> Result<matchpoa::equilibrium::LearnedDistribution<PreferenceOrder>, Error>;
    fn envy(&self, source: &ProfileSource, budget: &Budget) -> Result<PropertyReport, Error>;
    fn safety(&self, n: usize, opponents: OpponentSpace, budget: &Budget) -> Result<PropertyReport, Error>;
}

struct Wrap<'a, M>(&'a M);

impl<M: Mechanism<Strategy = PreferenceOrder>> DynOrdinal for Wrap<'_, M> {
    fn allocate(&self, profile: &[PreferenceOrder]) -> Result<AssignmentMatrix, Error> {
        self.0.allocate(profile)
    }
    fn verify(
        &self,
        truth: &ValuationProfile,
        profile: &[PreferenceOrder],
        space: &DeviationSpace<PreferenceOrder>,
        eps: &Rational,
        budget: &Budget,
    ) -> Result<EquilibriumReport<PreferenceOrder>, Error> {
        verify_pure_nash(self.0, truth, profile, space, eps, budget)
    }
    fn enumerate(
        &self,
        truth: &ValuationProfile,
        space: &DeviationSpace<PreferenceOrder>,
        eps: &Rational,
        budget: &Budget,
    ) -> Result<Vec<EquilibriumReport<PreferenceOrder>>, Error> {
        enumerate_pure_nash(self.0, truth, space, eps, budget)
    }
    fn brd(
        &self,
        truth: &ValuationProfile,
        init: &[PreferenceOrder],
        space: &DeviationSpace<PreferenceOrder>,
        max_iters: usize,
        order: AgentOrder,
        budget: &Budget,
    ) -> Result<matchpoa::equilibrium::BrdOutcome<PreferenceOrder>, Error> {
        best_response_dynamics(self.0, truth, init, space, max_iters, order, budget)
    }
    fn learn(
        &self,
        truth: &ValuationProfile,
        config: &LearnConfig,
        budget: &Budget,
    ) -> Result<matchpoa::equilibrium::LearnedDistribution<PreferenceOrder>, Error> {
        no_regret_dynamics(self.0, truth, config, budget)
    }
    fn envy(&self, source: &ProfileSource, budget: &Budget) -> Result<PropertyReport, Error> {
        check_envy_free(self.0, source, budget)
    }
    fn safety(&self, n: usize, opponents: OpponentSpace, budget: &Budget) -> Result<PropertyReport, Error> {
        check_truthful_safety(self.0, n, opponents, budget)
    }
}

fn matrix_csv(p: &AssignmentMatrix, decimals: bool) -> String {
    let n = p.n();
    let mut c = Csv::new();
    let mut head = vec!["agent".to_string()];
    head.extend((1..=n).map(|j| format!("item_{j}")));
    if decimals {
        head.extend((1..=n).map(|j| format!("item_{j}_approx")));
    }
    c.row(head);
    for (i, row) in p.rows().iter().enumerate() {
        let mut rec = vec![(i + 1).to_string()];
        rec.extend(row.iter().map(r));
        if decimals {
            rec.extend(row.iter().map(|x| format!("{:.6}", to_f64(x))));
        }
        c.row(rec);
    }
    c.finish()
}

fn matrix_text(p: &AssignmentMatrix) -> String {
    let mut s = String::new();
    for (i, row) in p.rows().iter().enumerate() {
        let cells: Vec<String> = row.iter().map(r).collect();
        let _ = writeln!(s, "agent {}: {}", i + 1, cells.join(" "));
    }
    s
}

fn parse_space<S>(text: Option<&str>, cardinal: bool) -> CliResult<DeviationSpace<S>> {
    let bad = || CliError::Usage(format!("unknown deviation space {:?}", text.unwrap_or("")));
    match text {
        None if cardinal => Ok(DeviationSpace::ValueGrid(DEFAULT_GRID)),
        None | Some("all") => Ok(DeviationSpace::AllStrictOrders),
        Some(t) => {
            let (kind, arg) = t.split_once(':').ok_or_else(bad)?;
            match kind {
                "top" => Ok(DeviationSpace::TopM(arg.parse().map_err(|_| bad())?)),
                "grid" => Ok(DeviationSpace::ValueGrid(arg.parse().map_err(|_| bad())?)),
                _ => Err(bad()),
            }
        }
    }
}

fn report_rows<S: Report>(reports: &[EquilibriumReport<S>], opt: &Rational) -> String {
    let mut c = Csv::new();
    c.row(["profile_id", "verified", "max_gain", "welfare", "opt", "ratio"]);
    for (id, rep) in reports.iter().enumerate() {
        let ratio = if is_zero(&rep.welfare) {
            String::new()
        } else {
            r(&(opt / &rep.welfare))
        };
        c.row([
            (id + 1).to_string(),
            rep.verified.to_string(),
            r(&rep.max_gain),
            r(&rep.welfare),
            r(opt),
            ratio,
        ]);
    }
    c.finish()
}

fn report_header<S: Report>(reports: &[EquilibriumReport<S>]) -> Vec<(&'static str, String)> {
    let mut h = Vec::new();
    if let Some(first) = reports.first() {
        h.push(("certification", first.certification()));
    }
    for (id, rep) in reports.iter().enumerate() {
        h.push(("profile", format!("{} [{}]", id + 1, labels(&rep.profile))));
        if let Some(w) = &rep.witness {
            h.push((
                "witness",
                format!("{}: agent {} gains {} by {}", id + 1, w.agent + 1, r(&w.gain), w.strategy.label()),
            ));
        }
    }
    h
}

fn render_reports<S: Report>(reports: &[EquilibriumReport<S>], opt: &Rational, format: Format) -> String {
    match format {
        Format::Text => {
            let mut s = String::new();
            for rep in reports {
                let _ = writeln!(s, "{rep}");
            }
            let _ = writeln!(s, "optimal welfare {}", r(opt));
            s
        }
        _ => with_header(&report_header(reports), report_rows(reports, opt)),
    }
}

fn nash(action: &NashAction, format: Format, budget: &Budget) -> CliResult<Artifacts> {
    let (mech, game) = match action {
        NashAction::Verify { mech, game, .. } | NashAction::Enumerate { mech, game } | NashAction::Brd { mech, game, .. } => {
            (mech, game)
        }
    };
    let truth = load_instance(&game.instance)?;
    let n = truth.n();
    let eps = parse_rational(&game.epsilon)?;
    let (_, opt) = optimal_matching(&truth)?;
    if mech.mechanism == MechKind::Naive {
        let space: DeviationSpace<Vec<Rational>> = parse_space(game.space.as_deref(), true)?;
        let reports = match action {
            NashAction::Verify { strategies, .. } => {
                let s = load_instance(strategies)?;
                vec![verify_pure_nash(&NaiveMaxWelfare, &truth, s.rows(), &space, &eps, budget)?]
            }
            NashAction::Enumerate { .. } => enumerate_pure_nash(&NaiveMaxWelfare, &truth, &space, &eps, budget)?,
            NashAction::Brd { .. } => {
                return Err(CliError::Usage("dynamics over cardinal reports are not supported".into()))
            }
        };
        let status = if reports.iter().all(|x| x.verified) { Status::Success } else { Status::Violation };
        return Ok(Artifacts {
            status,
            output: render_reports(&reports, &opt, format),
        });
    }
    let space: DeviationSpace<PreferenceOrder> = parse_space(game.space.as_deref(), false)?;
    let mut status = Status::Success;
    let mut extra = Vec::new();
    let reports = match action {
        NashAction::Verify { strategies, .. } => {
            let s = load_orders(strategies, n)?;
            let rep = with_ordinal(mech, n, |m| m.verify(&truth, &s, &space, &eps, budget))?;
            if !rep.verified {
                status = Status::Violation;
            }
            vec![rep]
        }
        NashAction::Enumerate { .. } => with_ordinal(mech, n, |m| m.enumerate(&truth, &space, &eps, budget))?,
        NashAction::Brd {
            strategies,
            max_iters,
            seed,
            ..
        } => {
            let init = match strategies {
                Some(p) => load_orders(p, n)?,
                None => truth.induced_profile().into_orders(),
            };
            let order = seed.map_or(AgentOrder::RoundRobin, AgentOrder::Seeded);
            let out = with_ordinal(mech, n, |m| m.brd(&truth, &init, &space, *max_iters, order, budget))?;
            if let Some(s) = seed {
                extra.push(("seed", s.to_string()));
            }
            extra.push(("converged", out.converged.to_string()));
            extra.push(("passes", out.iterations.to_string()));
            extra.push(("moves", out.moves.to_string()));
            match out.report {
                Some(rep) if is_zero(&eps) => vec![rep],
                Some(_) => vec![with_ordinal(mech, n, |m| m.verify(&truth, &out.profile, &space, &eps, budget))?],
                None => {
                    status = Status::Inconclusive;
                    extra.push(("profile", format!("[{}]", labels(&out.profile))));
                    Vec::new()
                }
            }
        }
    };
    let mut out = render_reports(&reports, &opt, format);
    if format != Format::Text {
        out = with_header(&extra, out);
    } else {
        for (k, v) in extra {
            let _ = writeln!(out, "{k}: {v}");
        }
    }
    Ok(Artifacts { status, output: out })
}

fn check(suite: &CheckSuite, format: Format, budget: &Budget) -> CliResult<Artifacts> {
    let reports: Vec<PropertyReport> = match suite {
        CheckSuite::PsSuite { count, seed, nmin, nmax } => {
            if nmin > nmax || *nmin == 0 {
                return Err(CliError::Usage("need 1 <= nmin <= nmax".into()));
            }
            let rep = ps_bounds_suite(
                &SuiteSource::Random {
                    count: *count,
                    seed: *seed,
                    nmin: *nmin,
                    nmax: *nmax,
                },
                budget,
            )?;
            rep.checks().into_iter().cloned().collect()
        }
        CheckSuite::Envy {
            mech,
            n,
            exhaustive,
            count,
            seed,
        } => {
            let source = if *exhaustive {
                ProfileSource::Exhaustive { n: *n }
            } else {
                ProfileSource::Random {
                    n: *n,
                    count: *count,
                    seed: *seed,
                }
            };
            vec![with_ordinal(mech, *n, |m| m.envy(&source, budget))?]
        }
        CheckSuite::Safe { mech, n, samples, seed } => {
            let opp = match samples {
                Some(count) => OpponentSpace::Sampled { count: *count, seed: *seed },
                None => OpponentSpace::Exhaustive,
            };
            vec![with_ordinal(mech, *n, |m| m.safety(*n, opp, budget))?]
        }
    };
    let status = if reports.iter().all(PropertyReport::passed) { Status::Success } else { Status::Violation };
    let output = match format {
        Format::Text => {
            let mut s = String::new();
            for rep in &reports {
                let _ = writeln!(s, "{rep}");
                for v in rep.violations.iter().take(10) {
                    let _ = writeln!(s, "  instance {}: {}", v.instance, v.witness);
                }
            }
            s
        }
        _ => {
            let mut c = Csv::new();
            c.row(["check", "instances", "violations", "seed"]);
            for rep in &reports {
                c.row([
                    rep.property.clone(),
                    rep.instances.to_string(),
                    rep.violations.len().to_string(),
                    rep.seed.map(|s| s.to_string()).unwrap_or_default(),
                ]);
            }
            let mut header = Vec::new();
            if let Some(seed) = reports.iter().find_map(|x| x.seed) {
                header.push(("seed", seed.to_string()));
            }
            for rep in &reports {
                for v in rep.violations.iter().take(10) {
                    header.push(("violation", format!("{} instance {}: {}", rep.property, v.instance, v.witness)));
                }
            }
            with_header(&header, c.finish())
        }
    };
    Ok(Artifacts { status, output })
}

fn candidate(search: &SearchArgs, id: &MechanismId) -> Candidate {
    match search.candidate {
        CandidateKind::Truthful => Candidate::Truthful,
        CandidateKind::Enumerate => Candidate::Enumerate,
        CandidateKind::Brd if *id == MechanismId::NaiveMaxWelfare => Candidate::Truthful,
        CandidateKind::Brd => Candidate::Brd {
            max_iters: search.max_iters,
            order: search.seed.map_or(AgentOrder::RoundRobin, AgentOrder::Seeded),
        },
    }
}

fn outcome_label(o: &Outcome) -> String {
    match o {
        Outcome::Confirmed => "confirmed".into(),
        Outcome::Violated => "violated".into(),
        Outcome::Inconclusive(why) => format!("inconclusive ({why})"),
    }
}

fn opt_r(x: &Option<Rational>) -> String {
    x.as_ref().map(r).unwrap_or_default()
}

fn audit_csv(rep: &ConstructionReport) -> String {
    let mut header = vec![
        ("family", rep.family.to_string()),
        ("mechanism", rep.mechanism.to_string()),
        ("outcome", outcome_label(&rep.outcome)),
    ];
    for e in &rep.equilibria {
        header.push(("profile", format!("under {} [{}] ({})", e.under, e.profile.join(" "), e.certification)));
    }
    for note in &rep.notes {
        header.push(("note", note.clone()));
    }
    let mut c = Csv::new();
    c.row(["profile_id", "verified", "max_gain", "welfare", "opt", "ratio"]);
    for (id, e) in rep.equilibria.iter().enumerate() {
        c.row([(id + 1).to_string(), e.verified.to_string(), r(&e.max_gain), r(&e.welfare), String::new(), String::new()]);
    }
    c.row([
        "measured".to_string(),
        String::new(),
        String::new(),
        opt_r(&rep.welfare),
        r(&rep.opt),
        opt_r(&rep.ratio),
    ]);
    let mut body = c.finish();
    let mut c = Csv::new();
    c.row(["check", "holds"]);
    for ch in &rep.checks {
        c.row([ch.name.clone(), ch.holds.to_string()]);
    }
    if let Some(p) = &rep.predicted {
        c.row(["predicted ratio".to_string(), r(p)]);
    }
    body.push('\n');
    body.push_str(&c.finish());
    with_header(&header, body)
}

fn audit_text(rep: &ConstructionReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} against {}", rep.family, rep.mechanism);
    for e in &rep.equilibria {
        let _ = writeln!(
            s,
            "under {}: [{}] verified={} max_gain={} welfare={} ({})",
            e.under,
            e.profile.join(" "),
            e.verified,
            r(&e.max_gain),
            r(&e.welfare),
            e.certification
        );
    }
    let _ = writeln!(s, "welfare {}  opt {}  ratio {}", opt_r(&rep.welfare), r(&rep.opt), opt_r(&rep.ratio));
    if let Some(p) = &rep.predicted {
        let _ = writeln!(s, "predicted ratio at least {}", r(p));
    }
    for ch in &rep.checks {
        let _ = writeln!(s, "[{}] {}", if ch.holds { "ok" } else { "FAIL" }, ch.name);
    }
    for n in &rep.notes {
        let _ = writeln!(s, "note: {n}");
    }
    let _ = writeln!(s, "outcome: {}", outcome_label(&rep.outcome));
    s
}

fn sweep(
    mech: &MechArgs,
    search: &SearchArgs,
    kind: FamilyKind,
    from: usize,
    to: usize,
    budget: &Budget,
) -> CliResult<Artifacts> {
    if from > to {
        return Err(CliError::Usage("need --from <= --to".into()));
    }
    let mut c = Csv::new();
    c.row(["x", "welfare", "opt", "ratio", "ratio_approx", "predicted", "outcome"]);
    let mut status = Status::Success;
    for x in from..=to {
        let args = match kind {
            FamilyKind::Grouped => FamilyArgs::Grouped { k: x, alpha: None },
            FamilyKind::Deterministic => FamilyArgs::Deterministic { n: x, total: None },
            FamilyKind::Stability => FamilyArgs::Stability { n: x, k: None },
            FamilyKind::UnitRange => FamilyArgs::UnitRange { k: x, delta: None },
        };
        let fam = args.family()?;
        let id = mechanism_id(mech, fam.n())?;
        let rep = verify_construction(&id, &fam, &candidate(search, &id), budget)?;
        status = match (&rep.outcome, status) {
            (Outcome::Violated, _) | (_, Status::Violation) => Status::Violation,
            (Outcome::Inconclusive(_), _) => Status::Inconclusive,
            (_, s) => s,
        };
        c.row([
            x.to_string(),
            opt_r(&rep.welfare),
            r(&rep.opt),
            opt_r(&rep.ratio),
            rep.ratio.as_ref().map(|v| format!("{:.6}", to_f64(v))).unwrap_or_default(),
            opt_r(&rep.predicted),
            outcome_label(&rep.outcome),
        ]);
    }
    let header = vec![("family", format!("{kind:?}")), ("mechanism", mech.mechanism_name())];
    Ok(Artifacts {
        status,
        output: with_header(&header, c.finish()),
    })
}

impl MechArgs {
    fn mechanism_name(&self) -> String {
        format!("{:?}", self.mechanism).to_lowercase()
    }
}
