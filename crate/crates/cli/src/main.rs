//! `argbayes` command-line interface.
//!
//! Exit status: 0 success, 1 usage error, 2 data or schema error, 3 capacity
//! error, 4 degenerate evidence, 5 a `demo` comparison failed.

mod demo;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use argbayes::accept::ParameterFamily;
use argbayes::af::{ArgSet, ArgumentNames, NamedFramework, Semantics};
use argbayes::bayes::{posterior_predictive, PosteriorDistribution};
use argbayes::gibbs::run_gibbs;
use argbayes::harness::{
    convergence_study, convergence_table, cross_validate, learning_curve_table, recovery_table,
    run_dir_name, spearman, synthetic_experiment, synthetic_votes, InferenceMode, InferenceSetup,
    SplitPlan,
};
use argbayes::io::{
    framework_to_json, histogram_table, load_config, load_framework, load_posterior,
    parse_observations, posterior_table, save_table, trace_table, LambdaSpec,
    ObservationConvention, RunConfig, Table, VoteMatrix,
};
use argbayes::space::{
    expand_observations, merge_observations, AttackAssignment, AttackVariableSpace, Observation,
    VariableMode,
};
use argbayes::Error;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "argbayes",
    version,
    about = "Bayesian inference of attack relations from acceptability data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the extensions of a framework.
    Semantics(SemanticsArgs),
    /// Exact posterior over attack relations by enumeration.
    Posterior(InferArgs),
    /// Posterior over attack relations by Gibbs sampling.
    Gibbs(InferArgs),
    /// Posterior predictive probability that subsets are accepted.
    Predict(PredictArgs),
    /// Cross-validated learning curve and sampler convergence traces.
    Crossval(CrossvalArgs),
    /// Sample a synthetic vote matrix and run recovery experiments.
    Synth(SynthArgs),
    /// Recompute the worked examples and compare with the published numbers.
    Demo(DemoArgs),
}

#[derive(Args)]
struct SemanticsArgs {
    /// Framework JSON file.
    #[arg(long)]
    framework: PathBuf,
    /// grounded, complete, preferred, stable or all.
    #[arg(long, default_value = "complete")]
    semantics: String,
}

#[derive(Args)]
struct ModelArgs {
    /// Run configuration file; flags given alongside override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// grounded, complete, preferred or stable [default: complete].
    #[arg(long)]
    semantics: Option<String>,
    /// Acceptability parameter family: deterministic, linear or exponential [default: exponential].
    #[arg(long)]
    family: Option<String>,
    /// Base of every exponential family in use [default: 2].
    #[arg(long)]
    w: Option<f64>,
    /// Family used to score predictions [default: linear].
    #[arg(long)]
    prediction_family: Option<String>,
    /// Attack prior: one probability, or one per attack variable separated by commas.
    #[arg(long)]
    lambda: Option<String>,
    /// Attack variables: symmetric, directed or directed-loops [default: symmetric].
    #[arg(long)]
    variables: Option<String>,
    /// Largest number of free attack variables enumerated exactly.
    #[arg(long)]
    enumeration_cap: Option<usize>,
}

#[derive(Args)]
struct SamplerArgs {
    /// Gibbs sweeps per chain.
    #[arg(long)]
    iterations: Option<usize>,
    /// Sweeps discarded at the start of each chain.
    #[arg(long)]
    burn_in: Option<usize>,
    /// Master seed for every random choice of the command.
    #[arg(long)]
    seed: Option<u64>,
    /// Independent chains merged into one histogram.
    #[arg(long)]
    chains: Option<usize>,
}

#[derive(Args)]
struct DataArgs {
    /// Framework JSON; supplies argument names and, with --known, fixed attacks.
    #[arg(long)]
    framework: Option<PathBuf>,
    /// Vote matrix CSV.
    #[arg(long)]
    votes: Option<PathBuf>,
    /// How vote rows become observations: row-as-set or cell-as-singleton,
    /// optionally followed by :include or :ignore for disagree cells.
    #[arg(long, default_value = "row-as-set")]
    convention: String,
    /// Observation CSV with columns subset,label[,weight].
    #[arg(long)]
    observations: Option<PathBuf>,
    /// Argument names separated by commas, when no framework or votes give them.
    #[arg(long)]
    names: Option<String>,
    /// Treat the attacks of --framework as known to be present.
    #[arg(long)]
    known: bool,
}

#[derive(Args)]
struct InferArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    sampler: SamplerArgs,
    #[command(flatten)]
    data: DataArgs,
    /// Number of most probable assignments to print.
    #[arg(long, default_value_t = 10)]
    top: usize,
    /// Write CSV outputs into a run directory below this one.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    sampler: SamplerArgs,
    #[command(flatten)]
    data: DataArgs,
    /// Subset to score, as comma-separated names ({} is the empty set). Repeatable; default all subsets.
    #[arg(long)]
    query: Vec<String>,
    /// Posterior CSV to use instead of inferring one from the data.
    #[arg(long)]
    posterior: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct CrossvalArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    sampler: SamplerArgs,
    #[command(flatten)]
    data: DataArgs,
    /// Training-set sizes separated by commas [default: six evenly spaced sizes].
    #[arg(long, value_delimiter = ',')]
    train_sizes: Vec<usize>,
    /// Random splits per training size.
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    sampler: SamplerArgs,
    /// Number of arguments of the hidden framework.
    #[arg(long, default_value_t = 10)]
    arguments: usize,
    /// Participants in the synthetic vote matrix.
    #[arg(long, default_value_t = 29)]
    rows: usize,
    /// Probability that each pair of arguments attacks.
    #[arg(long, default_value_t = 0.2)]
    density: f64,
    /// Observation counts for the recovery experiments, separated by commas.
    #[arg(long, value_delimiter = ',', default_value = "0,20,100")]
    n_obs: Vec<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct DemoArgs {
    /// table1, example6, figure3, theorem2 or all.
    #[arg(long, default_value = "all")]
    case: demo::Case,
}

enum Failure {
    Core(Error),
    Check(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Semantics(a) => semantics(a),
        Command::Posterior(a) => posterior(a),
        Command::Gibbs(a) => gibbs(a),
        Command::Predict(a) => predict(a),
        Command::Crossval(a) => crossval(a),
        Command::Synth(a) => synth(a),
        Command::Demo(a) => run_demo(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Check(n)) => {
            eprintln!("error: {n} comparison(s) failed");
            ExitCode::from(5)
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Capacity { .. } => 3,
        Error::DegenerateEvidence | Error::DegenerateConditional { .. } => 4,
        _ => 2,
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> Result<(), Error> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn family(name: &str, w: Option<f64>, current: ParameterFamily) -> Result<ParameterFamily, Error> {
    let inherited = match current {
        ParameterFamily::Exponential { w } => Some(w),
        _ => None,
    };
    ParameterFamily::from_name(name, w.or(inherited).or(Some(2.0)))
}

impl ModelArgs {
    fn resolve(&self, sampler: &SamplerArgs) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => load_config(path)?,
            None => RunConfig::new(Semantics::Complete, ParameterFamily::Exponential { w: 2.0 }),
        };
        if let Some(s) = &self.semantics {
            cfg.model.semantics = s.parse()?;
        }
        if let Some(name) = &self.family {
            cfg.model.family = family(name, self.w, cfg.model.family)?;
        }
        if let Some(name) = &self.prediction_family {
            cfg.prediction_family = family(name, self.w, cfg.prediction_family)?;
        }
        if let Some(w) = self.w {
            let mut used = false;
            for f in [&mut cfg.model.family, &mut cfg.prediction_family] {
                if let ParameterFamily::Exponential { .. } = f {
                    *f = ParameterFamily::exponential(w)?;
                    used = true;
                }
            }
            if !used {
                return Err(Error::Input("--w needs an exponential family".into()));
            }
        }
        if let Some(l) = &self.lambda {
            cfg.lambda = LambdaSpec::parse(l)?;
        }
        if let Some(v) = &self.variables {
            cfg.mode = v.parse::<VariableMode>()?;
        }
        if let Some(cap) = self.enumeration_cap {
            cfg.enumeration_cap = cap;
        }
        if let Some(i) = sampler.iterations {
            cfg.gibbs.iterations = i;
        }
        if let Some(b) = sampler.burn_in {
            cfg.gibbs.burn_in = b;
        }
        if let Some(s) = sampler.seed {
            cfg.gibbs.seed = s;
        }
        if let Some(c) = sampler.chains {
            cfg.gibbs.chains = c;
        }
        cfg.gibbs = cfg.gibbs.validated()?;
        Ok(cfg)
    }
}

struct Dataset {
    names: ArgumentNames,
    observations: Vec<Observation>,
    framework: Option<NamedFramework>,
}

impl DataArgs {
    fn load(&self) -> Result<Dataset, Error> {
        let framework = self.framework.as_deref().map(load_framework).transpose()?;
        let mut names = match (&framework, &self.names) {
            (Some(nf), _) => Some(nf.names.clone()),
            (None, Some(list)) => Some(ArgumentNames::new(
                list.split(',').map(|s| s.trim().to_string()).collect(),
            )?),
            (None, None) => None,
        };
        let mut observations = Vec::new();
        if let Some(path) = &self.votes {
            let convention: ObservationConvention = self.convention.parse()?;
            let mut matrix = VoteMatrix::parse_csv(&read(path)?)?;
            match &names {
                Some(n) => matrix = matrix.align_to(n)?,
                None => names = Some(matrix.arguments.clone()),
            }
            observations.extend(matrix.observations(convention));
        }
        if let Some(path) = &self.observations {
            let n = names.as_ref().ok_or_else(|| {
                Error::Input("--observations needs --framework, --names or --votes".into())
            })?;
            observations.extend(parse_observations(&read(path)?, n)?);
        }
        let names = names.ok_or_else(|| {
            Error::Input("no arguments: give --framework, --names or --votes".into())
        })?;
        if self.known && framework.is_none() {
            return Err(Error::Input("--known needs --framework".into()));
        }
        Ok(Dataset {
            names,
            observations: merge_observations(observations),
            framework,
        })
    }
}

fn setup_for(cfg: &RunConfig, data: &Dataset, known: bool) -> Result<InferenceSetup, Error> {
    let mut setup = InferenceSetup::from_config(cfg, data.names.len())?;
    if known {
        if let Some(nf) = &data.framework {
            setup.space.clamp_known(&nf.framework)?;
        }
    }
    Ok(setup)
}

/// Creates `<out_dir>/<run-dir-name>` and records the resolved configuration there.
fn run_dir(out_dir: Option<&Path>, cfg: &RunConfig) -> Result<Option<PathBuf>, Error> {
    let Some(out) = out_dir else {
        return Ok(None);
    };
    let dir = out.join(run_dir_name(cfg, cfg.gibbs.seed));
    fs::create_dir_all(&dir).map_err(|source| Error::Io {
        path: dir.clone(),
        source,
    })?;
    write(&dir.join("config.conf"), &cfg.canonical())?;
    Ok(Some(dir))
}

fn save(dir: &Option<PathBuf>, file: &str, table: &Table) -> Result<(), Error> {
    if let Some(dir) = dir {
        save_table(dir.join(file), table)?;
    }
    Ok(())
}

fn describe(space: &AttackVariableSpace, names: &ArgumentNames, att: &AttackAssignment) -> String {
    let symmetric = space.mode() == VariableMode::Symmetric;
    let attacks: Vec<String> = space
        .framework(att)
        .attack_pairs()
        .into_iter()
        .filter(|&(a, b)| !symmetric || a < b)
        .map(|(a, b)| {
            let arrow = if symmetric { "<->" } else { "->" };
            format!("{}{arrow}{}", names.name(a), names.name(b))
        })
        .collect();
    if attacks.is_empty() {
        "no attacks".into()
    } else {
        attacks.join(", ")
    }
}

fn print_posterior(
    post: &PosteriorDistribution,
    space: &AttackVariableSpace,
    names: &ArgumentNames,
    top: usize,
) {
    let mut modes = post.modes();
    modes.sort_by_key(|a| a.to_bitstring());
    for m in &modes {
        println!(
            "MAP {} p={:.6} [{}]",
            m.to_bitstring(),
            post.probability(m),
            describe(space, names, m)
        );
    }
    let mut entries: Vec<(&AttackAssignment, f64)> = post.iter().collect();
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    println!("assignment,probability,attacks");
    for (att, p) in entries.into_iter().take(top) {
        println!("{},{p},{}", att.to_bitstring(), describe(space, names, att));
    }
}

fn semantics(a: SemanticsArgs) -> CliResult {
    let nf = load_framework(&a.framework)?;
    let all = a.semantics.trim().eq_ignore_ascii_case("all");
    let chosen: Vec<Semantics> = if all {
        Semantics::ALL.to_vec()
    } else {
        vec![a.semantics.parse()?]
    };
    for sem in chosen {
        if all {
            println!("{sem}:");
        }
        for e in nf.framework.extensions(sem)?.iter() {
            println!("{}", nf.names.format_set(e));
        }
    }
    Ok(())
}

fn posterior(a: InferArgs) -> CliResult {
    let cfg = a.model.resolve(&a.sampler)?;
    let data = a.data.load()?;
    let setup = setup_for(&cfg, &data, a.data.known)?.with_mode(InferenceMode::Exact);
    let post = setup.infer(&data.observations, cfg.gibbs.seed)?;
    print_posterior(&post, &setup.space, &data.names, a.top);
    let dir = run_dir(a.out_dir.as_deref(), &cfg)?;
    save(&dir, "posterior.csv", &posterior_table(&post))?;
    Ok(())
}

fn gibbs(a: InferArgs) -> CliResult {
    let cfg = a.model.resolve(&a.sampler)?;
    println!("seed: {}", cfg.gibbs.seed);
    let data = a.data.load()?;
    let setup = setup_for(&cfg, &data, a.data.known)?;
    let run = run_gibbs(&data.observations, &setup.evaluator(), &cfg.gibbs)?;
    println!(
        "samples: {} distinct: {}",
        run.histogram.samples(),
        run.histogram.counts().len()
    );
    print_posterior(&run.posterior, &setup.space, &data.names, a.top);
    let dir = run_dir(a.out_dir.as_deref(), &cfg)?;
    save(&dir, "histogram.csv", &histogram_table(&run.histogram))?;
    save(&dir, "trace.csv", &trace_table(&run.histogram))?;
    save(&dir, "posterior.csv", &posterior_table(&run.posterior))?;
    Ok(())
}

fn predict(a: PredictArgs) -> CliResult {
    let cfg = a.model.resolve(&a.sampler)?;
    let data = a.data.load()?;
    let setup = setup_for(&cfg, &data, a.data.known)?;
    let post = match &a.posterior {
        Some(path) => {
            let post = load_posterior(path)?;
            for (att, _) in post.iter() {
                setup.space.check_assignment(att)?;
            }
            post
        }
        None => {
            println!("seed: {}", cfg.gibbs.seed);
            setup.infer(&data.observations, cfg.gibbs.seed)?
        }
    };
    let n = data.names.len();
    let queries: Vec<ArgSet> = if a.query.is_empty() {
        if n > 12 {
            return Err(Error::Capacity {
                what: "subsets to score",
                size: 1 << n.min(63),
                cap: 1 << 12,
            }
            .into());
        }
        ArgSet::all_subsets(n).collect()
    } else {
        a.query
            .iter()
            .map(|q| data.names.parse_set(q))
            .collect::<Result<_, _>>()?
    };
    let predictor = setup.prediction_evaluator();
    let mut table = Table::new(["subset", "p_accept"]);
    for d in queries {
        let p = posterior_predictive(d, &post, &predictor)?;
        table.push([data.names.format_set(d), p.to_string()]);
    }
    print!("{}", table.to_csv());
    let dir = run_dir(a.out_dir.as_deref(), &cfg)?;
    save(&dir, "predictions.csv", &table)?;
    Ok(())
}

fn default_sizes(units: usize) -> Vec<usize> {
    let top = units.saturating_sub(1);
    let mut sizes: Vec<usize> = (0..=5).map(|k| k * top / 5).collect();
    sizes.dedup();
    sizes
}

fn crossval(a: CrossvalArgs) -> CliResult {
    let cfg = a.model.resolve(&a.sampler)?;
    let seed = cfg.gibbs.seed;
    println!("seed: {seed}");
    let data = a.data.load()?;
    let setup = setup_for(&cfg, &data, a.data.known)?;
    let sizes = if a.train_sizes.is_empty() {
        default_sizes(expand_observations(&data.observations).len())
    } else {
        a.train_sizes.clone()
    };
    let plan = SplitPlan {
        seed,
        train_sizes: sizes.clone(),
        repeats: a.repeats,
    };
    let curve = cross_validate(&data.observations, &plan, &setup)?;
    let table = learning_curve_table(&curve);
    print!("{}", table.to_csv());
    let xs: Vec<f64> = curve.iter().map(|p| p.train_size as f64).collect();
    let ys: Vec<f64> = curve.iter().map(|p| p.mean_accuracy).collect();
    println!(
        "spearman(train_size, mean_accuracy) = {:.4}",
        spearman(&xs, &ys)
    );

    let convergence = convergence_study(&data.observations, &sizes, &setup, seed)?;
    for (size, trace) in &convergence.traces {
        println!(
            "train_size {size}: {} distinct assignments in {} sweeps",
            trace.last().copied().unwrap_or(0),
            trace.len()
        );
    }
    println!("plateau holds: {}", convergence.plateau_holds);

    let dir = run_dir(a.out_dir.as_deref(), &cfg)?;
    save(&dir, "learning_curve.csv", &table)?;
    save(&dir, "convergence.csv", &convergence_table(&convergence))?;
    Ok(())
}

fn synth(a: SynthArgs) -> CliResult {
    let cfg = a.model.resolve(&a.sampler)?;
    let seed = cfg.gibbs.seed;
    println!("seed: {seed}");
    if cfg.mode != VariableMode::Symmetric {
        return Err(Error::Input(
            "synthetic frameworks are symmetric; use --variables symmetric".into(),
        )
        .into());
    }
    let setup = InferenceSetup::from_config(&cfg, a.arguments)?;
    let sample = synthetic_votes(&setup, a.rows, a.density, seed)?;
    let names = sample.votes.arguments.clone();
    println!(
        "truth {} [{}]",
        sample.truth.to_bitstring(),
        describe(&setup.space, &names, &sample.truth)
    );
    let reports = a
        .n_obs
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            synthetic_experiment(
                &sample.truth,
                n,
                &setup,
                cfg.model.family,
                seed.wrapping_add(k as u64),
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    let table = recovery_table(&reports);
    print!("{}", table.to_csv());

    let dir = run_dir(a.out_dir.as_deref(), &cfg)?;
    if let Some(dir) = &dir {
        write(&dir.join("votes.csv"), &sample.votes.to_csv())?;
        let truth = NamedFramework {
            names,
            framework: setup.space.framework(&sample.truth),
        };
        write(&dir.join("truth.json"), &framework_to_json(&truth))?;
    }
    save(&dir, "recovery.csv", &table)?;
    Ok(())
}

fn run_demo(a: DemoArgs) -> CliResult {
    let checks = demo::run(a.case)?;
    let mut failed = 0;
    for check in &checks {
        println!(
            "{} {}: {}",
            if check.passed { "PASS" } else { "FAIL" },
            check.name,
            check.detail
        );
        failed += usize::from(!check.passed);
    }
    if failed > 0 {
        return Err(Failure::Check(failed));
    }
    Ok(())
}
