use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use causal_local::bench::{learn_full_graph, run_bench, Backend, Experiment, ExperimentConfig, Method};
use causal_local::causal::{
    brute_force_classify, classify_over_members, common_orientation, labiter, restricted_members, zuo_classify,
    CausalRelation, RelationKind,
};
use causal_local::ci::{CiSession, CiTest, Dataset, GaussianTest, GaussianTestConfig, OracleTest, DEFAULT_ALPHA};
use causal_local::graph::{io, Dag, Node, Pdag, DEFAULT_MEC_CAP};
use causal_local::local::{learn_local, BackgroundKnowledge, KnowledgeJson, LearnOptions};
use causal_local::metrics::LocalScope;
use causal_local::sim::{
    random_chain_component, random_dag, rng_from_seed, sample_background, Sem, SimConfig, DEFAULT_WEIGHT_RANGE,
};
use causal_local::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "causal-local", version, about = "Local causal structure learning and identification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// CPDAG of a DAG.
    Cpdag(GraphArgs),
    /// CPDAG of a DAG oriented with direct knowledge and closed.
    Mpdag(MpdagArgs),
    /// Local structure around a target.
    LearnLocal(LearnArgs),
    /// Causal relation of a target to every other variable.
    Identify(IdentifyArgs),
    /// Variables that are definitely not descendants of a sensitive variable.
    SelectPredictors(SelectArgs),
    /// Benchmark sweep; writes per-trial and per-cell CSV.
    Bench(BenchArgs),
    /// Random DAG, linear Gaussian SEM, samples and knowledge.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Json,
    Dot,
    Edges,
}

#[derive(Args)]
struct GraphArgs {
    /// DAG as pdag/v1 JSON (`.json`) or an edge list.
    #[arg(long)]
    dag: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: GraphFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MpdagArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// knowledge/v1 JSON; only direct edges are used.
    #[arg(long)]
    knowledge: PathBuf,
}

#[derive(Args)]
struct InputArgs {
    /// DAG answering CI queries by d-separation.
    #[arg(long, conflicts_with = "data", required_unless_present = "data")]
    dag: Option<PathBuf>,
    /// CSV with a header row; tested with Fisher's z.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Use the d-separation oracle (implied by --dag).
    #[arg(long, conflicts_with = "data")]
    oracle: bool,
    /// Significance level of the Fisher-z test.
    #[arg(long, conflicts_with = "dag")]
    alpha: Option<f64>,
    #[arg(long)]
    knowledge: Option<PathBuf>,
    /// Learn every marginal graph from scratch.
    #[arg(long)]
    no_reuse: bool,
}

#[derive(Args)]
struct LearnArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    target: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IdentifyArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    target: String,
    /// labiter, local-itc, zuo-baseline (or zuo), brute-force.
    #[arg(long, default_value = "labiter")]
    method: String,
    /// Second method whose answer is reported next to the first.
    #[arg(long)]
    compare: Option<String>,
    #[arg(long, default_value_t = DEFAULT_MEC_CAP)]
    mec_cap: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    sensitive: String,
    /// Also keep possible descendants.
    #[arg(long)]
    relaxed: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentArg {
    Chain,
    Identify,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScopeArg {
    Siblings,
    Neighbourhood,
}

#[derive(Args)]
struct BenchArgs {
    /// Full configuration as JSON; the sweep flags are ignored when given.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "chain")]
    experiment: ExperimentArg,
    #[arg(long, value_delimiter = ',', default_value = "10")]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "2")]
    degrees: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "2000")]
    samples: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.3,0.5,0.7,0.9")]
    fractions: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    repetitions: usize,
    #[arg(long, value_delimiter = ',', default_value = "labiter,local-itc,zuo-baseline")]
    methods: Vec<String>,
    #[arg(long, conflicts_with = "alpha")]
    oracle: bool,
    /// Use Fisher-z tests on simulated data at this level.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sample knowledge from all DAG edges rather than undirected CPDAG edges.
    #[arg(long)]
    all_edges: bool,
    #[arg(long)]
    no_reuse: bool,
    #[arg(long, default_value_t = DEFAULT_MEC_CAP)]
    mec_cap: usize,
    #[arg(long, value_enum, default_value = "siblings")]
    scope: ScopeArg,
    /// Record wall time per trial (output is then not reproducible).
    #[arg(long)]
    timing: bool,
    /// Per-trial CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-cell CSV.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 10)]
    nodes: usize,
    #[arg(long, default_value_t = 2.0)]
    degree: f64,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Fraction of undirected CPDAG edges given as direct knowledge.
    #[arg(long, default_value_t = 0.0)]
    knowledge_fraction: f64,
    /// Draw a single chain component instead of a sparse random DAG.
    #[arg(long)]
    chain: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory receiving dag.json, sem.json, data.csv and knowledge.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                Error::InvalidArgument(_) => 2,
                Error::Io(_) => 3,
                Error::Parse(_) => 4,
                Error::Validation(_) | Error::InvalidNode(_) | Error::UnknownLabel(_) => 5,
                Error::Inconsistent(_) => 6,
                Error::ResourceLimit(_) => 7,
                Error::Numerical(_) | Error::State(_) => 8,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Cpdag(a) => cmd_cpdag(a),
        Command::Mpdag(a) => cmd_mpdag(a),
        Command::LearnLocal(a) => cmd_learn_local(a),
        Command::Identify(a) => cmd_identify(a),
        Command::SelectPredictors(a) => cmd_select(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Simulate(a) => cmd_simulate(a),
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))).into())
}

fn write_output(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", p.display()))).into()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json_text<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serialises");
    s.push('\n');
    s
}

fn read_graph(path: &Path) -> CliResult<Pdag> {
    let text = read_text(path)?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    Ok(if is_json { io::from_json(&text)? } else { io::from_edge_list(&text)? })
}

fn read_dag(path: &Path) -> CliResult<Dag> {
    Ok(Dag::new(read_graph(path)?)?)
}

fn read_knowledge(path: Option<&Path>, labels: &[String]) -> CliResult<BackgroundKnowledge> {
    let Some(path) = path else {
        return Ok(BackgroundKnowledge::default());
    };
    let parsed: KnowledgeJson = serde_json::from_str(&read_text(path)?).map_err(Error::from)?;
    Ok(parsed.resolve(labels)?)
}

fn render(g: &Pdag, format: GraphFormat) -> String {
    match format {
        GraphFormat::Json => {
            let mut s = io::to_json(g);
            s.push('\n');
            s
        }
        GraphFormat::Dot => io::to_dot(g),
        GraphFormat::Edges => io::to_edge_list(g),
    }
}

fn cmd_cpdag(a: GraphArgs) -> CliResult<()> {
    let dag = read_dag(&a.dag)?;
    write_output(a.out.as_deref(), &render(&dag.to_cpdag(), a.format))
}

fn cmd_mpdag(a: MpdagArgs) -> CliResult<()> {
    let dag = read_dag(&a.graph.dag)?;
    let k = read_knowledge(Some(&a.knowledge), dag.labels())?;
    if !k.non_ancestral.is_empty() || !k.ancestral.is_empty() {
        return Err(CliError::Usage("mpdag takes direct knowledge only".into()));
    }
    let m = dag.to_cpdag().orient_with_background(&k.direct)?;
    write_output(a.graph.out.as_deref(), &render(&m, a.graph.format))
}

/// A CI backend with the variable names it answers for.
struct Input {
    tester: Box<dyn CiTest>,
    labels: Vec<String>,
    /// The generating DAG when queries are answered by d-separation.
    dag: Option<Dag>,
    knowledge: BackgroundKnowledge,
    opts: LearnOptions,
}

impl Input {
    fn load(a: &InputArgs) -> CliResult<Input> {
        let reuse_shortcuts = !a.no_reuse;
        let (tester, labels, dag, strict): (Box<dyn CiTest>, _, _, _) = match (&a.dag, &a.data) {
            (Some(path), None) => {
                let dag = read_dag(path)?;
                let labels = dag.labels().to_vec();
                (Box::new(OracleTest::new(dag.clone())), labels, Some(dag), true)
            }
            (None, Some(path)) => {
                let data = Dataset::from_csv_path(path)?;
                let cfg = GaussianTestConfig::new(data.correlation()?, data.n_samples())
                    .with_alpha(a.alpha.unwrap_or(DEFAULT_ALPHA));
                (Box::new(GaussianTest::new(cfg)?), data.names.clone(), None, false)
            }
            _ => return Err(CliError::Usage("give exactly one of --dag and --data".into())),
        };
        let knowledge = read_knowledge(a.knowledge.as_deref(), &labels)?;
        let opts = LearnOptions { reuse_shortcuts, strict, pop_priority: None };
        Ok(Input { tester, labels, dag, knowledge, opts })
    }

    fn node(&self, label: &str) -> CliResult<Node> {
        self.labels.iter().position(|l| l == label).ok_or_else(|| Error::UnknownLabel(label.to_string()).into())
    }
}

fn cmd_learn_local(a: LearnArgs) -> CliResult<()> {
    let input = Input::load(&a.input)?;
    let x = input.node(&a.target)?;
    let session = CiSession::new(input.tester.as_ref());
    let t = Instant::now();
    let mut ls = learn_local(x, &session, &input.knowledge, &input.opts)?;
    ls.graph.set_labels(input.labels.clone())?;
    eprintln!("ci tests: {}  time: {:.3}s", ls.ci_tests, t.elapsed().as_secs_f64());
    write_output(a.out.as_deref(), &to_json_text(&ls.to_json()))
}

#[derive(Serialize)]
struct RelationRow {
    node: String,
    relation: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    compare: Option<&'static str>,
}

#[derive(Serialize)]
struct IdentifyOutput {
    target: String,
    method: &'static str,
    ci_tests: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    compare_method: Option<&'static str>,
    /// Nodes whose relation kind differs between the two methods.
    #[serde(skip_serializing_if = "Option::is_none")]
    disagreements: Option<usize>,
    relations: Vec<RelationRow>,
}

struct Classified {
    relations: Vec<CausalRelation>,
    ci_tests: Option<usize>,
}

/// The full graph the baselines classify on: the true MPDAG for the oracle,
/// a learned one otherwise. `None` tests for the oracle.
fn full_graph(input: &Input) -> CliResult<(Pdag, Option<usize>)> {
    match &input.dag {
        Some(dag) => Ok((dag.to_cpdag().orient_with_background(&input.knowledge.direct)?.into_pdag(), None)),
        None => {
            let (g, count) = learn_full_graph(input.tester.as_ref(), &input.knowledge)?;
            Ok((g, Some(count)))
        }
    }
}

fn classify_all(input: &Input, x: Node, method: Method, mec_cap: usize) -> CliResult<Classified> {
    let others = || (0..input.labels.len()).filter(move |&y| y != x);
    match method {
        Method::Labiter | Method::LocalItc => {
            let none = BackgroundKnowledge::default();
            let k = if method == Method::Labiter { &input.knowledge } else { &none };
            let session = CiSession::new(input.tester.as_ref());
            let id = labiter(x, &session, k, &input.opts)?;
            Ok(Classified { relations: id.relations.into_values().collect(), ci_tests: Some(id.ci_tests) })
        }
        Method::ZuoBaseline => {
            if !input.knowledge.non_ancestral.is_empty() || !input.knowledge.ancestral.is_empty() {
                return Err(CliError::Usage("the critical-set baseline takes direct knowledge only".into()));
            }
            let (g, ci_tests) = full_graph(input)?;
            Ok(Classified { relations: others().map(|y| zuo_classify(&g, x, y)).collect(), ci_tests })
        }
        Method::BruteForce => {
            let (g, ci_tests) = full_graph(input)?;
            let k = &input.knowledge;
            let relations = if k.non_ancestral.is_empty() && k.ancestral.is_empty() {
                others().map(|y| brute_force_classify(&g, x, y, mec_cap)).collect::<Result<_, _>>()?
            } else {
                let members = restricted_members(&g, k, mec_cap)?;
                let common = common_orientation(&members)?;
                others().map(|y| classify_over_members(&members, &common, x, y)).collect::<Result<_, _>>()?
            };
            Ok(Classified { relations, ci_tests })
        }
    }
}

fn cmd_identify(a: IdentifyArgs) -> CliResult<()> {
    let method = Method::parse(&a.method)?;
    let compare = a.compare.as_deref().map(Method::parse).transpose()?;
    let input = Input::load(&a.input)?;
    let x = input.node(&a.target)?;
    let t = Instant::now();
    let main = classify_all(&input, x, method, a.mec_cap)?;
    let other = compare.map(|m| classify_all(&input, x, m, a.mec_cap)).transpose()?;
    eprintln!("time: {:.3}s", t.elapsed().as_secs_f64());

    let ys: Vec<Node> = (0..input.labels.len()).filter(|&y| y != x).collect();
    let relations = ys
        .iter()
        .enumerate()
        .map(|(i, &y)| RelationRow {
            node: input.labels[y].clone(),
            relation: main.relations[i].name(),
            compare: other.as_ref().map(|o| o.relations[i].name()),
        })
        .collect();
    let disagreements = other
        .as_ref()
        .map(|o| main.relations.iter().zip(&o.relations).filter(|(p, q)| p.kind != q.kind).count());
    let out = IdentifyOutput {
        target: a.target,
        method: method.name(),
        ci_tests: main.ci_tests,
        compare_method: compare.map(Method::name),
        disagreements,
        relations,
    };
    write_output(a.out.as_deref(), &to_json_text(&out))
}

#[derive(Serialize)]
struct SelectOutput {
    sensitive: String,
    relaxed: bool,
    predictors: Vec<String>,
    ci_tests: usize,
}

fn cmd_select(a: SelectArgs) -> CliResult<()> {
    let input = Input::load(&a.input)?;
    let x = input.node(&a.sensitive)?;
    let session = CiSession::new(input.tester.as_ref());
    let id = labiter(x, &session, &input.knowledge, &input.opts)?;
    let keep = |k: RelationKind| {
        k == RelationKind::DefiniteNonDescendant || (a.relaxed && k == RelationKind::PossibleDescendant)
    };
    let predictors =
        id.relations.iter().filter(|(_, r)| keep(r.kind)).map(|(&y, _)| input.labels[y].clone()).collect();
    let out = SelectOutput { sensitive: a.sensitive, relaxed: a.relaxed, predictors, ci_tests: id.ci_tests };
    write_output(a.out.as_deref(), &to_json_text(&out))
}

fn cmd_bench(a: BenchArgs) -> CliResult<()> {
    let cfg = match &a.config {
        Some(path) => serde_json::from_str::<ExperimentConfig>(&read_text(path)?).map_err(Error::from)?,
        None => ExperimentConfig {
            experiment: match a.experiment {
                ExperimentArg::Chain => Experiment::Chain,
                ExperimentArg::Identify => Experiment::Identify,
            },
            sizes: a.sizes,
            degrees: a.degrees,
            samples: a.samples,
            fractions: a.fractions,
            repetitions: a.repetitions,
            methods: a.methods.iter().map(|m| Method::parse(m)).collect::<Result<_, _>>()?,
            backend: match a.alpha {
                Some(alpha) => Backend::Gaussian { alpha },
                None => Backend::Oracle,
            },
            seed: a.seed,
            weight_range: DEFAULT_WEIGHT_RANGE,
            all_edges_knowledge: a.all_edges,
            reuse_shortcuts: !a.no_reuse,
            mec_cap: a.mec_cap,
            scope: match a.scope {
                ScopeArg::Siblings => LocalScope::TargetAndSiblings,
                ScopeArg::Neighbourhood => LocalScope::Neighbourhood,
            },
            timing: a.timing,
        },
    };
    cfg.validate()?;
    let t = Instant::now();
    let report = run_bench(&cfg)?;
    eprintln!("config {}  trials: {}  time: {:.1}s", cfg.hash(), report.trials.len(), t.elapsed().as_secs_f64());
    write_output(a.out.as_deref(), &report.trials_csv()?)?;
    if let Some(path) = &a.summary {
        write_output(Some(path), &report.summary_csv()?)?;
    }
    Ok(())
}

fn cmd_simulate(a: SimulateArgs) -> CliResult<()> {
    let cfg = SimConfig {
        n: a.nodes,
        avg_degree: a.degree,
        sample_size: a.samples,
        weight_range: DEFAULT_WEIGHT_RANGE,
        knowledge_fraction: a.knowledge_fraction,
        seed: a.seed,
    };
    cfg.validate()?;
    let mut rng = rng_from_seed(a.seed);
    let dag = if a.chain { random_chain_component(a.nodes, &mut rng)? } else { random_dag(&cfg, &mut rng)? };
    let k = sample_background(&dag, a.knowledge_fraction, &mut rng)?;
    let sem = Sem::random(dag.clone(), DEFAULT_WEIGHT_RANGE, &mut rng)?;
    let data = sem.sample(a.samples, &mut rng)?;

    fs::create_dir_all(&a.out)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", a.out.display()))))?;
    write_output(Some(&a.out.join("dag.json")), &render(&dag, GraphFormat::Json))?;
    write_output(Some(&a.out.join("sem.json")), &to_json_text(&sem.to_json()))?;
    write_output(Some(&a.out.join("knowledge.json")), &to_json_text(&k.to_json(dag.labels())))?;
    let mut csv = Vec::new();
    data.write_csv(&mut csv)?;
    write_output(Some(&a.out.join("data.csv")), &String::from_utf8(csv).expect("CSV is UTF-8"))?;
    eprintln!("{} nodes, {} edges, {} samples", dag.n_nodes(), dag.n_edges(), a.samples);
    Ok(())
}
