use std::collections::BTreeSet;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dagbisect::claims::{run_all, run_claim, ClaimReport};
use dagbisect::generators::*;
use dagbisect::optimal::{
    crsp_optimal_queries_with, crsp_optimal_strategy, optimal_queries_with,
    optimal_strategy_with, SolverConfig, DEFAULT_CAP,
};
use dagbisect::reduction::{
    crsp_to_rsp, parse_bsat, parse_crsp, preprocess_pure_literals, reduce_bsat_to_crsp,
    rsp_to_crsp,
};
use dagbisect::strategies::{per_faulty_queries, SimulatedOracle, StreamOracle};
use dagbisect::{
    build_strategy_tree, export_dot, parse_dag, run_session, write_dag, BisectState, Dag,
    DotOptions, StrategyKind,
};

/// Regression search on commit DAGs.
#[derive(Parser)]
#[command(name = "dagbisect", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph family and write it in DAG text format.
    Gen(GenArgs),
    /// Run a strategy: worst case over all faulty commits, one simulated commit, or interactively.
    Run(RunArgs),
    /// Emit a strategy tree as Graphviz DOT.
    Tree(TreeArgs),
    /// Exact worst-case optimum.
    Opt(OptArgs),
    /// Exact optimum of a confined instance.
    CrspOpt(CrspOptArgs),
    /// Reduce a DIMACS CNF formula to a confined instance.
    Reduce(ReduceArgs),
    /// Convert between plain and confined instances.
    Transform(TransformArgs),
    /// Render a DAG as Graphviz DOT.
    ExportDot(ExportDotArgs),
    /// Run the acceptance checks; exit code 3 when any row fails.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Path,
    Octopus,
    Claw,
    Comb,
    CombEvenTweak,
    Pathological,
    Jk,
    JkDelta,
    Fib,
    FibPrime,
    Fig4,
    Fig9,
    RandomBinary,
    RandomDelta,
}

#[derive(Args)]
struct GenArgs {
    family: Family,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    i: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    delta: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Skip the parity fix in the J_k construction.
    #[arg(long)]
    no_parity_fix: bool,
    /// Base graph for `comb` and `comb-even-tweak` (file or family name).
    #[arg(long)]
    dag: Option<String>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// Graph given either positionally or with `--dag`: a file path or a family
/// name such as `fig4`, `path16`, `octopus6`, `fib5`, `pathological4`, `jk3`.
#[derive(Args)]
struct DagArg {
    #[arg(long = "dag", value_name = "FILE")]
    dag_flag: Option<String>,
}

#[derive(Args)]
struct RunArgs {
    /// `git` or `golden` followed by the graph.
    #[arg(num_args = 0..=2)]
    positional: Vec<String>,
    #[arg(long)]
    strategy: Option<String>,
    #[command(flatten)]
    dag: DagArg,
    #[arg(long, conflicts_with_all = ["faulty", "interactive"])]
    worst_case: bool,
    #[arg(long, conflicts_with = "interactive")]
    faulty: Option<usize>,
    #[arg(long)]
    interactive: bool,
    /// Also compute the exact optimum and the ratio (worst-case mode).
    #[arg(long)]
    optimal: bool,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
}

#[derive(Args)]
struct TreeArgs {
    /// `git`, `golden` or `optimal` followed by the graph.
    #[arg(num_args = 0..=2)]
    positional: Vec<String>,
    #[arg(long)]
    strategy: Option<String>,
    #[command(flatten)]
    dag: DagArg,
    /// Emit JSON instead of DOT.
    #[arg(long)]
    json: bool,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct OptArgs {
    graph: Option<String>,
    #[command(flatten)]
    dag: DagArg,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
    /// Include an optimal strategy tree in the report.
    #[arg(long)]
    tree: bool,
}

#[derive(Args)]
struct CrspOptArgs {
    instance: Option<PathBuf>,
    #[arg(long = "dag", value_name = "FILE")]
    dag_flag: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
    #[arg(long)]
    tree: bool,
}

#[derive(Args)]
struct ReduceArgs {
    cnf: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    CrspToRsp,
    RspToCrsp,
}

#[derive(Args)]
struct TransformArgs {
    direction: Direction,
    input: PathBuf,
    /// Budget written into the confined instance (`rsp-to-crsp`).
    #[arg(long, default_value_t = 0)]
    budget: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExportDotArgs {
    graph: Option<String>,
    #[command(flatten)]
    dag: DagArg,
    /// Vertex ids to highlight.
    #[arg(long, value_delimiter = ',')]
    highlight: Vec<usize>,
    /// Show counts relative to the marked vertex's candidates.
    #[arg(long)]
    live: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// `all` or a claim name.
    #[arg(default_value = "all")]
    suite: String,
}

/// Failure categories mapped to exit codes.
#[derive(Debug)]
enum Failure {
    Validation(anyhow::Error),
    Claims,
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Validation(e)
    }
}

impl From<dagbisect::Error> for Failure {
    fn from(e: dagbisect::Error) -> Self {
        Failure::Validation(e.into())
    }
}

type CmdResult = Result<(), Failure>;

#[derive(Serialize)]
struct PerFaulty {
    faulty: usize,
    label: String,
    queries: usize,
}

#[derive(Serialize)]
struct RunReport {
    dag: String,
    strategy: StrategyKind,
    worst_case: usize,
    per_faulty: Vec<PerFaulty>,
    optimal: Option<usize>,
    ratio: Option<f64>,
}

#[derive(Serialize)]
struct SessionReport {
    dag: String,
    strategy: StrategyKind,
    faulty: usize,
    label: String,
    queries: usize,
    transcript: Vec<dagbisect::strategies::TranscriptStep>,
}

#[derive(Serialize)]
struct OptReport {
    dag: String,
    vertices: usize,
    candidates: usize,
    optimal: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    tree: Option<dagbisect::StrategyTree>,
}

#[derive(Serialize)]
struct CrspReport {
    vertices: usize,
    candidates: usize,
    budget: usize,
    optimal: usize,
    within_budget: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    tree: Option<dagbisect::StrategyTree>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Claims) => ExitCode::from(3),
    }
}

fn dispatch(cmd: Command) -> CmdResult {
    match cmd {
        Command::Gen(a) => cmd_gen(a),
        Command::Run(a) => cmd_run(a),
        Command::Tree(a) => cmd_tree(a),
        Command::Opt(a) => cmd_opt(a),
        Command::CrspOpt(a) => cmd_crsp_opt(a),
        Command::Reduce(a) => cmd_reduce(a),
        Command::Transform(a) => cmd_transform(a),
        Command::ExportDot(a) => cmd_export_dot(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

fn read_file(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Writes to `-o FILE` or standard output.
fn emit(output: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match output {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn print_json<T: Serialize>(value: &T) -> anyhow::Result<()> {
    emit(None, &(serde_json::to_string(value)? + "\n"))
}

/// Loads a graph from a file, falling back to a family name.
fn load_dag(spec: &str) -> anyhow::Result<Dag> {
    let path = Path::new(spec);
    if path.is_file() {
        return parse_dag(&read_file(path)?).with_context(|| format!("parsing {spec}"));
    }
    gen_by_name(spec).ok_or_else(|| anyhow!("`{spec}` is neither a readable file nor a known graph name"))
}

fn pick_dag(positional: Option<&String>, flag: &DagArg) -> anyhow::Result<(String, Dag)> {
    let spec = match (positional, &flag.dag_flag) {
        (Some(_), Some(_)) => bail!("graph given both positionally and with --dag"),
        (Some(s), None) | (None, Some(s)) => s.clone(),
        (None, None) => bail!("no graph given; pass a file or name, or --dag FILE"),
    };
    let dag = load_dag(&spec)?;
    Ok((spec, dag))
}

/// Splits `[STRATEGY] [GRAPH]` positionals against the `--strategy` flag.
fn split_positional(
    positional: &[String],
    strategy_flag: Option<String>,
) -> anyhow::Result<(String, Option<&String>)> {
    match (positional, strategy_flag) {
        ([s, g], None) => Ok((s.clone(), Some(g))),
        ([_, _], Some(_)) => bail!("strategy given both positionally and with --strategy"),
        ([g], Some(s)) => Ok((s, Some(g))),
        ([s], None) => Ok((s.clone(), None)),
        ([], Some(s)) => Ok((s, None)),
        _ => bail!("no strategy given; pass `git` or `golden`"),
    }
}

fn require(v: Option<usize>, flag: &str) -> anyhow::Result<usize> {
    v.ok_or_else(|| anyhow!("this family needs --{flag}"))
}

fn cmd_gen(a: GenArgs) -> CmdResult {
    let base = || -> anyhow::Result<Dag> {
        load_dag(a.dag.as_deref().ok_or_else(|| anyhow!("comb families need --dag <base>"))?)
    };
    let dag = match a.family {
        Family::Path => gen_path(require(a.n, "n")?)?,
        Family::Octopus => gen_octopus(require(a.n, "n")?)?,
        Family::Claw => gen_claw(),
        Family::Comb => gen_comb(&base()?, None)?.0,
        Family::CombEvenTweak => gen_comb_even_tweak(&base()?, None)?.0,
        Family::Pathological => gen_pathological(require(a.k, "k")?)?,
        Family::Jk => gen_jk(require(a.k, "k")?, !a.no_parity_fix)?.0,
        Family::JkDelta => {
            gen_jk_delta(require(a.k, "k")?, require(a.delta, "delta")?, !a.no_parity_fix)?.0
        }
        Family::Fib => gen_fibonacci(require(a.i, "i")?)?,
        Family::FibPrime => gen_fibonacci_prime(require(a.i, "i")?)?,
        Family::Fig4 => gen_fig4(),
        Family::Fig9 => gen_fig9(),
        Family::RandomBinary => gen_random_binary(require(a.n, "n")?, a.seed)?,
        Family::RandomDelta => {
            gen_random_delta(require(a.n, "n")?, require(a.delta, "delta")?, a.seed)?
        }
    };
    eprintln!("{} vertices, {} arcs", dag.len(), dag.arcs().len());
    emit(a.output.as_deref(), &write_dag(&dag))?;
    Ok(())
}

fn cmd_run(a: RunArgs) -> CmdResult {
    let (strategy, graph) = split_positional(&a.positional, a.strategy)?;
    let kind: StrategyKind = strategy.parse()?;
    let (name, dag) = pick_dag(graph, &a.dag)?;
    let picker = kind.picker();

    if a.interactive {
        let stdin = io::stdin();
        let mut oracle = StreamOracle::new(stdin.lock(), io::stdout());
        let r = run_session(picker, &dag, &mut oracle)?;
        eprintln!("faulty commit: {} after {} queries", dag.label(r.faulty), r.queries);
        print_json(&SessionReport {
            dag: name,
            strategy: kind,
            faulty: r.faulty,
            label: dag.label(r.faulty),
            queries: r.queries,
            transcript: r.transcript,
        })?;
        return Ok(());
    }

    if let Some(f) = a.faulty {
        let marked = dag.marked()?;
        if f >= dag.len() || !dag.ancestor_table().is_ancestor(f, marked) {
            return Err(anyhow!("vertex {f} is not an ancestor of the marked vertex {marked}").into());
        }
        let r = run_session(picker, &dag, &mut SimulatedOracle::new(f))?;
        eprintln!("found {} in {} queries", dag.label(r.faulty), r.queries);
        print_json(&SessionReport {
            dag: name,
            strategy: kind,
            faulty: r.faulty,
            label: dag.label(r.faulty),
            queries: r.queries,
            transcript: r.transcript,
        })?;
        return Ok(());
    }

    let per = per_faulty_queries(picker, &dag)?;
    let worst = per.iter().map(|p| p.1).max().unwrap_or(0);
    let optimal = if a.optimal {
        Some(optimal_queries_with(&dag, SolverConfig::with_cap(a.cap))?)
    } else {
        None
    };
    let ratio = optimal.map(|o| if o == 0 { 1.0 } else { worst as f64 / o as f64 });
    eprintln!("{:<12} queries", "faulty");
    for &(v, q) in &per {
        eprintln!("{:<12} {q}", dag.label(v));
    }
    eprintln!("worst case: {worst}");
    print_json(&RunReport {
        dag: name,
        strategy: kind,
        worst_case: worst,
        per_faulty: per
            .into_iter()
            .map(|(v, q)| PerFaulty { faulty: v, label: dag.label(v), queries: q })
            .collect(),
        optimal,
        ratio,
    })?;
    Ok(())
}

fn cmd_tree(a: TreeArgs) -> CmdResult {
    let (strategy, graph) = split_positional(&a.positional, a.strategy)?;
    let (_, dag) = pick_dag(graph, &a.dag)?;
    let tree = if strategy == "optimal" {
        optimal_strategy_with(&dag, SolverConfig::with_cap(a.cap))?
    } else {
        let kind: StrategyKind = strategy.parse()?;
        build_strategy_tree(kind.picker(), &BisectState::for_marked(&dag)?)?
    };
    eprintln!("height {}", tree.height());
    let text = if a.json { tree.to_json() + "\n" } else { tree.to_dot(&dag) };
    emit(a.output.as_deref(), &text)?;
    Ok(())
}

fn cmd_opt(a: OptArgs) -> CmdResult {
    let (name, dag) = pick_dag(a.graph.as_ref(), &a.dag)?;
    let config = SolverConfig::with_cap(a.cap);
    let optimal = optimal_queries_with(&dag, config)?;
    let tree = if a.tree { Some(optimal_strategy_with(&dag, config)?) } else { None };
    eprintln!("optimal worst case: {optimal}");
    print_json(&OptReport {
        dag: name,
        vertices: dag.len(),
        candidates: dag.ancestor_count(dag.marked()?),
        optimal,
        tree,
    })?;
    Ok(())
}

fn cmd_crsp_opt(a: CrspOptArgs) -> CmdResult {
    let path = match (a.instance, a.dag_flag) {
        (Some(_), Some(_)) => return Err(anyhow!("instance given twice").into()),
        (Some(p), None) | (None, Some(p)) => p,
        (None, None) => return Err(anyhow!("no instance file given").into()),
    };
    let inst = parse_crsp(&read_file(&path)?)?;
    let optimal = crsp_optimal_queries_with(&inst.dag, &inst.innocent, SolverConfig::with_cap(a.cap))?;
    let tree = if a.tree { Some(crsp_optimal_strategy(&inst.dag, &inst.innocent)?) } else { None };
    eprintln!("optimal worst case: {optimal} (budget {})", inst.budget);
    print_json(&CrspReport {
        vertices: inst.dag.len(),
        candidates: inst.candidates().count_ones(..),
        budget: inst.budget,
        optimal,
        within_budget: optimal <= inst.budget,
        tree,
    })?;
    Ok(())
}

fn cmd_reduce(a: ReduceArgs) -> CmdResult {
    let f = preprocess_pure_literals(&parse_bsat(&read_file(&a.cnf)?)?);
    let (inst, _) = reduce_bsat_to_crsp(&f)?;
    eprintln!(
        "{} variables, {} clauses -> {} vertices, budget {}",
        f.vars,
        f.clauses.len(),
        inst.dag.len(),
        inst.budget
    );
    emit(a.output.as_deref(), &inst.to_text())?;
    Ok(())
}

fn cmd_transform(a: TransformArgs) -> CmdResult {
    let text = read_file(&a.input)?;
    let out = match a.direction {
        Direction::CrspToRsp => {
            let inst = parse_crsp(&text)?;
            if !inst.innocent_is_descendant_closed() {
                eprintln!("warning: innocent set is not closed under descendants; the optimum may change");
            }
            write_dag(&crsp_to_rsp(&inst))
        }
        Direction::RspToCrsp => {
            let dag = parse_dag(&text)?;
            let (inst, _) = rsp_to_crsp(&dag, dag.marked()?, a.budget)?;
            inst.to_text()
        }
    };
    emit(a.output.as_deref(), &out)?;
    Ok(())
}

fn cmd_export_dot(a: ExportDotArgs) -> CmdResult {
    let (_, dag) = pick_dag(a.graph.as_ref(), &a.dag)?;
    let state = if a.live { Some(BisectState::for_marked(&dag)?) } else { None };
    for &v in &a.highlight {
        if v >= dag.len() {
            return Err(dagbisect::Error::VertexOutOfRange { vertex: v, n: dag.len() }.into());
        }
    }
    let opts = DotOptions {
        state: state.as_ref(),
        highlights: a.highlight.iter().copied().collect::<BTreeSet<_>>(),
    };
    emit(a.output.as_deref(), &export_dot(&dag, &opts))?;
    Ok(())
}

fn print_table(reports: &[ClaimReport]) {
    for r in reports {
        eprintln!("{} {}", if r.pass { "PASS" } else { "FAIL" }, r.claim);
        for row in &r.rows {
            eprintln!(
                "    [{}] {}: expected {}, got {}",
                if row.pass { "ok" } else { "FAIL" },
                row.case,
                row.expected,
                row.actual
            );
        }
    }
}

fn cmd_verify(a: VerifyArgs) -> CmdResult {
    let reports = if a.suite == "all" { run_all()? } else { vec![run_claim(&a.suite)?] };
    print_table(&reports);
    print_json(&reports)?;
    if reports.iter().all(|r| r.pass) {
        Ok(())
    } else {
        Err(Failure::Claims)
    }
}
