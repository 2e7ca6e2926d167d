//! Command-line front end. One verb per module operation family; all output
//! is deterministic (identical invocations print identical bytes).
//!
//! Exit codes: 0 success, 1 domain error, 2 size guard exceeded, 3 usage.

use std::fs;
use std::io::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use num_traits::Zero;

use peermech::env::{load_instance, Environment, Instance};
use peermech::extremal::{
    check_hole_characterization, construct_hole_mechanism, enumerate_extreme_points, is_extreme,
    DEFAULT_ENUM_GUARD,
};
use peermech::fgraph::{
    components_of, find_odd_holes, to_dot, to_json_adjacency, FeasibilityGraph, GraphOracle,
    HoleSearch, DEFAULT_HOLE_GUARD,
};
use peermech::hardness::{reduce, verify_reduction, SourceGraph};
use peermech::mech::{
    format_profile, informational_size_profile, load_mechanism, rank_table, rank_table_csv,
    ranking_mechanism, utility, Mechanism, Mode,
};
use peermech::rat::{fmt_rat, parse_rat, Rat};
use peermech::simgen::{
    estimate_regularity, gen_ci_env, gen_group_env, gen_network_env, gen_symmetric_env,
    jury_replication_check, replication_case_check, run_scaling_experiment, ExperimentConfig,
    InfoStructure, NetworkFamily, ReplicationCase, ReplicationReport,
};
use peermech::solve::{
    confirm_uniqueness, optimality_gap_report, solve_deterministic, solve_jury, solve_lp,
    SolveOptions, SolveReport,
};
use peermech::{Error, Result};

#[derive(Parser)]
#[command(
    name = "peermech",
    version,
    about = "Exact solvers for peer-information allocation"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact LP optimum over all DIC mechanisms
    Solve(SolveArgs),
    /// Exact optimum over deterministic DIC mechanisms
    SolveDet(SolveArgs),
    /// Optimal jury mechanism, or a replication check against a bound
    Jury(JuryArgs),
    /// Rank-threshold mechanism at a given threshold
    Ranking(RankingArgs),
    /// Peer values, ranks and informational size per support profile
    RankTable(RankTableArgs),
    /// Feasibility-graph queries
    Graph(GraphArgs),
    /// Extreme-point tests, enumeration and construction
    Extreme(ExtremeArgs),
    /// Stable-set hardness gadget
    Reduce(ReduceArgs),
    /// Environment generators
    Gen(GenArgs),
    /// Scaling experiment over an (n, p) grid
    Simulate(SimulateArgs),
    /// Gap report: rank-threshold utilities against the exact optima
    Bound(BoundArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    MayWithhold,
    MustAllocate,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::MayWithhold => Mode::MayWithhold,
            ModeArg::MustAllocate => Mode::MustAllocate,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file: an environment or a bare weight vector
    #[arg(long, value_name = "FILE")]
    env: String,
    #[arg(long, value_enum, default_value = "may-withhold")]
    mode: ModeArg,
    /// Also decide whether the optimum is the unique optimal point
    #[arg(long)]
    unique: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Add a decimal rendering next to each exact rational
    #[arg(long)]
    float: bool,
}

#[derive(Args)]
struct JuryArgs {
    /// Environment file: solve for the optimal juror set
    #[arg(long, value_name = "FILE", conflicts_with_all = ["structure", "n", "case"])]
    env: Option<String>,
    #[arg(long, value_enum, default_value = "may-withhold")]
    mode: ModeArg,
    /// Information structure file: run the replication check instead
    #[arg(long, value_name = "FILE", requires = "n")]
    structure: Option<String>,
    /// Base agent count for the replication check
    #[arg(long, requires = "structure")]
    n: Option<usize>,
    /// Restrict the replication check to one exchangeability case
    #[arg(long, value_enum, requires = "structure")]
    case: Option<CaseArg>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    float: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseArg {
    Suppliers,
    Recipients,
}

#[derive(Args)]
struct RankingArgs {
    #[arg(long, value_name = "FILE")]
    env: String,
    /// Rank threshold in (0, 1), e.g. 2/3
    #[arg(long, value_name = "RAT")]
    p: String,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    float: bool,
}

#[derive(Args)]
struct RankTableArgs {
    #[arg(long, value_name = "FILE")]
    env: String,
    /// Append the regularity grid at this tolerance
    #[arg(long, value_name = "RAT")]
    regularity_eps: Option<String>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct GraphArgs {
    #[command(subcommand)]
    cmd: GraphCmd,
}

#[derive(Subcommand)]
enum GraphCmd {
    /// List odd holes up to a length cap
    Holes {
        #[arg(long, value_name = "FILE")]
        env: String,
        /// Longest hole length to search for (default: the vertex count)
        #[arg(long)]
        max_len: Option<usize>,
        /// Stop at the first hole found
        #[arg(long)]
        first: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Export the graph (text = DOT, json = adjacency, csv = edge pairs)
    Export {
        #[arg(long, value_name = "FILE")]
        env: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Connected components of an induced vertex subset
    Components {
        #[arg(long, value_name = "FILE")]
        env: String,
        /// Vertex ids like `1:(a,b)`, separated by `;`
        #[arg(long, value_name = "IDS")]
        vertices: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

#[derive(Args)]
struct ExtremeArgs {
    #[command(subcommand)]
    cmd: ExtremeCmd,
}

#[derive(Subcommand)]
enum ExtremeCmd {
    /// Decide whether a mechanism is an extreme point
    Verify {
        #[arg(long, value_name = "FILE")]
        env: String,
        #[arg(long, value_name = "FILE")]
        mech: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Enumerate all extreme points of the DIC polytope
    Enumerate {
        #[arg(long, value_name = "FILE")]
        env: String,
        #[arg(long, value_enum, default_value = "may-withhold")]
        mode: ModeArg,
        /// Print only the stochastic extreme points
        #[arg(long)]
        stochastic_only: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Build the hole-plus-stable-set stochastic extreme mechanism
    Construct {
        #[arg(long, value_name = "FILE")]
        env: String,
        /// Hole vertex ids in cycle order, separated by `;`
        #[arg(long, value_name = "IDS")]
        hole: String,
        /// Stable-set vertex ids, separated by `;`
        #[arg(long, value_name = "IDS", default_value = "")]
        stable: String,
        /// Also run the extremality and hole-characterization tests
        #[arg(long)]
        check: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

#[derive(Args)]
struct ReduceArgs {
    /// Source graph: `.json` for the JSON form, anything else as an edge list
    #[arg(long, value_name = "FILE")]
    graph: String,
    /// Target stable-set size in the source graph
    #[arg(long)]
    k: usize,
    /// Brute-force both sides of the equivalence
    #[arg(long)]
    verify: bool,
    /// Write the reduced instance JSON here
    #[arg(long, value_name = "FILE")]
    out: Option<String>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct GenArgs {
    #[command(subcommand)]
    cmd: GenCmd,
}

#[derive(Subcommand)]
enum GenCmd {
    /// Ternary groups with rank-visible values and a uniform 9-profile support
    Group {
        /// Number of 3-agent groups
        #[arg(long, default_value_t = 1)]
        ell: usize,
        #[arg(long, value_name = "FILE")]
        out: Option<String>,
    },
    /// Observation network with noisy per-edge signals
    Network {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long)]
        n: usize,
        /// Equally likely value levels, comma-separated rationals
        #[arg(long, value_name = "RATS", allow_hyphen_values = true)]
        levels: String,
        /// Channel noise in [0, 1]
        #[arg(long, value_name = "RAT")]
        noise: String,
        /// Accepted for interface uniformity; the generator is deterministic
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "FILE")]
        out: Option<String>,
    },
    /// Conditionally independent signals from an information structure
    Ci {
        #[arg(long, value_name = "FILE")]
        structure: String,
        #[arg(long)]
        n: usize,
        #[arg(long, value_name = "FILE")]
        out: Option<String>,
    },
    /// Exchangeable joint obtained by symmetrizing a seeded draw
    Symmetric {
        #[arg(long)]
        n: usize,
        /// Type labels, comma-separated
        #[arg(long, value_name = "LABELS")]
        alphabet: String,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_name = "FILE")]
        out: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Ring,
    Star,
    Path,
}

#[derive(Args)]
struct SimulateArgs {
    /// Experiment configuration JSON
    #[arg(long, value_name = "FILE")]
    config: String,
    /// Worker threads for independent grid cells
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long, value_name = "FILE")]
    env: String,
    /// Rank thresholds, comma-separated rationals
    #[arg(long, value_name = "RATS")]
    p_grid: String,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    float: bool,
}

fn main() -> ExitCode {
    // Die quietly when a downstream pipe closes (e.g. `peermech ... | head`).
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::GuardExceeded(_) => 2,
                _ => 1,
            })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Solve(a) => cmd_solve(a, false),
        Cmd::SolveDet(a) => cmd_solve(a, true),
        Cmd::Jury(a) => cmd_jury(a),
        Cmd::Ranking(a) => cmd_ranking(a),
        Cmd::RankTable(a) => cmd_rank_table(a),
        Cmd::Graph(a) => cmd_graph(a.cmd),
        Cmd::Extreme(a) => cmd_extreme(a.cmd),
        Cmd::Reduce(a) => cmd_reduce(a),
        Cmd::Gen(a) => cmd_gen(a.cmd),
        Cmd::Simulate(a) => cmd_simulate(a),
        Cmd::Bound(a) => cmd_bound(a),
    }
}

fn read(path: &str) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::invalid(format!("{path}: {e}")))
}

fn load_env_file(path: &str) -> Result<Environment> {
    match load_instance(&read(path)?)? {
        Instance::Env(env) => Ok(env),
        Instance::Weights(_) => Err(Error::invalid(format!(
            "{path}: this command needs a full environment"
        ))),
    }
}

fn graph_of(inst: &Instance) -> Result<FeasibilityGraph> {
    FeasibilityGraph::build(inst.type_spaces().to_vec())
}

/// `p/q`, with a fixed six-digit decimal rendering appended when asked for.
fn show(r: &Rat, float: bool) -> String {
    if float {
        format!("{} ({})", fmt_rat(r), rat_f64(r))
    } else {
        fmt_rat(r)
    }
}

fn rat_f64(r: &Rat) -> String {
    let num = r.numer().to_string().parse::<f64>().unwrap_or(f64::NAN);
    let den = r.denom().to_string().parse::<f64>().unwrap_or(f64::NAN);
    format!("{:.6}", num / den)
}

/// Enumeration guard, overridable through the environment.
fn enum_guard() -> Result<usize> {
    match std::env::var("PEERMECH_GUARD_VERTICES") {
        Ok(s) => s
            .parse::<usize>()
            .map_err(|_| Error::invalid(format!("PEERMECH_GUARD_VERTICES: `{s}` is not a count"))),
        Err(_) => Ok(DEFAULT_ENUM_GUARD),
    }
}

fn parse_rat_list(text: &str, what: &str) -> Result<Vec<Rat>> {
    let items: Vec<&str> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if items.is_empty() {
        return Err(Error::invalid(format!("{what}: empty list")));
    }
    items.iter().map(|s| parse_rat(s)).collect()
}

fn parse_vertex_list(g: &FeasibilityGraph, text: &str) -> Result<Vec<usize>> {
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| g.parse_vertex(s))
        .collect()
}

fn write_out(out: Option<&str>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Error::invalid(format!("{path}: {e}")))?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

/// Re-renders a report JSON with decimal columns for the exact fields.
fn inject_float(json: String, float: bool) -> String {
    if !float {
        return json;
    }
    let mut value: serde_json::Value = serde_json::from_str(&json).expect("own json is valid");
    if let Some(obj) = value.as_object_mut() {
        if let Some(serde_json::Value::String(s)) = obj.get("objective") {
            if let Ok(r) = parse_rat(s) {
                obj.insert("objective_float".into(), serde_json::json!(rat_f64(&r)));
            }
        }
    }
    serde_json::to_string_pretty(&value).expect("report serializes")
}

fn print_solve_report(report: &SolveReport, g: &FeasibilityGraph, fmt: Format, float: bool) {
    match fmt {
        Format::Json => println!("{}", inject_float(report.to_json(g), float)),
        _ => {
            println!("status: {}", report.status.as_str());
            println!("objective: {}", show(&report.objective, float));
            if let Some(u) = report.unique {
                println!("unique: {u}");
            }
            if let Some(jurors) = &report.jurors {
                let list: Vec<String> = jurors.iter().map(|j| (j + 1).to_string()).collect();
                println!("jurors: {}", list.join(","));
            }
            println!("{}", report.mechanism.to_json(g));
        }
    }
}

fn cmd_solve(a: SolveArgs, deterministic: bool) -> Result<()> {
    let inst = load_instance(&read(&a.env)?)?;
    let g = graph_of(&inst)?;
    let mode = a.mode.into();
    let opts = SolveOptions::default();
    let mut report = if deterministic {
        solve_deterministic(&inst, mode, &opts)?
    } else {
        solve_lp(&inst, mode, &opts)?
    };
    if a.unique {
        if deterministic {
            return Err(Error::invalid(
                "--unique applies to the LP optimum; use `solve` for it",
            ));
        }
        report.unique = Some(confirm_uniqueness(&inst, mode, &report, &opts)?);
    }
    print_solve_report(&report, &g, a.format, a.float);
    Ok(())
}

fn replication_json(r: &ReplicationReport) -> serde_json::Value {
    serde_json::json!({
        "case": r.case.as_str(),
        "n": r.n,
        "small_bound": fmt_rat(&r.small_bound),
        "replicated_utility": fmt_rat(&r.replicated_utility),
        "equal": r.equal,
        "jurors": r.jurors.iter().map(|j| j + 1).collect::<Vec<_>>(),
    })
}

fn cmd_jury(a: JuryArgs) -> Result<()> {
    if let Some(path) = &a.env {
        let env = load_env_file(path)?;
        let g = FeasibilityGraph::build(env.type_spaces().to_vec())?;
        let report = solve_jury(&env, a.mode.into(), &SolveOptions::default())?;
        print_solve_report(&report, &g, a.format, a.float);
        return Ok(());
    }
    let Some(path) = &a.structure else {
        return Err(Error::invalid("pass either --env or --structure"));
    };
    let structure = InfoStructure::from_json(&read(path)?)?;
    let n = a.n.expect("clap enforces --n with --structure");
    let reports = match a.case {
        Some(CaseArg::Suppliers) => {
            vec![replication_case_check(
                &structure,
                n,
                ReplicationCase::Suppliers,
            )?]
        }
        Some(CaseArg::Recipients) => {
            vec![replication_case_check(
                &structure,
                n,
                ReplicationCase::Recipients,
            )?]
        }
        None => jury_replication_check(&structure, n)?,
    };
    match a.format {
        Format::Json => {
            let rows: Vec<_> = reports.iter().map(replication_json).collect();
            println!(
                "{}",
                serde_json::to_string_pretty(&rows).expect("report serializes")
            );
        }
        _ => {
            for r in &reports {
                let jurors: Vec<String> = r.jurors.iter().map(|j| (j + 1).to_string()).collect();
                println!(
                    "case={} n={} bound={} replicated={} equal={} jurors={}",
                    r.case.as_str(),
                    r.n,
                    show(&r.small_bound, a.float),
                    show(&r.replicated_utility, a.float),
                    r.equal,
                    jurors.join(","),
                );
            }
        }
    }
    Ok(())
}

fn cmd_ranking(a: RankingArgs) -> Result<()> {
    let env = load_env_file(&a.env)?;
    let g = FeasibilityGraph::build(env.type_spaces().to_vec())?;
    let p = parse_rat(&a.p)?;
    let m = ranking_mechanism(&env, &g, &p)?;
    let u = utility(&env, &g, &m);
    match a.format {
        Format::Json => {
            let mech: serde_json::Value =
                serde_json::from_str(&m.to_json(&g)).expect("own json is valid");
            let value = serde_json::json!({
                "p": fmt_rat(&p),
                "utility": fmt_rat(&u),
                "mechanism": mech,
            });
            println!(
                "{}",
                serde_json::to_string_pretty(&value).expect("report serializes")
            );
        }
        _ => {
            println!("p: {}", fmt_rat(&p));
            println!("utility: {}", show(&u, a.float));
            println!("{}", m.to_json(&g));
        }
    }
    Ok(())
}

fn cmd_rank_table(a: RankTableArgs) -> Result<()> {
    let env = load_env_file(&a.env)?;
    let table = rank_table(&env);
    let info = informational_size_profile(&env);
    let regularity = match &a.regularity_eps {
        Some(eps) => Some(estimate_regularity(&env, &parse_rat(eps)?)?),
        None => None,
    };
    match a.format {
        Format::Json => {
            let profiles: Vec<_> = table
                .profiles
                .iter()
                .map(|p| {
                    serde_json::json!({
                        "theta": format_profile(&env, &p.theta),
                        "prob": fmt_rat(&p.prob),
                        "peer_values": p.peer_values.iter().map(fmt_rat).collect::<Vec<_>>(),
                        "ranks": p.ranks.iter().map(fmt_rat).collect::<Vec<_>>(),
                        "robust_ranks": p.robust_ranks.iter().map(fmt_rat).collect::<Vec<_>>(),
                        "delta": fmt_rat(&p.delta),
                    })
                })
                .collect();
            let value = serde_json::json!({
                "profiles": profiles,
                "max_delta": fmt_rat(&info.max_delta),
                "regularity": regularity.map(|grid| {
                    grid.iter()
                        .map(|(eta, mass)| vec![fmt_rat(eta), fmt_rat(mass)])
                        .collect::<Vec<_>>()
                }),
            });
            println!(
                "{}",
                serde_json::to_string_pretty(&value).expect("report serializes")
            );
        }
        _ => {
            print!("{}", rank_table_csv(&env, &table));
            println!("max_delta,{}", fmt_rat(&info.max_delta));
            if let Some(grid) = regularity {
                println!("eta,mass");
                for (eta, mass) in grid {
                    println!("{},{}", fmt_rat(&eta), fmt_rat(&mass));
                }
            }
        }
    }
    Ok(())
}

fn cmd_graph(cmd: GraphCmd) -> Result<()> {
    match cmd {
        GraphCmd::Holes {
            env,
            max_len,
            first,
            format,
        } => {
            let inst = load_instance(&read(&env)?)?;
            let g = graph_of(&inst)?;
            let max_len = max_len.unwrap_or(g.vertex_count());
            let mode = if first {
                HoleSearch::FirstOnly
            } else {
                HoleSearch::All
            };
            let holes = find_odd_holes(&g, max_len, mode, DEFAULT_HOLE_GUARD)?;
            match format {
                Format::Json => {
                    let rows: Vec<Vec<String>> = holes
                        .iter()
                        .map(|h| h.iter().map(|&v| g.format_vertex(v)).collect())
                        .collect();
                    let value = serde_json::json!({ "count": rows.len(), "holes": rows });
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&value).expect("report serializes")
                    );
                }
                _ => {
                    println!("holes: {}", holes.len());
                    for h in &holes {
                        let ids: Vec<String> = h.iter().map(|&v| g.format_vertex(v)).collect();
                        println!("{}", ids.join(";"));
                    }
                }
            }
        }
        GraphCmd::Export { env, format } => {
            let inst = load_instance(&read(&env)?)?;
            let g = graph_of(&inst)?;
            match format {
                Format::Json => print!("{}", to_json_adjacency(&g)),
                Format::Csv => {
                    println!("u,v");
                    for u in 0..g.vertex_count() {
                        for v in (u + 1)..g.vertex_count() {
                            if g.adjacent(u, v) {
                                println!("{},{}", g.format_vertex(u), g.format_vertex(v));
                            }
                        }
                    }
                }
                Format::Text => print!("{}", to_dot(&g)),
            }
        }
        GraphCmd::Components {
            env,
            vertices,
            format,
        } => {
            let inst = load_instance(&read(&env)?)?;
            let g = graph_of(&inst)?;
            let subset = parse_vertex_list(&g, &vertices)?;
            let comps = components_of(&g, &subset);
            match format {
                Format::Json => {
                    let rows: Vec<Vec<String>> = comps
                        .iter()
                        .map(|c| c.iter().map(|&v| g.format_vertex(v)).collect())
                        .collect();
                    let value = serde_json::json!({ "count": rows.len(), "components": rows });
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&value).expect("report serializes")
                    );
                }
                _ => {
                    println!("components: {}", comps.len());
                    for c in &comps {
                        let ids: Vec<String> = c.iter().map(|&v| g.format_vertex(v)).collect();
                        println!("{}", ids.join(";"));
                    }
                }
            }
        }
    }
    Ok(())
}

fn cmd_extreme(cmd: ExtremeCmd) -> Result<()> {
    match cmd {
        ExtremeCmd::Verify { env, mech, format } => {
            let inst = load_instance(&read(&env)?)?;
            let g = graph_of(&inst)?;
            let m = load_mechanism(&g, &read(&mech)?)?;
            let cert = is_extreme(&g, &m)?;
            match format {
                Format::Json => println!("{}", cert.to_json(&g)),
                _ => {
                    println!(
                        "verdict: {}",
                        if cert.extreme {
                            "extreme"
                        } else {
                            "not-extreme"
                        }
                    );
                    println!("rank: {} of {}", cert.rank, g.vertex_count());
                    println!("tight_rows: {}", cert.tight_rows);
                }
            }
        }
        ExtremeCmd::Enumerate {
            env,
            mode,
            stochastic_only,
            format,
        } => {
            let inst = load_instance(&read(&env)?)?;
            let g = graph_of(&inst)?;
            let points = enumerate_extreme_points(&g, mode.into(), enum_guard()?)?;
            let kept: Vec<&Mechanism> = points
                .iter()
                .filter(|m| !stochastic_only || !m.is_deterministic())
                .collect();
            match format {
                Format::Json => {
                    let rows: Vec<serde_json::Value> = kept
                        .iter()
                        .map(|m| serde_json::from_str(&m.to_json(&g)).expect("own json is valid"))
                        .collect();
                    let value = serde_json::json!({ "count": rows.len(), "mechanisms": rows });
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&value).expect("report serializes")
                    );
                }
                _ => {
                    println!("extreme points: {}", kept.len());
                    for m in kept {
                        let support: Vec<String> = (0..m.len())
                            .filter(|&v| !m.q(v).is_zero())
                            .map(|v| format!("{}={}", g.format_vertex(v), fmt_rat(m.q(v))))
                            .collect();
                        println!(
                            "{} {}",
                            if m.is_deterministic() {
                                "deterministic"
                            } else {
                                "stochastic"
                            },
                            support.join(" "),
                        );
                    }
                }
            }
        }
        ExtremeCmd::Construct {
            env,
            hole,
            stable,
            check,
            format,
        } => {
            let inst = load_instance(&read(&env)?)?;
            let g = graph_of(&inst)?;
            let hole = parse_vertex_list(&g, &hole)?;
            let stable = parse_vertex_list(&g, &stable)?;
            let m = construct_hole_mechanism(&g, &hole, &stable)?;
            let checks = if check {
                let cert = is_extreme(&g, &m)?;
                let characterization = check_hole_characterization(&g, &m)?;
                Some((cert, characterization))
            } else {
                None
            };
            match format {
                Format::Json => {
                    let mech: serde_json::Value =
                        serde_json::from_str(&m.to_json(&g)).expect("own json is valid");
                    let value = serde_json::json!({
                        "mechanism": mech,
                        "extreme": checks.as_ref().map(|(c, _)| c.extreme),
                        "all_components_have_holes":
                            checks.as_ref().map(|(_, h)| h.all_components_have_holes),
                    });
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&value).expect("report serializes")
                    );
                }
                _ => {
                    if let Some((cert, characterization)) = &checks {
                        println!("extreme: {}", cert.extreme);
                        println!(
                            "all_components_have_holes: {}",
                            characterization.all_components_have_holes
                        );
                    }
                    println!("{}", m.to_json(&g));
                }
            }
        }
    }
    Ok(())
}

fn cmd_reduce(a: ReduceArgs) -> Result<()> {
    let text = read(&a.graph)?;
    let source = if a.graph.ends_with(".json") {
        SourceGraph::from_json(&text)?
    } else {
        SourceGraph::from_edge_list(&text)?
    };
    let inst = reduce(&source, a.k)?;
    let equivalence = if a.verify {
        Some(verify_reduction(&source, a.k)?)
    } else {
        None
    };
    let weights_json = match inst.to_instance() {
        Instance::Weights(w) => w.to_json(),
        Instance::Env(_) => unreachable!("the gadget emits a weight vector"),
    };
    if let Some(path) = &a.out {
        fs::write(path, &weights_json).map_err(|e| Error::invalid(format!("{path}: {e}")))?;
    }
    match a.format {
        Format::Json => {
            let weights: serde_json::Value =
                serde_json::from_str(&weights_json).expect("own json is valid");
            let value = serde_json::json!({
                "k_hat": inst.k_hat(),
                "k": inst.k(),
                "agents": inst.graph().agents(),
                "vertices": inst.graph().vertex_count(),
                "equivalence": equivalence,
                "instance": weights,
            });
            println!(
                "{}",
                serde_json::to_string_pretty(&value).expect("report serializes")
            );
        }
        _ => match equivalence {
            Some(eq) => println!("k={}, equivalence={}", inst.k(), eq),
            None => println!("k={}", inst.k()),
        },
    }
    Ok(())
}

fn cmd_gen(cmd: GenCmd) -> Result<()> {
    match cmd {
        GenCmd::Group { ell, out } => {
            let env = gen_group_env(ell)?;
            write_out(out.as_deref(), &env.to_json())
        }
        GenCmd::Network {
            family,
            n,
            levels,
            noise,
            seed,
            out,
        } => {
            let adjacency = match family {
                FamilyArg::Ring => NetworkFamily::Ring,
                FamilyArg::Star => NetworkFamily::Star,
                FamilyArg::Path => NetworkFamily::Path,
            }
            .adjacency(n)?;
            let levels = parse_rat_list(&levels, "--levels")?;
            let env = gen_network_env(&adjacency, &levels, &parse_rat(&noise)?, seed)?;
            write_out(out.as_deref(), &env.to_json())
        }
        GenCmd::Ci { structure, n, out } => {
            let structure = InfoStructure::from_json(&read(&structure)?)?;
            let env = gen_ci_env(&structure, n)?;
            write_out(out.as_deref(), &env.to_json())
        }
        GenCmd::Symmetric {
            n,
            alphabet,
            seed,
            out,
        } => {
            let labels: Vec<String> = alphabet
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect();
            let draw = gen_symmetric_env(n, &labels, seed)?;
            write_out(out.as_deref(), &draw.env.to_json())
        }
    }
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let config = ExperimentConfig::from_json(&read(&a.config)?)?;
    let csv = run_scaling_experiment(&config, a.jobs)?;
    match &config.output {
        Some(path) => {
            fs::write(path, &csv).map_err(|e| Error::invalid(format!("{path}: {e}")))?;
        }
        None => {
            print!("{csv}");
            std::io::stdout().flush().ok();
        }
    }
    Ok(())
}

fn cmd_bound(a: BoundArgs) -> Result<()> {
    let env = load_env_file(&a.env)?;
    let p_grid = parse_rat_list(&a.p_grid, "--p-grid")?;
    let report = optimality_gap_report(&env, &p_grid, &SolveOptions::default())?;
    match a.format {
        Format::Json => {
            let rows: Vec<_> = report
                .rows
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "p": fmt_rat(&r.p),
                        "ranking_utility": fmt_rat(&r.ranking_utility),
                        "gap_to_lp": fmt_rat(&r.gap_to_lp),
                        "gap_to_upper": fmt_rat(&r.gap_to_upper),
                    })
                })
                .collect();
            let value = serde_json::json!({
                "lp": fmt_rat(&report.lp),
                "jury": fmt_rat(&report.jury),
                "jurors": report.jurors.iter().map(|j| j + 1).collect::<Vec<_>>(),
                "upper": fmt_rat(&report.upper),
                "rows": rows,
            });
            println!(
                "{}",
                serde_json::to_string_pretty(&value).expect("report serializes")
            );
        }
        Format::Csv => {
            println!("p,ranking_utility,gap_to_lp,gap_to_upper");
            for r in &report.rows {
                println!(
                    "{},{},{},{}",
                    fmt_rat(&r.p),
                    fmt_rat(&r.ranking_utility),
                    fmt_rat(&r.gap_to_lp),
                    fmt_rat(&r.gap_to_upper),
                );
            }
        }
        Format::Text => {
            let jurors: Vec<String> = report.jurors.iter().map(|j| (j + 1).to_string()).collect();
            println!("lp: {}", show(&report.lp, a.float));
            println!(
                "jury: {} (jurors: {})",
                show(&report.jury, a.float),
                jurors.join(",")
            );
            println!("upper: {}", show(&report.upper, a.float));
            for r in &report.rows {
                println!(
                    "p={}: ranking={} gap_lp={} gap_upper={}",
                    fmt_rat(&r.p),
                    show(&r.ranking_utility, a.float),
                    show(&r.gap_to_lp, a.float),
                    show(&r.gap_to_upper, a.float),
                );
            }
        }
    }
    Ok(())
}
