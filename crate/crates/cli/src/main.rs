use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use rtssos::bench::{accuracy_table, run_experiment, summary, write_csv, ExperimentConfig};
use rtssos::ip::TieBreak;
use rtssos::pipeline::{block_report, build_from, Built, Method, Problem};
use rtssos::poly::{format_rational, parse_polynomial, parse_rational, Polynomial};
use rtssos::refine::{refine_state, RefineConfig, SkipRule};
use rtssos::sdp::{solve, write_sdpa, SolverConfig};
use rtssos::tssos::Pop;
use rtssos::Error;

#[derive(Parser)]
#[command(name = "rtssos", version, about = "Term-sparsity SOS relaxations with refined block structure")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a relaxation, export it and optionally solve it.
    Relax(RelaxArgs),
    /// Run an experiment described by a TOML file.
    Bench(BenchArgs),
    /// Record every step of the block refinement as JSON.
    Trace(TraceArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Dense,
    Tssos,
    Chordal,
    Refine,
    RefinedChordal,
}

#[derive(Clone, Copy, ValueEnum)]
enum TieBreakArg {
    FewestMerges,
    MostMerges,
}

#[derive(Clone, Copy, ValueEnum)]
enum SkipArg {
    Never,
    Satisfied,
}

#[derive(Args)]
struct ProblemArgs {
    /// File holding the objective.
    #[arg(long, conflicts_with = "expr")]
    poly: Option<PathBuf>,
    /// Objective given inline.
    #[arg(long)]
    expr: Option<String>,
    /// Number of variables; defaults to the largest index used.
    #[arg(long)]
    n: Option<usize>,
    /// Relaxation order.
    #[arg(long)]
    d_hat: Option<u32>,
    /// Adds R² − Σ xᵢ² ≥ 0.
    #[arg(long, value_name = "R")]
    ball: Option<String>,
    /// Adds a constraint such as "1 - x1^2 >= 0".
    #[arg(long = "constraint", value_name = "POLY >= POLY")]
    constraints: Vec<String>,
}

#[derive(Args)]
struct RefineArgs {
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Cover fraction, one value or one per localizer.
    #[arg(long, value_delimiter = ',')]
    eps: Vec<String>,
    /// k + ε in one number, one value or one per localizer.
    #[arg(long, value_delimiter = ',', conflicts_with = "eps")]
    tau: Vec<String>,
    #[arg(long, value_enum, default_value = "fewest-merges")]
    tie_break: TieBreakArg,
    #[arg(long, value_enum, default_value = "satisfied")]
    skip: SkipArg,
}

#[derive(Args)]
struct RelaxArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_enum, default_value = "tssos")]
    mode: Mode,
    #[command(flatten)]
    refine: RefineArgs,
    /// Solver command; `{input}` and `{output}` are substituted.
    #[arg(long)]
    solver: Option<String>,
    /// Solver time limit in seconds.
    #[arg(long, default_value_t = 5000.0)]
    timeout: f64,
    /// Directory receiving partition.json, relaxation.dat-s and bound.json.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    partition_out: Option<PathBuf>,
    #[arg(long)]
    sdpa_out: Option<PathBuf>,
    #[arg(long)]
    report_out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    config: PathBuf,
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Overrides the solver of the config.
    #[arg(long)]
    solver: Option<String>,
    /// Reference method for the accuracy table.
    #[arg(long)]
    reference: Option<String>,
    #[arg(long, value_delimiter = ',', default_value = "0.001,0.01,0.1")]
    tol: Vec<f64>,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    refine: RefineArgs,
    /// Localizer to refine.
    #[arg(long, default_value_t = 0)]
    localizer: usize,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Structure(_) | Error::IpInfeasible(_) | Error::OddDegree(_) | Error::EmptySupport | Error::ZeroPolynomial | Error::RelaxationOrderTooLow { .. } => 3,
        Error::Solver(_) => 4,
        Error::Timeout(_) => 5,
        _ => 2,
    }
}

fn variable_count(text: &str) -> usize {
    let bytes = text.as_bytes();
    let mut n = 0;
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'x' {
            let start = i + 1;
            let mut j = start;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            if let Ok(v) = text[start..j].parse::<usize>() {
                n = n.max(v);
            }
            i = j.max(i + 1);
        } else {
            i += 1;
        }
    }
    n.max(1)
}

fn negate(p: &Polynomial) -> rtssos::Result<Polynomial> {
    Polynomial::from_terms(p.n(), p.terms().map(|(e, c)| (e.clone(), -c.clone())))
}

/// `lhs >= rhs` or `lhs <= rhs` as a polynomial that must be nonnegative.
fn parse_constraint(text: &str, n: usize) -> rtssos::Result<Polynomial> {
    let (lhs, rhs, flip) = if let Some((l, r)) = text.split_once(">=") {
        (l, r, false)
    } else if let Some((l, r)) = text.split_once("<=") {
        (l, r, true)
    } else {
        return Err(Error::Syntax { pos: 0, msg: format!("constraint '{text}' needs >= or <=") });
    };
    let diff = parse_polynomial(lhs, n)?.add(&negate(&parse_polynomial(rhs, n)?)?)?;
    if flip {
        negate(&diff)
    } else {
        Ok(diff)
    }
}

fn load_problem(args: &ProblemArgs) -> rtssos::Result<(String, Problem)> {
    let text = match (&args.poly, &args.expr) {
        (Some(path), _) => fs::read_to_string(path)?,
        (None, Some(e)) => e.clone(),
        (None, None) => return Err(Error::InvalidParameter("give --poly or --expr".into())),
    };
    let mut n = args.n.unwrap_or_else(|| variable_count(&text));
    if args.n.is_none() {
        for c in &args.constraints {
            n = n.max(variable_count(c));
        }
    }
    let f = parse_polynomial(&text, n)?;
    let mut constraints = args.constraints.iter().map(|c| parse_constraint(c, n)).collect::<rtssos::Result<Vec<_>>>()?;
    if let Some(r) = &args.ball {
        let r = parse_rational(r.trim()).ok_or_else(|| Error::InvalidParameter(format!("bad radius '{r}'")))?;
        constraints.push(rtssos::tssos::ball(n, &r * &r));
    }
    let pop = Pop::new(f, constraints)?;
    let name = args.poly.as_ref().map_or_else(|| "expr".to_string(), |p| p.display().to_string());
    Ok((name, Problem::constrained(pop, args.d_hat)))
}

fn refine_opts(args: &RefineArgs) -> RefineConfig {
    let tie = match args.tie_break {
        TieBreakArg::FewestMerges => TieBreak::FewestMerges,
        TieBreakArg::MostMerges => TieBreak::MostMerges,
    };
    let skip = match args.skip {
        SkipArg::Never => SkipRule::Never,
        SkipArg::Satisfied => SkipRule::Satisfied,
    };
    RefineConfig::default().tie_break(tie).skip(skip)
}

/// Per-localizer `τ` values from `--tau`, or from `--k` and `--eps`.
fn taus(args: &RefineArgs) -> rtssos::Result<Vec<rtssos::BigRational>> {
    let parse = |s: &String| parse_rational(s.trim()).ok_or_else(|| Error::InvalidParameter(format!("cannot parse '{s}'")));
    if !args.tau.is_empty() {
        let t = args.tau.iter().map(parse).collect::<rtssos::Result<Vec<_>>>()?;
        for v in &t {
            RefineConfig::from_tau(v)?;
        }
        return Ok(t);
    }
    if args.eps.is_empty() {
        return Err(Error::InvalidParameter("refined modes need --eps or --tau".into()));
    }
    args.eps
        .iter()
        .map(|s| {
            let e = parse(s)?;
            let cfg = RefineConfig::new(args.k, e)?;
            Ok(cfg.tau())
        })
        .collect()
}

fn method_of(mode: Mode, args: &RefineArgs) -> rtssos::Result<Method> {
    Ok(match mode {
        Mode::Dense => Method::Dense,
        Mode::Tssos => Method::Tssos { k: args.k },
        Mode::Chordal => Method::Chordal { k: args.k },
        Mode::Refine => Method::Refine { taus: taus(args)? },
        Mode::RefinedChordal => Method::RefinedChordal { taus: taus(args)? },
    })
}

fn write_json(path: &Path, value: &Value) -> rtssos::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn size_list(built: &Built) -> String {
    let per: Vec<String> = built
        .blocks
        .iter()
        .map(|b| {
            let mut s: Vec<usize> = b.iter().map(Vec::len).collect();
            s.sort_unstable_by(|a, b| b.cmp(a));
            s.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
        })
        .collect();
    per.join(" | ")
}

fn cmd_relax(args: &RelaxArgs) -> rtssos::Result<()> {
    let (name, problem) = load_problem(&args.problem)?;
    let method = method_of(args.mode, &args.refine)?;
    let init = problem.initial_state()?;
    let built = build_from(&problem, &init, &method, &refine_opts(&args.refine))?;
    let blocks: usize = built.blocks.iter().map(Vec::len).sum();
    println!("mb={}, blocks={blocks}", built.mb_label());
    println!("sizes={}", size_list(&built));

    let out = |explicit: &Option<PathBuf>, file: &str| explicit.clone().or_else(|| args.out_dir.as_ref().map(|d| d.join(file)));
    if let Some(p) = out(&args.partition_out, "partition.json") {
        let value = json!({
            "problem": name,
            "method": method.to_string(),
            "mb": built.max_blocks(),
            "localizers": block_report(&init, &built),
        });
        write_json(&p, &value)?;
    }
    if let Some(p) = out(&args.sdpa_out, "relaxation.dat-s") {
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        write_sdpa(&built.sdp, &p)?;
    }
    let solver = match &args.solver {
        Some(cmd) => Some(SolverConfig::new(cmd.clone())),
        None => SolverConfig::from_env(),
    };
    let Some(solver) = solver else { return Ok(()) };
    let result = solve(&built.sdp, &solver.with_timeout(Duration::from_secs_f64(args.timeout)))?;
    let bound = result.bound(&built.sdp);
    if let Some(p) = out(&args.report_out, "bound.json") {
        let value = json!({
            "problem": name,
            "method": method.to_string(),
            "mb": built.max_blocks(),
            "status": result.status,
            "theta": bound,
            "primal": result.primal,
            "dual": result.dual,
            "objective_constant": format_rational(&built.sdp.objective_constant),
            "solver_seconds": result.seconds,
            "ip_seconds": built.ip_seconds,
            "build_seconds": built.build_seconds,
        });
        write_json(&p, &value)?;
    }
    match bound {
        Some(theta) => {
            println!("theta={theta:.6}");
            Ok(())
        }
        None if result.status.contains("INF") => Err(Error::Structure(format!("relaxation reported {}", result.status))),
        None => Err(Error::Solver(format!("solver finished with status {}", result.status))),
    }
}

fn cmd_bench(args: &BenchArgs) -> rtssos::Result<()> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if args.solver.is_some() {
        cfg.solver = args.solver.clone();
    }
    let rows = run_experiment(&cfg)?;
    match &args.out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            write_csv(&rows, fs::File::create(p)?)?
        }
        None => write_csv(&rows, std::io::stdout().lock())?,
    }
    let log = |line: String| if args.out.is_some() { println!("{line}") } else { eprintln!("{line}") };
    for line in summary(&rows) {
        log(line);
    }
    if let Some(reference) = &args.reference {
        for r in accuracy_table(&rows, reference, &args.tol) {
            let ratio = r.mean_time_ratio.map_or("-".to_string(), |v| format!("{v:.3}"));
            log(format!("{} tol={} solved={:.3} time_ratio={ratio} of {}", r.method, r.tol, r.fraction, r.instances));
        }
    }
    Ok(())
}

fn cmd_trace(args: &TraceArgs) -> rtssos::Result<()> {
    let (name, problem) = load_problem(&args.problem)?;
    let t = taus(&args.refine)?;
    let tau = t.get(args.localizer).or(t.first()).expect("nonempty").clone();
    let base = RefineConfig::from_tau(&tau)?;
    let mut st = problem.initial_state()?;
    if args.localizer >= st.num_localizers() {
        return Err(Error::InvalidParameter(format!("localizer {} does not exist", args.localizer)));
    }
    for _ in 0..base.k {
        st = st.step();
    }
    let opts = refine_opts(&args.refine).traced();
    let r = refine_state(&st, args.localizer, &base.eps, &opts)?;
    let basis = st.localizer(args.localizer).basis();
    let names = |b: &[usize]| b.iter().map(|&i| basis.get(i).monomial_string()).collect::<Vec<_>>();
    let value = json!({
        "problem": name,
        "k": base.k,
        "eps": format_rational(&base.eps),
        "basis": names(&(0..basis.len()).collect::<Vec<_>>()),
        "tssos_blocks": r.tssos_blocks.dump_order().into_iter().map(names).collect::<Vec<_>>(),
        "steps": r.steps,
        "ips_solved": r.ips_solved(),
        "final_width": r.width(),
        "final_blocks": r.blocks.dump_order().into_iter().map(names).collect::<Vec<_>>(),
    });
    match &args.out {
        Some(p) => write_json(p, &value)?,
        None => println!("{}", serde_json::to_string_pretty(&value)?),
    }
    eprintln!("width={}, ips={}", r.width(), r.ips_solved());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Relax(a) => cmd_relax(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Trace(a) => cmd_trace(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
