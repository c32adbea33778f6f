use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed};
use wait_timeout::ChildExt;

use super::{IpProblem, IpSolution, SolveStats, SolveStatus};
use crate::error::{Error, Result};

/// Environment variable naming the external MILP command.
pub const MILP_SOLVER_ENV: &str = "RTSSOS_MILP_SOLVER";

fn var_name(p: &IpProblem, v: usize) -> String {
    match p.vars().get(v) {
        Some(&(i, j)) => format!("y_{i}_{j}"),
        None => "w".to_string(),
    }
}

fn lcm_of_denominators<'a>(values: impl Iterator<Item = &'a BigRational>) -> BigInt {
    values.fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

/// The problem in CPLEX LP format. Every constraint is scaled to integer
/// coefficients.
pub fn lp_string(p: &IpProblem) -> String {
    let mut s = String::new();
    s.push_str("\\ merge subproblem\nMinimize\n obj: w\nSubject To\n");
    for c in p.constraints() {
        let scale = BigRational::from_integer(lcm_of_denominators(c.coeffs.iter().map(|(_, a)| a).chain(std::iter::once(&c.rhs))));
        let _ = write!(s, " {}:", c.name);
        for (k, (v, a)) in c.coeffs.iter().enumerate() {
            let a = a * &scale;
            match (a.is_negative(), k) {
                (true, _) => s.push_str(" -"),
                (false, 0) => {}
                (false, _) => s.push_str(" +"),
            }
            let mag = a.abs();
            if !mag.is_one() {
                let _ = write!(s, " {}", mag.to_integer());
            }
            let _ = write!(s, " {}", var_name(p, *v));
        }
        let rhs = (&c.rhs * &scale).to_integer();
        let _ = writeln!(s, " {} {rhs}", c.sense);
    }
    let _ = writeln!(s, "Bounds\n w >= {}", p.base_width());
    if !p.vars().is_empty() {
        s.push_str("Binary\n");
        for v in 0..p.num_vars() {
            let _ = writeln!(s, " {}", var_name(p, v));
        }
    }
    s.push_str("General\n w\nEnd\n");
    s
}

pub fn export_lp(p: &IpProblem, path: &Path) -> Result<()> {
    std::fs::write(path, lp_string(p))?;
    Ok(())
}

fn scratch_dir() -> Result<PathBuf> {
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let dir = std::env::temp_dir().join(format!("rtssos-milp-{}-{}", std::process::id(), COUNTER.fetch_add(1, Ordering::Relaxed)));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// Solves `p` with an external MILP command invoked as
/// `<command> <model.lp> <solution.txt>`. The solution file must list one
/// `name value` pair per line. No tie-break is applied.
pub fn solve_external(p: &IpProblem, command: &str, timeout: Duration) -> Result<IpSolution> {
    let mut parts = command.split_whitespace();
    let program = parts.next().ok_or_else(|| Error::Config("empty MILP solver command".into()))?;
    let dir = scratch_dir()?;
    let model = dir.join("model.lp");
    let sol = dir.join("solution.txt");
    export_lp(p, &model)?;
    let start = Instant::now();
    let mut child = Command::new(program)
        .args(parts)
        .arg(&model)
        .arg(&sol)
        .stdout(Stdio::null())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| Error::Solver(format!("cannot start '{program}': {e}")))?;
    let status = match child.wait_timeout(timeout)? {
        Some(s) => s,
        None => {
            let _ = child.kill();
            let _ = child.wait();
            return Err(Error::Timeout(timeout.as_secs_f64()));
        }
    };
    if !status.success() {
        return Err(Error::Solver(format!("'{program}' exited with {status}")));
    }
    let text = std::fs::read_to_string(&sol)?;
    let _ = std::fs::remove_dir_all(&dir);
    let mut y = vec![false; p.num_vars()];
    for line in text.lines() {
        let mut it = line.split_whitespace();
        let (Some(name), Some(value)) = (it.next(), it.next()) else { continue };
        let value: f64 = value.parse().map_err(|_| Error::Solver(format!("bad value in solution line '{line}'")))?;
        if let Some(rest) = name.strip_prefix("y_") {
            let mut ij = rest.split('_').map(|t| t.parse::<usize>());
            if let (Some(Ok(i)), Some(Ok(j))) = (ij.next(), ij.next()) {
                if let Some(v) = p.var_index(i, j) {
                    y[v] = value > 0.5;
                }
            }
        }
    }
    let merged = p.merged_blocks(&y);
    let labels = merged.labels();
    let y = p.solution_from_blocks(&labels);
    let omega = p.evaluate(&y)?;
    Ok(IpSolution { omega, y, merged, stats: SolveStats { nodes: 0, seconds: start.elapsed().as_secs_f64(), status: SolveStatus::Optimal } })
}

