use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use wait_timeout::ChildExt;

use super::{write_sdpa, MomentSdp};
use crate::error::{Error, Result};
use crate::poly::rational_to_f64;

/// Environment variable holding the default solver command.
pub const SDP_SOLVER_ENV: &str = "RTSSOS_SDP_SOLVER";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Command template. `{input}` and `{output}` are replaced by the model
    /// and result paths; without placeholders both are appended.
    pub command: String,
    pub timeout: Duration,
}

impl SolverConfig {
    pub fn new(command: impl Into<String>) -> Self {
        Self { command: command.into(), timeout: Duration::from_secs(5000) }
    }

    /// Reads the command from the environment.
    pub fn from_env() -> Option<Self> {
        std::env::var(SDP_SOLVER_ENV).ok().filter(|c| !c.trim().is_empty()).map(Self::new)
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverResult {
    /// Objective of the minimisation problem as written.
    pub primal: Option<f64>,
    pub dual: Option<f64>,
    pub status: String,
    pub seconds: f64,
}

impl SolverResult {
    pub fn is_optimal(&self) -> bool {
        matches!(self.status.as_str(), "pdOPT" | "optimal")
    }

    /// Lower bound `θ` for `sdp`, if the solve succeeded.
    pub fn bound(&self, sdp: &MomentSdp) -> Option<f64> {
        if !self.is_optimal() {
            return None;
        }
        let v = self.primal.or(self.dual)?;
        v.is_finite().then(|| v + rational_to_f64(&sdp.objective_constant))
    }
}

fn value_after(line: &str, key: &str) -> Option<f64> {
    let rest = line.trim().strip_prefix(key)?;
    let rest = rest.trim_start().trim_start_matches([':', '=']).trim();
    rest.split_whitespace().next()?.parse().ok()
}

/// Reads objectives and status from SDPA-style (`objValPrimal = …`,
/// `phase.value = …`) or CSDP-style output.
pub fn parse_solver_output(text: &str) -> Result<SolverResult> {
    let mut r = SolverResult { primal: None, dual: None, status: String::new(), seconds: 0.0 };
    // CSDP maximises over the primal side, so its dual is our objective.
    let mut csdp = (None, None);
    for line in text.lines() {
        let t = line.trim();
        if let Some(s) = t.strip_prefix("phase.value") {
            r.status = s.trim_start().trim_start_matches('=').trim().to_string();
        } else if let Some(v) = value_after(t, "objValPrimal") {
            r.primal = Some(v);
        } else if let Some(v) = value_after(t, "objValDual") {
            r.dual = Some(v);
        } else if let Some(v) = value_after(t, "Primal objective value") {
            csdp.0 = Some(v);
        } else if let Some(v) = value_after(t, "Dual objective value") {
            csdp.1 = Some(v);
        } else if t.starts_with("Success: SDP solved") {
            r.status = "pdOPT".into();
        } else if t.starts_with("Declared primal infeasible") {
            r.status = "dINF".into();
        } else if t.starts_with("Declared dual infeasible") {
            r.status = "pINF".into();
        } else if t.starts_with("Stuck") || t.starts_with("Maximum iterations") || t.starts_with("Partial Success") {
            r.status = "noINFO".into();
        }
    }
    if r.primal.is_none() && r.dual.is_none() {
        r.primal = csdp.1;
        r.dual = csdp.0;
    }
    if r.status.is_empty() {
        return Err(Error::Solver("no status in solver output".into()));
    }
    Ok(r)
}

fn split_command(template: &str, input: &Path, output: &Path) -> Result<(String, Vec<String>)> {
    let mut parts: Vec<String> = template.split_whitespace().map(str::to_string).collect();
    if parts.is_empty() {
        return Err(Error::Config("empty SDP solver command".into()));
    }
    let (inp, out) = (input.display().to_string(), output.display().to_string());
    let templated = parts.iter().any(|p| p.contains("{input}") || p.contains("{output}"));
    if templated {
        for p in &mut parts {
            *p = p.replace("{input}", &inp).replace("{output}", &out);
        }
    } else {
        parts.push(inp);
        parts.push(out);
    }
    let program = parts.remove(0);
    Ok((program, parts))
}

/// Runs the solver on an SDPA file and parses the result file, falling back
/// to standard output.
pub fn run_solver(path: &Path, cfg: &SolverConfig) -> Result<SolverResult> {
    let output = path.with_extension("out");
    let _ = std::fs::remove_file(&output);
    let (program, args) = split_command(&cfg.command, path, &output)?;
    let start = Instant::now();
    let mut child = Command::new(&program)
        .args(&args)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| Error::Solver(format!("cannot start '{program}': {e}")))?;
    let stdout = child.stdout.take();
    let reader = std::thread::spawn(move || {
        let mut s = String::new();
        if let Some(mut out) = stdout {
            let _ = std::io::Read::read_to_string(&mut out, &mut s);
        }
        s
    });
    let status = match child.wait_timeout(cfg.timeout)? {
        Some(s) => s,
        None => {
            let _ = child.kill();
            let _ = child.wait();
            return Err(Error::Timeout(start.elapsed().as_secs_f64()));
        }
    };
    let seconds = start.elapsed().as_secs_f64();
    let stdout = reader.join().unwrap_or_default();
    let text = match std::fs::read_to_string(&output) {
        Ok(t) if t.contains("phase.value") || t.contains("objective value") => t,
        _ => stdout,
    };
    match parse_solver_output(&text) {
        Ok(mut r) => {
            r.seconds = seconds;
            Ok(r)
        }
        Err(_) if !status.success() => Err(Error::Solver(format!("'{program}' exited with {status}"))),
        Err(e) => Err(e),
    }
}

fn scratch_dir() -> Result<PathBuf> {
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let dir = std::env::temp_dir().join(format!("rtssos-sdp-{}-{}", std::process::id(), COUNTER.fetch_add(1, Ordering::Relaxed)));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// Writes `sdp` to a private directory, solves it and cleans up.
pub fn solve(sdp: &MomentSdp, cfg: &SolverConfig) -> Result<SolverResult> {
    let dir = scratch_dir()?;
    let path = dir.join("relaxation.dat-s");
    write_sdpa(sdp, &path)?;
    let r = run_solver(&path, cfg);
    let _ = std::fs::remove_dir_all(&dir);
    r
}
