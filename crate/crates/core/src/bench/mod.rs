//! Random instance generators and the experiment runner.

mod gen;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use gen::{
    gen_randpoly1, gen_randpoly2, gen_randpoly2_detailed, gen_randpoly3, uniform_exponent, unit_positive, unit_signed, GenSpec, Randpoly2,
    MAX_ATTEMPTS,
};

use crate::error::{Error, Result};
use crate::ip::TieBreak;
use crate::pipeline::{build_from, Method, Problem};
use crate::poly::{parse_polynomial, parse_rational, Polynomial};
use crate::refine::{RefineConfig, SkipRule};
use crate::sdp::{solve, SolverConfig};
use crate::tssos::Pop;

/// A polynomial read from a file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NamedPolynomial {
    pub name: String,
    pub path: PathBuf,
    pub n: usize,
}

/// Declarative experiment description, usually read from TOML.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Method tags such as `t1`, `c2`, `0.3` or `(0.3,0.1)`.
    #[serde(default)]
    pub methods: Vec<String>,
    #[serde(default)]
    pub generator: Option<GenSpec>,
    #[serde(default)]
    pub seed_start: u64,
    #[serde(default)]
    pub seeds: u64,
    #[serde(default)]
    pub polynomials: Vec<NamedPolynomial>,
    /// Relaxation order; required with constraints.
    #[serde(default)]
    pub d_hat: Option<u32>,
    /// Radius `R` of the ball constraint `R² − Σ xᵢ² ≥ 0`, as a decimal or
    /// fraction.
    #[serde(default)]
    pub ball: Option<String>,
    /// Solver command; falls back to the environment.
    #[serde(default)]
    pub solver: Option<String>,
    /// Solver time limit in seconds.
    #[serde(default = "default_timeout")]
    pub timeout: f64,
    #[serde(default)]
    pub tie_break: TieBreak,
    #[serde(default)]
    pub skip: SkipRule,
    /// Export the SDP only, without solving.
    #[serde(default)]
    pub structure_only: bool,
}

fn default_timeout() -> f64 {
    5000.0
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a TOML file; polynomial paths are taken relative to it.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_toml(&std::fs::read_to_string(path)?)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        for p in &mut cfg.polynomials {
            if p.path.is_relative() {
                p.path = dir.join(&p.path);
            }
        }
        Ok(cfg)
    }

    pub fn parsed_methods(&self) -> Result<Vec<Method>> {
        self.methods.iter().map(|m| m.parse()).collect()
    }

    fn ball_radius_squared(&self) -> Result<Option<BigRational>> {
        self.ball
            .as_deref()
            .map(|r| {
                let r = parse_rational(r.trim()).ok_or_else(|| Error::Config(format!("bad ball radius '{r}'")))?;
                Ok(&r * &r)
            })
            .transpose()
    }

    /// Instances as `(label, objective)`: named files first, then seeds.
    pub fn instances(&self) -> Result<Vec<(String, Result<Polynomial>)>> {
        let mut out = Vec::new();
        for p in &self.polynomials {
            let f = std::fs::read_to_string(&p.path).map_err(Error::from).and_then(|t| parse_polynomial(&t, p.n));
            out.push((p.name.clone(), f));
        }
        if self.seeds > 0 {
            let spec = self.generator.as_ref().ok_or_else(|| Error::Config("seeds given without a generator".into()))?;
            for seed in self.seed_start..self.seed_start + self.seeds {
                out.push((seed.to_string(), spec.generate(seed)));
            }
        }
        Ok(out)
    }

    fn solver_config(&self) -> Option<SolverConfig> {
        let cfg = match &self.solver {
            Some(cmd) => Some(SolverConfig::new(cmd.clone())),
            None => SolverConfig::from_env(),
        };
        cfg.map(|c| c.with_timeout(Duration::from_secs_f64(self.timeout)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowStatus {
    Optimal,
    Timeout,
    InfeasibleRelaxation,
    NoSolver,
    /// Built only, solving not requested.
    Built,
    Failed,
}

impl RowStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RowStatus::Optimal => "optimal",
            RowStatus::Timeout => "timeout",
            RowStatus::InfeasibleRelaxation => "infeasible-relaxation",
            RowStatus::NoSolver => "no-solver",
            RowStatus::Built => "built",
            RowStatus::Failed => "failed",
        }
    }
}

/// One (instance, method) result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub seed: String,
    pub method: String,
    /// Largest block, a tuple for several localizers; empty if not built.
    pub mb: String,
    pub bound: Option<f64>,
    pub time_total: f64,
    pub time_ip: f64,
    pub status: RowStatus,
}

fn instance_problem(cfg: &ExperimentConfig, f: Polynomial, radius_sq: &Option<BigRational>) -> Result<Problem> {
    let mut pop = Pop::unconstrained(f)?;
    if let Some(r2) = radius_sq {
        pop = pop.with_ball(r2.clone());
    }
    Ok(Problem::constrained(pop, cfg.d_hat))
}

fn failed_row(seed: &str, method: &str, status: RowStatus) -> ExperimentRow {
    ExperimentRow { seed: seed.into(), method: method.into(), mb: String::new(), bound: None, time_total: 0.0, time_ip: 0.0, status }
}

fn error_status(e: &Error) -> RowStatus {
    match e {
        Error::Structure(_) => RowStatus::InfeasibleRelaxation,
        Error::Timeout(_) => RowStatus::Timeout,
        _ => RowStatus::Failed,
    }
}

fn run_instance(
    cfg: &ExperimentConfig,
    label: &str,
    f: Result<Polynomial>,
    methods: &[Method],
    solver: Option<&SolverConfig>,
    radius_sq: &Option<BigRational>,
) -> Vec<ExperimentRow> {
    let start = Instant::now();
    let prepared = f.and_then(|f| instance_problem(cfg, f, radius_sq)).and_then(|p| {
        let st = p.initial_state()?;
        Ok((p, st))
    });
    let base_seconds = start.elapsed().as_secs_f64();
    let (problem, init) = match prepared {
        Ok(v) => v,
        Err(e) => return methods.iter().map(|m| failed_row(label, &m.to_string(), error_status(&e))).collect(),
    };
    let opts = RefineConfig::default().tie_break(cfg.tie_break).skip(cfg.skip);
    methods
        .iter()
        .map(|m| {
            let tag = m.to_string();
            let built = match build_from(&problem, &init, m, &opts) {
                Ok(b) => b,
                Err(e) => return failed_row(label, &tag, error_status(&e)),
            };
            let mut row = ExperimentRow {
                seed: label.into(),
                method: tag,
                mb: built.mb_label(),
                bound: None,
                time_total: base_seconds + built.build_seconds,
                time_ip: built.ip_seconds,
                status: RowStatus::Built,
            };
            if cfg.structure_only {
                return row;
            }
            let Some(solver) = solver else {
                row.status = RowStatus::NoSolver;
                return row;
            };
            let t = Instant::now();
            match solve(&built.sdp, solver) {
                Ok(r) => {
                    row.time_total += r.seconds;
                    row.bound = r.bound(&built.sdp);
                    row.status = if row.bound.is_some() {
                        RowStatus::Optimal
                    } else if r.status.contains("INF") {
                        RowStatus::InfeasibleRelaxation
                    } else {
                        RowStatus::Failed
                    };
                }
                Err(e) => {
                    row.time_total += t.elapsed().as_secs_f64();
                    row.status = error_status(&e);
                }
            }
            row
        })
        .collect()
}

/// Runs every method on every instance; rows are ordered by instance, then
/// by method as listed in the config.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    let methods = cfg.parsed_methods()?;
    if methods.is_empty() {
        return Ok(Vec::new());
    }
    let radius_sq = cfg.ball_radius_squared()?;
    if radius_sq.is_some() && cfg.d_hat.is_none() {
        return Err(Error::Config("a ball constraint needs d_hat".into()));
    }
    let solver = cfg.solver_config();
    let instances = cfg.instances()?;
    let rows: Vec<Vec<ExperimentRow>> = instances
        .into_par_iter()
        .map(|(label, f)| run_instance(cfg, &label, f, &methods, solver.as_ref(), &radius_sq))
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

pub const CSV_HEADER: [&str; 7] = ["seed", "method", "mb", "bound", "time_total", "time_ip", "status"];

pub fn write_csv<W: Write>(rows: &[ExperimentRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.seed.clone(),
            r.method.clone(),
            r.mb.clone(),
            r.bound.map(|b| format!("{b:.8e}")).unwrap_or_default(),
            format!("{:.6}", r.time_total),
            format!("{:.6}", r.time_ip),
            r.status.as_str().to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<ExperimentRow>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(|e| Error::Config(e.to_string()))).collect()
}

/// Fraction of instances a method solves within `tol` of the reference,
/// and its mean time ratio to the reference.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AccuracyRow {
    pub method: String,
    pub tol: f64,
    pub fraction: f64,
    pub mean_time_ratio: Option<f64>,
    pub instances: usize,
}

/// `|Θ_M − Θ_ref| / |Θ_ref| ≤ tol` counted over instances where the
/// reference has a bound; a method without a bound counts as unsolved.
pub fn accuracy_table(rows: &[ExperimentRow], reference: &str, tols: &[f64]) -> Vec<AccuracyRow> {
    let mut by_seed: BTreeMap<&str, BTreeMap<&str, &ExperimentRow>> = BTreeMap::new();
    let mut methods: Vec<&str> = Vec::new();
    for r in rows {
        by_seed.entry(&r.seed).or_default().insert(&r.method, r);
        if !methods.contains(&r.method.as_str()) {
            methods.push(&r.method);
        }
    }
    let refs: Vec<(&ExperimentRow, &BTreeMap<&str, &ExperimentRow>)> =
        by_seed.values().filter_map(|m| m.get(reference).filter(|r| r.bound.is_some()).map(|r| (*r, m))).collect();
    let mut out = Vec::new();
    for &method in &methods {
        let ratios: Vec<f64> = refs
            .iter()
            .filter_map(|(b, m)| m.get(method).filter(|r| r.status == RowStatus::Optimal && b.time_total > 0.0).map(|r| r.time_total / b.time_total))
            .collect();
        let mean_time_ratio = (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64);
        for &tol in tols {
            let hits = refs
                .iter()
                .filter(|(b, m)| {
                    let theta_b = b.bound.unwrap();
                    m.get(method).and_then(|r| r.bound).is_some_and(|t| (t - theta_b).abs() <= tol * theta_b.abs())
                })
                .count();
            let fraction = if refs.is_empty() { 0.0 } else { hits as f64 / refs.len() as f64 };
            out.push(AccuracyRow { method: method.to_string(), tol, fraction, mean_time_ratio, instances: refs.len() });
        }
    }
    out
}

/// Per-method summary lines: instances, median mb of the first localizer,
/// optimal count and mean time.
pub fn summary(rows: &[ExperimentRow]) -> Vec<String> {
    let mut methods: Vec<&str> = Vec::new();
    for r in rows {
        if !methods.contains(&r.method.as_str()) {
            methods.push(&r.method);
        }
    }
    methods
        .iter()
        .map(|&m| {
            let mine: Vec<&ExperimentRow> = rows.iter().filter(|r| r.method == m).collect();
            let mut mbs: Vec<usize> =
                mine.iter().filter_map(|r| r.mb.trim_start_matches('(').split(',').next().and_then(|v| v.trim_end_matches(')').parse().ok())).collect();
            mbs.sort_unstable();
            let median = mbs.get(mbs.len() / 2).map_or("-".to_string(), usize::to_string);
            let optimal = mine.iter().filter(|r| r.status == RowStatus::Optimal).count();
            let mean_time = mine.iter().map(|r| r.time_total).sum::<f64>() / mine.len().max(1) as f64;
            format!("{m}: instances={} median_mb={median} optimal={optimal} mean_time={mean_time:.3}s", mine.len())
        })
        .collect()
}
