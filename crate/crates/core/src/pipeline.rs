//! Building one relaxation of a problem by a named method.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::BlockPartition;
use crate::poly::{format_rational, parse_rational, Polynomial};
use crate::refine::{refine_state, refined_chordal, RefineConfig, Refinement};
use crate::sdp::{assemble_from_cliques, MomentSdp};
use crate::tssos::{chordal_tssos, Pop, TssosState};

/// How the PSD blocks are chosen.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Method {
    /// One block per localizer.
    Dense,
    /// Block TSSOS at step `k`.
    Tssos { k: usize },
    /// Chordal TSSOS at step `k`.
    Chordal { k: usize },
    /// Refined TSSOS with one `τ` per localizer, or a single shared one.
    Refine { taus: Vec<BigRational> },
    /// Refined blocks intersected with the chordal support extension.
    RefinedChordal { taus: Vec<BigRational> },
}

fn tau_list(taus: &[BigRational]) -> String {
    let parts: Vec<String> = taus.iter().map(format_rational_decimal).collect();
    if parts.len() == 1 {
        parts[0].clone()
    } else {
        format!("({})", parts.join(","))
    }
}

/// Decimal form when exact, otherwise `p/q`.
fn format_rational_decimal(r: &BigRational) -> String {
    let mut den = r.denom().clone();
    let mut digits = 0usize;
    let ten = BigInt::from(10);
    for p in [BigInt::from(2), BigInt::from(5)] {
        while (&den % &p).is_zero() {
            den /= &p;
        }
    }
    if !den.is_one() {
        return format_rational(r);
    }
    let mut scaled = r.clone();
    while !scaled.is_integer() {
        scaled *= BigRational::from_integer(ten.clone());
        digits += 1;
    }
    let v = scaled.to_integer();
    if digits == 0 {
        return v.to_string();
    }
    let neg = v < BigInt::zero();
    let s = if neg { (-v).to_string() } else { v.to_string() };
    let s = format!("{s:0>width$}", width = digits + 1);
    let (a, b) = s.split_at(s.len() - digits);
    format!("{}{a}.{b}", if neg { "-" } else { "" })
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Dense => write!(f, "dense"),
            Method::Tssos { k } => write!(f, "t{k}"),
            Method::Chordal { k } => write!(f, "c{k}"),
            Method::Refine { taus } => write!(f, "{}", tau_list(taus)),
            Method::RefinedChordal { taus } => write!(f, "rc{}", tau_list(taus)),
        }
    }
}

fn parse_taus(s: &str) -> Result<Vec<BigRational>> {
    let inner = s.strip_prefix('(').and_then(|t| t.strip_suffix(')')).unwrap_or(s);
    let taus = inner
        .split(',')
        .map(|t| parse_rational(t.trim()).ok_or_else(|| Error::InvalidParameter(format!("bad tau '{t}'"))))
        .collect::<Result<Vec<_>>>()?;
    for t in &taus {
        RefineConfig::from_tau(t)?;
    }
    Ok(taus)
}

impl FromStr for Method {
    type Err = Error;

    /// `dense`, `t<k>`, `c<k>`, `<τ>`, `(<τ₀>,<τ₁>,…)`, `rc<τ>` or
    /// `rc(<τ₀>,…)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let step = |rest: &str| rest.parse::<usize>().ok().filter(|&k| k >= 1);
        if s == "dense" {
            return Ok(Method::Dense);
        }
        if let Some(k) = s.strip_prefix('t').and_then(step) {
            return Ok(Method::Tssos { k });
        }
        if let Some(k) = s.strip_prefix('c').and_then(step) {
            return Ok(Method::Chordal { k });
        }
        if let Some(rest) = s.strip_prefix("rc") {
            return Ok(Method::RefinedChordal { taus: parse_taus(rest)? });
        }
        if s.starts_with(|c: char| c.is_ascii_digit() || c == '(' || c == '.') {
            return Ok(Method::Refine { taus: parse_taus(s)? });
        }
        Err(Error::InvalidParameter(format!("unknown method '{s}'")))
    }
}

/// An objective with optional constraints and relaxation order.
#[derive(Clone, Debug)]
pub struct Problem {
    pub pop: Pop,
    /// Relaxation order; unconstrained problems without one use the Newton
    /// basis.
    pub d_hat: Option<u32>,
}

impl Problem {
    pub fn unconstrained(f: Polynomial) -> Result<Self> {
        Ok(Self { pop: Pop::unconstrained(f)?, d_hat: None })
    }

    pub fn constrained(pop: Pop, d_hat: Option<u32>) -> Self {
        Self { pop, d_hat }
    }

    pub fn initial_state(&self) -> Result<TssosState> {
        if self.pop.constraints().is_empty() && self.d_hat.is_none() {
            TssosState::unconstrained(self.pop.objective())
        } else {
            TssosState::constrained(&self.pop, self.d_hat.unwrap_or_else(|| self.pop.min_order()))
        }
    }
}

/// A relaxation ready to be written or solved.
#[derive(Clone, Debug)]
pub struct Built {
    pub method: Method,
    /// PSD row sets per localizer.
    pub blocks: Vec<Vec<Vec<usize>>>,
    pub sdp: MomentSdp,
    pub refinements: Vec<Refinement>,
    /// Time spent in merge problems.
    pub ip_seconds: f64,
    /// Time to build the structure and the SDP.
    pub build_seconds: f64,
}

impl Built {
    /// Largest block per localizer.
    pub fn max_blocks(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.iter().map(Vec::len).max().unwrap_or(0)).collect()
    }

    /// `mb` as printed: a number, or a tuple for several localizers.
    pub fn mb_label(&self) -> String {
        let m = self.max_blocks();
        if m.len() == 1 {
            m[0].to_string()
        } else {
            format!("({})", m.iter().map(usize::to_string).collect::<Vec<_>>().join(","))
        }
    }
}

/// Partition summary for reports.
#[derive(Clone, Debug, Serialize)]
pub struct BlockReport {
    pub localizer: usize,
    pub sizes: Vec<usize>,
    pub blocks: Vec<Vec<String>>,
}

pub fn block_report(st: &TssosState, built: &Built) -> Vec<BlockReport> {
    built
        .blocks
        .iter()
        .enumerate()
        .map(|(j, rows)| {
            let basis = st.localizer(j).basis();
            BlockReport {
                localizer: j,
                sizes: rows.iter().map(Vec::len).collect(),
                blocks: rows.iter().map(|b| b.iter().map(|&i| basis.get(i).monomial_string()).collect()).collect(),
            }
        })
        .collect()
}

fn partition_rows(p: &BlockPartition) -> Vec<Vec<usize>> {
    p.dump_order().into_iter().map(<[usize]>::to_vec).collect()
}

fn split_taus(taus: &[BigRational], m: usize) -> Result<(usize, Vec<BigRational>)> {
    let list: Vec<BigRational> = match taus.len() {
        1 => vec![taus[0].clone(); m],
        l if l == m => taus.to_vec(),
        l => return Err(Error::DimensionMismatch { expected: m, found: l }),
    };
    let cfgs = list.iter().map(RefineConfig::from_tau).collect::<Result<Vec<_>>>()?;
    let k = cfgs[0].k;
    if cfgs.iter().any(|c| c.k != k) {
        return Err(Error::InvalidParameter("all tau values must share their integer part".into()));
    }
    Ok((k, cfgs.into_iter().map(|c| c.eps).collect()))
}

fn advance(st: &TssosState, k: usize) -> TssosState {
    let mut st = st.clone();
    for _ in 0..k {
        st = st.step();
    }
    st
}

/// Builds the relaxation of `problem` by `method`, starting from `init`.
/// `opts` supplies the tie-break, skip rule, budget and tracing for refined
/// methods; its `k` and `eps` are ignored.
pub fn build_from(problem: &Problem, init: &TssosState, method: &Method, opts: &RefineConfig) -> Result<Built> {
    let start = Instant::now();
    let m = init.num_localizers();
    let mut refinements = Vec::new();
    let mut ip_seconds = 0.0;
    let blocks: Vec<Vec<Vec<usize>>> = match method {
        Method::Dense => (0..m).map(|j| vec![(0..init.localizer(j).basis().len()).collect()]).collect(),
        Method::Tssos { k } => {
            let st = advance(init, *k);
            (0..m).map(|j| partition_rows(&st.level(j).blocks)).collect()
        }
        Method::Chordal { k } => {
            let steps = chordal_tssos(init, *k);
            steps.last().expect("k ≥ 1").extensions.iter().map(|e| e.cliques.clone()).collect()
        }
        Method::Refine { taus } | Method::RefinedChordal { taus } => {
            let (k, eps) = split_taus(taus, m)?;
            let st = advance(init, k);
            let mut out = Vec::new();
            for (j, e) in eps.iter().enumerate() {
                let r = refine_state(&st, j, e, opts)?;
                ip_seconds += r.ip_seconds();
                out.push(match method {
                    Method::Refine { .. } => partition_rows(&r.blocks),
                    _ => refined_chordal(&st, j, &r.blocks)?.cliques,
                });
                refinements.push(r);
            }
            out
        }
    };
    let sdp = assemble_from_cliques(problem.pop.objective(), init, &blocks)?;
    Ok(Built { method: method.clone(), blocks, sdp, refinements, ip_seconds, build_seconds: start.elapsed().as_secs_f64() })
}

pub fn build(problem: &Problem, method: &Method, opts: &RefineConfig) -> Result<Built> {
    let init = problem.initial_state()?;
    build_from(problem, &init, method, opts)
}
