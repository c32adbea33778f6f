//! Splitting TSSOS blocks with a sequence of merge problems, one per parity
//! type of the support.

mod matrices;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rustc_hash::FxHashMap;
use serde::Serialize;

pub use matrices::{assemble_a, assemble_e, assemble_k, compress_d, pair_positions};

use crate::error::{Error, Result};
use crate::graph::{block_closure, chordal_extension, connected_components, BlockPartition, ChordalExtension, SymBinMatrix};
use crate::ip::{solve_ip, Budget, CoverRow, IpProblem, SolveStatus, TieBreak};
use crate::poly::{parse_rational, Exponent, MonomialBasis, ParityVector, Polynomial};
use crate::tssos::{Pop, TssosState};

/// When a parity type needs no merge problem even though it has cover rows.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SkipRule {
    /// Solve whenever some row has a pair across groups.
    Never,
    /// Skip when every row already holds without merging.
    #[default]
    Satisfied,
}

#[derive(Clone, Debug)]
pub struct RefineConfig {
    /// TSSOS step the refinement starts from, `k ≥ 1`.
    pub k: usize,
    /// Fraction of pairs to keep, in `(0, 1)`.
    pub eps: BigRational,
    pub tie_break: TieBreak,
    pub skip: SkipRule,
    /// Limits for each merge problem.
    pub budget: Budget,
    /// Keep the intermediate matrices of every step.
    pub trace: bool,
}

impl RefineConfig {
    pub fn new(k: usize, eps: BigRational) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        check_eps(&eps)?;
        Ok(Self { k, eps, tie_break: TieBreak::default(), skip: SkipRule::default(), budget: Budget::default(), trace: false })
    }

    /// `τ = k − 1 + ε` with `τ` not an integer.
    pub fn from_tau(tau: &BigRational) -> Result<Self> {
        if !tau.is_positive() || tau.is_integer() {
            return Err(Error::InvalidParameter(format!("tau must be a positive non-integer, got {}", crate::poly::format_rational(tau))));
        }
        let whole = tau.floor();
        let k: usize = whole.to_integer().try_into().map_err(|_| Error::InvalidParameter("tau too large".into()))?;
        Self::new(k + 1, tau - whole)
    }

    /// Parses `ε` from text such as `0.2` or `1/5`.
    pub fn with_eps_str(k: usize, eps: &str) -> Result<Self> {
        let eps = parse_rational(eps).ok_or_else(|| Error::InvalidParameter(format!("cannot parse eps '{eps}'")))?;
        Self::new(k, eps)
    }

    pub fn tau(&self) -> BigRational {
        BigRational::from_integer(BigInt::from(self.k as u64 - 1)) + &self.eps
    }

    pub fn tie_break(mut self, rule: TieBreak) -> Self {
        self.tie_break = rule;
        self
    }

    pub fn skip(mut self, rule: SkipRule) -> Self {
        self.skip = rule;
        self
    }

    pub fn traced(mut self) -> Self {
        self.trace = true;
        self
    }
}

fn check_eps(eps: &BigRational) -> Result<()> {
    if eps.is_positive() && *eps < BigRational::one() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("eps must lie in (0, 1), got {}", crate::poly::format_rational(eps))))
    }
}

/// Summary of one merge problem.
#[derive(Clone, Debug, Serialize)]
pub struct IpSummary {
    pub vars: usize,
    pub constraints: usize,
    pub omega: u64,
    /// Pairs of groups set to 1.
    pub merged_pairs: Vec<(usize, usize)>,
    pub status: SolveStatus,
    pub nodes: u64,
    #[serde(skip)]
    pub seconds: f64,
}

/// Matrices of one step, kept only when tracing.
#[derive(Clone, Debug, Serialize)]
pub struct StepMatrices {
    pub e: Vec<Vec<u8>>,
    pub m: Vec<Vec<u8>>,
    pub d: Vec<Vec<u8>>,
    pub d_closure: Vec<Vec<u8>>,
    /// Group-level pair counts per exponent of this parity type.
    pub k: Vec<(String, Vec<Vec<u64>>)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RefineStep {
    #[serde(serialize_with = "ser_display")]
    pub nu: ParityVector,
    /// Number of exponents of this parity type with at least one pair.
    pub rows: usize,
    pub groups_before: usize,
    pub groups_after: usize,
    pub ip: Option<IpSummary>,
    pub skipped: Option<String>,
    pub matrices: Option<StepMatrices>,
    /// Groups after the step as lists of parity types, when tracing.
    pub partition: Option<Vec<Vec<String>>>,
}

fn ser_display<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Result of refining one localizer.
#[derive(Clone, Debug, Serialize)]
pub struct Refinement {
    /// Groups of parity classes, ordered by smallest class.
    pub groups: BlockPartition,
    /// The refined partition of the basis.
    pub blocks: BlockPartition,
    /// The TSSOS partition it refines.
    pub tssos_blocks: BlockPartition,
    pub steps: Vec<RefineStep>,
    /// Exponents the cover condition was imposed on.
    #[serde(skip)]
    pub alphas: Vec<Exponent>,
}

impl Refinement {
    pub fn width(&self) -> usize {
        self.blocks.width()
    }

    pub fn ips_solved(&self) -> usize {
        self.steps.iter().filter(|s| s.ip.is_some()).count()
    }

    pub fn ip_seconds(&self) -> f64 {
        self.steps.iter().filter_map(|s| s.ip.as_ref()).map(|ip| ip.seconds).sum()
    }

    pub fn max_ip_size(&self) -> (usize, usize) {
        self.steps.iter().filter_map(|s| s.ip.as_ref()).fold((0, 0), |(v, c), ip| (v.max(ip.vars), c.max(ip.constraints)))
    }

    /// Whether some merge problem stopped on its budget.
    pub fn hit_budget(&self) -> bool {
        self.steps.iter().filter_map(|s| s.ip.as_ref()).any(|ip| ip.status != SolveStatus::Optimal)
    }
}

fn sorted_groups(mut groups: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    for g in &mut groups {
        g.sort_unstable();
    }
    groups.sort_by_key(|g| g[0]);
    groups
}

/// Runs the refinement on localizer `j` of a state at step `k ≥ 1`.
pub fn refine_state(st: &TssosState, j: usize, eps: &BigRational, cfg: &RefineConfig) -> Result<Refinement> {
    check_eps(eps)?;
    let loc = st.localizer(j);
    let basis = loc.basis();
    let p = loc.parity();
    let nc = p.len();
    let level = st.level(j);
    let w = &level.c_small;

    // local sums whose shift lands in the moment support of the previous step
    let s0 = st.previous_support_ids(0);
    let mut by_parity: BTreeMap<ParityVector, Vec<Exponent>> = BTreeMap::new();
    let mut alphas = Vec::new();
    for (sid, sum) in loc.sums().iter().enumerate() {
        if loc.shifted(sid as u32).iter().any(|&g| s0.contains(g)) {
            alphas.push(sum.clone());
            let nu = sum.parity();
            if !nu.is_zero() {
                by_parity.entry(nu).or_default().push(sum.clone());
            }
        }
    }
    alphas.sort();
    for v in by_parity.values_mut() {
        v.sort();
    }

    let pairs_of: FxHashMap<&Exponent, Vec<(usize, usize)>> =
        by_parity.values().flatten().map(|a| (a, pair_positions(a, basis))).collect();
    let class_sizes: Vec<u64> = p.sizes().into_iter().map(|s| s as u64).collect();

    let mut groups: Vec<Vec<usize>> = (0..nc).map(|c| vec![c]).collect();
    let mut steps = Vec::new();
    for (&nu, alphas_nu) in &by_parity {
        let groups_before = groups.len();
        let mut group_of = vec![0usize; nc];
        for (gi, g) in groups.iter().enumerate() {
            for &c in g {
                group_of[c] = gi;
            }
        }
        let e = assemble_e(nu, p.types());
        let m = w.hadamard(&e.union(&SymBinMatrix::identity(nc)));
        let d = compress_d(&m, &groups);
        let components = connected_components(&d);

        let mut rows = Vec::new();
        let mut k_trace = Vec::new();
        for a in alphas_nu {
            let mut diagonal = 0u64;
            let mut off: BTreeMap<(usize, usize), u64> = BTreeMap::new();
            for &(bi, ci) in &pairs_of[a] {
                let (gi, gj) = (group_of[p.class_of(bi)], group_of[p.class_of(ci)]);
                if gi == gj {
                    diagonal += if bi == ci { 1 } else { 2 };
                } else {
                    *off.entry((gi.min(gj), gi.max(gj))).or_insert(0) += 1;
                }
            }
            if diagonal == 0 && off.is_empty() {
                continue;
            }
            if cfg.trace {
                k_trace.push((a.to_string(), assemble_k(a, basis, p, &groups)));
            }
            rows.push(CoverRow { diagonal, pairs: off.into_iter().collect() });
        }
        let row_count = rows.len();
        let sizes: Vec<u64> = groups.iter().map(|g| g.iter().map(|&c| class_sizes[c]).sum()).collect();
        let matrices = cfg.trace.then(|| StepMatrices {
            e: e.to_dense(),
            m: m.to_dense(),
            d: d.to_dense(),
            d_closure: block_closure(&d).to_dense(),
            k: k_trace,
        });

        let mut skipped = None;
        let mut summary = None;
        if rows.iter().all(|r| r.pairs.is_empty()) {
            skipped = Some(if rows.is_empty() { "no pairs".to_string() } else { "pairs inside groups".to_string() });
        } else {
            let problem = IpProblem::new(sizes, components.blocks().to_vec(), rows, eps.clone())?;
            if cfg.skip == SkipRule::Satisfied && problem.trivially_satisfied() {
                skipped = Some("satisfied".to_string());
            } else {
                let sol = solve_ip(&problem, cfg.tie_break, cfg.budget)?;
                let merged_pairs = problem.vars().iter().zip(&sol.y).filter(|(_, &y)| y).map(|(&v, _)| v).collect();
                summary = Some(IpSummary {
                    vars: problem.num_vars(),
                    constraints: problem.constraints().len(),
                    omega: sol.omega,
                    merged_pairs,
                    status: sol.stats.status,
                    nodes: sol.stats.nodes,
                    seconds: sol.stats.seconds,
                });
                groups = sorted_groups(sol.merged.blocks().iter().map(|b| b.iter().flat_map(|&gi| groups[gi].iter().copied()).collect()).collect());
            }
        }
        let partition = cfg.trace.then(|| groups.iter().map(|g| g.iter().map(|&c| p.types()[c].to_string()).collect()).collect());
        steps.push(RefineStep { nu, rows: row_count, groups_before, groups_after: groups.len(), ip: summary, skipped, matrices, partition });
    }

    let class_partition = BlockPartition::new(nc, groups).ok_or_else(|| Error::Structure("refined groups do not partition the classes".into()))?;
    let members: Vec<Vec<usize>> = (0..nc).map(|c| p.members(c).to_vec()).collect();
    let blocks = class_partition.expand(&members, basis.len());
    if !blocks.is_refinement_of(&level.blocks) {
        return Err(Error::Structure("refined partition is not finer than the TSSOS partition".into()));
    }
    Ok(Refinement { groups: class_partition, blocks, tssos_blocks: level.blocks.clone(), steps, alphas })
}

/// Refines the `k`-th TSSOS step of an unconstrained problem over the
/// Newton basis.
pub fn refine(f: &Polynomial, cfg: &RefineConfig) -> Result<Refinement> {
    refine_from(TssosState::unconstrained(f)?, cfg)
}

/// As [`refine`] over a caller-supplied basis.
pub fn refine_with_basis(f: &Polynomial, basis: MonomialBasis, cfg: &RefineConfig) -> Result<Refinement> {
    refine_from(TssosState::with_basis(f, basis)?, cfg)
}

fn refine_from(mut st: TssosState, cfg: &RefineConfig) -> Result<Refinement> {
    for _ in 0..cfg.k {
        st = st.step();
    }
    refine_state(&st, 0, &cfg.eps, cfg)
}

/// Refines every localizer of a constrained problem; `eps[j]` applies to
/// localizer `j` (the moment matrix is `j = 0`). A single value applies to
/// all.
pub fn refine_constrained(pop: &Pop, d_hat: u32, eps: &[BigRational], cfg: &RefineConfig) -> Result<(TssosState, Vec<Refinement>)> {
    let mut st = TssosState::constrained(pop, d_hat)?;
    for _ in 0..cfg.k {
        st = st.step();
    }
    let m = st.num_localizers();
    if eps.len() != 1 && eps.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: eps.len() });
    }
    let out = (0..m).map(|j| refine_state(&st, j, if eps.len() == 1 { &eps[0] } else { &eps[j] }, cfg)).collect::<Result<Vec<_>>>()?;
    Ok((st, out))
}

/// Largest basis for which the full support-extension matrix is built.
pub const REFINED_CHORDAL_CAP: usize = 20_000;

/// Chordal extension of the full support extension at step `k` masked by
/// the refined blocks.
pub fn refined_chordal(st: &TssosState, j: usize, refined: &BlockPartition) -> Result<ChordalExtension> {
    let loc = st.localizer(j);
    let r = loc.basis().len();
    if r > REFINED_CHORDAL_CAP {
        return Err(Error::BasisTooLarge { size: r as u128, cap: REFINED_CHORDAL_CAP });
    }
    if refined.size() != r {
        return Err(Error::DimensionMismatch { expected: r, found: refined.size() });
    }
    let full = crate::tssos::full_extension(loc, &st.previous_union());
    Ok(chordal_extension(&full.hadamard(&refined.to_matrix())))
}

/// Exponents of nonzero parity whose co-blocked ordered pairs fall below
/// `ε |supp(A_α)|`.
pub fn cover_violations<'a>(basis: &MonomialBasis, blocks: &BlockPartition, alphas: impl IntoIterator<Item = &'a Exponent>, eps: &BigRational) -> Vec<Exponent> {
    let labels = blocks.labels();
    let mut out = Vec::new();
    for a in alphas {
        if a.parity().is_zero() {
            continue;
        }
        let mut total = 0u64;
        let mut kept = 0u64;
        for (i, b) in basis.iter().enumerate() {
            let Some(c) = a.checked_sub(b) else { continue };
            let Some(j) = basis.position(&c) else { continue };
            total += 1;
            if labels[i] == labels[j] {
                kept += 1;
            }
        }
        let lhs = BigRational::from_integer(BigInt::from(kept));
        if lhs < eps * BigRational::from_integer(BigInt::from(total)) {
            out.push(a.clone());
        }
    }
    out
}

/// Whether every pair `(β, γ)` with `β + γ ∈ 2𝓑` is co-blocked.
pub fn even_pairs_covered(basis: &MonomialBasis, blocks: &BlockPartition) -> bool {
    let labels = blocks.labels();
    basis.iter().all(|b| {
        let a = b.scale(2);
        basis.iter().enumerate().all(|(i, x)| match a.checked_sub(x).and_then(|y| basis.position(&y)) {
            Some(j) => labels[i] == labels[j],
            None => true,
        })
    })
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self::new(1, BigRational::new(BigInt::one(), BigInt::from(2))).expect("valid defaults")
    }
}
