//! Block moment relaxations, SDPA sparse export and an external solver
//! driver.

mod solver;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use num_rational::BigRational;
use num_traits::Zero;
use rustc_hash::FxHashMap;

pub use solver::{parse_solver_output, run_solver, solve, SolverConfig, SolverResult, SDP_SOLVER_ENV};

use crate::error::{Error, Result};
use crate::graph::BlockPartition;
use crate::poly::{rational_to_f64, standard_basis, Exponent, MonomialBasis, Polynomial};
use crate::tssos::{Pop, TssosState};

/// Linear form in the moments. Key 0 is the constant part (`y_𝟎 = 1`), key
/// `i ≥ 1` is the scalar variable `i`.
pub type LinearForm = BTreeMap<usize, BigRational>;

#[derive(Clone, Debug)]
pub struct SdpBlock {
    /// Localizer the block belongs to; 0 is the moment matrix.
    pub localizer: usize,
    /// Basis positions indexing the rows.
    pub positions: Vec<usize>,
    /// Upper-triangle entries `(row, col)` with `row ≤ col`, local indices.
    pub entries: BTreeMap<(usize, usize), LinearForm>,
}

impl SdpBlock {
    pub fn size(&self) -> usize {
        self.positions.len()
    }
}

/// `inf L_y(f)` over PSD block constraints with `y_𝟎 = 1` substituted.
#[derive(Clone, Debug)]
pub struct MomentSdp {
    moments: Vec<Exponent>,
    index: FxHashMap<Exponent, usize>,
    pub blocks: Vec<SdpBlock>,
    /// `L_y(f)` without its constant.
    pub objective: LinearForm,
    /// Coefficient of `y_𝟎` in the objective.
    pub objective_constant: BigRational,
}

impl MomentSdp {
    /// Number of scalar variables (moments other than `y_𝟎`).
    pub fn num_vars(&self) -> usize {
        self.moments.len()
    }

    /// Exponent of variable `i ≥ 1`.
    pub fn moment(&self, i: usize) -> &Exponent {
        &self.moments[i - 1]
    }

    /// Variable id of a moment; `Some(0)` for the constant.
    pub fn var_of(&self, a: &Exponent) -> Option<usize> {
        if a.is_zero() {
            return Some(0);
        }
        self.index.get(a).copied()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(SdpBlock::size).collect()
    }

    /// Largest PSD block.
    pub fn max_block(&self) -> usize {
        self.blocks.iter().map(SdpBlock::size).max().unwrap_or(0)
    }
}

/// One localizer's share of the relaxation.
pub struct LocalizerBlocks<'a> {
    pub basis: &'a MonomialBasis,
    pub multiplier: &'a Polynomial,
    /// Row sets of the PSD blocks; may overlap.
    pub blocks: Vec<Vec<usize>>,
}

/// Assembles the relaxation from arbitrary row sets per localizer.
pub fn assemble(objective: &Polynomial, parts: &[LocalizerBlocks<'_>]) -> Result<MomentSdp> {
    let n = objective.n();
    let mut seen: BTreeSet<Exponent> = BTreeSet::new();
    for part in parts {
        if part.basis.n() != n || part.multiplier.n() != n {
            return Err(Error::DimensionMismatch { expected: n, found: part.basis.n() });
        }
        for block in &part.blocks {
            for (a, &i) in block.iter().enumerate() {
                for &j in &block[a..] {
                    let bg = part.basis.get(i).add(part.basis.get(j));
                    for s in part.multiplier.support() {
                        seen.insert(s.add(&bg));
                    }
                }
            }
        }
    }
    for a in objective.support() {
        if !seen.contains(a) && !a.is_zero() {
            return Err(Error::Structure(format!("objective moment {} appears in no PSD block", a.monomial_string())));
        }
    }
    let moments: Vec<Exponent> = seen.into_iter().filter(|a| !a.is_zero()).collect();
    let index: FxHashMap<Exponent, usize> = moments.iter().enumerate().map(|(i, a)| (a.clone(), i + 1)).collect();
    let var = |a: &Exponent| if a.is_zero() { 0 } else { index[a] };

    let mut blocks = Vec::new();
    for (j, part) in parts.iter().enumerate() {
        for rows in &part.blocks {
            let mut entries = BTreeMap::new();
            for (a, &i) in rows.iter().enumerate() {
                for (b, &k) in rows.iter().enumerate().skip(a) {
                    let bg = part.basis.get(i).add(part.basis.get(k));
                    let mut form = LinearForm::new();
                    for (s, c) in part.multiplier.terms() {
                        *form.entry(var(&s.add(&bg))).or_insert_with(BigRational::zero) += c;
                    }
                    form.retain(|_, c| !c.is_zero());
                    if !form.is_empty() {
                        entries.insert((a, b), form);
                    }
                }
            }
            blocks.push(SdpBlock { localizer: j, positions: rows.clone(), entries });
        }
    }
    let mut obj = LinearForm::new();
    let mut objective_constant = BigRational::zero();
    for (a, c) in objective.terms() {
        if a.is_zero() {
            objective_constant = c.clone();
        } else {
            obj.insert(var(a), c.clone());
        }
    }
    Ok(MomentSdp { moments, index, blocks, objective: obj, objective_constant })
}

fn ordered_blocks(p: &BlockPartition) -> Vec<Vec<usize>> {
    p.dump_order().into_iter().map(<[usize]>::to_vec).collect()
}

/// One PSD block per partition block, largest first.
pub fn assemble_unconstrained(f: &Polynomial, basis: &MonomialBasis, blocks: &BlockPartition) -> Result<MomentSdp> {
    if blocks.size() != basis.len() {
        return Err(Error::DimensionMismatch { expected: basis.len(), found: blocks.size() });
    }
    let one = Polynomial::constant(f.n(), num_traits::One::one());
    assemble(f, &[LocalizerBlocks { basis, multiplier: &one, blocks: ordered_blocks(blocks) }])
}

/// Moment blocks over `ℕⁿ_{d̂}` plus localizing blocks over `ℕⁿ_{d̂−d_j}`;
/// `partitions[j]` partitions the basis of localizer `j`.
pub fn assemble_constrained(pop: &Pop, d_hat: u32, partitions: &[BlockPartition]) -> Result<MomentSdp> {
    let d = pop.min_order();
    if d_hat < d {
        return Err(Error::RelaxationOrderTooLow { d_hat, d });
    }
    let m = pop.constraints().len();
    if partitions.len() != m + 1 {
        return Err(Error::DimensionMismatch { expected: m + 1, found: partitions.len() });
    }
    let n = pop.n();
    let one = Polynomial::constant(n, num_traits::One::one());
    let mut bases = vec![standard_basis(n, d_hat)?];
    for j in 0..m {
        bases.push(standard_basis(n, d_hat - pop.constraint_half_degree(j))?);
    }
    let mut parts = Vec::new();
    for (j, basis) in bases.iter().enumerate() {
        if partitions[j].size() != basis.len() {
            return Err(Error::DimensionMismatch { expected: basis.len(), found: partitions[j].size() });
        }
        let multiplier = if j == 0 { &one } else { &pop.constraints()[j - 1] };
        parts.push(LocalizerBlocks { basis, multiplier, blocks: ordered_blocks(&partitions[j]) });
    }
    assemble(pop.objective(), &parts)
}

/// Relaxation of a TSSOS state with one row-set list per localizer, e.g.
/// maximal cliques of chordal extensions.
pub fn assemble_from_cliques(objective: &Polynomial, st: &TssosState, cliques: &[Vec<Vec<usize>>]) -> Result<MomentSdp> {
    if cliques.len() != st.num_localizers() {
        return Err(Error::DimensionMismatch { expected: st.num_localizers(), found: cliques.len() });
    }
    let parts: Vec<LocalizerBlocks<'_>> = (0..st.num_localizers())
        .map(|j| {
            let loc = st.localizer(j);
            LocalizerBlocks { basis: loc.basis(), multiplier: loc.multiplier(), blocks: cliques[j].clone() }
        })
        .collect();
    for (j, part) in parts.iter().enumerate() {
        let mut covered = vec![false; part.basis.len()];
        for c in &part.blocks {
            for &i in c {
                *covered.get_mut(i).ok_or_else(|| Error::DimensionMismatch { expected: part.basis.len(), found: i + 1 })? = true;
            }
        }
        if covered.contains(&false) {
            return Err(Error::Structure(format!("cliques of localizer {j} do not cover its basis")));
        }
    }
    assemble(objective, &parts)
}

/// Relaxation of a TSSOS state with a partition per localizer.
pub fn assemble_state(objective: &Polynomial, st: &TssosState, partitions: &[BlockPartition]) -> Result<MomentSdp> {
    let cliques: Vec<Vec<Vec<usize>>> = partitions.iter().map(ordered_blocks).collect();
    assemble_from_cliques(objective, st, &cliques)
}

fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// SDPA sparse text: minimise `c·y` subject to `Σ F_i y_i − F_0 ⪰ 0`.
pub fn sdpa_string(sdp: &MomentSdp) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "\"moment relaxation; objective constant {}", fmt_value(rational_to_f64(&sdp.objective_constant)));
    let _ = writeln!(s, "{}", sdp.num_vars());
    let _ = writeln!(s, "{}", sdp.blocks.len());
    let sizes: Vec<String> = sdp.blocks.iter().map(|b| b.size().to_string()).collect();
    let _ = writeln!(s, "{}", sizes.join(" "));
    let c: Vec<String> = (1..=sdp.num_vars()).map(|i| fmt_value(sdp.objective.get(&i).map_or(0.0, rational_to_f64))).collect();
    let _ = writeln!(s, "{}", c.join(" "));
    let mut lines: Vec<(usize, usize, usize, usize, f64)> = Vec::new();
    for (k, b) in sdp.blocks.iter().enumerate() {
        for (&(i, j), form) in &b.entries {
            for (&var, coef) in form {
                let v = rational_to_f64(coef);
                lines.push((var, k + 1, i + 1, j + 1, if var == 0 { -v } else { v }));
            }
        }
    }
    lines.sort_by_key(|l| (l.0, l.1, l.2, l.3));
    for (m, b, i, j, v) in lines {
        let _ = writeln!(s, "{m} {b} {i} {j} {}", fmt_value(v));
    }
    s
}

pub fn write_sdpa(sdp: &MomentSdp, path: &Path) -> Result<()> {
    std::fs::write(path, sdpa_string(sdp))?;
    Ok(())
}
