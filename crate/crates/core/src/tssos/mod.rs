//! The TSSOS term-sparsity iteration, computed on parity classes.

mod chordal;
mod engine;
pub mod oracle;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

pub use chordal::{chordal_tssos, ChordalStep};
pub use engine::{ConstrainedState, Level, Localizer, TssosState};
pub(crate) use chordal::full_extension;

use crate::error::{Error, Result};
use crate::graph::{block_closure, connected_components, BlockPartition, SymBinMatrix};
use crate::poly::{parity, Exponent, MonomialBasis, ParityPartition, ParityVector, Polynomial};

/// A set of exponents indexed by parity type.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SupportSet {
    exponents: BTreeSet<Exponent>,
    by_parity: BTreeMap<ParityVector, BTreeSet<Exponent>>,
}

impl SupportSet {
    pub fn from_exponents<I: IntoIterator<Item = Exponent>>(it: I) -> Self {
        let mut s = SupportSet::default();
        for e in it {
            s.insert(e);
        }
        s
    }

    pub fn insert(&mut self, e: Exponent) {
        self.by_parity.entry(parity(&e)).or_default().insert(e.clone());
        self.exponents.insert(e);
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn contains(&self, e: &Exponent) -> bool {
        self.exponents.contains(e)
    }

    /// All exponents in graded-lex order.
    pub fn exponents(&self) -> &BTreeSet<Exponent> {
        &self.exponents
    }

    /// `(𝒮)₂` in canonical order.
    pub fn parities(&self) -> impl Iterator<Item = ParityVector> + '_ {
        self.by_parity.keys().copied()
    }

    /// `𝒮_ν`.
    pub fn of_parity(&self, nu: ParityVector) -> Option<&BTreeSet<Exponent>> {
        self.by_parity.get(&nu)
    }
}

/// A polynomial optimization problem `min f` subject to `g_j ≥ 0`.
#[derive(Clone, Debug)]
pub struct Pop {
    objective: Polynomial,
    constraints: Vec<Polynomial>,
}

impl Pop {
    pub fn new(objective: Polynomial, constraints: Vec<Polynomial>) -> Result<Self> {
        if objective.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        for g in &constraints {
            if g.n() != objective.n() {
                return Err(Error::DimensionMismatch { expected: objective.n(), found: g.n() });
            }
            if g.is_zero() {
                return Err(Error::InvalidParameter("constraint polynomial is zero".into()));
            }
        }
        Ok(Self { objective, constraints })
    }

    pub fn unconstrained(objective: Polynomial) -> Result<Self> {
        Self::new(objective, Vec::new())
    }

    /// Adds the ball constraint `R² − Σ xᵢ² ≥ 0`.
    pub fn with_ball(mut self, radius_squared: num_rational::BigRational) -> Self {
        self.constraints.push(ball(self.objective.n(), radius_squared));
        self
    }

    pub fn n(&self) -> usize {
        self.objective.n()
    }

    pub fn objective(&self) -> &Polynomial {
        &self.objective
    }

    pub fn constraints(&self) -> &[Polynomial] {
        &self.constraints
    }

    /// `d_j = ⌈deg g_j / 2⌉` for constraint `j` (zero-based).
    pub fn constraint_half_degree(&self, j: usize) -> u32 {
        self.constraints[j].half_degree()
    }

    /// `d = max(⌈deg f/2⌉, d_1, …, d_m)`.
    pub fn min_order(&self) -> u32 {
        (0..self.constraints.len()).map(|j| self.constraint_half_degree(j)).fold(self.objective.half_degree(), u32::max)
    }
}

/// `R² − Σ xᵢ²` where `radius_squared = R²`.
pub fn ball(n: usize, radius_squared: num_rational::BigRational) -> Polynomial {
    let minus_one = -num_rational::BigRational::from_integer(1.into());
    let terms = std::iter::once((Exponent::zeros(n), radius_squared)).chain((0..n).map(|i| (Exponent::unit(n, i, 2), minus_one.clone())));
    Polynomial::from_terms(n, terms).expect("dimensions agree")
}

/// `[C]_{δσ} = 1` iff `(𝓑_δ + 𝓑_σ) ∩ 𝒮 ≠ ∅`.
///
/// Only class pairs with `δ + σ` equal to a parity type present in `𝒮` are
/// examined, with early exit on the first witness.
pub fn support_extension_small(s: &SupportSet, basis: &MonomialBasis, p: &ParityPartition) -> SymBinMatrix {
    let nc = p.len();
    let mut c = SymBinMatrix::zeros(nc);
    for a in 0..nc {
        for nu in s.parities() {
            let Some(b) = p.index_of(p.types()[a].xor(nu)) else { continue };
            if b < a {
                continue;
            }
            let targets = s.of_parity(nu).expect("listed parity");
            let hit = p.members(a).iter().any(|&i| p.members(b).iter().any(|&j| targets.contains(&basis.get(i).add(basis.get(j)))));
            if hit {
                c.set(a, b);
            }
        }
    }
    c
}

/// Expands a closed class-level matrix to a partition of the basis.
pub fn reconstruct_full(b_small: &SymBinMatrix, p: &ParityPartition) -> BlockPartition {
    let groups = connected_components(b_small);
    let members: Vec<Vec<usize>> = (0..p.len()).map(|c| p.members(c).to_vec()).collect();
    let r = members.iter().map(Vec::len).sum();
    groups.expand(&members, r)
}

/// `𝒮⁽ᵏ⁾ = {𝓑_δ + 𝓑_σ | [B]_{δσ} = 1}` for a closed class matrix.
pub fn support_from_blocks(b_small: &SymBinMatrix, basis: &MonomialBasis, p: &ParityPartition) -> SupportSet {
    let mut s = SupportSet::default();
    for a in 0..p.len() {
        for b in b_small.row(a).filter(|&b| b >= a) {
            for &i in p.members(a) {
                for &j in p.members(b) {
                    s.insert(basis.get(i).add(basis.get(j)));
                }
            }
        }
    }
    s
}

pub fn tssos_step(st: &TssosState) -> TssosState {
    st.step()
}

pub fn constrained_init(pop: &Pop, d_hat: u32) -> Result<ConstrainedState> {
    TssosState::constrained(pop, d_hat)
}

pub fn constrained_step(st: &ConstrainedState) -> ConstrainedState {
    st.step()
}

/// How far to run the iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepLimit {
    Steps(usize),
    /// Until two consecutive steps agree, failing after `max` steps.
    Stabilize { max: usize },
}

/// One entry of a TSSOS run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TssosRecord {
    pub k: usize,
    pub blocks: BlockPartition,
    /// Set on the last entry when it equals its predecessor's structure.
    pub stabilized: bool,
}

/// Runs the iteration from `𝒮⁽⁰⁾`, returning the partition at every step.
pub fn run_tssos(f: &Polynomial, limit: StepLimit) -> Result<Vec<TssosRecord>> {
    run_from(TssosState::unconstrained(f)?, limit)
}

pub(crate) fn run_from(mut st: TssosState, limit: StepLimit) -> Result<Vec<TssosRecord>> {
    let mut out: Vec<TssosRecord> = Vec::new();
    let max = match limit {
        StepLimit::Steps(k) => k,
        StepLimit::Stabilize { max } => max,
    };
    for _ in 0..max {
        let next = st.step();
        let stable = st.same_structure(&next);
        out.push(TssosRecord { k: next.k(), blocks: next.blocks().clone(), stabilized: stable });
        st = next;
        if stable && matches!(limit, StepLimit::Stabilize { .. }) {
            return Ok(out);
        }
    }
    if let StepLimit::Stabilize { max } = limit {
        return Err(Error::InvalidParameter(format!("no stabilization within {max} steps")));
    }
    Ok(out)
}

/// Block closure of the class-level support extension, for callers that
/// work with explicit support sets.
pub fn closed_extension(s: &SupportSet, basis: &MonomialBasis, p: &ParityPartition) -> SymBinMatrix {
    block_closure(&support_extension_small(s, basis, p))
}
