use std::sync::Arc;

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use super::{Pop, SupportSet};
use crate::error::{Error, Result};
use crate::graph::{block_closure, connected_components, BlockPartition, SymBinMatrix};
use crate::poly::{partition_by_parity, relaxation_basis, standard_basis, Exponent, MonomialBasis, ParityPartition, Polynomial};

/// Dense bitset over global exponent ids.
#[derive(Clone, PartialEq, Eq, Debug)]
pub(crate) struct IdSet(Vec<u64>);

impl IdSet {
    pub(crate) fn new(capacity: usize) -> Self {
        IdSet(vec![0; capacity.div_ceil(64)])
    }

    pub(crate) fn insert(&mut self, id: u32) {
        self.0[id as usize / 64] |= 1 << (id % 64);
    }

    pub(crate) fn contains(&self, id: u32) -> bool {
        (self.0[id as usize / 64] >> (id % 64)) & 1 == 1
    }

    pub(crate) fn union_with(&mut self, other: &IdSet) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }

    pub(crate) fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        crate::graph::iter_bits(&self.0).map(|i| i as u32)
    }
}

/// One Gram/moment matrix of the relaxation: the basis `𝓑⁽ʲ⁾` together with
/// the support of its multiplier `g_j` (`{0}` for the moment matrix).
#[derive(Debug)]
pub struct Localizer {
    basis: MonomialBasis,
    parity: ParityPartition,
    multiplier: Polynomial,
    /// Distinct sums `β + γ` over the basis, by local id.
    sums: Vec<Exponent>,
    /// `r × r` table of local sum ids.
    sum_of_pair: Vec<u32>,
    /// Local sum ids per class pair `(a, b)`, `a ≤ b`, at `a * classes + b`.
    class_pair_sums: Vec<Vec<u32>>,
    /// Global ids of `shift + sum` for every multiplier term.
    shifted: Vec<Vec<u32>>,
}

impl Localizer {
    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    pub fn parity(&self) -> &ParityPartition {
        &self.parity
    }

    /// `g_j`; the constant 1 for the moment matrix.
    pub fn multiplier(&self) -> &Polynomial {
        &self.multiplier
    }

    pub fn sums(&self) -> &[Exponent] {
        &self.sums
    }

    pub fn sum_id(&self, i: usize, j: usize) -> u32 {
        self.sum_of_pair[i * self.basis.len() + j]
    }

    pub(crate) fn class_pair_sums(&self, a: usize, b: usize) -> &[u32] {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        &self.class_pair_sums[a * self.parity.len() + b]
    }

    pub(crate) fn shifted(&self, sum: u32) -> &[u32] {
        &self.shifted[sum as usize]
    }

    fn extend(&self, u: &IdSet) -> SymBinMatrix {
        let hit: Vec<bool> = self.shifted.iter().map(|ids| ids.iter().any(|&g| u.contains(g))).collect();
        let nc = self.parity.len();
        let mut c = SymBinMatrix::zeros(nc);
        for a in 0..nc {
            for b in a..nc {
                if self.class_pair_sums[a * nc + b].iter().any(|&s| hit[s as usize]) {
                    c.set(a, b);
                }
            }
        }
        c
    }

    fn support_of(&self, b_small: &SymBinMatrix, capacity: usize) -> IdSet {
        let mut out = IdSet::new(capacity);
        for (a, b) in b_small.edges().into_iter().chain((0..b_small.size()).map(|i| (i, i))) {
            for &s in self.class_pair_sums(a, b) {
                for &g in &self.shifted[s as usize] {
                    out.insert(g);
                }
            }
        }
        out
    }
}

#[derive(Debug)]
pub(crate) struct Engine {
    exps: Vec<Exponent>,
    localizers: Vec<Localizer>,
}

impl Engine {
    pub(crate) fn capacity(&self) -> usize {
        self.exps.len()
    }

    pub(crate) fn to_support_set(&self, ids: &IdSet) -> SupportSet {
        SupportSet::from_exponents(ids.iter().map(|g| self.exps[g as usize].clone()))
    }
}

struct Interner {
    exps: Vec<Exponent>,
    lookup: FxHashMap<Exponent, u32>,
}

impl Interner {
    fn id(&mut self, e: Exponent) -> u32 {
        if let Some(&id) = self.lookup.get(&e) {
            return id;
        }
        let id = self.exps.len() as u32;
        self.lookup.insert(e.clone(), id);
        self.exps.push(e);
        id
    }
}

fn build_localizer(basis: MonomialBasis, multiplier: Polynomial, global: &mut Interner) -> Localizer {
    let parity = partition_by_parity(&basis);
    let r = basis.len();
    let mut local: FxHashMap<Exponent, u32> = FxHashMap::default();
    let mut sums = Vec::new();
    let mut sum_of_pair = vec![0u32; r * r];
    for i in 0..r {
        for j in i..r {
            let e = basis.get(i).add(basis.get(j));
            let id = *local.entry(e.clone()).or_insert_with(|| {
                sums.push(e);
                (sums.len() - 1) as u32
            });
            sum_of_pair[i * r + j] = id;
            sum_of_pair[j * r + i] = id;
        }
    }
    let nc = parity.len();
    let mut class_pair_sums = vec![Vec::new(); nc * nc];
    for a in 0..nc {
        for b in a..nc {
            let mut v: Vec<u32> = Vec::new();
            for &i in parity.members(a) {
                for &j in parity.members(b) {
                    v.push(sum_of_pair[i * r + j]);
                }
            }
            v.sort_unstable();
            v.dedup();
            class_pair_sums[a * nc + b] = v;
        }
    }
    let shifts: Vec<Exponent> = multiplier.support().cloned().collect();
    let shifted = sums.iter().map(|s| shifts.iter().map(|t| global.id(s.add(t))).collect()).collect();
    Localizer { basis, parity, multiplier, sums, sum_of_pair, class_pair_sums, shifted }
}

/// Intermediate matrices of one localizer at step `k ≥ 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Level {
    /// Support extension over parity classes.
    pub c_small: SymBinMatrix,
    /// Block closure of `c_small`.
    pub b_small: SymBinMatrix,
    /// Components of `c_small` as groups of class indices.
    pub class_blocks: BlockPartition,
    /// The reconstructed partition of the basis.
    pub blocks: BlockPartition,
}

/// State of the TSSOS iteration after `k` steps, for one or more localizers.
///
/// Localizer 0 is the moment matrix. Unconstrained problems have exactly one
/// localizer.
#[derive(Clone, Debug)]
pub struct TssosState {
    engine: Arc<Engine>,
    k: usize,
    supports: Vec<IdSet>,
    prev_supports: Vec<IdSet>,
    levels: Vec<Level>,
}

/// The constrained iteration shares its state type with the unconstrained one.
pub type ConstrainedState = TssosState;

impl TssosState {
    /// Unconstrained start over the Newton basis of `supp(f) ∪ {0}`.
    pub fn unconstrained(f: &Polynomial) -> Result<Self> {
        check_objective(f)?;
        let basis = relaxation_basis(f)?;
        Self::with_basis(f, basis)
    }

    /// Unconstrained start over a caller-supplied basis:
    /// `𝒮⁽⁰⁾ = supp(f) ∪ 2𝓑`.
    pub fn with_basis(f: &Polynomial, basis: MonomialBasis) -> Result<Self> {
        check_objective(f)?;
        if basis.n() != f.n() {
            return Err(Error::DimensionMismatch { expected: f.n(), found: basis.n() });
        }
        let mut global = Interner { exps: Vec::new(), lookup: FxHashMap::default() };
        let initial: Vec<u32> = f.support().cloned().chain(basis.iter().map(|b| b.scale(2))).map(|e| global.id(e)).collect();
        let one = Polynomial::constant(f.n(), num_traits::One::one());
        let loc = build_localizer(basis, one, &mut global);
        Ok(Self::start(global, vec![loc], initial))
    }

    /// `𝒮⁽⁰⁾_{0,d̂} = 𝒜 ∪ 2ℕⁿ_{d̂}`, `𝒮⁽⁰⁾_{j,d̂} = ∅`, bases `ℕⁿ_{d̂−d_j}`.
    pub fn constrained(pop: &Pop, d_hat: u32) -> Result<Self> {
        let d = pop.min_order();
        if d_hat < d {
            return Err(Error::RelaxationOrderTooLow { d_hat, d });
        }
        let n = pop.n();
        let mut global = Interner { exps: Vec::new(), lookup: FxHashMap::default() };
        let b0 = standard_basis(n, d_hat)?;
        let mut initial: Vec<u32> = pop.objective().support().cloned().map(|e| global.id(e)).collect();
        for g in pop.constraints() {
            initial.extend(g.support().cloned().map(|e| global.id(e)));
        }
        initial.extend(b0.iter().map(|b| global.id(b.scale(2))));
        let one = Polynomial::constant(n, num_traits::One::one());
        let mut locs = vec![build_localizer(b0, one, &mut global)];
        for (j, g) in pop.constraints().iter().enumerate() {
            let basis = standard_basis(n, d_hat - pop.constraint_half_degree(j))?;
            locs.push(build_localizer(basis, g.clone(), &mut global));
        }
        Ok(Self::start(global, locs, initial))
    }

    fn start(global: Interner, localizers: Vec<Localizer>, initial: Vec<u32>) -> Self {
        let cap = global.exps.len();
        let engine = Arc::new(Engine { exps: global.exps, localizers });
        let mut s0 = IdSet::new(cap);
        for id in initial {
            s0.insert(id);
        }
        let mut supports = vec![IdSet::new(cap); engine.localizers.len()];
        supports[0] = s0;
        TssosState { engine, k: 0, prev_supports: supports.clone(), supports, levels: Vec::new() }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_localizers(&self) -> usize {
        self.engine.localizers.len()
    }

    pub fn localizer(&self, j: usize) -> &Localizer {
        &self.engine.localizers[j]
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.engine.localizers[0].basis
    }

    pub fn parity(&self) -> &ParityPartition {
        &self.engine.localizers[0].parity
    }

    /// Matrices of localizer `j` at the current step. Panics before the first
    /// step.
    pub fn level(&self, j: usize) -> &Level {
        assert!(self.k > 0, "no block structure before the first step");
        &self.levels[j]
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn c_small(&self) -> &SymBinMatrix {
        &self.level(0).c_small
    }

    pub fn b_small(&self) -> &SymBinMatrix {
        &self.level(0).b_small
    }

    pub fn blocks(&self) -> &BlockPartition {
        &self.level(0).blocks
    }

    /// `𝒮⁽ᵏ⁾_j`.
    pub fn support(&self, j: usize) -> SupportSet {
        self.engine.to_support_set(&self.supports[j])
    }

    /// `𝒮⁽ᵏ⁻¹⁾_j`, the support that produced the current matrices.
    pub fn previous_support(&self, j: usize) -> SupportSet {
        self.engine.to_support_set(&self.prev_supports[j])
    }

    pub(crate) fn engine(&self) -> &Engine {
        &self.engine
    }

    pub(crate) fn previous_support_ids(&self, j: usize) -> &IdSet {
        &self.prev_supports[j]
    }

    /// `⋃_j 𝒮⁽ᵏ⁻¹⁾_j`.
    pub(crate) fn previous_union(&self) -> IdSet {
        let mut u = IdSet::new(self.engine.capacity());
        for s in &self.prev_supports {
            u.union_with(s);
        }
        u
    }

    /// One support-extension / block-closure step for every localizer.
    pub fn step(&self) -> TssosState {
        let cap = self.engine.capacity();
        let mut union = IdSet::new(cap);
        for s in &self.supports {
            union.union_with(s);
        }
        let results: Vec<(Level, IdSet)> = self
            .engine
            .localizers
            .par_iter()
            .map(|loc| {
                let c_small = loc.extend(&union);
                let class_blocks = connected_components(&c_small);
                let b_small = block_closure(&c_small);
                let members: Vec<Vec<usize>> = (0..loc.parity.len()).map(|c| loc.parity.members(c).to_vec()).collect();
                let blocks = class_blocks.expand(&members, loc.basis.len());
                let support = loc.support_of(&b_small, cap);
                (Level { c_small, b_small, class_blocks, blocks }, support)
            })
            .collect();
        let (levels, supports): (Vec<Level>, Vec<IdSet>) = results.into_iter().unzip();
        TssosState { engine: Arc::clone(&self.engine), k: self.k + 1, prev_supports: self.supports.clone(), supports, levels }
    }

    /// Whether `next` has the same block structure as `self` for every
    /// localizer.
    pub fn same_structure(&self, next: &TssosState) -> bool {
        self.k > 0 && next.k > 0 && self.levels.iter().zip(&next.levels).all(|(a, b)| a.b_small == b.b_small)
    }
}

fn check_objective(f: &Polynomial) -> Result<()> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if f.degree() % 2 == 1 {
        return Err(Error::OddDegree(f.degree()));
    }
    Ok(())
}
