use super::engine::{IdSet, Localizer};
use super::TssosState;
use crate::graph::{chordal_extension, ChordalExtension, SymBinMatrix};

/// One chordal-TSSOS step: a chordal extension per localizer.
#[derive(Clone, Debug)]
pub struct ChordalStep {
    pub k: usize,
    pub extensions: Vec<ChordalExtension>,
}

impl ChordalStep {
    /// Largest clique over all localizers.
    pub fn max_clique(&self) -> usize {
        self.extensions.iter().flat_map(|e| e.cliques.iter().map(Vec::len)).max().unwrap_or(0)
    }

    /// Largest clique per localizer.
    pub fn max_cliques(&self) -> Vec<usize> {
        self.extensions.iter().map(|e| e.cliques.iter().map(Vec::len).max().unwrap_or(0)).collect()
    }
}

pub(crate) fn full_extension(loc: &Localizer, support: &IdSet) -> SymBinMatrix {
    let r = loc.basis().len();
    let hit: Vec<bool> = (0..loc.sums().len() as u32).map(|s| loc.shifted(s).iter().any(|&g| support.contains(g))).collect();
    let mut c = SymBinMatrix::zeros(r);
    for i in 0..r {
        for j in i..r {
            if hit[loc.sum_id(i, j) as usize] {
                c.set(i, j);
            }
        }
    }
    c
}

/// Chordal-TSSOS: support extension over the full basis followed by a
/// chordal extension instead of the block closure. Starts from the `k = 0`
/// state of `init` and returns every step up to `k`.
pub fn chordal_tssos(init: &TssosState, k: usize) -> Vec<ChordalStep> {
    let engine = init.engine();
    let cap = engine.capacity();
    let m = init.num_localizers();
    let mut supports: Vec<IdSet> = (0..m).map(|j| init.previous_support_ids(j).clone()).collect();
    let mut out = Vec::with_capacity(k);
    for step in 1..=k {
        let mut union = IdSet::new(cap);
        for s in &supports {
            union.union_with(s);
        }
        let mut exts = Vec::with_capacity(m);
        let mut next = Vec::with_capacity(m);
        for j in 0..m {
            let loc = init.localizer(j);
            let ext = chordal_extension(&full_extension(loc, &union));
            let mut s = IdSet::new(cap);
            for clique in &ext.cliques {
                for (a, &i) in clique.iter().enumerate() {
                    for &jj in &clique[a..] {
                        for &g in loc.shifted(loc.sum_id(i, jj)) {
                            s.insert(g);
                        }
                    }
                }
            }
            next.push(s);
            exts.push(ext);
        }
        supports = next;
        out.push(ChordalStep { k: step, extensions: exts });
    }
    out
}
