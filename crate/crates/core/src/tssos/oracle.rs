//! Direct full-basis TSSOS, materializing every `r × r` matrix. Kept as an
//! independent reference for the parity-class engine.

use std::collections::HashSet;

use super::Pop;
use crate::error::{Error, Result};
use crate::graph::{block_closure, connected_components, BlockPartition, SymBinMatrix};
use crate::poly::{standard_basis, MonomialBasis, Polynomial};

/// Largest basis the oracle accepts.
pub const ORACLE_CAP: usize = 2_000;

type Raw = Vec<u32>;

fn add(a: &[u32], b: &[u32]) -> Raw {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Partition `I⁽ᵏ⁾` from the two-step procedure with `𝒮⁽⁰⁾ = supp(f) ∪ 2𝓑`.
pub fn oracle_two_step(f: &Polynomial, basis: &MonomialBasis, k: usize) -> Result<BlockPartition> {
    let r = basis.len();
    if r > ORACLE_CAP {
        return Err(Error::BasisTooLarge { size: r as u128, cap: ORACLE_CAP });
    }
    let elems: Vec<Raw> = basis.iter().map(|e| e.entries().to_vec()).collect();
    let mut support: HashSet<Raw> = f.support().map(|e| e.entries().to_vec()).collect();
    support.extend(elems.iter().map(|b| add(b, b)));
    let mut blocks = BlockPartition::singletons(r);
    for _ in 0..k {
        let mut c = SymBinMatrix::zeros(r);
        for i in 0..r {
            for j in i..r {
                if support.contains(&add(&elems[i], &elems[j])) {
                    c.set(i, j);
                }
            }
        }
        let b = block_closure(&c);
        blocks = connected_components(&c);
        support = b.edges().into_iter().chain((0..r).map(|i| (i, i))).map(|(i, j)| add(&elems[i], &elems[j])).collect();
    }
    Ok(blocks)
}

/// Partitions `I⁽ᵏ⁾_{j,d̂}` for `j = 0..=m` from the constrained two-step
/// procedure.
pub fn oracle_two_step_constrained(pop: &Pop, d_hat: u32, k: usize) -> Result<Vec<BlockPartition>> {
    let d = pop.min_order();
    if d_hat < d {
        return Err(Error::RelaxationOrderTooLow { d_hat, d });
    }
    let n = pop.n();
    let mut bases: Vec<Vec<Raw>> = Vec::new();
    let mut shifts: Vec<Vec<Raw>> = Vec::new();
    bases.push(standard_basis(n, d_hat)?.iter().map(|e| e.entries().to_vec()).collect());
    shifts.push(vec![vec![0; n]]);
    for (j, g) in pop.constraints().iter().enumerate() {
        let b = standard_basis(n, d_hat - pop.constraint_half_degree(j))?;
        bases.push(b.iter().map(|e| e.entries().to_vec()).collect());
        shifts.push(g.support().map(|e| e.entries().to_vec()).collect());
    }
    if let Some(big) = bases.iter().find(|b| b.len() > ORACLE_CAP) {
        return Err(Error::BasisTooLarge { size: big.len() as u128, cap: ORACLE_CAP });
    }
    let mut supports: Vec<HashSet<Raw>> = vec![HashSet::new(); bases.len()];
    supports[0].extend(pop.objective().support().map(|e| e.entries().to_vec()));
    for g in pop.constraints() {
        supports[0].extend(g.support().map(|e| e.entries().to_vec()));
    }
    supports[0].extend(bases[0].iter().map(|b| add(b, b)));

    let mut out: Vec<BlockPartition> = bases.iter().map(|b| BlockPartition::singletons(b.len())).collect();
    for _ in 0..k {
        let union: HashSet<Raw> = supports.iter().flatten().cloned().collect();
        let mut next = Vec::new();
        for (j, elems) in bases.iter().enumerate() {
            let r = elems.len();
            let mut c = SymBinMatrix::zeros(r);
            for a in 0..r {
                for b in a..r {
                    let s = add(&elems[a], &elems[b]);
                    if shifts[j].iter().any(|t| union.contains(&add(t, &s))) {
                        c.set(a, b);
                    }
                }
            }
            let closed = block_closure(&c);
            out[j] = connected_components(&c);
            let mut sj = HashSet::new();
            for (a, b) in closed.edges().into_iter().chain((0..r).map(|i| (i, i))) {
                let s = add(&elems[a], &elems[b]);
                for t in &shifts[j] {
                    sj.insert(add(t, &s));
                }
            }
            next.push(sj);
        }
        supports = next;
    }
    Ok(out)
}
