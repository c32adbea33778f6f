use crate::graph::SymBinMatrix;
use crate::poly::{Exponent, MonomialBasis, ParityPartition, ParityVector};

/// Positions `(i, j)` with `i ≤ j` and `b_i + b_j = α`.
pub fn pair_positions(alpha: &Exponent, basis: &MonomialBasis) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, b) in basis.iter().enumerate() {
        let Some(c) = alpha.checked_sub(b) else { continue };
        if let Some(j) = basis.position(&c) {
            if i <= j {
                out.push((i, j));
            }
        }
    }
    out
}

/// Indicator of the pairs summing to `α`.
pub fn assemble_a(alpha: &Exponent, basis: &MonomialBasis) -> SymBinMatrix {
    let mut a = SymBinMatrix::zeros(basis.len());
    for (i, j) in pair_positions(alpha, basis) {
        a.set(i, j);
    }
    a
}

/// Class-level indicator of parity pairs that differ by `ν`.
pub fn assemble_e(nu: ParityVector, types: &[ParityVector]) -> SymBinMatrix {
    let mut e = SymBinMatrix::zeros(types.len());
    for (i, &d) in types.iter().enumerate() {
        for (j, &s) in types.iter().enumerate().skip(i) {
            if d.xor(s) == nu {
                e.set(i, j);
            }
        }
    }
    e
}

/// Collapses a class-level matrix onto groups of classes.
pub fn compress_d(m: &SymBinMatrix, groups: &[Vec<usize>]) -> SymBinMatrix {
    let mut group_of = vec![0; m.size()];
    for (g, members) in groups.iter().enumerate() {
        for &c in members {
            group_of[c] = g;
        }
    }
    let mut d = SymBinMatrix::zeros(groups.len());
    for (i, j) in m.edges() {
        d.set(group_of[i], group_of[j]);
    }
    for i in 0..m.size() {
        if m.get(i, i) {
            d.set(group_of[i], group_of[i]);
        }
    }
    d
}

/// Group-level counts of the ordered pairs summing to `α`.
pub fn assemble_k(alpha: &Exponent, basis: &MonomialBasis, p: &ParityPartition, groups: &[Vec<usize>]) -> Vec<Vec<u64>> {
    let mut group_of = vec![0; p.len()];
    for (g, members) in groups.iter().enumerate() {
        for &c in members {
            group_of[c] = g;
        }
    }
    let mut k = vec![vec![0u64; groups.len()]; groups.len()];
    for (i, j) in pair_positions(alpha, basis) {
        let (gi, gj) = (group_of[p.class_of(i)], group_of[p.class_of(j)]);
        k[gi][gj] += 1;
        if i != j {
            k[gj][gi] += 1;
        }
    }
    k
}
