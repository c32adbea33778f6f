use super::matrix::iter_bits;
use super::SymBinMatrix;

/// Result of a chordal extension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChordalExtension {
    /// Input graph plus fill-in edges. The diagonal is copied from the input.
    pub graph: SymBinMatrix,
    /// Maximal cliques, each sorted, ordered lexicographically.
    pub cliques: Vec<Vec<usize>>,
    /// The elimination order that produced the fill-in; it is a perfect
    /// elimination ordering of `graph`.
    pub order: Vec<usize>,
}

/// Greedy minimum-degree elimination with fill-in, lowest index on ties.
pub fn chordal_extension(b: &SymBinMatrix) -> ChordalExtension {
    let r = b.size();
    let words = r.div_ceil(64);
    let mut adj: Vec<Vec<u64>> = (0..r)
        .map(|i| {
            let mut row = b.row_words(i).to_vec();
            row[i / 64] &= !(1 << (i % 64));
            row
        })
        .collect();
    let mut alive = vec![0u64; words];
    for i in 0..r {
        alive[i / 64] |= 1 << (i % 64);
    }
    let mut graph = b.clone();
    let mut order = Vec::with_capacity(r);
    let mut candidates: Vec<Vec<usize>> = Vec::with_capacity(r);

    for _ in 0..r {
        let v = iter_bits(&alive)
            .min_by_key(|&v| (popcount_and(&adj[v], &alive), v))
            .expect("a vertex remains");
        let nbrs: Vec<usize> = iter_bits(&and(&adj[v], &alive)).collect();
        for (k, &a) in nbrs.iter().enumerate() {
            for &c in &nbrs[k + 1..] {
                if !graph.get(a, c) {
                    graph.set(a, c);
                    adj[a][c / 64] |= 1 << (c % 64);
                    adj[c][a / 64] |= 1 << (a % 64);
                }
            }
        }
        let mut clique = nbrs;
        clique.push(v);
        clique.sort_unstable();
        candidates.push(clique);
        alive[v / 64] &= !(1 << (v % 64));
        order.push(v);
    }

    ChordalExtension { graph, cliques: maximal_sets(candidates), order }
}

fn and(a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().zip(b).map(|(x, y)| x & y).collect()
}

fn popcount_and(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum()
}

/// Drops sets contained in another set and duplicates; result sorted.
pub(crate) fn maximal_sets(mut sets: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    sets.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    sets.dedup();
    let mut kept: Vec<Vec<usize>> = Vec::new();
    for s in sets {
        if !kept.iter().any(|k| is_sorted_subset(&s, k)) {
            kept.push(s);
        }
    }
    kept.sort();
    kept
}

fn is_sorted_subset(small: &[usize], big: &[usize]) -> bool {
    let mut it = big.iter();
    small.iter().all(|x| it.any(|y| y == x))
}

/// Whether `order` is a perfect elimination ordering of `g`: for every
/// vertex, its neighbors that come later in the order form a clique.
pub fn is_perfect_elimination_ordering(g: &SymBinMatrix, order: &[usize]) -> bool {
    let r = g.size();
    if order.len() != r {
        return false;
    }
    let mut pos = vec![usize::MAX; r];
    for (k, &v) in order.iter().enumerate() {
        if v >= r || pos[v] != usize::MAX {
            return false;
        }
        pos[v] = k;
    }
    for &v in order {
        let later: Vec<usize> = g.neighbors(v).filter(|&u| pos[u] > pos[v]).collect();
        for (k, &a) in later.iter().enumerate() {
            if later[k + 1..].iter().any(|&c| !g.get(a, c)) {
                return false;
            }
        }
    }
    true
}

/// Maximum cardinality search; the reverse of the visit order is a perfect
/// elimination ordering exactly when the graph is chordal.
pub fn maximum_cardinality_search(g: &SymBinMatrix) -> Vec<usize> {
    let r = g.size();
    let mut weight = vec![0usize; r];
    let mut done = vec![false; r];
    let mut visit = Vec::with_capacity(r);
    for _ in 0..r {
        let v = (0..r).filter(|&v| !done[v]).max_by_key(|&v| (weight[v], std::cmp::Reverse(v))).expect("vertex left");
        done[v] = true;
        visit.push(v);
        for u in g.neighbors(v) {
            if !done[u] {
                weight[u] += 1;
            }
        }
    }
    visit.reverse();
    visit
}

pub fn is_chordal(g: &SymBinMatrix) -> bool {
    is_perfect_elimination_ordering(g, &maximum_cardinality_search(g))
}
