use super::{BlockPartition, SymBinMatrix};

/// Disjoint sets over `0..n` whose representative is always the minimum
/// element of its set.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns `true` if the sets were distinct.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }

    pub fn into_partition(mut self) -> BlockPartition {
        let labels: Vec<usize> = (0..self.parent.len()).map(|i| self.find(i)).collect();
        BlockPartition::from_labels(&labels)
    }
}

pub fn connected_components(b: &SymBinMatrix) -> BlockPartition {
    let mut uf = UnionFind::new(b.size());
    for (i, j) in b.edges() {
        uf.union(i, j);
    }
    uf.into_partition()
}

/// Completes each connected component to a clique. The diagonal is always
/// set, so the result is a block-diagonal pattern.
pub fn block_closure(b: &SymBinMatrix) -> SymBinMatrix {
    connected_components(b).to_matrix()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_matrix() -> SymBinMatrix {
        SymBinMatrix::from_dense(&[
            vec![1, 0, 1, 1, 0],
            vec![0, 1, 0, 1, 0],
            vec![1, 0, 1, 0, 0],
            vec![1, 1, 0, 1, 0],
            vec![0, 0, 0, 0, 1],
        ])
        .unwrap()
    }

    #[test]
    fn five_by_five_closure() {
        let b = example_matrix();
        let closed = block_closure(&b);
        let expected = vec![
            vec![1, 1, 1, 1, 0],
            vec![1, 1, 1, 1, 0],
            vec![1, 1, 1, 1, 0],
            vec![1, 1, 1, 1, 0],
            vec![0, 0, 0, 0, 1],
        ];
        assert_eq!(closed.to_dense(), expected);
        let cc = connected_components(&b);
        assert_eq!(cc.blocks(), &[vec![0, 1, 2, 3], vec![4]]);
        assert_eq!(cc.width(), 4);
    }

    #[test]
    fn trivial_cases() {
        assert_eq!(block_closure(&SymBinMatrix::identity(5)), SymBinMatrix::identity(5));
        assert_eq!(connected_components(&SymBinMatrix::zeros(4)).width(), 1);
        assert_eq!(connected_components(&SymBinMatrix::zeros(4)).len(), 4);
        assert_eq!(connected_components(&SymBinMatrix::ones(6)).width(), 6);
    }

    #[test]
    fn path_closes_to_all_ones() {
        let mut p = SymBinMatrix::identity(3);
        p.set(0, 1);
        p.set(1, 2);
        assert_eq!(block_closure(&p), SymBinMatrix::ones(3));
    }

    #[test]
    fn representative_is_minimum() {
        let mut uf = UnionFind::new(6);
        uf.union(5, 3);
        uf.union(3, 4);
        uf.union(4, 1);
        assert_eq!(uf.find(5), 1);
        assert_eq!(uf.find(0), 0);
    }
}
