use std::fmt::Write as _;

/// A symmetric 0/1 matrix stored as bit rows.
///
/// Doubles as the adjacency structure of an undirected graph; diagonal
/// entries are tracked but ignored by graph algorithms.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SymBinMatrix {
    size: usize,
    words: usize,
    rows: Vec<Vec<u64>>,
}

impl SymBinMatrix {
    pub fn zeros(size: usize) -> Self {
        let words = size.div_ceil(64);
        Self { size, words, rows: vec![vec![0; words]; size] }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size);
        for i in 0..size {
            m.set(i, i);
        }
        m
    }

    pub fn ones(size: usize) -> Self {
        let mut m = Self::zeros(size);
        for i in 0..size {
            for j in 0..size {
                m.rows[i][j / 64] |= 1 << (j % 64);
            }
        }
        m
    }

    /// Builds from a dense 0/1 table. Returns `None` if it is not square,
    /// not symmetric, or contains entries other than 0 and 1.
    pub fn from_dense(rows: &[Vec<u8>]) -> Option<Self> {
        let r = rows.len();
        let mut m = Self::zeros(r);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != r {
                return None;
            }
            for (j, &v) in row.iter().enumerate() {
                match v {
                    0 if rows[j][i] == 0 => {}
                    1 if rows[j][i] == 1 => m.set(i, j),
                    _ => return None,
                }
            }
        }
        Some(m)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Sets `(i,j)` and `(j,i)`.
    pub fn set(&mut self, i: usize, j: usize) {
        assert!(i < self.size && j < self.size, "index out of range");
        self.rows[i][j / 64] |= 1 << (j % 64);
        self.rows[j][i / 64] |= 1 << (i % 64);
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        (self.rows[i][j / 64] >> (j % 64)) & 1 == 1
    }

    pub(crate) fn row_words(&self, i: usize) -> &[u64] {
        &self.rows[i]
    }

    /// Column indices set in row `i`, ascending, diagonal included.
    pub fn row(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        iter_bits(&self.rows[i])
    }

    /// Off-diagonal neighbors of `i`.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(i).filter(move |&j| j != i)
    }

    pub fn degree(&self, i: usize) -> usize {
        let ones: u32 = self.rows[i].iter().map(|w| w.count_ones()).sum();
        ones as usize - self.get(i, i) as usize
    }

    /// Off-diagonal edges `(i, j)` with `i < j`, in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.size {
            out.extend(self.row(i).filter(|&j| j > i).map(|j| (i, j)));
        }
        out
    }

    /// Number of set entries `(i, j)`, counting both orientations and the
    /// diagonal.
    pub fn support_size(&self) -> usize {
        self.rows.iter().flatten().map(|w| w.count_ones() as usize).sum()
    }

    pub fn hadamard(&self, other: &SymBinMatrix) -> SymBinMatrix {
        self.zip_words(other, |a, b| a & b)
    }

    pub fn union(&self, other: &SymBinMatrix) -> SymBinMatrix {
        self.zip_words(other, |a, b| a | b)
    }

    fn zip_words(&self, other: &SymBinMatrix, op: impl Fn(u64, u64) -> u64) -> SymBinMatrix {
        assert_eq!(self.size, other.size, "matrix sizes differ");
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| op(x, y)).collect())
            .collect();
        SymBinMatrix { size: self.size, words: self.words, rows }
    }

    /// `supp(self) ⊆ supp(other)`.
    pub fn is_subset_of(&self, other: &SymBinMatrix) -> bool {
        self.size == other.size
            && self.rows.iter().zip(&other.rows).all(|(a, b)| a.iter().zip(b).all(|(&x, &y)| x & !y == 0))
    }

    /// Principal submatrix on `indices` (in the given order).
    pub fn submatrix(&self, indices: &[usize]) -> SymBinMatrix {
        let mut m = SymBinMatrix::zeros(indices.len());
        for (a, &i) in indices.iter().enumerate() {
            for (b, &j) in indices.iter().enumerate().skip(a) {
                if self.get(i, j) {
                    m.set(a, b);
                }
            }
        }
        m
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        (0..self.size).map(|i| (0..self.size).map(|j| self.get(i, j) as u8).collect()).collect()
    }

    /// Graphviz rendering of the off-diagonal adjacency graph.
    pub fn to_dot(&self, labels: Option<&[String]>) -> String {
        let mut s = String::from("graph G {\n");
        for i in 0..self.size {
            let label = labels.and_then(|l| l.get(i)).cloned().unwrap_or_else(|| (i + 1).to_string());
            let _ = writeln!(s, "  n{i} [label=\"{label}\"];");
        }
        for (i, j) in self.edges() {
            let _ = writeln!(s, "  n{i} -- n{j};");
        }
        s.push_str("}\n");
        s
    }
}

pub(crate) fn iter_bits(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(k, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                return None;
            }
            let t = w.trailing_zeros() as usize;
            w &= w - 1;
            Some(k * 64 + t)
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_round_trip_and_symmetry_check() {
        let d = vec![vec![1, 0, 1], vec![0, 1, 0], vec![1, 0, 0]];
        let m = SymBinMatrix::from_dense(&d).unwrap();
        assert_eq!(m.to_dense(), d);
        assert_eq!(m.edges(), vec![(0, 2)]);
        assert_eq!(m.support_size(), 4);
        assert!(SymBinMatrix::from_dense(&[vec![0, 1], vec![0, 0]]).is_none());
        assert!(SymBinMatrix::from_dense(&[vec![2]]).is_none());
    }

    #[test]
    fn wide_rows() {
        let mut m = SymBinMatrix::zeros(130);
        m.set(3, 129);
        m.set(64, 65);
        assert!(m.get(129, 3));
        assert_eq!(m.neighbors(64).collect::<Vec<_>>(), vec![65]);
        assert_eq!(m.degree(3), 1);
        assert_eq!(m.edges(), vec![(3, 129), (64, 65)]);
    }

    #[test]
    fn hadamard_and_subset() {
        let a = SymBinMatrix::ones(4);
        let b = SymBinMatrix::identity(4);
        assert_eq!(a.hadamard(&b), b);
        assert!(b.is_subset_of(&a));
        assert!(!a.is_subset_of(&b));
        assert_eq!(b.union(&a), a);
    }

    #[test]
    fn dot_output() {
        let mut m = SymBinMatrix::zeros(2);
        m.set(0, 1);
        let dot = m.to_dot(Some(&["1".to_string(), "x1".to_string()]));
        assert!(dot.contains("n1 [label=\"x1\"]"));
        assert!(dot.contains("n0 -- n1;"));
    }
}
