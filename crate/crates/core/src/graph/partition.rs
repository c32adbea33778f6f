use serde::{Deserialize, Serialize};

use super::SymBinMatrix;

/// A partition of `0..r` into blocks.
///
/// Blocks are stored sorted internally and ordered by their smallest index.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct BlockPartition {
    size: usize,
    blocks: Vec<Vec<usize>>,
}

impl BlockPartition {
    /// Validates that `blocks` partition `0..size`.
    pub fn new(size: usize, mut blocks: Vec<Vec<usize>>) -> Option<Self> {
        let mut seen = vec![false; size];
        blocks.retain(|b| !b.is_empty());
        for b in &mut blocks {
            b.sort_unstable();
            for &i in b.iter() {
                if i >= size || std::mem::replace(&mut seen[i], true) {
                    return None;
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return None;
        }
        blocks.sort_by_key(|b| b[0]);
        Some(Self { size, blocks })
    }

    pub fn singletons(size: usize) -> Self {
        Self { size, blocks: (0..size).map(|i| vec![i]).collect() }
    }

    pub fn whole(size: usize) -> Self {
        let blocks = if size == 0 { vec![] } else { vec![(0..size).collect()] };
        Self { size, blocks }
    }

    /// Groups indices by a label; the label order is irrelevant.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut map: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for (i, &l) in labels.iter().enumerate() {
            map.entry(l).or_default().push(i);
        }
        Self::new(labels.len(), map.into_values().collect()).expect("labels induce a partition")
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Largest block size (`mb`).
    pub fn width(&self) -> usize {
        self.blocks.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Block sizes, largest first.
    pub fn sizes_desc(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.blocks.iter().map(Vec::len).collect();
        s.sort_unstable_by(|a, b| b.cmp(a));
        s
    }

    /// Block index of every element.
    pub fn labels(&self) -> Vec<usize> {
        let mut l = vec![0; self.size];
        for (k, b) in self.blocks.iter().enumerate() {
            for &i in b {
                l[i] = k;
            }
        }
        l
    }

    /// Blocks ordered by size descending, ties by smallest element.
    pub fn dump_order(&self) -> Vec<&[usize]> {
        let mut v: Vec<&[usize]> = self.blocks.iter().map(Vec::as_slice).collect();
        v.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        v
    }

    /// `self ≤ other`: every block of `self` lies inside a block of `other`.
    pub fn is_refinement_of(&self, other: &BlockPartition) -> bool {
        if self.size != other.size {
            return false;
        }
        let l = other.labels();
        self.blocks.iter().all(|b| b.iter().all(|&i| l[i] == l[b[0]]))
    }

    /// Block-diagonal 0/1 matrix with all-ones blocks.
    pub fn to_matrix(&self) -> SymBinMatrix {
        let mut m = SymBinMatrix::zeros(self.size);
        for b in &self.blocks {
            for (k, &i) in b.iter().enumerate() {
                for &j in &b[k..] {
                    m.set(i, j);
                }
            }
        }
        m
    }

    /// Lifts a partition of groups to a partition of their members.
    pub fn expand(&self, members: &[Vec<usize>], size: usize) -> BlockPartition {
        let blocks = self.blocks.iter().map(|b| b.iter().flat_map(|&g| members[g].iter().copied()).collect()).collect();
        BlockPartition::new(size, blocks).expect("group members partition the index set")
    }
}
