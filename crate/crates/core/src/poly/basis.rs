use rustc_hash::FxHashMap;

use super::{parity, Exponent, ParityVector};
use crate::error::{Error, Result};

/// Default upper bound on generated basis sizes.
pub const DEFAULT_BASIS_CAP: usize = 250_000;

/// An ordered, duplicate-free list of exponents with a reverse index.
#[derive(Clone, Debug)]
pub struct MonomialBasis {
    n: usize,
    elements: Vec<Exponent>,
    index: FxHashMap<Exponent, usize>,
}

impl MonomialBasis {
    /// Sorts `elements` into graded-lex order and drops duplicates.
    pub fn new(n: usize, mut elements: Vec<Exponent>) -> Result<Self> {
        if let Some(bad) = elements.iter().find(|e| e.n() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: bad.n() });
        }
        elements.sort();
        elements.dedup();
        let index = elements.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        Ok(Self { n, elements, index })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Exponent] {
        &self.elements
    }

    pub fn get(&self, i: usize) -> &Exponent {
        &self.elements[i]
    }

    pub fn position(&self, e: &Exponent) -> Option<usize> {
        self.index.get(e).copied()
    }

    pub fn contains(&self, e: &Exponent) -> bool {
        self.index.contains_key(e)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Exponent> {
        self.elements.iter()
    }

    /// Largest total degree in the basis.
    pub fn max_degree(&self) -> u32 {
        self.elements.last().map(Exponent::degree).unwrap_or(0)
    }
}

impl PartialEq for MonomialBasis {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.elements == other.elements
    }
}

impl Eq for MonomialBasis {}

/// `C(n+d, d)`, saturating.
pub(crate) fn binomial_size(n: usize, d: u32) -> u128 {
    let mut acc: u128 = 1;
    for i in 1..=d as u128 {
        acc = acc.saturating_mul(n as u128 + i) / i;
    }
    acc
}

/// `ℕⁿ_d` with the default size cap.
pub fn standard_basis(n: usize, d: u32) -> Result<MonomialBasis> {
    standard_basis_capped(n, d, DEFAULT_BASIS_CAP)
}

/// `ℕⁿ_d`, failing if `C(n+d, d)` exceeds `cap`.
pub fn standard_basis_capped(n: usize, d: u32, cap: usize) -> Result<MonomialBasis> {
    if n == 0 {
        return Err(Error::InvalidParameter("basis needs at least one variable".into()));
    }
    let size = binomial_size(n, d);
    if size > cap as u128 {
        return Err(Error::BasisTooLarge { size, cap });
    }
    let mut elements = Vec::with_capacity(size as usize);
    let mut cur = vec![0u32; n];
    for deg in 0..=d {
        compositions(&mut cur, 0, deg, &mut elements);
    }
    let index = elements.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
    Ok(MonomialBasis { n, elements, index })
}

/// Pushes every exponent of degree exactly `rest` (in the free tail starting
/// at `i`) in descending lex order, which is graded-lex order within a degree.
fn compositions(cur: &mut [u32], i: usize, rest: u32, out: &mut Vec<Exponent>) {
    if i + 1 == cur.len() {
        cur[i] = rest;
        out.push(Exponent::new(cur.to_vec()));
        cur[i] = 0;
        return;
    }
    for a in (0..=rest).rev() {
        cur[i] = a;
        compositions(cur, i + 1, rest - a, out);
    }
    cur[i] = 0;
}

/// Split of a basis into parity classes `𝓑_δ`.
///
/// Classes are numbered in graded-lex order of their parity vectors; members
/// of a class are basis positions in ascending order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityPartition {
    types: Vec<ParityVector>,
    members: Vec<Vec<usize>>,
    class_of: Vec<usize>,
    lookup: FxHashMap<ParityVector, usize>,
}

impl ParityPartition {
    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    /// `(𝓑)₂` in canonical order.
    pub fn types(&self) -> &[ParityVector] {
        &self.types
    }

    pub fn members(&self, class: usize) -> &[usize] {
        &self.members[class]
    }

    pub fn class_size(&self, class: usize) -> usize {
        self.members[class].len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }

    /// Class index of a basis position.
    pub fn class_of(&self, position: usize) -> usize {
        self.class_of[position]
    }

    pub fn parity_of(&self, position: usize) -> ParityVector {
        self.types[self.class_of[position]]
    }

    pub fn index_of(&self, delta: ParityVector) -> Option<usize> {
        self.lookup.get(&delta).copied()
    }

    pub fn members_of(&self, delta: ParityVector) -> Option<&[usize]> {
        self.index_of(delta).map(|c| self.members[c].as_slice())
    }
}

pub fn partition_by_parity(b: &MonomialBasis) -> ParityPartition {
    let mut types: Vec<ParityVector> = b.iter().map(parity).collect();
    types.sort();
    types.dedup();
    let lookup: FxHashMap<ParityVector, usize> = types.iter().enumerate().map(|(i, &t)| (t, i)).collect();
    let mut members = vec![Vec::new(); types.len()];
    let mut class_of = Vec::with_capacity(b.len());
    for (pos, e) in b.iter().enumerate() {
        let c = lookup[&parity(e)];
        members[c].push(pos);
        class_of.push(c);
    }
    ParityPartition { types, members, class_of, lookup }
}
