use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Largest variable count supported; parity vectors are packed into a `u64`.
pub const MAX_VARS: usize = 64;

/// An exponent vector `α ∈ ℕⁿ`.
///
/// Ordered graded-lexicographically: total degree first, then lexicographic
/// with `x1` most significant, so `(1,0,0) < (0,1,0) < (0,0,1) < (2,0,0)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Exponent(Vec<u32>);

impl Exponent {
    pub fn new(entries: Vec<u32>) -> Self {
        Exponent(entries)
    }

    pub fn zeros(n: usize) -> Self {
        Exponent(vec![0; n])
    }

    /// `k·e_i` (zero-based `i`).
    pub fn unit(n: usize, i: usize, k: u32) -> Self {
        let mut v = vec![0; n];
        v[i] = k;
        Exponent(v)
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    pub fn is_even(&self) -> bool {
        self.0.iter().all(|&a| a % 2 == 0)
    }

    pub fn nonzero_count(&self) -> usize {
        self.0.iter().filter(|&&a| a != 0).count()
    }

    pub fn add(&self, other: &Exponent) -> Exponent {
        debug_assert_eq!(self.n(), other.n());
        Exponent(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self − other` when every entry stays nonnegative.
    pub fn checked_sub(&self, other: &Exponent) -> Option<Exponent> {
        debug_assert_eq!(self.n(), other.n());
        self.0.iter().zip(&other.0).map(|(a, b)| a.checked_sub(*b)).collect::<Option<Vec<_>>>().map(Exponent)
    }

    pub fn scale(&self, k: u32) -> Exponent {
        Exponent(self.0.iter().map(|a| a * k).collect())
    }

    /// `self / 2`, defined only for even exponents.
    pub fn half(&self) -> Option<Exponent> {
        self.is_even().then(|| Exponent(self.0.iter().map(|a| a / 2).collect()))
    }

    pub fn parity(&self) -> ParityVector {
        parity(self)
    }

    /// `x1^2*x3`; empty for the zero exponent.
    pub fn monomial_string(&self) -> String {
        let mut parts = Vec::new();
        for (i, &a) in self.0.iter().enumerate() {
            match a {
                0 => {}
                1 => parts.push(format!("x{}", i + 1)),
                _ => parts.push(format!("x{}^{}", i + 1, a)),
            }
        }
        if parts.is_empty() {
            return "1".into();
        }
        parts.join("*")
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
            .then_with(|| self.0.len().cmp(&other.0.len()))
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// A parity type `(α)₂ ∈ ℤ₂ⁿ`, bit `i` holding `α_i mod 2`.
///
/// Uses the same graded-lex order as [`Exponent`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct ParityVector {
    bits: u64,
    n: u8,
}

impl ParityVector {
    pub fn from_bits(bits: u64, n: usize) -> Self {
        assert!(n <= MAX_VARS, "parity vectors support at most {MAX_VARS} variables");
        debug_assert!(n == 64 || bits >> n == 0);
        ParityVector { bits, n: n as u8 }
    }

    pub fn zero(n: usize) -> Self {
        Self::from_bits(0, n)
    }

    /// Parses `"101"` as `(1,0,1)`.
    pub fn parse(s: &str) -> Option<Self> {
        let mut bits = 0u64;
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1 << i,
                _ => return None,
            }
        }
        (s.len() <= MAX_VARS).then(|| Self::from_bits(bits, s.len()))
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn n(self) -> usize {
        self.n as usize
    }

    pub fn is_zero(self) -> bool {
        self.bits == 0
    }

    pub fn weight(self) -> u32 {
        self.bits.count_ones()
    }

    /// Addition in `ℤ₂ⁿ`.
    pub fn xor(self, other: ParityVector) -> ParityVector {
        ParityVector { bits: self.bits ^ other.bits, n: self.n }
    }

    /// The 0/1 exponent with this parity.
    pub fn lift(self) -> Exponent {
        Exponent((0..self.n()).map(|i| ((self.bits >> i) & 1) as u32).collect())
    }
}

impl Ord for ParityVector {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight().cmp(&other.weight()).then_with(|| {
            let diff = self.bits ^ other.bits;
            if diff == 0 {
                return self.n.cmp(&other.n);
            }
            let low = diff & diff.wrapping_neg();
            if self.bits & low != 0 {
                Ordering::Less
            } else {
                Ordering::Greater
            }
        })
    }
}

impl PartialOrd for ParityVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ParityVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n() {
            write!(f, "{}", (self.bits >> i) & 1)?;
        }
        Ok(())
    }
}

/// Componentwise residue mod 2.
pub fn parity(a: &Exponent) -> ParityVector {
    let mut bits = 0u64;
    for (i, &e) in a.entries().iter().enumerate() {
        bits |= ((e & 1) as u64) << i;
    }
    ParityVector::from_bits(bits, a.n())
}
