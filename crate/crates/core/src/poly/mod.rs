//! Sparse multivariate polynomials over the rationals.
//!
//! Only the support and coefficients matter for the relaxations built in this
//! crate, so the arithmetic surface is deliberately small: construction,
//! parsing, printing, evaluation and support queries.

mod basis;
mod exponent;
mod newton;
mod parse;

pub use basis::{partition_by_parity, standard_basis, standard_basis_capped, MonomialBasis, ParityPartition, DEFAULT_BASIS_CAP};
pub use exponent::{parity, Exponent, ParityVector};
pub use newton::{in_convex_hull, newton_basis, relaxation_basis};
pub use parse::parse_polynomial;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A polynomial `Σ c_α x^α` with exact rational coefficients.
///
/// Zero coefficients are never stored, so the key set is exactly the support.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<Exponent, BigRational>,
    degree: u32,
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new(), degree: 0 }
    }

    pub fn constant(n: usize, c: BigRational) -> Self {
        let mut p = Self::zero(n);
        p.add_term(Exponent::zeros(n), c);
        p
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs; repeated
    /// exponents are summed.
    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Exponent, BigRational)>,
    {
        let mut p = Self::zero(n);
        for (e, c) in terms {
            if e.n() != n {
                return Err(Error::DimensionMismatch { expected: n, found: e.n() });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    pub(crate) fn add_term(&mut self, e: Exponent, c: BigRational) {
        debug_assert_eq!(e.n(), self.n);
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e.clone()).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
        self.degree = self.terms.keys().map(Exponent::degree).max().unwrap_or(0);
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &BigRational)> {
        self.terms.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &Exponent> {
        self.terms.keys()
    }

    pub fn coefficient(&self, e: &Exponent) -> Option<&BigRational> {
        self.terms.get(e)
    }

    /// `⌈deg/2⌉`.
    pub fn half_degree(&self) -> u32 {
        self.degree.div_ceil(2)
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.n, "evaluation point has wrong dimension");
        self.terms
            .iter()
            .map(|(e, c)| {
                let m: f64 = e.entries().iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product();
                rational_to_f64(c) * m
            })
            .sum()
    }

    /// `self + other`, used for building constraints such as `R² − Σ x_i²`.
    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        let mut p = self.clone();
        for (e, c) in &other.terms {
            p.add_term(e.clone(), c.clone());
        }
        Ok(p)
    }

    pub fn to_json(&self) -> PolynomialJson {
        PolynomialJson {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| TermJson { exp: e.entries().to_vec(), coef: format_rational(c) })
                .collect(),
        }
    }

    pub fn from_json(j: &PolynomialJson) -> Result<Self> {
        let mut terms = Vec::with_capacity(j.terms.len());
        for t in &j.terms {
            let c = parse_rational(&t.coef).ok_or_else(|| Error::Syntax {
                pos: 0,
                msg: format!("bad coefficient {:?}", t.coef),
            })?;
            terms.push((Exponent::new(t.exp.clone()), c));
        }
        Self::from_terms(j.n, terms)
    }
}

/// Canonical JSON form `{"n": .., "terms": [{"exp": [..], "coef": "p/q"}]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolynomialJson {
    pub n: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub exp: Vec<u32>,
    pub coef: String,
}

impl fmt::Display for Polynomial {
    /// Highest degree first, e.g. `x1^6 - 3*x1^5 + 5`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let abs = c.abs();
            let mono = e.monomial_string();
            match (abs.is_one(), e.is_zero()) {
                (true, true) => write!(f, "1")?,
                (true, false) => write!(f, "{mono}")?,
                (false, true) => write!(f, "{}", format_rational(&abs))?,
                (false, false) => write!(f, "{}*{mono}", format_rational(&abs))?,
            }
        }
        Ok(())
    }
}

pub fn format_rational(c: &BigRational) -> String {
    if c.denom().is_one() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

/// Accepts `p`, `p/q` and decimal literals such as `-0.25` or `1e-3`.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let value = if let Some((p, q)) = body.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        BigRational::new(p, q)
    } else {
        parse_decimal(body)?
    };
    Some(if neg { -value } else { value })
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().ok()?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    Some(if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    })
}

/// Round-to-nearest conversion used at SDP export.
pub fn rational_to_f64(c: &BigRational) -> f64 {
    c.to_f64().unwrap_or_else(|| {
        let n = c.numer().to_f64().unwrap_or(f64::NAN);
        let d = c.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}
