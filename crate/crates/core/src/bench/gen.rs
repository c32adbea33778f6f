//! Seeded random polynomial families.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{newton_basis, Exponent, MonomialBasis, Polynomial};

/// Rejection attempts allowed per sampled term.
pub const MAX_ATTEMPTS: usize = 1_000_000;

const MANTISSA: u32 = 53;

/// A generator family with its parameters. `degree` is the even total degree
/// `2d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum GenSpec {
    /// Constant, pure powers `x_i^{2d}` and `s − n − 1` random lower-degree
    /// terms, optionally filtered by their number of nonzero entries.
    I {
        n: usize,
        degree: u32,
        s: usize,
        #[serde(default)]
        min_nonzero: Option<usize>,
        #[serde(default)]
        max_nonzero: Option<usize>,
    },
    /// Mixed-degree diagonal plus even terms, random terms of degree `≤ 2d`
    /// and extra terms inside the Newton polytope of the diagonal part.
    II { n: usize, degree: u32, k1: usize, k2: usize, k3: usize, k4: usize },
    /// `s` random terms of degree `≤ 2d`, at least one of degree exactly `2d`.
    III { n: usize, degree: u32, s: usize },
}

impl GenSpec {
    pub fn n(&self) -> usize {
        match *self {
            GenSpec::I { n, .. } | GenSpec::II { n, .. } | GenSpec::III { n, .. } => n,
        }
    }

    pub fn generate(&self, seed: u64) -> Result<Polynomial> {
        match self {
            GenSpec::I { .. } => gen_randpoly1(self, seed),
            GenSpec::II { .. } => gen_randpoly2(self, seed),
            GenSpec::III { .. } => gen_randpoly3(self, seed),
        }
    }
}

/// Uniform integer numerator `k ∈ [0, 2⁵³)` of a real in `[0, 1)`.
fn mantissa(rng: &mut ChaCha8Rng) -> i64 {
    (rng.gen::<u64>() >> (64 - MANTISSA)) as i64
}

fn over_mantissa(k: i64) -> BigRational {
    BigRational::new(BigInt::from(k), BigInt::from(1i64 << MANTISSA))
}

/// Uniform in `(0, 1]`.
pub fn unit_positive(rng: &mut ChaCha8Rng) -> BigRational {
    over_mantissa(mantissa(rng) + 1)
}

/// Uniform in `[−1, 1]` without zero.
pub fn unit_signed(rng: &mut ChaCha8Rng) -> BigRational {
    loop {
        let k = 2 * mantissa(rng) - (1i64 << MANTISSA);
        if k != 0 {
            return over_mantissa(k);
        }
    }
}

/// Uniform exponent with `|α| ≤ max_degree`.
pub fn uniform_exponent(rng: &mut ChaCha8Rng, n: usize, max_degree: u32) -> Exponent {
    // bars among n + D slots; the gaps are α and the slack
    let slots = n + max_degree as usize;
    let mut bars = sample(rng, slots, n).into_vec();
    bars.sort_unstable();
    let mut prev = 0usize;
    let mut out = Vec::with_capacity(n);
    for (i, &b) in bars.iter().enumerate() {
        out.push((b - prev - if i == 0 { 0 } else { 1 }) as u32);
        prev = b;
    }
    Exponent::new(out)
}

fn check_degree(degree: u32) -> Result<u32> {
    if degree == 0 || degree % 2 == 1 {
        return Err(Error::InvalidParameter(format!("degree must be even and positive, got {degree}")));
    }
    Ok(degree / 2)
}

fn draw<T>(what: &str, mut f: impl FnMut() -> Option<T>) -> Result<T> {
    for _ in 0..MAX_ATTEMPTS {
        if let Some(v) = f() {
            return Ok(v);
        }
    }
    Err(Error::Sampling(format!("no admissible {what} after {MAX_ATTEMPTS} attempts")))
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gen_randpoly1(spec: &GenSpec, seed: u64) -> Result<Polynomial> {
    let GenSpec::I { n, degree, s, min_nonzero, max_nonzero } = *spec else {
        return Err(Error::InvalidParameter("expected a family I spec".into()));
    };
    let d = check_degree(degree)?;
    if n == 0 || s < n + 2 {
        return Err(Error::InvalidParameter(format!("need s ≥ n + 2, got n = {n}, s = {s}")));
    }
    let lo = min_nonzero.unwrap_or(1).max(1);
    let hi = max_nonzero.unwrap_or(n).min(n);
    if lo > hi || lo as u32 > 2 * d - 1 {
        return Err(Error::Sampling(format!("no exponent of degree ≤ {} has between {lo} and {hi} nonzero entries in {n} variables", 2 * d - 1)));
    }
    let mut rng = rng_for(seed);
    let mut terms = vec![(Exponent::zeros(n), unit_positive(&mut rng))];
    for i in 0..n {
        terms.push((Exponent::unit(n, i, degree), unit_positive(&mut rng)));
    }
    let mut seen = BTreeSet::new();
    for _ in 0..s - n - 1 {
        let a = draw("exponent", || {
            let a = uniform_exponent(&mut rng, n, 2 * d - 1);
            let nz = a.nonzero_count();
            (nz >= lo && nz <= hi && !seen.contains(&a)).then_some(a)
        })?;
        seen.insert(a.clone());
        terms.push((a, unit_signed(&mut rng)));
    }
    Polynomial::from_terms(n, terms)
}

/// A family II draw with the pieces its postconditions refer to.
#[derive(Clone, Debug)]
pub struct Randpoly2 {
    pub f: Polynomial,
    /// Positive part built from the diagonal and even terms.
    pub g: Polynomial,
    /// Newton basis of `g`.
    pub g_basis: MonomialBasis,
    pub alphas: Vec<Exponent>,
    pub betas: Vec<Exponent>,
}

pub fn gen_randpoly2_detailed(spec: &GenSpec, seed: u64) -> Result<Randpoly2> {
    let GenSpec::II { n, degree, k1, k2, k3, k4 } = *spec else {
        return Err(Error::InvalidParameter("expected a family II spec".into()));
    };
    let d = check_degree(degree)?;
    if n == 0 || k1 > n {
        return Err(Error::InvalidParameter(format!("need k1 ≤ n, got n = {n}, k1 = {k1}")));
    }
    let mut rng = rng_for(seed);
    // variables outside A₁ are split between A₂ and A₃
    let mut power = vec![d; n];
    for i in sample(&mut rng, n, k1).into_iter() {
        power[i] = if rng.gen::<bool>() { d + 1 } else { d + 2 };
    }
    let mut g_terms: Vec<(Exponent, BigRational)> = Vec::new();
    let mut used = BTreeSet::new();
    for (i, &p) in power.iter().enumerate() {
        let e = Exponent::unit(n, i, 2 * p);
        used.insert(e.clone());
        g_terms.push((e, unit_positive(&mut rng)));
    }
    for _ in 0..k2 {
        let gamma = draw("even exponent", || {
            let h = uniform_exponent(&mut rng, n, d + 2);
            let gamma = h.scale(2);
            (h.degree() > d && !used.contains(&gamma)).then_some(gamma)
        })?;
        used.insert(gamma.clone());
        g_terms.push((gamma, unit_positive(&mut rng)));
    }
    let g = Polynomial::from_terms(n, g_terms.clone())?;
    let d_g = g.degree() / 2;
    let g_basis = newton_basis(&g)?;

    let mut f_terms = g_terms;
    let mut alphas = Vec::new();
    for _ in 0..k3 {
        let a = draw("exponent", || {
            let a = uniform_exponent(&mut rng, n, 2 * d);
            (!used.contains(&a)).then_some(a)
        })?;
        used.insert(a.clone());
        f_terms.push((a.clone(), unit_signed(&mut rng)));
        alphas.push(a);
    }
    let doubled: BTreeSet<Exponent> = g_basis.iter().map(|b| b.scale(2)).collect();
    let size = g_basis.len();
    let mut betas = Vec::new();
    for _ in 0..k4 {
        let b = draw("odd-pair exponent", || {
            let b = g_basis.get(rng.gen_range(0..size)).add(g_basis.get(rng.gen_range(0..size)));
            (b.degree() > 2 * d && !doubled.contains(&b) && !used.contains(&b)).then_some(b)
        })?;
        used.insert(b.clone());
        let c = if b.degree() == 2 * d_g { unit_positive(&mut rng) } else { unit_signed(&mut rng) };
        f_terms.push((b.clone(), c));
        betas.push(b);
    }
    Ok(Randpoly2 { f: Polynomial::from_terms(n, f_terms)?, g, g_basis, alphas, betas })
}

pub fn gen_randpoly2(spec: &GenSpec, seed: u64) -> Result<Polynomial> {
    gen_randpoly2_detailed(spec, seed).map(|r| r.f)
}

fn binomial(n: u64, k: u64) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

pub fn gen_randpoly3(spec: &GenSpec, seed: u64) -> Result<Polynomial> {
    let GenSpec::III { n, degree, s } = *spec else {
        return Err(Error::InvalidParameter("expected a family III spec".into()));
    };
    let d = check_degree(degree)?;
    if n == 0 || s == 0 {
        return Err(Error::InvalidParameter(format!("need n ≥ 1 and s ≥ 1, got n = {n}, s = {s}")));
    }
    if binomial((n as u64) + 2 * d as u64, n as u64) < s as u128 {
        return Err(Error::InvalidParameter(format!("fewer than {s} exponents of degree ≤ {degree} in {n} variables")));
    }
    let mut rng = rng_for(seed);
    let support = draw("support with a top-degree term", || {
        let mut seen = BTreeSet::new();
        while seen.len() < s {
            seen.insert(uniform_exponent(&mut rng, n, 2 * d));
        }
        seen.iter().any(|a| a.degree() == 2 * d).then_some(seen)
    })?;
    let terms: Vec<(Exponent, BigRational)> = support.into_iter().map(|a| (a, unit_signed(&mut rng))).collect();
    Polynomial::from_terms(n, terms)
}
