use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::{standard_basis, Exponent, MonomialBasis, Polynomial};
use crate::error::{Error, Result};

/// Lattice points `α` with `2α ∈ conv(supp f)`.
///
/// Membership is decided by an exact rational feasibility LP per candidate in
/// `ℕⁿ_{deg/2}`. Boundary points are included.
pub fn newton_basis(f: &Polynomial) -> Result<MonomialBasis> {
    let points: Vec<Exponent> = f.support().cloned().collect();
    half_hull_points(f, points)
}

/// The basis used for SOS relaxations of `f − λ`: Newton basis of
/// `supp(f) ∪ {0}`.
pub fn relaxation_basis(f: &Polynomial) -> Result<MonomialBasis> {
    let mut points: Vec<Exponent> = f.support().cloned().collect();
    let zero = Exponent::zeros(f.n());
    if !points.contains(&zero) {
        points.push(zero);
    }
    half_hull_points(f, points)
}

fn half_hull_points(f: &Polynomial, points: Vec<Exponent>) -> Result<MonomialBasis> {
    if f.is_zero() {
        return Err(Error::EmptySupport);
    }
    if f.degree() % 2 == 1 {
        return Err(Error::OddDegree(f.degree()));
    }
    let candidates = standard_basis(f.n(), f.degree() / 2)?;
    let hull = Hull::new(&points);
    let keep: Vec<Exponent> = candidates.iter().filter(|a| hull.contains(&a.scale(2))).cloned().collect();
    MonomialBasis::new(f.n(), keep)
}

/// Whether `target ∈ conv(points)`.
pub fn in_convex_hull(points: &[Exponent], target: &Exponent) -> bool {
    Hull::new(points).contains(target)
}

struct Hull<'a> {
    points: &'a [Exponent],
    lo: Vec<u32>,
    hi: Vec<u32>,
}

impl<'a> Hull<'a> {
    fn new(points: &'a [Exponent]) -> Self {
        let n = points.first().map_or(0, Exponent::n);
        let mut lo = vec![u32::MAX; n];
        let mut hi = vec![0; n];
        for p in points {
            for (i, &a) in p.entries().iter().enumerate() {
                lo[i] = lo[i].min(a);
                hi[i] = hi[i].max(a);
            }
        }
        Hull { points, lo, hi }
    }

    fn contains(&self, t: &Exponent) -> bool {
        if self.points.is_empty() {
            return false;
        }
        let inside_box = t.entries().iter().enumerate().all(|(i, &a)| self.lo[i] <= a && a <= self.hi[i]);
        if !inside_box {
            return false;
        }
        if self.points.contains(t) {
            return true;
        }
        // Coordinates that are constant over all points are either satisfied
        // by the box test or impossible; drop them from the LP.
        let rows: Vec<usize> = (0..t.n()).filter(|&i| self.lo[i] != self.hi[i]).collect();
        let a: Vec<Vec<i64>> = rows
            .iter()
            .map(|&i| self.points.iter().map(|p| p.entries()[i] as i64).collect())
            .chain(std::iter::once(vec![1; self.points.len()]))
            .collect();
        let b: Vec<i64> = rows.iter().map(|&i| t.entries()[i] as i64).chain(std::iter::once(1)).collect();
        feasible_nonneg(&a, &b)
    }
}

/// Exact phase-one simplex: does `A λ = b, λ ≥ 0` have a solution? Requires
/// `b ≥ 0`. Bland's rule guarantees termination.
fn feasible_nonneg(a: &[Vec<i64>], b: &[i64]) -> bool {
    let m = a.len();
    let s = a.first().map_or(0, Vec::len);
    let cols = s + m;
    let q = |v: i64| BigRational::from_integer(v.into());
    let mut t: Vec<Vec<BigRational>> = (0..m)
        .map(|i| {
            let mut row: Vec<BigRational> = a[i].iter().map(|&v| q(v)).collect();
            row.extend((0..m).map(|k| q((k == i) as i64)));
            row.push(q(b[i]));
            row
        })
        .collect();
    let mut basis: Vec<usize> = (s..cols).collect();
    let mut cost: Vec<BigRational> = (0..=cols)
        .map(|j| {
            if j < s || j == cols {
                -t.iter().map(|row| row[j].clone()).fold(BigRational::zero(), |x, y| x + y)
            } else {
                BigRational::zero()
            }
        })
        .collect();

    loop {
        let Some(enter) = (0..cols).find(|&j| cost[j].is_negative()) else { break };
        let mut leave: Option<(usize, BigRational)> = None;
        for i in 0..m {
            if !t[i][enter].is_positive() {
                continue;
            }
            let ratio = &t[i][cols] / &t[i][enter];
            let better = match &leave {
                None => true,
                Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        let Some((r, _)) = leave else {
            // Unbounded direction cannot occur in phase one; the objective is
            // bounded below by zero.
            unreachable!("phase-one objective is bounded");
        };
        let piv = t[r][enter].clone();
        for v in t[r].iter_mut() {
            *v /= &piv;
        }
        let pivot_row = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i == r || row[enter].is_zero() {
                continue;
            }
            let factor = row[enter].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
        }
        if !cost[enter].is_zero() {
            let factor = cost[enter].clone();
            for (v, p) in cost.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
        }
        basis[r] = enter;
    }
    cost[cols].is_zero()
}
