//! 0/1 integer programs that decide which groups of parity classes to merge.
//!
//! Groups carry weights (the number of basis elements they hold). Merging is
//! only possible inside fixed components. Every cover row demands that a
//! fraction `ε` of its weighted pairs ends up inside merged blocks, and the
//! objective is the heaviest resulting block.

mod brute;
mod lp;
mod search;

use std::fmt;
use std::time::Duration;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

pub use brute::{brute_force_width, BRUTE_FORCE_CAP};
pub use lp::{export_lp, lp_string, solve_external, MILP_SOLVER_ENV};
pub use search::solve_ip;

use crate::error::{Error, Result};
use crate::graph::{BlockPartition, UnionFind};

/// One cover requirement over the pair counts of an exponent:
/// `Σ_i K_ii + 2 Σ_{i<j} K_ij y_ij ≥ ε (Σ_i K_ii + 2 Σ_{i<j} K_ij)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverRow {
    /// Pairs already inside a group.
    pub diagonal: u64,
    /// `K_ij` for `i < j`, nonzero entries only.
    pub pairs: Vec<((usize, usize), u64)>,
}

impl CoverRow {
    /// `Σ_{ij} K_ij` over the full symmetric matrix.
    pub fn total(&self) -> u64 {
        self.diagonal + 2 * self.pairs.iter().map(|&(_, k)| k).sum::<u64>()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        })
    }
}

/// A linear constraint over the pair variables and the width variable.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearConstraint {
    pub name: String,
    /// Variable id to coefficient, zero coefficients omitted. Ids below
    /// [`IpProblem::num_vars`] are pair variables; the id `num_vars` is the
    /// width.
    pub coeffs: Vec<(usize, BigRational)>,
    pub sense: Sense,
    pub rhs: BigRational,
}

/// Rule for choosing among width-optimal solutions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    /// Fewest merged pairs, then the lexicographically smallest `y`.
    #[default]
    FewestMerges,
    /// Fewest blocks of maximal weight, then the most merged pairs, then the
    /// lexicographically largest `y`.
    MostMerges,
}

impl std::str::FromStr for TieBreak {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fewest-merges" => Ok(TieBreak::FewestMerges),
            "most-merges" => Ok(TieBreak::MostMerges),
            _ => Err(Error::InvalidParameter(format!("unknown tie-break rule '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Optimal,
    /// Budget exhausted; the incumbent is feasible but not proven optimal.
    Timeout,
    Infeasible,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveStats {
    pub nodes: u64,
    pub seconds: f64,
    pub status: SolveStatus,
}

#[derive(Clone, Debug, Serialize)]
pub struct IpSolution {
    pub omega: u64,
    /// One value per entry of [`IpProblem::vars`].
    pub y: Vec<bool>,
    /// Blocks of groups induced by `y`.
    pub merged: BlockPartition,
    pub stats: SolveStats,
}

/// The merge problem for one parity type.
#[derive(Clone, Debug, Serialize)]
pub struct IpProblem {
    sizes: Vec<u64>,
    components: Vec<Vec<usize>>,
    rows: Vec<CoverRow>,
    #[serde(serialize_with = "ser_rational")]
    eps: BigRational,
    vars: Vec<(usize, usize)>,
    needs: Vec<u64>,
}

fn ser_rational<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&crate::poly::format_rational(r))
}

impl IpProblem {
    /// `sizes[i]` is the weight of group `i`; `components` lists disjoint
    /// sets of groups inside which merging is allowed.
    pub fn new(sizes: Vec<u64>, components: Vec<Vec<usize>>, rows: Vec<CoverRow>, eps: BigRational) -> Result<Self> {
        if !(eps.is_positive() && eps < BigRational::one()) {
            return Err(Error::InvalidParameter(format!("eps must lie in (0, 1), got {}", crate::poly::format_rational(&eps))));
        }
        let g = sizes.len();
        let mut comp_of = vec![usize::MAX; g];
        let mut components: Vec<Vec<usize>> = components
            .into_iter()
            .map(|mut c| {
                c.sort_unstable();
                c.dedup();
                c
            })
            .filter(|c| !c.is_empty())
            .collect();
        components.sort();
        for (ci, c) in components.iter().enumerate() {
            for &i in c {
                if i >= g || comp_of[i] != usize::MAX {
                    return Err(Error::Structure(format!("group {i} out of range or in two components")));
                }
                comp_of[i] = ci;
            }
        }
        for row in &rows {
            for &((i, j), k) in &row.pairs {
                if i >= j || j >= g || k == 0 || comp_of[i] == usize::MAX || comp_of[i] != comp_of[j] {
                    return Err(Error::Structure(format!("cover pair ({i}, {j}) is not a variable")));
                }
            }
        }
        let mut vars = Vec::new();
        for c in &components {
            for (a, &i) in c.iter().enumerate() {
                for &j in &c[a + 1..] {
                    vars.push((i, j));
                }
            }
        }
        vars.sort_unstable();
        let needs = rows.iter().map(|r| pair_need(r, &eps)).collect();
        Ok(Self { sizes, components, rows, eps, vars, needs })
    }

    pub fn num_groups(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }

    pub fn rows(&self) -> &[CoverRow] {
        &self.rows
    }

    pub fn eps(&self) -> &BigRational {
        &self.eps
    }

    /// Pair variables `(i, j)`, `i < j`, in lexicographic order.
    pub fn vars(&self) -> &[(usize, usize)] {
        &self.vars
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, i: usize, j: usize) -> Option<usize> {
        let key = if i < j { (i, j) } else { (j, i) };
        self.vars.binary_search(&key).ok()
    }

    /// Minimum of `Σ_{i<j} K_ij y_ij` each row must reach.
    pub fn needs(&self) -> &[u64] {
        &self.needs
    }

    /// Width when nothing is merged.
    pub fn base_width(&self) -> u64 {
        self.sizes.iter().copied().max().unwrap_or(0)
    }

    /// Whether every row already holds with `y = 0`.
    pub fn trivially_satisfied(&self) -> bool {
        self.needs.iter().all(|&n| n == 0)
    }

    /// All constraints in the order triangles, widths, covers.
    pub fn constraints(&self) -> Vec<LinearConstraint> {
        let one = BigRational::one();
        let int = |v: u64| BigRational::from_integer(BigInt::from(v));
        let w = self.num_vars();
        let mut out = Vec::new();
        for c in &self.components {
            for (a, &i) in c.iter().enumerate() {
                for (b, &j) in c.iter().enumerate().skip(a + 1) {
                    for &k in &c[b + 1..] {
                        let (ij, ik, jk) = (self.var_index(i, j).unwrap(), self.var_index(i, k).unwrap(), self.var_index(j, k).unwrap());
                        for (t, (pos, neg)) in [((ik, jk), ij), ((ij, jk), ik), ((ij, ik), jk)].into_iter().enumerate() {
                            let mut coeffs = vec![(pos.0, one.clone()), (pos.1, one.clone()), (neg, -one.clone())];
                            coeffs.sort_by_key(|&(v, _)| v);
                            out.push(LinearConstraint { name: format!("tri_{i}_{j}_{k}_{t}"), coeffs, sense: Sense::Le, rhs: one.clone() });
                        }
                    }
                }
            }
        }
        for c in self.components.iter().filter(|c| c.len() > 1) {
            for &i in c {
                let mut coeffs: Vec<(usize, BigRational)> = c.iter().filter(|&&k| k != i && self.sizes[k] > 0).map(|&k| (self.var_index(i, k).unwrap(), int(self.sizes[k]))).collect();
                coeffs.push((w, -one.clone()));
                out.push(LinearConstraint { name: format!("width_{i}"), coeffs, sense: Sense::Le, rhs: -int(self.sizes[i]) });
            }
        }
        for (r, row) in self.rows.iter().enumerate() {
            if row.pairs.is_empty() {
                continue;
            }
            let coeffs = row.pairs.iter().map(|&((i, j), k)| (self.var_index(i, j).unwrap(), int(k))).collect();
            let rhs = (&self.eps * int(row.total()) - int(row.diagonal)) / int(2);
            out.push(LinearConstraint { name: format!("cover_{r}"), coeffs, sense: Sense::Ge, rhs });
        }
        out
    }

    /// Lower bound on the width from groups outside any nontrivial
    /// component.
    pub fn fixed_width(&self) -> u64 {
        let mut free = vec![true; self.sizes.len()];
        for c in self.components.iter().filter(|c| c.len() > 1) {
            for &i in c {
                free[i] = false;
            }
        }
        self.sizes.iter().zip(&free).filter(|(_, &f)| f).map(|(&s, _)| s).max().unwrap_or(0)
    }

    /// Checks `y` against every constraint in exact arithmetic and returns
    /// the width it induces.
    pub fn evaluate(&self, y: &[bool]) -> Result<u64> {
        if y.len() != self.num_vars() {
            return Err(Error::DimensionMismatch { expected: self.num_vars(), found: y.len() });
        }
        let width = self.width_of(y);
        let mut values: Vec<BigRational> = y.iter().map(|&b| if b { BigRational::one() } else { BigRational::zero() }).collect();
        values.push(BigRational::from_integer(BigInt::from(width)));
        for c in self.constraints() {
            let lhs: BigRational = c.coeffs.iter().map(|(v, a)| a * &values[*v]).sum();
            let ok = match c.sense {
                Sense::Le => lhs <= c.rhs,
                Sense::Ge => lhs >= c.rhs,
                Sense::Eq => lhs == c.rhs,
            };
            if !ok {
                return Err(Error::IpInfeasible(format!("constraint {} violated", c.name)));
            }
        }
        Ok(width)
    }

    /// Largest `Σ_k |I_k| y_ik` over all groups, counting `y_ii = 1`.
    pub fn width_of(&self, y: &[bool]) -> u64 {
        let mut load = self.sizes.clone();
        for (v, &(i, j)) in self.vars.iter().enumerate() {
            if y[v] {
                load[i] += self.sizes[j];
                load[j] += self.sizes[i];
            }
        }
        load.into_iter().max().unwrap_or(0)
    }

    /// Blocks of groups from the merge graph of `y`.
    pub fn merged_blocks(&self, y: &[bool]) -> BlockPartition {
        let mut uf = UnionFind::new(self.num_groups());
        for (v, &(i, j)) in self.vars.iter().enumerate() {
            if y[v] {
                uf.union(i, j);
            }
        }
        uf.into_partition()
    }

    pub(crate) fn solution_from_blocks(&self, block_of: &[usize]) -> Vec<bool> {
        self.vars.iter().map(|&(i, j)| block_of[i] == block_of[j]).collect()
    }
}

/// `⌈(ε Σ K − Σ K_ii) / 2⌉`, clamped at zero.
fn pair_need(row: &CoverRow, eps: &BigRational) -> u64 {
    let int = |v: u64| BigRational::from_integer(BigInt::from(v));
    let need = (eps * int(row.total()) - int(row.diagonal)) / int(2);
    if !need.is_positive() {
        return 0;
    }
    let (q, r) = need.numer().div_rem(need.denom());
    let q = if r.is_zero() { q } else { q + 1 };
    q.to_u64().expect("pair counts fit in u64")
}

/// Time and node limits for one solve.
#[derive(Clone, Copy, Debug)]
pub struct Budget {
    pub time: Option<Duration>,
    pub nodes: Option<u64>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { time: Some(Duration::from_secs(60)), nodes: None }
    }
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget { time: None, nodes: None }
    }
}
