use num_bigint::BigInt;
use num_rational::BigRational;

use super::IpProblem;
use crate::error::{Error, Result};

/// Largest group count accepted by [`brute_force_width`].
pub const BRUTE_FORCE_CAP: usize = 12;

/// All set partitions of `0..k` as restricted growth strings.
fn partitions(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; k];
    fn go(pos: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..=max + 1 {
            cur[pos] = v;
            go(pos + 1, max.max(v), cur, out);
        }
    }
    if k == 0 {
        return vec![Vec::new()];
    }
    go(1, 0, &mut cur, &mut out);
    out
}

/// Minimum width over every way of partitioning each component, keeping
/// only partitions that satisfy all cover rows.
pub fn brute_force_width(p: &IpProblem) -> Result<u64> {
    let g = p.num_groups();
    if g > BRUTE_FORCE_CAP {
        return Err(Error::BasisTooLarge { size: g as u128, cap: BRUTE_FORCE_CAP });
    }
    let comps: Vec<&Vec<usize>> = p.components().iter().collect();
    let choices: Vec<Vec<Vec<usize>>> = comps.iter().map(|c| partitions(c.len())).collect();
    let int = |v: u64| BigRational::from_integer(BigInt::from(v));
    let mut best: Option<u64> = None;
    let mut idx = vec![0usize; comps.len()];
    loop {
        let mut label = (0..g).map(|i| (usize::MAX, i)).collect::<Vec<_>>();
        for (c, members) in comps.iter().enumerate() {
            for (pos, &i) in members.iter().enumerate() {
                label[i] = (c, choices[c][idx[c]][pos]);
            }
        }
        let together = |i: usize, j: usize| i == j || label[i] == label[j];
        let feasible = p.rows().iter().all(|row| {
            let mut kept = int(row.diagonal);
            for &((i, j), k) in &row.pairs {
                if together(i, j) {
                    kept += int(2 * k);
                }
            }
            kept >= p.eps() * int(row.total())
        });
        if feasible {
            let width = (0..g).map(|i| (0..g).filter(|&j| together(i, j)).map(|j| p.sizes()[j]).sum::<u64>()).max().unwrap_or(0);
            best = Some(best.map_or(width, |b| b.min(width)));
        }
        // next combination
        let mut c = 0;
        loop {
            if c == comps.len() {
                return best.ok_or_else(|| Error::IpInfeasible("no partition satisfies the cover rows".into()));
            }
            idx[c] += 1;
            if idx[c] < choices[c].len() {
                break;
            }
            idx[c] = 0;
            c += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::partitions;

    #[test]
    fn bell_numbers() {
        let counts: Vec<usize> = (0..7).map(|k| partitions(k).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 5, 15, 52, 203]);
    }
}
