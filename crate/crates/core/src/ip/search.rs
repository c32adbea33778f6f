use std::time::Instant;

use super::{Budget, IpProblem, IpSolution, SolveStats, SolveStatus, TieBreak};
use crate::error::{Error, Result};

const UNSET: usize = usize::MAX;

#[derive(Clone, Copy)]
struct Block {
    weight: u64,
    comp: usize,
    count: u64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    /// Looking for any solution of width at most `cap`.
    Width,
    /// Enumerating width-`cap` solutions for the tie-break.
    Ties,
}

struct Search<'a> {
    p: &'a IpProblem,
    rule: TieBreak,
    order: Vec<usize>,
    comp_of: Vec<usize>,
    block_of: Vec<usize>,
    blocks: Vec<Block>,
    incid: Vec<Vec<(usize, usize, u64)>>,
    achieved: Vec<u64>,
    potential: Vec<u64>,
    comp_assigned: Vec<u64>,
    undecided: u64,
    merges: u64,
    at_cap: u64,
    cap: u64,
    phase: Phase,
    best: Option<(Vec<usize>, u64, u64)>,
    nodes: u64,
    budget: Budget,
    start: Instant,
    out_of_budget: bool,
}

impl<'a> Search<'a> {
    fn new(p: &'a IpProblem, rule: TieBreak, budget: Budget) -> Self {
        let g = p.num_groups();
        let mut comp_of = vec![UNSET; g];
        let mut order = Vec::new();
        let mut undecided = 0;
        for (c, members) in p.components().iter().enumerate().filter(|(_, m)| m.len() > 1) {
            for &i in members {
                comp_of[i] = c;
                order.push(i);
            }
            let k = members.len() as u64;
            undecided += k * (k - 1) / 2;
        }
        let mut incid = vec![Vec::new(); g];
        let mut potential = vec![0; p.rows().len()];
        for (r, row) in p.rows().iter().enumerate() {
            for &((i, j), k) in &row.pairs {
                incid[i].push((r, j, k));
                incid[j].push((r, i, k));
                potential[r] += k;
            }
        }
        Search {
            p,
            rule,
            order,
            comp_of,
            block_of: vec![UNSET; g],
            blocks: Vec::new(),
            incid,
            achieved: vec![0; p.rows().len()],
            potential,
            comp_assigned: vec![0; p.components().len()],
            undecided,
            merges: 0,
            at_cap: 0,
            cap: 0,
            phase: Phase::Width,
            best: None,
            nodes: 0,
            budget,
            start: Instant::now(),
            out_of_budget: false,
        }
    }

    fn assign(&mut self, g: usize, b: usize) -> bool {
        let size = self.p.sizes()[g];
        let c = self.comp_of[g];
        self.block_of[g] = b;
        let blk = &mut self.blocks[b];
        let was_cap = blk.weight == self.cap;
        blk.weight += size;
        self.merges += blk.count;
        blk.count += 1;
        if blk.weight == self.cap && !was_cap {
            self.at_cap += 1;
        }
        self.undecided -= self.comp_assigned[c];
        self.comp_assigned[c] += 1;
        let mut ok = true;
        for &(r, other, k) in &self.incid[g] {
            let ob = self.block_of[other];
            if ob != UNSET {
                self.potential[r] -= k;
                if ob == b {
                    self.achieved[r] += k;
                }
            }
        }
        for &(r, _, _) in &self.incid[g] {
            if self.achieved[r] + self.potential[r] < self.p.needs()[r] {
                ok = false;
                break;
            }
        }
        ok
    }

    fn unassign(&mut self, g: usize) {
        let b = self.block_of[g];
        let c = self.comp_of[g];
        for &(r, other, k) in &self.incid[g] {
            let ob = self.block_of[other];
            if ob != UNSET {
                self.potential[r] += k;
                if ob == b {
                    self.achieved[r] -= k;
                }
            }
        }
        self.comp_assigned[c] -= 1;
        self.undecided += self.comp_assigned[c];
        let blk = &mut self.blocks[b];
        if blk.weight == self.cap {
            self.at_cap -= 1;
        }
        blk.weight -= self.p.sizes()[g];
        blk.count -= 1;
        self.merges -= blk.count;
        self.block_of[g] = UNSET;
    }

    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if let Some(n) = self.budget.nodes {
            if self.nodes > n {
                self.out_of_budget = true;
            }
        }
        if self.nodes % 1024 == 0 {
            if let Some(t) = self.budget.time {
                if self.start.elapsed() > t {
                    self.out_of_budget = true;
                }
            }
        }
        !self.out_of_budget
    }

    /// Whether the partial assignment can still beat the incumbent under the
    /// tie-break.
    fn promising(&self) -> bool {
        if self.phase == Phase::Width {
            return true;
        }
        let Some((_, best_merges, best_cap)) = &self.best else { return true };
        match self.rule {
            TieBreak::FewestMerges => self.merges <= *best_merges,
            TieBreak::MostMerges => {
                self.at_cap < *best_cap || (self.at_cap == *best_cap && self.merges + self.undecided >= *best_merges)
            }
        }
    }

    fn better(&self, y: &[bool], merges: u64, at_cap: u64) -> bool {
        let Some((best_blocks, best_merges, best_cap)) = &self.best else { return true };
        let best_y = self.p.solution_from_blocks(best_blocks);
        match self.rule {
            TieBreak::FewestMerges => (merges, y) < (*best_merges, best_y.as_slice()),
            TieBreak::MostMerges => {
                (at_cap, std::cmp::Reverse(merges), std::cmp::Reverse(y)) < (*best_cap, std::cmp::Reverse(*best_merges), std::cmp::Reverse(best_y.as_slice()))
            }
        }
    }

    fn dfs(&mut self, pos: usize) -> bool {
        if !self.tick() {
            return true;
        }
        if pos == self.order.len() {
            if self.phase == Phase::Width {
                self.best = Some((self.labels(), self.merges, self.at_cap));
                return true;
            }
            let labels = self.labels();
            let y = self.p.solution_from_blocks(&labels);
            if self.better(&y, self.merges, self.at_cap) {
                self.best = Some((labels, self.merges, self.at_cap));
            }
            return false;
        }
        let g = self.order[pos];
        let c = self.comp_of[g];
        let size = self.p.sizes()[g];
        let existing: Vec<usize> = (0..self.blocks.len()).filter(|&b| self.blocks[b].comp == c && self.blocks[b].count > 0).collect();
        let mut options: Vec<usize> = Vec::with_capacity(existing.len() + 1);
        let fresh = self.blocks.len();
        match (self.phase, self.rule) {
            (Phase::Ties, TieBreak::MostMerges) => {
                options.extend(existing.iter().copied());
                options.push(fresh);
            }
            _ => {
                options.push(fresh);
                options.extend(existing.iter().copied());
            }
        }
        for b in options {
            if b == fresh {
                self.blocks.push(Block { weight: 0, comp: c, count: 0 });
            } else if self.blocks[b].weight + size > self.cap {
                continue;
            }
            let feasible = self.assign(g, b);
            let stop = feasible && self.promising() && self.dfs(pos + 1);
            self.unassign(g);
            if b == fresh {
                self.blocks.pop();
            }
            if stop || self.out_of_budget {
                return true;
            }
        }
        false
    }

    /// Block label per group, with unassigned groups in their own block.
    fn labels(&self) -> Vec<usize> {
        let base = self.blocks.len();
        self.block_of.iter().enumerate().map(|(i, &b)| if b == UNSET { base + i } else { b }).collect()
    }

    fn run(&mut self, phase: Phase, cap: u64) {
        self.phase = phase;
        self.cap = cap;
        self.blocks.clear();
        self.dfs(0);
    }
}

/// Minimizes the width by depth-first branch and bound over set partitions
/// of each component, then applies the tie-break among optimal solutions.
pub fn solve_ip(p: &IpProblem, rule: TieBreak, budget: Budget) -> Result<IpSolution> {
    let start = Instant::now();
    let mut s = Search::new(p, rule, budget);
    let floor = p.base_width().max(p.fixed_width());

    // merging each component completely is always feasible
    let mut full = vec![UNSET; p.num_groups()];
    for (c, members) in p.components().iter().enumerate() {
        for &i in members {
            full[i] = c;
        }
    }
    for (i, l) in full.iter_mut().enumerate() {
        if *l == UNSET {
            *l = p.components().len() + i;
        }
    }
    let full_y = p.solution_from_blocks(&full);
    let full_width = p.evaluate(&full_y).map_err(|e| Error::IpInfeasible(format!("complete merge rejected: {e}")))?;

    let mut omega = full_width;
    let mut incumbent = full;
    // shrink the cap until no solution exists
    while omega > floor && !s.out_of_budget {
        s.best = None;
        s.run(Phase::Width, omega - 1);
        match s.best.take() {
            Some((labels, _, _)) => {
                let y = p.solution_from_blocks(&labels);
                omega = p.width_of(&y).max(p.fixed_width());
                incumbent = labels;
            }
            None => break,
        }
    }
    if !s.out_of_budget {
        s.best = None;
        s.run(Phase::Ties, omega);
        if let Some((labels, _, _)) = s.best.take() {
            incumbent = labels;
        }
    }
    let y = p.solution_from_blocks(&incumbent);
    let omega = p.evaluate(&y)?;
    let status = if s.out_of_budget { SolveStatus::Timeout } else { SolveStatus::Optimal };
    Ok(IpSolution {
        omega,
        merged: p.merged_blocks(&y),
        y,
        stats: SolveStats { nodes: s.nodes, seconds: start.elapsed().as_secs_f64(), status },
    })
}
