//! Discrepancy minimisation as a min-cost flow on the user/candidate
//! bipartite graph. Every user receives K of their candidates, every item
//! has a target degree, and an edge costs the item's 1-based rank in the
//! user's list. Each item also has an overflow arc whose unit cost exceeds
//! any achievable rank total, so the solver exceeds targets only when it
//! has to.

use super::flow::MinCostFlow;
use super::{RerankConfig, TargetExposure};
use crate::error::Result;
use crate::ranking::{RecommendationSet, Scored};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    /// Chosen positions in each user's candidate list, ascending.
    pub positions: Vec<Vec<usize>>,
    /// Rank costs plus overflow penalties.
    pub cost: i64,
    pub overflow_units: usize,
}

struct Problem {
    demand: Vec<usize>,
    capacity: i64,
    penalty: i64,
    /// candidate item -> dense index
    dense: Vec<Option<usize>>,
    n_candidates: usize,
}

fn problem(candidates: &[Vec<u32>], n_items: usize, k: usize, target: TargetExposure) -> Problem {
    let mut dense = vec![None; n_items];
    let mut n_candidates = 0;
    for &item in candidates.iter().flatten() {
        if dense[item as usize].is_none() {
            dense[item as usize] = Some(n_candidates);
            n_candidates += 1;
        }
    }
    let demand: Vec<usize> = candidates.iter().map(|c| c.len().min(k)).collect();
    let total: usize = demand.iter().sum();
    let capacity = match target {
        TargetExposure::Uniform => total.div_ceil(n_candidates.max(1)),
        TargetExposure::Fixed(t) => t,
    } as i64;
    let longest = candidates.iter().map(Vec::len).max().unwrap_or(0);
    Problem {
        demand,
        capacity,
        penalty: (total * longest) as i64 + 1,
        dense,
        n_candidates,
    }
}

/// Solves the assignment for candidate lists given in rank order.
pub fn solve_assignment(
    candidates: &[Vec<u32>],
    n_items: usize,
    k: usize,
    target: TargetExposure,
) -> Assignment {
    let p = problem(candidates, n_items, k, target);
    let n_users = candidates.len();
    let source = 0;
    let sink = 1 + n_users + p.n_candidates;
    let item_node = |d: usize| 1 + n_users + d;
    let mut graph = MinCostFlow::new(sink + 1);
    for (u, &d) in p.demand.iter().enumerate() {
        graph.add_edge(source, 1 + u, d as i64, 0);
    }
    let mut arcs = Vec::with_capacity(n_users);
    for (u, list) in candidates.iter().enumerate() {
        let ids: Vec<usize> = list
            .iter()
            .enumerate()
            .map(|(rank, &item)| {
                let d = p.dense[item as usize].expect("candidate indexed");
                graph.add_edge(1 + u, item_node(d), 1, rank as i64 + 1)
            })
            .collect();
        arcs.push(ids);
    }
    let mut overflow_arcs = Vec::with_capacity(p.n_candidates);
    for d in 0..p.n_candidates {
        graph.add_edge(item_node(d), sink, p.capacity, 0);
        overflow_arcs.push(graph.add_edge(item_node(d), sink, n_users as i64, p.penalty));
    }
    let demand: i64 = p.demand.iter().sum::<usize>() as i64;
    let (flow, cost) = graph.solve(source, sink, demand);
    debug_assert_eq!(flow, demand, "overflow arcs make every demand feasible");
    let positions = arcs
        .iter()
        .map(|ids| (0..ids.len()).filter(|&pos| graph.flow(ids[pos]) > 0).collect())
        .collect();
    let overflow_units = overflow_arcs.iter().map(|&e| graph.flow(e) as usize).sum();
    Assignment {
        positions,
        cost,
        overflow_units,
    }
}

/// Brute force over every choice of K candidates per user, for checking
/// [`solve_assignment`] on tiny instances.
pub fn exhaustive_assignment(
    candidates: &[Vec<u32>],
    n_items: usize,
    k: usize,
    target: TargetExposure,
) -> i64 {
    let p = problem(candidates, n_items, k, target);
    let choices: Vec<Vec<Vec<usize>>> = candidates
        .iter()
        .zip(&p.demand)
        .map(|(list, &d)| subsets(list.len(), d))
        .collect();
    let mut load = vec![0i64; p.n_candidates];
    let mut best = i64::MAX;
    search(candidates, &choices, &p, 0, 0, &mut load, &mut best);
    best
}

fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|mask| mask.count_ones() as usize == r)
        .map(|mask| (0..n).filter(|&i| mask >> i & 1 == 1).collect())
        .collect()
}

fn search(
    candidates: &[Vec<u32>],
    choices: &[Vec<Vec<usize>>],
    p: &Problem,
    user: usize,
    rank_cost: i64,
    load: &mut Vec<i64>,
    best: &mut i64,
) {
    if user == candidates.len() {
        let overflow: i64 = load.iter().map(|&l| (l - p.capacity).max(0)).sum();
        *best = (*best).min(rank_cost + overflow * p.penalty);
        return;
    }
    for choice in &choices[user] {
        let mut cost = rank_cost;
        for &pos in choice {
            load[p.dense[candidates[user][pos] as usize].unwrap()] += 1;
            cost += pos as i64 + 1;
        }
        search(candidates, choices, p, user + 1, cost, load, best);
        for &pos in choice {
            load[p.dense[candidates[user][pos] as usize].unwrap()] -= 1;
        }
    }
}

pub(super) fn rerank(
    initial: &RecommendationSet,
    config: &RerankConfig,
) -> Result<(Vec<Vec<Scored>>, usize)> {
    let candidates: Vec<Vec<u32>> = initial
        .lists()
        .iter()
        .map(|l| l.iter().map(|s| s.item).collect())
        .collect();
    let assignment = solve_assignment(&candidates, initial.n_items(), config.k, config.target_exposure);
    if assignment.overflow_units > 0 {
        log::info!("DM used {} overflow assignments", assignment.overflow_units);
    }
    let lists = initial
        .lists()
        .iter()
        .zip(assignment.positions)
        .map(|(list, positions)| super::keep_positions(list, positions))
        .collect();
    Ok((lists, assignment.overflow_units))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_users_get_distinct_items() {
        let candidates = vec![vec![0, 1, 2], vec![0, 1, 2]];
        let a = solve_assignment(&candidates, 3, 1, TargetExposure::Uniform);
        // capacity ceil(2/3) = 1: user 0 takes item 0, user 1 item 1
        assert_eq!(a.positions, vec![vec![0], vec![1]]);
        assert_eq!(a.cost, 3);
        assert_eq!(a.overflow_units, 0);
        assert_eq!(exhaustive_assignment(&candidates, 3, 1, TargetExposure::Uniform), 3);
    }

    #[test]
    fn tight_capacity_falls_back_to_overflow() {
        let candidates = vec![vec![0], vec![0]];
        let a = solve_assignment(&candidates, 1, 1, TargetExposure::Fixed(1));
        assert_eq!(a.overflow_units, 1);
        assert_eq!(a.positions, vec![vec![0], vec![0]]);
        assert_eq!(a.cost, exhaustive_assignment(&candidates, 1, 1, TargetExposure::Fixed(1)));
    }
}
