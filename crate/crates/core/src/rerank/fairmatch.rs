//! FairMatch: repeated flow rounds over the candidate graph. Items reach
//! users through capacities that favour low-visibility items; matched
//! items leave the graph, and each user's list is topped up from the
//! highest-scored unmatched candidates.

use std::collections::HashSet;

use super::flow::MinCostFlow;
use super::{positional, RerankConfig};
use crate::ranking::{RecommendationSet, Scored};

pub(super) fn rerank(initial: &RecommendationSet, config: &RerankConfig) -> Vec<Vec<Scored>> {
    let k = config.k;
    let n_users = initial.n_users();
    let n_items = initial.n_items();
    let lists = initial.lists();
    let mut matched: Vec<Vec<usize>> = vec![Vec::new(); n_users];
    let mut removed = vec![false; n_items];
    let per_round = k.div_ceil(config.iterations);

    for _ in 0..config.iterations {
        // visibility: how many remaining lists each item sits in
        let mut visibility = vec![0usize; n_items];
        for (u, list) in lists.iter().enumerate() {
            if matched[u].len() >= k.min(list.len()) {
                continue;
            }
            for s in list {
                if !removed[s.item as usize] {
                    visibility[s.item as usize] += 1;
                }
            }
        }
        let active: Vec<u32> = (0..n_items as u32).filter(|&i| visibility[i as usize] > 0).collect();
        if active.is_empty() {
            break;
        }
        let demand: usize = lists
            .iter()
            .enumerate()
            .map(|(u, l)| per_round.min(k.min(l.len()).saturating_sub(matched[u].len())))
            .sum();
        let mean_visibility = active.iter().map(|&i| visibility[i as usize]).sum::<usize>() as f64
            / active.len() as f64;
        let target = demand.div_ceil(active.len()).max(1) as f64;

        let source = 0;
        let sink = 1 + n_items + n_users;
        let mut graph = MinCostFlow::new(sink + 1);
        for &i in &active {
            let v = visibility[i as usize];
            let cap = ((target * mean_visibility / v as f64).round() as usize).clamp(1, v);
            graph.add_edge(source, 1 + i as usize, cap as i64, 0);
        }
        let mut arcs: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_users];
        for (u, list) in lists.iter().enumerate() {
            let remaining = k.min(list.len()).saturating_sub(matched[u].len());
            if remaining == 0 {
                continue;
            }
            graph.add_edge(1 + n_items + u, sink, per_round.min(remaining) as i64, 0);
            for (rank, s) in list.iter().enumerate() {
                if !removed[s.item as usize] {
                    let e = graph.add_edge(1 + s.item as usize, 1 + n_items + u, 1, rank as i64 + 1);
                    arcs[u].push((rank, e));
                }
            }
        }
        let (flow, _) = graph.solve(source, sink, demand as i64);
        if flow == 0 {
            break;
        }
        for (u, user_arcs) in arcs.iter().enumerate() {
            for &(rank, e) in user_arcs {
                if graph.flow(e) > 0 {
                    matched[u].push(rank);
                    removed[lists[u][rank].item as usize] = true;
                }
            }
        }
    }

    lists
        .iter()
        .zip(matched)
        .map(|(list, mut ranks)| {
            ranks.sort_unstable();
            let chosen: HashSet<usize> = ranks.iter().copied().collect();
            let fill = (0..list.len()).filter(|r| !chosen.contains(r));
            let order: Vec<u32> = ranks
                .iter()
                .copied()
                .chain(fill)
                .take(k)
                .map(|r| list[r].item)
                .collect();
            positional(order, k)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rerank::Method;

    #[test]
    fn spreads_a_shared_candidate_pool() {
        let lists: Vec<Vec<Scored>> = (0..4)
            .map(|_| (0..6u32).map(|i| Scored { item: i, score: 6.0 - i as f64 }).collect())
            .collect();
        let set = RecommendationSet::new(6, 6, lists).unwrap();
        let config = RerankConfig {
            iterations: 2,
            ..RerankConfig::new(Method::FAIRMATCH, 2)
        };
        let out = rerank(&set, &config);
        let distinct: HashSet<u32> = out.iter().flatten().map(|s| s.item).collect();
        assert!(distinct.len() > 2, "{out:?}");
        assert!(out.iter().all(|l| l.len() == 2));
    }
}
