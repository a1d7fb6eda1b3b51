#![allow(dead_code)]

use std::collections::HashSet;

use multibias::bias::ItemSegmentation;
use multibias::data::{Entry, IdMap, Interactions};
use multibias::ranking::{RecommendationSet, Scored};
use multibias::rerank::{
    exhaustive_assignment, minimum_protected, rerank, solve_assignment, Method, RerankConfig,
    RerankContext, TargetExposure,
};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A small random reranking problem.
pub struct Instance {
    pub initial: RecommendationSet,
    pub segmentation: ItemSegmentation,
    pub train: Interactions,
    pub k: usize,
    pub target: TargetExposure,
    pub significance: f64,
}

impl Instance {
    pub fn candidates(&self) -> Vec<Vec<u32>> {
        self.initial
            .lists()
            .iter()
            .map(|l| l.iter().map(|s| s.item).collect())
            .collect()
    }

    pub fn context(&self) -> RerankContext<'_> {
        RerankContext {
            segmentation: &self.segmentation,
            train: &self.train,
        }
    }
}

/// Up to 4 users, lists of at most 5 candidates, both item groups present.
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_items = rng.random_range(6..=12);
    let n_users = rng.random_range(1..=4);
    let n = rng.random_range(2..=5);
    let k = rng.random_range(1..=n);
    let lists = (0..n_users)
        .map(|_| {
            let len = if rng.random_bool(0.15) { rng.random_range(1..=n) } else { n };
            let mut scores: Vec<f64> = (0..len).map(|_| rng.random::<f64>()).collect();
            scores.sort_by(|a, b| b.total_cmp(a));
            index::sample(&mut rng, n_items, len)
                .into_iter()
                .zip(scores)
                .map(|(item, score)| Scored {
                    item: item as u32,
                    score,
                })
                .collect()
        })
        .collect();
    let n_head = rng.random_range(1..n_items);
    let head: Vec<u32> = index::sample(&mut rng, n_items, n_head)
        .into_iter()
        .map(|i| i as u32)
        .collect();
    let mut entries = Vec::new();
    for user in 0..n_users as u32 {
        let rated = rng.random_range(0..=4);
        for item in index::sample(&mut rng, n_items, rated) {
            entries.push(Entry {
                user,
                item: item as u32,
                value: rng.random_range(1..=5) as f64,
            });
        }
    }
    let train = Interactions::new(
        IdMap::sequential("u", n_users),
        IdMap::sequential("i", n_items),
        entries,
    )
    .unwrap();
    let target = if rng.random_bool(0.5) {
        TargetExposure::Uniform
    } else {
        TargetExposure::Fixed(rng.random_range(1..=3))
    };
    Instance {
        initial: RecommendationSet::new(n, n_items, lists).unwrap(),
        segmentation: ItemSegmentation::from_head(n_items, &head, 0.5),
        train,
        k,
        target,
        significance: rng.random_range(0.02..0.3),
    }
}

/// `P(X <= t)` for `X ~ Binomial(k, p)` by direct summation.
pub fn brute_binomial_cdf(t: usize, k: usize, p: f64) -> f64 {
    let mut total = 0.0;
    for j in 0..=t.min(k) {
        let mut choose = 1.0;
        for x in 0..j {
            choose *= (k - x) as f64 / (x + 1) as f64;
        }
        total += choose * p.powi(j as i32) * (1.0 - p).powi((k - j) as i32);
    }
    total
}

/// Smallest `t` whose binomial CDF exceeds the significance level.
pub fn brute_m_min(k: usize, p: f64, significance: f64) -> usize {
    (0..=k)
        .find(|&t| brute_binomial_cdf(t, k, p) > significance)
        .unwrap_or(k)
}

/// Checks every reranker contract on one instance.
pub fn check_instance(inst: &Instance) -> Result<(), String> {
    let candidates = inst.candidates();
    for method in Method::ALL {
        let config = RerankConfig {
            target_exposure: inst.target,
            significance: inst.significance,
            seed: 11,
            ..RerankConfig::new(method, inst.k)
        };
        let out = rerank(&inst.initial, &config, inst.context()).map_err(|e| format!("{method}: {e}"))?;
        for (u, list) in out.recs.lists().iter().enumerate() {
            let pool: HashSet<u32> = candidates[u].iter().copied().collect();
            let chosen: HashSet<u32> = list.iter().map(|s| s.item).collect();
            if list.len() != inst.k.min(pool.len()) || chosen.len() != list.len() {
                return Err(format!("{method}: user {u} got {} items", list.len()));
            }
            if !chosen.is_subset(&pool) {
                return Err(format!("{method}: user {u} got an item outside its list"));
            }
        }
        if method == Method::FASTAR {
            let p = inst.segmentation.tail_share();
            let table = minimum_protected(inst.k, p, inst.significance);
            for (u, list) in out.recs.lists().iter().enumerate() {
                if out.flagged_users.contains(&(u as u32)) {
                    continue;
                }
                let mut protected = 0;
                for (pos, s) in list.iter().enumerate() {
                    protected += inst.segmentation.is_tail(s.item) as usize;
                    if protected < table[pos + 1] {
                        return Err(format!("FA*IR: user {u} prefix {} has {protected} protected", pos + 1));
                    }
                }
            }
        }
    }

    let top_k = rerank(
        &inst.initial,
        &RerankConfig {
            lambda: 0.0,
            ..RerankConfig::new(Method::XQUAD, inst.k)
        },
        inst.context(),
    )
    .map_err(|e| e.to_string())?;
    for (u, list) in top_k.recs.lists().iter().enumerate() {
        let got: Vec<u32> = list.iter().map(|s| s.item).collect();
        let want: Vec<u32> = candidates[u].iter().take(inst.k).copied().collect();
        if got != want {
            return Err(format!("xQuAD(0): user {u} got {got:?}, top-K is {want:?}"));
        }
    }

    let flow = solve_assignment(&candidates, inst.initial.n_items(), inst.k, inst.target);
    let best = exhaustive_assignment(&candidates, inst.initial.n_items(), inst.k, inst.target);
    if flow.cost != best {
        return Err(format!("DM: flow cost {} but exhaustive optimum {best}", flow.cost));
    }
    Ok(())
}
