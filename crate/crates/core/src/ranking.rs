//! Per-user ranked lists and their line format.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::IdMap;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scored {
    pub item: u32,
    pub score: f64,
}

/// One ranked list per user (indexed by internal user id), each at most
/// `k` long with non-increasing scores and no repeated items.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendationSet {
    k: usize,
    n_items: usize,
    lists: Vec<Vec<Scored>>,
}

impl RecommendationSet {
    pub fn new(k: usize, n_items: usize, lists: Vec<Vec<Scored>>) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("list length must be positive"));
        }
        for (user, list) in lists.iter().enumerate() {
            if list.len() > k {
                return Err(Error::invalid(format!(
                    "list of user {user} has {} items, more than {k}",
                    list.len()
                )));
            }
            let mut seen = HashSet::with_capacity(list.len());
            for s in list {
                if s.item as usize >= n_items {
                    return Err(Error::invalid(format!("item {} outside catalog", s.item)));
                }
                if !s.score.is_finite() {
                    return Err(Error::invalid(format!("non-finite score in list of user {user}")));
                }
                if !seen.insert(s.item) {
                    return Err(Error::invalid(format!("item {} repeated for user {user}", s.item)));
                }
            }
            if list.windows(2).any(|w| w[0].score < w[1].score) {
                return Err(Error::invalid(format!("scores increase in list of user {user}")));
            }
        }
        Ok(Self { k, n_items, lists })
    }

    /// Target list length.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn n_users(&self) -> usize {
        self.lists.len()
    }

    pub fn list(&self, user: u32) -> &[Scored] {
        &self.lists[user as usize]
    }

    pub fn lists(&self) -> &[Vec<Scored>] {
        &self.lists
    }

    /// Users whose list is shorter than `k`.
    pub fn shortened_users(&self) -> Vec<u32> {
        self.lists
            .iter()
            .enumerate()
            .filter(|(_, l)| l.len() < self.k)
            .map(|(u, _)| u as u32)
            .collect()
    }

    /// How many lists each item appears in.
    pub fn appearance_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.n_items];
        for s in self.lists.iter().flatten() {
            counts[s.item as usize] += 1;
        }
        counts
    }

    /// Keeps the first `k` entries of every list.
    pub fn truncate(&self, k: usize) -> Result<Self> {
        Self::new(
            k,
            self.n_items,
            self.lists.iter().map(|l| l.iter().take(k).copied().collect()).collect(),
        )
    }

    /// Writes `<user> <item> <rank> <score>` lines (rank is 1-based).
    pub fn write(&self, path: impl AsRef<Path>, users: &IdMap, items: &IdMap) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        for (user, list) in self.lists.iter().enumerate() {
            for (rank, s) in list.iter().enumerate() {
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}",
                    users.external(user as u32),
                    items.external(s.item),
                    rank + 1,
                    s.score
                )
                .map_err(|e| Error::io(path, e))?;
            }
        }
        out.flush().map_err(|e| Error::io(path, e))
    }

    /// Reads the line format back, resolving external ids through the
    /// given maps. `k` defaults to the longest list found.
    pub fn read(reader: impl Read, users: &IdMap, items: &IdMap, k: Option<usize>) -> Result<Self> {
        let user_lookup = users.lookup_table();
        let item_lookup = items.lookup_table();
        let mut rows: Vec<Vec<(usize, Scored)>> = vec![Vec::new(); users.len()];
        for (idx, line) in BufReader::new(reader).lines().enumerate() {
            let line_no = idx as u64 + 1;
            let line = line.map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            if fields.len() != 4 {
                return Err(parse_err(format!("expected 4 fields, found {}", fields.len())));
            }
            let user = *user_lookup
                .get(fields[0])
                .ok_or_else(|| parse_err(format!("unknown user {:?}", fields[0])))?;
            let item = *item_lookup
                .get(fields[1])
                .ok_or_else(|| parse_err(format!("unknown item {:?}", fields[1])))?;
            let rank: usize = fields[2]
                .parse()
                .map_err(|_| parse_err(format!("bad rank {:?}", fields[2])))?;
            let score: f64 = fields[3]
                .parse()
                .map_err(|_| parse_err(format!("bad score {:?}", fields[3])))?;
            rows[user as usize].push((rank, Scored { item, score }));
        }
        let lists: Vec<Vec<Scored>> = rows
            .into_iter()
            .map(|mut r| {
                r.sort_by_key(|(rank, _)| *rank);
                r.into_iter().map(|(_, s)| s).collect()
            })
            .collect();
        let k = k.unwrap_or_else(|| lists.iter().map(Vec::len).max().unwrap_or(0).max(1));
        Self::new(k, items.len(), lists)
    }
}

/// Sorts by score descending, ties by ascending item id.
pub(crate) fn sort_ranked(list: &mut [Scored]) {
    list.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.item.cmp(&b.item)));
}
