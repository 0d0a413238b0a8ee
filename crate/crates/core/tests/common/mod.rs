// Copyright 2026 The divsample Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Independent brute-force oracles over small databases. Itemsets are `u32`
//! masks (item `i` is bit `i`) and covers are plain `Vec<bool>`s, so nothing
//! here goes through the bitset or solver code under test.

#![allow(dead_code)]

use divsample_core::TransactionDatabase;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Toy {
    pub n_items: usize,
    /// `rows[t][i]` is item `i` in transaction `t`.
    pub rows: Vec<Vec<bool>>,
    pub theta: usize,
}

impl Toy {
    pub fn n_transactions(&self) -> usize {
        self.rows.len()
    }

    pub fn transactions(&self) -> Vec<Vec<usize>> {
        self.rows
            .iter()
            .map(|r| (0..self.n_items).filter(|&i| r[i]).collect())
            .collect()
    }

    pub fn database(&self) -> TransactionDatabase {
        TransactionDatabase::from_transactions(&self.transactions(), Some(self.n_items)).unwrap()
    }

    pub fn cover(&self, mask: u32) -> Vec<bool> {
        self.rows
            .iter()
            .map(|r| (0..self.n_items).all(|i| mask >> i & 1 == 0 || r[i]))
            .collect()
    }

    pub fn support(&self, mask: u32) -> usize {
        self.cover(mask).iter().filter(|&&b| b).count()
    }

    /// Support of every mask, indexed by mask.
    pub fn support_table(&self) -> Vec<usize> {
        let row_masks: Vec<u32> = self
            .rows
            .iter()
            .map(|r| (0..self.n_items).fold(0, |m, i| m | (u32::from(r[i])) << i))
            .collect();
        (0..1u32 << self.n_items)
            .map(|m| row_masks.iter().filter(|&&r| r & m == m).count())
            .collect()
    }

    pub fn is_closed(&self, mask: u32) -> bool {
        let s = self.support(mask);
        (0..self.n_items).all(|i| mask >> i & 1 == 1 || self.support(mask | 1 << i) < s)
    }

    /// Non-empty frequent itemsets.
    pub fn frequent(&self) -> Vec<u32> {
        let table = self.support_table();
        (1..1u32 << self.n_items)
            .filter(|&m| table[m as usize] >= self.theta)
            .collect()
    }

    pub fn closed_frequent(&self) -> Vec<u32> {
        let table = self.support_table();
        (1..1u32 << self.n_items)
            .filter(|&m| {
                let s = table[m as usize];
                s >= self.theta
                    && (0..self.n_items)
                        .all(|i| m >> i & 1 == 1 || table[(m | 1 << i) as usize] < s)
            })
            .collect()
    }

    /// Closed frequent itemsets in the order a depth-first search that
    /// branches on the lowest item, trying 1 first, reaches them.
    pub fn closed_frequent_search_order(&self) -> Vec<u32> {
        let mut v = self.closed_frequent();
        let n = self.n_items;
        v.sort_by_key(|&m| std::cmp::Reverse(reverse_bits(m, n)));
        v
    }

    /// Greedy diverse selection: walk candidates in search order, keep a
    /// pattern when its bound against every kept cover is at most `jmax`.
    pub fn greedy_diverse(&self, jmax: f64) -> Vec<u32> {
        let mut kept: Vec<(u32, Vec<bool>)> = Vec::new();
        for m in self.closed_frequent_search_order() {
            let c = self.cover(m);
            if kept.iter().all(|(_, h)| lb(&c, h, self.theta) <= jmax) {
                kept.push((m, c));
            }
        }
        kept.into_iter().map(|(m, _)| m).collect()
    }
}

pub fn reverse_bits(m: u32, n: usize) -> u32 {
    (0..n).fold(0, |acc, i| acc | ((m >> i) & 1) << (n - 1 - i))
}

pub fn mask_of(items: &[usize]) -> u32 {
    items.iter().fold(0, |m, &i| m | 1 << i)
}

pub fn count(v: &[bool]) -> usize {
    v.iter().filter(|&&b| b).count()
}

/// `max(0, θ − |p∖h|) / (|h| + |p∖h|)`.
pub fn lb(p: &[bool], h: &[bool], theta: usize) -> f64 {
    let diff = p.iter().zip(h).filter(|(a, b)| **a && !**b).count();
    let hs = count(h);
    let num = theta as f64 - diff as f64;
    if num <= 0.0 {
        0.0
    } else {
        num / (hs + diff) as f64
    }
}

pub fn jaccard(a: &[bool], b: &[bool]) -> f64 {
    let inter = a.iter().zip(b).filter(|(x, y)| **x && **y).count();
    let union = a.iter().zip(b).filter(|(x, y)| **x || **y).count();
    inter as f64 / union as f64
}

/// Random database with at most 12 items and 16 transactions.
pub fn random_toy(seed: u64) -> Toy {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_items: usize = rng.random_range(1..=12);
    let n_t: usize = rng.random_range(1..=16);
    let density = rng.random_range(0.2..0.8);
    let rows = (0..n_t)
        .map(|_| (0..n_items).map(|_| rng.random_bool(density)).collect())
        .collect();
    let theta = rng.random_range(1..=n_t.div_ceil(2));
    Toy {
        n_items,
        rows,
        theta,
    }
}

/// `rows[t] = I ∖ {t}` plus one full row, with an extra item in every row
/// when `anchor` is set: every non-empty itemset of the first `n` items is
/// closed (with the anchor appended).
pub fn all_closed_toy(n: usize, anchor: bool) -> Toy {
    let width = n + usize::from(anchor);
    let mut rows: Vec<Vec<bool>> = (0..n)
        .map(|t| (0..width).map(|i| i != t).collect())
        .collect();
    rows.push(vec![true; width]);
    Toy {
        n_items: width,
        rows,
        theta: 1,
    }
}
