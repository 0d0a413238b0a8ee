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

//! Transaction databases, covers and patterns.
//!
//! A [`TransactionDatabase`] keeps both the horizontal layout (one item
//! bit-vector per transaction) and the vertical one (one cover bit-vector per
//! item). Everything downstream works on covers, so the vertical index is the
//! one that matters for speed.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Deref;

use crate::bitset::BitSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DataError {
    #[error("line {line}: invalid item id {token:?}")]
    Parse { line: usize, token: String },
    #[error("no transactions")]
    NoTransactions,
    #[error("item {item} out of range (database has {n_items} items)")]
    ItemOutOfRange { item: usize, n_items: usize },
    #[error("itemset has an empty cover")]
    EmptyCover,
}

/// Strictly increasing sequence of item ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Itemset(Vec<usize>);

impl Itemset {
    /// Sorts and deduplicates `items`.
    pub fn new(mut items: Vec<usize>) -> Self {
        items.sort_unstable();
        items.dedup();
        Itemset(items)
    }

    pub fn empty() -> Self {
        Itemset(Vec::new())
    }

    pub fn items(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, item: usize) -> bool {
        self.0.binary_search(&item).is_ok()
    }

    pub fn is_subset(&self, other: &Itemset) -> bool {
        // both sides sorted: linear merge
        let mut it = other.0.iter();
        'outer: for a in &self.0 {
            for b in it.by_ref() {
                if b == a {
                    continue 'outer;
                }
                if b > a {
                    return false;
                }
            }
            return false;
        }
        true
    }

    pub fn with(&self, item: usize) -> Itemset {
        let mut items = self.0.clone();
        if let Err(pos) = items.binary_search(&item) {
            items.insert(pos, item);
        }
        Itemset(items)
    }

    pub fn union(&self, other: &Itemset) -> Itemset {
        let mut items = self.0.clone();
        items.extend_from_slice(&other.0);
        Itemset::new(items)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }
}

impl From<&[usize]> for Itemset {
    fn from(items: &[usize]) -> Self {
        Itemset::new(items.to_vec())
    }
}

impl<const N: usize> From<[usize; N]> for Itemset {
    fn from(items: [usize; N]) -> Self {
        Itemset::new(items.to_vec())
    }
}

impl fmt::Display for Itemset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, item) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{item}")?;
        }
        Ok(())
    }
}

/// Transaction-index bit-vector of width `n_transactions`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cover(BitSet);

impl Cover {
    pub fn new(bits: BitSet) -> Self {
        Cover(bits)
    }

    pub fn support(&self) -> usize {
        self.0.count()
    }

    pub fn bits(&self) -> &BitSet {
        &self.0
    }

    pub fn into_bits(self) -> BitSet {
        self.0
    }
}

impl Deref for Cover {
    type Target = BitSet;

    fn deref(&self) -> &BitSet {
        &self.0
    }
}

/// An itemset together with its cached cover.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Pattern {
    pub itemset: Itemset,
    pub cover: Cover,
    pub support: usize,
}

impl Pattern {
    pub fn new(db: &TransactionDatabase, itemset: Itemset) -> Result<Self, DataError> {
        let cover = db.cover_of(&itemset)?;
        let support = cover.support();
        Ok(Pattern {
            itemset,
            cover,
            support,
        })
    }

    pub fn len(&self) -> usize {
        self.itemset.len()
    }

    pub fn is_empty(&self) -> bool {
        self.itemset.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransactionDatabase {
    n_items: usize,
    n_transactions: usize,
    rows: Vec<BitSet>,
    cols: Vec<BitSet>,
}

impl TransactionDatabase {
    /// Builds a database from explicit transactions. The item universe is
    /// `1 + max id`, or `n_items` when that is larger.
    pub fn from_transactions(
        transactions: &[Vec<usize>],
        n_items: Option<usize>,
    ) -> Result<Self, DataError> {
        if transactions.is_empty() {
            return Err(DataError::NoTransactions);
        }
        let observed = transactions
            .iter()
            .flat_map(|t| t.iter().copied())
            .max()
            .map_or(0, |m| m + 1);
        let n_items = n_items.unwrap_or(0).max(observed).max(1);
        let n_transactions = transactions.len();
        let mut rows = Vec::with_capacity(n_transactions);
        let mut cols = alloc::vec![BitSet::new(n_transactions); n_items];
        for (t, items) in transactions.iter().enumerate() {
            let row = BitSet::from_indices(n_items, items.iter().copied());
            for i in row.ones() {
                cols[i].insert(t);
            }
            rows.push(row);
        }
        let db = TransactionDatabase {
            n_items,
            n_transactions,
            rows,
            cols,
        };
        debug_assert!(db.is_transpose_consistent());
        Ok(db)
    }

    /// Parses the CP4IM text format: one transaction per line as
    /// whitespace-separated item ids, `#` comments and blank lines skipped.
    pub fn parse_cp4im(text: &str) -> Result<Self, DataError> {
        let mut transactions = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut items = Vec::new();
            for token in line.split_whitespace() {
                let item = token.parse::<usize>().map_err(|_| DataError::Parse {
                    line: lineno + 1,
                    token: token.into(),
                })?;
                items.push(item);
            }
            items.sort_unstable();
            items.dedup();
            transactions.push(items);
        }
        Self::from_transactions(&transactions, None)
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn n_transactions(&self) -> usize {
        self.n_transactions
    }

    /// Items of transaction `t`.
    pub fn row(&self, t: usize) -> &BitSet {
        &self.rows[t]
    }

    /// Cover of item `i`.
    pub fn col(&self, i: usize) -> &BitSet {
        &self.cols[i]
    }

    pub fn is_transpose_consistent(&self) -> bool {
        (0..self.n_transactions).all(|t| {
            (0..self.n_items).all(|i| self.rows[t].contains(i) == self.cols[i].contains(t))
        })
    }

    pub fn all_transactions(&self) -> Cover {
        Cover(BitSet::full(self.n_transactions))
    }

    /// Intersection of item covers; the empty itemset covers everything.
    pub fn cover_of(&self, itemset: &Itemset) -> Result<Cover, DataError> {
        let mut bits = BitSet::full(self.n_transactions);
        for item in itemset.iter() {
            if item >= self.n_items {
                return Err(DataError::ItemOutOfRange {
                    item,
                    n_items: self.n_items,
                });
            }
            bits.intersect_with(&self.cols[item]);
        }
        Ok(Cover(bits))
    }

    /// Items present in every transaction of `cover`.
    pub fn closure_of_cover(&self, cover: &BitSet) -> Itemset {
        Itemset(
            (0..self.n_items)
                .filter(|&i| cover.is_subset(&self.cols[i]))
                .collect(),
        )
    }

    pub fn closure_of(&self, itemset: &Itemset) -> Result<Itemset, DataError> {
        let cover = self.cover_of(itemset)?;
        if cover.is_empty() {
            return Err(DataError::EmptyCover);
        }
        Ok(self.closure_of_cover(&cover))
    }

    pub fn pattern(&self, itemset: Itemset) -> Result<Pattern, DataError> {
        Pattern::new(self, itemset)
    }

    pub fn rel_freq(&self, pattern: &Pattern) -> f64 {
        pattern.support as f64 / self.n_transactions as f64
    }

    pub fn item_rel_freq(&self, item: usize) -> f64 {
        self.cols[item].count() as f64 / self.n_transactions as f64
    }
}
