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

//! Closed frequent itemsets and Jaccard-bounded diversity.
//!
//! Jaccard similarity between covers is not monotone along the search, so
//! pruning relies on the lower bound
//!
//! ```text
//! LB(p, h) = max(0, θ - |cover(p) \ h|) / (|h| + |cover(p) \ h|)
//! ```
//!
//! which only grows as `cover(p)` shrinks and never exceeds the Jaccard index
//! of any pattern with support at least `θ`.

use alloc::vec::Vec;

use crate::bitset::BitSet;
use crate::data::{Cover, Pattern, TransactionDatabase};
use crate::engine::{Control, Inconsistent, Propagator, SearchStats, Solver, VarState};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("support threshold must be at least 1")]
    ZeroTheta,
    #[error("support threshold {theta} exceeds the {n_transactions} transactions")]
    ThetaTooLarge { theta: usize, n_transactions: usize },
    #[error("jmax {0} outside [0, 1]")]
    Jmax(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiversityConfig {
    pub theta: usize,
    pub jmax: f64,
}

impl DiversityConfig {
    pub fn new(theta: usize, jmax: f64, db: &TransactionDatabase) -> Result<Self, ConfigError> {
        if theta == 0 {
            return Err(ConfigError::ZeroTheta);
        }
        if theta > db.n_transactions() {
            return Err(ConfigError::ThetaTooLarge {
                theta,
                n_transactions: db.n_transactions(),
            });
        }
        if !(0.0..=1.0).contains(&jmax) {
            return Err(ConfigError::Jmax(jmax));
        }
        Ok(DiversityConfig { theta, jmax })
    }

    /// `jmax = 1` never prunes since the bound never exceeds 1.
    pub fn is_vacuous(&self) -> bool {
        self.jmax >= 1.0
    }
}

/// Covers of previously accepted patterns.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct History {
    covers: Vec<Cover>,
}

impl History {
    pub fn new() -> Self {
        History::default()
    }

    pub fn push(&mut self, cover: Cover) {
        debug_assert!(!cover.is_empty());
        self.covers.push(cover);
    }

    pub fn len(&self) -> usize {
        self.covers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.covers.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Cover> {
        self.covers.iter()
    }
}

/// `|a ∩ b| / |a ∪ b|`; `None` when both covers are empty.
pub fn jaccard(a: &BitSet, b: &BitSet) -> Option<f64> {
    let union = a.union_count(b);
    if union == 0 {
        return None;
    }
    Some(a.intersection_count(b) as f64 / union as f64)
}

/// The bound from its counts: `diff = |p \ h|`, `h_size = |h|`.
#[inline]
pub fn lower_bound_from_counts(theta: usize, diff: usize, h_size: usize) -> f64 {
    let num = theta.saturating_sub(diff);
    if num == 0 {
        return 0.0;
    }
    num as f64 / (h_size + diff) as f64
}

pub fn lower_bound(p_cover: &BitSet, h_cover: &BitSet, theta: usize) -> f64 {
    lower_bound_from_counts(theta, p_cover.difference_count(h_cover), h_cover.count())
}

fn cover_of_positive(db: &TransactionDatabase, state: &VarState) -> BitSet {
    let mut cover = BitSet::full(db.n_transactions());
    for i in state.ones().ones() {
        cover.intersect_with(db.col(i));
    }
    cover
}

/// `x⁺` is a non-empty closed itemset with support at least `θ`.
pub struct ClosedPattern<'a> {
    db: &'a TransactionDatabase,
    theta: usize,
}

impl<'a> ClosedPattern<'a> {
    pub fn new(db: &'a TransactionDatabase, theta: usize) -> Self {
        ClosedPattern { db, theta }
    }
}

impl Propagator for ClosedPattern<'_> {
    fn propagate(&mut self, state: &mut VarState) -> Result<(), Inconsistent> {
        closed_pattern_propagate(state, self.db, self.theta)
    }
}

pub fn closed_pattern_propagate(
    state: &mut VarState,
    db: &TransactionDatabase,
    theta: usize,
) -> Result<(), Inconsistent> {
    let cover = cover_of_positive(db, state);
    let support = cover.count();
    if support < theta {
        return Err(Inconsistent);
    }
    // an excluded item that covers every transaction makes x⁺ non-closed
    if state.zeros().ones().any(|j| cover.is_subset(db.col(j))) {
        return Err(Inconsistent);
    }
    let free: Vec<usize> = state.free().collect();
    for i in free {
        let ext = cover.intersection_count(db.col(i));
        if ext < theta {
            state.assign(i, false)?;
        } else if ext == support {
            state.assign(i, true)?;
        }
    }
    if state.is_complete() && state.ones().is_empty() {
        return Err(Inconsistent);
    }
    Ok(())
}

/// Every `h` in the history satisfies `LB(x⁺, h) ≤ jmax`. With `record`
/// set, each accepted solution's cover joins the history.
pub struct Diversity<'a> {
    db: &'a TransactionDatabase,
    config: DiversityConfig,
    history: History,
    record: bool,
}

impl<'a> Diversity<'a> {
    pub fn new(db: &'a TransactionDatabase, config: DiversityConfig, history: History) -> Self {
        Diversity {
            db,
            config,
            history,
            record: false,
        }
    }

    /// Greedy discipline: accepted solutions are appended to the history.
    pub fn recording(mut self) -> Self {
        self.record = true;
        self
    }

    pub fn history(&self) -> &History {
        &self.history
    }
}

impl Propagator for Diversity<'_> {
    fn propagate(&mut self, state: &mut VarState) -> Result<(), Inconsistent> {
        diversity_propagate(state, self.db, &self.history, &self.config)
    }

    fn on_solution(&mut self, state: &VarState) {
        if self.record {
            self.history
                .push(Cover::new(cover_of_positive(self.db, state)));
        }
    }
}

pub fn diversity_propagate(
    state: &mut VarState,
    db: &TransactionDatabase,
    history: &History,
    config: &DiversityConfig,
) -> Result<(), Inconsistent> {
    if history.is_empty() || config.is_vacuous() {
        return Ok(());
    }
    let theta = config.theta;
    let cover = cover_of_positive(db, state);
    let sizes: Vec<usize> = history.iter().map(|h| h.count()).collect();
    for (h, &size) in history.iter().zip(&sizes) {
        let diff = cover.difference_count(h);
        if lower_bound_from_counts(theta, diff, size) > config.jmax {
            return Err(Inconsistent);
        }
    }
    let free: Vec<usize> = state.free().collect();
    for i in free {
        let col = db.col(i);
        let too_close = history.iter().zip(&sizes).any(|(h, &size)| {
            let diff = cover.intersection_difference_count(col, h);
            lower_bound_from_counts(theta, diff, size) > config.jmax
        });
        if too_close {
            state.assign(i, false)?;
        }
    }
    Ok(())
}

/// Enumerates closed frequent patterns in search order. Each accepted pattern
/// joins the history, so with `jmax < 1` the output is pairwise diverse.
pub fn for_each_closed_diverse<F>(
    db: &TransactionDatabase,
    config: &DiversityConfig,
    limit: Option<u64>,
    mut visit: F,
) -> SearchStats
where
    F: FnMut(Pattern) -> Control,
{
    let mut solver = Solver::new()
        .with_propagator(ClosedPattern::new(db, config.theta))
        .with_propagator(Diversity::new(db, *config, History::new()).recording())
        .with_limit(limit);
    let mut state = VarState::new(db.n_items());
    solver.solve(&mut state, |s| {
        let itemset = s.positive();
        let cover = db.cover_of(&itemset).expect("solver items in range");
        visit(Pattern {
            support: cover.support(),
            itemset,
            cover,
        })
    })
}
