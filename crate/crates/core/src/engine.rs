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

//! A small depth-first propagation solver over Boolean item variables.
//!
//! Each search node runs every propagator round-robin until none of them
//! assigns anything new, then branches on the lowest free variable, trying
//! `1` before `0`. Assignments are trailed so backtracking restores the
//! state exactly.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::bitset::BitSet;
use crate::data::Itemset;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Domain {
    Free,
    One,
    Zero,
}

/// A propagator found the current node unsatisfiable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Inconsistent;

/// Tri-state domains for every item variable plus an undo trail.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VarState {
    domains: Vec<Domain>,
    ones: BitSet,
    zeros: BitSet,
    trail: Vec<usize>,
}

impl VarState {
    pub fn new(n_vars: usize) -> Self {
        VarState {
            domains: vec![Domain::Free; n_vars],
            ones: BitSet::new(n_vars),
            zeros: BitSet::new(n_vars),
            trail: Vec::new(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.domains.len()
    }

    pub fn domain(&self, var: usize) -> Domain {
        self.domains[var]
    }

    pub fn is_free(&self, var: usize) -> bool {
        self.domains[var] == Domain::Free
    }

    /// Variables forced to 1 (`x⁺`).
    pub fn ones(&self) -> &BitSet {
        &self.ones
    }

    /// Variables forced to 0 (`x⁻`).
    pub fn zeros(&self) -> &BitSet {
        &self.zeros
    }

    pub fn free(&self) -> impl Iterator<Item = usize> + '_ {
        self.domains
            .iter()
            .enumerate()
            .filter(|(_, d)| **d == Domain::Free)
            .map(|(i, _)| i)
    }

    pub fn n_free(&self) -> usize {
        self.domains.len() - self.trail.len()
    }

    pub fn is_complete(&self) -> bool {
        self.trail.len() == self.domains.len()
    }

    pub fn positive(&self) -> Itemset {
        Itemset::new(self.ones.ones().collect())
    }

    /// Assigns `var`. Returns `Ok(true)` if the domain shrank, `Ok(false)` if
    /// the value was already set, and fails on a conflicting assignment.
    pub fn assign(&mut self, var: usize, value: bool) -> Result<bool, Inconsistent> {
        match (self.domains[var], value) {
            (Domain::Free, true) => {
                self.domains[var] = Domain::One;
                self.ones.insert(var);
            }
            (Domain::Free, false) => {
                self.domains[var] = Domain::Zero;
                self.zeros.insert(var);
            }
            (Domain::One, true) | (Domain::Zero, false) => return Ok(false),
            _ => return Err(Inconsistent),
        }
        self.trail.push(var);
        Ok(true)
    }

    pub fn mark(&self) -> usize {
        self.trail.len()
    }

    pub fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let var = self.trail.pop().unwrap();
            match self.domains[var] {
                Domain::One => self.ones.remove(var),
                Domain::Zero => self.zeros.remove(var),
                Domain::Free => unreachable!("trailed variable is free"),
            }
            self.domains[var] = Domain::Free;
        }
    }
}

pub trait Propagator {
    /// Removes unsupported values. Must only ever assign free variables.
    fn propagate(&mut self, state: &mut VarState) -> Result<(), Inconsistent>;

    /// Called once per accepted total assignment, before the solution callback.
    fn on_solution(&mut self, _state: &VarState) {}
}

impl<F> Propagator for F
where
    F: FnMut(&mut VarState) -> Result<(), Inconsistent>,
{
    fn propagate(&mut self, state: &mut VarState) -> Result<(), Inconsistent> {
        self(state)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes: u64,
    pub failures: u64,
    pub solutions: u64,
    pub stopped: bool,
}

/// Decision for the next branching step: lowest free variable, `1` first.
pub fn branch(state: &VarState) -> Option<(usize, bool)> {
    state.free().next().map(|var| (var, true))
}

/// Propagator list plus a solution cap.
pub struct Solver<'a> {
    propagators: Vec<Box<dyn Propagator + 'a>>,
    limit: Option<u64>,
}

impl Default for Solver<'_> {
    fn default() -> Self {
        Self::new()
    }
}

impl<'a> Solver<'a> {
    pub fn new() -> Self {
        Solver {
            propagators: Vec::new(),
            limit: None,
        }
    }

    pub fn with_propagator(mut self, propagator: impl Propagator + 'a) -> Self {
        self.propagators.push(Box::new(propagator));
        self
    }

    pub fn push(&mut self, propagator: Box<dyn Propagator + 'a>) {
        self.propagators.push(propagator);
    }

    pub fn with_limit(mut self, limit: Option<u64>) -> Self {
        self.limit = limit;
        self
    }

    /// Runs every propagator until none changes the state.
    pub fn propagate(&mut self, state: &mut VarState) -> Result<(), Inconsistent> {
        loop {
            let before = state.mark();
            for p in &mut self.propagators {
                p.propagate(state)?;
            }
            if state.mark() == before {
                return Ok(());
            }
        }
    }

    /// Enumerates all total assignments accepted by every propagator,
    /// calling `on_solution` for each. `state` is restored on return.
    pub fn solve<F>(&mut self, state: &mut VarState, mut on_solution: F) -> SearchStats
    where
        F: FnMut(&VarState) -> Control,
    {
        let mut stats = SearchStats::default();
        if self.limit == Some(0) {
            stats.stopped = true;
            return stats;
        }
        let mark = state.mark();
        if self.search(state, &mut on_solution, &mut stats) == Control::Stop {
            stats.stopped = true;
        }
        state.undo_to(mark);
        stats
    }

    /// Collects the positive part of every solution.
    pub fn solutions(&mut self, state: &mut VarState) -> Vec<Itemset> {
        let mut out = Vec::new();
        self.solve(state, |s| {
            out.push(s.positive());
            Control::Continue
        });
        out
    }

    fn search<F>(
        &mut self,
        state: &mut VarState,
        on_solution: &mut F,
        stats: &mut SearchStats,
    ) -> Control
    where
        F: FnMut(&VarState) -> Control,
    {
        stats.nodes += 1;
        let mark = state.mark();
        if self.propagate(state).is_err() {
            stats.failures += 1;
            state.undo_to(mark);
            return Control::Continue;
        }
        let control = match branch(state) {
            None => {
                stats.solutions += 1;
                for p in &mut self.propagators {
                    p.on_solution(state);
                }
                let control = on_solution(state);
                if self.limit.is_some_and(|l| stats.solutions >= l) {
                    Control::Stop
                } else {
                    control
                }
            }
            Some((var, first)) => {
                let mut control = Control::Continue;
                for value in [first, !first] {
                    let m = state.mark();
                    state
                        .assign(var, value)
                        .expect("branching variable is free");
                    control = self.search(state, on_solution, stats);
                    state.undo_to(m);
                    if control == Control::Stop {
                        break;
                    }
                }
                control
            }
        };
        state.undo_to(mark);
        control
    }
}
