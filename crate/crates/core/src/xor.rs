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

//! Random XOR cells and the sampler built on them.
//!
//! `m` random parity constraints over the item variables cut the solution
//! space into `2^m` cells. A cell is enumerated with the closed-pattern and
//! diversity propagators plus a Gaussian-elimination XOR propagator, keeping
//! a local history that only lives as long as the cell.

use alloc::vec::Vec;

use rand::Rng;

use crate::bitset::BitSet;
use crate::data::{Pattern, TransactionDatabase};
use crate::diversity::{ClosedPattern, Diversity, DiversityConfig, History};
use crate::engine::{Control, Inconsistent, Propagator, Solver, VarState};

/// Redraws of an empty cell before giving up.
pub const MAX_CELL_REDRAWS: usize = 10;
/// Probe cells tried while searching for the cell exponent.
pub const MAX_CALIBRATION_PROBES: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SampleError {
    #[error("cell calibration failed: base constraints have no solution")]
    EmptySpace,
    #[error("cell calibration failed after {0} probes")]
    CalibrationExhausted(usize),
    #[error("no non-empty cell after {0} redraws")]
    EmptyCells(usize),
}

/// `m × (n + 1)` GF(2) matrix; bit `n` of each row is the parity `b₀`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct XorSystem {
    n_vars: usize,
    rows: Vec<BitSet>,
}

impl XorSystem {
    pub fn new(n_vars: usize) -> Self {
        XorSystem {
            n_vars,
            rows: Vec::new(),
        }
    }

    /// Adds `⊕_{i ∈ vars} x_i = parity`.
    pub fn push_row(&mut self, vars: &[usize], parity: bool) {
        let mut row = BitSet::from_indices(self.n_vars + 1, vars.iter().copied());
        if parity {
            row.insert(self.n_vars);
        }
        self.rows.push(row);
    }

    pub fn random<R: Rng + ?Sized>(n_vars: usize, m: usize, rng: &mut R) -> Self {
        let mut sys = XorSystem::new(n_vars);
        for _ in 0..m {
            let mut row = BitSet::new(n_vars + 1);
            for bit in 0..=n_vars {
                if rng.random::<bool>() {
                    row.insert(bit);
                }
            }
            sys.rows.push(row);
        }
        sys
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[BitSet] {
        &self.rows
    }

    pub fn coefficient(&self, row: usize, var: usize) -> bool {
        self.rows[row].contains(var)
    }

    pub fn parity(&self, row: usize) -> bool {
        self.rows[row].contains(self.n_vars)
    }

    /// Direct evaluation on a total assignment.
    pub fn holds(&self, ones: &BitSet) -> bool {
        self.rows.iter().enumerate().all(|(r, row)| {
            let lhs = row
                .ones()
                .filter(|&i| i < self.n_vars && ones.contains(i))
                .count()
                % 2
                == 1;
            lhs == self.parity(r)
        })
    }

    /// Substitutes the assigned variables of `state`: ones flip the parity,
    /// and every assigned coefficient is cleared.
    pub fn substitute(&self, state: &VarState) -> XorSystem {
        let n = self.n_vars;
        let mut keep = BitSet::full(n + 1);
        for i in state.ones().ones().chain(state.zeros().ones()) {
            keep.remove(i);
        }
        let mut ones = BitSet::new(n + 1);
        for i in state.ones().ones() {
            ones.insert(i);
        }
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut out = row.clone();
                if row.intersection_count(&ones) % 2 == 1 {
                    out.toggle(n);
                }
                out.intersect_with(&keep);
                out
            })
            .collect();
        XorSystem { n_vars: n, rows }
    }

    /// Some row reads `0 = 1`.
    pub fn is_inconsistent(&self) -> bool {
        self.rows
            .iter()
            .any(|row| row.count() == 1 && self.parity_bit(row))
    }

    fn parity_bit(&self, row: &BitSet) -> bool {
        row.contains(self.n_vars)
    }

    fn coefficient_count(&self, row: &BitSet) -> usize {
        row.count() - usize::from(self.parity_bit(row))
    }

    /// Reduced row echelon form over GF(2); all-zero rows sink to the bottom.
    pub fn echelonize(&mut self) {
        let mut rank = 0;
        for col in 0..self.n_vars {
            if rank == self.rows.len() {
                break;
            }
            let Some(pivot) = (rank..self.rows.len()).find(|&r| self.rows[r].contains(col)) else {
                continue;
            };
            self.rows.swap(rank, pivot);
            let pivot_row = self.rows[rank].clone();
            for (r, row) in self.rows.iter_mut().enumerate() {
                if r != rank && row.contains(col) {
                    row.xor_with(&pivot_row);
                }
            }
            rank += 1;
        }
    }
}

/// Gaussian-elimination filtering of the XOR constraints against `state`.
pub fn xor_propagate(system: &XorSystem, state: &mut VarState) -> Result<(), Inconsistent> {
    loop {
        let mut work = system.substitute(state);
        if work.is_inconsistent() {
            return Err(Inconsistent);
        }
        if state.n_free() == 0 {
            return Ok(());
        }
        work.echelonize();
        if work.is_inconsistent() {
            return Err(Inconsistent);
        }
        let mut changed = false;
        for row in &work.rows {
            if work.coefficient_count(row) == 1 {
                let var = row.first().expect("unit row has a coefficient");
                changed |= state.assign(var, work.parity_bit(row))?;
            }
        }
        if !changed {
            return Ok(());
        }
    }
}

pub struct XorPropagator {
    system: XorSystem,
}

impl XorPropagator {
    pub fn new(system: XorSystem) -> Self {
        XorPropagator { system }
    }
}

impl Propagator for XorPropagator {
    fn propagate(&mut self, state: &mut VarState) -> Result<(), Inconsistent> {
        if self.system.row_count() == 0 {
            return Ok(());
        }
        xor_propagate(&self.system, state)
    }
}

/// Diverse patterns collected from one cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellSample {
    pub patterns: Vec<Pattern>,
    pub local_history: History,
}

impl CellSample {
    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }
}

/// Calibration pivot for error tolerance `kappa`: `⌈e^{3/2}(1 + 1/κ)²⌉`.
pub fn pivot_for_kappa(kappa: f64) -> usize {
    let t = 1.0 + 1.0 / kappa;
    libm::ceil(libm::exp(1.5) * t * t) as usize
}

/// Enumerates the cell of `system` under closedness, frequency and
/// local-history diversity, stopping after `cap` patterns.
pub fn enumerate_cell(
    db: &TransactionDatabase,
    config: &DiversityConfig,
    system: XorSystem,
    cap: Option<usize>,
) -> CellSample {
    let mut patterns = Vec::new();
    let mut local_history = History::new();
    {
        let mut solver = Solver::new()
            .with_propagator(ClosedPattern::new(db, config.theta))
            .with_propagator(Diversity::new(db, *config, History::new()).recording())
            .with_propagator(XorPropagator::new(system))
            .with_limit(cap.map(|c| c as u64));
        let mut state = VarState::new(db.n_items());
        solver.solve(&mut state, |s| {
            let itemset = s.positive();
            let cover = db.cover_of(&itemset).expect("solver items in range");
            local_history.push(cover.clone());
            patterns.push(Pattern {
                support: cover.support(),
                itemset,
                cover,
            });
            Control::Continue
        });
    }
    CellSample {
        patterns,
        local_history,
    }
}

/// Samples a fresh random cell with `m` constraints.
pub fn sample_cell<R: Rng + ?Sized>(
    db: &TransactionDatabase,
    config: &DiversityConfig,
    m: usize,
    rng: &mut R,
    cap: Option<usize>,
) -> CellSample {
    let system = XorSystem::random(db.n_items(), m, rng);
    enumerate_cell(db, config, system, cap)
}

/// Finds a cell exponent whose probe cell holds between 1 and `pivot`
/// patterns, moving up on overfull probes and down on empty ones.
pub fn estimate_cell_exponent<R: Rng + ?Sized>(
    db: &TransactionDatabase,
    config: &DiversityConfig,
    rng: &mut R,
    pivot: usize,
) -> Result<usize, SampleError> {
    debug_assert!(pivot >= 2);
    let mut m = 0usize;
    for _ in 0..MAX_CALIBRATION_PROBES {
        let count = sample_cell(db, config, m, rng, Some(pivot + 1)).len();
        if count == 0 {
            if m == 0 {
                return Err(SampleError::EmptySpace);
            }
            m -= 1;
        } else if count > pivot {
            m += 1;
        } else {
            return Ok(m);
        }
    }
    Err(SampleError::CalibrationExhausted(MAX_CALIBRATION_PROBES))
}

/// A calibrated, non-empty cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub m: usize,
    pub sample: CellSample,
}

/// Calibrates and draws one non-empty cell of at most `pivot` patterns.
/// Overfull cells are redrawn like empty ones; if only overfull cells turn
/// up, the last one is truncated to `pivot`.
pub fn draw_cell<R: Rng + ?Sized>(
    db: &TransactionDatabase,
    config: &DiversityConfig,
    kappa: f64,
    rng: &mut R,
) -> Result<Cell, SampleError> {
    let pivot = pivot_for_kappa(kappa);
    let m = match estimate_cell_exponent(db, config, rng, pivot) {
        Ok(m) => m,
        Err(SampleError::CalibrationExhausted(_)) => {
            let sample = enumerate_cell(db, config, XorSystem::new(db.n_items()), Some(pivot));
            return Ok(Cell { m: 0, sample });
        }
        Err(e) => return Err(e),
    };
    let mut overfull = None;
    for _ in 0..MAX_CELL_REDRAWS {
        let sample = sample_cell(db, config, m, rng, Some(pivot + 1));
        if sample.is_empty() {
            continue;
        }
        if sample.len() > pivot {
            overfull = Some(sample);
            continue;
        }
        return Ok(Cell { m, sample });
    }
    match overfull {
        Some(mut sample) => {
            sample.patterns.truncate(pivot);
            let mut history = History::new();
            for p in &sample.patterns {
                history.push(p.cover.clone());
            }
            sample.local_history = history;
            Ok(Cell { m, sample })
        }
        None => Err(SampleError::EmptyCells(MAX_CELL_REDRAWS)),
    }
}

/// Index drawn with probability proportional to `weights`.
pub fn proportional_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    debug_assert!(!weights.is_empty());
    let total: f64 = weights.iter().sum();
    let mut target = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if target < w {
            return i;
        }
        target -= w;
    }
    weights.len() - 1
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Draw {
    pub pattern: Pattern,
    pub cell: Cell,
}

/// One pattern from a random cell, picked proportionally to `quality`.
pub fn cdflexics_draw<R, Q>(
    db: &TransactionDatabase,
    config: &DiversityConfig,
    quality: Q,
    kappa: f64,
    rng: &mut R,
) -> Result<Draw, SampleError>
where
    R: Rng + ?Sized,
    Q: Fn(&Pattern) -> f64,
{
    let cell = draw_cell(db, config, kappa, rng)?;
    let weights: Vec<f64> = cell.sample.patterns.iter().map(&quality).collect();
    let pick = proportional_index(&weights, rng);
    Ok(Draw {
        pattern: cell.sample.patterns[pick].clone(),
        cell,
    })
}
