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

//! The interactive learning loop, simulated users and regret evaluation.

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bitset::BitSet;
use crate::data::{Itemset, Pattern, TransactionDatabase};
use crate::diversity::{ConfigError, DiversityConfig};
use crate::preference::{
    aggregate_weights, augmented_features, extract_features, learn_discriminating_pattern,
    phi_logistic, AggregationConfig, AggregationKind, FeatureLayout, FeatureSets, FeatureVector,
    LogisticGradientDescent, PreferenceError, RankedQuery, WeightLearner, WeightVector, DISC_SLOTS,
};
use crate::xor::{draw_cell, SampleError};

/// Fresh draws that collide with a pattern already in the query are retried
/// this many times before the duplicate is accepted.
pub const MAX_DUPLICATE_REDRAWS: usize = 5;

/// Default cap on the size of a reference set.
pub const DEFAULT_REFERENCE_CAP: usize = 5_000_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SessionError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Preference(#[from] PreferenceError),
    #[error("invalid session parameter: {0}")]
    Parameter(&'static str),
    #[error("iteration {iteration}: {source}")]
    Sample {
        iteration: usize,
        source: SampleError,
    },
    #[error("no query is waiting for a ranking")]
    NoPendingQuery,
    #[error("ranking is not a permutation of the {0} live patterns")]
    BadOrder(usize),
    #[error("session finished after {0} iterations")]
    Finished(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("more than {cap} frequent itemsets")]
pub struct ReferenceCapExceeded {
    pub cap: usize,
}

/// Hidden quality measure of a simulated user.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Measure {
    Frequency,
    Surprisingness,
}

/// `max(freq(p) − Π freq({i}), 0)` with relative frequencies.
pub fn surprisingness(p: &Pattern, db: &TransactionDatabase) -> f64 {
    let mut product = 1.0;
    for i in p.itemset.iter() {
        product *= db.item_rel_freq(i);
    }
    let v = db.rel_freq(p) - product;
    if v > 0.0 {
        v
    } else {
        0.0
    }
}

pub fn measure_value(measure: Measure, p: &Pattern, db: &TransactionDatabase) -> f64 {
    match measure {
        Measure::Frequency => db.rel_freq(p),
        Measure::Surprisingness => surprisingness(p, db),
    }
}

/// Ranks `query` by descending `measure`; ties go to the lexicographically
/// smaller itemset.
pub fn simulated_rank(
    query: &[Pattern],
    measure: Measure,
    db: &TransactionDatabase,
) -> RankedQuery {
    let values: Vec<f64> = query
        .iter()
        .map(|p| measure_value(measure, p, db))
        .collect();
    let mut order: Vec<usize> = (0..query.len()).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .total_cmp(&values[a])
            .then_with(|| query[a].itemset.cmp(&query[b].itemset))
    });
    let mut ranks = vec![0; query.len()];
    for (r, &i) in order.iter().enumerate() {
        ranks[i] = r + 1;
    }
    RankedQuery::new(query.to_vec(), ranks).expect("sorted order is a permutation")
}

/// Calls `visit(itemset, cover)` for every frequent itemset, depth first
/// over ascending item ids. Stops early when `visit` returns `false`.
pub fn for_each_frequent<F>(db: &TransactionDatabase, theta: usize, mut visit: F)
where
    F: FnMut(&[usize], &BitSet) -> bool,
{
    let mut prefix = Vec::new();
    let roots: Vec<(usize, BitSet)> = (0..db.n_items())
        .filter(|&i| db.col(i).count() >= theta)
        .map(|i| (i, db.col(i).clone()))
        .collect();
    eclat(&roots, theta, &mut prefix, &mut visit);
}

fn eclat<F>(class: &[(usize, BitSet)], theta: usize, prefix: &mut Vec<usize>, visit: &mut F) -> bool
where
    F: FnMut(&[usize], &BitSet) -> bool,
{
    for (a, (item, tids)) in class.iter().enumerate() {
        prefix.push(*item);
        if !visit(prefix, tids) {
            return false;
        }
        let next: Vec<(usize, BitSet)> = class[a + 1..]
            .iter()
            .filter_map(|(j, other)| {
                let t = tids.intersection(other);
                (t.count() >= theta).then_some((*j, t))
            })
            .collect();
        if !next.is_empty() && !eclat(&next, theta, prefix, visit) {
            return false;
        }
        prefix.pop();
    }
    true
}

/// Hidden-measure values of every frequent itemset, sorted ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceSet {
    measure: Measure,
    values: Vec<f64>,
}

impl ReferenceSet {
    pub fn from_values(measure: Measure, mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        ReferenceSet { measure, values }
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Share of reference values not above `value`.
    pub fn percentile_of(&self, value: f64) -> f64 {
        let below = self.values.partition_point(|v| *v <= value);
        below as f64 / self.values.len() as f64
    }

    pub fn percentile_rank(&self, p: &Pattern, db: &TransactionDatabase) -> f64 {
        self.percentile_of(measure_value(self.measure, p, db))
    }
}

pub fn mine_reference_set(
    db: &TransactionDatabase,
    theta: usize,
    measure: Measure,
    cap: usize,
) -> Result<ReferenceSet, ReferenceCapExceeded> {
    let n = db.n_transactions() as f64;
    let item_freq: Vec<f64> = (0..db.n_items()).map(|i| db.item_rel_freq(i)).collect();
    let mut values = Vec::new();
    let mut over = false;
    for_each_frequent(db, theta, |items, tids| {
        if values.len() == cap {
            over = true;
            return false;
        }
        let freq = tids.count() as f64 / n;
        values.push(match measure {
            Measure::Frequency => freq,
            Measure::Surprisingness => {
                // same multiplication order as `surprisingness`
                let mut product = 1.0;
                for &i in items {
                    product *= item_freq[i];
                }
                let v = freq - product;
                if v > 0.0 {
                    v
                } else {
                    0.0
                }
            }
        });
        true
    });
    if over {
        return Err(ReferenceCapExceeded { cap });
    }
    Ok(ReferenceSet::from_values(measure, values))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Aggregate {
    Max,
    Avg,
}

/// `1 − M(percentile ranks of the query)`.
pub fn regret(
    query: &[Pattern],
    reference: &ReferenceSet,
    db: &TransactionDatabase,
    m: Aggregate,
) -> f64 {
    let ranks = query.iter().map(|p| reference.percentile_rank(p, db));
    let value = match m {
        Aggregate::Max => ranks.fold(0.0, f64::max),
        Aggregate::Avg => ranks.sum::<f64>() / query.len() as f64,
    };
    1.0 - value
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SessionConfig {
    pub theta: usize,
    pub jmax: f64,
    pub k: usize,
    pub ell: usize,
    pub iterations: usize,
    /// Lower end `A` of the logistic quality range.
    pub range: f64,
    pub kappa: f64,
    pub lambda: f64,
    pub aggregation: AggregationConfig,
    pub features: FeatureSets,
    pub top_m: usize,
    /// Learn and aggregate discriminating sub-pattern weights.
    pub disc: bool,
    /// Sample with the diversity constraint; otherwise `jmax` is ignored.
    pub cdf: bool,
    pub seed: u64,
}

impl SessionConfig {
    pub fn new(
        theta: usize,
        jmax: f64,
        k: usize,
        ell: usize,
        iterations: usize,
        seed: u64,
    ) -> Self {
        SessionConfig {
            theta,
            jmax,
            k,
            ell,
            iterations,
            range: 0.1,
            kappa: 0.9,
            lambda: 0.001,
            aggregation: AggregationConfig::new(AggregationKind::Exponential, 0.13)
                .expect("default eta in range"),
            features: FeatureSets::ALL,
            top_m: 1,
            disc: true,
            cdf: true,
            seed,
        }
    }

    pub fn validate(&self, db: &TransactionDatabase) -> Result<DiversityConfig, SessionError> {
        if self.k == 0 {
            return Err(SessionError::Parameter("k must be at least 1"));
        }
        if self.ell >= self.k {
            return Err(SessionError::Parameter("ell must be smaller than k"));
        }
        if self.iterations == 0 {
            return Err(SessionError::Parameter("at least one iteration"));
        }
        if self.top_m == 0 {
            return Err(SessionError::Parameter("top_m must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.range) {
            return Err(SessionError::Parameter("range A must lie in [0, 1)"));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(SessionError::Parameter("kappa must be positive"));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(SessionError::Parameter("lambda must be non-negative"));
        }
        let jmax = if self.cdf { self.jmax } else { 1.0 };
        Ok(DiversityConfig::new(self.theta, jmax, db)?)
    }
}

/// Seed of the random stream for draw `draw` of iteration `iteration`.
/// Depends on nothing else, so every variant sees the same XOR draws.
pub fn draw_seed(seed: u64, iteration: usize, draw: usize) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    mix(mix(mix(seed) ^ iteration as u64) ^ draw as u64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub query: Vec<Pattern>,
    /// Indices into `query`, best first.
    pub order: Vec<usize>,
    pub p_disc: Option<Itemset>,
}

/// One run of the learning loop. Call [`Session::next_query`], then rank the
/// query with [`Session::submit_order`] or [`Session::advance`].
pub struct Session {
    db: Arc<TransactionDatabase>,
    config: SessionConfig,
    diversity: DiversityConfig,
    layout: FeatureLayout,
    learner: Box<dyn WeightLearner + Send + Sync>,
    weights: WeightVector,
    iteration: usize,
    /// Distinct patterns seen in rankings, with base features.
    known: Vec<(Pattern, FeatureVector)>,
    /// `(better, worse)` indices into `known`.
    pairs: Vec<(usize, usize)>,
    previous: Option<RankedQuery>,
    pending: Option<Vec<Pattern>>,
    history: Vec<IterationRecord>,
}

impl Session {
    pub fn new(db: Arc<TransactionDatabase>, config: SessionConfig) -> Result<Self, SessionError> {
        let diversity = config.validate(&db)?;
        let layout = FeatureLayout::new(config.features, &db);
        Ok(Session {
            learner: Box::new(LogisticGradientDescent::new(config.lambda)),
            weights: vec![0.0; layout.width()],
            db,
            config,
            diversity,
            layout,
            iteration: 1,
            known: Vec::new(),
            pairs: Vec::new(),
            previous: None,
            pending: None,
            history: Vec::new(),
        })
    }

    pub fn with_learner(mut self, learner: impl WeightLearner + Send + Sync + 'static) -> Self {
        self.learner = Box::new(learner);
        self
    }

    pub fn db(&self) -> &TransactionDatabase {
        &self.db
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn layout(&self) -> &FeatureLayout {
        &self.layout
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// 1-based index of the iteration whose ranking is awaited next.
    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn is_finished(&self) -> bool {
        self.iteration > self.config.iterations
    }

    pub fn example_count(&self) -> usize {
        self.pairs.len()
    }

    pub fn pending(&self) -> Option<&[Pattern]> {
        self.pending.as_deref()
    }

    pub fn history(&self) -> &[IterationRecord] {
        &self.history
    }

    pub fn quality(&self, p: &Pattern) -> f64 {
        phi_logistic(
            &extract_features(p, &self.db, &self.layout),
            &self.weights,
            self.config.range,
        )
    }

    /// Builds (or returns the already built) query of the current iteration.
    pub fn next_query(&mut self) -> Result<&[Pattern], SessionError> {
        if self.is_finished() {
            return Err(SessionError::Finished(self.config.iterations));
        }
        if self.pending.is_none() {
            let query = self.build_query()?;
            self.pending = Some(query);
        }
        Ok(self.pending.as_deref().unwrap())
    }

    fn build_query(&self) -> Result<Vec<Pattern>, SessionError> {
        let k = self.config.k;
        let mut query: Vec<Pattern> = match &self.previous {
            Some(prev) => prev
                .best_first()
                .into_iter()
                .take(self.config.ell)
                .cloned()
                .collect(),
            None => Vec::new(),
        };
        let mut draw = 0;
        while query.len() < k {
            let mut rng =
                ChaCha8Rng::seed_from_u64(draw_seed(self.config.seed, self.iteration, draw));
            draw += 1;
            let mut picked = Vec::new();
            for attempt in 0..=MAX_DUPLICATE_REDRAWS {
                let cell = draw_cell(&self.db, &self.diversity, self.config.kappa, &mut rng)
                    .map_err(|source| SessionError::Sample {
                        iteration: self.iteration,
                        source,
                    })?;
                picked = self.top_of(cell.sample.patterns, &mut rng);
                let fresh = picked
                    .iter()
                    .any(|p| !query.iter().any(|q| q.itemset == p.itemset));
                if fresh || attempt == MAX_DUPLICATE_REDRAWS {
                    break;
                }
            }
            let mut fresh_first: Vec<Pattern> = Vec::with_capacity(picked.len());
            let mut dups = Vec::new();
            for p in picked {
                if query.iter().any(|q| q.itemset == p.itemset) {
                    dups.push(p);
                } else {
                    fresh_first.push(p);
                }
            }
            if fresh_first.is_empty() {
                fresh_first = dups;
            }
            for p in fresh_first {
                if query.len() < k {
                    query.push(p);
                }
            }
        }
        Ok(query)
    }

    /// The `top_m` highest-quality patterns. Exact ties (all of them while
    /// the weights are still zero) are broken uniformly at random.
    fn top_of<R: Rng + ?Sized>(&self, patterns: Vec<Pattern>, rng: &mut R) -> Vec<Pattern> {
        let keys: Vec<(f64, u64)> = patterns
            .iter()
            .map(|p| (self.quality(p), rng.random::<u64>()))
            .collect();
        let mut idx: Vec<usize> = (0..patterns.len()).collect();
        idx.sort_by(|&a, &b| {
            keys[b]
                .0
                .total_cmp(&keys[a].0)
                .then(keys[a].1.cmp(&keys[b].1))
        });
        idx.truncate(self.config.top_m);
        idx.into_iter().map(|i| patterns[i].clone()).collect()
    }

    /// Ranks the pending query; `order` lists its indices best first.
    pub fn submit_order(&mut self, order: &[usize]) -> Result<(), SessionError> {
        let query = self.pending.as_ref().ok_or(SessionError::NoPendingQuery)?;
        let k = query.len();
        let mut ranks = vec![0; k];
        if order.len() != k {
            return Err(SessionError::BadOrder(k));
        }
        for (r, &i) in order.iter().enumerate() {
            if i >= k || ranks[i] != 0 {
                return Err(SessionError::BadOrder(k));
            }
            ranks[i] = r + 1;
        }
        let ranked = RankedQuery::new(query.clone(), ranks)?;
        self.pending = None;
        self.advance(ranked)
    }

    fn intern(&mut self, p: &Pattern) -> usize {
        if let Some(i) = self.known.iter().position(|(q, _)| q.itemset == p.itemset) {
            return i;
        }
        let f = extract_features(p, &self.db, &self.layout);
        self.known.push((p.clone(), f));
        self.known.len() - 1
    }

    /// Learns from a ranked query and moves to the next iteration.
    pub fn advance(&mut self, ranked: RankedQuery) -> Result<(), SessionError> {
        if self.is_finished() {
            return Err(SessionError::Finished(self.config.iterations));
        }
        let order = ranked.order();
        let ids: Vec<usize> = order
            .iter()
            .map(|&i| self.intern(&ranked.patterns()[i]))
            .collect();
        for (a, &better) in ids.iter().enumerate() {
            for &worse in &ids[a + 1..] {
                self.pairs.push((better, worse));
            }
        }
        let p_disc = if self.config.disc {
            let (p_disc, _) = learn_discriminating_pattern(&ranked);
            self.weights = self.learn_with_disc(&p_disc, &ranked);
            Some(p_disc)
        } else {
            let examples: Vec<FeatureVector> = self
                .pairs
                .iter()
                .map(|&(b, w)| difference(&self.known[b].1, &self.known[w].1))
                .collect();
            self.weights = self.learner.learn(&examples, &self.weights);
            None
        };
        self.history.push(IterationRecord {
            iteration: self.iteration,
            query: ranked.patterns().to_vec(),
            order,
            p_disc,
        });
        self.previous = Some(ranked);
        self.pending = None;
        self.iteration += 1;
        Ok(())
    }

    fn learn_with_disc(&self, p_disc: &Itemset, ranked: &RankedQuery) -> WeightVector {
        let augmented: Vec<FeatureVector> = self
            .known
            .iter()
            .map(|(p, _)| augmented_features(p, p_disc, &self.db, &self.layout))
            .collect();
        let examples: Vec<FeatureVector> = self
            .pairs
            .iter()
            .map(|&(b, w)| difference(&augmented[b], &augmented[w]))
            .collect();
        let mut warm = self.weights.clone();
        warm.extend_from_slice(&[0.0; DISC_SLOTS]);
        let learned = self.learner.learn(&examples, &warm);
        let width = self.layout.width();
        let disc = [learned[width], learned[width + 1], learned[width + 2]];
        aggregate_weights(
            &learned[..width],
            disc,
            p_disc,
            ranked.patterns(),
            &self.db,
            &self.layout,
            &self.config.aggregation,
        )
    }
}

fn difference(a: &[f64], b: &[f64]) -> FeatureVector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Per-iteration regret of one simulated session.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRegret {
    pub iteration: usize,
    pub regret_max: f64,
    pub regret_avg: f64,
}

/// Drives a session with a simulated user ranking by `reference`'s measure.
/// `on_iteration` sees each iteration's regret as soon as it is ranked.
pub fn simulate<F>(
    db: Arc<TransactionDatabase>,
    config: SessionConfig,
    reference: &ReferenceSet,
    mut on_iteration: F,
) -> Result<Vec<IterationRegret>, SessionError>
where
    F: FnMut(&IterationRegret),
{
    let mut session = Session::new(db, config)?;
    let mut out = Vec::with_capacity(config.iterations);
    while !session.is_finished() {
        let t = session.iteration();
        let query = session.next_query()?.to_vec();
        let record = IterationRegret {
            iteration: t,
            regret_max: regret(&query, reference, session.db(), Aggregate::Max),
            regret_avg: regret(&query, reference, session.db(), Aggregate::Avg),
        };
        on_iteration(&record);
        out.push(record);
        let ranked = simulated_rank(&query, reference.measure(), session.db());
        session.advance(ranked)?;
    }
    Ok(out)
}
