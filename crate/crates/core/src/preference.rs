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

//! Pattern features, the logistic quality function and its learner, and the
//! discriminating sub-pattern machinery.
//!
//! Feature vectors are laid out as `items ‖ transactions ‖ length ‖
//! frequency`, each block present only when enabled. The augmented layout
//! appends three discriminating-pattern slots (presence, frequency, size)
//! that exist only while weights are being learned.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::data::{Itemset, Pattern, TransactionDatabase};

pub type FeatureVector = Vec<f64>;
pub type WeightVector = Vec<f64>;

/// Number of temporary discriminating-pattern slots.
pub const DISC_SLOTS: usize = 3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PreferenceError {
    #[error("unknown feature set {0:?} (expected letters from I, T, L, F)")]
    UnknownFeature(char),
    #[error("eta {0} outside (0, 0.5]")]
    Eta(f64),
    #[error("ranking is not a permutation of 1..={0}")]
    BadRanking(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FeatureSets {
    pub items: bool,
    pub transactions: bool,
    pub length: bool,
    pub frequency: bool,
}

impl FeatureSets {
    pub const ALL: FeatureSets = FeatureSets {
        items: true,
        transactions: true,
        length: true,
        frequency: true,
    };

    /// Parses letter codes such as `I`, `IT` or `ILFT`.
    pub fn parse(code: &str) -> Result<Self, PreferenceError> {
        let mut sets = FeatureSets {
            items: false,
            transactions: false,
            length: false,
            frequency: false,
        };
        for c in code.chars() {
            match c.to_ascii_uppercase() {
                'I' => sets.items = true,
                'T' => sets.transactions = true,
                'L' => sets.length = true,
                'F' => sets.frequency = true,
                other => return Err(PreferenceError::UnknownFeature(other)),
            }
        }
        Ok(sets)
    }
}

impl fmt::Display for FeatureSets {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (on, c) in [
            (self.items, "I"),
            (self.transactions, "T"),
            (self.length, "L"),
            (self.frequency, "F"),
        ] {
            if on {
                f.write_str(c)?;
            }
        }
        Ok(())
    }
}

/// Slot offsets of the enabled feature blocks for one database.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FeatureLayout {
    sets: FeatureSets,
    n_items: usize,
    n_transactions: usize,
}

impl FeatureLayout {
    pub fn new(sets: FeatureSets, db: &TransactionDatabase) -> Self {
        FeatureLayout {
            sets,
            n_items: db.n_items(),
            n_transactions: db.n_transactions(),
        }
    }

    pub fn sets(&self) -> FeatureSets {
        self.sets
    }

    pub fn items_offset(&self) -> Option<usize> {
        self.sets.items.then_some(0)
    }

    pub fn transactions_offset(&self) -> Option<usize> {
        self.sets
            .transactions
            .then_some(if self.sets.items { self.n_items } else { 0 })
    }

    fn after_transactions(&self) -> usize {
        usize::from(self.sets.items) * self.n_items
            + usize::from(self.sets.transactions) * self.n_transactions
    }

    pub fn length_offset(&self) -> Option<usize> {
        self.sets.length.then_some(self.after_transactions())
    }

    pub fn frequency_offset(&self) -> Option<usize> {
        self.sets
            .frequency
            .then_some(self.after_transactions() + usize::from(self.sets.length))
    }

    /// Width without the discriminating slots.
    pub fn width(&self) -> usize {
        self.after_transactions() + usize::from(self.sets.length) + usize::from(self.sets.frequency)
    }

    /// Offset of the discriminating triple in an augmented vector.
    pub fn disc_offset(&self) -> usize {
        self.width()
    }

    pub fn augmented_width(&self) -> usize {
        self.width() + DISC_SLOTS
    }

    pub fn item_slot(&self, item: usize) -> Option<usize> {
        self.items_offset().map(|o| o + item)
    }

    pub fn transaction_slot(&self, t: usize) -> Option<usize> {
        self.transactions_offset().map(|o| o + t)
    }
}

pub fn extract_features(
    p: &Pattern,
    db: &TransactionDatabase,
    layout: &FeatureLayout,
) -> FeatureVector {
    let mut f = vec![0.0; layout.width()];
    if let Some(o) = layout.items_offset() {
        for i in p.itemset.iter() {
            f[o + i] = 1.0;
        }
    }
    if let Some(o) = layout.transactions_offset() {
        for t in p.cover.ones() {
            f[o + t] = 1.0;
        }
    }
    if let Some(o) = layout.length_offset() {
        f[o] = p.len() as f64 / db.n_items() as f64;
    }
    if let Some(o) = layout.frequency_offset() {
        f[o] = db.rel_freq(p);
    }
    f
}

/// `(discPatt, discFreq, discSize)` of `p` for the discriminating pattern.
pub fn disc_features(p: &Pattern, p_disc: &Itemset, db: &TransactionDatabase) -> [f64; DISC_SLOTS] {
    if !p_disc.is_subset(&p.itemset) {
        return [0.0; DISC_SLOTS];
    }
    let support = db.cover_of(p_disc).map_or(0, |c| c.support());
    [
        1.0,
        support as f64 / db.n_transactions() as f64,
        p_disc.len() as f64 / db.n_items() as f64,
    ]
}

/// Base features with the discriminating triple appended.
pub fn augmented_features(
    p: &Pattern,
    p_disc: &Itemset,
    db: &TransactionDatabase,
    layout: &FeatureLayout,
) -> FeatureVector {
    let mut f = extract_features(p, db, layout);
    f.extend_from_slice(&disc_features(p, p_disc, db));
    f
}

/// A query with the user's total order; rank 1 is best.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankedQuery {
    patterns: Vec<Pattern>,
    ranks: Vec<usize>,
}

impl RankedQuery {
    pub fn new(patterns: Vec<Pattern>, ranks: Vec<usize>) -> Result<Self, PreferenceError> {
        let k = patterns.len();
        let mut seen = vec![false; k];
        if ranks.len() != k {
            return Err(PreferenceError::BadRanking(k));
        }
        for &r in &ranks {
            if r == 0 || r > k || seen[r - 1] {
                return Err(PreferenceError::BadRanking(k));
            }
            seen[r - 1] = true;
        }
        Ok(RankedQuery { patterns, ranks })
    }

    /// Patterns listed best first.
    pub fn from_order(best_first: Vec<Pattern>) -> Self {
        let ranks = (1..=best_first.len()).collect();
        RankedQuery {
            patterns: best_first,
            ranks,
        }
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    /// Pattern indices sorted best first.
    pub fn order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by_key(|&i| self.ranks[i]);
        idx
    }

    pub fn best_first(&self) -> Vec<&Pattern> {
        self.order()
            .into_iter()
            .map(|i| &self.patterns[i])
            .collect()
    }

    fn mean_rank(&self) -> f64 {
        self.ranks.iter().sum::<usize>() as f64 / self.len() as f64
    }
}

/// `F_i − F_j` for every pair ranked `i ≻ j`; `features[i]` belongs to
/// `q.patterns()[i]`.
pub fn pairwise_examples(q: &RankedQuery, features: &[FeatureVector]) -> Vec<FeatureVector> {
    let order = q.order();
    let mut out = Vec::with_capacity(order.len() * order.len().saturating_sub(1) / 2);
    for (a, &i) in order.iter().enumerate() {
        for &j in &order[a + 1..] {
            out.push(
                features[i]
                    .iter()
                    .zip(&features[j])
                    .map(|(x, y)| x - y)
                    .collect(),
            );
        }
    }
    out
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// `A + (1 − A) / (1 + e^{−w·F})`, confined to `[A, 1]`.
pub fn phi_logistic(features: &[f64], weights: &[f64], range: f64) -> f64 {
    range + (1.0 - range) * sigmoid(dot(features, weights))
}

/// Gradient of [`phi_logistic`] with respect to the weights.
pub fn phi_logistic_gradient(features: &[f64], weights: &[f64], range: f64) -> Vec<f64> {
    let s = sigmoid(dot(features, weights));
    let scale = (1.0 - range) * s * (1.0 - s);
    features.iter().map(|f| scale * f).collect()
}

pub trait WeightLearner {
    /// Weights for positive difference examples, starting at `warm_start`.
    fn learn(&self, examples: &[FeatureVector], warm_start: &[f64]) -> WeightVector;
}

/// Full-batch gradient descent on the mean logistic loss of the positive
/// examples plus `λ/2 ‖w‖²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogisticGradientDescent {
    pub lambda: f64,
    pub steps: usize,
}

impl LogisticGradientDescent {
    pub fn new(lambda: f64) -> Self {
        LogisticGradientDescent { lambda, steps: 200 }
    }

    pub fn loss(&self, examples: &[FeatureVector], w: &[f64]) -> f64 {
        let n = examples.len().max(1) as f64;
        let data: f64 = examples
            .iter()
            .map(|x| {
                let z = dot(w, x);
                // log(1 + e^{-z}) without overflow
                if z > 0.0 {
                    libm::log1p(libm::exp(-z))
                } else {
                    -z + libm::log1p(libm::exp(z))
                }
            })
            .sum();
        data / n + 0.5 * self.lambda * dot(w, w)
    }

    pub fn gradient(&self, examples: &[FeatureVector], w: &[f64]) -> Vec<f64> {
        let n = examples.len().max(1) as f64;
        let mut g: Vec<f64> = w.iter().map(|wi| self.lambda * wi).collect();
        for x in examples {
            let coef = -sigmoid(-dot(w, x)) / n;
            for (gi, xi) in g.iter_mut().zip(x) {
                *gi += coef * xi;
            }
        }
        g
    }
}

impl WeightLearner for LogisticGradientDescent {
    fn learn(&self, examples: &[FeatureVector], warm_start: &[f64]) -> WeightVector {
        let mut w = warm_start.to_vec();
        if examples.is_empty() {
            return w;
        }
        let step = 0.5 / (1.0 + self.lambda * examples.len() as f64);
        for _ in 0..self.steps {
            let g = self.gradient(examples, &w);
            for (wi, gi) in w.iter_mut().zip(&g) {
                *wi -= step * gi;
            }
        }
        w
    }
}

/// Interclass variance of the split of `q` by containment of `y`.
pub fn icv(y: &Itemset, q: &RankedQuery) -> f64 {
    let mu = q.mean_rank();
    let (mut n_in, mut sum_in, mut sum_out) = (0usize, 0usize, 0usize);
    for (p, &r) in q.patterns.iter().zip(&q.ranks) {
        if y.is_subset(&p.itemset) {
            n_in += 1;
            sum_in += r;
        } else {
            sum_out += r;
        }
    }
    let n_out = q.len() - n_in;
    let term = |n: usize, sum: usize| {
        if n == 0 {
            0.0
        } else {
            let d = mu - sum as f64 / n as f64;
            n as f64 * d * d
        }
    };
    term(n_in, sum_in) + term(n_out, sum_out)
}

/// The discriminating sub-pattern and its interclass variance.
///
/// Single items are scored first (ties go to the later item). Tracked
/// sub-patterns are then grown one item at a time, only while the result
/// stays inside some query pattern, and every strict improvement joins the
/// pool of sub-patterns to grow.
pub fn learn_discriminating_pattern(q: &RankedQuery) -> (Itemset, f64) {
    let all_items: Vec<usize> = q
        .patterns
        .iter()
        .flat_map(|p| p.itemset.iter())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut best = Itemset::empty();
    let mut best_icv = 0.0;
    let mut pool: Vec<Itemset> = Vec::with_capacity(all_items.len());
    for &item in &all_items {
        let y = Itemset::from([item]);
        let v = icv(&y, q);
        if v >= best_icv {
            best_icv = v;
            best = y.clone();
        }
        pool.push(y);
    }
    let mut next = 0;
    while next < pool.len() {
        let elt = pool[next].clone();
        next += 1;
        for &item in &all_items {
            if elt.contains(item) {
                continue;
            }
            let candidate = elt.with(item);
            if !q.patterns.iter().any(|p| candidate.is_subset(&p.itemset)) {
                continue;
            }
            let v = icv(&candidate, q);
            if v > best_icv {
                best_icv = v;
                best = candidate.clone();
                pool.push(candidate);
            }
        }
    }
    (best, best_icv)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AggregationKind {
    Linear,
    Exponential,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AggregationConfig {
    kind: AggregationKind,
    eta: f64,
}

impl AggregationConfig {
    pub fn new(kind: AggregationKind, eta: f64) -> Result<Self, PreferenceError> {
        if !(eta > 0.0 && eta <= 0.5) {
            return Err(PreferenceError::Eta(eta));
        }
        Ok(AggregationConfig { kind, eta })
    }

    pub fn kind(&self) -> AggregationKind {
        self.kind
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `1 + ηm` or `e^{ηm}`.
    pub fn factor(&self, m: f64) -> f64 {
        match self.kind {
            AggregationKind::Linear => 1.0 + self.eta * m,
            AggregationKind::Exponential => libm::exp(self.eta * m),
        }
    }
}

/// Folds the learned discriminating weights `(patt, freq, size)` back onto
/// the base weights: items of `p_disc` and transactions of its cover scale
/// by `Φ(patt)`, frequency by `Φ(freq)`, length by `Φ(size)`.
pub fn aggregate_weights(
    base: &[f64],
    disc: [f64; DISC_SLOTS],
    p_disc: &Itemset,
    query: &[Pattern],
    db: &TransactionDatabase,
    layout: &FeatureLayout,
    agg: &AggregationConfig,
) -> WeightVector {
    let mut w = base.to_vec();
    if p_disc.is_empty() || !query.iter().any(|p| p_disc.is_subset(&p.itemset)) {
        return w;
    }
    let [patt, freq, size] = disc;
    let patt_factor = agg.factor(patt);
    for i in p_disc.iter() {
        if let Some(s) = layout.item_slot(i) {
            w[s] *= patt_factor;
        }
    }
    if layout.transactions_offset().is_some() {
        if let Ok(cover) = db.cover_of(p_disc) {
            for t in cover.ones() {
                if let Some(s) = layout.transaction_slot(t) {
                    w[s] *= patt_factor;
                }
            }
        }
    }
    if let Some(s) = layout.frequency_offset() {
        w[s] *= agg.factor(freq);
    }
    if let Some(s) = layout.length_offset() {
        w[s] *= agg.factor(size);
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_offsets() {
        let db = TransactionDatabase::parse_cp4im("0 1\n2\n1\n").unwrap();
        let all = FeatureLayout::new(FeatureSets::ALL, &db);
        assert_eq!(all.width(), 3 + 3 + 2);
        assert_eq!(all.transactions_offset(), Some(3));
        assert_eq!(all.length_offset(), Some(6));
        assert_eq!(all.frequency_offset(), Some(7));
        assert_eq!(all.disc_offset(), 8);
        assert_eq!(all.augmented_width(), 11);
        let if_only = FeatureLayout::new(FeatureSets::parse("IF").unwrap(), &db);
        assert_eq!(if_only.width(), 4);
        assert_eq!(if_only.frequency_offset(), Some(3));
        assert_eq!(if_only.length_offset(), None);
        let t = FeatureLayout::new(FeatureSets::parse("t").unwrap(), &db);
        assert_eq!(t.transactions_offset(), Some(0));
        assert_eq!(FeatureSets::parse("ILFT").unwrap(), FeatureSets::ALL);
        assert_eq!(
            FeatureSets::parse("IX"),
            Err(PreferenceError::UnknownFeature('X'))
        );
        assert_eq!(alloc::format!("{}", FeatureSets::ALL), "ITLF");
    }

    #[test]
    fn empty_layout_is_zero_width() {
        let db = TransactionDatabase::parse_cp4im("0 1\n").unwrap();
        let layout = FeatureLayout::new(FeatureSets::parse("").unwrap(), &db);
        let p = db.pattern(Itemset::from([0])).unwrap();
        assert!(extract_features(&p, &db, &layout).is_empty());
    }

    #[test]
    fn phi_at_zero_weights() {
        assert_eq!(phi_logistic(&[1.0, 2.0], &[0.0, 0.0], 0.1), 0.55);
        assert!((phi_logistic(&[1.0], &[1e3], 0.1) - 1.0).abs() < 1e-12);
        assert!((phi_logistic(&[1.0], &[-1e3], 0.1) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn aggregation_factor_identity_at_zero() {
        for kind in [AggregationKind::Linear, AggregationKind::Exponential] {
            let agg = AggregationConfig::new(kind, 0.3).unwrap();
            assert_eq!(agg.factor(0.0), 1.0);
        }
        assert_eq!(
            AggregationConfig::new(AggregationKind::Linear, 0.0),
            Err(PreferenceError::Eta(0.0))
        );
        assert!(AggregationConfig::new(AggregationKind::Linear, 0.5).is_ok());
        assert!(AggregationConfig::new(AggregationKind::Linear, 0.51).is_err());
    }

    #[test]
    fn ranked_query_validation() {
        let db = TransactionDatabase::parse_cp4im("0 1\n").unwrap();
        let p = db.pattern(Itemset::from([0])).unwrap();
        let q = db.pattern(Itemset::from([1])).unwrap();
        assert!(RankedQuery::new(vec![p.clone(), q.clone()], vec![2, 1]).is_ok());
        assert_eq!(
            RankedQuery::new(vec![p.clone(), q.clone()], vec![1, 1]),
            Err(PreferenceError::BadRanking(2))
        );
        assert!(RankedQuery::new(vec![p, q], vec![0, 1]).is_err());
    }

    #[test]
    fn single_example_gradient_support() {
        let learner = LogisticGradientDescent::new(0.001);
        let w = learner.learn(&[vec![0.0, 1.0, 0.0]], &[0.0, 0.0, 0.0]);
        assert!(w[1] > 0.0);
        assert_eq!(w[0], 0.0);
        assert_eq!(w[2], 0.0);
    }
}
