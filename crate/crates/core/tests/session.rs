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

mod common;

use std::sync::Arc;

use common::random_toy;
use divsample_core::session::{
    mine_reference_set, regret, simulate, simulated_rank, surprisingness, Aggregate, Measure,
    ReferenceSet, Session, SessionConfig, SessionError, DEFAULT_REFERENCE_CAP,
};
use divsample_core::{Itemset, Pattern, TransactionDatabase};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_db(seed: u64, n_items: usize, n_t: usize, density: f64) -> TransactionDatabase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t: Vec<Vec<usize>> = (0..n_t)
        .map(|_| (0..n_items).filter(|_| rng.random_bool(density)).collect())
        .collect();
    TransactionDatabase::from_transactions(&t, Some(n_items)).unwrap()
}

fn config(k: usize, ell: usize, iterations: usize, seed: u64) -> SessionConfig {
    SessionConfig::new(4, 0.3, k, ell, iterations, seed)
}

fn run_queries(db: &Arc<TransactionDatabase>, cfg: SessionConfig) -> Vec<Vec<Itemset>> {
    let mut s = Session::new(db.clone(), cfg).unwrap();
    let mut out = Vec::new();
    while !s.is_finished() {
        let q = s.next_query().unwrap().to_vec();
        out.push(q.iter().map(|p| p.itemset.clone()).collect());
        let r = simulated_rank(&q, Measure::Surprisingness, s.db());
        s.advance(r).unwrap();
    }
    out
}

#[test]
fn queries_have_size_k_and_retain_a_prefix() {
    let db = Arc::new(random_db(1, 12, 60, 0.4));
    for ell in [0, 1, 2] {
        let cfg = config(5, ell, 4, 9);
        let mut s = Session::new(db.clone(), cfg).unwrap();
        let mut prev_best: Vec<Itemset> = Vec::new();
        while !s.is_finished() {
            let before = s.example_count();
            let q = s.next_query().unwrap().to_vec();
            assert_eq!(q.len(), 5);
            let got: Vec<Itemset> = q
                .iter()
                .take(prev_best.len())
                .map(|p| p.itemset.clone())
                .collect();
            assert_eq!(got, prev_best);
            let r = simulated_rank(&q, Measure::Frequency, s.db());
            prev_best = r
                .best_first()
                .into_iter()
                .take(ell)
                .map(|p| p.itemset.clone())
                .collect();
            s.advance(r).unwrap();
            assert_eq!(s.example_count() - before, 10);
        }
        assert_eq!(s.iteration(), 5);
        assert_eq!(s.history().len(), 4);
    }
}

#[test]
fn first_query_is_all_fresh() {
    let db = Arc::new(random_db(2, 10, 50, 0.5));
    let mut s = Session::new(db, config(4, 1, 2, 0)).unwrap();
    let q = s.next_query().unwrap().to_vec();
    assert_eq!(q.len(), 4);
    assert!(s.history().is_empty());
}

#[test]
fn replay_is_deterministic() {
    let db = Arc::new(random_db(3, 12, 60, 0.4));
    for disc in [true, false] {
        let mut cfg = config(6, 1, 5, 42);
        cfg.disc = disc;
        assert_eq!(run_queries(&db, cfg), run_queries(&db, cfg));
    }
    let mut other = config(6, 1, 5, 43);
    other.disc = true;
    assert_ne!(
        run_queries(&db, config(6, 1, 5, 42)),
        run_queries(&db, other)
    );
}

#[test]
fn order_validation_and_lifecycle() {
    let db = Arc::new(random_db(4, 8, 40, 0.5));
    let mut s = Session::new(db, config(3, 1, 1, 5)).unwrap();
    assert_eq!(
        s.submit_order(&[0, 1, 2]),
        Err(SessionError::NoPendingQuery)
    );
    s.next_query().unwrap();
    assert_eq!(s.submit_order(&[0, 0, 1]), Err(SessionError::BadOrder(3)));
    assert_eq!(s.submit_order(&[0, 1]), Err(SessionError::BadOrder(3)));
    assert_eq!(s.submit_order(&[0, 1, 3]), Err(SessionError::BadOrder(3)));
    s.submit_order(&[2, 0, 1]).unwrap();
    assert!(s.is_finished());
    assert_eq!(s.history()[0].order, vec![2, 0, 1]);
    assert!(matches!(s.next_query(), Err(SessionError::Finished(1))));
}

#[test]
fn simulated_regret_is_bounded() {
    let db = Arc::new(random_db(5, 12, 60, 0.4));
    for measure in [Measure::Frequency, Measure::Surprisingness] {
        let reference = mine_reference_set(&db, 4, measure, DEFAULT_REFERENCE_CAP).unwrap();
        let records = simulate(db.clone(), config(5, 1, 6, 3), &reference, |_| {}).unwrap();
        assert_eq!(records.len(), 6);
        let (mut cm, mut ca) = (0.0, 0.0);
        for r in &records {
            assert!((0.0..=1.0).contains(&r.regret_max));
            assert!((0.0..=1.0).contains(&r.regret_avg));
            assert!(r.regret_max <= r.regret_avg + 1e-12);
            let (nm, na) = (cm + r.regret_max, ca + r.regret_avg);
            assert!(nm >= cm && na >= ca);
            (cm, ca) = (nm, na);
        }
    }
}

#[test]
fn reference_set_matches_power_set() {
    for seed in 0..60 {
        let toy = random_toy(seed);
        let db = toy.database();
        let freq =
            mine_reference_set(&db, toy.theta, Measure::Frequency, DEFAULT_REFERENCE_CAP).unwrap();
        let masks = toy.frequent();
        let n = toy.n_transactions() as f64;
        let mut expected: Vec<f64> = masks.iter().map(|&m| toy.support(m) as f64 / n).collect();
        expected.sort_by(f64::total_cmp);
        assert_eq!(freq.values(), expected.as_slice(), "seed {seed}");

        let surp = mine_reference_set(
            &db,
            toy.theta,
            Measure::Surprisingness,
            DEFAULT_REFERENCE_CAP,
        )
        .unwrap();
        assert_eq!(surp.len(), masks.len());
        for &m in &masks {
            let items: Vec<usize> = (0..toy.n_items).filter(|&i| m >> i & 1 == 1).collect();
            let p = db.pattern(Itemset::new(items)).unwrap();
            let v = surprisingness(&p, &db);
            // every frequent pattern's own value is present in the set
            assert!(surp.values().contains(&v), "seed {seed}");
        }
    }
}

#[test]
fn percentile_and_regret_match_linear_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let db = random_db(6, 9, 40, 0.45);
    let reference = mine_reference_set(&db, 3, Measure::Frequency, DEFAULT_REFERENCE_CAP).unwrap();
    for _ in 0..50 {
        let q: Vec<Pattern> = (0..4)
            .filter_map(|_| {
                let items: Vec<usize> = (0..9).filter(|_| rng.random_bool(0.25)).collect();
                db.pattern(Itemset::new(items))
                    .ok()
                    .filter(|p| !p.is_empty() && p.support >= 3)
            })
            .collect();
        if q.is_empty() {
            continue;
        }
        let pct: Vec<f64> = q
            .iter()
            .map(|p| {
                let v = db.rel_freq(p);
                reference.values().iter().filter(|&&x| x <= v).count() as f64
                    / reference.len() as f64
            })
            .collect();
        for (p, e) in q.iter().zip(&pct) {
            assert_eq!(reference.percentile_rank(p, &db), *e);
        }
        let max = pct.iter().cloned().fold(0.0, f64::max);
        let avg = pct.iter().sum::<f64>() / pct.len() as f64;
        assert_eq!(regret(&q, &reference, &db, Aggregate::Max), 1.0 - max);
        assert!((regret(&q, &reference, &db, Aggregate::Avg) - (1.0 - avg)).abs() < 1e-12);
    }
    let best = ReferenceSet::from_values(Measure::Frequency, vec![0.5; 4]);
    assert_eq!(best.percentile_of(0.5), 1.0);
}
