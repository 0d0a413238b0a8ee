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

//! Simulated-user experiments and their CSV output.

use std::io::{self, Write};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use divsample_core::session::{
    regret, simulated_rank, Aggregate, ReferenceSet, Session, SessionConfig, SessionError,
};
use divsample_core::TransactionDatabase;

pub const CSV_HEADER: &str = "iter,regret_max,regret_avg,cum_max,cum_avg,seconds";

/// The four systems are two independent switches: discriminating
/// sub-pattern learning and diversity-constrained sampling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Letsip,
    Disc,
    Cdf,
    DiscCdf,
}

impl Variant {
    pub fn disc(self) -> bool {
        matches!(self, Variant::Disc | Variant::DiscCdf)
    }

    pub fn cdf(self) -> bool {
        matches!(self, Variant::Cdf | Variant::DiscCdf)
    }

    pub fn apply(self, cfg: &mut SessionConfig) {
        cfg.disc = self.disc();
        cfg.cdf = self.cdf();
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Letsip => "letsip",
            Variant::Disc => "disc",
            Variant::Cdf => "cdf",
            Variant::DiscCdf => "disc-cdf",
        }
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "letsip" => Ok(Variant::Letsip),
            "disc" => Ok(Variant::Disc),
            "cdf" => Ok(Variant::Cdf),
            "disc-cdf" => Ok(Variant::DiscCdf),
            _ => Err(format!(
                "unknown variant {s:?} (letsip, disc, cdf, disc-cdf)"
            )),
        }
    }
}

/// One CSV row, averaged over repetitions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Row {
    pub iter: usize,
    pub regret_max: f64,
    pub regret_avg: f64,
    pub cum_max: f64,
    pub cum_avg: f64,
    pub seconds: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Step {
    regret_max: f64,
    regret_avg: f64,
    seconds: f64,
}

fn run_one(
    db: &Arc<TransactionDatabase>,
    cfg: SessionConfig,
    reference: &ReferenceSet,
    timings: bool,
) -> Result<Vec<Step>, SessionError> {
    let mut session = Session::new(db.clone(), cfg)?;
    let mut steps = Vec::with_capacity(cfg.iterations);
    while !session.is_finished() {
        let start = Instant::now();
        let query = session.next_query()?.to_vec();
        let ranked = simulated_rank(&query, reference.measure(), db);
        let regret_max = regret(&query, reference, db, Aggregate::Max);
        let regret_avg = regret(&query, reference, db, Aggregate::Avg);
        session.advance(ranked)?;
        let seconds = if timings {
            start.elapsed().as_secs_f64()
        } else {
            0.0
        };
        steps.push(Step {
            regret_max,
            regret_avg,
            seconds,
        });
    }
    Ok(steps)
}

/// Runs `repetitions` sessions with seeds `cfg.seed`, `cfg.seed + 1`, … in
/// parallel and averages them per iteration. Wall-clock seconds are only
/// measured when `timings` is set; otherwise the column is zero so the
/// output depends on the flags alone.
pub fn run_experiment(
    db: Arc<TransactionDatabase>,
    cfg: SessionConfig,
    reference: &ReferenceSet,
    repetitions: usize,
    timings: bool,
) -> Result<Vec<Row>, SessionError> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let seeds: Vec<u64> = (0..repetitions as u64)
        .map(|r| cfg.seed.wrapping_add(r))
        .collect();
    let mut results: Vec<Option<Result<Vec<Step>, SessionError>>> = vec![None; repetitions];
    for (chunk_seeds, chunk_out) in seeds.chunks(threads).zip(results.chunks_mut(threads)) {
        std::thread::scope(|scope| {
            for (&seed, slot) in chunk_seeds.iter().zip(chunk_out.iter_mut()) {
                let db = &db;
                scope.spawn(move || {
                    let mut c = cfg;
                    c.seed = seed;
                    *slot = Some(run_one(db, c, reference, timings));
                });
            }
        });
    }
    let runs: Vec<Vec<Step>> = results
        .into_iter()
        .map(|r| r.expect("every repetition ran"))
        .collect::<Result<_, _>>()?;
    Ok(average(&runs, cfg.iterations))
}

fn average(runs: &[Vec<Step>], iterations: usize) -> Vec<Row> {
    let n = runs.len().max(1) as f64;
    let (mut cum_max, mut cum_avg) = (0.0, 0.0);
    (0..iterations)
        .map(|t| {
            let mean = |f: fn(&Step) -> f64| runs.iter().map(|r| f(&r[t])).sum::<f64>() / n;
            let regret_max = mean(|s| s.regret_max);
            let regret_avg = mean(|s| s.regret_avg);
            cum_max += regret_max;
            cum_avg += regret_avg;
            Row {
                iter: t + 1,
                regret_max,
                regret_avg,
                cum_max,
                cum_avg,
                seconds: mean(|s| s.seconds),
            }
        })
        .collect()
}

pub fn write_csv<W: Write>(rows: &[Row], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{:.6},{:.6}",
            r.iter, r.regret_max, r.regret_avg, r.cum_max, r.cum_avg, r.seconds
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_switches() {
        assert!(!Variant::Letsip.disc() && !Variant::Letsip.cdf());
        assert!(Variant::Disc.disc() && !Variant::Disc.cdf());
        assert!(!Variant::Cdf.disc() && Variant::Cdf.cdf());
        assert!(Variant::DiscCdf.disc() && Variant::DiscCdf.cdf());
        for v in [
            Variant::Letsip,
            Variant::Disc,
            Variant::Cdf,
            Variant::DiscCdf,
        ] {
            assert_eq!(v.name().parse::<Variant>(), Ok(v));
        }
    }

    #[test]
    fn averaging_accumulates() {
        let s = |m, a| Step {
            regret_max: m,
            regret_avg: a,
            seconds: 0.0,
        };
        let runs = vec![
            vec![s(0.2, 0.4), s(0.0, 0.2)],
            vec![s(0.4, 0.6), s(0.2, 0.2)],
        ];
        let rows = average(&runs, 2);
        assert!((rows[0].regret_max - 0.3).abs() < 1e-12);
        assert!((rows[1].cum_max - 0.4).abs() < 1e-12);
        assert!((rows[1].cum_avg - 0.7).abs() < 1e-12);
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with(CSV_HEADER));
    }
}
