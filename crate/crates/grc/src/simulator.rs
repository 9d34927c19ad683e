//! Monte Carlo simulation of the subset-guessing game.
//!
//! Each run plays one full game: a secret k-subset is drawn, then every
//! stage repeatedly samples uniform subsets of the current pool until one
//! contains the whole secret. Run r derives its generator from the user
//! seed and stream index r, so results are independent of thread count
//! and schedule order: run counts land in a histogram keyed by total
//! draws, and the merge of histograms is commutative.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::schedule::{IntegerSchedule, Problem, StageSchedule};

/// Bail out if a single stage ever needs this many draws; with a valid
/// schedule/oracle pair the expected count is finite and vastly smaller.
pub const STAGE_DRAW_GUARD: u64 = 10_000_000_000;

/// The hidden target subset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameOracle {
    n0: u64,
    secret: Vec<u32>,
}

impl GameOracle {
    /// `secret` must hold distinct elements of 1..=n0.
    pub fn new(n0: u64, secret: Vec<u32>) -> Result<Self> {
        if n0 == 0 || n0 > u32::MAX as u64 {
            return Err(Error::Domain(format!(
                "simulation ground set must have 1..=u32::MAX elements, got {n0}"
            )));
        }
        let mut seen = vec![false; n0 as usize + 1];
        for &s in &secret {
            if s == 0 || s as u64 > n0 || seen[s as usize] {
                return Err(Error::Domain(format!(
                    "secret must consist of distinct elements of 1..={n0}"
                )));
            }
            seen[s as usize] = true;
        }
        Ok(GameOracle { n0, secret })
    }

    /// Draw a uniform k-subset of 1..=n0 as the secret.
    pub fn random<R: Rng + ?Sized>(problem: Problem, rng: &mut R) -> Result<Self> {
        if problem.n0() > u32::MAX as u64 {
            return Err(Error::Domain(format!(
                "simulation ground set must fit in u32, got n0 = {}",
                problem.n0()
            )));
        }
        let ground: Vec<u32> = (1..=problem.n0() as u32).collect();
        let secret = uniform_subset(&ground, problem.k() as usize, rng)?;
        Ok(GameOracle {
            n0: problem.n0(),
            secret,
        })
    }

    pub fn n0(&self) -> u64 {
        self.n0
    }

    pub fn secret(&self) -> &[u32] {
        &self.secret
    }
}

/// One played game.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunRecord {
    pub total_selections: u64,
    pub per_stage_selections: Vec<u64>,
}

/// Aggregate over many runs.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub run_count: u64,
    pub seed: u64,
    pub mean: f64,
    pub sample_variance: f64,
    /// Total draw count -> number of runs.
    pub histogram: BTreeMap<u64, u64>,
}

/// Shuffle a uniform `size`-prefix into `buf` (partial Fisher-Yates).
fn shuffle_prefix<R: Rng + ?Sized>(buf: &mut [u32], size: usize, rng: &mut R) {
    for j in 0..size {
        let pick = rng.random_range(j..buf.len());
        buf.swap(j, pick);
    }
}

/// A uniform random `size`-subset of `parent`.
pub fn uniform_subset<R: Rng + ?Sized>(
    parent: &[u32],
    size: usize,
    rng: &mut R,
) -> Result<Vec<u32>> {
    if size > parent.len() {
        return Err(Error::Domain(format!(
            "cannot draw {size} elements from a pool of {}",
            parent.len()
        )));
    }
    let mut buf = parent.to_vec();
    shuffle_prefix(&mut buf, size, rng);
    buf.truncate(size);
    Ok(buf)
}

/// Play one game to completion and count draws per stage.
pub fn run_once<R: Rng + ?Sized>(
    schedule: &IntegerSchedule,
    oracle: &GameOracle,
    rng: &mut R,
) -> Result<RunRecord> {
    let problem = schedule.problem();
    if oracle.n0() != problem.n0() || oracle.secret().len() as u64 != problem.k() {
        return Err(Error::Domain(
            "oracle does not match the schedule's instance".into(),
        ));
    }
    let k = problem.k() as usize;
    let mut is_secret = vec![false; problem.n0() as usize + 1];
    for &s in oracle.secret() {
        is_secret[s as usize] = true;
    }

    let mut pool: Vec<u32> = (1..=problem.n0() as u32).collect();
    let mut scratch: Vec<u32> = Vec::with_capacity(pool.len());
    let mut per_stage = Vec::with_capacity(schedule.stage_count());
    let mut total = 0u64;
    for (stage, &target) in schedule.sizes().iter().enumerate() {
        let target = target as usize;
        let mut draws = 0u64;
        loop {
            draws += 1;
            if draws > STAGE_DRAW_GUARD {
                return Err(Error::DrawGuard {
                    stage: stage + 1,
                    draws: STAGE_DRAW_GUARD,
                });
            }
            scratch.clear();
            scratch.extend_from_slice(&pool);
            shuffle_prefix(&mut scratch, target, rng);
            let hits = scratch[..target]
                .iter()
                .filter(|&&e| is_secret[e as usize])
                .count();
            if hits == k {
                pool = scratch[..target].to_vec();
                break;
            }
        }
        total += draws;
        per_stage.push(draws);
    }
    Ok(RunRecord {
        total_selections: total,
        per_stage_selections: per_stage,
    })
}

/// Derive the generator for one run: same seed, per-run stream index.
fn run_rng(seed: u64, run: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run);
    rng
}

/// Simulate `run_count` independent games, each with a freshly drawn
/// secret. The result depends only on (schedule, run_count, seed), not on
/// thread count: runs are keyed by stream index and the histogram merge
/// commutes.
pub fn simulate(schedule: &IntegerSchedule, run_count: u64, seed: u64) -> Result<SimulationReport> {
    if run_count == 0 {
        return Err(Error::Domain("run count must be at least 1".into()));
    }
    let problem = schedule.problem();
    if problem.n0() > u32::MAX as u64 {
        return Err(Error::Domain(format!(
            "simulation ground set must fit in u32, got n0 = {}",
            problem.n0()
        )));
    }

    let histogram = (0..run_count)
        .into_par_iter()
        .map(|run| {
            let mut rng = run_rng(seed, run);
            let oracle = GameOracle::random(problem, &mut rng)?;
            run_once(schedule, &oracle, &mut rng).map(|rec| rec.total_selections)
        })
        .try_fold(BTreeMap::new, |mut acc: BTreeMap<u64, u64>, total| {
            *acc.entry(total?).or_insert(0) += 1;
            Ok::<_, Error>(acc)
        })
        .try_reduce(BTreeMap::new, |mut left, right| {
            for (key, count) in right {
                *left.entry(key).or_insert(0) += count;
            }
            Ok(left)
        })?;

    let n = run_count as f64;
    let mut weighted = 0.0;
    for (&x, &count) in &histogram {
        weighted += x as f64 * count as f64;
    }
    let mean = weighted / n;
    let mut squares = 0.0;
    for (&x, &count) in &histogram {
        let d = x as f64 - mean;
        squares += count as f64 * d * d;
    }
    let sample_variance = if run_count > 1 {
        squares / (n - 1.0)
    } else {
        0.0
    };

    Ok(SimulationReport {
        run_count,
        seed,
        mean,
        sample_variance,
        histogram,
    })
}
