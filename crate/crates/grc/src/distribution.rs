//! Run-length distributions: how many draws a whole run takes.
//!
//! Stage draw counts are independent geometrics, so the total is their
//! convolution. With equal stage probabilities that is exactly the
//! negative binomial shifted to start at M; for arbitrary profiles the
//! convolution is built numerically with an O(support) recurrence per
//! stage and truncated once the captured mass reaches 1 - epsilon.

use crate::combinatorics::ln_binomial_raw;
use crate::cost::StageProfile;
use crate::error::{Error, Result};

/// Compensated (Kahan) accumulator; tail sums add thousands of terms
/// spanning many orders of magnitude.
#[derive(Debug, Clone, Copy, Default)]
struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    fn add(&mut self, value: f64) {
        let y = value - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum
    }
}

/// PMF of the total draw count over `stages` equal-probability stages:
/// P(X = x) = C(x-1, stages-1) (1-p)^(x-stages) p^stages for x >= stages,
/// zero below the support.
pub fn negbin_pmf(stages: u64, p: f64, x: u64) -> Result<f64> {
    check_negbin_args(stages, p)?;
    if x < stages {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(if x == stages { 1.0 } else { 0.0 });
    }
    let ln_pmf = ln_binomial_raw((x - 1) as f64, (stages - 1) as f64)
        + (x - stages) as f64 * (-p).ln_1p()
        + stages as f64 * p.ln();
    Ok(ln_pmf.exp())
}

/// Tail probability P(X > threshold) for the equal-probability run length.
/// Computed as 1 minus the compensated partial sum, with each term derived
/// from its predecessor by the ratio x (1-p) / (x - stages + 1), so no
/// binomial coefficient ever materializes.
pub fn negbin_tail(stages: u64, p: f64, threshold: u64) -> Result<f64> {
    check_negbin_args(stages, p)?;
    if threshold < stages {
        return Ok(1.0);
    }
    if p == 1.0 {
        return Ok(0.0);
    }
    let ln_q = (-p).ln_1p();
    let mut ln_term = stages as f64 * p.ln();
    let mut below = KahanSum::default();
    below.add(ln_term.exp());
    for x in stages..threshold {
        // term(x+1) = term(x) * (1-p) x / (x - stages + 1)
        ln_term += ln_q + (x as f64).ln() - ((x - stages + 1) as f64).ln();
        below.add(ln_term.exp());
    }
    Ok((1.0 - below.value()).max(0.0))
}

fn check_negbin_args(stages: u64, p: f64) -> Result<()> {
    if stages == 0 {
        return Err(Error::Domain(
            "negative binomial requires stages >= 1".into(),
        ));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Domain(format!(
            "success probability must lie in (0, 1], got {p}"
        )));
    }
    Ok(())
}

/// The exact distribution of the total draw count for an arbitrary stage
/// profile, truncated once cumulative mass reaches 1 - epsilon.
#[derive(Debug, Clone, PartialEq)]
pub struct RunLengthDistribution {
    min_support: u64,
    pmf: Vec<f64>,
    truncation_mass: f64,
}

impl RunLengthDistribution {
    /// Smallest attainable run length; equals the stage count.
    pub fn min_support(&self) -> u64 {
        self.min_support
    }

    /// Largest retained run length.
    pub fn max_support(&self) -> u64 {
        self.min_support + self.pmf.len() as u64 - 1
    }

    /// Probabilities for x = min_support ..= max_support.
    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn pmf_at(&self, x: u64) -> f64 {
        if x < self.min_support || x > self.max_support() {
            return 0.0;
        }
        self.pmf[(x - self.min_support) as usize]
    }

    /// Mass beyond the retained support, at most the epsilon given to
    /// `exact_run_length`.
    pub fn truncation_mass(&self) -> f64 {
        self.truncation_mass
    }

    /// Mean of the retained mass; undershoots the true expectation by at
    /// most the truncated tail's contribution.
    pub fn mean(&self) -> f64 {
        let mut acc = KahanSum::default();
        for (j, &p) in self.pmf.iter().enumerate() {
            acc.add((self.min_support + j as u64) as f64 * p);
        }
        acc.value()
    }
}

const SUPPORT_LIMIT: usize = 1 << 26;

/// Convolve the per-stage geometric distributions of `profile` until the
/// cumulative mass reaches 1 - epsilon.
///
/// Stage j maps a partial distribution f to (f * geom(p_j)) via
/// g(x) = (1 - p_j) g(x - 1) + p_j f(x - 1),
/// one multiply-add per support point, all terms nonnegative.
pub fn exact_run_length(profile: &StageProfile, epsilon: f64) -> Result<RunLengthDistribution> {
    let m = profile.stage_count();
    if m == 0 {
        return Err(Error::Domain(
            "run-length distribution requires at least one stage".into(),
        ));
    }
    if !(epsilon > 0.0 && epsilon <= 0.01) {
        return Err(Error::Domain(format!(
            "epsilon must lie in (0, 0.01], got {epsilon}"
        )));
    }
    let probs = profile.probabilities();

    // First support guess: mean plus a dozen standard deviations.
    let mean: f64 = profile.expected_trials().iter().sum();
    let std = probs
        .iter()
        .map(|&p| (1.0 - p) / (p * p))
        .sum::<f64>()
        .sqrt();
    let mut cap = (mean + 12.0 * std).ceil() as usize + m + 64;

    while cap <= SUPPORT_LIMIT {
        let pmf = convolve(probs, cap);
        // Walk the cumulative mass; stop at the first point past 1 - eps.
        let mut mass = KahanSum::default();
        for (x, &value) in pmf.iter().enumerate().skip(m) {
            mass.add(value);
            if mass.value() >= 1.0 - epsilon {
                return Ok(RunLengthDistribution {
                    min_support: m as u64,
                    pmf: pmf[m..=x].to_vec(),
                    truncation_mass: (1.0 - mass.value()).max(0.0),
                });
            }
        }
        cap *= 2;
    }
    Err(Error::SupportLimit {
        limit: SUPPORT_LIMIT,
        epsilon,
    })
}

fn convolve(probs: &[f64], cap: usize) -> Vec<f64> {
    let mut prev = vec![0.0f64; cap + 1];
    let mut cur = vec![0.0f64; cap + 1];
    prev[0] = 1.0;
    for (j, &p) in probs.iter().enumerate() {
        let q = 1.0 - p;
        cur.fill(0.0);
        for x in (j + 1)..=cap {
            cur[x] = q * cur[x - 1] + p * prev[x - 1];
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev
}
