//! Cost analysis of schedules.
//!
//! Stage i succeeds with probability
//! p_i = C(n_{i-1} - k, n_i - k) / C(n_{i-1}, n_i),
//! the chance that a uniform n_i-subset of the current winner contains all
//! k target elements. Stages are geometric, so the expected number of
//! draws is sum 1/p_i and the variance is sum (1 - p_i)/p_i^2. All float
//! work stays on the log scale until individual stage terms are
//! exponentiated; an exact big-rational path backs it for cross-checks.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::combinatorics::{exact_binomial, ln_binomial_raw, EXACT_LIMIT};
use crate::error::{Error, Result};
use crate::schedule::{IntegerSchedule, Problem, StageSchedule};

/// Per-stage success probabilities and expected draw counts.
#[derive(Debug, Clone, PartialEq)]
pub struct StageProfile {
    probabilities: Vec<f64>,
    expected_trials: Vec<f64>,
}

impl StageProfile {
    /// Build a profile from raw probabilities, each in (0, 1]. Useful for
    /// synthetic profiles such as the equal-p reference.
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        for &p in &probabilities {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::Domain(format!(
                    "stage probabilities must lie in (0, 1], got {p}"
                )));
            }
        }
        let expected_trials = probabilities.iter().map(|&p| 1.0 / p).collect();
        Ok(StageProfile {
            probabilities,
            expected_trials,
        })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn expected_trials(&self) -> &[f64] {
        &self.expected_trials
    }

    pub fn stage_count(&self) -> usize {
        self.probabilities.len()
    }
}

/// Totals for a whole schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct CostSummary {
    pub expected_total: f64,
    pub variance_total: f64,
    /// Running sum of expected draws after each stage; the last entry
    /// equals `expected_total`.
    pub per_stage_cumulative: Vec<f64>,
}

/// Success probability of a single stage that shrinks a pool of size
/// `n_prev` to a subset of size `n_next` while keeping all `k` targets.
pub fn stage_probability(n_prev: f64, n_next: f64, k: f64) -> Result<f64> {
    if !(n_prev.is_finite() && n_next.is_finite() && k.is_finite())
        || k < 0.0
        || n_next < k
        || n_prev <= n_next
    {
        return Err(Error::Domain(format!(
            "stage probability requires n_prev > n_next >= k >= 0, got \
             n_prev = {n_prev}, n_next = {n_next}, k = {k}"
        )));
    }
    Ok((ln_binomial_raw(n_prev - k, n_next - k) - ln_binomial_raw(n_prev, n_next)).exp())
}

/// Per-stage log of 1/p_i; the schedule invariants keep the arguments in
/// domain.
fn stage_log_inverse<S: StageSchedule>(schedule: &S) -> Vec<f64> {
    let k = schedule.problem().k() as f64;
    let mut prev = schedule.problem().n0() as f64;
    (0..schedule.stage_count())
        .map(|i| {
            let next = schedule.size_at(i);
            let log_inv = ln_binomial_raw(prev, next) - ln_binomial_raw(prev - k, next - k);
            prev = next;
            log_inv
        })
        .collect()
}

pub fn stage_profile<S: StageSchedule>(schedule: &S) -> StageProfile {
    let log_inv = stage_log_inverse(schedule);
    StageProfile {
        probabilities: log_inv.iter().map(|&w| (-w).exp()).collect(),
        expected_trials: log_inv.iter().map(|&w| w.exp()).collect(),
    }
}

pub fn expected_cost<S: StageSchedule>(schedule: &S) -> CostSummary {
    let log_inv = stage_log_inverse(schedule);
    let mut cumulative = Vec::with_capacity(log_inv.len());
    let mut total = 0.0;
    let mut variance = 0.0;
    for &w in &log_inv {
        let inv_p = w.exp();
        total += inv_p;
        // (1 - p)/p^2 = (1/p)^2 - 1/p, no cancellation since 1/p >= 1.
        variance += inv_p * inv_p - inv_p;
        cumulative.push(total);
    }
    CostSummary {
        expected_total: total,
        variance_total: variance,
        per_stage_cumulative: cumulative,
    }
}

/// The continuum optimum for an instance: m_real = ln C(n0, k) stages with
/// total expected cost e ln C(n0, k).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoreticalOptimum {
    pub m_real: f64,
    pub expected: f64,
}

pub fn theoretical_optimum(problem: Problem) -> Result<TheoreticalOptimum> {
    if problem.k() == problem.n0() {
        return Err(Error::Domain("theoretical optimum requires k < n0".into()));
    }
    let c = problem.log_target();
    Ok(TheoreticalOptimum {
        m_real: c,
        expected: std::f64::consts::E * c,
    })
}

/// Exact 1/p_i for one integer stage, as a big rational.
pub fn exact_inverse_probability(n_prev: u64, n_next: u64, k: u64) -> Result<BigRational> {
    if n_next < k || n_prev <= n_next {
        return Err(Error::Domain(format!(
            "stage requires n_prev > n_next >= k, got n_prev = {n_prev}, \
             n_next = {n_next}, k = {k}"
        )));
    }
    let num = exact_binomial(n_prev, n_next)?;
    let den = exact_binomial(n_prev - k, n_next - k)?;
    Ok(BigRational::new(BigInt::from(num), BigInt::from(den)))
}

/// Exact expected cost of an integer schedule as a big rational. Guarded
/// by a size limit; the float path covers everything else.
pub fn exact_rational_cost(schedule: &IntegerSchedule) -> Result<BigRational> {
    let problem = schedule.problem();
    if problem.n0() > EXACT_LIMIT {
        return Err(Error::ExactLimit {
            n0: problem.n0(),
            limit: EXACT_LIMIT,
        });
    }
    let mut prev = problem.n0();
    let mut total = BigRational::from(BigInt::from(0));
    for &next in schedule.sizes() {
        total += exact_inverse_probability(prev, next, problem.k())?;
        prev = next;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::{
        approx_continuous_schedule, exact_continuous_schedule, integerize, kauffman_schedule,
        optimal_stage_count,
    };
    use num_traits::ToPrimitive;
    use proptest::prelude::*;

    fn problem(n0: u64, k: u64) -> Problem {
        Problem::new(n0, k).unwrap()
    }

    fn int_schedule(n0: u64, k: u64, sizes: &[u64]) -> IntegerSchedule {
        IntegerSchedule::new(problem(n0, k), sizes.to_vec()).unwrap()
    }

    fn rational(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    #[test]
    fn single_stage_probability() {
        // C(95, 45) / C(100, 50) = 1081 / 38412, about 0.0281.
        let p = stage_probability(100.0, 50.0, 5.0).unwrap();
        let exact = 1081.0 / 38412.0;
        assert!((p - exact).abs() < 1e-12 * exact);

        // k = 0 stages always succeed.
        assert_eq!(stage_probability(10.0, 9.0, 0.0).unwrap(), 1.0);
        // Dropping straight to k costs the full C(n_prev, k).
        let p = stage_probability(100.0, 5.0, 5.0).unwrap();
        assert!((1.0 / p - 75_287_520.0).abs() < 1e-3);

        assert!(stage_probability(10.0, 10.0, 2.0).is_err());
        assert!(stage_probability(10.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn small_schedule_exact_costs() {
        // (5, 2) with sizes [3, 2]: 10/3 + 3 = 19/3.
        let sched = int_schedule(5, 2, &[3, 2]);
        let exact = exact_rational_cost(&sched).unwrap();
        assert_eq!(exact, rational(19, 3));
        let float = expected_cost(&sched).expected_total;
        assert!((float - 19.0 / 3.0).abs() < 1e-12);

        // (4, 1) with the single stage [1]: C(4, 1) = 4 draws expected.
        let sched = int_schedule(4, 1, &[1]);
        assert_eq!(exact_rational_cost(&sched).unwrap(), rational(4, 1));
    }

    #[test]
    fn reference_instance_costs() {
        let p = problem(100, 5);
        let exact = exact_continuous_schedule(p, 18, 1e-10).unwrap();
        let cost = expected_cost(&exact);
        assert!((cost.expected_total - 49.302418841238013).abs() < 1e-6);
        assert!(cost.variance_total > 85.0 && cost.variance_total < 86.0);
        assert_eq!(
            *cost.per_stage_cumulative.last().unwrap(),
            cost.expected_total
        );

        let approx = approx_continuous_schedule(p, 18).unwrap();
        assert!((expected_cost(&approx).expected_total - 50.526_374_751_728_52).abs() < 1e-9);

        // Rounding to integers costs a little over the continuum value.
        let int = integerize(&exact).unwrap();
        assert!((expected_cost(&int).expected_total - 51.369_403_162_594_57).abs() < 1e-9);
    }

    #[test]
    fn halving_baseline_cost() {
        let sched = kauffman_schedule(problem(100, 5)).unwrap();
        let exact = exact_rational_cost(&sched).unwrap();
        assert_eq!(exact, rational(40_024_519, 142_692));
        let float = expected_cost(&sched).expected_total;
        assert!((float - 280.49588624449865).abs() < 1e-9 * 280.0);
    }

    #[test]
    fn theoretical_optimum_values() {
        let opt = theoretical_optimum(problem(100, 5)).unwrap();
        assert!((opt.m_real - 18.136824941982426).abs() < 1e-12);
        assert!((opt.expected - 49.301_001_665_733_61).abs() < 1e-12);

        let opt = theoretical_optimum(problem(2, 1)).unwrap();
        assert!((opt.expected - 1.884_169_385_363_72).abs() < 1e-12);

        assert_eq!(theoretical_optimum(problem(100, 0)).unwrap().expected, 0.0);
        assert!(theoretical_optimum(problem(5, 5)).is_err());
    }

    #[test]
    fn profile_matches_cost() {
        let sched = int_schedule(100, 5, &[50, 25, 12, 6, 5]);
        let profile = stage_profile(&sched);
        assert_eq!(profile.stage_count(), 5);
        let total: f64 = profile.expected_trials().iter().sum();
        let cost = expected_cost(&sched);
        assert!((total - cost.expected_total).abs() < 1e-12 * total);
        for (&p, &t) in profile
            .probabilities()
            .iter()
            .zip(profile.expected_trials())
        {
            assert!((p * t - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn synthetic_profile_validation() {
        assert!(StageProfile::new(vec![0.5, 1.0]).is_ok());
        assert!(StageProfile::new(vec![0.0]).is_err());
        assert!(StageProfile::new(vec![1.1]).is_err());
        assert!(StageProfile::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn empty_schedule_costs_nothing() {
        let sched = IntegerSchedule::new(problem(5, 5), vec![]).unwrap();
        let cost = expected_cost(&sched);
        assert_eq!(cost.expected_total, 0.0);
        assert_eq!(cost.variance_total, 0.0);
        assert!(cost.per_stage_cumulative.is_empty());
    }

    #[test]
    fn exact_limit_guard() {
        let p = Problem::new(3000, 1).unwrap();
        let sched = IntegerSchedule::new(p, vec![1]).unwrap();
        assert!(matches!(
            exact_rational_cost(&sched),
            Err(Error::ExactLimit { .. })
        ));
    }

    /// Every schedule that ends at k carries total work C(n0, k) in
    /// product form: prod 1/p_i = C(n0, k) exactly.
    #[test]
    fn inverse_probability_product_telescopes() {
        for (n0, k, sizes) in [
            (100u64, 5u64, vec![50u64, 25, 12, 6, 5]),
            (
                100,
                5,
                vec![
                    82, 67, 55, 45, 37, 31, 25, 21, 18, 15, 12, 11, 10, 9, 8, 7, 6, 5,
                ],
            ),
            (30, 3, vec![17, 9, 5, 3]),
            (12, 1, vec![4, 1]),
        ] {
            let mut prev = n0;
            let mut product = BigRational::from(BigInt::from(1));
            for &next in &sizes {
                product *= exact_inverse_probability(prev, next, k).unwrap();
                prev = next;
            }
            let target = BigRational::from(BigInt::from(exact_binomial(n0, k).unwrap()));
            assert_eq!(product, target, "telescoping failed for ({n0}, {k})");
        }
    }

    /// Brute-force check that equalizing log-work then rounding lands near
    /// the best integer schedule of the same length.
    #[test]
    fn integerized_schedules_are_near_optimal() {
        fn best(n0: u64, k: u64, m: usize) -> f64 {
            fn rec(prev: u64, k: u64, left: usize, acc: &mut Vec<u64>, best: &mut f64) {
                if left == 1 {
                    acc.push(k);
                    let sched =
                        IntegerSchedule::new(Problem::new(acc[0], k).unwrap(), acc[1..].to_vec())
                            .unwrap();
                    let cost = expected_cost(&sched).expected_total;
                    if cost < *best {
                        *best = cost;
                    }
                    acc.pop();
                    return;
                }
                // Leave room for the remaining left-1 strictly decreasing sizes.
                for next in (k + left as u64 - 1)..prev {
                    acc.push(next);
                    rec(next, k, left - 1, acc, best);
                    acc.pop();
                }
            }
            let mut best_cost = f64::INFINITY;
            let mut acc = vec![n0];
            rec(n0, k, m, &mut acc, &mut best_cost);
            best_cost
        }

        // Every instance with n0 <= 60, k <= 4 whose optimal stage count is
        // small enough to brute-force (m_int <= 3). Flooring is not the best
        // rounding everywhere: the worst gaps in this domain are 5.9 % at
        // (8, 1), where [3, 1] beats the rounded [2, 1], and 5.8 % at (8, 2).
        // The band is fixed from that measurement.
        let mut checked = 0;
        for k in 0..=4u64 {
            for n0 in (k + 1)..=60 {
                let p = problem(n0, k);
                let m = optimal_stage_count(p).unwrap().m_int;
                if m > 3 || m as u64 > n0 - k {
                    continue;
                }
                let sched = integerize(&exact_continuous_schedule(p, m, 1e-10).unwrap()).unwrap();
                let ours = expected_cost(&sched).expected_total;
                let optimum = best(n0, k, m);
                assert!(
                    ours <= optimum * 1.06,
                    "({n0}, {k}, {m}): rounded {ours} vs optimum {optimum}"
                );
                checked += 1;
            }
        }
        assert!(
            checked > 60,
            "domain sweep covered only {checked} instances"
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        /// Random integer schedules: the float cost must track the exact
        /// rational cost tightly, and never undercut the stage count.
        #[test]
        fn float_cost_tracks_exact_rational(
            n0 in 6u64..120,
            k in 0u64..5,
            picks in proptest::collection::vec(0.0f64..1.0, 1..10),
        ) {
            prop_assume!(k < n0);
            // Map picks to a strictly decreasing size sequence ending at k.
            let mut sizes: Vec<u64> = Vec::new();
            let mut hi = n0;
            for t in &picks {
                if hi <= k + 1 {
                    break;
                }
                let next = k + 1 + ((t * (hi - k - 1) as f64) as u64).min(hi - k - 2);
                sizes.push(next);
                hi = next;
            }
            sizes.push(k);
            let sched = IntegerSchedule::new(problem(n0, k), sizes).unwrap();

            let float = expected_cost(&sched);
            let exact = exact_rational_cost(&sched).unwrap();
            let exact_f = exact.to_f64().unwrap();
            prop_assert!((float.expected_total - exact_f).abs() <= 1e-11 * exact_f);
            prop_assert!(float.expected_total >= sched.stage_count() as f64 - 1e-9);
        }
    }
}
