//! Stage-size schedule construction.
//!
//! A schedule for the instance (n0, k) is a strictly decreasing sequence of
//! stage sizes n0 > n1 > ... > n_M = k. The product of the per-stage
//! inverse success probabilities telescopes to C(n0, k) for every such
//! sequence, so total expected work is fixed in product form and the
//! schedule only controls how it is split. Expected cost is minimized when
//! every stage carries equal log-work ln C(n0, k) / M, which is what the
//! exact solver enforces.

use crate::combinatorics::{ln_binomial_raw, log_binomial};
use crate::error::{Error, Result};

/// A search instance: find an unknown k-subset of a ground set of size n0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Problem {
    n0: u64,
    k: u64,
}

impl Problem {
    pub fn new(n0: u64, k: u64) -> Result<Self> {
        if n0 == 0 {
            return Err(Error::Domain("n0 must be at least 1".into()));
        }
        if k > n0 {
            return Err(Error::Domain(format!(
                "k must not exceed n0, got n0 = {n0}, k = {k}"
            )));
        }
        Ok(Problem { n0, k })
    }

    pub fn n0(self) -> u64 {
        self.n0
    }

    pub fn k(self) -> u64 {
        self.k
    }

    /// Total log-work of the instance, ln C(n0, k).
    pub fn log_target(self) -> f64 {
        log_binomial(self.n0 as f64, self.k as f64)
            .expect("k <= n0 by construction")
            .ln()
    }
}

/// A schedule with real-valued stage sizes, as produced by the optimizers
/// before rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousSchedule {
    problem: Problem,
    sizes: Vec<f64>,
}

/// A schedule with integer stage sizes, ready to be played.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerSchedule {
    problem: Problem,
    sizes: Vec<u64>,
}

/// Anything that exposes stage sizes as floats; cost analysis works on
/// this so continuous and integer schedules share one code path.
pub trait StageSchedule {
    fn problem(&self) -> Problem;
    fn stage_count(&self) -> usize;
    /// Stage size n_{index+1}; index is 0-based over stages 1..=M.
    fn size_at(&self, index: usize) -> f64;
}

impl ContinuousSchedule {
    /// Validates the schedule shape: sizes strictly decreasing, strictly
    /// inside (k, n0) except the final entry, which must equal k. An empty
    /// size list is only valid when k = n0 (nothing to search).
    pub fn new(problem: Problem, sizes: Vec<f64>) -> Result<Self> {
        validate_sizes(problem, &sizes, |&s| s)?;
        Ok(ContinuousSchedule { problem, sizes })
    }

    pub fn sizes(&self) -> &[f64] {
        &self.sizes
    }
}

impl IntegerSchedule {
    pub fn new(problem: Problem, sizes: Vec<u64>) -> Result<Self> {
        validate_sizes(problem, &sizes, |&s| s as f64)?;
        Ok(IntegerSchedule { problem, sizes })
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }
}

impl StageSchedule for ContinuousSchedule {
    fn problem(&self) -> Problem {
        self.problem
    }
    fn stage_count(&self) -> usize {
        self.sizes.len()
    }
    fn size_at(&self, index: usize) -> f64 {
        self.sizes[index]
    }
}

impl StageSchedule for IntegerSchedule {
    fn problem(&self) -> Problem {
        self.problem
    }
    fn stage_count(&self) -> usize {
        self.sizes.len()
    }
    fn size_at(&self, index: usize) -> f64 {
        self.sizes[index] as f64
    }
}

fn validate_sizes<T>(problem: Problem, sizes: &[T], as_f64: impl Fn(&T) -> f64) -> Result<()> {
    let (n0, k) = (problem.n0() as f64, problem.k() as f64);
    if sizes.is_empty() {
        if problem.k() == problem.n0() {
            return Ok(());
        }
        return Err(Error::Domain(
            "empty schedule is only valid when k = n0".into(),
        ));
    }
    let mut prev = n0;
    for (i, raw) in sizes.iter().enumerate() {
        let s = as_f64(raw);
        if !s.is_finite() || s >= prev {
            return Err(Error::Domain(format!(
                "stage sizes must decrease strictly from n0, offender at stage {}",
                i + 1
            )));
        }
        let last = i + 1 == sizes.len();
        if (last && s != k) || (!last && s < k) {
            return Err(Error::Domain(format!(
                "stage sizes must stay >= k and finish exactly at k = {k}"
            )));
        }
        prev = s;
    }
    Ok(())
}

/// The optimal stage count: its real-valued optimum m_real = ln C(n0, k),
/// and the better of the two neighboring integers m_int under the exact
/// objective M exp(ln C / M).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageCount {
    pub m_real: f64,
    pub m_int: usize,
}

pub fn optimal_stage_count(problem: Problem) -> Result<StageCount> {
    if problem.k() == problem.n0() {
        return Err(Error::Domain(
            "stage count is undefined for k = n0 (nothing to search)".into(),
        ));
    }
    let c = problem.log_target();
    let m_real = c;
    let objective = |m: usize| m as f64 * (c / m as f64).exp();
    let lo = (m_real.floor() as usize).max(1);
    let hi = (m_real.ceil() as usize).max(1);
    let m_int = if objective(lo) <= objective(hi) {
        lo
    } else {
        hi
    };
    Ok(StageCount { m_real, m_int })
}

/// Closed-form stage-count estimate k ln(n0 / k), the M at which the
/// geometric schedule's cost is stationary.
pub fn approx_stage_count(problem: Problem) -> Result<f64> {
    if problem.k() == 0 || problem.k() == problem.n0() {
        return Err(Error::Domain(
            "approximate stage count requires 0 < k < n0".into(),
        ));
    }
    let (n0, k) = (problem.n0() as f64, problem.k() as f64);
    Ok(k * (n0 / k).ln())
}

fn check_stage_budget(problem: Problem, stages: usize) -> Result<()> {
    if stages == 0 {
        return Err(Error::Domain("stage count must be at least 1".into()));
    }
    if problem.k() == problem.n0() {
        return Err(Error::Domain(
            "schedules require k < n0 (nothing to search otherwise)".into(),
        ));
    }
    // Integer sizes must eventually fit strictly between k and n0.
    if stages as u64 > problem.n0() - problem.k() {
        return Err(Error::InfeasibleStageCount {
            stages,
            n0: problem.n0(),
            k: problem.k(),
        });
    }
    Ok(())
}

/// Equal-log-work schedule: successively solve
/// ln C(n_{i-1}, n_i) - ln C(n_{i-1} - k, n_i - k) = ln C(n0, k) / M
/// for n_i by bisection. `tolerance` bounds the log-space residual at the
/// accepted root.
pub fn exact_continuous_schedule(
    problem: Problem,
    stages: usize,
    tolerance: f64,
) -> Result<ContinuousSchedule> {
    check_stage_budget(problem, stages)?;
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err(Error::Domain(format!(
            "tolerance must be positive and finite, got {tolerance}"
        )));
    }
    let (n0, k) = (problem.n0() as f64, problem.k() as f64);

    // With k = 0 every stage succeeds with probability 1 and any descent
    // works; use the geometric one ending at the empty set.
    if problem.k() == 0 {
        let m = stages as f64;
        let mut sizes: Vec<f64> = (1..stages)
            .map(|i| (n0.ln() * (1.0 - i as f64 / m)).exp())
            .collect();
        sizes.push(0.0);
        return ContinuousSchedule::new(problem, sizes);
    }

    let per_stage = problem.log_target() / stages as f64;
    let mut sizes = Vec::with_capacity(stages);
    let mut prev = n0;
    for i in 1..stages {
        let upper = prev;
        let g =
            move |x: f64| ln_binomial_raw(upper, x) - ln_binomial_raw(upper - k, x - k) - per_stage;
        // g decreases from ln C(prev, k) - per_stage at x = k down to
        // -per_stage at x = prev; a root needs the left end nonnegative.
        if g(k) < 0.0 {
            return Err(Error::RootBracketing {
                stage: i,
                target: per_stage,
                upper,
                k: problem.k(),
            });
        }
        let next = bisect_decreasing(k, upper, tolerance, g);
        sizes.push(next);
        prev = next;
    }
    sizes.push(k);
    ContinuousSchedule::new(problem, sizes)
}

/// Geometric schedule n_i = k^(i/M) n0^(1-i/M), the closed-form optimum of
/// the b ln(a/b) cost model. Endpoints are pinned exactly.
pub fn approx_continuous_schedule(problem: Problem, stages: usize) -> Result<ContinuousSchedule> {
    check_stage_budget(problem, stages)?;
    if problem.k() == 0 {
        return Err(Error::Domain(
            "the geometric schedule is undefined for k = 0".into(),
        ));
    }
    let (n0, k) = (problem.n0() as f64, problem.k() as f64);
    let m = stages as f64;
    let mut sizes: Vec<f64> = (1..stages)
        .map(|i| {
            let t = i as f64 / m;
            (n0.ln() * (1.0 - t) + k.ln() * t).exp()
        })
        .collect();
    sizes.push(k);
    ContinuousSchedule::new(problem, sizes)
}

/// The classic halving baseline: repeatedly take floor(n/2) while that
/// stays above k, then finish at k.
pub fn kauffman_schedule(problem: Problem) -> Result<IntegerSchedule> {
    if problem.k() == problem.n0() {
        return Err(Error::Domain("halving schedule requires k < n0".into()));
    }
    let mut sizes = Vec::new();
    let mut n = problem.n0();
    while n / 2 > problem.k() {
        n /= 2;
        sizes.push(n);
    }
    sizes.push(problem.k());
    IntegerSchedule::new(problem, sizes)
}

/// Round a continuous schedule to integers: pin n_M = k, then walk
/// backwards taking floor(n_i) but never colliding with the stage below.
/// Fails only if the first stage gets pushed up to n0.
pub fn integerize(schedule: &ContinuousSchedule) -> Result<IntegerSchedule> {
    let problem = schedule.problem();
    let m = schedule.stage_count();
    if m == 0 {
        return IntegerSchedule::new(problem, Vec::new());
    }
    let mut sizes = vec![0u64; m];
    sizes[m - 1] = problem.k();
    for i in (0..m - 1).rev() {
        let floored = schedule.sizes()[i].floor() as u64;
        sizes[i] = floored.max(sizes[i + 1] + 1);
    }
    if sizes[0] >= problem.n0() {
        return Err(Error::InfeasibleStageCount {
            stages: m,
            n0: problem.n0(),
            k: problem.k(),
        });
    }
    IntegerSchedule::new(problem, sizes)
}

/// Bisection for a strictly decreasing g with g(lo) >= 0 >= g(hi). Stops
/// when |g| falls under `tol` or the bracket collapses to float resolution.
fn bisect_decreasing<F: Fn(f64) -> f64>(mut lo: f64, mut hi: f64, tol: f64, g: F) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = g(mid);
        if v.abs() <= tol {
            return mid;
        }
        if v > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TOL: f64 = 1e-10;

    fn problem(n0: u64, k: u64) -> Problem {
        Problem::new(n0, k).unwrap()
    }

    #[test]
    fn two_stage_golden_value() {
        // For (n0, k, M) = (10, 2, 2) the stage equation reduces to the
        // quartic n1 (n1 - 1) = sqrt(180) with root
        // n1 = (1 + sqrt(1 + 4 sqrt(180))) / 2.
        let sched = exact_continuous_schedule(problem(10, 2), 2, TOL).unwrap();
        assert_eq!(sched.stage_count(), 2);
        assert!((sched.sizes()[0] - 4.196810498929954).abs() < 1e-8);
        assert_eq!(sched.sizes()[1], 2.0);
    }

    #[test]
    fn reference_instance_schedule() {
        let sched = exact_continuous_schedule(problem(100, 5), 18, TOL).unwrap();
        assert_eq!(sched.stage_count(), 18);
        assert!((sched.sizes()[0] - 82.11786730570171).abs() < 1e-6);
        assert_eq!(*sched.sizes().last().unwrap(), 5.0);
        // Strictly decreasing throughout.
        for w in sched.sizes().windows(2) {
            assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn stage_log_work_is_equalized() {
        let p = problem(100, 5);
        let sched = exact_continuous_schedule(p, 18, TOL).unwrap();
        let per_stage = p.log_target() / 18.0;
        let mut prev = 100.0;
        for &s in sched.sizes() {
            let work = ln_binomial_raw(prev, s) - ln_binomial_raw(prev - 5.0, s - 5.0);
            assert!(
                (work - per_stage).abs() < 2.0 * TOL,
                "stage work {work} vs {per_stage}"
            );
            prev = s;
        }
    }

    #[test]
    fn solver_agrees_with_remaining_work_identity() {
        // C(n_{i-1}, n_i) / C(n_{i-1} - k, n_i - k) = C(n_{i-1}, k) / C(n_i, k),
        // so after stage i the remaining log-work must be C (M - i) / M.
        // Solving that form directly is an independent route to the sizes.
        let p = problem(100, 5);
        let c = p.log_target();
        let m = 18usize;
        let sched = exact_continuous_schedule(p, m, TOL).unwrap();
        for (i, &s) in sched.sizes().iter().enumerate() {
            let remaining = c * (m - i - 1) as f64 / m as f64;
            let direct =
                bisect_decreasing(5.0, 100.0, 1e-12, |x| remaining - ln_binomial_raw(x, 5.0));
            assert!(
                (s - direct).abs() < 1e-6,
                "stage {i}: successive {s} vs direct {direct}"
            );
        }
    }

    #[test]
    fn approx_schedule_is_geometric() {
        let sched = approx_continuous_schedule(problem(100, 5), 18).unwrap();
        let sizes = sched.sizes();
        assert_eq!(sizes.len(), 18);
        assert_eq!(sizes[17], 5.0);
        let ratio = sizes[0] / 100.0;
        let mut prev = 100.0;
        for &s in sizes {
            assert!((s / prev - ratio).abs() < 1e-12 * ratio);
            prev = s;
        }
        assert!((sizes[0] - 84.66824460427218).abs() < 1e-9);
    }

    #[test]
    fn integerize_reference_instances() {
        let p = problem(100, 5);
        let exact = integerize(&exact_continuous_schedule(p, 18, TOL).unwrap()).unwrap();
        assert_eq!(
            exact.sizes(),
            &[82, 67, 55, 45, 37, 31, 25, 21, 18, 15, 12, 11, 10, 9, 8, 7, 6, 5]
        );
        let approx = integerize(&approx_continuous_schedule(p, 18).unwrap()).unwrap();
        assert_eq!(
            approx.sizes(),
            &[84, 71, 60, 51, 43, 36, 31, 26, 22, 18, 16, 13, 11, 9, 8, 7, 6, 5]
        );
    }

    #[test]
    fn halving_baseline() {
        assert_eq!(
            kauffman_schedule(problem(100, 5)).unwrap().sizes(),
            &[50, 25, 12, 6, 5]
        );
        assert_eq!(
            kauffman_schedule(problem(100, 0)).unwrap().sizes(),
            &[50, 25, 12, 6, 3, 1, 0]
        );
        assert_eq!(kauffman_schedule(problem(10, 9)).unwrap().sizes(), &[9]);
        assert_eq!(kauffman_schedule(problem(2, 0)).unwrap().sizes(), &[1, 0]);
    }

    #[test]
    fn stage_count_selection() {
        let sc = optimal_stage_count(problem(100, 5)).unwrap();
        assert!((sc.m_real - 18.136824941982426).abs() < 1e-12);
        assert_eq!(sc.m_int, 18);

        // ln C(50, 3) = ln 19600 = 9.883..., but the ceiling wins the
        // integer comparison here.
        let sc = optimal_stage_count(problem(50, 3)).unwrap();
        assert!((sc.m_real - 9.883_284_845_218_61).abs() < 1e-12);
        assert_eq!(sc.m_int, 10);

        let sc = optimal_stage_count(problem(2, 1)).unwrap();
        assert_eq!(sc.m_int, 1);

        assert!((approx_stage_count(problem(100, 5)).unwrap() - 14.978661367769955).abs() < 1e-12);
    }

    #[test]
    fn zero_k_schedules() {
        let sched = exact_continuous_schedule(problem(100, 0), 1, TOL).unwrap();
        assert_eq!(sched.sizes(), &[0.0]);
        let sched = exact_continuous_schedule(problem(100, 0), 4, TOL).unwrap();
        assert_eq!(sched.stage_count(), 4);
        assert_eq!(*sched.sizes().last().unwrap(), 0.0);
        for w in sched.sizes().windows(2) {
            assert!(w[1] < w[0]);
        }
        assert!(approx_continuous_schedule(problem(100, 0), 4).is_err());
    }

    #[test]
    fn infeasible_and_domain_errors() {
        assert!(matches!(
            exact_continuous_schedule(problem(100, 5), 96, TOL),
            Err(Error::InfeasibleStageCount { .. })
        ));
        assert!(matches!(
            exact_continuous_schedule(problem(100, 5), 0, TOL),
            Err(Error::Domain(_))
        ));
        assert!(exact_continuous_schedule(problem(100, 5), 18, -1.0).is_err());
        assert!(Problem::new(5, 6).is_err());
        assert!(Problem::new(0, 0).is_err());
        assert!(kauffman_schedule(problem(5, 5)).is_err());
        assert!(optimal_stage_count(problem(5, 5)).is_err());
    }

    #[test]
    fn max_stage_budget_integerizes_to_unit_steps() {
        let p = problem(10, 2);
        let sched = exact_continuous_schedule(p, 8, TOL).unwrap();
        let int = integerize(&sched).unwrap();
        assert_eq!(int.sizes(), &[9, 8, 7, 6, 5, 4, 3, 2]);
    }

    #[test]
    fn construction_is_deterministic() {
        let p = problem(100, 5);
        let a = exact_continuous_schedule(p, 18, TOL).unwrap();
        let b = exact_continuous_schedule(p, 18, TOL).unwrap();
        assert_eq!(a.sizes(), b.sizes());
    }

    #[test]
    fn empty_schedule_requires_k_equal_n0() {
        assert!(ContinuousSchedule::new(problem(5, 5), vec![]).is_ok());
        assert!(ContinuousSchedule::new(problem(5, 4), vec![]).is_err());
        assert!(IntegerSchedule::new(problem(5, 5), vec![]).is_ok());
        assert!(IntegerSchedule::new(problem(5, 4), vec![5, 4]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn random_instances_produce_valid_schedules(
            n0 in 2u64..300,
            k in 0u64..9,
            stages in 1usize..20,
        ) {
            prop_assume!(k < n0);
            let p = problem(n0, k);
            let stages = stages.min((n0 - k) as usize);
            let sched = exact_continuous_schedule(p, stages, TOL).unwrap();
            prop_assert_eq!(sched.stage_count(), stages);
            prop_assert_eq!(*sched.sizes().last().unwrap(), k as f64);
            let mut prev = n0 as f64;
            for &s in sched.sizes() {
                prop_assert!(s < prev);
                prop_assert!(s >= k as f64);
                prev = s;
            }
            // Rounding must also succeed inside the stage budget.
            let int = integerize(&sched).unwrap();
            prop_assert_eq!(int.stage_count(), stages);
        }

        #[test]
        fn geometric_ratio_is_constant(n0 in 10u64..300, k in 1u64..9, stages in 2usize..12) {
            prop_assume!(k < n0 && stages as u64 <= n0 - k);
            let sched = approx_continuous_schedule(problem(n0, k), stages).unwrap();
            let ratio = sched.sizes()[0] / n0 as f64;
            let mut prev = n0 as f64;
            for &s in sched.sizes() {
                prop_assert!((s / prev - ratio).abs() < 1e-12 * ratio);
                prev = s;
            }
        }
    }
}
