//! Command implementations and output rendering.
//!
//! Every subcommand produces one `OutputRecord`, a tagged union the binary
//! renders as JSON or CSV. Rendering is fully deterministic: floats are
//! always written with 17 significant digits (enough to round-trip f64
//! exactly), map keys are ordered, and nothing depends on thread count.

use std::collections::BTreeMap;
use std::fmt;
use std::io;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::cost::{expected_cost, stage_profile, theoretical_optimum};
use crate::distribution::{exact_run_length, negbin_pmf, negbin_tail};
use crate::error::{Error, Result};
use crate::schedule::{
    approx_continuous_schedule, exact_continuous_schedule, integerize, kauffman_schedule,
    optimal_stage_count, ContinuousSchedule, IntegerSchedule, Problem, StageSchedule,
};
use crate::simulator::simulate;

/// Log-space residual tolerance for the exact schedule solver.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;
/// Tail mass ignored by the run-length convolution.
pub const DEFAULT_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Equalized log-work via root solving.
    Exact,
    /// Closed-form geometric descent.
    Approx,
    /// Halving baseline.
    Kauffman,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::Approx => "approx",
            Method::Kauffman => "kauffman",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRow {
    pub stage: usize,
    pub size: f64,
    pub p: f64,
    pub expected_trials: f64,
    pub cumulative_expected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchedulePayload {
    pub n0: u64,
    pub k: u64,
    pub method: Method,
    pub integerized: bool,
    pub stage_count: usize,
    pub stages: Vec<StageRow>,
    pub expected_total: f64,
    pub variance_total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostPayload {
    pub n0: u64,
    pub k: u64,
    pub method: Method,
    pub integerized: bool,
    pub stage_count: usize,
    pub expected_total: f64,
    pub variance_total: f64,
    pub per_stage_cumulative: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionRow {
    pub x: u64,
    pub negbin_pmf: f64,
    pub convolution_pmf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionPayload {
    pub n0: u64,
    pub k: u64,
    pub method: Method,
    pub stage_count: usize,
    /// The equalized per-stage success probability C(n0, k)^(-1/M).
    pub equal_p: f64,
    pub truncation_epsilon: f64,
    pub truncation_mass: f64,
    pub rows: Vec<DistributionRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_threshold: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_probability: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationPayload {
    pub n0: u64,
    pub k: u64,
    pub method: Method,
    pub stage_count: usize,
    pub sizes: Vec<u64>,
    pub runs: u64,
    pub seed: u64,
    pub mean: f64,
    pub sample_variance: f64,
    /// Expected total draws of the simulated (integer) schedule.
    pub model_expected: f64,
    /// Equal-p reference for the negative binomial overlay.
    pub equal_p: f64,
    pub histogram: BTreeMap<u64, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub stage: usize,
    pub size: f64,
    pub cumulative_expected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSeries {
    pub method: Method,
    pub stage_count: usize,
    pub expected_total: f64,
    pub stages: Vec<CompareRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonPayload {
    pub n0: u64,
    pub k: u64,
    pub m_real: f64,
    pub theoretical_expected: f64,
    pub methods: Vec<MethodSeries>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OutputRecord {
    Schedule(SchedulePayload),
    Cost(CostPayload),
    Distribution(DistributionPayload),
    Simulation(SimulationPayload),
    Comparison(ComparisonPayload),
}

/// A schedule of either flavor, as built for a command.
enum Built {
    Continuous(ContinuousSchedule),
    Integer(IntegerSchedule),
}

impl StageSchedule for Built {
    fn problem(&self) -> Problem {
        match self {
            Built::Continuous(s) => s.problem(),
            Built::Integer(s) => s.problem(),
        }
    }
    fn stage_count(&self) -> usize {
        match self {
            Built::Continuous(s) => s.stage_count(),
            Built::Integer(s) => s.stage_count(),
        }
    }
    fn size_at(&self, index: usize) -> f64 {
        match self {
            Built::Continuous(s) => s.size_at(index),
            Built::Integer(s) => s.size_at(index),
        }
    }
}

impl Built {
    fn is_integer(&self) -> bool {
        matches!(self, Built::Integer(_))
    }
}

fn default_stages(problem: Problem, stages: Option<usize>) -> Result<usize> {
    match stages {
        Some(m) => Ok(m),
        None => Ok(optimal_stage_count(problem)?.m_int),
    }
}

/// Build the schedule a command asked for. With k = n0 there is nothing to
/// search and every method yields the empty schedule.
fn build(problem: Problem, method: Method, stages: Option<usize>, integer: bool) -> Result<Built> {
    if problem.k() == problem.n0() {
        return Ok(Built::Integer(IntegerSchedule::new(problem, Vec::new())?));
    }
    if method == Method::Kauffman {
        if stages.is_some() {
            return Err(Error::Domain(
                "--stages does not apply to the halving schedule".into(),
            ));
        }
        return Ok(Built::Integer(kauffman_schedule(problem)?));
    }
    let m = default_stages(problem, stages)?;
    let continuous = match method {
        Method::Exact => exact_continuous_schedule(problem, m, DEFAULT_TOLERANCE)?,
        // The geometric formula needs k >= 1; for k = 0 the game is won by
        // guessing the empty set once.
        Method::Approx if problem.k() == 0 => ContinuousSchedule::new(problem, vec![0.0])?,
        Method::Approx => approx_continuous_schedule(problem, m)?,
        Method::Kauffman => unreachable!("handled above"),
    };
    if integer {
        Ok(Built::Integer(integerize(&continuous)?))
    } else {
        Ok(Built::Continuous(continuous))
    }
}

/// Equalized per-stage success probability C(n0, k)^(-1/M).
fn equal_p(problem: Problem, stage_count: usize) -> f64 {
    if stage_count == 0 {
        return 1.0;
    }
    (-problem.log_target() / stage_count as f64).exp()
}

fn stage_rows(built: &Built) -> Vec<StageRow> {
    let profile = stage_profile(built);
    let cost = expected_cost(built);
    (0..built.stage_count())
        .map(|i| StageRow {
            stage: i + 1,
            size: built.size_at(i),
            p: profile.probabilities()[i],
            expected_trials: profile.expected_trials()[i],
            cumulative_expected: cost.per_stage_cumulative[i],
        })
        .collect()
}

pub fn cmd_schedule(
    n0: u64,
    k: u64,
    method: Method,
    stages: Option<usize>,
    integer: bool,
) -> Result<OutputRecord> {
    let problem = Problem::new(n0, k)?;
    let built = build(problem, method, stages, integer)?;
    let cost = expected_cost(&built);
    Ok(OutputRecord::Schedule(SchedulePayload {
        n0,
        k,
        method,
        integerized: built.is_integer(),
        stage_count: built.stage_count(),
        stages: stage_rows(&built),
        expected_total: cost.expected_total,
        variance_total: cost.variance_total,
    }))
}

pub fn cmd_cost(
    n0: u64,
    k: u64,
    method: Method,
    stages: Option<usize>,
    integer: bool,
) -> Result<OutputRecord> {
    let problem = Problem::new(n0, k)?;
    let built = build(problem, method, stages, integer)?;
    let cost = expected_cost(&built);
    Ok(OutputRecord::Cost(CostPayload {
        n0,
        k,
        method,
        integerized: built.is_integer(),
        stage_count: built.stage_count(),
        expected_total: cost.expected_total,
        variance_total: cost.variance_total,
        per_stage_cumulative: cost.per_stage_cumulative,
    }))
}

pub fn cmd_distribution(
    n0: u64,
    k: u64,
    method: Method,
    stages: Option<usize>,
    tail_threshold: Option<u64>,
) -> Result<OutputRecord> {
    let problem = Problem::new(n0, k)?;
    let built = build(problem, method, stages, false)?;
    let m = built.stage_count();
    let profile = stage_profile(&built);
    let dist = exact_run_length(&profile, DEFAULT_EPSILON)?;
    let p = equal_p(problem, m);
    if let Some(l) = tail_threshold {
        if l < m as u64 {
            return Err(Error::Domain(format!(
                "tail threshold {l} is below the minimum run length {m}"
            )));
        }
    }
    let tail_probability = match tail_threshold {
        Some(l) => Some(negbin_tail(m as u64, p, l)?),
        None => None,
    };
    let rows = (dist.min_support()..=dist.max_support())
        .map(|x| {
            Ok(DistributionRow {
                x,
                negbin_pmf: negbin_pmf(m as u64, p, x)?,
                convolution_pmf: dist.pmf_at(x),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OutputRecord::Distribution(DistributionPayload {
        n0,
        k,
        method,
        stage_count: m,
        equal_p: p,
        truncation_epsilon: DEFAULT_EPSILON,
        truncation_mass: dist.truncation_mass(),
        rows,
        tail_threshold,
        tail_probability,
    }))
}

pub fn cmd_simulate(
    n0: u64,
    k: u64,
    method: Method,
    stages: Option<usize>,
    runs: u64,
    seed: u64,
) -> Result<OutputRecord> {
    let problem = Problem::new(n0, k)?;
    let built = build(problem, method, stages, true)?;
    let Built::Integer(schedule) = built else {
        unreachable!("build(integer = true) returns integer schedules")
    };
    let report = simulate(&schedule, runs, seed)?;
    let model = expected_cost(&schedule);
    Ok(OutputRecord::Simulation(SimulationPayload {
        n0,
        k,
        method,
        stage_count: schedule.stage_count(),
        sizes: schedule.sizes().to_vec(),
        runs,
        seed,
        mean: report.mean,
        sample_variance: report.sample_variance,
        model_expected: model.expected_total,
        equal_p: equal_p(problem, schedule.stage_count()),
        histogram: report.histogram,
    }))
}

pub fn cmd_compare(n0: u64, k: u64) -> Result<OutputRecord> {
    let problem = Problem::new(n0, k)?;
    if k == n0 {
        return Err(Error::Domain("compare requires k < n0".into()));
    }
    let optimum = theoretical_optimum(problem)?;
    let methods = [Method::Exact, Method::Approx, Method::Kauffman]
        .into_iter()
        .map(|method| {
            let built = build(problem, method, None, false)?;
            let cost = expected_cost(&built);
            let stages = (0..built.stage_count())
                .map(|i| CompareRow {
                    stage: i + 1,
                    size: built.size_at(i),
                    cumulative_expected: cost.per_stage_cumulative[i],
                })
                .collect();
            Ok(MethodSeries {
                method,
                stage_count: built.stage_count(),
                expected_total: cost.expected_total,
                stages,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OutputRecord::Comparison(ComparisonPayload {
        n0,
        k,
        m_real: optimum.m_real,
        theoretical_expected: optimum.expected,
        methods,
    }))
}

/// Render a float with 17 significant digits; parsing the result recovers
/// the exact same f64.
pub fn fmt_f64(value: f64) -> String {
    format!("{value:.16e}")
}

struct PreciseFloats;

impl serde_json::ser::Formatter for PreciseFloats {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

pub fn to_json(record: &OutputRecord) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, PreciseFloats);
    record
        .serialize(&mut ser)
        .expect("in-memory JSON serialization cannot fail");
    String::from_utf8(buf).expect("serializer emits valid UTF-8")
}

/// CSV rendering. Schemas per record kind:
/// schedule    stage,size,p,expected_trials,cumulative_expected
/// cost        stage,cumulative_expected
/// distribution x,negbin_pmf,convolution_pmf
/// simulation  x,count,negbin_pmf
/// comparison  method,stage,size,cumulative_expected with a final
///             theoretical_optimum reference row
pub fn to_csv(record: &OutputRecord) -> String {
    let mut out = String::new();
    match record {
        OutputRecord::Schedule(p) => {
            out.push_str("stage,size,p,expected_trials,cumulative_expected\n");
            for row in &p.stages {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    row.stage,
                    fmt_f64(row.size),
                    fmt_f64(row.p),
                    fmt_f64(row.expected_trials),
                    fmt_f64(row.cumulative_expected),
                ));
            }
        }
        OutputRecord::Cost(p) => {
            out.push_str("stage,cumulative_expected\n");
            for (i, &cum) in p.per_stage_cumulative.iter().enumerate() {
                out.push_str(&format!("{},{}\n", i + 1, fmt_f64(cum)));
            }
        }
        OutputRecord::Distribution(p) => {
            out.push_str("x,negbin_pmf,convolution_pmf\n");
            for row in &p.rows {
                out.push_str(&format!(
                    "{},{},{}\n",
                    row.x,
                    fmt_f64(row.negbin_pmf),
                    fmt_f64(row.convolution_pmf),
                ));
            }
        }
        OutputRecord::Simulation(p) => out.push_str(&simulation_histogram_csv(p)),
        OutputRecord::Comparison(p) => {
            out.push_str("method,stage,size,cumulative_expected\n");
            for series in &p.methods {
                for row in &series.stages {
                    out.push_str(&format!(
                        "{},{},{},{}\n",
                        series.method,
                        row.stage,
                        fmt_f64(row.size),
                        fmt_f64(row.cumulative_expected),
                    ));
                }
            }
            out.push_str(&format!(
                "theoretical_optimum,,,{}\n",
                fmt_f64(p.theoretical_expected)
            ));
        }
    }
    out
}

/// Histogram CSV with the negative binomial overlay, also used for
/// --histogram-out.
pub fn simulation_histogram_csv(payload: &SimulationPayload) -> String {
    let mut out = String::from("x,count,negbin_pmf\n");
    let m = payload.stage_count as u64;
    for (&x, &count) in &payload.histogram {
        let pmf = if m == 0 {
            0.0
        } else {
            negbin_pmf(m, payload.equal_p, x).unwrap_or(0.0)
        };
        out.push_str(&format!("{x},{count},{}\n", fmt_f64(pmf)));
    }
    out
}
