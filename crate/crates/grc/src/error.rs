use thiserror::Error;

/// Crate-wide error type.
///
/// Variants map onto process exit codes in the CLI: `Domain` is an argument
/// error (exit 2), `RootBracketing` and `InfeasibleStageCount` are
/// infeasible-instance errors (exit 3), and the remaining variants are
/// internal guards (exit 4).
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the function's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The stage equation has no root in [k, n_{i-1}]: the requested stage
    /// count is too large for the instance, so a stage cannot shed enough
    /// log-work while staying above k.
    #[error(
        "no root for stage {stage}: per-stage log work {target:.6} is not \
         attainable below size {upper:.3} (k = {k}); reduce the stage count"
    )]
    RootBracketing {
        stage: usize,
        target: f64,
        upper: f64,
        k: u64,
    },

    /// Integerization produced n_1 >= n_0, i.e. there is no room for the
    /// requested number of strictly decreasing integer sizes.
    #[error("{stages} integer stages do not fit between n0 = {n0} and k = {k}")]
    InfeasibleStageCount { stages: usize, n0: u64, k: u64 },

    /// Exact big-integer evaluation was asked for an instance above the
    /// supported size guard.
    #[error("exact arithmetic limited to n0 <= {limit}, got n0 = {n0}")]
    ExactLimit { n0: u64, limit: u64 },

    /// A simulated stage exceeded the draw guard without success. With
    /// valid inputs the success probability per draw is positive, so this
    /// indicates a corrupted schedule/oracle pair.
    #[error("stage {stage} exceeded {draws} draws without success")]
    DrawGuard { stage: usize, draws: u64 },

    /// The run-length distribution would need more support points than the
    /// cap allows before reaching the requested mass.
    #[error("run-length support would exceed {limit} points at epsilon {epsilon:e}")]
    SupportLimit { limit: usize, epsilon: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code the CLI reports for this error.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Domain(_) => 2,
            Error::RootBracketing { .. } | Error::InfeasibleStageCount { .. } => 3,
            Error::ExactLimit { .. } | Error::DrawGuard { .. } | Error::SupportLimit { .. } => 4,
        }
    }
}
