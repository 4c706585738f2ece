use pncache_core::placement::SubfileIndex;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PhyError {
    #[error("magnitude bounds must satisfy 0 < Δ1 < Δ2 < ∞ (got {lo}, {hi})")]
    Bounds { lo: f64, hi: f64 },
    #[error("zero-forcing constraints for user {target} are rank-deficient")]
    DegenerateChannel { target: u32 },
    #[error("antenna {antenna} expected energy {energy} exceeds the budget {budget}")]
    Power { antenna: usize, energy: f64, budget: f64 },
    #[error("user {user} needs subfile (file {}, τ = {}) which it does not cache", .subfile.file, .subfile.tau)]
    MissingCache { user: u32, subfile: SubfileIndex },
    #[error("slope fit needs at least 3 points spanning 20 dB (got {points} over {span_db} dB)")]
    InsufficientSpan { points: usize, span_db: f64 },
    #[error(transparent)]
    Core(#[from] pncache_core::Error),
}

pub type PhyResult<T> = Result<T, PhyError>;
