use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("map is not invertible (delta = 0)")]
    NotInvertible,
    #[error("iteration diverged to a non-finite value")]
    Diverged,
    #[error("conic center undefined for c = 0")]
    UndefinedCenter,
    #[error("forward AI map undefined: a = 1 - c = 0")]
    NoForwardMap,
    #[error("backward AI map undefined: c = 0")]
    NoBackwardBranching,
    #[error("AI branch undefined: radicand {radicand} < 0 at xi = {xi}")]
    BranchUndefined { xi: f64, radicand: f64 },
    #[error("AI branch has infinite slope at xi = {xi}")]
    InfiniteSlope { xi: f64 },
    #[error("no invariant interval B defined for (r, c) = ({r}, {c})")]
    NoInterval { r: f64, c: f64 },
    #[error("AI state iteration did not converge within {max_iter} steps")]
    ConvergenceFailure { max_iter: usize },
    #[error("AI state sign pattern does not match its symbols at t = {index}")]
    SymbolMismatch { index: usize },
    #[error("ambiguous symbol: orbit entry {index} is zero")]
    AmbiguousSymbol { index: usize },
    #[error("empty symbol sequence")]
    EmptySequence,
    #[error("symbol parse error at byte {pos}: {reason}")]
    Parse { pos: usize, reason: &'static str },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("grids differ")]
    GridMismatch,
    #[error("Hausdorff distance undefined for an empty point set")]
    EmptySet,
    #[error("singular linear system")]
    Singular,
    #[error("tangent computation failed: singular system")]
    TangentFailure,
    #[error("corrector did not converge within {iters} iterations")]
    CorrectorFailure { iters: usize },
    #[error("corrector left the trust ball around the predictor")]
    CorrectorDiverged,
    #[error("no real doubling curve root (discriminant {discriminant})")]
    NoRealDoubling { discriminant: f64 },
    #[error("no real fixed point: discriminant {discriminant} < 0")]
    NoFixedPoint { discriminant: f64 },
}
