//! Error types shared across the crate.

use thiserror::Error;

/// Lexing failure with the byte offset of the offending character.
#[derive(Debug, Clone, Error, PartialEq)]
#[error("lex error at offset {offset}: {message}")]
pub struct LexError {
    pub offset: usize,
    pub message: String,
}

/// Parse failure with an expected-token style message.
#[derive(Debug, Clone, Error, PartialEq)]
#[error("parse error at offset {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

/// Runtime evaluation failure of an expression.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("square root of a negative argument")]
    SqrtOfNegative,
    #[error("division by zero")]
    DivisionByZero,
    #[error("divisor interval contains zero")]
    DivisorContainsZero,
    #[error("variable x{0} is not bound (point has lower dimension)")]
    UnboundVariable(usize),
}

#[derive(Debug, Clone, Error)]
pub enum GeometryError {
    #[error("domain spec has no boxes")]
    EmptyDomain,
    #[error("grid resolution must be positive, got {0}")]
    NonPositiveResolution(f64),
    #[error("box axis {axis} has lo > hi ({lo} > {hi})")]
    InvertedAxis { axis: usize, lo: f64, hi: f64 },
    #[error("domain boxes {0} and {1} have overlapping interiors")]
    OverlappingBoxes(usize, usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("cell {0} not found in complex")]
    UnknownCell(u64),
    #[error("duplicate cell id {0}")]
    DuplicateCellId(u64),
    #[error("cannot bisect cell {cell} on degenerate axis {axis}")]
    DegenerateAxis { cell: u64, axis: usize },
    #[error("empty point set")]
    EmptySet,
}

#[derive(Debug, Clone, Error)]
pub enum MapError {
    #[error("branch {branch} component {component}: {source}")]
    Branch {
        branch: usize,
        component: usize,
        source: EvalError,
    },
    #[error("branch {branch} has {got} components, expected {expected}")]
    BranchArity {
        branch: usize,
        got: usize,
        expected: usize,
    },
    #[error("branch {branch} component {component} uses variable x{var}, but dimension is {dim}")]
    VariableOutOfRange {
        branch: usize,
        component: usize,
        var: usize,
        dim: usize,
    },
    #[error("map must have at least one branch")]
    NoBranches,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Error)]
pub enum ColorError {
    #[error("bound arguments must be positive (got m={0}, n={1})")]
    InvalidBoundArgs(u32, u32),
    #[error("bound value overflows u128 at (m={0}, n={1})")]
    BoundOverflow(u32, u32),
    #[error("coloring failed: {reason} ({cells} cells affected)")]
    ColoringFailed { reason: String, cells: usize },
    #[error("strata violation: {0}")]
    StrataViolation(String),
    #[error("strata certification inconclusive: {ambiguous} cells still ambiguous at depth {depth}")]
    InconclusiveStrata { ambiguous: usize, depth: usize },
    #[error("colorings cover different cell sets")]
    CellSetMismatch,
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Error)]
pub enum DiscreteError {
    #[error("vertex {0} maps to itself (not fixed-point free)")]
    Loop(u64),
    #[error("vertex {0} has an empty image")]
    EmptyImage(u64),
    #[error("exact search capped at N = {cap}, got {got}")]
    CapExceeded { cap: u32, got: u32 },
    #[error("N must be at least 2, got {0}")]
    TooSmall(u32),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}
