//! Error type shared across the crate.

use crate::spectral::FgCoefficients;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by parsing, reduction, simulation, and the harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed netlist line. `line` is 1-based.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Two elements share a name (SPICE names are case-insensitive).
    #[error("duplicate element name '{name}' at line {line}")]
    DuplicateElement { name: String, line: usize },

    /// An output directive references a node that no longer exists and has
    /// no remap entry.
    #[error("output directive references deleted node '{node}' with no mapping entry")]
    MissingRemap { node: String },

    /// Two chains passed to `rewrite` share a node.
    #[error("overlapping chains: node '{node}' appears in more than one chain")]
    OverlappingChains { node: String },

    /// A chain element could not be located in the netlist being rewritten.
    #[error("chain at port '{port}' not found in netlist: missing {what}")]
    ChainNotFound { port: String, what: String },

    /// The F/G quadrature failed to reach its error target. Partial values
    /// are carried so callers can inspect them.
    #[error("quadrature did not converge: F={} (err {}), G={} (err {})", partial.f, partial.f_err_abs, partial.g, partial.g_err_abs)]
    QuadratureNotConverged { partial: FgCoefficients },

    /// Normal equations for the recurrence fit are rank deficient.
    #[error("recurrence fit is rank deficient at order m={order}; try a smaller order")]
    RankDeficient { order: usize },

    /// Traces disagree in length or time grid.
    #[error("trace mismatch: {0}")]
    TraceMismatch(String),

    /// No output node is shared between the two netlists being compared.
    #[error("no common output nodes between the two netlists")]
    NoCommonOutputs,

    /// `emit_plot_data` was handed an empty table.
    #[error("empty sweep table")]
    EmptyTable,

    /// A configuration value violates its documented range.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
