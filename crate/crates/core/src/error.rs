//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Semigroup action requested for t < 0 (semigroup, not a group).
    #[error("negative time {t} not in the semigroup domain")]
    NegativeTime { t: f64 },

    /// A pairing against the zero-trace dual was requested but the test
    /// function carries a nonzero endpoint trace. This is the structural
    /// obstruction to H^{-1} control laws.
    #[error("endpoint obstruction: test function has trace {trace:.3e} at t={at} (limit {limit:.1e})")]
    EndpointObstruction { at: f64, trace: f64, limit: f64 },

    /// Atom placed on the boundary of (0,T) while pairing against the
    /// zero-trace dual.
    #[error("endpoint obstruction: atom at t0={t0} is illegal in the zero-trace dual")]
    EndpointAtom { t0: f64 },

    #[error("support of {support} modes cannot carry {constraints} independent trace constraints")]
    InsufficientSupport { support: usize, constraints: usize },

    #[error("output map vanishes on the truncation (B* = 0 there)")]
    DegenerateOutput,

    #[error("gramian numerically singular (condition estimate {cond:.3e})")]
    SingularGramian { cond: f64 },

    #[error("root search did not converge: seed {seed_re}+{seed_im}i, last iterate {last_re}+{last_im}i, residual {residual:.3e}")]
    RootNotConverged {
        seed_re: f64,
        seed_im: f64,
        last_re: f64,
        last_im: f64,
        residual: f64,
    },

    #[error("mode normalization failed: vector is numerically null")]
    NullMode,

    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<V> = std::result::Result<V, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn dim(context: impl Into<String>) -> Self {
        Error::DimensionMismatch {
            context: context.into(),
        }
    }
}
