//! Correlation and rank tests: Pearson, Mantel, Wilcoxon signed-rank and
//! the Bonferroni correction.

mod correlation;
mod mantel;
mod matrix;
mod wilcoxon;

use thiserror::Error;

pub use correlation::{pearson, pearson_test, PearsonResult};
pub use mantel::{mantel, MantelResult, DEFAULT_PERMUTATIONS};
pub use matrix::DistanceMatrix;
pub use wilcoxon::{
    exact_signed_rank_p, wilcoxon_signed_rank, WilcoxonMode, WilcoxonResult, DEFAULT_EXACT_CUTOFF,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} observations, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("correlation undefined: zero variance")]
    ZeroVariance,
    #[error("all paired differences are zero")]
    AllZeroDifferences,
    #[error("matrix labels differ: {0}")]
    LabelMismatch(String),
    #[error("matrix is not square: {0}")]
    NotSquare(String),
    #[error("matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("matrix diagonal is not zero at {0}")]
    NonZeroDiagonal(usize),
    #[error("matrix has an invalid entry at ({0}, {1})")]
    InvalidEntry(usize, usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Outcome of a Bonferroni correction.
#[derive(Debug, Clone, PartialEq)]
pub struct Bonferroni {
    pub adjusted_alpha: f64,
    pub significant: Vec<bool>,
}

/// Divides `alpha` by the number of tests and flags `p < alpha / m`.
pub fn bonferroni(p_values: &[f64], alpha: f64) -> Result<Bonferroni, StatsError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::InvalidArgument(format!(
            "alpha {alpha} outside (0, 1)"
        )));
    }
    if p_values.is_empty() {
        return Err(StatsError::TooFew { needed: 1, got: 0 });
    }
    let adjusted_alpha = alpha / p_values.len() as f64;
    Ok(Bonferroni {
        adjusted_alpha,
        significant: p_values.iter().map(|p| *p < adjusted_alpha).collect(),
    })
}
