use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{pearson, DistanceMatrix, StatsError};

pub const DEFAULT_PERMUTATIONS: usize = 9999;

/// Permutations drawn from one generator stream.
const BATCH: usize = 512;

/// Relative slack when comparing a permuted statistic with the observed one,
/// so that permutations reproducing the observed value up to summation
/// order are counted.
const TIE_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MantelResult {
    pub r: f64,
    pub p: f64,
    pub permutations: usize,
    pub seed: u64,
}

/// Two-sided Mantel test between two distance matrices with identical
/// label order.
///
/// `r` is the Pearson correlation of the upper triangles. The p-value is
/// `(1 + k) / (permutations + 1)` where `k` counts simultaneous row/column
/// permutations of `b` whose `|r|` reaches the observed one. Permutation
/// batches use independent ChaCha streams derived from `seed`, so the result
/// does not depend on thread scheduling.
pub fn mantel(
    a: &DistanceMatrix,
    b: &DistanceMatrix,
    permutations: usize,
    seed: u64,
) -> Result<MantelResult, StatsError> {
    if a.labels() != b.labels() {
        return Err(StatsError::LabelMismatch(format!(
            "[{}] vs [{}]",
            a.labels().join(","),
            b.labels().join(",")
        )));
    }
    let n = a.len();
    if n < 3 {
        return Err(StatsError::TooFew { needed: 3, got: n });
    }
    if permutations == 0 {
        return Err(StatsError::InvalidArgument(
            "permutations must be positive".into(),
        ));
    }
    let r = pearson(&a.upper_triangle(), &b.upper_triangle())?;

    let stat = PermutationStatistic::new(a, b);
    let identity: Vec<usize> = (0..n).collect();
    let observed = stat.eval(&identity).abs();
    let threshold = observed - TIE_EPSILON * observed.max(1.0);

    let batches = permutations.div_ceil(BATCH);
    let exceed: usize = (0..batches)
        .into_par_iter()
        .map(|batch| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(batch as u64);
            let mut perm = identity.clone();
            let count = BATCH.min(permutations - batch * BATCH);
            (0..count)
                .filter(|_| {
                    perm.shuffle(&mut rng);
                    stat.eval(&perm).abs() >= threshold
                })
                .count()
        })
        .sum();

    Ok(MantelResult {
        r,
        p: (1 + exceed) as f64 / (permutations + 1) as f64,
        permutations,
        seed,
    })
}

/// Correlation of `a` against `b` permuted, reusing that a simultaneous
/// permutation leaves the mean and variance of `b`'s upper triangle intact.
struct PermutationStatistic<'m> {
    a_centered: Vec<f64>,
    b: &'m DistanceMatrix,
    b_mean: f64,
    scale: f64,
}

impl<'m> PermutationStatistic<'m> {
    fn new(a: &DistanceMatrix, b: &'m DistanceMatrix) -> Self {
        let ua = a.upper_triangle();
        let ub = b.upper_triangle();
        let m = ua.len() as f64;
        let a_mean = ua.iter().sum::<f64>() / m;
        let b_mean = ub.iter().sum::<f64>() / m;
        let a_centered: Vec<f64> = ua.iter().map(|v| v - a_mean).collect();
        let saa: f64 = a_centered.iter().map(|v| v * v).sum();
        let sbb: f64 = ub.iter().map(|v| (v - b_mean) * (v - b_mean)).sum();
        Self {
            a_centered,
            b,
            b_mean,
            scale: saa.sqrt() * sbb.sqrt(),
        }
    }

    fn eval(&self, perm: &[usize]) -> f64 {
        let n = perm.len();
        let mut k = 0;
        let mut sum = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                sum += self.a_centered[k] * (self.b.get(perm[i], perm[j]) - self.b_mean);
                k += 1;
            }
        }
        sum / self.scale
    }
}
