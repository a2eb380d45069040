//! Monte-Carlo draws of the count difference from its exact distribution.

use std::collections::BTreeMap;

use fockbench_core::homodyne::OutcomeDistribution;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// `n_shots` i.i.d. outcomes by inverse CDF over ascending `l`. The stream is fixed
/// by `(seed, stream)`, so parallel sweep points never share draws.
pub fn sample_outcomes(dist: &OutcomeDistribution, n_shots: usize, seed: u64, stream: u64) -> BTreeMap<i64, u64> {
    let ls: Vec<i64> = dist.probs().keys().copied().collect();
    let mut cdf = Vec::with_capacity(ls.len());
    let mut acc = 0.0;
    for l in &ls {
        acc += dist.prob(*l);
        cdf.push(acc);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut hist = BTreeMap::new();
    for _ in 0..n_shots {
        let u: f64 = rng.random::<f64>() * acc;
        let i = cdf.partition_point(|&c| c <= u).min(ls.len() - 1);
        *hist.entry(ls[i]).or_insert(0) += 1;
    }
    hist
}

/// Mean outcome of the draws.
pub fn empirical_mean(hist: &BTreeMap<i64, u64>) -> f64 {
    let n: u64 = hist.values().sum();
    hist.iter().map(|(&l, &c)| l as f64 * c as f64).sum::<f64>() / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coin() -> OutcomeDistribution {
        OutcomeDistribution::from_map([(-1, 0.5), (1, 0.5)].into_iter().collect())
    }

    #[test]
    fn single_shot_single_row() {
        let h = sample_outcomes(&coin(), 1, 11, 0);
        assert_eq!(h.len(), 1);
        assert_eq!(h.values().sum::<u64>(), 1);
    }

    #[test]
    fn repeatable_and_stream_dependent() {
        let a = sample_outcomes(&coin(), 1000, 5, 0);
        assert_eq!(a, sample_outcomes(&coin(), 1000, 5, 0));
        assert_ne!(a, sample_outcomes(&coin(), 1000, 5, 1));
        assert!((empirical_mean(&a)).abs() < 0.1);
    }

    #[test]
    fn degenerate_distribution() {
        let d = OutcomeDistribution::from_map([(3, 1.0)].into_iter().collect());
        assert_eq!(sample_outcomes(&d, 50, 0, 0)[&3], 50);
    }
}
