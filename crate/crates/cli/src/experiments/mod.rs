//! Multi-stage studies run through `fermat exp`.

pub mod circle_convergence;
pub mod eig_convergence;
pub mod two_partitions;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::CliError;
use crate::output::OutDir;

pub fn run(cfg: &ExperimentConfig, out: &mut OutDir) -> Result<(), CliError> {
    match cfg.experiment {
        Experiment::TwoPartitions => two_partitions::run(cfg, out),
        Experiment::EigConvergence => eig_convergence::run(cfg, out),
        Experiment::CircleConvergence => circle_convergence::run(cfg, out),
        e => Err(CliError::Config(format!("{} is not an `exp` subcommand", e.command()))),
    }
}

/// Seed of replicate `i`: replicates differ by key, not by stream, so a
/// replicate reproduces on its own given `seed + i`.
pub fn replicate_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_add(i as u64)
}

/// Number of sign changes of `a − b` along the sequence, exact ties skipped.
pub fn crossings(a: &[f64], b: &[f64]) -> usize {
    let signs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|d| *d != 0.0)
        .map(f64::signum)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// `|a − b| / |b|`.
pub fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_crossings() {
        assert_eq!(crossings(&[1.0, 0.9, 0.5, 0.4], &[0.5, 0.5, 0.9, 1.0]), 1);
        assert_eq!(crossings(&[1.0, 0.5, 1.0], &[0.5, 1.0, 0.5]), 2);
        assert_eq!(crossings(&[1.0, 0.5, 0.4], &[0.5, 0.5, 0.9]), 1);
        assert_eq!(crossings(&[1.0], &[0.0]), 0);
    }
}
