use std::path::PathBuf;

use qfl_core::report::seed_from_q_grid;

use crate::output::Format;
use crate::CliError;

/// Settings shared by every subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub q_grid: Vec<f64>,
    pub n_max: usize,
    /// Overrides the per-check default tolerance when set.
    pub tol: Option<f64>,
    pub function: String,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
}

pub const DEFAULT_Q_GRID: [f64; 4] = [0.3, 0.5, 0.7, 0.9];

impl RunConfig {
    /// Validates the raw flags. `q` and `q_grid` are merged in that order;
    /// with neither given, `default_grid` is used.
    #[allow(clippy::too_many_arguments)]
    pub fn build(
        q: Option<f64>,
        q_grid: Option<Vec<f64>>,
        default_grid: &[f64],
        n_max: usize,
        tol: Option<f64>,
        function: String,
        out: Option<PathBuf>,
        format: Format,
        seed: Option<u64>,
    ) -> Result<Self, CliError> {
        let mut grid: Vec<f64> = q.into_iter().chain(q_grid.unwrap_or_default()).collect();
        if grid.is_empty() {
            grid = default_grid.to_vec();
        }
        if let Some(bad) = grid.iter().find(|q| !(**q > 0.0 && **q < 1.0)) {
            return Err(CliError::Config(format!("q = {bad} is outside (0, 1)")));
        }
        if n_max == 0 {
            return Err(CliError::Config("--nmax must be at least 1".into()));
        }
        if let Some(t) = tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Config(format!("tolerance {t} must be positive")));
            }
        }
        let seed = seed.unwrap_or_else(|| seed_from_q_grid(&grid));
        Ok(Self {
            q_grid: grid,
            n_max,
            tol,
            function,
            out,
            format,
            seed,
        })
    }

    pub fn tolerance(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build(q: Option<f64>, grid: Option<Vec<f64>>) -> Result<RunConfig, CliError> {
        RunConfig::build(q, grid, &DEFAULT_Q_GRID, 20, None, "bump".into(), None, Format::Json, None)
    }

    #[test]
    fn grid_merging_and_defaults() {
        assert_eq!(build(None, None).unwrap().q_grid, DEFAULT_Q_GRID.to_vec());
        assert_eq!(build(Some(0.4), Some(vec![0.6])).unwrap().q_grid, vec![0.4, 0.6]);
    }

    #[test]
    fn q_outside_the_interval_is_rejected() {
        assert!(matches!(build(Some(1.5), None), Err(CliError::Config(_))));
        assert!(matches!(build(None, Some(vec![0.5, 0.0])), Err(CliError::Config(_))));
        assert!(matches!(build(Some(f64::NAN), None), Err(CliError::Config(_))));
    }

    #[test]
    fn seed_defaults_to_the_grid_hash() {
        let a = build(None, Some(vec![0.5])).unwrap();
        let b = build(None, Some(vec![0.5])).unwrap();
        assert_eq!(a.seed, b.seed);
        assert_ne!(a.seed, build(None, Some(vec![0.6])).unwrap().seed);
    }
}
