//! Run configuration: a flat bag of optional settings that can come from
//! a JSON file (`--config`) or from command-line flags, flags winning
//! field by field. Stochastic commands must end up with an explicit seed;
//! there is no wall-clock fallback.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sispread_core::iet::IetDistribution;

use crate::error::AppError;

/// All tunables of all subcommands; unset fields fall back to flag values
/// and then to protocol defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: Option<String>,
    pub models: Option<String>,
    pub n: Option<usize>,
    pub side: Option<usize>,
    pub avg_k: Option<f64>,
    pub m: Option<usize>,
    pub sweeps: Option<usize>,
    pub dist: Option<String>,
    pub p_grid: Option<String>,
    pub runs: Option<usize>,
    pub bridges_ratio: Option<f64>,
    pub no_bridges: Option<bool>,
    pub p_inf_cutoff: Option<f64>,
    pub mode: Option<String>,
    pub protocol_defaults: Option<bool>,
    pub horizon: Option<f64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub prune_fixpoint: Option<bool>,
    pub pooling: Option<String>,
    pub rescale: Option<bool>,
    pub spread: Option<bool>,
    pub n_white: Option<usize>,
    pub n_external: Option<usize>,
    pub cdr: Option<PathBuf>,
    pub zips: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &std::path::Path) -> Result<RunConfig, AppError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AppError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| AppError::Usage(format!("bad config {}: {e}", path.display())))
    }

    /// Field-wise overlay: any field set in `over` replaces this one's.
    pub fn overlaid(mut self, over: RunConfig) -> RunConfig {
        macro_rules! take {
            ($($f:ident),+ $(,)?) => {
                $(if over.$f.is_some() { self.$f = over.$f; })+
            };
        }
        take!(
            model, models, n, side, avg_k, m, sweeps, dist, p_grid, runs, bridges_ratio,
            no_bridges, p_inf_cutoff, mode, protocol_defaults, horizon, seed, workers,
            prune_fixpoint, pooling,
            rescale, spread, n_white, n_external, cdr, zips, out, out_dir,
        );
        self
    }

    pub fn require_seed(&self) -> Result<u64, AppError> {
        self.seed
            .ok_or_else(|| AppError::Usage("an explicit --seed is required".into()))
    }
}

/// Parses a distribution list such as `pow:0.008:1.2,match-exp`; the
/// `match-exp` token expands to the mean-matched shifted exponential of
/// the preceding entry.
pub fn parse_dist_list(spec: &str) -> Result<Vec<IetDistribution>, AppError> {
    let mut dists: Vec<IetDistribution> = Vec::new();
    for token in spec.split(',') {
        let token = token.trim();
        if token == "match-exp" {
            let prev = dists
                .last()
                .ok_or_else(|| AppError::Usage("match-exp needs a preceding distribution".into()))?;
            dists.push(prev.match_mean().map_err(|e| AppError::Usage(e.to_string()))?);
        } else {
            dists.push(IetDistribution::parse(token).map_err(|e| AppError::Usage(e.to_string()))?);
        }
    }
    if dists.is_empty() {
        return Err(AppError::Usage("empty distribution list".into()));
    }
    Ok(dists)
}

/// Parses a dilution grid `start:stop:step` (inclusive) or a comma list.
pub fn parse_p_grid(spec: &str) -> Result<Vec<f64>, AppError> {
    let bad = |msg: String| AppError::Usage(msg);
    let grid: Vec<f64> = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad(format!("p grid range must be start:stop:step, got `{spec}`")));
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| bad(format!("bad number `{s}` in `{spec}`"))))
            .collect::<Result<_, _>>()?;
        let (start, stop, step) = (nums[0], nums[1], nums[2]);
        if !(step > 0.0) || stop < start {
            return Err(bad(format!("need start <= stop and step > 0 in `{spec}`")));
        }
        let count = ((stop - start) / step).round() as usize + 1;
        (0..count).map(|i| start + i as f64 * step).collect()
    } else {
        spec.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| bad(format!("bad probability `{s}` in `{spec}`")))
            })
            .collect::<Result<_, _>>()?
    };
    if grid.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
        return Err(bad(format!("probabilities must lie in [0,1] in `{spec}`")));
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlay_prefers_flag_values() {
        let file = RunConfig { n: Some(100), seed: Some(7), ..Default::default() };
        let flags = RunConfig { n: Some(200), ..Default::default() };
        let merged = file.overlaid(flags);
        assert_eq!(merged.n, Some(200));
        assert_eq!(merged.seed, Some(7));
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = RunConfig {
            model: Some("er".into()),
            n: Some(5000),
            avg_k: Some(12.0),
            seed: Some(1),
            dist: Some("pow:0.008:1.2,match-exp".into()),
            ..Default::default()
        };
        let text = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn unknown_config_fields_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>("{\"bogus\": 1}").is_err());
    }

    #[test]
    fn dist_list_expands_match_exp() {
        let dists = parse_dist_list("pow:0.008:1.2,match-exp").unwrap();
        assert_eq!(dists.len(), 2);
        assert_eq!(dists[0], IetDistribution::PowerLaw { t_min: 0.008, alpha: 1.2 });
        match dists[1] {
            IetDistribution::ShiftedExp { t_min, lambda } => {
                assert_eq!(t_min, 0.008);
                assert!((lambda - 0.048).abs() < 1e-15);
            }
            _ => panic!("expected exponential"),
        }
        assert!(parse_dist_list("match-exp").is_err());
        assert!(parse_dist_list("").is_err());
    }

    #[test]
    fn p_grid_forms() {
        let grid = parse_p_grid("0:1:0.05").unwrap();
        assert_eq!(grid.len(), 21);
        assert_eq!(grid[0], 0.0);
        assert!((grid[20] - 1.0).abs() < 1e-12);
        assert_eq!(parse_p_grid("0.1,0.5").unwrap(), vec![0.1, 0.5]);
        assert!(parse_p_grid("0:2:0.5").is_err());
        assert!(parse_p_grid("x").is_err());
    }
}
