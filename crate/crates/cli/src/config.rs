use std::path::{Path, PathBuf};

use evosynth::dataio::{load_csv_dataset, load_idx, synth_gaussians};
use evosynth::{Dataset, EvolutionConfig, LayerSpec};
use serde::Deserialize;

use crate::CliError;

/// Experiment description read by `evosynth evolve`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub layers: Vec<LayerSpec>,
    pub dataset: DatasetSource,
    #[serde(default)]
    pub evolution: EvolutionConfig,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    Csv {
        path: PathBuf,
    },
    Idx {
        images: PathBuf,
        labels: PathBuf,
        #[serde(default)]
        limit: Option<usize>,
    },
    Synthetic {
        n_per_class: usize,
        n_features: usize,
        separation: f64,
        #[serde(default)]
        seed: u64,
    },
}

impl DatasetSource {
    /// Parses the `--data` argument: a `.csv` path, a run-config `.json`,
    /// `idx:IMAGES,LABELS[,LIMIT]` or `synthetic:N_PER_CLASS,N_FEATURES,SEPARATION,SEED`.
    pub fn parse_arg(arg: &str) -> Result<DatasetSource, CliError> {
        let usage = |m: &str| CliError::usage(format!("--data {arg}: {m}"));
        if let Some(rest) = arg.strip_prefix("idx:") {
            let parts: Vec<&str> = rest.split(',').collect();
            if !(2..=3).contains(&parts.len()) {
                return Err(usage("expected idx:IMAGES,LABELS[,LIMIT]"));
            }
            let limit = match parts.get(2) {
                Some(l) => Some(l.parse().map_err(|_| usage("LIMIT must be an integer"))?),
                None => None,
            };
            return Ok(DatasetSource::Idx {
                images: parts[0].into(),
                labels: parts[1].into(),
                limit,
            });
        }
        if let Some(rest) = arg.strip_prefix("synthetic:") {
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() != 4 {
                return Err(usage("expected synthetic:N_PER_CLASS,N_FEATURES,SEPARATION,SEED"));
            }
            let int = |s: &str| s.parse::<u64>().map_err(|_| usage("expected integers"));
            return Ok(DatasetSource::Synthetic {
                n_per_class: int(parts[0])? as usize,
                n_features: int(parts[1])? as usize,
                separation: parts[2].parse().map_err(|_| usage("SEPARATION must be a number"))?,
                seed: int(parts[3])?,
            });
        }
        if arg.ends_with(".json") {
            return Ok(RunConfig::load(Path::new(arg))?.dataset);
        }
        Ok(DatasetSource::Csv { path: arg.into() })
    }

    fn paths_mut(&mut self) -> Vec<&mut PathBuf> {
        match self {
            DatasetSource::Csv { path } => vec![path],
            DatasetSource::Idx { images, labels, .. } => vec![images, labels],
            DatasetSource::Synthetic { .. } => Vec::new(),
        }
    }

    pub fn load(&self) -> Result<Dataset, CliError> {
        let data = match self {
            DatasetSource::Csv { path } => {
                require_file(path)?;
                load_csv_dataset(path)
            }
            DatasetSource::Idx { images, labels, limit } => {
                require_file(images)?;
                require_file(labels)?;
                load_idx(images, labels, *limit)
            }
            DatasetSource::Synthetic {
                n_per_class,
                n_features,
                separation,
                seed,
            } => synth_gaussians(*n_per_class, *n_features, *separation, *seed),
        };
        data.map_err(CliError::from)
    }
}

fn require_file(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::data(format!("data file not found: {}", path.display())))
    }
}

impl RunConfig {
    /// Reads and validates a config. Relative dataset paths are resolved
    /// against the config file's directory.
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("invalid config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in cfg.dataset.paths_mut() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        evosynth::netcore::validate_spec(&cfg.layers).map_err(|e| CliError::usage(e.to_string()))?;
        cfg.evolution.validate().map_err(|e| CliError::usage(e.to_string()))?;
        Ok(cfg)
    }
}
