//! Grid configuration files.
//!
//! A flat JSON object mapping each swept hyperparameter to a list of
//! candidate values, plus the settings held fixed across the sweep:
//!
//! ```json
//! {
//!   "h1": [50, 100], "h2": [35, 60], "epochs": [10], "k": [10, 50], "r": [20],
//!   "mode": "itf", "eval": "projection",
//!   "learning_rate": 0.05, "batch_size": 1, "seed": 42
//! }
//! ```
//!
//! Omitted keys take their defaults; the default axes span the search space
//! of the original study (layers 25..1024, epochs and r 10..30, k 5..50).

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::evaluation::{Grid, HyperParams, DEFAULT_SEED};
use crate::network::{TrainConfig, DEFAULT_BATCH_SIZE, DEFAULT_LEARNING_RATE};

pub const DEFAULT_H1: [usize; 6] = [25, 50, 100, 300, 640, 1024];
pub const DEFAULT_H2: [usize; 6] = [25, 35, 60, 160, 225, 840];
pub const DEFAULT_EPOCHS: [usize; 3] = [10, 20, 30];
pub const DEFAULT_K: [usize; 4] = [5, 10, 20, 50];
pub const DEFAULT_R: [usize; 3] = [10, 20, 30];

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfigFile {
    pub h1: Vec<usize>,
    pub h2: Vec<usize>,
    pub epochs: Vec<usize>,
    pub k: Vec<usize>,
    pub r: Vec<usize>,
    pub mode: String,
    pub eval: String,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for GridConfigFile {
    fn default() -> Self {
        GridConfigFile {
            h1: DEFAULT_H1.to_vec(),
            h2: DEFAULT_H2.to_vec(),
            epochs: DEFAULT_EPOCHS.to_vec(),
            k: DEFAULT_K.to_vec(),
            r: DEFAULT_R.to_vec(),
            mode: "itf".into(),
            eval: "projection".into(),
            learning_rate: DEFAULT_LEARNING_RATE,
            batch_size: DEFAULT_BATCH_SIZE,
            seed: DEFAULT_SEED,
        }
    }
}

impl GridConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid grid file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.is_file() {
            return Err(Error::NotFound { path: path.to_path_buf() });
        }
        GridConfigFile::parse(&std::fs::read_to_string(path)?)
    }

    /// Converts to a validated [`Grid`]; any bad value rejects the whole file.
    pub fn to_grid(&self) -> Result<Grid> {
        let mut base = HyperParams::baseline();
        base.mode = self.mode.parse()?;
        base.eval_mode = self.eval.parse()?;
        base.train = TrainConfig {
            epochs: base.train.epochs,
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            seed: self.seed,
        };
        let grid = Grid {
            h1: self.h1.clone(),
            h2: self.h2.clone(),
            epochs: self.epochs.clone(),
            k: self.k.clone(),
            r: self.r.clone(),
            base,
        };
        grid.validate()?;
        Ok(grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::EvalMode;
    use crate::representation::RepresentationMode;

    #[test]
    fn parses_full_file() {
        let g = GridConfigFile::parse(
            r#"{"h1":[50],"h2":[35],"epochs":[10],"k":[50],"r":[20],
                "mode":"binary","eval":"holdout","learning_rate":0.1,"batch_size":8,"seed":7}"#,
        )
        .unwrap()
        .to_grid()
        .unwrap();
        let c = g.configurations();
        assert_eq!(c.len(), 1);
        let hp = c[0];
        assert_eq!((hp.h1, hp.h2, hp.epochs(), hp.k, hp.r), (50, 35, 10, 50, 20));
        assert_eq!(hp.mode, RepresentationMode::Binary);
        assert_eq!(hp.eval_mode, EvalMode::HoldoutSource);
        assert_eq!(hp.train.seed, 7);
        assert_eq!(hp.train.batch_size, 8);
    }

    #[test]
    fn defaults_span_search_space() {
        let g = GridConfigFile::parse("{}").unwrap().to_grid().unwrap();
        for axis in [&g.h1, &g.h2] {
            assert!(axis.iter().all(|v| (25..=1024).contains(v)));
        }
        assert_eq!((g.h1[0], *g.h1.last().unwrap()), (25, 1024));
        assert!(g.epochs.iter().chain(&g.r).all(|v| (10..=30).contains(v)));
        assert_eq!((g.k[0], *g.k.last().unwrap()), (5, 50));
    }

    #[test]
    fn rejects_bad_files() {
        assert!(GridConfigFile::parse("{\"h1\": 5}").is_err());
        assert!(GridConfigFile::parse("{\"depth\": [1]}").is_err());
        assert!(GridConfigFile::parse("not json").is_err());
        let g = GridConfigFile::parse(r#"{"k":[5,1]}"#).unwrap();
        assert!(g.to_grid().is_err());
        let g = GridConfigFile::parse(r#"{"mode":"tfidf"}"#).unwrap();
        assert!(g.to_grid().is_err());
        let g = GridConfigFile::parse(r#"{"h2":[]}"#).unwrap();
        assert!(g.to_grid().is_err());
    }
}
