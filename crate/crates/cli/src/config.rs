//! Benchmark configuration and its `key = value` file form.

use std::path::PathBuf;

use serde_json::json;
use treepoly::{DatasetSpec, DistanceMetricId};

use crate::error::{Error, Result};

/// Everything that defines one benchmark run. Defaults are the full-scale
/// experiment: 100 sets of 3 × 100 trees with 100 leaves,
/// β ∈ {−1.5, −1, 0}, all six metrics, k = 3, 10 restarts.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub n_sets: usize,
    pub per_group: usize,
    pub n_leaves: usize,
    pub betas: Vec<f64>,
    pub metrics: Vec<DistanceMetricId>,
    pub k: usize,
    pub repeats: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Write `trees.tsv`, `coeffs.ndjson` and `dist_<metric>.csv` per set.
    pub write_intermediates: bool,
}

pub const DEFAULT_SEED: u64 = 1;

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            n_sets: 100,
            per_group: 100,
            n_leaves: 100,
            betas: vec![-1.5, -1.0, 0.0],
            metrics: DistanceMetricId::ALL.to_vec(),
            k: 3,
            repeats: 10,
            seed: DEFAULT_SEED,
            out_dir: PathBuf::from("bench_out"),
            write_intermediates: true,
        }
    }
}

pub fn parse_betas(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|b| {
            b.trim()
                .parse::<f64>()
                .map_err(|_| Error::Usage(format!("invalid beta {b:?}")))
        })
        .collect()
}

pub fn parse_metrics(s: &str) -> Result<Vec<DistanceMetricId>> {
    if s.trim() == "all" {
        return Ok(DistanceMetricId::ALL.to_vec());
    }
    s.split(',')
        .map(|m| m.trim().parse::<DistanceMetricId>().map_err(|e| Error::Usage(e.to_string())))
        .collect()
}

impl BenchmarkConfig {
    /// Reads `key = value` lines over the defaults. Keys are the field
    /// names; `#` starts a comment; lists are comma-separated.
    pub fn from_config_text(text: &str) -> Result<Self> {
        let mut cfg = BenchmarkConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let lineno = n + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(lineno, "expected key = value"))?;
            cfg.set(key.trim(), value.trim()).map_err(|e| Error::parse(lineno, e.to_string()))?;
        }
        Ok(cfg)
    }

    /// Sets one field from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let int = |v: &str| v.parse::<usize>().map_err(|_| Error::Usage(format!("{key}: invalid integer {v:?}")));
        match key {
            "n_sets" => self.n_sets = int(value)?,
            "per_group" => self.per_group = int(value)?,
            "n_leaves" => self.n_leaves = int(value)?,
            "k" => self.k = int(value)?,
            "repeats" => self.repeats = int(value)?,
            "seed" => {
                self.seed = value.parse().map_err(|_| Error::Usage(format!("seed: invalid integer {value:?}")))?
            }
            "betas" => self.betas = parse_betas(value)?,
            "metrics" => self.metrics = parse_metrics(value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "write_intermediates" => {
                self.write_intermediates = value
                    .parse()
                    .map_err(|_| Error::Usage(format!("write_intermediates: expected true or false, got {value:?}")))?
            }
            _ => return Err(Error::Usage(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.dataset().validate().map_err(|e| Error::Usage(e.to_string()))?;
        if self.metrics.is_empty() {
            return Err(Error::Usage("at least one metric is required".into()));
        }
        if self.repeats == 0 {
            return Err(Error::Usage("repeats must be at least 1".into()));
        }
        let items = self.per_group * self.betas.len();
        if self.k < 2 || self.k > items {
            return Err(Error::Usage(format!("k = {} must lie in 2..={items}", self.k)));
        }
        Ok(())
    }

    pub fn dataset(&self) -> DatasetSpec {
        DatasetSpec {
            n_sets: self.n_sets,
            per_group: self.per_group,
            betas: self.betas.clone(),
            n_leaves: self.n_leaves,
            seed: self.seed,
        }
    }

    /// The fields that determine the rows CSV.
    pub fn identity(&self) -> serde_json::Value {
        json!({
            "n_sets": self.n_sets,
            "per_group": self.per_group,
            "n_leaves": self.n_leaves,
            "betas": self.betas,
            "metrics": self.metrics.iter().map(|m| m.name()).collect::<Vec<_>>(),
            "k": self.k,
            "repeats": self.repeats,
            "seed": self.seed,
        })
    }

    /// Full echo for the run manifest.
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = self.identity();
        v["out_dir"] = json!(self.out_dir.display().to_string());
        v["write_intermediates"] = json!(self.write_intermediates);
        v
    }
}
