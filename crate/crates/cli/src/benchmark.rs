//! End-to-end benchmark: generate sets, encode, measure, cluster, score.
//!
//! Output layout under `out_dir`:
//!
//! ```text
//! manifest.json
//! rows.csv            set_id,metric,repeat,accuracy
//! summary.csv         metric,n_sets,mean,min,max
//! set_means.csv       set_id,metric,mean_accuracy
//! set_<id>/rows.csv   this set's rows; written last, marks the set done
//! set_<id>/trees.tsv, coeffs.ndjson, dist_<metric>.csv
//! ```
//!
//! A set whose `rows.csv` exists is not recomputed, so an interrupted run
//! resumes where it stopped and produces the same top-level `rows.csv`.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::json;
use treepoly::rng::derive_seed;
use treepoly::{
    pairwise_distance_matrix, repeated_clustering_accuracy, tree_polynomial, CoefficientMatrix,
    DatasetSpec, DistanceMetricId, LabeledTreeSet,
};

use crate::config::BenchmarkConfig;
use crate::error::{Error, IoContext, Result};
use crate::formats::{self, BenchmarkRow, CoeffRecord, MetricSummary, SetMean, FORMAT_VERSION};

/// Tag mixed into the run seed to get per-set clustering seeds.
const CLUSTER_TAG: u64 = 0x636c_7573_7465_72;

/// Base seed for the k-medoids restarts of set `set_id`; restart `r` then
/// uses `treepoly::repeat_seed(base, r)`.
pub fn cluster_seed(seed: u64, set_id: u32) -> u64 {
    derive_seed(derive_seed(seed, CLUSTER_TAG), u64::from(set_id))
}

/// Writes `path` through a temporary file in the same directory and renames
/// it into place, so readers never see a partial file.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<&mut tempfile::NamedTempFile>) -> io::Result<()>,
{
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).at(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).at(dir)?;
    {
        let mut w = BufWriter::new(&mut tmp);
        fill(&mut w).at(path)?;
        w.flush().at(path)?;
    }
    tmp.persist(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e.error })?;
    Ok(())
}

/// Coefficient matrices (side `n_leaves + 1`) of every tree in the set.
pub fn encode_set(set: &LabeledTreeSet) -> Vec<CoefficientMatrix> {
    set.entries
        .iter()
        .map(|e| CoefficientMatrix::of_polynomial(&tree_polynomial(&e.tree)))
        .collect()
}

pub fn set_dir(out_dir: &Path, set_id: u32) -> PathBuf {
    out_dir.join(format!("set_{set_id}"))
}

/// Runs one set and writes its files; returns its rows in
/// (metric, repeat) order.
pub fn run_set(cfg: &BenchmarkConfig, set_id: u32) -> Result<Vec<BenchmarkRow>> {
    let dir = set_dir(&cfg.out_dir, set_id);
    let set = cfg.dataset().generate_set(set_id).map_err(Error::data)?;
    let matrices = encode_set(&set);
    let labels = set.labels();

    if cfg.write_intermediates {
        write_atomic(&dir.join("trees.tsv"), |w| formats::write_tree_set(w, &set))?;
        write_atomic(&dir.join("coeffs.ndjson"), |w| {
            for (i, (e, m)) in set.entries.iter().zip(&matrices).enumerate() {
                formats::write_coeff_record(w, &CoeffRecord::new(set_id, i, &e.label, m))?;
            }
            Ok(())
        })?;
    }

    let seed = cluster_seed(cfg.seed, set_id);
    let mut rows = Vec::with_capacity(cfg.metrics.len() * cfg.repeats);
    for &metric in &cfg.metrics {
        let d = pairwise_distance_matrix(&matrices, metric).map_err(Error::data)?;
        if cfg.write_intermediates {
            let path = dir.join(format!("dist_{}.csv", metric.name()));
            write_atomic(&path, |w| formats::write_distance_csv(w, &d))?;
        }
        let acc = repeated_clustering_accuracy(&d, &labels, cfg.k, cfg.repeats, seed)
            .map_err(Error::data)?;
        rows.extend(acc.per_repeat.into_iter().enumerate().map(|(repeat, accuracy)| {
            BenchmarkRow { set_id, metric: metric.name().to_string(), repeat, accuracy }
        }));
    }
    write_atomic(&dir.join("rows.csv"), |w| formats::write_rows(w, &rows))?;
    Ok(rows)
}

fn read_rows_file(path: &Path) -> Result<Vec<BenchmarkRow>> {
    let f = File::open(path).at(path)?;
    formats::read_rows(BufReader::new(f)).map_err(|e| e.in_file(path))
}

/// Result of [`run_benchmark`].
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkOutcome {
    pub rows: Vec<BenchmarkRow>,
    pub summary: Vec<MetricSummary>,
    pub set_means: Vec<SetMean>,
    /// Sets taken from an earlier, interrupted run.
    pub resumed_sets: usize,
}

fn manifest(cfg: &BenchmarkConfig) -> serde_json::Value {
    json!({
        "format_version": FORMAT_VERSION,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "seed": cfg.seed,
        "config": cfg.to_json(),
        "rng": "ChaCha8 (rand_chacha), key seed_from_u64(seed); tree stream (set<<32)|(group<<24)|index",
    })
}

/// Runs every set (in parallel on the current rayon pool) and writes the
/// top-level files.
pub fn run_benchmark(cfg: &BenchmarkConfig) -> Result<BenchmarkOutcome> {
    cfg.validate()?;
    let out = &cfg.out_dir;
    fs::create_dir_all(out).at(out)?;

    let manifest_path = out.join("manifest.json");
    if manifest_path.exists() {
        let text = fs::read_to_string(&manifest_path).at(&manifest_path)?;
        let old: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| Error::Data(format!("{}: {e}", manifest_path.display())))?;
        let same = old["format_version"] == json!(FORMAT_VERSION)
            && cfg.identity().as_object().is_some_and(|id| {
                id.iter().all(|(k, v)| old["config"].get(k) == Some(v))
            });
        if !same {
            return Err(Error::Data(format!(
                "{} belongs to a run with a different configuration",
                out.display()
            )));
        }
    }
    write_atomic(&manifest_path, |w| {
        serde_json::to_writer_pretty(&mut *w, &manifest(cfg))?;
        w.write_all(b"\n")
    })?;

    let per_set: Vec<(Vec<BenchmarkRow>, bool)> = (0..cfg.n_sets as u32)
        .into_par_iter()
        .map(|set_id| {
            let done = set_dir(out, set_id).join("rows.csv");
            if done.exists() {
                Ok((read_rows_file(&done)?, true))
            } else {
                Ok((run_set(cfg, set_id)?, false))
            }
        })
        .collect::<Result<_>>()?;

    let resumed_sets = per_set.iter().filter(|(_, resumed)| *resumed).count();
    let rows: Vec<BenchmarkRow> = per_set.into_iter().flat_map(|(r, _)| r).collect();
    let (summary, set_means) = summarize(&rows);
    write_atomic(&out.join("rows.csv"), |w| formats::write_rows(w, &rows))?;
    write_atomic(&out.join("summary.csv"), |w| formats::write_summary(w, &summary))?;
    write_atomic(&out.join("set_means.csv"), |w| formats::write_set_means(w, &set_means))?;
    Ok(BenchmarkOutcome { rows, summary, set_means, resumed_sets })
}

/// Sort key putting the six distance metrics first in their usual order
/// and any other method (e.g. autoencoder rows) after, by name.
fn metric_rank(name: &str) -> (usize, &str) {
    let pos = DistanceMetricId::ALL.iter().position(|m| m.name() == name);
    (pos.unwrap_or(DistanceMetricId::ALL.len()), name)
}

/// Per-set means (over repeats) and per-metric mean/min/max of those means.
pub fn summarize(rows: &[BenchmarkRow]) -> (Vec<MetricSummary>, Vec<SetMean>) {
    let mut groups: BTreeMap<((usize, &str), u32), Vec<(usize, f64)>> = BTreeMap::new();
    for r in rows {
        groups.entry((metric_rank(&r.metric), r.set_id)).or_default().push((r.repeat, r.accuracy));
    }
    let mut set_means = Vec::with_capacity(groups.len());
    for (((_, metric), set_id), mut accs) in groups {
        accs.sort_by_key(|&(repeat, _)| repeat);
        let mean = accs.iter().map(|a| a.1).sum::<f64>() / accs.len() as f64;
        set_means.push(SetMean { set_id, metric: metric.to_string(), mean });
    }

    let mut summary: Vec<MetricSummary> = Vec::new();
    for m in &set_means {
        match summary.last_mut() {
            Some(s) if s.metric == m.metric => {
                s.n_sets += 1;
                s.mean += m.mean;
                s.min = s.min.min(m.mean);
                s.max = s.max.max(m.mean);
            }
            _ => summary.push(MetricSummary {
                metric: m.metric.clone(),
                n_sets: 1,
                mean: m.mean,
                min: m.mean,
                max: m.mean,
            }),
        }
    }
    for s in &mut summary {
        s.mean /= s.n_sets as f64;
    }
    set_means.sort_by(|a, b| (a.set_id, metric_rank(&a.metric)).cmp(&(b.set_id, metric_rank(&b.metric))));
    (summary, set_means)
}

/// Writes `<out_dir>/set_<id>.ndjson` for every set: each tree's
/// coefficient matrix divided by its maximum entry.
pub fn export_ae_input(spec: &DatasetSpec, out_dir: &Path) -> Result<Vec<PathBuf>> {
    spec.validate().map_err(|e| Error::Usage(e.to_string()))?;
    fs::create_dir_all(out_dir).at(out_dir)?;
    (0..spec.n_sets as u32)
        .into_par_iter()
        .map(|set_id| {
            let set = spec.generate_set(set_id).map_err(Error::data)?;
            let path = out_dir.join(format!("set_{set_id}.ndjson"));
            write_atomic(&path, |w| {
                for (i, (e, m)) in set.entries.iter().zip(encode_set(&set)).enumerate() {
                    let rec = CoeffRecord::new(set_id, i, &e.label, &m.normalized());
                    formats::write_coeff_record(w, &rec)?;
                }
                Ok(())
            })?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(set_id: u32, metric: &str, repeat: usize, accuracy: f64) -> BenchmarkRow {
        BenchmarkRow { set_id, metric: metric.into(), repeat, accuracy }
    }

    #[test]
    fn summary_of_one_row() {
        let (s, m) = summarize(&[row(0, "canberra", 0, 0.8)]);
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].mean, s[0].min, s[0].max, s[0].n_sets), (0.8, 0.8, 0.8, 1));
        assert_eq!(m, [SetMean { set_id: 0, metric: "canberra".into(), mean: 0.8 }]);
    }

    #[test]
    fn set_mean_over_repeats() {
        let (s, m) = summarize(&[row(0, "euclidean", 0, 0.6), row(0, "euclidean", 1, 1.0)]);
        assert!((m[0].mean - 0.8).abs() < 1e-15);
        assert!((s[0].mean - 0.8).abs() < 1e-15);
    }

    #[test]
    fn metric_mean_min_max_over_sets() {
        let (s, _) = summarize(&[row(1, "manhattan", 0, 0.7), row(0, "manhattan", 0, 0.9)]);
        assert!((s[0].mean - 0.8).abs() < 1e-15);
        assert_eq!((s[0].min, s[0].max, s[0].n_sets), (0.7, 0.9, 2));
    }

    #[test]
    fn metric_order_is_canonical_then_by_name() {
        let rows = [
            row(0, "linear_ae", 0, 0.5),
            row(0, "bray_curtis", 0, 0.5),
            row(0, "conv_ae", 0, 0.5),
            row(0, "euclidean", 0, 0.5),
        ];
        let (s, _) = summarize(&rows);
        let names: Vec<_> = s.iter().map(|x| x.metric.as_str()).collect();
        assert_eq!(names, ["euclidean", "bray_curtis", "conv_ae", "linear_ae"]);
    }

    #[test]
    fn cluster_seeds_differ_by_set() {
        assert_ne!(cluster_seed(1, 0), cluster_seed(1, 1));
        assert_eq!(cluster_seed(5, 3), cluster_seed(5, 3));
    }
}
