use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use treepoly::{
    kmedoids, pairwise_distance_matrix, tree_polynomial, CoefficientMatrix, DistanceMetricId,
    DEFAULT_MAX_ITER,
};
use treepoly_cli::benchmark::{self, write_atomic};
use treepoly_cli::config::{self, BenchmarkConfig};
use treepoly_cli::error::{Error, Result};
use treepoly_cli::formats::{self, CoeffRecord};

#[derive(Parser)]
#[command(name = "treepoly", version, about = "Tree polynomials, tree distances and clustering benchmarks")]
struct Cli {
    /// Random seed [default: 1]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (directory for benchmark, export-ae, summarize); stdout if omitted where allowed
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads, 0 = one per core
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct DataArgs {
    /// Number of tree sets
    #[arg(long)]
    sets: Option<usize>,
    /// Trees per beta value in each set
    #[arg(long)]
    per_group: Option<usize>,
    /// Leaves per tree
    #[arg(long)]
    leaves: Option<usize>,
    /// Comma-separated beta values, e.g. -1.5,-1,0
    #[arg(long, allow_hyphen_values = true)]
    betas: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate random beta-splitting trees as a dataset TSV
    Generate(DataArgs),
    /// Turn a dataset TSV into coefficient-matrix NDJSON
    Encode {
        /// Dataset TSV
        input: PathBuf,
        /// Matrix side; defaults to the largest leaf count plus one
        #[arg(long)]
        size: Option<usize>,
        /// Divide every matrix by its largest entry
        #[arg(long)]
        normalize: bool,
    },
    /// Pairwise distance matrix of the trees in a coefficient NDJSON file
    Distmat {
        /// Coefficient NDJSON
        input: PathBuf,
        #[arg(long)]
        metric: String,
        /// Use only records of this set (required when the file holds several)
        #[arg(long)]
        set_id: Option<u32>,
    },
    /// K-medoids clustering of a distance matrix CSV
    Cluster {
        /// Distance matrix CSV
        input: PathBuf,
        /// Truth labels: one per line, or a dataset TSV
        #[arg(long)]
        truth: PathBuf,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
    },
    /// Run the clustering-accuracy benchmark
    Benchmark {
        /// `key = value` config file; flags given alongside override it
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        data: DataArgs,
        /// Comma-separated metric names, or `all`
        #[arg(long)]
        metrics: Option<String>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        repeats: Option<usize>,
        /// Skip trees.tsv, coeffs.ndjson and dist_*.csv
        #[arg(long)]
        no_intermediates: bool,
    },
    /// Write max-normalized coefficient NDJSON per set for the autoencoder baselines
    ExportAe(DataArgs),
    /// Aggregate rows CSV files into summary.csv and set_means.csv
    Summarize {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("treepoly: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| Error::Usage(e.to_string()))?;
    pool.install(|| dispatch(cli))
}

fn read_file(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Writes to `out` atomically, or to stdout.
fn emit<F>(out: Option<&Path>, fill: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match out {
        Some(path) => write_atomic(path, |w| fill(w)),
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            fill(&mut w)
                .and_then(|()| w.flush())
                .map_err(|source| Error::Io { path: "<stdout>".into(), source })
        }
    }
}

fn require_dir(out: Option<PathBuf>, what: &str) -> Result<PathBuf> {
    out.ok_or_else(|| Error::Usage(format!("{what} needs --out <dir>")))
}

fn apply_data_args(cfg: &mut BenchmarkConfig, data: &DataArgs) -> Result<()> {
    if let Some(v) = data.sets {
        cfg.n_sets = v;
    }
    if let Some(v) = data.per_group {
        cfg.per_group = v;
    }
    if let Some(v) = data.leaves {
        cfg.n_leaves = v;
    }
    if let Some(v) = &data.betas {
        cfg.betas = config::parse_betas(v)?;
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    let out = cli.out.as_deref();
    match cli.command {
        Command::Generate(data) => {
            let mut cfg = BenchmarkConfig { seed: cli.seed.unwrap_or(config::DEFAULT_SEED), ..Default::default() };
            apply_data_args(&mut cfg, &data)?;
            let spec = cfg.dataset();
            spec.validate().map_err(|e| Error::Usage(e.to_string()))?;
            let sets = (0..spec.n_sets as u32)
                .map(|id| spec.generate_set(id).map_err(|e| Error::Data(e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            emit(out, |w| sets.iter().try_for_each(|s| formats::write_tree_set(w, s)))
        }
        Command::Encode { input, size, normalize } => {
            let records = formats::read_trees(read_file(&input)?).map_err(|e| e.in_file(&input))?;
            let polys: Vec<_> = records.iter().map(|r| tree_polynomial(&r.tree)).collect();
            let size = size.unwrap_or_else(|| {
                records
                    .iter()
                    .zip(&polys)
                    .map(|(r, p)| (r.tree.leaf_count() + 1).max(p.x_degree() + 1).max(p.y_degree() + 1))
                    .max()
                    .unwrap_or(1)
            });
            let mut index_in_set = std::collections::BTreeMap::<u32, usize>::new();
            let mut lines = Vec::with_capacity(records.len());
            for (r, p) in records.iter().zip(&polys) {
                let m = CoefficientMatrix::from_polynomial(p, size).map_err(|e| Error::Data(e.to_string()))?;
                let m = if normalize { m.normalized() } else { m };
                let idx = index_in_set.entry(r.set_id).or_default();
                lines.push(CoeffRecord::new(r.set_id, *idx, &r.label, &m));
                *idx += 1;
            }
            emit(out, |w| lines.iter().try_for_each(|rec| formats::write_coeff_record(w, rec)))
        }
        Command::Distmat { input, metric, set_id } => {
            let metric: DistanceMetricId = metric.parse().map_err(|e: treepoly::DistanceError| Error::Usage(e.to_string()))?;
            let records = formats::read_coeffs(read_file(&input)?).map_err(|e| e.in_file(&input))?;
            let set_id = match set_id {
                Some(id) => id,
                None => {
                    let first = records.first().map_or(0, |r| r.set_id);
                    if records.iter().any(|r| r.set_id != first) {
                        return Err(Error::Usage("input holds several sets; pick one with --set-id".into()));
                    }
                    first
                }
            };
            let chosen: Vec<&CoeffRecord> = records.iter().filter(|r| r.set_id == set_id).collect();
            let matrices = chosen.iter().map(|r| r.to_matrix()).collect::<Result<Vec<_>>>()?;
            let labels = chosen.iter().map(|r| r.label.clone()).collect();
            let d = pairwise_distance_matrix(&matrices, metric)
                .map_err(|e| Error::Data(e.to_string()))?
                .with_labels(labels)
                .map_err(|e| Error::Data(e.to_string()))?;
            emit(out, |w| formats::write_distance_csv(w, &d))
        }
        Command::Cluster { input, truth, k, max_iter } => {
            let d = formats::read_distance_csv(read_file(&input)?).map_err(|e| e.in_file(&input))?;
            let truth_labels = read_truth(&truth)?;
            if truth_labels.len() != d.len() {
                return Err(Error::Data(format!(
                    "{} truth labels for a {}-item distance matrix",
                    truth_labels.len(),
                    d.len()
                )));
            }
            let seed = cli.seed.unwrap_or(config::DEFAULT_SEED);
            let result = kmedoids(&d, k, seed, max_iter).map_err(|e| match e {
                treepoly::ClusteringError::InvalidK { .. } => Error::Usage(e.to_string()),
                _ => Error::Data(e.to_string()),
            })?;
            emit(out, |w| formats::write_cluster_csv(w, &result, &truth_labels))
        }
        Command::Benchmark { config: path, data, metrics, k, repeats, no_intermediates } => {
            let mut cfg = match &path {
                Some(p) => {
                    let text = fs::read_to_string(p).map_err(|source| Error::Io { path: p.clone(), source })?;
                    BenchmarkConfig::from_config_text(&text).map_err(|e| e.in_file(p))?
                }
                None => BenchmarkConfig::default(),
            };
            apply_data_args(&mut cfg, &data)?;
            if let Some(m) = metrics {
                cfg.metrics = config::parse_metrics(&m)?;
            }
            if let Some(v) = k {
                cfg.k = v;
            }
            if let Some(v) = repeats {
                cfg.repeats = v;
            }
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            if let Some(o) = cli.out {
                cfg.out_dir = o;
            } else if path.is_none() {
                return Err(Error::Usage("benchmark needs --out <dir> or a config with out_dir".into()));
            }
            if no_intermediates {
                cfg.write_intermediates = false;
            }
            let outcome = benchmark::run_benchmark(&cfg)?;
            let stdout = io::stdout();
            let mut w = stdout.lock();
            formats::write_summary(&mut w, &outcome.summary)
                .map_err(|source| Error::Io { path: "<stdout>".into(), source })
        }
        Command::ExportAe(data) => {
            let mut cfg = BenchmarkConfig { seed: cli.seed.unwrap_or(config::DEFAULT_SEED), ..Default::default() };
            apply_data_args(&mut cfg, &data)?;
            let dir = require_dir(cli.out, "export-ae")?;
            benchmark::export_ae_input(&cfg.dataset(), &dir)?;
            Ok(())
        }
        Command::Summarize { inputs } => {
            let mut rows = Vec::new();
            for p in &inputs {
                rows.extend(formats::read_rows(read_file(p)?).map_err(|e| e.in_file(p))?);
            }
            let (summary, set_means) = benchmark::summarize(&rows);
            match out {
                Some(dir) => {
                    write_atomic(&dir.join("summary.csv"), |w| formats::write_summary(w, &summary))?;
                    write_atomic(&dir.join("set_means.csv"), |w| formats::write_set_means(w, &set_means))
                }
                None => emit(None, |w| formats::write_summary(w, &summary)),
            }
        }
    }
}

/// One label per line, or the label column of a dataset TSV.
fn read_truth(path: &Path) -> Result<Vec<String>> {
    let mut labels = Vec::new();
    for (n, line) in read_file(path)?.lines().enumerate() {
        let line = line.map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let label = match line.split('\t').nth(1) {
            Some(l) => l,
            None => line.trim(),
        };
        if label.is_empty() {
            return Err(Error::Parse { path: Some(path.to_path_buf()), line: n + 1, message: "empty label".into() });
        }
        labels.push(label.to_string());
    }
    Ok(labels)
}
