//! On-disk formats.
//!
//! * tree dataset TSV: `set_id<TAB>beta_label<TAB>newick`, one tree per line;
//! * coefficient NDJSON: `{"set_id","index","label","size","matrix"}` per
//!   line, `matrix` row-major with the row index being the power of `x`;
//! * distance matrix CSV: `# metric=<name> n=<N>` then `N` rows of `N`
//!   values with 12 significant digits;
//! * cluster CSV: `item_index,predicted_cluster,truth_label` plus a
//!   `# objective=<v> iterations=<n>` trailer;
//! * benchmark rows CSV: `set_id,metric,repeat,accuracy`;
//! * summary CSV: `metric,n_sets,mean,min,max`, and per-set means CSV
//!   `set_id,metric,mean_accuracy`.
//!
//! All text is UTF-8 with LF line endings.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use treepoly::{
    parse_newick, to_newick, ClusteringResult, CoefficientMatrix, DistanceMatrix,
    DistanceMetricId, LabeledTreeSet, RootedTree,
};

use crate::error::{Error, Result};

/// Bumped whenever one of the formats above changes.
pub const FORMAT_VERSION: u32 = 1;

/// One line of a tree dataset file.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeRecord {
    pub set_id: u32,
    pub label: String,
    pub tree: RootedTree,
}

pub fn write_tree_line<W: Write + ?Sized>(w: &mut W, set_id: u32, label: &str, tree: &RootedTree) -> io::Result<()> {
    writeln!(w, "{set_id}\t{label}\t{}", to_newick(tree))
}

pub fn write_tree_set<W: Write + ?Sized>(w: &mut W, set: &LabeledTreeSet) -> io::Result<()> {
    for e in &set.entries {
        write_tree_line(w, set.set_id, &e.label, &e.tree)?;
    }
    Ok(())
}

/// Reads a tree dataset. Blank lines are skipped.
pub fn read_trees<R: BufRead>(r: R) -> Result<Vec<TreeRecord>> {
    let mut out = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let lineno = n + 1;
        let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.splitn(3, '\t');
        let (Some(set_id), Some(label), Some(newick)) = (fields.next(), fields.next(), fields.next())
        else {
            return Err(Error::parse(lineno, "expected set_id<TAB>beta_label<TAB>newick"));
        };
        let set_id = set_id
            .parse()
            .map_err(|_| Error::parse(lineno, format!("invalid set_id {set_id:?}")))?;
        if label.is_empty() {
            return Err(Error::parse(lineno, "empty beta_label"));
        }
        let tree = parse_newick(newick).map_err(|e| Error::parse(lineno, format!("newick: {e}")))?;
        out.push(TreeRecord { set_id, label: label.to_string(), tree });
    }
    Ok(out)
}

/// One line of a coefficient NDJSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffRecord {
    pub set_id: u32,
    pub index: usize,
    pub label: String,
    pub size: usize,
    pub matrix: Vec<Vec<f64>>,
}

impl CoeffRecord {
    pub fn new(set_id: u32, index: usize, label: &str, m: &CoefficientMatrix) -> Self {
        CoeffRecord { set_id, index, label: label.to_string(), size: m.size(), matrix: m.to_dense() }
    }

    pub fn to_matrix(&self) -> Result<CoefficientMatrix> {
        CoefficientMatrix::from_dense(&self.matrix).map_err(Error::data)
    }
}

pub fn write_coeff_record<W: Write + ?Sized>(w: &mut W, rec: &CoeffRecord) -> io::Result<()> {
    serde_json::to_writer(&mut *w, rec)?;
    w.write_all(b"\n")
}

/// Reads coefficient NDJSON, checking that every matrix is `size`×`size`
/// with finite nonnegative entries.
pub fn read_coeffs<R: BufRead>(r: R) -> Result<Vec<CoeffRecord>> {
    let mut out = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let lineno = n + 1;
        let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: CoeffRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(lineno, e.to_string()))?;
        if rec.matrix.len() != rec.size || rec.matrix.iter().any(|row| row.len() != rec.size) {
            return Err(Error::parse(lineno, format!("matrix is not {0}x{0}", rec.size)));
        }
        if rec.matrix.iter().flatten().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::parse(lineno, "matrix entries must be finite and nonnegative"));
        }
        out.push(rec);
    }
    Ok(out)
}

/// `v` with 12 significant digits, in the style of C's `%.12g`.
pub fn format_sig12(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let fixed = format!("{:.*}", (11 - exp) as usize, v);
        trim_fraction(&fixed).to_string()
    } else {
        format!("{}e{exp}", trim_fraction(mantissa))
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_distance_csv<W: Write + ?Sized>(w: &mut W, d: &DistanceMatrix) -> io::Result<()> {
    let name = d.metric().map_or("unknown", DistanceMetricId::name);
    writeln!(w, "# metric={name} n={}", d.len())?;
    let mut line = String::new();
    for a in 0..d.len() {
        line.clear();
        for (b, v) in d.row(a).iter().enumerate() {
            if b > 0 {
                line.push(',');
            }
            line.push_str(&format_sig12(*v));
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    Ok(())
}

pub fn read_distance_csv<R: BufRead>(r: R) -> Result<DistanceMatrix> {
    let mut lines = r.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line.map_err(|e| Error::parse(1, e.to_string()))?,
        None => return Err(Error::parse(1, "empty distance file")),
    };
    let mut metric = None;
    let mut n = None;
    let fields = header
        .strip_prefix('#')
        .ok_or_else(|| Error::parse(1, "expected '# metric=<name> n=<N>' header"))?;
    for field in fields.split_whitespace() {
        match field.split_once('=') {
            Some(("metric", "unknown")) => {}
            Some(("metric", name)) => {
                metric = Some(name.parse::<DistanceMetricId>().map_err(|e| Error::parse(1, e.to_string()))?)
            }
            Some(("n", count)) => {
                n = Some(count.parse::<usize>().map_err(|_| Error::parse(1, "invalid n"))?)
            }
            _ => return Err(Error::parse(1, format!("unexpected header field {field:?}"))),
        }
    }
    let n = n.ok_or_else(|| Error::parse(1, "header lacks n=<N>"))?;
    let mut rows = Vec::with_capacity(n);
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| Error::parse(lineno, "invalid number"))?;
        if row.len() != n {
            return Err(Error::parse(lineno, format!("expected {n} values, found {}", row.len())));
        }
        rows.push(row);
    }
    if rows.len() != n {
        return Err(Error::parse(n + 1, format!("expected {n} rows, found {}", rows.len())));
    }
    DistanceMatrix::from_rows(&rows, metric).map_err(Error::data)
}

pub fn write_cluster_csv<W: Write + ?Sized>(
    w: &mut W,
    result: &ClusteringResult,
    truth: &[String],
) -> io::Result<()> {
    writeln!(w, "item_index,predicted_cluster,truth_label")?;
    for (i, (c, label)) in result.assignments.iter().zip(truth).enumerate() {
        writeln!(w, "{i},{c},{label}")?;
    }
    writeln!(w, "# objective={} iterations={}", result.objective, result.n_iterations)
}

/// One clustering score: set, metric, repeat index and accuracy.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub set_id: u32,
    pub metric: String,
    pub repeat: usize,
    pub accuracy: f64,
}

pub const ROWS_HEADER: &str = "set_id,metric,repeat,accuracy";

pub fn write_rows<W: Write + ?Sized>(w: &mut W, rows: &[BenchmarkRow]) -> io::Result<()> {
    writeln!(w, "{ROWS_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.set_id, r.metric, r.repeat, r.accuracy)?;
    }
    Ok(())
}

/// Reads a rows CSV. The header line is optional; `#` lines are comments.
pub fn read_rows<R: BufRead>(r: R) -> Result<Vec<BenchmarkRow>> {
    let mut out = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let lineno = n + 1;
        let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || (lineno == 1 && line == ROWS_HEADER) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let [set_id, metric, repeat, accuracy] = fields[..] else {
            return Err(Error::parse(lineno, format!("expected 4 fields, found {}", fields.len())));
        };
        let bad = |what: &str| Error::parse(lineno, format!("invalid {what}"));
        let accuracy: f64 = accuracy.parse().map_err(|_| bad("accuracy"))?;
        if !(accuracy > 0.0 && accuracy <= 1.0) {
            return Err(Error::parse(lineno, format!("accuracy {accuracy} outside (0, 1]")));
        }
        if metric.is_empty() {
            return Err(bad("metric"));
        }
        out.push(BenchmarkRow {
            set_id: set_id.parse().map_err(|_| bad("set_id"))?,
            metric: metric.to_string(),
            repeat: repeat.parse().map_err(|_| bad("repeat"))?,
            accuracy,
        });
    }
    Ok(out)
}

/// Mean, min and max over sets of the per-set mean accuracy.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSummary {
    pub metric: String,
    pub n_sets: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

/// Mean accuracy over the repeats of one (set, metric).
#[derive(Debug, Clone, PartialEq)]
pub struct SetMean {
    pub set_id: u32,
    pub metric: String,
    pub mean: f64,
}

pub fn write_summary<W: Write + ?Sized>(w: &mut W, summary: &[MetricSummary]) -> io::Result<()> {
    writeln!(w, "metric,n_sets,mean,min,max")?;
    for s in summary {
        writeln!(w, "{},{},{},{},{}", s.metric, s.n_sets, s.mean, s.min, s.max)?;
    }
    Ok(())
}

pub fn write_set_means<W: Write + ?Sized>(w: &mut W, means: &[SetMean]) -> io::Result<()> {
    writeln!(w, "set_id,metric,mean_accuracy")?;
    for m in means {
        writeln!(w, "{},{},{}", m.set_id, m.metric, m.mean)?;
    }
    Ok(())
}
