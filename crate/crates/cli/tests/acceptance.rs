//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Run with `cargo test --release --test acceptance`.

use std::collections::HashSet;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use treepoly::rng::ChaCha8Rng;
use treepoly::{
    distance, evaluate, kmedoids, kmedoids_from, tree_polynomial, BetaSplitter, CoefficientMatrix,
    DistanceMatrix, DistanceMetricId, RootedTree,
};
use treepoly_cli::BenchmarkConfig;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

// Benchmark reproduction and ordering share one run.

const TARGET_MEANS: [(DistanceMetricId, f64); 6] = [
    (DistanceMetricId::Euclidean, 0.62),
    (DistanceMetricId::NormEuclidean, 0.89),
    (DistanceMetricId::Manhattan, 0.62),
    (DistanceMetricId::NormManhattan, 0.90),
    (DistanceMetricId::Canberra, 0.90),
    (DistanceMetricId::BrayCurtis, 0.85),
];
const TOLERANCE: f64 = 0.06;

fn benchmark_means(out: &Path) -> (Vec<(DistanceMetricId, f64)>, f64) {
    let cfg = BenchmarkConfig {
        n_sets: 20,
        per_group: 100,
        n_leaves: 100,
        k: 3,
        repeats: 10,
        out_dir: out.to_path_buf(),
        write_intermediates: false,
        ..Default::default()
    };
    let start = Instant::now();
    let outcome = treepoly_cli::run_benchmark(&cfg).expect("benchmark run");
    let secs = start.elapsed().as_secs_f64();
    let means = DistanceMetricId::ALL
        .iter()
        .map(|&m| {
            let s = outcome.summary.iter().find(|s| s.metric == m.name()).expect("metric in summary");
            assert_eq!(s.n_sets, 20);
            (m, s.mean)
        })
        .collect();
    (means, secs)
}

fn reproduction(means: &[(DistanceMetricId, f64)], secs: f64) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for ((m, got), (_, want)) in means.iter().zip(TARGET_MEANS) {
        let ok = (got - want).abs() <= TOLERANCE;
        pass &= ok;
        parts.push(format!("{m}={got:.4} (target {want:.2}{})", if ok { "" } else { " OUT" }));
    }
    check(pass, format!("{} ±{TOLERANCE}; {secs:.0}s", parts.join(", ")))
}

fn ordering(means: &[(DistanceMetricId, f64)]) -> Outcome {
    let get = |m| means.iter().find(|(id, _)| *id == m).unwrap().1;
    use DistanceMetricId::*;
    let normalized = get(NormEuclidean).min(get(NormManhattan)).min(get(Canberra));
    let raw = get(Euclidean).max(get(Manhattan));
    let bc = get(BrayCurtis);
    let gap = normalized - raw;
    check(
        gap >= 0.15 && raw < bc && bc < normalized,
        format!("min normalized {normalized:.4} - max unnormalized {raw:.4} = {gap:.4} (need >= 0.15); bray_curtis {bc:.4} strictly between"),
    )
}

// Polynomial completeness.

fn binary_shapes(max_n: usize) -> Vec<Vec<RootedTree>> {
    let mut by_size: Vec<Vec<RootedTree>> = vec![Vec::new(), vec![RootedTree::leaf()]];
    for n in 2..=max_n {
        let mut out = Vec::new();
        for left in 1..=n / 2 {
            for (i, a) in by_size[left].iter().enumerate() {
                for (j, b) in by_size[n - left].iter().enumerate() {
                    if 2 * left == n && j < i {
                        continue;
                    }
                    out.push(RootedTree::join([a.clone(), b.clone()]));
                }
            }
        }
        by_size.push(out);
    }
    by_size
}

fn completeness() -> Outcome {
    let start = Instant::now();
    let shapes = binary_shapes(8);
    let counts: Vec<usize> = shapes[1..].iter().map(Vec::len).collect();
    let polys: HashSet<_> = shapes.iter().flatten().map(tree_polynomial).collect();
    let total: usize = counts.iter().sum();
    let secs = start.elapsed().as_secs_f64();
    check(
        counts == [1, 1, 1, 2, 3, 6, 11, 23] && polys.len() == total && secs < 10.0,
        format!("shape counts {counts:?}, {} distinct polynomials of {total}, {secs:.3}s (limit 10s)", polys.len()),
    )
}

// Oracle equivalence.

fn numeric_recursion(t: &RootedTree, a: i64, b: i64) -> BigInt {
    let mut value: Vec<BigInt> = vec![BigInt::from(0); t.vertex_count()];
    for v in t.post_order() {
        value[v] = if t.is_leaf(v) {
            BigInt::from(a)
        } else {
            t.children(v).iter().fold(BigInt::from(1), |acc, &c| acc * &value[c]) + b
        };
    }
    value[t.root()].clone()
}

fn balanced(leaves: usize) -> RootedTree {
    if leaves == 1 {
        return RootedTree::leaf();
    }
    RootedTree::join([balanced(leaves / 2), balanced(leaves - leaves / 2)])
}

const SAMPLE_POINTS: [(i64, i64); 4] = [(2, 1), (1, 2), (3, 5), (-2, 3)];

fn agrees(t: &RootedTree) -> bool {
    let p = tree_polynomial(t);
    SAMPLE_POINTS.iter().all(|&(a, b)| {
        let exact = evaluate(&p, &BigRational::from_integer(a.into()), &BigRational::from_integer(b.into()));
        exact == BigRational::from_integer(numeric_recursion(t, a, b))
    })
}

fn oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7ac1e);
    let betas = [-1.5, -1.0, 0.0];
    let splitters: Vec<BetaSplitter> = betas.iter().map(|&b| BetaSplitter::new(b, 100).unwrap()).collect();
    let mut mismatches = 0;
    for _ in 0..1000 {
        let n = rng.random_range(5..=100);
        let s = &splitters[rng.random_range(0..splitters.len())];
        if !agrees(&s.generate(n, &mut rng)) {
            mismatches += 1;
        }
    }
    let big = balanced(64);
    let big_ok = agrees(&big);
    let two_63 = BigInt::from(1u64 << 63);
    let big_value = numeric_recursion(&big, 2, 1);
    check(
        mismatches == 0 && big_ok && big_value > two_63,
        format!(
            "1000 random trees x {} points: {mismatches} mismatches; balanced 64-leaf tree agrees={big_ok}, value at (2,1) = {big_value} > 2^63",
            SAMPLE_POINTS.len()
        ),
    )
}

// Metric axioms.

fn random_dense(rng: &mut ChaCha8Rng, size: usize) -> Vec<Vec<f64>> {
    let density = rng.random_range(0.0..1.0);
    let scale = [1.0, 100.0, 1e14][rng.random_range(0..3)];
    (0..size)
        .map(|_| {
            (0..size)
                .map(|_| {
                    if rng.random_bool(density) {
                        if rng.random_bool(0.5) {
                            f64::from(rng.random_range(1u32..50))
                        } else {
                            rng.random_range(0.0..scale)
                        }
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

fn single_entry(size: usize, i: usize, j: usize, v: f64) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; size]; size];
    m[i][j] = v;
    m
}

fn cm(rows: &[Vec<f64>]) -> CoefficientMatrix {
    CoefficientMatrix::from_dense(rows).unwrap()
}

fn metric_axioms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xa11_0e5);
    let zero = vec![vec![0.0; 3]; 3];
    let mut pairs = vec![
        (zero.clone(), zero.clone()),
        (zero.clone(), single_entry(3, 1, 0, 1.0)),
        (single_entry(3, 1, 0, 1.0), single_entry(3, 1, 0, 1.0)),
        (single_entry(3, 1, 0, 1.0), single_entry(3, 0, 2, 5.0)),
        (single_entry(3, 2, 2, 7.0), single_entry(3, 2, 2, 3.0)),
        (single_entry(1, 0, 0, 2.0), vec![vec![0.0]]),
    ];
    while pairs.len() < 1000 {
        let size = rng.random_range(1..=8);
        let a = random_dense(&mut rng, size);
        let b = if rng.random_bool(0.1) { a.clone() } else { random_dense(&mut rng, size) };
        pairs.push((a, b));
    }
    let mut failures = Vec::new();
    for (a, b) in &pairs {
        let (ca, cb) = (cm(a), cm(b));
        for metric in DistanceMetricId::ALL {
            let d = distance(metric, &ca, &cb);
            if !(d.is_finite() && d >= 0.0) {
                failures.push(format!("{metric}: value {d}"));
            }
            if d != distance(metric, &cb, &ca) {
                failures.push(format!("{metric}: asymmetric"));
            }
            if distance(metric, &ca, &ca) != 0.0 || (a == b && d != 0.0) {
                failures.push(format!("{metric}: identity"));
            }
        }
        let bc = distance(DistanceMetricId::BrayCurtis, &ca, &cb);
        if !(0.0..=1.0).contains(&bc) {
            failures.push(format!("bray_curtis {bc} outside [0,1]"));
        }
        let differing = a.iter().flatten().zip(b.iter().flatten()).filter(|(x, y)| x != y).count();
        let canberra = distance(DistanceMetricId::Canberra, &ca, &cb);
        if canberra > differing as f64 * (1.0 + 1e-12) {
            failures.push(format!("canberra {canberra} above {differing} differing entries"));
        }
    }
    let mut triangle_failures = 0;
    for _ in 0..1000 {
        let size = rng.random_range(1..=6);
        let (a, b, c) = (random_dense(&mut rng, size), random_dense(&mut rng, size), random_dense(&mut rng, size));
        let (ca, cb, cc) = (cm(&a), cm(&b), cm(&c));
        for metric in [DistanceMetricId::Euclidean, DistanceMetricId::Manhattan, DistanceMetricId::Canberra] {
            let (ab, bc, ac) = (distance(metric, &ca, &cb), distance(metric, &cb, &cc), distance(metric, &ca, &cc));
            if ac > (ab + bc) * (1.0 + 1e-12) + 1e-12 {
                triangle_failures += 1;
            }
        }
    }
    check(
        failures.is_empty() && triangle_failures == 0,
        format!(
            "{} pairs x 6 metrics: {} violations{}; 1000 triples: {triangle_failures} triangle violations",
            pairs.len(),
            failures.len(),
            failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default()
        ),
    )
}

// K-medoids.

fn random_distances(rng: &mut ChaCha8Rng, n: usize) -> DistanceMatrix {
    let mut rows = vec![vec![0.0; n]; n];
    let integer = rng.random_bool(0.5);
    for i in 0..n {
        for j in i + 1..n {
            let v = if integer { f64::from(rng.random_range(0u32..10)) } else { rng.random_range(0.0..1.0) };
            rows[i][j] = v;
            rows[j][i] = v;
        }
    }
    DistanceMatrix::from_rows(&rows, None).unwrap()
}

fn objective_of(d: &DistanceMatrix, medoids: &[usize]) -> f64 {
    (0..d.len()).map(|i| medoids.iter().map(|&m| d.get(i, m)).fold(f64::INFINITY, f64::min)).sum()
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if n < k {
        return Vec::new();
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

fn kmedoids_checks() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d_ed01d);
    let mut monotone_failures = 0;
    let mut small = Vec::new();
    for _ in 0..500 {
        let n = rng.random_range(2..=40);
        let k = rng.random_range(2..=n.min(6));
        let d = random_distances(&mut rng, n);
        let r = kmedoids(&d, k, rng.random(), 100).unwrap();
        let monotone = r.objective_trace.windows(2).all(|w| w[1] <= w[0]);
        let consistent = r.objective == objective_of(&d, &r.medoids) || (r.objective - objective_of(&d, &r.medoids)).abs() < 1e-9;
        if !(monotone && consistent) {
            monotone_failures += 1;
        }
        if n <= 8 && k <= 3 {
            small.push((d, k));
        }
    }
    // Every (N, k) combination with N <= 8, k <= 3 is covered as well.
    for n in 2..=8 {
        for k in 2..=3.min(n) {
            for _ in 0..20 {
                small.push((random_distances(&mut rng, n), k));
            }
        }
    }
    let mut disagreements = 0;
    let mut below_optimum = 0;
    let mut seeded_hits = 0;
    let mut seeded_runs = 0;
    for (d, k) in &small {
        let all = subsets(d.len(), *k);
        let optimum = all.iter().map(|s| objective_of(d, s)).fold(f64::INFINITY, f64::min);
        let best = all.iter().map(|s| kmedoids_from(d, s, 100).unwrap().objective).fold(f64::INFINITY, f64::min);
        if best != optimum {
            disagreements += 1;
        }
        for seed in 0..5 {
            let obj = kmedoids(d, *k, seed, 100).unwrap().objective;
            seeded_runs += 1;
            if obj < optimum {
                below_optimum += 1;
            }
            if obj == optimum {
                seeded_hits += 1;
            }
        }
    }
    check(
        monotone_failures == 0 && disagreements == 0 && below_optimum == 0,
        format!(
            "500 matrices (N<=40): {monotone_failures} non-monotone traces; {} instances N<=8,k<=3: {disagreements} disagree with exhaustive optimum, {below_optimum} below it; single seeded runs hit optimum {seeded_hits}/{seeded_runs}",
            small.len()
        ),
    )
}

// Determinism of the benchmark command.

fn determinism(scratch: &Path) -> Outcome {
    let run = |name: &str| -> Vec<u8> {
        let out = scratch.join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_treepoly"))
            .args(["benchmark", "--sets", "2", "--per-group", "10", "--leaves", "30", "--repeats", "3", "--seed", "42"])
            .arg("--out")
            .arg(&out)
            .stdout(std::process::Stdio::null())
            .status()
            .expect("spawn treepoly");
        assert!(status.success());
        std::fs::read(out.join("rows.csv")).unwrap()
    };
    let (a, b) = (run("first"), run("second"));
    let rows = a.iter().filter(|&&c| c == b'\n').count().saturating_sub(1);
    check(a == b && rows == 2 * 6 * 3, format!("two runs, {rows} rows each, byte-identical={}", a == b))
}

fn main() -> ExitCode {
    let scratch = tempfile::tempdir().expect("scratch directory");
    let mut results: Vec<(&str, Outcome)> = Vec::new();

    let (means, secs) = benchmark_means(&scratch.path().join("bench"));
    results.push(("benchmark reproduction (20 sets)", reproduction(&means, secs)));
    results.push(("normalized metrics outrank unnormalized", ordering(&means)));
    results.push(("polynomial completeness (<= 8 leaves)", completeness()));
    results.push(("oracle equivalence", oracle()));
    results.push(("metric axioms", metric_axioms()));
    results.push(("k-medoids monotonicity and exhaustive optima", kmedoids_checks()));
    results.push(("benchmark determinism", determinism(scratch.path())));

    let mut failed = 0;
    for (name, o) in &results {
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
