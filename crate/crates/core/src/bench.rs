//! Experiment harness: generate instances, build tours, run every solver,
//! check they agree, and summarize cost reduction, wall time and triples per
//! node by instance size and drone speed.
//!
//! Instance `idx` of a suite uses seed `master_seed + idx` (wrapping), so any
//! row can be regenerated from the seed printed next to it.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instancegen::{generate, GenError, GenSpec};
use crate::model::{approx_eq, build_cost_model, validate_respects, GeneratorKind};
use crate::oracle::HFSTSP_CAP;
use crate::solver::{SolveError, SolverKind};
use crate::tour::TourMethod;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid bench config: {0}")]
    Config(String),
    #[error(
        "solvers disagree on instance {instance} (seed {seed}, {kind}, n = {n}, alpha = {alpha}): {detail}"
    )]
    Disagreement {
        instance: u64,
        seed: u64,
        kind: GeneratorKind,
        n: usize,
        alpha: f64,
        detail: String,
    },
    #[error("no rows to aggregate")]
    Empty,
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("csv row {row}: {msg}")]
    CsvField { row: usize, msg: String },
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

fn default_repeats() -> usize {
    5
}

fn default_threads() -> usize {
    1
}

fn default_tours() -> Vec<TourMethod> {
    vec![TourMethod::NearestNeighborTwoOpt]
}

fn default_solvers() -> Vec<SolverKind> {
    SolverKind::SPLITS.to_vec()
}

/// Suite description: every `(kind, size, alpha)` cell gets `instances`
/// fresh instances, each solved from every tour by every solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub kinds: Vec<GeneratorKind>,
    pub sizes: Vec<usize>,
    pub alphas: Vec<f64>,
    pub instances: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_tours")]
    pub tours: Vec<TourMethod>,
    #[serde(default = "default_solvers")]
    pub solvers: Vec<SolverKind>,
    /// Timed runs per solver; the median is reported.
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default = "default_threads")]
    pub threads: usize,
}

impl BenchConfig {
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        Ok(toml::from_str(text)?)
    }

    fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: &str| Err(BenchError::Config(m.to_string()));
        if self.kinds.is_empty() || self.sizes.is_empty() || self.alphas.is_empty() {
            return bad("kinds, sizes and alphas must be nonempty");
        }
        if self.tours.is_empty() || self.solvers.is_empty() {
            return bad("tours and solvers must be nonempty");
        }
        if self.sizes.contains(&0) {
            return bad("sizes must be at least 1");
        }
        if self.alphas.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return bad("alphas must be positive");
        }
        if self.repeats == 0 || self.threads == 0 {
            return bad("repeats and threads must be at least 1");
        }
        if self.solvers.contains(&SolverKind::Oracle) && self.sizes.iter().any(|&n| n > HFSTSP_CAP) {
            return bad("the oracle solver only supports sizes up to 14");
        }
        Ok(())
    }

    /// Generator specs in suite order; position in the list is the instance id.
    pub fn specs(&self) -> Vec<GenSpec> {
        let mut specs = Vec::new();
        for &kind in &self.kinds {
            for &n in &self.sizes {
                for &alpha in &self.alphas {
                    for _ in 0..self.instances {
                        let idx = specs.len() as u64;
                        specs.push(GenSpec {
                            kind,
                            n,
                            alpha,
                            seed: self.master_seed.wrapping_add(idx),
                        });
                    }
                }
            }
        }
        specs
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub instance: u64,
    pub seed: u64,
    pub kind: GeneratorKind,
    pub n: usize,
    pub alpha: f64,
    pub tour: TourMethod,
    pub solver: SolverKind,
    pub tour_cost: f64,
    pub solution_cost: f64,
    pub cost_reduction: f64,
    pub triples: u64,
    pub triples_per_node: f64,
    pub wall_time_ns: u64,
}

fn median(mut xs: Vec<u64>) -> u64 {
    xs.sort_unstable();
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        (xs[m - 1] + xs[m]) / 2
    }
}

/// Runs one instance through every tour and solver.
pub fn run_instance(config: &BenchConfig, instance: u64, spec: &GenSpec) -> Result<Vec<BenchRow>, BenchError> {
    let inst = generate(spec)?;
    let cm = build_cost_model(&inst);
    let mut rows = Vec::new();
    for &tour in &config.tours {
        let h = tour.build(&inst, &cm);
        let tour_cost = h.length(&cm);
        let mut reference: Option<(SolverKind, f64)> = None;
        for &solver in &config.solvers {
            let (solution, stats) = solver.solve(&h, &cm)?;
            let report = validate_respects(&solution, &h);
            let disagree = |detail: String| BenchError::Disagreement {
                instance,
                seed: spec.seed,
                kind: spec.kind,
                n: spec.n,
                alpha: spec.alpha,
                detail,
            };
            if !report.is_ok() {
                return Err(disagree(format!("{solver} output does not respect the {tour} tour: {report}")));
            }
            let cost = solution.total_time();
            match reference {
                None => reference = Some((solver, cost)),
                Some((first, c)) if !approx_eq(c, cost) => {
                    return Err(disagree(format!("{first} = {c}, {solver} = {cost}")));
                }
                Some(_) => {}
            }
            let mut times = vec![stats.wall_time_ns];
            for _ in 1..config.repeats {
                times.push(solver.solve(&h, &cm)?.1.wall_time_ns);
            }
            rows.push(BenchRow {
                instance,
                seed: spec.seed,
                kind: spec.kind,
                n: spec.n,
                alpha: spec.alpha,
                tour,
                solver,
                tour_cost,
                solution_cost: cost,
                cost_reduction: if tour_cost > 0.0 {
                    (tour_cost - cost) / tour_cost
                } else {
                    0.0
                },
                triples: stats.triples_considered,
                triples_per_node: stats.triples_considered as f64 / (spec.n + 1) as f64,
                wall_time_ns: median(times),
            });
        }
    }
    Ok(rows)
}

/// Runs the whole suite. Rows come back sorted by instance, tour and solver
/// regardless of `threads`.
pub fn run_suite(config: &BenchConfig) -> Result<Vec<BenchRow>, BenchError> {
    config.validate()?;
    let specs = config.specs();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| BenchError::Config(e.to_string()))?;
    let chunks: Vec<Result<Vec<BenchRow>, BenchError>> = pool.install(|| {
        specs
            .par_iter()
            .enumerate()
            .map(|(idx, spec)| run_instance(config, idx as u64, spec))
            .collect()
    });
    let mut rows = Vec::new();
    for chunk in chunks {
        rows.extend(chunk?);
    }
    rows.sort_by_key(|r| (r.instance, r.tour, r.solver));
    Ok(rows)
}

/// Formats with 9 significant digits, trimming trailing zeros.
pub fn fmt_sig9(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        if s == "-0" {
            "0".into()
        } else {
            s
        }
    } else {
        format!("{x:.8e}")
    }
}

pub const CSV_HEADER: [&str; 13] = [
    "instance",
    "seed",
    "kind",
    "n",
    "alpha",
    "tour",
    "solver",
    "tour_cost",
    "solution_cost",
    "cost_reduction",
    "triples",
    "triples_per_node",
    "wall_time_ns",
];

pub fn write_csv<W: Write>(rows: &[BenchRow], sink: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.instance.to_string(),
            r.seed.to_string(),
            r.kind.to_string(),
            r.n.to_string(),
            fmt_sig9(r.alpha),
            r.tour.to_string(),
            r.solver.to_string(),
            fmt_sig9(r.tour_cost),
            fmt_sig9(r.solution_cost),
            fmt_sig9(r.cost_reduction),
            r.triples.to_string(),
            fmt_sig9(r.triples_per_node),
            r.wall_time_ns.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_csv<R: Read>(source: R) -> Result<Vec<BenchRow>, BenchError> {
    let mut rdr = csv::Reader::from_reader(source);
    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(BenchError::CsvField {
            row: 0,
            msg: format!("unexpected header {:?}", header),
        });
    }
    let mut rows = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = idx + 1;
        let field = |i: usize| rec.get(i).unwrap_or("");
        fn parse<T: std::str::FromStr>(row: usize, name: &str, v: &str) -> Result<T, BenchError> {
            v.parse().map_err(|_| BenchError::CsvField {
                row,
                msg: format!("bad {name} `{v}`"),
            })
        }
        rows.push(BenchRow {
            instance: parse(row, "instance", field(0))?,
            seed: parse(row, "seed", field(1))?,
            kind: field(2).parse().map_err(|msg| BenchError::CsvField { row, msg })?,
            n: parse(row, "n", field(3))?,
            alpha: parse(row, "alpha", field(4))?,
            tour: field(5).parse().map_err(|msg| BenchError::CsvField { row, msg })?,
            solver: field(6).parse().map_err(|msg| BenchError::CsvField { row, msg })?,
            tour_cost: parse(row, "tour_cost", field(7))?,
            solution_cost: parse(row, "solution_cost", field(8))?,
            cost_reduction: parse(row, "cost_reduction", field(9))?,
            triples: parse(row, "triples", field(10))?,
            triples_per_node: parse(row, "triples_per_node", field(11))?,
            wall_time_ns: parse(row, "wall_time_ns", field(12))?,
        });
    }
    Ok(rows)
}

/// Size bucket: `<=10`, otherwise the size itself (the standard suite uses
/// 20, 50, 75, 100, 175, 250, 375 and 500).
pub fn size_bucket(n: usize) -> (usize, String) {
    if n <= 10 {
        (10, "<=10".into())
    } else {
        (n, n.to_string())
    }
}

/// Coarse size partition used when splitting by drone speed; sizes between
/// the partitions belong to none.
pub fn size_partition(n: usize) -> Option<(usize, &'static str)> {
    match n {
        0..=75 => Some((0, "<=75")),
        100..=250 => Some((1, "100-250")),
        375.. => Some((2, ">=375")),
        _ => None,
    }
}

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum View {
    /// By size bucket, all alphas together.
    Size,
    /// By size bucket and alpha.
    SizeAlpha,
    /// By alpha and coarse size partition.
    AlphaPartition,
}

impl View {
    pub fn as_str(&self) -> &'static str {
        match self {
            View::Size => "size",
            View::SizeAlpha => "size_alpha",
            View::AlphaPartition => "alpha_partition",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub view: View,
    pub bucket: String,
    /// `None` when the group mixes alphas.
    pub alpha: Option<f64>,
    pub solver: SolverKind,
    pub count: usize,
    pub cost_reduction: (f64, f64),
    pub wall_time_ns: (f64, f64),
    pub triples_per_node: (f64, f64),
}

#[derive(Default)]
struct Group {
    bucket: String,
    cost_reduction: Vec<f64>,
    wall: Vec<f64>,
    tpn: Vec<f64>,
}

/// Group key; alphas are ordered by their bit pattern (all positive).
type Key = (View, u64, usize, SolverKind);

/// Mean and sample stdev of cost reduction, wall time and triples per node
/// for each view's groups, in a deterministic order.
pub fn aggregate(rows: &[BenchRow]) -> Result<Vec<SummaryRow>, BenchError> {
    if rows.is_empty() {
        return Err(BenchError::Empty);
    }
    let mut groups: BTreeMap<Key, Group> = BTreeMap::new();
    let mut push = |key: Key, bucket: String, r: &BenchRow| {
        let g = groups.entry(key).or_default();
        g.bucket = bucket;
        g.cost_reduction.push(r.cost_reduction);
        g.wall.push(r.wall_time_ns as f64);
        g.tpn.push(r.triples_per_node);
    };
    let mut unpartitioned = 0;
    for r in rows {
        let (order, label) = size_bucket(r.n);
        let abits = r.alpha.to_bits();
        push((View::Size, 0, order, r.solver), label.clone(), r);
        push((View::SizeAlpha, abits, order, r.solver), label, r);
        match size_partition(r.n) {
            Some((p, label)) => push((View::AlphaPartition, abits, p, r.solver), label.into(), r),
            None => unpartitioned += 1,
        }
    }
    if unpartitioned > 0 {
        warn!("{unpartitioned} rows fall outside the <=75 / 100-250 / >=375 partitions");
    }
    Ok(groups
        .into_iter()
        .filter(|(_, g)| !g.tpn.is_empty())
        .map(|((view, abits, _, solver), g)| SummaryRow {
            view,
            bucket: g.bucket,
            alpha: (view != View::Size).then(|| f64::from_bits(abits)),
            solver,
            count: g.tpn.len(),
            cost_reduction: mean_sd(&g.cost_reduction),
            wall_time_ns: mean_sd(&g.wall),
            triples_per_node: mean_sd(&g.tpn),
        })
        .collect())
}

pub fn write_summary_csv<W: Write>(summary: &[SummaryRow], sink: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record([
        "view",
        "bucket",
        "alpha",
        "solver",
        "count",
        "cost_reduction_mean",
        "cost_reduction_sd",
        "wall_time_ns_mean",
        "wall_time_ns_sd",
        "triples_per_node_mean",
        "triples_per_node_sd",
    ])?;
    for s in summary {
        w.write_record([
            s.view.as_str().to_string(),
            s.bucket.clone(),
            s.alpha.map_or_else(|| "any".to_string(), fmt_sig9),
            s.solver.to_string(),
            s.count.to_string(),
            fmt_sig9(s.cost_reduction.0),
            fmt_sig9(s.cost_reduction.1),
            fmt_sig9(s.wall_time_ns.0),
            fmt_sig9(s.wall_time_ns.1),
            fmt_sig9(s.triples_per_node.0),
            fmt_sig9(s.triples_per_node.1),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(n: usize, alpha: f64, solver: SolverKind, cr: f64, tpn: f64) -> BenchRow {
        BenchRow {
            instance: 0,
            seed: 0,
            kind: GeneratorKind::Uniform,
            n,
            alpha,
            tour: TourMethod::NearestNeighbor,
            solver,
            tour_cost: 1.0,
            solution_cost: 1.0 - cr,
            cost_reduction: cr,
            triples: (tpn * (n + 1) as f64) as u64,
            triples_per_node: tpn,
            wall_time_ns: 1000,
        }
    }

    fn small_config() -> BenchConfig {
        BenchConfig {
            kinds: vec![GeneratorKind::Uniform],
            sizes: vec![5],
            alphas: vec![2.0],
            instances: 10,
            master_seed: 77,
            tours: vec![TourMethod::NearestNeighbor],
            solvers: vec![
                SolverKind::Split,
                SolverKind::LazyMatrix,
                SolverKind::LazyLists,
                SolverKind::Oracle,
            ],
            repeats: 1,
            threads: 2,
        }
    }

    #[test]
    fn small_suite_rows_agree() {
        let rows = run_suite(&small_config()).unwrap();
        assert_eq!(rows.len(), 40);
        for chunk in rows.chunks(4) {
            assert!(chunk.iter().all(|r| r.instance == chunk[0].instance));
            assert!(chunk.iter().all(|r| approx_eq(r.solution_cost, chunk[0].solution_cost)));
            assert!(chunk.iter().all(|r| (0.0..1.0).contains(&r.cost_reduction)));
        }
        assert_eq!(rows[0].seed, 77);
        assert_eq!(rows[39].seed, 86);
    }

    #[test]
    fn thread_count_does_not_change_rows() {
        let mut cfg = small_config();
        cfg.threads = 1;
        let a = run_suite(&cfg).unwrap();
        cfg.threads = 4;
        let b = run_suite(&cfg).unwrap();
        let strip = |rows: Vec<BenchRow>| {
            rows.into_iter()
                .map(|mut r| {
                    r.wall_time_ns = 0;
                    r
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(strip(a), strip(b));
    }

    #[test]
    fn config_validation() {
        let mut cfg = small_config();
        cfg.sizes = vec![20];
        assert!(matches!(run_suite(&cfg), Err(BenchError::Config(_))));
        let mut cfg = small_config();
        cfg.alphas = vec![];
        assert!(run_suite(&cfg).is_err());
    }

    #[test]
    fn config_from_toml() {
        let cfg = BenchConfig::from_toml(
            r#"
            kinds = ["uniform", "two_center"]
            sizes = [10, 20]
            alphas = [1.0, 3.0]
            instances = 3
            master_seed = 5
            tours = ["nn", "mst"]
            solvers = ["split", "lazy-lists"]
            "#,
        )
        .unwrap();
        assert_eq!(cfg.repeats, 5);
        assert_eq!(cfg.threads, 1);
        assert_eq!(cfg.tours, vec![TourMethod::NearestNeighbor, TourMethod::MstDoubleTree]);
        assert_eq!(cfg.specs().len(), 24);
        assert!(BenchConfig::from_toml("kinds = []\nbogus = 1").is_err());
    }

    #[test]
    fn summary_statistics() {
        let single = aggregate(&[row(20, 2.0, SolverKind::Split, 0.25, 1.5)]).unwrap();
        assert_eq!(single.len(), 3);
        assert!(single.iter().all(|s| s.cost_reduction == (0.25, 0.0)));

        let two = aggregate(&[
            row(50, 2.0, SolverKind::Split, 0.1, 1.0),
            row(50, 2.0, SolverKind::Split, 0.3, 3.0),
        ])
        .unwrap();
        let size = two.iter().find(|s| s.view == View::Size).unwrap();
        assert_eq!(size.triples_per_node.0, 2.0);
        assert!((size.triples_per_node.1 - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(size.alpha, None);
        assert!(matches!(aggregate(&[]), Err(BenchError::Empty)));
    }

    #[test]
    fn buckets() {
        assert_eq!(size_bucket(7).1, "<=10");
        assert_eq!(size_bucket(250).1, "250");
        assert_eq!(size_partition(75).unwrap().1, "<=75");
        assert_eq!(size_partition(175).unwrap().1, "100-250");
        assert_eq!(size_partition(500).unwrap().1, ">=375");
        assert!(size_partition(300).is_none());
    }

    #[test]
    fn sig9_formatting() {
        assert_eq!(fmt_sig9(0.0), "0");
        assert_eq!(fmt_sig9(2.0), "2");
        assert_eq!(fmt_sig9(0.123456789123), "0.123456789");
        assert_eq!(fmt_sig9(123456.789123), "123456.789");
        assert_eq!(fmt_sig9(-1.5), "-1.5");
        assert_eq!(fmt_sig9(1.5e12), "1.50000000e12");
        assert_eq!(fmt_sig9(f64::INFINITY), "inf");
    }

    fn arb_row() -> impl Strategy<Value = BenchRow> {
        (
            1usize..600,
            prop::sample::select(vec![1.0, 2.0, 3.0]),
            prop::sample::select(SolverKind::SPLITS.to_vec()),
            0.0f64..0.99,
            0.0f64..20.0,
            0u64..10_000_000_000,
        )
            .prop_map(|(n, alpha, solver, cr, tpn, wall)| BenchRow {
                wall_time_ns: wall,
                ..row(n, alpha, solver, cr, tpn)
            })
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-7 * a.abs().max(b.abs()).max(1.0)
    }

    proptest! {
        #[test]
        fn csv_round_trip_preserves_summary(rows in prop::collection::vec(arb_row(), 1..40)) {
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf).unwrap();
            let back = read_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(back.len(), rows.len());
            let a = aggregate(&rows).unwrap();
            let b = aggregate(&back).unwrap();
            prop_assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                prop_assert_eq!((x.view, &x.bucket, x.alpha, x.solver, x.count), (y.view, &y.bucket, y.alpha, y.solver, y.count));
                for (p, q) in [
                    (x.cost_reduction, y.cost_reduction),
                    (x.wall_time_ns, y.wall_time_ns),
                    (x.triples_per_node, y.triples_per_node),
                ] {
                    prop_assert!(close(p.0, q.0) && close(p.1, q.1), "{:?} vs {:?}", p, q);
                }
            }
        }
    }
}
