//! Scenario grids, parallel fan-out of seeded runs, aggregation, and the CSV
//! result files.
//!
//! Each run is addressed by `(base_seed, cell_index, run_index)`: the run's
//! random stream is `RandomStream::new(base_seed, derive_stream_id(..))`.
//! Results are therefore identical whatever the number of worker threads.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize, Serializer};

use crate::benchmark::{BenchmarkConfig, Point};
use crate::bounds::{certified_bound, BoundInputs};
use crate::error::{invalid, Error, Result};
use crate::moea::{run, AlgorithmKind, RunConfig, RunRecord, DEFAULT_MAX_EVALUATIONS};
use crate::rng::derive_stream_id;
use crate::samplers::MutationLaw;

pub const DEFAULT_BASE_SEED: u64 = 0x5EED_2024;
pub const RUNS_PER_CELL: usize = 50;
pub const SCENARIO_ONE_INV_Q: [u32; 7] = [5, 10, 20, 50, 100, 200, 500];
pub const DEFAULT_BETA: f64 = 1.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
}

/// How the mutation law of a cell is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LawChoice {
    Unit,
    /// Bilateral geometric law with a fixed `1/q`.
    Geometric {
        inv_q: f64,
    },
    /// Bilateral geometric law with `1/q = a / divisor`.
    GeometricScaled {
        divisor: f64,
    },
    PowerLaw {
        beta: f64,
    },
}

impl LawChoice {
    pub fn resolve(&self, a: u64) -> Result<MutationLaw> {
        match *self {
            LawChoice::Unit => Ok(MutationLaw::UnitStep),
            LawChoice::Geometric { inv_q } => MutationLaw::bilateral_geometric(1.0 / inv_q),
            LawChoice::GeometricScaled { divisor } => {
                if a == 0 {
                    return Err(invalid("a scaled geometric law needs a >= 1"));
                }
                MutationLaw::bilateral_geometric(divisor / a as f64)
            }
            LawChoice::PowerLaw { beta } => MutationLaw::power_law(beta),
        }
    }
}

/// Initial individual of a cell.
#[derive(Clone, Debug, PartialEq)]
pub enum X0Rule {
    /// Second coordinate `factor · a`, all others zero.
    SecondCoordinate {
        factor: u64,
    },
    Explicit(Point),
}

impl X0Rule {
    pub fn resolve(&self, a: u64, n: usize) -> Result<Point> {
        match self {
            X0Rule::SecondCoordinate { factor } => {
                let y0 = factor
                    .checked_mul(a)
                    .and_then(|v| i64::try_from(v).ok())
                    .ok_or(Error::Overflow("building x0"))?;
                let mut coords = vec![0; n];
                coords[1] = y0;
                Point::new(coords)
            }
            X0Rule::Explicit(p) => {
                if p.dim() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: p.dim(),
                    });
                }
                Ok(p.clone())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    pub algorithm: AlgorithmKind,
    pub n: usize,
    pub a_values: Vec<u64>,
    pub laws: Vec<LawChoice>,
    pub runs_per_cell: usize,
    pub x0_rule: X0Rule,
    pub base_seed: u64,
    pub max_evaluations: u64,
}

impl ScenarioSpec {
    /// GSEMO at `a = 200` with the unit step, seven geometric laws and the
    /// power law, started from `(0, 100a, 0, …)`.
    pub fn scenario_one(n: usize) -> Self {
        let mut laws = vec![LawChoice::Unit];
        laws.extend(
            SCENARIO_ONE_INV_Q
                .iter()
                .map(|&inv_q| LawChoice::Geometric {
                    inv_q: inv_q as f64,
                }),
        );
        laws.push(LawChoice::PowerLaw { beta: DEFAULT_BETA });
        ScenarioSpec {
            scenario: Scenario::One,
            algorithm: AlgorithmKind::Gsemo,
            n,
            a_values: vec![200],
            laws,
            runs_per_cell: RUNS_PER_CELL,
            x0_rule: X0Rule::SecondCoordinate { factor: 100 },
            base_seed: DEFAULT_BASE_SEED,
            max_evaluations: DEFAULT_MAX_EVALUATIONS,
        }
    }

    /// GSEMO over `a ∈ {20, 40, …, 200}` with the unit step, the geometric
    /// law at `q = 4/a` and the power law.
    pub fn scenario_two(n: usize) -> Self {
        ScenarioSpec {
            scenario: Scenario::Two,
            algorithm: AlgorithmKind::Gsemo,
            n,
            a_values: (1..=10).map(|k| 20 * k).collect(),
            laws: vec![
                LawChoice::Unit,
                LawChoice::GeometricScaled { divisor: 4.0 },
                LawChoice::PowerLaw { beta: DEFAULT_BETA },
            ],
            runs_per_cell: RUNS_PER_CELL,
            x0_rule: X0Rule::SecondCoordinate { factor: 100 },
            base_seed: DEFAULT_BASE_SEED,
            max_evaluations: DEFAULT_MAX_EVALUATIONS,
        }
    }

    pub fn with_seed(mut self, base_seed: u64) -> Self {
        self.base_seed = base_seed;
        self
    }

    pub fn with_runs(mut self, runs_per_cell: usize) -> Self {
        self.runs_per_cell = runs_per_cell;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs_per_cell == 0 {
            return Err(invalid("runs_per_cell must be at least 1"));
        }
        if self.a_values.is_empty() {
            return Err(invalid("a_values must not be empty"));
        }
        if self.laws.is_empty() {
            return Err(invalid("the law grid must not be empty"));
        }
        Ok(())
    }

    /// Cells in execution order: `a` outer, law inner.
    pub fn cells(&self) -> Result<Vec<CellConfig>> {
        self.validate()?;
        let mut cells = Vec::with_capacity(self.a_values.len() * self.laws.len());
        for &a in &self.a_values {
            let benchmark = BenchmarkConfig::new(a, self.n)?;
            let x0 = self.x0_rule.resolve(a, self.n)?;
            for choice in &self.laws {
                cells.push(CellConfig {
                    index: cells.len() as u64,
                    scenario: self.scenario,
                    algorithm: self.algorithm,
                    benchmark,
                    law: choice.resolve(a)?,
                    x0: x0.clone(),
                });
            }
        }
        Ok(cells)
    }
}

/// Scenario two on `n` dimensions.
pub fn scenario_two_grid(n: usize) -> ScenarioSpec {
    ScenarioSpec::scenario_two(n)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellConfig {
    pub index: u64,
    pub scenario: Scenario,
    pub algorithm: AlgorithmKind,
    pub benchmark: BenchmarkConfig,
    pub law: MutationLaw,
    pub x0: Point,
}

impl CellConfig {
    pub fn run_config(
        &self,
        base_seed: u64,
        run_index: u64,
        max_evaluations: u64,
    ) -> Result<RunConfig> {
        Ok(RunConfig::new(
            self.algorithm,
            self.law,
            self.benchmark,
            self.x0.clone(),
            base_seed,
            derive_stream_id(base_seed, self.index, run_index),
        )?
        .with_max_evaluations(max_evaluations))
    }

    pub fn bound_inputs(&self) -> Result<BoundInputs> {
        Ok(BoundInputs {
            algorithm: self.algorithm,
            n: self.benchmark.n(),
            a: self.benchmark.a(),
            x0_norm: self.x0.l1_norm()?,
            law: self.law,
        })
    }
}

/// Means and percentage standard deviations over the runs of one cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellStats {
    pub mean_phase1: f64,
    pub mean_phase2: f64,
    pub mean_total: f64,
    pub sd_pct_phase1: f64,
    pub sd_pct_phase2: f64,
    pub sd_pct_total: f64,
    pub run_count: usize,
    /// Set when a single run makes the standard deviation undefined; the
    /// `sd_pct` fields then read 0.
    pub degenerate: bool,
    /// Runs that hit the evaluation cap before covering the front.
    pub incomplete_runs: usize,
}

fn mean_and_sd_pct(values: impl Iterator<Item = u64> + Clone, count: usize) -> (f64, f64) {
    let mean = values.clone().map(|v| v as f64).sum::<f64>() / count as f64;
    if count < 2 || mean == 0.0 {
        return (mean, 0.0);
    }
    let ss: f64 = values.map(|v| (v as f64 - mean).powi(2)).sum();
    let sd = (ss / (count - 1) as f64).sqrt();
    (mean, 100.0 * sd / mean)
}

/// Arithmetic means and Bessel-corrected standard deviations, the latter as a
/// percentage of the mean.
pub fn summarize(records: &[RunRecord]) -> Result<CellStats> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    let count = records.len();
    let (mean_phase1, sd_pct_phase1) =
        mean_and_sd_pct(records.iter().map(|r| r.phase1_evals), count);
    let (mean_phase2, sd_pct_phase2) =
        mean_and_sd_pct(records.iter().map(|r| r.phase2_evals), count);
    let (mean_total, sd_pct_total) = mean_and_sd_pct(records.iter().map(|r| r.total_evals), count);
    Ok(CellStats {
        mean_phase1,
        mean_phase2,
        mean_total,
        sd_pct_phase1,
        sd_pct_phase2,
        sd_pct_total,
        run_count: count,
        degenerate: count == 1,
        incomplete_runs: records.iter().filter(|r| !r.completed).count(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellResult {
    pub cell: CellConfig,
    pub stats: CellStats,
    pub runs: Vec<RunRecord>,
    /// Certified ceiling on the expected runtime, when one exists.
    pub bound_total: Option<f64>,
}

impl CellResult {
    pub fn is_degraded(&self) -> bool {
        self.stats.incomplete_runs > 0
    }
}

/// Executes independent runs on up to `parallelism` threads. Output order
/// matches input order.
pub fn execute_runs(configs: &[RunConfig], parallelism: usize) -> Result<Vec<RunRecord>> {
    if parallelism == 0 {
        return Err(invalid("parallelism must be at least 1"));
    }
    #[cfg(feature = "parallel")]
    if parallelism > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallelism)
            .build()?;
        return pool.install(|| configs.par_iter().map(run).collect());
    }
    configs.iter().map(run).collect()
}

/// Runs every cell of `spec` and aggregates each one.
pub fn run_scenario(spec: &ScenarioSpec, parallelism: usize) -> Result<Vec<CellResult>> {
    let cells = spec.cells()?;
    let mut configs = Vec::with_capacity(cells.len() * spec.runs_per_cell);
    for cell in &cells {
        for run_index in 0..spec.runs_per_cell {
            configs.push(cell.run_config(
                spec.base_seed,
                run_index as u64,
                spec.max_evaluations,
            )?);
        }
    }
    let mut records = execute_runs(&configs, parallelism)?.into_iter();
    cells
        .into_iter()
        .map(|cell| {
            let runs: Vec<RunRecord> = records.by_ref().take(spec.runs_per_cell).collect();
            let stats = summarize(&runs)?;
            let bound_total = certified_bound(&cell.bound_inputs()?)?;
            Ok(CellResult {
                cell,
                stats,
                runs,
                bound_total,
            })
        })
        .collect()
}

/// Rounds to six significant digits and prints the shortest decimal form.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{x:.5e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

fn sig6<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_sig6(*x))
}

fn sig6_opt<S: Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_str(&format_sig6(*v)),
        None => s.serialize_str(""),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Semo,
    Gsemo,
}

impl From<AlgorithmKind> for Algo {
    fn from(k: AlgorithmKind) -> Self {
        match k {
            AlgorithmKind::Semo => Algo::Semo,
            AlgorithmKind::Gsemo => Algo::Gsemo,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mutation {
    Unit,
    Geom,
    Powerlaw,
}

impl From<&MutationLaw> for Mutation {
    fn from(law: &MutationLaw) -> Self {
        match law {
            MutationLaw::UnitStep => Mutation::Unit,
            MutationLaw::BilateralGeometric(_) => Mutation::Geom,
            MutationLaw::PowerLaw(_) => Mutation::Powerlaw,
        }
    }
}

/// One line of the per-run CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub scenario: Scenario,
    pub algo: Algo,
    pub mutation: Mutation,
    #[serde(serialize_with = "sig6_opt")]
    pub param: Option<f64>,
    pub a: u64,
    pub n: usize,
    pub run_index: u64,
    pub seed: u64,
    pub stream_id: u64,
    pub phase1_evals: u64,
    pub phase2_evals: u64,
    pub total_evals: u64,
    pub completed: bool,
}

pub const RUN_COLUMNS: [&str; 13] = [
    "scenario",
    "algo",
    "mutation",
    "param",
    "a",
    "n",
    "run_index",
    "seed",
    "stream_id",
    "phase1_evals",
    "phase2_evals",
    "total_evals",
    "completed",
];

/// One line of the aggregate CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub scenario: Scenario,
    pub algo: Algo,
    pub mutation: Mutation,
    #[serde(serialize_with = "sig6_opt")]
    pub param: Option<f64>,
    pub a: u64,
    pub n: usize,
    pub runs: usize,
    #[serde(serialize_with = "sig6")]
    pub mean_p1: f64,
    #[serde(serialize_with = "sig6")]
    pub sdpct_p1: f64,
    #[serde(serialize_with = "sig6")]
    pub mean_p2: f64,
    #[serde(serialize_with = "sig6")]
    pub sdpct_p2: f64,
    #[serde(serialize_with = "sig6")]
    pub mean_total: f64,
    #[serde(serialize_with = "sig6")]
    pub sdpct_total: f64,
    #[serde(serialize_with = "sig6_opt")]
    pub bound_total: Option<f64>,
}

pub const AGGREGATE_COLUMNS: [&str; 14] = [
    "scenario",
    "algo",
    "mutation",
    "param",
    "a",
    "n",
    "runs",
    "mean_p1",
    "sdpct_p1",
    "mean_p2",
    "sdpct_p2",
    "mean_total",
    "sdpct_total",
    "bound_total",
];

pub fn run_rows(results: &[CellResult]) -> Vec<RunRow> {
    results
        .iter()
        .flat_map(|r| {
            r.runs.iter().enumerate().map(move |(i, rec)| RunRow {
                scenario: r.cell.scenario,
                algo: r.cell.algorithm.into(),
                mutation: (&r.cell.law).into(),
                param: r.cell.law.param(),
                a: r.cell.benchmark.a(),
                n: r.cell.benchmark.n(),
                run_index: i as u64,
                seed: rec.seed,
                stream_id: rec.stream_id,
                phase1_evals: rec.phase1_evals,
                phase2_evals: rec.phase2_evals,
                total_evals: rec.total_evals,
                completed: rec.completed,
            })
        })
        .collect()
}

pub fn aggregate_rows(results: &[CellResult]) -> Vec<AggregateRow> {
    results
        .iter()
        .map(|r| AggregateRow {
            scenario: r.cell.scenario,
            algo: r.cell.algorithm.into(),
            mutation: (&r.cell.law).into(),
            param: r.cell.law.param(),
            a: r.cell.benchmark.a(),
            n: r.cell.benchmark.n(),
            runs: r.stats.run_count,
            mean_p1: r.stats.mean_phase1,
            sdpct_p1: r.stats.sd_pct_phase1,
            mean_p2: r.stats.mean_phase2,
            sdpct_p2: r.stats.sd_pct_phase2,
            mean_total: r.stats.mean_total,
            sdpct_total: r.stats.sd_pct_total,
            bound_total: r.bound_total,
        })
        .collect()
}

fn writer_builder() -> csv::WriterBuilder {
    let mut b = csv::WriterBuilder::new();
    b.has_headers(false).terminator(csv::Terminator::Any(b'\n'));
    b
}

/// Serialises rows under the given header. An empty row set still yields the
/// header line.
pub fn write_csv<T: Serialize, W: Write>(out: W, columns: &[&str], rows: &[T]) -> Result<()> {
    let mut w = writer_builder().from_writer(out);
    w.write_record(columns)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Parses rows, checking the header against `columns` first.
pub fn read_csv<T: for<'de> Deserialize<'de>, R: Read>(
    input: R,
    columns: &[&str],
    origin: &Path,
) -> Result<Vec<T>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let header = r.headers()?.clone();
    let missing: Vec<&str> = columns
        .iter()
        .copied()
        .filter(|c| !header.iter().any(|h| h == *c))
        .collect();
    if !missing.is_empty() {
        return Err(Error::Schema {
            path: origin.to_path_buf(),
            message: format!("missing column(s) {}", missing.join(", ")),
        });
    }
    if header.len() != columns.len() || header.iter().zip(columns).any(|(h, c)| h != *c) {
        return Err(Error::Schema {
            path: origin.to_path_buf(),
            message: format!("expected header {}", columns.join(",")),
        });
    }
    r.deserialize()
        .map(|row| {
            row.map_err(|e| Error::Schema {
                path: origin.to_path_buf(),
                message: e.to_string(),
            })
        })
        .collect()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
}

pub fn write_results_csv(path: &Path, rows: &[RunRow]) -> Result<()> {
    write_csv(create(path)?, &RUN_COLUMNS, rows)
}

pub fn read_results_csv(path: &Path) -> Result<Vec<RunRow>> {
    read_csv(open(path)?, &RUN_COLUMNS, path)
}

pub fn write_aggregate_csv(path: &Path, rows: &[AggregateRow]) -> Result<()> {
    write_csv(create(path)?, &AGGREGATE_COLUMNS, rows)
}

pub fn read_aggregate_csv(path: &Path) -> Result<Vec<AggregateRow>> {
    read_csv(open(path)?, &AGGREGATE_COLUMNS, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn record(total: u64) -> RunRecord {
        RunRecord {
            phase1_evals: total,
            phase2_evals: 0,
            total_evals: total,
            completed: true,
            seed: 0,
            stream_id: 0,
        }
    }

    #[test]
    fn summary_examples() {
        let same = summarize(&[record(7), record(7), record(7)]).unwrap();
        assert_eq!(same.mean_total, 7.0);
        assert_eq!(same.sd_pct_total, 0.0);

        let two = summarize(&[record(10), record(20)]).unwrap();
        assert_eq!(two.mean_total, 15.0);
        assert_abs_diff_eq!(
            two.sd_pct_total,
            100.0 * 50f64.sqrt() / 15.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(two.sd_pct_total, 47.14, epsilon = 5e-3);
        assert!(!two.degenerate);

        let one = summarize(&[record(3)]).unwrap();
        assert_eq!(one.sd_pct_total, 0.0);
        assert!(one.degenerate);

        assert!(matches!(summarize(&[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn scenario_two_layout() {
        let spec = scenario_two_grid(2);
        assert_eq!(spec.a_values.len(), 10);
        assert_eq!(spec.a_values[0], 20);
        assert_eq!(spec.a_values[9], 200);
        let cells = spec.cells().unwrap();
        let geom_100 = cells
            .iter()
            .find(|c| c.benchmark.a() == 100 && matches!(c.law, MutationLaw::BilateralGeometric(_)))
            .unwrap();
        let MutationLaw::BilateralGeometric(g) = geom_100.law else {
            unreachable!()
        };
        assert_abs_diff_eq!(g.q(), 1.0 / 25.0, epsilon = 1e-15);
        assert_eq!(cells[0].x0, Point::new(vec![0, 2000]).unwrap());
    }

    #[test]
    fn scenario_one_layout() {
        let cells = ScenarioSpec::scenario_one(4).cells().unwrap();
        assert_eq!(cells.len(), 9);
        assert_eq!(cells[0].x0, Point::new(vec![0, 20_000, 0, 0]).unwrap());
        assert_eq!(cells[4].law.param(), Some(50.0));
        assert_eq!(cells[8].law.name(), "powerlaw");
    }

    #[test]
    fn spec_validation() {
        assert!(ScenarioSpec::scenario_one(2).with_runs(0).cells().is_err());
        let mut spec = ScenarioSpec::scenario_one(2);
        spec.a_values.clear();
        assert!(spec.cells().is_err());
    }

    #[test]
    fn sig6_formatting() {
        assert_eq!(format_sig6(1.5), "1.5");
        assert_eq!(format_sig6(50.0), "50");
        assert_eq!(format_sig6(852_922.44), "852922");
        assert_eq!(format_sig6(15_565.34), "15565.3");
        assert_eq!(format_sig6(1.0 / 3.0), "0.333333");
        assert_eq!(format_sig6(0.0), "0");
    }

    #[test]
    fn header_only_for_no_rows() {
        let mut buf = Vec::new();
        write_csv::<RunRow, _>(&mut buf, &RUN_COLUMNS, &[]).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            RUN_COLUMNS.join(",") + "\n"
        );
        let rows: Vec<RunRow> = read_csv(buf.as_slice(), &RUN_COLUMNS, Path::new("mem")).unwrap();
        assert!(rows.is_empty());
    }

    #[test]
    fn wrong_header_names_missing_column() {
        let text = "scenario,algo,mutation,param,a,n,run_index,stream_id,phase1_evals,phase2_evals,total_evals,completed\n";
        let err =
            read_csv::<RunRow, _>(text.as_bytes(), &RUN_COLUMNS, Path::new("bad.csv")).unwrap_err();
        assert!(err.to_string().contains("seed"), "{err}");
    }

    #[test]
    fn small_scenario_is_deterministic_across_threads() {
        let mut spec = ScenarioSpec::scenario_two(2).with_runs(3);
        spec.a_values = vec![8, 16];
        let one = run_scenario(&spec, 1).unwrap();
        let four = run_scenario(&spec, 4).unwrap();
        assert_eq!(run_rows(&one), run_rows(&four));
        for r in &one {
            assert!(!r.is_degraded());
            for rec in &r.runs {
                assert_eq!(rec.phase1_evals + rec.phase2_evals, rec.total_evals);
            }
        }
    }
}
