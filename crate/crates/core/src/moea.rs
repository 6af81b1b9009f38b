//! The archive-based evolutionary loop, instantiated as SEMO and GSEMO.
//!
//! Starting from `P = {x0}`, each iteration picks a parent uniformly from the
//! archive, mutates it into `y`, evaluates `y`, drops every member `z` with
//! `f(y) ⪯ f(z)` and then adds `y` unless a remaining member strictly
//! dominates it. A run stops once the archive covers the whole Pareto front.
//!
//! Two archive implementations share the loop through [`Population`]:
//! [`Archive`] indexes members by their clamped first coordinate and is used
//! for every experiment, while [`ScanArchive`] is a literal transcription of
//! the update rule that serves as its reference.

use rand::distr::{Bernoulli, Distribution};
use rand::Rng;

use crate::benchmark::{
    check_lemma_invariants, evaluate_coords, is_on_front, l1_norm, strictly_dominates,
    weakly_dominates, BenchmarkConfig, ObjectiveValue, Point,
};
use crate::error::{invalid, Error, Result};
use crate::rng::RandomStream;
use crate::samplers::MutationLaw;

/// Default safety cap on function evaluations per run.
pub const DEFAULT_MAX_EVALUATIONS: u64 = 1_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AlgorithmKind {
    /// Mutates exactly one uniformly chosen component.
    Semo,
    /// Mutates each component independently with probability `1/n`.
    Gsemo,
}

impl AlgorithmKind {
    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmKind::Semo => "semo",
            AlgorithmKind::Gsemo => "gsemo",
        }
    }
}

impl std::str::FromStr for AlgorithmKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "semo" => Ok(AlgorithmKind::Semo),
            "gsemo" => Ok(AlgorithmKind::Gsemo),
            other => Err(invalid(format!("unknown algorithm {other:?}"))),
        }
    }
}

/// Mutation operator for a fixed algorithm, law and dimension.
#[derive(Clone, Debug)]
pub struct Mutator {
    kind: AlgorithmKind,
    law: MutationLaw,
    n: usize,
    per_component: Bernoulli,
}

impl Mutator {
    pub fn new(kind: AlgorithmKind, law: MutationLaw, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("cannot mutate a zero-dimensional point"));
        }
        let per_component = Bernoulli::new(1.0 / n as f64).map_err(|e| invalid(e.to_string()))?;
        Ok(Mutator {
            kind,
            law,
            n,
            per_component,
        })
    }

    pub fn mutate(&self, parent: &Point, rng: &mut RandomStream) -> Result<Point> {
        let mut child = parent.clone();
        self.mutate_into(parent.coords(), child.coords_mut(), rng)?;
        Ok(child)
    }

    /// Writes the offspring of `parent` into `child`. The offspring may equal
    /// the parent.
    pub(crate) fn mutate_into(
        &self,
        parent: &[i64],
        child: &mut [i64],
        rng: &mut RandomStream,
    ) -> Result<()> {
        if parent.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: parent.len(),
            });
        }
        child.copy_from_slice(parent);
        match self.kind {
            AlgorithmKind::Semo => {
                let i = rng.random_range(0..self.n);
                self.shift(child, i, rng)?;
            }
            AlgorithmKind::Gsemo => {
                for i in 0..self.n {
                    if self.per_component.sample(rng) {
                        self.shift(child, i, rng)?;
                    }
                }
            }
        }
        Ok(())
    }

    #[inline]
    fn shift(&self, child: &mut [i64], i: usize, rng: &mut RandomStream) -> Result<()> {
        let step = self.law.sample(rng)?;
        child[i] = child[i]
            .checked_add(step)
            .ok_or(Error::Overflow("applying a mutation step"))?;
        Ok(())
    }
}

/// Convenience wrapper around [`Mutator::mutate`].
pub fn mutate(
    kind: AlgorithmKind,
    law: &MutationLaw,
    parent: &Point,
    rng: &mut RandomStream,
) -> Result<Point> {
    Mutator::new(kind, *law, parent.dim())?.mutate(parent, rng)
}

/// An archive member with its cached objective value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Member {
    pub point: Point,
    pub value: ObjectiveValue,
}

/// Operations the evolutionary loop needs from an archive.
///
/// Members are ranked by ascending `f2` (equivalently descending `f1`, since
/// they are mutually incomparable); `member(rank)` is what parent selection
/// indexes, so two implementations with the same contents consume random
/// draws identically.
pub trait Population {
    fn with_config(cfg: BenchmarkConfig) -> Self;

    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn member(&self, rank: usize) -> &Member;

    /// Applies the archive update rule for offspring `y` with value `fy`.
    /// Returns whether `y` was inserted.
    fn update(&mut self, y: &Point, fy: ObjectiveValue) -> bool;

    /// Number of distinct Pareto-front values held by the archive.
    fn covered_count(&self) -> usize;

    fn members(&self) -> Vec<&Member> {
        (0..self.len()).map(|r| self.member(r)).collect()
    }

    fn points(&self) -> Vec<Point> {
        (0..self.len())
            .map(|r| self.member(r).point.clone())
            .collect()
    }
}

/// Archive kept as a rank-ordered vector (ascending `f2`), with an occupancy
/// map over `clamp(x1, −a, a)`.
///
/// On the benchmark, members with `x1 ≤ −a`, members with `x1 ≥ a`, and
/// members sharing an `x1 ∈ (−a, a)` are always comparable, so each of the
/// `2a + 1` slots holds at most one member. Whether an offspring is rejected
/// is decided by a binary search over ranks; only insertions shift the
/// vector, and those are rare next to rejections.
#[derive(Clone, Debug)]
pub struct Archive {
    cfg: BenchmarkConfig,
    members: Vec<Member>,
    occupied: Vec<bool>,
    covered: Vec<bool>,
    covered_count: usize,
}

impl Archive {
    pub fn new(cfg: BenchmarkConfig) -> Self {
        let size = cfg.front_size();
        Archive {
            cfg,
            members: Vec::with_capacity(size),
            occupied: vec![false; size],
            covered: vec![false; size],
            covered_count: 0,
        }
    }
}

impl Population for Archive {
    fn with_config(cfg: BenchmarkConfig) -> Self {
        Archive::new(cfg)
    }

    fn len(&self) -> usize {
        self.members.len()
    }

    fn member(&self, rank: usize) -> &Member {
        &self.members[rank]
    }

    fn update(&mut self, y: &Point, fy: ObjectiveValue) -> bool {
        // Members with f2 < fy.f2 occupy ranks [0, split).
        let split = self.members.partition_point(|m| m.value.f2 < fy.f2);

        // The prefix member with the smallest f1 is the only candidate
        // dominator below the split; at the split only an equal f2 can be.
        if split > 0 && self.members[split - 1].value.f1 <= fy.f1 {
            return false;
        }
        if let Some(z) = self.members.get(split) {
            if z.value.f2 == fy.f2 && z.value.f1 < fy.f1 {
                return false;
            }
        }

        let end = split + self.members[split..].partition_point(|m| m.value.f1 >= fy.f1);
        for gone in self.members.drain(split..end) {
            debug_assert!(
                !is_on_front(&self.cfg, gone.value) || gone.value == fy,
                "front value {} evicted by {fy}",
                gone.value
            );
            self.occupied[self.cfg.slot_of(gone.point.coords()[0])] = false;
        }

        let slot = self.cfg.slot_of(y.coords()[0]);
        assert!(
            !self.occupied[slot],
            "slot {slot} already occupied when inserting {y:?}"
        );
        self.occupied[slot] = true;
        self.members.insert(
            split,
            Member {
                point: y.clone(),
                value: fy,
            },
        );

        if is_on_front(&self.cfg, fy) {
            let k = fy.f1 as usize;
            if !self.covered[k] {
                self.covered[k] = true;
                self.covered_count += 1;
            }
        }

        #[cfg(debug_assertions)]
        for neighbour in [split.checked_sub(1), Some(split + 1)]
            .into_iter()
            .flatten()
        {
            if let Some(v) = self.members.get(neighbour).map(|m| m.value) {
                debug_assert!(
                    !weakly_dominates(v, fy) && !weakly_dominates(fy, v),
                    "{fy} comparable with neighbour {v}"
                );
            }
        }
        true
    }

    fn covered_count(&self) -> usize {
        self.covered_count
    }
}

/// Reference archive: a plain vector filtered by full scans.
#[derive(Clone, Debug)]
pub struct ScanArchive {
    cfg: BenchmarkConfig,
    members: Vec<Member>,
}

impl Population for ScanArchive {
    fn with_config(cfg: BenchmarkConfig) -> Self {
        ScanArchive {
            cfg,
            members: Vec::new(),
        }
    }

    fn len(&self) -> usize {
        self.members.len()
    }

    fn member(&self, rank: usize) -> &Member {
        &self.members[rank]
    }

    fn update(&mut self, y: &Point, fy: ObjectiveValue) -> bool {
        self.members.retain(|z| !weakly_dominates(fy, z.value));
        if self.members.iter().any(|z| strictly_dominates(z.value, fy)) {
            return false;
        }
        self.members.push(Member {
            point: y.clone(),
            value: fy,
        });
        self.members.sort_by_key(|m| m.value.f2);
        true
    }

    fn covered_count(&self) -> usize {
        let mut values: Vec<u64> = self
            .members
            .iter()
            .filter(|m| is_on_front(&self.cfg, m.value))
            .map(|m| m.value.f1)
            .collect();
        values.sort_unstable();
        values.dedup();
        values.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub algorithm: AlgorithmKind,
    pub law: MutationLaw,
    pub benchmark: BenchmarkConfig,
    pub x0: Point,
    pub seed: u64,
    pub stream_id: u64,
    pub max_evaluations: u64,
}

impl RunConfig {
    pub fn new(
        algorithm: AlgorithmKind,
        law: MutationLaw,
        benchmark: BenchmarkConfig,
        x0: Point,
        seed: u64,
        stream_id: u64,
    ) -> Result<Self> {
        let config = RunConfig {
            algorithm,
            law,
            benchmark,
            x0,
            seed,
            stream_id,
            max_evaluations: DEFAULT_MAX_EVALUATIONS,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_max_evaluations(mut self, max_evaluations: u64) -> Self {
        self.max_evaluations = max_evaluations;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.x0.dim() != self.benchmark.n() {
            return Err(Error::DimensionMismatch {
                expected: self.benchmark.n(),
                got: self.x0.dim(),
            });
        }
        if self.max_evaluations == 0 {
            return Err(invalid("max_evaluations must be positive"));
        }
        Ok(())
    }
}

/// Outcome of one run.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RunRecord {
    /// Evaluations up to and including the first one that lands on the
    /// front. Equals `total_evals` when the front was never reached.
    pub phase1_evals: u64,
    pub phase2_evals: u64,
    pub total_evals: u64,
    /// Whether the whole front was covered before the evaluation cap.
    pub completed: bool,
    pub seed: u64,
    pub stream_id: u64,
}

impl std::fmt::Display for RunRecord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "phase1_evals={} phase2_evals={} total_evals={} completed={} seed={} stream_id={}",
            self.phase1_evals,
            self.phase2_evals,
            self.total_evals,
            self.completed,
            self.seed,
            self.stream_id
        )
    }
}

/// State handed to run observers after the initial evaluation and after
/// every iteration.
pub struct RunState<'a, P> {
    pub evaluations: u64,
    pub archive: &'a P,
    pub offspring: &'a Point,
    pub offspring_value: ObjectiveValue,
    pub inserted: bool,
}

/// Runs the loop on archive type `P`, calling `observer` after every
/// evaluation. An observer error aborts the run.
pub fn run_observed<P, F>(config: &RunConfig, mut observer: F) -> Result<RunRecord>
where
    P: Population,
    F: FnMut(&RunState<'_, P>) -> Result<()>,
{
    config.validate()?;
    let cfg = config.benchmark;
    let target = cfg.front_size();
    let mutator = Mutator::new(config.algorithm, config.law, cfg.n())?;
    let mut rng = RandomStream::new(config.seed, config.stream_id);
    let mut archive = P::with_config(cfg);

    let f0 = evaluate_coords(&cfg, config.x0.coords())?;
    let mut evaluations = 1u64;
    let inserted = archive.update(&config.x0, f0);
    let mut first_hit = is_on_front(&cfg, f0).then_some(evaluations);
    observer(&RunState {
        evaluations,
        archive: &archive,
        offspring: &config.x0,
        offspring_value: f0,
        inserted,
    })?;

    let mut child = config.x0.clone();
    while archive.covered_count() < target && evaluations < config.max_evaluations {
        let rank = rng.random_range(0..archive.len());
        mutator.mutate_into(
            archive.member(rank).point.coords(),
            child.coords_mut(),
            &mut rng,
        )?;
        let fy = evaluate_coords(&cfg, child.coords())?;
        evaluations += 1;
        let inserted = archive.update(&child, fy);
        if first_hit.is_none() && is_on_front(&cfg, fy) {
            first_hit = Some(evaluations);
        }
        observer(&RunState {
            evaluations,
            archive: &archive,
            offspring: &child,
            offspring_value: fy,
            inserted,
        })?;
    }

    let phase1 = first_hit.unwrap_or(evaluations);
    Ok(RunRecord {
        phase1_evals: phase1,
        phase2_evals: evaluations - phase1,
        total_evals: evaluations,
        completed: archive.covered_count() == target,
        seed: config.seed,
        stream_id: config.stream_id,
    })
}

/// One seeded run on the indexed archive.
pub fn run(config: &RunConfig) -> Result<RunRecord> {
    run_observed::<Archive, _>(config, |_| Ok(()))
}

/// One seeded run on the scan-based reference archive.
pub fn run_reference(config: &RunConfig) -> Result<RunRecord> {
    run_observed::<ScanArchive, _>(config, |_| Ok(()))
}

pub const LEMMA_MIN_NORM: &str = "minimum L1 norm never increases";
pub const LEMMA_FRONT_PERSISTS: &str = "covered front values persist";
pub const LEMMA_CACHED_VALUES: &str = "cached values match f";

/// Tracks the archive-level properties checked between iterations.
#[derive(Clone, Debug, Default)]
pub struct InvariantMonitor {
    last_min_norm: Option<u64>,
    last_covered: usize,
    pub checks_performed: u64,
}

impl InvariantMonitor {
    pub fn check<P: Population>(
        &mut self,
        cfg: &BenchmarkConfig,
        state: &RunState<'_, P>,
    ) -> Result<()> {
        let violation = |lemma: &'static str, detail: String| Error::InvariantViolation {
            lemma,
            evaluations: state.evaluations,
            detail,
        };
        let archive = state.archive;
        let points = archive.points();
        let report = check_lemma_invariants(cfg, &points);
        if let Some(failed) = report.first_failure() {
            return Err(violation(failed.lemma, failed.detail.clone()));
        }
        for m in archive.members() {
            let v = evaluate_coords(cfg, m.point.coords())?;
            if v != m.value {
                return Err(violation(
                    LEMMA_CACHED_VALUES,
                    format!("{:?} cached {} but evaluates to {v}", m.point, m.value),
                ));
            }
        }
        let min_norm = points
            .iter()
            .map(|p| l1_norm(p.coords()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .min()
            .ok_or_else(|| violation(LEMMA_MIN_NORM, "archive is empty".into()))?;
        if let Some(previous) = self.last_min_norm {
            if min_norm > previous {
                return Err(violation(
                    LEMMA_MIN_NORM,
                    format!("rose from {previous} to {min_norm}"),
                ));
            }
        }
        let covered = archive.covered_count();
        if covered < self.last_covered {
            return Err(violation(
                LEMMA_FRONT_PERSISTS,
                format!("fell from {} to {covered}", self.last_covered),
            ));
        }
        self.last_min_norm = Some(min_norm);
        self.last_covered = covered;
        self.checks_performed += 1;
        Ok(())
    }
}

/// Same trajectory as [`run`], with the structural properties of the archive
/// verified every `check_every` iterations (and on the initial archive).
pub fn run_with_invariant_checks(config: &RunConfig, check_every: u64) -> Result<RunRecord> {
    if check_every == 0 {
        return Err(invalid("check_every must be positive"));
    }
    let cfg = config.benchmark;
    let mut monitor = InvariantMonitor::default();
    run_observed::<Archive, _>(config, |state| {
        if (state.evaluations - 1) % check_every == 0 {
            monitor.check(&cfg, state)?;
        }
        Ok(())
    })
}
