//! The bi-objective benchmark on `Z^n` and the dominance machinery around it.
//!
//! For a front half-width `a` the benchmark maps
//! `x ↦ (|x1 − a| + Σ_{i≥2} |x_i|, |x1 + a| + Σ_{i≥2} |x_i|)`, to be minimised.
//! Its Pareto set is `{(k, 0, …, 0) : k ∈ [−a..a]}` and its front is
//! `{(k, 2a − k) : k ∈ [0..2a]}`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// An individual of the search space: an integer vector of length `n ≥ 2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point(Vec<i64>);

impl Point {
    pub fn new(coords: Vec<i64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(invalid(format!(
                "points need at least 2 coordinates, got {}",
                coords.len()
            )));
        }
        Ok(Point(coords))
    }

    /// Builds a point from wide integers, failing if any coordinate leaves the
    /// 64-bit signed range.
    pub fn from_wide(coords: &[i128]) -> Result<Self> {
        let narrowed = coords
            .iter()
            .map(|&c| i64::try_from(c).map_err(|_| Error::Overflow("narrowing a coordinate")))
            .collect::<Result<Vec<_>>>()?;
        Point::new(narrowed)
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Point::new(vec![0; n])
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub(crate) fn coords_mut(&mut self) -> &mut [i64] {
        &mut self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn l1_norm(&self) -> Result<u64> {
        l1_norm(&self.0)
    }

    pub fn negated(&self) -> Result<Point> {
        let coords = self
            .0
            .iter()
            .map(|c| c.checked_neg().ok_or(Error::Overflow("negating a point")))
            .collect::<Result<Vec<_>>>()?;
        Ok(Point(coords))
    }
}

pub(crate) fn l1_norm(coords: &[i64]) -> Result<u64> {
    coords.iter().try_fold(0u64, |acc, c| {
        acc.checked_add(c.unsigned_abs())
            .ok_or(Error::Overflow("summing an L1 norm"))
    })
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for Point {
    type Err = Error;

    /// Parses a comma-separated coordinate list such as `0,20000`.
    fn from_str(s: &str) -> Result<Self> {
        let coords = s
            .split(',')
            .map(|part| {
                let part = part.trim();
                part.parse::<i64>()
                    .map_err(|e| invalid(format!("bad coordinate {part:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Point::new(coords)
    }
}

/// A value of the bi-objective benchmark. Both objectives are minimised.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjectiveValue {
    pub f1: u64,
    pub f2: u64,
}

impl ObjectiveValue {
    pub const fn new(f1: u64, f2: u64) -> Self {
        ObjectiveValue { f1, f2 }
    }
}

impl fmt::Display for ObjectiveValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.f1, self.f2)
    }
}

/// `u ⪯ v`: componentwise less-or-equal.
///
/// The general definition over `d` objectives is the same componentwise test;
/// only `d = 2` is needed here.
#[inline]
pub fn weakly_dominates(u: ObjectiveValue, v: ObjectiveValue) -> bool {
    u.f1 <= v.f1 && u.f2 <= v.f2
}

/// `u ≺ v`: weak dominance with at least one strict inequality.
#[inline]
pub fn strictly_dominates(u: ObjectiveValue, v: ObjectiveValue) -> bool {
    weakly_dominates(u, v) && (u.f1 < v.f1 || u.f2 < v.f2)
}

/// Parameters of the benchmark: front half-width `a` and dimension `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BenchmarkConfig {
    a: u64,
    n: usize,
}

impl BenchmarkConfig {
    /// Largest supported half-width. Keeps `x1 ± a` and `2a + 1` well inside
    /// the 64-bit range.
    pub const MAX_A: u64 = 1 << 40;

    pub fn new(a: u64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!("dimension n must be at least 2, got {n}")));
        }
        if a > Self::MAX_A {
            return Err(invalid(format!(
                "half-width a = {a} exceeds {}",
                Self::MAX_A
            )));
        }
        Ok(BenchmarkConfig { a, n })
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `|F*| = 2a + 1`.
    pub fn front_size(&self) -> usize {
        (2 * self.a + 1) as usize
    }

    /// Index of `x1` after clamping to `[−a..a]`, shifted to `[0..2a]`.
    ///
    /// Members of a valid archive occupy pairwise distinct slots, and slot
    /// order equals ascending `f2` order.
    #[inline]
    pub(crate) fn slot_of(&self, x1: i64) -> usize {
        let a = self.a as i64;
        (x1.clamp(-a, a) + a) as usize
    }
}

/// Evaluates the benchmark at `x`.
pub fn evaluate_f(cfg: &BenchmarkConfig, x: &Point) -> Result<ObjectiveValue> {
    evaluate_coords(cfg, x.coords())
}

#[inline]
pub(crate) fn evaluate_coords(cfg: &BenchmarkConfig, x: &[i64]) -> Result<ObjectiveValue> {
    if x.len() != cfg.n {
        return Err(Error::DimensionMismatch {
            expected: cfg.n,
            got: x.len(),
        });
    }
    let tail = l1_norm(&x[1..])?;
    let x1 = x[0] as i128;
    let a = cfg.a as i128;
    let head1 =
        u64::try_from((x1 - a).unsigned_abs()).map_err(|_| Error::Overflow("evaluating f1"))?;
    let head2 =
        u64::try_from((x1 + a).unsigned_abs()).map_err(|_| Error::Overflow("evaluating f2"))?;
    Ok(ObjectiveValue {
        f1: head1
            .checked_add(tail)
            .ok_or(Error::Overflow("evaluating f1"))?,
        f2: head2
            .checked_add(tail)
            .ok_or(Error::Overflow("evaluating f2"))?,
    })
}

/// The exact Pareto front `{(k, 2a − k) : k ∈ [0..2a]}`.
pub fn pareto_front(cfg: &BenchmarkConfig) -> BTreeSet<ObjectiveValue> {
    let two_a = 2 * cfg.a;
    (0..=two_a)
        .map(|k| ObjectiveValue::new(k, two_a - k))
        .collect()
}

/// Membership in the front for a value produced by [`evaluate_f`].
///
/// Every benchmark value satisfies `f1 + f2 ≥ 2a`, with equality exactly on
/// the front, so a sum test replaces a set lookup.
#[inline]
pub fn is_on_front(cfg: &BenchmarkConfig, v: ObjectiveValue) -> bool {
    v.f1.checked_add(v.f2) == Some(2 * cfg.a)
}

/// Returns `k` if `x = (k, 0, …, 0)` with `k ∈ [−a..a]`.
pub fn pareto_set_member(cfg: &BenchmarkConfig, x: &Point) -> Option<i64> {
    let c = x.coords();
    if c.len() != cfg.n || c[1..].iter().any(|&v| v != 0) {
        return None;
    }
    (c[0].unsigned_abs() <= cfg.a).then_some(c[0])
}

/// Maximum number of lattice points [`brute_force_front`] will enumerate.
pub const BRUTE_FORCE_LIMIT: u128 = 5_000_000;

/// Exhaustive oracle for the front: evaluates every point of
/// `[−r..r]^n` and keeps the objective values no other enumerated value
/// strictly dominates.
///
/// The box must contain `[−a−1..a+1]^n`; outside it `f` only grows with
/// `|x_i|`, so nothing outside can dominate the values found inside.
pub fn brute_force_front(
    cfg: &BenchmarkConfig,
    box_radius: u64,
) -> Result<BTreeSet<ObjectiveValue>> {
    if box_radius < cfg.a + 1 {
        return Err(invalid(format!(
            "box radius {box_radius} must be at least a + 1 = {}",
            cfg.a + 1
        )));
    }
    let side = 2 * box_radius as u128 + 1;
    let points = side.checked_pow(cfg.n as u32).unwrap_or(u128::MAX);
    if points > BRUTE_FORCE_LIMIT {
        return Err(Error::BudgetExceeded {
            points,
            limit: BRUTE_FORCE_LIMIT,
        });
    }

    let r = box_radius as i64;
    let mut x = vec![-r; cfg.n];
    let mut values = BTreeSet::new();
    'enumerate: loop {
        values.insert(evaluate_coords(cfg, &x)?);
        for c in x.iter_mut() {
            if *c < r {
                *c += 1;
                continue 'enumerate;
            }
            *c = -r;
        }
        break;
    }

    // Sorted by (f1, f2): a value survives iff its f2 beats every earlier one.
    let mut best_f2 = u64::MAX;
    let mut front = BTreeSet::new();
    for v in values {
        if v.f2 < best_f2 {
            best_f2 = v.f2;
            front.insert(v);
        }
    }
    Ok(front)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaCheck {
    pub lemma: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of [`check_lemma_invariants`], one entry per structural property.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InvariantReport {
    pub checks: Vec<LemmaCheck>,
}

impl InvariantReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&LemmaCheck> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn get(&self, lemma: &str) -> Option<&LemmaCheck> {
        self.checks.iter().find(|c| c.lemma == lemma)
    }
}

pub const LEMMA_OUTSIDE_UPPER: &str = "at most one member with x1 >= a";
pub const LEMMA_OUTSIDE_LOWER: &str = "at most one member with x1 <= -a";
pub const LEMMA_ONE_PER_VALUE: &str = "at most one member per x1 in [-a..a]";
pub const LEMMA_POPULATION_SIZE: &str = "population size <= 2a+1";
pub const LEMMA_INCOMPARABLE: &str = "members mutually incomparable";

/// Checks the structural properties every archive on `f` satisfies.
pub fn check_lemma_invariants(cfg: &BenchmarkConfig, points: &[Point]) -> InvariantReport {
    let a = cfg.a as i64;
    let mut checks = Vec::with_capacity(5);

    let upper = points.iter().filter(|p| p.coords()[0] >= a).count();
    checks.push(LemmaCheck {
        lemma: LEMMA_OUTSIDE_UPPER,
        passed: upper <= 1,
        detail: format!("{upper} members"),
    });
    let lower = points.iter().filter(|p| p.coords()[0] <= -a).count();
    checks.push(LemmaCheck {
        lemma: LEMMA_OUTSIDE_LOWER,
        passed: lower <= 1,
        detail: format!("{lower} members"),
    });

    let mut per_value: BTreeMap<i64, usize> = BTreeMap::new();
    for p in points {
        let x1 = p.coords()[0];
        if x1.unsigned_abs() <= cfg.a {
            *per_value.entry(x1).or_default() += 1;
        }
    }
    let crowded: Vec<i64> = per_value
        .iter()
        .filter(|(_, &count)| count > 1)
        .map(|(&x1, _)| x1)
        .collect();
    checks.push(LemmaCheck {
        lemma: LEMMA_ONE_PER_VALUE,
        passed: crowded.is_empty(),
        detail: if crowded.is_empty() {
            String::new()
        } else {
            format!("shared x1 values {crowded:?}")
        },
    });

    checks.push(LemmaCheck {
        lemma: LEMMA_POPULATION_SIZE,
        passed: points.len() <= cfg.front_size(),
        detail: format!("{} members, limit {}", points.len(), cfg.front_size()),
    });

    let mut detail = String::new();
    match points
        .iter()
        .map(|p| evaluate_f(cfg, p))
        .collect::<Result<Vec<_>>>()
    {
        Ok(values) => {
            'pairs: for (i, u) in values.iter().enumerate() {
                for v in &values[i + 1..] {
                    if weakly_dominates(*u, *v) || weakly_dominates(*v, *u) {
                        detail = format!("{u} and {v} are comparable");
                        break 'pairs;
                    }
                }
            }
        }
        Err(e) => detail = e.to_string(),
    }
    checks.push(LemmaCheck {
        lemma: LEMMA_INCOMPARABLE,
        passed: detail.is_empty(),
        detail,
    });

    InvariantReport { checks }
}
