//! Self-checks run by `semo verify`.
//!
//! Each check compares an implementation path against an independent
//! reference: exhaustive enumeration for the front, the closed-form pmf for
//! the samplers, brute-force sums for the truncated moment, the scan archive
//! for the indexed archive, and the structural lemmas for whole runs.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::benchmark::{brute_force_front, pareto_front, BenchmarkConfig, Point};
use crate::error::{Error, Result};
use crate::moea::{
    run_observed, run_with_invariant_checks, AlgorithmKind, Archive, Population, RunConfig,
    ScanArchive,
};
use crate::rng::RandomStream;
use crate::samplers::{truncated_expectation, truncated_expectation_lower_bound, MutationLaw};

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<VerifyCheck>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: impl Into<String>, outcome: Result<(bool, String)>) {
        let (passed, detail) = outcome.unwrap_or_else(|e| (false, e.to_string()));
        self.checks.push(VerifyCheck {
            name: name.into(),
            passed,
            detail,
        });
    }
}

/// Exhaustive-enumeration front equals the closed form for every
/// `a ∈ [0..=max_a]`, `n ∈ dims`, box radius `a + 2`.
pub fn check_brute_force_fronts(max_a: u64, dims: &[usize]) -> Result<(bool, String)> {
    for a in 0..=max_a {
        for &n in dims {
            let cfg = BenchmarkConfig::new(a, n)?;
            if brute_force_front(&cfg, a + 2)? != pareto_front(&cfg) {
                return Ok((false, format!("mismatch at a = {a}, n = {n}")));
            }
        }
    }
    Ok((true, format!("a in 0..={max_a}, n in {dims:?}")))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChiSquareOutcome {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub critical_value: f64,
    pub passed: bool,
}

/// Pearson goodness-of-fit of `draws` samples against the law's pmf.
///
/// Every `k ∈ [lo..=hi]` with expected count at least 5 gets its own bin;
/// all remaining mass (other `k` in range and both tails) forms one pooled
/// bin.
pub fn chi_square_fit(
    law: &MutationLaw,
    draws: u64,
    rng: &mut RandomStream,
    lo: i64,
    hi: i64,
    significance: f64,
) -> Result<ChiSquareOutcome> {
    let width = (hi - lo + 1) as usize;
    let mut observed = vec![0u64; width];
    let mut observed_rest = 0u64;
    for _ in 0..draws {
        let k = law.sample(rng)?;
        if (lo..=hi).contains(&k) {
            observed[(k - lo) as usize] += 1;
        } else {
            observed_rest += 1;
        }
    }

    let total = draws as f64;
    let mut statistic = 0.0;
    let mut bins = 0usize;
    let mut kept_mass = 0.0;
    for (i, &obs) in observed.iter().enumerate() {
        let p = law.pmf(lo + i as i64);
        let expected = total * p;
        if expected >= 5.0 {
            statistic += (obs as f64 - expected).powi(2) / expected;
            kept_mass += p;
            bins += 1;
        } else {
            observed_rest += obs;
        }
    }
    let expected_rest = total * (1.0 - kept_mass).max(0.0);
    if expected_rest > 1e-6 {
        statistic += (observed_rest as f64 - expected_rest).powi(2) / expected_rest;
        bins += 1;
    } else if observed_rest > 0 {
        statistic = f64::INFINITY;
    }

    let degrees_of_freedom = bins.saturating_sub(1).max(1);
    let critical_value = ChiSquared::new(degrees_of_freedom as f64)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?
        .inverse_cdf(1.0 - significance);
    Ok(ChiSquareOutcome {
        statistic,
        degrees_of_freedom,
        critical_value,
        passed: statistic <= critical_value,
    })
}

/// Compensated sum of `k · pmf(k)` over `k ∈ [0..=z]`.
fn truncated_expectation_by_summation(q: f64, z: u64) -> f64 {
    let law = MutationLaw::bilateral_geometric(q).expect("q validated by caller");
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for k in 0..=z {
        let term = k as f64 * law.pmf(k as i64);
        let t = sum + term;
        carry += if sum.abs() >= term.abs() {
            (sum - t) + term
        } else {
            (term - t) + sum
        };
        sum = t;
    }
    sum + carry
}

/// Closed-form truncated moment against direct summation on a `q × z` grid,
/// and the lower bound against the closed form for `q ≤ C`.
pub fn check_truncated_moments(grid: usize, max_z_for_bound: u64) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for i in 1..=grid {
        let q = i as f64 / (grid + 1) as f64;
        for z in 0..grid as u64 {
            let closed = truncated_expectation(q, z)?;
            let summed = truncated_expectation_by_summation(q, z);
            worst = worst.max((closed - summed).abs());
        }
    }
    if worst > 1e-12 {
        return Ok((false, format!("closed form off by {worst:e}")));
    }

    let mut z_values: Vec<u64> = (0..=100).collect();
    let mut z = 100u64;
    while z < max_z_for_bound {
        z = (z * 5 / 4).min(max_z_for_bound);
        z_values.push(z);
    }
    for c in [0.25, 0.5, 0.9] {
        for i in 1..=grid {
            let q = c * i as f64 / grid as f64;
            for &z in &z_values {
                let lower = truncated_expectation_lower_bound(q, z, c)?;
                let exact = truncated_expectation(q, z)?;
                if lower > exact {
                    return Ok((
                        false,
                        format!("lower bound {lower} exceeds {exact} at q = {q}, z = {z}, C = {c}"),
                    ));
                }
            }
        }
    }
    Ok((true, format!("max closed-form error {worst:.2e}")))
}

/// Configurations with small fronts so that per-iteration checks stay cheap.
pub fn soak_configs(count: u64, seed: u64) -> Result<Vec<RunConfig>> {
    let mut configs = Vec::with_capacity(count as usize);
    for i in 0..count {
        let algorithm = if i % 2 == 0 {
            AlgorithmKind::Gsemo
        } else {
            AlgorithmKind::Semo
        };
        let law = match i % 3 {
            0 => MutationLaw::UnitStep,
            1 => MutationLaw::bilateral_geometric([0.5, 0.2, 0.05][(i / 3 % 3) as usize])?,
            _ => MutationLaw::power_law(1.5)?,
        };
        let a = 1 + i % 6;
        let n = 2 + (i % 4) as usize;
        let benchmark = BenchmarkConfig::new(a, n)?;
        let mut coords = vec![0i64; n];
        coords[0] = (i as i64 % 5) - 2;
        coords[1] = 10 * a as i64 + i as i64;
        if n > 2 {
            coords[n - 1] = -(i as i64 % 7);
        }
        configs.push(RunConfig::new(
            algorithm,
            law,
            benchmark,
            Point::new(coords)?,
            seed,
            i,
        )?);
    }
    Ok(configs)
}

/// Runs seeded configurations with per-iteration invariant checks until at
/// least `iterations` loop iterations have executed in total.
pub fn check_invariant_soak(iterations: u64, seed: u64) -> Result<(bool, String)> {
    let mut done = 0u64;
    let mut runs = 0u64;
    let mut stream = 0u64;
    while done < iterations {
        let base = soak_configs(24, seed ^ stream)?;
        for config in base {
            if done >= iterations {
                break;
            }
            let budget = (iterations - done + 1).min(200_000);
            let config = config.with_max_evaluations(budget);
            match run_with_invariant_checks(&config, 1) {
                Ok(rec) => done += rec.total_evals - 1,
                Err(e @ Error::InvariantViolation { .. }) => return Ok((false, e.to_string())),
                Err(e) => return Err(e),
            }
            runs += 1;
        }
        stream += 1;
    }
    Ok((true, format!("{done} iterations over {runs} runs")))
}

fn trajectory_digest<P: Population>(config: &RunConfig) -> Result<(Vec<u64>, crate::RunRecord)> {
    let mut digests = Vec::new();
    let record = run_observed::<P, _>(config, |state| {
        let mut h = DefaultHasher::new();
        state.evaluations.hash(&mut h);
        state.inserted.hash(&mut h);
        for m in state.archive.members() {
            m.point.hash(&mut h);
            m.value.hash(&mut h);
        }
        state.archive.covered_count().hash(&mut h);
        digests.push(h.finish());
        Ok(())
    })?;
    Ok((digests, record))
}

/// Indexed archive and scan archive must walk identical trajectories.
pub fn archives_agree(config: &RunConfig) -> Result<bool> {
    let fast = trajectory_digest::<Archive>(config)?;
    let slow = trajectory_digest::<ScanArchive>(config)?;
    Ok(fast == slow)
}

pub fn check_archive_equivalence(
    configs: u64,
    iterations: u64,
    seed: u64,
) -> Result<(bool, String)> {
    for config in soak_configs(configs, seed)? {
        let config = config.with_max_evaluations(iterations + 1);
        if !archives_agree(&config)? {
            return Ok((false, format!("trajectories diverge for {config:?}")));
        }
    }
    Ok((
        true,
        format!("{configs} configs, up to {iterations} iterations each"),
    ))
}

/// Runs every self-check. `quick` shrinks sample sizes roughly tenfold.
pub fn run_all(quick: bool, seed: u64) -> VerifyReport {
    let mut report = VerifyReport::default();
    let draws = if quick { 100_000 } else { 1_000_000 };
    let soak = if quick { 100_000 } else { 1_000_000 };

    report.push("brute-force front", check_brute_force_fronts(3, &[2, 3]));
    report.push("truncated moment", check_truncated_moments(50, 10_000));

    let laws = [
        (
            "chi-square geometric q=0.5",
            MutationLaw::bilateral_geometric(0.5),
        ),
        (
            "chi-square geometric q=0.05",
            MutationLaw::bilateral_geometric(0.05),
        ),
        ("chi-square power law beta=1.5", MutationLaw::power_law(1.5)),
    ];
    for (i, (name, law)) in laws.into_iter().enumerate() {
        let outcome = law.and_then(|law| {
            let mut rng = RandomStream::new(seed, 1000 + i as u64);
            let fit = chi_square_fit(&law, draws, &mut rng, -20, 20, 1e-3)?;
            Ok((
                fit.passed,
                format!(
                    "statistic {:.2} vs critical {:.2} ({} dof)",
                    fit.statistic, fit.critical_value, fit.degrees_of_freedom
                ),
            ))
        });
        report.push(name, outcome);
    }

    report.push("invariant soak", check_invariant_soak(soak, seed));
    report.push(
        "indexed vs scan archive",
        check_archive_equivalence(20, if quick { 2_000 } else { 10_000 }, seed),
    );
    report
}
