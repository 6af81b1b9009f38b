//! Mutation-strength laws over `Z`.
//!
//! * unit step: uniform over `{−1, +1}`;
//! * bilateral geometric with parameter `q ∈ (0, 1)`:
//!   `P[Z = k] = q/(2−q) · (1−q)^|k|` for all `k ∈ Z`;
//! * power law with exponent `β ∈ (1, 2)`:
//!   `P[Z = k] = |k|^−β / (2 ζ(β))` for `k ≠ 0`.
//!
//! Sampling is exact for every law. The bilateral geometric law is drawn as
//! the difference of two independent geometric variables on `{0, 1, …}`
//! (their convolution is exactly the law above), and the power law uses
//! Devroye's rejection sampler for the zeta distribution plus a fair sign.

use rand::RngCore;

use crate::error::{invalid, Error, Result};
use crate::rng::RandomStream;

/// Rejection rounds after which the power-law sampler reports a bug.
pub const MAX_REJECTION_ROUNDS: u32 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BilateralGeometric {
    q: f64,
    ln_fail: f64,
}

impl BilateralGeometric {
    pub fn new(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(invalid(format!(
                "geometric parameter q must lie in (0, 1), got {q}"
            )));
        }
        Ok(BilateralGeometric {
            q,
            ln_fail: (-q).ln_1p(),
        })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn pmf(&self, k: i64) -> f64 {
        self.q / (2.0 - self.q) * (k.unsigned_abs() as f64 * self.ln_fail).exp()
    }

    /// Failures before the first success, by inversion.
    #[inline]
    fn geometric(&self, rng: &mut RandomStream) -> i64 {
        (rng.open_unit().ln() / self.ln_fail).floor() as i64
    }

    #[inline]
    pub fn sample(&self, rng: &mut RandomStream) -> i64 {
        let up = self.geometric(rng);
        let down = self.geometric(rng);
        up - down
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLaw {
    beta: f64,
    zeta: f64,
    inv_exponent: f64,
    b: f64,
}

impl PowerLaw {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 1.0 && beta < 2.0) {
            return Err(invalid(format!(
                "power-law exponent must lie in (1, 2), got {beta}"
            )));
        }
        Ok(PowerLaw {
            beta,
            zeta: zeta(beta)?,
            inv_exponent: -1.0 / (beta - 1.0),
            b: 2f64.powf(beta - 1.0),
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Cached `ζ(β)`.
    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn pmf(&self, k: i64) -> f64 {
        if k == 0 {
            return 0.0;
        }
        (k.unsigned_abs() as f64).powf(-self.beta) / (2.0 * self.zeta)
    }

    /// Zeta-distributed magnitude on `{1, 2, …}`, saturating at `i64::MAX`.
    pub fn sample_magnitude(&self, rng: &mut RandomStream) -> Result<i64> {
        let shape = self.beta - 1.0;
        for _ in 0..MAX_REJECTION_ROUNDS {
            let u = rng.open_unit();
            let v = rng.open_unit();
            let x = u.powf(self.inv_exponent).floor();
            let t = (1.0 + 1.0 / x).powf(shape);
            if v * x * (t - 1.0) / (self.b - 1.0) <= t / self.b {
                return Ok(x as i64);
            }
        }
        Err(Error::SamplerStuck(MAX_REJECTION_ROUNDS))
    }

    #[inline]
    pub fn sample(&self, rng: &mut RandomStream) -> Result<i64> {
        let magnitude = self.sample_magnitude(rng)?;
        Ok(if rng.next_u32() & 1 == 0 {
            magnitude
        } else {
            -magnitude
        })
    }
}

/// A distribution over `Z` used as the mutation strength.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MutationLaw {
    UnitStep,
    BilateralGeometric(BilateralGeometric),
    PowerLaw(PowerLaw),
}

impl MutationLaw {
    pub fn unit_step() -> Self {
        MutationLaw::UnitStep
    }

    pub fn bilateral_geometric(q: f64) -> Result<Self> {
        BilateralGeometric::new(q).map(MutationLaw::BilateralGeometric)
    }

    pub fn power_law(beta: f64) -> Result<Self> {
        PowerLaw::new(beta).map(MutationLaw::PowerLaw)
    }

    /// Short name used in CSV files and on the command line.
    pub fn name(&self) -> &'static str {
        match self {
            MutationLaw::UnitStep => "unit",
            MutationLaw::BilateralGeometric(_) => "geom",
            MutationLaw::PowerLaw(_) => "powerlaw",
        }
    }

    /// `1/q` for the geometric law, `β` for the power law.
    pub fn param(&self) -> Option<f64> {
        match self {
            MutationLaw::UnitStep => None,
            MutationLaw::BilateralGeometric(g) => Some(1.0 / g.q()),
            MutationLaw::PowerLaw(p) => Some(p.beta()),
        }
    }

    pub fn pmf(&self, k: i64) -> f64 {
        match self {
            MutationLaw::UnitStep => {
                if k == 1 || k == -1 {
                    0.5
                } else {
                    0.0
                }
            }
            MutationLaw::BilateralGeometric(g) => g.pmf(k),
            MutationLaw::PowerLaw(p) => p.pmf(k),
        }
    }

    #[inline]
    pub fn sample(&self, rng: &mut RandomStream) -> Result<i64> {
        match self {
            MutationLaw::UnitStep => Ok(if rng.next_u32() & 1 == 0 { 1 } else { -1 }),
            MutationLaw::BilateralGeometric(g) => Ok(g.sample(rng)),
            MutationLaw::PowerLaw(p) => p.sample(rng),
        }
    }
}

/// `E[Z_z]` for the bilateral geometric law, where `Z_z = Z` on `0 ≤ Z ≤ z`
/// and `0` otherwise:
/// `(1−q) / (q(2−q)) · (1 − (1−q)^z (1 + zq))`.
pub fn truncated_expectation(q: f64, z: u64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(invalid(format!("q must lie in (0, 1), got {q}")));
    }
    let decay = (z as f64 * (-q).ln_1p()).exp();
    Ok((1.0 - q) / (q * (2.0 - q)) * (1.0 - decay * (1.0 + z as f64 * q)))
}

/// `K · min(z² q, 1/(4q))` with `K = (1/4)(1−C)/(2−C)`, a lower bound on
/// [`truncated_expectation`] whenever `q ≤ C`.
pub fn truncated_expectation_lower_bound(q: f64, z: u64, c: f64) -> Result<f64> {
    if !(c > 0.0 && c < 1.0) {
        return Err(invalid(format!("C must lie in (0, 1), got {c}")));
    }
    if !(q > 0.0 && q <= c) {
        return Err(invalid(format!("need 0 < q <= C, got q = {q}, C = {c}")));
    }
    let zf = z as f64;
    Ok(moment_constant(c)? * (zf * zf * q).min(1.0 / (4.0 * q)))
}

/// `K = (1/4)(1−C)/(2−C)`.
pub fn moment_constant(c: f64) -> Result<f64> {
    if !(c > 0.0 && c < 1.0) {
        return Err(invalid(format!("C must lie in (0, 1), got {c}")));
    }
    Ok(0.25 * (1.0 - c) / (2.0 - c))
}

/// Riemann zeta on `(1, 2)` by Euler–Maclaurin summation.
///
/// Thirty-one explicit terms plus six Bernoulli corrections at `N = 32`; the
/// remainder is below `1e−15` across the whole interval.
pub fn zeta(beta: f64) -> Result<f64> {
    if !(beta > 1.0 && beta < 2.0) {
        return Err(invalid(format!("zeta is evaluated on (1, 2), got {beta}")));
    }
    Ok(zeta_euler_maclaurin(beta))
}

pub(crate) fn zeta_euler_maclaurin(s: f64) -> f64 {
    const N: f64 = 32.0;
    // B_2j / (2j)!
    const BERNOULLI_OVER_FACTORIAL: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30_240.0,
        -1.0 / 1_209_600.0,
        1.0 / 47_900_160.0,
        -691.0 / 1_307_674_368_000.0,
    ];

    let head: f64 = (1..32).rev().map(|k| (k as f64).powf(-s)).sum();
    let mut total = head + N.powf(1.0 - s) / (s - 1.0) + 0.5 * N.powf(-s);

    // Rising factorial s (s+1) … (s+2j−2), times N^(1−s−2j).
    let mut rising = s;
    let mut power = N.powf(-s - 1.0);
    for (j, coeff) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        if j > 0 {
            let m = 2.0 * j as f64;
            rising *= (s + m - 1.0) * (s + m);
            power /= N * N;
        }
        total += coeff * rising * power;
    }
    total
}
