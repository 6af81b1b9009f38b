//! Closed-form upper bounds on the expected number of iterations until the
//! whole Pareto front is covered.
//!
//! Unit-step and power-law bounds are fully explicit and serve as certified
//! ceilings for empirical means. The exponential-tail result only holds up to
//! an unspecified constant, so [`bound_exp_tail_shape`] takes that constant
//! from the caller and is never used as a ceiling.

use std::f64::consts::{E, LN_2, PI};

use crate::error::{invalid, Result};
use crate::moea::AlgorithmKind;
use crate::samplers::{moment_constant, MutationLaw};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundInputs {
    pub algorithm: AlgorithmKind,
    pub n: usize,
    pub a: u64,
    /// `‖x0‖₁`.
    pub x0_norm: u64,
    pub law: MutationLaw,
}

/// Bounds for the two phases: reaching the all-zeros point, then covering the
/// front from there. `phase2` is `None` where only an asymptotic statement
/// exists.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseBounds {
    pub phase1: f64,
    pub phase2: Option<f64>,
}

impl PhaseBounds {
    pub fn total(&self) -> Option<f64> {
        self.phase2.map(|p2| self.phase1 + p2)
    }
}

fn gsemo_factor(algorithm: AlgorithmKind) -> f64 {
    match algorithm {
        AlgorithmKind::Semo => 1.0,
        AlgorithmKind::Gsemo => E,
    }
}

fn check_n(inp: &BoundInputs) -> Result<()> {
    if inp.n < 2 {
        return Err(invalid(format!(
            "dimension must be at least 2, got {}",
            inp.n
        )));
    }
    Ok(())
}

fn unit_step_phases(inp: &BoundInputs) -> PhaseBounds {
    let scale = gsemo_factor(inp.algorithm) * 2.0 * inp.n as f64 * (2 * inp.a + 1) as f64;
    PhaseBounds {
        phase1: scale * inp.x0_norm as f64,
        phase2: Some(scale * (2 * inp.a) as f64),
    }
}

fn power_law_phases(inp: &BoundInputs, beta: f64, zeta: f64) -> PhaseBounds {
    let n = inp.n as f64;
    let width = (2 * inp.a + 1) as f64;
    let common = width * 2.0 * E * n * zeta;

    let reach = common
        * (2f64.powf(1.0 / (2.0 - beta))
            + 2.0 * (2.0 - beta) / (beta - 1.0) * (inp.x0_norm as f64).powf(beta - 1.0));

    let spread = 4.0 * LN_2 * E * n * zeta * (beta - 1.0)
        / (1.0 - 1.5f64.powf(1.0 - beta))
        / (1.0 - 2f64.powf(1.0 - beta)).powi(2)
        * width.powf(beta);
    let fill = common * (((inp.a + 1) as f64).ln() + 1.0);

    PhaseBounds {
        phase1: reach,
        phase2: Some(spread + fill),
    }
}

/// `2n(2a+1)(‖x0‖₁ + 2a)` for SEMO, `e` times that for GSEMO.
pub fn bound_unit_step(inp: &BoundInputs) -> Result<f64> {
    check_n(inp)?;
    match inp.law {
        MutationLaw::UnitStep => Ok(unit_step_phases(inp).total().expect("explicit")),
        other => Err(invalid(format!(
            "unit-step bound needs the unit law, got {}",
            other.name()
        ))),
    }
}

/// The three-summand power-law bound; identical for SEMO and GSEMO.
pub fn bound_power_law(inp: &BoundInputs) -> Result<f64> {
    check_n(inp)?;
    match inp.law {
        MutationLaw::PowerLaw(p) => Ok(power_law_phases(inp, p.beta(), p.zeta())
            .total()
            .expect("explicit")),
        other => Err(invalid(format!(
            "power-law bound needs the power law, got {}",
            other.name()
        ))),
    }
}

/// `C · a n (n/q + ‖x0‖₁ q + max(ln(a+1)/(a q), a q + ln(a+1)))`.
///
/// Shape of the exponential-tail bound with a caller-chosen constant. Returns
/// 0 for `a = 0`, where the expression is undefined.
pub fn bound_exp_tail_shape(inp: &BoundInputs, c: f64) -> Result<f64> {
    check_n(inp)?;
    let q = match inp.law {
        MutationLaw::BilateralGeometric(g) => g.q(),
        other => {
            return Err(invalid(format!(
                "exponential-tail shape needs the geometric law, got {}",
                other.name()
            )))
        }
    };
    if c.is_nan() || c < 0.0 {
        return Err(invalid(format!(
            "shape constant must be non-negative, got {c}"
        )));
    }
    if inp.a == 0 {
        return Ok(0.0);
    }
    let a = inp.a as f64;
    let n = inp.n as f64;
    let log_term = (a + 1.0).ln();
    let finish = (log_term / (a * q)).max(a * q + log_term);
    Ok(c * a * n * (n / q + inp.x0_norm as f64 * q + finish))
}

/// Per-phase bounds.
///
/// For the geometric law only the first phase is explicit:
/// `(2a+1) e n / K · (n π² / (6q) + 4 ‖x0‖₁ q)` with `K = (1/4)(1−C)/(2−C)`
/// for the caller's `moment_c = C ≥ q`.
pub fn bound_lemma_phase_terms(inp: &BoundInputs, moment_c: Option<f64>) -> Result<PhaseBounds> {
    check_n(inp)?;
    match inp.law {
        MutationLaw::UnitStep => Ok(unit_step_phases(inp)),
        MutationLaw::PowerLaw(p) => Ok(power_law_phases(inp, p.beta(), p.zeta())),
        MutationLaw::BilateralGeometric(g) => {
            let c = moment_c.ok_or_else(|| invalid("the geometric phase-1 bound needs C"))?;
            let q = g.q();
            if q > c {
                return Err(invalid(format!("need q <= C, got q = {q}, C = {c}")));
            }
            let k = moment_constant(c)?;
            let n = inp.n as f64;
            let width = (2 * inp.a + 1) as f64;
            Ok(PhaseBounds {
                phase1: width * E * n / k
                    * (n * PI * PI / (6.0 * q) + 4.0 * inp.x0_norm as f64 * q),
                phase2: None,
            })
        }
    }
}

/// The explicit ceiling for a configuration, where one exists: unit-step and
/// power-law laws with `a ≥ 1`.
pub fn certified_bound(inp: &BoundInputs) -> Result<Option<f64>> {
    if inp.a == 0 {
        return Ok(None);
    }
    match inp.law {
        MutationLaw::UnitStep => bound_unit_step(inp).map(Some),
        MutationLaw::PowerLaw(_) => bound_power_law(inp).map(Some),
        MutationLaw::BilateralGeometric(_) => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn inputs(
        algorithm: AlgorithmKind,
        law: MutationLaw,
        n: usize,
        a: u64,
        x0_norm: u64,
    ) -> BoundInputs {
        BoundInputs {
            algorithm,
            n,
            a,
            x0_norm,
            law,
        }
    }

    #[test]
    fn unit_step_examples() {
        let u = MutationLaw::UnitStep;
        assert_eq!(
            bound_unit_step(&inputs(AlgorithmKind::Semo, u, 2, 1, 0)).unwrap(),
            24.0
        );
        assert_eq!(
            bound_unit_step(&inputs(AlgorithmKind::Semo, u, 2, 0, 0)).unwrap(),
            0.0
        );
        assert_relative_eq!(
            bound_unit_step(&inputs(AlgorithmKind::Gsemo, u, 2, 1, 3)).unwrap(),
            60.0 * E,
            max_relative = 1e-15
        );
        let p1 = bound_lemma_phase_terms(&inputs(AlgorithmKind::Semo, u, 2, 3, 0), None).unwrap();
        assert_eq!(p1.phase1, 0.0);
    }

    #[test]
    fn gsemo_is_e_times_semo() {
        for (n, a, x) in [(2, 1, 0), (3, 7, 19), (10, 200, 20_000)] {
            let semo =
                bound_unit_step(&inputs(AlgorithmKind::Semo, MutationLaw::UnitStep, n, a, x))
                    .unwrap();
            let gsemo = bound_unit_step(&inputs(
                AlgorithmKind::Gsemo,
                MutationLaw::UnitStep,
                n,
                a,
                x,
            ))
            .unwrap();
            assert_eq!(semo * E, gsemo);
        }
    }

    #[test]
    fn law_mismatch_is_an_error() {
        let g = MutationLaw::bilateral_geometric(0.1).unwrap();
        assert!(bound_unit_step(&inputs(AlgorithmKind::Semo, g, 2, 1, 0)).is_err());
        assert!(bound_power_law(&inputs(AlgorithmKind::Semo, g, 2, 1, 0)).is_err());
        assert!(bound_exp_tail_shape(
            &inputs(AlgorithmKind::Semo, MutationLaw::UnitStep, 2, 1, 0),
            1.0
        )
        .is_err());
        assert!(bound_lemma_phase_terms(&inputs(AlgorithmKind::Semo, g, 2, 1, 0), None).is_err());
        assert!(
            bound_lemma_phase_terms(&inputs(AlgorithmKind::Semo, g, 2, 1, 0), Some(0.05)).is_err()
        );
    }

    #[test]
    fn exp_tail_shape_examples() {
        let g = MutationLaw::bilateral_geometric(1.0 / 200.0).unwrap();
        let inp = inputs(AlgorithmKind::Gsemo, g, 2, 200, 20_000);
        assert_eq!(bound_exp_tail_shape(&inp, 0.0).unwrap(), 0.0);
        // 400 · (400 + 100 + max(ln 201, 1 + ln 201))
        assert_relative_eq!(
            bound_exp_tail_shape(&inp, 1.0).unwrap(),
            400.0 * (501.0 + 201f64.ln()),
            max_relative = 1e-12
        );
        let g0 = inputs(AlgorithmKind::Gsemo, g, 2, 0, 5);
        assert_eq!(bound_exp_tail_shape(&g0, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn certified_bound_skips_degenerate_front() {
        let p = MutationLaw::power_law(1.5).unwrap();
        assert_eq!(
            certified_bound(&inputs(AlgorithmKind::Gsemo, p, 2, 0, 0)).unwrap(),
            None
        );
        assert!(certified_bound(&inputs(AlgorithmKind::Gsemo, p, 2, 1, 0))
            .unwrap()
            .is_some());
        let g = MutationLaw::bilateral_geometric(0.1).unwrap();
        assert_eq!(
            certified_bound(&inputs(AlgorithmKind::Gsemo, g, 2, 5, 0)).unwrap(),
            None
        );
    }
}
