//! Numerical checker for the switching-game verification conditions.
//!
//! A candidate value function `h` and cost kernel `K` solve the game when
//!
//! * W(i)  `z − α h(z) + ½ h''(z) ≤ 0` for all `z`;
//! * W(ii) `−K(z,t) + ∫ [h(√t·u − z) − h(z)] φ(u) du ≤ 0` for all `z, t`;
//! * W(iii) equality in W(i) on the continuation region `z ≥ −l`;
//! * W(iv) equality in W(ii) on the switching region `z ≤ −l`, `t > 0`.
//!
//! The checker evaluates all four on finite grids: the differential operator
//! from closed-form second derivatives (finite differences for tabulated
//! candidates) and the Gaussian integrals by Gauss–Hermite quadrature of the
//! configured order. Reported per condition: the worst equality residual on
//! its equality region, every inequality violation, and the sign pattern on
//! the strict region.

use serde::Serialize;

use super::analytic;
use super::gauss::GaussHermite;
use super::switching::CostModel;
use crate::{Error, Result};

/// Candidate value function.
#[derive(Debug, Clone, Serialize)]
pub enum ValueCandidate {
    /// `h(z) = z/α` (solves the exactly-compensated game).
    CaseA,
    /// `h(z) = ψ(|z|)` (solves the fair-switch game).
    CaseB,
    /// Case-B candidate distorted by `coeff·z²`: a mutation that must be
    /// flagged by W(i).
    PerturbedB { coeff: f64 },
    /// Uniformly tabulated values; evaluated by linear interpolation and
    /// differentiated by central differences, so only fit for the
    /// grid-based conditions.
    Table { z0: f64, dz: f64, values: Vec<f64> },
}

impl ValueCandidate {
    fn h(&self, alpha: f64, z: f64) -> f64 {
        match self {
            ValueCandidate::CaseA => analytic::h_case_a(alpha, z),
            ValueCandidate::CaseB => analytic::h_case_b(alpha, z),
            ValueCandidate::PerturbedB { coeff } => {
                analytic::h_case_b(alpha, z) + coeff * z * z
            }
            ValueCandidate::Table { z0, dz, values } => {
                let pos = (z - z0) / dz;
                let k = pos.floor() as isize;
                let frac = pos - pos.floor();
                let clamp = |i: isize| -> f64 {
                    let i = i.clamp(0, values.len() as isize - 1) as usize;
                    values[i]
                };
                clamp(k) * (1.0 - frac) + clamp(k + 1) * frac
            }
        }
    }

    fn second_derivative(&self, alpha: f64, z: f64, step: f64) -> f64 {
        match self {
            ValueCandidate::CaseA => 0.0,
            ValueCandidate::CaseB => analytic::h_case_b_dd(alpha, z),
            ValueCandidate::PerturbedB { coeff } => {
                analytic::h_case_b_dd(alpha, z) + 2.0 * coeff
            }
            ValueCandidate::Table { .. } => {
                (self.h(alpha, z + step) - 2.0 * self.h(alpha, z) + self.h(alpha, z - step))
                    / (step * step)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationInput {
    pub alpha: f64,
    pub h: ValueCandidate,
    pub cost: CostModel,
    /// Switching boundary `l`; `None` means equality is expected everywhere
    /// (the exactly-compensated case).
    pub boundary: Option<f64>,
    pub z_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub quad_order: usize,
}

impl VerificationInput {
    pub fn case_a(alpha: f64) -> Self {
        Self {
            alpha,
            h: ValueCandidate::CaseA,
            cost: CostModel::ExactlyCompensated,
            boundary: None,
            z_grid: default_z_grid(),
            t_grid: vec![0.0, 0.25, 1.0, 4.0],
            quad_order: 64,
        }
    }

    pub fn case_b(alpha: f64) -> Self {
        Self {
            alpha,
            h: ValueCandidate::CaseB,
            cost: CostModel::FairSwitch,
            boundary: Some(0.0),
            z_grid: default_z_grid(),
            t_grid: vec![0.25, 1.0, 4.0],
            quad_order: 64,
        }
    }
}

pub fn default_z_grid() -> Vec<f64> {
    // −6 … 6 in steps of 1/16: exact binary fractions keep region
    // membership (z ≥ −l) free of rounding tie-breaks.
    let step = 1.0 / 16.0;
    (0..=192).map(|k| -6.0 + k as f64 * step).collect()
}

/// Inequality residuals above this level count as violations; equality
/// residuals are reported raw.
const VIOLATION_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub name: String,
    pub points_checked: usize,
    /// Worst |residual| over the condition's equality region.
    pub max_equality_residual: f64,
    /// Points where the inequality side fails: `(z, t, residual)`.
    pub violations: Vec<(f64, f64, f64)>,
    /// On the strict-inequality region the residual must be negative
    /// everywhere; `true` when the region is empty.
    pub strict_region_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub conditions: Vec<ConditionReport>,
}

impl VerificationReport {
    pub fn condition(&self, name: &str) -> Option<&ConditionReport> {
        self.conditions.iter().find(|c| c.name == name)
    }

    /// All inequalities hold and all equality residuals stay below `tol`.
    pub fn passed(&self, tol: f64) -> bool {
        self.conditions
            .iter()
            .all(|c| c.violations.is_empty() && c.max_equality_residual <= tol && c.strict_region_ok)
    }
}

/// Evaluates W(i)–W(iv) on the configured grids.
pub fn check_verification_conditions(vin: &VerificationInput) -> Result<VerificationReport> {
    if vin.z_grid.is_empty() || vin.t_grid.is_empty() {
        return Err(Error::Config("empty verification grid".into()));
    }
    let gh = GaussHermite::new(vin.quad_order)?;
    let alpha = vin.alpha;
    let fd_step = match &vin.h {
        ValueCandidate::Table { dz, .. } => *dz,
        _ => 1e-4,
    };
    for &z in &vin.z_grid {
        if !vin.h.h(alpha, z).is_finite() {
            return Err(Error::Config(format!("candidate h not finite at z = {z}")));
        }
    }

    // Generator residual: z − αh + h''/2.
    let gen_residual: Vec<(f64, f64)> = vin
        .z_grid
        .iter()
        .map(|&z| {
            (z, z - alpha * vin.h.h(alpha, z) + 0.5 * vin.h.second_derivative(alpha, z, fd_step))
        })
        .collect();

    // Jump residual: −K + E[h(√t·U − z) − h(z)].
    let mut jump_residual: Vec<(f64, f64, f64)> = Vec::new();
    for &t in &vin.t_grid {
        for &z in &vin.z_grid {
            let integral = if t > 0.0 {
                let rt = t.sqrt();
                gh.normal_expectation(|u| vin.h.h(alpha, rt * u - z)) - vin.h.h(alpha, z)
            } else {
                vin.h.h(alpha, -z) - vin.h.h(alpha, z)
            };
            let r = -vin.cost.cost_quadrature(alpha, &gh, z, t) + integral;
            jump_residual.push((z, t, r));
        }
    }

    let l = vin.boundary;
    let in_continuation = |z: f64| l.is_none_or(|l| z >= -l);
    let in_switch_region = |z: f64| l.is_none_or(|l| z <= -l);

    // W(i): inequality everywhere; strict on the interior of the switching
    // region when a boundary is present.
    let mut w1 = ConditionReport {
        name: "W(i)".into(),
        points_checked: gen_residual.len(),
        max_equality_residual: 0.0,
        violations: Vec::new(),
        strict_region_ok: true,
    };
    for &(z, r) in &gen_residual {
        if r > VIOLATION_FLOOR {
            w1.violations.push((z, f64::NAN, r));
        }
        if let Some(l) = l {
            if z < -l && r >= 0.0 {
                w1.strict_region_ok = false;
            }
        }
    }

    // W(iii): equality on the continuation region.
    let mut w3 = ConditionReport {
        name: "W(iii)".into(),
        points_checked: 0,
        max_equality_residual: 0.0,
        violations: Vec::new(),
        strict_region_ok: true,
    };
    for &(z, r) in &gen_residual {
        if in_continuation(z) {
            w3.points_checked += 1;
            w3.max_equality_residual = w3.max_equality_residual.max(r.abs());
        }
    }

    // W(ii): inequality everywhere.
    let mut w2 = ConditionReport {
        name: "W(ii)".into(),
        points_checked: jump_residual.len(),
        max_equality_residual: 0.0,
        violations: Vec::new(),
        strict_region_ok: true,
    };
    for &(z, t, r) in &jump_residual {
        if r > VIOLATION_FLOOR {
            w2.violations.push((z, t, r));
        }
    }

    // W(iv): equality on the switching region for positive lags.
    let mut w4 = ConditionReport {
        name: "W(iv)".into(),
        points_checked: 0,
        max_equality_residual: 0.0,
        violations: Vec::new(),
        strict_region_ok: true,
    };
    for &(z, t, r) in &jump_residual {
        if t > 0.0 && in_switch_region(z) {
            w4.points_checked += 1;
            w4.max_equality_residual = w4.max_equality_residual.max(r.abs());
        }
    }

    Ok(VerificationReport { conditions: vec![w1, w2, w3, w4] })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_a_all_conditions_hold_with_equality() {
        let report = check_verification_conditions(&VerificationInput::case_a(1.0)).unwrap();
        assert!(report.passed(1e-10), "{report:?}");
        for c in &report.conditions {
            assert!(c.max_equality_residual <= 1e-10, "{}: {}", c.name, c.max_equality_residual);
        }
    }

    #[test]
    fn case_b_equality_on_regions_and_strict_below() {
        let report = check_verification_conditions(&VerificationInput::case_b(0.5)).unwrap();
        let w3 = report.condition("W(iii)").unwrap();
        assert!(w3.max_equality_residual <= 1e-10, "{}", w3.max_equality_residual);
        let w4 = report.condition("W(iv)").unwrap();
        assert!(w4.max_equality_residual <= 1e-10, "{}", w4.max_equality_residual);
        let w1 = report.condition("W(i)").unwrap();
        assert!(w1.violations.is_empty());
        assert!(w1.strict_region_ok, "residual must be strictly negative on z < 0");
        assert!(report.condition("W(ii)").unwrap().violations.is_empty());
    }

    #[test]
    fn perturbed_candidate_flagged_by_w1() {
        let mut vin = VerificationInput::case_b(0.5);
        vin.h = ValueCandidate::PerturbedB { coeff: 0.01 };
        let report = check_verification_conditions(&vin).unwrap();
        let w1 = report.condition("W(i)").unwrap();
        assert!(
            !w1.violations.is_empty(),
            "the quadratic bump must break the generator inequality"
        );
        // The violation sits where coeff·(1 − αz²) > 0, i.e. near z = 0.
        assert!(w1.violations.iter().any(|&(z, _, _)| z.abs() < (1.0 / 0.5f64).sqrt()));
    }

    #[test]
    fn tabulated_candidate_close_to_closed_form() {
        // Tabulate case B on a fine grid; finite differences keep the
        // generator residual small away from the kink at 0.
        let alpha = 0.5;
        let z0 = -8.0;
        let dz = 1.0 / 64.0;
        let values: Vec<f64> =
            (0..=1024).map(|k| analytic::h_case_b(alpha, z0 + k as f64 * dz)).collect();
        let mut vin = VerificationInput::case_b(alpha);
        vin.h = ValueCandidate::Table { z0, dz, values };
        let report = check_verification_conditions(&vin).unwrap();
        let w3 = report.condition("W(iii)").unwrap();
        // Second-order finite differences: O(dz²) residual, not 1e−10.
        assert!(w3.max_equality_residual < 1e-2, "{}", w3.max_equality_residual);
    }
}
