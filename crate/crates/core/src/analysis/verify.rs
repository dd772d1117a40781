use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::Serialize;

use super::bbm::{bbm_limit_check, BbmField};
use super::feasibility::{feasibility_check, feasibility_threshold, interpolation_exponent};
use super::lower_bound::{gaussian_radial_moment, lower_bound_value, LowerBoundParams};
use super::quadrature::tanh_sinh;
use crate::error::Result;
use crate::forcing::{forcing_l2_norm_sq, ForcingGeometry, ForcingSpec};

/// One line of the verification table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub reference: f64,
    /// Largest admissible `error`.
    pub tolerance: f64,
    pub error: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, reference: f64, error: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            value,
            reference,
            tolerance,
            error,
            passed: error <= tolerance,
        }
    }

    fn relative(name: impl Into<String>, value: f64, reference: f64, tolerance: f64) -> Self {
        let error = (value - reference).abs() / reference.abs();
        Self::new(name, value, reference, error, tolerance)
    }

    fn flag(name: impl Into<String>, ok: bool) -> Self {
        let v = if ok { 1.0 } else { 0.0 };
        Self::new(name, v, 1.0, 1.0 - v, 0.0)
    }
}

/// Bisects the feasibility predicate itself for the largest feasible delta.
fn bisect_feasibility(eps: f64) -> f64 {
    let (mut lo, mut hi) = (0.01, 0.99);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if feasibility_check(mid, eps).feasible {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub const BBM_ORDERS: [f64; 3] = [0.9, 0.95, 0.99];

pub fn bbm_fields() -> Vec<(&'static str, BbmField)> {
    vec![
        ("identity", BbmField::Polynomial { coeffs: vec![0.0, 1.0], length: 1.0 }),
        ("cubic", BbmField::Polynomial { coeffs: vec![1.0, -0.5, 2.0, -1.0], length: 1.0 }),
        ("bump", BbmField::Bump { amplitude: 1.0, center: 0.5, width: 0.4, length: 1.0 }),
        ("affine_ball", BbmField::Affine { gradient: [1.0, -2.0, 0.5], radius: 1.0 }),
    ]
}

/// The full analysis suite.
pub fn run_verification() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let root = (11.0 - 41f64.sqrt()) / 10.0;

    let bisected = bisect_feasibility(1e-12);
    checks.push(Check::new("feasibility_threshold", bisected, root, (bisected - root).abs(), 1e-9));
    checks.push(Check::new(
        "feasibility_threshold_closed_form",
        feasibility_threshold(0.0),
        root,
        (feasibility_threshold(0.0) - root).abs(),
        1e-12,
    ));
    checks.push(Check::flag("feasible_at_0.40", feasibility_check(0.40, 1e-9).feasible));
    checks.push(Check::flag("infeasible_at_0.50", !feasibility_check(0.50, 1e-9).feasible));
    let disagreements = (1..1000)
        .filter(|&i| {
            let delta = i as f64 / 1000.0;
            feasibility_check(delta, 1e-7).feasible != (delta < root)
        })
        .count();
    checks.push(Check::new("feasibility_grid_disagreements", disagreements as f64, 0.0, disagreements as f64, 0.0));

    let mut worst = 0.0f64;
    for i in 1..=45 {
        let delta = i as f64 / 100.0;
        for eps in [1e-6, 1e-4, 1e-3, 0.2 * delta] {
            let r = interpolation_exponent(delta, eps)?;
            worst = worst.max(r.residual / (2.0 * eps));
        }
    }
    checks.push(Check::new("interpolation_residual_over_2eps", worst, 0.0, worst, 1.0));

    let mut worst = 0.0f64;
    for delta in [0.25, 0.5, 0.75] {
        for b in [0.5, 1.0, 2.0] {
            let m = gaussian_radial_moment(delta, b)?;
            worst = worst.max((m.quadrature - m.closed_form).abs() / m.closed_form);
        }
    }
    checks.push(Check::new("radial_moment_vs_closed_form", worst, 0.0, worst, 1e-8));

    for delta in [0.25, 0.5, 0.75, 0.9] {
        let plate = ForcingSpec::new(delta, ForcingGeometry::HalfSpace { y_max: 10.0 });
        let q = tanh_sinh(|y| y.powf(-delta), 0.0, 10.0, 1e-13).value;
        checks.push(Check::relative(format!("forcing_l2_halfspace_delta_{delta}"), forcing_l2_norm_sq(&plate)?, q, 1e-6));
        let ball = ForcingSpec::new(delta, ForcingGeometry::Sphere { radius: 5.0 });
        let q = 4.0 * PI * tanh_sinh(|u| (5.0 - u).powi(2) * u.powf(-delta), 0.0, 5.0, 1e-13).value;
        checks.push(Check::relative(format!("forcing_l2_sphere_delta_{delta}"), forcing_l2_norm_sq(&ball)?, q, 1e-6));
    }

    let mut smallest = f64::INFINITY;
    let mut worst_scaling = 0.0f64;
    for i in 0..20 {
        let delta = 0.05 + 0.9 * i as f64 / 19.0;
        let p = LowerBoundParams { delta, b: 1.0, c: 1.0, w: 0.0, t_final: 1.0 };
        let v = lower_bound_value(&p)?;
        smallest = smallest.min(v);
        let v2 = lower_bound_value(&LowerBoundParams { t_final: 2.0, ..p })?;
        worst_scaling = worst_scaling.max((v2 / v / 2f64.powf(2.0 - 0.5 * delta) - 1.0).abs());
    }
    checks.push(Check::new("lower_bound_min_on_delta_grid", smallest, 0.0, if smallest > 0.0 { 0.0 } else { 1.0 }, 0.0));
    checks.push(Check::new("lower_bound_time_scaling", worst_scaling, 0.0, worst_scaling, 1e-12));

    for (name, field) in bbm_fields() {
        let r = bbm_limit_check(&field, &BBM_ORDERS)?;
        checks.push(Check::new(format!("bbm_{name}"), r.extrapolated, r.reference, r.relative_error, 0.02));
        if let BbmField::Affine { gradient, radius } = field {
            let printed = 2.0 * PI / 3.0 * gradient.iter().map(|g| g * g).sum::<f64>() * 4.0 * PI * radius.powi(3) / 3.0;
            checks.push(Check::relative(format!("bbm_{name}_vs_2pi_over_3"), r.extrapolated, printed, 0.2));
        }
    }
    Ok(checks)
}

/// Fixed-width pass/fail table.
pub fn format_table(checks: &[Check]) -> String {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(4).max(5);
    let mut out = String::new();
    let _ = writeln!(out, "{:<width$}  {:>16}  {:>16}  {:>10}  {:>10}  result", "check", "value", "reference", "error", "tolerance");
    for c in checks {
        let _ = writeln!(
            out,
            "{:<width$}  {:>16.10e}  {:>16.10e}  {:>10.3e}  {:>10.3e}  {}",
            c.name,
            c.value,
            c.reference,
            c.error,
            c.tolerance,
            if c.passed { "PASS" } else { "FAIL" }
        );
    }
    out
}

pub fn to_csv(checks: &[Check]) -> String {
    let mut out = String::from("name,value,reference,error,tolerance,passed\n");
    for c in checks {
        let _ = writeln!(out, "{},{:e},{:e},{:e},{:e},{}", c.name, c.value, c.reference, c.error, c.tolerance, c.passed);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_check_passes() {
        let checks = run_verification().unwrap();
        let failed: Vec<&Check> = checks.iter().filter(|c| !c.passed).collect();
        assert!(failed.is_empty(), "{}", format_table(&checks));
        assert!(checks.len() > 20);
    }

    #[test]
    fn outputs_are_machine_readable() {
        let checks = vec![Check::relative("a", 1.0, 1.0, 0.1), Check::flag("b", false)];
        let csv = to_csv(&checks);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].ends_with(",true") && lines[2].ends_with(",false"));
        let table = format_table(&checks);
        assert!(table.contains("PASS") && table.contains("FAIL"));
    }
}
