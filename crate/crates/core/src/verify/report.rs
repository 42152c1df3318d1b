//! Check reports and the sample-evaluation loop shared by every check.

use std::fmt;

use crate::error::Result;
use crate::kernel::chart::Domain;
use crate::kernel::sampling::{par_map_indexed, SamplePlan};

/// Tolerance class a report was judged against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ToleranceTier {
    /// Analytic jets up to order 2.
    Analytic,
    /// Analytic order-4 jets (Bach).
    Bach,
    /// Finite-difference jets.
    FiniteDifference,
}

impl ToleranceTier {
    pub fn default_tolerance(self) -> f64 {
        match self {
            ToleranceTier::Analytic => 1e-7,
            ToleranceTier::Bach => 1e-5,
            ToleranceTier::FiniteDifference => 1e-4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ToleranceTier::Analytic => "analytic",
            ToleranceTier::Bach => "bach",
            ToleranceTier::FiniteDifference => "fd",
        }
    }
}

impl fmt::Display for ToleranceTier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Column order of the CSV serialization.
pub const CSV_HEADER: [&str; 7] = ["check_name", "scenario", "samples", "tolerance", "max_abs_residual", "mean_abs_residual", "pass"];

/// Outcome of one check over a sample plan. `pass` is derived, never set.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub check_name: String,
    pub scenario: String,
    pub max_abs_residual: f64,
    pub mean_abs_residual: f64,
    pub samples_evaluated: usize,
    pub tolerance: f64,
    pub pass: bool,
    pub tier: ToleranceTier,
    pub notes: Vec<String>,
}

impl CheckReport {
    /// Builds a report from per-sample residuals. NaN counts as infinite.
    pub fn from_residuals(name: impl Into<String>, residuals: &[f64], tolerance: f64, tier: ToleranceTier) -> CheckReport {
        let clean: Vec<f64> = residuals.iter().map(|r| if r.is_nan() { f64::INFINITY } else { r.abs() }).collect();
        let max = clean.iter().copied().fold(0.0, f64::max);
        let mean = if clean.is_empty() { 0.0 } else { clean.iter().sum::<f64>() / clean.len() as f64 };
        CheckReport {
            check_name: name.into(),
            scenario: String::new(),
            max_abs_residual: max,
            mean_abs_residual: mean,
            samples_evaluated: clean.len(),
            tolerance,
            pass: max <= tolerance,
            tier,
            notes: Vec::new(),
        }
    }

    pub fn with_scenario(mut self, scenario: impl Into<String>) -> CheckReport {
        self.scenario = scenario.into();
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> CheckReport {
        self.notes.push(note.into());
        self
    }

    /// The seven CSV fields in [`CSV_HEADER`] order.
    pub fn csv_record(&self) -> [String; 7] {
        [
            self.check_name.clone(),
            self.scenario.clone(),
            self.samples_evaluated.to_string(),
            format!("{:e}", self.tolerance),
            format!("{:e}", self.max_abs_residual),
            format!("{:e}", self.mean_abs_residual),
            self.pass.to_string(),
        ]
    }

    /// Combines sub-checks into one report judged against the tightest
    /// sub-tolerance, so `pass` still follows the combined residual.
    pub fn combine(name: impl Into<String>, parts: &[CheckReport]) -> CheckReport {
        let tier = parts.first().map_or(ToleranceTier::Analytic, |p| p.tier);
        let max = parts.iter().map(|p| p.max_abs_residual).fold(0.0, f64::max);
        let samples = parts.iter().map(|p| p.samples_evaluated).max().unwrap_or(0);
        let mean = if parts.is_empty() { 0.0 } else { parts.iter().map(|p| p.mean_abs_residual).sum::<f64>() / parts.len() as f64 };
        let tolerance = parts.iter().map(|p| p.tolerance).fold(f64::INFINITY, f64::min);
        let tolerance = if tolerance.is_finite() { tolerance } else { 0.0 };
        let mut notes = Vec::new();
        for p in parts {
            notes.push(format!("{}: max {:e} (tol {:e})", p.check_name, p.max_abs_residual, p.tolerance));
            notes.extend(p.notes.iter().cloned());
        }
        CheckReport {
            check_name: name.into(),
            scenario: parts.first().map(|p| p.scenario.clone()).unwrap_or_default(),
            max_abs_residual: max,
            mean_abs_residual: mean,
            samples_evaluated: samples,
            tolerance,
            pass: max <= tolerance,
            tier,
            notes,
        }
    }
}

/// Runs `residual` on every sample of `plan` (in parallel, results in index
/// order). A failing sample counts as an infinite residual and leaves a note.
pub fn evaluate_plan(
    name: &str,
    plan: &SamplePlan,
    domain: &Domain,
    tolerance: f64,
    tier: ToleranceTier,
    residual: impl Fn(&[f64]) -> Result<f64> + Sync + Send,
) -> CheckReport {
    let outcomes = par_map_indexed(plan.count, |i| plan.point(i, domain).and_then(|p| residual(&p)));
    let residuals: Vec<f64> = outcomes.iter().map(|o| *o.as_ref().unwrap_or(&f64::INFINITY)).collect();
    let mut report = CheckReport::from_residuals(name, &residuals, tolerance, tier);
    for (i, o) in outcomes.iter().enumerate() {
        if let Err(e) = o {
            report.notes.push(format!("sample {i}: {e}"));
        }
    }
    report
}

/// Least-squares slope of `log r` against `log ε`.
pub fn log_log_slope(eps: &[f64], residuals: &[f64]) -> f64 {
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = residuals.iter().map(|r| r.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::GeometryError;

    #[test]
    fn pass_flag_follows_max_residual() {
        let r = CheckReport::from_residuals("x", &[1e-9, 3e-8], 1e-7, ToleranceTier::Analytic);
        assert!(r.pass);
        assert_eq!(r.samples_evaluated, 2);
        let r = CheckReport::from_residuals("x", &[1e-9, f64::NAN], 1e-7, ToleranceTier::Analytic);
        assert!(!r.pass && r.max_abs_residual.is_infinite());
        let r = CheckReport::from_residuals("x", &[1e-7], 1e-7, ToleranceTier::Analytic);
        assert!(r.pass, "the tolerance itself passes");
    }

    #[test]
    fn csv_record_has_header_order() {
        let r = CheckReport::from_residuals("einstein", &[0.5, 0.25], 1e-7, ToleranceTier::Analytic).with_scenario("demo");
        assert_eq!(r.csv_record(), ["einstein", "demo", "2", "1e-7", "5e-1", "3.75e-1", "false"].map(String::from));
    }

    #[test]
    fn failing_samples_become_infinite_with_a_note() {
        let plan = SamplePlan::new(0, 4, vec![(0.0, 1.0)]);
        let r = evaluate_plan("f", &plan, &Domain::unbounded(1), 1.0, ToleranceTier::Analytic, |p| {
            if p[0] > 0.5 {
                Err(GeometryError::BadMu(p[0]))
            } else {
                Ok(p[0])
            }
        });
        let bad = r.notes.len();
        assert!(bad > 0 && bad < 4);
        assert!(r.max_abs_residual.is_infinite() && !r.pass);
    }

    #[test]
    fn combined_reports_use_the_tightest_tolerance() {
        let a = CheckReport::from_residuals("a", &[1e-8], 1e-7, ToleranceTier::Analytic);
        let b = CheckReport::from_residuals("b", &[5e-7], 1e-6, ToleranceTier::Analytic);
        let c = CheckReport::combine("ab", &[a.clone(), b]);
        assert_eq!(c.tolerance, 1e-7);
        assert!(!c.pass && c.max_abs_residual == 5e-7);
        assert!(CheckReport::combine("a", &[a]).pass);
    }

    #[test]
    fn slope_of_a_power_law() {
        let eps = [1e-3, 1e-4, 1e-5];
        let r: Vec<f64> = eps.iter().map(|e| 3.0 * e * e).collect();
        assert!((log_log_slope(&eps, &r) - 2.0).abs() < 1e-12);
    }
}
