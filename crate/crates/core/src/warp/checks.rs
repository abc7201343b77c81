use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Topology, WarpSpec, CHECK_GRID, PREDICATE_TOL};

/// Outcome of a geometric predicate with the residuals that decided it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredicateReport {
    pub name: String,
    pub passed: bool,
    pub residuals: Vec<(String, f64)>,
    pub reason: Option<String>,
}

impl PredicateReport {
    fn new(name: &str) -> Self {
        Self { name: name.to_string(), passed: true, residuals: Vec::new(), reason: None }
    }

    fn require(&mut self, label: &str, value: f64, ok: bool) {
        self.residuals.push((label.to_string(), value));
        if !ok {
            self.passed = false;
            if self.reason.is_none() {
                self.reason = Some(format!("{label} = {value:e}"));
            }
        }
    }

    fn fail(mut self, reason: &str) -> Self {
        self.passed = false;
        self.reason = Some(reason.to_string());
        self
    }

    pub fn residual(&self, label: &str) -> Option<f64> {
        self.residuals.iter().find(|(l, _)| l == label).map(|(_, v)| *v)
    }
}

impl fmt::Display for PredicateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.name, if self.passed { "pass" } else { "fail" })?;
        if let Some(reason) = &self.reason {
            write!(f, " ({reason})")?;
        }
        Ok(())
    }
}

// One-sided second derivative of `f` at 0, exact for cubics.
fn one_sided_second(f: impl Fn(f64) -> f64, step: f64) -> f64 {
    (2.0 * f(0.0) - 5.0 * f(step) + 4.0 * f(2.0 * step) - f(3.0 * step)) / (step * step)
}

/// Smoothness at the degenerate end: `h(0) = 0`, `h'(0) = 1` and vanishing
/// even derivatives, checked through order four.
pub fn check_assumption_a(spec: &WarpSpec) -> PredicateReport {
    let report = PredicateReport::new("assumption-A");
    if spec.topology != Topology::Connected {
        return report.fail("requires connected topology");
    }
    let mut report = report;
    let tol = PREDICATE_TOL;
    let h0 = spec.h(0.0);
    report.require("h(0)", h0, h0.abs() <= tol);
    let dh0 = spec.dh(0.0) - 1.0;
    report.require("h'(0)-1", dh0, dh0.abs() <= tol);
    let d2h0 = spec.d2h(0.0);
    report.require("h''(0)", d2h0, d2h0.abs() <= tol);
    // h'''' = (h'')''. For odd h the one-sided stencil errs at O(step^3),
    // which the (8 fine - coarse) / 7 combination removes.
    let step = 1e-2 * spec.length;
    let coarse = one_sided_second(|r| spec.d2h(r), step);
    let fine = one_sided_second(|r| spec.d2h(r), step / 2.0);
    let d4h0 = (8.0 * fine - coarse) / 7.0;
    report.require("h''''(0)", d4h0, d4h0.abs() <= tol);
    report
}

/// The warp-function form of `Ric >= 0` with strictly convex boundary:
/// `h'' <= 0`, `0 < h' <= 1` and `kappa > 0`.
pub fn check_ricci_convex(spec: &WarpSpec) -> PredicateReport {
    let report = PredicateReport::new("ricci-nonneg-convex");
    if spec.topology != Topology::Connected {
        return report.fail("requires connected topology");
    }
    let mut report = report;
    let tol = PREDICATE_TOL;
    let grid = spec.grid(CHECK_GRID);
    let max_d2h = grid.iter().map(|&r| spec.d2h(r)).fold(f64::NEG_INFINITY, f64::max);
    let min_dh = grid.iter().map(|&r| spec.dh(r)).fold(f64::INFINITY, f64::min);
    let max_dh = grid.iter().map(|&r| spec.dh(r)).fold(f64::NEG_INFINITY, f64::max);
    let kappa = spec.boundary_geometry().kappa;
    report.require("max h''", max_d2h, max_d2h <= tol);
    report.require("min h'", min_dh, min_dh > tol);
    report.require("max h'", max_dh, max_dh <= 1.0 + tol);
    report.require("kappa", kappa, kappa > 0.0);
    report
}

/// Mirror of [`check_ricci_convex`] for nonpositive Ricci curvature:
/// `h'' >= 0`, `h' >= 1` and `kappa > 0`.
pub fn check_ricci_nonpositive(spec: &WarpSpec) -> PredicateReport {
    let report = PredicateReport::new("ricci-nonpos-convex");
    if spec.topology != Topology::Connected {
        return report.fail("requires connected topology");
    }
    let mut report = report;
    let tol = PREDICATE_TOL;
    let grid = spec.grid(CHECK_GRID);
    let min_d2h = grid.iter().map(|&r| spec.d2h(r)).fold(f64::INFINITY, f64::min);
    let min_dh = grid.iter().map(|&r| spec.dh(r)).fold(f64::INFINITY, f64::min);
    let kappa = spec.boundary_geometry().kappa;
    report.require("min h''", min_d2h, min_d2h >= -tol);
    report.require("min h'", min_dh, min_dh >= 1.0 - tol);
    report.require("kappa", kappa, kappa > 0.0);
    report
}

/// Largest deviation of `dh` from the centred difference of `h` over the
/// interior of a `count`-point grid, together with `max |dh|`.
pub fn derivative_consistency(spec: &WarpSpec, count: usize) -> (f64, f64) {
    let grid = spec.grid(count);
    let step = 1e-5 * spec.length;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for &r in &grid[1..grid.len() - 1] {
        let lo = (r - step).max(0.0);
        let hi = (r + step).min(spec.length);
        let fd = (spec.h(hi) - spec.h(lo)) / (hi - lo);
        let dh = spec.dh(r);
        worst = worst.max((dh - fd).abs());
        scale = scale.max(dh.abs());
        let fd2 = (spec.dh(hi) - spec.dh(lo)) / (hi - lo);
        worst = worst.max((spec.d2h(r) - fd2).abs() * step);
    }
    (worst, scale)
}
