//! Checkers for the eigenvalue inequalities and equalities on warped
//! products, each producing [`BoundReport`] rows with a verdict.
//!
//! Sign convention: `margin > 0` means the claim is satisfied. The numerical
//! tolerance of a row is ten times the combined solver error estimates of
//! the quantities entering it; `|margin|` within ten tolerances counts as
//! equality.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radial::{cylinder_spectrum, ShootOptions};
use crate::sphere_modes::{ratio_bound, sphere_eigenvalue};
use crate::spectrum::{assemble_spectrum, DtnBlock, SpectrumTable};
use crate::warp::{check_ricci_convex, check_ricci_nonpositive, Topology, WarpSpec, CHECK_GRID, PREDICATE_TOL};

/// Safety factor between solver error estimates and verdict tolerance.
pub const TOLERANCE_FACTOR: f64 = 10.0;
/// Multiple of the tolerance within which a margin counts as equality.
pub const EQUALITY_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[allow(non_camel_case_types)]
pub enum TheoremId {
    T1_2,
    /// Mirror of [`TheoremId::T1_2`] under nonpositive Ricci curvature (upper bound).
    T1_2u,
    T1_4i,
    T1_4ii,
    T1_5i,
    T1_5ii,
    T1_6i,
    T1_6ii,
    T1_7i,
    T1_7iia,
    T1_7iib,
    T1_8i,
    T1_8ii,
    COR_1_9,
}

impl TheoremId {
    pub const ALL: [TheoremId; 14] = [
        TheoremId::T1_2,
        TheoremId::T1_2u,
        TheoremId::T1_4i,
        TheoremId::T1_4ii,
        TheoremId::T1_5i,
        TheoremId::T1_5ii,
        TheoremId::T1_6i,
        TheoremId::T1_6ii,
        TheoremId::T1_7i,
        TheoremId::T1_7iia,
        TheoremId::T1_7iib,
        TheoremId::T1_8i,
        TheoremId::T1_8ii,
        TheoremId::COR_1_9,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TheoremId::T1_2 => "T1_2",
            TheoremId::T1_2u => "T1_2u",
            TheoremId::T1_4i => "T1_4i",
            TheoremId::T1_4ii => "T1_4ii",
            TheoremId::T1_5i => "T1_5i",
            TheoremId::T1_5ii => "T1_5ii",
            TheoremId::T1_6i => "T1_6i",
            TheoremId::T1_6ii => "T1_6ii",
            TheoremId::T1_7i => "T1_7i",
            TheoremId::T1_7iia => "T1_7iia",
            TheoremId::T1_7iib => "T1_7iib",
            TheoremId::T1_8i => "T1_8i",
            TheoremId::T1_8ii => "T1_8ii",
            TheoremId::COR_1_9 => "COR_1_9",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    /// Accepts `T1_4ii`, `t1.4ii`, `cor1.9` and similar spellings.
    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        TheoremId::ALL
            .iter()
            .copied()
            .find(|id| id.as_str().chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase() == key)
            .ok_or_else(|| Error::Parse(format!("unknown theorem id {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Holds,
    HoldsWithEquality,
    Violated,
    NotApplicable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Holds => "Holds",
            Verdict::HoldsWithEquality => "HoldsWithEquality",
            Verdict::Violated => "Violated",
            Verdict::NotApplicable => "NotApplicable",
        };
        f.write_str(s)
    }
}

/// Direction of a claim `lhs ? rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Claim {
    AtLeast,
    AtMost,
    StrictlyBelow,
    Equal,
}

/// One theorem check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub theorem: TheoremId,
    pub n: u32,
    pub p: u32,
    /// Eigenvalue index `k`, or the sphere mode `m` for per-mode checks.
    pub k: u32,
    /// Branch within a two-boundary mode (0 lower, 1 upper).
    pub branch: Option<u8>,
    pub spec: String,
    pub claim: Claim,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub margin: Option<f64>,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub note: String,
}

impl BoundReport {
    /// A row for a check whose preconditions fail.
    pub fn not_applicable(theorem: TheoremId, spec: &WarpSpec, p: u32, reason: impl Into<String>) -> Self {
        Self {
            theorem,
            n: spec.n,
            p,
            k: 0,
            branch: None,
            spec: spec.family_tag.clone(),
            claim: Claim::AtLeast,
            lhs: None,
            rhs: None,
            margin: None,
            tolerance: 0.0,
            verdict: Verdict::NotApplicable,
            note: reason.into(),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn judged(
        theorem: TheoremId,
        spec: &WarpSpec,
        p: u32,
        k: u32,
        branch: Option<u8>,
        claim: Claim,
        lhs: f64,
        rhs: f64,
        error: f64,
        note: &str,
    ) -> Self {
        let tolerance = TOLERANCE_FACTOR * error;
        let (margin, verdict) = judge(claim, lhs, rhs, tolerance);
        Self {
            theorem,
            n: spec.n,
            p,
            k,
            branch,
            spec: spec.family_tag.clone(),
            claim,
            lhs: Some(lhs),
            rhs: Some(rhs),
            margin: Some(margin),
            tolerance,
            verdict,
            note: note.to_string(),
        }
    }
}

/// Signed margin and verdict of `lhs ? rhs` at the given tolerance.
pub fn judge(claim: Claim, lhs: f64, rhs: f64, tolerance: f64) -> (f64, Verdict) {
    let threshold = EQUALITY_FACTOR * tolerance;
    let margin = match claim {
        Claim::AtLeast => lhs - rhs,
        Claim::AtMost | Claim::StrictlyBelow => rhs - lhs,
        Claim::Equal => -(lhs - rhs).abs(),
    };
    let verdict = if !margin.is_finite() && !(margin == f64::INFINITY) {
        Verdict::Violated
    } else if margin.abs() <= threshold {
        Verdict::HoldsWithEquality
    } else if claim == Claim::Equal || margin < 0.0 {
        Verdict::Violated
    } else {
        Verdict::Holds
    };
    (margin, verdict)
}

/// Counts verdicts of kind `v`.
pub fn count(reports: &[BoundReport], v: Verdict) -> usize {
    reports.iter().filter(|r| r.verdict == v).count()
}

fn connected_only(id: TheoremId, spec: &WarpSpec, p: u32) -> Option<BoundReport> {
    (spec.topology != Topology::Connected)
        .then(|| BoundReport::not_applicable(id, spec, p, "requires a connected boundary"))
}

fn single_sigma(block: &DtnBlock) -> (f64, f64) {
    (block.sigma[0], block.error)
}

fn connected_table(spec: &WarpSpec, p: u32, m_max: u32, opts: &ShootOptions) -> Result<SpectrumTable> {
    assemble_spectrum(spec, p, m_max, opts)
}

/// `sigma_(m) >= (m + p) kappa` for nonnegative Ricci curvature and strictly
/// convex boundary, `p <= (n-1)/2`. Equality exactly on the ball.
pub fn check_escobar_type(spec: &WarpSpec, p: u32, m_max: u32, opts: &ShootOptions) -> Result<Vec<BoundReport>> {
    escobar_impl(TheoremId::T1_2, spec, p, m_max, opts)
}

/// The mirrored upper bound `sigma_(m) <= (m + p) kappa` under `h'' >= 0`,
/// `h' >= 1` (nonpositive Ricci curvature) with connected convex boundary.
pub fn check_escobar_upper(spec: &WarpSpec, p: u32, m_max: u32, opts: &ShootOptions) -> Result<Vec<BoundReport>> {
    escobar_impl(TheoremId::T1_2u, spec, p, m_max, opts)
}

fn escobar_impl(
    id: TheoremId,
    spec: &WarpSpec,
    p: u32,
    m_max: u32,
    opts: &ShootOptions,
) -> Result<Vec<BoundReport>> {
    if let Some(r) = connected_only(id, spec, p) {
        return Ok(vec![r]);
    }
    let predicate = if id == TheoremId::T1_2 { check_ricci_convex(spec) } else { check_ricci_nonpositive(spec) };
    if !predicate.passed {
        return Ok(vec![BoundReport::not_applicable(id, spec, p, predicate.to_string())]);
    }
    if 2 * p + 1 > spec.n {
        return Ok(vec![BoundReport::not_applicable(id, spec, p, "requires p <= (n-1)/2")]);
    }
    let kappa = spec.boundary_geometry().kappa;
    let table = connected_table(spec, p, m_max, opts)?;
    let claim = if id == TheoremId::T1_2 { Claim::AtLeast } else { Claim::AtMost };
    Ok((1..=m_max)
        .map(|m| {
            let (sigma, err) = single_sigma(table.block(m).expect("mode solved"));
            let rhs = (m + p) as f64 * kappa;
            BoundReport::judged(id, spec, p, m, None, claim, sigma, rhs, err, "(m+p) kappa")
        })
        .collect())
}

/// `sigma_(k+1) / sigma_(k) < lambda_(k+1) / lambda_(k)` for `k = 1..k_max`.
pub fn check_ratio(spec: &WarpSpec, p: u32, k_max: u32, opts: &ShootOptions) -> Result<Vec<BoundReport>> {
    let id = TheoremId::T1_4i;
    if let Some(r) = connected_only(id, spec, p) {
        return Ok(vec![r]);
    }
    if spec.n < 3 {
        return Ok(vec![BoundReport::not_applicable(id, spec, p, "requires n >= 3")]);
    }
    let table = connected_table(spec, p, k_max + 1, opts)?;
    let mut out = Vec::new();
    for k in 1..=k_max {
        let (s0, e0) = single_sigma(table.block(k).expect("mode solved"));
        let (s1, e1) = single_sigma(table.block(k + 1).expect("mode solved"));
        let ratio = s1 / s0;
        let err = ratio * (e0 / s0 + e1 / s1);
        let rhs = ratio_bound(spec.n, p, k)?;
        out.push(BoundReport::judged(id, spec, p, k, None, Claim::StrictlyBelow, ratio, rhs, err, "sphere eigenvalue ratio"));
    }
    Ok(out)
}

/// `sigma_(k) = (k + p) / h_0` for `n` even and `p = (n-2)/2`.
pub fn check_isospectral_conformal(
    spec: &WarpSpec,
    p: u32,
    k_max: u32,
    opts: &ShootOptions,
) -> Result<Vec<BoundReport>> {
    let id = TheoremId::T1_4ii;
    if let Some(r) = connected_only(id, spec, p) {
        return Ok(vec![r]);
    }
    if !spec.n.is_multiple_of(2) || 2 * p + 2 != spec.n {
        return Ok(vec![BoundReport::not_applicable(id, spec, p, "requires n even and p = (n-2)/2")]);
    }
    let h0 = spec.boundary_value();
    let table = connected_table(spec, p, k_max, opts)?;
    Ok((1..=k_max)
        .map(|k| {
            let (sigma, err) = single_sigma(table.block(k).expect("mode solved"));
            BoundReport::judged(id, spec, p, k, None, Claim::Equal, sigma, (k + p) as f64 / h0, err, "(k+p)/h0")
        })
        .collect())
}

/// Spectral gap bounds. Part (i) (`n >= 4`, `p <= (n-4)/2`) uses the bound
/// `h <= C`; when `c` is `None` the grid maximum of `h` is used.
pub fn check_gaps(
    spec: &WarpSpec,
    p: u32,
    k_max: u32,
    c: Option<f64>,
    opts: &ShootOptions,
) -> Result<Vec<BoundReport>> {
    let n = spec.n;
    let part_i = n >= 4 && 2 * p + 4 <= n;
    let part_ii = n >= 3 && n % 2 == 1 && 2 * p + 3 == n;
    let id = if part_ii { TheoremId::T1_5ii } else { TheoremId::T1_5i };
    if let Some(r) = connected_only(id, spec, p) {
        return Ok(vec![r]);
    }
    if !part_i && !part_ii {
        return Ok(vec![BoundReport::not_applicable(
            id,
            spec,
            p,
            "requires p <= (n-4)/2 (n >= 4) or p = (n-3)/2 (n odd)",
        )]);
    }
    let a = n as i32 - 2 * p as i32 - 1;
    let h0 = spec.boundary_value();
    let max_h = spec.max_h();
    let factor = if part_i {
        let c = c.unwrap_or(max_h);
        if !(c > 0.0) {
            return Err(Error::Domain(format!("C = {c} must be positive")));
        }
        if max_h > c * (1.0 + PREDICATE_TOL) {
            return Err(Error::CBoundViolated { max_h, c });
        }
        spec.length * c.powi(a - 2) / h0.powi(a)
    } else {
        spec.length / h0.powi(a)
    };
    let table = connected_table(spec, p, k_max + 1, opts)?;
    let mut out = Vec::new();
    for k in 1..=k_max {
        let (s0, e0) = single_sigma(table.block(k).expect("mode solved"));
        let (s1, e1) = single_sigma(table.block(k + 1).expect("mode solved"));
        let dl = sphere_eigenvalue(n, p, k + 1)? - sphere_eigenvalue(n, p, k)?;
        out.push(BoundReport::judged(id, spec, p, k, None, Claim::AtMost, s1 - s0, factor * dl, e0 + e1, "gap"));
    }
    Ok(out)
}

/// Checks the hypersurface-of-revolution constraints: unit boundary
/// sphere(s) and `|h'| <= 1`.
pub fn revolution_constraints(spec: &WarpSpec) -> std::result::Result<(), String> {
    let tol = 1e-6;
    let ends: Vec<f64> = match spec.topology {
        Topology::Connected => vec![spec.length],
        Topology::TwoBoundary => vec![0.0, spec.length],
    };
    for r in ends {
        if (spec.h(r) - 1.0).abs() > tol {
            return Err(format!("boundary sphere at r = {r} has radius {} (need 1)", spec.h(r)));
        }
    }
    for r in spec.grid(4 * CHECK_GRID) {
        if spec.dh(r).abs() > 1.0 + tol {
            return Err(format!("|h'({r})| = {} exceeds 1", spec.dh(r).abs()));
        }
    }
    Ok(())
}

/// Per-mode comparison with the unit ball: `sigma_m >= m + p` for
/// `p <= (n-3)/2`, and equality `sigma_m = m + p` for `n` even,
/// `p = (n-2)/2`. Both spectra are indexed by the same sphere modes, so
/// per-mode comparison implies the statement with multiplicity.
pub fn check_ball_comparison(spec: &WarpSpec, p: u32, k_max: u32, opts: &ShootOptions) -> Result<Vec<BoundReport>> {
    let n = spec.n;
    let part_i = n >= 3 && 2 * p + 3 <= n;
    let part_ii = n.is_multiple_of(2) && 2 * p + 2 == n;
    let id = if part_ii { TheoremId::T1_6ii } else { TheoremId::T1_6i };
    if let Some(r) = connected_only(id, spec, p) {
        return Ok(vec![r]);
    }
    if !part_i && !part_ii {
        return Ok(vec![BoundReport::not_applicable(id, spec, p, "requires p <= (n-3)/2 or n even with p = (n-2)/2")]);
    }
    if let Err(reason) = revolution_constraints(spec) {
        return Ok(vec![BoundReport::not_applicable(id, spec, p, reason)]);
    }
    let claim = if part_ii { Claim::Equal } else { Claim::AtLeast };
    let table = connected_table(spec, p, k_max, opts)?;
    Ok((1..=k_max)
        .map(|m| {
            let (sigma, err) = single_sigma(table.block(m).expect("mode solved"));
            BoundReport::judged(id, spec, p, m, None, claim, sigma, (m + p) as f64, err, "per-mode vs unit ball")
        })
        .collect())
}

/// Two-boundary comparisons with the disjoint balls and the cylinder `C_L`,
/// per sphere mode and branch, for every theorem whose preconditions hold.
pub fn check_two_boundary_bounds(
    spec: &WarpSpec,
    p: u32,
    k_max: u32,
    opts: &ShootOptions,
) -> Result<Vec<BoundReport>> {
    let n = spec.n;
    let ids = [
        TheoremId::T1_7i,
        TheoremId::T1_7iia,
        TheoremId::T1_7iib,
        TheoremId::T1_8i,
        TheoremId::T1_8ii,
        TheoremId::COR_1_9,
    ];
    if spec.topology != Topology::TwoBoundary {
        return Ok(ids
            .iter()
            .map(|&id| BoundReport::not_applicable(id, spec, p, "requires two boundary components"))
            .collect());
    }
    if let Err(reason) = revolution_constraints(spec) {
        return Ok(ids.iter().map(|&id| BoundReport::not_applicable(id, spec, p, reason.clone())).collect());
    }
    let length = spec.length;
    let small_p = n >= 3 && 2 * p + 3 <= n;
    let large_p = 2 * p + 1 >= n;
    let a = n as i32 - 2 * p as i32 - 1;
    let table = assemble_spectrum(spec, p, k_max, opts)?;

    let mut out = Vec::new();
    for id in ids {
        let (applies, reason) = match id {
            TheoremId::T1_7i => (n >= 3 && length >= 2.0 && small_p, "requires L >= 2 and p <= (n-3)/2"),
            TheoremId::T1_7iia => (n >= 3 && length <= 2.0 && small_p, "requires L <= 2 and p <= (n-3)/2"),
            TheoremId::T1_7iib => (n >= 3 && length <= 2.0 && large_p, "requires L <= 2 and p >= (n-1)/2"),
            TheoremId::T1_8i => (n >= 3 && small_p, "requires p <= (n-3)/2"),
            TheoremId::T1_8ii => (n >= 3 && large_p, "requires p >= (n-1)/2"),
            _ => (n >= 3 && length < 2.0 && 2 * p + 1 == n, "requires 0 < L < 2 and p = (n-1)/2"),
        };
        if !applies {
            out.push(BoundReport::not_applicable(id, spec, p, reason));
            continue;
        }
        for m in 1..=k_max {
            let block = table.block(m).expect("mode solved");
            let cyl = cylinder_spectrum(n, p, length, m)?;
            for (b, &sigma) in block.sigma.iter().enumerate() {
                let cyl_b = if b == 0 { cyl.0 } else { cyl.1 };
                let (claim, rhs, note) = match id {
                    TheoremId::T1_7i => (Claim::AtLeast, (m + p) as f64, "per-mode vs two unit balls"),
                    TheoremId::T1_7iia => (Claim::AtLeast, (1.0 - length / 2.0).powi(a) * cyl_b, "(1-L/2)^(n-2p-1) C_L"),
                    TheoremId::T1_7iib => (Claim::AtMost, (1.0 - length / 2.0).powi(a) * cyl_b, "(1-L/2)^(n-2p-1) C_L"),
                    TheoremId::T1_8i => (Claim::AtMost, (1.0 + length / 2.0).powi(a) * cyl_b, "(1+L/2)^(n-2p-1) C_L"),
                    TheoremId::T1_8ii => (Claim::AtLeast, (1.0 + length / 2.0).powi(a) * cyl_b, "(1+L/2)^(n-2p-1) C_L"),
                    _ => (Claim::Equal, cyl_b, "isospectral to C_L"),
                };
                out.push(BoundReport::judged(id, spec, p, m, Some(b as u8), claim, sigma, rhs, block.error, note));
            }
        }
    }
    Ok(out)
}

/// Runs every checker that makes sense for the topology of `spec`.
pub fn check_all(spec: &WarpSpec, p: u32, k_max: u32, c: Option<f64>, opts: &ShootOptions) -> Result<Vec<BoundReport>> {
    run_selected(spec, p, k_max, c, opts, &TheoremId::ALL)
}

/// Runs the checkers covering `ids`, keeping only rows for those ids.
pub fn run_selected(
    spec: &WarpSpec,
    p: u32,
    k_max: u32,
    c: Option<f64>,
    opts: &ShootOptions,
    ids: &[TheoremId],
) -> Result<Vec<BoundReport>> {
    use TheoremId::*;
    let wants = |group: &[TheoremId]| group.iter().any(|g| ids.contains(g));
    let mut out = Vec::new();
    if wants(&[T1_2]) {
        out.extend(check_escobar_type(spec, p, k_max, opts)?);
    }
    if wants(&[T1_2u]) {
        out.extend(check_escobar_upper(spec, p, k_max, opts)?);
    }
    if wants(&[T1_4i]) {
        out.extend(check_ratio(spec, p, k_max, opts)?);
    }
    if wants(&[T1_4ii]) {
        out.extend(check_isospectral_conformal(spec, p, k_max, opts)?);
    }
    if wants(&[T1_5i, T1_5ii]) {
        out.extend(check_gaps(spec, p, k_max, c, opts)?);
    }
    if wants(&[T1_6i, T1_6ii]) {
        out.extend(check_ball_comparison(spec, p, k_max, opts)?);
    }
    if wants(&[T1_7i, T1_7iia, T1_7iib, T1_8i, T1_8ii, COR_1_9]) {
        out.extend(check_two_boundary_bounds(spec, p, k_max, opts)?);
    }
    // Grouped checkers may emit sibling ids; keep the requested ones, but
    // always keep a NotApplicable row explaining an empty selection.
    let kept: Vec<BoundReport> = out.iter().filter(|r| ids.contains(&r.theorem)).cloned().collect();
    Ok(if kept.is_empty() { out } else { kept })
}
