//! Warping functions `h` on `[0, length]` and the warped products they define.
//!
//! Connected topology (a topological ball) is stored with the degenerate end
//! at `r = 0` and the boundary sphere at `r = R`, so `h(0) = 0`, `h'(0) = 1`.
//! Profiles given with the boundary at `r = 0` (hypersurfaces of revolution)
//! are mirrored into this orientation on construction.
//!
//! Two-boundary topology keeps `h > 0` on the closed interval, with boundary
//! spheres at `r = 0` and `r = L`.

mod checks;
mod pchip;

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use checks::{
    check_assumption_a, check_ricci_convex, check_ricci_nonpositive, derivative_consistency,
    PredicateReport,
};
pub use pchip::Pchip;

/// Default tolerance for geometric predicates.
pub const PREDICATE_TOL: f64 = 1e-8;

/// Number of samples used when a property is verified on a grid.
pub const CHECK_GRID: usize = 1001;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Topology {
    Connected,
    TwoBoundary,
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Topology::Connected => f.write_str("connected"),
            Topology::TwoBoundary => f.write_str("two-boundary"),
        }
    }
}

/// A warped product `[0, length] x S^{n-1}` with metric `dr^2 + h(r)^2 g`.
///
/// Immutable after construction; clones share the underlying closures.
#[derive(Clone)]
pub struct WarpSpec {
    pub n: u32,
    pub topology: Topology,
    pub length: f64,
    h: RealFn,
    dh: RealFn,
    d2h: RealFn,
    /// Interior points where `h` is less smooth (joins of piecewise warps).
    breakpoints: Vec<f64>,
    pub family_tag: String,
}

impl fmt::Debug for WarpSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WarpSpec")
            .field("n", &self.n)
            .field("topology", &self.topology)
            .field("length", &self.length)
            .field("family_tag", &self.family_tag)
            .finish()
    }
}

/// Principal curvatures of the (totally umbilical) boundary components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryGeometry {
    pub principal_curvatures: Vec<f64>,
    pub kappa: f64,
}

impl WarpSpec {
    /// Builds a spec from closures, validating the topology invariants.
    pub fn from_fns(
        n: u32,
        topology: Topology,
        length: f64,
        h: RealFn,
        dh: RealFn,
        d2h: RealFn,
        family_tag: impl Into<String>,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("dimension n = {n} must be at least 2")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::Domain(format!("interval length {length} must be positive")));
        }
        let spec = Self { n, topology, length, h, dh, d2h, breakpoints: Vec::new(), family_tag: family_tag.into() };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        let tol = PREDICATE_TOL;
        match self.topology {
            Topology::Connected => {
                if self.h(0.0).abs() > tol {
                    return Err(Error::Domain(format!("h(0) = {} but must vanish", self.h(0.0))));
                }
                if (self.dh(0.0) - 1.0).abs() > tol {
                    return Err(Error::Domain(format!("h'(0) = {} but must be 1", self.dh(0.0))));
                }
                for r in self.grid(CHECK_GRID).into_iter().skip(1) {
                    if !(self.h(r) > 0.0) {
                        return Err(Error::Domain(format!("h({r}) = {} is not positive", self.h(r))));
                    }
                }
            }
            Topology::TwoBoundary => {
                for r in self.grid(CHECK_GRID) {
                    if !(self.h(r) > 0.0) {
                        return Err(Error::Domain(format!("h({r}) = {} is not positive", self.h(r))));
                    }
                }
            }
        }
        Ok(())
    }

    /// Declares interior joins of a piecewise warp. Solvers stop exactly at
    /// them and finite-difference checks do not straddle them.
    pub fn with_breakpoints(mut self, mut points: Vec<f64>) -> Self {
        points.retain(|&r| r > 0.0 && r < self.length);
        points.sort_by(f64::total_cmp);
        points.dedup();
        self.breakpoints = points;
        self
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    #[inline]
    pub fn h(&self, r: f64) -> f64 {
        (self.h)(r)
    }

    #[inline]
    pub fn dh(&self, r: f64) -> f64 {
        (self.dh)(r)
    }

    #[inline]
    pub fn d2h(&self, r: f64) -> f64 {
        (self.d2h)(r)
    }

    /// `count` equally spaced points covering `[0, length]`.
    pub fn grid(&self, count: usize) -> Vec<f64> {
        let count = count.max(2);
        (0..count)
            .map(|i| self.length * i as f64 / (count - 1) as f64)
            .collect()
    }

    /// Value of `h` on the boundary sphere (`r = R`) for connected specs.
    pub fn boundary_value(&self) -> f64 {
        self.h(self.length)
    }

    pub fn boundary_geometry(&self) -> BoundaryGeometry {
        let r = self.length;
        let principal_curvatures = match self.topology {
            Topology::Connected => vec![self.dh(r) / self.h(r)],
            Topology::TwoBoundary => vec![-self.dh(0.0) / self.h(0.0), self.dh(r) / self.h(r)],
        };
        let kappa = principal_curvatures.iter().copied().fold(f64::INFINITY, f64::min);
        BoundaryGeometry { principal_curvatures, kappa }
    }

    pub fn max_h(&self) -> f64 {
        self.grid(CHECK_GRID).into_iter().map(|r| self.h(r)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Metric rescaling `g -> c^2 g`: the new warp is `c h(r / c)` on `[0, c length]`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Domain(format!("scale factor {c} must be positive")));
        }
        let (h, dh, d2h) = (self.h.clone(), self.dh.clone(), self.d2h.clone());
        Ok(Self {
            n: self.n,
            topology: self.topology,
            length: c * self.length,
            h: Arc::new(move |r| c * h(r / c)),
            dh: Arc::new(move |r| dh(r / c)),
            d2h: Arc::new(move |r| d2h(r / c) / c),
            breakpoints: self.breakpoints.iter().map(|b| c * b).collect(),
            family_tag: format!("{}*{}", self.family_tag, c),
        })
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {v} must be positive")))
    }
}

/// Euclidean ball of radius `R`: `h(r) = r`.
pub fn make_ball(n: u32, radius: f64) -> Result<WarpSpec> {
    positive("R", radius)?;
    WarpSpec::from_fns(
        n,
        Topology::Connected,
        radius,
        Arc::new(|r| r),
        Arc::new(|_| 1.0),
        Arc::new(|_| 0.0),
        format!("ball(R={radius})"),
    )
}

/// Standard cylinder `S^{n-1} x [0, L]`: `h = 1`.
pub fn make_cylinder(n: u32, length: f64) -> Result<WarpSpec> {
    positive("L", length)?;
    WarpSpec::from_fns(
        n,
        Topology::TwoBoundary,
        length,
        Arc::new(|_| 1.0),
        Arc::new(|_| 0.0),
        Arc::new(|_| 0.0),
        format!("cylinder(L={length})"),
    )
}

/// Closed-form warp supplied by the caller.
#[derive(Clone)]
pub struct WarpFns {
    pub h: RealFn,
    pub dh: RealFn,
    pub d2h: RealFn,
    pub tag: String,
}

impl WarpFns {
    pub fn new<H, D, D2>(tag: &str, h: H, dh: D, d2h: D2) -> Self
    where
        H: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
        D2: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self { h: Arc::new(h), dh: Arc::new(dh), d2h: Arc::new(d2h), tag: tag.to_string() }
    }
}

pub enum ConcaveKind {
    /// `h(r) = sin(r)`, requires `R < pi/2`.
    Sin,
    /// Caller-provided warp; rejected unless it is concave with `0 < h' <= 1`.
    Custom(WarpFns),
}

/// Connected warps with `h'' <= 0` and `0 < h' <= 1` (nonnegative Ricci
/// curvature and a strictly convex boundary).
pub fn make_concave(kind: ConcaveKind, n: u32, radius: f64) -> Result<WarpSpec> {
    positive("R", radius)?;
    match kind {
        ConcaveKind::Sin => {
            if radius >= FRAC_PI_2 {
                return Err(Error::Domain(format!(
                    "sin warp needs R < pi/2 so that h' stays positive, got R = {radius}"
                )));
            }
            WarpSpec::from_fns(
                n,
                Topology::Connected,
                radius,
                Arc::new(f64::sin),
                Arc::new(f64::cos),
                Arc::new(|r: f64| -r.sin()),
                format!("sin(R={radius})"),
            )
        }
        ConcaveKind::Custom(fns) => {
            let spec = WarpSpec::from_fns(
                n,
                Topology::Connected,
                radius,
                fns.h,
                fns.dh,
                fns.d2h,
                format!("{}(R={radius})", fns.tag),
            )?;
            let report = check_ricci_convex(&spec);
            if !report.passed {
                return Err(Error::Domain(format!(
                    "custom warp is not concave with 0 < h' <= 1: {report}"
                )));
            }
            Ok(spec)
        }
    }
}

/// Height of the plateau of the sharpness family.
pub fn sharpness_plateau(n: u32, p: u32, eps: f64) -> f64 {
    let gap = n as i64 - 2 * p as i64 - 3;
    if gap == 0 {
        eps.powf(-0.5)
    } else {
        eps.powf(-1.0 / (2.0 * gap as f64))
    }
}

// Quintic smoothstep and derivatives: C^2 joins at both ends.
fn smoothstep(x: f64) -> (f64, f64, f64) {
    let x2 = x * x;
    let s = x2 * x * (10.0 - 15.0 * x + 6.0 * x2);
    let ds = 30.0 * x2 * (1.0 - 2.0 * x + x2);
    let d2s = 60.0 * x - 180.0 * x2 + 120.0 * x2 * x;
    (s, ds, d2s)
}

/// Warps that are large on most of the interval, making the consecutive
/// eigenvalue ratios approach the sphere ratio as `eps -> 0`.
///
/// From the boundary inward: `h = 1` on a band of width `eps`, a rising
/// transition, a plateau, a falling transition, and `h(r) = r` on `[0, eps]`
/// at the degenerate end.
pub fn make_sharpness_family(n: u32, p: u32, radius: f64, eps: f64) -> Result<WarpSpec> {
    positive("R", radius)?;
    if n < 3 {
        return Err(Error::Domain(format!("sharpness family needs n >= 3, got {n}")));
    }
    if 2 * p + 3 > n {
        return Err(Error::Domain(format!(
            "sharpness family needs p <= (n-3)/2, got n = {n}, p = {p}"
        )));
    }
    if !(eps > 0.0 && eps < 1.0_f64.min(radius / 8.0)) {
        return Err(Error::Domain(format!("eps = {eps} must lie in (0, min(1, R/8))")));
    }
    let plateau = sharpness_plateau(n, p, eps);
    if plateau <= 2.0 * eps {
        return Err(Error::Domain(format!("plateau {plateau} does not exceed 2 eps")));
    }
    let r = radius;
    let eval = move |t: f64| -> (f64, f64, f64) {
        if t <= eps {
            (t, 1.0, 0.0)
        } else if t < 2.0 * eps {
            let (s, ds, d2s) = smoothstep((t - eps) / eps);
            let gap = plateau - t;
            let h = (1.0 - s) * t + s * plateau;
            let dh = (1.0 - s) + ds * gap / eps;
            let d2h = -2.0 * ds / eps + d2s * gap / (eps * eps);
            (h, dh, d2h)
        } else if t <= r - 2.0 * eps {
            (plateau, 0.0, 0.0)
        } else if t < r - eps {
            let (s, ds, d2s) = smoothstep((t - (r - 2.0 * eps)) / eps);
            let drop = 1.0 - plateau;
            (plateau + drop * s, drop * ds / eps, drop * d2s / (eps * eps))
        } else {
            (1.0, 0.0, 0.0)
        }
    };
    let eval = Arc::new(eval);
    let (e1, e2, e3) = (eval.clone(), eval.clone(), eval);
    WarpSpec::from_fns(
        n,
        Topology::Connected,
        radius,
        Arc::new(move |t| e1(t).0),
        Arc::new(move |t| e2(t).1),
        Arc::new(move |t| e3(t).2),
        format!("sharpness(R={radius},eps={eps},p={p})"),
    )
    .map(|spec| spec.with_breakpoints(vec![eps, 2.0 * eps, r - 2.0 * eps, r - eps]))
}

/// A profile curve of a hypersurface of revolution, parametrised by
/// arclength with the (first) boundary sphere at `r = 0`.
pub enum ProfileSource {
    Samples(Vec<(f64, f64)>),
    ClosedForm { length: f64, fns: WarpFns },
}

/// Builds a warp from a hypersurface-of-revolution profile.
///
/// Requires `h(0) = 1` and `|h'| <= 1`; connected profiles must also close
/// up with `h(L) = 0`, and are mirrored so that the tip sits at `r = 0`.
pub fn make_revolution_profile(n: u32, source: ProfileSource, topology: Topology) -> Result<WarpSpec> {
    let tol = PREDICATE_TOL;
    let (length, fns, knots) = match source {
        ProfileSource::Samples(samples) => {
            let (x, y): (Vec<f64>, Vec<f64>) = samples.into_iter().unzip();
            if x.first().is_none_or(|&x0| x0.abs() > tol) {
                return Err(Error::ProfileInvalid("profile must start at r = 0".into()));
            }
            let interp = Arc::new(Pchip::new(x, y)?);
            let length = interp.end();
            let knots = interp.knots().to_vec();
            let (a, b, c) = (interp.clone(), interp.clone(), interp);
            let fns = WarpFns {
                h: Arc::new(move |t| a.eval(t).0),
                dh: Arc::new(move |t| b.eval(t).1),
                d2h: Arc::new(move |t| c.eval(t).2),
                tag: "profile".into(),
            };
            (length, fns, knots)
        }
        ProfileSource::ClosedForm { length, fns } => (length, fns, Vec::new()),
    };
    positive("L", length)?;

    let h0 = (fns.h)(0.0);
    if (h0 - 1.0).abs() > tol {
        return Err(Error::ProfileInvalid(format!("h(0) = {h0}, expected 1")));
    }
    let steps = 4000;
    for i in 0..=steps {
        let r = length * i as f64 / steps as f64;
        let slope = (fns.dh)(r);
        if !(slope.abs() <= 1.0 + tol) {
            return Err(Error::ProfileInvalid(format!(
                "|h'({r:.6})| = {:.6} exceeds 1; the profile is not arclength-parametrised",
                slope.abs()
            )));
        }
    }
    match topology {
        Topology::Connected => {
            let tip = (fns.h)(length);
            if tip.abs() > tol {
                return Err(Error::ProfileInvalid(format!("h(L) = {tip}, expected 0")));
            }
            let (h, dh, d2h) = (fns.h.clone(), fns.dh.clone(), fns.d2h.clone());
            WarpSpec::from_fns(
                n,
                Topology::Connected,
                length,
                Arc::new(move |t| h(length - t).max(0.0)),
                Arc::new(move |t| -dh(length - t)),
                Arc::new(move |t| d2h(length - t)),
                format!("revolution-{}(L={length})", fns.tag),
            )
            .map(|spec| spec.with_breakpoints(knots.iter().map(|k| length - k).collect()))
            .map_err(|e| Error::ProfileInvalid(e.to_string()))
        }
        Topology::TwoBoundary => WarpSpec::from_fns(
            n,
            Topology::TwoBoundary,
            length,
            fns.h,
            fns.dh,
            fns.d2h,
            format!("revolution-{}(L={length})", fns.tag),
        )
        .map(|spec| spec.with_breakpoints(knots))
        .map_err(|e| Error::ProfileInvalid(e.to_string())),
    }
}

/// Parses the two-column `r h` profile format (`#` starts a comment).
pub fn parse_profile(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut samples = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 2 {
            return Err(Error::Parse(format!("line {}: expected two columns \"r h\"", lineno + 1)));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::Parse(format!("line {}: cannot parse {s:?}", lineno + 1)))
        };
        let r = parse(cols[0])?;
        let h = parse(cols[1])?;
        if let Some(&(prev, _)) = samples.last() {
            if !(r > prev) {
                return Err(Error::Parse(format!("line {}: r must be strictly increasing", lineno + 1)));
            }
        }
        samples.push((r, h));
    }
    if samples.len() < 2 {
        return Err(Error::Parse("profile needs at least two samples".into()));
    }
    Ok(samples)
}

pub fn load_profile(path: &Path, n: u32, topology: Topology) -> Result<WarpSpec> {
    let text = std::fs::read_to_string(path)?;
    let samples = parse_profile(&text)?;
    make_revolution_profile(n, ProfileSource::Samples(samples), topology)
}
