//! Per-mode radial problem
//!
//! ```text
//! psi'' + (n - 2p - 1) (h'/h) psi' - lambda psi / h^2 = 0
//! ```
//!
//! For a connected boundary the equation is singular at `r = 0` where
//! `h ~ r`; the regular solution behaves like `r^alpha` with `alpha` the
//! positive indicial root and is started from a two-term Frobenius series.
//! With two boundary components `h > 0` throughout and the problem is
//! regular.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{integrate, State, StepControl};
use crate::sphere_modes::{sphere_eigenvalue, ModeIndex};
use crate::warp::{Topology, WarpSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootOptions {
    /// Start offset from the singular end, as a fraction of `R`. Halved
    /// automatically while `h` departs from its cubic germ there.
    pub r0_rel: f64,
    /// Relative tolerance of the Runge-Kutta pair.
    pub rtol: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self { r0_rel: 1e-4, rtol: 1e-10 }
    }
}

/// A sampled solution of the radial equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialSolution {
    pub mode: ModeIndex,
    pub grid: Vec<f64>,
    pub psi: Vec<f64>,
    pub dpsi: Vec<f64>,
    pub end_value: f64,
    pub end_slope: f64,
    pub frobenius_alpha: Option<f64>,
    /// Estimated relative error of the endpoint data.
    pub rel_error: f64,
}

impl RadialSolution {
    /// `psi'(R) / psi(R)`, the DtN eigenvalue for a connected boundary.
    pub fn dtn_ratio(&self) -> f64 {
        self.end_slope / self.end_value
    }

    /// Cubic Hermite interpolation of `(psi, psi')` at `r`.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        let g = &self.grid;
        let last = g.len() - 2;
        let k = match g.binary_search_by(|v| v.partial_cmp(&r).unwrap_or(std::cmp::Ordering::Less)) {
            Ok(i) => i.min(last),
            Err(0) => 0,
            Err(i) => (i - 1).min(last),
        };
        let h = g[k + 1] - g[k];
        let s = (r - g[k]) / h;
        let (y0, y1, d0, d1) = (self.psi[k], self.psi[k + 1], self.dpsi[k], self.dpsi[k + 1]);
        let s2 = s * s;
        let s3 = s2 * s;
        let value = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * h * d0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * h * d1;
        let deriv = (6.0 * s2 - 6.0 * s) * (y0 - y1) / h
            + (3.0 * s2 - 4.0 * s + 1.0) * d0
            + (3.0 * s2 - 2.0 * s) * d1;
        (value, deriv)
    }

    /// Relative residual of the radial equation at interior samples, with
    /// `psi''` taken from the quintic Hermite fit through neighbouring samples.
    /// At breakpoints of the warp the stencil is one-sided.
    pub fn ode_residuals(&self, spec: &WarpSpec) -> Vec<f64> {
        let a = self.mode.weight_exponent() as f64;
        let lambda = self.mode.lambda;
        let last = self.grid.len() - 1;
        (1..last)
            .map(|i| {
                let r = self.grid[i];
                let on_break = spec.breakpoints().iter().any(|&b| (b - r).abs() <= 1e-12 * spec.length);
                let (lo, at) = if !on_break {
                    (i - 1, 1)
                } else if i >= 2 {
                    (i - 2, 2)
                } else {
                    (i, 0)
                };
                let d2 = hermite_second_derivative(
                    [self.grid[lo], self.grid[lo + 1], self.grid[lo + 2]],
                    [self.psi[lo], self.psi[lo + 1], self.psi[lo + 2]],
                    [self.dpsi[lo], self.dpsi[lo + 1], self.dpsi[lo + 2]],
                    at,
                );
                let h = spec.h(r);
                let drift = a * spec.dh(r) / h * self.dpsi[i];
                let potential = lambda * self.psi[i] / (h * h);
                let scale = d2.abs() + drift.abs() + potential.abs();
                let res = d2 + drift - potential;
                if scale > 0.0 {
                    res.abs() / scale
                } else {
                    res.abs()
                }
            })
            .collect()
    }

    /// Writes `<stem>_psi.txt` and `<stem>_dpsi.txt` as two-column text.
    pub fn write_dump(&self, dir: &Path, stem: &str) -> Result<()> {
        for (suffix, values) in [("psi", &self.psi), ("dpsi", &self.dpsi)] {
            let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join(format!("{stem}_{suffix}.txt")))?);
            writeln!(f, "# r {suffix}  (n={}, p={}, m={})", self.mode.n, self.mode.p, self.mode.m)?;
            for (r, v) in self.grid.iter().zip(values.iter()) {
                writeln!(f, "{r:.12e} {v:.12e}")?;
            }
        }
        Ok(())
    }
}

// Second derivative at node `at` of the quintic matching values and slopes
// at three nodes.
fn hermite_second_derivative(x: [f64; 3], y: [f64; 3], d: [f64; 3], at: usize) -> f64 {
    let scale = (x[2] - x[0]) / 2.0;
    // p(s) = y_at + d_at scale s + c2 s^2 + c3 s^3 + c4 s^4 + c5 s^5
    let base = |s: f64| y[at] + d[at] * scale * s;
    let mut m = [[0.0f64; 5]; 4];
    let others = (0..3).filter(|&j| j != at);
    for (row, j) in others.enumerate() {
        let s = (x[j] - x[at]) / scale;
        m[2 * row] = [s * s, s.powi(3), s.powi(4), s.powi(5), y[j] - base(s)];
        m[2 * row + 1] = [2.0 * s, 3.0 * s * s, 4.0 * s.powi(3), 5.0 * s.powi(4), (d[j] - d[at]) * scale];
    }
    let c = solve4(m);
    2.0 * c[0] / (scale * scale)
}

fn solve4(mut m: [[f64; 5]; 4]) -> [f64; 4] {
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())
            .unwrap();
        m.swap(col, pivot);
        for row in col + 1..4 {
            let f = m[row][col] / m[col][col];
            for k in col..5 {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let mut acc = m[row][4];
        for k in row + 1..4 {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    x
}

/// Positive root of the indicial equation `alpha^2 + (n-2p-2) alpha - lambda = 0`.
pub fn frobenius_exponent(mode: &ModeIndex) -> f64 {
    let b = mode.n as f64 - 2.0 * mode.p as f64 - 2.0;
    (-b + (b * b + 4.0 * mode.lambda).sqrt()) / 2.0
}

/// Coefficient `c1` of `psi = r^alpha (1 + c1 r^2 + ...)` for a warp with
/// `h = r (1 + beta r^2 + ...)`.
pub fn frobenius_correction(mode: &ModeIndex, alpha: f64, beta: f64) -> f64 {
    let a = mode.weight_exponent() as f64;
    -beta * (a * alpha + mode.lambda) / (2.0 * alpha + a + 1.0)
}

/// Largest `r <= r0` (by halving) at which `h` still matches its cubic
/// germ `r + beta r^3`, so the two-term series is a valid start.
pub fn frobenius_start(spec: &WarpSpec, r0: f64) -> f64 {
    let mut r = r0;
    for _ in 0..60 {
        let beta = spec.d2h(r) / (6.0 * r);
        let germ = r + beta * r * r * r;
        if (spec.h(r) - germ).abs() <= 1e-10 * r && (spec.dh(r) - 1.0 - 3.0 * beta * r * r).abs() <= 1e-8 {
            return r;
        }
        r *= 0.5;
    }
    r
}

fn radial_rhs<'a>(spec: &'a WarpSpec, mode: &ModeIndex) -> impl Fn(f64, &State) -> State + 'a {
    let a = mode.weight_exponent() as f64;
    let lambda = mode.lambda;
    move |r, y| {
        let h = spec.h(r);
        [y[1], -a * spec.dh(r) / h * y[1] + lambda * y[0] / (h * h)]
    }
}

/// Minimum number of steps per smooth segment. Keeps the samples dense
/// enough that finite differences of them resolve the solution.
const MIN_SEGMENT_STEPS: f64 = 800.0;

/// Integrates across `[t0, t1]` stopping exactly at every breakpoint of
/// `spec`, appending each accepted state to `samples`. Returns the summed
/// local error estimate.
fn integrate_piecewise(
    spec: &WarpSpec,
    mode: &ModeIndex,
    (t0, t1): (f64, f64),
    y0: State,
    log_scale0: f64,
    control: &StepControl,
    samples: &mut Samples,
) -> Result<f64> {
    let (lo, hi) = (t0.min(t1), t0.max(t1));
    let mut stops: Vec<f64> = spec.breakpoints().iter().copied().filter(|&b| b > lo && b < hi).collect();
    if t1 < t0 {
        stops.reverse();
    }
    stops.push(t1);
    let (mut start, mut y, mut ls) = (t0, y0, log_scale0);
    let mut error = 0.0;
    for (i, &stop) in stops.iter().enumerate() {
        let mut first = true;
        let max_step = (stop - start).abs() / MIN_SEGMENT_STEPS;
        // Later segments start at a smooth point; no need to creep in.
        let first_step = if i == 0 { control.first_step } else { max_step };
        let control = StepControl { max_step, first_step, ..*control };
        let run = integrate(radial_rhs(spec, mode), start, stop, y, ls, &control, |t, y, l| {
            // The first sample of later segments repeats the previous stop.
            if !(first && i > 0) {
                samples.push(t, y, l);
            }
            first = false;
        })?;
        error += run.error_sum;
        start = stop;
        y = run.end;
        ls = run.log_scale;
    }
    Ok(error)
}

struct Samples {
    grid: Vec<f64>,
    raw: Vec<State>,
    log_scale: Vec<f64>,
}

impl Samples {
    fn new() -> Self {
        Self { grid: Vec::new(), raw: Vec::new(), log_scale: Vec::new() }
    }

    fn push(&mut self, t: f64, y: &State, ls: f64) {
        self.grid.push(t);
        self.raw.push(*y);
        self.log_scale.push(ls);
    }

    fn reverse(&mut self) {
        self.grid.reverse();
        self.raw.reverse();
        self.log_scale.reverse();
    }

    /// Rescales so that the sample at `anchor` has `psi = 1`.
    fn normalised(&self, anchor: usize) -> (Vec<f64>, Vec<f64>) {
        let (ya, la) = (self.raw[anchor][0], self.log_scale[anchor]);
        let factor = |i: usize| (self.log_scale[i] - la).exp() / ya;
        let psi = (0..self.grid.len()).map(|i| self.raw[i][0] * factor(i)).collect();
        let dpsi = (0..self.grid.len()).map(|i| self.raw[i][1] * factor(i)).collect();
        (psi, dpsi)
    }
}

fn require_topology(spec: &WarpSpec, topology: Topology) -> Result<()> {
    if spec.topology != topology {
        return Err(Error::Domain(format!("expected a {topology} warp, got {}", spec.topology)));
    }
    Ok(())
}

fn require_dimension(spec: &WarpSpec, mode: &ModeIndex) -> Result<()> {
    if spec.n != mode.n {
        return Err(Error::Domain(format!("warp has n = {} but mode has n = {}", spec.n, mode.n)));
    }
    Ok(())
}

/// Shoots the regular solution from `r0` to `R`, normalised to `psi(R) = 1`.
pub fn shoot_connected(spec: &WarpSpec, mode: &ModeIndex, opts: &ShootOptions) -> Result<RadialSolution> {
    require_topology(spec, Topology::Connected)?;
    require_dimension(spec, mode)?;
    if !(opts.r0_rel > 0.0 && opts.r0_rel < 0.5) {
        return Err(Error::Domain(format!("start offset {} out of range", opts.r0_rel)));
    }
    let radius = spec.length;
    let r0 = frobenius_start(spec, opts.r0_rel * radius);
    let alpha = frobenius_exponent(mode);
    let beta = spec.d2h(r0) / (6.0 * r0);
    let c1 = frobenius_correction(mode, alpha, beta);
    // psi = r0^alpha (1 + c1 r0^2); the power is carried in the log scale.
    let y0 = [1.0 + c1 * r0 * r0, (alpha + (alpha + 2.0) * c1 * r0 * r0) / r0];
    let control = StepControl { rtol: opts.rtol, first_step: 0.05 * r0, ..StepControl::default() };
    let mut samples = Samples::new();
    let error = integrate_piecewise(spec, mode, (r0, radius), y0, alpha * r0.ln(), &control, &mut samples)?;

    for (t, y) in samples.grid.iter().zip(samples.raw.iter()) {
        if !(y[0] > 0.0 && y[1] > 0.0) {
            return Err(Error::SingularityTooStrong { r: *t, m: mode.m });
        }
    }
    let last = samples.grid.len() - 1;
    let (psi, dpsi) = samples.normalised(last);
    let end_value = psi[last];
    let end_slope = dpsi[last];
    if end_value == 0.0 || !end_slope.is_finite() {
        return Err(Error::IntegratorFailure("degenerate endpoint data".into()));
    }
    Ok(RadialSolution {
        mode: *mode,
        grid: samples.grid,
        psi,
        dpsi,
        end_value,
        end_slope,
        frobenius_alpha: Some(alpha),
        rel_error: error,
    })
}

/// The pair `u` (with `u(0) = 1, u(L) = 0`) and `v` (with `v(0) = 0, v(L) = 1`).
///
/// Each is a single initial-value integration started from its zero:
/// `v` forward from `r = 0`, `u` backward from `r = L`.
pub fn solve_two_boundary(
    spec: &WarpSpec,
    mode: &ModeIndex,
    opts: &ShootOptions,
) -> Result<(RadialSolution, RadialSolution)> {
    require_topology(spec, Topology::TwoBoundary)?;
    require_dimension(spec, mode)?;
    if !(mode.lambda > 0.0) {
        return Err(Error::NonUniqueSolution { lambda: mode.lambda });
    }
    let length = spec.length;
    let control = StepControl { rtol: opts.rtol, first_step: 1e-3 * length, ..StepControl::default() };

    let mut fwd = Samples::new();
    let error_v = integrate_piecewise(spec, mode, (0.0, length), [0.0, 1.0], 0.0, &control, &mut fwd)?;
    let mut bwd = Samples::new();
    let error_u = integrate_piecewise(spec, mode, (length, 0.0), [0.0, -1.0], 0.0, &control, &mut bwd)?;
    bwd.reverse();

    let v_end = fwd.raw[fwd.raw.len() - 1][0];
    let u_start = bwd.raw[0][0];
    if !(v_end.abs() > 0.0 && u_start.abs() > 0.0) || !v_end.is_finite() || !u_start.is_finite() {
        return Err(Error::NonUniqueSolution { lambda: mode.lambda });
    }

    let (psi_v, dpsi_v) = fwd.normalised(fwd.grid.len() - 1);
    let (psi_u, dpsi_u) = bwd.normalised(0);
    let last_v = psi_v.len() - 1;
    let last_u = psi_u.len() - 1;
    let v = RadialSolution {
        mode: *mode,
        end_value: psi_v[last_v],
        end_slope: dpsi_v[last_v],
        grid: fwd.grid,
        psi: psi_v,
        dpsi: dpsi_v,
        frobenius_alpha: None,
        rel_error: error_v,
    };
    let mut psi_u = psi_u;
    // The backward run starts exactly at the zero.
    psi_u[last_u] = 0.0;
    let u = RadialSolution {
        mode: *mode,
        end_value: psi_u[last_u],
        end_slope: dpsi_u[last_u],
        grid: bwd.grid,
        psi: psi_u,
        dpsi: dpsi_u,
        frobenius_alpha: None,
        rel_error: error_u,
    };
    Ok((u, v))
}

/// Closed-form DtN pair of mode `m` on the cylinder of length `L`:
/// `sqrt(lambda) tanh(sqrt(lambda) L / 2)` and `sqrt(lambda) coth(sqrt(lambda) L / 2)`.
pub fn cylinder_spectrum(n: u32, p: u32, length: f64, m: u32) -> Result<(f64, f64)> {
    if !(length > 0.0) {
        return Err(Error::Domain(format!("L = {length} must be positive")));
    }
    let root = sphere_eigenvalue(n, p, m)?.sqrt();
    let x = root * length / 2.0;
    let t = x.tanh();
    Ok((root * t, root / t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warp::{make_ball, make_concave, make_cylinder, ConcaveKind};

    #[test]
    fn indicial_roots() {
        // alpha^2 + alpha - 2 = 0 has positive root 1.
        let m = ModeIndex::new(3, 0, 1).unwrap();
        assert!((frobenius_exponent(&m) - 1.0).abs() < 1e-15);
        let m = ModeIndex::new(4, 1, 1).unwrap();
        assert!((frobenius_exponent(&m) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn ball_indicial_root_is_m_plus_p() {
        for n in 2..9u32 {
            for p in 0..=n - 2 {
                for m in 1..12 {
                    let mode = ModeIndex::new(n, p, m).unwrap();
                    let alpha = frobenius_exponent(&mode);
                    assert!((alpha - (m + p) as f64).abs() < 1e-12, "n={n} p={p} m={m}");
                    // Indicial polynomial vanishes.
                    let b = n as f64 - 2.0 * p as f64 - 2.0;
                    assert!((alpha * alpha + b * alpha - mode.lambda).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn frobenius_correction_matches_series() {
        // Substitute psi = r^alpha (1 + c r^2) into the ODE with h = r + beta r^3
        // and check the r^alpha coefficient of the residual vanishes numerically.
        let mode = ModeIndex::new(5, 1, 2).unwrap();
        let alpha = frobenius_exponent(&mode);
        let beta = -1.0 / 6.0;
        let c = frobenius_correction(&mode, alpha, beta);
        let a = mode.weight_exponent() as f64;
        let residual = |r: f64| {
            let h = r + beta * r.powi(3);
            let dh = 1.0 + 3.0 * beta * r * r;
            let psi = r.powf(alpha) * (1.0 + c * r * r);
            let dpsi = alpha * r.powf(alpha - 1.0) + c * (alpha + 2.0) * r.powf(alpha + 1.0);
            let d2psi = alpha * (alpha - 1.0) * r.powf(alpha - 2.0)
                + c * (alpha + 2.0) * (alpha + 1.0) * r.powf(alpha);
            (d2psi + a * dh / h * dpsi - mode.lambda * psi / (h * h)) / r.powf(alpha - 2.0)
        };
        // Residual relative to r^(alpha-2) must be O(r^4).
        let r1 = residual(1e-2);
        let r2 = residual(5e-3);
        assert!(r1.abs() < 1e-5);
        assert!((r1 / r2 - 16.0).abs() < 0.5, "ratio {}", r1 / r2);
    }

    #[test]
    fn ball_ratios() {
        let opts = ShootOptions::default();
        let ball = make_ball(3, 1.0).unwrap();
        let sol = shoot_connected(&ball, &ModeIndex::new(3, 0, 1).unwrap(), &opts).unwrap();
        assert!((sol.dtn_ratio() - 1.0).abs() < 1e-9);
        let ball = make_ball(4, 2.0).unwrap();
        let sol = shoot_connected(&ball, &ModeIndex::new(4, 1, 2).unwrap(), &opts).unwrap();
        assert!((sol.dtn_ratio() - 1.5).abs() < 1e-9);
    }

    #[test]
    fn ball_profile_is_power() {
        let ball = make_ball(4, 1.0).unwrap();
        let mode = ModeIndex::new(4, 1, 3).unwrap();
        let sol = shoot_connected(&ball, &mode, &ShootOptions::default()).unwrap();
        let k = (mode.m + mode.p) as i32;
        let worst = sol
            .grid
            .iter()
            .zip(sol.psi.iter())
            .map(|(r, psi)| (psi - r.powi(k)).abs() / r.powi(k))
            .fold(0.0f64, f64::max);
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn sin_exceeds_escobar_bound() {
        let spec = make_concave(ConcaveKind::Sin, 3, 1.0).unwrap();
        let sol = shoot_connected(&spec, &ModeIndex::new(3, 0, 1).unwrap(), &ShootOptions::default()).unwrap();
        let kappa = 1f64.cos() / 1f64.sin();
        assert!(sol.dtn_ratio() >= kappa);
    }

    #[test]
    fn positivity_and_residuals() {
        let spec = make_concave(ConcaveKind::Sin, 5, 1.2).unwrap();
        for p in 0..=3 {
            let mode = ModeIndex::new(5, p, 3).unwrap();
            let sol = shoot_connected(&spec, &mode, &ShootOptions::default()).unwrap();
            assert!(sol.psi.iter().all(|&v| v > 0.0));
            assert!(sol.dpsi.iter().all(|&v| v > 0.0));
            let worst = sol.ode_residuals(&spec).into_iter().fold(0.0f64, f64::max);
            assert!(worst < 1e-6, "p={p}: {worst}");
        }
    }

    #[test]
    fn cylinder_closed_form_solutions() {
        let spec = make_cylinder(3, 2.0).unwrap();
        let mode = ModeIndex::new(3, 0, 1).unwrap();
        let (u, v) = solve_two_boundary(&spec, &mode, &ShootOptions::default()).unwrap();
        let k = 2f64.sqrt();
        for (r, psi) in u.grid.iter().zip(u.psi.iter()) {
            let exact = (k * (2.0 - r)).sinh() / (2.0 * k).sinh();
            assert!((psi - exact).abs() < 1e-8);
        }
        for (r, psi) in v.grid.iter().zip(v.psi.iter()) {
            let exact = (k * r).sinh() / (2.0 * k).sinh();
            assert!((psi - exact).abs() < 1e-8);
        }
        assert!((-u.dpsi[0] - k / (2.0 * k).tanh()).abs() < 1e-8);
        assert!((u.psi[0] - 1.0).abs() < 1e-15);
        assert!((v.end_value - 1.0).abs() < 1e-15);
        // Superposition has boundary values (1, 1) and is the symmetric cosh profile.
        for r in [0.0, 0.3, 1.0, 1.7, 2.0] {
            let sum = u.eval(r).0 + v.eval(r).0;
            let exact = (k * (r - 1.0)).cosh() / k.cosh();
            assert!((sum - exact).abs() < 1e-8, "r={r}");
        }
    }

    #[test]
    fn cylinder_spectrum_values() {
        let (a, b) = cylinder_spectrum(3, 0, 2.0, 1).unwrap();
        let k = 2f64.sqrt();
        assert!((a - k * k.tanh()).abs() < 1e-15);
        assert!((b - k / k.tanh()).abs() < 1e-14);
        assert!((a - 1.256367).abs() < 1e-6);
        assert!((b - 1.591892).abs() < 1e-6);
        let (a, b) = cylinder_spectrum(3, 0, 200.0, 1).unwrap();
        assert!((a - k).abs() < 1e-12 && (b - k).abs() < 1e-12);
        let (a, _) = cylinder_spectrum(3, 1, 1e-6, 1).unwrap();
        assert!(a < 1e-5);
    }

    #[test]
    fn wrong_topology_rejected() {
        let opts = ShootOptions::default();
        let mode = ModeIndex::new(3, 0, 1).unwrap();
        assert!(shoot_connected(&make_cylinder(3, 1.0).unwrap(), &mode, &opts).is_err());
        assert!(solve_two_boundary(&make_ball(3, 1.0).unwrap(), &mode, &opts).is_err());
    }
}
