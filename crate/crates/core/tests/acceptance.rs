//! Acceptance suite: one `[PASS]`/`[FAIL]` line per criterion, with the
//! measured numbers that decided it. Exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use steklov_core::bounds::{
    check_ball_comparison, check_escobar_type, check_isospectral_conformal, check_ratio,
    check_two_boundary_bounds, BoundReport, TheoremId, Verdict,
};
use steklov_core::radial::{shoot_connected, ShootOptions};
use steklov_core::sphere_modes::ratio_bound;
use steklov_core::spectrum::{assemble_spectrum, dtn_block, fem_convergence};
use steklov_core::warp::{
    make_ball, make_concave, make_cylinder, make_revolution_profile, make_sharpness_family,
    ConcaveKind, ProfileSource, WarpFns,
};
use steklov_core::{ModeIndex, Topology, WarpSpec};

type Outcome = Result<String, String>;

fn opts() -> ShootOptions {
    ShootOptions::default()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Connected warp `c sin(r / c)` on `[0, R]`.
fn sin_cap(n: u32, c: f64, radius: f64) -> WarpSpec {
    let fns = WarpFns::new(&format!("cap{c}"), move |r: f64| c * (r / c).sin(), move |r: f64| (r / c).cos(), move |r: f64| {
        -(r / c).sin() / c
    });
    make_concave(ConcaveKind::Custom(fns), n, radius).unwrap()
}

fn tanh_warp(n: u32, radius: f64) -> WarpSpec {
    let fns = WarpFns::new(
        "tanh",
        f64::tanh,
        |r: f64| 1.0 / r.cosh().powi(2),
        |r: f64| -2.0 * r.tanh() / r.cosh().powi(2),
    );
    make_concave(ConcaveKind::Custom(fns), n, radius).unwrap()
}

/// Hypersurface of revolution with profile `c sin((L - t) / c)`: a
/// spherical cap of radius `c` meeting the unit boundary sphere at `t = 0`.
fn cap_profile(n: u32, c: f64) -> WarpSpec {
    let length = c * (1.0 / c).asin();
    let fns = WarpFns::new(
        &format!("cap{c}"),
        move |t: f64| c * ((length - t) / c).sin(),
        move |t: f64| -((length - t) / c).cos(),
        move |t: f64| -((length - t) / c).sin() / c,
    );
    make_revolution_profile(n, ProfileSource::ClosedForm { length, fns }, Topology::Connected).unwrap()
}

/// The unit ball as the revolution profile `h = 1 - t`.
fn linear_profile(n: u32) -> WarpSpec {
    let fns = WarpFns::new("linear", |t: f64| 1.0 - t, |_| -1.0, |_| 0.0);
    make_revolution_profile(n, ProfileSource::ClosedForm { length: 1.0, fns }, Topology::Connected).unwrap()
}

/// Near-cylinder two-boundary profile `1 + s t (L - t) / 4`.
fn bulge(n: u32, length: f64, s: f64) -> WarpSpec {
    let fns = WarpFns::new(
        &format!("bulge{s}"),
        move |t: f64| 1.0 + s * t * (length - t) / 4.0,
        move |t: f64| s * (length - 2.0 * t) / 4.0,
        move |_| -s / 2.0,
    );
    make_revolution_profile(n, ProfileSource::ClosedForm { length, fns }, Topology::TwoBoundary).unwrap()
}

fn describe(r: &BoundReport) -> String {
    format!(
        "{} {} p={} k={}{}: lhs={:.9} rhs={:.9} {:?}",
        r.theorem,
        r.spec,
        r.p,
        r.k,
        r.branch.map(|b| format!(" b={b}")).unwrap_or_default(),
        r.lhs.unwrap_or(f64::NAN),
        r.rhs.unwrap_or(f64::NAN),
        r.verdict
    )
}

fn ball_exactness() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for n in 3..=6 {
        for p in 0..=n - 2 {
            for radius in [0.5, 1.0, 2.0] {
                let table = assemble_spectrum(&make_ball(n, radius).unwrap(), p, 8, &opts()).map_err(|e| e.to_string())?;
                for m in 1..=8 {
                    let sigma = table.block(m).unwrap().sigma[0];
                    worst = worst.max(rel(sigma, (m + p) as f64 / radius));
                    cases += 1;
                }
            }
        }
    }
    let line = format!("{cases} cases, max relative error {worst:.2e} (limit 1e-6)");
    if worst <= 1e-6 { Ok(line) } else { Err(line) }
}

fn cylinder_exactness() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for n in 3..=5 {
        for p in 0..=n - 2 {
            for length in [0.5, 1.0, 2.0, 4.0] {
                let spec = make_cylinder(n, length).unwrap();
                for m in 1..=6 {
                    let mode = ModeIndex::new(n, p, m).unwrap();
                    let block = dtn_block(&spec, &mode, &opts()).map_err(|e| e.to_string())?;
                    let s = mode.lambda.sqrt();
                    let x = s * length / 2.0;
                    worst = worst.max(rel(block.sigma[0], s * x.tanh())).max(rel(block.sigma[1], s / x.tanh()));
                    cases += 2;
                }
            }
        }
    }
    let line = format!("{cases} branch values, max relative error {worst:.2e} (limit 1e-8)");
    if worst <= 1e-8 { Ok(line) } else { Err(line) }
}

fn oracle_equivalence() -> Outcome {
    let mut failures = Vec::new();
    let mut worst_ratio: f64 = 0.0;
    let mut orders = Vec::new();
    let mut cases = 0;
    for n in 3..=5 {
        for p in 0..=n - 2 {
            let specs = [
                make_ball(n, 1.0).unwrap(),
                make_cylinder(n, 1.0).unwrap(),
                make_concave(ConcaveKind::Sin, n, 1.0).unwrap(),
            ];
            for spec in &specs {
                for m in 1..=6 {
                    let mode = ModeIndex::new(n, p, m).unwrap();
                    let block = dtn_block(spec, &mode, &opts()).map_err(|e| e.to_string())?;
                    let conv = fem_convergence(spec, &mode, 128).map_err(|e| e.to_string())?;
                    for b in 0..block.sigma.len() {
                        cases += 1;
                        let combined = conv.error[b] + block.error;
                        let diff = (block.sigma[b] - conv.extrapolated[b]).abs();
                        worst_ratio = worst_ratio.max(diff / combined);
                        if !conv.exact[b] {
                            orders.push(conv.observed_order[b]);
                        }
                        if diff > combined {
                            failures.push(format!("{} n={n} p={p} m={m} b={b}: diff {diff:.2e} > {combined:.2e}", spec.family_tag));
                        }
                    }
                    if !conv.second_order(0.25) {
                        failures.push(format!("{} n={n} p={p} m={m}: orders {:?}", spec.family_tag, conv.observed_order));
                    }
                }
            }
        }
    }
    let lo = orders.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = orders.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let line = format!(
        "{cases} branches, max |shoot - extrapolated| / combined estimate = {worst_ratio:.3}, observed orders in [{lo:.3}, {hi:.3}]"
    );
    if failures.is_empty() { Ok(line) } else { Err(format!("{line}; {}", failures.join("; "))) }
}

fn escobar() -> Outcome {
    let mut failures = Vec::new();
    let (mut strict, mut equal) = (0, 0);
    let mut min_margin = f64::INFINITY;
    for n in 3..=5 {
        for p in 0..=(n - 1) / 2 {
            for radius in [0.5, 1.0] {
                let sin = make_concave(ConcaveKind::Sin, n, radius).unwrap();
                for r in check_escobar_type(&sin, p, 6, &opts()).map_err(|e| e.to_string())? {
                    let margin = r.margin.unwrap_or(f64::NAN);
                    min_margin = min_margin.min(margin);
                    if r.verdict == Verdict::Holds && margin > 0.0 {
                        strict += 1;
                    } else {
                        failures.push(describe(&r));
                    }
                }
                let ball = make_ball(n, radius).unwrap();
                for r in check_escobar_type(&ball, p, 6, &opts()).map_err(|e| e.to_string())? {
                    if r.verdict == Verdict::HoldsWithEquality {
                        equal += 1;
                    } else {
                        failures.push(describe(&r));
                    }
                }
            }
        }
    }
    let line = format!("sin: {strict} strict Holds (min margin {min_margin:.4}); ball: {equal} HoldsWithEquality");
    if failures.is_empty() { Ok(line) } else { Err(format!("{line}; {}", failures.join("; "))) }
}

fn ratio_and_sharpness() -> Outcome {
    let mut failures = Vec::new();
    let mut rows = 0;
    let mut presets: Vec<(u32, WarpSpec)> = Vec::new();
    for n in 3..=6 {
        presets.push((n, make_ball(n, 1.0).unwrap()));
        presets.push((n, make_concave(ConcaveKind::Sin, n, 1.0).unwrap()));
        presets.push((n, sin_cap(n, 2.0, 1.0)));
        presets.push((n, tanh_warp(n, 1.0)));
    }
    for eps in [0.1, 0.05, 0.02, 0.01] {
        presets.push((4, make_sharpness_family(4, 0, 1.0, eps).unwrap()));
    }
    for (n, spec) in &presets {
        for p in 0..=n - 2 {
            if spec.family_tag.starts_with("sharpness") && p > 0 {
                continue;
            }
            for r in check_ratio(spec, p, 5, &opts()).map_err(|e| e.to_string())? {
                rows += 1;
                if r.verdict != Verdict::Holds {
                    failures.push(describe(&r));
                }
            }
        }
    }

    let target = ratio_bound(4, 0, 1).unwrap();
    let mut trend = Vec::new();
    for eps in [0.1, 0.05, 0.02, 0.01] {
        let spec = make_sharpness_family(4, 0, 1.0, eps).unwrap();
        let t = assemble_spectrum(&spec, 0, 2, &opts()).map_err(|e| e.to_string())?;
        trend.push(t.block(2).unwrap().sigma[0] / t.block(1).unwrap().sigma[0]);
    }
    let monotone = trend.windows(2).all(|w| w[1] > w[0]);
    let gap = (target - trend[3]) / target;
    let trend_text: Vec<String> = trend.iter().map(|v| format!("{v:.4}")).collect();
    let line = format!(
        "{rows} ratio rows strict Holds: {}; h_eps k=1 ratios at eps 0.1,0.05,0.02,0.01 = [{}] toward {target:.4}, monotone: {monotone}, gap at eps=0.01: {:.1}% (limit 5%)",
        failures.is_empty(),
        trend_text.join(", "),
        100.0 * gap
    );
    if failures.is_empty() && monotone && gap <= 0.05 {
        Ok(line)
    } else if failures.is_empty() {
        Err(line)
    } else {
        Err(format!("{line}; {}", failures.join("; ")))
    }
}

fn conformal_isospectrality() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut rows = 0;
    for n in [4, 6] {
        let p = (n - 2) / 2;
        let specs = [
            make_concave(ConcaveKind::Sin, n, 1.0).unwrap(),
            sin_cap(n, 2.0, 1.0),
            tanh_warp(n, 1.0),
        ];
        for spec in &specs {
            for r in check_isospectral_conformal(spec, p, 6, &opts()).map_err(|e| e.to_string())? {
                rows += 1;
                worst = worst.max((r.lhs.unwrap() - r.rhs.unwrap()).abs());
            }
        }
    }
    let line = format!("{rows} rows, max |sigma_k - (k+p)/h0| = {worst:.2e} (limit 1e-5)");
    if worst <= 1e-5 { Ok(line) } else { Err(line) }
}

fn two_boundary_sandwich() -> Outcome {
    let mut failures = Vec::new();
    let mut checked = 0;
    let mut cor_worst: f64 = 0.0;
    let mut by_group: std::collections::BTreeMap<String, usize> = Default::default();
    for length in [0.5, 1.0] {
        for s in [-0.2, 0.2] {
            let spec = bulge(5, length, s);
            for p in 0..=3 {
                let wanted: &[TheoremId] = if p <= 1 {
                    &[TheoremId::T1_7iia, TheoremId::T1_8i]
                } else {
                    &[TheoremId::T1_7iib, TheoremId::T1_8ii]
                };
                let rows = check_two_boundary_bounds(&spec, p, 4, &opts()).map_err(|e| e.to_string())?;
                for id in wanted {
                    let of_id: Vec<&BoundReport> = rows.iter().filter(|r| r.theorem == *id).collect();
                    if of_id.is_empty() || of_id.iter().any(|r| r.verdict == Verdict::NotApplicable) {
                        failures.push(format!("{id} {} p={p}: not evaluated", spec.family_tag));
                    }
                    for r in of_id {
                        checked += 1;
                        if !matches!(r.verdict, Verdict::Holds | Verdict::HoldsWithEquality) {
                            *by_group.entry(format!("{id} p={p} s={s}")).or_default() += 1;
                            failures.push(describe(r));
                        }
                    }
                }
                if p == 2 {
                    for r in rows.iter().filter(|r| r.theorem == TheoremId::COR_1_9) {
                        checked += 1;
                        let diff = (r.lhs.unwrap() - r.rhs.unwrap()).abs();
                        cor_worst = cor_worst.max(diff);
                        if diff > 1e-5 {
                            *by_group.entry(format!("COR_1_9 p=2 s={s}")).or_default() += 1;
                            failures.push(format!("{} (|diff| = {diff:.2e})", describe(r)));
                        }
                    }
                }
            }
        }
    }
    let line = format!(
        "{checked} rows on bulge profiles s = +-0.2, L in {{0.5, 1}}; max corollary |sigma(M) - sigma(C_L)| = {cor_worst:.2e} (limit 1e-5); {} failing rows {:?}",
        failures.len(),
        by_group
    );
    if failures.is_empty() {
        Ok(line)
    } else {
        let shown: Vec<&String> = failures.iter().take(2).collect();
        Err(format!("{line}; e.g. {}", shown.iter().map(|s| s.as_str()).collect::<Vec<_>>().join("; ")))
    }
}

fn ball_comparison() -> Outcome {
    let mut failures = Vec::new();
    let mut min_margin = f64::INFINITY;
    let caps: Vec<WarpSpec> = [1.0, 1.5, 3.0].iter().map(|&c| cap_profile(5, c)).collect();
    for spec in &caps {
        for p in 0..=1 {
            for r in check_ball_comparison(spec, p, 8, &opts()).map_err(|e| e.to_string())? {
                min_margin = min_margin.min(r.margin.unwrap_or(f64::NAN));
                if r.verdict != Verdict::Holds {
                    failures.push(describe(&r));
                }
            }
        }
    }
    for p in 0..=1 {
        for r in check_ball_comparison(&linear_profile(5), p, 8, &opts()).map_err(|e| e.to_string())? {
            if r.verdict != Verdict::HoldsWithEquality {
                failures.push(describe(&r));
            }
        }
    }
    let mut iso_worst: f64 = 0.0;
    let four: Vec<WarpSpec> = [1.0, 1.5, 3.0].iter().map(|&c| cap_profile(4, c)).chain([linear_profile(4)]).collect();
    for spec in &four {
        for r in check_ball_comparison(spec, 1, 8, &opts()).map_err(|e| e.to_string())? {
            iso_worst = iso_worst.max((r.lhs.unwrap_or(f64::NAN) - r.rhs.unwrap_or(f64::NAN)).abs());
            if r.theorem != TheoremId::T1_6ii || r.verdict != Verdict::HoldsWithEquality {
                failures.push(describe(&r));
            }
        }
    }
    let line = format!(
        "caps (n=5): min margin over sigma_m - (m+p) = {min_margin:.4}; h = 1 - t equality; (n=4, p=1) max |sigma_m - (m+1)| = {iso_worst:.2e}"
    );
    if failures.is_empty() { Ok(line) } else { Err(format!("{line}; {}", failures.join("; "))) }
}

fn property_suites() -> Outcome {
    let mut failures = Vec::new();
    let mut connected: Vec<WarpSpec> = Vec::new();
    for n in 3..=6 {
        for radius in [0.5, 1.0, 2.0] {
            connected.push(make_ball(n, radius).unwrap());
        }
        for radius in [0.5, 1.0] {
            connected.push(make_concave(ConcaveKind::Sin, n, radius).unwrap());
        }
        connected.push(sin_cap(n, 2.0, 1.0));
        connected.push(tanh_warp(n, 1.0));
    }
    for c in [1.0, 1.5, 3.0] {
        connected.push(cap_profile(4, c));
        connected.push(cap_profile(5, c));
    }
    for eps in [0.1, 0.05, 0.02, 0.01] {
        connected.push(make_sharpness_family(4, 0, 1.0, eps).unwrap());
    }

    let mut samples = 0usize;
    let mut worst_offset: f64 = 0.0;
    for spec in &connected {
        for p in 0..=spec.n - 2 {
            for m in 1..=8 {
                let mode = ModeIndex::new(spec.n, p, m).unwrap();
                let sol = shoot_connected(spec, &mode, &opts()).map_err(|e| e.to_string())?;
                for i in 1..sol.grid.len() {
                    samples += 1;
                    if !(sol.psi[i] > 0.0 && sol.dpsi[i] > 0.0) {
                        failures.push(format!("{} p={p} m={m}: sign at r = {}", spec.family_tag, sol.grid[i]));
                        break;
                    }
                }
                let half = ShootOptions { r0_rel: opts().r0_rel / 2.0, ..opts() };
                let shifted = shoot_connected(spec, &mode, &half).map_err(|e| e.to_string())?;
                let d = rel(shifted.dtn_ratio(), sol.dtn_ratio());
                worst_offset = worst_offset.max(d);
                if d > 1e-7 {
                    failures.push(format!("{} p={p} m={m}: offset shift {d:.2e}", spec.family_tag));
                }
            }
        }
    }

    let mut worst_scaling: f64 = 0.0;
    let scaled_presets = [
        make_ball(4, 1.0).unwrap(),
        make_concave(ConcaveKind::Sin, 4, 1.0).unwrap(),
        make_cylinder(4, 1.0).unwrap(),
        cap_profile(4, 1.5),
    ];
    for spec in &scaled_presets {
        for c in [0.5, 2.0] {
            for p in 0..=2 {
                let base = assemble_spectrum(spec, p, 6, &opts()).map_err(|e| e.to_string())?;
                let scaled = assemble_spectrum(&spec.scaled(c).unwrap(), p, 6, &opts()).map_err(|e| e.to_string())?;
                for (a, b) in base.entries.iter().zip(&scaled.entries) {
                    let d = (b.sigma * c - a.sigma).abs();
                    worst_scaling = worst_scaling.max(d / a.sigma);
                    if d > 10.0 * (a.error + c * b.error) {
                        failures.push(format!("{} c={c} p={p} k={}: {d:.2e}", spec.family_tag, a.k));
                    }
                }
            }
        }
    }
    let line = format!(
        "{samples} interior samples positive and increasing over {} warps; scaling max rel dev {worst_scaling:.2e}; offset halving max rel shift {worst_offset:.2e} (limit 1e-7)",
        connected.len()
    );
    if failures.is_empty() { Ok(line) } else { Err(format!("{line}; {}", failures.join("; "))) }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 ball exactness", ball_exactness),
        ("2 cylinder exactness", cylinder_exactness),
        ("3 oracle equivalence", oracle_equivalence),
        ("4 Escobar-type inequality", escobar),
        ("5 ratio strictness and sharpness trend", ratio_and_sharpness),
        ("6 conformal isospectrality", conformal_isospectrality),
        ("7 two-boundary sandwich", two_boundary_sandwich),
        ("8 ball comparison", ball_comparison),
        ("9 property suites", property_suites),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (name, run) in criteria {
        let t = Instant::now();
        let (tag, detail) = match run() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("[{tag}] criterion {name}: {detail} ({:.1}s)", t.elapsed().as_secs_f64());
    }
    println!("{} of 9 criteria passed in {:.1}s", 9 - failed, start.elapsed().as_secs_f64());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
