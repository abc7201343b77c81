//! The four subcommands. Each returns the text artifacts it produced; the
//! caller prints and writes them from one thread.

use std::fs;
use std::path::Path;

use anyhow::Context;
use serde_json::json;
use steklov_core::bounds::{count, run_selected, BoundReport, Verdict};
use steklov_core::output::{
    comment_header, fmt_g9, reports_csv, reports_json, spectrum_csv, spectrum_json,
};
use steklov_core::radial::{shoot_connected, solve_two_boundary};
use steklov_core::sphere_modes::{ratio_bound, sphere_eigenvalue};
use steklov_core::spectrum::{assemble_spectrum, fem_oracle};
use steklov_core::{ModeIndex, Topology};

use crate::config::{Format, RunConfig};

/// Files to write (relative to the output directory) and text for stdout.
#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub files: Vec<(String, String)>,
    pub violated: bool,
}

impl Outcome {
    fn add(&mut self, format: Format, csv: Option<(&str, String)>, json: Option<(&str, String)>) {
        if let (Some((name, text)), Format::Csv | Format::Both) = (csv, format) {
            self.files.push((name.to_string(), text));
        }
        if let (Some((name, text)), Format::Json | Format::Both) = (json, format) {
            self.files.push((name.to_string(), text));
        }
    }

    /// Writes every artifact below `dir`.
    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        for (name, text) in &self.files {
            let path = dir.join(name);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
            }
            fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

/// Drops the comment header, leaving the CSV body.
fn body(csv: &str) -> String {
    csv.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect()
}

pub fn compute(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let spec = cfg.build_spec()?;
    let opts = cfg.shoot_options();
    let header = cfg.header();
    let table = assemble_spectrum(&spec, cfg.p, cfg.m_max, &opts)?;

    let mut out = Outcome::default();
    let csv = spectrum_csv(&table, &header);
    out.stdout = body(&csv);
    out.stderr = format!(
        "{} n={} p={} {}: {} values, certified prefix {}\n",
        spec.family_tag,
        spec.n,
        cfg.p,
        spec.topology,
        table.entries.len(),
        table.certified_prefix
    );
    out.add(cfg.format, Some(("spectrum.csv", csv)), Some(("spectrum.json", spectrum_json(&table, &spec, &header))));

    if let Some(elements) = cfg.fem_n {
        let mut text = comment_header(&header);
        text.push_str("m,branch,shooting,fem,difference\n");
        let mut worst: f64 = 0.0;
        for block in &table.blocks {
            let fem = fem_oracle(&spec, &block.mode, elements)?;
            for (b, (s, f)) in block.sigma.iter().zip(&fem.sigma).enumerate() {
                worst = worst.max((s - f).abs());
                text.push_str(&format!("{},{b},{},{},{}\n", block.mode.m, fmt_g9(*s), fmt_g9(*f), fmt_g9(s - f)));
            }
        }
        out.stderr.push_str(&format!("fem oracle N={elements}: max |shooting - fem| = {}\n", fmt_g9(worst)));
        out.files.push(("oracle.csv".into(), text));
    }

    if cfg.dump {
        let dir = cfg.out.as_ref().context("--dump needs --out")?.join("radial");
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        for m in 1..=cfg.m_max {
            let mode = ModeIndex::new(spec.n, cfg.p, m)?;
            match spec.topology {
                Topology::Connected => shoot_connected(&spec, &mode, &opts)?.write_dump(&dir, &format!("m{m}"))?,
                Topology::TwoBoundary => {
                    let (u, v) = solve_two_boundary(&spec, &mode, &opts)?;
                    u.write_dump(&dir, &format!("m{m}_u"))?;
                    v.write_dump(&dir, &format!("m{m}_v"))?;
                }
            }
        }
    }
    Ok(out)
}

fn summary(reports: &[BoundReport]) -> String {
    format!(
        "{} rows: {} Holds, {} HoldsWithEquality, {} Violated, {} NotApplicable\n",
        reports.len(),
        count(reports, Verdict::Holds),
        count(reports, Verdict::HoldsWithEquality),
        count(reports, Verdict::Violated),
        count(reports, Verdict::NotApplicable)
    )
}

pub fn verify(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let spec = cfg.build_spec()?;
    let header = cfg.header();
    let reports = run_selected(&spec, cfg.p, cfg.m_max, cfg.c, &cfg.shoot_options(), &cfg.theorem.ids())?;
    let csv = reports_csv(&reports, &header);
    let mut out = Outcome {
        stdout: body(&csv),
        stderr: summary(&reports),
        violated: count(&reports, Verdict::Violated) > 0,
        ..Outcome::default()
    };
    out.add(cfg.format, Some(("report.csv", csv)), Some(("report.json", reports_json(&reports))));
    Ok(out)
}

pub const SWEEP_CSV_HEADER: &str = "parameter,value,theorem,p,k,branch,lhs,rhs,margin,verdict";

pub fn sweep(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let param = cfg.sweep_param.context("sweep needs a parameter")?;
    let header = cfg.header();
    let mut csv = comment_header(&header);
    csv.push_str(SWEEP_CSV_HEADER);
    csv.push('\n');
    let mut records = Vec::new();
    let mut all = Vec::new();
    for &value in &cfg.sweep_values {
        let point = cfg.with_sweep_value(value);
        let spec = point.build_spec()?;
        let reports = run_selected(&spec, point.p, point.m_max, point.c, &point.shoot_options(), &cfg.theorem.ids())?;
        for r in &reports {
            let opt = |x: Option<f64>| x.map(fmt_g9).unwrap_or_default();
            csv.push_str(&format!(
                "{param},{},{},{},{},{},{},{},{},{}\n",
                fmt_g9(value),
                r.theorem,
                r.p,
                r.k,
                r.branch.map(|b| b.to_string()).unwrap_or_default(),
                opt(r.lhs),
                opt(r.rhs),
                opt(r.margin),
                r.verdict
            ));
            records.push(json!({ "parameter": param.to_string(), "value": value, "report": r }));
        }
        all.extend(reports);
    }
    let json_text = serde_json::to_string_pretty(&records)? + "\n";
    let mut out = Outcome { stdout: body(&csv), stderr: summary(&all), ..Outcome::default() };
    out.add(cfg.format, Some(("sweep.csv", csv)), Some(("sweep.json", json_text)));
    Ok(out)
}

pub const TABLE_CSV_HEADER: &str = "m,lambda,ratio_bound";

/// Reference table of the sphere data for `(n, p)`: coclosed eigenvalues and
/// the ratio bounds `lambda_(m+1) / lambda_(m)`. No solve is performed.
pub fn table(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let mut csv = comment_header(&cfg.header());
    csv.push_str(TABLE_CSV_HEADER);
    csv.push('\n');
    let mut rows = Vec::new();
    for m in 1..=cfg.m_max {
        let lambda = sphere_eigenvalue(cfg.n, cfg.p, m)?;
        let ratio = ratio_bound(cfg.n, cfg.p, m)?;
        csv.push_str(&format!("{m},{},{}\n", fmt_g9(lambda), fmt_g9(ratio)));
        rows.push(json!({ "m": m, "lambda": lambda, "ratio_bound": ratio }));
    }
    let json_text = serde_json::to_string_pretty(&rows)? + "\n";
    let mut out = Outcome { stdout: body(&csv), ..Outcome::default() };
    out.add(cfg.format, Some(("table.csv", csv)), Some(("table.json", json_text)));
    Ok(out)
}
