//! Stable text encodings of spectra and reports.
//!
//! Floating-point fields are printed like C's `%.9g`, so identical inputs
//! give byte-identical files. Every artifact starts with `# key=value`
//! comment lines describing the run that produced it.

use serde::Serialize;
use serde_json::json;

use crate::bounds::BoundReport;
use crate::spectrum::{SpectrumEntry, SpectrumTable};
use crate::warp::WarpSpec;

pub const SPECTRUM_CSV_HEADER: &str = "k,m,branch,sigma,lambda,certified";
pub const REPORT_CSV_HEADER: &str = "theorem,n,p,k,lhs,rhs,margin,verdict";

/// Formats `x` with 9 significant digits in the style of `%.9g`.
pub fn fmt_g9(x: f64) -> String {
    const DIGITS: i32 = 9;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    // Round first: the exponent of the rounded value decides the style.
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_g9).unwrap_or_default()
}

/// `# key=value` lines, one per header pair.
pub fn comment_header(header: &[(String, String)]) -> String {
    header.iter().map(|(k, v)| format!("# {k}={v}\n")).collect()
}

/// Parses the `# key=value` lines at the top of an artifact.
pub fn parse_comment_header(text: &str) -> Vec<(String, String)> {
    text.lines()
        .map_while(|l| l.strip_prefix("# "))
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn spectrum_row(e: &SpectrumEntry) -> String {
    format!("{},{},{},{},{},{}\n", e.k, e.m, e.branch, fmt_g9(e.sigma), fmt_g9(e.lambda), e.certified)
}

pub fn spectrum_csv(table: &SpectrumTable, header: &[(String, String)]) -> String {
    let mut out = comment_header(header);
    out.push_str(SPECTRUM_CSV_HEADER);
    out.push('\n');
    for e in &table.entries {
        out.push_str(&spectrum_row(e));
    }
    out
}

#[derive(Serialize)]
struct SpectrumRecord {
    k: usize,
    m: u32,
    branch: u8,
    sigma: f64,
    lambda: f64,
    certified: bool,
    error: f64,
}

/// JSON mirror of [`spectrum_csv`] with the warp metadata.
pub fn spectrum_json(table: &SpectrumTable, spec: &WarpSpec, header: &[(String, String)]) -> String {
    let entries: Vec<SpectrumRecord> = table
        .entries
        .iter()
        .map(|e| SpectrumRecord {
            k: e.k,
            m: e.m,
            branch: e.branch,
            sigma: e.sigma,
            lambda: e.lambda,
            certified: e.certified,
            error: e.error,
        })
        .collect();
    let config: serde_json::Map<String, serde_json::Value> =
        header.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
    let doc = json!({
        "config": config,
        "spec": {
            "family": spec.family_tag,
            "n": spec.n,
            "p": table.p,
            "topology": table.topology,
            "length": spec.length,
            "m_max": table.m_max,
            "certified_prefix": table.certified_prefix,
        },
        "entries": entries,
    });
    serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
}

pub fn reports_csv(reports: &[BoundReport], header: &[(String, String)]) -> String {
    let mut out = comment_header(header);
    out.push_str(REPORT_CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.theorem,
            r.n,
            r.p,
            r.k,
            fmt_opt(r.lhs),
            fmt_opt(r.rhs),
            fmt_opt(r.margin),
            r.verdict
        ));
    }
    out
}

/// JSON array of reports. Non-finite numbers (an infinite bound) become `null`.
pub fn reports_json(reports: &[BoundReport]) -> String {
    serde_json::to_string_pretty(reports).expect("serializable") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::ShootOptions;
    use crate::spectrum::assemble_spectrum;
    use crate::warp::make_ball;

    #[test]
    fn g9_matches_c() {
        let cases = [
            (1.0, "1"),
            (0.1, "0.1"),
            (1.0 / 3.0, "0.333333333"),
            (2.0 / 3.0, "0.666666667"),
            (123456789.0, "123456789"),
            (1234567890.0, "1.23456789e+09"),
            (1e-5, "1e-05"),
            (0.0001, "0.0001"),
            (1.252_712, "1.252712"),
            (-2.5, "-2.5"),
            (99999999.95, "100000000"),
            (999999999.7, "1e+09"),
            (6.02214076e23, "6.02214076e+23"),
            (0.0, "0"),
        ];
        for (x, want) in cases {
            assert_eq!(fmt_g9(x), want, "{x}");
        }
        assert_eq!(fmt_g9(f64::NAN), "nan");
        assert_eq!(fmt_g9(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn header_round_trip() {
        let header = vec![("n".to_string(), "3".to_string()), ("warp".to_string(), "ball".to_string())];
        let text = comment_header(&header) + "k,m\n# not header\n";
        assert_eq!(parse_comment_header(&text), header);
    }

    #[test]
    fn ball_csv_and_json() {
        let spec = make_ball(3, 1.0).unwrap();
        let table = assemble_spectrum(&spec, 0, 3, &ShootOptions::default()).unwrap();
        let header = vec![("warp".to_string(), "ball".to_string())];
        let csv = spectrum_csv(&table, &header);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# warp=ball");
        assert_eq!(lines[1], SPECTRUM_CSV_HEADER);
        assert_eq!(lines[2], "1,1,0,1,2,true");
        assert_eq!(lines.len(), 5);

        let doc: serde_json::Value = serde_json::from_str(&spectrum_json(&table, &spec, &header)).unwrap();
        assert_eq!(doc["spec"]["family"], "ball(R=1)");
        assert_eq!(doc["entries"].as_array().unwrap().len(), 3);
        assert_eq!(doc["entries"][2]["m"], 3);
        assert_eq!(doc["config"]["warp"], "ball");
    }
}
