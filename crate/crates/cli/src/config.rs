//! Run configuration: defaults, a sectioned `key=value` file format and
//! validation against the solver preconditions.
//!
//! ```text
//! [run]
//! command=verify
//! theorem=t1.2
//! [geometry]
//! warp=sin
//! n=3
//! ```
//!
//! Values given on the command line override the file.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use steklov_core::bounds::TheoremId;
use steklov_core::radial::ShootOptions;
use steklov_core::warp::{
    load_profile, make_ball, make_concave, make_cylinder, make_sharpness_family, ConcaveKind,
};
use steklov_core::{Error, Result, Topology, WarpSpec};

macro_rules! keyword_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const NAMES: &'static [&'static str] = &[$($text),+];
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self {
                    $($name::$variant => $text),+
                })
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => Err(Error::Parse(format!(
                        "{s:?} is not one of {}",
                        Self::NAMES.join("|")
                    ))),
                }
            }
        }
    };
}

keyword_enum!(Command {
    Compute => "compute",
    Verify => "verify",
    Sweep => "sweep",
    Table => "table",
});

keyword_enum!(WarpKind {
    Ball => "ball",
    Cylinder => "cylinder",
    Sin => "sin",
    Sharpness => "sharpness",
    File => "file",
});

keyword_enum!(Format {
    Csv => "csv",
    Json => "json",
    Both => "both",
});

keyword_enum!(SweepParam {
    Eps => "eps",
    L => "L",
    R => "R",
    P => "p",
});

keyword_enum!(TopologyArg {
    Connected => "connected",
    TwoBoundary => "two-boundary",
});

impl From<TopologyArg> for Topology {
    fn from(t: TopologyArg) -> Self {
        match t {
            TopologyArg::Connected => Topology::Connected,
            TopologyArg::TwoBoundary => Topology::TwoBoundary,
        }
    }
}

/// Theorem selection: every checker, or a single id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TheoremSel {
    All,
    One(TheoremId),
}

impl TheoremSel {
    pub fn ids(&self) -> Vec<TheoremId> {
        match self {
            TheoremSel::All => TheoremId::ALL.to_vec(),
            TheoremSel::One(id) => vec![*id],
        }
    }
}

impl fmt::Display for TheoremSel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TheoremSel::All => f.write_str("all"),
            TheoremSel::One(id) => write!(f, "{id}"),
        }
    }
}

impl FromStr for TheoremSel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("all") {
            Ok(TheoremSel::All)
        } else {
            s.parse().map(TheoremSel::One)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub theorem: TheoremSel,
    pub warp: WarpKind,
    pub n: u32,
    pub p: u32,
    pub radius: f64,
    pub length: f64,
    pub eps: Option<f64>,
    pub c: Option<f64>,
    pub profile: Option<PathBuf>,
    pub topology: TopologyArg,
    pub m_max: u32,
    pub tol: f64,
    pub r0: f64,
    pub fem_n: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub dump: bool,
    pub sweep_param: Option<SweepParam>,
    pub sweep_values: Vec<f64>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        let shoot = ShootOptions::default();
        Self {
            command,
            theorem: TheoremSel::All,
            warp: WarpKind::Ball,
            n: 3,
            p: 0,
            radius: 1.0,
            length: 1.0,
            eps: None,
            c: None,
            profile: None,
            topology: TopologyArg::Connected,
            m_max: 5,
            tol: shoot.rtol,
            r0: shoot.r0_rel,
            fem_n: None,
            out: None,
            format: Format::Both,
            dump: false,
            sweep_param: None,
            sweep_values: Vec::new(),
        }
    }

    pub fn shoot_options(&self) -> ShootOptions {
        ShootOptions { r0_rel: self.r0, rtol: self.tol }
    }

    /// `(section, key, value)` triples in file order; absent options are skipped.
    pub fn entries(&self) -> Vec<(&'static str, &'static str, String)> {
        let mut out = vec![
            ("run", "command", self.command.to_string()),
            ("run", "theorem", self.theorem.to_string()),
            ("geometry", "warp", self.warp.to_string()),
            ("geometry", "n", self.n.to_string()),
            ("geometry", "p", self.p.to_string()),
            ("geometry", "R", self.radius.to_string()),
            ("geometry", "L", self.length.to_string()),
        ];
        if let Some(eps) = self.eps {
            out.push(("geometry", "eps", eps.to_string()));
        }
        if let Some(c) = self.c {
            out.push(("geometry", "C", c.to_string()));
        }
        if let Some(profile) = &self.profile {
            out.push(("geometry", "profile", profile.display().to_string()));
        }
        out.push(("geometry", "topology", self.topology.to_string()));
        out.push(("spectrum", "m_max", self.m_max.to_string()));
        out.push(("solver", "tol", self.tol.to_string()));
        out.push(("solver", "r0", self.r0.to_string()));
        if let Some(fem_n) = self.fem_n {
            out.push(("solver", "fem_n", fem_n.to_string()));
        }
        if let Some(dir) = &self.out {
            out.push(("output", "out", dir.display().to_string()));
        }
        out.push(("output", "format", self.format.to_string()));
        out.push(("output", "dump", self.dump.to_string()));
        if let Some(param) = self.sweep_param {
            out.push(("sweep", "param", param.to_string()));
        }
        if !self.sweep_values.is_empty() {
            let values: Vec<String> = self.sweep_values.iter().map(f64::to_string).collect();
            out.push(("sweep", "values", values.join(",")));
        }
        out
    }

    /// Flat `key=value` pairs embedded as comment lines in artifacts.
    pub fn header(&self) -> Vec<(String, String)> {
        self.entries().into_iter().map(|(_, k, v)| (k.to_string(), v)).collect()
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let mut section = "";
        for (s, k, v) in self.entries() {
            if s != section {
                out.push_str(&format!("[{s}]\n"));
                section = s;
            }
            out.push_str(&format!("{k}={v}\n"));
        }
        out
    }

    /// Parses the sectioned format; keys missing from the text keep their
    /// defaults. `command` must be present.
    pub fn parse(text: &str) -> Result<Self> {
        let pairs = parse_pairs(text)?;
        let command = pairs
            .iter()
            .find(|(k, _)| k == "command")
            .ok_or_else(|| Error::Parse("config has no `command` key".into()))?
            .1
            .parse()?;
        let mut cfg = RunConfig::new(command);
        for (key, value) in &pairs {
            cfg.set(key, value)?;
        }
        Ok(cfg)
    }

    /// Assigns one key. Unknown keys are errors so typos do not pass silently.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value.parse().map_err(|_| Error::Parse(format!("{key}: cannot parse {value:?}")))
        }
        match key {
            "command" => self.command = value.parse()?,
            "theorem" => self.theorem = value.parse()?,
            "warp" => self.warp = value.parse()?,
            "n" => self.n = num(key, value)?,
            "p" => self.p = num(key, value)?,
            "R" => self.radius = num(key, value)?,
            "L" => self.length = num(key, value)?,
            "eps" => self.eps = Some(num(key, value)?),
            "C" => self.c = Some(num(key, value)?),
            "profile" => self.profile = Some(PathBuf::from(value)),
            "topology" => self.topology = value.parse()?,
            "m_max" | "k_max" => self.m_max = num(key, value)?,
            "tol" => self.tol = num(key, value)?,
            "r0" => self.r0 = num(key, value)?,
            "fem_n" => self.fem_n = Some(num(key, value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            "format" => self.format = value.parse()?,
            "dump" => self.dump = num(key, value)?,
            "param" => self.sweep_param = Some(value.parse()?),
            "values" => self.sweep_values = parse_list(value)?,
            _ => return Err(Error::Parse(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Checks every field against the solver preconditions.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Domain(msg));
        if self.n < 2 {
            return bad(format!("n = {} must be at least 2", self.n));
        }
        if (self.command != Command::Sweep || self.sweep_param != Some(SweepParam::P))
            && self.p + 2 > self.n {
                return bad(format!("p = {} must satisfy p <= n - 2 = {}", self.p, self.n as i64 - 2));
            }
        if self.m_max == 0 {
            return bad("m_max must be at least 1".into());
        }
        if !(self.tol > 0.0 && self.tol <= 1e-3) {
            return bad(format!("tol = {} must lie in (0, 1e-3]", self.tol));
        }
        if !(self.r0 > 0.0 && self.r0 <= 0.1) {
            return bad(format!("r0 = {} must lie in (0, 0.1]", self.r0));
        }
        if let Some(fem_n) = self.fem_n {
            if fem_n < 16 {
                return bad(format!("fem_n = {fem_n} must be at least 16"));
            }
        }
        for (name, v) in [("R", self.radius), ("L", self.length)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} = {v} must be positive"));
            }
        }
        if let Some(c) = self.c {
            if !(c > 0.0) {
                return bad(format!("C = {c} must be positive"));
            }
        }
        match self.warp {
            WarpKind::Sharpness if self.eps.is_none() && self.sweep_param != Some(SweepParam::Eps) => {
                return bad("warp=sharpness needs eps".into());
            }
            WarpKind::File if self.profile.is_none() => return bad("warp=file needs a profile path".into()),
            _ => {}
        }
        if self.command == Command::Sweep {
            if self.sweep_param.is_none() || self.sweep_values.is_empty() {
                return bad("sweep needs a parameter and at least one value".into());
            }
            if self.sweep_param == Some(SweepParam::P)
                && self.sweep_values.iter().any(|&v| v < 0.0 || v.fract() != 0.0 || v + 2.0 > self.n as f64)
            {
                return bad(format!("swept p values must be integers in 0..={}", self.n - 2));
            }
        }
        Ok(())
    }

    /// The warp selected by this config.
    pub fn build_spec(&self) -> Result<WarpSpec> {
        match self.warp {
            WarpKind::Ball => make_ball(self.n, self.radius),
            WarpKind::Cylinder => make_cylinder(self.n, self.length),
            WarpKind::Sin => make_concave(ConcaveKind::Sin, self.n, self.radius),
            WarpKind::Sharpness => {
                let eps = self.eps.ok_or_else(|| Error::Domain("warp=sharpness needs eps".into()))?;
                make_sharpness_family(self.n, self.p, self.radius, eps)
            }
            WarpKind::File => {
                let path = self.profile.as_ref().ok_or_else(|| Error::Domain("warp=file needs a profile".into()))?;
                load_profile(path, self.n, self.topology.into()).map_err(|e| match e {
                    Error::Io(io) => Error::Domain(format!("cannot read {}: {io}", path.display())),
                    other => other,
                })
            }
        }
    }

    /// A copy with the swept parameter set to `value`.
    pub fn with_sweep_value(&self, value: f64) -> Self {
        let mut cfg = self.clone();
        match self.sweep_param {
            Some(SweepParam::Eps) => cfg.eps = Some(value),
            Some(SweepParam::L) => cfg.length = value,
            Some(SweepParam::R) => cfg.radius = value,
            Some(SweepParam::P) => cfg.p = value as u32,
            None => {}
        }
        cfg
    }
}

fn parse_list(value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::Parse(format!("values: cannot parse {s:?}"))))
        .collect()
}

/// Reads `key=value` lines, ignoring blank lines, `#` comments and
/// `[section]` headers.
fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') {
                return Err(Error::Parse(format!("line {}: unterminated section header", i + 1)));
            }
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", i + 1)))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}
