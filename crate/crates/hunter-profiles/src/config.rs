//! Run configuration: a flat `key = value` file merged with command-line
//! flags, which win.
//!
//! Unset fields stay `None` so each command can apply its own default.
//! Lane-Emden runs, for instance, go much further out than shooting runs.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected key = value, found '{text}'")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key '{key}' given twice")]
    Duplicate { line: usize, key: String },
    #[error("{key}: cannot parse '{value}'")]
    BadValue { key: String, value: String },
    #[error("{key} = {value} is out of range ({range})")]
    OutOfRange { key: String, value: String, range: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format '{s}' (csv or json)")),
        }
    }
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunConfig {
    pub gamma: Option<f64>,
    pub eps: Option<f64>,
    pub order: Option<usize>,
    pub tol: Option<f64>,
    pub ymin: Option<f64>,
    pub ymax: Option<f64>,
    pub scan_lo: Option<f64>,
    pub scan_hi: Option<f64>,
    pub grid_per_decade: Option<usize>,
    pub out: Option<String>,
    pub format: Option<Format>,
}

/// Keys in file order. They match the long flag names.
pub const KEYS: [&str; 11] =
    ["gamma", "eps", "order", "tol", "ymin", "ymax", "scan-lo", "scan-hi", "grid-per-decade", "out", "format"];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue { key: key.to_string(), value: value.to_string() })
}

impl RunConfig {
    /// Parses the file format. Blank lines and `#` comments are skipped.
    pub fn parse_file(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut seen: Vec<&str> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Syntax { line, text: raw.to_string() });
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(&known) = KEYS.iter().find(|k| **k == key) else {
                return Err(ConfigError::UnknownKey { line, key: key.to_string() });
            };
            if seen.contains(&known) {
                return Err(ConfigError::Duplicate { line, key: key.to_string() });
            }
            seen.push(known);
            cfg.set(known, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "gamma" => self.gamma = Some(parse(key, value)?),
            "eps" => self.eps = Some(parse(key, value)?),
            "order" => self.order = Some(parse(key, value)?),
            "tol" => self.tol = Some(parse(key, value)?),
            "ymin" => self.ymin = Some(parse(key, value)?),
            "ymax" => self.ymax = Some(parse(key, value)?),
            "scan-lo" => self.scan_lo = Some(parse(key, value)?),
            "scan-hi" => self.scan_hi = Some(parse(key, value)?),
            "grid-per-decade" => self.grid_per_decade = Some(parse(key, value)?),
            "out" => self.out = Some(value.to_string()),
            "format" => {
                self.format = Some(value.parse().map_err(|_| ConfigError::BadValue {
                    key: key.to_string(),
                    value: value.to_string(),
                })?)
            }
            _ => unreachable!("key list and setter disagree on '{key}'"),
        }
        Ok(())
    }

    /// Writes the set fields back in the file format. Floats use the
    /// shortest representation that parses back to the same value.
    pub fn to_file_string(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                let _ = writeln!(s, "{k} = {v}");
            }
        };
        put("gamma", self.gamma.map(|v| format!("{v:?}")));
        put("eps", self.eps.map(|v| format!("{v:?}")));
        put("order", self.order.map(|v| v.to_string()));
        put("tol", self.tol.map(|v| format!("{v:?}")));
        put("ymin", self.ymin.map(|v| format!("{v:?}")));
        put("ymax", self.ymax.map(|v| format!("{v:?}")));
        put("scan-lo", self.scan_lo.map(|v| format!("{v:?}")));
        put("scan-hi", self.scan_hi.map(|v| format!("{v:?}")));
        put("grid-per-decade", self.grid_per_decade.map(|v| v.to_string()));
        put("out", self.out.clone());
        put("format", self.format.map(|f| f.name().to_string()));
        s
    }

    /// Fields set in `over` replace those here.
    pub fn merged(mut self, over: &RunConfig) -> RunConfig {
        macro_rules! take {
            ($($f:ident),*) => {$( if over.$f.is_some() { self.$f = over.$f.clone(); } )*};
        }
        take!(gamma, eps, order, tol, ymin, ymax, scan_lo, scan_hi, grid_per_decade, out, format);
        self
    }

    /// Range checks that do not depend on the command. The admissible
    /// range of γ is left to the library, which knows it best.
    pub fn validate(&self) -> Result<(), ConfigError> {
        fn check<T: ToString>(key: &str, v: Option<T>, ok: impl Fn(&T) -> bool, range: &'static str) -> Result<(), ConfigError> {
            match v {
                Some(v) if !ok(&v) => Err(ConfigError::OutOfRange { key: key.to_string(), value: v.to_string(), range }),
                _ => Ok(()),
            }
        }
        check("gamma", self.gamma, |v| v.is_finite(), "finite")?;
        check("eps", self.eps, |v| v.is_finite(), "finite")?;
        check("order", self.order, |v| (2..=40).contains(v), "2 to 40")?;
        check("tol", self.tol, |v| *v > 0.0 && *v <= 1e-3, "0 < tol <= 1e-3")?;
        check("ymin", self.ymin, |v| *v > 0.0 && *v <= 0.1, "0 < ymin <= 0.1")?;
        check("ymax", self.ymax, |v| *v > 1.0 && v.is_finite(), "finite, above 1")?;
        check("scan-lo", self.scan_lo, |v| *v > 0.0 && v.is_finite(), "positive")?;
        check("scan-hi", self.scan_hi, |v| *v > 0.0 && *v <= 1.0, "0 < scan-hi <= 1")?;
        check("grid-per-decade", self.grid_per_decade, |v| (1..=10_000).contains(v), "1 to 10000")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blank_lines() {
        let cfg = RunConfig::parse_file("# run\n\ngamma = 1.1\nscan-hi=0.3  # upper\nformat = json\n").unwrap();
        assert_eq!(cfg.gamma, Some(1.1));
        assert_eq!(cfg.scan_hi, Some(0.3));
        assert_eq!(cfg.format, Some(Format::Json));
        assert_eq!(cfg.eps, None);
    }

    #[test]
    fn malformed_files_are_rejected() {
        assert!(matches!(RunConfig::parse_file("gamma 1.1"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(RunConfig::parse_file("colour = red"), Err(ConfigError::UnknownKey { .. })));
        assert!(matches!(RunConfig::parse_file("tol = 1e-9\ntol = 1e-8"), Err(ConfigError::Duplicate { line: 2, .. })));
        assert!(matches!(RunConfig::parse_file("order = ten"), Err(ConfigError::BadValue { .. })));
        assert!(matches!(RunConfig::parse_file("order = 1"), Err(ConfigError::OutOfRange { .. })));
        assert!(matches!(RunConfig::parse_file("format = xml"), Err(ConfigError::BadValue { .. })));
    }

    #[test]
    fn round_trip_is_lossless() {
        let cfg = RunConfig {
            gamma: Some(1.1),
            eps: Some(0.1 + 0.2),
            order: Some(12),
            tol: Some(3.3e-12),
            ymin: Some(1e-10),
            ymax: Some(1234.5),
            scan_lo: Some(1e-6),
            scan_hi: Some(0.5),
            grid_per_decade: Some(40),
            out: Some("run/out.csv".into()),
            format: Some(Format::Csv),
        };
        assert_eq!(RunConfig::parse_file(&cfg.to_file_string()).unwrap(), cfg);
    }

    #[test]
    fn flags_override_file() {
        let file = RunConfig { gamma: Some(1.05), tol: Some(1e-9), ..Default::default() };
        let flags = RunConfig { gamma: Some(1.15), ..Default::default() };
        let m = file.merged(&flags);
        assert_eq!((m.gamma, m.tol), (Some(1.15), Some(1e-9)));
    }
}
