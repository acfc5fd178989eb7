//! Run configuration: a flat key-value config file format plus the merge
//! rule (command-line flags win over file values, file values win over
//! defaults). A resolved `RunConfig` round-trips losslessly through the
//! file format.

use std::fmt;

use thiserror::Error;

use crate::certify::Mode;

#[derive(Debug, Error, PartialEq)]
#[error("config error: {0}")]
pub struct ConfigError(pub String);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleVariant {
    Quasi,
    Strict,
    Concave,
}

impl OracleVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            OracleVariant::Quasi => "quasi",
            OracleVariant::Strict => "strict",
            OracleVariant::Concave => "concave",
        }
    }

    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        match s {
            "quasi" => Ok(OracleVariant::Quasi),
            "strict" => Ok(OracleVariant::Strict),
            "concave" => Ok(OracleVariant::Concave),
            _ => Err(ConfigError(format!("unknown oracle variant `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Json,
    Csv,
}

impl OutputFormat {
    pub fn as_str(&self) -> &'static str {
        match self {
            OutputFormat::Text => "text",
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
        }
    }

    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        match s {
            "text" => Ok(OutputFormat::Text),
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            _ => Err(ConfigError(format!("unknown output format `{s}`"))),
        }
    }
}

pub const DEFAULT_GRID: usize = 21;
pub const DEFAULT_TRIALS: usize = 10_000;

/// Fully resolved configuration for one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    /// Builtin corpus name or expression text.
    pub function: String,
    /// Vector field components as expressions, separated by `;`.
    pub g: Option<String>,
    pub lambda: Option<String>,
    /// `x1:lo:hi,x2:lo:hi,...`; optional when the function is a builtin.
    pub domain: Option<String>,
    pub grid: usize,
    pub random_points: usize,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    pub fd_step: f64,
    pub oracle: OracleVariant,
    /// Base point `x*` for the hyperplane check, comma-separated.
    pub point: Option<String>,
    /// Level value for the tracer (the `x₂` value at the anchor).
    pub level: Option<f64>,
    pub anchor: f64,
    /// Tracer range `lo:hi`; defaults to the domain's `x1` bounds.
    pub x1_range: Option<String>,
    pub step: f64,
    pub format: OutputFormat,
    pub out: Option<String>,
}

/// A partially-specified configuration, used for file contents and for
/// command-line flags before merging.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigOverlay {
    pub mode: Option<String>,
    pub function: Option<String>,
    pub g: Option<String>,
    pub lambda: Option<String>,
    pub domain: Option<String>,
    pub grid: Option<usize>,
    pub random_points: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub fd_step: Option<f64>,
    pub oracle: Option<String>,
    pub point: Option<String>,
    pub level: Option<f64>,
    pub anchor: Option<f64>,
    pub x1_range: Option<String>,
    pub step: Option<f64>,
    pub format: Option<String>,
    pub out: Option<String>,
}

impl ConfigOverlay {
    /// Parse the flat `key = value` file format. `#` starts a comment.
    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut overlay = ConfigOverlay::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim();
            let value = value.trim().to_string();
            let bad_num =
                |what: &str| ConfigError(format!("line {}: bad {what} `{value}`", lineno + 1));
            match key {
                "mode" => overlay.mode = Some(value),
                "function" => overlay.function = Some(value),
                "g" => overlay.g = Some(value),
                "lambda" => overlay.lambda = Some(value),
                "domain" => overlay.domain = Some(value),
                "grid" => overlay.grid = Some(value.parse().map_err(|_| bad_num("integer"))?),
                "random_points" => {
                    overlay.random_points = Some(value.parse().map_err(|_| bad_num("integer"))?)
                }
                "trials" => overlay.trials = Some(value.parse().map_err(|_| bad_num("integer"))?),
                "seed" => overlay.seed = Some(value.parse().map_err(|_| bad_num("integer"))?),
                "tol" => overlay.tol = Some(value.parse().map_err(|_| bad_num("number"))?),
                "fd_step" => overlay.fd_step = Some(value.parse().map_err(|_| bad_num("number"))?),
                "oracle" => overlay.oracle = Some(value),
                "point" => overlay.point = Some(value),
                "level" => overlay.level = Some(value.parse().map_err(|_| bad_num("number"))?),
                "anchor" => overlay.anchor = Some(value.parse().map_err(|_| bad_num("number"))?),
                "x1_range" => overlay.x1_range = Some(value),
                "step" => overlay.step = Some(value.parse().map_err(|_| bad_num("number"))?),
                "format" => overlay.format = Some(value),
                "out" => overlay.out = Some(value),
                _ => return Err(ConfigError(format!("line {}: unknown key `{key}`", lineno + 1))),
            }
        }
        Ok(overlay)
    }

    /// Merge, with `self` (the flags) winning over `base` (the file).
    pub fn over(self, base: ConfigOverlay) -> ConfigOverlay {
        ConfigOverlay {
            mode: self.mode.or(base.mode),
            function: self.function.or(base.function),
            g: self.g.or(base.g),
            lambda: self.lambda.or(base.lambda),
            domain: self.domain.or(base.domain),
            grid: self.grid.or(base.grid),
            random_points: self.random_points.or(base.random_points),
            trials: self.trials.or(base.trials),
            seed: self.seed.or(base.seed),
            tol: self.tol.or(base.tol),
            fd_step: self.fd_step.or(base.fd_step),
            oracle: self.oracle.or(base.oracle),
            point: self.point.or(base.point),
            level: self.level.or(base.level),
            anchor: self.anchor.or(base.anchor),
            x1_range: self.x1_range.or(base.x1_range),
            step: self.step.or(base.step),
            format: self.format.or(base.format),
            out: self.out.or(base.out),
        }
    }

    /// Apply defaults and validate into a runnable configuration.
    pub fn resolve(self) -> Result<RunConfig, ConfigError> {
        let mode_str = self.mode.ok_or_else(|| ConfigError("missing mode".into()))?;
        let mode = Mode::parse(&mode_str)
            .ok_or_else(|| ConfigError(format!("unknown mode `{mode_str}`")))?;
        let function =
            self.function.ok_or_else(|| ConfigError("missing --function".into()))?;
        let grid = self.grid.unwrap_or(DEFAULT_GRID);
        if grid < 2 {
            return Err(ConfigError("grid needs at least 2 points per axis".into()));
        }
        let trials = self.trials.unwrap_or(DEFAULT_TRIALS);
        if trials == 0 {
            return Err(ConfigError("trials must be at least 1".into()));
        }
        let tol = self.tol.unwrap_or(crate::certify::DEFAULT_TOL);
        if !(tol > 0.0) {
            return Err(ConfigError("tol must be positive".into()));
        }
        let fd_step = self.fd_step.unwrap_or(crate::field::DEFAULT_FD_STEP);
        if !(fd_step > 0.0) {
            return Err(ConfigError("fd_step must be positive".into()));
        }
        let step = self.step.unwrap_or(crate::trace::DEFAULT_TRACE_STEP);
        if !(step > 0.0) {
            return Err(ConfigError("step must be positive".into()));
        }
        let oracle = match self.oracle {
            Some(s) => OracleVariant::parse(&s)?,
            None => OracleVariant::Quasi,
        };
        let format = match self.format {
            Some(s) => OutputFormat::parse(&s)?,
            None => OutputFormat::Text,
        };
        Ok(RunConfig {
            mode,
            function,
            g: self.g,
            lambda: self.lambda,
            domain: self.domain,
            grid,
            random_points: self.random_points.unwrap_or(0),
            trials,
            seed: self.seed.unwrap_or(0),
            tol,
            fd_step,
            oracle,
            point: self.point,
            level: self.level,
            anchor: self.anchor.unwrap_or(0.0),
            x1_range: self.x1_range,
            step,
            format,
            out: self.out,
        })
    }
}

impl RunConfig {
    /// Serialize to the config file format; `ConfigOverlay::from_text`
    /// followed by `resolve` reproduces this configuration exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: &dyn fmt::Display| {
            out.push_str(&format!("{k} = {v}\n"));
        };
        kv("mode", &self.mode.as_str());
        kv("function", &self.function);
        if let Some(g) = &self.g {
            kv("g", g);
        }
        if let Some(l) = &self.lambda {
            kv("lambda", l);
        }
        if let Some(d) = &self.domain {
            kv("domain", d);
        }
        kv("grid", &self.grid);
        kv("random_points", &self.random_points);
        kv("trials", &self.trials);
        kv("seed", &self.seed);
        kv("tol", &format_args!("{:?}", self.tol));
        kv("fd_step", &format_args!("{:?}", self.fd_step));
        kv("oracle", &self.oracle.as_str());
        if let Some(p) = &self.point {
            kv("point", p);
        }
        if let Some(l) = self.level {
            kv("level", &format_args!("{l:?}"));
        }
        kv("anchor", &format_args!("{:?}", self.anchor));
        if let Some(r) = &self.x1_range {
            kv("x1_range", r);
        }
        kv("step", &format_args!("{:?}", self.step));
        kv("format", &self.format.as_str());
        if let Some(o) = &self.out {
            kv("out", o);
        }
        out
    }
}

/// Parse `x1:lo:hi,x2:lo:hi,...` into bounds; axes must appear in order.
pub fn parse_domain(text: &str) -> Result<(Vec<f64>, Vec<f64>), ConfigError> {
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for (i, part) in text.split(',').enumerate() {
        let fields: Vec<&str> = part.trim().split(':').collect();
        if fields.len() != 3 {
            return Err(ConfigError(format!("domain axis `{part}` is not name:lo:hi")));
        }
        let expected = format!("x{}", i + 1);
        if fields[0] != expected {
            return Err(ConfigError(format!(
                "domain axes must be x1, x2, ... in order; got `{}`",
                fields[0]
            )));
        }
        let lo: f64 = fields[1]
            .parse()
            .map_err(|_| ConfigError(format!("bad bound `{}`", fields[1])))?;
        let hi: f64 = fields[2]
            .parse()
            .map_err(|_| ConfigError(format!("bad bound `{}`", fields[2])))?;
        if !(lo < hi) {
            return Err(ConfigError(format!("need lo < hi on {expected}, got {lo}:{hi}")));
        }
        lower.push(lo);
        upper.push(hi);
    }
    if lower.is_empty() {
        return Err(ConfigError("empty domain".into()));
    }
    Ok((lower, upper))
}

/// Parse a comma-separated point like `1,0.5`.
pub fn parse_point(text: &str) -> Result<Vec<f64>, ConfigError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| ConfigError(format!("bad coordinate `{s}`")))
        })
        .collect()
}

/// Parse a range like `0:0.4`.
pub fn parse_range(text: &str) -> Result<(f64, f64), ConfigError> {
    let (a, b) = text
        .split_once(':')
        .ok_or_else(|| ConfigError(format!("range `{text}` is not lo:hi")))?;
    let lo: f64 = a.trim().parse().map_err(|_| ConfigError(format!("bad bound `{a}`")))?;
    let hi: f64 = b.trim().parse().map_err(|_| ConfigError(format!("bad bound `{b}`")))?;
    if !(lo < hi) {
        return Err(ConfigError(format!("need lo < hi, got {lo}:{hi}")));
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_config() -> RunConfig {
        RunConfig {
            mode: Mode::Theorem1,
            function: "debreu".into(),
            g: Some("0; 1".into()),
            lambda: Some("1".into()),
            domain: Some("x1:-0.5:0.5,x2:-0.5:0.5".into()),
            grid: 21,
            random_points: 16,
            trials: 10_000,
            seed: 7,
            tol: 1e-8,
            fd_step: 1e-5,
            oracle: OracleVariant::Strict,
            point: Some("1,0".into()),
            level: Some(0.5),
            anchor: 0.0,
            x1_range: Some("0:0.4".into()),
            step: 1e-3,
            format: OutputFormat::Json,
            out: Some("report.json".into()),
        }
    }

    #[test]
    fn config_round_trips_through_the_file_format() {
        let cfg = sample_config();
        let text = cfg.to_text();
        let back = ConfigOverlay::from_text(&text).unwrap().resolve().unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn minimal_config_round_trips_with_defaults() {
        let cfg = ConfigOverlay {
            mode: Some("oracle".into()),
            function: Some("x1^4".into()),
            domain: Some("x1:-1:1,x2:-1:1".into()),
            ..Default::default()
        }
        .resolve()
        .unwrap();
        assert_eq!(cfg.grid, DEFAULT_GRID);
        assert_eq!(cfg.trials, DEFAULT_TRIALS);
        let back = ConfigOverlay::from_text(&cfg.to_text()).unwrap().resolve().unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn flags_win_over_the_file() {
        let file = ConfigOverlay::from_text("mode = oracle\nfunction = x1^4\nseed = 3\n").unwrap();
        let flags = ConfigOverlay { seed: Some(9), ..Default::default() };
        let cfg = flags.over(file).resolve().unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.function, "x1^4");
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(ConfigOverlay::from_text("nope = 1\n").is_err());
        assert!(ConfigOverlay::from_text("grid = banana\n").is_err());
        assert!(ConfigOverlay::from_text("just a line\n").is_err());
    }

    #[test]
    fn domain_parsing() {
        let (lo, hi) = parse_domain("x1:-0.5:0.5,x2:-0.5:0.5").unwrap();
        assert_eq!(lo, vec![-0.5, -0.5]);
        assert_eq!(hi, vec![0.5, 0.5]);
        assert!(parse_domain("x2:0:1").is_err());
        assert!(parse_domain("x1:1:0").is_err());
        assert!(parse_domain("x1:0").is_err());
    }

    #[test]
    fn point_and_range_parsing() {
        assert_eq!(parse_point("1, 0.5").unwrap(), vec![1.0, 0.5]);
        assert!(parse_point("1,oops").is_err());
        assert_eq!(parse_range("0:0.4").unwrap(), (0.0, 0.4));
        assert!(parse_range("0.4:0").is_err());
    }

    #[test]
    fn mode_strings_are_total() {
        for m in [
            Mode::Validate,
            Mode::Theorem1,
            Mode::Theorem2,
            Mode::Lemma1,
            Mode::PropertyN,
            Mode::Oracle,
            Mode::Concavity,
            Mode::Trace,
        ] {
            assert_eq!(Mode::parse(m.as_str()), Some(m));
        }
        assert_eq!(Mode::parse("bogus"), None);
    }
}
