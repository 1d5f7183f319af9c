//! TOML run configuration with `[curve]`, `[growth]`, `[map]` and optional `[run]` sections.

use std::f64::consts::FRAC_PI_2;

use genexp_core::{
    build_curve, build_growth, CurveSpec, CurveVertex, GenExpMap, GrowthSpec, MapError, Mode,
};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("{field}: {message}")]
    Validation { field: String, message: String },
}

impl ConfigError {
    pub fn code(&self) -> &'static str {
        match self {
            ConfigError::Parse { .. } => "parse_error",
            ConfigError::Validation { .. } => "validation_error",
        }
    }

    fn validation(field: &str, message: impl Into<String>) -> Self {
        ConfigError::Validation { field: field.to_string(), message: message.into() }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    curve: RawCurve,
    growth: RawGrowth,
    map: RawMap,
    #[serde(default)]
    run: RunParams,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCurve {
    variant: String,
    #[serde(default)]
    vertices: Vec<[f64; 3]>,
    param_range: Option<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrowth {
    variant: String,
    beta: Option<f64>,
    lambda: Option<f64>,
    breakpoints: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    x_growth: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMap {
    a: f64,
    #[serde(default = "default_mu")]
    mu_target: f64,
    #[serde(default = "default_mode")]
    mode: String,
    #[serde(default)]
    seed: u64,
}

fn default_mu() -> f64 {
    2.0
}

fn default_mode() -> String {
    "certified".into()
}

/// Subcommand parameters that may be stored in the config; flags override them.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunParams {
    pub max_iter: Option<usize>,
    pub depth: Option<usize>,
    pub window: Option<[f64; 4]>,
    pub res: Option<[usize; 2]>,
    pub address: Option<String>,
    pub point: Option<[f64; 2]>,
    pub out: Option<String>,
    pub p: Option<usize>,
    pub tol: Option<f64>,
    pub t_max: Option<f64>,
    pub samples: Option<usize>,
    pub levels: Option<usize>,
    pub x_max: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub curve: CurveSpec,
    pub growth: GrowthSpec,
    pub x_growth: f64,
    pub a: f64,
    pub mu_target: f64,
    pub mode: Mode,
    pub seed: u64,
    pub run: RunParams,
}

pub fn parse_mode(s: &str) -> Result<Mode, ConfigError> {
    match s {
        "certified" => Ok(Mode::Certified),
        "uncertified" => Ok(Mode::Uncertified),
        other => Err(ConfigError::validation(
            "map.mode",
            format!("expected \"certified\" or \"uncertified\", got {other:?}"),
        )),
    }
}

/// Parses and validates a configuration, including certification of the map.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let config = parse_config_fields(text)?;
    config.build_map()?;
    Ok(config)
}

/// Parses a configuration and checks each field, without assembling the map.
pub fn parse_config_fields(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1).unwrap_or(0);
        ConfigError::Parse { line, reason: e.message().to_string() }
    })?;
    Ok(RunConfig {
        curve: curve_spec(&raw.curve)?,
        growth: growth_spec(&raw.growth)?,
        x_growth: raw.growth.x_growth,
        a: raw.map.a,
        mu_target: raw.map.mu_target,
        mode: parse_mode(&raw.map.mode)?,
        seed: raw.map.seed,
        run: raw.run,
    })
}

fn curve_spec(raw: &RawCurve) -> Result<CurveSpec, ConfigError> {
    let vertices = || -> Result<Vec<CurveVertex>, ConfigError> {
        if raw.vertices.len() < 2 {
            return Err(ConfigError::validation("curve.vertices", "need at least two [y, re, im] rows"));
        }
        let (lo, hi) = match raw.param_range {
            Some([lo, hi]) if lo < hi => (lo, hi),
            Some(_) => return Err(ConfigError::validation("curve.param_range", "must be increasing")),
            None => (-FRAC_PI_2, FRAC_PI_2),
        };
        // rescale the parameter onto [-π/2, π/2]
        let scale = |y: f64| -FRAC_PI_2 + (y - lo) / (hi - lo) * 2.0 * FRAC_PI_2;
        Ok(raw.vertices.iter().map(|[y, re, im]| CurveVertex::new(scale(*y), *re, *im)).collect())
    };
    match raw.variant.as_str() {
        "unit_circle" => {
            if !raw.vertices.is_empty() || raw.param_range.is_some() {
                return Err(ConfigError::validation("curve.vertices", "unit_circle takes no vertices"));
            }
            Ok(CurveSpec::UnitCircle)
        }
        "polyline" => Ok(CurveSpec::Polyline(vertices()?)),
        "sampled" => Ok(CurveSpec::SampledTable(vertices()?)),
        other => Err(ConfigError::validation(
            "curve.variant",
            format!("expected unit_circle, polyline or sampled, got {other:?}"),
        )),
    }
}

fn growth_spec(raw: &RawGrowth) -> Result<GrowthSpec, ConfigError> {
    match raw.variant.as_str() {
        "exponential" => {
            if raw.breakpoints.is_some() {
                return Err(ConfigError::validation("growth.breakpoints", "not used by exponential"));
            }
            Ok(GrowthSpec::Exponential { beta: raw.beta.unwrap_or(1.0), lambda: raw.lambda.unwrap_or(1.0) })
        }
        "log_convex_polyline" => {
            if raw.beta.is_some() || raw.lambda.is_some() {
                return Err(ConfigError::validation("growth.beta", "beta/lambda are not used by log_convex_polyline"));
            }
            let bp = raw
                .breakpoints
                .as_ref()
                .ok_or_else(|| ConfigError::validation("growth.breakpoints", "required for log_convex_polyline"))?;
            Ok(GrowthSpec::LogConvexPolyline { breakpoints: bp.iter().map(|[x, l]| (*x, *l)).collect() })
        }
        other => Err(ConfigError::validation(
            "growth.variant",
            format!("expected exponential or log_convex_polyline, got {other:?}"),
        )),
    }
}

impl RunConfig {
    pub fn build_map(&self) -> Result<GenExpMap, ConfigError> {
        if !(self.a > 0.0) {
            return Err(ConfigError::validation("map.a", "a must be positive"));
        }
        if !(self.mu_target > 1.0) {
            return Err(ConfigError::validation("map.mu_target", "mu_target must exceed 1"));
        }
        let curve = build_curve(self.curve.clone()).map_err(|e| ConfigError::validation("curve", e.to_string()))?;
        let growth = build_growth(self.growth.clone(), self.x_growth)
            .map_err(|e| ConfigError::validation("growth", e.to_string()))?;
        GenExpMap::new(curve, growth, self.a, self.mu_target, self.mode).map_err(|e| match e {
            MapError::NotCertified { a, a_min } => ConfigError::validation(
                "map.a",
                format!("a = {a} does not exceed a_min = {a_min:.6} required in certified mode"),
            ),
            other => ConfigError::validation("map", other.to_string()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXP_CIRCLE: &str = r#"
[curve]
variant = "unit_circle"

[growth]
variant = "exponential"

[map]
a = 5.0
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(EXP_CIRCLE).unwrap();
        assert_eq!(c.curve, CurveSpec::UnitCircle);
        assert_eq!(c.growth, GrowthSpec::Exponential { beta: 1.0, lambda: 1.0 });
        assert_eq!(c.mu_target, 2.0);
        assert_eq!(c.mode, Mode::Certified);
        assert_eq!(c.seed, 0);
        assert_eq!(c.run, RunParams::default());
    }

    #[test]
    fn negative_a_is_a_validation_error() {
        let err = parse_config(&EXP_CIRCLE.replace("a = 5.0", "a = -1.0")).unwrap_err();
        assert_eq!(err, ConfigError::validation("map.a", "a must be positive"));
    }

    #[test]
    fn unknown_key_reports_its_line() {
        let text = EXP_CIRCLE.replace("a = 5.0", "a = 5.0\ncolour = 3");
        match parse_config(&text).unwrap_err() {
            ConfigError::Parse { line, reason } => {
                assert_eq!(line, 10);
                assert!(reason.contains("colour"), "{reason}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn certified_diamond_below_a_min_cites_the_bound() {
        let text = r#"
[curve]
variant = "polyline"
vertices = [[-1, 0, -1], [0, 1, 0], [1, 0, 1]]
param_range = [-1, 1]

[growth]
variant = "exponential"

[map]
a = 2.0
"#;
        match parse_config(text).unwrap_err() {
            ConfigError::Validation { field, message } => {
                assert_eq!(field, "map.a");
                assert!(message.contains("a_min = 5.989"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let ok = parse_config(&text.replace("a = 2.0", "a = 2.0\nmode = \"uncertified\"")).unwrap();
        assert_eq!(ok.mode, Mode::Uncertified);
        assert_eq!(ok.curve, CurveSpec::diamond());
    }
}
