//! Experiment configuration files.
//!
//! A config is a flat JSON object whose `command` field selects the record
//! type. The text is deserialized straight into that record so errors keep
//! their line and column.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// Error in a config file or its values. Exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub message: String,
}

impl ConfigError {
    pub fn new(message: impl Into<String>) -> Self {
        Self { message: message.into() }
    }

    fn field(name: &str, reason: impl fmt::Display) -> Self {
        Self::new(format!("invalid `{name}`: {reason}"))
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    Picard,
    Etd,
}

/// Initial data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum PhiSpec {
    #[serde(rename = "phi_N")]
    PhiN {
        #[serde(rename = "N")]
        n: f64,
        s: f64,
    },
    #[serde(rename = "gaussian")]
    Gaussian { amplitude: f64, widths: [f64; 2] },
    #[serde(rename = "modes")]
    Modes { modes: Vec<ModeEntry> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeEntry {
    pub k: [i64; 2],
    /// `[re, im]`
    pub value: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub command: String,
    pub nx: usize,
    pub ny: usize,
    #[serde(rename = "Lx")]
    pub lx: f64,
    #[serde(rename = "Ly")]
    pub ly: f64,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "M")]
    pub m: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub phi_spec: PhiSpec,
    pub integrator: Integrator,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IllposedConfig {
    pub command: String,
    pub s: f64,
    pub eps0: f64,
    #[serde(rename = "N_list")]
    pub n_list: Vec<f64>,
    pub cells: usize,
    /// Random samples per `N` for the resonance bound.
    pub samples: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResolutionChoice {
    Base,
    Refined,
    /// Base and refined, with the stability factor in the manifest.
    Both,
}

/// Sweep values; only the ones the estimate uses are read.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyParams {
    #[serde(default)]
    pub b: Vec<f64>,
    #[serde(default)]
    pub s1: Vec<f64>,
    #[serde(default)]
    pub s2: Vec<f64>,
    #[serde(default)]
    pub xi: Vec<f64>,
    #[serde(default)]
    pub delta: Vec<f64>,
    /// Time window of the bilinear suite.
    #[serde(rename = "T", default)]
    pub t: Option<f64>,
    pub resolution: ResolutionChoice,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub command: String,
    pub estimate_id: String,
    pub suite_size: usize,
    pub seed: u64,
    pub params: VerifyParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormsConfig {
    pub command: String,
    /// Trajectory written by `solve`; relative paths resolve against the
    /// config file's directory.
    pub input_path: PathBuf,
    pub b: f64,
    pub s1: f64,
    pub s2: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExperimentConfig {
    Solve(SolveConfig),
    Illposed(IllposedConfig),
    Verify(VerifyConfig),
    Norms(NormsConfig),
}

impl ExperimentConfig {
    pub fn command(&self) -> &'static str {
        match self {
            ExperimentConfig::Solve(_) => "solve",
            ExperimentConfig::Illposed(_) => "illposed",
            ExperimentConfig::Verify(_) => "verify",
            ExperimentConfig::Norms(_) => "norms",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            ExperimentConfig::Solve(c) => serde_json::to_value(c),
            ExperimentConfig::Illposed(c) => serde_json::to_value(c),
            ExperimentConfig::Verify(c) => serde_json::to_value(c),
            ExperimentConfig::Norms(c) => serde_json::to_value(c),
        }
        .expect("config records serialize")
    }
}

#[derive(Deserialize)]
struct Tag {
    command: Option<String>,
}

fn located(path: &Path, e: serde_json::Error) -> ConfigError {
    ConfigError::new(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column()))
}

fn parse_as<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T, ConfigError> {
    serde_json::from_str(text).map_err(|e| located(path, e))
}

/// Parses `text` and checks every field against its valid range.
pub fn parse(path: &Path, text: &str) -> Result<ExperimentConfig, ConfigError> {
    let tag: Tag = parse_as(path, text)?;
    let command = tag
        .command
        .ok_or_else(|| ConfigError::new(format!("{}: missing `command` field", path.display())))?;
    let config = match command.as_str() {
        "solve" => ExperimentConfig::Solve(parse_as(path, text)?),
        "illposed" => ExperimentConfig::Illposed(parse_as(path, text)?),
        "verify" => ExperimentConfig::Verify(parse_as(path, text)?),
        "norms" => ExperimentConfig::Norms(parse_as(path, text)?),
        other => {
            return Err(ConfigError::field(
                "command",
                format!("unknown command {other:?}; expected solve, illposed, verify or norms"),
            ))
        }
    };
    validate(&config)?;
    Ok(config)
}

fn require(ok: bool, name: &str, reason: impl fmt::Display) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError::field(name, reason))
    }
}

fn finite(name: &str, x: f64) -> Result<(), ConfigError> {
    require(x.is_finite(), name, format!("{x} is not finite"))
}

fn validate(config: &ExperimentConfig) -> Result<(), ConfigError> {
    match config {
        ExperimentConfig::Solve(c) => {
            require(c.nx >= 8 && c.nx % 2 == 0, "nx", format!("{} must be even and >= 8", c.nx))?;
            require(c.ny >= 8 && c.ny % 2 == 0, "ny", format!("{} must be even and >= 8", c.ny))?;
            require(c.lx > 0.0 && c.lx.is_finite(), "Lx", format!("{} must be positive", c.lx))?;
            require(c.ly > 0.0 && c.ly.is_finite(), "Ly", format!("{} must be positive", c.ly))?;
            require(c.t > 0.0 && c.t.is_finite(), "T", format!("{} must be positive", c.t))?;
            require(c.m >= 8, "M", format!("{} must be at least 8", c.m))?;
            require(c.tol > 0.0 && c.tol.is_finite(), "tol", format!("{} must be positive", c.tol))?;
            require(c.max_iter >= 1, "max_iter", "must be at least 1")?;
            match &c.phi_spec {
                PhiSpec::PhiN { n, s } => {
                    require(*n >= 4.0 && n.is_finite(), "phi_spec.N", format!("{n} must be at least 4"))?;
                    finite("phi_spec.s", *s)?;
                }
                PhiSpec::Gaussian { amplitude, widths } => {
                    finite("phi_spec.amplitude", *amplitude)?;
                    require(
                        widths.iter().all(|w| *w > 0.0 && w.is_finite()),
                        "phi_spec.widths",
                        format!("{widths:?} must be positive"),
                    )?;
                }
                PhiSpec::Modes { modes } => {
                    for m in modes {
                        require(m.k[0] != 0, "phi_spec.modes", format!("k = {:?} lies on kx = 0", m.k))?;
                        finite("phi_spec.modes.value", m.value[0])?;
                        finite("phi_spec.modes.value", m.value[1])?;
                    }
                }
            }
        }
        ExperimentConfig::Illposed(c) => {
            finite("s", c.s)?;
            require(c.eps0 >= 0.0 && c.eps0.is_finite(), "eps0", format!("{} must be non-negative", c.eps0))?;
            require(c.n_list.len() >= 4, "N_list", format!("{} values; need at least 4", c.n_list.len()))?;
            require(
                c.n_list.iter().all(|n| *n >= 8.0 && n.is_finite()),
                "N_list",
                "every N must be at least 8",
            )?;
            require(c.cells >= 64, "cells", format!("{} per axis; need at least 64", c.cells))?;
            require(c.samples >= 10_000, "samples", format!("{}; need at least 10000", c.samples))?;
        }
        ExperimentConfig::Verify(c) => {
            require(c.suite_size >= 1, "suite_size", "must be at least 1")?;
            let p = &c.params;
            let nonempty = |name: &str, v: &[f64]| {
                require(!v.is_empty(), name, "sweep list is empty")?;
                v.iter().try_for_each(|x| finite(name, *x))
            };
            match c.estimate_id.as_str() {
                "free" => {
                    nonempty("params.b", &p.b)?;
                    nonempty("params.s1", &p.s1)?;
                    nonempty("params.s2", &p.s2)?;
                    require(
                        p.b.iter().all(|b| (0.0..=0.5).contains(b)),
                        "params.b",
                        "values must lie in [0, 1/2]",
                    )?;
                }
                "smoothing" => {
                    nonempty("params.xi", &p.xi)?;
                    nonempty("params.delta", &p.delta)?;
                    require(
                        p.delta.iter().all(|d| *d > 0.0 && *d <= 0.5),
                        "params.delta",
                        "values must lie in (0, 1/2]",
                    )?;
                }
                "bilinear" => {
                    nonempty("params.s1", &p.s1)?;
                    require(
                        p.s1.iter().all(|s| *s > -0.5 && *s <= 0.0),
                        "params.s1",
                        "values must lie in (-1/2, 0]",
                    )?;
                    let t = p.t.ok_or_else(|| ConfigError::field("params.T", "required for bilinear"))?;
                    require(t > 0.0 && t.is_finite(), "params.T", format!("{t} must be positive"))?;
                }
                other => {
                    return Err(ConfigError::field(
                        "estimate_id",
                        format!("unknown estimate {other:?}; expected free, smoothing or bilinear"),
                    ))
                }
            }
        }
        ExperimentConfig::Norms(c) => {
            require(c.b >= 0.0 && c.b.is_finite(), "b", format!("{} must be non-negative", c.b))?;
            finite("s1", c.s1)?;
            finite("s2", c.s2)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(text: &str) -> Result<ExperimentConfig, ConfigError> {
        parse(Path::new("c.json"), text)
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let e = p("{\n  \"command\": \"solve\",\n  \"nx\": 32,,\n}").unwrap_err();
        assert!(e.message.starts_with("c.json:3:"), "{}", e.message);
    }

    #[test]
    fn unknown_fields_are_rejected_with_position() {
        let text = r#"{
  "command": "norms",
  "input_path": "t.json",
  "b": 0.5, "s1": 0, "s2": 0,
  "bb": 1
}"#;
        let e = p(text).unwrap_err();
        assert!(e.message.contains("c.json:5:") && e.message.contains("bb"), "{}", e.message);
    }

    #[test]
    fn range_violations_name_the_field() {
        let text = r#"{"command": "illposed", "s": -0.7, "eps0": 0.01, "N_list": [16, 32], "cells": 128, "samples": 10000, "seed": 1}"#;
        assert!(p(text).unwrap_err().message.contains("`N_list`"));
        let text = r#"{"command": "verify", "estimate_id": "free", "suite_size": 3, "seed": 1,
                       "params": {"b": [0.7], "s1": [0], "s2": [0], "resolution": "base"}}"#;
        assert!(p(text).unwrap_err().message.contains("`params.b`"));
        assert!(p(r#"{"command": "plot"}"#).unwrap_err().message.contains("`command`"));
        assert!(p(r#"{"nx": 3}"#).unwrap_err().message.contains("command"));
    }

    #[test]
    fn phi_specs_parse() {
        let text = r#"{"command": "solve", "nx": 32, "ny": 32, "Lx": 3.0, "Ly": 3.0, "T": 0.1, "M": 16,
            "tol": 1e-10, "max_iter": 20, "integrator": "picard",
            "phi_spec": {"kind": "modes", "modes": [{"k": [1, 2], "value": [0.5, 0.0]}]}}"#;
        match p(text).unwrap() {
            ExperimentConfig::Solve(c) => assert_eq!(c.phi_spec, PhiSpec::Modes { modes: vec![ModeEntry { k: [1, 2], value: [0.5, 0.0] }] }),
            other => panic!("{other:?}"),
        }
        let bad = text.replace("[1, 2]", "[0, 2]");
        assert!(p(&bad).unwrap_err().message.contains("phi_spec.modes"));
    }
}
