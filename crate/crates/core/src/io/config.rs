//! Run configuration files: one `key = value` per line, `#` starts a comment.
//!
//! | key                 | default                 |
//! |---------------------|-------------------------|
//! | `preset`            | none                    |
//! | `semantics`         | required                |
//! | `family`            | required                |
//! | `w`                 | required for exponential|
//! | `lambda`            | `0.5`                   |
//! | `mode`              | `symmetric`             |
//! | `prediction_family` | `linear`                |
//! | `iterations`        | `10000`                 |
//! | `burn_in`           | `1000`                  |
//! | `seed`              | `0`                     |
//! | `chains`            | `1`                     |
//! | `extension_cap`     | `16`                    |
//! | `enumeration_cap`   | `20`                    |
//!
//! A preset (`vote-experiment` or `sequential-update`) fills in keys first; explicit
//! keys override it regardless of their position in the file.

use std::collections::BTreeMap;
use std::path::Path;

use crate::accept::{ModelConfig, ParameterFamily};
use crate::af::{Semantics, DEFAULT_EXTENSION_CAP};
use crate::error::{Error, Result};
use crate::gibbs::GibbsConfig;
use crate::space::{AttackVariableSpace, VariableMode, DEFAULT_ENUMERATION_CAP};

const KEYS: &[&str] = &[
    "preset",
    "semantics",
    "family",
    "w",
    "lambda",
    "mode",
    "prediction_family",
    "iterations",
    "burn_in",
    "seed",
    "chains",
    "extension_cap",
    "enumeration_cap",
];

/// Prior probabilities of the attack variables.
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaSpec {
    Uniform(f64),
    PerVariable(Vec<f64>),
}

impl LambdaSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let values = text
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|p| (0.0..=1.0).contains(p))
                    .ok_or_else(|| Error::input(format!("invalid prior `{}`", v.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(match values.as_slice() {
            [single] => LambdaSpec::Uniform(*single),
            _ => LambdaSpec::PerVariable(values),
        })
    }
}

/// Everything a run needs besides the data.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub prediction_family: ParameterFamily,
    pub mode: VariableMode,
    pub lambda: LambdaSpec,
    pub gibbs: GibbsConfig,
    pub enumeration_cap: usize,
}

impl RunConfig {
    pub fn new(semantics: Semantics, family: ParameterFamily) -> Self {
        RunConfig {
            model: ModelConfig::new(semantics, family),
            prediction_family: ParameterFamily::Linear,
            mode: VariableMode::Symmetric,
            lambda: LambdaSpec::Uniform(0.5),
            gibbs: GibbsConfig::default(),
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        }
    }

    /// Complete semantics, `w = 100`, `λ = 0.5`, `I = 100`, `B = 0`.
    pub fn vote_experiment() -> Self {
        RunConfig {
            gibbs: GibbsConfig::short_chain(0),
            ..Self::new(
                Semantics::Complete,
                ParameterFamily::Exponential { w: 100.0 },
            )
        }
    }

    /// The three-argument sequential-update setting: `w = 2`, `λ = (0.1, 0.15, 0.2)`.
    pub fn sequential_update() -> Self {
        RunConfig {
            lambda: LambdaSpec::PerVariable(vec![0.1, 0.15, 0.2]),
            ..Self::new(Semantics::Complete, ParameterFamily::Exponential { w: 2.0 })
        }
    }

    /// The attack variables over `n_args` arguments with this config's priors.
    pub fn space(&self, n_args: usize) -> Result<AttackVariableSpace> {
        let space = AttackVariableSpace::new(n_args, self.mode)?;
        match &self.lambda {
            LambdaSpec::Uniform(p) => space.with_uniform_prior(*p),
            LambdaSpec::PerVariable(ps) => space.with_priors(ps.clone()),
        }
    }

    /// Stable textual form, used to derive run-directory names.
    pub fn canonical(&self) -> String {
        let lambda = match &self.lambda {
            LambdaSpec::Uniform(p) => p.to_string(),
            LambdaSpec::PerVariable(ps) => ps
                .iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join(","),
        };
        let w = match (self.model.family, self.prediction_family) {
            (ParameterFamily::Exponential { w }, _) | (_, ParameterFamily::Exponential { w }) => {
                format!("w = {w}\n")
            }
            _ => String::new(),
        };
        format!(
            "semantics = {}\nfamily = {}\n{w}lambda = {lambda}\nmode = {}\nprediction_family = {}\n\
             iterations = {}\nburn_in = {}\nseed = {}\nchains = {}\nextension_cap = {}\nenumeration_cap = {}\n",
            self.model.semantics,
            self.model.family.name(),
            self.mode.name(),
            self.prediction_family.name(),
            self.gibbs.iterations,
            self.gibbs.burn_in,
            self.gibbs.seed,
            self.gibbs.chains,
            self.model.extension_cap,
            self.enumeration_cap,
        )
    }
}

struct Entry {
    line: usize,
    value: String,
}

fn preset_entries(name: &str) -> Option<BTreeMap<&'static str, String>> {
    let pairs: &[(&str, &str)] = match name {
        "vote-experiment" => &[
            ("semantics", "complete"),
            ("family", "exponential"),
            ("w", "100"),
            ("lambda", "0.5"),
            ("iterations", "100"),
            ("burn_in", "0"),
        ],
        "sequential-update" => &[
            ("semantics", "complete"),
            ("family", "exponential"),
            ("w", "2"),
            ("lambda", "0.1,0.15,0.2"),
            ("mode", "symmetric"),
        ],
        _ => return None,
    };
    Some(pairs.iter().map(|(k, v)| (*k, v.to_string())).collect())
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| Error::parse(line, 1, "expected `key = value`"))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(Error::config(key, format!("unknown key (line {line})")));
        }
        if entries.contains_key(key) {
            return Err(Error::config(key, format!("duplicate key (line {line})")));
        }
        entries.insert(
            key.to_string(),
            Entry {
                line,
                value: value.trim().to_string(),
            },
        );
    }

    let mut values: BTreeMap<String, (usize, String)> = BTreeMap::new();
    if let Some(preset) = entries.get("preset") {
        let filled = preset_entries(&preset.value)
            .ok_or_else(|| Error::config("preset", format!("unknown preset `{}`", preset.value)))?;
        for (k, v) in filled {
            values.insert(k.to_string(), (preset.line, v));
        }
    }
    for (k, e) in entries {
        if k != "preset" {
            values.insert(k, (e.line, e.value));
        }
    }

    let get = |key: &str| values.get(key).map(|(l, v)| (*l, v.as_str()));
    let require = |key: &str| get(key).ok_or_else(|| Error::config(key, "missing required key"));
    let wrap = |key: &str, line: usize| {
        let key = key.to_string();
        move |e: Error| Error::config(key.clone(), format!("{e} (line {line})"))
    };
    fn number<T: std::str::FromStr>(key: &str, line: usize, v: &str) -> Result<T> {
        v.parse::<T>()
            .map_err(|_| Error::config(key, format!("invalid value `{v}` (line {line})")))
    }

    let (line, v) = require("semantics")?;
    let semantics: Semantics = v.parse().map_err(wrap("semantics", line))?;

    let w = match get("w") {
        Some((line, v)) => Some((line, number::<f64>("w", line, v)?)),
        None => None,
    };
    let family_of = |key: &str, name: &str, line: usize| -> Result<ParameterFamily> {
        if name.trim() == "exponential" {
            let (_, w) =
                w.ok_or_else(|| Error::config("w", "required by the exponential family"))?;
            ParameterFamily::exponential(w).map_err(wrap("w", line))
        } else {
            ParameterFamily::from_name(name, None).map_err(wrap(key, line))
        }
    };
    let (line, v) = require("family")?;
    let family = family_of("family", v, line)?;
    let prediction_family = match get("prediction_family") {
        Some((line, v)) => family_of("prediction_family", v, line)?,
        None => ParameterFamily::Linear,
    };
    if let Some((line, _)) = w {
        let uses_w = matches!(family, ParameterFamily::Exponential { .. })
            || matches!(prediction_family, ParameterFamily::Exponential { .. });
        if !uses_w {
            return Err(Error::config(
                "w",
                format!("only valid with an exponential family (line {line})"),
            ));
        }
    }

    let mut cfg = RunConfig::new(semantics, family);
    cfg.prediction_family = prediction_family;
    if let Some((line, v)) = get("mode") {
        cfg.mode = v.parse().map_err(wrap("mode", line))?;
    }
    if let Some((line, v)) = get("lambda") {
        cfg.lambda = LambdaSpec::parse(v).map_err(wrap("lambda", line))?;
    }
    if let Some((line, v)) = get("iterations") {
        cfg.gibbs.iterations = number("iterations", line, v)?;
    }
    if let Some((line, v)) = get("burn_in") {
        cfg.gibbs.burn_in = number("burn_in", line, v)?;
    }
    if let Some((line, v)) = get("seed") {
        cfg.gibbs.seed = number("seed", line, v)?;
    }
    if let Some((line, v)) = get("chains") {
        cfg.gibbs.chains = number("chains", line, v)?;
    }
    cfg.gibbs = cfg.gibbs.validated().map_err(|e| {
        let key = if cfg.gibbs.chains == 0 {
            "chains"
        } else {
            "burn_in"
        };
        Error::config(key, e.to_string())
    })?;
    if let Some((line, v)) = get("extension_cap") {
        cfg.model.extension_cap = number("extension_cap", line, v)?;
    } else {
        cfg.model.extension_cap = DEFAULT_EXTENSION_CAP;
    }
    if let Some((line, v)) = get("enumeration_cap") {
        cfg.enumeration_cap = number("enumeration_cap", line, v)?;
    }
    Ok(cfg)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}
