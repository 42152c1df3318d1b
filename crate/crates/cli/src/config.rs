//! Scenario files: `[section]` headers followed by `key = value` lines.
//!
//! ```text
//! # comment
//! [scenario]
//! name = s2xh2-demo
//! seed = 7            # optional, defaults to 0
//! samples = 20        # optional, defaults to 20
//!
//! [factors]
//! g1 = sphere(2,1)
//! g2 = hyperbolic(2,1)
//! mu = 1/2            # optional, solved from the factors otherwise
//! positives = sphere(2,1); sphere(2,1)
//!
//! [build]
//! stages = cone, ambient, poincare, killing
//!
//! [checks]
//! run = einstein, ambient
//! tolerance.einstein = 1e-8
//!
//! [params]
//! dilation_alpha = 9/4
//! ```
//!
//! Keys are unique within a section. `#` starts a comment anywhere on a line.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use einforge_core::catalog::{parse_entry, parse_rational, EinsteinSpec};
use num_rational::Rational64;
use thiserror::Error;

/// Malformed syntax, with 1-based position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// Every semantic problem found in a syntactically valid file.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid scenario:\n  {}", .errors.join("\n  "))]
pub struct ValidationError {
    pub errors: Vec<String>,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// A construction stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Cone,
    Ambient,
    Poincare,
    Killing,
    Recursion,
}

impl Stage {
    pub const ALL: [Stage; 5] = [Stage::Cone, Stage::Ambient, Stage::Poincare, Stage::Killing, Stage::Recursion];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Cone => "cone",
            Stage::Ambient => "ambient",
            Stage::Poincare => "poincare",
            Stage::Killing => "killing",
            Stage::Recursion => "recursion",
        }
    }

    fn parse(s: &str) -> Option<Stage> {
        Stage::ALL.into_iter().find(|st| st.name() == s)
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A check and the stages it needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CheckKind {
    Einstein,
    RicciFlat,
    Ambient,
    NormalForm,
    Equivalence,
    Dilation,
    Homothety,
    Killing,
    Bach,
    Drag,
    Holonomy,
    LoopIdentity,
    HolonomyRank,
    Arithmetic,
}

impl CheckKind {
    pub const ALL: [CheckKind; 14] = [
        CheckKind::Einstein,
        CheckKind::RicciFlat,
        CheckKind::Ambient,
        CheckKind::NormalForm,
        CheckKind::Equivalence,
        CheckKind::Dilation,
        CheckKind::Homothety,
        CheckKind::Killing,
        CheckKind::Bach,
        CheckKind::Drag,
        CheckKind::Holonomy,
        CheckKind::LoopIdentity,
        CheckKind::HolonomyRank,
        CheckKind::Arithmetic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Einstein => "einstein",
            CheckKind::RicciFlat => "ricci-flat",
            CheckKind::Ambient => "ambient",
            CheckKind::NormalForm => "normal-form",
            CheckKind::Equivalence => "equivalence",
            CheckKind::Dilation => "dilation",
            CheckKind::Homothety => "homothety",
            CheckKind::Killing => "killing",
            CheckKind::Bach => "bach",
            CheckKind::Drag => "drag",
            CheckKind::Holonomy => "holonomy",
            CheckKind::LoopIdentity => "loop-identity",
            CheckKind::HolonomyRank => "holonomy-rank",
            CheckKind::Arithmetic => "arithmetic",
        }
    }

    fn parse(s: &str) -> Option<CheckKind> {
        CheckKind::ALL.into_iter().find(|c| c.name() == s)
    }

    /// Stages that must be built; `any_of` lists alternatives where one suffices.
    fn requirements(self) -> (&'static [Stage], &'static [Stage]) {
        match self {
            CheckKind::Einstein | CheckKind::Arithmetic | CheckKind::Bach => (&[], &[]),
            CheckKind::RicciFlat | CheckKind::LoopIdentity | CheckKind::HolonomyRank => (&[Stage::Cone], &[]),
            CheckKind::Ambient | CheckKind::NormalForm | CheckKind::Dilation => (&[Stage::Ambient], &[]),
            CheckKind::Equivalence => (&[Stage::Cone, Stage::Ambient], &[]),
            CheckKind::Homothety | CheckKind::Drag | CheckKind::Holonomy => (&[], &[Stage::Cone, Stage::Ambient]),
            CheckKind::Killing => (&[Stage::Killing], &[]),
        }
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub name: String,
    pub seed: u64,
    pub samples: usize,
    pub g1: Option<String>,
    pub g2: Option<String>,
    pub mu: Option<Rational64>,
    pub positives: Vec<String>,
    pub stages: Vec<Stage>,
    pub checks: Vec<CheckKind>,
    pub tolerances: BTreeMap<CheckKind, f64>,
    pub params: BTreeMap<String, String>,
    pub out: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn has(&self, stage: Stage) -> bool {
        self.stages.contains(&stage)
    }

    pub fn tolerance(&self, check: CheckKind, default: f64) -> f64 {
        self.tolerances.get(&check).copied().unwrap_or(default)
    }

    pub fn param(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(String::as_str)
    }

    /// Resolves a factor name; validation already parsed it once.
    pub fn factor(name: &str) -> EinsteinSpec {
        parse_entry(name).expect("factor names are validated on load")
    }
}

pub const DEFAULT_SAMPLES: usize = 20;

/// Parameters understood in `[params]`.
pub const PARAMS: [&str; 6] = ["dilation_alpha", "expect_mu", "expect_radius", "expect_rank", "arith_factors", "loop_radius"];

#[derive(Debug, Default)]
struct RawFile {
    sections: BTreeMap<String, BTreeMap<String, (String, usize)>>,
}

fn strip_comment(line: &str) -> &str {
    line.split_once('#').map_or(line, |(a, _)| a)
}

fn parse_raw(text: &str) -> Result<RawFile, ParseError> {
    let mut raw = RawFile::default();
    let mut current: Option<String> = None;
    for (ix, full) in text.lines().enumerate() {
        let line_no = ix + 1;
        let line = strip_comment(full);
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = line.len() - line.trim_start().len();
        let err = |column: usize, message: String| ParseError { line: line_no, column, message };
        if let Some(rest) = trimmed.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return Err(err(indent + trimmed.chars().count() + 1, "expected ']' to close the section header".into()));
            };
            let name = name.trim();
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return Err(err(indent + 2, format!("invalid section name '{name}'")));
            }
            raw.sections.entry(name.to_string()).or_default();
            current = Some(name.to_string());
            continue;
        }
        let Some(eq) = line.find('=') else {
            return Err(err(indent + 1, "expected 'key = value' or '[section]'".into()));
        };
        let key = line[..eq].trim();
        if key.is_empty() {
            return Err(err(eq + 1, "missing key before '='".into()));
        }
        if let Some(bad) = key.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')) {
            return Err(err(indent + line[indent..].find(key).unwrap_or(0) + bad + 1, format!("invalid character in key '{key}'")));
        }
        let Some(section) = current.as_ref() else {
            return Err(err(indent + 1, "key outside of any [section]".into()));
        };
        let value = line[eq + 1..].trim().to_string();
        let entries = raw.sections.get_mut(section).expect("section registered");
        if entries.contains_key(key) {
            return Err(err(indent + 1, format!("duplicate key '{key}' in [{section}]")));
        }
        entries.insert(key.to_string(), (value, line_no));
    }
    Ok(raw)
}

fn split_list(value: &str, sep: char) -> Vec<String> {
    value.split(sep).map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

/// Parses and validates scenario text. All validation problems are collected.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let raw = parse_raw(text)?;
    let mut errors = Vec::new();
    let known: [(&str, &[&str]); 5] = [
        ("scenario", &["name", "seed", "samples", "out"]),
        ("factors", &["g1", "g2", "mu", "positives"]),
        ("build", &["stages"]),
        ("checks", &["run"]),
        ("params", &PARAMS),
    ];
    for (section, entries) in &raw.sections {
        match known.iter().find(|(s, _)| s == section) {
            None => errors.push(format!("unknown section [{section}]")),
            Some((_, keys)) => {
                for (key, (_, line)) in entries {
                    let ok = keys.contains(&key.as_str()) || (section == "checks" && key.starts_with("tolerance."));
                    if !ok {
                        errors.push(format!("line {line}: unknown key '{key}' in [{section}]"));
                    }
                }
            }
        }
    }
    let get = |section: &str, key: &str| raw.sections.get(section).and_then(|s| s.get(key)).map(|(v, l)| (v.as_str(), *l));

    let name = match get("scenario", "name") {
        Some((v, _)) if !v.is_empty() => v.to_string(),
        _ => {
            errors.push("[scenario] name is required".into());
            String::new()
        }
    };
    let seed = match get("scenario", "seed") {
        None => 0,
        Some((v, l)) => v.parse().unwrap_or_else(|_| {
            errors.push(format!("line {l}: seed '{v}' is not an unsigned 64-bit integer"));
            0
        }),
    };
    let samples = match get("scenario", "samples") {
        None => DEFAULT_SAMPLES,
        Some((v, l)) => match v.parse::<usize>() {
            Ok(n) if n > 0 => n,
            _ => {
                errors.push(format!("line {l}: samples '{v}' must be a positive integer"));
                DEFAULT_SAMPLES
            }
        },
    };
    let out = get("scenario", "out").map(|(v, _)| PathBuf::from(v));

    let mut resolve = |key: &str| -> Option<String> {
        let (v, l) = get("factors", key)?;
        if let Err(e) = parse_entry(v) {
            errors.push(format!("line {l}: {key}: {e}"));
        }
        Some(v.to_string())
    };
    let g1 = resolve("g1");
    let g2 = resolve("g2");
    let positives = match get("factors", "positives") {
        None => Vec::new(),
        Some((v, l)) => {
            let list = split_list(v, ';');
            for p in &list {
                if let Err(e) = parse_entry(p) {
                    errors.push(format!("line {l}: positives: {e}"));
                }
            }
            list
        }
    };
    let mu = get("factors", "mu").and_then(|(v, l)| match parse_rational(v) {
        Ok(r) => Some(r),
        Err(e) => {
            errors.push(format!("line {l}: mu: {e}"));
            None
        }
    });

    let mut stages = Vec::new();
    if let Some((v, l)) = get("build", "stages") {
        for s in split_list(v, ',') {
            match Stage::parse(&s) {
                Some(st) if !stages.contains(&st) => stages.push(st),
                Some(st) => errors.push(format!("line {l}: stage '{st}' listed twice")),
                None => errors.push(format!("line {l}: unknown stage '{s}'")),
            }
        }
    }
    stages.sort();

    let mut checks = Vec::new();
    match get("checks", "run") {
        None => errors.push("[checks] run is required".into()),
        Some((v, l)) => {
            for c in split_list(v, ',') {
                match CheckKind::parse(&c) {
                    Some(k) if !checks.contains(&k) => checks.push(k),
                    Some(k) => errors.push(format!("line {l}: check '{k}' listed twice")),
                    None => errors.push(format!("line {l}: unknown check '{c}'")),
                }
            }
        }
    }
    let mut tolerances = BTreeMap::new();
    if let Some(entries) = raw.sections.get("checks") {
        for (key, (v, l)) in entries {
            let Some(check) = key.strip_prefix("tolerance.") else { continue };
            match (CheckKind::parse(check), v.parse::<f64>()) {
                (Some(k), Ok(t)) if t >= 0.0 && t.is_finite() => {
                    tolerances.insert(k, t);
                }
                (None, _) => errors.push(format!("line {l}: tolerance for unknown check '{check}'")),
                _ => errors.push(format!("line {l}: tolerance '{v}' must be a finite non-negative number")),
            }
        }
    }
    let params: BTreeMap<String, String> =
        raw.sections.get("params").map(|p| p.iter().map(|(k, (v, _))| (k.clone(), v.clone())).collect()).unwrap_or_default();

    // stage and check dependencies
    let needs_g1 =
        stages.iter().any(|s| *s != Stage::Recursion) || checks.iter().any(|c| matches!(c, CheckKind::Einstein | CheckKind::Bach));
    if needs_g1 && g1.is_none() {
        errors.push("[factors] g1 is required by the requested stages or checks".into());
    }
    if stages.contains(&Stage::Killing) && !stages.contains(&Stage::Poincare) {
        errors.push("stage 'killing' requires stage 'poincare'".into());
    }
    if stages.contains(&Stage::Recursion) {
        if g1.is_none() {
            errors.push("stage 'recursion' uses g1 as the negative factor g0".into());
        }
        if positives.is_empty() {
            errors.push("stage 'recursion' requires [factors] positives".into());
        }
    }
    if stages.contains(&Stage::Cone) && stages.contains(&Stage::Ambient) && g2.is_none() {
        errors.push("stages 'cone' and 'ambient' together need g2 for the cone pair".into());
    }
    for c in &checks {
        let (all, any) = c.requirements();
        for st in all {
            if !stages.contains(st) {
                errors.push(format!("check '{c}' requires stage '{st}'"));
            }
        }
        if !any.is_empty() && !any.iter().any(|st| stages.contains(st)) {
            let names: Vec<&str> = any.iter().map(|s| s.name()).collect();
            errors.push(format!("check '{c}' requires one of the stages {}", names.join(", ")));
        }
    }
    if checks.contains(&CheckKind::Arithmetic) && !params.contains_key("arith_factors") && (g1.is_none() || g2.is_none()) {
        errors.push("check 'arithmetic' needs g1 and g2 or [params] arith_factors".into());
    }
    if let Some(v) = params.get("arith_factors") {
        if parse_arith_factors(v).is_none() {
            errors.push(format!("arith_factors '{v}' must be 'm1, Sc1, m2, Sc2'"));
        }
    }
    for key in ["dilation_alpha", "expect_mu"] {
        if let Some(v) = params.get(key) {
            if let Err(e) = parse_rational(v) {
                errors.push(format!("{key}: {e}"));
            }
        }
    }
    if let Some(v) = params.get("expect_radius") {
        if parse_radius(v).is_none() {
            errors.push(format!("expect_radius '{v}' must be a number or 'a*sqrt(b)'"));
        }
    }
    if let Some(v) = params.get("expect_rank") {
        if v.parse::<usize>().is_err() {
            errors.push(format!("expect_rank '{v}' must be a non-negative integer"));
        }
    }
    if let Some(v) = params.get("loop_radius") {
        if !v.parse::<f64>().is_ok_and(|r| r > 0.0 && r < 1.0) {
            errors.push(format!("loop_radius '{v}' must lie in (0, 1)"));
        }
    }

    if !errors.is_empty() {
        return Err(ValidationError { errors }.into());
    }
    Ok(ScenarioConfig { name, seed, samples, g1, g2, mu, positives, stages, checks, tolerances, params, out })
}

/// `m1, Sc1, m2, Sc2`.
pub fn parse_arith_factors(v: &str) -> Option<(usize, Rational64, usize, Rational64)> {
    let parts = split_list(v, ',');
    if parts.len() != 4 {
        return None;
    }
    Some((parts[0].parse().ok()?, parse_rational(&parts[1]).ok()?, parts[2].parse().ok()?, parse_rational(&parts[3]).ok()?))
}

/// A plain number or `a*sqrt(b)`.
pub fn parse_radius(v: &str) -> Option<f64> {
    let v = v.trim();
    if let Ok(x) = v.parse::<f64>() {
        return Some(x);
    }
    let (a, rest) = v.split_once('*')?;
    let b = rest.trim().strip_prefix("sqrt(")?.strip_suffix(')')?;
    Some(a.trim().parse::<f64>().ok()? * b.trim().parse::<f64>().ok()?.sqrt())
}

pub fn load_scenario(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_scenario(&text)
}
