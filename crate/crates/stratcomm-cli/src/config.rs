//! Experiment configuration: one JSON document, rationals written as `"num/den"` or decimals.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use stratcomm::engine::{EngineRegistry, Game, SEQUENCE_CAP};
use stratcomm::model::{Distribution, Sequence};
use stratcomm::rational::{format_rational, int, parse_rational, Rat};
use stratcomm::strategy::{AnchorRule, FamilyInput, FamilyRegistry, TieRule};
use stratcomm::utility::{normalize, UtilityMatrix};

use crate::error::{CliError, CliResult};

/// An exact rational that reads from strings or JSON numbers and always writes as `"num/den"`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ratio(pub Rat);

impl Ratio {
    pub fn new(num: i64, den: i64) -> Self {
        Ratio(stratcomm::rational::rat(num, den))
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.0))
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for Ratio {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(serde_json::Number),
        }
        let text = match Raw::deserialize(d)? {
            Raw::Text(s) => s,
            Raw::Number(n) => n.to_string(),
        };
        parse_rational(&text).map(Ratio).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnchorConfig {
    /// Only `"lex_min"` is recognised.
    Named(String),
    Sequence(Vec<u8>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StrategyConfig {
    pub kind: String,
    pub anchor: AnchorConfig,
    pub classes: Vec<Vec<usize>>,
    pub sequences: Vec<Vec<u8>>,
    pub epsilon: Option<Ratio>,
    pub index: usize,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        Self {
            kind: "closest_type".into(),
            anchor: AnchorConfig::Named("lex_min".into()),
            classes: Vec::new(),
            sequences: Vec::new(),
            epsilon: None,
            index: 1,
        }
    }
}

fn zero() -> Ratio {
    Ratio(int(0))
}
fn one() -> usize {
    1
}
fn default_n_max() -> usize {
    8
}
fn default_tie() -> String {
    "worst_case".into()
}
fn default_engine() -> String {
    "auto".into()
}
fn default_cap() -> u64 {
    SEQUENCE_CAP
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub alphabet: Option<usize>,
    pub source: Vec<Ratio>,
    /// Rows are reconstructions, columns true symbols.
    pub utility: Vec<Vec<Ratio>>,
    #[serde(default)]
    pub normalize: bool,
    /// Distortion level `d`.
    #[serde(default = "zero")]
    pub threshold: Ratio,
    /// Extra tolerance added to `threshold` when deciding recovery at finite `n`.
    #[serde(default = "zero")]
    pub slack: Ratio,
    #[serde(default = "one")]
    pub n_min: usize,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default)]
    pub strategy: StrategyConfig,
    /// `"worst_case"` (at threshold plus slack), `"worst_case:r"` or `"lex_min"`.
    #[serde(default = "default_tie")]
    pub tie: String,
    /// One engine name or a comma-separated list.
    #[serde(default = "default_engine")]
    pub engine: String,
    #[serde(default = "default_cap")]
    pub cap: u64,
    #[serde(default, skip_serializing)]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
}

/// Command-line settings that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub engine: Option<String>,
    pub n_min: Option<usize>,
    pub n_max: Option<usize>,
    pub threads: Option<usize>,
    pub cap: Option<u64>,
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(e) = &self.engine {
            cfg.engine = e.clone();
        }
        if let Some(v) = self.n_min {
            cfg.n_min = v;
        }
        if let Some(v) = self.n_max {
            cfg.n_max = v;
        }
        if let Some(v) = self.threads {
            cfg.threads = Some(v);
        }
        if let Some(v) = self.cap {
            cfg.cap = v;
        }
        if let Some(p) = &self.out {
            cfg.out = Some(p.clone());
        }
    }
}

/// Parses a configuration, naming the offending field on failure.
pub fn parse(text: &str) -> CliResult<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(if path == "." { e.inner().to_string() } else { format!("field `{path}`: {}", e.inner()) })
    })
}

/// A configuration turned into library objects.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub game: Game,
    pub family: String,
    pub input: FamilyInput,
    pub anchor: AnchorRule,
    pub engines: Vec<String>,
}

impl Experiment {
    /// The resolved configuration as a single JSON line, execution-only settings left out.
    pub fn echo(&self) -> String {
        serde_json::to_string(&self.config).expect("config serialises")
    }

    pub fn strategy_id(&self) -> String {
        if self.family == "neighbour_classes" {
            format!("g{}", self.input.index)
        } else {
            self.family.clone()
        }
    }
}

fn field<T>(name: &str, r: stratcomm::Result<T>) -> CliResult<T> {
    r.map_err(|e| CliError::Config(format!("field `{name}`: {e}")))
}

impl ExperimentConfig {
    pub fn resolve(mut self) -> CliResult<Experiment> {
        let q = self.source.len();
        if let Some(a) = self.alphabet {
            if a != q {
                return Err(CliError::Config(format!("field `alphabet`: {a} symbols but the source has {q} entries")));
            }
        }
        self.alphabet = Some(q);
        let source = field("source", Distribution::new(self.source.iter().map(|r| r.0.clone()).collect()))?;
        let raw: Vec<Vec<Rat>> = self.utility.iter().map(|row| row.iter().map(|r| r.0.clone()).collect()).collect();
        let utility = if self.normalize { field("utility", normalize(raw))? } else { field("utility", UtilityMatrix::new(raw))? };
        if self.n_min == 0 || self.n_min > self.n_max {
            return Err(CliError::Config(format!("fields `n_min`/`n_max`: need 1 <= n_min <= n_max, got {}..{}", self.n_min, self.n_max)));
        }
        let level = &self.threshold.0 + &self.slack.0;
        let tie = match self.tie.as_str() {
            "worst_case" => field("tie", TieRule::worst_case(level.clone()))?,
            "lex_min" => TieRule::LexMin,
            other => match other.strip_prefix("worst_case:") {
                Some(r) => field("tie", parse_rational(r).and_then(TieRule::worst_case))?,
                None => return Err(CliError::Config(format!("field `tie`: unknown rule '{other}'"))),
            },
        };
        let mut game = field("threshold", Game::new(utility, source.clone(), level, tie))?;
        game.cap = self.cap;

        let known = EngineRegistry::default();
        let engines: Vec<String> = self.engine.split(',').map(|s| s.trim().to_string()).collect();
        for e in &engines {
            field("engine", known.get(e).map(|_| ()))?;
        }
        let families = FamilyRegistry::default();
        field("strategy.kind", families.get(&self.strategy.kind).map(|_| ()))?;
        let anchor = match &self.strategy.anchor {
            AnchorConfig::Named(s) if s == "lex_min" => AnchorRule::LexMin,
            AnchorConfig::Named(s) => return Err(CliError::Config(format!("field `strategy.anchor`: unknown rule '{s}'"))),
            AnchorConfig::Sequence(s) => AnchorRule::Explicit(field("strategy.anchor", Sequence::new(s.clone(), q))?),
        };
        let mut input = FamilyInput::new(source);
        input.classes = self.strategy.classes.clone();
        input.sequences = self.strategy.sequences.clone();
        input.epsilon = self.strategy.epsilon.as_ref().map(|r| r.0.clone());
        input.index = self.strategy.index;
        input.cap = self.cap;
        Ok(Experiment { family: self.strategy.kind.clone(), config: self, game, input, anchor, engines })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"{
        "source": ["3/10", 0.7],
        "utility": [[0, 1], ["-2", 0]],
        "slack": "1/5",
        "strategy": {"kind": "neighbour_classes", "index": 2}
    }"#;

    #[test]
    fn defaults_are_expanded() {
        let exp = parse(BASIC).unwrap().resolve().unwrap();
        let echo = exp.echo();
        assert!(echo.contains(r#""alphabet":2"#));
        assert!(echo.contains(r#""source":["3/10","7/10"]"#));
        assert!(echo.contains(r#""engine":"auto""#));
        assert!(!echo.contains("threads"));
        assert_eq!(exp.game.threshold, Ratio::new(1, 5).0);
        assert_eq!(exp.game.tie, TieRule::WorstCase(Ratio::new(1, 5).0));
        assert_eq!(exp.strategy_id(), "g2");
        let again = parse(&echo).unwrap().resolve().unwrap();
        assert_eq!(again.echo(), echo);
    }

    #[test]
    fn errors_name_the_field() {
        let e = parse(r#"{"source": ["1/2", "x"], "utility": [[0]]}"#).unwrap_err();
        assert!(e.to_string().contains("source[1]"), "{e}");
        let e = parse(r#"{"source": ["1/2", "1/2"], "utility": [[0, 1], [1, 0]], "colour": 1}"#).unwrap_err();
        assert!(e.to_string().contains("colour"), "{e}");
        let e = parse(r#"{"source": ["1/2", "1/2"], "utility": [[0, 1], [1, 0]], "engine": "quantum"}"#)
            .unwrap()
            .resolve()
            .unwrap_err();
        assert!(e.to_string().contains("engine"), "{e}");
        assert_eq!(e.exit_code(), 2);
        let e = parse(r#"{"source": ["1/2", "1/3"], "utility": [[0, 1], [1, 0]]}"#).unwrap().resolve().unwrap_err();
        assert!(e.to_string().contains("source"), "{e}");
    }

    #[test]
    fn overrides_take_precedence() {
        let mut cfg = parse(BASIC).unwrap();
        Overrides { engine: Some("sequence,type".into()), n_max: Some(3), ..Default::default() }.apply(&mut cfg);
        let exp = cfg.resolve().unwrap();
        assert_eq!(exp.engines, vec!["sequence", "type"]);
        assert_eq!(exp.config.n_max, 3);
    }
}
