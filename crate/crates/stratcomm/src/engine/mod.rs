//! Game evaluation: the sender best-responds to a committed decoder and the receiver
//! scores what it recovers.
//!
//! Two exact engines are provided. The sequence engine walks every source block, while the
//! type engine works one type class at a time and never lists sequences. Both are
//! registered by name and can be swapped at run time.

mod bruteforce;
mod sequence;
mod typelevel;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::model::{sequence_count, Distribution, TypeVector};
use crate::rational::{format_real, int, log2_biguint, Rat};
use crate::strategy::{ReceiverStrategy, TieRule};
use crate::utility::UtilityMatrix;

pub use bruteforce::{brute_force_min_error, BruteForceResult};
pub use sequence::{best_response, SequenceEngine};
pub use typelevel::{type_level_best, ClassBest, TypeEngine};

/// Default limit on `q^n` for the sequence engine.
pub const SEQUENCE_CAP: u64 = 1 << 24;

/// The fixed parts of a game: preferences, source, recovery threshold and tie rule.
#[derive(Clone, Debug)]
pub struct Game {
    pub utility: UtilityMatrix,
    pub source: Distribution,
    pub threshold: Rat,
    pub tie: TieRule,
    pub cap: u64,
}

impl Game {
    pub fn new(utility: UtilityMatrix, source: Distribution, threshold: Rat, tie: TieRule) -> Result<Self> {
        if utility.q() != source.q() {
            return Err(Error::Mismatch(format!("{}-symbol utility with {}-symbol source", utility.q(), source.q())));
        }
        if threshold < int(0) || threshold > int(1) {
            return Err(Error::Invalid("threshold must lie in [0, 1]".into()));
        }
        Ok(Self { utility, source, threshold, tie, cap: SEQUENCE_CAP })
    }

    /// Worst-case ties at the recovery threshold, the pessimistic default.
    pub fn pessimistic(utility: UtilityMatrix, source: Distribution, threshold: Rat) -> Result<Self> {
        let tie = TieRule::worst_case(threshold.clone())?;
        Self::new(utility, source, threshold, tie)
    }

    pub fn q(&self) -> usize {
        self.utility.q()
    }

    fn check(&self, g: &ReceiverStrategy) -> Result<()> {
        if g.q() != self.q() {
            return Err(Error::Mismatch(format!("{}-symbol strategy in a {}-symbol game", g.q(), self.q())));
        }
        Ok(())
    }

    /// `count <= threshold * n`, i.e. a block distortion within the threshold.
    pub(crate) fn within(&self, count: usize, n: usize) -> bool {
        within(count, n, &self.threshold)
    }
}

pub(crate) fn within(count: usize, n: usize, threshold: &Rat) -> bool {
    BigInt::from(count) * threshold.denom() <= threshold.numer() * BigInt::from(n)
}

/// Size of a reconstruction set, exact or bracketed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CountEstimate {
    Exact(BigUint),
    Interval { lo: BigUint, hi: BigUint },
}

impl CountEstimate {
    pub(crate) fn bracket(lo: BigUint, hi: BigUint) -> Self {
        if lo == hi {
            CountEstimate::Exact(lo)
        } else {
            CountEstimate::Interval { lo, hi }
        }
    }

    pub fn exact(&self) -> Option<&BigUint> {
        match self {
            CountEstimate::Exact(c) => Some(c),
            CountEstimate::Interval { .. } => None,
        }
    }

    /// `log2(count) / n`, undefined for an empty set.
    pub fn rate(&self, n: usize) -> RateEstimate {
        let r = |c: &BigUint| log2_biguint(c) / n as f64;
        match self {
            CountEstimate::Exact(c) if c.is_zero() => RateEstimate::Undefined,
            CountEstimate::Exact(c) => RateEstimate::Exact(r(c)),
            CountEstimate::Interval { lo, .. } if lo.is_zero() => RateEstimate::Undefined,
            CountEstimate::Interval { lo, hi } => RateEstimate::Interval { lo: r(lo), hi: r(hi) },
        }
    }
}

impl fmt::Display for CountEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CountEstimate::Exact(c) => write!(f, "{c}"),
            CountEstimate::Interval { lo, hi } => write!(f, "{lo}..{hi}"),
        }
    }
}

/// A rate in bits per symbol.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RateEstimate {
    Undefined,
    Exact(f64),
    Interval { lo: f64, hi: f64 },
}

impl fmt::Display for RateEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateEstimate::Undefined => f.write_str("undefined"),
            RateEstimate::Exact(r) => f.write_str(&format_real(*r)),
            RateEstimate::Interval { lo, hi } => write!(f, "{}..{}", format_real(*lo), format_real(*hi)),
        }
    }
}

/// Result of evaluating one decoder.
#[derive(Clone, Debug)]
pub struct GameOutcome {
    pub engine: &'static str,
    pub n: usize,
    /// Probability of the correctly recovered set.
    pub recovered_prob: Rat,
    /// Probability of lying within the threshold of the image, the cooperative benchmark.
    pub coop_recovered_prob: Rat,
    /// Size of the set of reconstructions reached by recovered blocks.
    pub reconstructions: CountEstimate,
    /// Size of the set of reconstructions reached by any block.
    pub responses: CountEstimate,
    /// Types whose whole class is recovered, when recovery is constant on classes.
    pub recovered_types: Option<Vec<TypeVector>>,
    /// Indices of recovered blocks (sequence engine only).
    pub recovered: Option<Vec<u64>>,
    /// Indices of the reconstructions reached by recovered blocks (sequence engine only).
    pub reconstruction_set: Option<Vec<u64>>,
}

impl GameOutcome {
    pub fn error_prob(&self) -> Rat {
        int(1) - &self.recovered_prob
    }

    pub fn rate(&self) -> RateEstimate {
        self.reconstructions.rate(self.n)
    }

    pub fn image_rate(&self) -> RateEstimate {
        self.responses.rate(self.n)
    }
}

/// An evaluation back end.
pub trait Engine: Send + Sync {
    fn name(&self) -> &'static str;
    fn evaluate(&self, game: &Game, strategy: &ReceiverStrategy) -> Result<GameOutcome>;
}

/// Uses the sequence engine while `q^n` fits under the game's cap, the type engine beyond.
pub struct AutoEngine;

impl AutoEngine {
    pub fn pick(game: &Game, n: usize) -> &'static dyn Engine {
        match sequence_count(n, game.q()) {
            Some(c) if c <= game.cap => &SequenceEngine,
            _ => &TypeEngine,
        }
    }
}

impl Engine for AutoEngine {
    fn name(&self) -> &'static str {
        "auto"
    }

    fn evaluate(&self, game: &Game, strategy: &ReceiverStrategy) -> Result<GameOutcome> {
        Self::pick(game, strategy.n()).evaluate(game, strategy)
    }
}

/// Engines selectable by name.
pub struct EngineRegistry {
    engines: BTreeMap<&'static str, Box<dyn Engine>>,
}

impl EngineRegistry {
    pub fn register(&mut self, engine: Box<dyn Engine>) {
        self.engines.insert(engine.name(), engine);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Engine> {
        self.engines
            .get(name)
            .map(|e| e.as_ref())
            .ok_or_else(|| Error::Invalid(format!("unknown engine '{name}' (known: {})", self.names().join(", "))))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.engines.keys().copied().collect()
    }
}

impl Default for EngineRegistry {
    fn default() -> Self {
        let mut r = Self { engines: BTreeMap::new() };
        r.register(Box::new(SequenceEngine));
        r.register(Box::new(TypeEngine));
        r.register(Box::new(AutoEngine));
        r
    }
}
