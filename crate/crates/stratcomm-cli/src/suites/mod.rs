//! Verification batteries, registered by name and run through `verify <suite>`.

mod algebra;
mod engines;
mod graphs;
mod lossless;

use std::collections::BTreeMap;

use crate::error::{CliError, CliResult};
use crate::report::Report;

pub use algebra::{BinaryDecomposition, DbarAnchors, NoPositiveCycle};
pub use engines::{EngineEquivalence, TimeShare};
pub use graphs::{Biregular, IndependentSet};
pub use lossless::PositiveErrorAtFiniteLength;

/// Seed shared by every randomised suite so reports are reproducible.
pub const SUITE_SEED: u64 = 0x5eed_2024;

pub trait Suite: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn run(&self) -> CliResult<Report>;
}

pub struct SuiteRegistry {
    suites: BTreeMap<&'static str, Box<dyn Suite>>,
}

impl SuiteRegistry {
    pub fn register(&mut self, suite: Box<dyn Suite>) {
        self.suites.insert(suite.name(), suite);
    }

    pub fn get(&self, name: &str) -> CliResult<&dyn Suite> {
        self.suites
            .get(name)
            .map(|s| s.as_ref())
            .ok_or_else(|| CliError::Config(format!("unknown suite '{name}' (known: {})", self.names().join(", "))))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.suites.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Suite> {
        self.suites.values().map(|s| s.as_ref())
    }
}

impl Default for SuiteRegistry {
    fn default() -> Self {
        let mut r = Self { suites: BTreeMap::new() };
        r.register(Box::new(PositiveErrorAtFiniteLength));
        r.register(Box::new(IndependentSet));
        r.register(Box::new(Biregular));
        r.register(Box::new(EngineEquivalence));
        r.register(Box::new(TimeShare));
        r.register(Box::new(DbarAnchors));
        r.register(Box::new(BinaryDecomposition));
        r.register(Box::new(NoPositiveCycle));
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_lists_every_suite() {
        let r = SuiteRegistry::default();
        assert_eq!(
            r.names(),
            vec![
                "biregular",
                "dbar_anchors",
                "engine_equiv",
                "independent_set",
                "lemma_binary_decomp",
                "no_positive_cycle",
                "theorem1",
                "time_share"
            ]
        );
        assert!(matches!(r.get("nope"), Err(CliError::Config(_))));
    }
}
