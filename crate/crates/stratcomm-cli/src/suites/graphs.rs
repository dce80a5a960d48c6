use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use stratcomm::engine::{Engine, Game, SequenceEngine};
use stratcomm::graph::{biregular, degree_counts, degree_counts_exhaustive, is_independent_set, GraphSpec, GraphVariant};
use stratcomm::model::{enumerate_types, Distribution, Sequence, DEFAULT_CAP};
use stratcomm::rational::{int, rat};
use stratcomm::strategy::{AnchorRule, Image, ReceiverStrategy};
use stratcomm::utility::UtilityMatrix;

use super::{Suite, SUITE_SEED};
use crate::error::CliResult;
use crate::report::{Check, Report};

pub const STRATEGIES_PER_LENGTH: usize = 200;

/// Exactly recovered blocks never share an edge of the sender graph.
pub struct IndependentSet;

impl Suite for IndependentSet {
    fn name(&self) -> &'static str {
        "independent_set"
    }

    fn description(&self) -> &'static str {
        "random binary decoders, n = 2..6: the exact-recovery set is independent in the sender graph"
    }

    fn run(&self) -> CliResult<Report> {
        let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED);
        let source = Distribution::binary(rat(3, 10))?;
        let mut checks = Vec::new();
        for n in 2..=6usize {
            let total = 1u64 << n;
            let mut bad = 0usize;
            let mut largest = 0usize;
            for _ in 0..STRATEGIES_PER_LENGTH {
                let u = UtilityMatrix::binary(rat(rng.gen_range(-6..=6), 2), rat(rng.gen_range(-6..=6), 2));
                let density: f64 = rng.gen_range(0.1..0.9);
                let mut members: Vec<Sequence> =
                    (0..total).filter(|_| rng.gen_bool(density)).map(|i| Sequence::from_index(i, n, 2)).collect();
                if members.is_empty() {
                    members.push(Sequence::from_index(rng.gen_range(0..total), n, 2));
                }
                let g = ReceiverStrategy::new(n, 2, Image::explicit(members), AnchorRule::LexMin)?;
                let game = Game::pessimistic(u.clone(), source.clone(), int(0))?;
                let out = SequenceEngine.evaluate(&game, &g)?;
                let set: Vec<Sequence> =
                    out.recovered.unwrap_or_default().into_iter().map(|i| Sequence::from_index(i, n, 2)).collect();
                largest = largest.max(set.len());
                if !is_independent_set(&set, &u)? {
                    bad += 1;
                }
            }
            checks.push(Check::new(
                format!("n={n}"),
                bad == 0,
                format!("{STRATEGIES_PER_LENGTH} decoders, {bad} violations, largest recovered set {largest}"),
            ));
        }
        Ok(Report::new(self.name(), checks))
    }
}

/// `delta_out * |U_from| = delta_in * |U_to|` for every pair of type classes.
pub struct Biregular;

pub const BIREGULAR_N_MAX: usize = 10;
pub const EXHAUSTIVE_N_MAX: usize = 8;

fn test_utilities(q: usize) -> Vec<UtilityMatrix> {
    let m = |rows: &[&[i64]]| UtilityMatrix::new(rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect()).expect("square");
    match q {
        2 => vec![UtilityMatrix::binary(int(1), int(-2)), UtilityMatrix::binary(int(-1), int(1))],
        _ => vec![m(&[&[0, 1, 1], &[-4, 0, 1], &[-4, -4, 0]]), m(&[&[0, 2, -1], &[-1, 0, 3], &[1, -5, 0]])],
    }
}

impl Suite for Biregular {
    fn name(&self) -> &'static str {
        "biregular"
    }

    fn description(&self) -> &'static str {
        "degree identity between type classes for n <= 10, q <= 3, both graph variants; exhaustive counts for n <= 8"
    }

    fn run(&self) -> CliResult<Report> {
        let mut checks = Vec::new();
        for q in 2..=3usize {
            for (k, u) in test_utilities(q).into_iter().enumerate() {
                for variant in [GraphVariant::Undirected, GraphVariant::Directed { delta: rat(1, 4) }] {
                    let label = match &variant {
                        GraphVariant::Undirected => "undirected",
                        GraphVariant::Directed { .. } => "directed",
                    };
                    let spec = GraphSpec::new(u.clone(), variant)?;
                    let mut pairs = 0usize;
                    let mut failures = Vec::new();
                    for n in 1..=BIREGULAR_N_MAX {
                        let types = enumerate_types(n, q, DEFAULT_CAP)?;
                        let cases: Vec<_> = types.iter().flat_map(|a| types.iter().map(move |b| (a, b))).collect();
                        pairs += cases.len();
                        let bad: Vec<String> = cases
                            .par_iter()
                            .map(|(a, b)| -> stratcomm::Result<Option<String>> {
                                let fast = degree_counts(a, b, &spec, DEFAULT_CAP)?;
                                let mut ok = biregular(a, b, &fast);
                                if n <= EXHAUSTIVE_N_MAX {
                                    ok &= degree_counts_exhaustive(a, b, &spec)? == fast;
                                }
                                Ok((!ok).then(|| format!("{a}->{b}")))
                            })
                            .collect::<stratcomm::Result<Vec<_>>>()?
                            .into_iter()
                            .flatten()
                            .collect();
                        failures.extend(bad);
                    }
                    checks.push(Check::new(
                        format!("q={q}_utility{k}_{label}"),
                        failures.is_empty(),
                        if failures.is_empty() { format!("{pairs} type pairs") } else { failures.join("; ") },
                    ));
                }
            }
        }
        Ok(Report::new(self.name(), checks))
    }
}
