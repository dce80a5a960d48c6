use std::collections::BTreeSet;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stratcomm::engine::{CountEstimate, Engine, Game, RateEstimate, SequenceEngine, TypeEngine};
use stratcomm::model::{enumerate_types, Distribution, Sequence, DEFAULT_CAP};
use stratcomm::rational::{int, rat};
use stratcomm::strategy::{closest_type, compose_time_share, neighbour_strategy, AnchorRule, Image, ReceiverStrategy};
use stratcomm::utility::UtilityMatrix;

use super::{Suite, SUITE_SEED};
use crate::error::CliResult;
use crate::report::{Check, Report};

/// The sequence and type engines report identical recovery on class images.
pub struct EngineEquivalence;

fn compare(game: &Game, g: &ReceiverStrategy) -> CliResult<Option<String>> {
    let a = SequenceEngine.evaluate(game, g)?;
    let b = TypeEngine.evaluate(game, g)?;
    let count = a.reconstructions.exact().cloned().unwrap_or_default();
    let bracketed = match &b.reconstructions {
        CountEstimate::Exact(c) => *c == count,
        CountEstimate::Interval { lo, hi } => *lo <= count && count <= *hi,
    };
    let same = a.recovered_prob == b.recovered_prob
        && a.coop_recovered_prob == b.coop_recovered_prob
        && a.recovered_types == b.recovered_types
        && bracketed;
    Ok((!same).then(|| format!("n={} image {:?}", g.n(), g.classes())))
}

impl Suite for EngineEquivalence {
    fn name(&self) -> &'static str {
        "engine_equiv"
    }

    fn description(&self) -> &'static str {
        "sequence and type engines agree exactly on neighbour-class and closest-type decoders"
    }

    fn run(&self) -> CliResult<Report> {
        let mut checks = Vec::new();
        let binary = [
            (UtilityMatrix::binary(int(1), int(-2)), rat(1, 5)),
            (UtilityMatrix::binary(int(-1), int(2)), rat(1, 10)),
            (UtilityMatrix::binary(int(-1), int(-1)), int(0)),
        ];
        for (k, (u, d)) in binary.into_iter().enumerate() {
            let game = Game::pessimistic(u, Distribution::binary(rat(3, 10))?, d)?;
            let mut bad = Vec::new();
            let mut cases = 0;
            for n in 1..=10 {
                for i in 1..=4 {
                    cases += 1;
                    bad.extend(compare(&game, &neighbour_strategy(&rat(3, 10), n, i)?)?);
                }
            }
            checks.push(Check::new(format!("binary_utility{k}"), bad.is_empty(), if bad.is_empty() { format!("{cases} decoders") } else { bad.join("; ") }));
        }

        let u = UtilityMatrix::new(vec![
            vec![int(0), int(1), int(1)],
            vec![int(-4), int(0), int(1)],
            vec![int(-4), int(-4), int(0)],
        ])?;
        let p = Distribution::new(vec![rat(1, 2), rat(1, 3), rat(1, 6)])?;
        let mut bad = Vec::new();
        let mut cases = 0;
        for d in [int(0), rat(1, 5)] {
            let game = Game::pessimistic(u.clone(), p.clone(), d)?;
            for n in 1..=6 {
                let center = closest_type(&p, n)?;
                let mut images = vec![vec![center.clone()]];
                let others: Vec<_> = enumerate_types(n, 3, DEFAULT_CAP)?.into_iter().filter(|t| *t != center).take(2).collect();
                images.push([vec![center.clone()], others].concat());
                for classes in images {
                    cases += 1;
                    let g = ReceiverStrategy::new(n, 3, Image::type_classes(classes), AnchorRule::LexMin)?;
                    bad.extend(compare(&game, &g)?);
                }
            }
        }
        checks.push(Check::new("ternary_example_utility", bad.is_empty(), if bad.is_empty() { format!("{cases} decoders") } else { bad.join("; ") }));
        Ok(Report::new(self.name(), checks))
    }
}

/// Concatenated decoders recover exactly the product of what each part recovers.
pub struct TimeShare;

pub const TIME_SHARE_TRIALS: usize = 40;

fn random_decoder(rng: &mut ChaCha8Rng, n: usize) -> CliResult<ReceiverStrategy> {
    let total = 1u64 << n;
    let mut members: Vec<Sequence> = (0..total).filter(|_| rng.gen_bool(0.5)).map(|i| Sequence::from_index(i, n, 2)).collect();
    if members.is_empty() {
        members.push(Sequence::from_index(0, n, 2));
    }
    Ok(ReceiverStrategy::new(n, 2, Image::explicit(members), AnchorRule::LexMin)?)
}

impl Suite for TimeShare {
    fn name(&self) -> &'static str {
        "time_share"
    }

    fn description(&self) -> &'static str {
        "n1 = n2 = 3: composite decoders give A = A1 x A2 and the length-weighted rate"
    }

    fn run(&self) -> CliResult<Report> {
        let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED ^ 0x7153);
        let source = Distribution::binary(rat(3, 10))?;
        let mut product_bad = 0;
        let mut rate_bad = 0;
        let mut nonempty = 0;
        for _ in 0..TIME_SHARE_TRIALS {
            let u = UtilityMatrix::binary(rat(rng.gen_range(-4..=4), 2), rat(rng.gen_range(-4..=4), 2));
            let game = Game::pessimistic(u, source.clone(), int(0))?;
            let (g1, g2) = (random_decoder(&mut rng, 3)?, random_decoder(&mut rng, 3)?);
            let joint = compose_time_share(&g1, &g2, DEFAULT_CAP)?;
            let (o1, o2, o) = (SequenceEngine.evaluate(&game, &g1)?, SequenceEngine.evaluate(&game, &g2)?, SequenceEngine.evaluate(&game, &joint)?);
            let set = |v: &Option<Vec<u64>>, n: usize| -> BTreeSet<Sequence> {
                v.iter().flatten().map(|&i| Sequence::from_index(i, n, 2)).collect()
            };
            let (a1, a2, a) = (set(&o1.reconstruction_set, 3), set(&o2.reconstruction_set, 3), set(&o.reconstruction_set, 6));
            let mut product = BTreeSet::new();
            for x in &a1 {
                for y in &a2 {
                    product.insert(x.concat(y)?);
                }
            }
            if product != a {
                product_bad += 1;
            }
            let size = |c: &CountEstimate| c.exact().cloned().unwrap_or_default();
            let exact_ok = size(&o.reconstructions) == size(&o1.reconstructions) * size(&o2.reconstructions);
            let rate_ok = match (o1.rate(), o2.rate(), o.rate()) {
                (RateEstimate::Exact(r1), RateEstimate::Exact(r2), RateEstimate::Exact(r)) => {
                    nonempty += 1;
                    (r - (3.0 * r1 + 3.0 * r2) / 6.0).abs() < 1e-12
                }
                (_, _, RateEstimate::Undefined) => size(&o.reconstructions) == BigUint::from(0u32),
                _ => false,
            };
            if !(exact_ok && rate_ok) {
                rate_bad += 1;
            }
        }
        Ok(Report::new(
            self.name(),
            vec![
                Check::new("product_structure", product_bad == 0, format!("{TIME_SHARE_TRIALS} pairs, {product_bad} violations")),
                Check::new("weighted_rate", rate_bad == 0, format!("{nonempty} pairs with defined rates, {rate_bad} violations")),
            ],
        ))
    }
}
