use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stratcomm::dbar::{binary_test_channel, dbar, DbarProblem, Distortion, RateBudget, Regime};
use stratcomm::engine::type_level_best;
use stratcomm::model::{all_sequences, enumerate_types, joint_types_with_marginals, Distribution, TypeVector, DEFAULT_CAP};
use stratcomm::rational::{format_rational, int, rat, Rat};
use stratcomm::utility::{binary_decomposition, block_utility, gamma_sign, GammaSign, UtilityMatrix};

use super::{Suite, SUITE_SEED};
use crate::error::CliResult;
use crate::report::{Check, Report};

/// The three exact anchor values of the mismatched distortion bound.
pub struct DbarAnchors;

pub fn anchor_utilities() -> Vec<UtilityMatrix> {
    vec![
        UtilityMatrix::binary(int(-2), int(1)),
        UtilityMatrix::binary(int(1), int(-2)),
        UtilityMatrix::binary(int(-1), int(-1)),
        UtilityMatrix::binary(rat(-1, 3), rat(1, 4)),
    ]
}

fn binary_dbar(p: &Rat, p0: &Rat, budget: RateBudget, u: &UtilityMatrix) -> CliResult<Distortion> {
    Ok(dbar(&DbarProblem {
        source: Distribution::binary(p.clone())?,
        output: Distribution::binary(p0.clone())?,
        budget,
        utility: u.clone(),
        regime: Regime::BinaryExact,
    })?)
}

impl Suite for DbarAnchors {
    fn name(&self) -> &'static str {
        "dbar_anchors"
    }

    fn description(&self) -> &'static str {
        "exact distortion bound values 0, d, d at the lossless, shifted-marginal and test-channel anchors"
    }

    fn run(&self) -> CliResult<Report> {
        let mut bad = [Vec::new(), Vec::new(), Vec::new()];
        let mut cases = 0;
        for u in anchor_utilities() {
            for p in [rat(1, 10), rat(1, 5), rat(3, 10), rat(2, 5)] {
                let got = binary_dbar(&p, &p, RateBudget::Entropy(Distribution::binary(p.clone())?), &u)?;
                if got != Distortion::Exact(int(0)) {
                    bad[0].push(format!("p={p}: {got}"));
                }
                for d in [rat(1, 20), rat(1, 10)] {
                    cases += 1;
                    let shifted = &p + &d;
                    let got = binary_dbar(&p, &shifted, RateBudget::Entropy(Distribution::binary(shifted.clone())?), &u)?;
                    if got != Distortion::Exact(d.clone()) {
                        bad[1].push(format!("p={p} d={d}: {got}"));
                    }
                    let (out, joint) = binary_test_channel(&p, &d)?;
                    let got = binary_dbar(&p, out.get(0), RateBudget::MutualInformationOf(joint), &u)?;
                    if got != Distortion::Exact(d.clone()) {
                        bad[2].push(format!("p={p} d={d}: {got}"));
                    }
                }
            }
        }
        let names = ["lossless_marginal_gives_zero", "shifted_marginal_gives_d", "test_channel_gives_d"];
        let checks = names
            .iter()
            .zip(bad)
            .map(|(name, b)| Check::new(*name, b.is_empty(), if b.is_empty() { format!("{cases} (p, d, U) cases, exact") } else { b.join("; ") }))
            .collect();
        Ok(Report::new(self.name(), checks))
    }
}

/// The shift-plus-swaps form of binary block utility.
pub struct BinaryDecomposition;

impl Suite for BinaryDecomposition {
    fn name(&self) -> &'static str {
        "lemma_binary_decomp"
    }

    fn description(&self) -> &'static str {
        "binary block utility equals the composition-shift plus swapped-pairs form for every pair, n <= 8"
    }

    fn run(&self) -> CliResult<Report> {
        let mut checks = Vec::new();
        for u in [UtilityMatrix::binary(int(1), int(-2)), UtilityMatrix::binary(rat(3, 2), rat(-1, 3)), UtilityMatrix::binary(int(-1), int(-1))] {
            let mut bad = 0usize;
            let mut pairs = 0usize;
            for n in 1..=8 {
                let all: Vec<_> = all_sequences(n, 2, DEFAULT_CAP)?.collect();
                for y in &all {
                    for x in &all {
                        pairs += 1;
                        if binary_decomposition(y, x, &u)? != block_utility(y, x, &u)? {
                            bad += 1;
                        }
                    }
                }
            }
            checks.push(Check::new(
                format!("u01={}_u10={}", format_rational(u.get(0, 1)), format_rational(u.get(1, 0))),
                bad == 0,
                format!("{pairs} pairs, {bad} mismatches"),
            ));
        }
        Ok(Report::new(self.name(), checks))
    }
}

/// Same-type reports lose utility, and utility-optimal plans never route around a cycle.
pub struct NoPositiveCycle;

fn random_negative(rng: &mut ChaCha8Rng, q: usize) -> CliResult<UtilityMatrix> {
    loop {
        let rows: Vec<Vec<Rat>> =
            (0..q).map(|i| (0..q).map(|j| if i == j { int(0) } else { int(rng.gen_range(-12..=3)) }).collect()).collect();
        let u = UtilityMatrix::new(rows)?;
        if gamma_sign(&u) == GammaSign::Negative {
            return Ok(u);
        }
    }
}

fn random_type(rng: &mut ChaCha8Rng, n: usize, q: usize) -> CliResult<TypeVector> {
    let mut cuts: Vec<usize> = (0..q - 1).map(|_| rng.gen_range(0..=n)).collect();
    cuts.sort_unstable();
    let mut counts = Vec::with_capacity(q);
    let mut prev = 0;
    for c in cuts {
        counts.push(c - prev);
        prev = c;
    }
    counts.push(n - prev);
    Ok(TypeVector::new(counts)?)
}

pub const CYCLE_TRIALS: usize = 400;

impl Suite for NoPositiveCycle {
    fn name(&self) -> &'static str {
        "no_positive_cycle"
    }

    fn description(&self) -> &'static str {
        "negative-cycle utilities: same-type joint types have non-positive utility, zero only on the diagonal; transport optima are acyclic"
    }

    fn run(&self) -> CliResult<Report> {
        let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED ^ 0xc1c1e);
        let mut checks = Vec::new();

        let mut utilities = vec![
            UtilityMatrix::binary(int(1), int(-2)),
            UtilityMatrix::binary(int(-1), int(-1)),
            UtilityMatrix::new(vec![vec![int(0), int(1), int(1)], vec![int(-4), int(0), int(1)], vec![int(-4), int(-4), int(0)]])?,
        ];
        for _ in 0..3 {
            utilities.push(random_negative(&mut rng, 3)?);
        }
        for (k, u) in utilities.iter().enumerate() {
            let q = u.q();
            let scaled = u.scaled()?;
            let mut joints = 0usize;
            let mut bad = Vec::new();
            for n in 1..=8 {
                for t in enumerate_types(n, q, DEFAULT_CAP)? {
                    for w in joint_types_with_marginals(t.counts(), t.counts(), DEFAULT_CAP)? {
                        joints += 1;
                        let s = scaled.joint_sum(&w);
                        if s > 0 || (s == 0) != w.is_diagonal() {
                            bad.push(format!("{:?}", w.cells()));
                        }
                    }
                }
            }
            checks.push(Check::new(
                format!("same_type_utility{k}_q{q}"),
                bad.is_empty(),
                if bad.is_empty() { format!("{joints} joint types") } else { bad.join("; ") },
            ));
        }

        let mut bad = Vec::new();
        for _ in 0..CYCLE_TRIALS {
            let q = rng.gen_range(2..=4);
            let n = rng.gen_range(1..=12);
            let u = random_negative(&mut rng, q)?;
            let (t, c) = (random_type(&mut rng, n, q)?, random_type(&mut rng, n, q)?);
            let w = type_level_best(&t, &c, &u)?.witness;
            if let Some(cycle) = w.support_cycle() {
                bad.push(format!("{t}->{c}: cycle {cycle:?}"));
            }
        }
        checks.push(Check::new(
            "transport_optima_acyclic",
            bad.is_empty(),
            if bad.is_empty() { format!("{CYCLE_TRIALS} random instances, q <= 4") } else { bad.join("; ") },
        ));
        Ok(Report::new(self.name(), checks))
    }
}
