use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;

use super::{CountEstimate, Engine, Game, GameOutcome};
use crate::error::{Error, Result};
use crate::model::{enumerate_types, type_class_size, ExactProbability, JointType, TypeVector, DEFAULT_CAP};
use crate::rational::Rat;
use crate::strategy::{ReceiverStrategy, TieRule};
use crate::transport::{is_unique_optimum, lexicographic_weights, objective, solve_max, Mismatch};
use crate::utility::{ScaledUtility, UtilityMatrix};

/// The sender's best block utility against a whole image class, with the spread of
/// distortions over all maximisers.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassBest {
    pub utility: Rat,
    pub max_distortion: Rat,
    pub min_distortion: Rat,
    /// A maximising joint type (rows: reconstruction, columns: truth) of largest distortion.
    pub witness: JointType,
    /// Whether the maximising joint type is unique.
    pub unique: bool,
}

pub(crate) struct Best {
    pub value: i128,
    pub max_mismatch: usize,
    pub min_mismatch: usize,
    pub plan: Vec<u64>,
    pub unique: bool,
}

fn mismatch_of(plan: &[u64], q: usize) -> usize {
    plan.iter().enumerate().filter(|(k, _)| k / q != k % q).map(|(_, &c)| c as usize).sum()
}

fn is_functional(plan: &[u64], q: usize) -> bool {
    (0..q).all(|j| (0..q).filter(|&i| plan[i * q + j] > 0).count() <= 1)
}

pub(crate) fn best_counts(truth: &[usize], class: &[usize], scaled: &ScaledUtility) -> Result<Best> {
    let q = scaled.q;
    let rows: Vec<u64> = class.iter().map(|&c| c as u64).collect();
    let cols: Vec<u64> = truth.iter().map(|&c| c as u64).collect();
    let n: u64 = cols.iter().sum();
    let plan = solve_max(&rows, &cols, &scaled.weights)?;
    let value = objective(&plan, &scaled.weights);
    if is_unique_optimum(&plan, &scaled.weights, q) {
        let m = mismatch_of(&plan, q);
        return Ok(Best { value, max_mismatch: m, min_mismatch: m, plan, unique: true });
    }
    let hi = solve_max(&rows, &cols, &lexicographic_weights(&scaled.weights, q, n, Mismatch::Maximize)?)?;
    let lo = solve_max(&rows, &cols, &lexicographic_weights(&scaled.weights, q, n, Mismatch::Minimize)?)?;
    Ok(Best { value, max_mismatch: mismatch_of(&hi, q), min_mismatch: mismatch_of(&lo, q), plan: hi, unique: false })
}

/// Best reply of a block of type `truth` into the class of `class`, by integer transportation.
pub fn type_level_best(truth: &TypeVector, class: &TypeVector, u: &UtilityMatrix) -> Result<ClassBest> {
    if truth.n() != class.n() || truth.q() != class.q() || truth.q() != u.q() {
        return Err(Error::Infeasible(format!("types {truth} and {class} share no joint type")));
    }
    let scaled = u.scaled()?;
    let b = best_counts(truth.counts(), class.counts(), &scaled)?;
    let n = truth.n();
    let frac = |m: usize| BigRational::new(BigInt::from(m), BigInt::from(n));
    Ok(ClassBest {
        utility: scaled.to_rational(b.value, n),
        max_distortion: frac(b.max_mismatch),
        min_distortion: frac(b.min_mismatch),
        witness: JointType::from_counts(truth.q(), b.plan.iter().map(|&c| c as usize).collect())?,
        unique: b.unique,
    })
}

/// What one source type does against the whole image.
struct Verdict {
    recovered: bool,
    cooperative: bool,
    /// Image classes holding a maximiser.
    maximizing: Vec<usize>,
    /// A single maximising class reached through a unique symbol-wise map, which covers it fully.
    covers: bool,
}

fn verdict(t: &TypeVector, classes: &[TypeVector], scaled: &ScaledUtility, game: &Game) -> Result<Verdict> {
    let n = t.n();
    let q = t.q();
    let bests = classes.iter().map(|c| best_counts(t.counts(), c.counts(), scaled)).collect::<Result<Vec<_>>>()?;
    let top = bests.iter().map(|b| b.value).max().expect("non-empty image");
    let maximizing: Vec<usize> = (0..bests.len()).filter(|&k| bests[k].value == top).collect();
    let worst = maximizing.iter().map(|&k| bests[k].max_mismatch).max().expect("some maximiser");
    let covers = maximizing.len() == 1 && {
        let b = &bests[maximizing[0]];
        b.unique && is_functional(&b.plan, q)
    };
    let cooperative = classes.iter().any(|c| {
        let shared: usize = c.counts().iter().zip(t.counts()).map(|(a, b)| a.min(b)).sum();
        game.within(n - shared, n)
    });
    Ok(Verdict { recovered: game.within(worst, n), cooperative, maximizing, covers })
}

/// Brackets the number of reconstructions reached by the given types.
fn reached<'a>(verdicts: impl Iterator<Item = &'a Verdict>, sizes: &[BigUint]) -> CountEstimate {
    let mut covered = BTreeSet::new();
    let mut forced = BTreeSet::new();
    let mut possible = BTreeSet::new();
    for v in verdicts {
        possible.extend(v.maximizing.iter().copied());
        if v.maximizing.len() == 1 {
            if v.covers {
                covered.insert(v.maximizing[0]);
            } else {
                forced.insert(v.maximizing[0]);
            }
        }
    }
    let lo: BigUint = covered.iter().map(|&k| sizes[k].clone()).sum::<BigUint>() + BigUint::from(forced.difference(&covered).count());
    let hi: BigUint = possible.iter().map(|&k| sizes[k].clone()).sum();
    CountEstimate::bracket(lo, hi)
}

/// Works one source type at a time; needs a union of type classes and pessimistic ties at
/// the recovery threshold, under which recovery is a property of the type alone.
pub struct TypeEngine;

impl Engine for TypeEngine {
    fn name(&self) -> &'static str {
        "type"
    }

    fn evaluate(&self, game: &Game, g: &ReceiverStrategy) -> Result<GameOutcome> {
        game.check(g)?;
        let classes = g
            .classes()
            .ok_or_else(|| Error::Unsupported("the type engine needs an image made of whole type classes".into()))?;
        match &game.tie {
            TieRule::WorstCase(t) if *t == game.threshold => {}
            other => {
                return Err(Error::Unsupported(format!(
                    "the type engine needs worst-case ties at the recovery threshold, got {other}"
                )))
            }
        }
        let (n, q) = (g.n(), g.q());
        let types = enumerate_types(n, q, game.cap.max(DEFAULT_CAP))?;
        let scaled = game.utility.scaled()?;
        let verdicts =
            types.par_iter().map(|t| verdict(t, classes, &scaled, game)).collect::<Result<Vec<_>>>()?;

        let exact = ExactProbability::new(&game.source);
        let mut rec_weight = BigUint::zero();
        let mut coop_weight = BigUint::zero();
        let mut recovered_types = Vec::new();
        for (t, v) in types.iter().zip(&verdicts) {
            if v.recovered || v.cooperative {
                let w = exact.class_weight(t);
                if v.cooperative {
                    coop_weight += &w;
                }
                if v.recovered {
                    rec_weight += w;
                    recovered_types.push(t.clone());
                }
            }
        }
        let sizes: Vec<BigUint> = classes.iter().map(type_class_size).collect();
        Ok(GameOutcome {
            engine: self.name(),
            n,
            recovered_prob: exact.to_probability(rec_weight, n),
            coop_recovered_prob: exact.to_probability(coop_weight, n),
            reconstructions: reached(verdicts.iter().filter(|v| v.recovered), &sizes),
            responses: reached(verdicts.iter(), &sizes),
            recovered_types: Some(recovered_types),
            recovered: None,
            reconstruction_set: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::SequenceEngine;
    use crate::model::{joint_types_with_marginals, Distribution};
    use crate::rational::{int, rat};
    use crate::strategy::{AnchorRule, Image};
    use crate::utility::tests::{example1, example3};
    use crate::utility::{block_utility_joint, gamma_sign, GammaSign};
    use proptest::prelude::*;

    fn tv(c: &[usize]) -> TypeVector {
        TypeVector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn own_class_under_negative_cycles() {
        let u = example1();
        let b = type_level_best(&tv(&[2, 1, 3]), &tv(&[2, 1, 3]), &u).unwrap();
        assert_eq!((b.utility, b.max_distortion.clone(), b.min_distortion), (int(0), int(0), int(0)));
        assert!(b.unique && b.witness.is_diagonal());
    }

    #[test]
    fn one_parameter_family() {
        let u = UtilityMatrix::binary(int(1), int(-2));
        let b = type_level_best(&tv(&[1, 4]), &tv(&[2, 3]), &u).unwrap();
        assert_eq!((b.utility, b.max_distortion, b.min_distortion), (rat(1, 5), rat(1, 5), rat(1, 5)));
        assert_eq!(b.witness.get(0, 1), 1);
        assert_eq!(b.witness.get(1, 0), 0);
    }

    #[test]
    fn zeros_sent_to_symbol_two() {
        let b = type_level_best(&tv(&[12, 12, 0, 12]), &tv(&[0, 12, 12, 12]), &example3()).unwrap();
        assert_eq!(b.utility, int(4));
        assert!(b.unique);
        assert_eq!(b.witness.get(2, 0), 12);
    }

    #[test]
    fn rejects_different_lengths() {
        assert!(type_level_best(&tv(&[1, 4]), &tv(&[1, 3]), &UtilityMatrix::binary(int(1), int(-2))).is_err());
    }

    #[test]
    fn type_engine_requires_threshold_ties() {
        let u = UtilityMatrix::binary(int(1), int(-2));
        let g = ReceiverStrategy::new(4, 2, Image::type_classes(vec![tv(&[1, 3])]), AnchorRule::LexMin).unwrap();
        let game = Game::new(u, Distribution::binary(rat(3, 10)).unwrap(), rat(1, 4), TieRule::LexMin).unwrap();
        assert!(matches!(TypeEngine.evaluate(&game, &g), Err(Error::Unsupported(_))));
    }

    /// Exhaustive joint-type oracle for `type_level_best`.
    fn oracle(t: &TypeVector, c: &TypeVector, u: &UtilityMatrix) -> (Rat, Rat, Rat, usize) {
        let all = joint_types_with_marginals(c.counts(), t.counts(), DEFAULT_CAP).unwrap();
        let vals: Vec<Rat> = all.iter().map(|w| block_utility_joint(w, u).unwrap()).collect();
        let best = vals.iter().max().unwrap().clone();
        let opt: Vec<&JointType> = all.iter().zip(&vals).filter(|(_, v)| **v == best).map(|(w, _)| w).collect();
        let n = t.n() as i64;
        let hi = opt.iter().map(|w| w.mismatches()).max().unwrap() as i64;
        let lo = opt.iter().map(|w| w.mismatches()).min().unwrap() as i64;
        (best, rat(hi, n), rat(lo, n), opt.len())
    }

    fn arb_pair(q: usize) -> impl Strategy<Value = (TypeVector, TypeVector)> {
        (1usize..=7).prop_flat_map(move |n| {
            let t = prop::collection::vec(0usize..=n, q - 1);
            (Just(n), t.clone(), t)
        })
        .prop_map(|(n, a, b)| (compose(n, a), compose(n, b)))
    }

    fn compose(n: usize, mut cuts: Vec<usize>) -> TypeVector {
        cuts.sort();
        let mut out = Vec::new();
        let mut prev = 0;
        for c in cuts {
            out.push(c - prev);
            prev = c;
        }
        out.push(n - prev);
        tv(&out)
    }

    fn arb_case(qmax: usize) -> impl Strategy<Value = (UtilityMatrix, TypeVector, TypeVector)> {
        crate::utility::tests::arb_utility(qmax).prop_flat_map(|u| {
            let q = u.q();
            (Just(u), arb_pair(q)).prop_map(|(u, (t, c))| (u, t, c))
        })
    }

    /// Mostly negative utilities, kept only when every cycle is negative.
    fn arb_negative_case(qmax: usize) -> impl Strategy<Value = (UtilityMatrix, TypeVector, TypeVector)> {
        (2..=qmax)
            .prop_flat_map(|q| {
                prop::collection::vec(-12i64..=3, q * q).prop_map(move |cells| {
                    let rows = (0..q).map(|i| (0..q).map(|j| if i == j { int(0) } else { int(cells[i * q + j]) }).collect()).collect();
                    UtilityMatrix::new(rows).unwrap()
                })
            })
            .prop_filter("needs negative cycles", |u| matches!(gamma_sign(u), GammaSign::Negative))
            .prop_flat_map(|u| {
                let q = u.q();
                (Just(u), arb_pair(q)).prop_map(|(u, (t, c))| (u, t, c))
            })
    }

    proptest! {
        #[test]
        fn matches_joint_type_oracle((u, t, c) in arb_case(3)) {
            let b = type_level_best(&t, &c, &u).unwrap();
            let (best, hi, lo, count) = oracle(&t, &c, &u);
            prop_assert_eq!(&b.utility, &best);
            prop_assert_eq!(&b.max_distortion, &hi);
            prop_assert_eq!(&b.min_distortion, &lo);
            prop_assert_eq!(b.unique, count == 1);
            prop_assert_eq!(block_utility_joint(&b.witness, &u).unwrap(), best);
        }

        #[test]
        fn maximisers_carry_no_positive_cycle((u, t, c) in arb_negative_case(4)) {
            let q = u.q();
            let w = type_level_best(&t, &c, &u).unwrap().witness;
            let adj: Vec<Vec<usize>> = (0..q).map(|i| (0..q).filter(|&j| j != i && w.get(i, j) > 0).collect()).collect();
            prop_assert!(crate::digraph::find_cycle(&adj).is_none(), "cycle in {:?}", w);
        }
    }

    #[test]
    fn engines_agree_on_neighbour_strategies() {
        let u = UtilityMatrix::binary(int(1), int(-2));
        let p = Distribution::binary(rat(3, 10)).unwrap();
        let game = Game::pessimistic(u, p, rat(1, 5)).unwrap();
        for n in 1..=8 {
            for i in 1..=4 {
                let g = crate::strategy::neighbour_strategy(&rat(3, 10), n, i).unwrap();
                let a = SequenceEngine.evaluate(&game, &g).unwrap();
                let b = TypeEngine.evaluate(&game, &g).unwrap();
                assert_eq!(a.recovered_prob, b.recovered_prob, "n={n} i={i}");
                assert_eq!(a.coop_recovered_prob, b.coop_recovered_prob, "n={n} i={i}");
                assert_eq!(a.recovered_types, b.recovered_types, "n={n} i={i}");
                let count = a.reconstructions.exact().unwrap().clone();
                match &b.reconstructions {
                    CountEstimate::Exact(c) => assert_eq!(c, &count),
                    CountEstimate::Interval { lo, hi } => assert!(lo <= &count && &count <= hi),
                }
            }
        }
    }
}
