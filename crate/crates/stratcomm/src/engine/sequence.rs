use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::Zero;
use rayon::prelude::*;

use super::{within, CountEstimate, Engine, Game, GameOutcome};
use crate::error::{Error, Result};
use crate::model::{empirical_type, sequence_count, ExactProbability, Sequence, TypeVector, DEFAULT_CAP};
use crate::rational::Rat;
use crate::strategy::{ReceiverStrategy, TieRule};
use crate::utility::{ScaledUtility, UtilityMatrix};

/// The sender's choice for one block.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Response {
    /// Position of the chosen reconstruction in the sorted image.
    pub index: usize,
    pub mismatches: usize,
    /// Smallest mismatch count to any image member.
    pub nearest: usize,
}

pub(crate) struct Responder<'a> {
    members: &'a [Sequence],
    scaled: ScaledUtility,
    far_threshold: Option<Rat>,
}

impl<'a> Responder<'a> {
    pub fn new(members: &'a [Sequence], utility: &UtilityMatrix, tie: &TieRule) -> Result<Self> {
        let far_threshold = match tie {
            TieRule::WorstCase(t) => Some(t.clone()),
            TieRule::LexMin => None,
        };
        Ok(Self { members, scaled: utility.scaled()?, far_threshold })
    }

    pub fn respond(&self, x: &[u8]) -> Response {
        let n = x.len();
        let far = |m: usize| self.far_threshold.as_ref().is_some_and(|t| !within(m, n, t));
        let mut best = i128::MIN;
        let mut chosen = (0usize, 0usize);
        let mut found_far = false;
        let mut nearest = usize::MAX;
        for (k, y) in self.members.iter().enumerate() {
            let mut value = 0i128;
            let mut m = 0usize;
            for (&a, &b) in y.symbols().iter().zip(x) {
                value += self.scaled.get(a as usize, b as usize);
                m += usize::from(a != b);
            }
            nearest = nearest.min(m);
            if value > best {
                best = value;
                chosen = (k, m);
                found_far = far(m);
            } else if value == best && !found_far && far(m) {
                chosen = (k, m);
                found_far = true;
            }
        }
        Response { index: chosen.0, mismatches: chosen.1, nearest }
    }
}

/// The sender's reply to `x` under the decoder `g`, searched over the image.
pub fn best_response(g: &ReceiverStrategy, x: &Sequence, u: &UtilityMatrix, tie: &TieRule) -> Result<Sequence> {
    if x.len() != g.n() || x.q() != g.q() || u.q() != g.q() {
        return Err(Error::Mismatch(format!("block {x} against a length-{} decoder over {} symbols", g.n(), g.q())));
    }
    let members = g.members(DEFAULT_CAP)?;
    let r = Responder::new(&members, u, tie)?.respond(x.symbols());
    Ok(members[r.index].clone())
}

/// Walks every source block; exact for any image and any tie rule.
pub struct SequenceEngine;

impl Engine for SequenceEngine {
    fn name(&self) -> &'static str {
        "sequence"
    }

    fn evaluate(&self, game: &Game, g: &ReceiverStrategy) -> Result<GameOutcome> {
        game.check(g)?;
        let (n, q) = (g.n(), g.q());
        let total = sequence_count(n, q).filter(|&c| c <= game.cap).ok_or_else(|| Error::TooLarge {
            what: "sequence space (use the type engine)",
            size: format!("{q}^{n}"),
            cap: game.cap,
        })?;
        let members = g.members(game.cap)?;
        let responder = Responder::new(&members, &game.utility, &game.tie)?;
        let responses: Vec<Response> = (0..total)
            .into_par_iter()
            .map(|i| responder.respond(Sequence::from_index(i, n, q).symbols()))
            .collect();

        // Per type: class size, recovered count, cooperative count.
        let mut per_type: BTreeMap<TypeVector, [u64; 3]> = BTreeMap::new();
        let mut reached = vec![false; members.len()];
        let mut used = vec![false; members.len()];
        let mut recovered = Vec::new();
        for (i, r) in responses.iter().enumerate() {
            let t = empirical_type(&Sequence::from_index(i as u64, n, q));
            let entry = per_type.entry(t).or_insert([0; 3]);
            entry[0] += 1;
            reached[r.index] = true;
            if game.within(r.mismatches, n) {
                entry[1] += 1;
                used[r.index] = true;
                recovered.push(i as u64);
            }
            if game.within(r.nearest, n) {
                entry[2] += 1;
            }
        }

        let exact = ExactProbability::new(&game.source);
        let mut rec_weight = BigUint::zero();
        let mut coop_weight = BigUint::zero();
        let mut class_constant = true;
        let mut recovered_types = Vec::new();
        for (t, [size, rec, coop]) in &per_type {
            let w = exact.sequence_weight(t);
            rec_weight += &w * BigUint::from(*rec);
            coop_weight += &w * BigUint::from(*coop);
            if *rec == *size {
                recovered_types.push(t.clone());
            } else if *rec != 0 {
                class_constant = false;
            }
        }
        let count = |flags: &[bool]| BigUint::from(flags.iter().filter(|&&f| f).count());
        let reconstruction_set = members.iter().zip(&used).filter(|(_, &u)| u).map(|(s, _)| s.index()).collect();
        Ok(GameOutcome {
            engine: self.name(),
            n,
            recovered_prob: exact.to_probability(rec_weight, n),
            coop_recovered_prob: exact.to_probability(coop_weight, n),
            reconstructions: CountEstimate::Exact(count(&used)),
            responses: CountEstimate::Exact(count(&reached)),
            recovered_types: class_constant.then_some(recovered_types),
            recovered: Some(recovered),
            reconstruction_set: Some(reconstruction_set),
        })
    }
}
