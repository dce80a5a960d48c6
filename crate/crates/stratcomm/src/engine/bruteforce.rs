use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use super::within;
use crate::error::{Error, Result};
use crate::model::{all_sequences, empirical_type, sequence_count, Distribution, ExactProbability, Sequence};
use crate::rational::Rat;
use crate::strategy::{AnchorRule, Image, ReceiverStrategy};
use crate::utility::UtilityMatrix;

/// Largest number of source blocks the exhaustive search accepts.
pub const BRUTE_FORCE_POINTS: u64 = 16;

#[derive(Clone, Debug)]
pub struct BruteForceResult {
    /// Smallest worst-case error probability over all decoders.
    pub error: Rat,
    pub strategy: ReceiverStrategy,
    pub images_searched: u64,
}

/// Minimum over every non-empty image of the pessimistic error probability.
///
/// Anchors never matter because the sender only ever reports image members. Ties are
/// broken against the receiver, so a block counts as lost as soon as any maximiser lies
/// beyond `d`. Among optimal images the one with the smallest bitmask is returned.
pub fn brute_force_min_error(n: usize, p: &Distribution, u: &UtilityMatrix, d: &Rat) -> Result<BruteForceResult> {
    let q = p.q();
    if u.q() != q {
        return Err(Error::Mismatch(format!("{}-symbol utility with {q}-symbol source", u.q())));
    }
    let points = sequence_count(n, q).filter(|&c| c <= BRUTE_FORCE_POINTS).ok_or_else(|| Error::TooLarge {
        what: "exhaustive decoder search",
        size: format!("2^({q}^{n})"),
        cap: BRUTE_FORCE_POINTS,
    })? as usize;
    let blocks: Vec<Sequence> = all_sequences(n, q, BRUTE_FORCE_POINTS)?.collect();
    let exact = ExactProbability::new(p);
    exact.denominator(n).to_u128().ok_or(Error::Overflow("probability denominator"))?;
    let weights: Vec<u128> = blocks
        .iter()
        .map(|x| exact.sequence_weight(&empirical_type(x)).to_u128().ok_or(Error::Overflow("sequence weight")))
        .collect::<Result<_>>()?;
    let scaled = u.scaled()?;
    // Per (truth, reply): scaled utility and whether the reply is beyond the threshold.
    let table: Vec<(i128, bool)> = blocks
        .iter()
        .flat_map(|x| {
            blocks.iter().map(|y| {
                let m = y.symbols().iter().zip(x.symbols()).filter(|(a, b)| a != b).count();
                (scaled.block_sum(y.symbols(), x.symbols()), !within(m, n, d))
            })
        })
        .collect();

    let subsets = (1u64 << points) - 1;
    let (err, mask) = (1..=subsets)
        .into_par_iter()
        .map(|mask| {
            let mut err = 0u128;
            for x in 0..points {
                let row = &table[x * points..(x + 1) * points];
                let mut best = i128::MIN;
                let mut lost = false;
                for (y, &(value, far)) in row.iter().enumerate() {
                    if mask >> y & 1 == 0 {
                        continue;
                    }
                    if value > best {
                        best = value;
                        lost = far;
                    } else if value == best {
                        lost |= far;
                    }
                }
                if lost {
                    err += weights[x];
                }
            }
            (err, mask)
        })
        .min()
        .expect("at least one image");

    let members: Vec<Sequence> = (0..points).filter(|&y| mask >> y & 1 == 1).map(|y| blocks[y].clone()).collect();
    let strategy = ReceiverStrategy::new(n, q, Image::explicit(members), AnchorRule::LexMin)?;
    Ok(BruteForceResult {
        error: BigRational::new(BigInt::from(err), BigInt::from(BigUint::from(exact.denominator(n)))),
        strategy,
        images_searched: subsets,
    })
}
