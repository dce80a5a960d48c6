//! Endpoints of the achievable rate region, as far as single-letter results pin them down.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::{invalid, Error, Result};
use crate::info::{binary_entropy, entropy, rd_binary, rd_blahut_arimoto};
use crate::model::Distribution;
use crate::rational::{int, rat, to_f64, Rat};
use crate::utility::{gamma_sign, GammaSign, UtilityMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Emptiness {
    Empty,
    Nonempty,
    /// Every cycle is weakly negative and some cycle sums to zero.
    UnknownGammaZero,
    /// Lossy recovery with a positive cycle, where no emptiness result applies.
    Undetermined,
}

impl Emptiness {
    pub fn label(&self) -> &'static str {
        match self {
            Emptiness::Empty => "empty",
            Emptiness::Nonempty => "nonempty",
            Emptiness::UnknownGammaZero => "unknown_gamma_zero",
            Emptiness::Undetermined => "undetermined",
        }
    }
}

/// What is known about one endpoint, in bits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bound {
    Exact(f64),
    AtMost(f64),
    AtLeast(f64),
    Between(f64, f64),
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use crate::rational::format_real as r;
        match self {
            Bound::Exact(v) => write!(f, "= {}", r(*v)),
            Bound::AtMost(v) => write!(f, "<= {}", r(*v)),
            Bound::AtLeast(v) => write!(f, ">= {}", r(*v)),
            Bound::Between(a, b) => write!(f, "in [{}, {}]", r(*a), r(*b)),
        }
    }
}

/// A bound together with the result it comes from.
#[derive(Clone, Debug, PartialEq)]
pub struct Endpoint {
    pub bound: Bound,
    pub clause: &'static str,
}

impl Endpoint {
    fn new(bound: Bound, clause: &'static str) -> Option<Self> {
        Some(Self { bound, clause })
    }
}

/// Binary lossless strong converse: error tends to one.
#[derive(Clone, Debug, PartialEq)]
pub enum StrongConverse {
    /// For every decoder sequence.
    Unconditional,
    /// For decoders whose image rate exceeds `rate`, stated only when
    /// `U(1,0) = -b` and `U(0,1) = a` with `a <= b` the entry magnitudes.
    AboveRate { rate: f64, precondition_holds: bool },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegionReport {
    pub emptiness: Emptiness,
    pub gamma_sign: &'static str,
    pub r_inf: Option<Endpoint>,
    pub r_sup: Option<Endpoint>,
    pub capacity: f64,
    pub strong_converse: Option<StrongConverse>,
    /// Binary sources with `P(0) > 1/2` are analysed with the symbols swapped.
    pub relabelled: bool,
}

impl RegionReport {
    fn new(emptiness: Emptiness, sign: &GammaSign, q: usize) -> Self {
        Self {
            emptiness,
            gamma_sign: sign.label(),
            r_inf: None,
            r_sup: None,
            capacity: (q as f64).log2(),
            strong_converse: None,
            relabelled: false,
        }
    }
}

/// Classifies the region at distortion level `d` from the utility and source alone.
pub fn classify_region(u: &UtilityMatrix, p: &Distribution, d: &Rat) -> Result<RegionReport> {
    if u.q() != p.q() {
        return Err(Error::Mismatch(format!("{}-symbol utility with {}-symbol source", u.q(), p.q())));
    }
    if d.is_negative() || *d >= int(1) {
        return invalid("distortion level must lie in [0, 1)");
    }
    if u.q() == 2 {
        classify_binary(u, p, d)
    } else {
        classify_general(u, p, d)
    }
}

fn classify_binary(u: &UtilityMatrix, p: &Distribution, d: &Rat) -> Result<RegionReport> {
    let half = rat(1, 2);
    let relabelled = *p.get(0) > half;
    let (u, p0) = if relabelled {
        (u.swapped_binary().expect("binary"), int(1) - p.get(0))
    } else {
        (u.clone(), p.get(0).clone())
    };
    let (u01, u10) = (u.get(0, 1).clone(), u.get(1, 0).clone());
    let sign = gamma_sign(&u);
    let negative_sum = (&u01 + &u10).is_negative();
    let both_negative = u01.is_negative() && u10.is_negative();
    let h = binary_entropy(to_f64(&p0));
    let mut r;

    if d.is_zero() {
        if !negative_sum {
            r = RegionReport::new(Emptiness::Empty, &sign, 2);
            r.strong_converse = Some(StrongConverse::Unconditional);
        } else {
            r = RegionReport::new(Emptiness::Nonempty, &sign, 2);
            r.r_inf = Endpoint::new(Bound::Exact(h), "binary lossless: infimum is the source entropy");
            if both_negative {
                r.r_sup = Endpoint::new(Bound::Exact(1.0), "binary lossless, both misreports costly: full region");
            } else {
                let a = u01.abs().min(u10.abs());
                let b = u01.abs().max(u10.abs());
                let arg = if a.is_zero() { half.clone() } else { (&b * &p0 / &a).min(half.clone()) };
                let rate = binary_entropy(to_f64(&arg));
                r.r_sup = Endpoint::new(Bound::AtMost(rate), "binary lossless, one misreport profitable: entropy of scaled bias");
                let precondition_holds = u10 == -b.clone() && u01 == a;
                r.strong_converse = Some(StrongConverse::AboveRate { rate, precondition_holds });
            }
        }
    } else if *d >= p0 {
        // A one-point image already meets the distortion level on typical blocks.
        r = RegionReport::new(Emptiness::Nonempty, &sign, 2);
        r.r_inf = Endpoint::new(Bound::Exact(0.0), "binary lossy, level at least the minority mass: zero rate");
        if negative_sum {
            r.r_sup = Endpoint::new(Bound::Exact(1.0), "binary lossy, level at least the minority mass: full rate");
        }
    } else if !negative_sum {
        r = RegionReport::new(Emptiness::Empty, &sign, 2);
    } else {
        r = RegionReport::new(Emptiness::Nonempty, &sign, 2);
        r.r_inf = Endpoint::new(Bound::Exact(rd_binary(&p0, d)?), "binary lossy: infimum is the rate-distortion function");
        let upper = &p0 + d;
        r.r_sup = if both_negative {
            Endpoint::new(Bound::Exact(1.0), "binary lossy, both misreports costly: full region")
        } else if upper < half {
            Endpoint::new(Bound::Between(binary_entropy(to_f64(&upper)), 1.0), "binary lossy: supremum between entropy of shifted bias and one")
        } else {
            Endpoint::new(Bound::Exact(1.0), "binary lossy, shifted bias past one half: full rate")
        };
    }
    r.relabelled = relabelled;
    Ok(r)
}

fn classify_general(u: &UtilityMatrix, p: &Distribution, d: &Rat) -> Result<RegionReport> {
    let q = u.q();
    let sign = gamma_sign(u);
    let cap = (q as f64).log2();
    let max_mass = p.probs().iter().max().expect("non-empty").clone();
    if d.is_zero() {
        return Ok(match sign {
            GammaSign::Positive { .. } => RegionReport::new(Emptiness::Empty, &sign, q),
            GammaSign::Zero { .. } => RegionReport::new(Emptiness::UnknownGammaZero, &sign, q),
            GammaSign::Negative => {
                let mut r = RegionReport::new(Emptiness::Nonempty, &sign, q);
                r.r_inf = Endpoint::new(Bound::Exact(entropy(p)), "lossless, negative cycles: infimum is the source entropy");
                if u.all_off_diagonal_negative() {
                    r.r_sup = Endpoint::new(Bound::Exact(cap), "lossless, every misreport costly: full region");
                }
                r
            }
        });
    }
    if *d >= int(1) - &max_mass {
        let mut r = RegionReport::new(Emptiness::Nonempty, &sign, q);
        r.r_inf = Endpoint::new(Bound::Exact(0.0), "lossy, level at least the non-modal mass: zero rate");
        return Ok(r);
    }
    Ok(match sign {
        GammaSign::Zero { .. } => RegionReport::new(Emptiness::UnknownGammaZero, &sign, q),
        GammaSign::Positive { .. } => RegionReport::new(Emptiness::Undetermined, &sign, q),
        GammaSign::Negative => {
            let mut r = RegionReport::new(Emptiness::Nonempty, &sign, q);
            if u.constant_negative().is_some() {
                let rd = rd_blahut_arimoto(p, d, 1e-9)?;
                r.r_inf = Endpoint::new(Bound::Exact(rd), "lossy, uniform misreport cost: infimum is the rate-distortion function");
                r.r_sup = Endpoint::new(Bound::Exact(cap), "lossy, uniform misreport cost: full region");
            } else {
                let (bits, _) = pprime_entropy_bound(p, d)?;
                r.r_inf = Endpoint::new(Bound::AtMost(bits), "lossy, negative cycles: at most the least perturbed entropy");
            }
            r
        }
    })
}

/// Least entropy over sources obtained by moving `d/(q-1)` of mass between two symbols.
///
/// Entropy is concave, so over each pairwise segment the minimum sits at an end; moves that
/// would overdraw the giving symbol are clipped to its whole mass. Ties between candidates
/// with the same sorted masses go to the smallest receiving symbol, then the smallest giver.
pub fn pprime_entropy_bound(p: &Distribution, d: &Rat) -> Result<(f64, Distribution)> {
    let q = p.q();
    if d.is_negative() || *d > int(1) {
        return invalid("distortion level must lie in [0, 1]");
    }
    let step = d / int(q as i64 - 1);
    let mut best = (entropy(p), p.clone(), p.sorted_desc());
    if d.is_zero() {
        return Ok((best.0, best.1));
    }
    let mut first = true;
    for recv in 0..q {
        for give in 0..q {
            if give == recv {
                continue;
            }
            let moved = step.clone().min(p.get(give).clone());
            let mut probs = p.probs().to_vec();
            probs[give] -= &moved;
            probs[recv] += &moved;
            let cand = Distribution::new(probs)?;
            let h = entropy(&cand);
            let sorted = cand.sorted_desc();
            let better = if sorted == best.2 {
                false
            } else {
                h.partial_cmp(&best.0) == Some(Ordering::Less)
            };
            if first || better {
                best = (h, cand, sorted);
                first = false;
            }
        }
    }
    Ok((best.0, best.1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::utility::tests::{example1, matrix};

    fn binary(p: Rat) -> Distribution {
        Distribution::binary(p).unwrap()
    }

    #[test]
    fn binary_lossless() {
        let r = classify_region(&UtilityMatrix::binary(int(1), int(-1)), &binary(rat(3, 10)), &int(0)).unwrap();
        assert_eq!(r.emptiness, Emptiness::Empty);
        assert_eq!(r.strong_converse, Some(StrongConverse::Unconditional));

        let r = classify_region(&UtilityMatrix::binary(int(-2), int(1)), &binary(rat(3, 10)), &int(0)).unwrap();
        assert_eq!(r.emptiness, Emptiness::Nonempty);
        let Some(Endpoint { bound: Bound::Exact(h), .. }) = r.r_inf else { panic!() };
        assert!((h - 0.881291).abs() < 1e-6);
        assert_eq!(r.r_sup.unwrap().bound, Bound::AtMost(1.0));
        let Some(StrongConverse::AboveRate { precondition_holds, .. }) = r.strong_converse else { panic!() };
        assert!(!precondition_holds);

        let r = classify_region(&UtilityMatrix::binary(int(-1), int(-1)), &binary(rat(3, 10)), &int(0)).unwrap();
        assert_eq!(r.r_sup.unwrap().bound, Bound::Exact(1.0));
        assert_eq!(r.strong_converse, None);
    }

    #[test]
    fn binary_lossless_scaled_bias() {
        // a = 1, b = 2, p = 1/5: bound H(2/5), and the conditional converse applies.
        let r = classify_region(&UtilityMatrix::binary(int(1), int(-2)), &binary(rat(1, 5)), &int(0)).unwrap();
        let Some(Endpoint { bound: Bound::AtMost(v), .. }) = r.r_sup else { panic!() };
        assert!((v - binary_entropy(0.4)).abs() < 1e-15);
        assert_eq!(r.strong_converse, Some(StrongConverse::AboveRate { rate: v, precondition_holds: true }));
        let r = classify_region(&UtilityMatrix::binary(int(0), int(-2)), &binary(rat(1, 5)), &int(0)).unwrap();
        assert_eq!(r.r_sup.unwrap().bound, Bound::AtMost(1.0));
    }

    #[test]
    fn binary_lossy() {
        let u = UtilityMatrix::binary(int(1), int(-2));
        let r = classify_region(&u, &binary(rat(3, 10)), &rat(1, 10)).unwrap();
        let Some(Endpoint { bound: Bound::Exact(v), .. }) = r.r_inf else { panic!() };
        assert!((v - (binary_entropy(0.3) - binary_entropy(0.1))).abs() < 1e-12);
        let Some(Endpoint { bound: Bound::Between(lo, hi), .. }) = r.r_sup else { panic!() };
        assert!((lo - binary_entropy(0.4)).abs() < 1e-12 && hi == 1.0);
        let r = classify_region(&u, &binary(rat(3, 10)), &rat(1, 5)).unwrap();
        assert_eq!(r.r_sup.unwrap().bound, Bound::Exact(1.0));
        let r = classify_region(&UtilityMatrix::binary(int(1), int(-1)), &binary(rat(3, 10)), &rat(1, 10)).unwrap();
        assert_eq!(r.emptiness, Emptiness::Empty);
        let r = classify_region(&UtilityMatrix::binary(int(1), int(-1)), &binary(rat(3, 10)), &rat(3, 10)).unwrap();
        assert_eq!(r.emptiness, Emptiness::Nonempty);
        assert_eq!(r.r_inf.unwrap().bound, Bound::Exact(0.0));
        assert!(classify_region(&u, &binary(rat(3, 10)), &int(1)).is_err());
    }

    #[test]
    fn binary_relabels_majority_zero() {
        let u = UtilityMatrix::binary(int(1), int(-2));
        let r = classify_region(&u, &binary(rat(7, 10)), &rat(1, 10)).unwrap();
        assert!(r.relabelled);
        let Some(Endpoint { bound: Bound::Exact(v), .. }) = r.r_inf else { panic!() };
        assert!((v - (binary_entropy(0.3) - binary_entropy(0.1))).abs() < 1e-12);
    }

    #[test]
    fn emptiness_tracks_the_cycle_sum() {
        for a in -3..=3 {
            for b in -3..=3 {
                let u = UtilityMatrix::binary(int(a), int(b));
                let r = classify_region(&u, &binary(rat(1, 3)), &int(0)).unwrap();
                assert_eq!(r.emptiness == Emptiness::Empty, a + b >= 0);
            }
        }
    }

    #[test]
    fn general_alphabet() {
        let p = Distribution::new(vec![rat(1, 2), rat(1, 3), rat(1, 6)]).unwrap();
        let r = classify_region(&example1(), &p, &int(0)).unwrap();
        assert_eq!(r.emptiness, Emptiness::Nonempty);
        assert_eq!(r.r_inf.unwrap().bound, Bound::Exact(entropy(&p)));
        assert!(r.r_sup.is_none());

        let zero = matrix(&[&[0, 0, 0], &[0, 0, 0], &[0, 0, 0]]);
        assert_eq!(classify_region(&zero, &p, &int(0)).unwrap().emptiness, Emptiness::UnknownGammaZero);
        let pos = matrix(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 0]]);
        assert_eq!(classify_region(&pos, &p, &int(0)).unwrap().emptiness, Emptiness::Empty);
        assert_eq!(classify_region(&pos, &p, &rat(1, 10)).unwrap().emptiness, Emptiness::Undetermined);

        let neg = matrix(&[&[0, -1, -1], &[-1, 0, -1], &[-1, -1, 0]]);
        let r = classify_region(&neg, &p, &int(0)).unwrap();
        assert_eq!(r.r_sup.unwrap().bound, Bound::Exact(3f64.log2()));
        let r = classify_region(&neg, &Distribution::uniform(3).unwrap(), &rat(1, 4)).unwrap();
        let Some(Endpoint { bound: Bound::Exact(v), .. }) = r.r_inf else { panic!() };
        let expected = 3f64.log2() - binary_entropy(0.25) - 0.25;
        assert!((v - expected).abs() < 1e-6);

        let r = classify_region(&example1(), &p, &rat(1, 10)).unwrap();
        assert!(matches!(r.r_inf.unwrap().bound, Bound::AtMost(_)));
    }

    #[test]
    fn pprime_examples() {
        let p = binary(rat(3, 10));
        let (h, w) = pprime_entropy_bound(&p, &int(0)).unwrap();
        assert_eq!((h, &w), (entropy(&p), &p));
        let (h, w) = pprime_entropy_bound(&p, &rat(1, 10)).unwrap();
        assert_eq!(w, binary(rat(1, 5)));
        assert!((h - 0.7219281).abs() < 1e-6);

        let u = Distribution::uniform(3).unwrap();
        let (h, w) = pprime_entropy_bound(&u, &rat(1, 5)).unwrap();
        assert!(h < 3f64.log2());
        assert_eq!(w, Distribution::new(vec![rat(13, 30), rat(7, 30), rat(1, 3)]).unwrap());
    }

    #[test]
    fn pprime_bound_dominates_rate_distortion() {
        for p in 1..=5 {
            for d in 1..(p * 10) {
                let pr = rat(p, 10);
                let dr = rat(d, 100);
                let (h, _) = pprime_entropy_bound(&binary(pr.clone()), &dr).unwrap();
                assert!(h >= rd_binary(&pr, &dr).unwrap() - 1e-12, "p={p}/10 d={d}/100");
            }
        }
    }
}
