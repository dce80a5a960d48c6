//! Worst expected distortion among the sender's utility-optimal joint distributions, for a
//! fixed reconstruction marginal and a mutual-information budget.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

use crate::error::{invalid, Error, Result};
use crate::info::entropy;
use crate::model::Distribution;
use crate::rational::{common_denominator, format_rational, format_real, int, rat, scaled_integers, to_f64, Rat};
use crate::transport::{lexicographic_weights, objective, solve_max, Mismatch};
use crate::utility::UtilityMatrix;

/// Bound on `I(X; X̂)`.
#[derive(Clone, Debug, PartialEq)]
pub enum RateBudget {
    Bits(f64),
    /// The entropy of a distribution, compared exactly where possible.
    Entropy(Distribution),
    /// The mutual information of a joint distribution, rows indexed by reconstruction.
    MutualInformationOf(Vec<Vec<Rat>>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// Two symbols, any budget.
    BinaryExact,
    /// Any alphabet, budget at least `min(H(P_X), H(P0))` so the rate constraint is slack.
    MiInactive,
}

#[derive(Clone, Debug)]
pub struct DbarProblem {
    pub source: Distribution,
    /// Marginal of the reconstruction.
    pub output: Distribution,
    pub budget: RateBudget,
    pub utility: UtilityMatrix,
    pub regime: Regime,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Distortion {
    Exact(Rat),
    /// A budget endpoint found by bisection.
    Approximate(f64),
}

impl Distortion {
    pub fn to_f64(&self) -> f64 {
        match self {
            Distortion::Exact(r) => to_f64(r),
            Distortion::Approximate(v) => *v,
        }
    }
}

impl fmt::Display for Distortion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distortion::Exact(r) => f.write_str(&format_rational(r)),
            Distortion::Approximate(v) => write!(f, "~{}", format_real(*v)),
        }
    }
}

/// Mutual information in bits of a joint distribution given as a matrix.
pub fn mutual_information(joint: &[Vec<f64>]) -> f64 {
    let rows: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<f64> = (0..joint.first().map_or(0, Vec::len)).map(|j| joint.iter().map(|r| r[j]).sum()).collect();
    let mut i = 0.0;
    for (a, row) in joint.iter().enumerate() {
        for (b, &w) in row.iter().enumerate() {
            if w > 0.0 {
                i += w * (w / (rows[a] * cols[b])).log2();
            }
        }
    }
    i.max(0.0)
}

/// `max` expected distortion over utility-maximising joints in the feasible set.
pub fn dbar(prob: &DbarProblem) -> Result<Distortion> {
    let q = prob.source.q();
    if prob.output.q() != q || prob.utility.q() != q {
        return Err(Error::Mismatch("source, output and utility alphabets differ".into()));
    }
    if let RateBudget::Bits(r) = prob.budget {
        if !(r >= 0.0) {
            return invalid("rate budget must be non-negative");
        }
    }
    match prob.regime {
        Regime::BinaryExact if q == 2 => binary_exact(prob),
        Regime::BinaryExact => Err(Error::Unsupported(format!("binary_exact regime on {q} symbols"))),
        Regime::MiInactive => {
            if !budget_slack(prob)? {
                return Err(Error::Unsupported("mi_inactive regime needs a budget of at least min(H(P_X), H(P0))".into()));
            }
            transport_worst(prob)
        }
    }
}

/// Smallest [`dbar`] over candidate output marginals, with the position of the first minimiser.
pub fn dbar_over(
    source: &Distribution,
    candidates: &[Distribution],
    budget: &RateBudget,
    utility: &UtilityMatrix,
    regime: Regime,
) -> Result<(usize, Distortion)> {
    let mut best: Option<(usize, Distortion)> = None;
    for (k, output) in candidates.iter().enumerate() {
        let prob = DbarProblem {
            source: source.clone(),
            output: output.clone(),
            budget: budget.clone(),
            utility: utility.clone(),
            regime,
        };
        let d = dbar(&prob)?;
        let smaller = match (&best, &d) {
            (None, _) => true,
            (Some((_, Distortion::Exact(a))), Distortion::Exact(b)) => b < a,
            (Some((_, a)), b) => b.to_f64() < a.to_f64(),
        };
        if smaller {
            best = Some((k, d));
        }
    }
    best.ok_or_else(|| Error::Invalid("no candidate output marginals".into()))
}

/// Output marginal and joint of the binary Hamming test channel at level `d`, for `0 < d <= p <= 1/2`.
pub fn binary_test_channel(p: &Rat, d: &Rat) -> Result<(Distribution, Vec<Vec<Rat>>)> {
    if !(d.is_positive() && d <= p && *p <= rat(1, 2)) {
        return invalid("test channel needs 0 < d <= p <= 1/2");
    }
    let one = int(1);
    let star = (p - d) / (&one - int(2) * d);
    let joint = vec![
        vec![&star * (&one - d), &star * d],
        vec![p - &star * (&one - d), &one - p - &star * d],
    ];
    Ok((Distribution::binary(star)?, joint))
}

fn joint_f64(joint: &[Vec<Rat>]) -> Vec<Vec<f64>> {
    joint.iter().map(|r| r.iter().map(to_f64).collect()).collect()
}

fn marginals(joint: &[Vec<Rat>]) -> (Vec<Rat>, Vec<Rat>) {
    let q = joint.len();
    let rows = joint.iter().map(|r| r.iter().fold(int(0), |a, b| a + b)).collect();
    let cols = (0..q).map(|j| joint.iter().fold(int(0), |a, r| a + &r[j])).collect();
    (rows, cols)
}

fn check_joint(joint: &[Vec<Rat>], q: usize) -> Result<()> {
    if joint.len() != q || joint.iter().any(|r| r.len() != q) {
        return Err(Error::Mismatch(format!("budget joint is not {q}x{q}")));
    }
    if joint.iter().flatten().any(Signed::is_negative) || joint.iter().flatten().fold(int(0), |a, b| a + b) != int(1) {
        return invalid("budget joint is not a distribution");
    }
    Ok(())
}

fn same_masses(a: &Distribution, b: &Distribution) -> bool {
    a.sorted_desc() == b.sorted_desc()
}

/// Whether the budget is at least `min(H(P_X), H(P0))`.
fn budget_slack(prob: &DbarProblem) -> Result<bool> {
    let limit = entropy(&prob.source).min(entropy(&prob.output));
    Ok(match &prob.budget {
        RateBudget::Bits(r) => *r >= limit,
        RateBudget::Entropy(dist) => {
            if dist.q() == 2 && prob.source.q() == 2 {
                // Binary entropy is ordered by distance from one half.
                let gap = |p: &Distribution| (p.get(0) - rat(1, 2)).abs();
                gap(dist) <= gap(&prob.source) || gap(dist) <= gap(&prob.output)
            } else {
                same_masses(dist, &prob.source) || same_masses(dist, &prob.output) || entropy(dist) >= limit
            }
        }
        RateBudget::MutualInformationOf(joint) => {
            check_joint(joint, prob.source.q())?;
            mutual_information(&joint_f64(joint)) >= limit
        }
    })
}

/// Transportation over the common-denominator grid, then the most-mismatched optimal plan.
fn transport_worst(prob: &DbarProblem) -> Result<Distortion> {
    let q = prob.source.q();
    let scale = common_denominator(prob.source.probs().iter().chain(prob.output.probs()));
    let to_u64 = |v: Vec<BigInt>| -> Result<Vec<u64>> {
        v.iter().map(|x| x.to_u64().ok_or(Error::Overflow("marginal grid"))).collect()
    };
    let rows = to_u64(scaled_integers(prob.output.probs(), &scale))?;
    let cols = to_u64(scaled_integers(prob.source.probs(), &scale))?;
    let total: u64 = cols.iter().sum();
    let weights = prob.utility.scaled()?.weights;
    let worst = solve_max(&rows, &cols, &lexicographic_weights(&weights, q, total, Mismatch::Maximize)?)?;
    debug_assert_eq!(objective(&worst, &weights), objective(&solve_max(&rows, &cols, &weights)?, &weights));
    let off: u64 = (0..q * q).filter(|k| k / q != k % q).map(|k| worst[k]).sum();
    Ok(Distortion::Exact(Rat::new(BigInt::from(off), BigInt::from(total))))
}

/// One-parameter family `W(t) = [[p0 - t, t], [p - p0 + t, 1 - p - t]]`.
struct BinaryFamily {
    p: Rat,
    p0: Rat,
    lo: Rat,
    hi: Rat,
}

impl BinaryFamily {
    fn info(&self, t: f64) -> f64 {
        let (p, p0) = (to_f64(&self.p), to_f64(&self.p0));
        mutual_information(&[vec![p0 - t, t], vec![p - p0 + t, 1.0 - p - t]])
    }

    /// Mass at which the two coordinates are independent, where information vanishes.
    fn independent(&self) -> Rat {
        &self.p0 * (int(1) - &self.p)
    }

    fn distortion(&self, t: &Rat) -> Rat {
        &self.p - &self.p0 + int(2) * t
    }

    /// Point between `from` and `towards` where information falls to `level`, by bisection.
    fn crossing(&self, from: f64, towards: f64, level: f64) -> f64 {
        let (mut outside, mut inside) = (from, towards);
        for _ in 0..200 {
            let mid = 0.5 * (outside + inside);
            if self.info(mid) > level {
                outside = mid;
            } else {
                inside = mid;
            }
        }
        inside
    }
}

fn binary_exact(prob: &DbarProblem) -> Result<Distortion> {
    let p = prob.source.get(0).clone();
    let p0 = prob.output.get(0).clone();
    let zero = int(0);
    let one = int(1);
    let fam = BinaryFamily {
        lo: (&p0 - &p).max(zero.clone()),
        hi: p0.clone().min(&one - &p),
        p,
        p0,
    };
    let u = &prob.utility;
    // Utility is affine in t with slope U(0,1) + U(1,0); on a flat slope every t is optimal.
    let take_low = (u.get(0, 1) + u.get(1, 0)).is_negative();
    let end = if take_low { fam.lo.clone() } else { fam.hi.clone() };
    if fam.lo == fam.hi || budget_slack(prob)? {
        return Ok(Distortion::Exact(fam.distortion(&end)));
    }
    let level = match &prob.budget {
        RateBudget::Bits(r) => *r,
        RateBudget::Entropy(dist) => entropy(dist),
        RateBudget::MutualInformationOf(joint) => {
            let (rows, cols) = marginals(joint);
            if rows.as_slice() == prob.output.probs() && cols.as_slice() == prob.source.probs() {
                // The witness sits exactly on the boundary of the level set.
                let witness = joint[0][1].clone();
                let ind = fam.independent();
                if (witness <= ind) == take_low {
                    return Ok(Distortion::Exact(fam.distortion(&witness)));
                }
            }
            mutual_information(&joint_f64(joint))
        }
    };
    if fam.info(to_f64(&end)) <= level {
        return Ok(Distortion::Exact(fam.distortion(&end)));
    }
    let t = fam.crossing(to_f64(&end), to_f64(&fam.independent()), level);
    Ok(Distortion::Approximate(to_f64(&fam.p) - to_f64(&fam.p0) + 2.0 * t))
}
