//! Sender graphs on `X^n`, exposed as pair predicates and type-level degree counts.

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::model::{joint_type, joint_types_with_marginals, multinomial, JointType, Sequence, TypeVector};
use crate::rational::Rat;
use crate::utility::{ScaledUtility, UtilityMatrix};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphVariant {
    /// `x ~ y` when either sequence weakly prefers reporting the other.
    Undirected,
    /// `x -> y` when `U_n(y, x) > delta * U^max`.
    Directed { delta: Rat },
}

#[derive(Clone, Debug)]
pub struct GraphSpec {
    pub utility: UtilityMatrix,
    pub variant: GraphVariant,
}

impl GraphSpec {
    pub fn new(utility: UtilityMatrix, variant: GraphVariant) -> Result<Self> {
        if let GraphVariant::Directed { delta } = &variant {
            if delta.is_negative() {
                return invalid("delta must be non-negative");
            }
        }
        Ok(Self { utility, variant })
    }

    fn predicate(&self) -> Result<EdgeRule> {
        let scaled = self.utility.scaled()?;
        let threshold = match &self.variant {
            GraphVariant::Undirected => None,
            GraphVariant::Directed { delta } => {
                let umax = scaled.weights.iter().copied().max().unwrap_or(0);
                let num = delta.numer().to_i128().ok_or(Error::Overflow("delta"))?;
                let den = delta.denom().to_i128().ok_or(Error::Overflow("delta"))?;
                Some((num.checked_mul(umax).ok_or(Error::Overflow("delta"))?, den))
            }
        };
        Ok(EdgeRule { scaled, threshold })
    }
}

struct EdgeRule {
    scaled: ScaledUtility,
    /// `delta * U^max * scale` as `num / den`; `None` for the undirected graph.
    threshold: Option<(i128, i128)>,
}

impl EdgeRule {
    /// Edge test from the joint type of `(y, x)`: rows are `y`, columns are `x`.
    fn holds(&self, w: &JointType) -> bool {
        let q = w.q();
        let forward = self.scaled.joint_sum(w);
        match self.threshold {
            None => {
                if w.is_diagonal() {
                    return false;
                }
                let backward: i128 = (0..q)
                    .flat_map(|i| (0..q).map(move |j| (i, j)))
                    .map(|(i, j)| w.get(i, j) as i128 * self.scaled.get(j, i))
                    .sum();
                forward >= 0 || backward >= 0
            }
            Some((num, den)) => forward * den > num * w.n() as i128,
        }
    }
}

/// Whether `x` and `y` are joined in the undirected sender graph.
pub fn adjacent(x: &Sequence, y: &Sequence, u: &UtilityMatrix) -> Result<bool> {
    if x == y {
        return invalid("the sender graph has no self loops");
    }
    let spec = GraphSpec::new(u.clone(), GraphVariant::Undirected)?;
    Ok(spec.predicate()?.holds(&joint_type(y, x)?))
}

/// Whether the directed sender graph has an arc from `x` towards `y`.
pub fn directed_edge(x: &Sequence, y: &Sequence, u: &UtilityMatrix, delta: &Rat) -> Result<bool> {
    let spec = GraphSpec::new(u.clone(), GraphVariant::Directed { delta: delta.clone() })?;
    Ok(spec.predicate()?.holds(&joint_type(y, x)?))
}

/// Out-degree of any `x` of one type into a type class, and in-degree of any `y` of that class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeReport {
    pub delta_out: BigUint,
    pub delta_in: BigUint,
}

/// Degrees between the classes of `from` (the `x` side) and `to` (the `y` side), via joint types.
pub fn degree_counts(from: &TypeVector, to: &TypeVector, spec: &GraphSpec, cap: u64) -> Result<DegreeReport> {
    check_types(from, to, spec)?;
    let rule = spec.predicate()?;
    let joints = joint_types_with_marginals(to.counts(), from.counts(), cap)?;
    let q = from.q();
    let (out, inn) = joints
        .par_iter()
        .filter(|w| rule.holds(w))
        .map(|w| {
            let col = |j: usize| -> Vec<usize> { (0..q).map(|i| w.get(i, j)).collect() };
            let row = |i: usize| -> Vec<usize> { (0..q).map(|j| w.get(i, j)).collect() };
            let out: BigUint = (0..q).map(|j| multinomial(&col(j))).product();
            let inn: BigUint = (0..q).map(|i| multinomial(&row(i))).product();
            (out, inn)
        })
        .reduce(|| (BigUint::zero(), BigUint::zero()), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(DegreeReport { delta_out: out, delta_in: inn })
}

/// The same degrees by walking the type classes sequence by sequence.
pub fn degree_counts_exhaustive(from: &TypeVector, to: &TypeVector, spec: &GraphSpec) -> Result<DegreeReport> {
    check_types(from, to, spec)?;
    let rule = spec.predicate()?;
    let x = from.first_sequence();
    let y = to.first_sequence();
    let mut out = 0u64;
    for cand in to.class_members() {
        if rule.holds(&joint_type(&cand, &x)?) {
            out += 1;
        }
    }
    let mut inn = 0u64;
    for cand in from.class_members() {
        if rule.holds(&joint_type(&y, &cand)?) {
            inn += 1;
        }
    }
    Ok(DegreeReport { delta_out: out.into(), delta_in: inn.into() })
}

fn check_types(from: &TypeVector, to: &TypeVector, spec: &GraphSpec) -> Result<()> {
    if from.n() != to.n() || from.q() != to.q() || from.q() != spec.utility.q() {
        return Err(Error::Mismatch(format!("types {from} and {to} over a {}-symbol utility", spec.utility.q())));
    }
    Ok(())
}

/// True when no two members are adjacent in the undirected sender graph.
pub fn is_independent_set(set: &[Sequence], u: &UtilityMatrix) -> Result<bool> {
    let rule = GraphSpec::new(u.clone(), GraphVariant::Undirected)?.predicate()?;
    for (a, x) in set.iter().enumerate() {
        for y in &set[a + 1..] {
            if x == y {
                continue;
            }
            if rule.holds(&joint_type(y, x)?) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `delta_out * |U_from| == delta_in * |U_to|`.
pub fn biregular(from: &TypeVector, to: &TypeVector, report: &DegreeReport) -> bool {
    let lhs = &report.delta_out * crate::model::type_class_size(from);
    let rhs = &report.delta_in * crate::model::type_class_size(to);
    BigInt::from(lhs) == BigInt::from(rhs)
}
