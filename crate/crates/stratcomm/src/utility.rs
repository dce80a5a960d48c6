//! Single-letter sender utilities, the permutation programme and its sign.

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::digraph::find_cycle;
use crate::error::{invalid, Error, Result};
use crate::model::{joint_type, JointType, Sequence};
use crate::rational::{common_denominator, scaled_integers, Rat};

/// Largest alphabet for which `gamma` enumerates permutations.
pub const GAMMA_ENUMERATION_LIMIT: usize = 9;

/// `U(i, j)`: the sender's payoff when the receiver reconstructs `i` and the truth is `j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UtilityMatrix {
    q: usize,
    entries: Vec<Rat>,
}

impl UtilityMatrix {
    /// Builds a matrix that must already have a zero diagonal.
    pub fn new(rows: Vec<Vec<Rat>>) -> Result<Self> {
        let m = Self::from_rows(rows)?;
        if (0..m.q).any(|i| !m.get(i, i).is_zero()) {
            return invalid("utility diagonal must be zero; use normalize for raw payoffs");
        }
        Ok(m)
    }

    fn from_rows(rows: Vec<Vec<Rat>>) -> Result<Self> {
        let q = rows.len();
        if q < 2 {
            return invalid("utility needs at least two symbols");
        }
        if let Some(r) = rows.iter().find(|r| r.len() != q) {
            return Err(Error::Mismatch(format!("row of length {} in a {q}x{q} utility", r.len())));
        }
        Ok(Self { q, entries: rows.into_iter().flatten().collect() })
    }

    /// Binary utility with the two off-diagonal payoffs.
    pub fn binary(u01: Rat, u10: Rat) -> Self {
        Self { q: 2, entries: vec![Rat::zero(), u01, u10, Rat::zero()] }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.entries[i * self.q + j]
    }

    pub fn rows(&self) -> Vec<Vec<Rat>> {
        self.entries.chunks(self.q).map(|r| r.to_vec()).collect()
    }

    pub fn max_entry(&self) -> Rat {
        self.entries.iter().max().cloned().unwrap_or_default()
    }

    pub fn min_entry(&self) -> Rat {
        self.entries.iter().min().cloned().unwrap_or_default()
    }

    fn off_diagonal(&self) -> impl Iterator<Item = (usize, usize, &Rat)> {
        (0..self.q)
            .flat_map(move |i| (0..self.q).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(move |(i, j)| (i, j, self.get(i, j)))
    }

    pub fn all_off_diagonal_negative(&self) -> bool {
        self.off_diagonal().all(|(_, _, u)| u.is_negative())
    }

    /// `Some(c)` when every off-diagonal entry equals `-c` with `c > 0`.
    pub fn constant_negative(&self) -> Option<Rat> {
        let first = self.get(0, 1).clone();
        (first.is_negative() && self.off_diagonal().all(|(_, _, u)| *u == first)).then(|| -first)
    }

    /// Smaller of the two off-diagonal magnitudes (binary only).
    pub fn binary_a(&self) -> Option<Rat> {
        (self.q == 2).then(|| self.get(0, 1).abs().min(self.get(1, 0).abs()))
    }

    /// Larger of the two off-diagonal magnitudes (binary only).
    pub fn binary_b(&self) -> Option<Rat> {
        (self.q == 2).then(|| self.get(0, 1).abs().max(self.get(1, 0).abs()))
    }

    /// The matrix with both symbols relabelled (binary only).
    pub fn swapped_binary(&self) -> Option<Self> {
        (self.q == 2).then(|| Self::binary(self.get(1, 0).clone(), self.get(0, 1).clone()))
    }

    /// Integer weights `scale * U(i, j)`.
    pub fn scaled(&self) -> Result<ScaledUtility> {
        let scale = common_denominator(&self.entries);
        let weights = scaled_integers(&self.entries, &scale)
            .iter()
            .map(|v| v.to_i128().ok_or(Error::Overflow("utility scaling")))
            .collect::<Result<Vec<_>>>()?;
        if weights.iter().any(|w| w.unsigned_abs() > (1u128 << 60)) {
            return Err(Error::Overflow("utility scaling"));
        }
        Ok(ScaledUtility { q: self.q, weights, scale })
    }
}

/// Utility multiplied by the common denominator of its entries.
#[derive(Clone, Debug)]
pub struct ScaledUtility {
    pub q: usize,
    pub weights: Vec<i128>,
    pub scale: BigInt,
}

impl ScaledUtility {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i128 {
        self.weights[i * self.q + j]
    }

    /// `n * scale * U_n(y, x)` for symbol slices of equal length.
    #[inline]
    pub fn block_sum(&self, y: &[u8], x: &[u8]) -> i128 {
        y.iter().zip(x).map(|(&a, &b)| self.weights[a as usize * self.q + b as usize]).sum()
    }

    pub fn joint_sum(&self, w: &JointType) -> i128 {
        w.cells().iter().zip(&self.weights).map(|(&c, &u)| c as i128 * u).sum()
    }

    pub fn to_rational(&self, sum: i128, n: usize) -> Rat {
        BigRational::new(BigInt::from(sum), &self.scale * BigInt::from(n))
    }
}

/// Subtracts each column's diagonal entry, leaving a zero diagonal.
pub fn normalize(raw: Vec<Vec<Rat>>) -> Result<UtilityMatrix> {
    let mut m = UtilityMatrix::from_rows(raw)?;
    let q = m.q;
    let diag: Vec<Rat> = (0..q).map(|j| m.get(j, j).clone()).collect();
    for i in 0..q {
        for (j, d) in diag.iter().enumerate() {
            m.entries[i * q + j] -= d;
        }
    }
    Ok(m)
}

/// Average utility `(1/n) sum W(i, j) U(i, j)` of a joint type.
pub fn block_utility_joint(w: &JointType, u: &UtilityMatrix) -> Result<Rat> {
    if w.q() != u.q() {
        return Err(Error::Mismatch(format!("joint type over {} symbols, utility over {}", w.q(), u.q())));
    }
    let total: Rat = w
        .cells()
        .iter()
        .zip(&u.entries)
        .filter(|(&c, _)| c > 0)
        .map(|(&c, e)| e * Rat::from_integer(BigInt::from(c)))
        .sum();
    Ok(total / Rat::from_integer(BigInt::from(w.n())))
}

/// `U_n(y, x)` for a reconstruction `y` of the true block `x`.
pub fn block_utility(y: &Sequence, x: &Sequence, u: &UtilityMatrix) -> Result<Rat> {
    block_utility_joint(&joint_type(y, x)?, u)
}

/// Binary block utility split into a composition shift and swapped pairs.
///
/// With `y` holding no more zeros than `x`, the utility is
/// `(U(1,0) * shift + (U(0,1) + U(1,0)) * swaps) / n`, where `shift` is the difference in zero
/// counts and `swaps` counts positions with `y = 0` and `x = 1`. The other ordering is symmetric.
pub fn binary_decomposition(y: &Sequence, x: &Sequence, u: &UtilityMatrix) -> Result<Rat> {
    if u.q() != 2 || y.q() != 2 {
        return invalid("binary decomposition needs a binary alphabet");
    }
    let w = joint_type(y, x)?;
    let zeros_y = w.get(0, 0) + w.get(0, 1);
    let zeros_x = w.get(0, 0) + w.get(1, 0);
    let both = u.get(0, 1) + u.get(1, 0);
    let count = |c: usize| Rat::from_integer(BigInt::from(c));
    let total = if zeros_y <= zeros_x {
        u.get(1, 0) * count(zeros_x - zeros_y) + both * count(w.get(0, 1))
    } else {
        u.get(0, 1) * count(zeros_y - zeros_x) + both * count(w.get(1, 0))
    };
    Ok(total / count(w.n()))
}

/// Sum of `U(next, current)` around a cycle `c0 -> c1 -> ... -> c0`.
pub fn cycle_sum(u: &UtilityMatrix, cycle: &[usize]) -> Rat {
    (0..cycle.len()).map(|m| u.get(cycle[(m + 1) % cycle.len()], cycle[m]).clone()).sum()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaResult {
    pub value: Rat,
    /// `witness[j]` is the symbol that truth `j` is reported as.
    pub witness: Vec<usize>,
    /// Non-trivial cycles of the witness, each starting at its smallest symbol.
    pub cycles: Vec<Vec<usize>>,
}

/// Best total utility over all non-identity permutations, by enumeration.
pub fn gamma(u: &UtilityMatrix) -> Result<GammaResult> {
    let q = u.q();
    if q > GAMMA_ENUMERATION_LIMIT {
        return Err(Error::Unsupported(format!(
            "exact gamma enumerates {q}! permutations; use gamma_sign for q > {GAMMA_ENUMERATION_LIMIT}"
        )));
    }
    let s = u.scaled()?;
    let mut best: Option<(i128, Vec<usize>)> = None;
    for perm in (0..q).permutations(q) {
        if perm.iter().enumerate().all(|(j, &p)| p == j) {
            continue;
        }
        let value: i128 = perm.iter().enumerate().map(|(j, &p)| s.get(p, j)).sum();
        if best.as_ref().map_or(true, |(b, _)| value > *b) {
            best = Some((value, perm));
        }
    }
    let (value, witness) = best.expect("q >= 2 has a non-identity permutation");
    let cycles = cycle_decomposition(&witness);
    Ok(GammaResult { value: BigRational::new(BigInt::from(value), s.scale), witness, cycles })
}

pub fn cycle_decomposition(perm: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; perm.len()];
    let mut cycles = Vec::new();
    for start in 0..perm.len() {
        if seen[start] || perm[start] == start {
            continue;
        }
        let mut cycle = vec![start];
        seen[start] = true;
        let mut j = perm[start];
        while j != start {
            seen[j] = true;
            cycle.push(j);
            j = perm[j];
        }
        cycles.push(cycle);
    }
    cycles
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GammaSign {
    Negative,
    /// The best cycle sums to exactly zero.
    Zero { cycle: Vec<usize> },
    Positive { cycle: Vec<usize> },
}

impl GammaSign {
    pub fn label(&self) -> &'static str {
        match self {
            GammaSign::Negative => "negative",
            GammaSign::Zero { .. } => "zero",
            GammaSign::Positive { .. } => "positive",
        }
    }

    pub fn cycle(&self) -> Option<&[usize]> {
        match self {
            GammaSign::Negative => None,
            GammaSign::Zero { cycle } | GammaSign::Positive { cycle } => Some(cycle),
        }
    }
}

/// Sign of the best simple cycle, found by longest-path relaxation on the complete digraph.
pub fn gamma_sign(u: &UtilityMatrix) -> GammaSign {
    let q = u.q();
    let arcs: Vec<(usize, usize)> =
        (0..q).flat_map(|j| (0..q).map(move |k| (j, k))).filter(|(j, k)| j != k).collect();
    let mut dist = vec![Rat::zero(); q];
    let mut pred: Vec<Option<usize>> = vec![None; q];
    let mut last = None;
    for _ in 0..q {
        last = None;
        for &(j, k) in &arcs {
            let cand = &dist[j] + u.get(k, j);
            if cand > dist[k] {
                dist[k] = cand;
                pred[k] = Some(j);
                last = Some(k);
            }
        }
        if last.is_none() {
            break;
        }
    }
    if let Some(mut v) = last {
        for _ in 0..q {
            v = pred[v].expect("relaxed vertex has a predecessor");
        }
        let mut back = vec![v];
        let mut w = pred[v].expect("cycle vertex has a predecessor");
        while w != v {
            back.push(w);
            w = pred[w].expect("cycle vertex has a predecessor");
        }
        back.reverse();
        let cycle = rotate_to_min(back);
        debug_assert!(cycle_sum(u, &cycle).is_positive());
        return GammaSign::Positive { cycle };
    }
    let tight: Vec<Vec<usize>> = (0..q)
        .map(|j| (0..q).filter(|&k| k != j && &dist[j] + u.get(k, j) == dist[k]).collect())
        .collect();
    match find_cycle(&tight) {
        Some(cycle) => GammaSign::Zero { cycle: rotate_to_min(cycle) },
        None => GammaSign::Negative,
    }
}

fn rotate_to_min(mut cycle: Vec<usize>) -> Vec<usize> {
    if let Some(pos) = cycle.iter().position_min() {
        cycle.rotate_left(pos);
    }
    cycle
}

/// Outcome of the two-clause sufficient condition for a negative `gamma`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prop1Report {
    /// A cycle of pairwise non-negative payoffs, if one exists.
    pub nonnegative_cycle: Option<Vec<usize>>,
    pub min_negative_magnitude: Option<Rat>,
    pub max_nonnegative: Option<Rat>,
    pub magnitude_clause: bool,
}

impl Prop1Report {
    pub fn acyclic_clause(&self) -> bool {
        self.nonnegative_cycle.is_none()
    }

    pub fn holds(&self) -> bool {
        self.acyclic_clause() && self.magnitude_clause
    }

    pub fn failed_clauses(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.acyclic_clause() {
            out.push("acyclic");
        }
        if !self.magnitude_clause {
            out.push("magnitude");
        }
        out
    }
}

pub fn prop1_holds(u: &UtilityMatrix) -> Prop1Report {
    let q = u.q();
    let adj: Vec<Vec<usize>> = (0..q)
        .map(|i| (0..q).filter(|&j| j != i && !u.get(i, j).is_negative()).collect())
        .collect();
    let nonnegative_cycle = find_cycle(&adj).map(rotate_to_min);
    let min_negative_magnitude = u.off_diagonal().filter(|(_, _, v)| v.is_negative()).map(|(_, _, v)| v.abs()).min();
    let max_nonnegative = u.off_diagonal().filter(|(_, _, v)| !v.is_negative()).map(|(_, _, v)| v.clone()).max();
    let magnitude_clause = match (&min_negative_magnitude, &max_nonnegative) {
        (_, None) => true,
        (None, Some(_)) => false,
        (Some(neg), Some(pos)) => *neg > pos * Rat::from_integer(BigInt::from(q - 1)),
    };
    Prop1Report { nonnegative_cycle, min_negative_magnitude, max_nonnegative, magnitude_clause }
}
