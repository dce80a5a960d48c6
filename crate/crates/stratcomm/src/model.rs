//! Alphabets, distributions, sequences and method-of-types combinatorics.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Error, Result};
use crate::rational::{common_denominator, scaled_integers, to_biguint, to_f64, Rat};

/// Default limit on how many types or sequences an enumeration may produce.
pub const DEFAULT_CAP: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Alphabet {
    q: usize,
}

impl Alphabet {
    pub fn new(q: usize) -> Result<Self> {
        if !(2..=255).contains(&q) {
            return invalid(format!("alphabet size must lie in 2..=255, got {q}"));
        }
        Ok(Self { q })
    }

    pub fn size(&self) -> usize {
        self.q
    }
}

/// A probability vector with exact rational entries summing to one.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Distribution {
    probs: Vec<Rat>,
}

impl Distribution {
    pub fn new(probs: Vec<Rat>) -> Result<Self> {
        Alphabet::new(probs.len())?;
        if probs.iter().any(|p| p.is_negative() || *p > Rat::one()) {
            return invalid("probabilities must lie in [0, 1]");
        }
        let total: Rat = probs.iter().sum();
        if !total.is_one() {
            return invalid(format!("probabilities sum to {total}, not 1"));
        }
        Ok(Self { probs })
    }

    /// Binary source with `P(0) = p0`.
    pub fn binary(p0: Rat) -> Result<Self> {
        let p1 = Rat::one() - &p0;
        Self::new(vec![p0, p1])
    }

    pub fn uniform(q: usize) -> Result<Self> {
        Alphabet::new(q)?;
        let p = BigRational::new(BigInt::one(), BigInt::from(q));
        Ok(Self { probs: vec![p; q] })
    }

    pub fn q(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[Rat] {
        &self.probs
    }

    pub fn get(&self, i: usize) -> &Rat {
        &self.probs[i]
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.probs.iter().map(to_f64).collect()
    }

    /// Entries sorted in non-increasing order, handy for symmetry comparisons.
    pub fn sorted_desc(&self) -> Vec<Rat> {
        let mut v = self.probs.clone();
        v.sort_by(|a, b| b.cmp(a));
        v
    }
}

/// A block of symbols from `0..q`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sequence {
    symbols: Vec<u8>,
    q: usize,
}

impl Sequence {
    pub fn new(symbols: Vec<u8>, q: usize) -> Result<Self> {
        Alphabet::new(q)?;
        if symbols.is_empty() {
            return invalid("sequence must be non-empty");
        }
        if let Some(&s) = symbols.iter().find(|&&s| s as usize >= q) {
            return invalid(format!("symbol {s} outside alphabet of size {q}"));
        }
        Ok(Self { symbols, q })
    }

    pub(crate) fn from_raw(symbols: Vec<u8>, q: usize) -> Self {
        Self { symbols, q }
    }

    /// The `index`-th sequence of length `n` in lexicographic order.
    pub fn from_index(mut index: u64, n: usize, q: usize) -> Self {
        let mut symbols = vec![0u8; n];
        for slot in symbols.iter_mut().rev() {
            *slot = (index % q as u64) as u8;
            index /= q as u64;
        }
        Self { symbols, q }
    }

    pub fn index(&self) -> u64 {
        self.symbols.iter().fold(0u64, |acc, &s| acc * self.q as u64 + s as u64)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn concat(&self, other: &Sequence) -> Result<Sequence> {
        if self.q != other.q {
            return Err(Error::Mismatch("alphabets differ".into()));
        }
        let mut symbols = self.symbols.clone();
        symbols.extend_from_slice(&other.symbols);
        Ok(Self { symbols, q: self.q })
    }

    pub fn split_at(&self, mid: usize) -> (Sequence, Sequence) {
        let (a, b) = self.symbols.split_at(mid);
        (Self::from_raw(a.to_vec(), self.q), Self::from_raw(b.to_vec(), self.q))
    }
}

impl fmt::Debug for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sep = if self.q > 10 { "," } else { "" };
        let s: Vec<String> = self.symbols.iter().map(|s| s.to_string()).collect();
        f.write_str(&s.join(sep))
    }
}

/// Number of sequences of length `n` over `q` symbols, or `None` past `u64`.
pub fn sequence_count(n: usize, q: usize) -> Option<u64> {
    (q as u64).checked_pow(n as u32)
}

/// All sequences of length `n` in lexicographic order.
pub fn all_sequences(n: usize, q: usize, cap: u64) -> Result<impl Iterator<Item = Sequence>> {
    let total = sequence_count(n, q).filter(|&c| c <= cap).ok_or_else(|| Error::TooLarge {
        what: "sequence space",
        size: format!("{q}^{n}"),
        cap,
    })?;
    Ok((0..total).map(move |i| Sequence::from_index(i, n, q)))
}

/// Empirical symbol counts of a block.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypeVector {
    counts: Vec<usize>,
}

impl TypeVector {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        Alphabet::new(counts.len())?;
        if counts.iter().sum::<usize>() == 0 {
            return invalid("type must have positive block length");
        }
        Ok(Self { counts })
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn n(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn q(&self) -> usize {
        self.counts.len()
    }

    pub fn frequency(&self, i: usize) -> Rat {
        BigRational::new(BigInt::from(self.counts[i]), BigInt::from(self.n()))
    }

    /// The lexicographically smallest member of the type class.
    pub fn first_sequence(&self) -> Sequence {
        let symbols = self
            .counts
            .iter()
            .enumerate()
            .flat_map(|(s, &c)| std::iter::repeat(s as u8).take(c))
            .collect();
        Sequence::from_raw(symbols, self.q())
    }

    /// Members of the type class in lexicographic order.
    pub fn class_members(&self) -> ClassMembers {
        ClassMembers { next: Some(self.first_sequence().symbols), q: self.q() }
    }

    pub fn contains(&self, x: &Sequence) -> bool {
        x.q() == self.q() && empirical_type(x).counts == self.counts
    }
}

impl fmt::Display for TypeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.counts.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

pub struct ClassMembers {
    next: Option<Vec<u8>>,
    q: usize,
}

impl Iterator for ClassMembers {
    type Item = Sequence;

    fn next(&mut self) -> Option<Sequence> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        if next_permutation(&mut succ) {
            self.next = Some(succ);
        }
        Some(Sequence::from_raw(current, self.q))
    }
}

fn next_permutation(v: &mut [u8]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Pair counts `W(i, j)` of positions with reconstruction `i` and true symbol `j`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JointType {
    q: usize,
    counts: Vec<usize>,
}

impl JointType {
    pub fn from_counts(q: usize, counts: Vec<usize>) -> Result<Self> {
        Alphabet::new(q)?;
        if counts.len() != q * q {
            return Err(Error::Mismatch(format!("expected {} cells, got {}", q * q, counts.len())));
        }
        if counts.iter().sum::<usize>() == 0 {
            return invalid("joint type must have positive block length");
        }
        Ok(Self { q, counts })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn n(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn get(&self, i: usize, j: usize) -> usize {
        self.counts[i * self.q + j]
    }

    pub fn cells(&self) -> &[usize] {
        &self.counts
    }

    pub fn row_type(&self) -> Vec<usize> {
        (0..self.q).map(|i| (0..self.q).map(|j| self.get(i, j)).sum()).collect()
    }

    pub fn column_type(&self) -> Vec<usize> {
        (0..self.q).map(|j| (0..self.q).map(|i| self.get(i, j)).sum()).collect()
    }

    pub fn mismatches(&self) -> usize {
        (0..self.q)
            .flat_map(|i| (0..self.q).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| self.get(i, j))
            .sum()
    }

    pub fn is_diagonal(&self) -> bool {
        self.mismatches() == 0
    }

    /// Every true symbol present is sent to a single reconstruction symbol.
    pub fn is_functional(&self) -> bool {
        (0..self.q).all(|j| (0..self.q).filter(|&i| self.get(i, j) > 0).count() <= 1)
    }

    /// A cycle `j -> i` through off-diagonal cells with positive count, if any.
    pub fn support_cycle(&self) -> Option<Vec<usize>> {
        let adj: Vec<Vec<usize>> =
            (0..self.q).map(|j| (0..self.q).filter(|&i| i != j && self.get(i, j) > 0).collect()).collect();
        crate::digraph::find_cycle(&adj)
    }
}

/// All joint types with the given row (reconstruction) and column (truth) counts.
pub fn joint_types_with_marginals(rows: &[usize], cols: &[usize], cap: u64) -> Result<Vec<JointType>> {
    let q = rows.len();
    if cols.len() != q {
        return Err(Error::Mismatch(format!("marginals over {} and {} symbols", q, cols.len())));
    }
    if rows.iter().sum::<usize>() != cols.iter().sum::<usize>() {
        return Err(Error::Infeasible("marginals have different totals".into()));
    }
    let mut out = Vec::new();
    let mut cells = vec![0usize; q * q];
    let mut col_left = cols.to_vec();
    fill_joint(0, 0, rows[0], rows, &mut col_left, &mut cells, &mut out, cap)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn fill_joint(
    i: usize,
    j: usize,
    row_left: usize,
    rows: &[usize],
    col_left: &mut Vec<usize>,
    cells: &mut Vec<usize>,
    out: &mut Vec<JointType>,
    cap: u64,
) -> Result<()> {
    let q = rows.len();
    if i == q {
        if out.len() as u64 >= cap {
            return Err(Error::TooLarge { what: "joint type enumeration", size: format!("> {cap}"), cap });
        }
        out.push(JointType { q, counts: cells.clone() });
        return Ok(());
    }
    if j == q - 1 {
        if row_left > col_left[j] {
            return Ok(());
        }
        cells[i * q + j] = row_left;
        col_left[j] -= row_left;
        let next_row = if i + 1 < q { rows[i + 1] } else { 0 };
        let r = fill_joint(i + 1, 0, next_row, rows, col_left, cells, out, cap);
        col_left[j] += row_left;
        cells[i * q + j] = 0;
        return r;
    }
    let upper = row_left.min(col_left[j]);
    for c in 0..=upper {
        cells[i * q + j] = c;
        col_left[j] -= c;
        let r = fill_joint(i, j + 1, row_left - c, rows, col_left, cells, out, cap);
        col_left[j] += c;
        if r.is_err() {
            cells[i * q + j] = 0;
            return r;
        }
    }
    cells[i * q + j] = 0;
    Ok(())
}

pub fn empirical_type(x: &Sequence) -> TypeVector {
    let mut counts = vec![0usize; x.q()];
    for &s in x.symbols() {
        counts[s as usize] += 1;
    }
    TypeVector { counts }
}

pub fn joint_type(y: &Sequence, x: &Sequence) -> Result<JointType> {
    check_pair(y, x)?;
    let q = x.q();
    let mut counts = vec![0usize; q * q];
    for (&a, &b) in y.symbols().iter().zip(x.symbols()) {
        counts[a as usize * q + b as usize] += 1;
    }
    Ok(JointType { q, counts })
}

fn check_pair(y: &Sequence, x: &Sequence) -> Result<()> {
    if y.len() != x.len() {
        return Err(Error::Mismatch(format!("lengths {} and {}", y.len(), x.len())));
    }
    if y.q() != x.q() {
        return Err(Error::Mismatch(format!("alphabets {} and {}", y.q(), x.q())));
    }
    Ok(())
}

/// Number of types of length `n` over `q` symbols.
pub fn type_count(n: usize, q: usize) -> BigUint {
    binomial(n + q - 1, q - 1)
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// All compositions of `n` into `q` parts, lexicographically.
pub fn enumerate_types(n: usize, q: usize, cap: u64) -> Result<Vec<TypeVector>> {
    Alphabet::new(q)?;
    if n == 0 {
        return invalid("block length must be positive");
    }
    let total = type_count(n, q);
    if total > BigUint::from(cap) {
        return Err(Error::TooLarge { what: "type enumeration", size: total.to_string(), cap });
    }
    let mut out = Vec::with_capacity(total.to_usize().unwrap_or(0));
    let mut counts = vec![0usize; q];
    fill_types(0, n, &mut counts, &mut out);
    Ok(out)
}

fn fill_types(pos: usize, left: usize, counts: &mut Vec<usize>, out: &mut Vec<TypeVector>) {
    if pos + 1 == counts.len() {
        counts[pos] = left;
        out.push(TypeVector { counts: counts.clone() });
        return;
    }
    for c in 0..=left {
        counts[pos] = c;
        fill_types(pos + 1, left - c, counts, out);
    }
}

pub fn factorial(n: usize) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

/// Multinomial coefficient `n! / prod counts[i]!`.
pub fn multinomial(counts: &[usize]) -> BigUint {
    let mut acc = BigUint::one();
    let mut total = 0usize;
    for &c in counts {
        for k in 1..=c {
            total += 1;
            acc = acc * BigUint::from(total) / BigUint::from(k);
        }
    }
    acc
}

pub fn type_class_size(t: &TypeVector) -> BigUint {
    multinomial(&t.counts)
}

fn log2_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).log2()).sum()
}

/// `log2 P^n(U_T)`; negative infinity when the class has probability zero.
pub fn log_type_class_prob(t: &TypeVector, p: &Distribution) -> f64 {
    let probs = p.to_f64();
    let mut acc = log2_factorial(t.n());
    for (&c, &pi) in t.counts.iter().zip(&probs) {
        if c == 0 {
            continue;
        }
        if pi == 0.0 {
            return f64::NEG_INFINITY;
        }
        acc += c as f64 * pi.log2() - log2_factorial(c);
    }
    acc
}

/// Types satisfying `P(i) - eps < T(i)/n < P(i) + eps` for every symbol.
pub fn typical_types(p: &Distribution, eps: &Rat, n: usize, cap: u64) -> Result<Vec<TypeVector>> {
    if !eps.is_positive() {
        return invalid("eps must be positive");
    }
    let nr = Rat::from_integer(BigInt::from(n));
    Ok(enumerate_types(n, p.q(), cap)?
        .into_iter()
        .filter(|t| {
            t.counts.iter().zip(p.probs()).all(|(&c, pi)| {
                let f = Rat::from_integer(BigInt::from(c)) / &nr;
                (&f - pi).abs() < *eps
            })
        })
        .collect())
}

pub fn mismatches(y: &Sequence, x: &Sequence) -> Result<usize> {
    check_pair(y, x)?;
    Ok(y.symbols().iter().zip(x.symbols()).filter(|(a, b)| a != b).count())
}

/// Mean Hamming distance as an exact fraction.
pub fn hamming(y: &Sequence, x: &Sequence) -> Result<Rat> {
    let m = mismatches(y, x)?;
    Ok(BigRational::new(BigInt::from(m), BigInt::from(x.len())))
}

/// Exact i.i.d. probabilities, expressed as integer weights over the denominator `L^n`.
#[derive(Clone, Debug)]
pub struct ExactProbability {
    numerators: Vec<BigUint>,
    scale: BigUint,
}

impl ExactProbability {
    pub fn new(p: &Distribution) -> Self {
        let den = common_denominator(p.probs());
        let numerators = scaled_integers(p.probs(), &den)
            .iter()
            .map(|v| to_biguint(v).expect("probabilities are non-negative"))
            .collect();
        Self { numerators, scale: to_biguint(&den).expect("positive denominator") }
    }

    /// Weight of one sequence of type `t`.
    pub fn sequence_weight(&self, t: &TypeVector) -> BigUint {
        t.counts
            .iter()
            .zip(&self.numerators)
            .fold(BigUint::one(), |acc, (&c, num)| acc * num.pow(c as u32))
    }

    /// Weight of the whole type class of `t`.
    pub fn class_weight(&self, t: &TypeVector) -> BigUint {
        type_class_size(t) * self.sequence_weight(t)
    }

    pub fn denominator(&self, n: usize) -> BigUint {
        self.scale.pow(n as u32)
    }

    pub fn to_probability(&self, weight: BigUint, n: usize) -> Rat {
        BigRational::new(BigInt::from(weight), BigInt::from(self.denominator(n)))
    }

    pub fn class_probability(&self, t: &TypeVector) -> Rat {
        self.to_probability(self.class_weight(t), t.n())
    }
}
