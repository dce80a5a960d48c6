//! Receiver strategies in image-set form, tie rules, and named strategy families.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{Signed, ToPrimitive};

use crate::error::{invalid, Error, Result};
use crate::model::{type_class_size, typical_types, Distribution, Sequence, TypeVector};
use crate::rational::{int, Rat};

/// The set a decoder reproduces verbatim.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Image {
    /// Explicit sequences, kept sorted and deduplicated.
    Explicit(Vec<Sequence>),
    /// A union of full type classes, kept sorted and deduplicated.
    TypeClasses(Vec<TypeVector>),
}

impl Image {
    pub fn explicit(mut members: Vec<Sequence>) -> Self {
        members.sort();
        members.dedup();
        Image::Explicit(members)
    }

    pub fn type_classes(mut classes: Vec<TypeVector>) -> Self {
        classes.sort();
        classes.dedup();
        Image::TypeClasses(classes)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnchorRule {
    LexMin,
    Explicit(Sequence),
}

/// `g(x) = x` on the image and `g(x) = anchor` elsewhere.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReceiverStrategy {
    n: usize,
    q: usize,
    image: Image,
    anchor: Sequence,
}

impl ReceiverStrategy {
    pub fn new(n: usize, q: usize, image: Image, anchor: AnchorRule) -> Result<Self> {
        if n == 0 {
            return invalid("block length must be positive");
        }
        match &image {
            Image::Explicit(m) => {
                if m.is_empty() {
                    return invalid("image must be non-empty");
                }
                if let Some(bad) = m.iter().find(|s| s.len() != n || s.q() != q) {
                    return Err(Error::Mismatch(format!("image member {bad} is not a length-{n} block over {q} symbols")));
                }
            }
            Image::TypeClasses(c) => {
                if c.is_empty() {
                    return invalid("image must be non-empty");
                }
                if let Some(bad) = c.iter().find(|t| t.n() != n || t.q() != q) {
                    return Err(Error::Mismatch(format!("image class {bad} is not a length-{n} type over {q} symbols")));
                }
            }
        }
        let lex_min = match &image {
            Image::Explicit(m) => m[0].clone(),
            Image::TypeClasses(c) => c.iter().map(|t| t.first_sequence()).min().expect("non-empty"),
        };
        let anchor = match anchor {
            AnchorRule::LexMin => lex_min,
            AnchorRule::Explicit(a) => a,
        };
        let strategy = Self { n, q, image, anchor };
        if !strategy.contains(&strategy.anchor) {
            return invalid(format!("anchor {} lies outside the image", strategy.anchor));
        }
        Ok(strategy)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn image(&self) -> &Image {
        &self.image
    }

    pub fn anchor(&self) -> &Sequence {
        &self.anchor
    }

    pub fn contains(&self, x: &Sequence) -> bool {
        match &self.image {
            Image::Explicit(m) => m.binary_search(x).is_ok(),
            Image::TypeClasses(c) => c.iter().any(|t| t.contains(x)),
        }
    }

    /// The decoder itself.
    pub fn decode(&self, x: &Sequence) -> Sequence {
        if self.contains(x) {
            x.clone()
        } else {
            self.anchor.clone()
        }
    }

    pub fn image_size(&self) -> BigUint {
        match &self.image {
            Image::Explicit(m) => BigUint::from(m.len()),
            Image::TypeClasses(c) => c.iter().map(type_class_size).sum(),
        }
    }

    pub fn classes(&self) -> Option<&[TypeVector]> {
        match &self.image {
            Image::TypeClasses(c) => Some(c),
            Image::Explicit(_) => None,
        }
    }

    /// Image members in lexicographic order, refusing to list more than `cap`.
    pub fn members(&self, cap: u64) -> Result<Vec<Sequence>> {
        let size = self.image_size();
        if size > BigUint::from(cap) {
            return Err(Error::TooLarge { what: "receiver image", size: size.to_string(), cap });
        }
        Ok(match &self.image {
            Image::Explicit(m) => m.clone(),
            Image::TypeClasses(c) => {
                let mut all: Vec<Sequence> = c.iter().flat_map(|t| t.class_members()).collect();
                all.sort();
                all
            }
        })
    }
}

/// The product decoder on split blocks: image `I1 x I2`, anchor `(a1, a2)`.
pub fn compose_time_share(first: &ReceiverStrategy, second: &ReceiverStrategy, cap: u64) -> Result<ReceiverStrategy> {
    if first.q != second.q {
        return Err(Error::Mismatch(format!("alphabets of size {} and {}", first.q, second.q)));
    }
    let size = first.image_size() * second.image_size();
    if size > BigUint::from(cap) {
        return Err(Error::TooLarge { what: "product image", size: size.to_string(), cap });
    }
    let a = first.members(cap)?;
    let b = second.members(cap)?;
    let mut product = Vec::with_capacity(a.len() * b.len());
    for x in &a {
        for y in &b {
            product.push(x.concat(y)?);
        }
    }
    let anchor = first.anchor.concat(&second.anchor)?;
    ReceiverStrategy::new(first.n + second.n, first.q, Image::Explicit(product), AnchorRule::Explicit(anchor))
}

/// How the sender resolves ties among utility maximisers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TieRule {
    /// Prefer a maximiser farther than the threshold from the truth, else the first one.
    WorstCase(Rat),
    LexMin,
}

impl TieRule {
    pub fn worst_case(threshold: Rat) -> Result<Self> {
        if threshold.is_negative() || threshold > int(1) {
            return invalid("tie threshold must lie in [0, 1]");
        }
        Ok(TieRule::WorstCase(threshold))
    }
}

impl fmt::Display for TieRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TieRule::WorstCase(t) => write!(f, "worst_case({})", crate::rational::format_rational(t)),
            TieRule::LexMin => f.write_str("lex_min"),
        }
    }
}

/// Everything a strategy family may draw on.
#[derive(Clone, Debug)]
pub struct FamilyInput {
    pub source: Distribution,
    pub classes: Vec<Vec<usize>>,
    pub sequences: Vec<Vec<u8>>,
    pub epsilon: Option<Rat>,
    pub index: usize,
    pub cap: u64,
}

impl FamilyInput {
    pub fn new(source: Distribution) -> Self {
        Self { source, classes: Vec::new(), sequences: Vec::new(), epsilon: None, index: 1, cap: crate::model::DEFAULT_CAP }
    }
}

/// A named recipe producing a decoder image for each block length.
pub trait StrategyFamily: Send + Sync {
    fn name(&self) -> &'static str;
    fn image(&self, input: &FamilyInput, n: usize) -> Result<Image>;
}

struct ClosestType;
struct TypeClassList;
struct TypicalSet;
struct ExplicitList;
struct NeighbourClasses;

impl StrategyFamily for ClosestType {
    fn name(&self) -> &'static str {
        "closest_type"
    }

    fn image(&self, input: &FamilyInput, n: usize) -> Result<Image> {
        Ok(Image::type_classes(vec![closest_type(&input.source, n)?]))
    }
}

impl StrategyFamily for TypeClassList {
    fn name(&self) -> &'static str {
        "type_class_list"
    }

    fn image(&self, input: &FamilyInput, n: usize) -> Result<Image> {
        let q = input.source.q();
        let mut classes = Vec::new();
        for c in &input.classes {
            if c.len() != q {
                return Err(Error::Mismatch(format!("class {c:?} has {} entries for {q} symbols", c.len())));
            }
            if c.iter().sum::<usize>() == n {
                classes.push(TypeVector::new(c.clone())?);
            }
        }
        if classes.is_empty() {
            return invalid(format!("no listed class has block length {n}"));
        }
        Ok(Image::type_classes(classes))
    }
}

impl StrategyFamily for TypicalSet {
    fn name(&self) -> &'static str {
        "typical_set"
    }

    fn image(&self, input: &FamilyInput, n: usize) -> Result<Image> {
        let eps = input.epsilon.as_ref().ok_or_else(|| Error::Invalid("typical_set needs epsilon".into()))?;
        let types = typical_types(&input.source, eps, n, input.cap)?;
        if types.is_empty() {
            return invalid(format!("no typical types at n = {n}"));
        }
        Ok(Image::type_classes(types))
    }
}

impl StrategyFamily for ExplicitList {
    fn name(&self) -> &'static str {
        "explicit"
    }

    fn image(&self, input: &FamilyInput, n: usize) -> Result<Image> {
        let q = input.source.q();
        let members = input
            .sequences
            .iter()
            .filter(|s| s.len() == n)
            .map(|s| Sequence::new(s.clone(), q))
            .collect::<Result<Vec<_>>>()?;
        if members.is_empty() {
            return invalid(format!("no listed sequence has length {n}"));
        }
        Ok(Image::explicit(members))
    }
}

impl StrategyFamily for NeighbourClasses {
    fn name(&self) -> &'static str {
        "neighbour_classes"
    }

    /// Binary classes with `z, z+1, .., z+index-1` zeros, `z = floor(n P(0))`.
    fn image(&self, input: &FamilyInput, n: usize) -> Result<Image> {
        if input.source.q() != 2 {
            return invalid("neighbour_classes is binary only");
        }
        if input.index == 0 {
            return invalid("neighbour_classes needs index >= 1");
        }
        let z = floor_count(input.source.get(0), n);
        let classes = (0..input.index)
            .map(|k| z + k)
            .filter(|&zeros| zeros <= n)
            .map(|zeros| TypeVector::new(vec![zeros, n - zeros]))
            .collect::<Result<Vec<_>>>()?;
        Ok(Image::type_classes(classes))
    }
}

fn floor_count(p: &Rat, n: usize) -> usize {
    (p * int(n as i64)).floor().to_integer().to_usize().unwrap_or(0)
}

/// The type nearest to `n P` in counts, rounding by largest remainders.
pub fn closest_type(p: &Distribution, n: usize) -> Result<TypeVector> {
    let scaled: Vec<Rat> = p.probs().iter().map(|v| v * int(n as i64)).collect();
    let mut counts: Vec<usize> = scaled.iter().map(|v| v.floor().to_integer().to_usize().unwrap_or(0)).collect();
    let short = n - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| scaled[b].fract().cmp(&scaled[a].fract()).then(a.cmp(&b)));
    for &i in order.iter().take(short) {
        counts[i] += 1;
    }
    TypeVector::new(counts)
}

/// Families selectable by name.
pub struct FamilyRegistry {
    families: BTreeMap<&'static str, Box<dyn StrategyFamily>>,
}

impl FamilyRegistry {
    pub fn get(&self, name: &str) -> Result<&dyn StrategyFamily> {
        self.families
            .get(name)
            .map(|f| f.as_ref())
            .ok_or_else(|| Error::Invalid(format!("unknown strategy kind '{name}' (known: {})", self.names().join(", "))))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.families.keys().copied().collect()
    }

    pub fn register(&mut self, family: Box<dyn StrategyFamily>) {
        self.families.insert(family.name(), family);
    }
}

impl Default for FamilyRegistry {
    fn default() -> Self {
        let mut r = Self { families: BTreeMap::new() };
        r.register(Box::new(ClosestType));
        r.register(Box::new(TypeClassList));
        r.register(Box::new(TypicalSet));
        r.register(Box::new(ExplicitList));
        r.register(Box::new(NeighbourClasses));
        r
    }
}

/// The nested strategies compared against the cooperative baseline in the binary example.
pub fn neighbour_strategy(p0: &Rat, n: usize, index: usize) -> Result<ReceiverStrategy> {
    let mut input = FamilyInput::new(Distribution::binary(p0.clone())?);
    input.index = index;
    let image = NeighbourClasses.image(&input, n)?;
    ReceiverStrategy::new(n, 2, image, AnchorRule::LexMin)
}
