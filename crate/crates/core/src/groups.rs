//! Weighted groups: free and free abelian groups of finite rank, their
//! elements, rational weight homomorphisms, and conjugacy classes.
//!
//! A [`GroupSpec`] fixes the ambient group: a kind (free or free abelian) and
//! an ordered list of generator names. Elements store their spec so that
//! operations can reject mixes of different groups, but equality and ordering
//! of elements look only at the written form — a freely reduced syllable word
//! for free groups, an exponent vector for free abelian ones.
//!
//! A [`Weighting`] attaches an exact rational weight to each generator and
//! extends additively: the weight of a word is the sum of the weights of its
//! letters. Weights are group homomorphisms to the rationals, so they are
//! constant on conjugacy classes.
//!
//! Conjugacy classes of free groups are represented canonically: cyclically
//! reduce the word, then take the lexicographically least rotation of its
//! letter sequence, where letters are ordered by generator declaration order
//! with each generator preceding its inverse. For abelian groups a class is
//! just the element itself.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::Error;
use crate::{Rational, Result};

/// The two supported kinds of ambient group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GroupKind {
    Free,
    FreeAbelian,
}

/// An ambient group: kind plus ordered generator names.
#[derive(Debug, PartialEq, Eq)]
pub struct GroupSpec {
    kind: GroupKind,
    generators: Vec<String>,
}

impl GroupSpec {
    /// A free group on the given generator names.
    pub fn free<I, S>(names: I) -> Result<Arc<GroupSpec>>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        GroupSpec::new(GroupKind::Free, names)
    }

    /// A free abelian group on the given generator names.
    pub fn free_abelian<I, S>(names: I) -> Result<Arc<GroupSpec>>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        GroupSpec::new(GroupKind::FreeAbelian, names)
    }

    /// Generator names must be nonempty, free of whitespace and `^`, and
    /// pairwise distinct; they double as the word syntax alphabet.
    pub fn new<I, S>(kind: GroupKind, names: I) -> Result<Arc<GroupSpec>>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let generators: Vec<String> = names.into_iter().map(Into::into).collect();
        if generators.is_empty() {
            return Err(Error::BadGroupSpec {
                reason: "at least one generator is required".into(),
            });
        }
        for name in &generators {
            if name.is_empty() || name.contains(char::is_whitespace) || name.contains('^') {
                return Err(Error::BadGroupSpec {
                    reason: format!("invalid generator name `{name}`"),
                });
            }
        }
        for (i, name) in generators.iter().enumerate() {
            if generators[..i].contains(name) {
                return Err(Error::BadGroupSpec {
                    reason: format!("duplicate generator name `{name}`"),
                });
            }
        }
        Ok(Arc::new(GroupSpec { kind, generators }))
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn generator_names(&self) -> &[String] {
        &self.generators
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g == name)
    }

    /// The free abelian group on the same generators (identity if already
    /// abelian). Abelianization of elements and series lands here.
    pub fn abelianized(self: &Arc<Self>) -> Arc<GroupSpec> {
        match self.kind {
            GroupKind::FreeAbelian => Arc::clone(self),
            GroupKind::Free => Arc::new(GroupSpec {
                kind: GroupKind::FreeAbelian,
                generators: self.generators.clone(),
            }),
        }
    }

    /// The identity element.
    pub fn identity(self: &Arc<Self>) -> GroupElement {
        let repr = match self.kind {
            GroupKind::Free => Repr::Free(Vec::new()),
            GroupKind::FreeAbelian => Repr::Abelian(vec![0; self.rank()]),
        };
        GroupElement {
            spec: Arc::clone(self),
            repr,
        }
    }

    /// The `i`-th generator as an element.
    pub fn generator(self: &Arc<Self>, i: usize) -> Result<GroupElement> {
        if i >= self.rank() {
            return Err(Error::BadGroupSpec {
                reason: format!("generator index {i} out of range"),
            });
        }
        let repr = match self.kind {
            GroupKind::Free => Repr::Free(vec![Syllable { gen: i, exp: 1 }]),
            GroupKind::FreeAbelian => {
                let mut v = vec![0i64; self.rank()];
                v[i] = 1;
                Repr::Abelian(v)
            }
        };
        Ok(GroupElement {
            spec: Arc::clone(self),
            repr,
        })
    }

    fn same_as(&self, other: &GroupSpec) -> bool {
        std::ptr::eq(self, other) || self == other
    }
}

/// One maximal run `generator^exponent` of a reduced word; the exponent is
/// never zero and adjacent syllables use distinct generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Syllable {
    pub gen: usize,
    pub exp: i64,
}

/// A single letter of a word: a generator index and whether it is inverted.
/// Letters order by generator first, with the plain generator before its
/// inverse; this is the alphabet for all lexicographic comparisons.
type Letter = (usize, bool);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Repr {
    Free(Vec<Syllable>),
    Abelian(Vec<i64>),
}

/// An element of a free or free abelian group.
///
/// Equality, ordering, and hashing are determined by the written form alone;
/// operations that combine two elements verify that their specs agree and
/// return [`Error::SpecMismatch`] otherwise. Free elements compare by the
/// lexicographic order of their letter sequences (prefixes first), abelian
/// ones by their exponent vectors.
#[derive(Clone, Debug)]
pub struct GroupElement {
    spec: Arc<GroupSpec>,
    repr: Repr,
}

impl GroupElement {
    pub fn spec(&self) -> &Arc<GroupSpec> {
        &self.spec
    }

    pub fn is_identity(&self) -> bool {
        match &self.repr {
            Repr::Free(s) => s.is_empty(),
            Repr::Abelian(v) => v.iter().all(|e| *e == 0),
        }
    }

    /// Build an element from raw `(generator, exponent)` pairs, freely
    /// reducing in the free case and accumulating exponents in the abelian
    /// case. Pairs with zero exponent are allowed and ignored.
    pub fn from_pairs(spec: &Arc<GroupSpec>, pairs: &[(usize, i64)]) -> Result<GroupElement> {
        for (gen, _) in pairs {
            if *gen >= spec.rank() {
                return Err(Error::BadGroupSpec {
                    reason: format!("generator index {gen} out of range"),
                });
            }
        }
        let repr = match spec.kind {
            GroupKind::Free => {
                let mut stack: Vec<Syllable> = Vec::with_capacity(pairs.len());
                for &(gen, exp) in pairs {
                    push_reduced(&mut stack, Syllable { gen, exp });
                }
                Repr::Free(stack)
            }
            GroupKind::FreeAbelian => {
                let mut v = vec![0i64; spec.rank()];
                for &(gen, exp) in pairs {
                    v[gen] += exp;
                }
                Repr::Abelian(v)
            }
        };
        Ok(GroupElement {
            spec: Arc::clone(spec),
            repr,
        })
    }

    /// Build an abelian element from an exponent vector.
    pub fn from_exponents(spec: &Arc<GroupSpec>, exponents: Vec<i64>) -> Result<GroupElement> {
        if spec.kind != GroupKind::FreeAbelian {
            return Err(Error::NotAbelian);
        }
        if exponents.len() != spec.rank() {
            return Err(Error::ShapeMismatch {
                context: format!(
                    "exponent vector has length {}, group has rank {}",
                    exponents.len(),
                    spec.rank()
                ),
            });
        }
        Ok(GroupElement {
            spec: Arc::clone(spec),
            repr: Repr::Abelian(exponents),
        })
    }

    /// The reduced syllables of a free element, `None` for abelian ones.
    pub fn syllables(&self) -> Option<&[Syllable]> {
        match &self.repr {
            Repr::Free(s) => Some(s),
            Repr::Abelian(_) => None,
        }
    }

    /// The exponent vector of an abelian element, `None` for free ones.
    pub fn exponents(&self) -> Option<&[i64]> {
        match &self.repr {
            Repr::Free(_) => None,
            Repr::Abelian(v) => Some(v),
        }
    }

    /// Group multiplication `self · other`.
    pub fn multiply(&self, other: &GroupElement) -> Result<GroupElement> {
        if !self.spec.same_as(&other.spec) {
            return Err(Error::SpecMismatch);
        }
        let repr = match (&self.repr, &other.repr) {
            (Repr::Free(a), Repr::Free(b)) => {
                let mut stack = a.clone();
                for s in b {
                    push_reduced(&mut stack, *s);
                }
                Repr::Free(stack)
            }
            (Repr::Abelian(a), Repr::Abelian(b)) => {
                Repr::Abelian(a.iter().zip(b).map(|(x, y)| x + y).collect())
            }
            _ => return Err(Error::SpecMismatch),
        };
        Ok(GroupElement {
            spec: Arc::clone(&self.spec),
            repr,
        })
    }

    pub fn inverse(&self) -> GroupElement {
        let repr = match &self.repr {
            Repr::Free(s) => Repr::Free(
                s.iter()
                    .rev()
                    .map(|syl| Syllable {
                        gen: syl.gen,
                        exp: -syl.exp,
                    })
                    .collect(),
            ),
            Repr::Abelian(v) => Repr::Abelian(v.iter().map(|e| -e).collect()),
        };
        GroupElement {
            spec: Arc::clone(&self.spec),
            repr,
        }
    }

    /// `self` raised to an integer power.
    pub fn pow(&self, k: i64) -> GroupElement {
        if k == 0 {
            return self.spec.identity();
        }
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut acc = base.clone();
        for _ in 1..k.unsigned_abs() {
            acc = acc
                .multiply(&base)
                .expect("powers of one element share a spec");
        }
        acc
    }

    /// The image in the free abelian group on the same generators.
    pub fn abelianized(&self, target: &Arc<GroupSpec>) -> Result<GroupElement> {
        if target.kind != GroupKind::FreeAbelian || target.generators != self.spec.generators {
            return Err(Error::SpecMismatch);
        }
        let v = match &self.repr {
            Repr::Abelian(v) => v.clone(),
            Repr::Free(s) => {
                let mut v = vec![0i64; target.rank()];
                for syl in s {
                    v[syl.gen] += syl.exp;
                }
                v
            }
        };
        Ok(GroupElement {
            spec: Arc::clone(target),
            repr: Repr::Abelian(v),
        })
    }

    /// Parse the word syntax: whitespace-separated factors `name` or
    /// `name^k` with integer `k`; the empty string is the identity.
    pub fn parse(spec: &Arc<GroupSpec>, text: &str) -> Result<GroupElement> {
        let mut pairs = Vec::new();
        for token in text.split_whitespace() {
            let (name, exp) = match token.split_once('^') {
                None => (token, 1i64),
                Some((name, e)) => {
                    let exp = e.parse::<i64>().map_err(|_| Error::BadWord {
                        text: token.to_string(),
                        reason: format!("bad exponent `{e}`"),
                    })?;
                    (name, exp)
                }
            };
            let gen = spec
                .generator_index(name)
                .ok_or_else(|| Error::UnknownGenerator {
                    name: name.to_string(),
                })?;
            pairs.push((gen, exp));
        }
        GroupElement::from_pairs(spec, &pairs)
    }

    /// The word syntax form; the identity renders as the empty string.
    pub fn to_word_string(&self) -> String {
        let names = &self.spec.generators;
        match &self.repr {
            Repr::Free(s) => s
                .iter()
                .map(|syl| format_factor(&names[syl.gen], syl.exp))
                .collect::<Vec<_>>()
                .join(" "),
            Repr::Abelian(v) => v
                .iter()
                .enumerate()
                .filter(|(_, e)| **e != 0)
                .map(|(i, e)| format_factor(&names[i], *e))
                .collect::<Vec<_>>()
                .join(" "),
        }
    }

    /// Total number of letters when the word is spelled out.
    pub fn letter_len(&self) -> usize {
        match &self.repr {
            Repr::Free(s) => s.iter().map(|syl| syl.exp.unsigned_abs() as usize).sum(),
            Repr::Abelian(v) => v.iter().map(|e| e.unsigned_abs() as usize).sum(),
        }
    }

    fn letters(&self) -> Vec<Letter> {
        match &self.repr {
            Repr::Free(s) => {
                let mut out = Vec::with_capacity(self.letter_len());
                for syl in s {
                    let letter = (syl.gen, syl.exp < 0);
                    for _ in 0..syl.exp.unsigned_abs() {
                        out.push(letter);
                    }
                }
                out
            }
            // Abelian elements have a canonical spelling: generators in
            // declaration order, exponents as written.
            Repr::Abelian(v) => {
                let mut out = Vec::with_capacity(self.letter_len());
                for (gen, e) in v.iter().enumerate() {
                    let letter = (gen, *e < 0);
                    for _ in 0..e.unsigned_abs() {
                        out.push(letter);
                    }
                }
                out
            }
        }
    }

    fn from_letters(spec: &Arc<GroupSpec>, letters: &[Letter]) -> GroupElement {
        let mut syllables: Vec<Syllable> = Vec::new();
        for &(gen, inv) in letters {
            let exp = if inv { -1 } else { 1 };
            match syllables.last_mut() {
                Some(last) if last.gen == gen && (last.exp < 0) == inv => last.exp += exp,
                _ => syllables.push(Syllable { gen, exp }),
            }
        }
        GroupElement {
            spec: Arc::clone(spec),
            repr: Repr::Free(syllables),
        }
    }
}

fn format_factor(name: &str, exp: i64) -> String {
    if exp == 1 {
        name.to_string()
    } else {
        format!("{name}^{exp}")
    }
}

/// Push a syllable onto a reduced stack, cancelling against the top as long
/// as cancellation propagates. A single pass over the input with this
/// primitive yields the freely reduced form.
fn push_reduced(stack: &mut Vec<Syllable>, s: Syllable) {
    if s.exp == 0 {
        return;
    }
    match stack.last_mut() {
        Some(top) if top.gen == s.gen => {
            top.exp += s.exp;
            if top.exp == 0 {
                stack.pop();
            }
        }
        _ => stack.push(s),
    }
}

impl PartialEq for GroupElement {
    fn eq(&self, other: &Self) -> bool {
        self.repr == other.repr
    }
}

impl Eq for GroupElement {}

impl std::hash::Hash for GroupElement {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.repr.hash(state);
    }
}

impl PartialOrd for GroupElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GroupElement {
    /// Lexicographic on letter sequences for free elements (prefixes first,
    /// plain generators before inverses), lexicographic on exponent vectors
    /// for abelian ones. Free elements sort before abelian ones so the order
    /// is total, though maps never mix the two.
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.repr, &other.repr) {
            (Repr::Free(a), Repr::Free(b)) => {
                let left = SyllableLetters::new(a);
                let right = SyllableLetters::new(b);
                left.cmp(right)
            }
            (Repr::Abelian(a), Repr::Abelian(b)) => a.cmp(b),
            (Repr::Free(_), Repr::Abelian(_)) => Ordering::Less,
            (Repr::Abelian(_), Repr::Free(_)) => Ordering::Greater,
        }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            write!(f, "1")
        } else {
            write!(f, "{}", self.to_word_string())
        }
    }
}

/// Letter-by-letter iterator over a syllable word, without materializing the
/// expansion; used by the ordering.
struct SyllableLetters<'a> {
    syllables: &'a [Syllable],
    idx: usize,
    remaining: u64,
}

impl<'a> SyllableLetters<'a> {
    fn new(syllables: &'a [Syllable]) -> Self {
        let remaining = syllables.first().map_or(0, |s| s.exp.unsigned_abs());
        SyllableLetters {
            syllables,
            idx: 0,
            remaining,
        }
    }
}

impl Iterator for SyllableLetters<'_> {
    type Item = Letter;

    fn next(&mut self) -> Option<Letter> {
        while self.remaining == 0 {
            self.idx += 1;
            if self.idx >= self.syllables.len() {
                return None;
            }
            self.remaining = self.syllables[self.idx].exp.unsigned_abs();
        }
        if self.idx >= self.syllables.len() {
            return None;
        }
        let s = self.syllables[self.idx];
        self.remaining -= 1;
        Some((s.gen, s.exp < 0))
    }
}

/// A rational weight homomorphism on a group: one exact rational per
/// generator, extended additively to words.
#[derive(Debug, PartialEq, Eq)]
pub struct Weighting {
    spec: Arc<GroupSpec>,
    weights: Vec<Rational>,
}

impl Weighting {
    pub fn new(spec: &Arc<GroupSpec>, weights: Vec<Rational>) -> Result<Arc<Weighting>> {
        if weights.len() != spec.rank() {
            return Err(Error::ShapeMismatch {
                context: format!(
                    "{} weights given for a group of rank {}",
                    weights.len(),
                    spec.rank()
                ),
            });
        }
        Ok(Arc::new(Weighting {
            spec: Arc::clone(spec),
            weights,
        }))
    }

    pub fn spec(&self) -> &Arc<GroupSpec> {
        &self.spec
    }

    pub fn generator_weights(&self) -> &[Rational] {
        &self.weights
    }

    /// The weight of an element: the sum of its letters' generator weights.
    pub fn weight(&self, g: &GroupElement) -> Result<Rational> {
        if !self.spec.same_as(&g.spec) {
            return Err(Error::WeightingMismatch);
        }
        let mut total = Rational::zero();
        match &g.repr {
            Repr::Free(s) => {
                for syl in s {
                    total += &self.weights[syl.gen] * Rational::from(BigInt::from(syl.exp));
                }
            }
            Repr::Abelian(v) => {
                for (i, e) in v.iter().enumerate() {
                    total += &self.weights[i] * Rational::from(BigInt::from(*e));
                }
            }
        }
        Ok(total)
    }

    /// The weight of a conjugacy class (weights are conjugation invariant).
    pub fn class_weight(&self, c: &ConjClass) -> Result<Rational> {
        self.weight(&c.canonical)
    }

    /// The induced weighting on the free abelian group on the same
    /// generators.
    pub fn abelianized(self: &Arc<Self>) -> Arc<Weighting> {
        if self.spec.kind == GroupKind::FreeAbelian {
            return Arc::clone(self);
        }
        Arc::new(Weighting {
            spec: self.spec.abelianized(),
            weights: self.weights.clone(),
        })
    }

    /// Two weightings are interchangeable when they agree as functions.
    pub fn same_as(&self, other: &Weighting) -> bool {
        std::ptr::eq(self, other) || (self.spec.same_as(&other.spec) && self.weights == other.weights)
    }
}

/// A conjugacy class, held as its canonical representative.
///
/// For free groups the representative is the lexicographically least rotation
/// of the cyclically reduced word; for abelian groups it is the element
/// itself. Equality, ordering, and hashing all defer to the representative.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConjClass {
    canonical: GroupElement,
}

impl ConjClass {
    /// The class of an element.
    pub fn of(g: &GroupElement) -> ConjClass {
        match &g.repr {
            Repr::Abelian(_) => ConjClass {
                canonical: g.clone(),
            },
            Repr::Free(_) => {
                let mut letters = g.letters();
                cyclically_reduce(&mut letters);
                let start = least_rotation(&letters);
                letters.rotate_left(start);
                ConjClass {
                    canonical: GroupElement::from_letters(&g.spec, &letters),
                }
            }
        }
    }

    pub fn representative(&self) -> &GroupElement {
        &self.canonical
    }
}

impl fmt::Display for ConjClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.canonical)
    }
}

/// Strip cancelling first/last letter pairs until the word is cyclically
/// reduced.
fn cyclically_reduce(letters: &mut Vec<Letter>) {
    while letters.len() >= 2 {
        let (g1, i1) = letters[0];
        let (g2, i2) = letters[letters.len() - 1];
        if g1 == g2 && i1 != i2 {
            letters.pop();
            letters.remove(0);
        } else {
            break;
        }
    }
}

/// Index of the lexicographically least rotation (Booth-style two-pointer
/// scan, linear time).
fn least_rotation(letters: &[Letter]) -> usize {
    let n = letters.len();
    if n == 0 {
        return 0;
    }
    let (mut i, mut j, mut k) = (0usize, 1usize, 0usize);
    while i < n && j < n && k < n {
        let a = letters[(i + k) % n];
        let b = letters[(j + k) % n];
        match a.cmp(&b) {
            Ordering::Equal => k += 1,
            Ordering::Greater => {
                i += k + 1;
                if i == j {
                    i += 1;
                }
                k = 0;
            }
            Ordering::Less => {
                j += k + 1;
                if j == i {
                    j += 1;
                }
                k = 0;
            }
        }
    }
    i.min(j)
}
