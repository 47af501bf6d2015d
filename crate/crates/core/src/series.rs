//! Formal series over weighted group rings with certified truncation.
//!
//! A [`NovikovSeries`] represents an element of the weighted completion of the
//! rational group ring: a formal sum of group elements with rational
//! coefficients whose support contains only finitely many elements above any
//! weight level. Since such elements may have infinite support, the
//! representation carries an explicit *cutoff*: the stored terms are exactly
//! the terms of the represented element at weights strictly above the cutoff,
//! and nothing is claimed at or below it. A cutoff of `-inf` means the series
//! is exact.
//!
//! Every operation propagates cutoffs pessimistically, so results are always
//! certified. The key rule is multiplication: writing `c(λ)` for the cutoff
//! and `‖λ‖` for the largest stored weight, the product is certified above
//!
//! ```text
//! max( c(λ) + ‖μ‖,  c(μ) + ‖λ‖,  c(λ) + c(μ) )
//! ```
//!
//! because an unknown term of one factor (at or below its cutoff) can be
//! lifted at most by the largest weight present in the other factor. Addition
//! takes the larger cutoff. The weight-preserving maps (conjugacy-class
//! projection, abelianization) keep the cutoff unchanged: unknown terms can
//! only land on classes at or below the same level.
//!
//! The *log-norm* of a series is the largest weight in its support, `-inf`
//! for zero — the logarithmic form of a sub-multiplicative norm, so that
//!
//! * `lognorm(λ) = -inf` iff `λ = 0`,
//! * `lognorm(-λ) = lognorm(λ)`,
//! * `lognorm(λ + μ) ≤ max(lognorm λ, lognorm μ)`,
//! * `lognorm(λ·μ) ≤ lognorm λ + lognorm μ`.
//!
//! For a truncated series the log-norm is certified only when some stored
//! term exceeds the cutoff (which the representation invariant guarantees
//! whenever any term is stored); asking for the log-norm of a series with no
//! terms above a finite cutoff is an error.
//!
//! `invert_one_minus`, `log_one_plus`, and `exp` evaluate power series in a
//! contracting argument (negative log-norm) to certified precision: the tail
//! `Σ_{m>N} c_m a^m` has log-norm at most `(N+1)·lognorm(a)`, so the minimal
//! sufficient depth is computable exactly.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::error::Error;
use crate::groups::{ConjClass, GroupElement, GroupKind, Weighting};
use crate::level::Level;
use crate::{Rational, Result};

/// A certified truncated series over a weighted group ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NovikovSeries {
    xi: Arc<Weighting>,
    terms: BTreeMap<GroupElement, Rational>,
    cutoff: Level,
}

/// A series over the free abelian group on the same generators; produced by
/// [`NovikovSeries::abelianize`] and consumed by determinant and zeta
/// machinery. Representationally identical to [`NovikovSeries`], with the
/// invariant that the underlying group is abelian.
pub type AbelianSeries = NovikovSeries;

impl NovikovSeries {
    /// The exact zero series.
    pub fn zero(xi: &Arc<Weighting>) -> NovikovSeries {
        NovikovSeries {
            xi: Arc::clone(xi),
            terms: BTreeMap::new(),
            cutoff: Level::NegInf,
        }
    }

    /// The exact unit series `1 · identity`.
    pub fn one(xi: &Arc<Weighting>) -> NovikovSeries {
        let mut terms = BTreeMap::new();
        terms.insert(xi.spec().identity(), Rational::one());
        NovikovSeries {
            xi: Arc::clone(xi),
            terms,
            cutoff: Level::NegInf,
        }
    }

    /// The exact single-term series `coeff · g`.
    pub fn monomial(
        xi: &Arc<Weighting>,
        g: &GroupElement,
        coeff: Rational,
    ) -> Result<NovikovSeries> {
        NovikovSeries::from_terms(xi, vec![(g.clone(), coeff)], Level::NegInf)
    }

    /// Build a series from raw terms, merging duplicates and enforcing the
    /// representation invariant: zero coefficients and terms at or below the
    /// cutoff are dropped.
    pub fn from_terms(
        xi: &Arc<Weighting>,
        raw: Vec<(GroupElement, Rational)>,
        cutoff: Level,
    ) -> Result<NovikovSeries> {
        let mut terms: BTreeMap<GroupElement, Rational> = BTreeMap::new();
        for (g, c) in raw {
            // Weight lookup doubles as the spec compatibility check.
            let _ = xi.weight(&g)?;
            let entry = terms.entry(g).or_insert_with(Rational::zero);
            *entry += c;
        }
        let mut out = NovikovSeries {
            xi: Arc::clone(xi),
            terms,
            cutoff,
        };
        out.normalize()?;
        Ok(out)
    }

    fn normalize(&mut self) -> Result<()> {
        let mut dead: Vec<GroupElement> = Vec::new();
        for (g, c) in &self.terms {
            if c.is_zero() || self.cutoff.cmp_rational(&self.xi.weight(g)?).is_ge() {
                dead.push(g.clone());
            }
        }
        for g in dead {
            self.terms.remove(&g);
        }
        Ok(())
    }

    pub fn weighting(&self) -> &Arc<Weighting> {
        &self.xi
    }

    pub fn cutoff(&self) -> &Level {
        &self.cutoff
    }

    pub fn terms(&self) -> impl Iterator<Item = (&GroupElement, &Rational)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, g: &GroupElement) -> Rational {
        self.terms.get(g).cloned().unwrap_or_else(Rational::zero)
    }

    /// True for the exact zero series (no terms *and* no truncation).
    pub fn is_exact_zero(&self) -> bool {
        self.terms.is_empty() && self.cutoff.is_neg_inf()
    }

    /// True when the series is exact, i.e. not truncated.
    pub fn is_exact(&self) -> bool {
        self.cutoff.is_neg_inf()
    }

    /// True when every coefficient is an integer.
    pub fn has_integer_coefficients(&self) -> bool {
        self.terms.values().all(|c| c.denom().is_one())
    }

    /// Largest weight among stored terms, `-inf` when none are stored.
    pub fn stored_log_norm(&self) -> Level {
        let mut best = Level::NegInf;
        for g in self.terms.keys() {
            let w = Level::Finite(self.xi.weight(g).expect("terms share the weighting"));
            if w > best {
                best = w;
            }
        }
        best
    }

    /// Certified log-norm. For an exact series this is exact; for a truncated
    /// series it is certified because stored terms always lie strictly above
    /// the cutoff. A truncated series with no stored terms has an unknown
    /// log-norm somewhere at or below its cutoff, which is an error.
    pub fn log_norm(&self) -> Result<Level> {
        if !self.terms.is_empty() {
            return Ok(self.stored_log_norm());
        }
        if self.cutoff.is_neg_inf() {
            Ok(Level::NegInf)
        } else {
            Err(Error::UncertifiedLogNorm {
                cutoff: self.cutoff.to_string(),
            })
        }
    }

    /// Certified upper bound for the log-norm: the larger of the stored
    /// log-norm and the cutoff. Never errors; used by the cutoff rules.
    pub fn log_norm_bound(&self) -> Level {
        self.stored_log_norm().join(&self.cutoff)
    }

    /// The weight of a group element under this series' weighting.
    pub fn weight_of(&self, g: &GroupElement) -> Rational {
        self.xi.weight(g).expect("terms share the weighting")
    }

    fn ensure_compatible(&self, other: &NovikovSeries) -> Result<()> {
        if self.xi.same_as(&other.xi) {
            Ok(())
        } else {
            Err(Error::WeightingMismatch)
        }
    }

    pub fn add(&self, other: &NovikovSeries) -> Result<NovikovSeries> {
        self.ensure_compatible(other)?;
        let mut terms = self.terms.clone();
        for (g, c) in &other.terms {
            let entry = terms.entry(g.clone()).or_insert_with(Rational::zero);
            *entry += c;
        }
        let mut out = NovikovSeries {
            xi: Arc::clone(&self.xi),
            terms,
            cutoff: self.cutoff.join(&other.cutoff),
        };
        out.normalize()?;
        Ok(out)
    }

    pub fn sub(&self, other: &NovikovSeries) -> Result<NovikovSeries> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> NovikovSeries {
        NovikovSeries {
            xi: Arc::clone(&self.xi),
            terms: self
                .terms
                .iter()
                .map(|(g, c)| (g.clone(), -c.clone()))
                .collect(),
            cutoff: self.cutoff.clone(),
        }
    }

    /// Multiply every coefficient by a rational. Scaling by zero yields the
    /// exact zero series (unknown terms scale to zero too).
    pub fn scalar_mul(&self, q: &Rational) -> NovikovSeries {
        if q.is_zero() {
            return NovikovSeries::zero(&self.xi);
        }
        NovikovSeries {
            xi: Arc::clone(&self.xi),
            terms: self
                .terms
                .iter()
                .map(|(g, c)| (g.clone(), c * q))
                .collect(),
            cutoff: self.cutoff.clone(),
        }
    }

    /// Convolution product, certified by the cutoff rule described in the
    /// module documentation.
    pub fn mul(&self, other: &NovikovSeries) -> Result<NovikovSeries> {
        self.ensure_compatible(other)?;
        let cutoff = mul_cutoff(
            &self.cutoff,
            &self.stored_log_norm(),
            &other.cutoff,
            &other.stored_log_norm(),
        );
        let mut terms: BTreeMap<GroupElement, Rational> = BTreeMap::new();
        for (g1, c1) in &self.terms {
            for (g2, c2) in &other.terms {
                let g = g1.multiply(g2)?;
                let c = c1 * c2;
                let entry = terms.entry(g).or_insert_with(Rational::zero);
                *entry += c;
            }
        }
        let mut out = NovikovSeries {
            xi: Arc::clone(&self.xi),
            terms,
            cutoff,
        };
        out.normalize()?;
        Ok(out)
    }

    /// Forget everything at or below `t`. Refinement is impossible, so `t`
    /// must not lie below the current cutoff.
    pub fn truncate(&self, t: &Level) -> Result<NovikovSeries> {
        if *t < self.cutoff {
            return Err(Error::CutoffTooCoarse {
                cutoff: self.cutoff.to_string(),
                requested: t.to_string(),
            });
        }
        Ok(self.coarsened(t))
    }

    /// Like [`truncate`](Self::truncate) but never errors: the new cutoff is
    /// the max of the old one and `t`.
    pub(crate) fn coarsened(&self, t: &Level) -> NovikovSeries {
        let cutoff = self.cutoff.join(t);
        let terms = self
            .terms
            .iter()
            .filter(|(g, _)| cutoff.cmp_rational(&self.weight_of(g)).is_lt())
            .map(|(g, c)| (g.clone(), c.clone()))
            .collect();
        NovikovSeries {
            xi: Arc::clone(&self.xi),
            terms,
            cutoff,
        }
    }

    /// True when the representation is certified at the given level, i.e. its
    /// cutoff does not exceed it.
    pub fn certified_at(&self, level: &Level) -> bool {
        self.cutoff <= *level
    }

    /// Compare stored terms strictly above a level; terms at or below it are
    /// ignored. Meaningful when both series are certified at that level.
    pub fn agrees_with(&self, other: &NovikovSeries, above: &Level) -> Result<bool> {
        self.ensure_compatible(other)?;
        let relevant = |s: &NovikovSeries| -> BTreeMap<GroupElement, Rational> {
            s.terms
                .iter()
                .filter(|(g, _)| above.cmp_rational(&s.weight_of(g)).is_lt())
                .map(|(g, c)| (g.clone(), c.clone()))
                .collect()
        };
        Ok(relevant(self) == relevant(other))
    }

    /// Project to conjugacy-class series: each term lands on the class of its
    /// element, coefficients of merging terms add. Weights are conjugation
    /// invariant, so the cutoff carries over unchanged.
    pub fn conjugacy_projection(&self) -> ConjClassSeries {
        let mut terms: BTreeMap<ConjClass, Rational> = BTreeMap::new();
        for (g, c) in &self.terms {
            let class = ConjClass::of(g);
            let entry = terms.entry(class).or_insert_with(Rational::zero);
            *entry += c;
        }
        terms.retain(|_, c| !c.is_zero());
        ConjClassSeries {
            xi: Arc::clone(&self.xi),
            terms,
            cutoff: self.cutoff.clone(),
        }
    }

    /// Push forward along abelianization, a weight-preserving ring map onto
    /// the free abelian group on the same generators.
    pub fn abelianize(&self) -> Result<AbelianSeries> {
        if self.xi.spec().kind() == GroupKind::FreeAbelian {
            return Ok(self.clone());
        }
        let ab_xi = self.xi.abelianized();
        let target = ab_xi.spec();
        let mut raw = Vec::with_capacity(self.terms.len());
        for (g, c) in &self.terms {
            raw.push((g.abelianized(target)?, c.clone()));
        }
        NovikovSeries::from_terms(&ab_xi, raw, self.cutoff.clone())
    }

    /// Certified inverse of `1 - self`, truncated at `t`.
    ///
    /// Requires the series to be contracting: its certified log-norm bound
    /// must be strictly negative. The result is the geometric sum
    /// `Σ_{m=0}^{N} self^m` with `N` the minimal depth whose tail is
    /// certified to lie at or below `t`, and satisfies
    /// `(1 - self) · result ≡ 1` above `t`.
    pub fn invert_one_minus(&self, t: &Rational) -> Result<NovikovSeries> {
        let result = self.power_series(t, Some(Rational::one()), |_| Rational::one())?;
        // Verify the defining property on the certified range.
        let unit = NovikovSeries::one(&self.xi).sub(self)?;
        let product = unit.mul(&result)?;
        let check_level = Level::Finite(t.clone()).join(product.cutoff());
        if !product.agrees_with(&NovikovSeries::one(&self.xi), &check_level)? {
            return Err(Error::CertificationFailed {
                what: "geometric inverse failed its defining identity".into(),
            });
        }
        Ok(result)
    }

    /// Certified logarithm `log(1 + self) = Σ_{m≥1} (-1)^{m+1} self^m / m`,
    /// truncated at `t`. Requires a contracting argument.
    pub fn log_one_plus(&self, t: &Rational) -> Result<NovikovSeries> {
        self.power_series(t, None, |m| {
            let sign = if m % 2 == 1 {
                Rational::one()
            } else {
                -Rational::one()
            };
            sign / crate::level::rational_int(m as i64)
        })
    }

    /// Certified exponential `Σ_{m≥0} self^m / m!`, truncated at `t`.
    /// Requires a contracting argument.
    pub fn exp(&self, t: &Rational) -> Result<NovikovSeries> {
        let mut factorial = Rational::one();
        let coeffs = move |m: u64| {
            // Called with m = 1, 2, ... in order; accumulate m! as we go.
            factorial *= crate::level::rational_int(m as i64);
            factorial.recip()
        };
        self.power_series(t, Some(Rational::one()), coeffs)
    }

    /// Shared kernel for the three contracting power series. Evaluates
    /// `c_0 + Σ_{m=1}^{N} coeff(m) · self^m` truncated at `t`, with `N`
    /// minimal such that the dropped tail is certified at or below `t`:
    /// every tail term `self^m` (m > N) has log-norm at most `m · ℓ ≤
    /// (N+1) · ℓ ≤ t`, where `ℓ < 0` bounds the log-norm of `self`.
    fn power_series(
        &self,
        t: &Rational,
        constant: Option<Rational>,
        mut coeff: impl FnMut(u64) -> Rational,
    ) -> Result<NovikovSeries> {
        let t_level = Level::Finite(t.clone());
        if !self.certified_at(&t_level) {
            return Err(Error::CutoffTooCoarse {
                cutoff: self.cutoff.to_string(),
                requested: t_level.to_string(),
            });
        }
        let bound = self.log_norm_bound();
        if !bound.is_negative() {
            return Err(Error::NotContracting {
                log_norm: bound.to_string(),
            });
        }
        let depth = match bound.as_finite() {
            None => 0, // exact zero argument: only the constant term survives
            Some(l) => contraction_depth(l, t),
        };
        let mut acc = match constant {
            Some(c0) => NovikovSeries::one(&self.xi).scalar_mul(&c0),
            None => NovikovSeries::zero(&self.xi),
        };
        let mut power = NovikovSeries::one(&self.xi);
        for m in 1..=depth {
            power = power.mul(self)?.coarsened(&t_level);
            if power.terms.is_empty() && power.cutoff <= t_level {
                // Contracting powers only sink further; nothing left to add.
                break;
            }
            acc = acc.add(&power.scalar_mul(&coeff(m)))?;
        }
        acc = acc.coarsened(&t_level);
        if !acc.certified_at(&t_level) {
            return Err(Error::CertificationFailed {
                what: "power series sum lost certification".into(),
            });
        }
        Ok(acc)
    }
}

/// Minimal `N ≥ 0` with `(N+1) · l ≤ t` for a strictly negative `l`:
/// equivalently `N + 1 ≥ t / l`.
fn contraction_depth(l: &Rational, t: &Rational) -> u64 {
    use num_traits::ToPrimitive;
    debug_assert!(l.is_negative());
    let ratio = t / l;
    let n_plus_one = ratio.ceil().to_integer();
    if n_plus_one <= 1.into() {
        0
    } else {
        (n_plus_one - 1i32)
            .to_u64()
            .expect("contraction depth fits in u64")
    }
}

/// The certified cutoff of a product, from the factors' cutoffs and stored
/// log-norms.
pub(crate) fn mul_cutoff(c1: &Level, n1: &Level, c2: &Level, n2: &Level) -> Level {
    c1.plus(n2).join(&c2.plus(n1)).join(&c1.plus(c2))
}

/// A series of conjugacy classes: the image of a trace-like quantity. Same
/// certification scheme as [`NovikovSeries`], but keyed by canonical classes
/// and without a ring structure (classes do not multiply).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjClassSeries {
    xi: Arc<Weighting>,
    terms: BTreeMap<ConjClass, Rational>,
    cutoff: Level,
}

impl ConjClassSeries {
    pub fn zero(xi: &Arc<Weighting>) -> ConjClassSeries {
        ConjClassSeries {
            xi: Arc::clone(xi),
            terms: BTreeMap::new(),
            cutoff: Level::NegInf,
        }
    }

    pub fn from_terms(
        xi: &Arc<Weighting>,
        raw: Vec<(ConjClass, Rational)>,
        cutoff: Level,
    ) -> Result<ConjClassSeries> {
        let mut terms: BTreeMap<ConjClass, Rational> = BTreeMap::new();
        for (class, c) in raw {
            let _ = xi.class_weight(&class)?;
            let entry = terms.entry(class).or_insert_with(Rational::zero);
            *entry += c;
        }
        let mut out = ConjClassSeries {
            xi: Arc::clone(xi),
            terms,
            cutoff,
        };
        out.normalize();
        Ok(out)
    }

    fn normalize(&mut self) {
        let xi = Arc::clone(&self.xi);
        let cutoff = self.cutoff.clone();
        self.terms.retain(|class, c| {
            !c.is_zero()
                && cutoff
                    .cmp_rational(&xi.class_weight(class).expect("terms share the weighting"))
                    .is_lt()
        });
    }

    pub fn weighting(&self) -> &Arc<Weighting> {
        &self.xi
    }

    pub fn cutoff(&self) -> &Level {
        &self.cutoff
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ConjClass, &Rational)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, class: &ConjClass) -> Rational {
        self.terms
            .get(class)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn is_exact_zero(&self) -> bool {
        self.terms.is_empty() && self.cutoff.is_neg_inf()
    }

    pub fn class_weight(&self, class: &ConjClass) -> Rational {
        self.xi
            .class_weight(class)
            .expect("terms share the weighting")
    }

    pub fn stored_log_norm(&self) -> Level {
        let mut best = Level::NegInf;
        for class in self.terms.keys() {
            let w = Level::Finite(self.class_weight(class));
            if w > best {
                best = w;
            }
        }
        best
    }

    pub fn log_norm_bound(&self) -> Level {
        self.stored_log_norm().join(&self.cutoff)
    }

    fn ensure_compatible(&self, other: &ConjClassSeries) -> Result<()> {
        if self.xi.same_as(&other.xi) {
            Ok(())
        } else {
            Err(Error::WeightingMismatch)
        }
    }

    pub fn add(&self, other: &ConjClassSeries) -> Result<ConjClassSeries> {
        self.ensure_compatible(other)?;
        let mut terms = self.terms.clone();
        for (class, c) in &other.terms {
            let entry = terms.entry(class.clone()).or_insert_with(Rational::zero);
            *entry += c;
        }
        let mut out = ConjClassSeries {
            xi: Arc::clone(&self.xi),
            terms,
            cutoff: self.cutoff.join(&other.cutoff),
        };
        out.normalize();
        Ok(out)
    }

    pub fn neg(&self) -> ConjClassSeries {
        ConjClassSeries {
            xi: Arc::clone(&self.xi),
            terms: self
                .terms
                .iter()
                .map(|(g, c)| (g.clone(), -c.clone()))
                .collect(),
            cutoff: self.cutoff.clone(),
        }
    }

    pub fn scalar_mul(&self, q: &Rational) -> ConjClassSeries {
        if q.is_zero() {
            return ConjClassSeries::zero(&self.xi);
        }
        ConjClassSeries {
            xi: Arc::clone(&self.xi),
            terms: self
                .terms
                .iter()
                .map(|(g, c)| (g.clone(), c * q))
                .collect(),
            cutoff: self.cutoff.clone(),
        }
    }

    pub fn truncate(&self, t: &Level) -> Result<ConjClassSeries> {
        if *t < self.cutoff {
            return Err(Error::CutoffTooCoarse {
                cutoff: self.cutoff.to_string(),
                requested: t.to_string(),
            });
        }
        Ok(self.coarsened(t))
    }

    pub(crate) fn coarsened(&self, t: &Level) -> ConjClassSeries {
        let mut out = ConjClassSeries {
            xi: Arc::clone(&self.xi),
            terms: self.terms.clone(),
            cutoff: self.cutoff.join(t),
        };
        out.normalize();
        out
    }

    pub fn certified_at(&self, level: &Level) -> bool {
        self.cutoff <= *level
    }

    pub fn agrees_with(&self, other: &ConjClassSeries, above: &Level) -> Result<bool> {
        self.ensure_compatible(other)?;
        let relevant = |s: &ConjClassSeries| -> BTreeMap<ConjClass, Rational> {
            s.terms
                .iter()
                .filter(|(class, _)| above.cmp_rational(&s.class_weight(class)).is_lt())
                .map(|(class, c)| (class.clone(), c.clone()))
                .collect()
        };
        Ok(relevant(self) == relevant(other))
    }

    /// Push classes forward to the free abelian group (a class maps to the
    /// exponent vector of any representative).
    pub fn abelianize(&self) -> Result<AbelianSeries> {
        let ab_xi = self.xi.abelianized();
        let target = ab_xi.spec();
        let mut raw = Vec::with_capacity(self.terms.len());
        for (class, c) in &self.terms {
            raw.push((class.representative().abelianized(target)?, c.clone()));
        }
        NovikovSeries::from_terms(&ab_xi, raw, self.cutoff.clone())
    }
}
