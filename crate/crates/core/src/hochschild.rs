//! Tensor chains over the series ring and the trace-style logarithm of a
//! unit `I - A`.
//!
//! The logarithm of a unit has two independent computations that must agree:
//!
//! * **directly**, as `-Σ_{m≥1} project(tr A^m)/m`, where `project` sends a
//!   series to its conjugacy-class series;
//! * **through a trace chain**: pair the unit with a certified inverse to
//!   form the degree-one chain `Σ_{ij} U_ij ⊗ (U^{-1})_ji`, check it is a
//!   cycle, and apply the class pairing.
//!
//! The pairing divides by the class weight — `g ⊗ h` contributes
//! `weight(g)/weight(gh)` of the class of `gh` — which is what turns the
//! geometric series of the inverse into the `1/m` coefficients of the
//! logarithm. Classes of non-negative weight are killed by the pairing.
//!
//! Chains carry the same certified-cutoff discipline as series: the weight
//! of a tensor is the sum of the weights of its legs, and stored tensors lie
//! strictly above the cutoff.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::error::Error;
use crate::groups::{GroupElement, Weighting};
use crate::level::Level;
use crate::regmat::{for_each_certified_power, not_regular_error, regularity, RingMatrix};
use crate::series::{mul_cutoff, ConjClassSeries, NovikovSeries};
use crate::{Rational, Result};

/// A formal combination of two-leg tensors `g ⊗ h` with a certified cutoff.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain1 {
    xi: Arc<Weighting>,
    terms: BTreeMap<(GroupElement, GroupElement), Rational>,
    cutoff: Level,
}

/// A formal combination of three-leg tensors `g ⊗ h ⊗ k` with a certified
/// cutoff.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain2 {
    xi: Arc<Weighting>,
    terms: BTreeMap<(GroupElement, GroupElement, GroupElement), Rational>,
    cutoff: Level,
}

impl Chain1 {
    pub fn zero(xi: &Arc<Weighting>) -> Chain1 {
        Chain1 {
            xi: Arc::clone(xi),
            terms: BTreeMap::new(),
            cutoff: Level::NegInf,
        }
    }

    pub fn from_terms(
        xi: &Arc<Weighting>,
        raw: Vec<(GroupElement, GroupElement, Rational)>,
        cutoff: Level,
    ) -> Result<Chain1> {
        let mut terms: BTreeMap<(GroupElement, GroupElement), Rational> = BTreeMap::new();
        for (g, h, c) in raw {
            let _ = xi.weight(&g)?;
            let _ = xi.weight(&h)?;
            *terms.entry((g, h)).or_insert_with(Rational::zero) += &c;
        }
        let mut out = Chain1 {
            xi: Arc::clone(xi),
            terms,
            cutoff,
        };
        out.normalize();
        Ok(out)
    }

    /// The single tensor `c · (g ⊗ h)`, exact.
    pub fn tensor(
        xi: &Arc<Weighting>,
        g: &GroupElement,
        h: &GroupElement,
        c: Rational,
    ) -> Result<Chain1> {
        Chain1::from_terms(xi, vec![(g.clone(), h.clone(), c)], Level::NegInf)
    }

    fn normalize(&mut self) {
        let xi = Arc::clone(&self.xi);
        let cutoff = self.cutoff.clone();
        self.terms.retain(|(g, h), c| {
            let w = xi.weight(g).expect("terms share the weighting")
                + xi.weight(h).expect("terms share the weighting");
            !c.is_zero() && cutoff.cmp_rational(&w).is_lt()
        });
    }

    pub fn weighting(&self) -> &Arc<Weighting> {
        &self.xi
    }

    pub fn cutoff(&self) -> &Level {
        &self.cutoff
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(GroupElement, GroupElement), &Rational)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Weight of a tensor: the sum of its legs' weights.
    pub fn weight_of(&self, g: &GroupElement, h: &GroupElement) -> Rational {
        self.xi.weight(g).expect("validated on entry")
            + self.xi.weight(h).expect("validated on entry")
    }

    fn ensure_compatible(&self, other: &Chain1) -> Result<()> {
        if self.xi.same_as(&other.xi) {
            Ok(())
        } else {
            Err(Error::WeightingMismatch)
        }
    }

    pub fn add(&self, other: &Chain1) -> Result<Chain1> {
        self.ensure_compatible(other)?;
        let mut terms = self.terms.clone();
        for (k, c) in &other.terms {
            *terms.entry(k.clone()).or_insert_with(Rational::zero) += c;
        }
        let mut out = Chain1 {
            xi: Arc::clone(&self.xi),
            terms,
            cutoff: self.cutoff.join(&other.cutoff),
        };
        out.normalize();
        Ok(out)
    }

    pub fn neg(&self) -> Chain1 {
        Chain1 {
            xi: Arc::clone(&self.xi),
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k.clone(), -c.clone()))
                .collect(),
            cutoff: self.cutoff.clone(),
        }
    }

    pub fn scalar_mul(&self, q: &Rational) -> Chain1 {
        if q.is_zero() {
            return Chain1::zero(&self.xi);
        }
        Chain1 {
            xi: Arc::clone(&self.xi),
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k.clone(), c * q))
                .collect(),
            cutoff: self.cutoff.clone(),
        }
    }
}

impl Chain2 {
    pub fn zero(xi: &Arc<Weighting>) -> Chain2 {
        Chain2 {
            xi: Arc::clone(xi),
            terms: BTreeMap::new(),
            cutoff: Level::NegInf,
        }
    }

    pub fn from_terms(
        xi: &Arc<Weighting>,
        raw: Vec<(GroupElement, GroupElement, GroupElement, Rational)>,
        cutoff: Level,
    ) -> Result<Chain2> {
        let mut terms: BTreeMap<(GroupElement, GroupElement, GroupElement), Rational> =
            BTreeMap::new();
        for (g, h, k, c) in raw {
            let _ = xi.weight(&g)?;
            let _ = xi.weight(&h)?;
            let _ = xi.weight(&k)?;
            *terms.entry((g, h, k)).or_insert_with(Rational::zero) += &c;
        }
        let mut out = Chain2 {
            xi: Arc::clone(xi),
            terms,
            cutoff,
        };
        out.normalize();
        Ok(out)
    }

    pub fn tensor(
        xi: &Arc<Weighting>,
        g: &GroupElement,
        h: &GroupElement,
        k: &GroupElement,
        c: Rational,
    ) -> Result<Chain2> {
        Chain2::from_terms(xi, vec![(g.clone(), h.clone(), k.clone(), c)], Level::NegInf)
    }

    fn normalize(&mut self) {
        let xi = Arc::clone(&self.xi);
        let cutoff = self.cutoff.clone();
        self.terms.retain(|(g, h, k), c| {
            let w = xi.weight(g).expect("terms share the weighting")
                + xi.weight(h).expect("terms share the weighting")
                + xi.weight(k).expect("terms share the weighting");
            !c.is_zero() && cutoff.cmp_rational(&w).is_lt()
        });
    }

    pub fn weighting(&self) -> &Arc<Weighting> {
        &self.xi
    }

    pub fn cutoff(&self) -> &Level {
        &self.cutoff
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(
        &self,
    ) -> impl Iterator<Item = (&(GroupElement, GroupElement, GroupElement), &Rational)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &Chain2) -> Result<Chain2> {
        if !self.xi.same_as(&other.xi) {
            return Err(Error::WeightingMismatch);
        }
        let mut terms = self.terms.clone();
        for (k, c) in &other.terms {
            *terms.entry(k.clone()).or_insert_with(Rational::zero) += c;
        }
        let mut out = Chain2 {
            xi: Arc::clone(&self.xi),
            terms,
            cutoff: self.cutoff.join(&other.cutoff),
        };
        out.normalize();
        Ok(out)
    }

    pub fn scalar_mul(&self, q: &Rational) -> Chain2 {
        if q.is_zero() {
            return Chain2::zero(&self.xi);
        }
        Chain2 {
            xi: Arc::clone(&self.xi),
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k.clone(), c * q))
                .collect(),
            cutoff: self.cutoff.clone(),
        }
    }
}

/// Degree-one boundary: `g ⊗ h ↦ hg - gh`, extended linearly. Both images
/// have the tensor's weight, so the cutoff carries over unchanged.
pub fn boundary_one(chain: &Chain1) -> Result<NovikovSeries> {
    let mut raw = Vec::with_capacity(2 * chain.terms.len());
    for ((g, h), c) in &chain.terms {
        raw.push((h.multiply(g)?, c.clone()));
        raw.push((g.multiply(h)?, -c.clone()));
    }
    NovikovSeries::from_terms(&chain.xi, raw, chain.cutoff.clone())
}

/// Degree-two boundary: `g ⊗ h ⊗ k ↦ h ⊗ kg - gh ⊗ k + g ⊗ hk`. Composed
/// with [`boundary_one`] it vanishes identically, and [`class_pairing`]
/// kills its image: the three tensors pair to first-leg weights
/// `w(h) - w(gh) + w(g)` on the common class of `ghk`, which cancel.
pub fn boundary_two(chain: &Chain2) -> Result<Chain1> {
    let mut raw = Vec::with_capacity(3 * chain.terms.len());
    for ((g, h, k), c) in &chain.terms {
        raw.push((h.clone(), k.multiply(g)?, c.clone()));
        raw.push((g.multiply(h)?, k.clone(), -c.clone()));
        raw.push((g.clone(), h.multiply(k)?, c.clone()));
    }
    Chain1::from_terms(&chain.xi, raw, chain.cutoff.clone())
}

/// The class pairing on degree-one chains:
///
/// ```text
/// g ⊗ h ↦ (weight(g) / weight(gh)) · class(gh)   when weight(gh) < 0,
/// g ⊗ h ↦ 0                                      otherwise.
/// ```
///
/// Swapping the legs complements the coefficient, so
/// `pair(g ⊗ h) + pair(h ⊗ g) = class(gh)` whenever `weight(gh) < 0`.
pub fn class_pairing(chain: &Chain1) -> Result<ConjClassSeries> {
    let mut raw = Vec::with_capacity(chain.terms.len());
    for ((g, h), c) in &chain.terms {
        let wg = chain.xi.weight(g)?;
        let product = g.multiply(h)?;
        let wp = chain.xi.weight(&product)?;
        if !wp.is_negative() {
            continue;
        }
        let class = crate::groups::ConjClass::of(&product);
        raw.push((class, c * &(wg / wp)));
    }
    ConjClassSeries::from_terms(&chain.xi, raw, chain.cutoff.clone())
}

/// The class series of a cycle, truncated at `t`.
///
/// The chain must be a cycle in the stored range: [`boundary_one`] of it may
/// hold no terms. Only on cycles is the pairing meaningful as a logarithm.
pub fn cycle_class_series(chain: &Chain1, t: &Rational) -> Result<ConjClassSeries> {
    let boundary = boundary_one(chain)?;
    if boundary.term_count() > 0 {
        return Err(Error::NotACycle {
            terms: boundary.term_count(),
            cutoff: boundary.cutoff().to_string(),
        });
    }
    class_pairing(chain)?.truncate(&Level::Finite(t.clone()))
}

/// The trace chain of a unit and a (possibly truncated) inverse:
/// `Σ_{ij} u_ij ⊗ v_ji`, expanded bilinearly over stored terms.
///
/// The cutoff accounts for tensors hidden below either factor's cutoff via
/// the same rule as series multiplication. When `v` is a certified inverse
/// of `u`, the result is a cycle: its boundary is `tr(uv) - tr(vu)`, and the
/// two traces agree exactly because they trace the same products.
pub fn dennis_trace(u: &RingMatrix, v: &RingMatrix) -> Result<Chain1> {
    if !u.weighting().same_as(v.weighting()) {
        return Err(Error::WeightingMismatch);
    }
    let n = u.dim()?;
    if v.dim()? != n {
        return Err(Error::ShapeMismatch {
            context: format!("{}x{} unit with {}x{} inverse", n, n, v.rows(), v.cols()),
        });
    }
    let xi = u.weighting();
    let mut raw = Vec::new();
    let mut cutoff = Level::NegInf;
    for i in 0..n {
        for j in 0..n {
            let a = u.entry(i, j);
            let b = v.entry(j, i);
            cutoff = cutoff.join(&mul_cutoff(
                a.cutoff(),
                &a.log_norm_bound(),
                b.cutoff(),
                &b.log_norm_bound(),
            ));
            for (g, cg) in a.terms() {
                for (h, ch) in b.terms() {
                    raw.push((g.clone(), h.clone(), cg * ch));
                }
            }
        }
    }
    Chain1::from_terms(xi, raw, cutoff)
}

/// Logarithm of the unit `I - a` as a class series, computed directly from
/// power traces: `-Σ_{m≥1} project(tr a^m)/m`, truncated at `t`. Requires
/// `a` exact and regular.
pub fn log_unit_via_traces(a: &RingMatrix, t: &Rational) -> Result<ConjClassSeries> {
    let cert = regularity(a)?;
    if !cert.is_regular() {
        return Err(not_regular_error(&cert));
    }
    let mut acc = ConjClassSeries::zero(a.weighting());
    for_each_certified_power(a, &cert, t, |m, power| {
        let projected = power.trace()?.conjugacy_projection();
        let coeff = -Rational::one() / crate::level::rational_int(m as i64);
        acc = acc.add(&projected.scalar_mul(&coeff))?;
        Ok(())
    })?;
    acc.truncate(&Level::Finite(t.clone()))
}

/// Logarithm of the unit `I - a` through the trace chain: build a certified
/// inverse deep enough that the chain is certified at `t`, check the cycle
/// condition, and pair. Agrees exactly with [`log_unit_via_traces`].
pub fn log_unit_via_dennis_trace(a: &RingMatrix, t: &Rational) -> Result<ConjClassSeries> {
    let unit = a.one_minus()?;
    // The chain cutoff is the inverse's cutoff shifted up by the unit's
    // log-norm; invert deep enough to compensate.
    let lift = match unit.log_norm_bound() {
        Level::NegInf => Rational::zero(),
        Level::Finite(q) => {
            if q.is_negative() {
                Rational::zero()
            } else {
                q
            }
        }
    };
    let t_inverse = t - &lift;
    let inverse = crate::regmat::neumann_inverse(a, &t_inverse)?;
    let chain = dennis_trace(&unit, &inverse)?;
    cycle_class_series(&chain, t)
}

/// Logarithm of a formal torsion class: the signed sum of the logarithms of
/// its units, each computed through its trace chain, truncated at `t`.
pub fn log_torsion_class(tc: &crate::regmat::TorsionClass, t: &Rational) -> Result<ConjClassSeries> {
    let mut acc = ConjClassSeries::zero(tc.weighting());
    for summand in tc.summands() {
        let term = log_unit_via_dennis_trace(summand.matrix(), t)?;
        let signed = match summand.sign() {
            crate::regmat::Sign::Plus => term,
            crate::regmat::Sign::Minus => term.neg(),
        };
        acc = acc.add(&signed)?;
    }
    acc.truncate(&Level::Finite(t.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{ConjClass, GroupSpec};
    use crate::level::{parse_rational, rational_int};
    use crate::regmat::neumann_inverse;

    fn setup() -> (Arc<GroupSpec>, Arc<Weighting>) {
        let spec = GroupSpec::free(["a", "b"]).unwrap();
        let xi = Weighting::new(&spec, vec![rational_int(-1), rational_int(-1)]).unwrap();
        (spec, xi)
    }

    fn el(spec: &Arc<GroupSpec>, text: &str) -> GroupElement {
        GroupElement::parse(spec, text).unwrap()
    }

    #[test]
    fn boundaries_compose_to_zero() {
        let (spec, xi) = setup();
        let c2 = Chain2::tensor(
            &xi,
            &el(&spec, "a"),
            &el(&spec, "b"),
            &el(&spec, "a^-1 b"),
            rational_int(3),
        )
        .unwrap();
        let c1 = boundary_two(&c2).unwrap();
        let s = boundary_one(&c1).unwrap();
        assert!(s.is_exact_zero());
    }

    #[test]
    fn pairing_kills_boundaries() {
        let (spec, xi) = setup();
        // A tensor whose legs all carry negative weight, so every image
        // class survives the pairing's weight gate and cancellation is
        // genuinely exercised.
        let c2 = Chain2::tensor(
            &xi,
            &el(&spec, "a"),
            &el(&spec, "b a"),
            &el(&spec, "b"),
            rational_int(2),
        )
        .unwrap();
        let paired = class_pairing(&boundary_two(&c2).unwrap()).unwrap();
        assert!(paired.is_exact_zero());
    }

    #[test]
    fn pairing_on_powers_gives_harmonic_coefficients() {
        let (spec, xi) = setup();
        let a = el(&spec, "a");
        for m in 1..=5i64 {
            let chain = Chain1::tensor(&xi, &a, &a.pow(m - 1), Rational::one()).unwrap();
            let paired = class_pairing(&chain).unwrap();
            let class = ConjClass::of(&a.pow(m));
            assert_eq!(paired.term_count(), 1);
            assert_eq!(
                paired.coefficient(&class),
                Rational::one() / rational_int(m)
            );
        }
    }

    #[test]
    fn pairing_swap_completes_the_class() {
        let (spec, xi) = setup();
        let g = el(&spec, "a b");
        let h = el(&spec, "b^-1 a");
        let direct = class_pairing(&Chain1::tensor(&xi, &g, &h, Rational::one()).unwrap()).unwrap();
        let swapped =
            class_pairing(&Chain1::tensor(&xi, &h, &g, Rational::one()).unwrap()).unwrap();
        let total = direct.add(&swapped).unwrap();
        let class = ConjClass::of(&g.multiply(&h).unwrap());
        assert_eq!(total.term_count(), 1);
        assert_eq!(total.coefficient(&class), Rational::one());
    }

    #[test]
    fn pairing_kills_nonnegative_weights() {
        let (spec, xi) = setup();
        // weight(a b^-1) = 0: killed even though the legs are weighted.
        let chain = Chain1::tensor(&xi, &el(&spec, "a"), &el(&spec, "b^-1"), Rational::one())
            .unwrap();
        let paired = class_pairing(&chain).unwrap();
        assert_eq!(paired.term_count(), 0);
    }

    #[test]
    fn trace_chain_of_geometric_inverse() {
        let (spec, xi) = setup();
        let a = RingMatrix::from_rows(
            &xi,
            vec![vec![NovikovSeries::monomial(
                &xi,
                &el(&spec, "a"),
                Rational::one(),
            )
            .unwrap()]],
        )
        .unwrap();
        let t = rational_int(-3);
        let series = log_unit_via_dennis_trace(&a, &t).unwrap();
        // -{a} - {a^2}/2; {a^3} sits at the cutoff and is dropped.
        assert_eq!(series.term_count(), 2);
        assert_eq!(
            series.coefficient(&ConjClass::of(&el(&spec, "a"))),
            -Rational::one()
        );
        assert_eq!(
            series.coefficient(&ConjClass::of(&el(&spec, "a^2"))),
            parse_rational("-1/2").unwrap()
        );
        let direct = log_unit_via_traces(&a, &t).unwrap();
        assert_eq!(series, direct);
    }

    #[test]
    fn trace_chain_boundary_vanishes_despite_truncation() {
        let (spec, xi) = setup();
        let entry = |text: &str, c: i64| {
            NovikovSeries::monomial(&xi, &el(&spec, text), rational_int(c)).unwrap()
        };
        let a = RingMatrix::from_rows(
            &xi,
            vec![
                vec![entry("a", 1), entry("b", 2)],
                vec![NovikovSeries::zero(&xi), entry("a b", 1)],
            ],
        )
        .unwrap();
        let unit = a.one_minus().unwrap();
        let inverse = neumann_inverse(&a, &rational_int(-4)).unwrap();
        let chain = dennis_trace(&unit, &inverse).unwrap();
        let boundary = boundary_one(&chain).unwrap();
        assert_eq!(boundary.term_count(), 0);
    }

    #[test]
    fn permutation_unit_has_trivial_logarithm() {
        let (_, xi) = setup();
        let one = NovikovSeries::one(&xi);
        let zero = NovikovSeries::zero(&xi);
        let perm = RingMatrix::from_rows(
            &xi,
            vec![
                vec![zero.clone(), one.clone()],
                vec![one.clone(), zero.clone()],
            ],
        )
        .unwrap();
        let chain = dennis_trace(&perm, &perm).unwrap();
        let series = cycle_class_series(&chain, &rational_int(-2)).unwrap();
        assert!(series.is_exact_zero() || series.term_count() == 0);
    }

    #[test]
    fn non_cycles_are_rejected() {
        let (spec, xi) = setup();
        let chain = Chain1::tensor(&xi, &el(&spec, "a"), &el(&spec, "b"), Rational::one())
            .unwrap();
        assert!(matches!(
            cycle_class_series(&chain, &rational_int(-5)),
            Err(Error::NotACycle { .. })
        ));
    }

    #[test]
    fn direct_and_chain_logarithms_agree_on_a_2x2() {
        let (spec, xi) = setup();
        let entry = |text: &str, c: i64| {
            NovikovSeries::monomial(&xi, &el(&spec, text), rational_int(c)).unwrap()
        };
        let a = RingMatrix::from_rows(
            &xi,
            vec![
                vec![entry("a", 1), entry("b a", -1)],
                vec![entry("a^-1 b", 2), entry("b", 1)],
            ],
        )
        .unwrap();
        let t = rational_int(-4);
        let via_traces = log_unit_via_traces(&a, &t).unwrap();
        let via_chain = log_unit_via_dennis_trace(&a, &t).unwrap();
        assert_eq!(via_traces, via_chain);
    }
}
