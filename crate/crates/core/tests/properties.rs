//! Property-based checks of the algebra laws the library rests on:
//! norm axioms, soundness of cutoff bookkeeping under ring operations,
//! structure preservation of the projection maps, two-sided inversion,
//! and the pairing identities.

use std::sync::Arc;

use num_traits::{One, Signed};
use proptest::prelude::*;

use novikov_core::groups::{ConjClass, GroupElement, GroupSpec};
use novikov_core::hochschild::{
    boundary_one, boundary_two, class_pairing, log_torsion_class, Chain1, Chain2,
};
use novikov_core::level::rational_int;
use novikov_core::regmat::{max_cycle_mean, neumann_inverse, CycleMeanOutcome, Sign, TorsionClass};
use novikov_core::{ConjClassSeries, Level, NovikovSeries, Rational, RingMatrix, Weighting};

fn free_xi() -> Arc<Weighting> {
    let spec = GroupSpec::free(["a", "b"]).unwrap();
    Weighting::new(&spec, vec![rational_int(-1), rational_int(-2)]).unwrap()
}

fn abelian_xi() -> Arc<Weighting> {
    let spec = GroupSpec::free_abelian(["x", "y"]).unwrap();
    Weighting::new(&spec, vec![rational_int(-1), rational_int(-2)]).unwrap()
}

fn word(xi: &Arc<Weighting>, pairs: &[(usize, i64)]) -> GroupElement {
    let filtered: Vec<(usize, i64)> = pairs.iter().copied().filter(|(_, e)| *e != 0).collect();
    GroupElement::from_pairs(xi.spec(), &filtered).unwrap()
}

fn series(xi: &Arc<Weighting>, raw: &RawSeries) -> NovikovSeries {
    let terms = raw
        .iter()
        .map(|(pairs, c)| (word(xi, pairs), rational_int(*c)))
        .collect();
    NovikovSeries::from_terms(xi, terms, Level::NegInf).unwrap()
}

type RawWord = Vec<(usize, i64)>;
type RawSeries = Vec<(RawWord, i64)>;

/// Arbitrary reduced words over two generators, inverses allowed.
fn raw_word() -> impl Strategy<Value = RawWord> {
    prop::collection::vec((0usize..2, -2i64..=2), 0..4)
}

/// Words with every letter a positive generator power: strictly negative
/// weight unless empty.
fn raw_negative_word() -> impl Strategy<Value = RawWord> {
    prop::collection::vec((0usize..2, 1i64..=2), 1..3)
}

fn raw_series() -> impl Strategy<Value = RawSeries> {
    prop::collection::vec((raw_word(), prop_oneof![-3i64..0, 1i64..=3]), 0..4)
}

fn raw_negative_series() -> impl Strategy<Value = RawSeries> {
    prop::collection::vec((raw_negative_word(), prop_oneof![-2i64..0, 1i64..=2]), 1..4)
}

proptest! {
    /// Definiteness, symmetry under negation, the ultrametric law for sums,
    /// and submultiplicativity for products.
    #[test]
    fn log_norm_laws(ra in raw_series(), rb in raw_series()) {
        let xi = free_xi();
        let a = series(&xi, &ra);
        let b = series(&xi, &rb);
        let na = a.log_norm().unwrap();
        let nb = b.log_norm().unwrap();
        prop_assert_eq!(na.is_neg_inf(), a.is_exact_zero());
        prop_assert_eq!(a.neg().log_norm().unwrap(), na.clone());
        prop_assert!(a.add(&b).unwrap().log_norm().unwrap() <= na.join(&nb));
        prop_assert!(a.mul(&b).unwrap().log_norm().unwrap() <= na.plus(&nb));
        prop_assert!(a.sub(&a).unwrap().log_norm().unwrap().is_neg_inf());
    }

    /// Multiplying truncated series keeps exactly the terms the cutoff rule
    /// promises: the product of truncations agrees with the exact product
    /// above its own recorded cutoff.
    #[test]
    fn product_cutoffs_are_sound(ra in raw_series(), rb in raw_series(), t in -5i64..=-1) {
        let xi = free_xi();
        let a = series(&xi, &ra);
        let b = series(&xi, &rb);
        let level = Level::from_int(t);
        let exact = a.mul(&b).unwrap();
        let coarse = a.truncate(&level).unwrap().mul(&b.truncate(&level).unwrap()).unwrap();
        prop_assert!(coarse.agrees_with(&exact, coarse.cutoff()).unwrap());
    }

    /// Same soundness statement for sums, whose cutoff is the join.
    #[test]
    fn sum_cutoffs_are_sound(ra in raw_series(), rb in raw_series(), t in -5i64..=-1) {
        let xi = free_xi();
        let a = series(&xi, &ra);
        let b = series(&xi, &rb);
        let level = Level::from_int(t);
        let exact = a.add(&b).unwrap();
        let coarse = a.truncate(&level).unwrap().add(&b).unwrap();
        prop_assert_eq!(coarse.cutoff(), &level);
        prop_assert!(coarse.agrees_with(&exact, coarse.cutoff()).unwrap());
    }

    /// Abelianization is a ring map that never raises weight and carries the
    /// cutoff along unchanged.
    #[test]
    fn abelianization_is_a_ring_map(ra in raw_series(), rb in raw_series()) {
        let xi = free_xi();
        let a = series(&xi, &ra);
        let b = series(&xi, &rb);
        let prod = a.mul(&b).unwrap().abelianize().unwrap();
        prop_assert_eq!(prod, a.abelianize().unwrap().mul(&b.abelianize().unwrap()).unwrap());
        let sum = a.add(&b).unwrap().abelianize().unwrap();
        prop_assert_eq!(sum, a.abelianize().unwrap().add(&b.abelianize().unwrap()).unwrap());
        let ab = a.abelianize().unwrap();
        prop_assert!(ab.log_norm().unwrap() <= a.log_norm().unwrap());
        prop_assert_eq!(ab.cutoff(), a.cutoff());
    }

    /// The class projection is additive and weight-faithful.
    #[test]
    fn class_projection_is_additive(ra in raw_series(), rb in raw_series()) {
        let xi = free_xi();
        let a = series(&xi, &ra);
        let b = series(&xi, &rb);
        let both = a.add(&b).unwrap().conjugacy_projection();
        let separate = a.conjugacy_projection().add(&b.conjugacy_projection()).unwrap();
        prop_assert_eq!(&both, &separate);
        prop_assert!(both.log_norm_bound() <= a.log_norm().unwrap().join(&b.log_norm().unwrap()));
    }

    /// Single tensors pair symmetrically onto the class of the product, and
    /// the weight gate zeroes both legs together.
    #[test]
    fn pairing_is_symmetric_on_tensors(rg in raw_word(), rh in raw_word()) {
        let xi = free_xi();
        let g = word(&xi, &rg);
        let h = word(&xi, &rh);
        let gh = g.multiply(&h).unwrap();
        let w = xi.weight(&gh).unwrap();
        let forward = class_pairing(&Chain1::tensor(&xi, &g, &h, Rational::one()).unwrap()).unwrap();
        let backward = class_pairing(&Chain1::tensor(&xi, &h, &g, Rational::one()).unwrap()).unwrap();
        let total = forward.add(&backward).unwrap();
        if w.is_negative() {
            let expected = ConjClassSeries::from_terms(
                &xi,
                vec![(ConjClass::of(&gh), Rational::one())],
                Level::NegInf,
            ).unwrap();
            prop_assert_eq!(total, expected);
        } else {
            prop_assert!(total.is_exact_zero());
        }
    }

    /// Boundaries die twice over: under the degree-one boundary and under
    /// the class pairing.
    #[test]
    fn boundaries_vanish(
        terms in prop::collection::vec(
            (raw_word(), raw_word(), raw_word(), prop_oneof![-2i64..0, 1i64..=2]),
            1..4,
        ),
    ) {
        let xi = free_xi();
        let raw = terms
            .iter()
            .map(|(g, h, k, c)| (word(&xi, g), word(&xi, h), word(&xi, k), rational_int(*c)))
            .collect();
        let chain = Chain2::from_terms(&xi, raw, Level::NegInf).unwrap();
        let boundary = boundary_two(&chain).unwrap();
        prop_assert!(boundary_one(&boundary).unwrap().is_exact_zero());
        prop_assert!(class_pairing(&boundary).unwrap().is_exact_zero());
    }

    /// Shifting every edge weight by a constant shifts the maximum cycle
    /// mean by the same constant and preserves the witness.
    #[test]
    fn cycle_mean_is_shift_equivariant(
        raw_edges in prop::collection::vec((0usize..4, 0usize..4, -4i64..=4), 0..10),
        shift in -3i64..=3,
    ) {
        let mut seen = std::collections::BTreeSet::new();
        let edges: Vec<(usize, usize, Rational)> = raw_edges
            .into_iter()
            .filter(|(i, j, _)| seen.insert((*i, *j)))
            .map(|(i, j, w)| (i, j, rational_int(w)))
            .collect();
        let shifted: Vec<(usize, usize, Rational)> = edges
            .iter()
            .map(|(i, j, w)| (*i, *j, w + rational_int(shift)))
            .collect();
        match (max_cycle_mean(4, &edges), max_cycle_mean(4, &shifted)) {
            (CycleMeanOutcome::Acyclic, CycleMeanOutcome::Acyclic) => {}
            (
                CycleMeanOutcome::Cyclic { mean: m1, witness: w1 },
                CycleMeanOutcome::Cyclic { mean: m2, witness: w2 },
            ) => {
                prop_assert_eq!(m1 + rational_int(shift), m2);
                prop_assert_eq!(w1, w2);
            }
            _ => prop_assert!(false, "shift changed cyclicity"),
        }
    }
}

proptest! {
    // The remaining properties run full inversions, so keep the case count
    // moderate.
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Certified geometric inverses are two-sided above the cutoff.
    #[test]
    fn geometric_inverse_is_two_sided(
        rows in prop::collection::vec(prop::collection::vec(raw_negative_series(), 2), 2),
        t in -4i64..=-2,
    ) {
        let xi = free_xi();
        let entries = rows
            .iter()
            .map(|row| row.iter().map(|r| series(&xi, r)).collect())
            .collect();
        let a = RingMatrix::from_rows(&xi, entries).unwrap();
        let t_rat = rational_int(t);
        let level = Level::Finite(t_rat.clone());
        let inverse = neumann_inverse(&a, &t_rat).unwrap();
        let unit = a.one_minus().unwrap();
        let identity = RingMatrix::identity(&xi, 2);
        prop_assert!(unit.mul(&inverse).unwrap().agrees_with(&identity, &level).unwrap());
        prop_assert!(inverse.mul(&unit).unwrap().agrees_with(&identity, &level).unwrap());
    }

    /// exp and log are mutually inverse on contracting lattice series.
    #[test]
    fn exp_and_log_invert(raw in raw_negative_series(), t in -5i64..=-3) {
        let xi = abelian_xi();
        let s = series(&xi, &raw);
        let t_rat = rational_int(t);
        let level = Level::Finite(t_rat.clone());
        let one = NovikovSeries::one(&xi);
        let round_trip = s.log_one_plus(&t_rat).unwrap().exp(&t_rat).unwrap();
        prop_assert_eq!(round_trip, one.add(&s).unwrap().truncate(&level).unwrap());
        let other_way = s.exp(&t_rat).unwrap().sub(&one).unwrap().log_one_plus(&t_rat).unwrap();
        prop_assert_eq!(other_way, s.truncate(&level).unwrap());
    }

    /// Negating a torsion class negates its logarithm.
    #[test]
    fn torsion_negation_negates_the_logarithm(
        rows in prop::collection::vec(prop::collection::vec(raw_negative_series(), 2), 2),
    ) {
        let xi = free_xi();
        let entries = rows
            .iter()
            .map(|row| row.iter().map(|r| series(&xi, r)).collect())
            .collect();
        let a = RingMatrix::from_rows(&xi, entries).unwrap();
        let tc = TorsionClass::signed_unit(Sign::Plus, a).unwrap();
        let t = rational_int(-3);
        let log = log_torsion_class(&tc, &t).unwrap();
        let log_neg = log_torsion_class(&tc.negated(), &t).unwrap();
        prop_assert_eq!(log.neg(), log_neg);
    }
}
