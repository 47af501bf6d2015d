//! A complete built-in example on the free group `⟨a1, b1, a2, b2⟩`: the
//! descent data of a circle-valued flow on a genus-two surface, where the
//! weight homomorphism charges only `a1`.
//!
//! The flow retains one cell pair per dimension; its descent matrices are
//! the 1×1 blocks `A_0 = (a2 a1)` and `A_1 = (a1)`, giving
//!
//! ```text
//! eta  = Σ_m ( {(a2 a1)^m} - {a1^m} ) / m,
//! zeta = (1 - x)(1 - x y)^{-1}   after abelianization,
//! ```
//!
//! with `x` and `y` the images of `a1` and `a2`. Exchanging the two
//! dimensions negates `eta` and inverts `zeta`. The same flow is packaged as
//! split-complex data ([`cone_data`]): a two-cell subcomplex inside a
//! five-cell ambient complex whose cone reduces to a rank-(0, 2) quotient,
//! reproducing the counting series through the cokernel pipeline.

use std::sync::Arc;

use num_traits::One;

use crate::chains::{ConeData, FreeChainComplex};
use crate::groups::{GroupElement, GroupSpec, Weighting};
use crate::level::rational_int;
use crate::orbits::DescentData;
use crate::regmat::RingMatrix;
use crate::series::NovikovSeries;
use crate::Rational;

/// The free group on `a1, b1, a2, b2`.
pub fn group() -> Arc<GroupSpec> {
    GroupSpec::free(["a1", "b1", "a2", "b2"]).expect("static example data is valid")
}

/// The weighting `(-1, 0, 0, 0)`: only `a1` carries weight.
pub fn weighting() -> Arc<Weighting> {
    Weighting::new(
        &group(),
        vec![
            rational_int(-1),
            rational_int(0),
            rational_int(0),
            rational_int(0),
        ],
    )
    .expect("static example data is valid")
}

fn word(xi: &Arc<Weighting>, text: &str) -> NovikovSeries {
    let g = GroupElement::parse(xi.spec(), text).expect("static example data is valid");
    NovikovSeries::monomial(xi, &g, Rational::one()).expect("static example data is valid")
}

fn single(xi: &Arc<Weighting>, text: &str) -> RingMatrix {
    RingMatrix::from_rows(xi, vec![vec![word(xi, text)]]).expect("static example data is valid")
}

/// Descent data of the flow: `A_0 = (a2 a1)`, `A_1 = (a1)`.
pub fn descent() -> DescentData {
    let xi = weighting();
    DescentData::new(&xi, vec![single(&xi, "a2 a1"), single(&xi, "a1")])
        .expect("static example data is valid")
}

/// The same data with the two dimensions exchanged, which negates the eta
/// function and inverts the zeta function.
pub fn swapped_descent() -> DescentData {
    let xi = weighting();
    DescentData::new(&xi, vec![single(&xi, "a1"), single(&xi, "a2 a1")])
        .expect("static example data is valid")
}

/// The flow as split-complex data.
///
/// The subcomplex has one cell in each dimension with boundary `b1 - 1`;
/// the ambient complex adds two quotient cells `p1, p2` in dimension one
/// with boundaries `b1 a2 a1 - a2 a1` and `a1 - a1 b1`. The flow map is
/// `k_0 = (a2 a1)` and `k_1 = [a1 | 1, 1]`.
pub fn cone_data() -> ConeData {
    let xi = weighting();
    let zero = NovikovSeries::zero(&xi);
    let one = NovikovSeries::one(&xi);

    let bd1 = RingMatrix::from_rows(
        &xi,
        vec![vec![word(&xi, "b1").sub(&one).expect("static example data is valid")]],
    )
    .expect("static example data is valid");
    let sub = FreeChainComplex::new(&xi, vec![1, 1], vec![bd1.clone()])
        .expect("static example data is valid");

    let dp1 = word(&xi, "b1 a2 a1")
        .sub(&word(&xi, "a2 a1"))
        .expect("static example data is valid");
    let dp2 = word(&xi, "a1")
        .sub(&word(&xi, "a1 b1"))
        .expect("static example data is valid");
    let be1 = RingMatrix::from_rows(
        &xi,
        vec![
            vec![bd1.entry(0, 0).clone()],
            vec![dp1],
            vec![dp2],
        ],
    )
    .expect("static example data is valid");
    let ambient = FreeChainComplex::new(&xi, vec![1, 3], vec![be1])
        .expect("static example data is valid");

    let inclusion = vec![
        RingMatrix::from_rows(&xi, vec![vec![one.clone()]]).expect("static example data is valid"),
        RingMatrix::from_rows(&xi, vec![vec![one.clone(), zero.clone(), zero.clone()]])
            .expect("static example data is valid"),
    ];
    let flow = vec![
        single(&xi, "a2 a1"),
        RingMatrix::from_rows(&xi, vec![vec![word(&xi, "a1"), one.clone(), one]])
            .expect("static example data is valid"),
    ];
    ConeData::new(sub, ambient, inclusion, flow).expect("static example data is valid")
}

/// Convenience: both descent variants by name, for the command-line tool.
pub fn descent_variant(swapped: bool) -> DescentData {
    if swapped {
        swapped_descent()
    } else {
        descent()
    }
}
