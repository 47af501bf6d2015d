//! Finitely generated free chain complexes over the series ring, split
//! subcomplex data, mapping cones, and the certified cokernel that turns a
//! flow-style chain map into descent data plus a torsion class.
//!
//! Matrices act on row vectors throughout: the boundary of dimension `i` is
//! a `rank_i × rank_{i-1}` matrix, and composing two maps multiplies their
//! matrices in application order.
//!
//! # The cone and its reduction
//!
//! The central input is a pair of complexes `D ⊆ E` where the inclusion is
//! literally the standard split `[I | 0]` in every dimension — so each
//! `E`-boundary has the block form `[[BD, 0], [B, C]]` — together with a
//! chain map `k : D → E` whose `D`-component `A_i` (the first block of
//! columns of `k_i`) is regular in every dimension. The difference
//! `f = incl - k` is then coned:
//!
//! ```text
//! Cone_i = E_i ⊕ D_{i-1},   ∂(e, d) = (∂e + f(d), -∂d),
//! ```
//!
//! with block boundary `[[BE, 0], [F, -BD]]`. Because `I - A_i` is
//! invertible in the completion, every `D`-summand of the cone cancels
//! against its shifted copy by exact Gaussian elimination, leaving a complex
//! on the quotient ranks `Q_i = E_i / D_i` with the corrected boundary
//!
//! ```text
//! ∂̂_i = C_i + B_i · (I - A_{i-1})^{-1} · kQ_{i-1},
//! ```
//!
//! where `kQ` is the `Q`-component of `k`. The eliminated blocks are exactly
//! the units `I - A_i`, so the reduction's bookkeeping is the torsion class
//! `Σ_i (-1)^{i+1} [I - A_i]` — the same class the descent matrices
//! `A_i` generate. The inverses are truncated, so `∂̂ ∘ ∂̂` vanishes above
//! the requested level rather than identically; everything else in the
//! construction is exact.

use std::sync::Arc;

use num_traits::Zero;

use crate::error::Error;
use crate::groups::Weighting;
use crate::level::Level;
use crate::orbits::{torsion_from_descent, DescentData};
use crate::regmat::{neumann_inverse, RingMatrix, TorsionClass};
use crate::series::NovikovSeries;
use crate::{Rational, Result};

/// A nonnegatively graded free complex: ranks by dimension and one boundary
/// matrix per dimension `i ≥ 1`, of shape `rank_i × rank_{i-1}`.
#[derive(Clone, Debug)]
pub struct FreeChainComplex {
    xi: Arc<Weighting>,
    ranks: Vec<usize>,
    boundaries: Vec<RingMatrix>, // boundaries[j] = boundary of dimension j+1
}

impl FreeChainComplex {
    pub fn new(
        xi: &Arc<Weighting>,
        ranks: Vec<usize>,
        boundaries: Vec<RingMatrix>,
    ) -> Result<FreeChainComplex> {
        if boundaries.len() + 1 != ranks.len().max(1) {
            return Err(Error::ShapeMismatch {
                context: format!(
                    "{} ranks require {} boundary matrices, got {}",
                    ranks.len(),
                    ranks.len().saturating_sub(1),
                    boundaries.len()
                ),
            });
        }
        for (j, b) in boundaries.iter().enumerate() {
            if !b.weighting().same_as(xi) {
                return Err(Error::WeightingMismatch);
            }
            if b.rows() != ranks[j + 1] || b.cols() != ranks[j] {
                return Err(Error::ShapeMismatch {
                    context: format!(
                        "boundary of dimension {} must be {}x{}, got {}x{}",
                        j + 1,
                        ranks[j + 1],
                        ranks[j],
                        b.rows(),
                        b.cols()
                    ),
                });
            }
        }
        Ok(FreeChainComplex {
            xi: Arc::clone(xi),
            ranks,
            boundaries,
        })
    }

    pub fn weighting(&self) -> &Arc<Weighting> {
        &self.xi
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    /// Number of graded pieces (dimensions `0 .. dimensions() - 1`).
    pub fn dimensions(&self) -> usize {
        self.ranks.len()
    }

    /// The boundary of dimension `i` (defined for `1 ≤ i < dimensions()`).
    pub fn boundary(&self, i: usize) -> Option<&RingMatrix> {
        if i == 0 {
            None
        } else {
            self.boundaries.get(i - 1)
        }
    }

    pub fn boundaries(&self) -> &[RingMatrix] {
        &self.boundaries
    }

    pub fn is_exact(&self) -> bool {
        self.boundaries.iter().all(RingMatrix::is_exact)
    }

    pub fn has_integer_coefficients(&self) -> bool {
        self.boundaries
            .iter()
            .all(RingMatrix::has_integer_coefficients)
    }

    /// Check `∂ ∘ ∂ = 0` exactly. Suitable for exact complexes.
    pub fn verify_exact(&self) -> Result<()> {
        self.verify_above(&Level::NegInf)
    }

    /// Check `∂ ∘ ∂ ≡ 0` above the given level, which is the strongest
    /// statement available once boundaries are truncated.
    pub fn verify_above(&self, level: &Level) -> Result<()> {
        let mut first: Option<(usize, usize, usize)> = None;
        let mut defects = 0usize;
        for i in 1..self.boundaries.len() + 1 {
            let (upper, lower) = match (self.boundary(i + 1), self.boundary(i)) {
                (Some(u), Some(l)) => (u, l),
                _ => continue,
            };
            let composite = upper.mul(lower)?;
            let zero = RingMatrix::zero(&self.xi, composite.rows(), composite.cols());
            for r in 0..composite.rows() {
                for c in 0..composite.cols() {
                    if !composite.entry(r, c).agrees_with(zero.entry(r, c), level)? {
                        defects += 1;
                        if first.is_none() {
                            first = Some((i + 1, r, c));
                        }
                    }
                }
            }
        }
        match first {
            None => Ok(()),
            Some((dim, row, col)) => Err(Error::NotAComplex {
                dim,
                row,
                col,
                defects,
            }),
        }
    }
}

/// A split pair of complexes with a flow-style chain map, validated on
/// construction:
///
/// * `sub` and `ambient` are exact complexes with integer coefficients and
///   the same number of dimensions, with `rank(sub_i) ≤ rank(ambient_i)`;
/// * `inclusion_i` is literally `[I | 0]`, making `sub` the leading block
///   of `ambient` (each ambient boundary starts with rows `[BD | 0]`);
/// * `flow_i : sub_i → ambient_i` is a chain map with integer coefficients.
///
/// Regularity of the diagonal blocks is *not* required here — it is checked
/// where inverses are actually formed.
#[derive(Clone, Debug)]
pub struct ConeData {
    xi: Arc<Weighting>,
    sub: FreeChainComplex,
    ambient: FreeChainComplex,
    inclusion: Vec<RingMatrix>,
    flow: Vec<RingMatrix>,
}

impl ConeData {
    pub fn new(
        sub: FreeChainComplex,
        ambient: FreeChainComplex,
        inclusion: Vec<RingMatrix>,
        flow: Vec<RingMatrix>,
    ) -> Result<ConeData> {
        let xi = Arc::clone(&sub.xi);
        if !ambient.xi.same_as(&xi) {
            return Err(Error::WeightingMismatch);
        }
        if sub.dimensions() != ambient.dimensions() {
            return Err(Error::ShapeMismatch {
                context: format!(
                    "subcomplex has {} dimensions, ambient complex {}",
                    sub.dimensions(),
                    ambient.dimensions()
                ),
            });
        }
        let dims = sub.dimensions();
        if inclusion.len() != dims || flow.len() != dims {
            return Err(Error::ShapeMismatch {
                context: format!(
                    "expected {} inclusion and flow matrices, got {} and {}",
                    dims,
                    inclusion.len(),
                    flow.len()
                ),
            });
        }
        for i in 0..dims {
            if sub.ranks[i] > ambient.ranks[i] {
                return Err(Error::ShapeMismatch {
                    context: format!(
                        "subcomplex rank {} exceeds ambient rank {} in dimension {}",
                        sub.ranks[i], ambient.ranks[i], i
                    ),
                });
            }
            for (name, m) in [("inclusion", &inclusion[i]), ("flow", &flow[i])] {
                if !m.weighting().same_as(&xi) {
                    return Err(Error::WeightingMismatch);
                }
                if m.rows() != sub.ranks[i] || m.cols() != ambient.ranks[i] {
                    return Err(Error::ShapeMismatch {
                        context: format!(
                            "{name} in dimension {i} must be {}x{}, got {}x{}",
                            sub.ranks[i],
                            ambient.ranks[i],
                            m.rows(),
                            m.cols()
                        ),
                    });
                }
            }
        }

        for complex in [&sub, &ambient] {
            if !complex.is_exact() {
                return Err(Error::NotExact {
                    cutoff: "a truncated boundary entry".into(),
                });
            }
            complex.verify_exact()?;
            ensure_integer_matrices(complex.boundaries.iter())?;
        }
        ensure_integer_matrices(flow.iter())?;
        for f in &flow {
            if !f.is_exact() {
                return Err(Error::NotExact {
                    cutoff: "a truncated flow entry".into(),
                });
            }
        }

        // The inclusion must be the standard split [I | 0].
        for (i, inc) in inclusion.iter().enumerate() {
            for r in 0..inc.rows() {
                for c in 0..inc.cols() {
                    let e = inc.entry(r, c);
                    let standard = if r == c {
                        e.is_exact()
                            && e.term_count() == 1
                            && e.coefficient(&xi.spec().identity())
                                == Rational::from_integer(1.into())
                    } else {
                        e.is_exact_zero()
                    };
                    if !standard {
                        return Err(Error::InclusionNotStandard { dim: i });
                    }
                }
            }
        }

        // Split condition: the first rank(sub_i) rows of each ambient
        // boundary must be [BD | 0] — equivalently, the inclusion is a chain
        // map.
        for i in 1..dims {
            let be = ambient.boundary(i).expect("validated shape");
            let bd = sub.boundary(i).expect("validated shape");
            for r in 0..sub.ranks[i] {
                for c in 0..ambient.ranks[i - 1] {
                    let expected = if c < sub.ranks[i - 1] {
                        bd.entry(r, c).clone()
                    } else {
                        NovikovSeries::zero(&xi)
                    };
                    if be.entry(r, c) != &expected {
                        return Err(Error::NotAChainMap { dim: i, row: r, col: c });
                    }
                }
            }
        }

        // The flow must be a chain map: flow_i · BE_i = BD_i · flow_{i-1}.
        for i in 1..dims {
            let lhs = flow[i].mul(ambient.boundary(i).expect("validated shape"))?;
            let rhs = sub.boundary(i).expect("validated shape").mul(&flow[i - 1])?;
            for r in 0..lhs.rows() {
                for c in 0..lhs.cols() {
                    if lhs.entry(r, c) != rhs.entry(r, c) {
                        return Err(Error::NotAChainMap { dim: i, row: r, col: c });
                    }
                }
            }
        }

        Ok(ConeData {
            xi,
            sub,
            ambient,
            inclusion,
            flow,
        })
    }

    pub fn weighting(&self) -> &Arc<Weighting> {
        &self.xi
    }

    pub fn sub(&self) -> &FreeChainComplex {
        &self.sub
    }

    pub fn ambient(&self) -> &FreeChainComplex {
        &self.ambient
    }

    pub fn inclusion(&self) -> &[RingMatrix] {
        &self.inclusion
    }

    pub fn flow(&self) -> &[RingMatrix] {
        &self.flow
    }

    pub fn dimensions(&self) -> usize {
        self.sub.dimensions()
    }

    /// Quotient ranks `rank(ambient_i) - rank(sub_i)`.
    pub fn quotient_ranks(&self) -> Vec<usize> {
        self.sub
            .ranks
            .iter()
            .zip(&self.ambient.ranks)
            .map(|(d, e)| e - d)
            .collect()
    }

    /// The `sub → sub` block of the flow in dimension `i`.
    pub fn flow_diagonal_block(&self, i: usize) -> RingMatrix {
        let d = self.sub.ranks[i];
        self.flow[i].block(0, d, 0, d)
    }

    /// The `sub → quotient` block of the flow in dimension `i`.
    pub fn flow_quotient_block(&self, i: usize) -> RingMatrix {
        let d = self.sub.ranks[i];
        self.flow[i].block(0, d, d, self.ambient.ranks[i])
    }

    /// The `quotient → sub` block of the ambient boundary of dimension `i`.
    fn boundary_mixing_block(&self, i: usize) -> RingMatrix {
        let be = self.ambient.boundary(i).expect("dimension in range");
        be.block(
            self.sub.ranks[i],
            self.ambient.ranks[i],
            0,
            self.sub.ranks[i - 1],
        )
    }

    /// The `quotient → quotient` block of the ambient boundary of
    /// dimension `i`.
    fn boundary_quotient_block(&self, i: usize) -> RingMatrix {
        let be = self.ambient.boundary(i).expect("dimension in range");
        be.block(
            self.sub.ranks[i],
            self.ambient.ranks[i],
            self.sub.ranks[i - 1],
            self.ambient.ranks[i - 1],
        )
    }
}

fn ensure_integer_matrices<'a>(ms: impl Iterator<Item = &'a RingMatrix>) -> Result<()> {
    for m in ms {
        for e in m.entries() {
            for (_, c) in e.terms() {
                if !c.is_integer() {
                    return Err(Error::NonIntegerCoefficient {
                        value: c.to_string(),
                    });
                }
            }
        }
    }
    Ok(())
}

/// The mapping cone of `incl - flow`: ranks `ambient_i ⊕ sub_{i-1}` with
/// block boundaries `[[BE, 0], [incl - flow, -BD]]`. The result is an exact
/// complex (its `∂∂ = 0` follows from the chain-map conditions checked when
/// the [`ConeData`] was built).
pub fn mapping_cone(data: &ConeData) -> Result<FreeChainComplex> {
    let dims = data.dimensions();
    let e_rank = |i: usize| if i < dims { data.ambient.ranks[i] } else { 0 };
    let d_rank = |i: usize| data.sub.ranks.get(i).copied().unwrap_or(0);

    // Dimension i of the cone holds E_i ⊕ D_{i-1}.
    let mut ranks = Vec::with_capacity(dims + 1);
    for i in 0..=dims {
        ranks.push(e_rank(i) + if i == 0 { 0 } else { d_rank(i - 1) });
    }

    let mut boundaries = Vec::with_capacity(dims);
    for i in 1..=dims {
        let rows = ranks[i];
        let cols = ranks[i - 1];
        let mut m = RingMatrix::zero(&data.xi, rows, cols);
        // Top-left block: the ambient boundary (absent at the top dimension,
        // where the ambient part is zero).
        if i < dims {
            let be = data.ambient.boundary(i).expect("dimension in range");
            for r in 0..be.rows() {
                for c in 0..be.cols() {
                    m.set_entry(r, c, be.entry(r, c).clone())?;
                }
            }
        }
        // Bottom-left: incl - flow in dimension i-1.
        let f = data.inclusion[i - 1].sub(&data.flow[i - 1])?;
        for r in 0..f.rows() {
            for c in 0..f.cols() {
                m.set_entry(e_rank(i) + r, c, f.entry(r, c).clone())?;
            }
        }
        // Bottom-right: -BD in dimension i-1 (absent for i = 1).
        if i >= 2 {
            let bd = data.sub.boundary(i - 1).expect("dimension in range");
            for r in 0..bd.rows() {
                for c in 0..bd.cols() {
                    m.set_entry(e_rank(i) + r, e_rank(i - 1) + c, bd.entry(r, c).neg())?;
                }
            }
        }
        boundaries.push(m);
    }
    FreeChainComplex::new(&data.xi, ranks, boundaries)
}

/// The descent data packed into the flow map: its diagonal blocks `A_i`,
/// validated (square, exact, integer, regular) by construction.
pub fn extract_descent(data: &ConeData) -> Result<DescentData> {
    let matrices = (0..data.dimensions())
        .map(|i| data.flow_diagonal_block(i))
        .collect();
    DescentData::new(&data.xi, matrices)
}

/// Eliminate the subcomplex from the cone, producing the quotient complex
/// with corrected boundaries truncated at `t`, together with the torsion
/// class of the elimination.
///
/// Each inverse is computed deep enough that the corrected boundary is
/// certified at `t`; the returned complex satisfies `∂̂ ∘ ∂̂ ≡ 0` above `t`.
pub fn novikov_cokernel(
    data: &ConeData,
    t: &Rational,
) -> Result<(FreeChainComplex, TorsionClass)> {
    let descent = extract_descent(data)?;
    let torsion = torsion_from_descent(&descent)?;
    let t_level = Level::Finite(t.clone());

    let q_ranks = data.quotient_ranks();
    let dims = data.dimensions();
    let mut boundaries = Vec::with_capacity(dims.saturating_sub(1));
    for i in 1..dims {
        let c_block = data.boundary_quotient_block(i);
        let b_block = data.boundary_mixing_block(i);
        let kq = data.flow_quotient_block(i - 1);

        // Lower the inverse's level so the triple product stays certified
        // at t even when the exact outer factors carry positive weights.
        let lift = |m: &RingMatrix| match m.log_norm_bound() {
            Level::Finite(q) if q > Rational::zero() => q,
            _ => Rational::zero(),
        };
        let t_inverse = t - lift(&b_block) - lift(&kq);
        let inverse = neumann_inverse(&descent.matrices()[i - 1], &t_inverse)?;
        let correction = b_block.mul(&inverse)?.mul(&kq)?;
        let corrected = c_block.add(&correction)?.truncate_entries(&t_level)?;
        boundaries.push(corrected);
    }
    let complex = FreeChainComplex::new(&data.xi, q_ranks, boundaries)?;
    Ok((complex, torsion))
}
