//! Counting series attached to descent data: the eta function over
//! conjugacy classes, its abelianized exponential (the zeta function), and
//! the associated torsion class.
//!
//! Descent data is a finite list of square matrices `A_0, …, A_k` over the
//! group ring — one per dimension — with integer coefficients, each exact
//! and regular. Diagonal entries of `A_i^m` are sums over closed paths in
//! the support digraph, so every trace term has weight at most `m · K_i <
//! 0`; the alternating trace sum
//!
//! ```text
//! eta = Σ_i (-1)^i Σ_{m≥1} project(tr A_i^m) / m
//! ```
//!
//! is therefore a class series supported in strictly negative weights, and
//! its truncations are certified by the same power-depth bounds as the
//! Neumann inverse. Equivalently `eta = log` of the torsion class
//! `Σ_i (-1)^{i+1} [I - A_i]`, which ties the counting series to the
//! algebraic bookkeeping of the complex it came from.
//!
//! The zeta function exponentiates the abelianized eta; with integer input
//! matrices it has integer coefficients, which is the discrete fingerprint
//! of the counting interpretation.

use std::sync::Arc;

use num_traits::One;

use crate::error::Error;
use crate::groups::Weighting;
use crate::level::{rational_int, Level};
use crate::regmat::{
    for_each_certified_power, not_regular_error, regularity, RegularityCertificate, RingMatrix,
    Sign, TorsionClass,
};
use crate::series::{AbelianSeries, ConjClassSeries};
use crate::{Rational, Result};

/// Validated input for the counting series: one square matrix per dimension,
/// all over one weighting, exact, with integer coefficients, and regular.
#[derive(Clone, Debug)]
pub struct DescentData {
    xi: Arc<Weighting>,
    matrices: Vec<RingMatrix>,
    certificates: Vec<RegularityCertificate>,
}

impl DescentData {
    pub fn new(xi: &Arc<Weighting>, matrices: Vec<RingMatrix>) -> Result<DescentData> {
        let mut certificates = Vec::with_capacity(matrices.len());
        for a in &matrices {
            if !a.weighting().same_as(xi) {
                return Err(Error::WeightingMismatch);
            }
            let _ = a.dim()?;
            for e in a.entries() {
                if !e.is_exact() {
                    return Err(Error::NotExact {
                        cutoff: e.cutoff().to_string(),
                    });
                }
                for (_, c) in e.terms() {
                    if !c.is_integer() {
                        return Err(Error::NonIntegerCoefficient {
                            value: c.to_string(),
                        });
                    }
                }
            }
            let cert = regularity(a)?;
            if !cert.is_regular() {
                return Err(not_regular_error(&cert));
            }
            certificates.push(cert);
        }
        Ok(DescentData {
            xi: Arc::clone(xi),
            matrices,
            certificates,
        })
    }

    pub fn weighting(&self) -> &Arc<Weighting> {
        &self.xi
    }

    /// Matrices by dimension, starting at dimension 0.
    pub fn matrices(&self) -> &[RingMatrix] {
        &self.matrices
    }

    pub fn certificates(&self) -> &[RegularityCertificate] {
        &self.certificates
    }

    pub fn dimensions(&self) -> usize {
        self.matrices.len()
    }
}

/// The eta function: a certified class series together with the power depth
/// that certifies its truncation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EtaFunction {
    series: ConjClassSeries,
    depth: u64,
}

impl EtaFunction {
    pub fn series(&self) -> &ConjClassSeries {
        &self.series
    }

    /// The deepest matrix power that was certified as sufficient.
    pub fn depth(&self) -> u64 {
        self.depth
    }
}

/// The eta function of descent data, truncated at `t`.
pub fn eta_from_descent(data: &DescentData, t: &Rational) -> Result<EtaFunction> {
    eta_from_descent_with_depth(data, t, None)
}

/// As [`eta_from_descent`], with an optional depth request. A request below
/// the certified depth is refused; a deeper request only changes the depth
/// recorded, since the extra powers lie entirely at or below `t`.
pub fn eta_from_descent_with_depth(
    data: &DescentData,
    t: &Rational,
    depth_request: Option<u64>,
) -> Result<EtaFunction> {
    let mut acc = ConjClassSeries::zero(&data.xi);
    let mut certified = 0u64;
    for (dim, a) in data.matrices.iter().enumerate() {
        let sign = if dim % 2 == 0 {
            Rational::one()
        } else {
            -Rational::one()
        };
        for_each_certified_power(a, &data.certificates[dim], t, |m, power| {
            certified = certified.max(m);
            let projected = power.trace()?.conjugacy_projection();
            let coeff = &sign / rational_int(m as i64);
            acc = acc.add(&projected.scalar_mul(&coeff))?;
            Ok(())
        })?;
    }
    let series = acc.truncate(&Level::Finite(t.clone()))?;
    let depth = match depth_request {
        None => certified,
        Some(requested) if requested < certified => {
            return Err(Error::DepthTooSmall {
                requested,
                certified,
            });
        }
        Some(requested) => requested,
    };
    Ok(EtaFunction { series, depth })
}

/// The zeta function: `exp` of the abelianized eta function, truncated at
/// `t`. The eta series is supported in negative weights, so the exponential
/// is certified whenever `t < 0`.
pub fn zeta_from_eta(eta: &EtaFunction, t: &Rational) -> Result<AbelianSeries> {
    eta.series.abelianize()?.exp(t)
}

/// The torsion class of descent data: `Σ_i (-1)^{i+1} [I - A_i]`.
pub fn torsion_from_descent(data: &DescentData) -> Result<TorsionClass> {
    let mut tc = TorsionClass::empty(&data.xi);
    for (dim, a) in data.matrices.iter().enumerate() {
        let unit = TorsionClass::signed_unit(Sign::for_dimension(dim), a.clone())?;
        tc = tc.concat(&unit)?;
    }
    Ok(tc)
}
