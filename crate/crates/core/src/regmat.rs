//! Matrices over the series ring: the regularity test that makes `I - A`
//! invertible, certified Neumann inversion, formal torsion classes, and
//! abelianized determinants.
//!
//! # Regularity
//!
//! A square matrix `A` with exact entries is *regular* when there is a
//! `K < 0` such that every cyclic product of entry norms decays like
//! `exp(K·m)`; in logarithmic form, when the maximum mean weight of a
//! directed cycle in the support digraph (vertices = indices, an edge `i → j`
//! for each nonzero entry `A_ij`, weighted by its log-norm) is strictly
//! negative. That maximum cycle mean is computed exactly with Karp's dynamic
//! program, run over the subgraph reachable from each source; rational
//! arithmetic makes the comparison with zero exact, so the regularity verdict
//! carries no numerical slack. A matrix with an acyclic support digraph is
//! nilpotent and gets `K = -inf`.
//!
//! When the test fails, the certificate contains a witness: a cycle whose
//! mean weight equals the (non-negative) maximum. The witness is recovered by
//! shifting all edge weights down by the maximum mean — after which no cycle
//! has positive weight — and walking the subgraph of *tight* edges, those
//! realizing equality in the longest-path inequality; a cycle of tight edges
//! exists and its unshifted mean is exactly the maximum.
//!
//! # Neumann inversion
//!
//! For regular `A`, `(I - A)^{-1} = Σ_{m≥0} A^m` converges in the weighted
//! completion: an entry of `A^m` is a sum over length-`m` paths, and any such
//! path splits into at most `n - 1` non-cycle edges plus cycles of mean at
//! most `K`, giving the entry bound
//!
//! ```text
//! lognorm (A^m)_{ij} ≤ K·(m - 1 - n) + n·M,   M = max entry log-norm.
//! ```
//!
//! The bound decreases in `m`, so the minimal certified depth `N` for a
//! truncation level `t` is computable exactly, and the partial sum
//! `Σ_{m=0}^{N} A^m` truncated at `t` is a certified inverse: the discarded
//! tail lies entirely at or below `t`. The loop additionally stops early when
//! a power vanishes or when `matnorm(A^m) + n·(M - K) ≤ t`, which certifies
//! the whole remaining tail at once.

use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::error::Error;
use crate::groups::Weighting;
use crate::level::{rational_int, Level};
use crate::series::{AbelianSeries, NovikovSeries};
use crate::{Rational, Result};

/// A rows × cols matrix of series sharing one weighting. The regularity and
/// inversion operations require a square matrix; rectangular shapes appear as
/// boundary maps of chain complexes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingMatrix {
    xi: Arc<Weighting>,
    rows: usize,
    cols: usize,
    entries: Vec<NovikovSeries>,
}

impl RingMatrix {
    pub fn zero(xi: &Arc<Weighting>, rows: usize, cols: usize) -> RingMatrix {
        RingMatrix {
            xi: Arc::clone(xi),
            rows,
            cols,
            entries: vec![NovikovSeries::zero(xi); rows * cols],
        }
    }

    pub fn identity(xi: &Arc<Weighting>, n: usize) -> RingMatrix {
        let mut m = RingMatrix::zero(xi, n, n);
        for i in 0..n {
            m.entries[i * n + i] = NovikovSeries::one(xi);
        }
        m
    }

    /// Build from rows of entries; all entries must share the weighting.
    pub fn from_rows(xi: &Arc<Weighting>, rows: Vec<Vec<NovikovSeries>>) -> Result<RingMatrix> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(nrows * ncols);
        for row in rows {
            if row.len() != ncols {
                return Err(Error::ShapeMismatch {
                    context: "rows of unequal length".into(),
                });
            }
            for s in row {
                if !s.weighting().same_as(xi) {
                    return Err(Error::WeightingMismatch);
                }
                entries.push(s);
            }
        }
        Ok(RingMatrix {
            xi: Arc::clone(xi),
            rows: nrows,
            cols: ncols,
            entries,
        })
    }

    pub fn weighting(&self) -> &Arc<Weighting> {
        &self.xi
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Side length of a square matrix.
    pub fn dim(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> &NovikovSeries {
        &self.entries[i * self.cols + j]
    }

    pub fn set_entry(&mut self, i: usize, j: usize, s: NovikovSeries) -> Result<()> {
        if !s.weighting().same_as(&self.xi) {
            return Err(Error::WeightingMismatch);
        }
        self.entries[i * self.cols + j] = s;
        Ok(())
    }

    pub fn entries(&self) -> impl Iterator<Item = &NovikovSeries> {
        self.entries.iter()
    }

    /// The contiguous block with rows `r0..r1` and columns `c0..c1`.
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> RingMatrix {
        assert!(r0 <= r1 && r1 <= self.rows && c0 <= c1 && c1 <= self.cols);
        let mut entries = Vec::with_capacity((r1 - r0) * (c1 - c0));
        for i in r0..r1 {
            for j in c0..c1 {
                entries.push(self.entry(i, j).clone());
            }
        }
        RingMatrix {
            xi: Arc::clone(&self.xi),
            rows: r1 - r0,
            cols: c1 - c0,
            entries,
        }
    }

    fn ensure_same_shape(&self, other: &RingMatrix) -> Result<()> {
        if !self.xi.same_as(&other.xi) {
            return Err(Error::WeightingMismatch);
        }
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch {
                context: format!(
                    "{}x{} vs {}x{}",
                    self.rows, self.cols, other.rows, other.cols
                ),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &RingMatrix) -> Result<RingMatrix> {
        self.ensure_same_shape(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(RingMatrix {
            xi: Arc::clone(&self.xi),
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }

    pub fn sub(&self, other: &RingMatrix) -> Result<RingMatrix> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> RingMatrix {
        RingMatrix {
            xi: Arc::clone(&self.xi),
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(NovikovSeries::neg).collect(),
        }
    }

    /// Matrix product `self · other` (entries multiply in that order, which
    /// matters over a noncommutative ring).
    pub fn mul(&self, other: &RingMatrix) -> Result<RingMatrix> {
        if !self.xi.same_as(&other.xi) {
            return Err(Error::WeightingMismatch);
        }
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch {
                context: format!(
                    "cannot multiply {}x{} by {}x{}",
                    self.rows, self.cols, other.rows, other.cols
                ),
            });
        }
        let mut entries = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            for k in 0..other.cols {
                let mut acc = NovikovSeries::zero(&self.xi);
                for j in 0..self.cols {
                    acc = acc.add(&self.entry(i, j).mul(other.entry(j, k))?)?;
                }
                entries.push(acc);
            }
        }
        Ok(RingMatrix {
            xi: Arc::clone(&self.xi),
            rows: self.rows,
            cols: other.cols,
            entries,
        })
    }

    pub fn trace(&self) -> Result<NovikovSeries> {
        let n = self.dim()?;
        let mut acc = NovikovSeries::zero(&self.xi);
        for i in 0..n {
            acc = acc.add(self.entry(i, i))?;
        }
        Ok(acc)
    }

    /// `I - self` for square matrices.
    pub fn one_minus(&self) -> Result<RingMatrix> {
        let n = self.dim()?;
        RingMatrix::identity(&self.xi, n).sub(self)
    }

    pub fn is_exact(&self) -> bool {
        self.entries.iter().all(NovikovSeries::is_exact)
    }

    pub fn is_exact_zero(&self) -> bool {
        self.entries.iter().all(NovikovSeries::is_exact_zero)
    }

    pub fn has_integer_coefficients(&self) -> bool {
        self.entries
            .iter()
            .all(NovikovSeries::has_integer_coefficients)
    }

    /// Max entry log-norm bound; the log of the matrix norm.
    pub fn log_norm_bound(&self) -> Level {
        let mut best = Level::NegInf;
        for e in &self.entries {
            let b = e.log_norm_bound();
            if b > best {
                best = b;
            }
        }
        best
    }

    pub fn truncate_entries(&self, t: &Level) -> Result<RingMatrix> {
        let entries = self
            .entries
            .iter()
            .map(|e| e.truncate(t))
            .collect::<Result<Vec<_>>>()?;
        Ok(RingMatrix {
            xi: Arc::clone(&self.xi),
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }

    pub(crate) fn coarsened_entries(&self, t: &Level) -> RingMatrix {
        RingMatrix {
            xi: Arc::clone(&self.xi),
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e.coarsened(t)).collect(),
        }
    }

    pub fn certified_at(&self, level: &Level) -> bool {
        self.entries.iter().all(|e| e.certified_at(level))
    }

    pub fn agrees_with(&self, other: &RingMatrix, above: &Level) -> Result<bool> {
        self.ensure_same_shape(other)?;
        for (a, b) in self.entries.iter().zip(&other.entries) {
            if !a.agrees_with(b, above)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// True when no entry stores any term (exact zero or fully truncated).
    fn has_no_stored_terms(&self) -> bool {
        self.entries.iter().all(|e| e.term_count() == 0)
    }
}

/// Outcome of the exact maximum cycle mean computation on a weighted digraph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CycleMeanOutcome {
    /// The digraph has no directed cycle.
    Acyclic,
    /// Maximum mean over all directed cycles, with a cycle realizing it
    /// (vertices in order; the edge from the last back to the first closes
    /// the cycle).
    Cyclic { mean: Rational, witness: Vec<usize> },
}

/// Exact maximum cycle mean of a directed graph with rational edge weights.
///
/// Runs Karp's dynamic program from every source over its reachable
/// subgraph, which covers every cycle; the witness is extracted from the
/// tight subgraph after shifting weights by the maximum mean.
pub fn max_cycle_mean(n: usize, edges: &[(usize, usize, Rational)]) -> CycleMeanOutcome {
    for &(u, v, _) in edges {
        assert!(u < n && v < n, "edge endpoint out of range");
    }
    let mut adj: Vec<Vec<(usize, &Rational)>> = vec![Vec::new(); n];
    for (u, v, w) in edges {
        adj[*u].push((*v, w));
    }

    let mut best: Option<(Rational, usize)> = None; // (mean, source)
    for s in 0..n {
        if let Some(mean) = karp_from_source(&adj, s) {
            if best.as_ref().map_or(true, |(b, _)| mean > *b) {
                best = Some((mean, s));
            }
        }
    }
    match best {
        None => CycleMeanOutcome::Acyclic,
        Some((mean, source)) => {
            let witness = tight_cycle(&adj, source, &mean);
            CycleMeanOutcome::Cyclic { mean, witness }
        }
    }
}

/// Karp's maximum mean over cycles inside the subgraph reachable from `s`,
/// `None` when that subgraph is acyclic.
fn karp_from_source(adj: &[Vec<(usize, &Rational)>], s: usize) -> Option<Rational> {
    let reach = reachable_from(adj, s);
    let k = reach.len();
    if k == 0 {
        return None;
    }
    let index_of = |v: usize| reach.binary_search(&v).ok();

    // walk[m][v'] = max weight of an m-edge walk from s to reach[v'].
    let mut walk: Vec<Vec<Option<Rational>>> = vec![vec![None; k]; k + 1];
    walk[0][index_of(s).unwrap()] = Some(Rational::zero());
    for m in 1..=k {
        for (ui, &u) in reach.iter().enumerate() {
            let from = match &walk[m - 1][ui] {
                None => continue,
                Some(w) => w.clone(),
            };
            for (v, w) in &adj[u] {
                if let Some(vi) = index_of(*v) {
                    let cand = &from + *w;
                    let slot = &mut walk[m][vi];
                    if slot.as_ref().map_or(true, |cur| cand > *cur) {
                        *slot = Some(cand);
                    }
                }
            }
        }
    }

    // A k-edge walk among k vertices must repeat one, so finiteness of
    // walk[k][v] certifies a cycle; the Karp minimax then yields the maximum
    // cycle mean.
    let mut best: Option<Rational> = None;
    for vi in 0..k {
        let full = match &walk[k][vi] {
            None => continue,
            Some(w) => w,
        };
        let mut v_value: Option<Rational> = None;
        for (m, row) in walk.iter().enumerate().take(k) {
            if let Some(part) = &row[vi] {
                let mean = (full - part) / rational_int((k - m) as i64);
                if v_value.as_ref().map_or(true, |cur| mean < *cur) {
                    v_value = Some(mean);
                }
            }
        }
        if let Some(val) = v_value {
            if best.as_ref().map_or(true, |cur| val > *cur) {
                best = Some(val);
            }
        }
    }
    best
}

fn reachable_from(adj: &[Vec<(usize, &Rational)>], s: usize) -> Vec<usize> {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![s];
    seen[s] = true;
    while let Some(u) = stack.pop() {
        for (v, _) in &adj[u] {
            if !seen[*v] {
                seen[*v] = true;
                stack.push(*v);
            }
        }
    }
    (0..adj.len()).filter(|v| seen[*v]).collect()
}

/// A cycle of mean exactly `mean` in the subgraph reachable from `source`.
///
/// Shift every edge weight down by `mean`; then no reachable cycle has
/// positive total weight, longest-walk potentials `π` are finite on the
/// reachable set, and every edge satisfies `π(u) + w' ≤ π(v)`. Summing
/// around a maximum-mean cycle forces equality on each of its edges, so the
/// subgraph of tight edges contains a cycle, and every cycle of tight edges
/// telescopes to total shifted weight zero — mean exactly `mean`.
fn tight_cycle(adj: &[Vec<(usize, &Rational)>], source: usize, mean: &Rational) -> Vec<usize> {
    let reach = reachable_from(adj, source);
    let k = reach.len();
    let index_of = |v: usize| reach.binary_search(&v).ok();

    // Longest-walk potentials over shifted weights, via k-1 rounds of
    // relaxation (simple paths suffice: cycles contribute ≤ 0).
    let mut pot: Vec<Option<Rational>> = vec![None; k];
    pot[index_of(source).unwrap()] = Some(Rational::zero());
    for _ in 0..k.saturating_sub(1) {
        for (ui, &u) in reach.iter().enumerate() {
            let base = match &pot[ui] {
                None => continue,
                Some(p) => p.clone(),
            };
            for (v, w) in &adj[u] {
                if let Some(vi) = index_of(*v) {
                    let cand = &base + *w - mean;
                    let slot = &mut pot[vi];
                    if slot.as_ref().map_or(true, |cur| cand > *cur) {
                        *slot = Some(cand);
                    }
                }
            }
        }
    }

    // Tight edges: π(u) + w - mean = π(v).
    let mut tight: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (ui, &u) in reach.iter().enumerate() {
        let pu = match &pot[ui] {
            None => continue,
            Some(p) => p,
        };
        for (v, w) in &adj[u] {
            if let Some(vi) = index_of(*v) {
                if let Some(pv) = &pot[vi] {
                    if &(pu + *w - mean) == pv {
                        tight[ui].push(vi);
                    }
                }
            }
        }
    }

    // Any cycle in the tight subgraph will do; depth-first search with an
    // explicit stack.
    let mut color = vec![0u8; k]; // 0 = unvisited, 1 = on stack, 2 = done
    let mut path: Vec<usize> = Vec::new();
    for start in 0..k {
        if color[start] != 0 {
            continue;
        }
        // Each frame is (vertex, next child index to explore).
        let mut frames: Vec<(usize, usize)> = vec![(start, 0)];
        color[start] = 1;
        path.push(start);
        while let Some((u, child)) = frames.last().copied() {
            if child < tight[u].len() {
                frames.last_mut().unwrap().1 += 1;
                let v = tight[u][child];
                match color[v] {
                    0 => {
                        color[v] = 1;
                        path.push(v);
                        frames.push((v, 0));
                    }
                    1 => {
                        // Found a cycle: the tail of `path` from v to u.
                        let pos = path.iter().position(|x| *x == v).unwrap();
                        return path[pos..].iter().map(|vi| reach[*vi]).collect();
                    }
                    _ => {}
                }
            } else {
                color[u] = 2;
                path.pop();
                frames.pop();
            }
        }
    }
    unreachable!("a maximum-mean cycle is always tight");
}

/// The verdict of the regularity test, with the exact maximum cycle mean and,
/// on failure, a witness cycle realizing it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegularityCertificate {
    regular: bool,
    max_cycle_mean: Level,
    witness: Option<Vec<usize>>,
}

impl RegularityCertificate {
    pub fn is_regular(&self) -> bool {
        self.regular
    }

    /// Maximum cycle mean of entry log-norms; `-inf` for a nilpotent matrix.
    pub fn max_cycle_mean(&self) -> &Level {
        &self.max_cycle_mean
    }

    /// The offending cycle (matrix indices, in order) when not regular.
    pub fn witness(&self) -> Option<&[usize]> {
        self.witness.as_deref()
    }
}

/// Regularity test for a square matrix with exact entries.
pub fn regularity(a: &RingMatrix) -> Result<RegularityCertificate> {
    let n = a.dim()?;
    for e in a.entries() {
        if !e.is_exact() {
            return Err(Error::NotExact {
                cutoff: e.cutoff().to_string(),
            });
        }
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let entry = a.entry(i, j);
            if entry.term_count() > 0 {
                match entry.log_norm()? {
                    Level::Finite(w) => edges.push((i, j, w)),
                    Level::NegInf => unreachable!("nonzero exact series has finite log-norm"),
                }
            }
        }
    }
    Ok(match max_cycle_mean(n, &edges) {
        CycleMeanOutcome::Acyclic => RegularityCertificate {
            regular: true,
            max_cycle_mean: Level::NegInf,
            witness: None,
        },
        CycleMeanOutcome::Cyclic { mean, witness } => {
            let regular = mean.is_negative();
            RegularityCertificate {
                regular,
                max_cycle_mean: Level::Finite(mean),
                witness: if regular { None } else { Some(witness) },
            }
        }
    })
}

/// Minimal depth `N` such that the entry bound `K(m - 1 - n) + n·M ≤ t`
/// holds for every power `m > N`; the bound is decreasing in `m`, so this is
/// `N ≥ n + (t - n·M)/K`.
pub(crate) fn certified_depth(k: &Rational, n: usize, mlog: &Rational, t: &Rational) -> u64 {
    use num_traits::ToPrimitive;
    debug_assert!(k.is_negative());
    let n_q = rational_int(n as i64);
    let x = &n_q + (t - &n_q * mlog) / k;
    let ceil = x.ceil().to_integer();
    if ceil.is_negative() {
        0
    } else {
        ceil.to_u64().expect("certified depth fits in u64")
    }
}

/// Certified inverse of `I - a`, truncated at `t`; requires regularity.
pub fn neumann_inverse(a: &RingMatrix, t: &Rational) -> Result<RingMatrix> {
    let inv = neumann_inverse_with_depth(a, t, None)?;
    Ok(inv.0)
}

/// As [`neumann_inverse`], also reporting the number of powers actually
/// summed. A depth override must be at least the certified depth.
pub fn neumann_inverse_with_depth(
    a: &RingMatrix,
    t: &Rational,
    depth_override: Option<u64>,
) -> Result<(RingMatrix, u64)> {
    let cert = regularity(a)?;
    if !cert.is_regular() {
        return Err(not_regular_error(&cert));
    }
    let n = a.dim()?;
    let t_level = Level::Finite(t.clone());

    let (sum, depth_used) = sum_certified_powers(a, &cert, t)?;
    let mut result = RingMatrix::identity(&a.xi, n).add(&sum)?;
    result = result.truncate_checked(&t_level)?;
    if let Some(requested) = depth_override {
        if requested < depth_used {
            return Err(Error::DepthTooSmall {
                requested,
                certified: depth_used,
            });
        }
    }

    // Certified verification: (I - a) · result ≡ I above the product's own
    // certified level (which is t when the matrix norm is at most one).
    let product = a.one_minus()?.mul(&result)?;
    let identity = RingMatrix::identity(&a.xi, n);
    let mut check_level = t_level;
    for e in product.entries() {
        check_level = check_level.join(e.cutoff());
    }
    if !product.agrees_with(&identity, &check_level)? {
        return Err(Error::CertificationFailed {
            what: "Neumann inverse failed its defining identity".into(),
        });
    }
    Ok((result, depth_used))
}

impl RingMatrix {
    fn truncate_checked(&self, t: &Level) -> Result<RingMatrix> {
        if self.certified_at(t) {
            self.truncate_entries(t)
        } else {
            Err(Error::CutoffTooCoarse {
                cutoff: self.log_norm_bound().to_string(),
                requested: t.to_string(),
            })
        }
    }
}

pub(crate) fn not_regular_error(cert: &RegularityCertificate) -> Error {
    // The certificate stores zero-based vertices; the diagnostic numbers them
    // from one, matching the serialized witness.
    Error::NotRegular {
        cycle: cert.witness().unwrap_or(&[]).iter().map(|v| v + 1).collect(),
        mean: cert
            .max_cycle_mean()
            .as_finite()
            .cloned()
            .unwrap_or_else(Rational::zero),
    }
}

/// The certified partial power sum `Σ_{m=1}^{N} A^m` for level `t`, together
/// with the final power index reached.
fn sum_certified_powers(
    a: &RingMatrix,
    cert: &RegularityCertificate,
    t: &Rational,
) -> Result<(RingMatrix, u64)> {
    let n = a.dim()?;
    let mut sum = RingMatrix::zero(&a.xi, n, n);
    let mut depth_used = 0u64;
    for_each_certified_power(a, cert, t, |m, power| {
        depth_used = m;
        sum = sum.add(power)?;
        Ok(())
    })?;
    Ok((sum, depth_used))
}

/// Drive the certified power iteration: calls `body(m, &A^m)` for `m = 1`
/// up to the certified depth for level `t`, stopping early when a power
/// vanishes or when the remaining tail is certified at or below `t`.
///
/// Powers are computed exactly when any entry has non-negative log-norm;
/// when the matrix norm is strictly negative, powers are coarsened at `t`
/// along the way, which is sound because further multiplication only lowers
/// weights.
pub(crate) fn for_each_certified_power(
    a: &RingMatrix,
    cert: &RegularityCertificate,
    t: &Rational,
    mut body: impl FnMut(u64, &RingMatrix) -> Result<()>,
) -> Result<()> {
    debug_assert!(cert.is_regular());
    let n = a.dim()?;
    let mlog = a.log_norm_bound();
    if mlog.is_neg_inf() {
        return Ok(()); // zero matrix: no powers to visit
    }
    let t_level = Level::Finite(t.clone());
    let contracting = mlog.is_negative();

    let (depth, tail_slack): (Option<u64>, Option<Rational>) = match cert.max_cycle_mean() {
        // Nilpotent: iterate until the power vanishes (at most n steps).
        Level::NegInf => (None, None),
        Level::Finite(k) => {
            let m = mlog.as_finite().expect("nonzero matrix has finite norm");
            let depth = certified_depth(k, n, m, t);
            let slack = rational_int(n as i64) * (m - k);
            (Some(depth), Some(slack))
        }
    };

    let mut power = a.clone();
    if contracting {
        power = power.coarsened_entries(&t_level);
    }
    let mut m = 1u64;
    loop {
        if power.has_no_stored_terms() && power.certified_at(&t_level) {
            break; // A^m ≡ 0 at this precision and so are all later powers
        }
        body(m, &power)?;
        if let Some(slack) = &tail_slack {
            // Tail after m: A^m · Σ_{j≥1} A^j, bounded by matnorm + n(M - K).
            if let Level::Finite(norm) = power.log_norm_bound() {
                if &norm + slack <= *t {
                    break;
                }
            }
        }
        if let Some(depth) = depth {
            if m >= depth {
                break;
            }
        } else if m as usize >= n {
            break; // nilpotency index is at most n
        }
        power = power.mul(a)?;
        if contracting {
            power = power.coarsened_entries(&t_level);
        }
        m += 1;
    }
    Ok(())
}

/// The sign of a torsion summand.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flipped(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    /// The sign `(-1)^{i+1}` attached to dimension `i` in torsion sums.
    pub fn for_dimension(i: usize) -> Sign {
        if i % 2 == 0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }
}

/// One formal summand `sign · log-class of (I - A)`, with the certificate
/// that makes the unit invertible.
#[derive(Clone, Debug)]
pub struct TorsionSummand {
    sign: Sign,
    matrix: RingMatrix,
    certificate: RegularityCertificate,
}

impl TorsionSummand {
    pub fn sign(&self) -> Sign {
        self.sign
    }

    /// The matrix `A`; the unit this summand stands for is `I - A`.
    pub fn matrix(&self) -> &RingMatrix {
        &self.matrix
    }

    pub fn certificate(&self) -> &RegularityCertificate {
        &self.certificate
    }
}

/// A formal signed list of units `I - A` with `A` exact and regular.
///
/// No relations are imposed: classes are compared only through their images
/// (the logarithm homomorphism and the abelianized determinant), never by
/// rewriting the list itself.
#[derive(Clone, Debug)]
pub struct TorsionClass {
    xi: Arc<Weighting>,
    summands: Vec<TorsionSummand>,
}

impl TorsionClass {
    pub fn empty(xi: &Arc<Weighting>) -> TorsionClass {
        TorsionClass {
            xi: Arc::clone(xi),
            summands: Vec::new(),
        }
    }

    /// The class of the single unit `I - a`, positively signed.
    pub fn unit(a: RingMatrix) -> Result<TorsionClass> {
        TorsionClass::signed_unit(Sign::Plus, a)
    }

    pub fn signed_unit(sign: Sign, a: RingMatrix) -> Result<TorsionClass> {
        let cert = regularity(&a)?;
        if !cert.is_regular() {
            return Err(not_regular_error(&cert));
        }
        let xi = Arc::clone(&a.xi);
        Ok(TorsionClass {
            xi,
            summands: vec![TorsionSummand {
                sign,
                matrix: a,
                certificate: cert,
            }],
        })
    }

    /// Formal sum: concatenation of summand lists.
    pub fn concat(&self, other: &TorsionClass) -> Result<TorsionClass> {
        if !self.xi.same_as(&other.xi) {
            return Err(Error::WeightingMismatch);
        }
        let mut summands = self.summands.clone();
        summands.extend(other.summands.iter().cloned());
        Ok(TorsionClass {
            xi: Arc::clone(&self.xi),
            summands,
        })
    }

    /// The formal inverse: every sign flipped.
    pub fn negated(&self) -> TorsionClass {
        TorsionClass {
            xi: Arc::clone(&self.xi),
            summands: self
                .summands
                .iter()
                .map(|s| TorsionSummand {
                    sign: s.sign.flipped(),
                    matrix: s.matrix.clone(),
                    certificate: s.certificate.clone(),
                })
                .collect(),
        }
    }

    pub fn weighting(&self) -> &Arc<Weighting> {
        &self.xi
    }

    pub fn summands(&self) -> &[TorsionSummand] {
        &self.summands
    }

    pub fn is_empty(&self) -> bool {
        self.summands.is_empty()
    }
}

/// The determinant image of a torsion class: the alternating product of
/// `det(abelianized(I - A_i))^{±1}`, truncated at `t` and canonicalized
/// modulo `±h` so that its maximal term is `+1 · identity`.
///
/// Each determinant has the exact form `1 + (terms of negative weight)`: in
/// the cofactor expansion, the identity permutation contributes the product
/// of diagonal entries `1 - (negative part)`, while every other permutation
/// uses at least one strictly negative off-diagonal cycle. This makes the
/// inverse factors certified geometric series.
pub fn abelian_determinant(tc: &TorsionClass, t: &Rational) -> Result<AbelianSeries> {
    let ab_xi = tc.xi.abelianized();
    let t_level = Level::Finite(t.clone());
    let mut result = NovikovSeries::one(&ab_xi);
    for summand in &tc.summands {
        let unit = summand.matrix.one_minus()?;
        let mut ab_rows = Vec::with_capacity(unit.rows());
        for i in 0..unit.rows() {
            let mut row = Vec::with_capacity(unit.cols());
            for j in 0..unit.cols() {
                row.push(unit.entry(i, j).abelianize()?);
            }
            ab_rows.push(row);
        }
        let ab_unit = RingMatrix::from_rows(&ab_xi, ab_rows)?;
        let det = commutative_determinant(&ab_unit)?;
        let factor = match summand.sign {
            Sign::Plus => det,
            Sign::Minus => invert_abelian_unit(&det, t)?,
        };
        result = result.mul(&factor)?;
    }
    if !result.certified_at(&t_level) {
        return Err(Error::CertificationFailed {
            what: "determinant product lost certification at the requested level".into(),
        });
    }
    let result = result.truncate(&t_level)?;
    canonicalize_mod_units(&result)
}

/// Cofactor-expansion determinant; only valid over an abelian group ring.
pub(crate) fn commutative_determinant(m: &RingMatrix) -> Result<NovikovSeries> {
    use crate::groups::GroupKind;
    if m.xi.spec().kind() != GroupKind::FreeAbelian {
        return Err(Error::NotAbelian);
    }
    let n = m.dim()?;
    if n == 0 {
        return Ok(NovikovSeries::one(&m.xi));
    }
    if n == 1 {
        return Ok(m.entry(0, 0).clone());
    }
    let mut acc = NovikovSeries::zero(&m.xi);
    for j in 0..n {
        let entry = m.entry(0, j);
        if entry.term_count() == 0 && entry.is_exact() {
            continue;
        }
        let minor = m.minor(0, j);
        let cofactor = commutative_determinant(&minor)?;
        let signed = if j % 2 == 0 {
            entry.mul(&cofactor)?
        } else {
            entry.mul(&cofactor)?.neg()
        };
        acc = acc.add(&signed)?;
    }
    Ok(acc)
}

impl RingMatrix {
    /// The matrix with row `i` and column `j` removed.
    fn minor(&self, i: usize, j: usize) -> RingMatrix {
        let mut entries = Vec::with_capacity((self.rows - 1) * (self.cols - 1));
        for r in 0..self.rows {
            if r == i {
                continue;
            }
            for c in 0..self.cols {
                if c == j {
                    continue;
                }
                entries.push(self.entry(r, c).clone());
            }
        }
        RingMatrix {
            xi: Arc::clone(&self.xi),
            rows: self.rows - 1,
            cols: self.cols - 1,
            entries,
        }
    }
}

/// Invert an abelian series whose maximal-weight term is `±h`: factor the
/// unit monomial out, leaving `±h · (1 - r)` with `r` strictly contracting,
/// and expand the geometric series at `t`.
fn invert_abelian_unit(det: &AbelianSeries, t: &Rational) -> Result<AbelianSeries> {
    let (lead_g, lead_c) = leading_term(det)?;
    if !is_unit_coefficient(&lead_c) {
        return Err(Error::LeadingTermNotUnit {
            term: format!("{lead_c} · {lead_g}"),
        });
    }
    // u = lead_c · lead_g; u^{-1} = lead_c · lead_g^{-1} since lead_c = ±1.
    let u_inv = NovikovSeries::monomial(det.weighting(), &lead_g.inverse(), lead_c)?;
    let r = NovikovSeries::one(det.weighting()).sub(&u_inv.mul(det)?)?;
    let geometric = r.invert_one_minus(t)?;
    u_inv.mul(&geometric)
}

/// Scale by the unique `±h` making the maximal-weight term `+1 · identity`
/// (ties among maximal-weight terms broken by the element order). Errors
/// when the leading coefficient is not `±1` or nothing is stored above the
/// cutoff.
pub(crate) fn canonicalize_mod_units(s: &AbelianSeries) -> Result<AbelianSeries> {
    let (lead_g, lead_c) = leading_term(s)?;
    if !is_unit_coefficient(&lead_c) {
        return Err(Error::LeadingTermNotUnit {
            term: format!("{lead_c} · {lead_g}"),
        });
    }
    let scale = NovikovSeries::monomial(s.weighting(), &lead_g.inverse(), lead_c)?;
    s.mul(&scale)
}

/// The maximal-weight stored term, ties broken by taking the least element
/// in the canonical element order.
fn leading_term(s: &NovikovSeries) -> Result<(crate::groups::GroupElement, Rational)> {
    let mut best: Option<(crate::groups::GroupElement, Rational, Rational)> = None;
    for (g, c) in s.terms() {
        let w = s.weight_of(g);
        let better = match &best {
            None => true,
            Some((bg, _, bw)) => w > *bw || (w == *bw && g < bg),
        };
        if better {
            best = Some((g.clone(), c.clone(), w));
        }
    }
    match best {
        Some((g, c, _)) => Ok((g, c)),
        None => Err(Error::SupportViolation {
            reason: format!("no terms above cutoff {}; cannot canonicalize", s.cutoff()),
        }),
    }
}

fn is_unit_coefficient(c: &Rational) -> bool {
    use num_traits::One;
    c.is_one() || (-c).is_one()
}
