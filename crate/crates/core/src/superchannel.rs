//! Superchannels acting on Choi matrices through Kraus operators
//! `J -> sum_m M_m J M_m^dagger`, incoherent-superchannel checks, and the
//! explicit superchannels used to move between direct-sum layouts.
//!
//! Two layouts of a weighted direct sum of channels `phi_i: A -> B_i` appear:
//!
//! * interleaved: the Choi matrix of [`direct_sum`](crate::channel::direct_sum),
//!   row `j * B + offset_i + alpha` with `B = sum_i B_i`;
//! * block: `(+)_i p_i J_i`, row `(sum_{i' < i} A B_i') + j * B_i + alpha`.
//!
//! Only the interleaved layout is a Choi matrix of a channel, so the layout
//! permutations and the constructors that produce block-layout operators are
//! applied with [`Superchannel::apply_raw`].

use num_complex::Complex64;

use crate::channel::{ChoiDiagnostics, ChoiMatrix, QuantumChannel};
use crate::error::{Error, Result};
use crate::matrix::{kron, ComplexMatrix, ONE, ZERO};

/// Elementwise tolerance for `sum M^dagger M = I`.
pub const COMPLETENESS_TOL: f64 = 1e-9;
/// Outcomes of a selective application below this probability are dropped.
pub const MIN_OUTCOME_PROBABILITY: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Superchannel {
    dims_in: (usize, usize),
    dims_out: (usize, usize),
    kraus: Vec<ComplexMatrix>,
    subnormalized: bool,
}

impl Superchannel {
    /// Validated constructor: every Kraus operator is
    /// `(|A'||B'|) x (|A||B|)` and `sum M^dagger M = I`.
    pub fn from_kraus(kraus: Vec<ComplexMatrix>, dims_in: (usize, usize), dims_out: (usize, usize)) -> Result<Self> {
        let s = Self::build(kraus, dims_in, dims_out, false)?;
        let deviation = s.completeness_deviation();
        if deviation > COMPLETENESS_TOL {
            return Err(Error::NotComplete { deviation });
        }
        Ok(s)
    }

    /// Constructor for Kraus families that are only meant to act on a
    /// restricted set of inputs; completeness is not enforced and
    /// [`selective_apply`](Self::selective_apply) refuses them.
    pub fn subnormalized(kraus: Vec<ComplexMatrix>, dims_in: (usize, usize), dims_out: (usize, usize)) -> Result<Self> {
        Self::build(kraus, dims_in, dims_out, true)
    }

    fn build(
        kraus: Vec<ComplexMatrix>,
        dims_in: (usize, usize),
        dims_out: (usize, usize),
        subnormalized: bool,
    ) -> Result<Self> {
        let n_in = dims_in.0 * dims_in.1;
        let n_out = dims_out.0 * dims_out.1;
        if kraus.is_empty() || n_in == 0 || n_out == 0 {
            return Err(Error::InvalidInput("superchannel needs Kraus operators and positive dimensions".into()));
        }
        if let Some(bad) = kraus.iter().find(|m| m.shape() != (n_out, n_in)) {
            return Err(Error::DimensionMismatch(format!(
                "superchannel Kraus operators must be {n_out}x{n_in}, found {}x{}",
                bad.rows(),
                bad.cols()
            )));
        }
        Ok(Self { dims_in, dims_out, kraus, subnormalized })
    }

    pub fn identity(dim_in: usize, dim_out: usize) -> Self {
        let n = dim_in * dim_out;
        Self {
            dims_in: (dim_in, dim_out),
            dims_out: (dim_in, dim_out),
            kraus: vec![ComplexMatrix::identity(n)],
            subnormalized: false,
        }
    }

    pub fn dims_in(&self) -> (usize, usize) {
        self.dims_in
    }

    pub fn dims_out(&self) -> (usize, usize) {
        self.dims_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn is_subnormalized(&self) -> bool {
        self.subnormalized
    }

    pub fn completeness_deviation(&self) -> f64 {
        let n = self.dims_in.0 * self.dims_in.1;
        let mut sum = ComplexMatrix::zeros(n, n);
        for m in &self.kraus {
            sum.add_assign_scaled(&m.adjoint().matmul(m), 1.0);
        }
        sum.max_abs_diff(&ComplexMatrix::identity(n))
    }

    /// `sum_m M_m X M_m^dagger` on any operator of the input size.
    pub fn apply_raw(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let n_in = self.dims_in.0 * self.dims_in.1;
        if x.shape() != (n_in, n_in) {
            return Err(Error::DimensionMismatch(format!(
                "superchannel acts on {n_in}x{n_in} operators, got {}x{}",
                x.rows(),
                x.cols()
            )));
        }
        let n_out = self.dims_out.0 * self.dims_out.1;
        let mut out = ComplexMatrix::zeros(n_out, n_out);
        for m in &self.kraus {
            out.add_assign_scaled(&m.sandwich(x), 1.0);
        }
        Ok(out)
    }

    /// Maps a channel to a channel: `J' = (|A'| / |A|) sum_m M_m J M_m^dagger`,
    /// which reduces to the plain Kraus action when `|A'| = |A|`. Fails if the
    /// result is not a Choi matrix.
    pub fn apply(&self, phi: &QuantumChannel) -> Result<QuantumChannel> {
        self.check_input(phi)?;
        let raw = self.apply_raw(&phi.choi_matrix())?;
        let scaled = raw.scale(self.dims_out.0 as f64 / self.dims_in.0 as f64);
        let (a, b) = self.dims_out;
        match ChoiDiagnostics::of(a, b, &scaled).violation() {
            Some(v) => Err(Error::NotChannelPreserving(v)),
            None => ChoiMatrix::new(a, b, scaled)?.to_channel(),
        }
    }

    /// Keeps every Kraus outcome separate: `p_m = tr(M_m J M_m^dagger) / |A'|`
    /// and `J_m = |A'| M_m J M_m^dagger / tr(M_m J M_m^dagger)`.
    pub fn selective_apply(&self, phi: &QuantumChannel) -> Result<OutcomeEnsemble> {
        self.check_input(phi)?;
        if self.subnormalized {
            let deviation = self.completeness_deviation();
            return Err(Error::NotComplete { deviation });
        }
        let j = phi.choi_matrix();
        let a_out = self.dims_out.0 as f64;
        let (a, b) = self.dims_out;
        let mut raw = Vec::with_capacity(self.kraus.len());
        let mut total = 0.0;
        for m in &self.kraus {
            let piece = m.sandwich(&j);
            let p = piece.trace().re / a_out;
            total += p;
            raw.push((p, piece));
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::NormalizationMismatch { total });
        }
        let mut outcomes = Vec::new();
        for (index, (p, piece)) in raw.into_iter().enumerate() {
            if p < MIN_OUTCOME_PROBABILITY {
                continue;
            }
            let normalized = piece.scale(1.0 / p);
            let channel = ChoiMatrix::new(a, b, normalized).and_then(|c| c.to_channel()).map_err(|e| match e {
                Error::InvalidChoi(violation) => Error::OutcomeNotChannel { index, violation },
                other => other,
            })?;
            outcomes.push(Outcome { probability: p, channel });
        }
        Ok(OutcomeEnsemble { outcomes })
    }

    fn check_input(&self, phi: &QuantumChannel) -> Result<()> {
        if (phi.dim_in(), phi.dim_out()) != self.dims_in {
            return Err(Error::DimensionMismatch(format!(
                "superchannel expects channels {:?}, got ({}, {})",
                self.dims_in,
                phi.dim_in(),
                phi.dim_out()
            )));
        }
        Ok(())
    }

    /// `next . self`: Kraus products `N_n M_m`.
    pub fn then(&self, next: &Superchannel) -> Result<Superchannel> {
        let n_mid = self.dims_out.0 * self.dims_out.1;
        if next.dims_in.0 * next.dims_in.1 != n_mid {
            return Err(Error::DimensionMismatch("composed superchannels do not chain".into()));
        }
        let kraus = next.kraus.iter().flat_map(|n| self.kraus.iter().map(move |m| n.matmul(m))).collect();
        Self::build(kraus, self.dims_in, next.dims_out, self.subnormalized || next.subnormalized)
    }

    /// Checks the given Kraus expression for the incoherent form
    /// `M_m = sum c_{m,j alpha} |f_m(j alpha)><j alpha|`: at most one entry
    /// above `tol` per column. Returns the extracted structure when it holds.
    /// Only this Kraus expression is examined, not every equivalent one.
    pub fn incoherent_structure(&self, tol: f64) -> Option<Vec<IncoherentKrausStructure>> {
        self.kraus.iter().map(|m| IncoherentKrausStructure::extract(m, tol)).collect()
    }

    pub fn is_incoherent(&self, tol: f64) -> bool {
        self.incoherent_structure(tol).is_some()
    }
}

/// Column-to-row map and amplitudes of one incoherent Kraus operator.
#[derive(Debug, Clone, PartialEq)]
pub struct IncoherentKrausStructure {
    /// `targets[col]` is the row of the single nonzero entry, if any.
    pub targets: Vec<Option<usize>>,
    pub amplitudes: Vec<Complex64>,
}

impl IncoherentKrausStructure {
    pub fn extract(m: &ComplexMatrix, tol: f64) -> Option<Self> {
        let mut targets = Vec::with_capacity(m.cols());
        let mut amplitudes = Vec::with_capacity(m.cols());
        for c in 0..m.cols() {
            let mut hit = None;
            for r in 0..m.rows() {
                if m[(r, c)].norm() > tol {
                    if hit.is_some() {
                        return None;
                    }
                    hit = Some(r);
                }
            }
            targets.push(hit);
            amplitudes.push(hit.map_or(ZERO, |r| m[(r, c)]));
        }
        Some(Self { targets, amplitudes })
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub probability: f64,
    pub channel: QuantumChannel,
}

#[derive(Debug, Clone)]
pub struct OutcomeEnsemble {
    pub outcomes: Vec<Outcome>,
}

impl OutcomeEnsemble {
    pub fn total_probability(&self) -> f64 {
        self.outcomes.iter().map(|o| o.probability).sum()
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }
}

/// Permutation matrix sending basis vector `k` to `dest[k]`.
pub fn permutation_matrix(dest: &[usize]) -> Result<ComplexMatrix> {
    let n = dest.len();
    let mut seen = vec![false; n];
    for &d in dest {
        if d >= n || std::mem::replace(&mut seen[d], true) {
            return Err(Error::InvalidInput(format!("not a permutation of 0..{n}: {dest:?}")));
        }
    }
    let mut p = ComplexMatrix::zeros(n, n);
    for (k, &d) in dest.iter().enumerate() {
        p[(d, k)] = ONE;
    }
    Ok(p)
}

/// Single-Kraus relabeling superchannel `J -> P J P^dagger`.
pub fn permutation_superchannel(dest: &[usize], dims: (usize, usize)) -> Result<Superchannel> {
    if dest.len() != dims.0 * dims.1 {
        return Err(Error::DimensionMismatch(format!("permutation of {} indices for dims {dims:?}", dest.len())));
    }
    Superchannel::from_kraus(vec![permutation_matrix(dest)?], dims, dims)
}

/// Destination of every interleaved index in the block layout, for output
/// blocks of sizes `block_dims` over a `dim_in`-dimensional input.
pub fn interleaved_to_block(dim_in: usize, block_dims: &[usize]) -> Vec<usize> {
    let total: usize = block_dims.iter().sum();
    let mut dest = vec![0; dim_in * total];
    let mut block_start = 0;
    let mut offset = 0;
    for &bi in block_dims {
        for j in 0..dim_in {
            for alpha in 0..bi {
                dest[j * total + offset + alpha] = block_start + j * bi + alpha;
            }
        }
        block_start += dim_in * bi;
        offset += bi;
    }
    dest
}

/// Inverse of [`interleaved_to_block`].
pub fn block_to_interleaved(dim_in: usize, block_dims: &[usize]) -> Vec<usize> {
    let forward = interleaved_to_block(dim_in, block_dims);
    let mut inverse = vec![0; forward.len()];
    for (k, &d) in forward.iter().enumerate() {
        inverse[d] = k;
    }
    inverse
}

/// Complementary diagonal projectors selecting, inside every input block
/// `j`, the first `dim_b1` output indices (`Q_1`) and the remaining
/// `dim_b2` (`Q_2`).
pub fn projector_pair_q(dim_a: usize, dim_b1: usize, dim_b2: usize) -> Result<Superchannel> {
    let b = dim_b1 + dim_b2;
    let n = dim_a * b;
    let q1: Vec<f64> = (0..n).map(|i| if i % b < dim_b1 { 1.0 } else { 0.0 }).collect();
    let q2: Vec<f64> = q1.iter().map(|x| 1.0 - x).collect();
    Superchannel::from_kraus(
        vec![ComplexMatrix::from_diagonal(&q1), ComplexMatrix::from_diagonal(&q2)],
        (dim_a, b),
        (dim_a, b),
    )
}

/// The permutation generated by the transpositions
/// `(n (B1 + B2) + l) <-> (n B1 + l)`, `n < |A|`, `l < B1`, applied in order.
/// It moves the `B_1` part of an interleaved operator to the top-left
/// `|A| B1` block: for `phi_1 (+) 0` it yields `J_{phi_1} (+) O`.
pub fn compaction_permutation(dim_a: usize, dim_b1: usize, dim_b2: usize) -> Result<Superchannel> {
    let b = dim_b1 + dim_b2;
    let n = dim_a * b;
    // position -> original index currently stored there
    let mut content: Vec<usize> = (0..n).collect();
    for blk in 0..dim_a {
        for l in 0..dim_b1 {
            content.swap(blk * b + l, blk * dim_b1 + l);
        }
    }
    let mut dest = vec![0; n];
    for (pos, &orig) in content.iter().enumerate() {
        dest[orig] = pos;
    }
    permutation_superchannel(&dest, (dim_a, b))
}

/// Isometric embedding `M_0` with `<j|M_0|k> = delta_jk` from the
/// `|A| B1`-dimensional Choi space into the `|A| (B1 + B2)`-dimensional one.
/// Produces block-layout operators `J (+) O`.
pub fn embed_superchannel(dim_a: usize, dim_b1: usize, dim_b2: usize) -> Result<Superchannel> {
    let n_in = dim_a * dim_b1;
    let n_out = dim_a * (dim_b1 + dim_b2);
    let m0 = ComplexMatrix::from_fn(n_out, n_in, |r, c| if r == c { ONE } else { ZERO });
    Superchannel::from_kraus(vec![m0], (dim_a, dim_b1), (dim_a, dim_b1 + dim_b2))
}

/// Compression `{M_n}` with `<j|M_n|k> = delta_{j, k - n |A| B1}`: folds the
/// `|A| (B1 + B2)`-dimensional space onto its first `|A| B1` indices in
/// chunks of that size, `n = 0 ..= ceil(B2 / B1)`. Complete, incoherent,
/// and the identity on operators supported on the first chunk.
pub fn compress_superchannel(dim_a: usize, dim_b1: usize, dim_b2: usize) -> Result<Superchannel> {
    if dim_b1 == 0 {
        return Err(Error::InvalidInput("compression needs B1 >= 1".into()));
    }
    let chunk = dim_a * dim_b1;
    let n_in = dim_a * (dim_b1 + dim_b2);
    let count = dim_b2.div_ceil(dim_b1);
    let kraus = (0..=count)
        .map(|n| ComplexMatrix::from_fn(chunk, n_in, |r, c| if c == r + n * chunk { ONE } else { ZERO }))
        .filter(|m| m.max_abs() > 0.0)
        .collect();
    Superchannel::from_kraus(kraus, (dim_a, dim_b1 + dim_b2), (dim_a, dim_b1))
}

/// Cyclic shift `U_m = sum_k |(k + m) mod M><k|`.
pub fn cyclic_shift(dim: usize, m: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, dim, |r, c| if r == (c + m) % dim { ONE } else { ZERO })
}

/// `{U_m (x) M_m}`: the `m`-th outcome of `inner` is routed to control
/// register `m`. On `|0><0| (x) J` it yields `sum_m |m><m| (x) M_m J M_m^dagger`.
pub fn controlled_shift_superchannel(control_dim: usize, inner: &Superchannel) -> Result<Superchannel> {
    if inner.kraus.len() != control_dim {
        return Err(Error::InvalidInput(format!(
            "controlled shift over {control_dim} registers needs {control_dim} inner Kraus operators, got {}",
            inner.kraus.len()
        )));
    }
    let kraus = inner.kraus.iter().enumerate().map(|(m, km)| kron(&cyclic_shift(control_dim, m), km)).collect();
    let (ai, bi) = inner.dims_in;
    let (ao, bo) = inner.dims_out;
    Superchannel::build(kraus, (control_dim * ai, bi), (control_dim * ao, bo), inner.subnormalized).and_then(|s| {
        if s.subnormalized {
            Ok(s)
        } else {
            Superchannel::from_kraus(s.kraus, s.dims_in, s.dims_out)
        }
    })
}

/// `{|0><m| (x) I_blockDim}`: collapses an `M`-block direct sum
/// `(+)_m X_m` onto its first block as `sum_m X_m`.
pub fn merge_superchannel(blocks: usize, block_dim: usize) -> Result<Superchannel> {
    if blocks == 0 || block_dim == 0 {
        return Err(Error::InvalidInput("merge needs at least one non-empty block".into()));
    }
    let id = ComplexMatrix::identity(block_dim);
    let kraus = (0..blocks).map(|m| kron(&ComplexMatrix::unit(blocks, blocks, 0, m), &id)).collect();
    Superchannel::from_kraus(kraus, (blocks, block_dim), (blocks, block_dim))
}

/// `U_n = sum_k e^{i(theta_{(k+n) mod d} - theta_k)} |(k+n) mod d><k|`,
/// `n = 0..d`. Each fixes `sum_k e^{i theta_k} |k>` and their uniform
/// average maps any diagonal matrix to a multiple of the identity.
pub fn twirl_unitaries(dim: usize, phases: &[f64]) -> Result<Vec<ComplexMatrix>> {
    if phases.len() != dim {
        return Err(Error::DimensionMismatch(format!("{dim} phases expected, got {}", phases.len())));
    }
    Ok((0..dim)
        .map(|n| {
            ComplexMatrix::from_fn(dim, dim, |r, c| {
                if r == (c + n) % dim {
                    Complex64::from_polar(1.0, phases[r] - phases[c])
                } else {
                    ZERO
                }
            })
        })
        .collect())
}
