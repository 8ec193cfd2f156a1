//! Quantum channels, their Choi matrices and the named channels of the
//! trace-distance counterexample.
//!
//! The Choi matrix of `phi: A -> B` is `J = sum_jk |j><k| (x) phi(|j><k|)`,
//! stored with row index `j * dim_out + alpha`. Its partial trace over the
//! output is the identity on `A` exactly when `phi` is trace preserving.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{ChoiViolation, Error, Result};
use crate::matrix::{hermitian_eigen, hermitian_eigenvalues, partial_trace_b, ComplexMatrix, ZERO};

/// Elementwise tolerance for `sum K^dagger K = I`.
pub const TRACE_PRESERVING_TOL: f64 = 1e-9;
/// Tolerance for the PSD and partial-trace conditions of a Choi matrix.
pub const CHOI_TOL: f64 = 1e-9;
/// Eigenvalues of a Choi matrix at or below this are treated as zero when
/// reading Kraus operators back out.
pub const KRAUS_RANK_CUTOFF: f64 = 1e-12;

/// A completely positive trace-preserving map given by Kraus operators.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
}

impl QuantumChannel {
    /// Validates a Kraus family: equal `dim_out x dim_in` shapes and
    /// `sum K^dagger K = I` within [`TRACE_PRESERVING_TOL`].
    pub fn from_kraus(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::InvalidInput("empty Kraus family".into()))?;
        let (dim_out, dim_in) = first.shape();
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::InvalidInput("Kraus operators must be non-empty".into()));
        }
        if let Some(bad) = kraus.iter().find(|k| k.shape() != (dim_out, dim_in)) {
            return Err(Error::DimensionMismatch(format!(
                "Kraus operators must all be {dim_out}x{dim_in}, found {}x{}",
                bad.rows(),
                bad.cols()
            )));
        }
        let deviation = completeness_deviation(&kraus, dim_in);
        if deviation > TRACE_PRESERVING_TOL {
            return Err(Error::NotTracePreserving { deviation });
        }
        Ok(Self { dim_in, dim_out, kraus })
    }

    /// Reads a Kraus family off the eigendecomposition of a validated Choi
    /// matrix: `K[alpha][j] = sqrt(lambda) v[j * dim_out + alpha]`.
    pub fn from_choi(choi: &ChoiMatrix) -> Result<Self> {
        let (a, b) = (choi.dim_in, choi.dim_out);
        let eig = hermitian_eigen(&choi.matrix);
        let mut kraus = Vec::new();
        for (k, &lambda) in eig.values.iter().enumerate().rev() {
            if lambda <= KRAUS_RANK_CUTOFF {
                continue;
            }
            let s = lambda.sqrt();
            kraus.push(ComplexMatrix::from_fn(b, a, |alpha, j| eig.vectors[(j * b + alpha, k)] * s));
        }
        if kraus.is_empty() {
            return Err(Error::InvalidChoi(ChoiViolation::PartialTrace { deviation: 1.0 }));
        }
        Self::from_kraus(kraus)
    }

    pub fn identity(d: usize) -> Self {
        Self { dim_in: d, dim_out: d, kraus: vec![ComplexMatrix::identity(d)] }
    }

    /// Completely dephasing channel with Kraus operators `{|j><j|}`.
    pub fn dephasing(d: usize) -> Self {
        let kraus = (0..d).map(|j| ComplexMatrix::unit(d, d, j, j)).collect();
        Self { dim_in: d, dim_out: d, kraus }
    }

    /// Channel with a single unitary (or isometric) Kraus operator.
    pub fn from_isometry(v: ComplexMatrix) -> Result<Self> {
        Self::from_kraus(vec![v])
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// Raw Choi matrix; always satisfies the [`ChoiMatrix`] invariants up to
    /// rounding because `self` was validated on construction.
    pub fn choi_matrix(&self) -> ComplexMatrix {
        let (a, b) = (self.dim_in, self.dim_out);
        let n = a * b;
        let mut j = ComplexMatrix::zeros(n, n);
        let mut vec_k = vec![ZERO; n];
        for k in &self.kraus {
            for jj in 0..a {
                for alpha in 0..b {
                    vec_k[jj * b + alpha] = k[(alpha, jj)];
                }
            }
            for r in 0..n {
                if vec_k[r] == ZERO {
                    continue;
                }
                for c in 0..n {
                    j[(r, c)] += vec_k[r] * vec_k[c].conj();
                }
            }
        }
        j
    }

    pub fn choi(&self) -> ChoiMatrix {
        ChoiMatrix { dim_in: self.dim_in, dim_out: self.dim_out, matrix: self.choi_matrix() }
    }

    /// `J / |A|`, the unit-trace state every coherence measure is evaluated on.
    pub fn normalized_choi(&self) -> ComplexMatrix {
        self.choi_matrix().scale(1.0 / self.dim_in as f64)
    }

    /// `phi(rho) = sum_n K_n rho K_n^dagger`
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.shape() != (self.dim_in, self.dim_in) {
            return Err(Error::DimensionMismatch(format!(
                "channel input is {}-dimensional, got a {}x{} matrix",
                self.dim_in,
                rho.rows(),
                rho.cols()
            )));
        }
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out.add_assign_scaled(&k.sandwich(rho), 1.0);
        }
        Ok(out)
    }

    /// True iff the Choi matrix is diagonal within `tol`.
    pub fn is_incoherent(&self, tol: f64) -> bool {
        self.choi_matrix().max_off_diagonal() <= tol
    }

    /// `Delta_B . phi . Delta_A`, the resource-destroying map applied to `phi`.
    pub fn dephased(&self) -> QuantumChannel {
        let (a, b) = (self.dim_in, self.dim_out);
        let mut kraus = Vec::with_capacity(self.kraus.len() * a * b);
        for k in &self.kraus {
            for j in 0..a {
                for alpha in 0..b {
                    let z = k[(alpha, j)];
                    if z != ZERO {
                        let mut m = ComplexMatrix::zeros(b, a);
                        m[(alpha, j)] = z;
                        kraus.push(m);
                    }
                }
            }
        }
        if kraus.is_empty() {
            kraus.push(ComplexMatrix::zeros(b, a));
        }
        QuantumChannel { dim_in: a, dim_out: b, kraus }
    }
}

fn completeness_deviation(kraus: &[ComplexMatrix], dim: usize) -> f64 {
    let mut sum = ComplexMatrix::zeros(dim, dim);
    for k in kraus {
        sum.add_assign_scaled(&k.adjoint().matmul(k), 1.0);
    }
    sum.max_abs_diff(&ComplexMatrix::identity(dim))
}

/// A validated Choi matrix: PSD with `Tr_B J = I_A`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    dim_in: usize,
    dim_out: usize,
    matrix: ComplexMatrix,
}

impl ChoiMatrix {
    pub fn new(dim_in: usize, dim_out: usize, matrix: ComplexMatrix) -> Result<Self> {
        let report = ChoiDiagnostics::of(dim_in, dim_out, &matrix);
        match report.violation() {
            Some(v) => Err(Error::InvalidChoi(v)),
            None => Ok(Self { dim_in, dim_out, matrix }),
        }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn to_channel(&self) -> Result<QuantumChannel> {
        QuantumChannel::from_choi(self)
    }
}

/// Every Choi invariant measured on a candidate matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiDiagnostics {
    pub shape_ok: bool,
    pub hermitian_deviation: f64,
    pub min_eigenvalue: f64,
    pub partial_trace_deviation: f64,
    pub incoherent: bool,
}

impl ChoiDiagnostics {
    pub fn of(dim_in: usize, dim_out: usize, m: &ComplexMatrix) -> Self {
        let n = dim_in * dim_out;
        if n == 0 || m.shape() != (n, n) {
            return Self {
                shape_ok: false,
                hermitian_deviation: f64::NAN,
                min_eigenvalue: f64::NAN,
                partial_trace_deviation: f64::NAN,
                incoherent: false,
            };
        }
        let hermitian_deviation = m.hermitian_deviation();
        let min_eigenvalue = hermitian_eigenvalues(m).first().copied().unwrap_or(0.0);
        let partial_trace_deviation = partial_trace_b(m, dim_in, dim_out)
            .map(|pt| pt.max_abs_diff(&ComplexMatrix::identity(dim_in)))
            .unwrap_or(f64::INFINITY);
        Self {
            shape_ok: true,
            hermitian_deviation,
            min_eigenvalue,
            partial_trace_deviation,
            incoherent: m.max_off_diagonal() <= CHOI_TOL,
        }
    }

    /// First failing invariant, in the order shape, Hermiticity, positivity,
    /// partial trace.
    pub fn violation(&self) -> Option<ChoiViolation> {
        if !self.shape_ok {
            return Some(ChoiViolation::Shape);
        }
        if self.hermitian_deviation > CHOI_TOL {
            return Some(ChoiViolation::NotHermitian { deviation: self.hermitian_deviation });
        }
        if self.min_eigenvalue < -CHOI_TOL {
            return Some(ChoiViolation::NotPositive { min_eigenvalue: self.min_eigenvalue });
        }
        if self.partial_trace_deviation > CHOI_TOL {
            return Some(ChoiViolation::PartialTrace { deviation: self.partial_trace_deviation });
        }
        None
    }

    pub fn is_valid(&self) -> bool {
        self.violation().is_none()
    }
}

fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.iter().any(|&p| !(0.0..=1.0).contains(&p) || p.is_nan()) {
        return Err(Error::InvalidInput(format!("weights must lie in [0, 1]: {weights:?}")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("weights sum to {total}, expected 1")));
    }
    Ok(())
}

/// `Phi(|j><k|) = (+)_i p_i phi_i(|j><k|)`: output blocks are stacked in the
/// order given, so output index `alpha` of summand `i` lands at
/// `sum_{i' < i} dim_out(i') + alpha`.
pub fn direct_sum(weights: &[f64], channels: &[QuantumChannel]) -> Result<QuantumChannel> {
    if weights.len() != channels.len() || channels.is_empty() {
        return Err(Error::InvalidInput(format!("{} weights for {} channels", weights.len(), channels.len())));
    }
    check_weights(weights)?;
    let dim_in = channels[0].dim_in;
    if let Some(bad) = channels.iter().find(|c| c.dim_in != dim_in) {
        return Err(Error::DimensionMismatch(format!(
            "summands must share the input dimension {dim_in}, found {}",
            bad.dim_in
        )));
    }
    let dim_out: usize = channels.iter().map(|c| c.dim_out).sum();
    let mut kraus = Vec::new();
    let mut offset = 0;
    for (&p, ch) in weights.iter().zip(channels) {
        if p > 0.0 {
            let s = p.sqrt();
            for k in &ch.kraus {
                let mut padded = ComplexMatrix::zeros(dim_out, dim_in);
                for r in 0..ch.dim_out {
                    for c in 0..dim_in {
                        padded[(offset + r, c)] = k[(r, c)] * s;
                    }
                }
                kraus.push(padded);
            }
        }
        offset += ch.dim_out;
    }
    QuantumChannel::from_kraus(kraus)
}

/// The block matrix `(+)_i p_i J_i` with the Choi matrices stacked whole.
/// This is generally *not* a Choi matrix of any channel; it exists to show
/// that the interleaved layout of [`direct_sum`] is the right one.
pub fn naive_block_choi(weights: &[f64], channels: &[QuantumChannel]) -> Result<ComplexMatrix> {
    if weights.len() != channels.len() || channels.is_empty() {
        return Err(Error::InvalidInput("weights and channels differ in length".into()));
    }
    check_weights(weights)?;
    let mut blocks = channels.iter().zip(weights).map(|(c, &p)| c.choi_matrix().scale(p));
    let first = blocks.next().expect("non-empty");
    Ok(blocks.fold(first, |acc, b| acc.direct_sum(&b)))
}

/// Convex mixture `sum_m p_m phi_m` realized by the Kraus union `{sqrt(p_m) K}`.
pub fn mixture(weights: &[f64], channels: &[QuantumChannel]) -> Result<QuantumChannel> {
    if weights.len() != channels.len() || channels.is_empty() {
        return Err(Error::InvalidInput("weights and channels differ in length".into()));
    }
    check_weights(weights)?;
    let (a, b) = (channels[0].dim_in, channels[0].dim_out);
    if channels.iter().any(|c| c.dim_in != a || c.dim_out != b) {
        return Err(Error::DimensionMismatch("mixture components must share dimensions".into()));
    }
    let kraus = weights
        .iter()
        .zip(channels)
        .filter(|(&p, _)| p > 0.0)
        .flat_map(|(&p, c)| c.kraus.iter().map(move |k| k.scale(p.sqrt())))
        .collect();
    QuantumChannel::from_kraus(kraus)
}

/// Phases `theta[j * dim_out + alpha]` of a maximally coherent isometry.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxCoherentSpec {
    pub dim_in: usize,
    pub dim_out: usize,
    pub phases: Vec<f64>,
}

impl MaxCoherentSpec {
    pub fn new(dim_in: usize, dim_out: usize, phases: Vec<f64>) -> Result<Self> {
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::InvalidInput("dimensions must be positive".into()));
        }
        if phases.len() != dim_in * dim_out {
            return Err(Error::DimensionMismatch(format!("need {} phases, got {}", dim_in * dim_out, phases.len())));
        }
        Ok(Self { dim_in, dim_out, phases })
    }

    pub fn zero_phases(dim_in: usize, dim_out: usize) -> Self {
        Self { dim_in, dim_out, phases: vec![0.0; dim_in * dim_out] }
    }

    /// `theta[j][alpha] = 2 pi j alpha / dim_out`. The output vectors are then
    /// rows of the discrete Fourier matrix, orthonormal whenever
    /// `dim_in <= dim_out`.
    pub fn fourier(dim_in: usize, dim_out: usize) -> Self {
        let phases = (0..dim_in)
            .flat_map(|j| (0..dim_out).map(move |alpha| 2.0 * PI * (j * alpha) as f64 / dim_out as f64))
            .collect();
        Self { dim_in, dim_out, phases }
    }

    /// `|psi> = (|A||B|)^{-1/2} sum e^{i theta_{j alpha}} |j alpha>`
    pub fn state_vector(&self) -> Vec<Complex64> {
        let norm = 1.0 / ((self.dim_in * self.dim_out) as f64).sqrt();
        self.phases.iter().map(|&t| Complex64::from_polar(norm, t)).collect()
    }

    /// `|psi><psi|`, the normalized Choi operator `J / |A|` of the map
    /// `|j><k| -> (1/|B|) sum e^{i(theta_{j alpha} - theta_{k beta})} |alpha><beta|`.
    /// Defined for every phase choice, including those where the map is not
    /// trace preserving.
    pub fn normalized_choi(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.state_vector())
    }
}

/// The isometry channel `|j> -> |B|^{-1/2} sum_alpha e^{i theta_{j alpha}} |alpha>`.
/// Fails with [`Error::NotTracePreserving`] when the output vectors are not
/// orthonormal (always the case for `dim_in > dim_out`).
pub fn max_coherent_channel(spec: &MaxCoherentSpec) -> Result<QuantumChannel> {
    let (a, b) = (spec.dim_in, spec.dim_out);
    let norm = 1.0 / (b as f64).sqrt();
    let v = ComplexMatrix::from_fn(b, a, |alpha, j| Complex64::from_polar(norm, spec.phases[j * b + alpha]));
    QuantumChannel::from_isometry(v)
}

/// The channels of the trace-distance counterexample with `|A| = 2`,
/// `|B_1| = 2`, `|B_2| = 3`.
#[derive(Debug, Clone)]
pub struct ExampleChannels {
    /// Maximally coherent isometry `C^2 -> C^2`.
    pub phi1: QuantumChannel,
    /// Maximally coherent isometry `C^2 -> C^3`.
    pub phi2: QuantumChannel,
    /// `phi(|j><k|) = 1/2 phi1(|j><k|) (+) 1/2 phi2(|j><k|)`, output dimension 5.
    pub phi_mix: QuantumChannel,
    /// The reference operator as printed: Choi matrix with `1/4` at
    /// `(|j>|j>, |j>|j>)` inside the `B_1` block and zeros elsewhere.
    /// Its output blocks have trace 1/4, so it is not a channel.
    pub phi0_literal_choi: ComplexMatrix,
    /// Trace-preserving incoherent channel `|j><k| -> delta_jk |j><j| (+) 0`.
    pub phi0: QuantumChannel,
}

pub const EXAMPLE_DIM_IN: usize = 2;
pub const EXAMPLE_DIM_B1: usize = 2;
pub const EXAMPLE_DIM_B2: usize = 3;

/// Builds the example channels with Fourier phases. All coherence values
/// involved depend only on the moduli of `|psi>`, not on the phases.
pub fn example_channels() -> ExampleChannels {
    example_channels_with(
        &MaxCoherentSpec::fourier(EXAMPLE_DIM_IN, EXAMPLE_DIM_B1),
        &MaxCoherentSpec::fourier(EXAMPLE_DIM_IN, EXAMPLE_DIM_B2),
    )
    .expect("Fourier phases give isometries for |A| <= |B|")
}

pub fn example_channels_with(spec1: &MaxCoherentSpec, spec2: &MaxCoherentSpec) -> Result<ExampleChannels> {
    if spec1.dim_in != EXAMPLE_DIM_IN || spec2.dim_in != EXAMPLE_DIM_IN {
        return Err(Error::DimensionMismatch("example channels have |A| = 2".into()));
    }
    let phi1 = max_coherent_channel(spec1)?;
    let phi2 = max_coherent_channel(spec2)?;
    let phi_mix = direct_sum(&[0.5, 0.5], &[phi1.clone(), phi2.clone()])?;
    let a = EXAMPLE_DIM_IN;
    let b = spec1.dim_out + spec2.dim_out;

    let mut literal = ComplexMatrix::zeros(a * b, a * b);
    let mut kraus = Vec::new();
    for j in 0..a {
        literal[(j * b + j, j * b + j)] = Complex64::new(0.25, 0.0);
        kraus.push(ComplexMatrix::unit(b, a, j, j));
    }
    let phi0 = QuantumChannel::from_kraus(kraus)?;
    Ok(ExampleChannels { phi1, phi2, phi_mix, phi0_literal_choi: literal, phi0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::ONE;

    fn plus_state() -> ComplexMatrix {
        ComplexMatrix::from_fn(2, 2, |_, _| Complex64::new(0.5, 0.0))
    }

    #[test]
    fn kraus_validation() {
        assert!(QuantumChannel::from_kraus(vec![ComplexMatrix::identity(2)]).is_ok());
        let deph =
            QuantumChannel::from_kraus(vec![ComplexMatrix::unit(2, 2, 0, 0), ComplexMatrix::unit(2, 2, 1, 1)]).unwrap();
        assert_eq!(deph, QuantumChannel::dephasing(2));
        let bad = ComplexMatrix::from_diagonal(&[1.0, 0.5]);
        assert!(matches!(QuantumChannel::from_kraus(vec![bad]), Err(Error::NotTracePreserving { .. })));
        assert!(QuantumChannel::from_kraus(vec![]).is_err());
        let mixed = vec![ComplexMatrix::identity(2), ComplexMatrix::zeros(3, 2)];
        assert!(matches!(QuantumChannel::from_kraus(mixed), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn choi_of_identity_and_dephasing() {
        let j = QuantumChannel::identity(2).choi_matrix();
        let mut expected = ComplexMatrix::zeros(4, 4);
        for a in [0, 3] {
            for b in [0, 3] {
                expected[(a, b)] = ONE;
            }
        }
        assert_eq!(j, expected);
        assert!((j.trace().re - 2.0).abs() < 1e-15);
        assert_eq!(QuantumChannel::dephasing(2).choi_matrix(), ComplexMatrix::from_diagonal(&[1.0, 0.0, 0.0, 1.0]));
    }

    #[test]
    fn choi_round_trip_for_named_channels() {
        let id = QuantumChannel::identity(2).choi();
        let back = id.to_channel().unwrap();
        assert_eq!(back.kraus().len(), 1);
        // single Kraus proportional to I up to a global phase
        let k = &back.kraus()[0];
        let phase = k[(0, 0)];
        assert!((phase.norm() - 1.0).abs() < 1e-12);
        assert!(k.max_abs_diff(&ComplexMatrix::identity(2).scale_complex(phase)) < 1e-12);

        let deph = ChoiMatrix::new(2, 2, ComplexMatrix::from_diagonal(&[1.0, 0.0, 0.0, 1.0])).unwrap();
        let back = deph.to_channel().unwrap();
        assert_eq!(back.kraus().len(), 2);
        assert!(back.choi_matrix().max_abs_diff(deph.matrix()) < 1e-12);
    }

    #[test]
    fn invalid_choi_is_rejected() {
        let m = ComplexMatrix::from_diagonal(&[1.0, 0.0, 0.5, 0.5]);
        assert!(ChoiMatrix::new(2, 2, m).is_ok());
        let m = ComplexMatrix::from_diagonal(&[1.0, 1.0, 0.0, 1.0]);
        assert!(matches!(ChoiMatrix::new(2, 2, m), Err(Error::InvalidChoi(ChoiViolation::PartialTrace { .. }))));
        let m = ComplexMatrix::from_diagonal(&[1.5, -0.5, 0.0, 1.0]);
        assert!(matches!(ChoiMatrix::new(2, 2, m), Err(Error::InvalidChoi(ChoiViolation::NotPositive { .. }))));
        assert!(matches!(
            ChoiMatrix::new(2, 3, ComplexMatrix::identity(4)),
            Err(Error::InvalidChoi(ChoiViolation::Shape))
        ));
    }

    #[test]
    fn apply_examples() {
        let rho = ComplexMatrix::from_real_rows(&[&[0.7, 0.1], &[0.1, 0.3]]).unwrap();
        assert_eq!(QuantumChannel::identity(2).apply(&rho).unwrap(), rho);
        let out = QuantumChannel::dephasing(2).apply(&plus_state()).unwrap();
        assert!(out.max_abs_diff(&ComplexMatrix::identity(2).scale(0.5)) < 1e-15);
        assert!(QuantumChannel::identity(2).apply(&ComplexMatrix::identity(3)).is_err());
    }

    #[test]
    fn dephasing_channel_properties() {
        let d = QuantumChannel::dephasing(3);
        assert!(d.is_incoherent(1e-12));
        let diag = ComplexMatrix::from_diagonal(&[0.2, 0.3, 0.5]);
        assert_eq!(d.apply(&diag).unwrap(), diag);
        assert_eq!(d.choi_matrix().max_off_diagonal(), 0.0);
        assert!(!QuantumChannel::identity(2).is_incoherent(1e-12));
    }

    #[test]
    fn dephased_channel_is_the_choi_diagonal() {
        let id = QuantumChannel::identity(2);
        let dd = id.dephased();
        assert_eq!(dd.choi_matrix(), crate::matrix::dephase(&id.choi_matrix()));
    }

    #[test]
    fn direct_sum_of_single_channel_is_itself() {
        let id = QuantumChannel::identity(2);
        let s = direct_sum(&[1.0], std::slice::from_ref(&id)).unwrap();
        assert_eq!(s.choi_matrix(), id.choi_matrix());
    }

    #[test]
    fn direct_sum_rejects_bad_arguments() {
        let id = QuantumChannel::identity(2);
        assert!(direct_sum(&[0.5, 0.4], &[id.clone(), id.clone()]).is_err());
        assert!(direct_sum(&[1.2, -0.2], &[id.clone(), id.clone()]).is_err());
        assert!(direct_sum(&[0.5], &[id.clone(), id.clone()]).is_err());
        assert!(direct_sum(&[0.5, 0.5], &[id, QuantumChannel::identity(3)]).is_err());
    }

    #[test]
    fn example_channels_shapes() {
        let ex = example_channels();
        assert_eq!(ex.phi_mix.dim_out(), 5);
        assert_eq!(ex.phi_mix.dim_in(), 2);
        assert!(ex.phi0.is_incoherent(1e-12));
        assert_eq!(ex.phi0_literal_choi.max_off_diagonal(), 0.0);
        let pt = partial_trace_b(&ex.phi0_literal_choi, 2, 5).unwrap();
        assert!(pt.max_abs_diff(&ComplexMatrix::identity(2).scale(0.25)) < 1e-15);
    }

    #[test]
    fn naive_block_sum_is_not_a_choi_matrix() {
        let ex = example_channels();
        let naive = naive_block_choi(&[0.5, 0.5], &[ex.phi1.clone(), ex.phi2.clone()]).unwrap();
        let diag = ChoiDiagnostics::of(2, 5, &naive);
        assert!(matches!(diag.violation(), Some(ChoiViolation::PartialTrace { .. })));
        assert!(ChoiDiagnostics::of(2, 5, &ex.phi_mix.choi_matrix()).is_valid());
    }

    #[test]
    fn max_coherent_examples() {
        // |A| = 1: rho -> |+><+|
        let ch = max_coherent_channel(&MaxCoherentSpec::zero_phases(1, 2)).unwrap();
        let out = ch.apply(&ComplexMatrix::identity(1)).unwrap();
        assert!(out.max_abs_diff(&plus_state()) < 1e-15);

        let zero = MaxCoherentSpec::zero_phases(2, 2);
        let state = zero.normalized_choi();
        assert!(state.max_abs_diff(&ComplexMatrix::from_fn(4, 4, |_, _| Complex64::new(0.25, 0.0))) < 1e-15);
        // equal output vectors cannot come from an isometry
        assert!(matches!(max_coherent_channel(&zero), Err(Error::NotTracePreserving { .. })));

        let f = MaxCoherentSpec::fourier(2, 2);
        let ch = max_coherent_channel(&f).unwrap();
        assert!(ch.normalized_choi().max_abs_diff(&f.normalized_choi()) < 1e-14);
        assert!(max_coherent_channel(&MaxCoherentSpec::fourier(3, 2)).is_err());
        assert!(MaxCoherentSpec::new(2, 2, vec![0.0; 3]).is_err());
    }
}
