//! Random instance generators and executable checks of the coherence-measure
//! conditions, plus the trace-distance counterexample.
//!
//! | condition | statement checked                          |
//! |-----------|--------------------------------------------|
//! | C1        | `C(phi) = 0` iff `phi` is incoherent       |
//! | C2        | `C(Theta(phi)) <= C(phi)` for ISCs         |
//! | C3        | `C(p1 phi1 (+) p2 phi2) = p1 C(phi1) + p2 C(phi2)` |
//! | B3        | `sum_m p_m C(phi_m) <= C(phi)` for selective ISCs |
//! | B4        | `C(sum_m p_m phi_m) <= sum_m p_m C(phi_m)`  |

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{direct_sum, example_channels, mixture, QuantumChannel};
use crate::error::{Error, Result};
use crate::matrix::{kron, ComplexMatrix, ZERO};
use crate::measures::{ctr_max_closed_form, trace_distance_to, Measure, SolverOptions};
use crate::superchannel::{projector_pair_q, Superchannel};

/// Violation threshold for the closed-form measures.
pub const EXACT_THRESHOLD: f64 = 1e-7;
/// Violation threshold for the solver-based measures.
pub const ITERATIVE_THRESHOLD: f64 = 1e-3;
/// C1: largest value accepted on an incoherent channel.
pub const FAITHFUL_ZERO: f64 = 1e-8;
/// C1: smallest value accepted on a coherent channel.
pub const FAITHFUL_POSITIVE: f64 = 1e-4;
/// Coherent samples with a smaller l1 coherence are redrawn.
pub const MIN_SAMPLE_COHERENCE: f64 = 1e-6;
/// Components of a B4 mixture.
pub const MIXTURE_TERMS: usize = 3;
/// Gap `additive_rhs - ctr_mix_solved` above which the counterexample holds.
pub const COUNTEREXAMPLE_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Condition {
    C1,
    C2,
    C3,
    B3,
    B4,
}

impl Condition {
    pub const ALL: [Condition; 5] = [Condition::C1, Condition::C2, Condition::C3, Condition::B3, Condition::B4];
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Condition::C1 => "C1",
            Condition::C2 => "C2",
            Condition::C3 => "C3",
            Condition::B3 => "B3",
            Condition::B4 => "B4",
        };
        f.write_str(s)
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "C1" => Ok(Condition::C1),
            "C2" => Ok(Condition::C2),
            "C3" => Ok(Condition::C3),
            "B3" => Ok(Condition::B3),
            "B4" => Ok(Condition::B4),
            _ => Err(Error::UnknownCondition(s.to_string())),
        }
    }
}

/// Whether `measure` is known to fail `condition`. The trace-distance measure
/// is not additive over direct sums, and the selective check on direct sums
/// inherits that failure.
pub fn violation_expected(condition: Condition, measure: Measure) -> bool {
    measure == Measure::TraceDistance && matches!(condition, Condition::C3 | Condition::B3)
}

pub fn default_threshold(measure: Measure) -> f64 {
    if measure.is_iterative() {
        ITERATIVE_THRESHOLD
    } else {
        EXACT_THRESHOLD
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub a: usize,
    pub b: usize,
}

impl Dims {
    pub fn new(a: usize, b: usize) -> Result<Self> {
        if a == 0 || b == 0 {
            return Err(Error::InvalidInput(format!("dimensions must be positive, got {a}x{b}")));
        }
        Ok(Self { a, b })
    }
}

impl Default for Dims {
    fn default() -> Self {
        Self { a: 2, b: 2 }
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.a, self.b)
    }
}

impl FromStr for Dims {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| Error::InvalidInput(format!("dimensions must look like AxB, got {s:?}")))?;
        let parse = |t: &str| {
            t.trim().parse::<usize>().map_err(|_| Error::InvalidInput(format!("bad dimension {t:?} in {s:?}")))
        };
        Dims::new(parse(a)?, parse(b)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub condition: Condition,
    pub measure: Measure,
    pub trials: usize,
    pub violations: usize,
    /// Largest gap in the forbidden direction (for C3, largest in absolute value).
    pub worst_gap: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOptions {
    pub dims: Dims,
    pub trials: usize,
    pub seed: u64,
    /// Overrides [`default_threshold`].
    pub threshold: Option<f64>,
    /// C2: channels pushed through each sampled superchannel.
    pub channels_per_isc: usize,
    /// C3 and B3: whether trial 0 is the fixed counterexample instance.
    pub include_example: bool,
    pub solver: SolverOptions,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            dims: Dims::default(),
            trials: 100,
            seed: 0,
            threshold: None,
            channels_per_isc: 10,
            include_example: true,
            solver: SolverOptions::default(),
        }
    }
}

/// Randomness of trial `trial`: independent of how trials are scheduled.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

fn random_phase<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
}

/// Uniform point on the probability simplex with `n` vertices.
pub fn uniform_simplex<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

/// Gaussian matrix with orthonormalized columns (modified Gram-Schmidt, two passes).
fn random_isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    loop {
        let mut columns: Vec<Vec<Complex64>> =
            (0..cols).map(|_| (0..rows).map(|_| complex_gaussian(rng)).collect()).collect();
        let mut degenerate = false;
        for c in 0..cols {
            for _ in 0..2 {
                for prev in 0..c {
                    let (done, rest) = columns.split_at_mut(c);
                    let q = &done[prev];
                    let v = &mut rest[0];
                    let overlap: Complex64 = q.iter().zip(v.iter()).map(|(x, y)| x.conj() * y).sum();
                    for (vi, qi) in v.iter_mut().zip(q) {
                        *vi -= overlap * qi;
                    }
                }
            }
            let norm = columns[c].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                degenerate = true;
                break;
            }
            for x in &mut columns[c] {
                *x /= norm;
            }
        }
        if !degenerate {
            return ComplexMatrix::from_fn(rows, cols, |r, c| columns[c][r]);
        }
    }
}

pub fn random_channel(dim_a: usize, dim_b: usize, kraus_count: usize, seed: u64) -> Result<QuantumChannel> {
    random_channel_with(&mut ChaCha8Rng::seed_from_u64(seed), dim_a, dim_b, kraus_count)
}

/// Splits a random `(kraus_count * dim_b) x dim_a` isometry into Kraus blocks.
pub fn random_channel_with<R: Rng + ?Sized>(
    rng: &mut R,
    dim_a: usize,
    dim_b: usize,
    kraus_count: usize,
) -> Result<QuantumChannel> {
    if kraus_count == 0 || dim_a == 0 || dim_b == 0 {
        return Err(Error::InvalidInput("dimensions and Kraus count must be positive".into()));
    }
    if kraus_count * dim_b < dim_a {
        return Err(Error::InfeasibleIsometry { rows: kraus_count * dim_b, cols: dim_a });
    }
    let v = random_isometry(rng, kraus_count * dim_b, dim_a);
    let kraus = (0..kraus_count).map(|k| v.block(k * dim_b, 0, dim_b, dim_a)).collect();
    QuantumChannel::from_kraus(kraus)
}

pub fn random_incoherent_channel(dim_a: usize, dim_b: usize, seed: u64) -> Result<QuantumChannel> {
    random_incoherent_channel_with(&mut ChaCha8Rng::seed_from_u64(seed), dim_a, dim_b)
}

/// Kraus operators `sqrt(p_{j alpha}) |alpha><j|` with every row `p_j` uniform on the simplex.
pub fn random_incoherent_channel_with<R: Rng + ?Sized>(
    rng: &mut R,
    dim_a: usize,
    dim_b: usize,
) -> Result<QuantumChannel> {
    if dim_a == 0 || dim_b == 0 {
        return Err(Error::InvalidInput("dimensions must be positive".into()));
    }
    let mut kraus = Vec::with_capacity(dim_a * dim_b);
    for j in 0..dim_a {
        for (alpha, p) in uniform_simplex(rng, dim_b).into_iter().enumerate() {
            kraus.push(ComplexMatrix::unit(dim_b, dim_a, alpha, j).scale(p.sqrt()));
        }
    }
    QuantumChannel::from_kraus(kraus)
}

/// Coherent sample for the faithfulness check: Kraus count drawn from
/// `ceil(a/b) ..= a*b`, redrawn while the l1 coherence is negligible.
pub fn random_coherent_channel_with<R: Rng + ?Sized>(
    rng: &mut R,
    dim_a: usize,
    dim_b: usize,
) -> Result<QuantumChannel> {
    if dim_b < 2 {
        return Err(Error::InvalidInput("every channel into a one-dimensional output is incoherent".into()));
    }
    let min_k = dim_a.div_ceil(dim_b).max(1);
    loop {
        let k = rng.random_range(min_k..=dim_a * dim_b);
        let phi = random_channel_with(rng, dim_a, dim_b, k)?;
        if crate::measures::l1_coherence(&phi) >= MIN_SAMPLE_COHERENCE {
            return Ok(phi);
        }
    }
}

/// Random permutation matrix with random phases.
pub fn random_phased_permutation<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let mut dest: Vec<usize> = (0..n).collect();
    dest.shuffle(rng);
    let mut m = ComplexMatrix::zeros(n, n);
    for (k, &d) in dest.iter().enumerate() {
        m[(d, k)] = random_phase(rng);
    }
    m
}

/// Column-sparse Kraus family `{E_m}: C^dim_in -> C^dim_out` with
/// `sum E_m^dagger E_m = I`: random targets `f_m`, magnitudes and phases,
/// with every column normalized across `m`. An operator in which two columns
/// share a target row is split so that each piece is injective on its
/// support, which keeps the family complete.
pub fn random_incoherent_kraus<R: Rng + ?Sized>(
    rng: &mut R,
    dim_in: usize,
    dim_out: usize,
    kraus_count: usize,
) -> Vec<ComplexMatrix> {
    let mut targets = vec![vec![0usize; dim_in]; kraus_count];
    let mut amps = vec![vec![ZERO; dim_in]; kraus_count];
    for col in 0..dim_in {
        let mut norm = 0.0;
        for m in 0..kraus_count {
            targets[m][col] = rng.random_range(0..dim_out);
            let magnitude: f64 = rng.random_range(0.05..1.0);
            amps[m][col] = random_phase(rng) * magnitude;
            norm += magnitude * magnitude;
        }
        let norm = norm.sqrt();
        for amp in amps.iter_mut() {
            amp[col] /= norm;
        }
    }
    let mut out = Vec::new();
    for m in 0..kraus_count {
        let mut pieces: Vec<ComplexMatrix> = Vec::new();
        let mut used: Vec<Vec<bool>> = Vec::new();
        for col in 0..dim_in {
            let row = targets[m][col];
            let slot = match used.iter().position(|u| !u[row]) {
                Some(s) => s,
                None => {
                    pieces.push(ComplexMatrix::zeros(dim_out, dim_in));
                    used.push(vec![false; dim_out]);
                    pieces.len() - 1
                }
            };
            used[slot][row] = true;
            pieces[slot][(row, col)] = amps[m][col];
        }
        out.extend(pieces);
    }
    out
}

pub fn random_isc(
    dims_in: (usize, usize),
    dims_out: (usize, usize),
    kraus_count: usize,
    seed: u64,
) -> Result<Superchannel> {
    random_isc_with(&mut ChaCha8Rng::seed_from_u64(seed), dims_in, dims_out, kraus_count)
}

/// Random incoherent superchannel with Kraus operators `W (x) E_m`: `W` a
/// random phased permutation of the input labels and `{E_m}` from
/// [`random_incoherent_kraus`] on the output side. Operators of this shape
/// send every channel to a channel, which generic column-sparse families do
/// not; hence the input dimension must be kept (`dims_out.0 == dims_in.0`).
pub fn random_isc_with<R: Rng + ?Sized>(
    rng: &mut R,
    dims_in: (usize, usize),
    dims_out: (usize, usize),
    kraus_count: usize,
) -> Result<Superchannel> {
    if dims_in.0 == 0 || dims_in.1 == 0 || dims_out.1 == 0 || kraus_count == 0 {
        return Err(Error::InvalidInput("dimensions and Kraus count must be positive".into()));
    }
    if dims_out.0 != dims_in.0 {
        return Err(Error::UnsupportedDimension(format!(
            "random superchannels keep the input dimension, got {} -> {}",
            dims_in.0, dims_out.0
        )));
    }
    let w = random_phased_permutation(rng, dims_in.0);
    let kraus = random_incoherent_kraus(rng, dims_in.1, dims_out.1, kraus_count).iter().map(|e| kron(&w, e)).collect();
    Superchannel::from_kraus(kraus, dims_in, dims_out)
}

/// Selective superchannel for a direct sum whose output splits into blocks of
/// sizes `block_dims`: Kraus `W (x) P_m D_m` with `D_m = sum_i sqrt(c_{mi}) Pi_i`,
/// `Pi_i` the projector on block `i`, `sum_m c_{mi} = 1`, and `P_m` a random
/// phased permutation. Every outcome on a direct sum is again a channel.
pub fn random_block_selective_isc<R: Rng + ?Sized>(
    rng: &mut R,
    dim_a: usize,
    block_dims: &[usize],
    kraus_count: usize,
) -> Result<Superchannel> {
    if kraus_count == 0 || block_dims.is_empty() {
        return Err(Error::InvalidInput("need at least one Kraus operator and one block".into()));
    }
    let b: usize = block_dims.iter().sum();
    let shares: Vec<Vec<f64>> = block_dims.iter().map(|_| uniform_simplex(rng, kraus_count)).collect();
    let w = random_phased_permutation(rng, dim_a);
    let mut kraus = Vec::with_capacity(kraus_count);
    for m in 0..kraus_count {
        let mut diag = Vec::with_capacity(b);
        for (i, &size) in block_dims.iter().enumerate() {
            diag.extend(std::iter::repeat_n(shares[i][m].sqrt(), size));
        }
        let e = random_phased_permutation(rng, b).matmul(&ComplexMatrix::from_diagonal(&diag));
        kraus.push(kron(&w, &e));
    }
    Superchannel::from_kraus(kraus, (dim_a, b), (dim_a, b))
}

fn random_summand<R: Rng + ?Sized>(rng: &mut R, dim_a: usize, dim_b: usize) -> Result<QuantumChannel> {
    let k = rng.random_range(dim_a.div_ceil(dim_b)..=dim_a * dim_b);
    random_channel_with(rng, dim_a, dim_b, k)
}

struct TrialOutcome {
    violated: bool,
    gap: f64,
}

/// Runs `condition` for `measure` on `opts.trials` random instances.
pub fn check_condition(condition: Condition, measure: Measure, opts: &CheckOptions) -> Result<CheckReport> {
    let threshold = opts.threshold.unwrap_or_else(|| default_threshold(measure));
    let Dims { a, b } = opts.dims;
    if a == 0 || b == 0 {
        return Err(Error::InvalidInput("dimensions must be positive".into()));
    }
    let outcomes: Vec<TrialOutcome> = (0..opts.trials)
        .into_par_iter()
        .map(|t| run_trial(condition, measure, opts, threshold, t))
        .collect::<Result<_>>()?;
    let violations = outcomes.iter().filter(|o| o.violated).count();
    let worst_gap = outcomes.iter().map(|o| o.gap).fold(None, |acc: Option<f64>, g| match acc {
        None => Some(g),
        Some(w) if condition == Condition::C3 => Some(if g.abs() > w.abs() { g } else { w }),
        Some(w) => Some(w.max(g)),
    });
    Ok(CheckReport {
        condition,
        measure,
        trials: opts.trials,
        violations,
        worst_gap: worst_gap.unwrap_or(0.0),
        seed: opts.seed,
    })
}

fn run_trial(
    condition: Condition,
    measure: Measure,
    opts: &CheckOptions,
    threshold: f64,
    t: usize,
) -> Result<TrialOutcome> {
    let mut rng = trial_rng(opts.seed, t as u64);
    let rng = &mut rng;
    let Dims { a, b } = opts.dims;
    let value = |phi: &QuantumChannel| measure.evaluate(phi, &opts.solver).value;
    match condition {
        Condition::C1 => {
            let incoherent = random_incoherent_channel_with(rng, a, b)?;
            let coherent = random_coherent_channel_with(rng, a, b)?;
            let zero = value(&incoherent);
            let positive = value(&coherent);
            Ok(TrialOutcome {
                violated: zero > FAITHFUL_ZERO || positive <= FAITHFUL_POSITIVE,
                gap: zero.max(FAITHFUL_POSITIVE - positive),
            })
        }
        Condition::C2 => {
            let kraus_count = rng.random_range(1..=3);
            let theta = random_isc_with(rng, (a, b), (a, b), kraus_count)?;
            let mut gap = f64::NEG_INFINITY;
            for _ in 0..opts.channels_per_isc.max(1) {
                let phi = random_summand(rng, a, b)?;
                let out = theta.apply(&phi)?;
                gap = gap.max(value(&out) - value(&phi));
            }
            Ok(TrialOutcome { violated: gap > threshold, gap })
        }
        Condition::C3 => {
            let (weights, parts) = if t == 0 && opts.include_example {
                let ex = example_channels();
                (vec![0.5, 0.5], vec![ex.phi1, ex.phi2])
            } else {
                let (b1, b2) = (b, b.saturating_sub(1).max(1));
                let p = rng.random_range(0.05..0.95);
                let phi1 = random_summand(rng, a, b1)?;
                let phi2 = random_summand(rng, a, b2)?;
                (vec![p, 1.0 - p], vec![phi1, phi2])
            };
            let total = direct_sum(&weights, &parts)?;
            let rhs: f64 = weights.iter().zip(&parts).map(|(p, phi)| p * value(phi)).sum();
            let gap = value(&total) - rhs;
            Ok(TrialOutcome { violated: gap.abs() > threshold, gap })
        }
        Condition::B3 => {
            let (phi, theta) = if t == 0 && opts.include_example {
                let ex = example_channels();
                let q = projector_pair_q(ex.phi1.dim_in(), ex.phi1.dim_out(), ex.phi2.dim_out())?;
                (ex.phi_mix, q)
            } else {
                let (b1, b2) = (b, b.saturating_sub(1).max(1));
                let p = rng.random_range(0.05..0.95);
                let phi1 = random_summand(rng, a, b1)?;
                let phi2 = random_summand(rng, a, b2)?;
                let phi = direct_sum(&[p, 1.0 - p], &[phi1, phi2])?;
                let kraus_count = rng.random_range(1..=3);
                (phi, random_block_selective_isc(rng, a, &[b1, b2], kraus_count)?)
            };
            let ensemble = theta.selective_apply(&phi)?;
            let weighted: f64 = ensemble.outcomes.iter().map(|o| o.probability * value(&o.channel)).sum();
            let gap = weighted - value(&phi);
            Ok(TrialOutcome { violated: gap > threshold, gap })
        }
        Condition::B4 => {
            let weights = uniform_simplex(rng, MIXTURE_TERMS);
            let parts = (0..MIXTURE_TERMS).map(|_| random_summand(rng, a, b)).collect::<Result<Vec<_>>>()?;
            let mixed = mixture(&weights, &parts)?;
            let rhs: f64 = weights.iter().zip(&parts).map(|(p, phi)| p * value(phi)).sum();
            let gap = value(&mixed) - rhs;
            Ok(TrialOutcome { violated: gap > threshold, gap })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub ctr_phi1: f64,
    pub ctr_phi2: f64,
    pub additive_rhs: f64,
    /// `||J_phi/2 - J_phi0/2||_tr` with the reference operator as printed.
    pub ctr_mix_upper: f64,
    pub ctr_mix_solved: f64,
    pub violated: bool,
    /// `additive_rhs - ctr_mix_solved`.
    pub gap: f64,
    pub closed_form_phi1: f64,
    pub closed_form_phi2: f64,
    /// Distance to the trace-preserving incoherent variant of the reference.
    pub ctr_mix_upper_channel: f64,
    pub converged: bool,
}

pub fn reproduce_counterexample(opts: &SolverOptions) -> Result<CounterexampleReport> {
    let ex = example_channels();
    let r1 = crate::measures::trace_distance_coherence(&ex.phi1, opts);
    let r2 = crate::measures::trace_distance_coherence(&ex.phi2, opts);
    let rmix = crate::measures::trace_distance_coherence(&ex.phi_mix, opts);
    let additive_rhs = 0.5 * (r1.value + r2.value);
    let ctr_mix_upper = trace_distance_to(&ex.phi_mix, &ex.phi0_literal_choi)?;
    let ctr_mix_upper_channel = trace_distance_to(&ex.phi_mix, &ex.phi0.choi_matrix())?;
    let gap = additive_rhs - rmix.value;
    Ok(CounterexampleReport {
        ctr_phi1: r1.value,
        ctr_phi2: r2.value,
        additive_rhs,
        ctr_mix_upper,
        ctr_mix_solved: rmix.value,
        violated: gap > COUNTEREXAMPLE_MARGIN,
        gap,
        closed_form_phi1: ctr_max_closed_form(ex.phi1.dim_in(), ex.phi1.dim_out()),
        closed_form_phi2: ctr_max_closed_form(ex.phi2.dim_in(), ex.phi2.dim_out()),
        ctr_mix_upper_channel,
        converged: r1.converged && r2.converged && rmix.converged,
    })
}
