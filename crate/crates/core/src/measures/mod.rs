//! Coherence measures of channels, all evaluated on the normalized Choi
//! state `rho = J / |A|`.
//!
//! * `l1`: sum of the moduli of the off-diagonal entries of `rho`;
//! * `rel`: `S(Delta(rho)) - S(rho)` in bits;
//! * `ctr`: `min ||rho - D||_tr` over the normalized Choi states `D` of
//!   incoherent channels, i.e. diagonal `D >= 0` whose entries in every input
//!   block `j` sum to `1 / |A|`;
//! * `ctr-mod`: the same with `D` replaced by `lambda D`, `lambda >= 0`.

mod oracle;
mod solver;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::QuantumChannel;
use crate::error::{Error, Result};
use crate::matrix::{dephase, entropy_of_spectrum, hermitian_eigenvalues, ComplexMatrix};

pub use oracle::{modified_trace_coherence_oracle, trace_distance_coherence_oracle, trace_distance_grid};
pub use solver::{
    minimize_trace_distance, minimize_trace_distance_cone, project_block_cone, project_block_simplex, SubgradientRun,
};

/// Upper end of the `lambda` bracket searched by [`modified_trace_coherence`].
pub const LAMBDA_MAX: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// `a` in the diminishing step `a / sqrt(k)`.
    pub step_scale: f64,
    /// Minimum best-value improvement that resets the stall counter; also the
    /// duality-gap threshold that ends a run early.
    pub tolerance: f64,
    /// Iterations without an improvement of `tolerance` before stopping.
    pub stall_window: usize,
    /// Extra runs from random feasible starting points.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { max_iterations: 20_000, step_scale: 0.1, tolerance: 1e-10, stall_window: 500, restarts: 0, seed: 0 }
    }
}

/// Outcome of a minimization-based measure.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureResult {
    pub value: f64,
    /// Best incoherent Choi matrix found, `|A| D` (diagonal, blocks summing to 1).
    pub witness: Option<ComplexMatrix>,
    /// Scale of the witness for the modified trace measure.
    pub lambda: Option<f64>,
    /// Certified lower bound on the true minimum.
    pub lower_bound: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl MeasureResult {
    fn exact(value: f64) -> Self {
        Self { value, witness: None, lambda: None, lower_bound: value, iterations: 0, converged: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Measure {
    #[serde(rename = "l1")]
    L1,
    #[serde(rename = "rel")]
    RelativeEntropy,
    #[serde(rename = "ctr")]
    TraceDistance,
    #[serde(rename = "ctr-mod")]
    ModifiedTraceDistance,
}

impl Measure {
    pub const ALL: [Measure; 4] =
        [Measure::L1, Measure::RelativeEntropy, Measure::TraceDistance, Measure::ModifiedTraceDistance];

    pub fn name(self) -> &'static str {
        match self {
            Measure::L1 => "l1",
            Measure::RelativeEntropy => "rel",
            Measure::TraceDistance => "ctr",
            Measure::ModifiedTraceDistance => "ctr-mod",
        }
    }

    /// Whether the value comes from an iterative solver rather than a closed form.
    pub fn is_iterative(self) -> bool {
        matches!(self, Measure::TraceDistance | Measure::ModifiedTraceDistance)
    }

    pub fn evaluate(self, phi: &QuantumChannel, opts: &SolverOptions) -> MeasureResult {
        self.evaluate_state(&phi.normalized_choi(), phi.dim_in(), phi.dim_out(), opts)
    }

    /// Evaluates on a normalized Choi operator with block structure `(dim_a, dim_b)`.
    pub fn evaluate_state(
        self,
        rho: &ComplexMatrix,
        dim_a: usize,
        dim_b: usize,
        opts: &SolverOptions,
    ) -> MeasureResult {
        match self {
            Measure::L1 => MeasureResult::exact(l1_coherence_state(rho)),
            Measure::RelativeEntropy => MeasureResult::exact(rel_entropy_coherence_state(rho)),
            Measure::TraceDistance => trace_distance_coherence_state(rho, dim_a, dim_b, opts),
            Measure::ModifiedTraceDistance => modified_trace_coherence_state(rho, dim_a, dim_b, opts),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" => Ok(Measure::L1),
            "rel" | "rel_entropy" => Ok(Measure::RelativeEntropy),
            "ctr" | "trace_distance" => Ok(Measure::TraceDistance),
            "ctr-mod" | "ctr_mod" | "modified_trace" => Ok(Measure::ModifiedTraceDistance),
            other => Err(Error::UnknownMeasure(other.to_string())),
        }
    }
}

pub fn l1_coherence(phi: &QuantumChannel) -> f64 {
    l1_coherence_state(&phi.normalized_choi())
}

pub fn l1_coherence_state(rho: &ComplexMatrix) -> f64 {
    let mut sum = 0.0;
    for r in 0..rho.rows() {
        for c in 0..rho.cols() {
            if r != c {
                sum += rho[(r, c)].norm();
            }
        }
    }
    sum
}

/// `S(Delta(J/|A|)) - S(J/|A|)` in bits.
pub fn rel_entropy_coherence(phi: &QuantumChannel) -> f64 {
    rel_entropy_coherence_state(&phi.normalized_choi())
}

pub fn rel_entropy_coherence_state(rho: &ComplexMatrix) -> f64 {
    let diag_entropy = entropy_of_spectrum(&rho.real_diagonal());
    let entropy = entropy_of_spectrum(&hermitian_eigenvalues(rho));
    (diag_entropy - entropy).max(0.0)
}

pub fn trace_distance_coherence(phi: &QuantumChannel, opts: &SolverOptions) -> MeasureResult {
    trace_distance_coherence_state(&phi.normalized_choi(), phi.dim_in(), phi.dim_out(), opts)
}

/// Trace-distance coherence of a normalized Choi operator. The run starts
/// from `Delta(rho)`, which is always feasible.
pub fn trace_distance_coherence_state(
    rho: &ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
    opts: &SolverOptions,
) -> MeasureResult {
    let block_sum = 1.0 / dim_a as f64;
    let start = project_block_simplex(&rho.real_diagonal(), dim_a, dim_b, block_sum);
    let run = minimize_trace_distance(rho, dim_a, dim_b, block_sum, start, opts);
    into_result(run, dim_a, None)
}

/// Below this the scaled witness is numerically meaningless and `lambda` is
/// reported as 0.
const LAMBDA_FLOOR: f64 = 1e-12;

/// Choi matrix of the channel sending everything to the maximally mixed
/// state; the witness reported when `lambda = 0`.
fn uniform_incoherent(n: usize, dim_b: usize) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&vec![1.0 / dim_b as f64; n])
}

fn into_result(run: SubgradientRun, dim_a: usize, lambda: Option<f64>) -> MeasureResult {
    let n = run.point.len();
    let (witness, lambda) = match lambda {
        Some(l) if l <= LAMBDA_FLOOR => (uniform_incoherent(n, n / dim_a.max(1)), Some(0.0)),
        Some(l) => {
            (ComplexMatrix::from_diagonal(&run.point.iter().map(|d| d * dim_a as f64 / l).collect::<Vec<_>>()), Some(l))
        }
        None => (ComplexMatrix::from_diagonal(&run.point.iter().map(|d| d * dim_a as f64).collect::<Vec<_>>()), None),
    };
    MeasureResult {
        value: run.value,
        witness: Some(witness),
        lambda,
        lower_bound: run.lower_bound,
        iterations: run.iterations,
        converged: run.converged,
    }
}

pub fn modified_trace_coherence(phi: &QuantumChannel, opts: &SolverOptions) -> MeasureResult {
    modified_trace_coherence_state(&phi.normalized_choi(), phi.dim_in(), phi.dim_out(), opts)
}

/// `min_{lambda >= 0} min_D ||rho - lambda D||_tr`, minimized jointly over the
/// cone `{lambda D : 0 <= lambda <= LAMBDA_MAX}`. The `lambda = 1` solution of
/// [`trace_distance_coherence_state`] and `lambda = 0` are kept as candidates,
/// so the value never exceeds either.
pub fn modified_trace_coherence_state(
    rho: &ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
    opts: &SolverOptions,
) -> MeasureResult {
    let a = dim_a as f64;
    let fixed = trace_distance_coherence_state(rho, dim_a, dim_b, opts);
    let zero = crate::matrix::trace_norm(rho).unwrap_or(f64::INFINITY);
    // warm start at the better of the two known candidates
    let start = match &fixed.witness {
        Some(w) if fixed.value <= zero => w.real_diagonal().iter().map(|x| x / a).collect(),
        _ => vec![0.0; dim_a * dim_b],
    };
    let cone = minimize_trace_distance_cone(rho, dim_a, dim_b, LAMBDA_MAX / a, start, opts);

    let iterations = fixed.iterations + cone.iterations;
    let converged = fixed.converged && cone.converged;
    let lower_bound = cone.lower_bound;
    let mut result = if zero < fixed.value.min(cone.value) {
        MeasureResult {
            value: zero,
            witness: Some(uniform_incoherent(dim_a * dim_b, dim_b)),
            lambda: Some(0.0),
            lower_bound,
            iterations,
            converged,
        }
    } else if fixed.value <= cone.value {
        MeasureResult { lambda: Some(1.0), ..fixed }
    } else {
        let lambda = cone.point.iter().sum::<f64>();
        into_result(cone, dim_a, Some(lambda))
    };
    result.iterations = iterations;
    result.converged = converged;
    result.lower_bound = lower_bound.min(result.value);
    result
}

/// Modified measure by golden-section search for `lambda` on
/// `[0, LAMBDA_MAX]` around fixed-`lambda` inner solves. Slower than
/// [`modified_trace_coherence_state`] and used to cross-check it.
/// `lambda = 0` and `lambda = 1` are always evaluated as candidates.
pub fn modified_trace_coherence_golden(
    rho: &ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
    opts: &SolverOptions,
) -> MeasureResult {
    let diag = rho.real_diagonal();
    let inner = |lambda: f64| -> SubgradientRun {
        let block_sum = lambda / dim_a as f64;
        let start =
            project_block_simplex(&diag.iter().map(|d| d * lambda).collect::<Vec<_>>(), dim_a, dim_b, block_sum);
        minimize_trace_distance(rho, dim_a, dim_b, block_sum, start, opts)
    };

    let mut iterations = 0;
    let mut converged = true;
    let mut best: Option<(f64, SubgradientRun)> = None;
    let consider = |lambda: f64, run: SubgradientRun, best: &mut Option<(f64, SubgradientRun)>| {
        let value = run.value;
        if best.as_ref().is_none_or(|(_, b)| value < b.value) {
            *best = Some((lambda, run));
        }
        value
    };

    // lambda = 0: the zero operator, ||rho||_tr exactly
    let zero_run = inner(0.0);
    iterations += zero_run.iterations;
    consider(0.0, zero_run, &mut best);
    let one_run = inner(1.0);
    iterations += one_run.iterations;
    converged &= one_run.converged;
    consider(1.0, one_run, &mut best);

    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut lo, mut hi) = (0.0, LAMBDA_MAX);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let r1 = inner(x1);
    let r2 = inner(x2);
    iterations += r1.iterations + r2.iterations;
    let mut f1 = consider(x1, r1, &mut best);
    let mut f2 = consider(x2, r2, &mut best);
    while hi - lo > LAMBDA_TOL {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            let r = inner(x1);
            iterations += r.iterations;
            f1 = consider(x1, r, &mut best);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            let r = inner(x2);
            iterations += r.iterations;
            f2 = consider(x2, r, &mut best);
        }
    }

    let (lambda, run) = best.expect("at least one candidate");
    converged &= run.converged;
    let mut result = into_result(run, dim_a, Some(lambda));
    result.iterations = iterations;
    result.converged = converged;
    // the inner bounds are for a fixed lambda only
    result.lower_bound = f64::NEG_INFINITY;
    result
}

const LAMBDA_TOL: f64 = 1e-4;

/// `||rho - D||_tr` at the maximally coherent state and `D = I / (|A||B|)`:
/// `2 (|A||B| - 1) / (|A||B|)`.
pub fn ctr_max_closed_form(dim_a: usize, dim_b: usize) -> f64 {
    let d = (dim_a * dim_b) as f64;
    2.0 * (d - 1.0) / d
}

/// `||J_phi/|A| - J_ref/|A|||_tr` for an arbitrary reference operator,
/// e.g. a sub-normalized one that is not itself a channel.
pub fn trace_distance_to(phi: &QuantumChannel, reference_choi: &ComplexMatrix) -> Result<f64> {
    let a = phi.dim_in() as f64;
    let diff = phi.choi_matrix().sub(reference_choi).scale(1.0 / a);
    crate::matrix::trace_norm(&diff)
}

/// `rho` with off-diagonal entries removed, for callers that want the
/// incoherent part explicitly.
pub fn incoherent_part(rho: &ComplexMatrix) -> ComplexMatrix {
    dephase(rho)
}
