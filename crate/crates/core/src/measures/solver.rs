use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SolverOptions;
use crate::matrix::{hermitian_eigen, ComplexMatrix};

/// Eigenvalues below this are treated as zero when taking the sign.
const SIGN_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SubgradientRun {
    pub value: f64,
    /// Diagonal of the best `D` found.
    pub point: Vec<f64>,
    /// Best dual bound seen; the true minimum lies in `[lower_bound, value]`.
    pub lower_bound: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Euclidean projection of each length-`dim_b` block of `v` onto the scaled
/// simplex `{x >= 0, sum x = block_sum}`.
pub fn project_block_simplex(v: &[f64], dim_a: usize, dim_b: usize, block_sum: f64) -> Vec<f64> {
    assert_eq!(v.len(), dim_a * dim_b, "vector length must be dim_a * dim_b");
    let mut out = vec![0.0; v.len()];
    if block_sum <= 0.0 {
        return out;
    }
    for j in 0..dim_a {
        let block = &v[j * dim_b..(j + 1) * dim_b];
        let theta = simplex_shift(block, block_sum);
        for (o, &x) in out[j * dim_b..(j + 1) * dim_b].iter_mut().zip(block) {
            *o = (x - theta).max(0.0);
        }
    }
    out
}

/// Feasible diagonals: a fixed per-block sum, or the cone of all diagonals
/// whose blocks share a common sum `t` in `[0, max_block_sum]`.
#[derive(Debug, Clone, Copy, PartialEq)]
enum FeasibleSet {
    Simplex { block_sum: f64 },
    Cone { max_block_sum: f64 },
}

impl FeasibleSet {
    fn project(self, v: &[f64], dim_a: usize, dim_b: usize) -> Vec<f64> {
        match self {
            FeasibleSet::Simplex { block_sum } => project_block_simplex(v, dim_a, dim_b, block_sum),
            FeasibleSet::Cone { max_block_sum } => project_block_cone(v, dim_a, dim_b, max_block_sum),
        }
    }

    fn dual_bound(self, trace_w_rho: f64, w_diagonal: &[f64], dim_b: usize) -> f64 {
        let penalty: f64 =
            w_diagonal.chunks(dim_b).map(|block| block.iter().copied().fold(f64::NEG_INFINITY, f64::max)).sum();
        match self {
            FeasibleSet::Simplex { block_sum } => trace_w_rho - block_sum * penalty,
            FeasibleSet::Cone { max_block_sum } => trace_w_rho - max_block_sum * penalty.max(0.0),
        }
    }
}

/// Shift `theta` with `sum max(v - theta, 0) = block_sum`.
fn simplex_shift(block: &[f64], block_sum: f64) -> f64 {
    let mut sorted = block.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = sorted[0] - block_sum;
    for (k, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let t = (cumulative - block_sum) / (k + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    theta
}

/// Euclidean projection onto `{x >= 0, every block sums to the same t, 0 <= t <= max_block_sum}`.
/// The squared distance is convex in `t` with derivative `-2 sum_j theta_j(t)`,
/// so the optimal `t` is found by bisection on that sum.
pub fn project_block_cone(v: &[f64], dim_a: usize, dim_b: usize, max_block_sum: f64) -> Vec<f64> {
    assert_eq!(v.len(), dim_a * dim_b, "vector length must be dim_a * dim_b");
    let shift_sum = |t: f64| -> f64 { v.chunks(dim_b).map(|block| simplex_shift(block, t)).sum() };
    let t = if max_block_sum <= 0.0 || shift_sum(0.0) <= 0.0 {
        0.0
    } else if shift_sum(max_block_sum) >= 0.0 {
        max_block_sum
    } else {
        let (mut lo, mut hi) = (0.0, max_block_sum);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if shift_sum(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * max_block_sum {
                break;
            }
        }
        0.5 * (lo + hi)
    };
    project_block_simplex(v, dim_a, dim_b, t)
}

struct Evaluation {
    value: f64,
    /// Diagonal of `sign(rho - D)`; the subgradient is its negative.
    sign_diagonal: Vec<f64>,
}

fn evaluate(rho: &ComplexMatrix, d: &[f64]) -> Evaluation {
    let mut x = rho.clone();
    for (i, &di) in d.iter().enumerate() {
        x[(i, i)].re -= di;
    }
    let eig = hermitian_eigen(&x);
    let value = eig.values.iter().map(|l| l.abs()).sum();
    let sign_diagonal = eig.reconstruct_diagonal_with(sign);
    Evaluation { value, sign_diagonal }
}

fn sign(l: f64) -> f64 {
    if l.abs() < SIGN_CUTOFF {
        0.0
    } else {
        l.signum()
    }
}

/// Minimizes `||rho - diag(d)||_tr` over `d >= 0` with every input block
/// summing to `block_sum`, by projected subgradient descent with step
/// `step_scale / sqrt(k)`. With `opts.restarts > 0` further runs start from
/// random feasible points and the best is kept.
pub fn minimize_trace_distance(
    rho: &ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
    block_sum: f64,
    start: Vec<f64>,
    opts: &SolverOptions,
) -> SubgradientRun {
    minimize(rho, dim_a, dim_b, FeasibleSet::Simplex { block_sum }, start, opts)
}

/// As [`minimize_trace_distance`] over the cone `{lambda D}`: all blocks share
/// a common sum `t` in `[0, max_block_sum]`, chosen jointly with the entries.
pub fn minimize_trace_distance_cone(
    rho: &ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
    max_block_sum: f64,
    start: Vec<f64>,
    opts: &SolverOptions,
) -> SubgradientRun {
    minimize(rho, dim_a, dim_b, FeasibleSet::Cone { max_block_sum }, start, opts)
}

fn minimize(
    rho: &ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
    set: FeasibleSet,
    start: Vec<f64>,
    opts: &SolverOptions,
) -> SubgradientRun {
    assert_eq!(rho.rows(), dim_a * dim_b, "rho must be (dim_a * dim_b) square");
    let mut best = single_run(rho, dim_a, dim_b, set, start, opts);
    if opts.restarts > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for _ in 0..opts.restarts {
            let raw: Vec<f64> = (0..dim_a * dim_b).map(|_| -rng.random::<f64>().ln()).collect();
            let block_sum = match set {
                FeasibleSet::Simplex { block_sum } => block_sum,
                FeasibleSet::Cone { max_block_sum } => rng.random::<f64>() * max_block_sum,
            };
            let start = scale_blocks(&raw, dim_b, block_sum);
            let run = single_run(rho, dim_a, dim_b, set, start, opts);
            let lower_bound = best.lower_bound.max(run.lower_bound);
            let iterations = best.iterations + run.iterations;
            let converged = best.converged && run.converged;
            if run.value < best.value {
                best = run;
            }
            best.lower_bound = lower_bound;
            best.iterations = iterations;
            best.converged = converged;
        }
    }
    best
}

fn scale_blocks(raw: &[f64], dim_b: usize, block_sum: f64) -> Vec<f64> {
    raw.chunks(dim_b)
        .flat_map(|block| {
            let total: f64 = block.iter().sum();
            block.iter().map(move |x| x / total * block_sum)
        })
        .collect()
}

const STEP_REDUCTION: f64 = 0.1;
const MIN_STEP_FRACTION: f64 = 1e-4;
/// A stage that has neither stalled nor closed the gap after this many stall
/// windows is restarted with a finer step as well.
const STAGE_WINDOWS: usize = 4;

fn single_run(
    rho: &ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
    set: FeasibleSet,
    start: Vec<f64>,
    opts: &SolverOptions,
) -> SubgradientRun {
    let n = start.len();
    let mut d = start;
    let first = evaluate(rho, &d);
    let mut best_value = first.value;
    let mut best_point = d.clone();
    let trace_s_rho =
        |e: &Evaluation, d: &[f64]| e.value + e.sign_diagonal.iter().zip(d).map(|(s, x)| s * x).sum::<f64>();
    let mut lower = set.dual_bound(trace_s_rho(&first, &d), &first.sign_diagonal, dim_b).max(0.0);

    // running average of the sign operators, an ergodic dual candidate
    let mut avg_trace = 0.0;
    let mut avg_diag = vec![0.0; n];
    let mut weight = 0.0;

    let mut mark = best_value;
    let mut since_mark = 0;
    let mut current = first;
    let mut iterations = 0;
    let mut scale = opts.step_scale;
    let mut stage_start = 0;
    let mut stalled = false;
    let mut converged = best_value - lower <= opts.tolerance || dim_a == 0;

    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        let step = scale / ((iterations - stage_start) as f64).sqrt();
        let moved: Vec<f64> = d.iter().zip(&current.sign_diagonal).map(|(x, s)| x + step * s).collect();
        d = set.project(&moved, dim_a, dim_b);
        current = evaluate(rho, &d);

        let t = trace_s_rho(&current, &d);
        lower = lower.max(set.dual_bound(t, &current.sign_diagonal, dim_b));
        weight += step;
        avg_trace += step * (t - avg_trace) / weight;
        for (a, s) in avg_diag.iter_mut().zip(&current.sign_diagonal) {
            *a += step * (s - *a) / weight;
        }
        lower = lower.max(set.dual_bound(avg_trace, &avg_diag, dim_b));

        if current.value < best_value {
            best_value = current.value;
            best_point.clone_from(&d);
        }
        if best_value - lower <= opts.tolerance {
            converged = true;
            break;
        }
        let stage_stalled = if best_value < mark - opts.tolerance {
            mark = best_value;
            since_mark = 0;
            false
        } else {
            since_mark += 1;
            since_mark >= opts.stall_window
        };
        stalled |= stage_stalled;
        if stage_stalled && scale <= opts.step_scale * MIN_STEP_FRACTION {
            converged = true;
            break;
        }
        if stage_stalled || iterations - stage_start >= STAGE_WINDOWS * opts.stall_window {
            // restart the schedule from the incumbent with a finer step
            if scale > opts.step_scale * MIN_STEP_FRACTION {
                scale *= STEP_REDUCTION;
            }
            stage_start = iterations;
            since_mark = 0;
            d.clone_from(&best_point);
            current = evaluate(rho, &d);
            (avg_trace, weight) = (0.0, 0.0);
            avg_diag.iter_mut().for_each(|a| *a = 0.0);
        }
    }
    let converged = converged || stalled;

    SubgradientRun { value: best_value, point: best_point, lower_bound: lower.min(best_value), iterations, converged }
}
