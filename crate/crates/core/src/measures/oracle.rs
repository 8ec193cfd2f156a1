//! Brute-force references for the trace-distance measures: exhaustive search
//! over a lattice on the feasible set followed by local zoom refinement.

use rayon::prelude::*;

use super::{MeasureResult, LAMBDA_MAX};
use crate::channel::QuantumChannel;
use crate::error::{Error, Result};
use crate::matrix::{hermitian_eigenvalues, ComplexMatrix};

/// Largest number of free coordinates `|A| (|B| - 1)` the grid handles.
pub const MAX_FREE_DIMS: usize = 4;

const ZOOM_POINTS: i64 = 5; // offsets -5..=5 per free coordinate
const FINEST_STEP: f64 = 1e-6;

/// `grid_points` lattice points per free coordinate (so `grid_points - 1`
/// subdivisions of each block simplex).
pub fn trace_distance_coherence_oracle(phi: &QuantumChannel, grid_points: usize) -> Result<MeasureResult> {
    let a = phi.dim_in();
    let (value, point) = trace_distance_grid(&phi.normalized_choi(), a, phi.dim_out(), 1.0 / a as f64, grid_points)?;
    let witness = ComplexMatrix::from_diagonal(&point.iter().map(|d| d * a as f64).collect::<Vec<_>>());
    Ok(MeasureResult {
        value,
        witness: Some(witness),
        lambda: None,
        lower_bound: f64::NEG_INFINITY,
        iterations: 0,
        converged: true,
    })
}

/// Minimum of `||rho - diag(d)||_tr` over the block simplices, found by grid
/// search. Returns the value and the minimizing diagonal.
pub fn trace_distance_grid(
    rho: &ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
    block_sum: f64,
    grid_points: usize,
) -> Result<(f64, Vec<f64>)> {
    if grid_points < 2 {
        return Err(Error::InvalidInput("grid needs at least 2 points per coordinate".into()));
    }
    if rho.rows() != dim_a * dim_b || !rho.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "expected a {0}x{0} operator, got {1}x{2}",
            dim_a * dim_b,
            rho.rows(),
            rho.cols()
        )));
    }
    let free = dim_a * dim_b.saturating_sub(1);
    if free > MAX_FREE_DIMS {
        return Err(Error::UnsupportedDimension(format!(
            "grid search needs |A|(|B|-1) <= {MAX_FREE_DIMS}, got {free}"
        )));
    }
    let objective = |d: &[f64]| -> f64 {
        let mut x = rho.clone();
        for (i, &di) in d.iter().enumerate() {
            x[(i, i)].re -= di;
        }
        hermitian_eigenvalues(&x).iter().map(|l| l.abs()).sum()
    };
    if free == 0 {
        let d = vec![block_sum; dim_a * dim_b];
        return Ok((objective(&d), d));
    }

    // coarse lattice: every block is a composition of grid_points - 1
    let subdivisions = grid_points - 1;
    let block_points = compositions(subdivisions, dim_b);
    let h = block_sum / subdivisions as f64;
    let total = block_points.len().pow(dim_a as u32);
    let (mut best_value, mut best) = (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut d = Vec::with_capacity(dim_a * dim_b);
            for _ in 0..dim_a {
                let comp = &block_points[idx % block_points.len()];
                idx /= block_points.len();
                d.extend(comp.iter().map(|&c| c as f64 * h));
            }
            (objective(&d), d)
        })
        .min_by(|x, y| x.0.total_cmp(&y.0))
        .expect("non-empty lattice");

    // zoom: a (2 ZOOM_POINTS + 1)^free box of spacing step / ZOOM_POINTS around the incumbent
    let mut step = h;
    while step > FINEST_STEP {
        let spacing = step / ZOOM_POINTS as f64;
        let side = (2 * ZOOM_POINTS + 1) as usize;
        let count = side.pow(free as u32);
        let center = best.clone();
        let candidate = (0..count)
            .into_par_iter()
            .filter_map(|mut idx| {
                let mut d = center.clone();
                for j in 0..dim_a {
                    let mut last = block_sum;
                    for alpha in 0..dim_b - 1 {
                        let offset = (idx % side) as i64 - ZOOM_POINTS;
                        idx /= side;
                        let i = j * dim_b + alpha;
                        d[i] = center[i] + offset as f64 * spacing;
                        if d[i] < 0.0 {
                            return None;
                        }
                        last -= d[i];
                    }
                    if last < -1e-15 {
                        return None;
                    }
                    d[j * dim_b + dim_b - 1] = last.max(0.0);
                }
                Some((objective(&d), d))
            })
            .min_by(|x, y| x.0.total_cmp(&y.0));
        if let Some((value, d)) = candidate {
            if value < best_value {
                best_value = value;
                best = d;
            }
        }
        step = 2.0 * spacing;
    }
    Ok((best_value, best))
}

/// Reference for the modified measure `min ||rho - lambda D||_tr`. The inner
/// grid minimum is convex in lambda, so a coarse lambda scan over
/// `[0, LAMBDA_MAX]` is followed by ternary search in the best bracket.
pub fn modified_trace_coherence_oracle(phi: &QuantumChannel, grid_points: usize) -> Result<MeasureResult> {
    let a = phi.dim_in();
    let b = phi.dim_out();
    let rho = phi.normalized_choi();
    let at = |lambda: f64| trace_distance_grid(&rho, a, b, lambda / a as f64, grid_points);
    let scan = grid_points.min(41);
    let lambdas: Vec<f64> = (0..scan).map(|i| LAMBDA_MAX * i as f64 / (scan - 1) as f64).collect();
    let values = lambdas.iter().map(|&l| at(l).map(|r| r.0)).collect::<Result<Vec<_>>>()?;
    let best = (0..scan).min_by(|&i, &j| values[i].total_cmp(&values[j])).expect("non-empty scan");
    let (mut lo, mut hi) = (lambdas[best.saturating_sub(1)], lambdas[(best + 1).min(scan - 1)]);
    while hi - lo > LAMBDA_RESOLUTION {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if at(m1)?.0 <= at(m2)?.0 {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let mut lambda = 0.5 * (lo + hi);
    let (mut value, mut point) = at(lambda)?;
    if values[best] < value {
        lambda = lambdas[best];
        (value, point) = at(lambda)?;
    }
    let witness = if lambda > 0.0 {
        ComplexMatrix::from_diagonal(&point.iter().map(|d| d * a as f64 / lambda).collect::<Vec<_>>())
    } else {
        ComplexMatrix::from_diagonal(&vec![1.0 / b as f64; a * b])
    };
    Ok(MeasureResult {
        value,
        witness: Some(witness),
        lambda: Some(lambda),
        lower_bound: f64::NEG_INFINITY,
        iterations: 0,
        converged: true,
    })
}

const LAMBDA_RESOLUTION: f64 = 1e-5;

/// All vectors of `parts` non-negative integers summing to `n`.
fn compositions(n: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in 0..=n {
        for mut rest in compositions(n - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}
