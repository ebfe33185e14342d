//! Sampled core-score.
//!
//! For each `(alpha, beta)` the transition profile `c*` (a sharp or smooth
//! step from periphery to core values) is placed on the nodes so that
//! `Q = sum_ij a_ij c_i c_j` is as large as the search can find, and each
//! node accumulates `c_i * Q`. Scores are rescaled so the largest is one.
//!
//! Placement search: nodes are ranked by strength (descending) and receive
//! the profile values largest-first, then pairwise value swaps are applied
//! while they raise `Q`, up to `5 N^2` attempted swaps per sample.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{descending_order, CorenessVector, CpMethod};
use crate::error::{Error, Result};
use crate::network::WeightedNetwork;

pub const DEFAULT_ROMBACH_SAMPLES: usize = 10_000;

const CHUNK: usize = 256;

/// Profile values for ranks `1..=n`, ascending.
pub fn rombach_profile_values(alpha: f64, beta: f64, n: usize) -> Vec<f64> {
    let cut = ((beta * n as f64).floor() as usize).min(n);
    (1..=n)
        .map(|i| {
            if i <= cut {
                i as f64 * (1.0 - alpha) / (2.0 * cut as f64)
            } else {
                (i - cut) as f64 * (1.0 - alpha) / (2.0 * (n - cut) as f64) + (1.0 + alpha) / 2.0
            }
        })
        .collect()
}

pub fn rombach_coreness(net: &WeightedNetwork, num_samples: usize, seed: u64) -> Result<CorenessVector> {
    if num_samples == 0 {
        return Err(Error::InvalidArgument("num_samples must be at least 1".into()));
    }
    net.ensure_nonnegative()?;
    let n = net.n();
    if n < 2 {
        return Err(Error::InvalidArgument("core score needs at least two nodes".into()));
    }
    if net.total_weight() <= 0.0 {
        return Err(Error::Degenerate("network has no positive edge weight".into()));
    }
    let a = net.adjacency();
    let start_order = descending_order(&net.strengths());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params: Vec<(f64, f64)> = (0..num_samples).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect();

    // fixed chunking keeps the floating-point reduction order independent of
    // the number of worker threads
    let partials: Vec<Vec<f64>> = params
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![0.0; n];
            for &(alpha, beta) in chunk {
                let (c, q) = best_placement(&a, &start_order, alpha, beta);
                for (s, ci) in acc.iter_mut().zip(&c) {
                    *s += ci * q;
                }
            }
            acc
        })
        .collect();
    let mut scores = vec![0.0; n];
    for part in &partials {
        for (s, p) in scores.iter_mut().zip(part) {
            *s += p;
        }
    }
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_nan() || max <= 0.0 {
        return Err(Error::Degenerate("all core scores are zero".into()));
    }
    for s in &mut scores {
        *s /= max;
    }
    Ok(CorenessVector { method: CpMethod::Rombach, scores })
}

/// Returns the per-node values and the achieved quality.
fn best_placement(a: &DMatrix<f64>, start_order: &[usize], alpha: f64, beta: f64) -> (Vec<f64>, f64) {
    let n = a.nrows();
    let values = rombach_profile_values(alpha, beta, n);
    let mut c = vec![0.0; n];
    for (rank, &node) in start_order.iter().enumerate() {
        c[node] = values[n - 1 - rank];
    }
    // s_p = sum_j a_pj c_j
    let mut s: Vec<f64> = (0..n).map(|p| (0..n).map(|j| a[(p, j)] * c[j]).sum()).collect();
    let mut q: f64 = c.iter().zip(&s).map(|(ci, si)| ci * si).sum();

    let budget = 5 * n * n;
    let mut attempts = 0;
    'sweeps: loop {
        let mut improved = false;
        for p in 0..n {
            for r in (p + 1)..n {
                if attempts == budget {
                    break 'sweeps;
                }
                attempts += 1;
                let d = c[r] - c[p];
                if d == 0.0 {
                    continue;
                }
                let gain = 2.0 * d * (s[p] - s[r] - a[(p, r)] * d);
                if gain > 1e-12 * q.abs().max(1e-300) {
                    c.swap(p, r);
                    for k in 0..n {
                        s[k] += a[(k, p)] * d - a[(k, r)] * d;
                    }
                    q += gain;
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    (c, q)
}
