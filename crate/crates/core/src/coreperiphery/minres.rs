//! Rank-one fit `A ~ c c^T` ignoring the diagonal, solved by cyclic
//! coordinate updates `c_i = sum_{j != i} a_ij c_j / sum_{j != i} c_j^2`.
//! Each update is the exact minimiser in `c_i`, so the off-diagonal squared
//! error never increases from one sweep to the next.

use nalgebra::DMatrix;

use super::{CorenessVector, CpMethod};
use crate::error::{Error, Result};
use crate::network::WeightedNetwork;

pub const DEFAULT_MINRES_TOL: f64 = 1e-10;
pub const DEFAULT_MINRES_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct MinresFit {
    pub coreness: CorenessVector,
    pub iterations: usize,
    /// Off-diagonal squared error before the first sweep and after each sweep.
    pub objective: Vec<f64>,
}

pub fn minres_coreness(net: &WeightedNetwork, tol: f64, max_iter: usize) -> Result<MinresFit> {
    net.ensure_nonnegative()?;
    if net.n() < 2 {
        return Err(Error::InvalidArgument("MINRES needs at least two nodes".into()));
    }
    minres_dense(&net.adjacency(), tol, max_iter)
}

pub(crate) fn minres_dense(a: &DMatrix<f64>, tol: f64, max_iter: usize) -> Result<MinresFit> {
    let n = a.nrows();
    let strength: Vec<f64> = (0..n).map(|i| (0..n).filter(|&j| j != i).map(|j| a[(i, j)]).sum()).collect();
    let total: f64 = strength.iter().sum();
    if total <= 0.0 {
        return Err(Error::Degenerate("all-zero adjacency gives a zero denominator".into()));
    }
    // with A = c c^T this start is already close to c
    let mut c: Vec<f64> = strength.iter().map(|s| s / total.sqrt()).collect();
    let mut objective = vec![off_diagonal_error(a, &c)];

    for sweep in 1..=max_iter {
        let mut sumsq: f64 = c.iter().map(|x| x * x).sum();
        let mut max_change: f64 = 0.0;
        for i in 0..n {
            let denom = sumsq - c[i] * c[i];
            if denom <= 0.0 {
                return Err(Error::Degenerate(format!("zero denominator updating node {i}")));
            }
            let num: f64 = (0..n).filter(|&j| j != i).map(|j| a[(i, j)] * c[j]).sum();
            let next = num / denom;
            max_change = max_change.max((next - c[i]).abs());
            sumsq += next * next - c[i] * c[i];
            c[i] = next;
        }
        objective.push(off_diagonal_error(a, &c));
        if max_change < tol {
            return Ok(MinresFit {
                coreness: CorenessVector { method: CpMethod::Minres, scores: c },
                iterations: sweep,
                objective,
            });
        }
    }
    Err(Error::NonConvergence { iterations: max_iter, last: c })
}

pub fn off_diagonal_error(a: &DMatrix<f64>, c: &[f64]) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let d = a[(i, j)] - c[i] * c[j];
                sum += d * d;
            }
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coreperiphery::cosine_similarity;

    fn planted(c: &[f64]) -> DMatrix<f64> {
        let n = c.len();
        DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { c[i] * c[j] })
    }

    #[test]
    fn two_node_fixed_point() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 6.0, 6.0, 0.0]);
        let s6 = 6f64.sqrt();
        // (sqrt6, sqrt6) is left unchanged by the update
        let fit = minres_dense(&a, 1e-12, 100);
        let update = a[(0, 1)] * s6 / (s6 * s6);
        assert!((update - s6).abs() < 1e-12);
        // every (x, 6/x) is optimal; the sweep lands on one of them
        let c = fit.unwrap().coreness.scores;
        assert!((c[0] * c[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn recovers_planted_vector() {
        let target = [3.0, 2.0, 1.0];
        let net = WeightedNetwork::from_adjacency(vec!["a".into(), "b".into(), "c".into()], &planted(&target)).unwrap();
        let fit = minres_coreness(&net, 1e-12, 500).unwrap();
        assert!(cosine_similarity(&fit.coreness.scores, &target).unwrap() > 0.999999);
        for (got, want) in fit.coreness.scores.iter().zip(target) {
            assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        }
        assert!(fit.objective.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-15));
    }

    #[test]
    fn all_zero_adjacency_fails() {
        let net = WeightedNetwork::from_unit_edges(3, &[]).unwrap();
        assert!(matches!(minres_coreness(&net, 1e-8, 10), Err(Error::Degenerate(_))));
    }

    #[test]
    fn non_convergence_carries_iterate() {
        let target = [5.0, 4.0, 3.0, 2.0, 1.0, 0.5];
        match minres_dense(&planted(&target), 0.0, 2) {
            Err(Error::NonConvergence { iterations, last }) => {
                assert_eq!(iterations, 2);
                assert_eq!(last.len(), 6);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
