use rayon::prelude::*;

use super::lattice::{forward_backward, marginals_from, Lattice};
use super::CrfError;

/// Instances per work unit. Fixed so that the reduction order, and with it
/// every floating-point sum, does not depend on the thread count.
const CHUNK: usize = 16;

/// One training sequence reduced to weight offsets.
///
/// `unigrams[t]` lists the base index of every unigram feature firing at
/// `t` (the weight for label `y` is `base + y`); `bigrams[t]` does the same
/// for transitions into `t` (weight `base + prev * L + y`), and is empty at
/// `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub unigrams: Vec<Vec<usize>>,
    pub bigrams: Vec<Vec<usize>>,
    pub gold: Vec<usize>,
}

impl Instance {
    pub fn len(&self) -> usize {
        self.gold.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gold.is_empty()
    }

    pub fn lattice(&self, weights: &[f64], num_labels: usize) -> Lattice {
        let l = num_labels;
        let mut lat = Lattice::zeros(self.len(), l);
        for (t, bases) in self.unigrams.iter().enumerate() {
            for &b in bases {
                for y in 0..l {
                    *lat.node_mut(t, y) += weights[b + y];
                }
            }
        }
        for (t, bases) in self.bigrams.iter().enumerate().skip(1) {
            for &b in bases {
                for p in 0..l {
                    for y in 0..l {
                        *lat.edge_mut(t, p, y) += weights[b + p * l + y];
                    }
                }
            }
        }
        lat
    }

    /// Adds `expected - empirical` counts to `grad` and returns
    /// `log Z - gold score`.
    fn accumulate(&self, weights: &[f64], l: usize, grad: &mut [f64]) -> f64 {
        let lat = self.lattice(weights, l);
        let fb = forward_backward(&lat);
        let marg = marginals_from(&lat, &fb);
        for (t, bases) in self.unigrams.iter().enumerate() {
            for &b in bases {
                for y in 0..l {
                    grad[b + y] += marg.unigram(t, y);
                }
                grad[b + self.gold[t]] -= 1.0;
            }
        }
        for (t, bases) in self.bigrams.iter().enumerate().skip(1) {
            for &b in bases {
                for p in 0..l {
                    for y in 0..l {
                        grad[b + p * l + y] += marg.pairwise(t, p, y);
                    }
                }
                grad[b + self.gold[t - 1] * l + self.gold[t]] -= 1.0;
            }
        }
        fb.log_z - lat.path_score(&self.gold)
    }
}

/// Regularised negative log-likelihood and its gradient:
/// `Σ (log Z - gold score) + l2/2 ‖w‖²` and `E[counts] - counts + l2 w`.
pub fn nll_and_gradient(
    weights: &[f64],
    instances: &[Instance],
    num_labels: usize,
    l2: f64,
) -> Result<(f64, Vec<f64>), CrfError> {
    let n = weights.len();
    let parts: Vec<(f64, Vec<f64>)> = instances
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut grad = vec![0.0; n];
            let value = chunk
                .iter()
                .map(|inst| inst.accumulate(weights, num_labels, &mut grad))
                .sum::<f64>();
            (value, grad)
        })
        .collect();

    let mut value = 0.0;
    let mut grad = vec![0.0; n];
    for (v, g) in parts {
        value += v;
        for (acc, x) in grad.iter_mut().zip(g) {
            *acc += x;
        }
    }
    if l2 > 0.0 {
        value += 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>();
        for (g, w) in grad.iter_mut().zip(weights) {
            *g += l2 * w;
        }
    }
    if !value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(CrfError::NumericOverflow);
    }
    Ok((value, grad))
}
