//! Limited-memory BFGS with a backtracking Armijo line search.
//!
//! Every accepted step satisfies the sufficient-decrease condition, so the
//! objective never increases between iterates.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsParams {
    /// Number of correction pairs kept.
    pub memory: usize,
    pub max_iters: usize,
    /// Stop once `|f_prev - f| / |f|` drops below this.
    pub tol: f64,
    pub max_line_search: usize,
    /// Armijo sufficient-decrease constant.
    pub c1: f64,
}

impl Default for LbfgsParams {
    fn default() -> Self {
        Self {
            memory: 10,
            max_iters: 200,
            tol: 1e-5,
            max_line_search: 40,
            c1: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// False when the iteration limit was hit or the line search stalled.
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Correction {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

/// Two-loop recursion: returns `-H g`.
fn search_direction(g: &[f64], history: &VecDeque<Correction>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for c in history.iter().rev() {
        let a = c.rho * dot(&c.s, &q);
        for (qi, yi) in q.iter_mut().zip(&c.y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some(last) = history.back() {
        let gamma = dot(&last.s, &last.y) / dot(&last.y, &last.y);
        for qi in &mut q {
            *qi *= gamma;
        }
    }
    for (c, a) in history.iter().zip(alphas.iter().rev()) {
        let b = c.rho * dot(&c.y, &q);
        for (qi, si) in q.iter_mut().zip(&c.s) {
            *qi += (a - b) * si;
        }
    }
    for qi in &mut q {
        *qi = -*qi;
    }
    q
}

/// Minimises `f`, which returns the objective and its gradient.
pub fn minimize<F, E>(mut f: F, x0: Vec<f64>, params: &LbfgsParams) -> Result<Minimum, E>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>), E>,
{
    let mut x = x0;
    let (mut fx, mut g) = f(&x)?;
    let mut history: VecDeque<Correction> = VecDeque::with_capacity(params.memory);

    for iter in 1..=params.max_iters {
        let gnorm = dot(&g, &g).sqrt();
        if gnorm == 0.0 {
            return Ok(Minimum {
                x,
                value: fx,
                iterations: iter - 1,
                converged: true,
            });
        }
        let mut d = search_direction(&g, &history);
        let mut slope = dot(&d, &g);
        if slope >= 0.0 || !slope.is_finite() {
            history.clear();
            d = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
        }
        let mut step = if history.is_empty() { 1.0 / gnorm } else { 1.0 };

        let mut accepted = None;
        for _ in 0..params.max_line_search {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + step * di).collect();
            let (ft, gt) = f(&trial)?;
            if ft <= fx + params.c1 * step * slope {
                accepted = Some((trial, ft, gt));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fn_, gn)) = accepted else {
            return Ok(Minimum {
                x,
                value: fx,
                iterations: iter - 1,
                converged: false,
            });
        };

        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            if history.len() == params.memory {
                history.pop_front();
            }
            history.push_back(Correction {
                s,
                y,
                rho: 1.0 / sy,
            });
        }

        let rel = (fx - fn_).abs() / fn_.abs().max(f64::MIN_POSITIVE);
        x = xn;
        fx = fn_;
        g = gn;
        if rel < params.tol {
            return Ok(Minimum {
                x,
                value: fx,
                iterations: iter,
                converged: true,
            });
        }
    }
    Ok(Minimum {
        x,
        value: fx,
        iterations: params.max_iters,
        converged: false,
    })
}
