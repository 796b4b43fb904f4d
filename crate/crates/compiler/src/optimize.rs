//! Limited-memory BFGS with a backtracking line search.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy)]
pub struct LbfgsOptions {
    pub memory: usize,
    pub max_iter: usize,
    /// Stop once the objective is at or below this value.
    pub target: f64,
    /// Stop when the objective improved by less than `stall_tol` over the
    /// last `stall_window` iterations.
    pub stall_tol: f64,
    pub stall_window: usize,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self { memory: 12, max_iter: 2000, target: 0.0, stall_tol: 1e-14, stall_window: 20 }
    }
}

#[derive(Debug, Clone)]
pub struct LbfgsResult {
    pub x: Vec<f64>,
    pub f: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes `fg`, which returns the objective and writes the gradient.
pub fn minimize<F>(mut fg: F, x0: Vec<f64>, opts: &LbfgsOptions) -> LbfgsResult
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0;
    let mut g = vec![0.0; n];
    let mut f = fg(&x, &mut g);
    let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut trace: VecDeque<f64> = VecDeque::from([f]);
    let mut xn = vec![0.0; n];
    let mut gn = vec![0.0; n];
    for _ in 0..opts.max_iter {
        if f <= opts.target || n == 0 {
            break;
        }
        // two-loop recursion
        let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, rho) in hist.iter().rev() {
            let a = rho * dot(s, &d);
            for (di, yi) in d.iter_mut().zip(y) {
                *di -= a * yi;
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = hist.back() {
            let gamma = dot(s, y) / dot(y, y);
            for di in &mut d {
                *di *= gamma;
            }
        }
        for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &d);
            for (di, si) in d.iter_mut().zip(s) {
                *di += (a - b) * si;
            }
        }
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            hist.clear();
            d = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        if slope == 0.0 {
            break;
        }
        let mut step = if hist.is_empty() { (1.0 / dot(&d, &d).sqrt()).min(1.0) } else { 1.0 };
        let mut accepted = false;
        for _ in 0..40 {
            for i in 0..n {
                xn[i] = x[i] + step * d[i];
            }
            let fnew = fg(&xn, &mut gn);
            if fnew.is_finite() && fnew <= f + 1e-4 * step * slope {
                let s: Vec<f64> = (0..n).map(|i| xn[i] - x[i]).collect();
                let y: Vec<f64> = (0..n).map(|i| gn[i] - g[i]).collect();
                let sy = dot(&s, &y);
                if sy > 1e-300 {
                    if hist.len() == opts.memory {
                        hist.pop_front();
                    }
                    hist.push_back((s, y, 1.0 / sy));
                }
                std::mem::swap(&mut x, &mut xn);
                std::mem::swap(&mut g, &mut gn);
                f = fnew;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            if hist.is_empty() {
                break;
            }
            hist.clear();
            continue;
        }
        trace.push_back(f);
        if trace.len() > opts.stall_window {
            let old = trace.pop_front().unwrap_or(f);
            if old - f < opts.stall_tol {
                break;
            }
        }
    }
    LbfgsResult { x, f }
}
