//! Quasi-Newton and simplex minimisers with full iteration traces.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct TraceEntry {
    pub step: usize,
    pub value: f64,
    pub grad_norm: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub n_iter: usize,
    pub n_eval: usize,
    pub converged: bool,
    pub trace: Vec<TraceEntry>,
}

#[derive(Clone, Debug)]
pub struct BfgsOptions {
    pub max_iter: usize,
    /// Convergence when the gradient norm drops below this.
    pub gtol: f64,
    /// Give up after this many consecutive iterations that change the
    /// objective by less than `ftol · max(1, |f|)`.
    pub ftol: f64,
    pub stall_iters: usize,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        BfgsOptions { max_iter: 10_000, gtol: 1e-8, ftol: 1e-14, stall_iters: 8 }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// BFGS on an objective returning `(f, ∇f)`, with an Armijo backtracking
/// line search and the inverse-Hessian update skipped whenever the
/// curvature condition fails.
pub fn bfgs<F>(mut fg: F, x0: &[f64], opts: &BfgsOptions) -> Result<OptimResult>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut f, mut g) = fg(&x)?;
    let mut n_eval = 1;
    if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergence(0));
    }
    let mut hinv = identity(n);
    let mut trace = vec![TraceEntry { step: 0, value: f, grad_norm: Some(norm(&g)) }];
    let mut stall = 0;
    let mut converged = norm(&g) < opts.gtol;
    let mut iter = 0;
    while !converged && iter < opts.max_iter {
        iter += 1;
        let mut d: Vec<f64> = (0..n).map(|i| -dot(&hinv[i], &g)).collect();
        let mut slope = dot(&d, &g);
        if slope >= 0.0 {
            hinv = identity(n);
            d = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        let mut alpha = 1.0;
        let accepted = loop {
            let xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + alpha * b).collect();
            let (fn_, gn) = fg(&xn)?;
            n_eval += 1;
            if fn_.is_finite() && fn_ <= f + 1e-4 * alpha * slope {
                if gn.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Divergence(iter));
                }
                break Some((xn, fn_, gn));
            }
            alpha *= 0.5;
            if alpha < 1e-14 {
                break None;
            }
        };
        let Some((xn, fn_, gn)) = accepted else {
            break;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            if iter == 1 {
                let scale = sy / dot(&y, &y);
                hinv = identity(n).into_iter().map(|r| r.into_iter().map(|v| v * scale).collect()).collect();
            }
            let hy: Vec<f64> = (0..n).map(|i| dot(&hinv[i], &y)).collect();
            let yhy = dot(&y, &hy);
            let rho = 1.0 / sy;
            for i in 0..n {
                for j in 0..n {
                    hinv[i][j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
                }
            }
        }
        let df = (f - fn_).abs();
        x = xn;
        f = fn_;
        g = gn;
        let gnorm = norm(&g);
        trace.push(TraceEntry { step: iter, value: f, grad_norm: Some(gnorm) });
        converged = gnorm < opts.gtol;
        stall = if df <= opts.ftol * f.abs().max(1.0) { stall + 1 } else { 0 };
        if stall >= opts.stall_iters {
            break;
        }
    }
    Ok(OptimResult { x, value: f, n_iter: iter, n_eval, converged, trace })
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

#[derive(Clone, Debug)]
pub struct NelderMeadOptions {
    pub max_iter: usize,
    /// Per-coordinate offset of the initial simplex vertices.
    pub initial_step: f64,
    pub fatol: f64,
    pub xatol: f64,
    /// Stop as soon as the best value falls below this.
    pub target: Option<f64>,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions { max_iter: 100, initial_step: 0.02, fatol: 1e-14, xatol: 1e-12, target: None }
    }
}

/// Every objective evaluation of a simplex run.
#[derive(Clone, Debug, Default)]
pub struct EvalLog {
    pub points: Vec<(Vec<f64>, f64)>,
}

/// Nelder–Mead with standard coefficients. The trace holds the best value
/// after each iteration (entry 0 is the initial simplex); the returned
/// point is the best one ever evaluated.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> Result<(OptimResult, EvalLog)>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let n = x0.len();
    let mut log = EvalLog::default();
    let mut n_eval = 0;
    let mut eval = |x: &[f64], log: &mut EvalLog, n_eval: &mut usize| -> Result<f64> {
        let v = f(x)?;
        *n_eval += 1;
        log.points.push((x.to_vec(), v));
        Ok(if v.is_nan() { f64::INFINITY } else { v })
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = eval(x0, &mut log, &mut n_eval)?;
    simplex.push((x0.to_vec(), v0));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += opts.initial_step;
        let v = eval(&x, &mut log, &mut n_eval)?;
        simplex.push((x, v));
    }
    if simplex.iter().all(|(_, v)| !v.is_finite()) {
        return Err(Error::InvalidArgument("Nelder-Mead: every simplex vertex is non-finite".into()));
    }
    let order = |s: &mut Vec<(Vec<f64>, f64)>| s.sort_by(|a, b| a.1.total_cmp(&b.1));
    order(&mut simplex);
    let mut trace = vec![TraceEntry { step: 0, value: simplex[0].1, grad_norm: None }];
    let mut converged = false;
    let mut iter = 0;
    let reached = |v: f64| opts.target.is_some_and(|t| v <= t);
    if reached(simplex[0].1) {
        converged = true;
    }
    while !converged && iter < opts.max_iter {
        iter += 1;
        let centroid: Vec<f64> =
            (0..n).map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64).collect();
        let worst = simplex[n].clone();
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect()
        };
        let xr = along(1.0);
        let fr = eval(&xr, &mut log, &mut n_eval)?;
        if fr < simplex[0].1 {
            let xe = along(2.0);
            let fe = eval(&xe, &mut log, &mut n_eval)?;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let xc = along(0.5);
                let fc = eval(&xc, &mut log, &mut n_eval)?;
                (xc, fc)
            } else {
                let xc = along(-0.5);
                let fc = eval(&xc, &mut log, &mut n_eval)?;
                (xc, fc)
            };
            if fc < worst.1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = best.iter().zip(&v.0).map(|(b, xi)| b + 0.5 * (xi - b)).collect();
                    let fx = eval(&x, &mut log, &mut n_eval)?;
                    *v = (x, fx);
                }
            }
        }
        order(&mut simplex);
        if simplex.iter().all(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "Nelder-Mead: simplex became non-finite at iteration {iter}"
            )));
        }
        trace.push(TraceEntry { step: iter, value: simplex[0].1, grad_norm: None });
        let fspread = simplex[n].1 - simplex[0].1;
        let xspread = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        converged = reached(simplex[0].1) || (fspread <= opts.fatol && xspread <= opts.xatol);
    }
    let best = log
        .points
        .iter()
        .filter(|(_, v)| !v.is_nan())
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .cloned()
        .unwrap_or_else(|| simplex[0].clone());
    Ok((
        OptimResult { x: best.0, value: best.1, n_iter: iter, n_eval, converged, trace },
        log,
    ))
}
