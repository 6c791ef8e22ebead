//! Variational minimisation of a Pauli-sum energy over circuit parameters,
//! multi-start driver and trace export.

use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::circuits::Circuit;
use crate::embedding::{risb_cost, RisbProblem, RisbVariables, SymMatrix};
use crate::impurity::{Ansatz, BasisMode, VqeSolver};
use crate::error::{Error, Result};
use crate::estimator::{energy, energy_and_gradient, finite_difference_gradient, sample_expectation, Observable};
use crate::optim::{bfgs, nelder_mead, BfgsOptions, NelderMeadOptions};
use crate::pauli::PauliSum;
use crate::simulator::{run, NoiseModel};

pub const FD_STEP: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizerKind {
    Bfgs,
    NelderMead,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMode {
    /// Central differences with step [`FD_STEP`].
    FiniteDifference,
    /// Reverse-mode sweep through the circuit (exact, one forward and one
    /// backward pass).
    Adjoint,
}

#[derive(Clone, Debug)]
pub struct VqeOptions {
    pub optimizer: OptimizerKind,
    pub gradient: GradientMode,
    pub max_iter: usize,
    pub gtol: f64,
    pub noise: Option<NoiseModel>,
    /// Shot-sampled objective; forces Nelder–Mead.
    pub shots: Option<usize>,
    /// Initial simplex offset for Nelder–Mead.
    pub simplex_step: f64,
}

impl Default for VqeOptions {
    fn default() -> Self {
        VqeOptions {
            optimizer: OptimizerKind::Bfgs,
            gradient: GradientMode::Adjoint,
            max_iter: 10_000,
            gtol: 1e-8,
            noise: None,
            shots: None,
            simplex_step: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VqeTraceEntry {
    pub step: usize,
    pub energy: f64,
    pub gradient_norm: Option<f64>,
    /// Seconds since the start of the run.
    pub wall_time: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VqeResult {
    pub best_params: Vec<f64>,
    pub best_energy: f64,
    pub trace: Vec<VqeTraceEntry>,
    pub n_starts: usize,
    pub converged: bool,
    pub n_eval: usize,
    /// Best energy of every start, in start order.
    pub start_energies: Vec<f64>,
    /// Traces of every start, in start order (the best start's trace is
    /// also in `trace`).
    pub start_traces: Vec<Vec<VqeTraceEntry>>,
}

/// Angles uniform in `[-π, π]`.
pub fn random_init(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-PI..=PI)).collect()
}

/// Single optimisation from `x0` (or a seeded random point).
pub fn vqe_minimize(
    h: &PauliSum,
    ansatz: &Circuit,
    opts: &VqeOptions,
    seed: u64,
    x0: Option<&[f64]>,
) -> Result<VqeResult> {
    if ansatz.n_params() == 0 {
        return Err(Error::InvalidArgument("ansatz has no free parameter".into()));
    }
    if h.n_qubits() != ansatz.n_qubits {
        return Err(Error::LengthMismatch(h.n_qubits(), ansatz.n_qubits));
    }
    let x0 = match x0 {
        Some(x) if x.len() != ansatz.n_params() => return Err(Error::LengthMismatch(x.len(), ansatz.n_params())),
        Some(x) => x.to_vec(),
        None => random_init(ansatz.n_params(), seed),
    };
    let obs = Observable::compile(h);
    let noise = opts.noise.as_ref();
    let t0 = Instant::now();
    let (res, optimizer_converged) = match (opts.optimizer, opts.shots) {
        (OptimizerKind::Bfgs, None) => {
            let bo = BfgsOptions { max_iter: opts.max_iter, gtol: opts.gtol, ..Default::default() };
            let r = bfgs(
                |x| match opts.gradient {
                    GradientMode::Adjoint => energy_and_gradient(ansatz, x, &obs, noise),
                    GradientMode::FiniteDifference => Ok((
                        energy(ansatz, x, &obs, noise)?,
                        finite_difference_gradient(ansatz, x, &obs, noise, FD_STEP)?,
                    )),
                },
                &x0,
                &bo,
            )?;
            let c = r.converged;
            (r, c)
        }
        (_, shots) => {
            let no = NelderMeadOptions {
                max_iter: opts.max_iter,
                initial_step: opts.simplex_step,
                fatol: 1e-12,
                xatol: 1e-10,
                target: None,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5407);
            let (r, _) = nelder_mead(
                |x| match shots {
                    Some(n) => sample_expectation(&run(ansatz, x, noise)?, h, n, &mut rng),
                    None => energy(ansatz, x, &obs, noise),
                },
                &x0,
                &no,
            )?;
            let c = r.converged;
            (r, c)
        }
    };
    // Optimiser traces carry no timing; spread the elapsed time evenly.
    let elapsed = t0.elapsed().as_secs_f64();
    let n = res.trace.len().max(1) as f64;
    let trace: Vec<VqeTraceEntry> = res
        .trace
        .iter()
        .enumerate()
        .map(|(i, t)| VqeTraceEntry {
            step: t.step,
            energy: t.value,
            gradient_norm: t.grad_norm,
            wall_time: elapsed * (i + 1) as f64 / n,
        })
        .collect();
    let best_energy = trace.iter().map(|t| t.energy).fold(res.value, f64::min);
    Ok(VqeResult {
        best_params: res.x,
        best_energy,
        trace: trace.clone(),
        n_starts: 1,
        converged: optimizer_converged,
        n_eval: res.n_eval,
        start_energies: vec![best_energy],
        start_traces: vec![trace],
    })
}

/// Best of `n_starts` independent optimisations. Start `i` draws its
/// initial point from seed `seed + i`; when `warm` is given, start 0 begins
/// there instead.
pub fn multi_start(
    h: &PauliSum,
    ansatz: &Circuit,
    opts: &VqeOptions,
    n_starts: usize,
    seed: u64,
    warm: Option<&[f64]>,
) -> Result<VqeResult> {
    if n_starts == 0 {
        return Err(Error::InvalidArgument("n_starts must be at least 1".into()));
    }
    let runs: Vec<Result<VqeResult>> = (0..n_starts)
        .into_par_iter()
        .map(|i| vqe_minimize(h, ansatz, opts, seed.wrapping_add(i as u64), if i == 0 { warm } else { None }))
        .collect();
    let runs: Vec<VqeResult> = runs.into_iter().collect::<Result<_>>()?;
    let best = runs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.best_energy.total_cmp(&b.1.best_energy).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let start_energies = runs.iter().map(|r| r.best_energy).collect();
    let n_eval = runs.iter().map(|r| r.n_eval).sum();
    let start_traces: Vec<_> = runs.iter().map(|r| r.trace.clone()).collect();
    let b = &runs[best];
    Ok(VqeResult {
        best_params: b.best_params.clone(),
        best_energy: b.best_energy,
        trace: b.trace.clone(),
        n_starts,
        converged: b.converged,
        n_eval,
        start_energies,
        start_traces,
    })
}

/// CSV export of a trace. `wall_time` is left empty unless requested, so
/// that reruns of the same configuration produce identical files.
pub fn write_trace_csv<W: Write>(out: &mut W, trace: &[VqeTraceEntry], with_wall_time: bool) -> std::io::Result<()> {
    writeln!(out, "step,energy,gradient_norm,wall_time")?;
    for t in trace {
        let g = t.gradient_norm.map(|g| format!("{g:.16e}")).unwrap_or_default();
        let w = if with_wall_time { format!("{:.6}", t.wall_time) } else { String::new() };
        writeln!(out, "{},{:.16e},{},{}", t.step, t.energy, g, w)?;
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LandscapeTable {
    pub r_grid: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    pub noise_scales: Vec<f64>,
    /// `values[s][i][j]`: cost at `(r_grid[i], lambda_grid[j])` and noise
    /// scale `noise_scales[s]`.
    pub values: Vec<Vec<Vec<f64>>>,
}

pub const LANDSCAPE_TIE_TOL: f64 = 1e-12;

impl LandscapeTable {
    /// All nodes whose cost lies within `tol` of the smallest finite cost at
    /// scale index `s`.
    pub fn minimizers(&self, s: usize, tol: f64) -> Vec<(usize, usize)> {
        let min = self.values[s].iter().flatten().copied().filter(|v| v.is_finite()).fold(f64::INFINITY, f64::min);
        if !min.is_finite() {
            return Vec::new();
        }
        let mut out = Vec::new();
        for (i, row) in self.values[s].iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v.is_finite() && v - min <= tol {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Minimising node at scale index `s`. Nodes within `LANDSCAPE_TIE_TOL`
    /// of the minimum count as ties, broken towards the grid centre.
    pub fn argmin(&self, s: usize) -> Option<(usize, usize)> {
        let ci = (self.r_grid.len() as f64 - 1.0) / 2.0;
        let cj = (self.lambda_grid.len() as f64 - 1.0) / 2.0;
        let dist = |&(i, j): &(usize, usize)| (i as f64 - ci).powi(2) + (j as f64 - cj).powi(2);
        self.minimizers(s, LANDSCAPE_TIE_TOL).into_iter().min_by(|a, b| dist(a).total_cmp(&dist(b)))
    }
}

/// Embedding cost on an `(R, λ)` grid of a one-site problem, with the
/// impurity tuned at every node by a one-parameter circuit in the fixed
/// orbital basis `basis`, for each scale of `noise`.
pub fn landscape_scan(
    problem: &RisbProblem,
    ansatz: &Ansatz,
    basis: &DMatrix<C64>,
    r_grid: &[f64],
    lambda_grid: &[f64],
    noise: &NoiseModel,
    noise_scales: &[f64],
) -> Result<LandscapeTable> {
    if r_grid.is_empty() || lambda_grid.is_empty() || noise_scales.is_empty() {
        return Err(Error::InvalidArgument("landscape grid is empty".into()));
    }
    if problem.n_c() != 1 {
        return Err(Error::InvalidArgument("landscape scans are defined for one-site cells".into()));
    }
    if r_grid.iter().chain(lambda_grid).any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("landscape grid bounds must be finite".into()));
    }
    let mut values = Vec::with_capacity(noise_scales.len());
    for &scale in noise_scales {
        let nm = if scale == 0.0 { None } else { Some(noise.scaled(scale)?) };
        let opts = VqeOptions { noise: nm, ..Default::default() };
        let nodes: Vec<(usize, usize)> =
            (0..r_grid.len()).flat_map(|i| (0..lambda_grid.len()).map(move |j| (i, j))).collect();
        let flat: Vec<Result<f64>> = nodes
            .par_iter()
            .map(|&(i, j)| {
                let solver = VqeSolver::new(ansatz.clone(), BasisMode::Fixed(basis.clone()), opts.clone(), 1, 0);
                let vars = RisbVariables { r: SymMatrix::scalar(r_grid[i]), lambda: SymMatrix::scalar(lambda_grid[j]) };
                Ok(risb_cost(problem, &vars, &solver)?.cost)
            })
            .collect();
        let flat: Vec<f64> = flat.into_iter().collect::<Result<_>>()?;
        values.push(flat.chunks(lambda_grid.len()).map(|c| c.to_vec()).collect());
    }
    Ok(LandscapeTable {
        r_grid: r_grid.to_vec(),
        lambda_grid: lambda_grid.to_vec(),
        noise_scales: noise_scales.to_vec(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::GateKind;
    use crate::pauli::{Pauli, PauliString};

    fn ry_z() -> (PauliSum, Circuit) {
        let mut c = Circuit::new(1);
        let p = c.add_param("t");
        c.push(GateKind::RY, &[0], &[p]);
        let h = PauliSum::from_terms(1, [(C64::new(1.0, 0.0), PauliString::single(1, 0, Pauli::Z))]).unwrap();
        (h, c)
    }

    #[test]
    fn single_rotation() {
        let (h, c) = ry_z();
        for fd in [GradientMode::Adjoint, GradientMode::FiniteDifference] {
            let o = VqeOptions { gradient: fd, ..Default::default() };
            let r = vqe_minimize(&h, &c, &o, 3, None).unwrap();
            assert!((r.best_energy + 1.0).abs() < 1e-6, "{fd:?}: {}", r.best_energy);
        }
    }

    #[test]
    fn one_start_equals_plain_run() {
        let (h, c) = ry_z();
        let o = VqeOptions::default();
        let a = vqe_minimize(&h, &c, &o, 11, None).unwrap();
        let b = multi_start(&h, &c, &o, 1, 11, None).unwrap();
        assert_eq!(a.best_params, b.best_params);
        assert_eq!(a.best_energy.to_bits(), b.best_energy.to_bits());
    }

    #[test]
    fn empty_circuit_rejected() {
        let (h, _) = ry_z();
        assert!(vqe_minimize(&h, &Circuit::new(1), &VqeOptions::default(), 0, None).is_err());
    }
}
