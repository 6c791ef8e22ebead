use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::lagrange::{find_mu, lambda_c, qp_fill_bands, sqrt_factor, QpBands};
use super::lattice::{KMesh, LatticeSpec};
use super::{build_embedding_hamiltonian, EmbeddingHamiltonian, RisbVariables, SymMatrix};
use crate::error::{Error, Result};
use crate::estimator::reduce_spin;
use crate::impurity::{EdSolver, ImpuritySolver};
use crate::optim::{nelder_mead, NelderMeadOptions};

/// Renormalisation factors below this magnitude are clamped in the
/// quasiparticle sums and the point is flagged.
pub const MOTT_GUARD: f64 = 1e-3;

/// Lattice plus its cached dispersion.
#[derive(Clone, Debug)]
pub struct RisbProblem {
    pub spec: LatticeSpec,
    pub mesh: KMesh,
}

impl RisbProblem {
    pub fn new(spec: LatticeSpec) -> Result<Self> {
        let mesh = KMesh::new(&spec)?;
        Ok(RisbProblem { spec, mesh })
    }

    pub fn n_c(&self) -> usize {
        self.spec.n_c
    }

    /// Local level `⟨ε_k⟩ − μ` in symmetry components.
    pub fn eps_loc(&self, mu: f64) -> SymMatrix {
        let e = SymMatrix::project(&self.mesh.eps_avg);
        SymMatrix::new(e.plus - mu, e.minus - mu)
    }

    /// Non-interacting fixed point plus the Hartree shift: `R = 1`,
    /// `λ = ⟨ε_k⟩ + U n_σ`.
    pub fn free_start(&self) -> RisbVariables {
        let e = SymMatrix::project(&self.mesh.eps_avg);
        let h = self.spec.u * self.spec.filling;
        RisbVariables { r: SymMatrix::scalar(1.0), lambda: SymMatrix::new(e.plus + h, e.minus + h) }
    }
}

#[derive(Clone, Debug)]
pub struct LagrangeState {
    pub r: DMatrix<f64>,
    pub lambda: DMatrix<f64>,
    pub mu: f64,
    pub delta_p: DMatrix<f64>,
    pub kinetic_rhs: DMatrix<f64>,
    pub sqrt_factor: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub lambda_c: DMatrix<f64>,
    pub clamped: bool,
}

fn guard(x: f64) -> (f64, bool) {
    if x.abs() < MOTT_GUARD {
        (if x < 0.0 { -MOTT_GUARD } else { MOTT_GUARD }, true)
    } else {
        (x, false)
    }
}

/// Quasiparticle side of the equations at `(R, λ)`: chemical potential,
/// `Δp`, `D` and `λc`.
pub fn evaluate_lagrange(problem: &RisbProblem, vars: &RisbVariables) -> Result<LagrangeState> {
    let n_c = problem.n_c();
    let (rp, c1) = guard(vars.r.plus);
    let (rm, c2) = if n_c == 1 { (rp, false) } else { guard(vars.r.minus) };
    let r = SymMatrix::new(rp, rm).to_matrix(n_c);
    let lambda = vars.lambda.to_matrix(n_c);
    let bands = QpBands::new(&r, &lambda, &problem.mesh);
    let mu = find_mu(&bands, problem.spec.beta, problem.spec.filling)?;
    let fill = qp_fill_bands(&r, &bands, mu, problem.spec.beta, &problem.mesh);
    let s = sqrt_factor(&fill.delta_p)?;
    let d = s.clone().lu().solve(&fill.kinetic_rhs).ok_or(Error::DegenerateBath(0.0))?.transpose();
    let lc = lambda_c(&fill.delta_p, &d, &r, &lambda)?;
    Ok(LagrangeState {
        r,
        lambda,
        mu,
        delta_p: fill.delta_p,
        kinetic_rhs: fill.kinetic_rhs,
        sqrt_factor: s,
        d,
        lambda_c: lc,
        clamped: c1 || c2,
    })
}

#[derive(Clone, Debug)]
pub struct CostEval {
    pub cost: f64,
    /// `⟨f_β f†_α⟩ − Δp_αβ`.
    pub f1: DMatrix<f64>,
    /// `⟨c†_α f_β⟩ − [Rᵀ √(Δp(1−Δp))]_αβ`.
    pub f2: DMatrix<f64>,
    pub energy: f64,
    pub lagrange: LagrangeState,
    pub hamiltonian: EmbeddingHamiltonian,
}

/// Residuals of the embedding self-consistency at `(R, λ)` and their
/// Frobenius composite `√(‖F1‖² + ‖F2‖²)`.
pub fn risb_cost(problem: &RisbProblem, vars: &RisbVariables, solver: &dyn ImpuritySolver) -> Result<CostEval> {
    let n_c = problem.n_c();
    let lag = evaluate_lagrange(problem, vars)?;
    let h = build_embedding_hamiltonian(n_c, &problem.mesh.eps_avg, problem.spec.u, &lag.d, &lag.lambda_c)?;
    let sol = solver
        .solve(&h.fermion, n_c)
        .map_err(|e| e.context(format!("impurity solver {} at {:?}", solver.tag(), vars.to_vec(n_c))))?;
    let r = reduce_spin(&sol.rdm, true, false).matrix.map(|z| z.re);
    let f1 = DMatrix::from_fn(n_c, n_c, |a, b| {
        let delta = if a == b { 1.0 } else { 0.0 };
        delta - r[(n_c + a, n_c + b)] - lag.delta_p[(a, b)]
    });
    let target = lag.r.transpose() * &lag.sqrt_factor;
    let f2 = DMatrix::from_fn(n_c, n_c, |i, a| r[(i, n_c + a)] - target[(i, a)]);
    let cost = (f1.norm_squared() + f2.norm_squared()).sqrt();
    Ok(CostEval { cost, f1, f2, energy: sol.energy, lagrange: lag, hamiltonian: h })
}

/// Symmetry components `[F1, F2]` (one site) or `[F1+, F1−, F2+, F2−]`.
pub fn risb_residual(problem: &RisbProblem, vars: &RisbVariables, solver: &dyn ImpuritySolver) -> Result<Vec<f64>> {
    let e = risb_cost(problem, vars, solver)?;
    let (a, b) = (SymMatrix::project(&e.f1), SymMatrix::project(&e.f2));
    Ok(match problem.n_c() {
        1 => vec![a.plus, b.plus],
        _ => vec![a.plus, a.minus, b.plus, b.minus],
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RisbOptions {
    pub max_iter: usize,
    /// Per-coordinate offset of the initial simplex.
    pub simplex_step: f64,
    pub fatol: f64,
    pub xatol: f64,
    /// Stop once the cost falls below this.
    pub target_cost: Option<f64>,
}

impl Default for RisbOptions {
    fn default() -> Self {
        RisbOptions { max_iter: 100, simplex_step: 0.02, fatol: 1e-14, xatol: 1e-12, target_cost: None }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RisbOutput {
    pub u: f64,
    pub vars: RisbVariables,
    pub mu: f64,
    pub z_plus: f64,
    pub z_minus: f64,
    pub lambda_tilde_plus: f64,
    pub lambda_tilde_minus: f64,
    pub cost: f64,
    /// Best cost after each simplex iteration (entry 0: initial simplex).
    pub cost_trace: Vec<f64>,
    /// Every evaluated point with its cost.
    pub evaluations: Vec<(Vec<f64>, f64)>,
    pub n_iter: usize,
    pub converged: bool,
    /// Some evaluation hit the small-`R` guard.
    pub mott_flag: bool,
    pub solver_tag: String,
    pub simplex_step: f64,
}

fn is_domain_error(e: &Error) -> bool {
    match e {
        Error::DegenerateBath(_) | Error::SingularR => true,
        Error::Context { source, .. } => is_domain_error(source),
        _ => false,
    }
}

/// Quasiparticle weight and static shift at a point.
fn physical_outputs(problem: &RisbProblem, vars: &RisbVariables) -> Result<(f64, SymMatrix, SymMatrix)> {
    let lag = evaluate_lagrange(problem, vars)?;
    let eloc = problem.eps_loc(lag.mu);
    let z = SymMatrix::new(vars.r.plus.powi(2), vars.r.minus.powi(2));
    let lt = SymMatrix::new(vars.lambda.plus - eloc.plus, vars.lambda.minus - eloc.minus);
    Ok((lag.mu, z, lt))
}

/// Nelder–Mead over the symmetry-reduced `(R, λ)`.
pub fn risb_solve(
    problem: &RisbProblem,
    solver: &dyn ImpuritySolver,
    start: &RisbVariables,
    opts: &RisbOptions,
) -> Result<RisbOutput> {
    let n_c = problem.n_c();
    let mut mott_flag = false;
    let nm = NelderMeadOptions {
        max_iter: opts.max_iter,
        initial_step: opts.simplex_step,
        fatol: opts.fatol,
        xatol: opts.xatol,
        target: opts.target_cost,
    };
    let (res, log) = nelder_mead(
        |x| {
            let vars = RisbVariables::from_slice(x, n_c)?;
            match risb_cost(problem, &vars, solver) {
                Ok(e) => {
                    mott_flag |= e.lagrange.clamped;
                    Ok(e.cost)
                }
                Err(e) if is_domain_error(&e) => Ok(f64::NAN),
                Err(e) => Err(e),
            }
        },
        &start.to_vec(n_c),
        &nm,
    )?;
    let vars = RisbVariables::from_slice(&res.x, n_c)?;
    let (mu, z, lt) = physical_outputs(problem, &vars)?;
    Ok(RisbOutput {
        u: problem.spec.u,
        vars,
        mu,
        z_plus: z.plus,
        z_minus: z.minus,
        lambda_tilde_plus: lt.plus,
        lambda_tilde_minus: lt.minus,
        cost: res.value,
        cost_trace: res.trace.iter().map(|t| t.value).collect(),
        evaluations: log.points,
        n_iter: res.n_iter,
        converged: res.converged,
        mott_flag,
        solver_tag: solver.tag(),
        simplex_step: opts.simplex_step,
    })
}

#[derive(Clone, Debug)]
pub struct FixedPointOptions {
    pub max_iter: usize,
    pub tol: f64,
    pub fd_step: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        FixedPointOptions { max_iter: 60, tol: 1e-11, fd_step: 1e-7 }
    }
}

/// Damped Newton root search of the residuals with the exact solver and a
/// finite-difference Jacobian.
pub fn classical_fixed_point(
    problem: &RisbProblem,
    start: &RisbVariables,
    opts: &FixedPointOptions,
) -> Result<(RisbVariables, CostEval)> {
    let n_c = problem.n_c();
    let solver = EdSolver;
    let res = |x: &[f64]| -> Result<DVector<f64>> {
        Ok(DVector::from_vec(risb_residual(problem, &RisbVariables::from_slice(x, n_c)?, &solver)?))
    };
    let mut x = start.to_vec(n_c);
    let mut f = res(&x)?;
    for _ in 0..opts.max_iter {
        if f.norm() < opts.tol {
            break;
        }
        let n = x.len();
        let mut jac = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += opts.fd_step;
            xm[j] -= opts.fd_step;
            let col = (res(&xp)? - res(&xm)?) / (2.0 * opts.fd_step);
            jac.set_column(j, &col);
        }
        let step = jac.lu().solve(&(-&f)).ok_or(Error::Divergence(0))?;
        let mut alpha = 1.0;
        loop {
            let xn: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + alpha * b).collect();
            match res(&xn) {
                Ok(fn_) if fn_.norm() < f.norm() => {
                    x = xn;
                    f = fn_;
                    break;
                }
                Ok(_) => {}
                Err(e) if is_domain_error(&e) => {}
                Err(e) => return Err(e),
            }
            alpha *= 0.5;
            if alpha < 1e-6 {
                let vars = RisbVariables::from_slice(&x, n_c)?;
                return Ok((vars, risb_cost(problem, &vars, &solver)?));
            }
        }
    }
    let vars = RisbVariables::from_slice(&x, n_c)?;
    Ok((vars, risb_cost(problem, &vars, &solver)?))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepPoint {
    pub u: f64,
    pub vars: RisbVariables,
    pub mu: f64,
    pub z_plus: f64,
    pub z_minus: f64,
    pub lambda_tilde_plus: f64,
    pub lambda_tilde_minus: f64,
    pub cost: f64,
}

/// Exact-solver fixed points along `u_grid`, each started from the previous
/// one (the first from the non-interacting point). Stops at the first
/// point that fails to converge below `1e-8`.
pub fn classical_sweep(spec: &LatticeSpec, u_grid: &[f64], opts: &FixedPointOptions) -> Result<Vec<SweepPoint>> {
    let mut out = Vec::new();
    let mut start: Option<RisbVariables> = None;
    for &u in u_grid {
        let problem = RisbProblem::new(spec.with_u(u))?;
        let s = start.unwrap_or_else(|| problem.free_start());
        let (vars, eval) = classical_fixed_point(&problem, &s, opts)?;
        if !(eval.cost < 1e-8) {
            log::warn!("classical sweep stopped at U = {u}: residual {:.3e}", eval.cost);
            break;
        }
        let (mu, z, lt) = physical_outputs(&problem, &vars)?;
        out.push(SweepPoint {
            u,
            vars,
            mu,
            z_plus: z.plus,
            z_minus: z.minus,
            lambda_tilde_plus: lt.plus,
            lambda_tilde_minus: lt.minus,
            cost: eval.cost,
        });
        start = Some(vars);
    }
    Ok(out)
}
