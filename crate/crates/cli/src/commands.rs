use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use embedvqe::ed::{ground_state, SectorLabel};
use embedvqe::embedding::{
    classical_sweep, risb_cost, risb_solve, EmbeddingHamiltonian, FixedPointOptions, RisbOptions, RisbProblem,
    RisbVariables, SweepPoint, SymMatrix,
};
use embedvqe::hamiltonian::FermionHamiltonian;
use embedvqe::impurity::{Ansatz, BasisMode, EdSolver, ImpuritySolver, VqeSolver};
use embedvqe::noization::{exact_no_basis, noize, rotate_hamiltonian, NoizeConfig, RotatedHamiltonian, SpinTreatment, StepReport};
use embedvqe::simulator::calibrate_noise;
use embedvqe::vqe::{landscape_scan, multi_start, vqe_minimize, write_trace_csv, LANDSCAPE_TIE_TOL};

use crate::config::{ConfigError, RunConfig};
use crate::output::{file_tag, num, u_tag, Output};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("solver failure: {0}")]
    Solver(#[from] embedvqe::Error),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) | CliError::Io(_) => 3,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

pub const CHAIN_STEP: f64 = 0.05;

fn key(u: f64) -> i64 {
    (u * 1e9).round() as i64
}

/// Exact-solver fixed points at every requested `U`, chained upward from
/// the non-interacting point in steps of [`CHAIN_STEP`].
pub struct ClassicalTable {
    points: BTreeMap<i64, SweepPoint>,
}

impl ClassicalTable {
    pub fn compute(cfg: &RunConfig, targets: &[f64]) -> CliResult<Self> {
        let max = targets.iter().copied().fold(0.0, f64::max);
        let n = (max / CHAIN_STEP).ceil() as usize;
        let mut grid: BTreeMap<i64, f64> = (0..=n).map(|i| i as f64 * CHAIN_STEP).map(|u| (key(u), u)).collect();
        for &u in targets {
            grid.insert(key(u), u);
        }
        let grid: Vec<f64> = grid.into_values().collect();
        let spec = cfg.lattice(0.0)?;
        let sweep = classical_sweep(&spec, &grid, &FixedPointOptions::default())?;
        Ok(ClassicalTable { points: sweep.into_iter().map(|p| (key(p.u), p)).collect() })
    }

    pub fn load(path: &str) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read classical table `{path}`: {e}")))?;
        let mut points = BTreeMap::new();
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
        let col = |name: &str| {
            header
                .iter()
                .position(|h| *h == name)
                .ok_or_else(|| ConfigError(format!("classical table lacks column `{name}`")))
        };
        let idx = [
            "U", "R_plus", "R_minus", "lambda_plus", "lambda_minus", "mu", "Z_plus", "Z_minus",
            "lambda_tilde_plus", "lambda_tilde_minus", "cost",
        ]
        .map(col);
        let idx: Vec<usize> = idx.into_iter().collect::<Result<_, _>>()?;
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let f: Vec<&str> = line.split(',').collect();
            let v = |k: usize| -> Result<f64, ConfigError> {
                f.get(idx[k])
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| ConfigError(format!("malformed classical table row `{line}`")))
            };
            let p = SweepPoint {
                u: v(0)?,
                vars: RisbVariables { r: SymMatrix::new(v(1)?, v(2)?), lambda: SymMatrix::new(v(3)?, v(4)?) },
                mu: v(5)?,
                z_plus: v(6)?,
                z_minus: v(7)?,
                lambda_tilde_plus: v(8)?,
                lambda_tilde_minus: v(9)?,
                cost: v(10)?,
            };
            points.insert(key(p.u), p);
        }
        Ok(ClassicalTable { points })
    }

    pub fn obtain(cfg: &RunConfig, targets: &[f64]) -> CliResult<Self> {
        match &cfg.optimizer.classical_table {
            Some(path) => Self::load(path),
            None => Self::compute(cfg, targets),
        }
    }

    pub fn get(&self, u: f64) -> CliResult<&SweepPoint> {
        self.points.get(&key(u)).ok_or_else(|| {
            CliError::Config(ConfigError(format!("no classical solution at U = {u} (past the Mott point?)")))
        })
    }

    /// Starting point for `u`: the solution at `u − 0.05` (or at 0).
    pub fn warm_start(&self, u: f64) -> CliResult<RisbVariables> {
        Ok(self.get((u - CHAIN_STEP).max(0.0))?.vars)
    }

    pub fn rows(&self) -> Vec<Vec<String>> {
        self.points
            .values()
            .map(|p| {
                vec![
                    num(p.u),
                    num(p.vars.r.plus),
                    num(p.vars.r.minus),
                    num(p.vars.lambda.plus),
                    num(p.vars.lambda.minus),
                    num(p.mu),
                    num(p.z_plus),
                    num(p.z_minus),
                    num(p.lambda_tilde_plus),
                    num(p.lambda_tilde_minus),
                    num(p.cost),
                ]
            })
            .collect()
    }
}

/// Embedding Hamiltonian at the classical fixed point.
fn classical_hamiltonian(cfg: &RunConfig, table: &ClassicalTable, u: f64) -> CliResult<(RisbProblem, EmbeddingHamiltonian)> {
    let problem = RisbProblem::new(cfg.lattice(u)?)?;
    let eval = risb_cost(&problem, &table.get(u)?.vars, &EdSolver)?;
    Ok((problem, eval.hamiltonian))
}

fn ground_energy(h: &FermionHamiltonian) -> CliResult<f64> {
    Ok(ground_state(h, Some(SectorLabel::half_filled(h.n_modes)))?.energy)
}

fn require_ansatz(cfg: &RunConfig) -> CliResult<Ansatz> {
    cfg.ansatz()?.ok_or_else(|| CliError::Config(ConfigError("this command needs a circuit ansatz, not `ed`".into())))
}

fn prepared_basis(cfg: &RunConfig, h: &FermionHamiltonian, ansatz: &Ansatz) -> CliResult<RotatedHamiltonian> {
    let h0 = RotatedHamiltonian::new(h.clone())?;
    let n_c = cfg.lattice.n_c;
    Ok(match cfg.basis()? {
        BasisMode::Original | BasisMode::Fixed(_) => h0,
        BasisMode::ExactNo => rotate_hamiltonian(&h0, &exact_no_basis(h, n_c)?)?,
        BasisMode::Noization { steps } if steps == 0 => h0,
        BasisMode::Noization { steps } => {
            let circuit = ansatz.build(h.n_modes)?;
            noize(&h0, &circuit, steps, &noize_config(cfg)?)?.hamiltonian
        }
    })
}

fn noize_config(cfg: &RunConfig) -> CliResult<NoizeConfig> {
    Ok(NoizeConfig {
        vqe: cfg.vqe_options()?,
        n_starts: cfg.optimizer.n_starts,
        seed: cfg.optimizer.seed,
        n_c: cfg.lattice.n_c,
        spin: SpinTreatment::Averaged,
        warm_start: true,
    })
}

#[derive(Serialize)]
struct VqeSeedRecord {
    seed: u64,
    best_energy: f64,
    converged: bool,
    n_eval: usize,
    trace_file: String,
}

#[derive(Serialize)]
struct VqeSummary {
    u: f64,
    exact_energy: f64,
    ansatz: String,
    basis: String,
    noise: String,
    n_pauli_terms: usize,
    runs: Vec<VqeSeedRecord>,
}

pub fn cmd_vqe(cfg: &RunConfig, out: &Output) -> CliResult<()> {
    let ansatz = require_ansatz(cfg)?;
    let grid = cfg.u_grid()?;
    let table = ClassicalTable::obtain(cfg, &grid)?;
    let opts = cfg.vqe_options()?;
    for &u in &grid {
        let (_, h) = classical_hamiltonian(cfg, &table, u)?;
        let e0 = ground_energy(&h.fermion)?;
        let rh = prepared_basis(cfg, &h.fermion, &ansatz)?;
        let circuit = ansatz.build(h.fermion.n_modes)?;
        let mut runs = Vec::new();
        for i in 0..cfg.optimizer.n_seeds {
            let seed = cfg.optimizer.seed + i as u64;
            let r = vqe_minimize(&rh.pauli, &circuit, &opts, seed, None)?;
            let name = format!(
                "trace_{}.csv",
                file_tag(&[&u_tag(u), &ansatz.tag(), &cfg.ansatz.basis, &cfg.noise_tag(), &format!("seed{seed}")])
            );
            let mut body = out.meta.csv_header().into_bytes();
            write_trace_csv(&mut body, &r.trace, cfg.output.wall_time)?;
            out.write_atomic(&name, &body)?;
            runs.push(VqeSeedRecord { seed, best_energy: r.best_energy, converged: r.converged, n_eval: r.n_eval, trace_file: name });
        }
        let summary = VqeSummary {
            u,
            exact_energy: e0,
            ansatz: ansatz.tag(),
            basis: cfg.ansatz.basis.clone(),
            noise: cfg.noise_tag(),
            n_pauli_terms: rh.n_pauli_terms(),
            runs,
        };
        out.write_json(&format!("vqe_{}.json", file_tag(&[&u_tag(u), &ansatz.tag(), &cfg.ansatz.basis, &cfg.noise_tag()])), &summary)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct NoizeSummary {
    u: f64,
    exact_energy: f64,
    exact_no_vqe_energy: f64,
    ansatz: String,
    noise: String,
    steps: Vec<StepReport>,
}

pub fn cmd_noize(cfg: &RunConfig, out: &Output) -> CliResult<()> {
    let ansatz = require_ansatz(cfg)?;
    let grid = cfg.u_grid()?;
    let table = ClassicalTable::obtain(cfg, &grid)?;
    let ncfg = noize_config(cfg)?;
    let steps = cfg.ansatz.noization_steps.max(1);
    for &u in &grid {
        let (_, h) = classical_hamiltonian(cfg, &table, u)?;
        let circuit = ansatz.build(h.fermion.n_modes)?;
        let h0 = RotatedHamiltonian::new(h.fermion.clone())?;
        let res = noize(&h0, &circuit, steps, &ncfg)?;
        let no = rotate_hamiltonian(&h0, &exact_no_basis(&h.fermion, cfg.lattice.n_c)?)?;
        let reference = multi_start(&no.pauli, &circuit, &ncfg.vqe, ncfg.n_starts, ncfg.seed, None)?;
        let summary = NoizeSummary {
            u,
            exact_energy: ground_energy(&h.fermion)?,
            exact_no_vqe_energy: reference.best_energy,
            ansatz: ansatz.tag(),
            noise: cfg.noise_tag(),
            steps: res.reports,
        };
        out.write_json(&format!("noize_{}.json", file_tag(&[&u_tag(u), &ansatz.tag(), &cfg.noise_tag()])), &summary)?;
    }
    Ok(())
}

fn solver(cfg: &RunConfig) -> CliResult<Box<dyn ImpuritySolver>> {
    Ok(match cfg.ansatz()? {
        None => Box::new(EdSolver),
        Some(a) => Box::new(VqeSolver::new(a, cfg.basis()?, cfg.vqe_options()?, cfg.optimizer.n_starts, cfg.optimizer.seed)),
    })
}

pub fn cmd_risb_sweep(cfg: &RunConfig, out: &Output) -> CliResult<()> {
    let grid = cfg.u_grid()?;
    let starts: Vec<f64> = grid.iter().map(|u| (u - CHAIN_STEP).max(0.0)).collect();
    let table = ClassicalTable::obtain(cfg, &starts)?;
    let solver = solver(cfg)?;
    let opts = RisbOptions { max_iter: cfg.optimizer.risb_max_iter, simplex_step: cfg.optimizer.simplex_step, ..Default::default() };
    let tag = file_tag(&[&solver.tag(), &cfg.noise_tag()]);
    let mut rows = Vec::new();
    for &u in &grid {
        let problem = RisbProblem::new(cfg.lattice(u)?)?;
        let res = risb_solve(&problem, solver.as_ref(), &table.warm_start(u)?, &opts)?;
        rows.push(vec![
            num(u),
            num(res.z_plus),
            num(res.z_minus),
            num(res.lambda_tilde_plus),
            num(res.lambda_tilde_minus),
            num(res.cost),
            res.n_iter.to_string(),
            solver.tag(),
            cfg.noise_tag(),
        ]);
        let trace: Vec<Vec<String>> =
            res.cost_trace.iter().enumerate().map(|(i, c)| vec![i.to_string(), num(*c)]).collect();
        out.write_csv(&format!("cost_trace_{}_{tag}.csv", u_tag(u)), &["iteration", "cost"], &trace)?;
        // Rewrite the sweep after every point so partial results survive.
        out.write_csv(
            &format!("sweep_{tag}.csv"),
            &["U", "Z_plus", "Z_minus", "lambda_tilde_plus", "lambda_tilde_minus", "cost_final", "n_iter", "solver_tag", "noise_tag"],
            &rows,
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct LandscapeMinimum {
    noise_scale: f64,
    r: f64,
    lambda: f64,
    cost: f64,
    /// Nodes tied with the minimum.
    n_tied: usize,
}

#[derive(Serialize)]
struct LandscapeSummary {
    u: f64,
    classical_r: f64,
    classical_lambda: f64,
    minima: Vec<LandscapeMinimum>,
}

pub fn cmd_landscape(cfg: &RunConfig, out: &Output) -> CliResult<()> {
    if cfg.lattice.n_c != 1 {
        return Err(ConfigError("landscape scans need lattice.n_c = 1".into()).into());
    }
    let ansatz = require_ansatz(cfg)?;
    if ansatz.build(4)?.n_params() != 1 {
        return Err(ConfigError("landscape scans need a one-parameter ansatz (`mr`)".into()).into());
    }
    let grid = cfg.u_grid()?;
    let u = grid[0];
    let table = ClassicalTable::obtain(cfg, &[u])?;
    let (problem, h) = classical_hamiltonian(cfg, &table, u)?;
    let basis: DMatrix<C64> = exact_no_basis(&h.fermion, 1)?.v;
    let centre = table.get(u)?.vars;
    let l = &cfg.landscape;
    let axis = |c: f64, step: f64| -> Vec<f64> {
        (0..=2 * l.half_width).map(|i| c + (i as f64 - l.half_width as f64) * step).collect()
    };
    let r_grid = axis(centre.r.plus, l.r_step);
    let l_grid = axis(centre.lambda.plus, l.lambda_step);
    let noise = calibrate_noise(cfg.noise.eps1, cfg.noise.eps2)?;
    let scan = landscape_scan(&problem, &ansatz, &basis, &r_grid, &l_grid, &noise, &l.scales)?;
    let mut rows = Vec::new();
    let mut minima = Vec::new();
    for (s, &scale) in scan.noise_scales.iter().enumerate() {
        for (i, &r) in scan.r_grid.iter().enumerate() {
            for (j, &lam) in scan.lambda_grid.iter().enumerate() {
                rows.push(vec![num(scale), num(r), num(lam), num(scan.values[s][i][j])]);
            }
        }
        if let Some((i, j)) = scan.argmin(s) {
            minima.push(LandscapeMinimum {
                noise_scale: scale,
                r: r_grid[i],
                lambda: l_grid[j],
                cost: scan.values[s][i][j],
                n_tied: scan.minimizers(s, LANDSCAPE_TIE_TOL).len(),
            });
        }
    }
    out.write_csv(&format!("landscape_{}.csv", u_tag(u)), &["noise_scale", "R", "lambda", "cost"], &rows)?;
    out.write_json(
        &format!("landscape_{}.json", u_tag(u)),
        &LandscapeSummary { u, classical_r: centre.r.plus, classical_lambda: centre.lambda.plus, minima },
    )?;
    Ok(())
}

pub fn cmd_ed_reference(cfg: &RunConfig, out: &Output) -> CliResult<()> {
    let grid = cfg.u_grid()?;
    let table = ClassicalTable::compute(cfg, &grid)?;
    let keep: Vec<i64> = grid.iter().map(|&u| key(u)).collect();
    let rows: Vec<Vec<String>> = table
        .rows()
        .into_iter()
        .zip(table.points.keys())
        .filter(|(_, k)| keep.contains(k))
        .map(|(r, _)| r)
        .collect();
    if rows.len() < grid.len() {
        log::warn!("{} of {} U values have no classical solution", grid.len() - rows.len(), grid.len());
    }
    out.write_csv(
        "ed_reference.csv",
        &[
            "U", "R_plus", "R_minus", "lambda_plus", "lambda_minus", "mu", "Z_plus", "Z_minus",
            "lambda_tilde_plus", "lambda_tilde_minus", "cost",
        ],
        &rows,
    )?;
    Ok(())
}
