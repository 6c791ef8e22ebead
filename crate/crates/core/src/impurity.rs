//! Ground-state solvers for the embedding Hamiltonian: exact
//! diagonalisation or a (possibly noisy) variational circuit in a chosen
//! orbital basis.

use std::sync::Mutex;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::circuits::{build_hea_nc1, build_ldca, build_mr_nc1, build_mrep, build_product_ry, Circuit};
use crate::ed::{ed_rdm1, ground_state, SectorLabel};
use crate::error::{Error, Result};
use crate::estimator::{measure_rdm1_full, parameter_shift_minimize, Observable};
use crate::hamiltonian::{spin_block, FermionHamiltonian};
use crate::noization::{exact_no_basis, noize, rotate_hamiltonian, BasisRotation, NoizeConfig, RotatedHamiltonian, SpinTreatment};
use crate::simulator::run;
use crate::vqe::{multi_start, VqeOptions};

#[derive(Clone, Debug)]
pub struct ImpuritySolution {
    pub energy: f64,
    /// Spin-orbital 1-RDM `<c†_p c_q>` in the original orbital basis.
    pub rdm: DMatrix<C64>,
}

pub trait ImpuritySolver: Send + Sync {
    fn solve(&self, h: &FermionHamiltonian, n_c: usize) -> Result<ImpuritySolution>;
    fn tag(&self) -> String;
}

/// Exact ground state in the half-filled `Sz = 0` sector.
#[derive(Clone, Copy, Debug, Default)]
pub struct EdSolver;

impl ImpuritySolver for EdSolver {
    fn solve(&self, h: &FermionHamiltonian, _n_c: usize) -> Result<ImpuritySolution> {
        let gs = ground_state(h, Some(SectorLabel::half_filled(h.n_modes)))?;
        if gs.degeneracy > 1 {
            log::debug!("embedding ground state is {}-fold degenerate", gs.degeneracy);
        }
        Ok(ImpuritySolution { energy: gs.energy, rdm: ed_rdm1(&gs.amplitudes, h.n_modes) })
    }

    fn tag(&self) -> String {
        "ed".into()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Ansatz {
    /// One-parameter multi-reference circuit (one-site cells).
    Mr,
    /// Multi-reference circuit with fSim layers (two-site cells).
    Mrep { layers: usize },
    Ldca { cycles: usize, decomposed: bool },
    /// Hardware-efficient RY/CNOT circuit on four qubits.
    Hea,
    ProductRy,
}

impl Ansatz {
    pub fn build(&self, n_qubits: usize) -> Result<Circuit> {
        let n_c = n_qubits / 4;
        match self {
            Ansatz::Mr if n_qubits == 4 => Ok(build_mr_nc1()),
            Ansatz::Mrep { layers } => build_mrep(n_c, *layers),
            Ansatz::Ldca { cycles, decomposed } => {
                let c = build_ldca(n_qubits, *cycles)?;
                Ok(if *decomposed { c.decomposed() } else { c })
            }
            Ansatz::Hea if n_qubits == 4 => Ok(build_hea_nc1()),
            Ansatz::ProductRy => Ok(build_product_ry(n_qubits)),
            other => Err(Error::InvalidArgument(format!("{other:?} is not defined on {n_qubits} qubits"))),
        }
    }

    pub fn tag(&self) -> String {
        match self {
            Ansatz::Mr => "mr".into(),
            Ansatz::Mrep { layers } => format!("mrep{layers}"),
            Ansatz::Ldca { cycles, decomposed } => format!("ldca{cycles}{}", if *decomposed { "d" } else { "" }),
            Ansatz::Hea => "hea".into(),
            Ansatz::ProductRy => "ry".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BasisMode {
    Original,
    /// Natural orbitals of the exact ground state (paired layout).
    ExactNo,
    /// A given per-spin or spin-orbital rotation.
    Fixed(DMatrix<C64>),
    /// Iterative natural-orbital rotations from the original basis.
    Noization { steps: usize },
}

impl BasisMode {
    pub fn tag(&self) -> String {
        match self {
            BasisMode::Original => "orig".into(),
            BasisMode::ExactNo => "exact-no".into(),
            BasisMode::Fixed(_) => "fixed".into(),
            BasisMode::Noization { steps } => format!("no{steps}"),
        }
    }
}

/// Variational solver. One-parameter sinusoidal circuits are tuned by the
/// parameter-shift rule; everything else by [`multi_start`].
#[derive(Debug)]
pub struct VqeSolver {
    pub ansatz: Ansatz,
    pub basis: BasisMode,
    pub options: VqeOptions,
    pub n_starts: usize,
    pub seed: u64,
    /// Reuse the previous optimum as the first start of the next solve.
    pub warm_start: bool,
    last: Mutex<Option<Vec<f64>>>,
}

impl Clone for VqeSolver {
    fn clone(&self) -> Self {
        VqeSolver {
            ansatz: self.ansatz.clone(),
            basis: self.basis.clone(),
            options: self.options.clone(),
            n_starts: self.n_starts,
            seed: self.seed,
            warm_start: self.warm_start,
            last: Mutex::new(self.last.lock().map(|g| g.clone()).unwrap_or(None)),
        }
    }
}

impl VqeSolver {
    pub fn new(ansatz: Ansatz, basis: BasisMode, options: VqeOptions, n_starts: usize, seed: u64) -> Self {
        VqeSolver { ansatz, basis, options, n_starts, seed, warm_start: true, last: Mutex::new(None) }
    }

    /// Basis in which the circuit runs, as a spin-orbital rotation, plus
    /// the rotated Hamiltonian.
    fn prepare(&self, h: &FermionHamiltonian, n_c: usize, circuit: &Circuit) -> Result<RotatedHamiltonian> {
        let h0 = RotatedHamiltonian::new(h.clone())?;
        match &self.basis {
            BasisMode::Original => Ok(h0),
            BasisMode::ExactNo => rotate_hamiltonian(&h0, &exact_no_basis(h, n_c)?),
            BasisMode::Fixed(v) => {
                let rot = BasisRotation { v: v.clone(), occupations: vec![f64::NAN; v.nrows()], step: 0 };
                rotate_hamiltonian(&h0, &rot)
            }
            BasisMode::Noization { steps } if *steps == 0 => Ok(h0),
            BasisMode::Noization { steps } => {
                let cfg = NoizeConfig {
                    vqe: self.options.clone(),
                    n_starts: self.n_starts,
                    seed: self.seed,
                    n_c,
                    spin: SpinTreatment::Averaged,
                    warm_start: self.warm_start,
                };
                Ok(noize(&h0, circuit, *steps, &cfg)?.hamiltonian)
            }
        }
    }
}

impl ImpuritySolver for VqeSolver {
    fn solve(&self, h: &FermionHamiltonian, n_c: usize) -> Result<ImpuritySolution> {
        let circuit = self.ansatz.build(h.n_modes)?;
        let rh = self.prepare(h, n_c, &circuit)?;
        let noise = self.options.noise.as_ref();
        let (energy, params) = if circuit.n_params() == 1 && self.options.shots.is_none() {
            let m = parameter_shift_minimize(&circuit, &Observable::compile(&rh.pauli), noise)?;
            (m.energy, vec![m.theta])
        } else {
            let warm = if self.warm_start { self.last.lock().ok().and_then(|g| g.clone()) } else { None };
            let r = multi_start(&rh.pauli, &circuit, &self.options, self.n_starts, self.seed, warm.as_deref())?;
            (r.best_energy, r.best_params)
        };
        let state = run(&circuit, &params, noise)?;
        let rdm = rh.to_original_rdm(&measure_rdm1_full(&state)?);
        if let Ok(mut g) = self.last.lock() {
            *g = Some(params);
        }
        Ok(ImpuritySolution { energy, rdm })
    }

    fn tag(&self) -> String {
        format!("vqe-{}-{}", self.ansatz.tag(), self.basis.tag())
    }
}

/// Spin-orbital form of a per-spin rotation.
pub fn full_rotation(v: &DMatrix<C64>, n_modes: usize) -> Result<DMatrix<C64>> {
    if v.nrows() == n_modes {
        Ok(v.clone())
    } else if 2 * v.nrows() == n_modes {
        Ok(spin_block(v))
    } else {
        Err(Error::LengthMismatch(v.nrows(), n_modes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::EmbeddingHamiltonian;

    #[test]
    fn mr_in_exact_no_matches_ed() {
        let h = EmbeddingHamiltonian::single_site(1.0, -0.4, -0.5).unwrap().fermion;
        let ed = EdSolver.solve(&h, 1).unwrap();
        let vq = VqeSolver::new(Ansatz::Mr, BasisMode::ExactNo, VqeOptions::default(), 1, 0).solve(&h, 1).unwrap();
        assert!((ed.energy - vq.energy).abs() < 1e-8, "{} vs {}", ed.energy, vq.energy);
        assert!((&ed.rdm - &vq.rdm).iter().all(|z| z.norm() < 1e-6));
    }
}
