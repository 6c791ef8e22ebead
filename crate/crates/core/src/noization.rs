//! Natural-orbital basis rotations: diagonalise a measured 1-RDM, rotate
//! the Hamiltonian coefficients into the eigenbasis and iterate.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::circuits::Circuit;
use crate::ed::{ed_rdm1, ground_state, SectorLabel};
use crate::error::{Error, Result};
use crate::estimator::{measure_rdm1_full, reduce_spin, Rdm1};
use crate::hamiltonian::{spin_block, FermionHamiltonian};
use crate::linalg::{eigh, unitarity_defect};
use crate::pauli::{count_terms, PauliSum};
use crate::simulator::run;
use crate::vqe::{multi_start, VqeOptions, VqeResult};

/// Occupations closer than this are treated as degenerate.
pub const OCC_DEGENERACY_TOL: f64 = 1e-8;
pub const HERMITIAN_TOL: f64 = 1e-8;
pub const UNITARY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct BasisRotation {
    /// Columns are the new orbitals: `c'_α = Σ_p V_pα c_p`.
    pub v: DMatrix<C64>,
    /// Occupation of every column of `v`.
    pub occupations: Vec<f64>,
    pub step: usize,
}

impl BasisRotation {
    pub fn identity(n: usize) -> Self {
        BasisRotation { v: DMatrix::identity(n, n), occupations: vec![f64::NAN; n], step: 0 }
    }

    pub fn dim(&self) -> usize {
        self.v.nrows()
    }

    /// `max |V n V† - D|`.
    pub fn reconstruction_residual(&self, rdm: &DMatrix<C64>) -> f64 {
        let n = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.occupations.len(),
            self.occupations.iter().map(|&x| C64::new(x, 0.0)),
        ));
        (&self.v * n * self.v.adjoint() - rdm).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

fn fix_phase(v: &mut DMatrix<C64>, col: usize) {
    let mut best = (0, 0.0);
    for i in 0..v.nrows() {
        let a = v[(i, col)].norm();
        if a > best.1 + 1e-12 {
            best = (i, a);
        }
    }
    if best.1 > 0.0 {
        let ph = v[(best.0, col)].conj() / best.1;
        for i in 0..v.nrows() {
            v[(i, col)] *= ph;
        }
    }
}

fn lexicographic(a: &[C64], b: &[C64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im));
        if (x - y).norm() > 1e-12 {
            return o;
        }
    }
    std::cmp::Ordering::Equal
}

/// Eigenbasis of a Hermitian 1-RDM with occupations in descending order.
///
/// Columns sharing an occupation are rotated among themselves to
/// diagonalise `tie_h` (the one-body matrix in the old basis) and sorted by
/// ascending orbital energy; without `tie_h` they are sorted
/// lexicographically. Every column has its largest component real and
/// positive.
pub fn diagonalize_rdm(rdm: &DMatrix<C64>, tie_h: Option<&DMatrix<C64>>) -> Result<BasisRotation> {
    let n = rdm.nrows();
    if rdm.ncols() != n {
        return Err(Error::LengthMismatch(rdm.ncols(), n));
    }
    let defect = (rdm - rdm.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if defect > HERMITIAN_TOL {
        return Err(Error::NonHermitian(defect));
    }
    if let Some(h) = tie_h {
        if h.nrows() != n {
            return Err(Error::LengthMismatch(h.nrows(), n));
        }
    }
    let (vals, vecs) = eigh(rdm);
    let mut occ: Vec<f64> = vals.iter().rev().copied().collect();
    let mut v = DMatrix::<C64>::zeros(n, n);
    for j in 0..n {
        v.set_column(j, &vecs.column(n - 1 - j));
    }
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (occ[end - 1] - occ[end]).abs() < OCC_DEGENERACY_TOL {
            end += 1;
        }
        let m = end - start;
        if m > 1 {
            let block = v.columns(start, m).into_owned();
            let mut cols: Vec<Vec<C64>> = if let Some(h) = tie_h {
                let hb = block.transpose() * h * block.map(|z| z.conj());
                let (_, q) = eigh(&hb);
                let w = q.map(|z| z.conj());
                let rotated = &block * w;
                (0..m).map(|j| rotated.column(j).iter().copied().collect()).collect()
            } else {
                let mut b = block.clone();
                for j in 0..m {
                    fix_phase(&mut b, j);
                }
                let mut c: Vec<Vec<C64>> = (0..m).map(|j| b.column(j).iter().copied().collect()).collect();
                c.sort_by(|a, b| lexicographic(a, b));
                c
            };
            for (j, c) in cols.drain(..).enumerate() {
                for i in 0..n {
                    v[(i, start + j)] = c[i];
                }
            }
            let mean = occ[start..end].iter().sum::<f64>() / m as f64;
            occ[start..end].iter_mut().for_each(|o| *o = mean);
        }
        start = end;
    }
    for j in 0..n {
        fix_phase(&mut v, j);
    }
    Ok(BasisRotation { v, occupations: occ, step: 0 })
}

/// Reorder descending-occupation columns so that impurity slots receive the
/// most occupied orbitals and bath slots the least occupied ones, pairing
/// the `k`-th impurity slot with the `k`-th from last orbital.
///
/// Accepts per-spin (`2 n_c`) or spin-orbital (`4 n_c`) rotations; in the
/// latter the slots follow the `σ·2n_c + p` mode order.
pub fn paired_layout(rot: &BasisRotation, n_c: usize) -> Result<BasisRotation> {
    let m = rot.dim();
    let (imp, bath): (Vec<usize>, Vec<usize>) = if m == 2 * n_c {
        ((0..n_c).collect(), (n_c..2 * n_c).collect())
    } else if m == 4 * n_c {
        (
            (0..n_c).chain(2 * n_c..3 * n_c).collect(),
            (n_c..2 * n_c).chain(3 * n_c..4 * n_c).collect(),
        )
    } else {
        return Err(Error::LengthMismatch(m, 2 * n_c));
    };
    let mut v = DMatrix::<C64>::zeros(m, m);
    let mut occ = vec![0.0; m];
    for (k, &slot) in imp.iter().enumerate() {
        v.set_column(slot, &rot.v.column(k));
        occ[slot] = rot.occupations[k];
    }
    for (k, &slot) in bath.iter().enumerate() {
        v.set_column(slot, &rot.v.column(m - 1 - k));
        occ[slot] = rot.occupations[m - 1 - k];
    }
    Ok(BasisRotation { v, occupations: occ, step: rot.step })
}

/// Second-quantised coefficients together with their Pauli image and the
/// accumulated spin-orbital rotation from the original basis.
#[derive(Clone, Debug)]
pub struct RotatedHamiltonian {
    pub h: FermionHamiltonian,
    pub pauli: PauliSum,
    pub basis: DMatrix<C64>,
}

impl RotatedHamiltonian {
    pub fn new(h: FermionHamiltonian) -> Result<Self> {
        let pauli = h.to_pauli()?;
        let n = h.n_modes;
        Ok(RotatedHamiltonian { h, pauli, basis: DMatrix::identity(n, n) })
    }

    pub fn n_pauli_terms(&self) -> usize {
        count_terms(&self.pauli)
    }

    /// Up-spin block of the one-body matrix.
    pub fn one_body_up(&self) -> DMatrix<C64> {
        let m = self.h.n_modes / 2;
        self.h.one_body.view((0, 0), (m, m)).into_owned()
    }

    /// A 1-RDM measured in this basis, expressed in the original one.
    pub fn to_original_rdm(&self, rdm: &DMatrix<C64>) -> DMatrix<C64> {
        &self.basis * rdm * self.basis.adjoint()
    }
}

/// Rotate by a per-spin rotation (applied to both spins) or a full
/// spin-orbital one.
pub fn rotate_hamiltonian(h: &RotatedHamiltonian, rot: &BasisRotation) -> Result<RotatedHamiltonian> {
    let n = h.h.n_modes;
    let defect = unitarity_defect(&rot.v);
    if defect > UNITARY_TOL {
        return Err(Error::InvalidArgument(format!("rotation is not unitary (defect {defect:.3e})")));
    }
    let full = if rot.dim() == n {
        rot.v.clone()
    } else if 2 * rot.dim() == n {
        spin_block(&rot.v)
    } else {
        return Err(Error::LengthMismatch(rot.dim(), n));
    };
    let rotated = h.h.rotate(&full)?;
    let pauli = rotated.to_pauli()?;
    Ok(RotatedHamiltonian { h: rotated, pauli, basis: &h.basis * full })
}

/// Natural orbitals of the half-filled, `Sz = 0` ground state in paired
/// layout. A degenerate ground state is reported in the log; the
/// eigensolver's first vector is used.
pub fn exact_no_basis(h: &FermionHamiltonian, n_c: usize) -> Result<BasisRotation> {
    let gs = ground_state(h, Some(SectorLabel::half_filled(h.n_modes)))?;
    if gs.degeneracy > 1 {
        log::warn!("ground state is {}-fold degenerate; natural orbitals are not unique", gs.degeneracy);
    }
    let rdm = reduce_spin(&ed_rdm1(&gs.amplitudes, h.n_modes), true, true);
    let m = h.n_modes / 2;
    let h_up = h.one_body.view((0, 0), (m, m)).into_owned();
    paired_layout(&diagonalize_rdm(&rdm.matrix, Some(&h_up))?, n_c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpinTreatment {
    /// Same rotation for both spins, from the spin-averaged 1-RDM.
    Averaged,
    /// One rotation of all spin orbitals.
    Full,
}

#[derive(Clone, Debug)]
pub struct NoizeConfig {
    pub vqe: VqeOptions,
    pub n_starts: usize,
    pub seed: u64,
    pub n_c: usize,
    pub spin: SpinTreatment,
    /// Start each step's first VQE run from the previous optimum.
    pub warm_start: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub step: usize,
    pub energy: f64,
    pub occupations: Vec<f64>,
    pub off_diagonal_norm: f64,
    pub n_pauli_terms: usize,
}

#[derive(Clone, Debug)]
pub struct NoizeResult {
    /// Hamiltonian after the last rotation.
    pub hamiltonian: RotatedHamiltonian,
    pub final_vqe: VqeResult,
    pub energies: Vec<f64>,
    pub reports: Vec<StepReport>,
    pub rotations: Vec<BasisRotation>,
}

/// New orbitals from a measured spin-orbital 1-RDM.
pub fn rotation_from_rdm(
    full_rdm: &DMatrix<C64>,
    h: &RotatedHamiltonian,
    n_c: usize,
    spin: SpinTreatment,
) -> Result<(BasisRotation, Rdm1)> {
    let (rdm, tie) = match spin {
        SpinTreatment::Averaged => (reduce_spin(full_rdm, true, true), h.one_body_up()),
        SpinTreatment::Full => (Rdm1::new(full_rdm.clone()), h.h.one_body.clone()),
    };
    let rot = paired_layout(&diagonalize_rdm(&rdm.matrix, Some(&tie))?, n_c)?;
    Ok((rot, rdm))
}

/// `n_steps` rounds of {VQE, measure 1-RDM, diagonalise, rotate}.
pub fn noize(h0: &RotatedHamiltonian, ansatz: &Circuit, n_steps: usize, cfg: &NoizeConfig) -> Result<NoizeResult> {
    if n_steps == 0 {
        return Err(Error::InvalidArgument("n_steps must be at least 1".into()));
    }
    let mut h = h0.clone();
    let mut energies = Vec::new();
    let mut reports = Vec::new();
    let mut rotations = Vec::new();
    let mut warm: Option<Vec<f64>> = None;
    let mut last = None;
    for step in 0..n_steps {
        let vqe = multi_start(&h.pauli, ansatz, &cfg.vqe, cfg.n_starts, cfg.seed, warm.as_deref().filter(|_| cfg.warm_start))
            .map_err(|e| e.context(format!("VQE at NOization step {step}")))?;
        let state = run(ansatz, &vqe.best_params, cfg.vqe.noise.as_ref())?;
        let full = measure_rdm1_full(&state)?;
        let (mut rot, rdm) = rotation_from_rdm(&full, &h, cfg.n_c, cfg.spin)?;
        rot.step = step + 1;
        energies.push(vqe.best_energy);
        reports.push(StepReport {
            step,
            energy: vqe.best_energy,
            occupations: rdm.occupations(),
            off_diagonal_norm: rdm.off_diagonal_norm(),
            n_pauli_terms: h.n_pauli_terms(),
        });
        h = rotate_hamiltonian(&h, &rot)?;
        rotations.push(rot);
        warm = Some(vqe.best_params.clone());
        last = Some(vqe);
    }
    Ok(NoizeResult { hamiltonian: h, final_vqe: last.expect("n_steps >= 1"), energies, reports, rotations })
}
