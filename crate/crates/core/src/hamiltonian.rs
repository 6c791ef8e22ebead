//! Number-conserving fermionic Hamiltonians in coefficient form,
//! `H = e0 + Σ h_pq c†_p c_q + Σ h_pqrs c†_p c†_q c_r c_s`,
//! and their single-particle basis rotations.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::pauli::{jordan_wigner, FermionOperator, PauliSum};

const COEFF_TOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct FermionHamiltonian {
    pub n_modes: usize,
    pub constant: f64,
    pub one_body: DMatrix<C64>,
    /// Row-major `n^4` tensor indexed `[p][q][r][s]`.
    pub two_body: Vec<C64>,
}

impl FermionHamiltonian {
    pub fn zero(n_modes: usize) -> Self {
        FermionHamiltonian {
            n_modes,
            constant: 0.0,
            one_body: DMatrix::zeros(n_modes, n_modes),
            two_body: vec![C64::new(0.0, 0.0); n_modes.pow(4)],
        }
    }

    #[inline]
    pub fn idx(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        let n = self.n_modes;
        ((p * n + q) * n + r) * n + s
    }

    pub fn two(&self, p: usize, q: usize, r: usize, s: usize) -> C64 {
        self.two_body[self.idx(p, q, r, s)]
    }

    pub fn add_two(&mut self, p: usize, q: usize, r: usize, s: usize, v: C64) {
        let i = self.idx(p, q, r, s);
        self.two_body[i] += v;
    }

    /// Nonzero two-body entries as `(p, q, r, s, h)`.
    pub fn two_body_terms(&self) -> Vec<(usize, usize, usize, usize, C64)> {
        let n = self.n_modes;
        let mut out = Vec::new();
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = self.two(p, q, r, s);
                        if v.norm() > COEFF_TOL {
                            out.push((p, q, r, s, v));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn to_fermion_operator(&self) -> FermionOperator {
        let n = self.n_modes;
        let mut op = FermionOperator::zero();
        if self.constant != 0.0 {
            op.terms.push((C64::new(self.constant, 0.0), vec![]));
        }
        for p in 0..n {
            for q in 0..n {
                let v = self.one_body[(p, q)];
                if v.norm() > COEFF_TOL {
                    op.terms.push((v, vec![(p, true), (q, false)]));
                }
            }
        }
        for (p, q, r, s, v) in self.two_body_terms() {
            op.terms.push((v, vec![(p, true), (q, true), (r, false), (s, false)]));
        }
        op
    }

    pub fn to_pauli(&self) -> Result<PauliSum> {
        jordan_wigner(&self.to_fermion_operator(), self.n_modes)
    }

    /// Largest violation of `h_pq = conj(h_qp)` and of
    /// `h_pqrs = conj(h_srqp)`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.n_modes;
        let mut worst = 0.0f64;
        for p in 0..n {
            for q in 0..n {
                worst = worst.max((self.one_body[(p, q)] - self.one_body[(q, p)].conj()).norm());
                for r in 0..n {
                    for s in 0..n {
                        worst = worst.max((self.two(p, q, r, s) - self.two(s, r, q, p).conj()).norm());
                    }
                }
            }
        }
        worst
    }

    /// Coefficients in the basis `c'_α = Σ_p V_pα c_p`:
    /// `h'_pq = V_p'p h_p'q' conj(V_q'q)` and likewise for every index of
    /// the two-body tensor. A 1-RDM transforms as `D' = V† D V`.
    pub fn rotate(&self, v: &DMatrix<C64>) -> Result<Self> {
        let n = self.n_modes;
        if v.nrows() != n || v.ncols() != n {
            return Err(Error::LengthMismatch(v.nrows(), n));
        }
        let one = v.transpose() * &self.one_body * v.map(|z| z.conj());
        let vc = v.map(|z| z.conj());
        // Four successive single-index contractions, O(n^5).
        let mut t = self.two_body.clone();
        for axis in 0..4 {
            let m = if axis < 2 { v } else { &vc };
            t = contract_axis(&t, n, axis, m);
        }
        Ok(FermionHamiltonian { n_modes: n, constant: self.constant, one_body: one, two_body: t })
    }
}

/// `out[.., a, ..] = Σ_x m[x, a] · t[.., x, ..]` along `axis`.
fn contract_axis(t: &[C64], n: usize, axis: usize, m: &DMatrix<C64>) -> Vec<C64> {
    let stride = n.pow(3 - axis as u32);
    let mut out = vec![C64::new(0.0, 0.0); t.len()];
    for (flat, o) in out.iter_mut().enumerate() {
        let a = (flat / stride) % n;
        let base = flat - a * stride;
        let mut acc = C64::new(0.0, 0.0);
        for x in 0..n {
            let mx = m[(x, a)];
            if mx.norm_sqr() != 0.0 {
                acc += mx * t[base + x * stride];
            }
        }
        *o = acc;
    }
    out
}

/// Spin-block-diagonal embedding of a per-spin matrix: `diag(v, v)`.
pub fn spin_block(v: &DMatrix<C64>) -> DMatrix<C64> {
    let m = v.nrows();
    let mut out = DMatrix::<C64>::zeros(2 * m, 2 * m);
    out.view_mut((0, 0), (m, m)).copy_from(v);
    out.view_mut((m, m), (m, m)).copy_from(v);
    out
}
