//! Rotationally invariant slave-boson embedding of the square-lattice
//! Hubbard model with one- or two-site cells.

mod lagrange;
mod lattice;
mod risb;

pub use lagrange::{
    fermi, fermi_matrix, find_mu, g, g_prime, lambda_c, qp_fill, qp_fill_bands, self_energy, solve_d, sqrt_factor,
    QpBands, QpFill, MU_TOL,
};
pub use lattice::{dispersion, k_points, KMesh, LatticeSpec};
pub use risb::{
    classical_fixed_point, classical_sweep, evaluate_lagrange, risb_cost, risb_residual, risb_solve, CostEval,
    FixedPointOptions, LagrangeState, RisbOptions, RisbOutput, RisbProblem, SweepPoint, MOTT_GUARD,
};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::FermionHamiltonian;

pub const SYM_TOL: f64 = 1e-8;

/// A real matrix commuting with the site swap of the cell, stored by its
/// bonding (`plus`) and antibonding (`minus`) eigenvalues. For one-site
/// cells both components hold the same scalar.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    pub plus: f64,
    pub minus: f64,
}

impl SymMatrix {
    pub fn scalar(a: f64) -> Self {
        SymMatrix { plus: a, minus: a }
    }

    pub fn new(plus: f64, minus: f64) -> Self {
        SymMatrix { plus, minus }
    }

    /// `[[a, b], [b, a]]` with `a = (plus + minus)/2`, `b = (plus − minus)/2`,
    /// or `[[plus]]` for one site.
    pub fn to_matrix(&self, n_c: usize) -> DMatrix<f64> {
        match n_c {
            1 => DMatrix::from_element(1, 1, self.plus),
            _ => {
                let a = 0.5 * (self.plus + self.minus);
                let b = 0.5 * (self.plus - self.minus);
                DMatrix::from_row_slice(2, 2, &[a, b, b, a])
            }
        }
    }

    /// Closest symmetric representative (least squares).
    pub fn project(m: &DMatrix<f64>) -> Self {
        if m.nrows() == 1 {
            return SymMatrix::scalar(m[(0, 0)]);
        }
        let a = 0.5 * (m[(0, 0)] + m[(1, 1)]);
        let b = 0.5 * (m[(0, 1)] + m[(1, 0)]);
        SymMatrix { plus: a + b, minus: a - b }
    }
}

/// Bonding/antibonding components of a `[[a, b], [b, a]]` matrix.
pub fn sym_transform(m: &DMatrix<f64>) -> Result<SymMatrix> {
    if m.nrows() == 1 && m.ncols() == 1 {
        return Ok(SymMatrix::scalar(m[(0, 0)]));
    }
    if m.shape() != (2, 2) {
        return Err(Error::LengthMismatch(m.nrows(), 2));
    }
    let dev = (m[(0, 0)] - m[(1, 1)]).abs().max((m[(0, 1)] - m[(1, 0)]).abs());
    if dev > SYM_TOL {
        return Err(Error::InvalidArgument(format!("matrix breaks the site-swap symmetry by {dev:.3e}")));
    }
    Ok(SymMatrix::project(m))
}

/// Independent variables of the minimisation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RisbVariables {
    pub r: SymMatrix,
    pub lambda: SymMatrix,
}

impl RisbVariables {
    /// `[R, λ]` for one site, `[R+, R−, λ+, λ−]` for two.
    pub fn to_vec(&self, n_c: usize) -> Vec<f64> {
        match n_c {
            1 => vec![self.r.plus, self.lambda.plus],
            _ => vec![self.r.plus, self.r.minus, self.lambda.plus, self.lambda.minus],
        }
    }

    pub fn from_slice(x: &[f64], n_c: usize) -> Result<Self> {
        match (n_c, x) {
            (1, [r, l]) => Ok(RisbVariables { r: SymMatrix::scalar(*r), lambda: SymMatrix::scalar(*l) }),
            (2, [rp, rm, lp, lm]) => Ok(RisbVariables { r: SymMatrix::new(*rp, *rm), lambda: SymMatrix::new(*lp, *lm) }),
            _ => Err(Error::LengthMismatch(x.len(), 2 * n_c)),
        }
    }
}

/// Mode of spin `sigma` (0 up, 1 down) and orbital `p` (impurities first,
/// then baths) in a `4 n_c` register.
pub fn mode(n_c: usize, sigma: usize, p: usize) -> usize {
    sigma * 2 * n_c + p
}

#[derive(Clone, Debug)]
pub struct EmbeddingHamiltonian {
    pub n_c: usize,
    pub u: f64,
    pub t_imp: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub lambda_c: DMatrix<f64>,
    pub fermion: FermionHamiltonian,
}

/// `H = Σ t_ij c†_iσ c_jσ + Σ D_ia (c†_iσ f_aσ + h.c.)
///    + Σ λc_ab f_bσ f†_aσ + U Σ n_i↑ n_i↓`.
pub fn build_embedding_hamiltonian(
    n_c: usize,
    t_imp: &DMatrix<f64>,
    u: f64,
    d: &DMatrix<f64>,
    lambda_c: &DMatrix<f64>,
) -> Result<EmbeddingHamiltonian> {
    for m in [t_imp, d, lambda_c] {
        if m.shape() != (n_c, n_c) {
            return Err(Error::LengthMismatch(m.nrows(), n_c));
        }
    }
    let n = 4 * n_c;
    let mut h = FermionHamiltonian::zero(n);
    let c = |x: f64| C64::new(x, 0.0);
    for s in 0..2 {
        for i in 0..n_c {
            for j in 0..n_c {
                h.one_body[(mode(n_c, s, i), mode(n_c, s, j))] += c(t_imp[(i, j)]);
            }
            for a in 0..n_c {
                let (ci, fa) = (mode(n_c, s, i), mode(n_c, s, n_c + a));
                h.one_body[(ci, fa)] += c(d[(i, a)]);
                h.one_body[(fa, ci)] += c(d[(i, a)]);
            }
        }
        // f_b f†_a = δ_ab − f†_a f_b
        for a in 0..n_c {
            h.constant += lambda_c[(a, a)];
            for b in 0..n_c {
                h.one_body[(mode(n_c, s, n_c + a), mode(n_c, s, n_c + b))] -= c(lambda_c[(a, b)]);
            }
        }
    }
    for i in 0..n_c {
        let (up, dn) = (mode(n_c, 0, i), mode(n_c, 1, i));
        h.add_two(up, dn, dn, up, c(u));
    }
    Ok(EmbeddingHamiltonian { n_c, u, t_imp: t_imp.clone(), d: d.clone(), lambda_c: lambda_c.clone(), fermion: h })
}

impl EmbeddingHamiltonian {
    /// One-site embedding Hamiltonian from scalar `D` and `λc`.
    pub fn single_site(u: f64, d: f64, lambda_c: f64) -> Result<Self> {
        let m = |x: f64| DMatrix::from_element(1, 1, x);
        build_embedding_hamiltonian(1, &m(0.0), u, &m(d), &m(lambda_c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sym_round_trip() {
        let s = SymMatrix::new(0.37, -1.2);
        let back = sym_transform(&s.to_matrix(2)).unwrap();
        assert!((back.plus - s.plus).abs() < 1e-14 && (back.minus - s.minus).abs() < 1e-14);
        let hop = DMatrix::from_row_slice(2, 2, &[0.0, 0.3, 0.3, 0.0]);
        assert_eq!(sym_transform(&hop).unwrap(), SymMatrix::new(0.3, -0.3));
    }

    #[test]
    fn asymmetric_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 0.3, 0.2, 0.0]);
        assert!(sym_transform(&m).is_err());
    }

    #[test]
    fn variables_round_trip() {
        let v = RisbVariables { r: SymMatrix::new(0.9, 0.8), lambda: SymMatrix::new(0.1, -0.2) };
        assert_eq!(RisbVariables::from_slice(&v.to_vec(2), 2).unwrap(), v);
    }
}
