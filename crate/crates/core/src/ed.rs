//! Exact diagonalisation in the occupation-number basis, built directly
//! from second-quantised coefficients (no Pauli algebra involved).
//!
//! Mode `q` of an `n`-mode register lives on bit `n - 1 - q` of a basis
//! index, matching the qubit layout of the simulator; the first half of the
//! modes is spin up, the second half spin down.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hamiltonian::FermionHamiltonian;

pub const ED_CAP: usize = 12;
pub const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SectorLabel {
    pub n_particles: usize,
    pub sz_twice: i32,
}

impl SectorLabel {
    /// `N = n_modes / 2`, `Sz = 0`.
    pub fn half_filled(n_modes: usize) -> Self {
        SectorLabel { n_particles: n_modes / 2, sz_twice: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct GroundState {
    pub energy: f64,
    /// Amplitudes over the full `2^n` Fock space.
    pub amplitudes: Vec<C64>,
    pub degeneracy: usize,
    pub sector: Option<SectorLabel>,
}

#[inline]
fn mode_bit(n: usize, q: usize) -> usize {
    1usize << (n - 1 - q)
}

/// `c_q |b>` as `(b', sign)`.
#[inline]
pub fn annihilate(n: usize, b: usize, q: usize) -> Option<(usize, f64)> {
    let bit = mode_bit(n, q);
    if b & bit == 0 {
        return None;
    }
    let parity = (b >> (n - q)).count_ones() & 1;
    Some((b ^ bit, if parity == 0 { 1.0 } else { -1.0 }))
}

/// `c†_q |b>` as `(b', sign)`.
#[inline]
pub fn create(n: usize, b: usize, q: usize) -> Option<(usize, f64)> {
    let bit = mode_bit(n, q);
    if b & bit != 0 {
        return None;
    }
    let parity = (b >> (n - q)).count_ones() & 1;
    Some((b | bit, if parity == 0 { 1.0 } else { -1.0 }))
}

pub fn sector_of(n: usize, b: usize) -> SectorLabel {
    let half = n / 2;
    let up = (0..half).filter(|&q| b & mode_bit(n, q) != 0).count() as i32;
    let dn = (half..n).filter(|&q| b & mode_bit(n, q) != 0).count() as i32;
    SectorLabel { n_particles: (up + dn) as usize, sz_twice: up - dn }
}

pub fn sector_basis(n_modes: usize, sector: Option<SectorLabel>) -> Vec<usize> {
    (0..1usize << n_modes).filter(|&b| sector.is_none_or(|s| sector_of(n_modes, b) == s)).collect()
}

/// Apply `H` to one basis state, returning `(b', amplitude)` pairs.
pub fn apply_to_basis(h: &FermionHamiltonian, b: usize) -> Vec<(usize, C64)> {
    let n = h.n_modes;
    let mut out = vec![(b, C64::new(h.constant, 0.0))];
    for p in 0..n {
        for q in 0..n {
            let v = h.one_body[(p, q)];
            if v.norm() == 0.0 {
                continue;
            }
            if let Some((b1, s1)) = annihilate(n, b, q) {
                if let Some((b2, s2)) = create(n, b1, p) {
                    out.push((b2, v * (s1 * s2)));
                }
            }
        }
    }
    for (p, q, r, s, v) in h.two_body_terms() {
        let step = annihilate(n, b, s)
            .and_then(|(b1, s1)| annihilate(n, b1, r).map(|(b2, s2)| (b2, s1 * s2)))
            .and_then(|(b2, sg)| create(n, b2, q).map(|(b3, s3)| (b3, sg * s3)))
            .and_then(|(b3, sg)| create(n, b3, p).map(|(b4, s4)| (b4, sg * s4)));
        if let Some((b4, sg)) = step {
            out.push((b4, v * sg));
        }
    }
    out
}

/// Dense Hamiltonian restricted to a list of basis states.
pub fn fock_matrix(h: &FermionHamiltonian, basis: &[usize]) -> Result<DMatrix<C64>> {
    if h.n_modes > ED_CAP {
        return Err(Error::CapExceeded { n: h.n_modes, cap: ED_CAP });
    }
    let mut pos = vec![usize::MAX; 1usize << h.n_modes];
    for (i, &b) in basis.iter().enumerate() {
        pos[b] = i;
    }
    let dim = basis.len();
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    for (j, &b) in basis.iter().enumerate() {
        for (b2, v) in apply_to_basis(h, b) {
            let i = pos[b2];
            if i == usize::MAX {
                return Err(Error::InvalidArgument(format!("Hamiltonian leaves the sector: {b:#b} -> {b2:#b}")));
            }
            m[(i, j)] += v;
        }
    }
    Ok(m)
}

/// Lowest eigenpair, within a sector when one is given.
pub fn ground_state(h: &FermionHamiltonian, sector: Option<SectorLabel>) -> Result<GroundState> {
    let basis = sector_basis(h.n_modes, sector);
    if basis.is_empty() {
        return Err(Error::InvalidArgument(format!("empty sector {sector:?}")));
    }
    let m = fock_matrix(h, &basis)?;
    let (vals, vecs) = crate::linalg::eigh(&m);
    let e0 = vals[0];
    let degeneracy = vals.iter().take_while(|&&e| (e - e0).abs() <= DEGENERACY_TOL * e0.abs().max(1.0)).count();
    let mut amplitudes = vec![C64::new(0.0, 0.0); 1usize << h.n_modes];
    // Fix the global phase: largest amplitude real and positive.
    let col = vecs.column(0);
    let (imax, _) = col.iter().enumerate().fold((0, 0.0), |acc, (i, z)| if z.norm() > acc.1 + 1e-12 { (i, z.norm()) } else { acc });
    let phase = col[imax].conj() / col[imax].norm();
    for (i, &b) in basis.iter().enumerate() {
        amplitudes[b] = col[i] * phase;
    }
    Ok(GroundState { energy: e0, amplitudes, degeneracy, sector })
}

/// All eigenvalues of `H` in a sector (ascending).
pub fn spectrum(h: &FermionHamiltonian, sector: Option<SectorLabel>) -> Result<Vec<f64>> {
    let basis = sector_basis(h.n_modes, sector);
    Ok(crate::linalg::eigh(&fock_matrix(h, &basis)?).0)
}

/// Full 1-RDM `<c†_p c_q>` of a Fock-space vector.
pub fn ed_rdm1(amps: &[C64], n_modes: usize) -> DMatrix<C64> {
    let mut d = DMatrix::<C64>::zeros(n_modes, n_modes);
    for (b, &a) in amps.iter().enumerate() {
        if a.norm_sqr() == 0.0 {
            continue;
        }
        for q in 0..n_modes {
            let Some((b1, s1)) = annihilate(n_modes, b, q) else { continue };
            for p in 0..n_modes {
                if let Some((b2, s2)) = create(n_modes, b1, p) {
                    d[(p, q)] += amps[b2].conj() * a * (s1 * s2);
                }
            }
        }
    }
    d
}

/// Per-spin embedding blocks of a spin-averaged 1-RDM `r` over
/// `n_c` impurity + `n_c` bath orbitals: `N_ab = <f_b f†_a>` and
/// `M_ia = <c†_i f_a>`.
pub fn embedding_blocks(r: &DMatrix<C64>, n_c: usize) -> (DMatrix<C64>, DMatrix<C64>) {
    let nb = DMatrix::from_fn(n_c, n_c, |a, b| {
        let delta = if a == b { 1.0 } else { 0.0 };
        C64::new(delta, 0.0) - r[(n_c + a, n_c + b)]
    });
    let m = DMatrix::from_fn(n_c, n_c, |i, a| r[(i, n_c + a)]);
    (nb, m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signs_follow_mode_order() {
        // |modes 0 and 2 occupied> on 3 modes: c_2 passes mode 0.
        let n = 3;
        let b = mode_bit(n, 0) | mode_bit(n, 2);
        assert_eq!(annihilate(n, b, 2).unwrap().1, -1.0);
        assert_eq!(annihilate(n, b, 0).unwrap().1, 1.0);
        assert!(create(n, b, 0).is_none());
    }

    #[test]
    fn hopping_dimer() {
        let mut h = FermionHamiltonian::zero(2);
        h.one_body[(0, 1)] = C64::new(-1.0, 0.0);
        h.one_body[(1, 0)] = C64::new(-1.0, 0.0);
        let gs = ground_state(&h, None).unwrap();
        assert!((gs.energy + 1.0).abs() < 1e-12);
        let d = ed_rdm1(&gs.amplitudes, 2);
        assert!((d[(0, 1)].re - 0.5).abs() < 1e-12);
    }
}
