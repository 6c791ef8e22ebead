//! Exact state-vector and density-matrix execution of circuits, with
//! per-gate depolarizing noise on the density-matrix backend.
//!
//! A density matrix over `n` qubits is stored row-major as a vector over
//! `2n` index bits; the row index occupies the high `n` bits, so left
//! multiplication by `U` on qubit `q` is a state-vector update on virtual
//! qubit `q` and right multiplication by `U†` is an update with `conj(U)`
//! on virtual qubit `n + q`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::circuits::{Circuit, Gate};
use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub enum QuantumState {
    Pure { n: usize, amps: Vec<C64> },
    Mixed { n: usize, rho: Vec<C64> },
}

impl QuantumState {
    /// `|0…0>` on the requested backend.
    pub fn zero(n: usize, mixed: bool) -> Self {
        assert!(n <= MAX_QUBITS);
        let dim = 1usize << n;
        if mixed {
            let mut rho = vec![C64::new(0.0, 0.0); dim * dim];
            rho[0] = C64::new(1.0, 0.0);
            QuantumState::Mixed { n, rho }
        } else {
            let mut amps = vec![C64::new(0.0, 0.0); dim];
            amps[0] = C64::new(1.0, 0.0);
            QuantumState::Pure { n, amps }
        }
    }

    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let n = amps.len().trailing_zeros() as usize;
        if 1usize << n != amps.len() {
            return Err(Error::InvalidArgument("amplitude count is not a power of two".into()));
        }
        Ok(QuantumState::Pure { n, amps })
    }

    pub fn from_density(rho: &DMatrix<C64>) -> Result<Self> {
        let dim = rho.nrows();
        let n = dim.trailing_zeros() as usize;
        if 1usize << n != dim || rho.ncols() != dim {
            return Err(Error::InvalidArgument("density matrix must be 2^n square".into()));
        }
        let mut flat = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                flat.push(rho[(r, c)]);
            }
        }
        Ok(QuantumState::Mixed { n, rho: flat })
    }

    pub fn n_qubits(&self) -> usize {
        match self {
            QuantumState::Pure { n, .. } | QuantumState::Mixed { n, .. } => *n,
        }
    }

    pub fn is_mixed(&self) -> bool {
        matches!(self, QuantumState::Mixed { .. })
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits()
    }

    /// `‖ψ‖²` or `tr ρ`.
    pub fn trace(&self) -> f64 {
        match self {
            QuantumState::Pure { amps, .. } => amps.iter().map(|a| a.norm_sqr()).sum(),
            QuantumState::Mixed { n, rho } => {
                let dim = 1usize << n;
                (0..dim).map(|i| rho[i * dim + i].re).sum()
            }
        }
    }

    pub fn density_matrix(&self) -> DMatrix<C64> {
        let dim = self.dim();
        match self {
            QuantumState::Pure { amps, .. } => {
                DMatrix::from_fn(dim, dim, |r, c| amps[r] * amps[c].conj())
            }
            QuantumState::Mixed { rho, .. } => DMatrix::from_fn(dim, dim, |r, c| rho[r * dim + c]),
        }
    }

    pub fn amplitudes(&self) -> Option<&[C64]> {
        match self {
            QuantumState::Pure { amps, .. } => Some(amps),
            QuantumState::Mixed { .. } => None,
        }
    }

    /// `<b|state|b>` for every basis state.
    pub fn probabilities(&self) -> Vec<f64> {
        match self {
            QuantumState::Pure { amps, .. } => amps.iter().map(|a| a.norm_sqr()).collect(),
            QuantumState::Mixed { n, rho } => {
                let dim = 1usize << n;
                (0..dim).map(|i| rho[i * dim + i].re).collect()
            }
        }
    }

    /// Raw little-endian dump: a `u32` qubit count, a `u8` backend flag,
    /// then interleaved real/imaginary `f64` pairs.
    pub fn to_bytes(&self) -> Vec<u8> {
        let (flag, data) = match self {
            QuantumState::Pure { amps, .. } => (0u8, amps),
            QuantumState::Mixed { rho, .. } => (1u8, rho),
        };
        let mut out = Vec::with_capacity(5 + 16 * data.len());
        out.extend_from_slice(&(self.n_qubits() as u32).to_le_bytes());
        out.push(flag);
        for z in data {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
        out
    }
}

/// Depolarizing probabilities for one-qubit gates (`p1`) and for each
/// factor of the two-qubit channel (`p2`), both multiplied by `scale`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p1: f64,
    pub p2: f64,
    pub scale: f64,
}

impl NoiseModel {
    pub fn new(p1: f64, p2: f64, scale: f64) -> Result<Self> {
        let ok = |p: f64| (0.0..=0.75).contains(&p);
        if !ok(p1) || !ok(p2) || !(0.0..=1.0).contains(&scale) {
            return Err(Error::InvalidArgument(format!(
                "noise needs 0 <= p1, p2 <= 3/4 and 0 <= scale <= 1 (got {p1}, {p2}, {scale})"
            )));
        }
        Ok(NoiseModel { p1, p2, scale })
    }

    pub fn scaled(&self, scale: f64) -> Result<Self> {
        NoiseModel::new(self.p1, self.p2, scale)
    }

    pub fn eff_p1(&self) -> f64 {
        self.p1 * self.scale
    }

    pub fn eff_p2(&self) -> f64 {
        self.p2 * self.scale
    }

    pub fn is_silent(&self) -> bool {
        self.eff_p1() == 0.0 && self.eff_p2() == 0.0
    }
}

/// Depolarizing probabilities from randomized-benchmarking error rates:
/// `p1 = 3/2 ε1`, `p2 = 1 - sqrt(1 - 5/4 ε2)`.
pub fn calibrate_noise(eps1: f64, eps2: f64) -> Result<NoiseModel> {
    let radicand = 1.0 - 1.25 * eps2;
    if !(eps1 >= 0.0 && eps2 >= 0.0) || radicand <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "error rates ({eps1}, {eps2}) are outside the calibration domain"
        )));
    }
    NoiseModel::new(1.5 * eps1, 1.0 - radicand.sqrt(), 1.0)
}

pub const DEFAULT_EPS1: f64 = 0.0016;
pub const DEFAULT_EPS2: f64 = 0.006;

pub fn calibrated() -> NoiseModel {
    calibrate_noise(DEFAULT_EPS1, DEFAULT_EPS2).expect("default rates are valid")
}

pub(crate) mod kernels {
    use num_complex::Complex64 as C64;

    /// `v <- m v` on one index bit.
    pub fn apply_1q(v: &mut [C64], bit: usize, m: &[C64; 4]) {
        let len = v.len();
        let mut hi = 0;
        while hi < len {
            for i in hi..hi + bit {
                let a0 = v[i];
                let a1 = v[i + bit];
                v[i] = m[0] * a0 + m[1] * a1;
                v[i + bit] = m[2] * a0 + m[3] * a1;
            }
            hi += 2 * bit;
        }
    }

    /// `v <- m v` on two index bits; `ba` is the more significant gate qubit
    /// in `m`'s basis.
    pub fn apply_2q(v: &mut [C64], ba: usize, bb: usize, m: &[C64; 16]) {
        let mask = ba | bb;
        for i in 0..v.len() {
            if i & mask != 0 {
                continue;
            }
            let idx = [i, i | bb, i | ba, i | ba | bb];
            let a = [v[idx[0]], v[idx[1]], v[idx[2]], v[idx[3]]];
            for r in 0..4 {
                v[idx[r]] = m[4 * r] * a[0] + m[4 * r + 1] * a[1] + m[4 * r + 2] * a[2] + m[4 * r + 3] * a[3];
            }
        }
    }

    /// One-qubit depolarizing channel on a row-major density matrix:
    /// `ρ -> (1 - 4p/3) ρ + (2p/3) tr_q(ρ) ⊗ I`.
    pub fn depolarize(rho: &mut [C64], n: usize, q: usize, p: f64) {
        if p == 0.0 {
            return;
        }
        let a = 1.0 - 4.0 * p / 3.0;
        let b = 2.0 * p / 3.0;
        let cb = 1usize << (n - 1 - q);
        let rb = cb << n;
        for i in 0..rho.len() {
            if i & (cb | rb) != 0 {
                continue;
            }
            let s = rho[i] + rho[i | rb | cb];
            rho[i] = rho[i] * a + s * b;
            rho[i | rb | cb] = rho[i | rb | cb] * a + s * b;
            rho[i | cb] *= a;
            rho[i | rb] *= a;
        }
    }

    /// Inverse of [`depolarize`] (requires `p < 3/4`).
    pub fn depolarize_inverse(rho: &mut [C64], n: usize, q: usize, p: f64) {
        if p == 0.0 {
            return;
        }
        let a = 1.0 - 4.0 * p / 3.0;
        let b = 2.0 * p / 3.0;
        let cb = 1usize << (n - 1 - q);
        let rb = cb << n;
        for i in 0..rho.len() {
            if i & (cb | rb) != 0 {
                continue;
            }
            let s = rho[i] + rho[i | rb | cb];
            rho[i] = (rho[i] - s * b) / a;
            rho[i | rb | cb] = (rho[i | rb | cb] - s * b) / a;
            rho[i | cb] /= a;
            rho[i | rb] /= a;
        }
    }
}

/// Dense gate matrix flattened row-major, plus its arity.
pub(crate) fn flat(m: &DMatrix<C64>) -> Vec<C64> {
    let d = m.nrows();
    (0..d * d).map(|k| m[(k / d, k % d)]).collect()
}

/// `v <- m v` for a one- or two-qubit matrix on `qubits` of an
/// `n_bits`-bit index space.
pub(crate) fn apply_matrix_bits(v: &mut [C64], n_bits: usize, qubits: &[usize], m: &[C64]) {
    match qubits.len() {
        1 => {
            let bit = 1usize << (n_bits - 1 - qubits[0]);
            kernels::apply_1q(v, bit, m.try_into().expect("2x2"));
        }
        2 => {
            let ba = 1usize << (n_bits - 1 - qubits[0]);
            let bb = 1usize << (n_bits - 1 - qubits[1]);
            kernels::apply_2q(v, ba, bb, m.try_into().expect("4x4"));
        }
        _ => unreachable!("gates act on one or two qubits"),
    }
}

/// `ρ <- m ρ`.
pub(crate) fn left_mul(rho: &mut [C64], n: usize, qubits: &[usize], m: &[C64]) {
    apply_matrix_bits(rho, 2 * n, qubits, m);
}

/// `ρ <- ρ m†`.
pub(crate) fn right_mul_adjoint(rho: &mut [C64], n: usize, qubits: &[usize], m: &[C64]) {
    let conj: Vec<C64> = m.iter().map(|z| z.conj()).collect();
    let shifted: Vec<usize> = qubits.iter().map(|q| q + n).collect();
    apply_matrix_bits(rho, 2 * n, &shifted, &conj);
}

pub(crate) fn adjoint_flat(m: &[C64]) -> Vec<C64> {
    let d = if m.len() == 4 { 2 } else { 4 };
    (0..d * d).map(|k| m[(k % d) * d + k / d].conj()).collect()
}

/// Apply a raw unitary to the state (no noise).
pub(crate) fn apply_unitary(state: &mut QuantumState, qubits: &[usize], m: &[C64]) {
    match state {
        QuantumState::Pure { n, amps } => apply_matrix_bits(amps, *n, qubits, m),
        QuantumState::Mixed { n, rho } => {
            left_mul(rho, *n, qubits, m);
            right_mul_adjoint(rho, *n, qubits, m);
        }
    }
}

pub(crate) fn apply_noise(rho: &mut [C64], n: usize, qubits: &[usize], noise: &NoiseModel) {
    let p = if qubits.len() == 1 { noise.eff_p1() } else { noise.eff_p2() };
    for &q in qubits {
        kernels::depolarize(rho, n, q, p);
    }
}

/// Unitary conjugation, then the depolarizing channel on every qubit the
/// gate touches (`p1` for one-qubit gates, `p2` per factor otherwise).
pub fn apply_gate(state: &mut QuantumState, gate: &Gate, values: &[f64], noise: Option<&NoiseModel>) -> Result<()> {
    let n = state.n_qubits();
    if let Some(&q) = gate.qubits.iter().find(|&&q| q >= n) {
        return Err(Error::IndexOutOfRange { index: q, size: n });
    }
    let m = flat(&crate::circuits::gate_matrix(gate, values)?);
    if !state.is_mixed() && noise.is_some() {
        return Err(Error::NoiseOnPureState);
    }
    apply_unitary(state, &gate.qubits, &m);
    if let (QuantumState::Mixed { n, rho }, Some(nm)) = (state, noise) {
        apply_noise(rho, *n, &gate.qubits, nm);
    }
    Ok(())
}

/// Run a circuit from `|0…0>`; a noise model selects the density-matrix
/// backend.
pub fn run(circuit: &Circuit, values: &[f64], noise: Option<&NoiseModel>) -> Result<QuantumState> {
    if values.len() != circuit.n_params() {
        return Err(Error::LengthMismatch(values.len(), circuit.n_params()));
    }
    let mut state = QuantumState::zero(circuit.n_qubits, noise.is_some());
    for g in &circuit.gates {
        apply_gate(&mut state, g, values, noise)?;
    }
    Ok(state)
}

/// Run on the density-matrix backend regardless of noise.
pub fn run_mixed(circuit: &Circuit, values: &[f64], noise: Option<&NoiseModel>) -> Result<QuantumState> {
    let mut state = QuantumState::zero(circuit.n_qubits, true);
    for g in &circuit.gates {
        apply_gate(&mut state, g, values, noise)?;
    }
    Ok(state)
}

/// Gate matrices of a bound circuit, flattened.
pub(crate) fn bound_matrices(circuit: &Circuit, values: &[f64]) -> Result<Vec<Vec<C64>>> {
    circuit
        .gates
        .iter()
        .map(|g| crate::circuits::gate_matrix(g, values).map(|m| flat(&m)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{GateKind, Param};

    #[test]
    fn calibration_constants() {
        let nm = calibrate_noise(0.0016, 0.006).unwrap();
        assert!((nm.p1 - 0.0024).abs() < 1e-15);
        assert!((nm.p2 - (1.0 - (1.0f64 - 0.0075).sqrt())).abs() < 1e-15);
        assert!(calibrate_noise(0.0, 0.8).is_err());
        let zero = calibrate_noise(0.0, 0.0).unwrap();
        assert_eq!((zero.p1, zero.p2), (0.0, 0.0));
    }

    #[test]
    fn noisy_x_flip() {
        let p = 0.01;
        let nm = NoiseModel::new(p, 0.0, 1.0).unwrap();
        let mut s = QuantumState::zero(1, true);
        apply_gate(&mut s, &Gate::new(GateKind::X, &[0], &[]), &[], Some(&nm)).unwrap();
        let rho = s.density_matrix();
        let z = rho[(0, 0)].re - rho[(1, 1)].re;
        assert!((z + (1.0 - 4.0 * p / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn full_depolarization() {
        let nm = NoiseModel::new(0.75, 0.0, 1.0).unwrap();
        let mut s = QuantumState::zero(1, true);
        apply_gate(&mut s, &Gate::new(GateKind::RY, &[0], &[Param::Literal(0.7)]), &[], Some(&nm)).unwrap();
        let rho = s.density_matrix();
        assert!((rho[(0, 0)].re - 0.5).abs() < 1e-15 && rho[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn pure_backend_rejects_noise() {
        let nm = calibrated();
        let mut s = QuantumState::zero(1, false);
        assert!(apply_gate(&mut s, &Gate::new(GateKind::X, &[0], &[]), &[], Some(&nm)).is_err());
    }
}
