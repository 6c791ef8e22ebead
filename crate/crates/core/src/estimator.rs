//! Exact expectation values, 1-RDM measurement, analytic and adjoint
//! gradients, sinusoidal single-parameter minimisation (parameter shift and
//! Rotosolve), zero-noise extrapolation and optional shot sampling.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;

use crate::circuits::{fold_cnots, kind_derivatives, slot_frequency, Circuit, GateKind, Param};
use crate::error::{Error, Result};
use crate::pauli::{jordan_wigner, FermionOperator, PauliSum};
use crate::simulator::{
    adjoint_flat, apply_noise, apply_unitary, bound_matrices, kernels, left_mul, right_mul_adjoint, run,
    NoiseModel, QuantumState,
};

pub const IMAG_TOL: f64 = 1e-9;

/// A Pauli sum grouped by bit-flip pattern, with each group's phases
/// folded into a diagonal: `O|b> = Σ_x d_x(b) |b ^ x>`.
#[derive(Clone, Debug)]
pub struct Observable {
    n: usize,
    groups: Vec<(usize, Vec<C64>)>,
    hermitian_defect: f64,
}

impl Observable {
    pub fn compile(p: &PauliSum) -> Self {
        let n = p.n_qubits();
        let dim = 1usize << n;
        let mut by_x: BTreeMap<u64, Vec<C64>> = BTreeMap::new();
        for (s, c) in p.iter() {
            let d = by_x.entry(s.x_mask()).or_insert_with(|| vec![C64::new(0.0, 0.0); dim]);
            for (b, v) in d.iter_mut().enumerate() {
                *v += c * s.phase_on(b as u64);
            }
        }
        Observable {
            n,
            groups: by_x.into_iter().map(|(x, d)| (x as usize, d)).collect(),
            hermitian_defect: p.hermiticity_defect(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_defect <= IMAG_TOL
    }

    pub fn expectation_complex(&self, state: &QuantumState) -> Result<C64> {
        if state.n_qubits() != self.n {
            return Err(Error::LengthMismatch(state.n_qubits(), self.n));
        }
        let mut acc = C64::new(0.0, 0.0);
        match state {
            QuantumState::Pure { amps, .. } => {
                for (x, d) in &self.groups {
                    for (b, dv) in d.iter().enumerate() {
                        acc += amps[b ^ x].conj() * dv * amps[b];
                    }
                }
            }
            QuantumState::Mixed { rho, .. } => {
                let dim = 1usize << self.n;
                for (x, d) in &self.groups {
                    for (b, dv) in d.iter().enumerate() {
                        acc += dv * rho[b * dim + (b ^ x)];
                    }
                }
            }
        }
        Ok(acc)
    }

    /// Real expectation of a Hermitian observable.
    pub fn expectation(&self, state: &QuantumState) -> Result<f64> {
        if !self.is_hermitian() {
            return Err(Error::NonHermitian(self.hermitian_defect));
        }
        let v = self.expectation_complex(state)?;
        if v.im.abs() > IMAG_TOL * v.re.abs().max(1.0) {
            return Err(Error::NonHermitian(v.im.abs()));
        }
        Ok(v.re)
    }

    /// `O ψ`.
    pub fn apply(&self, amps: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); amps.len()];
        for (x, d) in &self.groups {
            for (b, dv) in d.iter().enumerate() {
                out[b ^ x] += dv * amps[b];
            }
        }
        out
    }

    /// Row-major dense matrix.
    pub fn dense_flat(&self) -> Vec<C64> {
        let dim = 1usize << self.n;
        let mut m = vec![C64::new(0.0, 0.0); dim * dim];
        for (x, d) in &self.groups {
            for (b, dv) in d.iter().enumerate() {
                m[(b ^ x) * dim + b] += dv;
            }
        }
        m
    }
}

pub fn expectation(state: &QuantumState, obs: &PauliSum) -> Result<f64> {
    if obs.n_qubits() != state.n_qubits() {
        return Err(Error::LengthMismatch(obs.n_qubits(), state.n_qubits()));
    }
    Observable::compile(obs).expectation(state)
}

/// Per-spin one-particle reduced density matrix `D_pq = <c†_p c_q>`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rdm1 {
    pub matrix: DMatrix<C64>,
}

impl Rdm1 {
    pub fn new(matrix: DMatrix<C64>) -> Self {
        let h = (&matrix + matrix.adjoint()) * C64::new(0.5, 0.0);
        Rdm1 { matrix: h }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Occupation numbers in descending order.
    pub fn occupations(&self) -> Vec<f64> {
        let (mut v, _) = crate::linalg::eigh(&self.matrix);
        v.reverse();
        v
    }

    /// Frobenius norm of the off-diagonal part.
    pub fn off_diagonal_norm(&self) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += self.matrix[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }
}

struct RdmOps {
    /// `(p, q, observable)` for `p <= q`.
    ops: Vec<(usize, usize, Observable)>,
}

fn rdm_ops(n_modes: usize) -> Arc<RdmOps> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<RdmOps>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(ops) = cache.lock().unwrap().get(&n_modes) {
        return ops.clone();
    }
    let mut ops = Vec::new();
    for p in 0..n_modes {
        for q in p..n_modes {
            let op = FermionOperator::create(p).mul(&FermionOperator::annihilate(q));
            let ps = jordan_wigner(&op, n_modes).expect("modes in range");
            ops.push((p, q, Observable::compile(&ps)));
        }
    }
    let ops = Arc::new(RdmOps { ops });
    cache.lock().unwrap().insert(n_modes, ops.clone());
    ops
}

/// Full spin-orbital 1-RDM `<c†_p c_q>` over every qubit of the state,
/// assembled from Jordan–Wigner Pauli expectations.
pub fn measure_rdm1_full(state: &QuantumState) -> Result<DMatrix<C64>> {
    let n = state.n_qubits();
    let ops = rdm_ops(n);
    let mut d = DMatrix::<C64>::zeros(n, n);
    for (p, q, o) in &ops.ops {
        let v = o.expectation_complex(state)?;
        d[(*p, *q)] = v;
        d[(*q, *p)] = v.conj();
    }
    Ok(d)
}

pub const SPIN_CHECK_TOL: f64 = 1e-6;

/// Spin-resolved blocks of a full spin-orbital 1-RDM.
pub fn spin_blocks(full: &DMatrix<C64>) -> (DMatrix<C64>, DMatrix<C64>) {
    let m = full.nrows() / 2;
    (full.view((0, 0), (m, m)).into_owned(), full.view((m, m), (m, m)).into_owned())
}

/// Per-spin 1-RDM over the `2 n_c` impurity+bath orbitals; the up block, or
/// the average of both spin blocks when `spin_average` is set.
pub fn measure_rdm1(state: &QuantumState, n_c: usize, spin_average: bool) -> Result<Rdm1> {
    if state.n_qubits() != 4 * n_c {
        return Err(Error::LengthMismatch(state.n_qubits(), 4 * n_c));
    }
    let full = measure_rdm1_full(state)?;
    Ok(reduce_spin(&full, spin_average, !state.is_mixed()))
}

pub fn reduce_spin(full: &DMatrix<C64>, spin_average: bool, warn: bool) -> Rdm1 {
    let (up, dn) = spin_blocks(full);
    if !spin_average {
        return Rdm1::new(up);
    }
    let diff = crate::linalg::frobenius(&(&up - &dn));
    if warn && diff > SPIN_CHECK_TOL {
        log::warn!("spin blocks of the 1-RDM differ by {diff:.3e}; the state leaks out of the paramagnetic sector");
    }
    Rdm1::new((up + dn) * C64::new(0.5, 0.0))
}

pub fn energy(circuit: &Circuit, values: &[f64], obs: &Observable, noise: Option<&NoiseModel>) -> Result<f64> {
    obs.expectation(&run(circuit, values, noise)?)
}

/// Energy and exact gradient by reverse-mode (adjoint) differentiation.
/// Noise channels are undone with their inverses on the way back, so the
/// effective depolarizing probabilities must stay below 3/4.
pub fn energy_and_gradient(
    circuit: &Circuit,
    values: &[f64],
    obs: &Observable,
    noise: Option<&NoiseModel>,
) -> Result<(f64, Vec<f64>)> {
    if values.len() != circuit.n_params() {
        return Err(Error::LengthMismatch(values.len(), circuit.n_params()));
    }
    let mats = bound_matrices(circuit, values)?;
    let mut state = run(circuit, values, noise)?;
    let e = obs.expectation(&state)?;
    let mut grad = vec![0.0; values.len()];
    let n = circuit.n_qubits;
    match &mut state {
        QuantumState::Pure { amps, .. } => {
            let mut lam = obs.apply(amps);
            for (g, m) in circuit.gates.iter().zip(&mats).rev() {
                let inv = adjoint_flat(m);
                crate::simulator::apply_matrix_bits(amps, n, &g.qubits, &inv);
                if g.params.iter().any(|p| matches!(p, Param::Named { .. })) {
                    let angles: Vec<f64> = g.params.iter().map(|p| p.value(values)).collect();
                    for (slot, dm) in kind_derivatives(g.kind, &angles).iter().enumerate() {
                        if let Param::Named { index, scale } = g.params[slot] {
                            let mut mu = amps.clone();
                            let dmf = crate::simulator::flat(dm);
                            crate::simulator::apply_matrix_bits(&mut mu, n, &g.qubits, &dmf);
                            let ip: C64 = lam.iter().zip(&mu).map(|(l, m)| l.conj() * m).sum();
                            grad[index] += 2.0 * scale * ip.re;
                        }
                    }
                }
                crate::simulator::apply_matrix_bits(&mut lam, n, &g.qubits, &inv);
            }
        }
        QuantumState::Mixed { rho, .. } => {
            if let Some(nm) = noise {
                if nm.eff_p1().max(nm.eff_p2()) > 0.5 {
                    return Err(Error::InvalidArgument("adjoint gradient needs p <= 1/2".into()));
                }
            }
            let mut lam = obs.dense_flat();
            for (g, m) in circuit.gates.iter().zip(&mats).rev() {
                let inv = adjoint_flat(m);
                if let Some(nm) = noise {
                    let p = if g.qubits.len() == 1 { nm.eff_p1() } else { nm.eff_p2() };
                    for &q in &g.qubits {
                        kernels::depolarize_inverse(rho, n, q, p);
                    }
                    apply_noise(&mut lam, n, &g.qubits, nm);
                }
                left_mul(rho, n, &g.qubits, &inv);
                right_mul_adjoint(rho, n, &g.qubits, &inv);
                if g.params.iter().any(|p| matches!(p, Param::Named { .. })) {
                    let angles: Vec<f64> = g.params.iter().map(|p| p.value(values)).collect();
                    for (slot, dm) in kind_derivatives(g.kind, &angles).iter().enumerate() {
                        if let Param::Named { index, scale } = g.params[slot] {
                            let mut b = rho.clone();
                            left_mul(&mut b, n, &g.qubits, &crate::simulator::flat(dm));
                            right_mul_adjoint(&mut b, n, &g.qubits, m);
                            let ip: C64 = lam.iter().zip(&b).map(|(l, x)| l.conj() * x).sum();
                            grad[index] += 2.0 * scale * ip.re;
                        }
                    }
                }
                left_mul(&mut lam, n, &g.qubits, &inv);
                right_mul_adjoint(&mut lam, n, &g.qubits, &inv);
            }
        }
    }
    Ok((e, grad))
}

/// Central finite-difference gradient.
pub fn finite_difference_gradient(
    circuit: &Circuit,
    values: &[f64],
    obs: &Observable,
    noise: Option<&NoiseModel>,
    step: f64,
) -> Result<Vec<f64>> {
    let mut x = values.to_vec();
    let mut g = vec![0.0; values.len()];
    for k in 0..values.len() {
        let x0 = x[k];
        x[k] = x0 + step;
        let ep = energy(circuit, &x, obs, noise)?;
        x[k] = x0 - step;
        let em = energy(circuit, &x, obs, noise)?;
        x[k] = x0;
        g[k] = (ep - em) / (2.0 * step);
    }
    Ok(g)
}

/// Frequency of every parameter, or an error naming the first parameter
/// whose energy dependence is not a single sinusoid.
pub fn sinusoidal_frequencies(circuit: &Circuit) -> Result<Vec<f64>> {
    circuit
        .param_usage()
        .iter()
        .enumerate()
        .map(|(k, uses)| {
            let freq = match uses.as_slice() {
                [(gi, slot)] => {
                    let g = &circuit.gates[*gi];
                    let scale = match g.params[*slot] {
                        Param::Named { scale, .. } => scale.abs(),
                        Param::Literal(_) => 1.0,
                    };
                    slot_frequency(g.kind, *slot).map(|w| w * scale)
                }
                _ => None,
            };
            freq.ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "parameter `{}` does not enter as a single sinusoid",
                    circuit.param_names[k]
                ))
            })
        })
        .collect()
}

/// Analytic gradient by the two-point shift rule (single-sinusoid
/// parameters only).
pub fn parameter_shift_gradient(
    circuit: &Circuit,
    values: &[f64],
    obs: &Observable,
    noise: Option<&NoiseModel>,
) -> Result<Vec<f64>> {
    let freqs = sinusoidal_frequencies(circuit)?;
    let mut x = values.to_vec();
    let mut g = vec![0.0; values.len()];
    for (k, w) in freqs.iter().enumerate() {
        let s = FRAC_PI_2 / w;
        let x0 = x[k];
        x[k] = x0 + s;
        let ep = energy(circuit, &x, obs, noise)?;
        x[k] = x0 - s;
        let em = energy(circuit, &x, obs, noise)?;
        x[k] = x0;
        g[k] = w * (ep - em) / 2.0;
    }
    Ok(g)
}

const FLAT_TOL: f64 = 1e-12;

/// Minimiser of `a + b cos(u - c)` from samples at `u = 0, ±π/2`; returns
/// `(u*, b)`.
fn sinusoid_argmin(e0: f64, ep: f64, em: f64) -> (f64, f64) {
    let a = 0.5 * (ep + em);
    let bs = 0.5 * (ep - em);
    let bc = e0 - a;
    let b = bs.hypot(bc);
    if b < FLAT_TOL {
        return (0.0, b);
    }
    let mut u = bs.atan2(bc) + PI;
    if u > PI {
        u -= 2.0 * PI;
    }
    (u, b)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShiftMinimum {
    pub theta: f64,
    pub energy: f64,
    pub flat: bool,
}

/// Three-evaluation analytic minimisation of a one-parameter circuit.
pub fn parameter_shift_minimize(circuit: &Circuit, h: &Observable, noise: Option<&NoiseModel>) -> Result<ShiftMinimum> {
    if circuit.n_params() != 1 {
        return Err(Error::InvalidArgument(format!(
            "parameter-shift minimisation needs one free parameter, found {}",
            circuit.n_params()
        )));
    }
    let w = sinusoidal_frequencies(circuit)?[0];
    let s = FRAC_PI_2 / w;
    let e0 = energy(circuit, &[0.0], h, noise)?;
    let ep = energy(circuit, &[s], h, noise)?;
    let em = energy(circuit, &[-s], h, noise)?;
    let (u, b) = sinusoid_argmin(e0, ep, em);
    if b < FLAT_TOL {
        return Ok(ShiftMinimum { theta: 0.0, energy: e0, flat: true });
    }
    let theta = u / w;
    Ok(ShiftMinimum { theta, energy: energy(circuit, &[theta], h, noise)?, flat: false })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RotosolveResult {
    pub params: Vec<f64>,
    pub energy: f64,
    /// Energy after every single-parameter update.
    pub history: Vec<f64>,
}

/// Sequential coordinate-wise analytic minimisation.
pub fn rotosolve(
    circuit: &Circuit,
    h: &Observable,
    init: &[f64],
    n_cycles: usize,
    noise: Option<&NoiseModel>,
) -> Result<RotosolveResult> {
    let freqs = sinusoidal_frequencies(circuit)?;
    let mut x = init.to_vec();
    let mut e = energy(circuit, &x, h, noise)?;
    let mut history = Vec::new();
    for _ in 0..n_cycles {
        for (k, w) in freqs.iter().enumerate() {
            let s = FRAC_PI_2 / w;
            let x0 = x[k];
            x[k] = x0 + s;
            let ep = energy(circuit, &x, h, noise)?;
            x[k] = x0 - s;
            let em = energy(circuit, &x, h, noise)?;
            let (u, b) = sinusoid_argmin(e, ep, em);
            x[k] = if b < FLAT_TOL { x0 } else { x0 + u / w };
            e = energy(circuit, &x, h, noise)?;
            history.push(e);
        }
    }
    Ok(RotosolveResult { params: x, energy: e, history })
}

/// Two-point linear zero-noise extrapolation: every CNOT is followed by
/// `n_foldings` identity CNOT pairs, scaling CNOT noise by `1 + 2 n_foldings`.
pub fn zne_linear(
    circuit: &Circuit,
    values: &[f64],
    h: &Observable,
    noise: Option<&NoiseModel>,
    n_foldings: usize,
) -> Result<f64> {
    if circuit.count_kind(|k| k == GateKind::CNOT) == 0 {
        return Err(Error::InvalidArgument("no CNOT to fold".into()));
    }
    if n_foldings == 0 {
        return Err(Error::InvalidArgument("n_foldings must be at least 1".into()));
    }
    let e1 = energy(circuit, values, h, noise)?;
    let ef = energy(&fold_cnots(circuit, n_foldings), values, h, noise)?;
    let level = 1.0 + 2.0 * n_foldings as f64;
    Ok(e1 - (ef - e1) / (level - 1.0))
}

/// Shot-sampled estimate: every Pauli term is measured `n_shots` times in
/// its eigenbasis.
pub fn sample_expectation<R: Rng>(state: &QuantumState, obs: &PauliSum, n_shots: usize, rng: &mut R) -> Result<f64> {
    if n_shots == 0 {
        return Err(Error::InvalidArgument("n_shots must be positive".into()));
    }
    let mut total = 0.0;
    for (p, c) in obs.iter() {
        if c.im.abs() > IMAG_TOL {
            return Err(Error::NonHermitian(c.im.abs()));
        }
        if p.is_identity() {
            total += c.re;
            continue;
        }
        let single = PauliSum::from_terms(obs.n_qubits(), [(C64::new(1.0, 0.0), *p)])?;
        let ev = Observable::compile(&single).expectation(state)?;
        let p_plus = (0.5 * (1.0 + ev)).clamp(0.0, 1.0);
        let plus = (0..n_shots).filter(|_| rng.gen::<f64>() < p_plus).count();
        total += c.re * (2.0 * plus as f64 - n_shots as f64) / n_shots as f64;
    }
    Ok(total)
}

/// Apply a bare unitary gate list to a state (used by oracles in tests).
pub fn apply_circuit_unitary(state: &mut QuantumState, circuit: &Circuit, values: &[f64]) -> Result<()> {
    for (g, m) in circuit.gates.iter().zip(bound_matrices(circuit, values)?) {
        apply_unitary(state, &g.qubits, &m);
    }
    Ok(())
}
