//! Gates, parameterised circuits and the ansatz builders.
//!
//! Two-qubit gate matrices use the basis `|a b>` where `a` is the first
//! listed qubit (most significant).

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::pauli::Pauli;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateKind {
    RX,
    RY,
    RZ,
    X,
    H,
    CNOT,
    FSim,
    /// `exp(iθ P⊗Q)`.
    Rpq(Pauli, Pauli),
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::CNOT | GateKind::FSim | GateKind::Rpq(..) => 2,
            _ => 1,
        }
    }

    pub fn n_params(self) -> usize {
        match self {
            GateKind::X | GateKind::H | GateKind::CNOT => 0,
            GateKind::FSim => 2,
            _ => 1,
        }
    }

    pub fn tag(self) -> String {
        match self {
            GateKind::RX => "RX".into(),
            GateKind::RY => "RY".into(),
            GateKind::RZ => "RZ".into(),
            GateKind::X => "X".into(),
            GateKind::H => "H".into(),
            GateKind::CNOT => "CNOT".into(),
            GateKind::FSim => "FSIM".into(),
            GateKind::Rpq(p, q) => format!("R{}{}", p.letter(), q.letter()),
        }
    }

    fn from_tag(tag: &str) -> Result<GateKind> {
        let axis = |c: char| match c {
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            _ => Err(Error::InvalidArgument(format!("unknown gate `{tag}`"))),
        };
        Ok(match tag {
            "RX" => GateKind::RX,
            "RY" => GateKind::RY,
            "RZ" => GateKind::RZ,
            "X" => GateKind::X,
            "H" => GateKind::H,
            "CNOT" => GateKind::CNOT,
            "FSIM" => GateKind::FSim,
            t if t.len() == 3 && t.starts_with('R') => {
                let c: Vec<char> = t.chars().collect();
                GateKind::Rpq(axis(c[1])?, axis(c[2])?)
            }
            _ => return Err(Error::InvalidArgument(format!("unknown gate `{tag}`"))),
        })
    }
}

/// A gate angle: a literal, or `scale · θ_index` for a named parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Param {
    Literal(f64),
    Named { index: usize, scale: f64 },
}

impl Param {
    pub fn named(index: usize) -> Param {
        Param::Named { index, scale: 1.0 }
    }

    pub fn value(&self, values: &[f64]) -> f64 {
        match *self {
            Param::Literal(v) => v,
            Param::Named { index, scale } => scale * values[index],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub params: Vec<Param>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: &[usize], params: &[Param]) -> Self {
        Gate { kind, qubits: qubits.to_vec(), params: params.to_vec() }
    }

    fn angles(&self, values: &[f64]) -> Result<Vec<f64>> {
        self.params
            .iter()
            .map(|p| match *p {
                Param::Named { index, .. } if index >= values.len() => {
                    Err(Error::UnboundParameter(format!("#{index}")))
                }
                _ => Ok(p.value(values)),
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
    pub param_names: Vec<String>,
    /// Current bindings, one per named parameter.
    pub values: Vec<f64>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit { n_qubits, gates: Vec::new(), param_names: Vec::new(), values: Vec::new() }
    }

    pub fn n_params(&self) -> usize {
        self.param_names.len()
    }

    pub fn add_param(&mut self, name: impl Into<String>) -> Param {
        self.param_names.push(name.into());
        self.values.push(0.0);
        Param::named(self.param_names.len() - 1)
    }

    pub fn push(&mut self, kind: GateKind, qubits: &[usize], params: &[Param]) {
        assert_eq!(qubits.len(), kind.arity(), "{} takes {} qubits", kind.tag(), kind.arity());
        assert_eq!(params.len(), kind.n_params(), "{} takes {} angles", kind.tag(), kind.n_params());
        assert!(qubits.iter().all(|&q| q < self.n_qubits), "qubit out of range");
        assert!(qubits.len() < 2 || qubits[0] != qubits[1], "repeated qubit");
        self.gates.push(Gate::new(kind, qubits, params));
    }

    pub fn with_values(&self, values: &[f64]) -> Result<Circuit> {
        if values.len() != self.n_params() {
            return Err(Error::LengthMismatch(values.len(), self.n_params()));
        }
        let mut c = self.clone();
        c.values = values.to_vec();
        Ok(c)
    }

    pub fn count_kind(&self, pred: impl Fn(GateKind) -> bool) -> usize {
        self.gates.iter().filter(|g| pred(g.kind)).count()
    }

    pub fn cnot_count(&self) -> usize {
        self.count_kind(|k| k == GateKind::CNOT)
    }

    pub fn two_qubit_count(&self) -> usize {
        self.count_kind(|k| k.arity() == 2)
    }

    /// Replace every RPQ gate by its elementary-gate fragment.
    pub fn decomposed(&self) -> Circuit {
        let mut out = Circuit { gates: Vec::new(), ..self.clone() };
        for g in &self.gates {
            match g.kind {
                GateKind::Rpq(..) => out.gates.extend(decompose_rpq(g)),
                _ => out.gates.push(g.clone()),
            }
        }
        out
    }

    /// Every named parameter is referenced by at least one gate.
    pub fn all_params_used(&self) -> bool {
        let mut used = vec![false; self.n_params()];
        for g in &self.gates {
            for p in &g.params {
                if let Param::Named { index, .. } = p {
                    used[*index] = true;
                }
            }
        }
        used.into_iter().all(|u| u)
    }

    /// Gates referencing each parameter.
    pub fn param_usage(&self) -> Vec<Vec<(usize, usize)>> {
        let mut usage = vec![Vec::new(); self.n_params()];
        for (gi, g) in self.gates.iter().enumerate() {
            for (slot, p) in g.params.iter().enumerate() {
                if let Param::Named { index, .. } = p {
                    usage[*index].push((gi, slot));
                }
            }
        }
        usage
    }

    /// Line format: a `QUBITS n` header, one `PARAM name value` line per
    /// parameter, then `GATE q0 [q1] [angle …]` where an angle is a literal,
    /// a name, or `scale*name`.
    pub fn to_text(&self) -> String {
        let mut s = format!("QUBITS {}\n", self.n_qubits);
        for (n, v) in self.param_names.iter().zip(&self.values) {
            let _ = writeln!(s, "PARAM {n} {v:e}");
        }
        for g in &self.gates {
            s.push_str(&g.kind.tag());
            for q in &g.qubits {
                let _ = write!(s, " {q}");
            }
            for p in &g.params {
                match *p {
                    Param::Literal(v) => {
                        let _ = write!(s, " {v:e}");
                    }
                    Param::Named { index, scale } if scale == 1.0 => {
                        let _ = write!(s, " {}", self.param_names[index]);
                    }
                    Param::Named { index, scale } => {
                        let _ = write!(s, " {scale:e}*{}", self.param_names[index]);
                    }
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Circuit> {
        let bad = |l: &str| Error::InvalidArgument(format!("bad circuit line `{l}`"));
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let head = lines.next().ok_or_else(|| bad(""))?;
        let n = head
            .strip_prefix("QUBITS ")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| bad(head))?;
        let mut c = Circuit::new(n);
        for line in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f[0] == "PARAM" {
                if f.len() != 3 {
                    return Err(bad(line));
                }
                c.add_param(f[1]);
                *c.values.last_mut().unwrap() = f[2].parse().map_err(|_| bad(line))?;
                continue;
            }
            let kind = GateKind::from_tag(f[0])?;
            if f.len() != 1 + kind.arity() + kind.n_params() {
                return Err(bad(line));
            }
            let qubits = f[1..=kind.arity()]
                .iter()
                .map(|q| q.parse::<usize>().map_err(|_| bad(line)))
                .collect::<Result<Vec<_>>>()?;
            let mut params = Vec::new();
            for tok in &f[1 + kind.arity()..] {
                if let Ok(v) = tok.parse::<f64>() {
                    params.push(Param::Literal(v));
                    continue;
                }
                let (scale, name) = match tok.split_once('*') {
                    Some((s, name)) => (s.parse::<f64>().map_err(|_| bad(line))?, name),
                    None => (1.0, *tok),
                };
                let index = c
                    .param_names
                    .iter()
                    .position(|p| p == name)
                    .ok_or_else(|| Error::UnboundParameter(name.to_string()))?;
                params.push(Param::Named { index, scale });
            }
            if qubits.iter().any(|&q| q >= n) {
                return Err(bad(line));
            }
            c.gates.push(Gate { kind, qubits, params });
        }
        Ok(c)
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn pauli_matrix(p: Pauli) -> DMatrix<C64> {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    match p {
        Pauli::I => DMatrix::identity(2, 2),
        Pauli::X => DMatrix::from_row_slice(2, 2, &[z, one, one, z]),
        Pauli::Y => DMatrix::from_row_slice(2, 2, &[z, c(0.0, -1.0), c(0.0, 1.0), z]),
        Pauli::Z => DMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
    }
}

/// `exp(-iθP/2)` for a single-qubit Pauli `P`.
fn rotation(p: Pauli, theta: f64) -> DMatrix<C64> {
    let (s, co) = (theta / 2.0).sin_cos();
    DMatrix::identity(2, 2) * c(co, 0.0) - pauli_matrix(p) * c(0.0, s)
}

/// Unitary of a gate at the given parameter values.
pub fn gate_matrix(g: &Gate, values: &[f64]) -> Result<DMatrix<C64>> {
    let a = g.angles(values)?;
    Ok(kind_matrix(g.kind, &a))
}

pub fn kind_matrix(kind: GateKind, a: &[f64]) -> DMatrix<C64> {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    match kind {
        GateKind::RX => rotation(Pauli::X, a[0]),
        GateKind::RY => rotation(Pauli::Y, a[0]),
        GateKind::RZ => rotation(Pauli::Z, a[0]),
        GateKind::X => pauli_matrix(Pauli::X),
        GateKind::H => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            DMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)])
        }
        GateKind::CNOT => DMatrix::from_row_slice(
            4,
            4,
            &[one, z, z, z, z, one, z, z, z, z, z, one, z, z, one, z],
        ),
        GateKind::FSim => {
            let (s, co) = a[0].sin_cos();
            let mut m = DMatrix::<C64>::zeros(4, 4);
            m[(0, 0)] = one;
            m[(1, 1)] = c(co, 0.0);
            m[(2, 2)] = c(co, 0.0);
            m[(1, 2)] = c(0.0, -s);
            m[(2, 1)] = c(0.0, -s);
            m[(3, 3)] = C64::from_polar(1.0, -a[1]);
            m
        }
        GateKind::Rpq(p, q) => {
            let pq = crate::linalg::kron(&pauli_matrix(p), &pauli_matrix(q));
            let (s, co) = a[0].sin_cos();
            DMatrix::<C64>::identity(4, 4) * c(co, 0.0) + pq * c(0.0, s)
        }
    }
}

/// Derivative of the gate unitary with respect to each of its angle slots.
pub fn kind_derivatives(kind: GateKind, a: &[f64]) -> Vec<DMatrix<C64>> {
    match kind {
        GateKind::RX | GateKind::RY | GateKind::RZ => {
            let p = match kind {
                GateKind::RX => Pauli::X,
                GateKind::RY => Pauli::Y,
                _ => Pauli::Z,
            };
            vec![pauli_matrix(p) * kind_matrix(kind, a) * c(0.0, -0.5)]
        }
        GateKind::FSim => {
            let (s, co) = a[0].sin_cos();
            let mut dt = DMatrix::<C64>::zeros(4, 4);
            dt[(1, 1)] = c(-s, 0.0);
            dt[(2, 2)] = c(-s, 0.0);
            dt[(1, 2)] = c(0.0, -co);
            dt[(2, 1)] = c(0.0, -co);
            let mut dp = DMatrix::<C64>::zeros(4, 4);
            dp[(3, 3)] = C64::from_polar(1.0, -a[1]) * c(0.0, -1.0);
            vec![dt, dp]
        }
        GateKind::Rpq(p, q) => {
            let pq = crate::linalg::kron(&pauli_matrix(p), &pauli_matrix(q));
            vec![pq * kind_matrix(kind, a) * c(0.0, 1.0)]
        }
        _ => Vec::new(),
    }
}

/// Frequency `ω` such that the energy is `a + b cos(ω θ - c)` in a single
/// angle slot, or `None` when the dependence is not a single sinusoid.
pub fn slot_frequency(kind: GateKind, slot: usize) -> Option<f64> {
    match (kind, slot) {
        (GateKind::RX | GateKind::RY | GateKind::RZ, 0) => Some(1.0),
        (GateKind::Rpq(..), 0) => Some(2.0),
        (GateKind::FSim, 1) => Some(1.0),
        _ => None,
    }
}

/// `exp(iθ P⊗Q)` as `(U_P ⊗ U_Q) · CNOT · RZ(-2θ) · CNOT · (U_P† ⊗ U_Q†)`
/// with `U_X = RY(π/2)`, `U_Y = RZ(π/2) RY(π/2)`, `U_Z = I`; gates are
/// listed in time order.
pub fn decompose_rpq(g: &Gate) -> Vec<Gate> {
    let GateKind::Rpq(p, q) = g.kind else {
        return vec![g.clone()];
    };
    let (i, j) = (g.qubits[0], g.qubits[1]);
    let lit = |v: f64| Param::Literal(v);
    let basis_in = |axis: Pauli, qb: usize, out: &mut Vec<Gate>| match axis {
        Pauli::X => out.push(Gate::new(GateKind::RY, &[qb], &[lit(-FRAC_PI_2)])),
        Pauli::Y => {
            out.push(Gate::new(GateKind::RZ, &[qb], &[lit(-FRAC_PI_2)]));
            out.push(Gate::new(GateKind::RY, &[qb], &[lit(-FRAC_PI_2)]));
        }
        _ => {}
    };
    let basis_out = |axis: Pauli, qb: usize, out: &mut Vec<Gate>| match axis {
        Pauli::X => out.push(Gate::new(GateKind::RY, &[qb], &[lit(FRAC_PI_2)])),
        Pauli::Y => {
            out.push(Gate::new(GateKind::RY, &[qb], &[lit(FRAC_PI_2)]));
            out.push(Gate::new(GateKind::RZ, &[qb], &[lit(FRAC_PI_2)]));
        }
        _ => {}
    };
    let theta = match g.params[0] {
        Param::Literal(v) => Param::Literal(-2.0 * v),
        Param::Named { index, scale } => Param::Named { index, scale: -2.0 * scale },
    };
    let mut out = Vec::new();
    basis_in(p, i, &mut out);
    basis_in(q, j, &mut out);
    out.push(Gate::new(GateKind::CNOT, &[i, j], &[]));
    out.push(Gate::new(GateKind::RZ, &[j], &[theta]));
    out.push(Gate::new(GateKind::CNOT, &[i, j], &[]));
    basis_out(p, i, &mut out);
    basis_out(q, j, &mut out);
    out
}

/// Two-determinant block `cos(θ/2)|bath↑ bath↓> + sin(θ/2)|imp↑ imp↓>`
/// on the given qubits.
fn push_mr_block(c: &mut Circuit, imp_up: usize, bath_up: usize, imp_dn: usize, bath_dn: usize, theta: Param) {
    c.push(GateKind::X, &[bath_up], &[]);
    c.push(GateKind::X, &[bath_dn], &[]);
    c.push(GateKind::RY, &[imp_up], &[theta]);
    c.push(GateKind::CNOT, &[imp_up, bath_up], &[]);
    c.push(GateKind::CNOT, &[imp_up, imp_dn], &[]);
    c.push(GateKind::CNOT, &[imp_up, bath_dn], &[]);
}

/// Single-site multireference circuit on qubits (imp↑, bath↑, imp↓, bath↓).
/// At `θ = 2 arcsin √n0` the impurity occupation per spin is `n0`.
pub fn build_mr_nc1() -> Circuit {
    let mut c = Circuit::new(4);
    let th = c.add_param("theta");
    push_mr_block(&mut c, 0, 1, 2, 3, th);
    c
}

pub fn mr_angle(n0: f64) -> f64 {
    2.0 * n0.clamp(0.0, 1.0).sqrt().asin()
}

/// Multireference excitation-preserving ansatz for two impurities: the
/// single-site block on each dimer `d` (qubits `d, 2+d, 4+d, 6+d`), then
/// `n_layers` brick-wall blocks of fSim gates on even then odd pairs.
pub fn build_mrep(n_c: usize, n_layers: usize) -> Result<Circuit> {
    if n_c != 2 {
        return Err(Error::InvalidArgument(format!("MREP is built for two impurities, got {n_c}")));
    }
    let n = 8;
    let mut c = Circuit::new(n);
    let t0 = c.add_param("prep_0");
    let t1 = c.add_param("prep_1");
    push_mr_block(&mut c, 0, 2, 4, 6, t0);
    push_mr_block(&mut c, 1, 3, 5, 7, t1);
    for layer in 0..n_layers {
        for start in [0usize, 1] {
            let mut a = start;
            while a + 1 < n {
                let th = c.add_param(format!("l{layer}_{a}{}_theta", a + 1));
                let ph = c.add_param(format!("l{layer}_{a}{}_phi", a + 1));
                c.push(GateKind::FSim, &[a, a + 1], &[th, ph]);
                a += 2;
            }
        }
    }
    Ok(c)
}

pub const LDCA_BLOCK: [(Pauli, Pauli); 5] = [
    (Pauli::X, Pauli::Y),
    (Pauli::Y, Pauli::X),
    (Pauli::X, Pauli::X),
    (Pauli::Z, Pauli::Z),
    (Pauli::Y, Pauli::Y),
];

/// Default determinant for LDCA/HEA: impurity-up and bath-down orbitals
/// filled (first and last quarter of the register).
pub fn default_reference(n_qubits: usize) -> Vec<usize> {
    let k = n_qubits / 4;
    (0..k).chain(n_qubits - k..n_qubits).collect()
}

/// Low-depth circuit ansatz. A fixed `RY(π n_q)` layer writes the reference
/// determinant, one `RZ` per qubit follows, then each cycle runs
/// `n_qubits/2` rounds of even-pair and odd-pair blocks of five rotations.
pub fn build_ldca(n_qubits: usize, n_cycles: usize) -> Result<Circuit> {
    build_ldca_with(n_qubits, n_cycles, &LDCA_BLOCK, &default_reference(n_qubits))
}

pub fn build_ldca_with(
    n_qubits: usize,
    n_cycles: usize,
    block: &[(Pauli, Pauli)],
    occupied: &[usize],
) -> Result<Circuit> {
    if n_qubits % 2 != 0 || n_qubits == 0 {
        return Err(Error::InvalidArgument(format!("LDCA needs an even register, got {n_qubits}")));
    }
    let mut c = Circuit::new(n_qubits);
    for q in 0..n_qubits {
        let angle = if occupied.contains(&q) { PI } else { 0.0 };
        c.push(GateKind::RY, &[q], &[Param::Literal(angle)]);
    }
    for q in 0..n_qubits {
        let p = c.add_param(format!("z{q}"));
        c.push(GateKind::RZ, &[q], &[p]);
    }
    for cycle in 0..n_cycles {
        for round in 0..n_qubits / 2 {
            for start in [0usize, 1] {
                let mut a = start;
                while a + 1 < n_qubits {
                    for &(p, q) in block {
                        let name = format!("c{cycle}_r{round}_{a}{}_{}{}", a + 1, p.letter(), q.letter());
                        let th = c.add_param(name);
                        c.push(GateKind::Rpq(p, q), &[a, a + 1], &[th]);
                    }
                    a += 2;
                }
            }
        }
    }
    Ok(c)
}

/// Hardware-efficient single-site ansatz on the determinant with imp↑ and
/// bath↓ filled: RY layer, CNOT chain, RY layer.
pub fn build_hea_nc1() -> Circuit {
    let mut c = Circuit::new(4);
    for q in default_reference(4) {
        c.push(GateKind::X, &[q], &[]);
    }
    for q in 0..4 {
        let p = c.add_param(format!("a{q}"));
        c.push(GateKind::RY, &[q], &[p]);
    }
    for q in 0..3 {
        c.push(GateKind::CNOT, &[q, q + 1], &[]);
    }
    for q in 0..4 {
        let p = c.add_param(format!("b{q}"));
        c.push(GateKind::RY, &[q], &[p]);
    }
    c
}

pub fn build_product_ry(n_qubits: usize) -> Circuit {
    let mut c = Circuit::new(n_qubits);
    for q in 0..n_qubits {
        let p = c.add_param(format!("r{q}"));
        c.push(GateKind::RY, &[q], &[p]);
    }
    c
}

/// Insert an identity CNOT pair after every CNOT.
pub fn fold_cnots(circuit: &Circuit, n_foldings: usize) -> Circuit {
    let mut out = Circuit { gates: Vec::new(), ..circuit.clone() };
    for g in &circuit.gates {
        out.gates.push(g.clone());
        if g.kind == GateKind::CNOT {
            for _ in 0..2 * n_foldings {
                out.gates.push(g.clone());
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fsim_swap_point() {
        let m = kind_matrix(GateKind::FSim, &[FRAC_PI_2, 0.0]);
        assert!((m[(1, 2)] - c(0.0, -1.0)).norm() < 1e-15);
        assert!(m[(1, 1)].norm() < 1e-15);
        let id = kind_matrix(GateKind::FSim, &[0.0, 0.0]);
        assert!((id - DMatrix::<C64>::identity(4, 4)).norm() < 1e-15);
    }

    #[test]
    fn census() {
        assert_eq!(build_mrep(2, 4).unwrap().n_params(), 58);
        assert_eq!(build_mrep(2, 0).unwrap().n_params(), 2);
        assert!(build_mrep(1, 4).is_err());
        let ldca = build_ldca(8, 1).unwrap();
        assert_eq!(ldca.n_params(), 148);
        let d = ldca.decomposed();
        assert_eq!(d.cnot_count(), 280);
        assert_eq!(d.gates.len(), 1108);
        assert!(build_ldca(7, 1).is_err());
        let hea = build_hea_nc1();
        assert_eq!((hea.n_params(), hea.cnot_count()), (8, 3));
        let pr = build_product_ry(4);
        assert_eq!((pr.n_params(), pr.two_qubit_count()), (4, 0));
        assert_eq!(build_mr_nc1().cnot_count(), 3);
        for circ in [build_mrep(2, 4).unwrap(), ldca, hea, pr, build_mr_nc1()] {
            assert!(circ.all_params_used());
        }
    }

    #[test]
    fn zz_fragment_has_no_basis_changes() {
        let mut c = Circuit::new(2);
        let t = c.add_param("t");
        c.push(GateKind::Rpq(Pauli::Z, Pauli::Z), &[0, 1], &[t]);
        let kinds: Vec<GateKind> = decompose_rpq(&c.gates[0]).iter().map(|g| g.kind).collect();
        assert_eq!(kinds, vec![GateKind::CNOT, GateKind::RZ, GateKind::CNOT]);
    }

    #[test]
    fn text_round_trip() {
        let c = build_ldca(4, 1).unwrap().decomposed();
        let back = Circuit::from_text(&c.to_text()).unwrap();
        assert_eq!(back.gates.len(), c.gates.len());
        assert_eq!(back.param_names, c.param_names);
        for (a, b) in back.gates.iter().zip(&c.gates) {
            assert_eq!(a.kind, b.kind);
            assert_eq!(a.qubits, b.qubits);
        }
    }
}
