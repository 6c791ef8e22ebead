//! Pauli strings and sums, fermionic ladder-operator products, and the
//! Jordan–Wigner map between them.
//!
//! Qubit `q` of an `n`-qubit string acts on bit `n - 1 - q` of a basis-state
//! index, so the leftmost letter of a word is the most significant bit. An
//! occupied fermionic mode is the qubit state `|1>`:
//! `c†_j = Z_0 ... Z_{j-1} (X_j - iY_j)/2`.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const PRUNE_TOL: f64 = 1e-12;
pub const DENSE_CAP: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor product of single-qubit Paulis, stored as symplectic bit masks
/// aligned with basis-state indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n: usize,
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        assert!(n <= 64);
        PauliString { n, x: 0, z: 0 }
    }

    pub fn from_ops(ops: &[Pauli]) -> Self {
        let mut s = Self::identity(ops.len());
        for (q, &p) in ops.iter().enumerate() {
            s.set(q, p);
        }
        s
    }

    /// Single non-identity letter on qubit `q`.
    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        let mut s = Self::identity(n);
        s.set(q, p);
        s
    }

    pub fn parse(word: &str) -> Result<Self> {
        let ops = word
            .chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::InvalidArgument(format!("bad Pauli letter `{other}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_ops(&ops))
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    fn bit(&self, q: usize) -> u64 {
        1u64 << (self.n - 1 - q)
    }

    pub fn get(&self, q: usize) -> Pauli {
        let b = self.bit(q);
        Pauli::from_bits(self.x & b != 0, self.z & b != 0)
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        assert!(q < self.n, "qubit {q} outside {}-qubit string", self.n);
        let b = self.bit(q);
        let (x, z) = p.bits();
        self.x = if x { self.x | b } else { self.x & !b };
        self.z = if z { self.z | b } else { self.z & !b };
    }

    pub fn ops(&self) -> Vec<Pauli> {
        (0..self.n).map(|q| self.get(q)).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    /// Bit-flip mask in basis-index coordinates.
    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    /// `P|b> = phase(b) |b ^ x_mask>`.
    #[inline]
    pub fn phase_on(&self, b: u64) -> C64 {
        let ny = (self.x & self.z).count_ones();
        let sign = (b & self.z).count_ones() & 1;
        i_pow(ny + 2 * sign)
    }

    pub fn word(&self) -> String {
        self.ops().into_iter().map(Pauli::letter).collect()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.word())
    }
}

#[inline]
fn i_pow(k: u32) -> C64 {
    match k & 3 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// `a·b = phase·c`.
pub fn pauli_product(a: &PauliString, b: &PauliString) -> Result<(C64, PauliString)> {
    if a.n != b.n {
        return Err(Error::LengthMismatch(a.n, b.n));
    }
    Ok(product_unchecked(a, b))
}

#[inline]
fn product_unchecked(a: &PauliString, b: &PauliString) -> (C64, PauliString) {
    let x = a.x ^ b.x;
    let z = a.z ^ b.z;
    // P = i^{x·z} X^x Z^z per qubit; moving Z^{z1} past X^{x2} costs (-1)^{z1 x2}.
    let e = (a.x & a.z).count_ones() + (b.x & b.z).count_ones() + 2 * (a.z & b.x).count_ones()
        + 3 * (x & z).count_ones();
    (i_pow(e), PauliString { n: a.n, x, z })
}

/// Weighted sum of Pauli strings on a fixed register.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n: usize,
    terms: BTreeMap<PauliString, C64>,
}

impl PauliSum {
    pub fn zero(n: usize) -> Self {
        PauliSum { n, terms: BTreeMap::new() }
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (C64, PauliString)>) -> Result<Self> {
        let mut s = Self::zero(n);
        for (c, p) in terms {
            if p.n != n {
                return Err(Error::LengthMismatch(p.n, n));
            }
            s.add_term(c, p);
        }
        s.prune();
        Ok(s)
    }

    pub fn identity(n: usize, c: C64) -> Self {
        let mut s = Self::zero(n);
        s.add_term(c, PauliString::identity(n));
        s.prune();
        s
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn add_term(&mut self, c: C64, p: PauliString) {
        debug_assert_eq!(p.n, self.n);
        *self.terms.entry(p).or_insert(C64::new(0.0, 0.0)) += c;
    }

    /// Drop terms with |coefficient| below the pruning tolerance.
    pub fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() > PRUNE_TOL);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, &C64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, p: &PauliString) -> C64 {
        self.terms.get(p).copied().unwrap_or_default()
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= c;
        }
        out.prune();
        out
    }

    pub fn add(&self, other: &PauliSum) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::LengthMismatch(self.n, other.n));
        }
        let mut out = self.clone();
        for (p, c) in &other.terms {
            out.add_term(*c, *p);
        }
        out.prune();
        Ok(out)
    }

    pub fn mul(&self, other: &PauliSum) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::LengthMismatch(self.n, other.n));
        }
        let mut out = Self::zero(self.n);
        for (pa, ca) in &self.terms {
            for (pb, cb) in &other.terms {
                let (ph, pc) = product_unchecked(pa, pb);
                out.add_term(ph * ca * cb, pc);
            }
        }
        out.prune();
        Ok(out)
    }

    pub fn adjoint(&self) -> Self {
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v = v.conj();
        }
        out
    }

    /// Largest imaginary part of any coefficient.
    pub fn hermiticity_defect(&self) -> f64 {
        self.terms.values().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn identity_coefficient(&self) -> C64 {
        self.coefficient(&PauliString::identity(self.n))
    }

    /// One line per term: `re im WORD`, sorted by word.
    pub fn to_text(&self) -> String {
        let mut lines: Vec<(String, C64)> = self.terms.iter().map(|(p, c)| (p.word(), *c)).collect();
        lines.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out = String::new();
        for (w, c) in lines {
            out.push_str(&format!("{:.17e} {:.17e} {}\n", c.re, c.im, w));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut n = None;
        let mut terms = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(Error::InvalidArgument(format!("bad Pauli line `{line}`")));
            }
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|e| Error::InvalidArgument(format!("`{s}`: {e}")))
            };
            let p = PauliString::parse(f[2])?;
            if *n.get_or_insert(p.n) != p.n {
                return Err(Error::LengthMismatch(n.unwrap(), p.n));
            }
            terms.push((C64::new(parse(f[0])?, parse(f[1])?), p));
        }
        Self::from_terms(n.unwrap_or(0), terms)
    }
}

/// Number of non-identity terms with nonzero weight.
pub fn count_terms(p: &PauliSum) -> usize {
    p.iter().filter(|(s, c)| !s.is_identity() && c.norm() > PRUNE_TOL).count()
}

/// Dense `2^n × 2^n` matrix of a Pauli sum; `n` is capped at [`DENSE_CAP`].
pub fn expectation_matrix(p: &PauliSum, n_qubits: usize) -> Result<DMatrix<C64>> {
    expectation_matrix_capped(p, n_qubits, DENSE_CAP)
}

pub fn expectation_matrix_capped(p: &PauliSum, n_qubits: usize, cap: usize) -> Result<DMatrix<C64>> {
    if n_qubits > cap {
        return Err(Error::CapExceeded { n: n_qubits, cap });
    }
    if p.n != n_qubits {
        return Err(Error::LengthMismatch(p.n, n_qubits));
    }
    let dim = 1usize << n_qubits;
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    for (s, c) in p.iter() {
        for b in 0..dim as u64 {
            let t = (b ^ s.x) as usize;
            m[(t, b as usize)] += c * s.phase_on(b);
        }
    }
    Ok(m)
}

/// Sum of products of ladder operators.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FermionOperator {
    pub terms: Vec<(C64, Vec<(usize, bool)>)>,
}

impl FermionOperator {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn term(c: C64, product: Vec<(usize, bool)>) -> Self {
        FermionOperator { terms: vec![(c, product)] }
    }

    pub fn create(i: usize) -> Self {
        Self::term(C64::new(1.0, 0.0), vec![(i, true)])
    }

    pub fn annihilate(i: usize) -> Self {
        Self::term(C64::new(1.0, 0.0), vec![(i, false)])
    }

    pub fn number(i: usize) -> Self {
        Self::term(C64::new(1.0, 0.0), vec![(i, true), (i, false)])
    }

    pub fn add(mut self, other: FermionOperator) -> Self {
        self.terms.extend(other.terms);
        self
    }

    pub fn scale(mut self, c: C64) -> Self {
        for t in &mut self.terms {
            t.0 *= c;
        }
        self
    }

    pub fn mul(&self, other: &FermionOperator) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ca, pa) in &self.terms {
            for (cb, pb) in &other.terms {
                let mut p = pa.clone();
                p.extend_from_slice(pb);
                terms.push((ca * cb, p));
            }
        }
        FermionOperator { terms }
    }

    pub fn adjoint(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(c, p)| (c.conj(), p.iter().rev().map(|&(i, d)| (i, !d)).collect()))
            .collect();
        FermionOperator { terms }
    }

    pub fn max_mode(&self) -> Option<usize> {
        self.terms.iter().flat_map(|(_, p)| p.iter().map(|&(i, _)| i)).max()
    }
}

/// Qubit image of a single ladder operator.
pub fn jw_ladder(mode: usize, dagger: bool, n_modes: usize) -> PauliSum {
    let mut xs = PauliString::identity(n_modes);
    for q in 0..mode {
        xs.set(q, Pauli::Z);
    }
    let mut ys = xs;
    xs.set(mode, Pauli::X);
    ys.set(mode, Pauli::Y);
    let half = C64::new(0.5, 0.0);
    let yc = if dagger { C64::new(0.0, -0.5) } else { C64::new(0.0, 0.5) };
    let mut s = PauliSum::zero(n_modes);
    s.add_term(half, xs);
    s.add_term(yc, ys);
    s
}

pub fn jordan_wigner(op: &FermionOperator, n_modes: usize) -> Result<PauliSum> {
    if let Some(m) = op.max_mode() {
        if m >= n_modes {
            return Err(Error::IndexOutOfRange { index: m, size: n_modes });
        }
    }
    let ladders: Vec<[PauliSum; 2]> =
        (0..n_modes).map(|j| [jw_ladder(j, false, n_modes), jw_ladder(j, true, n_modes)]).collect();
    let mut out = PauliSum::zero(n_modes);
    for (c, product) in &op.terms {
        let mut acc = PauliSum::identity(n_modes, *c);
        for &(i, d) in product {
            acc = acc.mul(&ladders[i][d as usize])?;
        }
        for (p, v) in acc.terms {
            out.add_term(v, p);
        }
    }
    out.prune();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(w: &str) -> PauliString {
        PauliString::parse(w).unwrap()
    }

    #[test]
    fn single_qubit_products() {
        assert_eq!(pauli_product(&ps("X"), &ps("Y")).unwrap(), (C64::new(0.0, 1.0), ps("Z")));
        assert_eq!(pauli_product(&ps("Y"), &ps("X")).unwrap(), (C64::new(0.0, -1.0), ps("Z")));
        assert_eq!(pauli_product(&ps("Z"), &ps("Z")).unwrap(), (C64::new(1.0, 0.0), ps("I")));
        assert_eq!(pauli_product(&ps("XZ"), &ps("YI")).unwrap(), (C64::new(0.0, 1.0), ps("ZZ")));
        assert!(pauli_product(&ps("X"), &ps("XX")).is_err());
    }

    #[test]
    fn number_operator_image() {
        let n = jordan_wigner(&FermionOperator::number(0), 1).unwrap();
        assert_eq!(n.len(), 2);
        assert!((n.coefficient(&ps("I")) - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((n.coefficient(&ps("Z")) - C64::new(-0.5, 0.0)).norm() < 1e-15);
        let m = expectation_matrix(&n, 1).unwrap();
        assert!((m[(0, 0)].re).abs() < 1e-15 && (m[(1, 1)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn creation_image_raises_zero_to_one() {
        let c = jordan_wigner(&FermionOperator::create(0), 1).unwrap();
        assert!((c.coefficient(&ps("X")) - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((c.coefficient(&ps("Y")) - C64::new(0.0, -0.5)).norm() < 1e-15);
        let m = expectation_matrix(&c, 1).unwrap();
        assert!((m[(1, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(m[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn anticommutator_vanishes() {
        let a = FermionOperator::annihilate(0).mul(&FermionOperator::create(1));
        let b = FermionOperator::create(1).mul(&FermionOperator::annihilate(0));
        assert!(jordan_wigner(&a.add(b), 2).unwrap().is_empty());
    }

    #[test]
    fn out_of_range_mode() {
        assert!(jordan_wigner(&FermionOperator::create(3), 3).is_err());
    }

    #[test]
    fn text_round_trip() {
        let s = PauliSum::from_terms(
            4,
            [(C64::new(0.25, 0.0), ps("XZIY")), (C64::new(-1.5, 0.125), ps("IIII"))],
        )
        .unwrap();
        let t = s.to_text();
        assert!(t.contains(" XZIY"));
        assert_eq!(PauliSum::from_text(&t).unwrap(), s);
    }

    #[test]
    fn counting_excludes_identity() {
        assert_eq!(count_terms(&PauliSum::zero(2)), 0);
        assert_eq!(count_terms(&PauliSum::identity(2, C64::new(3.0, 0.0))), 0);
        assert_eq!(count_terms(&PauliSum::identity(2, C64::new(1e-14, 0.0))), 0);
    }

    #[test]
    fn dense_cap() {
        assert!(expectation_matrix(&PauliSum::zero(13), 13).is_err());
    }
}
