//! Quasiparticle k-sums and the closed-form Lagrange equations for the
//! bath coupling `D` and bath level `λc`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::lattice::KMesh;
use crate::error::{Error, Result};
use crate::linalg::{eigh, eigh_real, sym_fn, to_complex};

/// `1 / (1 + e^{βx})` without overflow.
pub fn fermi(x: f64, beta: f64) -> f64 {
    let y = beta * x;
    if y > 0.0 {
        let e = (-y).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + y.exp())
    }
}

/// Fermi function of a Hermitian matrix.
pub fn fermi_matrix(h: &DMatrix<C64>, beta: f64) -> DMatrix<C64> {
    let (vals, vecs) = eigh(h);
    let f = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        vals.len(),
        vals.iter().map(|&e| C64::new(fermi(e, beta), 0.0)),
    ));
    &vecs * f * vecs.adjoint()
}

/// Eigen-decomposition of `R ε_k R† + λ` on the whole mesh; independent of
/// the chemical potential.
pub struct QpBands {
    pub evals: Vec<Vec<f64>>,
    pub evecs: Vec<DMatrix<C64>>,
}

impl QpBands {
    pub fn new(r: &DMatrix<f64>, lambda: &DMatrix<f64>, mesh: &KMesh) -> Self {
        let rc = to_complex(r);
        let rd = rc.adjoint();
        let lc = to_complex(lambda);
        let (evals, evecs) = mesh
            .eps_nonlocal
            .iter()
            .map(|e| eigh(&(&rc * e * &rd + &lc)))
            .unzip();
        QpBands { evals, evecs }
    }

    /// Electrons per orbital and spin at chemical potential `mu`.
    pub fn filling(&self, mu: f64, beta: f64) -> f64 {
        let n = self.evals.first().map_or(1, |v| v.len());
        let total: f64 = self.evals.iter().map(|v| v.iter().map(|&e| fermi(e - mu, beta)).sum::<f64>()).sum();
        total / (self.evals.len() * n) as f64
    }
}

pub const MU_TOL: f64 = 1e-12;

/// Chemical potential reaching `target` filling, by bisection.
pub fn find_mu(bands: &QpBands, beta: f64, target: f64) -> Result<f64> {
    let lo_e = bands.evals.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let hi_e = bands.evals.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo_e.is_finite() || !hi_e.is_finite() {
        return Err(Error::InvalidArgument("non-finite quasiparticle bands".into()));
    }
    let pad = 1.0 + 50.0 / beta;
    let (mut lo, mut hi) = (lo_e - pad, hi_e + pad);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f = bands.filling(mid, beta);
        if (f - target).abs() < MU_TOL || hi - lo < 1e-15 {
            return Ok(mid);
        }
        if f < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Mesh averages entering the quasiparticle equations.
#[derive(Clone, Debug)]
pub struct QpFill {
    /// `Δp_αβ = ⟨[f(H_qp)]_βα⟩_k`.
    pub delta_p: DMatrix<f64>,
    /// `[⟨ε_k R† f(H_qp)⟩_k]_βα`, the right-hand side for `Dᵀ`.
    pub kinetic_rhs: DMatrix<f64>,
}

/// Fermi-function evaluation of the frequency sums at fixed `μ`, with
/// `H_qp(k) = R ε_k R† + λ − μ`.
pub fn qp_fill(r: &DMatrix<f64>, lambda: &DMatrix<f64>, mu: f64, beta: f64, mesh: &KMesh) -> QpFill {
    let bands = QpBands::new(r, lambda, mesh);
    qp_fill_bands(r, &bands, mu, beta, mesh)
}

pub fn qp_fill_bands(r: &DMatrix<f64>, bands: &QpBands, mu: f64, beta: f64, mesh: &KMesh) -> QpFill {
    let n = r.nrows();
    let rd = to_complex(r).adjoint();
    let mut f_sum = DMatrix::<C64>::zeros(n, n);
    let mut k_sum = DMatrix::<C64>::zeros(n, n);
    for ((vals, vecs), eps) in bands.evals.iter().zip(&bands.evecs).zip(&mesh.eps_nonlocal) {
        let fd = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            vals.iter().map(|&e| C64::new(fermi(e - mu, beta), 0.0)),
        ));
        let f = vecs * fd * vecs.adjoint();
        k_sum += eps * &rd * &f;
        f_sum += f;
    }
    let nk = mesh.n_k() as f64;
    QpFill {
        delta_p: f_sum.transpose().map(|z| z.re / nk),
        kinetic_rhs: k_sum.transpose().map(|z| z.re / nk),
    }
}

/// `g(x) = √(x(1−x))`.
pub fn g(x: f64) -> f64 {
    (x * (1.0 - x)).sqrt()
}

pub fn g_prime(x: f64) -> f64 {
    (1.0 - 2.0 * x) / (2.0 * g(x))
}

const SPECTRUM_EDGE: f64 = 1e-12;

fn check_open_unit(vals: &[f64]) -> Result<()> {
    match vals.iter().find(|&&x| !(x > SPECTRUM_EDGE && x < 1.0 - SPECTRUM_EDGE)) {
        Some(&x) => Err(Error::DegenerateBath(x)),
        None => Ok(()),
    }
}

/// `√(Δp(1 − Δp))`.
pub fn sqrt_factor(delta_p: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_open_unit(&eigh_real(delta_p).0)?;
    Ok(sym_fn(delta_p, g))
}

/// Solves `√(Δp(1−Δp)) Dᵀ = rhs`.
pub fn solve_d(delta_p: &DMatrix<f64>, kinetic_rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let s = sqrt_factor(delta_p)?;
    let dt = s.lu().solve(kinetic_rhs).ok_or(Error::DegenerateBath(0.0))?;
    Ok(dt.transpose())
}

/// `λc = −λ − [Σ D_γδ R_ηγ ∂(√(Δp(1−Δp)))_ηδ / ∂Δp_αβ + c.c.]`, with the
/// derivative of the matrix function from divided differences in the
/// eigenbasis of `Δp`.
pub fn lambda_c(delta_p: &DMatrix<f64>, d: &DMatrix<f64>, r: &DMatrix<f64>, lambda: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (x, q) = eigh_real(delta_p);
    check_open_unit(&x)?;
    let n = x.len();
    let gdd = DMatrix::from_fn(n, n, |i, j| {
        if (x[i] - x[j]).abs() > 1e-10 {
            (g(x[i]) - g(x[j])) / (x[i] - x[j])
        } else {
            g_prime(0.5 * (x[i] + x[j]))
        }
    });
    let w = r * d;
    let inner = (q.transpose() * w * &q).component_mul(&gdd);
    let grad = &q * inner * q.transpose();
    Ok(-lambda - grad * 2.0)
}

/// `Σ(ω) = ω (1 − (R†R)⁻¹) + R⁻¹ λ (R†)⁻¹`.
pub fn self_energy(r: &DMatrix<f64>, lambda: &DMatrix<f64>, omega: f64) -> Result<DMatrix<f64>> {
    let n = r.nrows();
    let rinv = r.clone().try_inverse().ok_or(Error::SingularR)?;
    let z_inv = (r.transpose() * r).try_inverse().ok_or(Error::SingularR)?;
    Ok((DMatrix::identity(n, n) - z_inv) * omega + &rinv * lambda * rinv.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fermi_is_stable() {
        assert_eq!(fermi(10.0, 1e6), 0.0);
        assert_eq!(fermi(-10.0, 1e6), 1.0);
        assert!((fermi(0.0, 300.0) - 0.5).abs() < 1e-16);
    }

    #[test]
    fn half_filled_identity_d() {
        let dp = DMatrix::identity(2, 2) * 0.5;
        let rhs = DMatrix::identity(2, 2) * 0.3;
        let d = solve_d(&dp, &rhs).unwrap();
        assert!((d[(0, 0)] - 0.6).abs() < 1e-14 && d[(0, 1)].abs() < 1e-14);
    }

    #[test]
    fn boundary_occupation_is_degenerate() {
        let dp = DMatrix::from_row_slice(1, 1, &[1.0]);
        assert!(matches!(solve_d(&dp, &dp), Err(Error::DegenerateBath(_))));
    }

    #[test]
    fn symmetric_point_has_no_derivative_term() {
        let dp = DMatrix::from_row_slice(1, 1, &[0.5]);
        let one = DMatrix::from_row_slice(1, 1, &[0.7]);
        let lc = lambda_c(&dp, &one, &one, &DMatrix::from_row_slice(1, 1, &[0.3])).unwrap();
        assert!((lc[(0, 0)] + 0.3).abs() < 1e-15);
    }
}
