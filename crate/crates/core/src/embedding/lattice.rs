use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub n_c: usize,
    pub t: f64,
    pub u: f64,
    pub mesh: usize,
    pub beta: f64,
    /// Electrons per site and spin.
    pub filling: f64,
}

impl LatticeSpec {
    /// Single-site cell, 40×40 mesh, β = 200.
    pub fn single_site(u: f64) -> Self {
        LatticeSpec { n_c: 1, t: -0.25, u, mesh: 40, beta: 200.0, filling: 0.5 }
    }

    /// Two-site cell along x, 32×32 mesh, β = 300.
    pub fn dimer(u: f64) -> Self {
        LatticeSpec { n_c: 2, t: -0.25, u, mesh: 32, beta: 300.0, filling: 0.5 }
    }

    pub fn with_u(&self, u: f64) -> Self {
        LatticeSpec { u, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n_c == 1 || self.n_c == 2) {
            return Err(Error::InvalidArgument(format!("n_c must be 1 or 2, got {}", self.n_c)));
        }
        if self.mesh < 2 {
            return Err(Error::InvalidArgument(format!("mesh must be at least 2, got {}", self.mesh)));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidArgument(format!("beta must be positive, got {}", self.beta)));
        }
        if !(self.filling > 0.0 && self.filling < 1.0) {
            return Err(Error::InvalidArgument(format!("filling must lie in (0, 1), got {}", self.filling)));
        }
        Ok(())
    }

    pub fn n_k(&self) -> usize {
        self.mesh * self.mesh
    }
}

/// Free dispersion of the chosen tiling at cell momentum `k`.
///
/// `n_c = 2` uses a two-site cell along x:
/// `ε(k) = 2t cos ky · I + t(1 + cos kx) σx + t sin kx σy`.
pub fn dispersion(spec: &LatticeSpec, k: (f64, f64)) -> DMatrix<C64> {
    let (kx, ky) = k;
    let t = spec.t;
    match spec.n_c {
        1 => DMatrix::from_element(1, 1, C64::new(2.0 * t * (kx.cos() + ky.cos()), 0.0)),
        _ => {
            let d = 2.0 * t * ky.cos();
            let x = t * (1.0 + kx.cos());
            let y = t * kx.sin();
            DMatrix::from_row_slice(2, 2, &[C64::new(d, 0.0), C64::new(x, -y), C64::new(x, y), C64::new(d, 0.0)])
        }
    }
}

/// Uniform `mesh × mesh` grid `k = 2π (i, j) / mesh`.
pub fn k_points(mesh: usize) -> Vec<(f64, f64)> {
    let step = 2.0 * PI / mesh as f64;
    (0..mesh).flat_map(|i| (0..mesh).map(move |j| (i as f64 * step, j as f64 * step))).collect()
}

/// Dispersion on the mesh, split into its mesh average (the intra-cell
/// hopping) and the remainder.
#[derive(Clone, Debug)]
pub struct KMesh {
    pub eps_avg: DMatrix<f64>,
    pub eps_nonlocal: Vec<DMatrix<C64>>,
}

impl KMesh {
    pub fn new(spec: &LatticeSpec) -> Result<Self> {
        spec.validate()?;
        let eps: Vec<DMatrix<C64>> = k_points(spec.mesh).into_iter().map(|k| dispersion(spec, k)).collect();
        let n = spec.n_c;
        let mut avg = DMatrix::<C64>::zeros(n, n);
        for e in &eps {
            avg += e;
        }
        avg /= C64::new(eps.len() as f64, 0.0);
        let avg_c = avg.clone();
        let eps_nonlocal = eps.into_iter().map(|e| e - &avg_c).collect();
        Ok(KMesh { eps_avg: avg.map(|z| z.re), eps_nonlocal })
    }

    pub fn n_k(&self) -> usize {
        self.eps_nonlocal.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_edges() {
        let s = LatticeSpec::single_site(0.0);
        assert!((dispersion(&s, (0.0, 0.0))[(0, 0)].re + 1.0).abs() < 1e-15);
        assert!((dispersion(&s, (PI, PI))[(0, 0)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dimer_average_is_intra_cell_hopping() {
        let s = LatticeSpec::dimer(0.0);
        let m = KMesh::new(&s).unwrap();
        assert!((m.eps_avg[(0, 1)] - s.t).abs() < 1e-14);
        assert!(m.eps_avg[(0, 0)].abs() < 1e-14);
    }
}
