use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use embedvqe::circuits::{build_ldca, build_mrep};
use embedvqe::ed::{ground_state, spectrum, SectorLabel};
use embedvqe::embedding::{build_embedding_hamiltonian, EmbeddingHamiltonian};
use embedvqe::estimator::{energy_and_gradient, finite_difference_gradient, parameter_shift_gradient, Observable};
use embedvqe::noization::{rotate_hamiltonian, BasisRotation, RotatedHamiltonian};
use embedvqe::simulator::calibrated;
use embedvqe::vqe::{multi_start, random_init, VqeOptions};
use embedvqe::C64;

fn random_unitary(n: usize, seed: u64) -> DMatrix<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    a.qr().q()
}

fn rotation(v: DMatrix<C64>) -> BasisRotation {
    let n = v.nrows();
    BasisRotation { v, occupations: vec![f64::NAN; n], step: 1 }
}

fn dimer(seed: u64) -> EmbeddingHamiltonian {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = || DMatrix::from_fn(2, 2, |_, _| rng.gen_range(-0.5..0.5));
    let (t, d, l) = (m(), m(), m());
    build_embedding_hamiltonian(2, &(&t + t.transpose()), 1.3, &d, &(&l + l.transpose())).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn rotation_preserves_spectrum(seed in 0u64..1000, u in 0.0f64..3.0, d in -1.0f64..1.0, lc in -0.5f64..0.5) {
        let h = EmbeddingHamiltonian::single_site(u, d, lc).unwrap().fermion;
        let base = RotatedHamiltonian::new(h.clone()).unwrap();
        let rot = rotate_hamiltonian(&base, &rotation(random_unitary(2, seed))).unwrap();
        let a = spectrum(&h, None).unwrap();
        let b = spectrum(&rot.h, None).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn rotations_compose(s1 in 0u64..1000, s2 in 0u64..1000) {
        let h = EmbeddingHamiltonian::single_site(0.8, -0.3, 0.05).unwrap().fermion;
        let base = RotatedHamiltonian::new(h).unwrap();
        let (v1, v2) = (random_unitary(2, s1), random_unitary(2, s2 + 7));
        let two = rotate_hamiltonian(&rotate_hamiltonian(&base, &rotation(v1.clone())).unwrap(), &rotation(v2.clone())).unwrap();
        let one = rotate_hamiltonian(&base, &rotation(&v1 * &v2)).unwrap();
        prop_assert!((&two.h.one_body - &one.h.one_body).iter().all(|z| z.norm() < 1e-10));
        prop_assert!((&two.basis - &one.basis).iter().all(|z| z.norm() < 1e-10));
    }
}

#[test]
fn sector_spectrum_is_part_of_full_spectrum() {
    let h = dimer(3).fermion;
    let full = spectrum(&h, None).unwrap();
    let sector = spectrum(&h, Some(SectorLabel::half_filled(h.n_modes))).unwrap();
    assert_eq!(sector.len(), 36);
    for e in sector {
        assert!(full.iter().any(|f| (f - e).abs() < 1e-9));
    }
    let gs = ground_state(&h, Some(SectorLabel::half_filled(8))).unwrap();
    assert!((gs.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn gradients_agree() {
    let h = dimer(5).fermion.to_pauli().unwrap();
    let obs = Observable::compile(&h);
    for noise in [None, Some(calibrated())] {
        let mrep = build_mrep(2, 2).unwrap();
        let x = random_init(mrep.n_params(), 9);
        let (_, adj) = energy_and_gradient(&mrep, &x, &obs, noise.as_ref()).unwrap();
        let fd = finite_difference_gradient(&mrep, &x, &obs, noise.as_ref(), 1e-6).unwrap();
        for i in 0..x.len() {
            assert!((adj[i] - fd[i]).abs() < 1e-6, "adjoint {} vs fd {}", adj[i], fd[i]);
        }
        // every LDCA angle enters as a single sinusoid
        let ldca = build_ldca(8, 1).unwrap();
        let x = random_init(ldca.n_params(), 10);
        let (_, adj) = energy_and_gradient(&ldca, &x, &obs, noise.as_ref()).unwrap();
        let ps = parameter_shift_gradient(&ldca, &x, &obs, noise.as_ref()).unwrap();
        for i in 0..x.len() {
            assert!((adj[i] - ps[i]).abs() < 1e-9, "adjoint {} vs shift {}", adj[i], ps[i]);
        }
    }
}

#[test]
fn multi_start_is_deterministic() {
    let h = dimer(8).fermion.to_pauli().unwrap();
    let c = build_mrep(2, 1).unwrap();
    let opts = VqeOptions { max_iter: 200, ..Default::default() };
    let a = multi_start(&h, &c, &opts, 3, 42, None).unwrap();
    let b = multi_start(&h, &c, &opts, 3, 42, None).unwrap();
    assert_eq!(a.best_params, b.best_params);
    assert_eq!(a.best_energy.to_bits(), b.best_energy.to_bits());
    assert_eq!(a.start_energies, b.start_energies);
}
