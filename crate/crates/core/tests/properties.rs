use std::f64::consts::PI;

use bfd_core::energy::{hamiltonian, x_norm};
use bfd_core::evolution::{diagonalize, undiagonalize};
use bfd_core::init::random_state;
use bfd_core::{classify_case, params_from_alphas, BfdError, FieldState, Grid, GridSpec, Model, ModelParams};
use proptest::prelude::*;

fn model(eps: f64, mu: f64, dim: usize) -> std::sync::Arc<Model> {
    let p = ModelParams::new(0.6, eps, mu, 1.0, -0.1, 0.2, -1.0 / 6.0, 0.2).unwrap();
    let spec = if dim == 1 {
        GridSpec::new_1d(32, 2.0 * PI).unwrap()
    } else {
        GridSpec::square(16, 2.0 * PI).unwrap()
    };
    Model::new(p, Grid::new(spec).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn alphas_sum_to_one_third(a1 in 0.0..2.0f64, beta in 0.0..2.0f64, a2 in -2.0..1.0f64) {
        let p = params_from_alphas(a1, beta, a2, 0.5, 0.1, 0.1, 1.0).unwrap();
        prop_assert!((p.a + p.b + p.c + p.d - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn classification_is_total_on_admissible_coefficients(
        a in -1.0..=0.0f64,
        b in prop_oneof![Just(0.0), 0.01..1.0f64],
        c in prop_oneof![Just(0.0), -1.0..-0.01f64],
        d in prop_oneof![Just(0.0), 0.01..1.0f64],
        same in any::<bool>(),
    ) {
        let d = if same { b } else { d };
        let p = ModelParams::new(0.5, 0.1, 0.1, 1.0, a, b, c, d).unwrap();
        let case = classify_case(&p).unwrap();
        let expect = match (b > 0.0, d > 0.0, c < 0.0) {
            (true, true, true) if b != d => (1, 3, 3),
            (true, true, true) | (true, false, false) => (2, 2, 2),
            (true, false, true) => (3, 4, 3),
            (true, true, false) => (4, 1, 2),
            (false, true, true) => (5, 3, 4),
            (false, true, false) => (6, 1, 3),
            (false, false, true) => (7, 1, 1),
            (false, false, false) => (8, 0, 1),
        };
        prop_assert_eq!((case.case_id, case.k, case.k_prime), expect);
        prop_assert_eq!(case.hamiltonian, b == d);
    }

    #[test]
    fn positive_a_or_c_is_ill_posed(a in 0.01..1.0f64, c in 0.01..1.0f64, which in 0..2usize) {
        let (a, c) = if which == 0 { (a, -0.1) } else { (-0.1, c) };
        let p = ModelParams::new(0.5, 0.1, 0.1, 1.0, a, 0.1, c, 0.1).unwrap();
        prop_assert!(matches!(classify_case(&p), Err(BfdError::IllPosed(_))));
    }

    #[test]
    fn x_norm_is_homogeneous_and_monotone(seed in any::<u64>(), lam in -5.0..5.0f64, s in 0.0..3.0f64) {
        let m = model(0.1, 0.1, 2);
        let st = random_state(&m, seed, 1.0, 1.0).unwrap();
        let base = x_norm(&st.zeta, s, 1, 0.1).unwrap();
        let scaled = x_norm(&st.zeta.scaled(lam), s, 1, 0.1).unwrap();
        prop_assert!((scaled - lam.abs() * base).abs() <= 1e-12 * base.max(1.0));
        prop_assert!(x_norm(&st.zeta, s + 0.5, 1, 0.1).unwrap() >= base);
        prop_assert!(x_norm(&st.zeta, s, 2, 0.1).unwrap() >= x_norm(&st.zeta, s, 0, 0.1).unwrap());
    }

    #[test]
    fn diagonalization_round_trips(seed in any::<u64>(), eps in 0.0..0.5f64, mu in 0.001..0.5f64, dim in 1..=2usize) {
        let m = model(eps, mu, dim);
        let st = random_state(&m, seed, 1.5, 1.0).unwrap();
        let back = undiagonalize(&m, &diagonalize(&m, &st).unwrap()).unwrap();
        let (za, va) = st.spectra();
        let (zb, vb) = back.spectra();
        let mut num = 0.0;
        let mut den = 0.0;
        for (x, y) in za.iter().chain(va.iter().flatten()).zip(zb.iter().chain(vb.iter().flatten())) {
            num += (x - y).norm_sqr();
            den += x.norm_sqr();
        }
        prop_assert!(num.sqrt() <= 1e-12 * den.sqrt());
    }

    #[test]
    fn linear_hamiltonian_is_quadratic(seed in any::<u64>(), lam in -3.0..3.0f64) {
        let m = model(0.0, 0.05, 2);
        let st = random_state(&m, seed, 1.0, 1.0).unwrap();
        let h = hamiltonian(&m, &st);
        let scaled = FieldState::new(0.0, st.zeta.scaled(lam), st.v.iter().map(|c| c.scaled(lam)).collect()).unwrap();
        let hs = hamiltonian(&m, &scaled);
        prop_assert!(h > 0.0);
        prop_assert!((hs - lam * lam * h).abs() <= 1e-12 * h.max(1.0) * lam * lam + 1e-15);
    }
}
