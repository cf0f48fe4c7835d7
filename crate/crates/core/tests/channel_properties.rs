use ddc_core::capacity::{coherent_information_full, coherent_information_state};
use ddc_core::channel::{
    apply, coherent_input_output, complementary_apply, environment_states, DensityMatrix,
};
use ddc_core::kernel::{kernel_entry, kernel_matrix};
use ddc_core::{ChannelParams, C64};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const ENV_DIM: usize = 256;

fn param_strategy() -> impl Strategy<Value = (f64, f64)> {
    // lambda > 0 kept where ENV_DIM levels hold the environment vectors
    (0.0f64..1.0, prop_oneof![Just(-0.5), Just(-0.25), Just(0.0), 0.05f64..0.3])
}

fn dim_for(p: &ChannelParams) -> usize {
    p.max_dimension().clip(4)
}

#[test]
fn outputs_of_random_states_are_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let grid = [(0.1, -0.5), (1.0, -0.25), (2.0, 0.0), (0.5, 0.3), (4.0, 0.5)];
    for i in 0..100 {
        let (gamma, lambda) = grid[i % grid.len()];
        let p = ChannelParams::new(gamma, lambda, 1.0).unwrap();
        let rho = DensityMatrix::random(&mut rng, dim_for(&p));
        let out = apply(&rho, &p).unwrap();
        let d = out.diagnostics().unwrap();
        assert!(d.is_valid(), "state {i} at {p:?}: {d:?}");
        // the diagonal is untouched
        for n in 0..rho.dim {
            assert!((out.entries[(n, n)] - rho.entries[(n, n)]).norm() < 1e-15);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn complementary_output_is_measure_and_prepare((gamma, lambda) in param_strategy(), seed in any::<u64>()) {
        // Tr_S U (rho x |0><0|) U^dag = sum_n rho_nn |e_n><e_n|, so only the diagonal matters
        let p = ChannelParams::new(gamma, lambda, 1.0).unwrap();
        let dim = dim_for(&p);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = DensityMatrix::random(&mut rng, dim);
        let diag = DensityMatrix::diagonal(&rho.diagonal_values());
        let env = complementary_apply(&rho, &p, ENV_DIM).unwrap();
        let env_diag = complementary_apply(&diag, &p, ENV_DIM).unwrap();
        prop_assert!(env.max_abs_diff(&env_diag) < 1e-14);

        let states = environment_states(&p, dim, ENV_DIM).unwrap();
        let e = states[0].amplitudes.len();
        let mut expect = DMatrix::from_element(e, e, C64::new(0.0, 0.0));
        for (n, s) in states.iter().enumerate() {
            expect += &s.amplitudes * s.amplitudes.adjoint() * rho.entries[(n, n)];
        }
        let diff = (&env.entries - &expect).iter().fold(0.0f64, |a, z| a.max(z.norm()));
        prop_assert!(diff < 1e-14, "{}", diff);
    }

    #[test]
    fn coherent_information_routes_agree((gamma, lambda) in param_strategy(), seed in any::<u64>()) {
        let p = ChannelParams::new(gamma, lambda, 1.0).unwrap();
        let dim = dim_for(&p);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = DensityMatrix::random(&mut rng, dim);
        let k = kernel_matrix(&p, dim).unwrap();
        let gram = coherent_information_state(&rho, &k).unwrap();
        let full = coherent_information_full(&rho, &p, ENV_DIM).unwrap();
        prop_assert!((gram - full).abs() < 1e-8, "{} vs {}", gram, full);
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

#[test]
fn coherent_input_outputs_elementwise() {
    // rho_nm = e^{-|a|^2} a^n conj(a)^m / sqrt(n! m!) K_nm; at lambda = 0, K_nm = e^{-gamma (n-m)^2 / 2}
    let dim = 24;
    for (alpha, gamma, lambda) in [
        (C64::new(1.0, 0.0), 1.0, 0.0),
        (C64::new(0.7, -0.4), 0.3, 0.0),
        (C64::new(0.5, 0.5), 1.0, 0.2),
    ] {
        let p = ChannelParams::new(gamma, lambda, 1.0).unwrap();
        let out = coherent_input_output(alpha, &p, dim).unwrap();
        let w = (-alpha.norm_sqr()).exp();
        for n in 0..8 {
            for m in 0..8 {
                let k = if lambda == 0.0 {
                    (-0.5 * gamma * ((n as f64 - m as f64).powi(2))).exp()
                } else {
                    kernel_entry(n, m, &p).unwrap()
                };
                let expect = alpha.powu(n as u32) * alpha.conj().powu(m as u32) * (w * k / (factorial(n) * factorial(m)).sqrt());
                let got = out.entries[(n, m)];
                assert!((got - expect).norm() < 1e-13, "{alpha} ({n},{m}): {got} vs {expect}");
            }
        }
    }
    // the vacuum is a fixed point
    let p = ChannelParams::new(1.0, -0.5, 1.0).unwrap();
    let out = coherent_input_output(C64::new(0.0, 0.0), &p, 5).unwrap();
    assert!(out.max_abs_diff(&DensityMatrix::fock(0, 5)) < 1e-15);
}
