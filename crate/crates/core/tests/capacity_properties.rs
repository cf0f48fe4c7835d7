use ddc_core::capacity::{
    coherent_information_full, coherent_information_kernel, optimize_capacity, EnergyConstraint,
    OptimizerOptions,
};
use ddc_core::channel::DensityMatrix;
use ddc_core::kernel::kernel_matrix;
use ddc_core::ChannelParams;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn simplex(w: &[f64]) -> Vec<f64> {
    let z: f64 = w.iter().sum();
    w.iter().map(|x| x / z).collect()
}

fn fast() -> OptimizerOptions {
    OptimizerOptions {
        record_trace: false,
        ..OptimizerOptions::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coherent_information_is_concave(
        gamma in 0.05f64..4.0,
        lambda in prop_oneof![Just(-0.5), Just(0.0), 0.05f64..1.0],
        a in prop::collection::vec(0.01f64..1.0, 3),
        b in prop::collection::vec(0.01f64..1.0, 3),
        t in 0.0f64..1.0,
    ) {
        let p = ChannelParams::new(gamma, lambda, 1.0).unwrap();
        let k = kernel_matrix(&p, 3).unwrap();
        let (pa, pb) = (simplex(&a), simplex(&b));
        let mix: Vec<f64> = pa.iter().zip(&pb).map(|(x, y)| t * x + (1.0 - t) * y).collect();
        let jm = coherent_information_kernel(&mix, &k).unwrap();
        let ja = coherent_information_kernel(&pa, &k).unwrap();
        let jb = coherent_information_kernel(&pb, &k).unwrap();
        prop_assert!(jm >= t * ja + (1.0 - t) * jb - 1e-10, "{} < {}", jm, t * ja + (1.0 - t) * jb);
    }

    #[test]
    fn dephasing_the_input_never_hurts(
        // lambda > 0 kept where 256 environment levels hold the vectors
        gamma in 0.05f64..1.0,
        lambda in prop_oneof![Just(-0.5), Just(0.0), 0.05f64..0.3],
        seed in any::<u64>(),
    ) {
        let p = ChannelParams::new(gamma, lambda, 1.0).unwrap();
        let dim = p.max_dimension().clip(4);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = DensityMatrix::random(&mut rng, dim);
        let diag = DensityMatrix::diagonal(&rho.diagonal_values());
        let j = coherent_information_full(&rho, &p, 256).map_err(|e| TestCaseError::fail(format!("{e:?}")))?;
        let jd = coherent_information_full(&diag, &p, 256).unwrap();
        prop_assert!(jd >= j - 1e-9, "{} < {}", jd, j);
    }
}

#[test]
fn capacity_is_non_increasing_in_gamma() {
    for lambda in [0.0, 0.5] {
        for n in [1, 2] {
            let mut prev = f64::INFINITY;
            for i in 0..=10 {
                let gamma = 0.5 * i as f64;
                let p = ChannelParams::new(gamma, lambda, 1.0).unwrap();
                let q = optimize_capacity(&p, n, None, &fast()).unwrap().q;
                assert!(q <= prev + 1e-9, "lambda={lambda} N={n} gamma={gamma}: {q} > {prev}");
                prev = q;
            }
        }
    }
}

#[test]
fn energy_bound_below_the_uniform_mean() {
    for (gamma, lambda) in [(0.5, 0.0), (1.0, 0.3), (0.5, -0.4)] {
        let p = ChannelParams::new(gamma, lambda, 1.0).unwrap();
        let levels = [0usize, 1, 2];
        let unconstrained = optimize_capacity(&p, 2, None, &fast()).unwrap();
        let eps: Vec<f64> = levels.iter().map(|&l| ddc_core::capacity::energy(l, lambda)).collect();
        let uniform_mean = eps.iter().sum::<f64>() / 3.0;
        let e = 0.6 * uniform_mean;
        let c = EnergyConstraint::new(e, &levels, lambda).unwrap();
        let r = optimize_capacity(&p, 2, Some(&c), &fast()).unwrap();
        assert!(c.mean(&r.pvec) <= e + 1e-9, "{} > {e}", c.mean(&r.pvec));
        assert!(r.q <= unconstrained.q + 1e-9);
        let feasible = c.mean(&unconstrained.pvec) <= e + 1e-9;
        assert!(!feasible || (r.q - unconstrained.q).abs() < 1e-6);
    }
}
