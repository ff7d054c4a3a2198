use proptest::prelude::*;

use tfnuclear::cg::{conjugate_gradient, CgOptions, LinearOperator};
use tfnuclear::coeffs::{CoefficientArray, IndexSet};
use tfnuclear::gabor::{GaborSystem, LatticeSpec};
use tfnuclear::grid::{convolve, mixed_norm, MixedNormSpec, PhasePlaneFunction, SampledFunction};
use tfnuclear::koethe::{gp_test, lambda_norm, GpVerdict, KoetheIndex, KoetheMatrix, NormKind};
use tfnuclear::komatsu::{associated_function, default_log_t_grid, hermite_coefficients, hermite_synthesis, MpFamily, MpSequence};
use tfnuclear::weights::{default_grid, young_conjugate, WeightFunction};
use tfnuclear::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn bump(d: usize, h: f64, r: f64, centre: f64, width: f64, phase: f64) -> SampledFunction {
    SampledFunction::from_fn(d, h, r, |x| {
        let s: f64 = x.iter().map(|v| (v - centre).powi(2)).sum();
        Complex64::from_polar((-s / width).exp(), phase * x[0])
    })
    .unwrap()
}

fn phase_bump(centre: f64, width: f64) -> PhasePlaneFunction {
    PhasePlaneFunction::square(1, 0.25, 6.0, |x, xi| {
        c((-((x[0] - centre).powi(2) + xi[0] * xi[0]) / width).exp(), 0.0)
    })
    .unwrap()
}

struct Dense(Vec<Vec<Complex64>>);

impl LinearOperator for Dense {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.0.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn fourier_roundtrip(centre in -2.0f64..2.0, width in 0.3f64..2.0, phase in -3.0f64..3.0) {
        let f = bump(1, 0.125, 8.0, centre, width, phase);
        let back = f.fourier_transform().transform.inverse_fourier_transform();
        prop_assert!(back.rel_error(&f) < 1e-12);
        let ft = f.fourier_transform().transform;
        let ratio = ft.l2_norm().powi(2) / (2.0 * std::f64::consts::PI * f.l2_norm().powi(2));
        prop_assert!((ratio - 1.0).abs() < 1e-10);
    }

    #[test]
    fn mixed_norm_monotone_in_lambda(centre in -2.0f64..2.0, width in 0.3f64..2.0, l1 in -2.0f64..2.0, dl in 0.0f64..2.0, p in 1.0f64..4.0) {
        let f = phase_bump(centre, width);
        let w = WeightFunction::log_power(1.0).unwrap();
        let a = mixed_norm(&f, &MixedNormSpec::new(p, 2.0, l1, w.clone()).unwrap()).unwrap();
        let b = mixed_norm(&f, &MixedNormSpec::new(p, 2.0, l1 + dl, w).unwrap()).unwrap();
        prop_assert!(a <= b * (1.0 + 1e-12));
    }

    #[test]
    fn convolution_commutes(c1 in -1.5f64..1.5, w1 in 0.3f64..1.5, c2 in -1.5f64..1.5, w2 in 0.3f64..1.5) {
        let f = phase_bump(c1, w1);
        let g = phase_bump(c2, w2);
        let fg = convolve(&f, &g).unwrap();
        let gf = convolve(&g, &f).unwrap();
        let scale = fg.max_abs().max(1e-300);
        for (u, v) in fg.values.iter().zip(&gf.values) {
            prop_assert!((u - v).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn young_conjugate_invariants(beta in 0.5f64..3.0) {
        let w = WeightFunction::log_power(beta).unwrap();
        let s: Vec<f64> = (0..=60).map(|i| 0.05 * i as f64).collect();
        prop_assert!(young_conjugate(&w, &s).unwrap().invariants_hold(1e-9));
    }

    #[test]
    fn alpha_constant_at_least_one(beta in 0.2f64..3.0) {
        let mut w = WeightFunction::log_power(beta).unwrap();
        prop_assert!(w.certify_alpha(&default_grid(1e6)).unwrap() >= 1.0);
    }

    #[test]
    fn coefficient_index_roundtrip(k in 1usize..6, n in 1usize..6, flat_seed in 0usize..10_000) {
        let set = IndexSet::Lattice { alpha: 0.5, beta: 0.75, d: 1, k_max: k, n_max: n };
        let flat = flat_seed % set.len();
        prop_assert_eq!(set.flat(&set.index(flat)), Some(flat));
    }

    #[test]
    fn lambda_norm_monotone_in_k(decay in 0.5f64..4.0, k in 0u32..6) {
        let lat = LatticeSpec::new(1.0, 1.0, 1, 8, 8).unwrap();
        let a = KoetheMatrix::from_weight(&WeightFunction::log_power(1.0).unwrap(), &lat);
        let cf = CoefficientArray::from_fn(lat.index_set(), |s| c((-decay * ((s[0] * s[0] + s[1] * s[1]) as f64).sqrt()).exp(), 0.0));
        for p in [NormKind::One, NormKind::Inf] {
            prop_assert!(lambda_norm(&cf, &a, k, p).unwrap() <= lambda_norm(&cf, &a, k + 1, p).unwrap());
        }
    }

    #[test]
    fn gp_verdict_monotone_in_m(k in 1u32..4) {
        let a = KoetheMatrix::polynomial(KoetheIndex::Lattice2d { alpha: 1.0, beta: 1.0, d: 1 });
        let ms: Vec<u32> = (k + 1..=k + 6).collect();
        let t = gp_test(&a, k, &ms, &[1, 2, 4, 8, 16, 32, 64]).unwrap();
        let first = t.reports.iter().position(|r| r.verdict == GpVerdict::Convergent);
        if let Some(i) = first {
            prop_assert!(t.reports[i..].iter().all(|r| r.verdict == GpVerdict::Convergent));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn associated_function_convex_and_monotone(s in 1.0f64..3.0) {
        let mp = MpSequence::new(MpFamily::FactorialPower { s }, Some(2000)).unwrap();
        let m = associated_function(&mp, &default_log_t_grid(&mp)).unwrap();
        prop_assert!(m.invariants_hold());
    }

    #[test]
    fn hermite_coefficient_roundtrip(seed in 0u64..1000) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let template = SampledFunction::zeros(1, 1.0 / 32.0, 12.0).unwrap();
        let index = IndexSet::MultiIndex { d: 1, gamma_max: 15 };
        let values = (0..index.len()).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let cf = CoefficientArray::new(index, values).unwrap();
        let back = hermite_coefficients(&hermite_synthesis(&cf, &template).unwrap(), 15).unwrap();
        for (u, v) in cf.values.iter().zip(&back.values) {
            prop_assert!((u - v).norm() <= 1e-8);
        }
    }

    #[test]
    fn analysis_is_linear_and_adjoint_to_synthesis(c1 in -1.0f64..1.0, c2 in -1.0f64..1.0, a in -2.0f64..2.0) {
        let sys = GaborSystem::gaussian(LatticeSpec::new(1.0, 1.0, 1, 4, 4).unwrap(), 1.0 / 16.0, 8.0).unwrap();
        let f = bump(1, 1.0 / 16.0, 8.0, c1, 1.0, 0.5);
        let g = bump(1, 1.0 / 16.0, 8.0, c2, 0.7, -1.0);
        let s = c(a, 0.5);
        let lhs = sys.analysis(&f.combine(s, &g, c(1.0, 0.0)).unwrap()).unwrap();
        let cf = sys.analysis(&f).unwrap();
        let cg = sys.analysis(&g).unwrap();
        for ((u, x), y) in lhs.values.iter().zip(&cf.values).zip(&cg.values) {
            prop_assert!((u - (s * x + y)).norm() <= 1e-12 * (1.0 + u.norm()));
        }
        let left = cf.inner(&cg);
        let right = f.inner(&sys.synthesis(&cg, &sys.window).unwrap());
        prop_assert!((left - right).norm() <= 1e-10 * (1.0 + left.norm()));
    }

    #[test]
    fn cg_solves_hermitian_positive_systems(seed in 0u64..1000, n in 2usize..12) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let b: Vec<Vec<Complex64>> = (0..n).map(|_| (0..n).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()).collect();
        let m: Vec<Vec<Complex64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let v: Complex64 = (0..n).map(|k| b[k][i].conj() * b[k][j]).sum();
                        if i == j { v + c(1.0, 0.0) } else { v }
                    })
                    .collect()
            })
            .collect();
        let rhs: Vec<Complex64> = (0..n).map(|i| c(i as f64, 1.0)).collect();
        let out = conjugate_gradient(&Dense(m), &rhs, &CgOptions { tol: 1e-12, max_iter: 200, stall_limit: 10 });
        prop_assert!(out.residual <= 1e-10);
    }

    #[test]
    fn json_floats_roundtrip(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        let s = tfnuclear::json::to_string(&vec![x]).unwrap();
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(back[0].to_bits(), x.to_bits());
    }
}
