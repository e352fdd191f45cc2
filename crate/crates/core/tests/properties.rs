use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pencil_core::arma::coefficients::{q_series, v_series, InnerOperators};
use pencil_core::arma::difference::cumulative_sums;
use pencil_core::arma::model::{ma1_g, simulate_recursion};
use pencil_core::arma::represent::trend_by_coefficients;
use pencil_core::arma::{simulate_noise, ArmaModel, NoiseSpec};
use pencil_core::augment::{
    augment, polynomial_fundamental_residual, reduce_arma, simulate_arma_pq, stack, unpack_laurent, unstack, ArmaPq,
    PolynomialPencil,
};
use pencil_core::contour::{default_radius, ContourOracle};
use pencil_core::laurent::{basic_solution, closed_form_resolvent, singular_coefficients, verify_fundamental, LaurentExpansion};
use pencil_core::singularity::classify_singularity;
use pencil_core::spectral::{projections, separate};
use pencil_core::{c64, BasicSolution, ComplexMatrix, ComplexVector, LinearPencil, SingularityClass, Tolerances};

/// M·(C₀ + (z − 1)) with C₀ similar to diag(Jordan block of size `order` at 0, D),
/// D having entries of modulus in [0.4, 1].
fn unit_root_pencil(n: usize, order: usize, seed: u64) -> LinearPencil {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut uniform = |lo: f64, hi: f64| rng.random_range(lo..hi);
    let mut j = ComplexMatrix::zeros(n, n);
    for i in 0..order - 1 {
        j[(i, i + 1)] = c64(1.0, 0.0);
    }
    for i in order..n {
        let m = uniform(0.4, 1.0);
        let s = if uniform(0.0, 1.0) < 0.5 { -1.0 } else { 1.0 };
        j[(i, i)] = c64(s * m, 0.0);
    }
    let s = &ComplexMatrix::identity(n) + &ComplexMatrix::from_real_fn(n, n, |_, _| uniform(-0.25, 0.25));
    let s_inv = s.inverse(1e8, "S").unwrap();
    let m = &ComplexMatrix::identity(n) + &ComplexMatrix::from_real_fn(n, n, |_, _| uniform(-0.3, 0.3));
    let c0 = &m * &(&(&s * &j) * &s_inv);
    LinearPencil::new(c0, m).unwrap()
}

fn analyse(p: &LinearPencil) -> BasicSolution {
    basic_solution(p, default_radius(p), 64, &Tolerances::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn pole_order_and_fundamental_equations(seed in any::<u64>(), n in 3usize..6, order in 1usize..3) {
        let p = unit_root_pencil(n, order, seed);
        let basic = analyse(&p);
        let class = classify_singularity(&basic, &p, n + 1, 1e-8).unwrap().class;
        prop_assert_eq!(class, SingularityClass::Pole { order });
        let exp = LaurentExpansion::from_basic(&basic, &p, 8, 6);
        prop_assert!(verify_fundamental(&p, &exp, -4, 6, 1e-9).unwrap().pass);
    }

    #[test]
    fn projection_identities(seed in any::<u64>(), n in 3usize..6, order in 1usize..3) {
        let p = unit_root_pencil(n, order, seed);
        let basic = analyse(&p);
        let pr = projections(&basic, &p, 1e-9).unwrap();
        let id = ComplexMatrix::identity(n);
        prop_assert!((&pr.p * &pr.p).approx_eq(&pr.p, 1e-9));
        prop_assert!((&pr.q * &pr.q).approx_eq(&pr.q, 1e-9));
        prop_assert!((&pr.p + &pr.p_c).approx_eq(&id, 1e-9));
        prop_assert!((&pr.q + &pr.q_c).approx_eq(&id, 1e-9));
        prop_assert!((&p.c1 * &pr.p).approx_eq(&(&pr.q * &p.c1), 1e-9));
        prop_assert!((&p.c0 * &pr.p).approx_eq(&(&pr.q * &p.c0), 1e-9));
        prop_assert!(separate(&p, &pr, 1e-9).pass);
        prop_assert_eq!(pr.p.rank(1e-6), order);
    }

    #[test]
    fn closed_form_matches_solve(seed in any::<u64>(), n in 3usize..6, order in 1usize..3, theta in 0.0f64..std::f64::consts::TAU) {
        let p = unit_root_pencil(n, order, seed);
        let basic = analyse(&p);
        let z = c64(1.0, 0.0) + num_complex::Complex64::from_polar(0.5 * default_radius(&p), theta);
        let a = closed_form_resolvent(&basic, &p, z, 1e12).unwrap();
        let b = p.solve_at(z, 1e12).unwrap();
        prop_assert!(a.max_abs_diff(&b) <= 1e-8 * b.max_abs().max(1.0));
    }

    #[test]
    fn extended_coefficients_equal_regular_ones(seed in any::<u64>(), n in 3usize..6, order in 1usize..3) {
        let p = unit_root_pencil(n, order, seed);
        let basic = analyse(&p);
        let model = ArmaModel::with_scalar_ma(&p, 0.5).unwrap();
        let ops = InnerOperators::new(&basic, &p).unwrap();
        let q = q_series(&model, &basic, &ops, 30);
        let v = v_series(&basic, &ops, 30);
        for (qs, vs) in q.iter().zip(&v) {
            prop_assert!(qs.max_abs_diff(vs) <= 1e-8 * vs.max_abs().max(1.0));
        }
    }

    #[test]
    fn trend_routes_agree(seed in any::<u64>(), n in 3usize..5, order in 1usize..3, t in 0i64..40) {
        let p = unit_root_pencil(n, order, seed);
        let basic = analyse(&p);
        let g = simulate_noise(&NoiseSpec::gaussian(1.0, seed, 0), n, 40).unwrap().positive_part();
        let levels = cumulative_sums(&g, order, t).unwrap();
        let t_sing = singular_coefficients(&basic, &p, order);
        let mut direct = ComplexVector::zeros(n);
        for k in 1..=order {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            direct += t_sing[k - 1].mul_vec(&levels[k - 1][t as usize]) * c64(sign, 0.0);
        }
        let via = trend_by_coefficients(&basic, &p, &g, t, order).unwrap();
        prop_assert!((&direct - &via).norm() <= 1e-9 * direct.norm().max(1.0));
    }

    #[test]
    fn noise_is_reproducible(seed in any::<u64>(), dim in 1usize..5, t_end in 0i64..50, burn in 0usize..20) {
        let spec = NoiseSpec::gaussian(1.0, seed, burn);
        let a = simulate_noise(&spec, dim, t_end).unwrap();
        let b = simulate_noise(&spec, dim, t_end).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.t_start, -(burn as i64) - 1);
        prop_assert_eq!(a.t_end(), t_end);
        let other = simulate_noise(&NoiseSpec::gaussian(1.0, seed.wrapping_add(1), burn), dim, t_end).unwrap();
        prop_assert_ne!(a, other);
    }

    #[test]
    fn augmentation_roundtrip(seed in any::<u64>(), n in 1usize..4, degree in 2usize..4) {
        let tol = Tolerances::default();
        let poly = PolynomialPencil::engineered_unit_root(n, degree, seed).unwrap();
        let lin = augment(&poly).as_linear();
        let oracle = ContourOracle::new(&lin, default_radius(&lin), 128, &tol).unwrap();
        let exp = LaurentExpansion::from_oracle(&oracle, 3, 3).unwrap();
        let un = unpack_laurent(&exp.coefficients, n, degree, 1e-8).unwrap();
        prop_assert!(polynomial_fundamental_residual(&poly, &un.coefficients) <= 1e-8);
    }

    #[test]
    fn reduction_is_exact(seed in any::<u64>(), p in 1usize..4, q in 0usize..4, n in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut block = |shift: f64| {
            &ComplexMatrix::from_real_fn(n, n, |_, _| rng.random_range(-0.4..0.4)) + &ComplexMatrix::identity(n).scale_real(shift)
        };
        let a: Vec<_> = (0..=p).map(|i| block(if i == 0 { 1.0 } else { 0.0 })).collect();
        let f: Vec<_> = (0..=q).map(|_| block(0.0)).collect();
        let r = p.max(q).max(1);
        let init = (0..r).map(|i| ComplexVector::from_element(n, c64(i as f64 * 0.1, 0.0))).collect();
        let pq = ArmaPq::new(a, f, init).unwrap();
        let noise = simulate_noise(&NoiseSpec::gaussian(1.0, seed, r - 1), n, (r * 12) as i64 - 1).unwrap();
        let direct = simulate_arma_pq(&pq, &noise, (r * 12) as i64 - 1).unwrap();
        let reduced = reduce_arma(&pq).unwrap();
        let nu = stack(&noise, r, -1, 11).unwrap();
        let y = simulate_recursion(&reduced, &ma1_g(&reduced, &nu).unwrap(), 11).unwrap();
        let x = unstack(&y, r);
        for t in -(r as i64)..(r * 12) as i64 {
            let scale = direct.get(t).unwrap().norm().max(1.0);
            prop_assert!((x.get(t).unwrap() - direct.get(t).unwrap()).norm() <= 1e-12 * scale);
        }
    }
}
