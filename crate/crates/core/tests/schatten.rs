use matvec_lab::operators::haar_orthogonal;
use matvec_lab::rng::{gaussian_matrix, gaussian_vector, stream, Purpose};
use matvec_lab::schatten::{
    lra_error, optimal_rank1_error, pythagorean_check, residual_singular_values, schatten_norm,
    schatten_pythagorean_check, SingularSpectrum,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

const PS: [f64; 4] = [1.0, 2.0, 3.0, f64::INFINITY];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unitary_invariance(seed in 0u64..10_000, n in 2usize..9, d in 2usize..7, extra in 0usize..4) {
        let mut rng = stream(seed, 0, Purpose::Instance);
        let a = gaussian_matrix(&mut rng, n, d);
        let u = haar_orthogonal(n + extra, &mut rng).columns(0, n).into_owned();
        let ua = &u * &a;
        for p in PS {
            let x = schatten_norm(&a, p).unwrap();
            let y = schatten_norm(&ua, p).unwrap();
            prop_assert!((x - y).abs() <= 1e-9 * x.max(1e-300));
        }
    }

    #[test]
    fn p_monotonicity(seed in 0u64..10_000, n in 1usize..9, d in 1usize..9) {
        let a = gaussian_matrix(&mut stream(seed, 0, Purpose::Instance), n, d);
        let inf = schatten_norm(&a, f64::INFINITY).unwrap();
        let one = schatten_norm(&a, 1.0).unwrap();
        for p in [1.5, 2.0, 3.0, 4.0] {
            let v = schatten_norm(&a, p).unwrap();
            prop_assert!(inf <= v * (1.0 + 1e-12) && v <= one * (1.0 + 1e-12));
        }
    }

    #[test]
    fn eckart_young(seed in 0u64..10_000) {
        let a = gaussian_matrix(&mut stream(seed, 0, Purpose::Instance), 8, 8);
        let v1 = a.clone().svd(false, true).v_t.unwrap().row(0).transpose();
        for p in PS {
            let got = lra_error(&a, &v1, p).unwrap();
            let want = optimal_rank1_error(&a, p).unwrap();
            prop_assert!((got - want).abs() <= 1e-8 * want);
        }
    }

    #[test]
    fn residual_values_match_dense(seed in 0u64..10_000, d in 2usize..10) {
        let mut rng = stream(seed, 0, Purpose::Instance);
        let mut sigma: Vec<f64> = gaussian_vector(&mut rng, d).iter().map(|x| x.abs()).collect();
        sigma.sort_by(|a, b| b.total_cmp(a));
        let sigma = DVector::from_vec(sigma);
        let c = gaussian_vector(&mut rng, d).normalize();
        let fast = residual_singular_values(&sigma, &c);
        let dense = DMatrix::from_diagonal(&sigma) * (DMatrix::identity(d, d) - &c * c.transpose());
        let exact = SingularSpectrum::of(&dense);
        for (x, y) in fast.iter().zip(exact.values()) {
            prop_assert!((x - y).abs() <= 1e-9 * sigma[0]);
        }
    }
}

#[test]
fn pythagorean_identities_on_500_instances() {
    for t in 0..500u64 {
        let mut rng = stream(77, t, Purpose::Instance);
        let n = 2 + (t as usize % 7);
        let d = 2 + (t as usize / 7 % 6);
        let a = gaussian_matrix(&mut rng, n, d);
        let fro2 = a.norm_squared();
        let v = gaussian_vector(&mut rng, d).normalize();
        let (_, _, residual) = pythagorean_check(&a, &v).unwrap();
        assert!(residual <= 1e-9 * fro2, "instance {t}: {residual}");
        let w = gaussian_vector(&mut rng, n).normalize();
        let p = [1.0, 1.5, 2.0, 3.0, 4.0][t as usize % 5];
        let (holds, slack) = schatten_pythagorean_check(&a, &w, p).unwrap();
        assert!(holds, "instance {t}, p={p}: slack {slack}");
    }
}
