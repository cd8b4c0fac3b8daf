use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use skorokhod_core::one_sided::reflect_lower;
use skorokhod_core::sample::{perturb, random_problem, Problem};
use skorokhod_core::two_sided::{
    alpha_map, beta_map, check_rp_conditions, crossing_decomposition, lipschitz_gap, reflect, sup_distance, theta_map,
    Route,
};

fn problem(seed: u64, n: usize) -> Problem {
    random_problem(&mut ChaCha8Rng::seed_from_u64(seed), n, 0.1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn routes_agree_and_pass_the_checker(seed in any::<u64>(), n in 2usize..120) {
        let p = problem(seed, n);
        let a = reflect(Route::Explicit, &p.y, &p.l, &p.u).unwrap();
        for route in [Route::Recursive, Route::Composed] {
            let b = reflect(route, &p.y, &p.l, &p.u).unwrap();
            prop_assert!(sup_distance(&a.k, &b.k) <= 1e-12);
            prop_assert!(sup_distance(&a.x, &b.x) <= 1e-12);
            prop_assert_eq!(&a.right_jump_up_times, &b.right_jump_up_times);
            prop_assert_eq!(&a.right_jump_down_times, &b.right_jump_down_times);
        }
        for route in Route::ALL {
            let sol = reflect(route, &p.y, &p.l, &p.u).unwrap();
            let report = check_rp_conditions(&sol, &p.y, &p.l, &p.u, 1e-9).unwrap();
            prop_assert!(report.all_pass(), "{}\n{}", route, report);
            // φ¹ and φ² never jump right at the same time
            for i in 0..sol.k.len() {
                prop_assert!(sol.phi1.right_jump(i) == 0.0 || sol.phi2.right_jump(i) == 0.0);
            }
        }
    }

    #[test]
    fn max_identity_and_crossings(seed in any::<u64>(), n in 2usize..120) {
        let p = problem(seed, n);
        let alpha = alpha_map(&p.y, &p.l).unwrap();
        let beta = beta_map(&p.y, &p.l, &p.u).unwrap();
        let xi = reflect_lower(&p.y, &p.l).unwrap().xi;
        let theta = theta_map(&xi, &p.l, &p.u).unwrap();
        let lhs = alpha.zip_map(&beta, f64::max).unwrap();
        let rhs = alpha.zip_map(&theta, |a, t| a + t).unwrap();
        prop_assert!(sup_distance(&lhs, &rhs) <= 1e-12);
        let gamma = beta.zip_map(&alpha, |b, a| (b - a).max(0.0)).unwrap();
        prop_assert!(sup_distance(&gamma, &theta) <= 1e-12);

        let dec = crossing_decomposition(&xi, &p.l, &p.u).unwrap();
        prop_assert_eq!(&dec.theta, &theta);
        prop_assert!(dec.is_interleaved());
        prop_assert!(dec.alternations() < n);
    }

    #[test]
    fn lipschitz_bounds(seed in any::<u64>(), n in 2usize..80, size in 0.0f64..0.04) {
        let p = problem(seed, n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let (y2, l2, u2) = (perturb(&mut rng, &p.y, 10.0 * size), perturb(&mut rng, &p.l, size), perturb(&mut rng, &p.u, size));
        let horizon = p.y.horizon() + 1.0;
        let gap = lipschitz_gap(&p.y, &y2, &p.l, &l2, &p.u, &u2, horizon).unwrap();
        prop_assert!(gap.k_gap <= 2.0 * gap.rhs() * (1.0 + 1e-12));
        prop_assert!(gap.x_gap <= 3.0 * gap.rhs() * (1.0 + 1e-12));
    }

    #[test]
    fn reflecting_a_solution_again_is_a_no_op(seed in any::<u64>(), n in 2usize..80) {
        let p = problem(seed, n);
        let x = reflect(Route::Recursive, &p.y, &p.l, &p.u).unwrap().x;
        for route in Route::ALL {
            let again = reflect(route, &x, &p.l, &p.u).unwrap();
            prop_assert!(again.k.slots().all(|k| k == 0.0));
        }
    }
}
