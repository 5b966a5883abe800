use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use tasep_sc::formulas::{leftmost_probability, transition_probability, Configuration, Method};
use tasep_sc::identities::{det_collapse, main_identity, tasep_identity, vandermonde_cofactor, RationalPoint, TasepForm};
use tasep_sc::simulator::{run_rng, simulate_until, step_dynamics};

fn configuration(max_n: usize) -> impl Strategy<Value = Configuration> {
    (1..=max_n)
        .prop_flat_map(|n| (prop::collection::vec(1i64..4, n), prop::collection::vec(1u8..=2, n), -5i64..5))
        .prop_map(|(gaps, species, start)| {
            let positions = gaps.iter().scan(start, |p, g| { *p += g; Some(*p) }).collect();
            Configuration::new(positions, species).unwrap()
        })
}

fn point(n: usize) -> impl Strategy<Value = RationalPoint> {
    prop::collection::vec((1i64..50, 51i64..100), n).prop_filter_map("distinct", |v| {
        let xi: Vec<BigRational> = v.iter().map(|&(p, q)| BigRational::new(BigInt::from(p), BigInt::from(q))).collect();
        RationalPoint::new(xi).ok()
    })
}

fn counts(c: &Configuration) -> (usize, usize) {
    let first = c.species().iter().filter(|&&s| s == 2).count();
    (first, c.n() - first)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dynamics_keep_order_and_species(y in configuration(5), seed in any::<u64>(), steps in 1usize..40) {
        let mut rng = run_rng(seed, 0);
        let mut c = y.clone();
        for _ in 0..steps {
            let (next, dwell) = step_dynamics(&c, &mut rng);
            prop_assert!(dwell >= 0.0);
            prop_assert!(next.positions().windows(2).all(|w| w[0] < w[1]));
            prop_assert_eq!(counts(&next), counts(&y));
            prop_assert!(next.positions().iter().zip(c.positions()).all(|(a, b)| a >= b));
            c = next;
        }
        let end = simulate_until(&y, 2.0, &mut run_rng(seed, 1)).unwrap();
        prop_assert_eq!(counts(&end), counts(&y));
    }

    #[test]
    fn probabilities_lie_in_unit_interval(c in configuration(2), dx in 0i64..5, t in 0.0f64..4.0, swap in any::<bool>()) {
        let y = Configuration::head(c.positions().to_vec()).unwrap();
        let x = y.positions()[0] + dx;
        let p = leftmost_probability(&y, x, t, &Method::Residue).unwrap().value;
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&p), "{p}");
        let shifted: Vec<i64> = y.positions().iter().map(|p| p + dx).collect();
        let mut word = y.species().to_vec();
        if swap && word.len() == 2 {
            word.swap(0, 1);
        }
        let target = Configuration::new(shifted, word).unwrap();
        let q = transition_probability(&y, &target, t, &Method::Residue).unwrap().value;
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&q), "{q}");
    }

    #[test]
    fn identities_hold_at_rational_points(p in (2usize..5).prop_flat_map(point)) {
        prop_assert!(main_identity(&p).unwrap().holds());
        prop_assert!(vandermonde_cofactor(&p).unwrap().holds());
        for form in [TasepForm::Amplitude, TasepForm::Prefactor, TasepForm::Inverted] {
            prop_assert!(tasep_identity(&p, form).unwrap().holds());
        }
    }

    #[test]
    fn determinant_collapses(p in (2usize..5).prop_flat_map(point), l in 0usize..4, seed in any::<u64>()) {
        let k: Vec<usize> = (2..=p.n()).map(|i| (seed as usize >> i) % (i - 1)).collect();
        prop_assert!(det_collapse(&p, l, &k).unwrap().holds());
    }
}
