use tasep_sc::contour::QuadratureSpec;
use tasep_sc::formulas::{
    head_transition_probability, leftmost_probability, leftmost_probability_shifted_step,
    leftmost_probability_step_det, tasep_leftmost_probability, transition_probability, Configuration, Method,
    StepInitial,
};
use tasep_sc::simulator::{estimate_leftmost, estimate_transition, z_score};

const TIMES: [f64; 3] = [0.3, 1.0, 3.0];

fn quad() -> Method {
    Method::Quadrature(QuadratureSpec::default().with_tolerance(1e-11))
}

/// `1e-9` relative, with an absolute floor for values near the double-precision noise.
fn agree(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()) + 1e-15
}

#[test]
fn leftmost_quadrature_matches_residue() {
    for n in [2usize, 3] {
        for y in [StepInitial::new(0).configuration(n).unwrap(), StepInitial::new(1).configuration(n).unwrap()] {
            for t in TIMES {
                for x in 1..=6 {
                    let r = leftmost_probability(&y, x, t, &Method::Residue).unwrap().value;
                    let q = leftmost_probability(&y, x, t, &quad()).unwrap().value;
                    assert!(agree(r, q), "{y} x={x} t={t}: {r} vs {q}");
                    assert!((0.0..=1.0).contains(&r));
                }
            }
        }
    }
}

#[test]
fn shifted_step_and_tasep_quadrature_match_residue() {
    for t in TIMES {
        for x in 1..=6 {
            for l in [0u32, 1] {
                let r = leftmost_probability_shifted_step(l, 2, x, t, &Method::Residue).unwrap().value;
                let q = leftmost_probability_shifted_step(l, 2, x, t, &quad()).unwrap().value;
                assert!(agree(r, q), "l={l} x={x} t={t}: {r} vs {q}");
            }
            let y = Configuration::uniform(vec![1, 2], 1).unwrap();
            let r = tasep_leftmost_probability(&y, x, t, &Method::Residue).unwrap().value;
            let q = tasep_leftmost_probability(&y, x, t, &quad()).unwrap().value;
            assert!(agree(r, q), "tasep x={x} t={t}: {r} vs {q}");
        }
    }
}

#[test]
fn transition_quadrature_matches_residue() {
    let y = Configuration::parse("1,2", "21").unwrap();
    for t in TIMES {
        for (p, s) in [("1,3", "21"), ("2,3", "12"), ("3,6", "21"), ("4,5", "12"), ("2,5", "12")] {
            let x = Configuration::parse(p, s).unwrap();
            let r = transition_probability(&y, &x, t, &Method::Residue).unwrap().value;
            let q = transition_probability(&y, &x, t, &quad()).unwrap().value;
            assert!(agree(r, q), "{x} t={t}: {r} vs {q}");
        }
    }
    let y = Configuration::parse("1,2,3", "211").unwrap();
    for (p, s) in [("1,3,4", "211"), ("2,3,5", "121")] {
        let x = Configuration::parse(p, s).unwrap();
        let r = transition_probability(&y, &x, 1.0, &Method::Residue).unwrap().value;
        let q = transition_probability(&y, &x, 1.0, &quad()).unwrap().value;
        assert!(agree(r, q), "{x}: {r} vs {q}");
        if x.is_head() {
            let h = head_transition_probability(&y, &x, 1.0, &quad()).unwrap().value;
            assert!(agree(r, h), "{x}: {r} vs {h}");
        }
    }
}

#[test]
fn step_determinant_matches_quadrature_of_shifted_form() {
    let d = leftmost_probability_step_det(3, 2, 0.5).unwrap().value;
    let q = leftmost_probability_shifted_step(0, 3, 2, 0.5, &quad()).unwrap().value;
    assert!((d - q).abs() < 1e-10, "{d} vs {q}");
}

#[test]
fn single_particle_forms_are_poisson() {
    for t in [0.5f64, 2.0] {
        for x in 1..6i64 {
            let poisson = |k: i64| (-t).exp() * t.powi(k as i32) / (1..=k).map(|v| v as f64).product::<f64>();
            for l in [0u32, 2] {
                let v = leftmost_probability_shifted_step(l, 1, x, t, &Method::Residue).unwrap().value;
                assert!((v - poisson(x - 1)).abs() < 1e-14);
            }
            assert!((leftmost_probability_step_det(1, x, t).unwrap().value - poisson(x - 1)).abs() < 1e-14);
            let y = Configuration::uniform(vec![0], 1).unwrap();
            let single = tasep_leftmost_probability(&y, x, t, &Method::Residue).unwrap().value;
            let head = leftmost_probability(&Configuration::head(vec![0]).unwrap(), x, t, &Method::Residue).unwrap().value;
            assert!((single - head).abs() < 1e-15);
        }
    }
}

#[test]
fn shifted_step_matches_general_initial_data() {
    let y = Configuration::head(vec![1, 3]).unwrap();
    let a = leftmost_probability_shifted_step(1, 2, 1, 1.0, &Method::Residue).unwrap().value;
    let b = leftmost_probability(&y, 1, 1.0, &Method::Residue).unwrap().value;
    assert!((a - b).abs() < 1e-9);
    for l in 0..3u32 {
        let y = StepInitial::new(l).configuration(3).unwrap();
        for x in 1..6 {
            let a = leftmost_probability_shifted_step(l, 3, x, 1.5, &Method::Residue).unwrap().value;
            let b = leftmost_probability(&y, x, 1.5, &Method::Residue).unwrap().value;
            assert!((a - b).abs() < 1e-10, "l={l} x={x}: {a} vs {b}");
        }
    }
}

#[test]
fn windowed_sums_are_at_most_one() {
    let y = StepInitial::new(0).configuration(3).unwrap();
    let total: f64 = (1..40).map(|x| leftmost_probability(&y, x, 2.0, &Method::Residue).unwrap().value).sum();
    assert!(total <= 1.0 + 1e-12 && total > 0.0);
    let single = Configuration::uniform(vec![1, 2, 3], 1).unwrap();
    let total: f64 = (1..40).map(|x| tasep_leftmost_probability(&single, x, 2.0, &Method::Residue).unwrap().value).sum();
    assert!((total - 1.0).abs() < 1e-12, "{total}");
}

#[test]
fn single_species_matches_simulation() {
    let y = Configuration::uniform(vec![1, 2], 1).unwrap();
    for x in 1..=4 {
        let exact = tasep_leftmost_probability(&y, x, 1.0, &Method::Residue).unwrap().value;
        let e = tasep_sc::simulator::estimate_event(&y, |s| s.positions[0] == x, 1.0, 200_000, 77 + x as u64).unwrap();
        assert!(z_score(exact, &e).abs() < 4.0, "x={x}: {exact} vs {e:?}");
    }
}

#[test]
fn head_transition_matches_simulation() {
    let y = Configuration::head(vec![1, 2]).unwrap();
    let x = Configuration::head(vec![2, 3]).unwrap();
    let exact = head_transition_probability(&y, &x, 1.0, &Method::Residue).unwrap().value;
    let e = estimate_transition(&y, &x, 1.0, 200_000, 5).unwrap();
    assert!(z_score(exact, &e).abs() < 3.0, "{exact} vs {e:?}");
    let exact = leftmost_probability(&y, 1, 1.0, &Method::Residue).unwrap().value;
    assert!(z_score(exact, &estimate_leftmost(&y, 1, 1.0, 200_000, 6).unwrap()).abs() < 3.0);
}
