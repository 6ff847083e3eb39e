use okacert::convex::{ConvexSet, ConvexSetSpec};
use okacert::smoothing::{
    hessian_min_eig, normcombo_terms, outer_sequence, rmax, smooth_normcombo, OuterOptions, SmoothingError, WeightSpec,
};
use okacert::sampling;

fn wedge() -> ConvexSet {
    // x2 >= |x1|
    ConvexSet::new(ConvexSetSpec::Polyhedron { a: vec![vec![1.0, -1.0], vec![-1.0, -1.0]], b: vec![0.0, 0.0] }).unwrap()
}

#[test]
fn wedge_sequence_is_nested() {
    let e = wedge();
    let st = outer_sequence(&e, 3, 5.0, &OuterOptions::default()).unwrap();
    assert_eq!(st.steps(), 3);
    let rep = st.verify_nesting(&e, 200, Default::default());
    assert_eq!(rep.e_violations, 0);
    assert_eq!(rep.nesting_violations, 0);
    assert!(rep.max_tau_on_e.iter().all(|&m| m <= -0.5), "{:?}", rep.max_tau_on_e);
    for k in 1..=3 {
        assert!(st.min_hessian_eig(k, 1000, 7) > 0.0);
    }
}

#[test]
fn disc_sequence_shrinks_toward_the_disc() {
    let e = ConvexSet::new(ConvexSetSpec::Ball { center: vec![0.0, 0.0], radius: 1.0 }).unwrap();
    let st = outer_sequence(&e, 3, 3.0, &OuterOptions::default()).unwrap();
    let rep = st.verify_nesting(&e, 60, Default::default());
    assert_eq!(rep.e_violations + rep.nesting_violations, 0);
    let area = |k: usize| {
        let mut n = 0;
        for i in 0..60 {
            for j in 0..60 {
                let x = [-3.0 + 0.1 * i as f64, -3.0 + 0.1 * j as f64];
                if st.tau(k, &x) <= 0.0 {
                    n += 1;
                }
            }
        }
        n
    };
    assert!(area(3) <= area(2) && area(2) <= area(1));
}

#[test]
fn halfspace_has_no_outer_sequence() {
    let h = ConvexSet::new(ConvexSetSpec::Polyhedron { a: vec![vec![0.0, -1.0]], b: vec![0.0] }).unwrap();
    let err = outer_sequence(&h, 1, 5.0, &OuterOptions::default()).unwrap_err();
    assert_eq!(err, SmoothingError::LinealityNonEmpty);
}

#[test]
fn cone_example_smoothing_sandwich() {
    let spec = ConvexSetSpec::Normcombo { n: 2, c: 1.0, a: vec![1.0], b: vec![1.0] };
    let terms = normcombo_terms(&spec).unwrap();
    let psi = smooth_normcombo(&terms, 0.1).unwrap();
    assert_eq!(psi.coef_sum(), 3.0);
    let mut rng = sampling::rng(9, 0);
    for _ in 0..10_000 {
        let x = sampling::ball(&mut rng, 3, 5.0);
        let (p, f) = (psi.value(&x), psi.phi(&x));
        assert!(p <= f + 1e-12 && f - 0.3 <= p + 1e-12);
    }
    for _ in 0..1000 {
        let x = sampling::ball(&mut rng, 3, 2.0);
        assert!(hessian_min_eig(&|y| psi.value(y), &x, 1e-4) > 0.0);
    }
}

#[test]
fn rmax_small_cases() {
    let w = WeightSpec::new(0.1);
    let r = rmax(&[0.3, 0.31, 0.29], &w).unwrap();
    assert!((0.31..=0.41).contains(&r));
    let r4 = rmax(&[0.0, 1.0, 2.0, 3.0], &w).unwrap();
    assert_eq!(r4, 3.0);
}
