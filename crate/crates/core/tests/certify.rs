use num_complex::Complex64 as C;
use okacert::certify::{
    certify_oka_complement, check_chart_compact, check_complex_tangent_halfline, check_connectivity, check_line_lift,
    check_weak_projective, hull_sweep_witness, recheck_witness, Hyperplane, SamplingPlan, SweepError, Verdict,
};
use okacert::convex::{ConvexFunctionSpec, ConvexSet, ConvexSetSpec, EpigraphMode};
use okacert::gallery;

fn set(name: &str) -> ConvexSet {
    ConvexSet::new(gallery::lookup(name).unwrap()).unwrap()
}

fn z2_const(beta: f64) -> Hyperplane {
    Hyperplane::new(&[C::new(0.0, 0.0), C::new(1.0, 0.0)], C::new(beta, 0.0)).unwrap()
}

fn plan() -> SamplingPlan {
    SamplingPlan::default()
}

#[test]
fn siegel_passes_every_sampled_check() {
    for name in ["siegel2", "siegel3"] {
        let c = certify_oka_complement(&set(name), &plan());
        assert_eq!(c.overall, Verdict::VerifiedSampled, "{name}");
        assert!(c.checks.iter().all(|k| k.verdict != Verdict::Refuted), "{name}");
        for k in ["complex_tangent_halfline", "weak_projective", "line_lift", "connectivity", "chart_compact"] {
            assert_eq!(c.check(k).unwrap().verdict, Verdict::VerifiedSampled, "{name} {k}");
        }
        assert!(c.routes.iter().any(|r| r.passed && r.name == "strictly-convex-tangent"));
    }
}

#[test]
fn ball_and_cone_example_pass() {
    let b = certify_oka_complement(&set("ball"), &plan());
    assert_eq!(b.overall, Verdict::VerifiedSampled);
    assert_eq!(b.check("lineality").unwrap().verdict, Verdict::CertifiedExact);
    let c = certify_oka_complement(&set("cone-ex14"), &plan());
    assert_eq!(c.overall, Verdict::VerifiedSampled);
    assert_eq!(c.check("normcombo_smoothing").unwrap().verdict, Verdict::VerifiedSampled);
    assert!(c.routes.iter().any(|r| r.passed && r.name == "irreducible-epigraph"));
}

#[test]
fn halfspace_is_refuted_with_rechecked_halflines() {
    let e = set("halfspace");
    let c = certify_oka_complement(&e, &plan());
    assert_eq!(c.overall, Verdict::Refuted);
    let k = c.check("complex_tangent_halfline").unwrap();
    assert_eq!(k.verdict, Verdict::Refuted);
    assert!(!k.witnesses.is_empty());
    for w in &k.witnesses {
        assert!(recheck_witness(&e, &k.name, w, 1, 1e-9));
    }
}

#[test]
fn real_plane_has_no_stable_disjoint_hyperplane() {
    let e = set("r2-in-c2");
    let k = check_weak_projective(&e, &plan()).result;
    assert_eq!(k.verdict, Verdict::Refuted);
    for w in &k.witnesses {
        assert_eq!(w["kind"], "lineality-obstruction");
        assert!(recheck_witness(&e, "weak_projective", w, 1, 1e-9));
    }
}

#[test]
fn disc_tube_hyperplanes_split_by_the_sign_of_im_gamma() {
    // stable disjoint lines z1 = s z2 + g need |Im g|^2 > 1 + |s|^2
    let e = set("disc-tube-prop49");
    let k = check_connectivity(&e, &plan());
    assert_eq!(k.verdict, Verdict::Refuted);
    let w = &k.witnesses[0];
    assert_eq!(w["components"].as_array().unwrap().len(), 2);
    assert!(recheck_witness(&e, "connectivity", w, 1, 1e-9));
    let reps = w["representatives"].as_array().unwrap();
    let sign = |r: &serde_json::Value| {
        let a1 = C::new(r["a"][0][0].as_f64().unwrap(), r["a"][0][1].as_f64().unwrap());
        let beta = C::new(r["beta"][0].as_f64().unwrap(), r["beta"][1].as_f64().unwrap());
        (beta / a1.conj()).im.signum()
    };
    assert_eq!(sign(&reps[0]) * sign(&reps[1]), -1.0);
}

#[test]
fn disc_tube_complex_tangents_at_the_equator_contain_the_fiber() {
    let e = set("disc-tube-prop49");
    let k = check_complex_tangent_halfline(&e, &plan());
    assert_eq!(k.verdict, Verdict::Refuted);
    for w in &k.witnesses {
        let v: Vec<f64> = serde_json::from_value(w["direction"].clone()).unwrap();
        assert!(v[0].abs() > 1.0 - 1e-6, "{v:?}");
    }
}

#[test]
fn slab_connectivity_is_refuted() {
    let e = ConvexSet::new(ConvexSetSpec::Polyhedron {
        a: vec![vec![1.0, 0.0, 0.0, 0.0], vec![-1.0, 0.0, 0.0, 0.0]],
        b: vec![1.0, 1.0],
    })
    .unwrap();
    let c = certify_oka_complement(&e, &plan());
    assert_eq!(c.overall, Verdict::Refuted);
}

#[test]
fn paraboloid_graph_has_no_tangent_halflines() {
    let phi = ConvexFunctionSpec::Quadratic {
        q: vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 0.0]],
        l: vec![0.0; 3],
        c: 0.0,
    };
    let e = ConvexSet::new(ConvexSetSpec::Epigraph { phi, mode: EpigraphMode::Full, n: 2 }).unwrap();
    assert_eq!(check_complex_tangent_halfline(&e, &plan()).verdict, Verdict::VerifiedSampled);
}

#[test]
fn line_lift_on_round_and_siegel_sets() {
    assert_eq!(check_line_lift(&set("ball"), &plan()).verdict, Verdict::VerifiedSampled);
    assert_eq!(check_line_lift(&set("siegel2"), &plan()).verdict, Verdict::VerifiedSampled);
    let r2 = check_line_lift(&set("r2-in-c2"), &plan());
    assert_eq!(r2.verdict, Verdict::Refuted);
    assert_eq!(r2.witnesses[0]["kind"], "tube");
}

#[test]
fn chart_compact_cases() {
    let grid = [1.0, 0.1, 0.01];
    let p = plan();
    let s = check_chart_compact(&set("siegel2"), &[z2_const(0.0)], &grid, &p);
    assert_eq!(s.verdict, Verdict::VerifiedSampled);
    assert!(s.note.ends_with("c = 0.01"), "{}", s.note);
    let h = check_chart_compact(&set("halfspace"), &[z2_const(0.0)], &grid, &p);
    assert_eq!(h.verdict, Verdict::Refuted);
    let v: Vec<f64> = serde_json::from_value(h.witnesses[0]["v"].clone()).unwrap();
    assert!(v[2].abs() < 1e-9 && v[3].abs() < 1e-9);
    assert_eq!(check_chart_compact(&set("ball"), &[z2_const(3.0)], &grid, &p).verdict, Verdict::VerifiedSampled);
}

#[test]
fn certificates_are_deterministic_and_execution_independent() {
    let e = set("siegel2");
    let a = certify_oka_complement(&e, &plan()).to_json();
    let b = certify_oka_complement(&e, &plan()).to_json();
    assert_eq!(a, b);
    let seq = SamplingPlan { execution: okacert::Execution::Sequential, ..plan() };
    assert_eq!(a, certify_oka_complement(&e, &seq).to_json());
}

#[test]
fn refuted_witnesses_replay() {
    for name in ["halfspace", "r2-in-c2", "disc-tube-prop49"] {
        let e = set(name);
        let c = certify_oka_complement(&e, &plan());
        for k in c.checks.iter().filter(|k| k.verdict == Verdict::Refuted) {
            for w in &k.witnesses {
                assert!(recheck_witness(&e, &k.name, w, 3, 1e-9), "{name} {}", k.name);
            }
        }
    }
}

#[test]
fn dilation_keeps_recession_driven_tags() {
    for name in ["siegel2", "ball", "halfspace"] {
        let base = gallery::lookup(name).unwrap();
        let d = base_dim(&base);
        let c0 = certify_oka_complement(&ConvexSet::new(base.clone()).unwrap(), &plan());
        for k in [2.0, 1.5, 4.0 / 3.0] {
            let dil = ConvexSetSpec::Dilation { base: Box::new(base.clone()), factor: k, center: vec![0.0; d] };
            let c1 = certify_oka_complement(&ConvexSet::new(dil).unwrap(), &plan());
            for n in ["lineality", "weak_projective", "chart_compact"] {
                assert_eq!(c0.check(n).unwrap().verdict, c1.check(n).unwrap().verdict, "{name} {k} {n}");
            }
        }
    }
}

fn base_dim(s: &ConvexSetSpec) -> usize {
    ConvexSet::new(s.clone()).unwrap().dim()
}

#[test]
fn sweep_from_a_point_to_a_parallel_hyperplane() {
    let ball = set("ball");
    let path = hull_sweep_witness(&ball, &z2_const(2.0), &[3.0, 0.0, 0.0, 0.0], 64, 10.0).unwrap();
    assert!(path.monotone);
    assert!(path.steps.len() >= 64);
    assert!(path.steps.iter().all(|s| s.margin > 0.0));
    assert!(path.steps.last().unwrap().chart_offset > 10.0);
    let r = path.steps[0].hyperplane.residual(&[C::new(3.0, 0.0), C::new(0.0, 0.0)]);
    assert!(r < 1e-12);
}

#[test]
fn sweep_around_a_point() {
    let mut a = Vec::new();
    for i in 0..4 {
        let mut r = vec![0.0; 4];
        r[i] = 1.0;
        a.push(r.clone());
        r[i] = -1.0;
        a.push(r);
    }
    let point = ConvexSet::new(ConvexSetSpec::Polyhedron { a, b: vec![0.0; 8] }).unwrap();
    let l0 = Hyperplane::new(&[C::new(0.6, 0.0), C::new(0.0, 0.8)], C::new(1.0, 1.0)).unwrap();
    for p in [[1.0, 2.0, -1.0, 0.5], [0.0, 0.0, 0.0, 3.0], [-2.0, 0.1, 0.3, 0.0]] {
        assert!(hull_sweep_witness(&point, &l0, &p, 32, 10.0).is_ok());
    }
}

#[test]
fn sweep_preconditions() {
    let ball = set("ball");
    assert_eq!(hull_sweep_witness(&set("siegel2"), &z2_const(-1.0), &[0.0, 0.0, 0.0, -2.0], 8, 5.0), Err(SweepError::Unbounded));
    assert_eq!(hull_sweep_witness(&ball, &z2_const(0.5), &[3.0, 0.0, 0.0, 0.0], 8, 5.0), Err(SweepError::NotDisjoint));
    assert_eq!(hull_sweep_witness(&ball, &z2_const(2.0), &[0.1, 0.0, 0.0, 0.0], 8, 5.0), Err(SweepError::BadPoint));
}
