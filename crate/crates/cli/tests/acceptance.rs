//! Acceptance run: one PASS/FAIL line per criterion. Exits nonzero when a
//! criterion's outcome differs from what is recorded below; the disc-tube
//! line is an expected FAIL (see `disc_tube`).

use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64 as C;
use okacert::basin::{basin_report, BasinConfig, GridSpec, Slice};
use okacert::certify::{certify_oka_complement, recheck_witness, SamplingPlan, Verdict};
use okacert::geometry::{cayley_identity_residual, AffineSubspaceC, ComplexPoint};
use okacert::smoothing::{
    hessian_min_eig, normcombo_terms, outer_sequence, rmax_quadrature, rmax_with, smooth_normcombo, Mollifier, OuterOptions,
    WeightSpec,
};
use okacert::stability::is_stable;
use okacert::{gallery, linalg, sampling, ConvexSet, ConvexSetSpec};

struct Line {
    id: usize,
    pass: bool,
    summary: String,
}

fn line(id: usize, pass: bool, summary: String) -> Line {
    Line { id, pass, summary }
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn cayley() -> Line {
    let t = Instant::now();
    let mut rng = sampling::rng(42, 0);
    let (mut worst, mut n) = (0.0f64, 0);
    while n < 10_000 {
        let w = ComplexPoint::from_real(&sampling::ball(&mut rng, 4, 1.0));
        if (C::new(1.0, 0.0) - w.0[1]).norm() <= 0.05 {
            continue;
        }
        worst = worst.max(cayley_identity_residual(&w).unwrap());
        n += 1;
    }
    let el = t.elapsed();
    line(1, worst <= 1e-10 && el < Duration::from_secs(1), format!("Cayley identity on 10^4 points: max residual {worst:.2e} in {}", secs(el)))
}

fn siegel() -> Line {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["siegel2", "siegel3"] {
        let t = Instant::now();
        let c = certify_oka_complement(&ConvexSet::new(gallery::lookup(name).unwrap()).unwrap(), &SamplingPlan::default());
        let el = t.elapsed();
        let refuted = c.checks.iter().filter(|k| k.verdict == Verdict::Refuted).count();
        pass &= c.overall == Verdict::VerifiedSampled && refuted == 0 && el < Duration::from_secs(30);
        parts.push(format!("{name} {} with {refuted} refuted checks in {}", c.overall.as_str(), secs(el)));
    }
    line(2, pass, format!("Siegel certification: {}", parts.join("; ")))
}

fn negative_controls() -> Line {
    let plan = SamplingPlan::default();
    let h = ConvexSet::new(gallery::lookup("halfspace").unwrap()).unwrap();
    let ch = certify_oka_complement(&h, &plan);
    let hk = ch.check("complex_tangent_halfline").unwrap();
    let h_ok = ch.overall == Verdict::Refuted
        && hk.verdict == Verdict::Refuted
        && !hk.witnesses.is_empty()
        && hk.witnesses.iter().all(|w| recheck_witness(&h, &hk.name, w, 7, 1e-9));
    let r = ConvexSet::new(gallery::lookup("r2-in-c2").unwrap()).unwrap();
    let cr = certify_oka_complement(&r, &plan);
    let rk = cr.check("weak_projective").unwrap();
    let r_ok = cr.overall == Verdict::Refuted
        && rk.verdict == Verdict::Refuted
        && !rk.witnesses.is_empty()
        && rk.witnesses.iter().all(|w| recheck_witness(&r, &rk.name, w, 7, 1e-9));
    line(
        3,
        h_ok && r_ok,
        format!(
            "negative controls: halfspace {} ({} halfline witnesses rechecked), r2-in-c2 {} on weak_projective ({} witnesses rechecked)",
            ch.overall.as_str(),
            hk.witnesses.len(),
            cr.overall.as_str(),
            rk.witnesses.len()
        ),
    )
}

/// The target here is Verified-Sampled, which this implementation does not
/// reach: stable hyperplanes missing the disc-tube split into two families by
/// the sign of Im(beta / conj(a1)), and the tube's equator carries complex
/// tangent lines containing the fiber direction. The run is expected to
/// report Refuted with rechecked witnesses; the line prints FAIL.
fn disc_tube() -> (Line, bool) {
    let t = Instant::now();
    let e = ConvexSet::new(gallery::lookup("disc-tube-prop49").unwrap()).unwrap();
    let c = certify_oka_complement(&e, &SamplingPlan::default());
    let el = t.elapsed();
    let refuted: Vec<&str> = c.checks.iter().filter(|k| k.verdict == Verdict::Refuted).map(|k| k.name.as_str()).collect();
    let replay = c
        .checks
        .iter()
        .filter(|k| k.verdict == Verdict::Refuted)
        .all(|k| k.witnesses.iter().all(|w| recheck_witness(&e, &k.name, w, 7, 1e-9)));
    let as_recorded = c.overall == Verdict::Refuted && refuted == ["complex_tangent_halfline", "connectivity"] && replay;
    let pass = c.overall == Verdict::VerifiedSampled && el < Duration::from_secs(30);
    let summary = format!(
        "disc-tube: overall {} in {} (Refuted on {}; witnesses replay: {replay}); Verified-Sampled not reached",
        c.overall.as_str(),
        secs(el),
        refuted.join(", ")
    );
    (line(4, pass, summary), as_recorded)
}

fn normcombo() -> Line {
    let spec = ConvexSetSpec::Normcombo { n: 2, c: 1.0, a: vec![1.0], b: vec![1.0] };
    let eta = 0.1;
    let psi = smooth_normcombo(&normcombo_terms(&spec).unwrap(), eta).unwrap();
    let mut rng = sampling::rng(14, 0);
    let mut bad = 0;
    for _ in 0..10_000 {
        let x = sampling::ball(&mut rng, 3, 5.0);
        let (p, f) = (psi.value(&x), psi.phi(&x));
        if p > f + 1e-12 || p < f - 3.0 * eta - 1e-12 {
            bad += 1;
        }
    }
    let mut min_eig = f64::INFINITY;
    for _ in 0..1000 {
        let x = sampling::ball(&mut rng, 3, 5.0);
        min_eig = min_eig.min(hessian_min_eig(&|y| psi.value(y), &x, 1e-4));
    }
    line(
        5,
        bad == 0 && min_eig > 0.0,
        format!("norm-combination smoothing: {bad} sandwich violations on 10^4 points, min Hessian eigenvalue {min_eig:.3e} on 10^3 points"),
    )
}

fn rmax_suite() -> Line {
    let delta = 0.1;
    let m = Mollifier::new(&WeightSpec::new(delta)).unwrap();
    let mut rng = sampling::rng(61, 0);
    let (mut bound, mut sym, mut mono, mut convex, mut fast) = (0, 0, 0, 0, 0.0f64);
    for i in 0..100_000 {
        let k = 2 + i % 2;
        let u: Vec<f64> = (0..k).map(|_| sampling::uniform(&mut rng, -0.3, 0.3)).collect();
        let top = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let r = rmax_with(&u, &m);
        if r < top - 1e-12 || r > top + delta + 1e-12 {
            bound += 1;
        }
        let mut rev = u.clone();
        rev.reverse();
        if (rmax_with(&rev, &m) - r).abs() > 1e-12 {
            sym += 1;
        }
        let mut up = u.clone();
        up[i % k] += sampling::uniform(&mut rng, 0.0, 0.1);
        if rmax_with(&up, &m) < r - 1e-12 {
            mono += 1;
        }
        let v: Vec<f64> = (0..k).map(|_| sampling::uniform(&mut rng, -0.3, 0.3)).collect();
        let s = sampling::uniform(&mut rng, 0.0, 1.0);
        let mid: Vec<f64> = u.iter().zip(&v).map(|(a, b)| (1.0 - s) * a + s * b).collect();
        if rmax_with(&mid, &m) > (1.0 - s) * r + s * rmax_with(&v, &m) + 1e-12 {
            convex += 1;
        }
        // separated tuple: the fast path returns the max; compare with the full sum
        let mut sep = u.clone();
        sep[0] = top + delta + sampling::uniform(&mut rng, 0.0, 1.0);
        fast = fast.max((rmax_with(&sep, &m) - rmax_quadrature(&sep, &m)).abs());
    }
    line(
        6,
        bound + sym + mono + convex == 0 && fast <= 1e-10,
        format!(
            "rmax suite on 10^5 tuples: {bound} bound, {sym} symmetry, {mono} monotonicity, {convex} convexity violations; fast path vs quadrature {fast:.1e}"
        ),
    )
}

fn outer_pipeline() -> Line {
    let t = Instant::now();
    let e = ConvexSet::new(ConvexSetSpec::Polyhedron { a: vec![vec![1.0, -1.0], vec![-1.0, -1.0]], b: vec![0.0, 0.0] }).unwrap();
    let st = outer_sequence(&e, 3, 5.0, &OuterOptions::default()).unwrap();
    let rep = st.verify_nesting(&e, 200, Default::default());
    let max_tau = rep.max_tau_on_e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let hess: Vec<f64> = (1..=3).map(|k| st.min_hessian_eig(k, 1000, 7)).collect();
    let el = t.elapsed();
    let pass = rep.nesting_violations == 0
        && rep.e_violations == 0
        && max_tau <= -0.5
        && hess.iter().all(|&h| h > 0.0)
        && el < Duration::from_secs(60);
    line(
        7,
        pass,
        format!(
            "outer approximations of x2 >= |x1|: {} nesting and {} containment violations on 200x200, max tau on E {max_tau:.3}, min Hessian eigenvalues {:.2e} in {}",
            rep.nesting_violations,
            rep.e_violations,
            hess.iter().copied().fold(f64::INFINITY, f64::min),
            secs(el)
        ),
    )
}

/// Brute force: a complex line through an interior point is unstable when a
/// ray along some direction of it stays in the set.
fn probe_unstable(e: &ConvexSet, x0: &[f64], l: &AffineSubspaceC) -> bool {
    let dirs = l.realify().directions;
    (0..20_000).any(|i| {
        let th = std::f64::consts::TAU * i as f64 / 20_000.0;
        let v = linalg::axpy(&linalg::scale(&dirs[0], th.cos()), th.sin(), &dirs[1]);
        e.ray_probe(x0, &v)
    })
}

fn stability_oracle() -> Line {
    let (mut agree, mut disagree, mut stable, mut invariance) = (0, 0, 0, 0);
    for seed in 0..100u64 {
        let mut rng = sampling::rng(seed, 80);
        let m = 2 + (seed % 7) as usize;
        let x0 = sampling::gaussian(&mut rng, 4);
        let mut a = Vec::new();
        let mut b = Vec::new();
        for _ in 0..m {
            let row = sampling::gaussian(&mut rng, 4);
            b.push(linalg::dot(&row, &x0) + sampling::uniform(&mut rng, 0.1, 2.0));
            a.push(row);
        }
        let spec = ConvexSetSpec::Polyhedron { a, b };
        let e = ConvexSet::new(spec.clone()).unwrap();
        let d = sampling::gaussian(&mut rng, 4);
        let l = AffineSubspaceC::new(ComplexPoint::from_real(&x0), &[vec![C::new(d[0], d[1]), C::new(d[2], d[3])]]);
        let v = is_stable(&e, &l);
        if v.is_stable() != probe_unstable(&e, &x0, &l) && v.tag() != "Inconclusive" {
            agree += 1;
        } else {
            disagree += 1;
        }
        if v.is_stable() {
            stable += 1;
        }
        let w = sampling::gaussian(&mut rng, 4);
        let shifted = AffineSubspaceC { base: ComplexPoint::from_real(&linalg::add(&x0, &w)), ..l.clone() };
        let dil = ConvexSet::new(ConvexSetSpec::Dilation { base: Box::new(spec), factor: 2.0, center: vec![0.0; 4] }).unwrap();
        if is_stable(&e, &shifted).tag() != v.tag() || is_stable(&dil, &l).tag() != v.tag() {
            invariance += 1;
        }
    }
    line(
        8,
        disagree == 0 && invariance == 0,
        format!(
            "stability vs ray-probe oracle on 100 polyhedra in R^4: {agree} agree, {disagree} disagree ({stable} stable); {invariance} translation/dilation mismatches"
        ),
    )
}

fn basin() -> Line {
    let t = Instant::now();
    let base = BasinConfig::default();
    let slices = [
        ("z1 = f1", base.grid.clone()),
        ("z2 = 0.2 through K", GridSpec { slice: Slice::Z2, fixed: C::new(0.2, 0.0), center: C::new(2.0, 0.0), half_width: 2.0, n: 200 }),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, grid) in slices {
        let r = basin_report(&BasinConfig { grid, ..base.clone() }).unwrap();
        let est = r.design.estimate.as_ref().unwrap();
        let ratios_ok = est.min_ratio >= 0.3 && est.max_ratio <= 0.52;
        pass &= r.design.verdict == Verdict::VerifiedSampled
            && ratios_ok
            && r.basin_in_k == 0
            && r.basin_on_hyperplane == 0
            && r.bracket_violations == 0
            && r.verdict == Verdict::VerifiedSampled;
        parts.push(format!(
            "{name}: {} basin points, {} in K, {} on z2 = 0, {} bracket violations over {} tracked",
            r.basin, r.basin_in_k, r.basin_on_hyperplane, r.bracket_violations, r.tracked
        ));
        if parts.len() == 1 {
            parts.insert(0, format!("ratios [{:.3}, {:.3}]", est.min_ratio, est.max_ratio));
        }
    }
    let el = t.elapsed();
    pass &= el < Duration::from_secs(120);
    line(9, pass, format!("basin run: {}; {}", parts.join("; "), secs(el)))
}

fn determinism() -> Line {
    let exe = env!("CARGO_BIN_EXE_okacert");
    let dir = tempfile::tempdir().unwrap();
    let wedge = dir.path().join("wedge.json");
    std::fs::write(&wedge, r#"{"type":"polyhedron","A":[[1,-1],[-1,-1]],"b":[0,0]}"#).unwrap();
    let out = |n: &str| dir.path().join(n).display().to_string();
    let runs: Vec<(String, Vec<String>)> = vec![
        ("siegel2".into(), vec!["certify".into(), "siegel2".into(), "--out".into(), out("s2.json")]),
        ("siegel3".into(), vec!["certify".into(), "siegel3".into(), "--out".into(), out("s3.json")]),
        ("halfspace".into(), vec!["certify".into(), "halfspace".into(), "--out".into(), out("h.json")]),
        ("r2-in-c2".into(), vec!["certify".into(), "r2-in-c2".into(), "--out".into(), out("r2.json")]),
        ("disc-tube".into(), vec!["certify".into(), "disc-tube-prop49".into(), "--out".into(), out("dt.json")]),
        ("approx".into(), vec!["approx".into(), wedge.display().to_string(), "--out".into(), out("ap.json")]),
        ("basin".into(), vec!["basin".into(), "--out".into(), out("b.json")]),
    ];
    let mut mismatched = Vec::new();
    for (name, args) in &runs {
        Command::new(exe).args(args).output().unwrap();
        let primary = args.last().unwrap().clone();
        let manifest: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(format!("{primary}.manifest.json")).unwrap()).unwrap();
        let outputs: Vec<String> = serde_json::from_value(manifest["outputs"].clone()).unwrap();
        let first: Vec<Vec<u8>> = outputs.iter().map(|p| std::fs::read(p).unwrap()).collect();
        Command::new(exe).args(["replay", &format!("{primary}.manifest.json")]).output().unwrap();
        let second: Vec<Vec<u8>> = outputs.iter().map(|p| std::fs::read(p).unwrap()).collect();
        if first != second {
            mismatched.push(name.clone());
        }
    }
    let cay = |_: ()| Command::new(exe).args(["cayley", "--check", "10000"]).output().unwrap().stdout;
    if cay(()) != cay(()) {
        mismatched.push("cayley".into());
    }
    line(
        10,
        mismatched.is_empty(),
        format!("determinism: {} commands replayed from their manifests, mismatches: [{}]", runs.len() + 1, mismatched.join(", ")),
    )
}

fn main() {
    let (dt, dt_as_recorded) = disc_tube();
    let lines = vec![cayley(), siegel(), negative_controls(), dt, normcombo(), rmax_suite(), outer_pipeline(), stability_oracle(), basin(), determinism()];
    let mut unexpected = Vec::new();
    for l in &lines {
        println!("AC{:<2} {} {}", l.id, if l.pass { "PASS" } else { "FAIL" }, l.summary);
        let expected = if l.id == 4 { false } else { true };
        if l.pass != expected {
            unexpected.push(l.id);
        }
    }
    if !dt_as_recorded {
        unexpected.push(4);
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected outcomes: {unexpected:?}");
        std::process::exit(1);
    }
}
