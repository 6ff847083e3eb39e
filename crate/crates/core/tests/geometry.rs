use num_complex::Complex64 as C;
use okacert::geometry::*;
use okacert::stability::*;
use okacert::{gallery, ConvexSet, ConvexSetSpec};

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn close(a: &[C], b: &[C], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
}

#[test]
fn cayley_by_hand() {
    let z = cayley_forward(&ComplexPoint(vec![c(0.0, 0.0), c(0.0, 0.0)])).unwrap();
    assert!(close(&z.0, &[c(0.0, 0.0), c(0.0, 1.0)], 1e-15));
    let z = cayley_forward(&ComplexPoint(vec![c(0.0, 0.0), c(0.5, 0.0)])).unwrap();
    assert!(close(&z.0, &[c(0.0, 0.0), c(0.0, 3.0)], 1e-15));
    // a point of the unit sphere lands on Im z2 = |z1|^2
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let z = cayley_forward(&ComplexPoint(vec![c(r, 0.0), c(r, 0.0)])).unwrap();
    assert!((z.0[1].im - z.0[0].norm_sqr()).abs() < 1e-12);
    assert!(z.0[1].re.abs() < 1e-15);
    assert_eq!(cayley_forward(&ComplexPoint(vec![c(0.0, 0.0), c(1.0, 0.0)])), Err(GeometryError::DegenerateChart));
}

#[test]
fn realify_and_j() {
    let z = [c(1.0, 2.0), c(3.0, 4.0)];
    assert_eq!(realify(&z), vec![1.0, 2.0, 3.0, 4.0]);
    assert_eq!(complexify(&[1.0, 2.0, 3.0, 4.0]), z.to_vec());
    // J is multiplication by i
    assert_eq!(j_op(&[1.0, 2.0, 3.0, 4.0]), vec![-2.0, 1.0, -4.0, 3.0]);
    assert_eq!(herm(&[c(0.0, 1.0)], &[c(0.0, 1.0)]), c(1.0, 0.0));
    assert!((cnorm(&z) - 30f64.sqrt()).abs() < 1e-15);
}

#[test]
fn hyperplane_residual() {
    let h = AffineSubspaceC::hyperplane(&[c(1.0, 0.0), c(0.0, 1.0)], c(2.0, 0.0));
    assert_eq!((h.ambient(), h.dim()), (2, 1));
    assert!(h.residual(&[c(2.0, 0.0), c(0.0, 0.0)]) < 1e-14);
    assert!(h.residual(&[c(0.0, 0.0), c(0.0, 2.0)]) < 1e-14);
    assert!(h.residual(&[c(0.0, 0.0), c(0.0, 0.0)]) > 0.5);
}

#[test]
fn siegel_recession_and_support() {
    let s = ConvexSet::new(gallery::lookup("siegel2").unwrap()).unwrap();
    assert!(s.recession_member(&[0.0, 0.0, 0.0, 1.0]).unwrap());
    assert!(!s.recession_member(&[1.0, 0.0, 0.0, 0.0]).unwrap());
    // Re z2 is a line of the domain
    assert!(s.recession_member(&[0.0, 0.0, -1.0, 0.0]).unwrap());
    assert_eq!(s.lineality().len(), 1);
    assert!(s.contains(&[0.5, 0.0, 7.0, 0.3], 0.0).unwrap());
    assert!(!s.contains(&[0.5, 0.0, 0.0, 0.2], 0.0).unwrap());
    let b = ConvexSet::new(ConvexSetSpec::Ball { center: vec![1.0, 0.0, 0.0, 0.0], radius: 2.0 }).unwrap();
    assert!((b.support_sup(&[1.0, 0.0, 0.0, 0.0]).unwrap() - 3.0).abs() < 1e-12);
    assert!((b.support_sup(&[0.0, -2.0, 0.0, 0.0]).unwrap() - 4.0).abs() < 1e-12);
}

#[test]
fn stability_verdicts() {
    let s = ConvexSet::new(gallery::lookup("siegel2").unwrap()).unwrap();
    // z1 = 0 meets the Siegel domain in a half-plane of z2: unstable
    let axis = AffineSubspaceC::hyperplane(&[c(1.0, 0.0), c(0.0, 0.0)], c(0.0, 0.0));
    assert_eq!(is_stable(&s, &axis).tag(), "Unstable");
    assert!(halfline_in_intersection(&s, &axis).unwrap().is_some());
    // z2 = i meets it in a disc
    let level = AffineSubspaceC::hyperplane(&[c(0.0, 0.0), c(1.0, 0.0)], c(0.0, 1.0));
    assert!(is_stable(&s, &level).is_stable());
    assert!(halfline_in_intersection(&s, &level).unwrap().is_none());
    let ball = ConvexSet::new(gallery::lookup("ball").unwrap()).unwrap();
    assert!(is_stable(&ball, &axis).is_stable());
}
