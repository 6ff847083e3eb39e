//! Built-in example sets. Coordinates are interleaved `(x1, y1, x2, y2, ...)`.

use crate::convex::ConvexSetSpec;

pub struct Example {
    pub name: &'static str,
    pub about: &'static str,
    pub spec: fn() -> ConvexSetSpec,
}

fn siegel2() -> ConvexSetSpec {
    ConvexSetSpec::Siegel { n: 2 }
}

fn siegel3() -> ConvexSetSpec {
    ConvexSetSpec::Siegel { n: 3 }
}

fn cone_ex14() -> ConvexSetSpec {
    ConvexSetSpec::Normcombo { n: 2, c: 1.0, a: vec![1.0], b: vec![1.0] }
}

// In the chart w = (z'/z_n, 1/z_n) the complement of |z_n|^2 < c(1 + |z'|^2)
// is the closed ball |w|^2 <= 1/c together with {w_n = 0}; c = 1 here.
fn tube_ex45() -> ConvexSetSpec {
    ConvexSetSpec::Ball { center: vec![0.0; 4], radius: 1.0 }
}

// y1^2 + |z2|^2 <= 1: the unit ball of (y1, x2, y2) times the x1 axis
fn disc_tube() -> ConvexSetSpec {
    ConvexSetSpec::Tube {
        base: Box::new(ConvexSetSpec::Ball { center: vec![0.0; 4], radius: 1.0 }),
        fiber: vec![vec![1.0, 0.0, 0.0, 0.0]],
    }
}

// the real plane R^2 inside C^2, as y1 = y2 = 0
fn r2_in_c2() -> ConvexSetSpec {
    let e = |i: usize, s: f64| {
        let mut r = vec![0.0; 4];
        r[i] = s;
        r
    };
    ConvexSetSpec::Polyhedron { a: vec![e(1, 1.0), e(1, -1.0), e(3, 1.0), e(3, -1.0)], b: vec![0.0; 4] }
}

fn halfspace() -> ConvexSetSpec {
    ConvexSetSpec::Polyhedron { a: vec![vec![0.0, 0.0, 0.0, -1.0]], b: vec![0.0] }
}

fn ball() -> ConvexSetSpec {
    ConvexSetSpec::Ball { center: vec![0.0; 4], radius: 1.0 }
}

pub const GALLERY: &[Example] = &[
    Example { name: "siegel2", about: "closed Siegel domain Im z2 >= |z1|^2 in C^2", spec: siegel2 },
    Example { name: "siegel3", about: "closed Siegel domain Im z3 >= |z1|^2 + |z2|^2 in C^3", spec: siegel3 },
    Example { name: "cone-ex14", about: "Im z2 >= |Re z2| + |Re z1| + |Im z1|", spec: cone_ex14 },
    Example { name: "tube-ex45", about: "closed unit ball, the chart picture of |z2|^2 >= 1 + |z1|^2", spec: tube_ex45 },
    Example { name: "disc-tube-prop49", about: "closed disc-tube y1^2 + |z2|^2 <= 1 in C^2", spec: disc_tube },
    Example { name: "r2-in-c2", about: "the real plane R^2 in C^2", spec: r2_in_c2 },
    Example { name: "halfspace", about: "closed halfspace Im z2 >= 0 in C^2", spec: halfspace },
    Example { name: "ball", about: "closed unit ball in C^2", spec: ball },
];

pub fn lookup(name: &str) -> Option<ConvexSetSpec> {
    GALLERY.iter().find(|e| e.name == name).map(|e| (e.spec)())
}
