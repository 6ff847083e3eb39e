use okacert::certify::{certify_oka_complement, SamplingPlan};
use okacert::convex::ConvexSet;
use okacert::gallery::GALLERY;
use std::time::Instant;

fn main() {
    let only: Vec<String> = std::env::args().skip(1).collect();
    for e in GALLERY {
        if !only.is_empty() && !only.iter().any(|o| o == e.name) {
            continue;
        }
        let set = ConvexSet::new((e.spec)()).unwrap();
        let t = Instant::now();
        let c = certify_oka_complement(&set, &SamplingPlan::default());
        println!("{} {:?} {:.2}s", e.name, c.overall, t.elapsed().as_secs_f64());
        for ch in &c.checks {
            println!("   {:28} {:16} w={} n={} {}", ch.name, ch.verdict.as_str(), ch.witnesses.len(), ch.samples, ch.note);
        }
    }
}
