use std::time::Instant;

use gaphilbert::acceptance::evaluate;
use gaphilbert::{Lab, RunConfig};

fn main() {
    let t0 = Instant::now();
    let lab = Lab::build(&RunConfig::default()).expect("reference configuration builds");
    let mut failed = 0;
    for id in 1..=12 {
        let t = Instant::now();
        let r = evaluate(&lab, id);
        if !r.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<34} {}  {}  ({:.1}s)",
            r.id,
            r.key,
            if r.pass { "PASS" } else { "FAIL" },
            r.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("{} of 12 passed in {:.1}s", 12 - failed, t0.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
