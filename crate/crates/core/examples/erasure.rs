//! Run both erasers on the bundled setups, then the two impossibility
//! constructions.

use std::path::Path;

use unimark::erasure::{
    verify_counterexample_multimodal, verify_counterexample_universal, SetupFile, Simulation,
};

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("setups");
    for name in ["line.json", "universal.json"] {
        let file = SetupFile::load(&dir.join(name)).unwrap();
        match file.run(None).unwrap() {
            Simulation::Report(r) => println!(
                "{name}: {:?} eraser succeeds with probability {} (needs {}), loss excess {} <= {}",
                r.mode, r.erase_success_prob, r.required_success_prob, r.loss_excess, r.bound
            ),
            Simulation::Search(_) => unreachable!(),
        }
    }

    let multimodal = verify_counterexample_multimodal().unwrap();
    println!(
        "multimodal: every deterministic eraser fails = {}",
        multimodal.search.all_fail
    );
    for c in &multimodal.search.candidates {
        println!(
            "  x3 -> {}: {}",
            c.mapping["x3"],
            serde_json::to_string(&c.failures).unwrap()
        );
    }

    let universal = verify_counterexample_universal(5).unwrap();
    println!(
        "universal (n=5): every deterministic eraser fails = {}",
        universal.all_fail
    );
    for c in universal.cases.iter().take(3) {
        println!(
            "  Erase(0)={} natural detection {} vs posterior success {}",
            c.erase_zero, c.natural_detection, c.posterior_success
        );
    }
}
