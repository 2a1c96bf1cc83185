//! The embedding workflow used by the batch binary, driven as a library:
//! parse a TOML run configuration, execute it, write the artifact set, and
//! reuse the run as a cached reference for a later comparison at a coarser
//! resolution. Everything lands under ./out/batch-demo.

use swe::config::{parse_config, scheme_name};
use swe::driver::{self, compare_to_reference, ensure_reference};

const REFERENCE: &str = r#"
problem = "perturbation-2d"

[scheme]
flux = "es"
mesh = "static"

[run]
resolution = [150, 75]
output-times = [0.12]
"#;

const COARSE: &str = r#"
problem = "perturbation-2d"

[scheme]
flux = "es"
mesh = "static"

[run]
resolution = [90, 45]
output-times = [0.12]

[reference]
run-id = "RUN_ID"
"#;

fn main() {
    let root = std::path::Path::new("out/batch-demo");

    let ref_cfg = parse_config(REFERENCE).expect("the embedded config is well-formed");
    println!(
        "reference: {} with the {} flux, id {}",
        ref_cfg.problem,
        scheme_name(ref_cfg.scheme),
        ref_cfg.content_hash(),
    );
    let handle = ensure_reference(&ref_cfg, root).expect("reference run");
    println!(
        "  {} under {}",
        if handle.fresh.is_some() { "computed and cached" } else { "reused from cache" },
        handle.dir.display(),
    );

    let coarse_text = COARSE.replace("RUN_ID", &handle.run_id);
    let cfg = parse_config(&coarse_text).expect("the embedded config is well-formed");
    let outcome = driver::execute(&cfg).expect("coarse run");
    driver::write_run_artifacts(&outcome, &root.join("coarse")).expect("artifacts");
    let report = compare_to_reference(&cfg, &outcome, root).expect("declared reference");
    for (variable, n) in report {
        println!("  coarse vs reference {variable}: l1 = {:.3e}", n.l1);
    }
    println!("rerun this example: the reference is now reused from cache.");
}
