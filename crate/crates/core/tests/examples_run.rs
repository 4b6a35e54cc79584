//! Every example builds with the test profile; run each and require success.

use std::path::PathBuf;
use std::process::Command;

const EXAMPLES: [&str; 10] = [
    "domain_geometry",
    "beurling_density",
    "convolution_inequalities",
    "frame_bounds",
    "windowed_construction",
    "tight_frame_lattice",
    "tight_frame_obstruction",
    "gabor_zak",
    "translates_no_frame",
    "weighted_measures",
];

fn example_dir() -> PathBuf {
    // target/<profile>/deps/<test binary> -> target/<profile>/examples
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().join("examples")
}

#[test]
fn examples_run() {
    let dir = example_dir();
    let listed: Vec<String> = std::fs::read_dir(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples"))
        .unwrap()
        .map(|e| e.unwrap().path().file_stem().unwrap().to_string_lossy().into_owned())
        .collect();
    for name in listed.iter() {
        assert!(EXAMPLES.contains(&name.as_str()), "example {name} is not covered");
    }
    for name in EXAMPLES {
        let bin = dir.join(format!("{name}{}", std::env::consts::EXE_SUFFIX));
        assert!(bin.exists(), "{} not built", bin.display());
        let out = Command::new(&bin).output().unwrap();
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stdout.is_empty(), "{name} printed nothing");
    }
}
