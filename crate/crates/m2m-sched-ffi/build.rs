use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = env::var("CARGO_MANIFEST_DIR").unwrap();
    let out = PathBuf::from(&crate_dir).join("include").join("m2m_sched.h");
    std::fs::create_dir_all(out.parent().unwrap()).expect("create include dir");
    cbindgen::generate(&crate_dir)
        .expect("unable to generate C header")
        .write_to_file(&out);
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
}
