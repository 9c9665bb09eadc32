//! Language pack validation.
//!
//! cargo run -p kielo --example validate -- [pack-dir...]

use std::path::PathBuf;

use kielo::commands::cmd_pack_validate;

fn main() {
    let mut dirs: Vec<PathBuf> = std::env::args().skip(1).map(PathBuf::from).collect();
    if dirs.is_empty() {
        let packs = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../packs");
        dirs = ["fi", "ru", "de"].iter().map(|l| packs.join(l)).collect();
    }
    let mut ok = true;
    for d in dirs {
        let (valid, report) = cmd_pack_validate(&d);
        print!("{}: {report}", d.display());
        ok &= valid;
    }
    std::process::exit(i32::from(!ok));
}
