//! Regenerate the bundled system files from the preset builders.

use std::path::Path;

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    std::fs::create_dir_all(&dir).expect("create data dir");
    netred::presets::small_network()
        .save(&dir.join("small_network.sys"))
        .expect("write small_network.sys");
    netred::presets::vanderpol_grid()
        .expect("build vdp grid")
        .save(&dir.join("vdp_grid.sys"))
        .expect("write vdp_grid.sys");
    println!("wrote {}", dir.display());
}
