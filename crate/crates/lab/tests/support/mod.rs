//! Small configurations and output snapshots shared by the CLI tests.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use kakeya_core::sampling::Sampler;
use kakeya_lab::campaign::random_family;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Every subcommand finishes in a few seconds with this.
pub const SMALL: &str = "\
grid.n = 64
enum.j_max = 1
enum.min_wid_cells = 2
sweep.deltas = 0.5, 0.25
sweep.radii = 4
holder.levels = 2, 3
holder.radius = 4
holder.min_wid_cells = 8
campaign.instances = 2
campaign.seeds = 2
campaign.max_rects = 40
eval.input = disc:4
";

pub fn write_config(dir: &Path, name: &str, extra: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, format!("{SMALL}{extra}")).unwrap();
    p
}

/// Every file in `dir`, by name.
pub fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

/// A random campaign family written as JSON, for `verify`.
pub fn family_file(dir: &Path) -> PathBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ff = random_family(&mut rng, 40, 0.25, 100, &Sampler::default()).unwrap();
    let p = dir.join("family.json");
    fs::write(&p, serde_json::to_string(&ff).unwrap()).unwrap();
    p
}
