//! Generates a half-gait image dataset with a fresh-session test split.
//!
//! `cargo run --release --example dataset -- [out-dir] [seconds per record]`

use std::path::PathBuf;
use std::time::Instant;

use microdoppler::cohort::Cohort;
use microdoppler::dataset::{generate_dataset, split_dataset, DatasetConfig, Split, SplitPolicy, MANIFEST_FILE};

fn main() -> microdoppler::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "dataset-out".into()));
    let seconds: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(30.0);
    let t0 = Instant::now();
    let cfg = DatasetConfig::preset("paper-highsnr")?.with_duration(seconds);
    let manifest = generate_dataset(&Cohort::standard(7), &cfg, 1, "example", &out)?;
    let manifest = split_dataset(&manifest, SplitPolicy::FreshSession, 2, &out)?;
    manifest.write(&out.join(MANIFEST_FILE))?;
    println!(
        "{} train / {} test images in {:.1} s, manifest {}",
        manifest.count(Split::Train),
        manifest.count(Split::Test),
        t0.elapsed().as_secs_f64(),
        &manifest.hash()?[..12]
    );
    Ok(())
}
