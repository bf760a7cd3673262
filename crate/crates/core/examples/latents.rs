//! Round trip through the external feature interface: exports per-image
//! features as a latent file bound to the manifest hash, then embeds and
//! classifies from that file.
//!
//! `cargo run --release --example latents -- dataset-out/manifest.json`

use std::path::PathBuf;

use microdoppler::cohort::bmi_group;
use microdoppler::dataset::DatasetManifest;
use microdoppler::knn::{image_feature_matrix, knn_baseline, read_latents, write_latents, FeatureSource};
use microdoppler::tsne::{tsne, FeatureMatrix, PointMeta, TsneConfig};

fn main() -> microdoppler::Result<()> {
    let path = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "dataset-out/manifest.json".into()));
    let root = path.parent().map(PathBuf::from).unwrap_or_default();
    let manifest = DatasetManifest::read(&path)?;
    let latents = root.join("latents.bin");
    // 8x8 pixel blocks: 32 x 32 = 1024 values per image
    write_latents(&latents, &image_feature_matrix(&manifest, &root, 8)?, &manifest.hash()?)?;
    let (features, sidecar) = read_latents(&latents)?;
    println!("{} latents of dimension {} for manifest {}", sidecar.n, sidecar.d, &sidecar.manifest_hash[..12]);

    let report = knn_baseline(&manifest, &root, 5, &FeatureSource::Latents { path: latents })?;
    println!("k-NN accuracy from latents {:.4}", report.accuracy);

    let rows: Vec<usize> = (0..features.n).step_by(features.n.div_ceil(1500).max(1)).collect();
    let sel = features.select(&rows);
    let meta = rows
        .iter()
        .map(|&i| {
            let r = &manifest.records[i];
            PointMeta { subject_id: Some(r.subject_id), bmi: Some(r.bmi), bmi_group: Some(bmi_group(r.bmi)), swing_side: Some(r.swing_side) }
        })
        .collect();
    let x = FeatureMatrix::new(sel.n, sel.d, sel.data.iter().map(|&v| f64::from(v)).collect())?.with_meta(meta)?;
    let emb = tsne(&x, &TsneConfig::default())?;
    emb.write_csv(&root.join("embedding.csv"))?;
    println!("embedded {} points, final KL {:.4}", emb.points.len(), emb.kl_trace.last().copied().unwrap_or(f64::NAN));
    Ok(())
}
