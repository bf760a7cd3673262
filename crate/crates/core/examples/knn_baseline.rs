//! k-NN subject identification on a split manifest, e.g. one written by the
//! `dataset` example. Writes the report JSON and its confusion heat map.
//!
//! `cargo run --release --example knn_baseline -- dataset-out/manifest.json`

use std::path::PathBuf;

use microdoppler::dataset::DatasetManifest;
use microdoppler::knn::{knn_baseline, FeatureSource};
use microdoppler::plot::confusion_png;

fn main() -> microdoppler::Result<()> {
    let path = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "dataset-out/manifest.json".into()));
    let root = path.parent().map(PathBuf::from).unwrap_or_default();
    let manifest = DatasetManifest::read(&path)?;
    let report = knn_baseline(&manifest, &root, 5, &FeatureSource::default())?;
    println!("accuracy {:.4} on {} test images ({} train)", report.accuracy, report.n_test, report.n_train);
    for (c, r) in report.classes.iter().zip(&report.per_class_recall) {
        println!("  subject {:2} BMI {:5.2} recall {:.3}", c.subject_id, c.bmi, r);
    }
    report.write(&root.join("report.json"))?;
    confusion_png(&report, &root.join("report.png"))?;
    Ok(())
}
