//! Micro-Doppler map of a 10 s walk, dumped as raw f32 with a JSON sidecar,
//! and one rendered half-gait image.
//!
//! `cargo run --example spectrogram -- [out-dir]`

use std::path::PathBuf;

use microdoppler::cohort::Cohort;
use microdoppler::dataset::{simulate_record, subject_style, Condition, DatasetConfig};
use microdoppler::render::{render_image, RenderConfig, TimeSpan};

fn main() -> microdoppler::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "spectrogram-out".into()));
    std::fs::create_dir_all(&out)?;
    let cohort = Cohort::standard(7);
    let subject = &cohort.subjects[10];
    let cfg = DatasetConfig::default();
    let style = subject_style(&cohort, subject.id, cfg.style_spread);
    let rec = simulate_record(subject, &cohort.rcs, &Condition::high_snr().with_duration(10.0), &cfg, &style, 0.0, 1)?;
    let spec = &rec.spectrogram;
    println!(
        "{} frames x {} bins, {:.3} s per frame, peak {:.1} dB, SNR {:.1} dB",
        spec.n_frames,
        spec.n_bins,
        spec.frame_duration(),
        spec.peak_db(),
        rec.signal.snr_db.unwrap_or(f64::INFINITY)
    );
    spec.dump(&out.join("spectrogram.f32"))?;
    let half = rec.params.half_gait_duration();
    let img = render_image(spec, TimeSpan::new(2.0, 2.0 + half), &RenderConfig::default())?;
    img.write_png(&out.join("half_gait.png"))?;
    println!("wrote {}", out.display());
    Ok(())
}
