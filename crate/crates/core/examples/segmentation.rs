//! Cadence estimation and half-gait slicing of a 180 s record, scored against
//! the simulator's gait clock.

use std::time::Instant;

use microdoppler::cohort::Cohort;
use microdoppler::dataset::{simulate_record, subject_style, Condition, DatasetConfig};
use microdoppler::segment::{boundary_rms_error, segment, slice_half_gaits};

fn main() -> microdoppler::Result<()> {
    let cohort = Cohort::standard(7);
    let cfg = DatasetConfig::default();
    for id in [0, 11, 21] {
        let subject = cohort.subject(id).expect("cohort subject");
        let t0 = Instant::now();
        let style = subject_style(&cohort, id, cfg.style_spread);
        let rec = simulate_record(subject, &cohort.rcs, &Condition::high_snr(), &cfg, &style, 0.25, 3)?;
        let seg = segment(&rec.spectrogram, &cfg.segment)?;
        let slices = slice_half_gaits(&seg, Some(&rec.clock));
        println!(
            "subject {id:2}: period {:.4} s (true {:.4}), confidence {:.2}, {} slices, boundary RMS {:.2} frames, {:.2} s",
            seg.half_gait_period_s,
            rec.clock.cycle_duration / 2.0,
            seg.confidence,
            slices.len(),
            boundary_rms_error(&rec.spectrogram, &seg, &rec.clock),
            t0.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
