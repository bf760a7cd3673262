//! A single point receding at 2 m/s: the baseband is a tone at -2v/λ and the
//! micro-Doppler map peaks at -2 m/s.

use microdoppler::body::{RcsModel, SegmentKind};
use microdoppler::cohort::{Gender, SubjectProfile};
use microdoppler::gait::{gait_parameters, simulate_trajectories, ScattererTrack, SimulationSetup};
use microdoppler::radar::{synthesize, RadarConfig};
use microdoppler::spectrogram::{spectrogram, StftConfig};

fn main() -> microdoppler::Result<()> {
    let subject = SubjectProfile::new(0, 1.8, 77.8, Gender::Male)?;
    let params = gait_parameters(&subject, 1.6)?;
    let mut traj = simulate_trajectories(&subject, &params, &SimulationSetup { duration_s: 2.0, ..Default::default() })?;
    let n = traj.len();
    let fs = traj.sample_rate_hz;
    traj.tracks = vec![ScattererTrack {
        kind: SegmentKind::Torso,
        range_m: (0..n).map(|i| 3.0 + 2.0 * i as f64 / fs).collect(),
        radial_velocity: vec![2.0; n],
    }];
    let cfg = RadarConfig::default();
    let sig = synthesize(&traj, &subject.segments(&RcsModel::default()), &cfg)?;
    let phase_rate = (sig.samples[1] / sig.samples[0]).arg() * fs / (2.0 * std::f64::consts::PI);
    println!("expected Doppler {:.1} Hz, measured phase rate {phase_rate:.1} Hz", -4.0 / cfg.wavelength());
    let spec = spectrogram(&sig, &StftConfig::default(), &cfg)?;
    let row = spec.frame(spec.n_frames / 2);
    let k = (0..row.len()).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap_or(0);
    println!("spectrogram peak at {:+.4} m/s (bin width {:.4} m/s)", spec.velocity_axis[k], cfg.velocity_resolution(512));
    Ok(())
}
