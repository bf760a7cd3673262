//! Simulates one walker on the treadmill and summarizes the per-segment
//! radial velocities. Writes the full trajectories as CSV when a path is given.
//!
//! `cargo run --example gait_trajectories -- [out.csv]`

use microdoppler::body::SegmentKind;
use microdoppler::cohort::{Gender, SubjectProfile};
use microdoppler::gait::{gait_parameters, simulate_trajectories, SimulationSetup, TREADMILL_SPEED};

fn main() -> microdoppler::Result<()> {
    let subject = SubjectProfile::new(0, 1.8, 77.8, Gender::Male)?;
    let params = gait_parameters(&subject, TREADMILL_SPEED)?;
    println!(
        "cycle {:.3} s, half gait {:.3} s, stance {:.1}%",
        params.cycle_duration,
        params.half_gait_duration(),
        100.0 * params.stance_fraction
    );
    let traj = simulate_trajectories(&subject, &params, &SimulationSetup::default())?;
    for kind in SegmentKind::ALL {
        let v = &traj.track(kind).radial_velocity;
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        println!("{:<16} radial velocity [{lo:+.2}, {hi:+.2}] m/s", format!("{kind:?}"));
    }
    if let Some(path) = std::env::args().nth(1) {
        traj.write_csv(path.as_ref())?;
        println!("wrote {path}");
    }
    Ok(())
}
