//! SNR of the same walk seen from increasing range, against the R^-4 law.

use microdoppler::body::RcsModel;
use microdoppler::cohort::{Gender, SubjectProfile};
use microdoppler::gait::{gait_parameters, simulate_trajectories, SimulationSetup};
use microdoppler::radar::{apply_snr, measured_snr_db, synthesize, RadarConfig};

fn main() -> microdoppler::Result<()> {
    let cfg = RadarConfig::default();
    let clean_cfg = RadarConfig { reference_snr_db: None, ..cfg };
    for bmi in [18.59, 24.0, 37.55] {
        let subject = SubjectProfile::new(0, 1.8, bmi * 1.8 * 1.8, Gender::Male)?;
        let params = gait_parameters(&subject, 1.6)?;
        let traj = simulate_trajectories(&subject, &params, &SimulationSetup::default())?;
        let sig = synthesize(&traj, &subject.segments(&RcsModel::default()), &cfg)?;
        let mut line = format!("BMI {bmi:5.2}:");
        let mut at3 = 0.0;
        for range in [3.0, 5.0, 10.0, 15.0] {
            let clean = apply_snr(&sig, range, &clean_cfg, 0)?;
            let noisy = apply_snr(&sig, range, &cfg, 1)?;
            let snr = measured_snr_db(&clean.samples, &noisy.samples);
            if range == 3.0 {
                at3 = snr;
            }
            let law = at3 - 40.0 * (range / 3.0f64).log10();
            line += &format!("  {range:>4} m {snr:6.2} dB (law {law:6.2})");
        }
        println!("{line}");
    }
    Ok(())
}
