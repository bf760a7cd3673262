//! Generates the 22-subject cohort and prints its anthropometrics.
//!
//! `cargo run --example cohort -- [seed]`

use microdoppler::cohort::{bmi_group, Cohort, BMI_GROUP_LABELS};

fn main() -> microdoppler::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let cohort = Cohort::standard(seed);
    println!("{:>3} {:>7} {:>7} {:>6} {:>6}  group", "id", "h [m]", "w [kg]", "bmi", "sex");
    for s in &cohort.subjects {
        println!(
            "{:>3} {:>7.3} {:>7.2} {:>6.2} {:>6}  {}",
            s.id,
            s.height_m,
            s.weight_kg,
            s.bmi(),
            s.gender.to_string(),
            BMI_GROUP_LABELS[bmi_group(s.bmi())]
        );
    }
    Ok(())
}
