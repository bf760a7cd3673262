//! Simulated subjects: stature, mass, BMI and gender.

use std::fmt;
use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::body::{derive_segments, BodySegmentSet, RcsModel};
use crate::error::{Error, Result};

/// BMI class labels of the 22-subject cohort, ascending.
pub const COHORT_BMIS: [f64; 22] = [
    18.59, 19.37, 19.93, 20.24, 20.58, 21.05, 21.93, 22.35, 22.75, 22.92, 23.06, 23.67, 23.77,
    24.80, 25.00, 25.15, 25.76, 26.64, 27.17, 28.73, 29.92, 37.55,
];

pub const COHORT_FEMALE_COUNT: usize = 5;

/// Upper edges of the BMI groups used to color embeddings.
pub const BMI_GROUP_EDGES: [f64; 4] = [21.0, 23.0, 25.0, 30.0];
pub const BMI_GROUP_LABELS: [&str; 5] = ["<21", "21-23", "23-25", "25-30", ">30"];

pub fn bmi_group(bmi: f64) -> usize {
    BMI_GROUP_EDGES.iter().take_while(|&&e| bmi >= e).count()
}

/// Body mass index in kg/m².
pub fn bmi(weight_kg: f64, height_m: f64) -> Result<f64> {
    if !(weight_kg > 0.0) || !weight_kg.is_finite() {
        return Err(Error::Domain(format!("weight must be positive, got {weight_kg}")));
    }
    if !(height_m > 0.0) || !height_m.is_finite() {
        return Err(Error::Domain(format!("height must be positive, got {height_m}")));
    }
    Ok(weight_kg / (height_m * height_m))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gender {
    Male,
    Female,
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gender::Male => "male",
            Gender::Female => "female",
        })
    }
}

/// One simulated person. BMI is always derived from weight and height.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectProfile {
    pub id: u32,
    pub height_m: f64,
    pub weight_kg: f64,
    pub gender: Gender,
}

impl SubjectProfile {
    pub fn new(id: u32, height_m: f64, weight_kg: f64, gender: Gender) -> Result<Self> {
        bmi(weight_kg, height_m)?;
        Ok(Self {
            id,
            height_m,
            weight_kg,
            gender,
        })
    }

    pub fn bmi(&self) -> f64 {
        self.weight_kg / (self.height_m * self.height_m)
    }

    pub fn segments(&self, rcs: &RcsModel) -> BodySegmentSet {
        derive_segments(self, rcs)
    }

    /// 1.8 m subject at the cohort-mean BMI, used for amplitude normalization.
    pub fn reference() -> Self {
        Self {
            id: u32::MAX,
            height_m: 1.8,
            weight_kg: 24.0 * 1.8 * 1.8,
            gender: Gender::Male,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SubjectRecord {
    id: u32,
    height_m: f64,
    weight_kg: f64,
    bmi: f64,
    gender: Gender,
}

impl Serialize for SubjectProfile {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SubjectRecord {
            id: self.id,
            height_m: self.height_m,
            weight_kg: self.weight_kg,
            bmi: self.bmi(),
            gender: self.gender,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SubjectProfile {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = SubjectRecord::deserialize(d)?;
        SubjectProfile::new(r.id, r.height_m, r.weight_kg, r.gender)
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BmiSpec {
    /// One subject per listed value.
    List { values: Vec<f64> },
    /// Uniform sampling in `[min, max]`.
    Range { min: f64, max: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSpec {
    pub count: usize,
    pub female_count: usize,
    pub bmi: BmiSpec,
    pub height_range_m: (f64, f64),
    pub weight_range_kg: (f64, f64),
    /// Mean and standard deviation of the stature prior, truncated to the
    /// feasible interval of each subject.
    pub height_prior_m: (f64, f64),
    pub seed: u64,
}

impl CohortSpec {
    /// 22 subjects (17 male, 5 female) at the published BMI class labels.
    pub fn standard(seed: u64) -> Self {
        Self {
            count: COHORT_BMIS.len(),
            female_count: COHORT_FEMALE_COUNT,
            bmi: BmiSpec::List {
                values: COHORT_BMIS.to_vec(),
            },
            height_range_m: (1.62, 1.95),
            weight_range_kg: (54.0, 115.0),
            height_prior_m: (1.79, 0.06),
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::Constraint("cohort count must be at least 1".into()));
        }
        if self.female_count > self.count {
            return Err(Error::Constraint(format!(
                "female count {} exceeds cohort count {}",
                self.female_count, self.count
            )));
        }
        let (hmin, hmax) = self.height_range_m;
        let (wmin, wmax) = self.weight_range_kg;
        if !(hmin > 0.0 && hmin <= hmax) {
            return Err(Error::Constraint(format!("invalid height range [{hmin}, {hmax}]")));
        }
        if !(wmin > 0.0 && wmin <= wmax) {
            return Err(Error::Constraint(format!("invalid weight range [{wmin}, {wmax}]")));
        }
        if !(self.height_prior_m.1 > 0.0) {
            return Err(Error::Constraint("height prior sd must be positive".into()));
        }
        match &self.bmi {
            BmiSpec::List { values } if values.len() != self.count => Err(Error::Constraint(format!(
                "BMI list has {} values for {} subjects",
                values.len(),
                self.count
            ))),
            BmiSpec::List { values } if values.iter().any(|b| !(*b > 0.0)) => {
                Err(Error::Constraint("BMI values must be positive".into()))
            }
            BmiSpec::Range { min, max } if !(*min > 0.0 && min <= max) => {
                Err(Error::Constraint(format!("invalid BMI range [{min}, {max}]")))
            }
            _ => Ok(()),
        }
    }

    /// Stature interval on which `bmi` keeps weight inside its bounds.
    fn feasible_heights(&self, bmi: f64) -> Result<(f64, f64)> {
        let (hmin, hmax) = self.height_range_m;
        let (wmin, wmax) = self.weight_range_kg;
        let lo = hmin.max((wmin / bmi).sqrt());
        let hi = hmax.min((wmax / bmi).sqrt());
        if lo > hi {
            let (bmin, bmax) = (wmin / (hmax * hmax), wmax / (hmin * hmin));
            let bound = if bmi > bmax {
                format!(
                    "maximum weight {wmax} kg at minimum height {hmin} m gives BMI {bmax:.2}"
                )
            } else {
                format!(
                    "minimum weight {wmin} kg at maximum height {hmax} m gives BMI {bmin:.2}"
                )
            };
            return Err(Error::Constraint(format!("BMI {bmi} unreachable: {bound}")));
        }
        Ok((lo, hi))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cohort {
    pub seed: u64,
    pub rcs: RcsModel,
    pub subjects: Vec<SubjectProfile>,
}

impl Cohort {
    pub fn standard(seed: u64) -> Self {
        generate_cohort(&CohortSpec::standard(seed)).expect("standard preset is feasible")
    }

    pub fn subject(&self, id: u32) -> Option<&SubjectProfile> {
        self.subjects.iter().find(|s| s.id == id)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::file(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        Self::from_json(&s)
    }
}

/// Builds a cohort whose ids are assigned in ascending BMI order.
pub fn generate_cohort(spec: &CohortSpec) -> Result<Cohort> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut bmis = match &spec.bmi {
        BmiSpec::List { values } => values.clone(),
        BmiSpec::Range { min, max } => (0..spec.count)
            .map(|_| if min == max { *min } else { rng.random_range(*min..=*max) })
            .collect(),
    };
    bmis.sort_by(f64::total_cmp);

    let female: Vec<usize> = sample(&mut rng, spec.count, spec.female_count).into_vec();
    let prior = Normal::new(spec.height_prior_m.0, spec.height_prior_m.1)
        .map_err(|e| Error::Constraint(e.to_string()))?;

    let mut subjects = Vec::with_capacity(spec.count);
    for (i, &b) in bmis.iter().enumerate() {
        let (lo, hi) = spec.feasible_heights(b)?;
        let mut height = None;
        for _ in 0..256 {
            let h = prior.sample(&mut rng);
            if (lo..=hi).contains(&h) {
                height = Some(h);
                break;
            }
        }
        let height = height.unwrap_or_else(|| if lo == hi { lo } else { rng.random_range(lo..=hi) });
        let gender = if female.contains(&i) {
            Gender::Female
        } else {
            Gender::Male
        };
        subjects.push(SubjectProfile::new(i as u32, height, b * height * height, gender)?);
    }

    Ok(Cohort {
        seed: spec.seed,
        rcs: RcsModel::default(),
        subjects,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bmi_groups() {
        assert_eq!(bmi_group(18.59), 0);
        assert_eq!(bmi_group(21.0), 1);
        assert_eq!(bmi_group(24.0), 2);
        assert_eq!(bmi_group(29.99), 3);
        assert_eq!(bmi_group(37.55), 4);
    }
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn bmi_definition() {
        assert_relative_eq!(bmi(80.0, 1.8).unwrap(), 24.691, epsilon = 1e-3);
        assert_relative_eq!(bmi(54.0, 1.704).unwrap(), 18.59, epsilon = 0.01);
        assert!(matches!(bmi(0.0, 1.8), Err(Error::Domain(_))));
        assert!(matches!(bmi(70.0, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn minimum_bmi_round_trip() {
        // height at which 54 kg yields the smallest class label
        let h = (54.0f64 / 18.59).sqrt();
        assert_relative_eq!(bmi(54.0, h).unwrap(), 18.59, epsilon = 1e-12);
        assert!((h - 1.704).abs() < 1e-3);
    }

    #[test]
    fn standard_preset_matches_labels() {
        for seed in [0, 1, 7, 12345] {
            let c = Cohort::standard(seed);
            assert_eq!(c.subjects.len(), 22);
            let females = c.subjects.iter().filter(|s| s.gender == Gender::Female).count();
            assert_eq!(females, 5);
            for (s, want) in c.subjects.iter().zip(COHORT_BMIS) {
                assert_relative_eq!(s.bmi(), want, max_relative = 1e-12);
                assert!((1.62..=1.95).contains(&s.height_m));
                assert!((54.0 - 1e-9..=115.0 + 1e-9).contains(&s.weight_kg));
            }
            assert_relative_eq!(c.subjects.last().unwrap().bmi(), 37.55, max_relative = 1e-12);
        }
    }

    #[test]
    fn ids_unique_and_ordered() {
        let c = Cohort::standard(3);
        for (i, s) in c.subjects.iter().enumerate() {
            assert_eq!(s.id as usize, i);
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let a = generate_cohort(&CohortSpec::standard(42)).unwrap();
        let b = generate_cohort(&CohortSpec::standard(42)).unwrap();
        assert_eq!(a, b);
        let c = generate_cohort(&CohortSpec::standard(43)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn unreachable_bmi_names_bound() {
        let mut spec = CohortSpec::standard(0);
        spec.count = 1;
        spec.female_count = 0;
        spec.bmi = BmiSpec::List { values: vec![50.0] };
        match generate_cohort(&spec) {
            Err(Error::Constraint(msg)) => {
                assert!(msg.contains("115"), "{msg}");
                assert!(msg.contains("1.62"), "{msg}");
                assert!(msg.contains("43.82"), "{msg}");
            }
            other => panic!("expected constraint error, got {other:?}"),
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut spec = CohortSpec::standard(0);
        spec.count = 0;
        assert!(generate_cohort(&spec).is_err());
        let mut spec = CohortSpec::standard(0);
        spec.female_count = 30;
        assert!(generate_cohort(&spec).is_err());
        let mut spec = CohortSpec::standard(0);
        spec.count = 21;
        assert!(generate_cohort(&spec).is_err());
    }

    #[test]
    fn json_round_trip_recomputes_bmi() {
        let c = Cohort::standard(9);
        let json = c.to_json().unwrap();
        assert!(json.contains("\"bmi\""));
        let back = Cohort::from_json(&json).unwrap();
        assert_eq!(c, back);
        assert_eq!(json, back.to_json().unwrap());
    }

    #[test]
    fn range_spec_samples_inside_bounds() {
        let spec = CohortSpec {
            count: 40,
            female_count: 10,
            bmi: BmiSpec::Range { min: 19.0, max: 30.0 },
            ..CohortSpec::standard(5)
        };
        let c = generate_cohort(&spec).unwrap();
        assert_eq!(c.subjects.len(), 40);
        for w in c.subjects.windows(2) {
            assert!(w[0].bmi() <= w[1].bmi() + 1e-12);
        }
        for s in &c.subjects {
            assert!((19.0 - 1e-9..=30.0 + 1e-9).contains(&s.bmi()));
        }
    }

    proptest! {
        #[test]
        fn bmi_times_height_squared_is_weight(w in 1.0f64..300.0, h in 0.5f64..2.5) {
            let b = bmi(w, h).unwrap();
            prop_assert!(((b * h * h) - w).abs() <= 1e-12 * w);
        }
    }
}
