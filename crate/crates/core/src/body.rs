//! Body-segment geometry and per-segment radar cross sections.
//!
//! Segment lengths follow the Drillis–Contini fractions of stature. Each
//! segment is modeled as an ellipsoid whose RCS is evaluated once, for a
//! horizontal line of sight along the body's front-back axis, and then scaled
//! by `(BMI / 24)^gamma`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cohort::SubjectProfile;

/// Fractions of stature.
pub mod ratio {
    pub const ANKLE_HEIGHT: f64 = 0.039;
    pub const LOWER_LEG: f64 = 0.246;
    pub const THIGH: f64 = 0.245;
    pub const HIP_HEIGHT: f64 = ANKLE_HEIGHT + LOWER_LEG + THIGH;
    pub const SHOULDER_HEIGHT: f64 = 0.818;
    pub const TORSO: f64 = SHOULDER_HEIGHT - HIP_HEIGHT;
    pub const NECK: f64 = 0.052;
    pub const HEAD: f64 = 0.130;
    pub const UPPER_ARM: f64 = 0.186;
    pub const FOREARM: f64 = 0.146;
    pub const FOOT_LENGTH: f64 = 0.152;
    pub const FOOT_WIDTH: f64 = 0.055;
    pub const SHOULDER_WIDTH: f64 = 0.259;
    pub const HIP_WIDTH: f64 = 0.191;
}

/// BMI at which the RCS multiplier is exactly one (cohort mean).
pub const REFERENCE_BMI: f64 = 24.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
    Center,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    Torso,
    Head,
    UpperArmLeft,
    UpperArmRight,
    ForearmLeft,
    ForearmRight,
    ThighLeft,
    ThighRight,
    LowerLegLeft,
    LowerLegRight,
    FootLeft,
    FootRight,
}

impl SegmentKind {
    pub const ALL: [SegmentKind; 12] = [
        SegmentKind::Torso,
        SegmentKind::Head,
        SegmentKind::UpperArmLeft,
        SegmentKind::UpperArmRight,
        SegmentKind::ForearmLeft,
        SegmentKind::ForearmRight,
        SegmentKind::ThighLeft,
        SegmentKind::ThighRight,
        SegmentKind::LowerLegLeft,
        SegmentKind::LowerLegRight,
        SegmentKind::FootLeft,
        SegmentKind::FootRight,
    ];

    pub fn side(self) -> Side {
        use SegmentKind::*;
        match self {
            Torso | Head => Side::Center,
            UpperArmLeft | ForearmLeft | ThighLeft | LowerLegLeft | FootLeft => Side::Left,
            UpperArmRight | ForearmRight | ThighRight | LowerLegRight | FootRight => Side::Right,
        }
    }

    /// The same segment on the other side of the body.
    pub fn mirrored(self) -> Self {
        use SegmentKind::*;
        match self {
            Torso => Torso,
            Head => Head,
            UpperArmLeft => UpperArmRight,
            UpperArmRight => UpperArmLeft,
            ForearmLeft => ForearmRight,
            ForearmRight => ForearmLeft,
            ThighLeft => ThighRight,
            ThighRight => ThighLeft,
            LowerLegLeft => LowerLegRight,
            LowerLegRight => LowerLegLeft,
            FootLeft => FootRight,
            FootRight => FootLeft,
        }
    }

    pub fn is_leg(self) -> bool {
        use SegmentKind::*;
        matches!(
            self,
            ThighLeft | ThighRight | LowerLegLeft | LowerLegRight | FootLeft | FootRight
        )
    }

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|k| *k == self).unwrap()
    }

    /// Length as a fraction of stature.
    fn length_ratio(self) -> f64 {
        use SegmentKind::*;
        match self {
            Torso => ratio::TORSO,
            Head => ratio::HEAD,
            UpperArmLeft | UpperArmRight => ratio::UPPER_ARM,
            ForearmLeft | ForearmRight => ratio::FOREARM,
            ThighLeft | ThighRight => ratio::THIGH,
            LowerLegLeft | LowerLegRight => ratio::LOWER_LEG,
            FootLeft | FootRight => ratio::FOOT_LENGTH,
        }
    }

    /// Ellipsoid semi-axes as fractions of stature: (front-back, lateral,
    /// vertical). The foot lies along the front-back axis.
    fn semi_axes_ratio(self) -> [f64; 3] {
        use SegmentKind::*;
        let half = 0.5 * self.length_ratio();
        match self {
            Torso => [0.055, 0.095, half],
            Head => [0.050, 0.050, half],
            UpperArmLeft | UpperArmRight => [0.022, 0.022, half],
            ForearmLeft | ForearmRight => [0.018, 0.018, half],
            ThighLeft | ThighRight => [0.036, 0.036, half],
            LowerLegLeft | LowerLegRight => [0.026, 0.026, half],
            FootLeft | FootRight => [half, 0.5 * ratio::FOOT_WIDTH, 0.022],
        }
    }
}

/// Monostatic RCS of an ellipsoid with semi-axes `(ax, ay, az)` seen along
/// the unit direction `(sx, sy, sz)` expressed in its own axes.
pub fn ellipsoid_rcs(axes: [f64; 3], los: [f64; 3]) -> f64 {
    let [a, b, c] = axes;
    let [sx, sy, sz] = los;
    let den = a * a * sx * sx + b * b * sy * sy + c * c * sz * sz;
    PI * (a * b * c).powi(2) / (den * den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RcsModel {
    /// Exponent applied to `BMI / 24`.
    pub bmi_exponent: f64,
}

impl Default for RcsModel {
    fn default() -> Self {
        Self { bmi_exponent: 1.0 }
    }
}

impl RcsModel {
    pub fn multiplier(&self, bmi: f64) -> f64 {
        (bmi / REFERENCE_BMI).powf(self.bmi_exponent)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub length_m: f64,
    pub rcs_m2: f64,
    /// Segment center in the standing pose: x forward, y left, z up from the
    /// floor, origin below the pelvis.
    pub attachment: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodySegmentSet {
    pub height_m: f64,
    pub segments: Vec<Segment>,
}

impl BodySegmentSet {
    pub fn get(&self, kind: SegmentKind) -> &Segment {
        &self.segments[kind.index()]
    }

    pub fn total_rcs(&self) -> f64 {
        self.segments.iter().map(|s| s.rcs_m2).sum()
    }

    pub fn leg_length(&self) -> f64 {
        self.get(SegmentKind::ThighLeft).length_m + self.get(SegmentKind::LowerLegLeft).length_m
    }
}

fn standing_attachment(kind: SegmentKind, h: f64) -> [f64; 3] {
    use SegmentKind::*;
    let lat = |side: Side, half_width: f64| match side {
        Side::Left => half_width,
        Side::Right => -half_width,
        Side::Center => 0.0,
    };
    let hip_w = 0.5 * ratio::HIP_WIDTH * h;
    let sh_w = 0.5 * ratio::SHOULDER_WIDTH * h;
    let side = kind.side();
    match kind {
        Torso => [0.0, 0.0, (ratio::HIP_HEIGHT + 0.5 * ratio::TORSO) * h],
        Head => [
            0.0,
            0.0,
            (ratio::SHOULDER_HEIGHT + ratio::NECK + 0.5 * ratio::HEAD) * h,
        ],
        UpperArmLeft | UpperArmRight => [
            0.0,
            lat(side, sh_w),
            (ratio::SHOULDER_HEIGHT - 0.5 * ratio::UPPER_ARM) * h,
        ],
        ForearmLeft | ForearmRight => [
            0.0,
            lat(side, sh_w),
            (ratio::SHOULDER_HEIGHT - ratio::UPPER_ARM - 0.5 * ratio::FOREARM) * h,
        ],
        ThighLeft | ThighRight => [
            0.0,
            lat(side, hip_w),
            (ratio::HIP_HEIGHT - 0.5 * ratio::THIGH) * h,
        ],
        LowerLegLeft | LowerLegRight => [
            0.0,
            lat(side, hip_w),
            (ratio::ANKLE_HEIGHT + 0.5 * ratio::LOWER_LEG) * h,
        ],
        FootLeft | FootRight => [
            0.25 * ratio::FOOT_LENGTH * h,
            lat(side, hip_w),
            0.5 * ratio::ANKLE_HEIGHT * h,
        ],
    }
}

/// Segment lengths, RCS and standing attachment points for one subject.
pub fn derive_segments(profile: &SubjectProfile, rcs: &RcsModel) -> BodySegmentSet {
    let h = profile.height_m;
    let scale = rcs.multiplier(profile.bmi());
    let segments = SegmentKind::ALL
        .iter()
        .map(|&kind| {
            let axes = kind.semi_axes_ratio().map(|r| r * h);
            Segment {
                kind,
                length_m: kind.length_ratio() * h,
                rcs_m2: ellipsoid_rcs(axes, [1.0, 0.0, 0.0]) * scale,
                attachment: standing_attachment(kind, h),
            }
        })
        .collect();
    BodySegmentSet {
        height_m: h,
        segments,
    }
}
