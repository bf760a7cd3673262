//! Parametric walking model and radial scatterer trajectories.
//!
//! Temporal structure follows Boulic's global walking model: relative velocity
//! `RV = v / Ht`, cycle duration `1.346 / sqrt(RV)` and support duration
//! `0.752 Dc - 0.143`. Pelvis translations use Boulic's sinusoidal amplitudes,
//! the ankle follows a closed-form stance/swing profile whose stance velocity
//! equals the belt velocity, and knees are placed by two-link inverse
//! kinematics. Everything is written over [`Dual`] so velocities are exact.
//!
//! Walker frame: x points away from the radar (walking direction), y to the
//! walker's left, z up. Radial velocity is `dR/dt`, positive when receding.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::body::{ratio, SegmentKind, Side};
use crate::cohort::SubjectProfile;
use crate::dual::{Dual, Vec3};
use crate::error::{Error, Result};

pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 2000.0;
pub const MIN_SAMPLE_RATE_HZ: f64 = 2000.0;
pub const TREADMILL_SPEED: f64 = 1.6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaitParameters {
    pub walking_speed: f64,
    /// Leg length (thigh plus lower leg) used to normalize speed.
    pub thigh_height: f64,
    pub relative_velocity: f64,
    pub cycle_duration: f64,
    pub cycle_length: f64,
    pub stance_fraction: f64,
    pub swing_fraction: f64,
    /// Half gaits per second.
    pub cadence: f64,
}

impl GaitParameters {
    pub fn half_gait_duration(&self) -> f64 {
        0.5 * self.cycle_duration
    }
}

pub fn gait_parameters(profile: &SubjectProfile, walking_speed: f64) -> Result<GaitParameters> {
    if !(walking_speed > 0.0) || !walking_speed.is_finite() {
        return Err(Error::Domain(format!(
            "walking speed must be positive, got {walking_speed}"
        )));
    }
    let thigh_height = (ratio::THIGH + ratio::LOWER_LEG) * profile.height_m;
    let rv = walking_speed / thigh_height;
    let cycle_duration = 1.346 / rv.sqrt();
    let cycle_length = 1.346 * rv.sqrt() * thigh_height;
    let stance_fraction = (0.752 - 0.143 / cycle_duration).clamp(0.5, 0.75);
    Ok(GaitParameters {
        walking_speed,
        thigh_height,
        relative_velocity: rv,
        cycle_duration,
        cycle_length,
        stance_fraction,
        swing_fraction: 1.0 - stance_fraction,
        cadence: 2.0 / cycle_duration,
    })
}

/// Limb phases in radians; the gait cycle origin is right toe-off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseTable {
    pub right_leg: f64,
    pub left_leg: f64,
    pub right_arm: f64,
    pub left_arm: f64,
}

impl PhaseTable {
    pub fn leg(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.left_leg,
            _ => self.right_leg,
        }
    }

    pub fn arm(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.left_arm,
            _ => self.right_arm,
        }
    }

    pub fn shifted(&self, radians: f64) -> Self {
        Self {
            right_leg: self.right_leg + radians,
            left_leg: self.left_leg + radians,
            right_arm: self.right_arm + radians,
            left_arm: self.left_arm + radians,
        }
    }
}

/// Left limbs lag the right by half a cycle; each arm swings with the
/// opposite leg.
pub fn phase_offsets(_params: &GaitParameters) -> PhaseTable {
    PhaseTable {
        right_leg: 0.0,
        left_leg: PI,
        right_arm: PI,
        left_arm: 0.0,
    }
}

/// Per-subject walking style: multipliers around 1 and an arm phase offset in
/// cycles. `neutral()` reproduces the average walker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaitStyle {
    pub arm_swing: f64,
    pub elbow_flex: f64,
    pub vertical_bob: f64,
    pub fore_aft: f64,
    pub lateral_sway: f64,
    pub foot_lift: f64,
    pub swing_ramp: f64,
    pub torso_lean: f64,
    pub knee_bend: f64,
    pub step_width: f64,
    pub arm_phase: f64,
}

impl Default for GaitStyle {
    fn default() -> Self {
        Self::neutral()
    }
}

impl GaitStyle {
    pub fn neutral() -> Self {
        Self {
            arm_swing: 1.0,
            elbow_flex: 1.0,
            vertical_bob: 1.0,
            fore_aft: 1.0,
            lateral_sway: 1.0,
            foot_lift: 1.0,
            swing_ramp: 1.0,
            torso_lean: 1.0,
            knee_bend: 1.0,
            step_width: 1.0,
            arm_phase: 0.0,
        }
    }

    /// Uniform perturbations within `±spread` (relative) and `±spread / 2`
    /// cycles of arm phase.
    pub fn jittered<R: Rng + ?Sized>(rng: &mut R, spread: f64) -> Self {
        let mut m = || 1.0 + spread * rng.random_range(-1.0..=1.0);
        let mut s = Self {
            arm_swing: m(),
            elbow_flex: m(),
            vertical_bob: m(),
            fore_aft: m(),
            lateral_sway: m(),
            foot_lift: m(),
            swing_ramp: m(),
            torso_lean: m(),
            knee_bend: m(),
            step_width: m(),
            arm_phase: 0.0,
        };
        s.arm_phase = 0.5 * spread * rng.random_range(-1.0..=1.0);
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WalkMode {
    Treadmill,
    FreeWalk,
}

impl FromStr for WalkMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "treadmill" => Ok(WalkMode::Treadmill),
            "free_walk" | "free-walk" => Ok(WalkMode::FreeWalk),
            other => Err(Error::Config(format!("unknown walk mode '{other}'"))),
        }
    }
}

impl fmt::Display for WalkMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WalkMode::Treadmill => "treadmill",
            WalkMode::FreeWalk => "free_walk",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadarPose {
    pub height_m: f64,
    /// Horizontal distance from the radar to the walker's mean pelvis position.
    pub standoff_m: f64,
}

impl Default for RadarPose {
    fn default() -> Self {
        Self {
            height_m: 1.0,
            standoff_m: 3.0,
        }
    }
}

impl RadarPose {
    fn position(&self) -> Vec3 {
        Vec3::new(-self.standoff_m, 0.0, self.height_m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSetup {
    pub mode: WalkMode,
    pub duration_s: f64,
    pub sample_rate_hz: f64,
    pub radar_pose: RadarPose,
    /// Gait phase (in cycles) at t = 0.
    pub start_phase: f64,
    pub style: GaitStyle,
    /// Overrides [`phase_offsets`] when set.
    pub phases: Option<PhaseTable>,
    pub min_sample_rate_hz: f64,
}

impl Default for SimulationSetup {
    fn default() -> Self {
        Self {
            mode: WalkMode::Treadmill,
            duration_s: 10.0,
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
            radar_pose: RadarPose::default(),
            start_phase: 0.0,
            style: GaitStyle::neutral(),
            phases: None,
            min_sample_rate_hz: MIN_SAMPLE_RATE_HZ,
        }
    }
}

/// Ground-truth gait timing: maps time to gait phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaitClock {
    pub cycle_duration: f64,
    pub swing_fraction: f64,
    pub start_phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfGaitEvent {
    pub time_s: f64,
    /// Leg swinging in the half gait that starts here.
    pub next_swing: Side,
}

impl GaitClock {
    pub fn phase(&self, t: f64) -> f64 {
        self.start_phase + t / self.cycle_duration
    }

    /// Leg in swing at time `t`, or `None` during double support.
    pub fn swing_side_at(&self, t: f64) -> Option<Side> {
        let tau = self.phase(t);
        let right = tau.rem_euclid(1.0);
        let left = (tau - 0.5).rem_euclid(1.0);
        if right < self.swing_fraction {
            Some(Side::Right)
        } else if left < self.swing_fraction {
            Some(Side::Left)
        } else {
            None
        }
    }

    /// Centers of the double-support intervals within `[0, duration]`.
    pub fn half_gait_boundaries(&self, duration: f64) -> Vec<HalfGaitEvent> {
        let first = 0.25 + 0.5 * self.swing_fraction;
        let tau_end = self.phase(duration);
        let mut k = ((self.start_phase - first) / 0.5).floor() as i64 - 1;
        let mut out = Vec::new();
        loop {
            let tau = first + 0.5 * k as f64;
            if tau > tau_end {
                break;
            }
            let t = (tau - self.start_phase) * self.cycle_duration;
            if t >= 0.0 {
                let next_swing = if k.rem_euclid(2) == 0 {
                    Side::Left
                } else {
                    Side::Right
                };
                out.push(HalfGaitEvent {
                    time_s: t,
                    next_swing,
                });
            }
            k += 1;
        }
        out
    }
}

/// Closed-form walking model for one subject.
#[derive(Debug, Clone)]
pub struct GaitModel {
    params: GaitParameters,
    style: GaitStyle,
    phases: PhaseTable,
    start_phase: f64,
    // geometry, meters
    ankle_height: f64,
    thigh: f64,
    lower_leg: f64,
    foot: f64,
    torso: f64,
    neck: f64,
    head: f64,
    upper_arm: f64,
    forearm: f64,
    hip_half_width: f64,
    shoulder_half_width: f64,
}

fn smootherstep_integral(x: Dual) -> Dual {
    // integral of 6x^5 - 15x^4 + 10x^3 from 0 to x
    x.powi(6) - 3.0 * x.powi(5) + 2.5 * x.powi(4)
}

/// Normalized forward displacement of the swinging ankle: the integral of a
/// flat-topped velocity pulse whose ramps occupy `ramp` of the swing at each
/// end. Reaches `1 - ramp` at `s = 1`.
fn swing_displacement(s: Dual, ramp: f64) -> Dual {
    if s.re < ramp {
        smootherstep_integral(s / ramp) * ramp
    } else if s.re <= 1.0 - ramp {
        s - 0.5 * ramp
    } else {
        (1.0 - ramp) - smootherstep_integral((1.0 - s) / ramp) * ramp
    }
}

fn frac(x: Dual) -> Dual {
    x - x.re.floor()
}

fn soft_min(x: Dual, cap: f64, width: f64) -> Dual {
    -(((-x + cap) / width).softplus() * width) + cap
}

fn sagittal(angle: Dual) -> Vec3 {
    Vec3 {
        x: angle.sin(),
        y: Dual::constant(0.0),
        z: -angle.cos(),
    }
}

impl GaitModel {
    pub fn new(
        profile: &SubjectProfile,
        params: &GaitParameters,
        style: &GaitStyle,
        phases: &PhaseTable,
        start_phase: f64,
    ) -> Self {
        let h = profile.height_m;
        Self {
            params: *params,
            style: *style,
            phases: *phases,
            start_phase,
            ankle_height: ratio::ANKLE_HEIGHT * h,
            thigh: ratio::THIGH * h,
            lower_leg: ratio::LOWER_LEG * h,
            foot: ratio::FOOT_LENGTH * h,
            torso: ratio::TORSO * h,
            neck: ratio::NECK * h,
            head: ratio::HEAD * h,
            upper_arm: ratio::UPPER_ARM * h,
            forearm: ratio::FOREARM * h,
            hip_half_width: 0.5 * ratio::HIP_WIDTH * h * style.step_width,
            shoulder_half_width: 0.5 * ratio::SHOULDER_WIDTH * h,
        }
    }

    pub fn clock(&self) -> GaitClock {
        GaitClock {
            cycle_duration: self.params.cycle_duration,
            swing_fraction: self.params.swing_fraction,
            start_phase: self.start_phase,
        }
    }

    fn swing_ramp(&self) -> f64 {
        0.25 * self.style.swing_ramp
    }

    /// Peak forward speed of a swinging ankle in the ground frame.
    pub fn peak_swing_speed(&self) -> f64 {
        self.params.walking_speed / (self.params.swing_fraction * (1.0 - self.swing_ramp()))
    }

    /// Walker-frame ankle position for a leg whose phase is `tau` cycles.
    fn ankle(&self, tau: Dual, lateral: f64) -> Vec3 {
        let p = &self.params;
        let (v, dc, sw) = (p.walking_speed, p.cycle_duration, p.swing_fraction);
        let ramp = self.swing_ramp();
        let tl = frac(tau);
        let mid_stance = sw + 0.5 * (1.0 - sw);
        let x0 = v * dc * (mid_stance - 1.0);
        let lift = 0.07 * (p.relative_velocity / 1.5).min(1.0) * self.style.foot_lift
            * (self.thigh + self.lower_leg) / (ratio::THIGH + ratio::LOWER_LEG);
        let (x, z) = if tl.re < sw {
            let s = tl / sw;
            let u = self.peak_swing_speed();
            let x = swing_displacement(s, ramp) * (u * sw * dc) - tl * (v * dc) + x0;
            let z = (s * PI).sin().powi(4) * lift + self.ankle_height;
            (x, z)
        } else {
            ((mid_stance - tl) * (v * dc), Dual::constant(self.ankle_height))
        };
        Vec3 {
            x,
            y: Dual::constant(lateral),
            z,
        }
    }

    /// Knee from hip and ankle, bending forward; reach is softly capped just
    /// below full extension.
    fn knee(&self, hip: Vec3, ankle: Vec3) -> Vec3 {
        let (l1, l2) = (self.thigh, self.lower_leg);
        let dx = ankle.x - hip.x;
        let dz = ankle.z - hip.z;
        let d = (dx * dx + dz * dz).sqrt();
        let reach = l1 + l2;
        let d = soft_min(d, 0.985 * reach, 0.01 * reach);
        let cos_a = (d * d + (l1 * l1 - l2 * l2)) / (d * (2.0 * l1));
        let angle = dz.atan2(dx) + cos_a.acos();
        Vec3 {
            x: hip.x + angle.cos() * l1,
            y: (hip.y + ankle.y) * 0.5,
            z: hip.z + angle.sin() * l1,
        }
    }

    /// Walker-frame positions of all segment centers, in [`SegmentKind::ALL`]
    /// order.
    pub fn positions(&self, t: Dual) -> [Vec3; 12] {
        let p = &self.params;
        let st = &self.style;
        let rv = p.relative_velocity;
        let ht = p.thigh_height;
        let sw = p.swing_fraction;
        let tau = t / p.cycle_duration + self.start_phase;
        // phase measured from mid single support of the left leg
        let mid = tau - 0.5 * sw;
        let double = mid * (2.0 * TAU);

        let sat = (2.0 * rv).min(1.0);
        let av = 0.015 * rv * ht * st.vertical_bob;
        let afb = 0.021 * sat * ht * st.fore_aft;
        let al = (if rv > 0.5 { 0.032 } else { 0.128 * rv * (1.0 - rv) }) * ht * st.lateral_sway;

        let hip_height =
            self.ankle_height + (self.thigh + self.lower_leg) * (1.0 - 0.05 * st.knee_bend);
        let pelvis = Vec3 {
            x: -(double.sin() * afb),
            y: (mid * TAU).cos() * al,
            z: double.cos() * av + (hip_height - av),
        };
        let lean = (3.0 * st.torso_lean).to_radians()
            + double.sin() * (2.0f64.to_radians() * sat * st.torso_lean);
        let axis = Vec3 {
            x: lean.sin(),
            y: Dual::constant(0.0),
            z: lean.cos(),
        };
        let torso_c = pelvis + axis.scale(0.5 * self.torso);
        let shoulder_c = pelvis + axis.scale(self.torso);
        let head_c = shoulder_c + axis.scale(self.neck + 0.5 * self.head);

        let arm = |side: Side| -> (Vec3, Vec3) {
            let sign = if side == Side::Left { 1.0 } else { -1.0 };
            let shoulder = shoulder_c + Vec3::new(0.0, sign * self.shoulder_half_width, 0.0);
            let ta = tau - self.phases.arm(side) / TAU + st.arm_phase;
            let c = ((ta - sw) * TAU).cos();
            let amp = 11.0f64.to_radians() * rv.min(2.0) * st.arm_swing;
            let psi = c * amp + 3.0f64.to_radians();
            let flex = 15.0f64.to_radians() * st.elbow_flex
                + (c + 1.0) * (4.0f64.to_radians() * rv.min(2.0) * st.elbow_flex);
            let elbow = shoulder + sagittal(psi).scale(self.upper_arm);
            (
                shoulder + sagittal(psi).scale(0.5 * self.upper_arm),
                elbow + sagittal(psi + flex).scale(0.5 * self.forearm),
            )
        };

        let leg = |side: Side| -> (Vec3, Vec3, Vec3) {
            let sign = if side == Side::Left { 1.0 } else { -1.0 };
            let hip = pelvis + Vec3::new(0.0, sign * self.hip_half_width, 0.0);
            let tl = tau - self.phases.leg(side) / TAU;
            let ankle = self.ankle(tl, sign * self.hip_half_width);
            let knee = self.knee(hip, ankle);
            let foot = ankle + Vec3::new(0.25 * self.foot, 0.0, -0.5 * self.ankle_height);
            (hip.midpoint(knee), knee.midpoint(ankle), foot)
        };

        let (ua_l, fa_l) = arm(Side::Left);
        let (ua_r, fa_r) = arm(Side::Right);
        let (th_l, ll_l, ft_l) = leg(Side::Left);
        let (th_r, ll_r, ft_r) = leg(Side::Right);
        [
            torso_c, head_c, ua_l, ua_r, fa_l, fa_r, th_l, th_r, ll_l, ll_r, ft_l, ft_r,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScattererTrack {
    pub kind: SegmentKind,
    pub range_m: Vec<f64>,
    pub radial_velocity: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySet {
    pub sample_rate_hz: f64,
    pub duration_s: f64,
    pub mode: WalkMode,
    pub params: GaitParameters,
    pub radar_pose: RadarPose,
    pub clock: GaitClock,
    pub tracks: Vec<ScattererTrack>,
}

impl TrajectorySet {
    pub fn len(&self) -> usize {
        self.tracks.first().map_or(0, |t| t.range_m.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn track(&self, kind: SegmentKind) -> &ScattererTrack {
        self.tracks.iter().find(|t| t.kind == kind).unwrap()
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 / self.sample_rate_hz
    }

    /// Debug dump: `t,scatterer_id,R,v`, one row per scatterer per sample.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::file(path, e))?;
        let mut w = std::io::BufWriter::new(f);
        writeln!(w, "t,scatterer_id,R,v")?;
        for n in 0..self.len() {
            let t = self.time(n);
            for (id, tr) in self.tracks.iter().enumerate() {
                writeln!(w, "{t},{id},{},{}", tr.range_m[n], tr.radial_velocity[n])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

pub fn simulate_trajectories(
    profile: &SubjectProfile,
    params: &GaitParameters,
    setup: &SimulationSetup,
) -> Result<TrajectorySet> {
    if !(setup.duration_s > 0.0) {
        return Err(Error::Domain(format!(
            "duration must be positive, got {}",
            setup.duration_s
        )));
    }
    if !(setup.sample_rate_hz >= setup.min_sample_rate_hz) {
        return Err(Error::Aliasing {
            got: setup.sample_rate_hz,
            required: setup.min_sample_rate_hz,
        });
    }
    let phases = setup.phases.unwrap_or_else(|| phase_offsets(params));
    let model = GaitModel::new(profile, params, &setup.style, &phases, setup.start_phase);
    let radar = setup.radar_pose.position();
    let n = (setup.duration_s * setup.sample_rate_hz).round() as usize;

    let mut tracks: Vec<ScattererTrack> = SegmentKind::ALL
        .iter()
        .map(|&kind| ScattererTrack {
            kind,
            range_m: Vec::with_capacity(n),
            radial_velocity: Vec::with_capacity(n),
        })
        .collect();
    let drift = match setup.mode {
        WalkMode::Treadmill => 0.0,
        WalkMode::FreeWalk => params.walking_speed,
    };
    for i in 0..n {
        let t = Dual::variable(i as f64 / setup.sample_rate_hz);
        let offset = Vec3::new(t * drift, 0.0, 0.0);
        for (track, pos) in tracks.iter_mut().zip(model.positions(t)) {
            let r = (pos + offset - radar).norm();
            track.range_m.push(r.re);
            track.radial_velocity.push(r.eps);
        }
    }
    Ok(TrajectorySet {
        sample_rate_hz: setup.sample_rate_hz,
        duration_s: n as f64 / setup.sample_rate_hz,
        mode: setup.mode,
        params: *params,
        radar_pose: setup.radar_pose,
        clock: model.clock(),
        tracks,
    })
}
