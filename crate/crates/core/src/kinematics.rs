//! Prescribed wing motion.
//!
//! Each wing follows three Euler-angle waveforms (flapping φ, pitching θ,
//! deviation ψ) about a stroke plane tilted by β. The attitude is
//! `exp(βê₂) exp(sφê₁) exp(−sψê₃) exp(θê₂)` with `s = +1` for right wings and
//! `s = −1` for left wings. Angular velocity and acceleration are analytic.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::so3::{axis_rotation, Mat3, Rotation, Vec3};
use crate::wing_geometry::Side;

/// Waveform parameters of one wing. Angles in radians, frequency in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WingWaveform {
    pub f: f64,
    pub phi_m: f64,
    pub phi_0: f64,
    pub phi_a: f64,
    pub phi_k: f64,
    pub theta_m: f64,
    pub theta_0: f64,
    pub theta_a: f64,
    pub theta_c: f64,
    pub psi_m: f64,
    pub psi_0: f64,
    pub psi_a: f64,
    pub psi_n: u8,
    pub beta: f64,
}

/// Euler angles of a wing and their first two time derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EulerAngles {
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
    pub dphi: f64,
    pub dtheta: f64,
    pub dpsi: f64,
    pub ddphi: f64,
    pub ddtheta: f64,
    pub ddpsi: f64,
}

/// Prescribed attitude, angular velocity and angular acceleration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WingStateSample {
    pub attitude: Rotation,
    pub omega: Vec3,
    pub omega_dot: Vec3,
    pub angles: EulerAngles,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMode {
    #[default]
    Analytic,
    /// Central differences of the closed-form angles.
    FiniteDifference,
}

/// A parameter outside its allowed range.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundViolation {
    pub name: &'static str,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    /// Whether the quantity is an angle reported in degrees.
    pub degrees: bool,
}

impl std::fmt::Display for BoundViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.degrees {
            write!(
                f,
                "{} = {}° outside allowed range [{}°, {}°]",
                self.name,
                fmt_num(self.value.to_degrees()),
                fmt_num(self.lower.to_degrees()),
                fmt_num(self.upper.to_degrees())
            )
        } else {
            write!(
                f,
                "{} = {} outside allowed range [{}, {}]",
                self.name,
                fmt_num(self.value),
                fmt_num(self.lower),
                fmt_num(self.upper)
            )
        }
    }
}

fn fmt_num(x: f64) -> String {
    let r = (x * 1e6).round() / 1e6;
    format!("{r}")
}

/// Dragonfly waveform parameter ranges: `(name, lower, upper, is_angle)`,
/// angles in degrees.
pub const WAVEFORM_BOUNDS: [(&str, f64, f64, bool); 13] = [
    ("f", 30.0, 45.0, false),
    ("phi_m", 30.0, 60.0, true),
    ("psi_m", 1.0, 20.0, true),
    ("theta_m", 1.0, 90.0, true),
    ("phi_0", -30.0, 30.0, true),
    ("psi_0", 5.0, 30.0, true),
    ("theta_0", -90.0, 90.0, true),
    ("psi_a", -180.0, 180.0, true),
    ("phi_a", -180.0, 180.0, true),
    ("theta_a", -180.0, 180.0, true),
    ("phi_k", 0.01, 1.0, false),
    ("theta_c", 0.01, 5.0, false),
    ("beta", 5.0, 30.0, true),
];

impl WingWaveform {
    /// A waveform with every amplitude and offset zero (the wing stays put).
    pub fn frozen(f: f64) -> Self {
        Self {
            f,
            phi_m: 0.0,
            phi_0: 0.0,
            phi_a: 0.0,
            phi_k: 0.5,
            theta_m: 0.0,
            theta_0: 0.0,
            theta_a: 0.0,
            theta_c: 1.0,
            psi_m: 0.0,
            psi_0: 0.0,
            psi_a: 0.0,
            psi_n: 1,
            beta: 0.0,
        }
    }

    pub fn period(&self) -> f64 {
        1.0 / self.f
    }

    /// Structural invariants (not the dragonfly ranges).
    pub fn check_invariants(&self) -> Result<(), String> {
        if !(self.f > 0.0 && self.f.is_finite()) {
            return Err(format!("f = {} must be > 0", self.f));
        }
        if !(self.phi_k > 0.0 && self.phi_k <= 1.0) {
            return Err(format!("phi_k = {} must lie in (0, 1]", self.phi_k));
        }
        if !(self.theta_c > 0.0 && self.theta_c.is_finite()) {
            return Err(format!("theta_c = {} must be > 0", self.theta_c));
        }
        if !(self.psi_n == 1 || self.psi_n == 2) {
            return Err(format!("psi_n = {} must be 1 or 2", self.psi_n));
        }
        Ok(())
    }

    pub fn field(&self, name: &str) -> Option<f64> {
        Some(match name {
            "f" => self.f,
            "phi_m" => self.phi_m,
            "psi_m" => self.psi_m,
            "theta_m" => self.theta_m,
            "phi_0" => self.phi_0,
            "psi_0" => self.psi_0,
            "theta_0" => self.theta_0,
            "psi_a" => self.psi_a,
            "phi_a" => self.phi_a,
            "theta_a" => self.theta_a,
            "phi_k" => self.phi_k,
            "theta_c" => self.theta_c,
            "beta" => self.beta,
            _ => return None,
        })
    }

    /// Sets a named continuous parameter; returns `false` for unknown names.
    pub fn set_field(&mut self, name: &str, value: f64) -> bool {
        let slot = match name {
            "f" => &mut self.f,
            "phi_m" => &mut self.phi_m,
            "psi_m" => &mut self.psi_m,
            "theta_m" => &mut self.theta_m,
            "phi_0" => &mut self.phi_0,
            "psi_0" => &mut self.psi_0,
            "theta_0" => &mut self.theta_0,
            "psi_a" => &mut self.psi_a,
            "phi_a" => &mut self.phi_a,
            "theta_a" => &mut self.theta_a,
            "phi_k" => &mut self.phi_k,
            "theta_c" => &mut self.theta_c,
            "beta" => &mut self.beta,
            _ => return false,
        };
        *slot = value;
        true
    }

    /// Every parameter outside the dragonfly ranges.
    pub fn bound_violations(&self) -> Vec<BoundViolation> {
        WAVEFORM_BOUNDS
            .iter()
            .filter_map(|&(name, lo, hi, deg)| {
                let v = self.field(name).expect("bounded field exists");
                let (lower, upper) = if deg { (lo.to_radians(), hi.to_radians()) } else { (lo, hi) };
                // relative slack absorbs the degree→radian round trip
                let slack = 1e-9 * (upper - lower);
                (v < lower - slack || v > upper + slack).then_some(BoundViolation {
                    name,
                    value: v,
                    lower,
                    upper,
                    degrees: deg,
                })
            })
            .collect()
    }

    /// Closed-form angles and analytic derivatives at time `t`.
    pub fn angles(&self, t: f64) -> EulerAngles {
        let w = 2.0 * PI * self.f;

        // φ = φm/asin(K) · asin(K cos x) + φ0
        let x = w * t + self.phi_a;
        let k = self.phi_k;
        let c = self.phi_m / k.asin();
        let u = k * x.cos();
        let du = -k * w * x.sin();
        let ddu = -k * w * w * x.cos();
        let s2 = 1.0 - u * u;
        let (dphi, ddphi) = if s2 > 1e-24 {
            let s = s2.sqrt();
            (c * du / s, c * (ddu / s + u * du * du / (s * s2)))
        } else {
            // K = 1 at a stroke reversal: the triangular wave has a corner
            (0.0, 0.0)
        };
        let phi = c * u.asin() + self.phi_0;

        // θ = θm/tanh(C) · tanh(C sin x) + θ0
        let x = w * t + self.theta_a;
        let c = self.theta_m / self.theta_c.tanh();
        let y = self.theta_c * x.sin();
        let dy = self.theta_c * w * x.cos();
        let ddy = -self.theta_c * w * w * x.sin();
        let th = y.tanh();
        let sech2 = 1.0 - th * th;
        let theta = c * th + self.theta_0;
        let dtheta = c * sech2 * dy;
        let ddtheta = c * (sech2 * ddy - 2.0 * th * sech2 * dy * dy);

        // ψ = ψm cos(N w t + ψa) + ψ0
        let n = self.psi_n as f64;
        let x = n * w * t + self.psi_a;
        let psi = self.psi_m * x.cos() + self.psi_0;
        let dpsi = -self.psi_m * n * w * x.sin();
        let ddpsi = -self.psi_m * (n * w).powi(2) * x.cos();

        EulerAngles { phi, theta, psi, dphi, dtheta, dpsi, ddphi, ddtheta, ddpsi }
    }

    /// Angles with derivatives from central differences (step `h` seconds).
    pub fn angles_fd(&self, t: f64, h: f64) -> EulerAngles {
        let a = self.angles(t);
        let p = self.angles(t + h);
        let m = self.angles(t - h);
        let d1 = |f: fn(&EulerAngles) -> f64| (f(&p) - f(&m)) / (2.0 * h);
        let d2 = |f: fn(&EulerAngles) -> f64| (f(&p) - 2.0 * f(&a) + f(&m)) / (h * h);
        EulerAngles {
            dphi: d1(|e| e.phi),
            dtheta: d1(|e| e.theta),
            dpsi: d1(|e| e.psi),
            ddphi: d2(|e| e.phi),
            ddtheta: d2(|e| e.theta),
            ddpsi: d2(|e| e.psi),
            ..a
        }
    }

    /// Wing attitude relative to the body for wing `side`.
    pub fn attitude(&self, side: Side, t: f64) -> Rotation {
        let a = self.angles(t);
        attitude_from_angles(self.beta, side, a.phi, a.theta, a.psi)
    }

    pub fn angular_velocity(&self, side: Side, t: f64) -> Vec3 {
        let a = self.angles(t);
        euler_rate_jacobian(side, a.psi, a.theta) * Vec3::new(a.dphi, a.dtheta, a.dpsi)
    }

    pub fn angular_acceleration(&self, side: Side, t: f64) -> Vec3 {
        angular_acceleration_from(side, &self.angles(t))
    }

    pub fn sample(&self, side: Side, t: f64) -> WingStateSample {
        self.sample_with(side, t, DerivativeMode::Analytic)
    }

    pub fn sample_with(&self, side: Side, t: f64, mode: DerivativeMode) -> WingStateSample {
        let angles = match mode {
            DerivativeMode::Analytic => self.angles(t),
            // a step of 1e-6 periods balances truncation against roundoff
            DerivativeMode::FiniteDifference => self.angles_fd(t, 1e-6 / self.f),
        };
        let jac = euler_rate_jacobian(side, angles.psi, angles.theta);
        WingStateSample {
            attitude: attitude_from_angles(self.beta, side, angles.phi, angles.theta, angles.psi),
            omega: jac * Vec3::new(angles.dphi, angles.dtheta, angles.dpsi),
            omega_dot: angular_acceleration_from(side, &angles),
            angles,
        }
    }
}

pub fn attitude_from_angles(beta: f64, side: Side, phi: f64, theta: f64, psi: f64) -> Rotation {
    let s = side.parity();
    axis_rotation(1, beta) * axis_rotation(0, s * phi) * axis_rotation(2, -s * psi) * axis_rotation(1, theta)
}

/// Maps `(φ̇, θ̇, ψ̇)` to the wing-frame angular velocity.
pub fn euler_rate_jacobian(side: Side, psi: f64, theta: f64) -> Mat3 {
    let s = side.parity();
    let (sp, cp) = psi.sin_cos();
    let (st, ct) = theta.sin_cos();
    Mat3::new(s * cp * ct, 0.0, s * st, sp, 1.0, 0.0, s * cp * st, 0.0, -s * ct)
}

fn angular_acceleration_from(side: Side, a: &EulerAngles) -> Vec3 {
    let s = side.parity();
    let (sp, cp) = a.psi.sin_cos();
    let (st, ct) = a.theta.sin_cos();
    let (dps, dth) = (a.dpsi, a.dtheta);
    let jdot = Mat3::new(
        s * (-sp * dps * ct - cp * st * dth),
        0.0,
        s * ct * dth,
        cp * dps,
        0.0,
        0.0,
        s * (-sp * dps * st + cp * ct * dth),
        0.0,
        s * st * dth,
    );
    let rates = Vec3::new(a.dphi, a.dtheta, a.dpsi);
    let accels = Vec3::new(a.ddphi, a.ddtheta, a.ddpsi);
    jdot * rates + euler_rate_jacobian(side, a.psi, a.theta) * accels
}

/// Prescribed motion of all four wings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WingKinematics {
    pub waveforms: [WingWaveform; 4],
    #[serde(default)]
    pub mode: DerivativeMode,
}

impl WingKinematics {
    pub fn new(waveforms: [WingWaveform; 4]) -> Self {
        Self { waveforms, mode: DerivativeMode::Analytic }
    }

    /// Fore pair `(0, 1)` shares `fore`, hind pair `(2, 3)` shares `hind`.
    pub fn paired(fore: WingWaveform, hind: WingWaveform) -> Self {
        Self::new([fore, fore, hind, hind])
    }

    pub fn sample(&self, t: f64) -> [WingStateSample; 4] {
        std::array::from_fn(|i| self.waveforms[i].sample_with(Side::of_wing(i), t, self.mode))
    }

    /// Flapping period of the first wing.
    pub fn period(&self) -> f64 {
        self.waveforms[0].period()
    }
}

/// Ranges used for the body pitch parameters `(name, lower°, upper°)`.
pub const PITCH_BOUNDS: [(&str, f64, f64); 3] =
    [("pitch_amplitude", 0.0, 10.0), ("pitch_phase", -180.0, 180.0), ("pitch_offset", -30.0, 30.0)];

/// Prescribed body pitch `Φ(t) = Φm cos(2πft + Φa) + Φ0` about `e₂`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BodyPitch {
    pub amplitude: f64,
    pub phase: f64,
    pub offset: f64,
}

/// Prescribed body attitude, angular velocity and acceleration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyPitchSample {
    pub attitude: Rotation,
    pub omega: Vec3,
    pub omega_dot: Vec3,
    pub angle: f64,
}

impl BodyPitch {
    pub fn field(&self, name: &str) -> Option<f64> {
        Some(match name {
            "pitch_amplitude" => self.amplitude,
            "pitch_phase" => self.phase,
            "pitch_offset" => self.offset,
            _ => return None,
        })
    }

    pub fn set_field(&mut self, name: &str, value: f64) -> bool {
        let slot = match name {
            "pitch_amplitude" => &mut self.amplitude,
            "pitch_phase" => &mut self.phase,
            "pitch_offset" => &mut self.offset,
            _ => return false,
        };
        *slot = value;
        true
    }

    pub fn bound_violations(&self) -> Vec<BoundViolation> {
        PITCH_BOUNDS
            .iter()
            .filter_map(|&(name, lo, hi)| {
                let v = self.field(name).expect("bounded field exists");
                let (lower, upper) = (lo.to_radians(), hi.to_radians());
                let slack = 1e-9 * (upper - lower);
                (v < lower - slack || v > upper + slack).then_some(BoundViolation {
                    name,
                    value: v,
                    lower,
                    upper,
                    degrees: true,
                })
            })
            .collect()
    }

    pub fn sample(&self, f: f64, t: f64) -> BodyPitchSample {
        let w = 2.0 * PI * f;
        let x = w * t + self.phase;
        let angle = self.amplitude * x.cos() + self.offset;
        let rate = -self.amplitude * w * x.sin();
        let accel = -self.amplitude * w * w * x.cos();
        BodyPitchSample {
            attitude: axis_rotation(1, angle),
            omega: Vec3::y() * rate,
            omega_dot: Vec3::y() * accel,
            angle,
        }
    }
}

/// `Rᵀ (R(t+h) − R(t−h)) / 2h` read back as a vector.
pub fn fd_body_rate(r: impl Fn(f64) -> Rotation, t: f64, h: f64) -> Vec3 {
    let d = (r(t + h).matrix() - r(t - h).matrix()) / (2.0 * h);
    let m = r(t).matrix().transpose() * d;
    // skew part only
    let k = (m - m.transpose()) * 0.5;
    crate::so3::vee(&k)
}

/// Fore-wing column of the reference hover set, in radians.
pub fn reference_fore() -> WingWaveform {
    let d = f64::to_radians;
    WingWaveform {
        f: 35.6476,
        phi_m: d(58.42),
        phi_0: d(4.64),
        phi_a: 0.0,
        phi_k: 0.533,
        theta_m: d(1.43),
        theta_0: d(-35.24),
        theta_a: d(-98.82),
        theta_c: 2.394,
        psi_m: d(11.16),
        psi_0: d(26.49),
        psi_a: d(-40.10),
        psi_n: 1,
        beta: d(10.95),
    }
}

/// Hind-wing column of the reference hover set, in radians.
pub fn reference_hind() -> WingWaveform {
    let d = f64::to_radians;
    WingWaveform {
        f: 35.6476,
        phi_m: d(32.48),
        phi_0: d(28.49),
        phi_a: d(92.56),
        phi_k: 0.895,
        theta_m: d(37.18),
        theta_0: d(-1.83),
        theta_a: d(-138.47),
        theta_c: 1.613,
        psi_m: d(4.26),
        psi_0: d(20.29),
        psi_a: d(29.37),
        psi_n: 2,
        beta: d(23.53),
    }
}

/// Reference hover kinematics: fore pair, hind pair and the body pitch.
pub fn reference_hover() -> (WingKinematics, BodyPitch) {
    let d = f64::to_radians;
    let pitch = BodyPitch { amplitude: d(0.37), phase: d(-5.72), offset: d(0.434) };
    (WingKinematics::paired(reference_fore(), reference_hind()), pitch)
}
