//! Random states for property checks.
//!
//! Rotations use an axis uniform on the sphere and an angle uniform on
//! `[0, π]`. Velocities are uniform per component: `ṗ ∈ ±5 m/s`,
//! `Ω_B ∈ ±50 rad/s`, wing rates `∈ ±500 rad/s`.

use rand::Rng;
use rand_distr::{Distribution, UnitSphere};

use crate::dynamics::{get3, set3, Configuration, SystemState, Vec18};
use crate::so3::{exp_so3, exp_vec, Rotation, Vec3};

pub const P_DOT_RANGE: f64 = 5.0;
pub const BODY_RATE_RANGE: f64 = 50.0;
pub const WING_RATE_RANGE: f64 = 500.0;

pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> Rotation {
    let axis: [f64; 3] = UnitSphere.sample(rng);
    let angle = rng.random_range(0.0..=std::f64::consts::PI);
    exp_so3(&Vec3::from(axis), angle).expect("unit axis")
}

pub fn random_vec<R: Rng + ?Sized>(rng: &mut R, range: f64) -> Vec3 {
    Vec3::from_fn(|_, _| rng.random_range(-range..range))
}

pub fn random_configuration<R: Rng + ?Sized>(rng: &mut R) -> Configuration {
    let p = random_vec(rng, 1.0);
    let body = random_rotation(rng);
    let wings = std::array::from_fn(|_| random_rotation(rng));
    Configuration { p, body, wings }
}

pub fn random_velocity<R: Rng + ?Sized>(rng: &mut R) -> Vec18 {
    let mut xi = Vec18::zeros();
    set3(&mut xi, 0, &random_vec(rng, P_DOT_RANGE));
    set3(&mut xi, 1, &random_vec(rng, BODY_RATE_RANGE));
    for k in 0..4 {
        set3(&mut xi, 2 + k, &random_vec(rng, WING_RATE_RANGE));
    }
    xi
}

pub fn random_state<R: Rng + ?Sized>(rng: &mut R) -> SystemState {
    let config = random_configuration(rng);
    SystemState { config, xi: random_velocity(rng), t: 0.0 }
}

/// Configuration reached by following the velocity `ξ` for time `h`.
pub fn flow_configuration(config: &Configuration, xi: &Vec18, h: f64) -> Configuration {
    Configuration {
        p: config.p + get3(xi, 0) * h,
        body: config.body.compose(&exp_vec(&(get3(xi, 1) * h))),
        wings: std::array::from_fn(|k| config.wings[k].compose(&exp_vec(&(get3(xi, 2 + k) * h)))),
    }
}
