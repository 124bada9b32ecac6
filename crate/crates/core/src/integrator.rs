//! Runge–Kutta–Munthe-Kaas integration on `ℝ³ × SO(3)ᴺ × ℝᴹ`.
//!
//! Each attitude is advanced as `R₀ exp(θ)`, with `θ` integrated by classical
//! RK4 from `θ' = dexp⁻¹_θ(Ω)`. Position and the vector part use plain RK4.

use nalgebra::SVector;

use crate::error::Result;
use crate::so3::{exp_vec, Rotation, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LieState<const N: usize, const M: usize> {
    pub p: Vec3,
    pub rots: [Rotation; N],
    pub x: SVector<f64, M>,
}

/// Time derivatives: `ṗ`, body-frame angular velocities, and `ẋ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates<const N: usize, const M: usize> {
    pub p: Vec3,
    pub omegas: [Vec3; N],
    pub x: SVector<f64, M>,
}

/// `θ'` such that `R₀ exp(θ)` has body rate `Ω`, truncated after the terms
/// a fourth-order method needs.
#[inline]
pub fn dexpinv(theta: &Vec3, omega: &Vec3) -> Vec3 {
    let c = theta.cross(omega);
    omega + c * 0.5 + theta.cross(&c) / 12.0
}

fn displaced<const N: usize, const M: usize>(
    y0: &LieState<N, M>,
    dp: Vec3,
    thetas: &[Vec3; N],
    dx: &SVector<f64, M>,
) -> LieState<N, M> {
    LieState { p: y0.p + dp, rots: std::array::from_fn(|j| y0.rots[j].compose(&exp_vec(&thetas[j]))), x: y0.x + dx }
}

/// One RKMK4 step of size `h` from `(t, y0)`.
pub fn rkmk4_step<const N: usize, const M: usize, F>(
    y0: &LieState<N, M>,
    t: f64,
    h: f64,
    mut f: F,
) -> Result<LieState<N, M>>
where
    F: FnMut(f64, &LieState<N, M>) -> Result<Rates<N, M>>,
{
    let k1 = f(t, y0)?;
    let th1 = k1.omegas;

    let a2: [Vec3; N] = std::array::from_fn(|j| th1[j] * (0.5 * h));
    let y2 = displaced(y0, k1.p * (0.5 * h), &a2, &(k1.x * (0.5 * h)));
    let k2 = f(t + 0.5 * h, &y2)?;
    let th2: [Vec3; N] = std::array::from_fn(|j| dexpinv(&a2[j], &k2.omegas[j]));

    let a3: [Vec3; N] = std::array::from_fn(|j| th2[j] * (0.5 * h));
    let y3 = displaced(y0, k2.p * (0.5 * h), &a3, &(k2.x * (0.5 * h)));
    let k3 = f(t + 0.5 * h, &y3)?;
    let th3: [Vec3; N] = std::array::from_fn(|j| dexpinv(&a3[j], &k3.omegas[j]));

    let a4: [Vec3; N] = std::array::from_fn(|j| th3[j] * h);
    let y4 = displaced(y0, k3.p * h, &a4, &(k3.x * h));
    let k4 = f(t + h, &y4)?;
    let th4: [Vec3; N] = std::array::from_fn(|j| dexpinv(&a4[j], &k4.omegas[j]));

    let s = h / 6.0;
    let theta: [Vec3; N] = std::array::from_fn(|j| (th1[j] + (th2[j] + th3[j]) * 2.0 + th4[j]) * s);
    let dp = (k1.p + (k2.p + k3.p) * 2.0 + k4.p) * s;
    let dx = (k1.x + (k2.x + k3.x) * 2.0 + k4.x) * s;
    Ok(displaced(y0, dp, &theta, &dx))
}
