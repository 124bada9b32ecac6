//! Full 18-DOF equations of motion `C ξ̇ + D ξ = F_a + H_c τ + F_g`.
//!
//! Block ordering of every 18-vector: `ṗ` (inertial), `Ω_B` (body frame),
//! then `Ω₁..Ω₄` (each in its wing frame). Rows follow the same order.

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::aero::{AeroModel, WingFlow, WingWrench};
use crate::error::{Error, Result};
use crate::integrator::{rkmk4_step, LieState, Rates};
use crate::morphology::Morphology;
use crate::so3::{hat, Mat3, Rotation, Vec3};

pub type Vec18 = SVector<f64, 18>;
pub type Mat18 = SMatrix<f64, 18, 18>;
pub type Mat9 = SMatrix<f64, 9, 9>;

/// Offset of block `b` (0 = ṗ, 1 = Ω_B, 2..6 = wings) in an 18-vector.
#[inline]
pub const fn block(b: usize) -> usize {
    3 * b
}

#[inline]
pub fn get3(x: &Vec18, b: usize) -> Vec3 {
    x.fixed_rows::<3>(block(b)).into_owned()
}

#[inline]
pub fn set3(x: &mut Vec18, b: usize, v: &Vec3) {
    x.fixed_rows_mut::<3>(block(b)).copy_from(v);
}

#[inline]
fn set_block(m: &mut Mat18, r: usize, c: usize, b: &Mat3) {
    m.fixed_view_mut::<3, 3>(block(r), block(c)).copy_from(b);
}

#[inline]
fn get_block(m: &Mat18, r: usize, c: usize) -> Mat3 {
    m.fixed_view::<3, 3>(block(r), block(c)).into_owned()
}

/// How joint torques and aerodynamic wing moments enter the body row.
///
/// A body rotation carries the attached wings, so in `Internal` the joint
/// torques do no work on the body row and the wing moments `Σ AᵢMᵢ` reach it
/// alongside `Σ μ̂ᵢAᵢFᵢ`. `Reaction` instead applies the torque reaction
/// `−Στᵢ` to the body row and keeps only `Σ μ̂ᵢAᵢFᵢ`; it double counts the
/// joint reaction and is kept for comparison. Translational and wing rows
/// are identical under both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForceConvention {
    #[default]
    Internal,
    Reaction,
}

/// Body position and the five attitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Configuration {
    pub p: Vec3,
    pub body: Rotation,
    pub wings: [Rotation; 4],
}

impl Default for Configuration {
    fn default() -> Self {
        Self { p: Vec3::zeros(), body: Rotation::identity(), wings: [Rotation::identity(); 4] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemState {
    pub config: Configuration,
    pub xi: Vec18,
    pub t: f64,
}

impl SystemState {
    pub fn at_rest(config: Configuration) -> Self {
        Self { config, xi: Vec18::zeros(), t: 0.0 }
    }
    pub fn p_dot(&self) -> Vec3 {
        get3(&self.xi, 0)
    }
    pub fn omega_body(&self) -> Vec3 {
        get3(&self.xi, 1)
    }
    pub fn omega_wing(&self, k: usize) -> Vec3 {
        get3(&self.xi, 2 + k)
    }
    pub fn is_finite(&self) -> bool {
        self.xi.iter().all(|x| x.is_finite())
            && self.config.p.iter().all(|x| x.is_finite())
            && self.config.body.matrix().iter().all(|x| x.is_finite())
            && self.config.wings.iter().all(|w| w.matrix().iter().all(|x| x.is_finite()))
    }
}

/// The 9×9 kinetic-energy matrix of wing `i` acting on `(ṗ, Ω_B, Ωᵢ)`,
/// including a quarter of the body mass and inertia.
pub fn mass_block(config: &Configuration, morph: &Morphology, i: usize) -> Mat9 {
    let w = &morph.wings[i];
    let r = config.body.matrix();
    let a = config.wings[i].matrix();
    let m = w.mass;
    let mu = hat(&w.mu);
    let ak = hat(&(a * w.kappa));
    let kap = hat(&w.kappa);

    let b11 = Mat3::identity() * (0.25 * morph.body_mass + m);
    let b12 = -r * (mu + ak) * m;
    let b13 = -r * a * kap * m;
    let b22 = a * w.inertia * a.transpose() - mu * mu * m
        + mu.transpose() * ak * m
        + ak * mu.transpose() * m
        + morph.body_inertia * 0.25;
    let b32 = w.inertia * a.transpose() + kap.transpose() * a.transpose() * mu * m;

    let mut j = Mat9::zeros();
    j.fixed_view_mut::<3, 3>(0, 0).copy_from(&b11);
    j.fixed_view_mut::<3, 3>(0, 3).copy_from(&b12);
    j.fixed_view_mut::<3, 3>(0, 6).copy_from(&b13);
    j.fixed_view_mut::<3, 3>(3, 0).copy_from(&b12.transpose());
    j.fixed_view_mut::<3, 3>(3, 3).copy_from(&b22);
    j.fixed_view_mut::<3, 3>(3, 6).copy_from(&b32.transpose());
    j.fixed_view_mut::<3, 3>(6, 0).copy_from(&b13.transpose());
    j.fixed_view_mut::<3, 3>(6, 3).copy_from(&b32);
    j.fixed_view_mut::<3, 3>(6, 6).copy_from(&w.inertia);
    j
}

/// The 18×18 mass matrix `C(𝔤)` with `T = ½ ξᵀ C ξ`.
pub fn assemble_c(config: &Configuration, morph: &Morphology) -> Mat18 {
    let mut c = Mat18::zeros();
    for i in 0..4 {
        let j = mass_block(config, morph, i);
        let k = 2 + i;
        let mut acc = |r: usize, cc: usize, jr: usize, jc: usize| {
            let add = j.fixed_view::<3, 3>(3 * jr, 3 * jc).into_owned();
            let cur = get_block(&c, r, cc);
            set_block(&mut c, r, cc, &(cur + add));
        };
        acc(0, 0, 0, 0);
        acc(0, 1, 0, 1);
        acc(1, 0, 1, 0);
        acc(1, 1, 1, 1);
        acc(0, k, 0, 2);
        acc(k, 0, 2, 0);
        acc(1, k, 1, 2);
        acc(k, 1, 2, 1);
        acc(k, k, 2, 2);
    }
    c
}

/// `S(ξ) = diag(0, Ω̂_B, Ω̂₁, …, Ω̂₄)`.
pub fn assemble_s(xi: &Vec18) -> Mat18 {
    let mut s = Mat18::zeros();
    for b in 1..6 {
        set_block(&mut s, b, b, &hat(&get3(xi, b)));
    }
    s
}

/// `D(𝔤, ξ) ξ`, the velocity-quadratic terms of the equations of motion.
///
/// This is `Ċξ + S C ξ − ρ`, where `ρ` is the configuration gradient of the
/// kinetic energy at fixed `ξ` (left-trivialized on each SO(3) factor).
pub fn coriolis(config: &Configuration, xi: &Vec18, morph: &Morphology) -> Vec18 {
    let r = config.body.matrix();
    let rt = r.transpose();
    let pd = get3(xi, 0);
    let w = get3(xi, 1);
    let mut out = Vec18::zeros();
    let mut row_p = Vec3::zeros();
    let mut row_b = w.cross(&(morph.body_inertia * w));
    for k in 0..4 {
        let wing = &morph.wings[k];
        let a = config.wings[k].matrix();
        let at = a.transpose();
        let om = get3(xi, 2 + k);
        let m = wing.mass;
        let kap = wing.kappa;
        let rv = wing.mu + a * kap;
        // CoM velocity v = ṗ − R u
        let u = rv.cross(&w) + a * kap.cross(&om);
        let x = rt * (pd - r * u);
        let kh = hat(&kap);
        let jc = wing.inertia + kh * kh * m;
        let h = jc * (at * w + om);

        // rates of the configuration-dependent factors at fixed ξ
        let rdot = a * om.cross(&kap);
        let udot = rdot.cross(&w) + a * om.cross(&kap.cross(&om));
        let rt_vdot = -w.cross(&u) - udot;
        let xdot = -w.cross(&x) + rt_vdot;
        let hdot = jc * (-om.cross(&(at * w)));

        row_p += r * rt_vdot * m;

        let cb = rv.cross(&x) * m + a * h;
        let cdot_b = (rdot.cross(&x) + rv.cross(&xdot)) * m + a * om.cross(&h) + a * hdot;
        row_b += cdot_b + w.cross(&cb) + u.cross(&x) * m;

        let atx = at * x;
        let ck = kap.cross(&atx) * m + h;
        let cdot_k = kap.cross(&(-om.cross(&atx) + at * xdot)) * m + hdot;
        let minus_rho = (kap.cross(&(at * w.cross(&x))) + kap.cross(&om).cross(&atx)) * m + (at * w).cross(&h);
        set3(&mut out, 2 + k, &(cdot_k + om.cross(&ck) + minus_rho));
    }
    set3(&mut out, 0, &row_p);
    set3(&mut out, 1, &row_b);
    out
}

/// Block matrix `N(𝔤, ξ)` with `(S C + N) ξ = coriolis(𝔤, ξ)`.
///
/// Translational and body rows follow the published block expressions. The
/// wing rows are re-derived: the published ones do not reproduce the
/// Euler–Lagrange residual (see [`assemble_n_literal`]).
pub fn assemble_n(config: &Configuration, xi: &Vec18, morph: &Morphology) -> Mat18 {
    let mut n = assemble_n_body_rows(config, xi, morph);
    let r = config.body.matrix();
    let rt = r.transpose();
    let w = get3(xi, 1);
    let wh = hat(&w);
    for k in 0..4 {
        let wing = &morph.wings[k];
        let a = config.wings[k].matrix();
        let at = a.transpose();
        let om = get3(xi, 2 + k);
        let omh = hat(&om);
        let m = wing.mass;
        let kh = hat(&wing.kappa);
        let mu = hat(&wing.mu);
        let rh = mu + hat(&(a * wing.kappa));
        let kom = hat(&wing.kappa.cross(&om));
        let aw = hat(&(at * w));
        let j = wing.inertia;

        let nk1 = (-kh * omh * at * rt + kom * at * rt) * m;
        let nk2 = -j * omh * at + kh * omh * at * mu * m - kh * at * wh * rh * m - kom * at * rh * m
            + aw * j * at
            + aw * kh * kh * at * m;
        let nkk = -kh * aw * kh * m + aw * j + aw * kh * kh * m;
        set_block(&mut n, 2 + k, 0, &nk1);
        set_block(&mut n, 2 + k, 1, &nk2);
        set_block(&mut n, 2 + k, 2 + k, &nkk);
    }
    n
}

fn assemble_n_body_rows(config: &Configuration, xi: &Vec18, morph: &Morphology) -> Mat18 {
    let mut n = Mat18::zeros();
    let r = config.body.matrix();
    let rt = r.transpose();
    let w = get3(xi, 1);
    let wh = hat(&w);
    let mut n12 = Mat3::zeros();
    let mut n21 = Mat3::zeros();
    let mut n22 = Mat3::zeros();
    for k in 0..4 {
        let wing = &morph.wings[k];
        let a = config.wings[k].matrix();
        let at = a.transpose();
        let om = get3(xi, 2 + k);
        let omh = hat(&om);
        let m = wing.mass;
        let kh = hat(&wing.kappa);
        let mu = hat(&wing.mu);
        let akap = a * wing.kappa;
        let rh = mu + hat(&akap);
        let aok = hat(&(a * om.cross(&wing.kappa)));
        let j = wing.inertia;

        n12 += (-r * wh * rh - r * aok) * m;
        set_block(&mut n, 0, 2 + k, &(-r * (wh * a + a * omh) * kh * m));
        n21 += (-rh * wh * rt + (hat(&(wing.mu.cross(&w))) + hat(&akap.cross(&w))) * rt) * m;
        n22 += a * omh * j * at - a * j * omh * at - (mu * aok + aok * mu) * m;
        set_block(&mut n, 1, 2 + k, &(a * omh * j - mu * a * omh * kh * m));
    }
    set_block(&mut n, 0, 1, &n12);
    set_block(&mut n, 1, 0, &n21);
    set_block(&mut n, 1, 1, &n22);
    n
}

/// The published `N` blocks transcribed as printed, kept for comparison.
pub fn assemble_n_literal(config: &Configuration, xi: &Vec18, morph: &Morphology) -> Mat18 {
    let mut n = assemble_n_body_rows(config, xi, morph);
    let r = config.body.matrix();
    let rt = r.transpose();
    let w = get3(xi, 1);
    let wh = hat(&w);
    for k in 0..4 {
        let wing = &morph.wings[k];
        let a = config.wings[k].matrix();
        let at = a.transpose();
        let om = get3(xi, 2 + k);
        let omh = hat(&om);
        let m = wing.mass;
        let kh = hat(&wing.kappa);
        let mu = hat(&wing.mu);
        let j = wing.inertia;
        let nk1 = (-kh * (at * wh + omh * at) * rt + kh * a * wh * rt + hat(&wing.kappa.cross(&om)) * at * rt) * m;
        let nk2 = -j * omh * at + kh * omh * at * mu * m
            - hat(&(j * at * w)) * at
            - kh * at * (wh * mu - hat(&wing.mu.cross(&w))) * m;
        let nkk = hat(&(at * w)).transpose() * j + hat(&(at * mu * w)) * kh.transpose() * m;
        set_block(&mut n, 2 + k, 0, &nk1);
        set_block(&mut n, 2 + k, 1, &nk2);
        set_block(&mut n, 2 + k, 2 + k, &nkk);
    }
    n
}

/// `D = S C + N`.
pub fn assemble_d(config: &Configuration, xi: &Vec18, morph: &Morphology) -> Mat18 {
    assemble_s(xi) * assemble_c(config, morph) + assemble_n(config, xi, morph)
}

/// Gravity column `F_g`, with gravity along `+e₃`.
pub fn gravity_forces(config: &Configuration, morph: &Morphology) -> Vec18 {
    let g = morph.g;
    let rt_e3 = config.body.matrix().transpose() * Vec3::z();
    let mut f = Vec18::zeros();
    set3(&mut f, 0, &(Vec3::z() * morph.total_mass() * g));
    let mut body = Vec3::zeros();
    for k in 0..4 {
        let w = &morph.wings[k];
        let a = config.wings[k].matrix();
        let rv = w.mu + a * w.kappa;
        body += rv.cross(&rt_e3) * (w.mass * g);
        set3(&mut f, 2 + k, &(w.kappa.cross(&(a.transpose() * rt_e3)) * (w.mass * g)));
    }
    set3(&mut f, 1, &body);
    f
}

/// `H_c τ` for body-frame joint torques.
pub fn torque_forces(config: &Configuration, tau: &[Vec3; 4], conv: ForceConvention) -> Vec18 {
    let mut f = Vec18::zeros();
    if conv == ForceConvention::Reaction {
        let sum: Vec3 = tau.iter().sum();
        set3(&mut f, 1, &-sum);
    }
    for (k, (w, t)) in config.wings.iter().zip(tau).enumerate() {
        set3(&mut f, 2 + k, &(w.matrix().transpose() * t));
    }
    f
}

/// Flow field of wing `k` in the given state.
pub fn wing_flow<'m>(state: &SystemState, morph: &'m Morphology, k: usize) -> WingFlow<'m> {
    let wing = &morph.wings[k];
    WingFlow::new(
        &wing.shape,
        state.config.body.matrix(),
        state.config.wings[k].matrix(),
        &state.p_dot(),
        &state.omega_body(),
        &state.omega_wing(k),
        &wing.mu,
    )
}

/// Aerodynamic wrench of every wing, in its own frame.
pub fn wing_wrenches(state: &SystemState, morph: &Morphology, aero: &AeroModel) -> [WingWrench; 4] {
    wing_wrenches_with(state, morph, aero, None)
}

/// [`wing_wrenches`] with the strip lift signs held at `signs`.
pub fn wing_wrenches_with(
    state: &SystemState,
    morph: &Morphology,
    aero: &AeroModel,
    signs: Option<&LiftSigns>,
) -> [WingWrench; 4] {
    std::array::from_fn(|k| aero.wing_loads_with(&wing_flow(state, morph, k), signs.map(|s| s.0[k].as_slice())))
}

/// Strip lift signs of all four wings, frozen at one state.
///
/// The lift direction flips sign discontinuously where the projected
/// velocity crosses a chord axis. The steppers evaluate the signs once at the
/// start of each step and hold them through the stages, so every stage sees a
/// smooth right-hand side and different integrations of the same trajectory
/// switch at the same steps.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftSigns(pub [Vec<f64>; 4]);

impl LiftSigns {
    pub fn at(state: &SystemState, morph: &Morphology, aero: &AeroModel) -> Self {
        if aero.rho == 0.0 {
            return Self(Default::default());
        }
        Self(std::array::from_fn(|k| aero.lift_signs(&wing_flow(state, morph, k))))
    }
}

/// Stacks per-wing wrenches into the generalized aerodynamic force `F_a`.
pub fn aero_forces_from(
    config: &Configuration,
    wrenches: &[WingWrench; 4],
    morph: &Morphology,
    conv: ForceConvention,
) -> Vec18 {
    let r = config.body.matrix();
    let mut f = Vec18::zeros();
    let mut trans = Vec3::zeros();
    let mut body = Vec3::zeros();
    for (k, w) in wrenches.iter().enumerate() {
        let a = config.wings[k].matrix();
        let fk = a * w.force();
        trans += r * fk;
        body += morph.wings[k].mu.cross(&fk);
        if conv == ForceConvention::Internal {
            body += a * w.moment;
        }
        set3(&mut f, 2 + k, &w.moment);
    }
    set3(&mut f, 0, &trans);
    set3(&mut f, 1, &body);
    f
}

pub fn aero_forces(state: &SystemState, morph: &Morphology, aero: &AeroModel, conv: ForceConvention) -> Vec18 {
    aero_forces_from(&state.config, &wing_wrenches(state, morph, aero), morph, conv)
}

/// Everything the right-hand side needs for one model evaluation.
#[derive(Debug, Clone, Copy)]
pub struct Model<'a> {
    pub morph: &'a Morphology,
    pub aero: &'a AeroModel,
    pub convention: ForceConvention,
    /// Lift signs held fixed during a step; live signs when absent.
    pub lift_signs: Option<&'a LiftSigns>,
}

impl<'a> Model<'a> {
    pub fn new(morph: &'a Morphology, aero: &'a AeroModel) -> Self {
        Self { morph, aero, convention: ForceConvention::default(), lift_signs: None }
    }

    pub fn with_convention(mut self, convention: ForceConvention) -> Self {
        self.convention = convention;
        self
    }

    /// Copy of the model with the lift signs held at `signs`.
    pub fn latched<'b>(&self, signs: &'b LiftSigns) -> Model<'b>
    where
        'a: 'b,
    {
        Model { lift_signs: Some(signs), ..*self }
    }

    pub fn wing_wrenches(&self, state: &SystemState) -> [WingWrench; 4] {
        wing_wrenches_with(state, self.morph, self.aero, self.lift_signs)
    }

    pub fn generalized_forces(&self, state: &SystemState, tau: &[Vec3; 4]) -> Vec18 {
        aero_forces_from(&state.config, &self.wing_wrenches(state), self.morph, self.convention)
            + torque_forces(&state.config, tau, self.convention)
            + gravity_forces(&state.config, self.morph)
    }

    /// Solves `C ξ̇ = F − D ξ`. A state or force that is no longer finite is
    /// reported as [`Error::NonFiniteState`] at the state's time.
    pub fn eom_rhs(&self, state: &SystemState, tau: &[Vec3; 4]) -> Result<Vec18> {
        let blown = || Error::NonFiniteState { t: state.t };
        if !state.is_finite() {
            return Err(blown());
        }
        let c = assemble_c(&state.config, self.morph);
        let rhs = self.generalized_forces(state, tau) - coriolis(&state.config, &state.xi, self.morph);
        if !rhs.iter().all(|x| x.is_finite()) {
            return Err(blown());
        }
        solve_spd(&c, &rhs)
    }
}

/// Cholesky solve with one step of iterative refinement.
pub fn solve_spd(c: &Mat18, rhs: &Vec18) -> Result<Vec18> {
    let chol = c.cholesky().ok_or(Error::SingularMass)?;
    let mut x = chol.solve(rhs);
    let res = rhs - c * x;
    x += chol.solve(&res);
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::SingularMass);
    }
    Ok(x)
}

/// Potential energy with gravity along `+e₃`.
pub fn potential_energy(config: &Configuration, morph: &Morphology) -> f64 {
    let r = config.body.matrix();
    let mut u = -morph.body_mass * morph.g * config.p.z;
    for k in 0..4 {
        let w = &morph.wings[k];
        let pos = config.p + r * (w.mu + config.wings[k].matrix() * w.kappa);
        u -= w.mass * morph.g * pos.z;
    }
    u
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub kinetic: f64,
    pub potential: f64,
    pub momentum: Vec3,
    pub total: f64,
}

pub fn diagnostics(state: &SystemState, morph: &Morphology) -> Diagnostics {
    let c = assemble_c(&state.config, morph);
    let cx = c * state.xi;
    let kinetic = 0.5 * state.xi.dot(&cx);
    let potential = potential_energy(&state.config, morph);
    Diagnostics { kinetic, potential, momentum: get3(&cx, 0), total: kinetic + potential }
}

/// Joint torques as a function of time and the current state. `model` is
/// the model the stepper is evaluating, including any latched lift signs.
pub trait TorqueInput {
    fn torques(&self, t: f64, state: &SystemState, model: &Model<'_>) -> [Vec3; 4];
}

/// No joint torques: the wings swing freely.
pub struct ZeroTorque;

impl TorqueInput for ZeroTorque {
    fn torques(&self, _t: f64, _state: &SystemState, _model: &Model<'_>) -> [Vec3; 4] {
        [Vec3::zeros(); 4]
    }
}

impl<F: Fn(f64) -> [Vec3; 4]> TorqueInput for F {
    fn torques(&self, t: f64, _state: &SystemState, _model: &Model<'_>) -> [Vec3; 4] {
        self(t)
    }
}

fn to_lie(s: &SystemState) -> LieState<5, 18> {
    let mut rots = [Rotation::identity(); 5];
    rots[0] = s.config.body;
    rots[1..].copy_from_slice(&s.config.wings);
    LieState { p: s.config.p, rots, x: s.xi }
}

fn from_lie(l: &LieState<5, 18>, t: f64) -> SystemState {
    let mut wings = [Rotation::identity(); 4];
    wings.copy_from_slice(&l.rots[1..]);
    SystemState { config: Configuration { p: l.p, body: l.rots[0], wings }, xi: l.x, t }
}

/// One Lie-group Runge–Kutta step of the full model, with the lift signs
/// latched at the initial state.
pub fn step(model: &Model<'_>, torque: &dyn TorqueInput, state: &SystemState, dt: f64) -> Result<SystemState> {
    let signs = LiftSigns::at(state, model.morph, model.aero);
    let model = model.latched(&signs);
    let lie = to_lie(state);
    let next = rkmk4_step(&lie, state.t, dt, |t, l| {
        let s = from_lie(l, t);
        let tau = torque.torques(t, &s, &model);
        let xid = model.eom_rhs(&s, &tau)?;
        let mut omegas = [Vec3::zeros(); 5];
        for (b, o) in omegas.iter_mut().enumerate() {
            *o = get3(&l.x, 1 + b);
        }
        Ok(Rates { p: get3(&l.x, 0), omegas, x: xid })
    })?;
    let out = from_lie(&next, state.t + dt);
    if !out.is_finite() {
        return Err(Error::NonFiniteState { t: out.t });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morphology::{default_dragonfly, InertiaMode};
    use crate::sampling::{random_configuration, random_state};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rel(a: &Vec18, b: &Vec18) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    #[test]
    fn massless_wing_block_decouples() {
        let mut morph = default_dragonfly(InertiaMode::Rescaled);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cfg = random_configuration(&mut rng);
        morph.wings[0].mass = 0.0;
        morph.wings[0].kappa = Vec3::zeros();
        let j = mass_block(&cfg, &morph, 0);
        let a = cfg.wings[0].matrix();
        let ji = morph.wings[0].inertia;
        assert_eq!(j.fixed_view::<3, 3>(0, 0).into_owned(), Mat3::identity() * 0.25 * morph.body_mass);
        assert!(j.fixed_view::<3, 3>(0, 3).amax() == 0.0 && j.fixed_view::<3, 3>(0, 6).amax() == 0.0);
        let b22 = morph.body_inertia * 0.25 + a * ji * a.transpose();
        assert!((j.fixed_view::<3, 3>(3, 3) - b22).amax() < 1e-25);
        assert!((j.fixed_view::<3, 3>(6, 3) - ji * a.transpose()).amax() < 1e-25);
        assert_eq!(j.fixed_view::<3, 3>(6, 6).into_owned(), ji);
    }

    #[test]
    fn zero_velocity_gives_zero_d() {
        let morph = default_dragonfly(InertiaMode::Rescaled);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cfg = random_configuration(&mut rng);
        assert_eq!(assemble_d(&cfg, &Vec18::zeros(), &morph), Mat18::zeros());
        assert_eq!(coriolis(&cfg, &Vec18::zeros(), &morph), Vec18::zeros());
    }

    #[test]
    fn block_d_matches_vector_form() {
        for mode in [InertiaMode::Rescaled, InertiaMode::Tabulated] {
            let morph = default_dragonfly(mode);
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            for _ in 0..200 {
                let s = random_state(&mut rng);
                let d = assemble_d(&s.config, &s.xi, &morph) * s.xi;
                let v = coriolis(&s.config, &s.xi, &morph);
                assert!(rel(&d, &v) < 1e-11, "{}", rel(&d, &v));
            }
        }
    }

    #[test]
    fn published_wing_rows_differ_from_the_euler_lagrange_terms() {
        let morph = default_dragonfly(InertiaMode::Rescaled);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = random_state(&mut rng);
        let c = assemble_c(&s.config, &morph);
        let lit = (assemble_s(&s.xi) * c + assemble_n_literal(&s.config, &s.xi, &morph)) * s.xi;
        let v = coriolis(&s.config, &s.xi, &morph);
        // body rows agree, wing rows do not
        assert!((lit.rows(0, 6) - v.rows(0, 6)).norm() < 1e-11 * v.rows(0, 6).norm());
        assert!((lit.rows(6, 12) - v.rows(6, 12)).norm() > 1e-6 * v.rows(6, 12).norm());
    }

    #[test]
    fn power_identity() {
        // ξᵀ D ξ = ½ ξᵀ Ċ ξ
        let morph = default_dragonfly(InertiaMode::Rescaled);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let s = random_state(&mut rng);
            let h = 1e-7;
            let fwd = crate::sampling::flow_configuration(&s.config, &s.xi, h);
            let bwd = crate::sampling::flow_configuration(&s.config, &s.xi, -h);
            let cdot = (assemble_c(&fwd, &morph) - assemble_c(&bwd, &morph)) / (2.0 * h);
            let lhs = s.xi.dot(&coriolis(&s.config, &s.xi, &morph));
            let rhs = 0.5 * s.xi.dot(&(cdot * s.xi));
            assert!((lhs - rhs).abs() < 1e-6 * rhs.abs().max(1e-12), "{lhs} {rhs}");
        }
    }

    #[test]
    fn gravity_only_at_rest() {
        let morph = default_dragonfly(InertiaMode::Rescaled);
        let aero = AeroModel::default().with_rho(0.0);
        let model = Model::new(&morph, &aero);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let s = SystemState::at_rest(random_configuration(&mut rng));
        let f = model.generalized_forces(&s, &[Vec3::zeros(); 4]);
        assert_eq!(f, gravity_forces(&s.config, &morph));
        assert!((get3(&f, 0) - Vec3::z() * morph.total_mass() * morph.g).norm() < 1e-20);
        // free fall: every body accelerates together
        let xid = model.eom_rhs(&s, &[Vec3::zeros(); 4]).unwrap();
        assert!((get3(&xid, 0) - Vec3::z() * morph.g).norm() < 1e-9);
        for b in 1..6 {
            assert!(get3(&xid, b).norm() < 1e-9, "block {b}: {}", get3(&xid, b));
        }
    }

    #[test]
    fn torque_map_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let cfg = random_configuration(&mut rng);
        let tau = Vec3::new(1.0, -2.0, 0.5);
        let f = torque_forces(&cfg, &[tau, Vec3::zeros(), Vec3::zeros(), Vec3::zeros()], ForceConvention::Reaction);
        assert_eq!(get3(&f, 0), Vec3::zeros());
        assert_eq!(get3(&f, 1), -tau);
        assert_eq!(get3(&f, 2), cfg.wings[0].matrix().transpose() * tau);
        assert_eq!(get3(&f, 3), Vec3::zeros());
        let g = torque_forces(&cfg, &[tau, Vec3::zeros(), Vec3::zeros(), Vec3::zeros()], ForceConvention::Internal);
        assert_eq!(get3(&g, 1), Vec3::zeros());
    }

    #[test]
    fn translational_aero_row_is_the_rotated_wing_force_sum() {
        let morph = default_dragonfly(InertiaMode::Rescaled);
        let aero = AeroModel::default();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = random_state(&mut rng);
        let wr = wing_wrenches(&s, &morph, &aero);
        let f = aero_forces_from(&s.config, &wr, &morph, ForceConvention::Reaction);
        let mut sum = Vec3::zeros();
        for (w, a) in wr.iter().zip(&s.config.wings) {
            let rot = s.config.body.compose(a);
            sum += rot.apply(&(w.lift + w.drag));
        }
        assert!((get3(&f, 0) - sum).norm() <= 1e-13 * sum.norm());
        assert!(sum.norm() > 0.0);
    }

    #[test]
    fn dense_lu_agrees_with_cholesky() {
        let morph = default_dragonfly(InertiaMode::Rescaled);
        let aero = AeroModel::default();
        let model = Model::new(&morph, &aero);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let s = random_state(&mut rng);
            let tau = [Vec3::new(1e-6, 0.0, -2e-6); 4];
            let x = model.eom_rhs(&s, &tau).unwrap();
            let c = assemble_c(&s.config, &morph);
            let b = model.generalized_forces(&s, &tau) - coriolis(&s.config, &s.xi, &morph);
            let lu = c.lu().solve(&b).unwrap();
            assert!(rel(&x, &lu) < 1e-9, "{}", rel(&x, &lu));
            assert!((c * x - b).norm() <= 1e-10 * b.norm());
        }
    }

    #[test]
    fn potential_shift_is_linear_in_p() {
        let morph = default_dragonfly(InertiaMode::Rescaled);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let cfg = random_configuration(&mut rng);
        let dp = Vec3::new(0.3, -0.1, 0.7);
        let shifted = Configuration { p: cfg.p + dp, ..cfg };
        let du = potential_energy(&shifted, &morph) - potential_energy(&cfg, &morph);
        assert!((du + morph.total_mass() * morph.g * dp.z).abs() < 1e-18);
        assert_eq!(diagnostics(&SystemState::at_rest(cfg), &morph).kinetic, 0.0);
    }
}
