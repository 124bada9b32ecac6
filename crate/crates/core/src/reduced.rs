//! Body-only dynamics under prescribed wing motion.
//!
//! The wings follow their waveforms exactly. Eliminating the joint torques
//! from the 18 equations leaves six equations for `ξ_B = (ṗ, Ω_B)`; the
//! torques are then read back from the wing rows.

use nalgebra::{SMatrix, SVector};

use crate::aero::WingWrench;
use crate::dynamics::{
    aero_forces_from, assemble_c, assemble_n, assemble_s, coriolis, get3, gravity_forces, set3, Configuration,
    ForceConvention, LiftSigns, Mat18, Model, SystemState, TorqueInput, Vec18,
};
use crate::error::{Error, Result};
use crate::integrator::{rkmk4_step, LieState, Rates};
use crate::kinematics::{BodyPitch, WingKinematics};
use crate::morphology::Morphology;
use crate::so3::{hat, Mat3, Rotation, Vec3};

pub type Vec6 = SVector<f64, 6>;
pub type Mat6 = SMatrix<f64, 6, 6>;
type Projector = SMatrix<f64, 6, 18>;

/// Position, attitude and velocities of the main body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyState {
    pub p: Vec3,
    pub attitude: Rotation,
    /// Inertial velocity `ṗ`.
    pub v: Vec3,
    /// Body-frame angular velocity.
    pub omega: Vec3,
    pub t: f64,
}

impl BodyState {
    pub fn at_rest(p: Vec3) -> Self {
        Self { p, attitude: Rotation::identity(), v: Vec3::zeros(), omega: Vec3::zeros(), t: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.p.iter().chain(self.v.iter()).chain(self.omega.iter()).all(|x| x.is_finite())
            && self.attitude.matrix().iter().all(|x| x.is_finite())
    }
}

/// Rows that combine the 18 equations into the six body equations with the
/// joint torques eliminated.
fn projector(config: &Configuration, conv: ForceConvention) -> Projector {
    let mut p = Projector::zeros();
    p.fixed_view_mut::<6, 6>(0, 0).fill_with_identity();
    if conv == ForceConvention::Reaction {
        for k in 0..4 {
            p.fixed_view_mut::<3, 3>(3, 6 + 3 * k).copy_from(config.wings[k].matrix());
        }
    }
    p
}

/// Full model with the wing blocks slaved to prescribed kinematics.
#[derive(Debug, Clone, Copy)]
pub struct ReducedModel<'a> {
    pub model: Model<'a>,
    pub kinematics: &'a WingKinematics,
}

/// One evaluation of the reduced equations and everything derived from it.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub state: SystemState,
    /// `ξ̇` with the body block solved and the wing blocks prescribed.
    pub xi_dot: Vec18,
    pub c: Mat18,
    /// `D ξ`.
    pub d_xi: Vec18,
    pub aero: Vec18,
    pub gravity: Vec18,
    pub wrenches: [WingWrench; 4],
    pub convention: ForceConvention,
}

impl<'a> ReducedModel<'a> {
    pub fn new(model: Model<'a>, kinematics: &'a WingKinematics) -> Self {
        Self { model, kinematics }
    }

    /// Full state with the wings placed on their waveforms, plus the
    /// prescribed wing accelerations in the wing blocks of the second value.
    pub fn full_state(&self, body: &BodyState) -> (SystemState, Vec18) {
        let wings = self.kinematics.sample(body.t);
        let mut xi = Vec18::zeros();
        let mut xi_dot = Vec18::zeros();
        set3(&mut xi, 0, &body.v);
        set3(&mut xi, 1, &body.omega);
        for (k, w) in wings.iter().enumerate() {
            set3(&mut xi, 2 + k, &w.omega);
            set3(&mut xi_dot, 2 + k, &w.omega_dot);
        }
        let config = Configuration { p: body.p, body: body.attitude, wings: wings.map(|w| w.attitude) };
        (SystemState { config, xi, t: body.t }, xi_dot)
    }

    fn prepare(&self, body: &BodyState) -> (Evaluation, Projector) {
        let (state, xi_dot) = self.full_state(body);
        self.prepare_state(state, xi_dot)
    }

    fn prepare_state(&self, state: SystemState, xi_dot: Vec18) -> (Evaluation, Projector) {
        let morph = self.model.morph;
        let wrenches = self.model.wing_wrenches(&state);
        let conv = self.model.convention;
        let eval = Evaluation {
            c: assemble_c(&state.config, morph),
            d_xi: coriolis(&state.config, &state.xi, morph),
            aero: aero_forces_from(&state.config, &wrenches, morph, conv),
            gravity: gravity_forces(&state.config, morph),
            wrenches,
            convention: conv,
            state,
            xi_dot,
        };
        (eval, projector(&state.config, conv))
    }

    fn solve(&self, (mut eval, p): (Evaluation, Projector)) -> Result<Evaluation> {
        let pc = p * eval.c;
        let m6: Mat6 = pc.fixed_view::<6, 6>(0, 0).into_owned();
        let wing_acc = eval.xi_dot.fixed_rows::<12>(6).into_owned();
        let rhs: Vec6 = p * (eval.aero + eval.gravity - eval.d_xi) - pc.fixed_view::<6, 12>(0, 6) * wing_acc;
        if !(eval.state.is_finite() && rhs.iter().all(|x| x.is_finite())) {
            return Err(Error::NonFiniteState { t: eval.state.t });
        }
        let sol = m6.lu().solve(&rhs).ok_or(Error::SingularReducedMass)?;
        if !sol.iter().all(|x| x.is_finite()) {
            return Err(Error::SingularReducedMass);
        }
        eval.xi_dot.fixed_rows_mut::<6>(0).copy_from(&sol);
        Ok(eval)
    }

    /// Solves the body equations at an arbitrary full state, with only the
    /// wing accelerations taken from the waveforms. This is the torque law
    /// `τ = 𝐓(𝔤_B, ξ_B, 𝔤_w, ξ_w)` evaluated off the prescribed path.
    pub fn evaluate_state(&self, state: &SystemState) -> Result<Evaluation> {
        let mut xi_dot = Vec18::zeros();
        for (k, w) in self.kinematics.sample(state.t).iter().enumerate() {
            set3(&mut xi_dot, 2 + k, &w.omega_dot);
        }
        self.solve(self.prepare_state(*state, xi_dot))
    }

    /// Solves the six body equations for `ξ̇_B`.
    pub fn evaluate(&self, body: &BodyState) -> Result<Evaluation> {
        self.solve(self.prepare(body))
    }

    /// Evaluation with the body attitude and its rates prescribed; only the
    /// translational equation is solved.
    pub fn evaluate_prescribed(&self, t: f64, p: Vec3, v: Vec3, pitch: &BodyPitch) -> Evaluation {
        let s = pitch.sample(self.kinematics.period().recip(), t);
        let body = BodyState { p, attitude: s.attitude, v, omega: s.omega, t };
        let (mut eval, _) = self.prepare(&body);
        set3(&mut eval.xi_dot, 1, &s.omega_dot);
        // the translational row of C is m I on ṗ
        let m = self.model.morph.total_mass();
        let rest = eval.c.fixed_view::<3, 15>(0, 3) * eval.xi_dot.fixed_rows::<15>(3);
        let f = get3(&eval.aero, 0) + get3(&eval.gravity, 0) - get3(&eval.d_xi, 0) - rest;
        set3(&mut eval.xi_dot, 0, &(f / m));
        eval
    }

    /// One RKMK4 step of the free body, with the lift signs latched at the
    /// initial state.
    pub fn step(&self, body: &BodyState, dt: f64) -> Result<BodyState> {
        let signs = LiftSigns::at(&self.full_state(body).0, self.model.morph, self.model.aero);
        let rm = ReducedModel { model: self.model.latched(&signs), kinematics: self.kinematics };
        let y0 = LieState::<1, 6> {
            p: body.p,
            rots: [body.attitude],
            x: Vec6::new(body.v.x, body.v.y, body.v.z, body.omega.x, body.omega.y, body.omega.z),
        };
        let next = rkmk4_step(&y0, body.t, dt, |t, y| {
            let b = from_lie(y, t);
            let e = rm.evaluate(&b)?;
            Ok(Rates { p: b.v, omegas: [b.omega], x: e.xi_dot.fixed_rows::<6>(0).into_owned() })
        })?;
        let out = from_lie(&next, body.t + dt);
        if !out.is_finite() {
            return Err(Error::NonFiniteState { t: out.t });
        }
        Ok(out)
    }
}

fn from_lie(y: &LieState<1, 6>, t: f64) -> BodyState {
    BodyState {
        p: y.p,
        attitude: y.rots[0],
        v: y.x.fixed_rows::<3>(0).into_owned(),
        omega: y.x.fixed_rows::<3>(3).into_owned(),
        t,
    }
}

/// Split of the body loads into aerodynamic, body-motion and wing-motion
/// parts. Forces are inertial, torques are in the body frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ForceDecomposition {
    pub f_c: Vec3,
    pub f_b: Vec3,
    pub f_w: Vec3,
    pub gamma_c: Vec3,
    pub gamma_b: Vec3,
    pub gamma_w: Vec3,
    /// `‖m v̇ − (m g e₃ + F_c + F_B + F_w)‖ / max(1, m‖v̇‖)`.
    pub force_residual: f64,
    /// `‖J_BΩ̇_B + Ω_B × J_BΩ_B − (Γ_c + Γ_B + Γ_w)‖ / max(1, ‖J_BΩ̇_B‖)`.
    pub torque_residual: f64,
    /// Force residual relative to the largest term in the balance.
    pub force_residual_scaled: f64,
    /// Torque residual relative to the largest term in the balance.
    pub torque_residual_scaled: f64,
}

impl Evaluation {
    pub fn p_ddot(&self) -> Vec3 {
        get3(&self.xi_dot, 0)
    }

    pub fn omega_body_dot(&self) -> Vec3 {
        get3(&self.xi_dot, 1)
    }

    /// `C ξ̇ + D ξ − F_a − F_g`: what the joint torques have to supply.
    pub fn torque_demand(&self) -> Vec18 {
        self.c * self.xi_dot + self.d_xi - self.aero - self.gravity
    }

    /// Joint torques in the body frame, from the wing rows `Aᵢᵀτᵢ`.
    pub fn torques(&self) -> [Vec3; 4] {
        let z = self.torque_demand();
        std::array::from_fn(|k| self.state.config.wings[k].matrix() * get3(&z, 2 + k))
    }

    /// Inertial force decomposition. The body-motion terms are everything
    /// that survives with the wings at rest relative to the body; the rest of
    /// the inertial coupling is attributed to the wings. The whole gravity
    /// moment is carried by `Γ_B`.
    ///
    /// When the body attitude is prescribed the torque residual is the moment
    /// needed to enforce the prescription, not a closure error.
    pub fn decompose(&self, morph: &Morphology) -> ForceDecomposition {
        let cfg = &self.state.config;
        let p = projector(cfg, self.convention);
        let m = morph.total_mass();
        let vd = self.p_ddot();
        let w = get3(&self.state.xi, 1);
        let wd = self.omega_body_dot();
        let jb = morph.body_inertia;
        let own = Vec6::from_iterator((vd * m).iter().chain((jb * wd + w.cross(&(jb * w))).iter()).copied());

        let coupling = p * (self.c * self.xi_dot + self.d_xi) - own;
        let mut xi0 = self.state.xi;
        let mut xd0 = self.xi_dot;
        xi0.fixed_rows_mut::<12>(6).fill(0.0);
        xd0.fixed_rows_mut::<12>(6).fill(0.0);
        let body_only = p * (self.c * xd0 + coriolis(cfg, &xi0, morph)) - own;
        let wing_part = coupling - body_only;
        let pa = p * self.aero;
        let pg = p * self.gravity;

        let v3 = |x: &Vec6, o: usize| x.fixed_rows::<3>(o).into_owned();
        let f_c = v3(&pa, 0);
        let f_b = -v3(&body_only, 0);
        let f_w = -v3(&wing_part, 0);
        let gamma_c = v3(&pa, 3);
        let gamma_b = v3(&pg, 3) - v3(&body_only, 3);
        let gamma_w = -v3(&wing_part, 3);

        let gravity = Vec3::z() * (m * morph.g);
        let lhs_f = vd * m;
        let res_f = (lhs_f - (gravity + f_c + f_b + f_w)).norm();
        let lhs_t = jb * wd + w.cross(&(jb * w));
        let res_t = (lhs_t - (gamma_c + gamma_b + gamma_w)).norm();
        let scale_f = [lhs_f.norm(), gravity.norm(), f_c.norm(), f_b.norm(), f_w.norm()]
            .into_iter()
            .fold(f64::MIN_POSITIVE, f64::max);
        let scale_t = [(jb * wd).norm(), (w.cross(&(jb * w))).norm(), gamma_c.norm(), gamma_b.norm(), gamma_w.norm()]
            .into_iter()
            .fold(f64::MIN_POSITIVE, f64::max);
        ForceDecomposition {
            f_c,
            f_b,
            f_w,
            gamma_c,
            gamma_b,
            gamma_w,
            force_residual: res_f / lhs_f.norm().max(1.0),
            torque_residual: res_t / (jb * wd).norm().max(1.0),
            force_residual_scaled: res_f / scale_f,
            torque_residual_scaled: res_t / scale_t,
        }
    }
}

/// Closed-form `(F_B, F_w)` from the wing center-of-mass accelerations.
pub fn translational_inertial_forces(eval: &Evaluation, morph: &Morphology) -> (Vec3, Vec3) {
    let cfg = &eval.state.config;
    let r = cfg.body.matrix();
    let w = get3(&eval.state.xi, 1);
    let wd = eval.omega_body_dot();
    let wh = hat(&w);
    let mut f_b = Vec3::zeros();
    let mut f_w = Vec3::zeros();
    for (k, wing) in morph.wings.iter().enumerate() {
        let a = cfg.wings[k].matrix();
        let m = wing.mass;
        let rh = hat(&(wing.mu + a * wing.kappa));
        let kh = hat(&wing.kappa);
        let om = get3(&eval.state.xi, 2 + k);
        let omd = get3(&eval.xi_dot, 2 + k);
        f_b += r * (rh * wd + wh * rh * w) * m;
        f_w += r * (a * kh * omd + wh * a * kh * om * 2.0 + a * hat(&om) * kh * om) * m;
    }
    (f_b, f_w)
}

/// Relative mismatches between the expanded reduced-model matrices and the
/// block elimination they are supposed to restate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionCheck {
    /// `𝒞` built with the torque map as printed (sign of the fourth block
    /// flipped) against the block elimination.
    pub c_printed: f64,
    /// `𝒞` with a consistent torque map.
    pub c_consistent: f64,
    /// Residual of the eliminated equations written with block products.
    pub block_identity: f64,
    /// Residual of the equations with the expanded `𝒟` and `𝒱`.
    pub expansion: f64,
}

/// Compares the expanded reduced-model matrices against block elimination.
///
/// Everything here uses the `Reaction` bookkeeping, for which the torque map
/// `F̃_u1 = K F̃_u2` holds with `K = [0; −A₁ … −A₄]`.
pub fn expansion_check(eval: &Evaluation, morph: &Morphology) -> ExpansionCheck {
    let cfg = &eval.state.config;
    let xi = &eval.state.xi;
    let c = &eval.c;
    let s = assemble_s(xi);
    let n = assemble_n(cfg, xi, morph);
    let aero = aero_forces_from(cfg, &eval.wrenches, morph, ForceConvention::Reaction);
    let grav = &eval.gravity;

    let mut k_mat = SMatrix::<f64, 6, 12>::zeros();
    for j in 0..4 {
        k_mat.fixed_view_mut::<3, 3>(3, 3 * j).copy_from(&-cfg.wings[j].matrix());
    }
    let mut k_printed = k_mat;
    k_printed.fixed_view_mut::<3, 3>(3, 9).copy_from(cfg.wings[3].matrix());

    let c11: Mat6 = c.fixed_view::<6, 6>(0, 0).into_owned();
    let c12 = c.fixed_view::<6, 12>(0, 6).into_owned();
    let c21 = c.fixed_view::<12, 6>(6, 0).into_owned();
    let c22 = c.fixed_view::<12, 12>(6, 6).into_owned();
    let s11: Mat6 = s.fixed_view::<6, 6>(0, 0).into_owned();
    let s22 = s.fixed_view::<12, 12>(6, 6).into_owned();
    let n11: Mat6 = n.fixed_view::<6, 6>(0, 0).into_owned();
    let n12 = n.fixed_view::<6, 12>(0, 6).into_owned();
    let n21 = n.fixed_view::<12, 6>(6, 0).into_owned();
    let n22 = n.fixed_view::<12, 12>(6, 6).into_owned();
    let xb: Vec6 = xi.fixed_rows::<6>(0).into_owned();
    let xw = xi.fixed_rows::<12>(6).into_owned();
    let xdb: Vec6 = eval.xi_dot.fixed_rows::<6>(0).into_owned();
    let xdw = eval.xi_dot.fixed_rows::<12>(6).into_owned();
    let fa1: Vec6 = aero.fixed_rows::<6>(0).into_owned();
    let fa2 = aero.fixed_rows::<12>(6).into_owned();
    let fg1: Vec6 = grav.fixed_rows::<6>(0).into_owned();
    let fg2 = grav.fixed_rows::<12>(6).into_owned();

    let cc = c11 - k_mat * c21;
    let reference = {
        let mut p = Projector::zeros();
        p.fixed_view_mut::<6, 6>(0, 0).fill_with_identity();
        p.fixed_view_mut::<6, 12>(0, 6).copy_from(&-k_mat);
        (p * c).fixed_view::<6, 6>(0, 0).into_owned()
    };
    let rel_m = |a: &Mat6| (a - reference).norm() / reference.norm();
    let c_printed = rel_m(&(c11 - k_printed * c21));
    let c_consistent = rel_m(&cc);

    let lhs = cc * xdb;
    let f = fa1 - k_mat * fa2;
    let rhs_block = (k_mat * s22 * c21 - s11 * c11 + k_mat * n21 - n11) * xb
        + (k_mat * c22 - c12) * xdw
        + (k_mat * s22 * c22 - s11 * c12 + k_mat * n22 - n12) * xw
        + fg1
        - k_mat * fg2
        + f;

    // expanded form, sums transcribed as printed
    let r = cfg.body.matrix();
    let mut corr_a = Mat3::zeros();
    let mut corr_b = Mat3::zeros();
    let mut corr_c = Mat3::zeros();
    let mut sum_a = Mat3::zeros();
    for (i, wing) in morph.wings.iter().enumerate() {
        let a = cfg.wings[i].matrix();
        let om = get3(xi, 2 + i);
        let kh = hat(&wing.kappa);
        corr_a +=
            hat(&(wing.inertia * om)) * a.transpose() - hat(&(kh * om)) * a.transpose() * hat(&wing.mu) * wing.mass;
        corr_b += r * hat(&(a * kh * om)) * wing.mass;
        corr_c -= hat(&(wing.inertia * om));
        sum_a += a;
    }
    corr_a = sum_a * corr_a;
    let mut d_exp = k_mat * s22 * c21 - s11 * c11 + k_mat * n21 - n11;
    let lower = d_exp.fixed_view::<3, 3>(3, 0).into_owned() + corr_a + corr_b + corr_c;
    d_exp.fixed_view_mut::<3, 3>(3, 0).copy_from(&lower);
    let mut n_w = SMatrix::<f64, 6, 12>::zeros();
    for (i, wing) in morph.wings.iter().enumerate() {
        let a = cfg.wings[i].matrix();
        let om = get3(xi, 2 + i);
        n_w.fixed_view_mut::<3, 3>(0, 3 * i).copy_from(&(r * a * hat(&om) * hat(&wing.kappa) * wing.mass));
        n_w.fixed_view_mut::<3, 3>(3, 3 * i).copy_from(&n.fixed_view::<3, 3>(3, 6 + 3 * i));
    }
    let v_exp = (k_mat * c22 - c12) * xdw + (k_mat * s22 * c22 - n_w) * xw + fg1 - k_mat * fg2;
    let rhs_exp = d_exp * xb + v_exp + f;

    let scale = lhs.norm().max(f.norm()).max(f64::MIN_POSITIVE);
    ExpansionCheck {
        c_printed,
        c_consistent,
        block_identity: (lhs - rhs_block).norm() / scale,
        expansion: (lhs - rhs_exp).norm() / scale,
    }
}

/// Translational motion under a prescribed body pitch.
#[derive(Debug, Clone, Copy)]
pub struct PrescribedPitch<'a> {
    pub reduced: ReducedModel<'a>,
    pub pitch: BodyPitch,
}

/// Position and velocity at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TranslationState {
    pub t: f64,
    pub p: Vec3,
    pub v: Vec3,
}

impl<'a> PrescribedPitch<'a> {
    pub fn evaluate(&self, s: &TranslationState) -> Evaluation {
        self.reduced.evaluate_prescribed(s.t, s.p, s.v, &self.pitch)
    }

    fn full_state(&self, s: &TranslationState) -> SystemState {
        let ps = self.pitch.sample(self.reduced.kinematics.period().recip(), s.t);
        let body = BodyState { p: s.p, attitude: ps.attitude, v: s.v, omega: ps.omega, t: s.t };
        self.reduced.full_state(&body).0
    }

    /// One classical RK4 step of `(p, v)`, with the lift signs latched at
    /// the initial state.
    pub fn step(&self, s: &TranslationState, dt: f64) -> Result<TranslationState> {
        let model = self.reduced.model;
        let signs = LiftSigns::at(&self.full_state(s), model.morph, model.aero);
        let rm = ReducedModel { model: model.latched(&signs), kinematics: self.reduced.kinematics };
        let acc = |t: f64, p: Vec3, v: Vec3| rm.evaluate_prescribed(t, p, v, &self.pitch).p_ddot();
        let (t, p, v) = (s.t, s.p, s.v);
        let a1 = acc(t, p, v);
        let (p2, v2) = (p + v * (0.5 * dt), v + a1 * (0.5 * dt));
        let a2 = acc(t + 0.5 * dt, p2, v2);
        let (p3, v3) = (p + v2 * (0.5 * dt), v + a2 * (0.5 * dt));
        let a3 = acc(t + 0.5 * dt, p3, v3);
        let (p4, v4) = (p + v3 * dt, v + a3 * dt);
        let a4 = acc(t + dt, p4, v4);
        let next = TranslationState {
            t: t + dt,
            p: p + (v + v2 * 2.0 + v3 * 2.0 + v4) * (dt / 6.0),
            v: v + (a1 + a2 * 2.0 + a3 * 2.0 + a4) * (dt / 6.0),
        };
        if !(next.p.iter().chain(next.v.iter()).all(|x| x.is_finite())) {
            return Err(Error::NonFiniteState { t: next.t });
        }
        Ok(next)
    }

    /// Integrates for `steps` steps, calling `observe` on the initial state
    /// and after every step.
    pub fn simulate(
        &self,
        start: TranslationState,
        dt: f64,
        steps: usize,
        mut observe: impl FnMut(usize, &TranslationState),
    ) -> Result<TranslationState> {
        let mut s = start;
        observe(0, &s);
        for n in 1..=steps {
            s = self.step(&s, dt)?;
            observe(n, &s);
        }
        Ok(s)
    }
}

/// Joint torques recomputed from the current full state, so the wings of
/// the full model receive exactly the prescribed accelerations.
#[derive(Debug, Clone, Copy)]
pub struct RecoveredTorque<'a> {
    pub kinematics: &'a WingKinematics,
}

impl TorqueInput for RecoveredTorque<'_> {
    fn torques(&self, _t: f64, state: &SystemState, model: &Model<'_>) -> [Vec3; 4] {
        match ReducedModel::new(*model, self.kinematics).evaluate_state(state) {
            Ok(e) => e.torques(),
            Err(_) => [Vec3::repeat(f64::NAN); 4],
        }
    }
}

/// Joint torques sampled on a uniform grid, interpolated with cubic
/// Lagrange polynomials through the four nearest samples.
#[derive(Debug, Clone, PartialEq)]
pub struct TorqueSchedule {
    pub t0: f64,
    pub dt: f64,
    pub samples: Vec<[Vec3; 4]>,
}

impl TorqueSchedule {
    pub fn at(&self, t: f64) -> [Vec3; 4] {
        let n = self.samples.len();
        if n == 0 {
            return [Vec3::zeros(); 4];
        }
        if n < 4 {
            let i = (((t - self.t0) / self.dt).round().max(0.0) as usize).min(n - 1);
            return self.samples[i];
        }
        let x = (t - self.t0) / self.dt;
        let base = (x.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
        let u = x - base as f64;
        // Lagrange weights on nodes 0, 1, 2, 3
        let w = [
            -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0,
            u * (u - 2.0) * (u - 3.0) / 2.0,
            -u * (u - 1.0) * (u - 3.0) / 2.0,
            u * (u - 1.0) * (u - 2.0) / 6.0,
        ];
        std::array::from_fn(|k| (0..4).map(|j| self.samples[base + j][k] * w[j]).sum())
    }
}

impl TorqueInput for TorqueSchedule {
    fn torques(&self, t: f64, _state: &SystemState, _model: &Model<'_>) -> [Vec3; 4] {
        self.at(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aero::AeroModel;
    use crate::kinematics::{reference_hover, WingWaveform};
    use crate::morphology::{default_dragonfly, parallel_axis, InertiaMode};
    use crate::sampling::random_rotation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn frozen_kinematics() -> WingKinematics {
        let (kin, _) = reference_hover();
        WingKinematics::new(kin.waveforms.map(|w| WingWaveform { phi_m: 0.0, theta_m: 0.0, psi_m: 0.0, ..w }))
    }

    /// Newton–Euler equations of the composite body about the reference point.
    fn composite_oracle(morph: &Morphology, wings: &[Rotation; 4], body: &BodyState) -> Vec6 {
        let m = morph.total_mass();
        let mut first = Vec3::zeros();
        let mut j = morph.body_inertia;
        for (k, w) in morph.wings.iter().enumerate() {
            let a = wings[k].matrix();
            let r = w.mu + a * w.kappa;
            first += r * w.mass;
            let kh = hat(&w.kappa);
            let jcm = w.inertia + kh * kh * w.mass;
            j += a * jcm * a.transpose() + parallel_axis(w.mass, &r);
        }
        let c = first / m;
        let r = body.attitude.matrix();
        let w = body.omega;
        let g = Vec3::z() * morph.g;
        let mut lhs = Mat6::zeros();
        lhs.fixed_view_mut::<3, 3>(0, 0).copy_from(&(Mat3::identity() * m));
        lhs.fixed_view_mut::<3, 3>(0, 3).copy_from(&(-r * hat(&c) * m));
        lhs.fixed_view_mut::<3, 3>(3, 0).copy_from(&(hat(&c) * r.transpose() * m));
        lhs.fixed_view_mut::<3, 3>(3, 3).copy_from(&j);
        let f = g * m - r * w.cross(&w.cross(&c)) * m;
        let t = c.cross(&(r.transpose() * g)) * m - w.cross(&(j * w));
        let rhs = Vec6::from_iterator(f.iter().chain(t.iter()).copied());
        lhs.lu().solve(&rhs).unwrap()
    }

    #[test]
    fn frozen_wings_move_as_one_rigid_body() {
        let morph = default_dragonfly(InertiaMode::Rescaled);
        let aero = AeroModel::default().with_rho(0.0);
        let kin = frozen_kinematics();
        let rm = ReducedModel::new(Model::new(&morph, &aero), &kin);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let body = BodyState {
                p: Vec3::new(0.1, 0.2, 0.3),
                attitude: random_rotation(&mut rng),
                v: Vec3::new(1.0, -2.0, 0.5),
                omega: Vec3::new(20.0, -35.0, 10.0),
                t: 0.0,
            };
            let e = rm.evaluate(&body).unwrap();
            let got: Vec6 = e.xi_dot.fixed_rows::<6>(0).into_owned();
            let want = composite_oracle(&morph, &e.state.config.wings, &body);
            assert!((got - want).norm() <= 1e-10 * want.norm(), "{got} vs {want}");
        }
    }

    #[test]
    fn rest_without_flapping_falls_freely() {
        let morph = default_dragonfly(InertiaMode::Rescaled);
        let aero = AeroModel::default().with_rho(0.0);
        let kin = frozen_kinematics();
        let rm = ReducedModel::new(Model::new(&morph, &aero), &kin);
        let e = rm.evaluate(&BodyState::at_rest(Vec3::zeros())).unwrap();
        assert!((e.p_ddot() - Vec3::z() * morph.g).norm() < 1e-12);
        assert!(e.omega_body_dot().norm() < 1e-9);
    }

    #[test]
    fn torques_vanish_at_rest_without_gravity() {
        let mut morph = default_dragonfly(InertiaMode::Rescaled);
        morph.g = 0.0;
        let aero = AeroModel::default().with_rho(0.0);
        let kin = frozen_kinematics();
        let rm = ReducedModel::new(Model::new(&morph, &aero), &kin);
        let e = rm.evaluate(&BodyState::at_rest(Vec3::zeros())).unwrap();
        for t in e.torques() {
            assert_eq!(t, Vec3::zeros());
        }
    }

    #[test]
    fn torque_holds_a_static_wing_against_gravity() {
        let morph = default_dragonfly(InertiaMode::Rescaled);
        let aero = AeroModel::default().with_rho(0.0);
        let kin = frozen_kinematics();
        let rm = ReducedModel::new(Model::new(&morph, &aero), &kin);
        let body = BodyState::at_rest(Vec3::zeros());
        let e = rm.evaluate(&body).unwrap();
        // the body falls freely, so every wing is weightless relative to it
        for (k, tau) in e.torques().iter().enumerate() {
            let a = e.state.config.wings[k].matrix();
            let gravity_row = get3(&e.gravity, 2 + k);
            let inertial = get3(&(e.c * e.xi_dot), 2 + k);
            assert!((a.transpose() * tau - (inertial - gravity_row)).norm() < 1e-18);
            assert!(tau.norm() < 1e-12, "{tau}");
        }
    }

    #[test]
    fn motionless_decomposition_has_no_inertial_terms() {
        let morph = default_dragonfly(InertiaMode::Rescaled);
        let aero = AeroModel::default().with_rho(0.0);
        let kin = frozen_kinematics();
        let rm = ReducedModel::new(Model::new(&morph, &aero), &kin);
        let e = rm.evaluate_prescribed(0.0, Vec3::zeros(), Vec3::zeros(), &BodyPitch::default());
        let d = e.decompose(&morph);
        assert_eq!(d.f_c, Vec3::zeros());
        assert_eq!(d.gamma_c, Vec3::zeros());
        let tiny = 1e-14 * morph.total_mass() * morph.g;
        assert!(d.f_b.norm() < tiny && d.f_w.norm() < tiny, "{d:?}");
        assert!(d.force_residual < 1e-15);
    }

    #[test]
    fn decomposition_matches_center_of_mass_accelerations() {
        let morph = default_dragonfly(InertiaMode::Rescaled);
        let aero = AeroModel::default();
        let (kin, _) = reference_hover();
        let rm = ReducedModel::new(Model::new(&morph, &aero), &kin);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for i in 0..8 {
            let body = BodyState {
                p: Vec3::zeros(),
                attitude: random_rotation(&mut rng),
                v: Vec3::new(0.3, -0.2, 0.1),
                omega: Vec3::new(3.0, -5.0, 2.0),
                t: i as f64 * 3.1e-3,
            };
            let e = rm.evaluate(&body).unwrap();
            let d = e.decompose(&morph);
            let (f_b, f_w) = translational_inertial_forces(&e, &morph);
            assert!((d.f_b - f_b).norm() <= 1e-9 * f_b.norm().max(1e-12), "{} {}", d.f_b, f_b);
            assert!((d.f_w - f_w).norm() <= 1e-9 * f_w.norm(), "{} {}", d.f_w, f_w);
            assert!(d.force_residual_scaled < 1e-9 && d.torque_residual_scaled < 1e-8);
        }
    }

    #[test]
    fn expanded_matrices_against_block_elimination() {
        let morph = default_dragonfly(InertiaMode::Rescaled);
        let aero = AeroModel::default();
        let (kin, _) = reference_hover();
        let mut model = Model::new(&morph, &aero);
        model.convention = ForceConvention::Reaction;
        let rm = ReducedModel::new(model, &kin);
        let body = BodyState { omega: Vec3::new(1.0, 2.0, -1.0), t: 4e-3, ..BodyState::at_rest(Vec3::zeros()) };
        let e = rm.evaluate(&body).unwrap();
        let x = expansion_check(&e, &morph);
        assert!(x.c_consistent < 1e-14, "{x:?}");
        assert!(x.c_printed > 1e-5, "{x:?}");
        assert!(x.block_identity < 1e-10, "{x:?}");
    }

    #[test]
    fn frozen_pitch_keeps_attitude() {
        let morph = default_dragonfly(InertiaMode::Rescaled);
        let aero = AeroModel::default();
        let (kin, pitch) = reference_hover();
        let rm = ReducedModel::new(Model::new(&morph, &aero), &kin);
        let frozen = BodyPitch { amplitude: 0.0, ..pitch };
        for t in [0.0, 1e-3, 7e-3] {
            let e = rm.evaluate_prescribed(t, Vec3::zeros(), Vec3::zeros(), &frozen);
            assert_eq!(e.state.config.body, crate::so3::axis_rotation(1, pitch.offset));
            assert_eq!(e.state.omega_body(), Vec3::zeros());
        }
    }

    #[test]
    fn ballistic_without_air_or_flapping() {
        let morph = default_dragonfly(InertiaMode::Rescaled);
        let aero = AeroModel::default().with_rho(0.0);
        let kin = frozen_kinematics();
        let sim = PrescribedPitch {
            reduced: ReducedModel::new(Model::new(&morph, &aero), &kin),
            pitch: BodyPitch::default(),
        };
        let p0 = Vec3::new(0.0, 0.0, 2.0);
        let v0 = Vec3::new(0.5, 0.0, -1.0);
        let end = sim.simulate(TranslationState { t: 0.0, p: p0, v: v0 }, 1e-3, 100, |_, _| {}).unwrap();
        let t = end.t;
        let want = p0 + v0 * t + Vec3::z() * (0.5 * morph.g * t * t);
        assert!((end.p - want).norm() < 1e-12, "{}", (end.p - want).norm());
    }

    #[test]
    fn cubic_schedule_reproduces_cubics() {
        let f = |t: f64| 1.0 + 2.0 * t - 3.0 * t * t + 0.5 * t * t * t;
        let samples = (0..20).map(|i| [Vec3::new(f(0.1 * i as f64), 0.0, 0.0); 4]).collect();
        let s = TorqueSchedule { t0: 0.0, dt: 0.1, samples };
        for t in [0.0, 0.05, 0.333, 1.0, 1.87, 1.9] {
            assert!((s.at(t)[2].x - f(t)).abs() < 1e-12, "{t}");
        }
    }
}
