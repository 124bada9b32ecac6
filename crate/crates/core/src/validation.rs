//! Numerical oracle battery: conservation laws, finite-difference checks of
//! the analytic derivatives, identities between the full and reduced models,
//! and a convex sanity problem for the optimizer.
//!
//! Every check is deterministic given the seed and is independent of the
//! others, so [`run_with`] evaluates them concurrently and reports them in a
//! fixed order.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::aero::{AeroModel, WingFlow};
use crate::config::Scenario;
use crate::dynamics::{
    assemble_c, diagnostics, get3, potential_energy, set3, step, wing_wrenches, Configuration, ForceConvention, Model,
    SystemState, Vec18, ZeroTorque,
};
use crate::error::Result;
use crate::morphology::Morphology;
use crate::optimize::{ga_optimize, CostAccumulator, GaConfig, ParameterSpace};
use crate::reduced::{expansion_check, BodyState, PrescribedPitch, RecoveredTorque, ReducedModel, TranslationState};
use crate::sampling::{flow_configuration, random_state, random_vec};
use crate::so3::{exp_vec, hat, Mat3, Vec3};
use crate::wing_geometry::Side;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    /// Worth reading but not a failure.
    Warn,
    Fail,
    /// Reported for information only, never gated.
    Info,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Warn => "WARN",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
        }
    }
}

/// Outcome of one check.
#[derive(Debug, Clone)]
pub struct Check {
    pub id: &'static str,
    pub name: &'static str,
    pub measured: f64,
    /// `NaN` for checks without a threshold.
    pub threshold: f64,
    pub status: Status,
    pub detail: String,
    pub runtime: Duration,
}

impl Check {
    fn new(
        id: &'static str,
        name: &'static str,
        measured: f64,
        threshold: f64,
        status: Status,
        detail: String,
    ) -> Self {
        Self { id, name, measured, threshold, status, detail, runtime: Duration::ZERO }
    }

    fn gate(id: &'static str, name: &'static str, measured: f64, threshold: f64, ok: bool, detail: String) -> Self {
        let status = if ok { Status::Pass } else { Status::Fail };
        Self::new(id, name, measured, threshold, status, detail)
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    /// No check failed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn get(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn to_text(&self) -> String {
        let w = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let mut out = String::new();
        let _ =
            writeln!(out, "{:<w$}  status  {:>12}  {:>12}  {:>9}  detail", "check", "measured", "threshold", "runtime");
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{:<w$}  {:<6}  {:>12.4e}  {:>12.4e}  {:>8.2}s  {}",
                c.name,
                c.status.label(),
                c.measured,
                c.threshold,
                c.runtime.as_secs_f64(),
                c.detail
            );
        }
        let failed = self.checks.iter().filter(|c| c.status == Status::Fail).count();
        let _ = writeln!(out, "{} checks, {} failed, seed {}", self.checks.len(), failed, self.seed);
        out
    }

    /// CSV form. Runtimes are left out so reruns are byte-identical; the
    /// text form has them.
    pub fn to_csv(&self) -> String {
        // measured values carry the unit of their check, named in the detail
        let mut out = String::from("id [-],name [-],status [-],measured [check],threshold [check],detail [-]\n");
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{},{},{},{:.16e},{:.16e},\"{}\"",
                c.id,
                c.name,
                c.status.label(),
                c.measured,
                c.threshold,
                c.detail.replace('"', "\"\"")
            );
        }
        out
    }
}

/// Problem sizes. [`Sizes::default`] is the full battery, [`Sizes::quick`]
/// a cut-down version for smoke tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sizes {
    pub energy_duration: f64,
    pub energy_dt: f64,
    pub free_fall_steps: usize,
    pub momentum_duration: f64,
    pub momentum_dt: f64,
    pub mass_matrix_samples: usize,
    pub kinematics_samples: usize,
    /// Base step of the time finite differences, s.
    pub fd_step: f64,
    pub quadrature_states: usize,
    pub equivalence_periods: f64,
    pub equivalence_dt: f64,
    pub closure_periods: f64,
    pub ordering_periods: f64,
    pub ga_population: usize,
    pub ga_generations: usize,
    pub hover_periods: f64,
    pub velocity_states: usize,
    pub variational_states: usize,
    pub variational_step: f64,
}

impl Default for Sizes {
    fn default() -> Self {
        Self {
            energy_duration: 0.1,
            energy_dt: 1e-6,
            free_fall_steps: 10_000,
            momentum_duration: 0.05,
            momentum_dt: 1e-6,
            mass_matrix_samples: 1000,
            kinematics_samples: 64,
            fd_step: 1e-6,
            quadrature_states: 20,
            equivalence_periods: 1.0,
            equivalence_dt: 1e-6,
            closure_periods: 10.0,
            ordering_periods: 10.0,
            ga_population: 50,
            ga_generations: 200,
            hover_periods: 10.0,
            velocity_states: 32,
            variational_states: 16,
            variational_step: 1e-5,
        }
    }
}

impl Sizes {
    pub fn quick() -> Self {
        Self {
            energy_duration: 2e-3,
            free_fall_steps: 500,
            momentum_duration: 2e-3,
            mass_matrix_samples: 100,
            quadrature_states: 5,
            equivalence_periods: 0.05,
            closure_periods: 0.5,
            ordering_periods: 1.0,
            hover_periods: 1.0,
            velocity_states: 8,
            variational_states: 4,
            ..Self::default()
        }
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn or_fail(id: &'static str, name: &'static str, threshold: f64, r: Result<Check>) -> Check {
    r.unwrap_or_else(|e| Check::new(id, name, f64::NAN, threshold, Status::Fail, e.to_string()))
}

/// Order estimate from errors at `h` and `h / 2`.
fn order(e_h: f64, e_half: f64) -> f64 {
    (e_h / e_half).log2()
}

fn in_order_band(p: f64) -> bool {
    (1.9..=2.1).contains(&p)
}

/// Kinetic energy summed body by body from the inertial velocities of the
/// body and of each wing's center of mass.
pub fn kinetic_energy_direct(config: &Configuration, xi: &Vec18, morph: &Morphology) -> f64 {
    let r = config.body.matrix();
    let v = get3(xi, 0);
    let w = get3(xi, 1);
    let mut t = 0.5 * morph.body_mass * v.norm_squared() + 0.5 * w.dot(&(morph.body_inertia * w));
    for (k, wing) in morph.wings.iter().enumerate() {
        let a = config.wings[k].matrix();
        let om = get3(xi, 2 + k);
        let arm = wing.mu + a * wing.kappa;
        let vc = v + r * (w.cross(&arm) + a * om.cross(&wing.kappa));
        let omega = a.transpose() * w + om;
        let kh = hat(&wing.kappa);
        let j_cm = wing.inertia + kh * kh * wing.mass;
        t += 0.5 * wing.mass * vc.norm_squared() + 0.5 * omega.dot(&(j_cm * omega));
    }
    t
}

fn inf_norm(m: &crate::dynamics::Mat18) -> f64 {
    m.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

fn vacuum(s: &Scenario) -> AeroModel {
    s.aero.with_rho(0.0)
}

/// Configuration with the wings on their waveforms at `t = 0`.
fn start_configuration(s: &Scenario) -> Configuration {
    let b = s.initial_body();
    Configuration { p: b.p, body: b.attitude, wings: s.kinematics.sample(0.0).map(|w| w.attitude) }
}

pub fn mass_ratio(s: &Scenario) -> Check {
    let ratio = 100.0 * s.morph.wings[0].mass / s.morph.body_mass;
    let shown = format!("{ratio:.2}");
    Check::gate(
        "mass_ratio",
        "fore-wing to body mass ratio",
        ratio,
        3.5,
        shown == "3.50",
        format!("m1/m_B = {ratio:.4}% (shown as {shown}%)"),
    )
}

pub fn energy_conservation(s: &Scenario, seed: u64, z: &Sizes) -> Check {
    const ID: &str = "energy";
    const NAME: &str = "energy conservation in vacuum";
    let run = || -> Result<Check> {
        let aero = vacuum(s);
        let model = Model::new(&s.morph, &aero).with_convention(s.convention);
        let mut rng = rng_for(seed, 1);
        let mut xi = Vec18::zeros();
        set3(&mut xi, 0, &random_vec(&mut rng, 0.1));
        set3(&mut xi, 1, &random_vec(&mut rng, 1.0));
        for k in 0..4 {
            set3(&mut xi, 2 + k, &random_vec(&mut rng, 10.0));
        }
        let mut state = SystemState { config: start_configuration(s), xi, t: 0.0 };
        let d0 = diagnostics(&state, &s.morph);
        let steps = (z.energy_duration / z.energy_dt).round() as usize;
        let mut worst: f64 = 0.0;
        for _ in 0..steps {
            state = step(&model, &ZeroTorque, &state, z.energy_dt)?;
            worst = worst.max((diagnostics(&state, &s.morph).total - d0.total).abs());
        }
        // potential measured from the start, so E₀ is the initial kinetic energy
        let rel = worst / d0.kinetic;
        Ok(Check::gate(
            ID,
            NAME,
            rel,
            1e-6,
            rel < 1e-6,
            format!(
                "max |ΔE| / E0 over {} s at dt = {:e} s, E0 = {:.4e} J",
                z.energy_duration, z.energy_dt, d0.kinetic
            ),
        ))
    };
    or_fail(ID, NAME, 1e-6, run())
}

pub fn free_fall(s: &Scenario, z: &Sizes) -> Check {
    const ID: &str = "free_fall";
    const NAME: &str = "uniform-gravity free fall";
    let run = || -> Result<Check> {
        let aero = vacuum(s);
        let model = Model::new(&s.morph, &aero).with_convention(s.convention);
        let dt = s.integrator.dt;
        let g = Vec3::z() * s.morph.g;
        let zero = [Vec3::zeros(); 4];
        let mut state = SystemState::at_rest(start_configuration(s));
        let (mut dv, mut dw): (f64, f64) = (0.0, 0.0);
        for n in 0..=z.free_fall_steps {
            let xd = model.eom_rhs(&state, &zero)?;
            dv = dv.max((get3(&xd, 0) - g).norm());
            for b in 1..6 {
                dw = dw.max(get3(&xd, b).norm());
            }
            if n < z.free_fall_steps {
                state = step(&model, &ZeroTorque, &state, dt)?;
            }
        }
        let worst = dv.max(dw);
        Ok(Check::gate(
            ID,
            NAME,
            worst,
            1e-9,
            dv < 1e-9 && dw < 1e-9,
            format!("max |v̇ − g e3| = {dv:.3e} m/s², max |Ω̇| = {dw:.3e} rad/s² over {} steps", z.free_fall_steps),
        ))
    };
    or_fail(ID, NAME, 1e-9, run())
}

pub fn momentum_conservation(s: &Scenario, seed: u64, z: &Sizes) -> Check {
    const ID: &str = "momentum";
    const NAME: &str = "linear momentum without gravity";
    let run = || -> Result<Check> {
        let aero = vacuum(s);
        let morph = Morphology { g: 0.0, ..s.morph.clone() };
        let model = Model::new(&morph, &aero).with_convention(s.convention);
        let mut state = random_state(&mut rng_for(seed, 2));
        let p0 = diagnostics(&state, &morph).momentum;
        let steps = (z.momentum_duration / z.momentum_dt).round() as usize;
        let mut worst: f64 = 0.0;
        for _ in 0..steps {
            state = step(&model, &ZeroTorque, &state, z.momentum_dt)?;
            worst = worst.max((diagnostics(&state, &morph).momentum - p0).norm());
        }
        let rel = worst / p0.norm();
        Ok(Check::gate(
            ID,
            NAME,
            rel,
            1e-8,
            rel < 1e-8,
            format!("max |ΔP| / |P0| over {} s at dt = {:e} s", z.momentum_duration, z.momentum_dt),
        ))
    };
    or_fail(ID, NAME, 1e-8, run())
}

pub fn mass_matrix(s: &Scenario, seed: u64, z: &Sizes) -> Check {
    let mut rng = rng_for(seed, 3);
    let states: Vec<SystemState> = (0..z.mass_matrix_samples).map(|_| random_state(&mut rng)).collect();
    let stats: Vec<(f64, f64, f64)> = states
        .par_iter()
        .map(|st| {
            let c = assemble_c(&st.config, &s.morph);
            let asym = inf_norm(&(c - c.transpose())) / inf_norm(&c);
            let eig = c.symmetric_eigenvalues();
            let min_eig = eig.min() / eig.max();
            let t = kinetic_energy_direct(&st.config, &st.xi, &s.morph);
            let quad = 0.5 * st.xi.dot(&(c * st.xi));
            (asym, min_eig, (t - quad).abs() / t)
        })
        .collect();
    let asym = stats.iter().map(|x| x.0).fold(0.0, f64::max);
    let min_eig = stats.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    let energy = stats.iter().map(|x| x.2).fold(0.0, f64::max);
    Check::gate(
        "mass_matrix",
        "mass matrix symmetry, definiteness, energy",
        energy,
        1e-12,
        asym <= 1e-12 && min_eig > 0.0 && energy < 1e-12,
        format!(
            "{} states: max |T − ½ξᵀCξ|/T = {energy:.3e}, max ‖C−Cᵀ‖∞/‖C‖∞ = {asym:.3e}, min λ/λmax = {min_eig:.3e}",
            z.mass_matrix_samples
        ),
    )
}

pub fn kinematics_order(s: &Scenario, z: &Sizes) -> Check {
    let period = s.kinematics.period();
    let n = z.kinematics_samples;
    let errors = |h: f64| -> (f64, f64) {
        let (mut ea, mut ew) = (0.0, 0.0);
        for j in 0..n {
            // offset so that no sample lands on a symmetry point
            let t = (j as f64 + 0.37) * period / n as f64;
            for (i, w) in s.kinematics.waveforms.iter().enumerate() {
                let side = Side::of_wing(i);
                let a = w.attitude(side, t);
                let da = (w.attitude(side, t + h).matrix() - w.attitude(side, t - h).matrix()) / (2.0 * h);
                ea += (hat(&w.angular_velocity(side, t)) - a.matrix().transpose() * da).norm();
                let dw = (w.angular_velocity(side, t + h) - w.angular_velocity(side, t - h)) / (2.0 * h);
                ew += (w.angular_acceleration(side, t) - dw).norm();
            }
        }
        (ea, ew)
    };
    let h = z.fd_step;
    let (a1, w1) = errors(h);
    let (a2, w2) = errors(h / 2.0);
    let (pa, pw) = (order(a1, a2), order(w1, w2));
    let worst = if (pa - 2.0).abs() > (pw - 2.0).abs() { pa } else { pw };
    Check::gate(
        "kinematics",
        "wing-rate finite-difference order",
        worst,
        2.0,
        in_order_band(pa) && in_order_band(pw),
        format!("order {pa:.4} for the attitude, {pw:.4} for the rate, {n} times, h = {h:e} s"),
    )
}

pub fn quadrature(s: &Scenario, z: &Sizes) -> Check {
    let coarse = s.aero.with_stations(200);
    let fine = s.aero.with_stations(400);
    let rm = ReducedModel::new(s.model(), &s.kinematics);
    let period = s.kinematics.period();
    let n = z.quadrature_states;
    let mut worst: f64 = 0.0;
    for j in 0..n {
        let body = BodyState { t: j as f64 * period / n as f64, ..s.initial_body() };
        let (state, _) = rm.full_state(&body);
        let a = wing_wrenches(&state, &s.morph, &coarse);
        let b = wing_wrenches(&state, &s.morph, &fine);
        let rel = |f: &dyn Fn(&crate::aero::WingWrench) -> Vec3| {
            let diff: f64 = (0..4).map(|k| (f(&a[k]) - f(&b[k])).norm_squared()).sum();
            let base: f64 = (0..4).map(|k| f(&b[k]).norm_squared()).sum();
            (diff / base).sqrt()
        };
        worst = worst.max(rel(&|w| w.force())).max(rel(&|w| w.moment));
    }
    Check::gate(
        "quadrature",
        "spanwise quadrature 200 vs 400 stations",
        worst,
        1e-3,
        worst < 1e-3,
        format!("largest relative change of the wing forces and moments over {n} states"),
    )
}

fn inf_norm3(m: &Mat3) -> f64 {
    m.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn reduced_full_equivalence(s: &Scenario, z: &Sizes) -> Check {
    const ID: &str = "equivalence";
    const NAME: &str = "reduced and full model agree";
    let run = || -> Result<Check> {
        let model = s.model();
        let rm = ReducedModel::new(model, &s.kinematics);
        let dt = z.equivalence_dt;
        let steps = (z.equivalence_periods * s.kinematics.period() / dt).round() as usize;
        let torque = RecoveredTorque { kinematics: &s.kinematics };
        let mut body = s.initial_body();
        let mut full = rm.full_state(&body).0;
        let (mut dp, mut da): (f64, f64) = (0.0, 0.0);
        for _ in 0..steps {
            body = rm.step(&body, dt)?;
            full = step(&model, &torque, &full, dt)?;
            dp = dp.max((full.config.p - body.p).norm() / body.p.norm().max(f64::MIN_POSITIVE));
            da = da.max(inf_norm3(&(full.config.body.matrix() - body.attitude.matrix())));
        }
        Ok(Check::gate(
            ID,
            NAME,
            dp.max(da),
            1e-6,
            dp < 1e-6 && da < 1e-6,
            format!("{steps} steps at dt = {dt:e} s: max |Δp|/|p| = {dp:.3e}, max ‖ΔA_B‖∞ = {da:.3e}"),
        ))
    };
    or_fail(ID, NAME, 1e-6, run())
}

pub fn decomposition_closure(s: &Scenario, z: &Sizes) -> Check {
    const ID: &str = "closure";
    const NAME: &str = "force decomposition closure";
    let run = || -> Result<Check> {
        let rm = ReducedModel::new(s.model(), &s.kinematics);
        let dt = s.integrator.dt;
        let steps = (z.closure_periods * s.kinematics.period() / dt).round() as usize;
        let mut body = s.initial_body();
        let (mut rf, mut rt, mut sf, mut st): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
        for n in 0..=steps {
            let d = rm.evaluate(&body)?.decompose(&s.morph);
            rf = rf.max(d.force_residual);
            rt = rt.max(d.torque_residual);
            sf = sf.max(d.force_residual_scaled);
            st = st.max(d.torque_residual_scaled);
            if n < steps {
                body = rm.step(&body, dt)?;
            }
        }
        Ok(Check::gate(
            ID,
            NAME,
            rf.max(rt),
            1e-8,
            rf <= 1e-8 && rt <= 1e-8,
            format!("force {rf:.3e}, torque {rt:.3e}; relative to the largest term: {sf:.3e}, {st:.3e}"),
        ))
    };
    or_fail(ID, NAME, 1e-8, run())
}

fn prescribed_start(s: &Scenario) -> TranslationState {
    TranslationState { t: 0.0, p: Vec3::from(s.initial.p), v: Vec3::from(s.initial.v) }
}

pub fn inertial_ordering(s: &Scenario, z: &Sizes) -> Check {
    const ID: &str = "ordering";
    const NAME: &str = "body vs wing inertial forces";
    let run = || -> Result<Check> {
        let sim = PrescribedPitch { reduced: ReducedModel::new(s.model(), &s.kinematics), pitch: s.pitch };
        let dt = s.integrator.dt;
        let steps = (z.ordering_periods * s.kinematics.period() / dt).round() as usize;
        let (mut fb, mut fw) = (0.0, 0.0);
        sim.simulate(prescribed_start(s), dt, steps, |_, st| {
            let d = sim.evaluate(st).decompose(&s.morph);
            fb += d.f_b.norm();
            fw += d.f_w.norm();
        })?;
        let ratio = fb / fw;
        Ok(Check::gate(
            ID,
            NAME,
            ratio,
            0.2,
            ratio < 0.2,
            format!("mean |F_B| / mean |F_w| = {ratio:.4} over {} periods with prescribed pitch", z.ordering_periods),
        ))
    };
    or_fail(ID, NAME, 0.2, run())
}

pub fn ga_sanity(s: &Scenario, seed: u64, z: &Sizes) -> Check {
    const ID: &str = "ga";
    const NAME: &str = "optimizer on a convex bowl";
    let run = || -> Result<Check> {
        let space = ParameterSpace::new(s.optimization.paired);
        let mut rng = rng_for(seed, 4);
        let target: Vec<f64> = (0..space.dim())
            .map(|i| space.lower[i] + rng.random_range(0.2..0.8) * (space.upper[i] - space.lower[i]))
            .collect();
        let scaled = |x: &[f64], i: usize| (x[i] - target[i]) / (space.upper[i] - space.lower[i]);
        let cost = |x: &[f64]| (0..x.len()).map(|i| scaled(x, i).powi(2)).sum::<f64>();
        let cfg = GaConfig {
            population: z.ga_population,
            generations: z.ga_generations,
            seed,
            workers: s.optimization.workers,
            ..GaConfig::default()
        };
        let a = ga_optimize(&cfg, &space, None, cost)?;
        let b = ga_optimize(&cfg, &space, None, cost)?;
        let same = a.history == b.history && a.best == b.best;
        let ratio = a.best_cost / a.history[0].best;
        let dev = (0..space.dim()).map(|i| scaled(&a.best, i).abs()).fold(0.0, f64::max);
        Ok(Check::gate(
            ID,
            NAME,
            ratio,
            1e-3,
            ratio < 1e-3 && same,
            format!(
                "best/initial = {ratio:.3e} after {} generations, largest normalized offset {dev:.2e}, repeat run {}",
                z.ga_generations,
                if same { "identical" } else { "differs" }
            ),
        ))
    };
    or_fail(ID, NAME, 1e-3, run())
}

pub fn hover_diagnostic(s: &Scenario, z: &Sizes) -> Check {
    const ID: &str = "hover";
    const NAME: &str = "hover diagnostic";
    let run = || -> Result<Check> {
        let sim = PrescribedPitch { reduced: ReducedModel::new(s.model(), &s.kinematics), pitch: s.pitch };
        let dt = s.integrator.dt;
        let steps = (z.hover_periods * s.kinematics.period() / dt).round() as usize;
        let z0 = s.initial.p[2];
        let ga = &s.optimization;
        let mut cost = CostAccumulator::new(ga.w1, ga.w2, Vec3::from(s.initial.p));
        let mut excursion: f64 = 0.0;
        let end = sim.simulate(prescribed_start(s), dt, steps, |_, st| {
            excursion = excursion.max((st.p.z - z0).abs());
            cost.push(st.t, &st.p, &st.v);
        })?;
        let j = cost.total();
        Ok(Check::new(
            ID,
            NAME,
            excursion,
            f64::NAN,
            Status::Info,
            format!(
                "max altitude excursion {excursion:.4e} m over {} periods, final p = ({:.3e}, {:.3e}, {:.4}) m, hover cost {j:.4e}",
                z.hover_periods, end.p.x, end.p.y, end.p.z
            ),
        ))
    };
    or_fail(ID, NAME, f64::NAN, run())
}

pub fn chord_velocity(s: &Scenario, seed: u64, z: &Sizes) -> Check {
    let mut rng = rng_for(seed, 5);
    let states: Vec<SystemState> = (0..z.velocity_states).map(|_| random_state(&mut rng)).collect();
    let errors = |h: f64| -> (f64, f64) {
        let (mut err, mut base) = (0.0, 0.0);
        for st in &states {
            let plus = flow_configuration(&st.config, &st.xi, h);
            let minus = flow_configuration(&st.config, &st.xi, -h);
            let r = st.config.body.matrix();
            for (k, wing) in s.morph.wings.iter().enumerate() {
                let a = st.config.wings[k].matrix();
                let flow = WingFlow::new(&wing.shape, r, a, &st.p_dot(), &st.omega_body(), &st.omega_wing(k), &wing.mu);
                let span = wing.shape.span_length();
                for rr in [0.2, 0.6, 0.95] {
                    for gamma in [0.0, 0.5, 1.0] {
                        let nu = wing.shape.chord_point(rr * span, gamma).expect("inside the span");
                        // position relative to the unperturbed body origin
                        let pos = |c: &Configuration| {
                            c.p - st.config.p + c.body.matrix() * (wing.mu + c.wings[k].matrix() * nu)
                        };
                        let fd = (pos(&plus) - pos(&minus)) / (2.0 * h);
                        let w = flow.chord_point_velocity(rr * span, gamma).expect("inside the span");
                        err += (w - a.transpose() * r.transpose() * fd).norm();
                        base += w.norm();
                    }
                }
            }
        }
        (err, base)
    };
    let h = z.fd_step;
    let (e1, base) = errors(h);
    let (e2, _) = errors(h / 2.0);
    let p = order(e1, e2);
    Check::gate(
        "chord_velocity",
        "chord-point velocity finite-difference order",
        p,
        2.0,
        in_order_band(p),
        format!("{} states, mean relative error {:.3e} at h = {h:e} s", z.velocity_states, e1 / base),
    )
}

fn lagrangian(c: &Configuration, xi: &Vec18, morph: &Morphology) -> f64 {
    kinetic_energy_direct(c, xi, morph) - potential_energy(c, morph)
}

/// `∂L/∂ξ` by central differences, exact for a quadratic kinetic energy.
fn momenta(c: &Configuration, xi: &Vec18, morph: &Morphology) -> Vec18 {
    Vec18::from_fn(|j, _| {
        let mut a = *xi;
        let mut b = *xi;
        a[j] += 1.0;
        b[j] -= 1.0;
        (lagrangian(c, &a, morph) - lagrangian(c, &b, morph)) / 2.0
    })
}

/// Left-trivialized configuration gradient of `L`: translations for the
/// first block, `A ↦ A exp(ε ê)` for the five attitudes.
fn configuration_gradient(c: &Configuration, xi: &Vec18, morph: &Morphology) -> Vec18 {
    const EPS: f64 = 1e-3;
    let moved = |j: usize, e: f64| -> Configuration {
        let mut out = *c;
        let (b, axis) = (j / 3, j % 3);
        let mut d = Vec3::zeros();
        d[axis] = e;
        match b {
            0 => out.p += d,
            1 => out.body = c.body.compose(&exp_vec(&d)),
            _ => out.wings[b - 2] = c.wings[b - 2].compose(&exp_vec(&d)),
        }
        out
    };
    Vec18::from_fn(|j, _| {
        let f = |e: f64| lagrangian(&moved(j, e), xi, morph);
        (-f(2.0 * EPS) + 8.0 * f(EPS) - 8.0 * f(-EPS) + f(-2.0 * EPS)) / (12.0 * EPS)
    })
}

/// Residual of `d/dt ∂L/∂ξ + S(ξ) ∂L/∂ξ − ∂L/∂𝔤` along a trajectory of the
/// free, unforced system, with the time derivative taken by central
/// differences of step `h`.
fn variational_residual(model: &Model<'_>, st: &SystemState, h: f64) -> Result<Vec18> {
    let morph = model.morph;
    let fwd = step(model, &ZeroTorque, st, h)?;
    let bwd = step(model, &ZeroTorque, st, -h)?;
    let dpi = (momenta(&fwd.config, &fwd.xi, morph) - momenta(&bwd.config, &bwd.xi, morph)) / (2.0 * h);
    let pi = momenta(&st.config, &st.xi, morph);
    let mut r = dpi - configuration_gradient(&st.config, &st.xi, morph);
    for b in 1..6 {
        let turn = get3(&st.xi, b).cross(&get3(&pi, b));
        let sum = get3(&r, b) + turn;
        set3(&mut r, b, &sum);
    }
    Ok(r)
}

pub fn variational_residual_order(s: &Scenario, seed: u64, z: &Sizes) -> Check {
    const ID: &str = "variational";
    const NAME: &str = "Euler-Lagrange residual order";
    let run = || -> Result<Check> {
        let aero = vacuum(s);
        let model = Model::new(&s.morph, &aero).with_convention(s.convention);
        let mut rng = rng_for(seed, 6);
        let h = z.variational_step;
        let (mut e1, mut e2, mut base) = (0.0, 0.0, 0.0);
        for _ in 0..z.variational_states {
            let st = random_state(&mut rng);
            e1 += variational_residual(&model, &st, h)?.norm();
            e2 += variational_residual(&model, &st, h / 2.0)?.norm();
            base += configuration_gradient(&st.config, &st.xi, &s.morph).norm();
        }
        let p = order(e1, e2);
        Ok(Check::gate(
            ID,
            NAME,
            p,
            2.0,
            in_order_band(p),
            format!(
                "{} states, residual {:.3e} of the configuration gradient at h = {h:e} s",
                z.variational_states,
                e1 / base
            ),
        ))
    };
    or_fail(ID, NAME, 2.0, run())
}

/// Expanded reduced-model matrices against block elimination. Returns the
/// gated consistency check and a warning carrying the printed-form
/// mismatches.
pub fn expansion(s: &Scenario) -> (Check, Check) {
    let mut model = s.model();
    model.convention = ForceConvention::Reaction;
    let rm = ReducedModel::new(model, &s.kinematics);
    let period = s.kinematics.period();
    let (mut consistent, mut block, mut printed, mut expanded): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    let mut error = None;
    for j in 0..8 {
        let body = BodyState { t: j as f64 * period / 8.0, omega: Vec3::new(1.0, -2.0, 0.5), ..s.initial_body() };
        match rm.evaluate(&body) {
            Ok(e) => {
                let x = expansion_check(&e, &s.morph);
                consistent = consistent.max(x.c_consistent);
                block = block.max(x.block_identity);
                printed = printed.max(x.c_printed);
                expanded = expanded.max(x.expansion);
            }
            Err(e) => error = Some(e.to_string()),
        }
    }
    let worst = consistent.max(block);
    let gated = match &error {
        Some(e) => {
            Check::new("elimination", "reduced matrices by block elimination", f64::NAN, 1e-10, Status::Fail, e.clone())
        }
        None => Check::gate(
            "elimination",
            "reduced matrices by block elimination",
            worst,
            1e-10,
            worst <= 1e-10,
            format!("mass matrix {consistent:.3e}, eliminated equations {block:.3e}"),
        ),
    };
    let status = if printed > 1e-10 || expanded > 1e-10 { Status::Warn } else { Status::Pass };
    let note = Check::new(
        "expanded_forms",
        "closed-form reduced matrices",
        printed.max(expanded),
        1e-10,
        status,
        format!(
            "mass matrix with the alternate torque-map sign {printed:.3e}, closed-form velocity terms {expanded:.3e}; \
             simulations use block elimination"
        ),
    );
    (gated, note)
}

pub fn morphology_notes(s: &Scenario) -> Check {
    let indefinite = s.morph.indefinite_cm_inertia();
    let warnings = s.morph.validate().unwrap_or_else(|e| vec![e.to_string()]);
    let mut notes: Vec<String> =
        indefinite.iter().map(|i| format!("wing {} center-of-mass inertia is indefinite", i + 1)).collect();
    notes.extend(warnings);
    let status = if notes.is_empty() { Status::Pass } else { Status::Warn };
    let detail = if notes.is_empty() { "all wing inertias are physical".to_string() } else { notes.join("; ") };
    Check::new("morphology", "wing inertia plausibility", indefinite.len() as f64, 0.0, status, detail)
}

/// Runs the whole battery at default sizes.
pub fn run_all(s: &Scenario, seed: u64) -> ValidationReport {
    run_with(s, seed, &Sizes::default())
}

pub fn run_with(s: &Scenario, seed: u64, z: &Sizes) -> ValidationReport {
    type Job<'a> = Box<dyn Fn() -> Vec<Check> + Send + Sync + 'a>;
    let one = |c: Check| vec![c];
    let jobs: Vec<Job<'_>> = vec![
        Box::new(move || one(mass_ratio(s))),
        Box::new(move || one(energy_conservation(s, seed, z))),
        Box::new(move || one(free_fall(s, z))),
        Box::new(move || one(momentum_conservation(s, seed, z))),
        Box::new(move || one(mass_matrix(s, seed, z))),
        Box::new(move || one(kinematics_order(s, z))),
        Box::new(move || one(quadrature(s, z))),
        Box::new(move || one(reduced_full_equivalence(s, z))),
        Box::new(move || one(decomposition_closure(s, z))),
        Box::new(move || one(inertial_ordering(s, z))),
        Box::new(move || one(ga_sanity(s, seed, z))),
        Box::new(move || one(hover_diagnostic(s, z))),
        Box::new(move || one(chord_velocity(s, seed, z))),
        Box::new(move || one(variational_residual_order(s, seed, z))),
        Box::new(move || {
            let (a, b) = expansion(s);
            vec![a, b]
        }),
        Box::new(move || one(morphology_notes(s))),
    ];
    let checks = jobs
        .par_iter()
        .map(|job| {
            let t = Instant::now();
            let mut out = job();
            let each = t.elapsed() / out.len() as u32;
            for c in &mut out {
                c.runtime = each;
            }
            out
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    ValidationReport { seed, checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;

    fn scenario() -> Scenario {
        RunConfig::reference().resolve(std::path::Path::new(".")).unwrap().0
    }

    #[test]
    fn direct_energy_vanishes_at_rest() {
        let s = scenario();
        let c = start_configuration(&s);
        assert_eq!(kinetic_energy_direct(&c, &Vec18::zeros(), &s.morph), 0.0);
    }

    #[test]
    fn quick_battery_passes_and_is_deterministic() {
        let s = scenario();
        let z = Sizes { equivalence_dt: 1e-6, ..Sizes::quick() };
        let a = run_with(&s, 7, &z);
        assert!(a.passed(), "{}", a.to_text());
        let ids: Vec<&str> = a.checks.iter().map(|c| c.id).collect();
        let mut unique = ids.clone();
        unique.sort();
        unique.dedup();
        assert_eq!(unique.len(), ids.len());
        let b = run_with(&s, 7, &z);
        let m = |r: &ValidationReport| r.checks.iter().map(|c| (c.id, c.measured.to_bits())).collect::<Vec<_>>();
        assert_eq!(m(&a), m(&b));
        let csv = a.to_csv();
        assert_eq!(csv.lines().count(), a.checks.len() + 1);
        assert!(a.to_text().contains("PASS"));
    }
}
