//! The subcommands.

use log::info;

use ornithopter::aero::gamma_ac;
use ornithopter::config::{BodyMotion, Scenario};
use ornithopter::dynamics::{diagnostics, step, wing_flow, Model, SystemState, TorqueInput, ZeroTorque};
use ornithopter::optimize::{ga_optimize, hover_cost, ParameterSpace};
use ornithopter::reduced::{BodyState, Evaluation, PrescribedPitch, RecoveredTorque, ReducedModel, TranslationState};
use ornithopter::so3::Vec3;
use ornithopter::validation::{run_with, Sizes};

use crate::output::{matrix_columns, xyz, Cell, CsvFile};
use crate::run::{write_failed, Failure, Run};
use crate::{Common, TorqueArg};

type Columns = Vec<(String, &'static str)>;

fn columns(parts: Vec<Columns>) -> Columns {
    parts.into_iter().flatten().collect()
}

fn time() -> Columns {
    vec![("t".to_string(), "s")]
}

fn body_columns() -> Columns {
    columns(vec![time(), xyz("p", "m"), xyz("v", "m/s"), matrix_columns("A_B", "-"), xyz("Omega_B", "rad/s")])
}

fn torque_columns() -> Columns {
    columns((1..=4).map(|k| xyz(&format!("tau_{k}"), "N m")).collect())
}

fn push3(v: &mut Vec<f64>, x: &Vec3) {
    v.extend_from_slice(x.as_slice());
}

fn body_row(s: &SystemState) -> Vec<f64> {
    let mut r = vec![s.t];
    push3(&mut r, &s.config.p);
    push3(&mut r, &s.p_dot());
    r.extend_from_slice(&s.config.body.row_major());
    push3(&mut r, &s.omega_body());
    r
}

fn emit(f: &mut CsvFile, run: &Run, values: &[f64]) -> Result<(), Failure> {
    f.floats(values).map_err(|e| write_failed(&run.out_dir, e))
}

pub fn simulate_full(c: &Common, torque: TorqueArg) -> Result<(), Failure> {
    let mut run = Run::load("simulate-full", c)?;
    let s = &run.scenario;
    let model = s.model();
    let rm = ReducedModel::new(model, &s.kinematics);
    let recovered = RecoveredTorque { kinematics: &s.kinematics };
    let law: &dyn TorqueInput = match torque {
        TorqueArg::Recovered => &recovered,
        TorqueArg::Zero => &ZeroTorque,
    };
    let (dt, steps, stride) = (s.integrator.dt, s.steps(), s.output.stride);

    let wing_rates = columns((1..=4).map(|k| xyz(&format!("Omega_{k}"), "rad/s")).collect());
    let mut traj = run.csv("trajectory.csv", &columns(vec![body_columns(), wing_rates, torque_columns()]))?;
    let diag_cols =
        columns(vec![time(), vec![("T".into(), "J"), ("U".into(), "J"), ("E".into(), "J")], xyz("P", "kg m/s")]);
    let mut diag = run.csv("diagnostics.csv", &diag_cols)?;

    info!("{steps} steps at dt = {dt:e} s, {torque:?} torques");
    let mut state = rm.full_state(&s.initial_body()).0;
    for n in 0..=steps {
        if n % stride == 0 {
            let mut r = body_row(&state);
            for k in 0..4 {
                push3(&mut r, &state.omega_wing(k));
            }
            for t in law.torques(state.t, &state, &model) {
                push3(&mut r, &t);
            }
            emit(&mut traj, &run, &r)?;
            let d = diagnostics(&state, &s.morph);
            let mut r = vec![state.t, d.kinetic, d.potential, d.total];
            push3(&mut r, &d.momentum);
            emit(&mut diag, &run, &r)?;
        }
        if n < steps {
            state = step(&model, law, &state, dt)?;
        }
    }
    run.commit(traj)?;
    run.commit(diag)?;
    run.finish()
}

/// Integrates the body as configured, calling `row` on every `stride`-th
/// step including the first.
fn reduced_run(s: &Scenario, mut row: impl FnMut(&Evaluation) -> Result<(), Failure>) -> Result<(), Failure> {
    let rm = ReducedModel::new(s.model(), &s.kinematics);
    let (dt, steps, stride) = (s.integrator.dt, s.steps(), s.output.stride);
    info!("{steps} steps at dt = {dt:e} s, body motion {:?}", s.integrator.body_motion);
    match s.integrator.body_motion {
        BodyMotion::PrescribedPitch => {
            let sim = PrescribedPitch { reduced: rm, pitch: s.pitch };
            let mut st = TranslationState { t: 0.0, p: Vec3::from(s.initial.p), v: Vec3::from(s.initial.v) };
            for n in 0..=steps {
                if n % stride == 0 {
                    row(&sim.evaluate(&st))?;
                }
                if n < steps {
                    st = sim.step(&st, dt)?;
                }
            }
        }
        BodyMotion::Free => {
            let mut body: BodyState = s.initial_body();
            for n in 0..=steps {
                if n % stride == 0 {
                    row(&rm.evaluate(&body)?)?;
                }
                if n < steps {
                    body = rm.step(&body, dt)?;
                }
            }
        }
    }
    Ok(())
}

pub fn simulate_reduced(c: &Common) -> Result<(), Failure> {
    let mut run = Run::load("simulate-reduced", c)?;
    let cols = columns(vec![body_columns(), xyz("a", "m/s^2"), xyz("Omega_B_dot", "rad/s^2"), torque_columns()]);
    let mut traj = run.csv("trajectory.csv", &cols)?;
    reduced_run(&run.scenario, |e| {
        let mut r = body_row(&e.state);
        push3(&mut r, &e.p_ddot());
        push3(&mut r, &e.omega_body_dot());
        for t in e.torques() {
            push3(&mut r, &t);
        }
        emit(&mut traj, &run, &r)
    })?;
    run.commit(traj)?;
    run.finish()
}

pub fn decompose_forces(c: &Common) -> Result<(), Failure> {
    let mut run = Run::load("decompose-forces", c)?;
    let names = ["F_c", "F_B", "F_w", "Gamma_c", "Gamma_B", "Gamma_w"];
    let unit = |n: &str| if n.starts_with('F') { "N" } else { "N m" };
    let cols = columns(vec![
        time(),
        names.iter().map(|n| (format!("{n}_norm"), unit(n))).collect(),
        names.iter().flat_map(|n| xyz(n, unit(n))).collect(),
        vec![("force_residual".into(), "-"), ("torque_residual".into(), "-")],
    ]);
    let mut out = run.csv("decomposition.csv", &cols)?;
    let morph = run.scenario.morph.clone();
    reduced_run(&run.scenario, |e| {
        let d = e.decompose(&morph);
        let parts = [d.f_c, d.f_b, d.f_w, d.gamma_c, d.gamma_b, d.gamma_w];
        let mut r = vec![e.state.t];
        r.extend(parts.iter().map(|v| v.norm()));
        for v in &parts {
            push3(&mut r, v);
        }
        r.push(d.force_residual);
        r.push(d.torque_residual);
        emit(&mut out, &run, &r)
    })?;
    run.commit(out)?;
    run.finish()
}

pub fn wing_forces(c: &Common, samples: usize, sweep_alpha: bool) -> Result<(), Failure> {
    let mut run = Run::load("wing-forces", c)?;
    if sweep_alpha {
        let cols = vec![("alpha".into(), "deg"), ("CL".into(), "-"), ("CD".into(), "-"), ("gamma_ac".into(), "-")];
        let mut out = run.csv("coefficients.csv", &cols)?;
        let aero = &run.scenario.aero;
        for k in 0..=360 {
            let deg = 0.5 * k as f64;
            let a = deg.to_radians();
            let (cl, cd) = aero.coefficients(a);
            emit(&mut out, &run, &[deg, cl, cd, gamma_ac(a)])?;
        }
        run.commit(out)?;
        return run.finish();
    }
    if samples == 0 {
        return Err(Failure::Config("--samples must be at least 1".into()));
    }

    let s = &run.scenario;
    let rm = ReducedModel::new(Model::new(&s.morph, &s.aero), &s.kinematics);
    let station_cols = columns(vec![
        time(),
        vec![("i".into(), "-"), ("r".into(), "m"), ("alpha".into(), "rad"), ("CL".into(), "-"), ("CD".into(), "-")],
        xyz("dL", "N"),
        xyz("dD", "N"),
        xyz("dM", "N m"),
    ]);
    let load_cols = columns(vec![time(), vec![("i".into(), "-")], xyz("L", "N"), xyz("D", "N"), xyz("M", "N m")]);
    let mut stations = run.csv("stations.csv", &station_cols)?;
    let mut loads = run.csv("loads.csv", &load_cols)?;
    let period = s.kinematics.period();
    let base = s.initial_body();
    for j in 0..samples {
        let t = period * j as f64 / samples as f64;
        let ps = s.pitch.sample(period.recip(), t);
        let body = BodyState { attitude: ps.attitude, omega: ps.omega + Vec3::from(s.initial.omega), t, ..base };
        let state = rm.full_state(&body).0;
        for k in 0..4 {
            let flow = wing_flow(&state, &s.morph, k);
            let (total, strips) = s.aero.wing_loads_detailed(&flow);
            for st in &strips {
                let mut cells = vec![Cell::F(t), Cell::I(k + 1)];
                let mut v = vec![st.r, st.alpha.unwrap_or(f64::NAN), st.cl, st.cd];
                push3(&mut v, &st.lift);
                push3(&mut v, &st.drag);
                push3(&mut v, &st.moment);
                cells.extend(v.into_iter().map(Cell::F));
                stations.row(&cells).map_err(|e| write_failed(&run.out_dir, e))?;
            }
            let mut cells = vec![Cell::F(t), Cell::I(k + 1)];
            cells.extend(total.lift.iter().chain(total.drag.iter()).chain(total.moment.iter()).map(|&x| Cell::F(x)));
            loads.row(&cells).map_err(|e| write_failed(&run.out_dir, e))?;
        }
    }
    run.commit(stations)?;
    run.commit(loads)?;
    run.finish()
}

pub fn optimize_hover(c: &Common, generations: Option<usize>, population: Option<usize>) -> Result<(), Failure> {
    let mut run = Run::load("optimize-hover", c)?;
    let s = &run.scenario;
    let mut ga = s.optimization.clone();
    ga.seed = s.seed;
    ga.generations = generations.unwrap_or(ga.generations);
    ga.population = population.unwrap_or(ga.population);
    let space = ParameterSpace::new(ga.paired).with_overrides(&ga.bounds)?;
    let x0 = space.clamp(&space.encode(&s.kinematics, &s.pitch));
    let model = s.model();
    let cost = |x: &[f64]| {
        let (kin, pitch) = space.decode(x, &s.kinematics, &s.pitch);
        hover_cost(&model, &kin, &pitch, &ga)
    };
    info!("{} parameters, population {}, {} generations, seed {}", space.dim(), ga.population, ga.generations, ga.seed);
    let start_cost = cost(&x0);
    let res = ga_optimize(&ga, &space, Some(&x0), cost)?;
    info!("hover cost {start_cost:.6e} -> {:.6e}", res.best_cost);

    let cols = vec![
        ("generation".into(), "-"),
        ("best".into(), "m^2 s"),
        ("mean".into(), "m^2 s"),
        ("worst".into(), "m^2 s"),
        ("evaluations".into(), "-"),
    ];
    let mut hist = run.csv("history.csv", &cols)?;
    for g in &res.history {
        hist.row(&[Cell::I(g.generation), Cell::F(g.best), Cell::F(g.mean), Cell::F(g.worst), Cell::I(g.evaluations)])
            .map_err(|e| write_failed(&run.out_dir, e))?;
    }
    let (kin, pitch) = space.decode(&res.best, &s.kinematics, &s.pitch);
    let mut best = run.config.clone();
    if !ga.paired {
        best.kinematics.paired = false;
    }
    best.set_motion(&kin, &pitch);
    let text = format!(
        "# Best hover parameters from optimize-hover (seed {}, cost {:.17e}).\n# Run it with simulate-reduced.\n\n{}",
        ga.seed,
        res.best_cost,
        ornithopter::config::to_toml(&best)
    );
    run.commit(hist)?;
    run.write("best.cfg", text.as_bytes())?;
    run.finish()
}

pub fn validate(c: &Common, quick: bool) -> Result<(), Failure> {
    let mut run = Run::load("validate", c)?;
    let sizes = if quick { Sizes::quick() } else { Sizes::default() };
    let report = run_with(&run.scenario, run.scenario.seed, &sizes);
    let text = report.to_text();
    print!("{text}");
    run.write("validation.csv", report.to_csv().as_bytes())?;
    run.write("validation.txt", text.as_bytes())?;
    let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed()).map(|c| c.id).collect();
    run.finish()?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Numerical(format!("validation checks failed: {}", failed.join(", "))))
    }
}
