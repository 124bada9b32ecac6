//! Hover-parameter search: the parameter vector and its box, the hover cost,
//! and a seeded genetic algorithm.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::Model;
use crate::error::{Error, Result};
use crate::kinematics::{BodyPitch, WingKinematics, PITCH_BOUNDS, WAVEFORM_BOUNDS};
use crate::reduced::{BodyState, PrescribedPitch, ReducedModel, TranslationState};
use crate::so3::Vec3;

/// Cost returned for a trajectory that diverges or fails to evaluate.
pub const DIVERGENCE_PENALTY: f64 = 1e12;

/// Which body model the hover cost integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostModel {
    /// Body pitch prescribed, translation integrated.
    #[default]
    PrescribedPitch,
    /// Free body, every body degree of freedom integrated.
    FreeBody,
}

/// Genetic-algorithm and cost settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    /// Per-gene probability of a Gaussian kick.
    pub mutation_rate: f64,
    /// Standard deviation of a kick as a fraction of the parameter range.
    pub mutation_scale: f64,
    /// Fraction by which the kick size shrinks linearly over the run
    /// (`1` reaches zero at the last generation, `0` keeps it constant).
    pub mutation_shrink: f64,
    pub elitism: usize,
    pub tournament: usize,
    pub w1: f64,
    pub w2: f64,
    /// Cost horizon in flapping periods.
    pub horizon_periods: f64,
    /// Time step of the cost integration, s.
    pub dt: f64,
    pub p_ref: [f64; 3],
    /// Left and right wings share parameters.
    pub paired: bool,
    /// Worker threads for cost evaluation; all cores when absent.
    pub workers: Option<usize>,
    pub cost_model: CostModel,
    /// Per-parameter `[lower, upper]` overrides, angles in degrees.
    pub bounds: BTreeMap<String, [f64; 2]>,
    /// Filled from the run seed.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 50,
            generations: 300,
            crossover_rate: 0.8,
            mutation_rate: 0.15,
            mutation_scale: 0.05,
            mutation_shrink: 1.0,
            elitism: 2,
            tournament: 3,
            w1: 1.0,
            w2: 0.1,
            horizon_periods: 10.0,
            dt: 1e-4,
            p_ref: [0.0, 0.0, 2.0],
            paired: true,
            workers: None,
            cost_model: CostModel::PrescribedPitch,
            bounds: BTreeMap::new(),
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Schema(m));
        if self.population < 4 {
            return bad(format!("population {} must be at least 4", self.population));
        }
        for (name, r) in [
            ("crossover_rate", self.crossover_rate),
            ("mutation_rate", self.mutation_rate),
            ("mutation_scale", self.mutation_scale),
            ("mutation_shrink", self.mutation_shrink),
        ] {
            if !(0.0..=1.0).contains(&r) {
                return bad(format!("{name} = {r} must lie in [0, 1]"));
            }
        }
        if self.elitism > self.population {
            return bad(format!("elitism {} exceeds the population {}", self.elitism, self.population));
        }
        if self.tournament == 0 {
            return bad("tournament size must be at least 1".into());
        }
        if !(self.dt > 0.0 && self.horizon_periods > 0.0) {
            return bad("cost dt and horizon must be positive".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        Ok(())
    }
}

/// What one coordinate of the parameter vector drives.
#[derive(Debug, Clone, PartialEq)]
enum Slot {
    Frequency,
    Wing { wings: Vec<usize>, field: &'static str },
    Pitch(&'static str),
}

/// Flattened hover parameters with a box per coordinate.
///
/// Index map: `0` is the shared frequency. Then, per wing group (fore pair
/// and hind pair when paired, wings 1..4 otherwise), the continuous waveform
/// parameters in [`WAVEFORM_BOUNDS`] order except `f`, with the first
/// group's `phi_a` left out as the phase reference. The last three are the
/// body pitch amplitude, phase and offset. Angles are radians.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSpace {
    pub names: Vec<String>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    slots: Vec<Slot>,
}

impl ParameterSpace {
    pub fn new(paired: bool) -> Self {
        let groups: Vec<(String, Vec<usize>)> = if paired {
            vec![("fore".into(), vec![0, 1]), ("hind".into(), vec![2, 3])]
        } else {
            (0..4).map(|i| (format!("wing{}", i + 1), vec![i])).collect()
        };
        let mut s = ParameterSpace { names: vec![], lower: vec![], upper: vec![], slots: vec![] };
        let deg = |v: f64, angle: bool| if angle { v.to_radians() } else { v };
        let (_, lo, hi, _) = WAVEFORM_BOUNDS[0];
        s.push("f".into(), lo, hi, Slot::Frequency);
        for (g, (label, wings)) in groups.into_iter().enumerate() {
            for &(field, lo, hi, angle) in WAVEFORM_BOUNDS.iter().skip(1) {
                if g == 0 && field == "phi_a" {
                    continue;
                }
                s.push(
                    format!("{label}.{field}"),
                    deg(lo, angle),
                    deg(hi, angle),
                    Slot::Wing { wings: wings.clone(), field },
                );
            }
        }
        for &(field, lo, hi) in PITCH_BOUNDS.iter() {
            s.push(field.into(), lo.to_radians(), hi.to_radians(), Slot::Pitch(field));
        }
        s
    }

    fn push(&mut self, name: String, lo: f64, hi: f64, slot: Slot) {
        self.names.push(name);
        self.lower.push(lo);
        self.upper.push(hi);
        self.slots.push(slot);
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    fn is_angle(&self, i: usize) -> bool {
        match &self.slots[i] {
            Slot::Frequency => false,
            Slot::Pitch(_) => true,
            Slot::Wing { field, .. } => !matches!(*field, "phi_k" | "theta_c"),
        }
    }

    /// Replaces the box of the named coordinates; angles given in degrees.
    pub fn with_overrides(mut self, overrides: &BTreeMap<String, [f64; 2]>) -> Result<Self> {
        for (name, [lo, hi]) in overrides {
            let i =
                self.index_of(name).ok_or_else(|| Error::Schema(format!("unknown optimization parameter `{name}`")))?;
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::Schema(format!("bounds for `{name}` must be finite with lower <= upper")));
            }
            let k = if self.is_angle(i) { 1f64.to_radians() } else { 1.0 };
            self.lower[i] = lo * k;
            self.upper[i] = hi * k;
        }
        Ok(self)
    }

    /// Component-wise clamp into the box.
    pub fn clamp(&self, x: &[f64]) -> Vec<f64> {
        x.iter().enumerate().map(|(i, v)| v.clamp(self.lower[i], self.upper[i])).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().enumerate().all(|(i, v)| *v >= self.lower[i] && *v <= self.upper[i])
    }

    /// Reads the coordinates from kinematics and pitch (first wing of each group).
    pub fn encode(&self, kin: &WingKinematics, pitch: &BodyPitch) -> Vec<f64> {
        self.slots
            .iter()
            .map(|slot| match slot {
                Slot::Frequency => kin.waveforms[0].f,
                Slot::Wing { wings, field } => kin.waveforms[wings[0]].field(field).expect("known field"),
                Slot::Pitch(field) => pitch.field(field).expect("known field"),
            })
            .collect()
    }

    /// Writes the coordinates over `base`. Parameters outside the vector
    /// (`psi_n`, the reference phase) keep their base values; in paired mode
    /// the left wing of each pair copies the right one.
    pub fn decode(&self, x: &[f64], base: &WingKinematics, base_pitch: &BodyPitch) -> (WingKinematics, BodyPitch) {
        let mut kin = *base;
        let mut pitch = *base_pitch;
        for (slot, &v) in self.slots.iter().zip(x) {
            match slot {
                Slot::Frequency => kin.waveforms.iter_mut().for_each(|w| w.f = v),
                Slot::Wing { wings, field } => {
                    for &k in wings {
                        kin.waveforms[k].set_field(field, v);
                    }
                }
                Slot::Pitch(field) => {
                    pitch.set_field(field, v);
                }
            }
        }
        if self.slots.iter().any(|s| matches!(s, Slot::Wing { wings, .. } if wings.len() == 2)) {
            kin.waveforms[1].phi_a = kin.waveforms[0].phi_a;
            kin.waveforms[1].psi_n = kin.waveforms[0].psi_n;
            kin.waveforms[3].psi_n = kin.waveforms[2].psi_n;
        }
        (kin, pitch)
    }
}

/// `w₁∫‖p − p_ref‖² dt + w₂∫‖ṗ‖² dt` by the trapezoidal rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostAccumulator {
    pub w1: f64,
    pub w2: f64,
    pub p_ref: Vec3,
    position: f64,
    velocity: f64,
    last: Option<(f64, f64, f64)>,
}

impl CostAccumulator {
    pub fn new(w1: f64, w2: f64, p_ref: Vec3) -> Self {
        Self { w1, w2, p_ref, position: 0.0, velocity: 0.0, last: None }
    }

    pub fn push(&mut self, t: f64, p: &Vec3, v: &Vec3) {
        let e = (p - self.p_ref).norm_squared();
        let s = v.norm_squared();
        if let Some((t0, e0, s0)) = self.last {
            let h = t - t0;
            self.position += 0.5 * h * (e0 + e);
            self.velocity += 0.5 * h * (s0 + s);
        }
        self.last = Some((t, e, s));
    }

    /// Unweighted `∫‖p − p_ref‖²` and `∫‖ṗ‖²`.
    pub fn integrals(&self) -> (f64, f64) {
        (self.position, self.velocity)
    }

    pub fn total(&self) -> f64 {
        self.w1 * self.position + self.w2 * self.velocity
    }
}

/// Hover cost of a decoded parameter set, starting at rest at `p_ref`.
///
/// Divergence, or any cost that is not finite, yields
/// [`DIVERGENCE_PENALTY`].
pub fn hover_cost(model: &Model<'_>, kin: &WingKinematics, pitch: &BodyPitch, ga: &GaConfig) -> f64 {
    let p_ref = Vec3::from(ga.p_ref);
    let t_f = ga.horizon_periods * kin.period();
    let steps = (t_f / ga.dt).round().max(1.0) as usize;
    let dt = t_f / steps as f64;
    let mut acc = CostAccumulator::new(ga.w1, ga.w2, p_ref);
    let reduced = ReducedModel::new(*model, kin);
    let ok = match ga.cost_model {
        CostModel::PrescribedPitch => {
            let sim = PrescribedPitch { reduced, pitch: *pitch };
            let start = TranslationState { t: 0.0, p: p_ref, v: Vec3::zeros() };
            sim.simulate(start, dt, steps, |_, s| acc.push(s.t, &s.p, &s.v)).is_ok()
        }
        CostModel::FreeBody => {
            let s0 = pitch.sample(kin.waveforms[0].f, 0.0);
            let mut b = BodyState { p: p_ref, attitude: s0.attitude, v: Vec3::zeros(), omega: s0.omega, t: 0.0 };
            acc.push(b.t, &b.p, &b.v);
            (0..steps)
                .try_for_each(|_| {
                    b = reduced.step(&b, dt)?;
                    acc.push(b.t, &b.p, &b.v);
                    Ok::<(), Error>(())
                })
                .is_ok()
        }
    };
    let j = acc.total();
    if ok && j.is_finite() {
        j
    } else {
        DIVERGENCE_PENALTY
    }
}

/// One generation of the search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    pub worst: f64,
    /// Cost evaluations so far.
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaResult {
    pub best: Vec<f64>,
    pub best_cost: f64,
    pub history: Vec<GenerationRecord>,
}

fn sanitize(c: f64) -> f64 {
    if c.is_nan() {
        f64::INFINITY
    } else {
        c
    }
}

/// Minimizes `cost` over the box of `space`.
///
/// Tournament selection, uniform crossover, Gaussian mutation with a
/// linearly shrinking scale, and elitism.
/// The random stream is consumed only here, never inside `cost`, so results
/// depend on the seed alone however the evaluations are scheduled. `initial`,
/// if given, replaces the first random individual.
pub fn ga_optimize<F>(cfg: &GaConfig, space: &ParameterSpace, initial: Option<&[f64]>, cost: F) -> Result<GaResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::Schema(format!("cannot start worker pool: {e}")))?;
    let dim = space.dim();
    let range: Vec<f64> = (0..dim).map(|i| space.upper[i] - space.lower[i]).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut pop: Vec<Vec<f64>> = (0..cfg.population)
        .map(|_| (0..dim).map(|i| space.lower[i] + rng.random::<f64>() * range[i]).collect())
        .collect();
    if let Some(x0) = initial {
        pop[0] = space.clamp(x0);
    }
    let evaluate =
        |xs: &[Vec<f64>]| -> Vec<f64> { pool.install(|| xs.par_iter().map(|x| sanitize(cost(x))).collect()) };
    let mut costs = evaluate(&pop);
    let mut evaluations = pop.len();
    let mut history = Vec::with_capacity(cfg.generations + 1);

    let rank = |costs: &[f64]| {
        let mut idx: Vec<usize> = (0..costs.len()).collect();
        idx.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]).then(a.cmp(&b)));
        idx
    };
    let record = |g: usize, costs: &[f64], evaluations: usize| {
        let best = costs.iter().copied().fold(f64::INFINITY, f64::min);
        let worst = costs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        GenerationRecord {
            generation: g,
            best,
            mean: costs.iter().sum::<f64>() / costs.len() as f64,
            worst,
            evaluations,
        }
    };
    history.push(record(0, &costs, evaluations));

    for g in 1..=cfg.generations {
        let order = rank(&costs);
        let mut next: Vec<Vec<f64>> = order[..cfg.elitism].iter().map(|&i| pop[i].clone()).collect();
        let mut next_costs: Vec<f64> = order[..cfg.elitism].iter().map(|&i| costs[i]).collect();
        let sigma = cfg.mutation_scale * (1.0 - cfg.mutation_shrink * g as f64 / cfg.generations as f64);
        let mut children = Vec::with_capacity(cfg.population - cfg.elitism);
        while next.len() + children.len() < cfg.population {
            let mut pick = || {
                let mut best = rng.random_range(0..pop.len());
                for _ in 1..cfg.tournament {
                    let c = rng.random_range(0..pop.len());
                    if costs[c] < costs[best] || (costs[c] == costs[best] && c < best) {
                        best = c;
                    }
                }
                best
            };
            let (a, b) = (pick(), pick());
            let mut child = pop[a].clone();
            if rng.random::<f64>() < cfg.crossover_rate {
                for i in 0..dim {
                    if rng.random::<bool>() {
                        child[i] = pop[b][i];
                    }
                }
            }
            for i in 0..dim {
                if rng.random::<f64>() < cfg.mutation_rate {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    child[i] += z * sigma * range[i];
                }
            }
            children.push(space.clamp(&child));
        }
        let child_costs = evaluate(&children);
        evaluations += children.len();
        next.extend(children);
        next_costs.extend(child_costs);
        pop = next;
        costs = next_costs;
        history.push(record(g, &costs, evaluations));
    }
    let order = rank(&costs);
    Ok(GaResult { best: pop[order[0]].clone(), best_cost: costs[order[0]], history })
}
