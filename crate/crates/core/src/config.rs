//! Run configuration: a TOML document with angles in degrees.
//!
//! ```toml
//! schema_version = 1
//! seed = 42
//!
//! [morphology]
//! inertia_mode = "rescaled"
//!
//! [kinematics]
//! paired = true
//! [[kinematics.wings]]      # fore pair
//! f = 35.6476
//! phi_m = 58.42
//! # ...
//! ```
//!
//! See `configs/dragonfly_hover.cfg` for a complete annotated example.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::aero::{AeroModel, TrigUnits};
use crate::dynamics::{ForceConvention, Model};
use crate::error::{Error, Result};
use crate::kinematics::{BodyPitch, DerivativeMode, WingKinematics, WingWaveform};
use crate::morphology::{default_dragonfly, default_shapes, InertiaMode, Morphology, Wing};
use crate::optimize::GaConfig;
use crate::reduced::BodyState;
use crate::so3::{Mat3, Vec3};
use crate::wing_geometry::{fit_polynomial, parse_contour_points, Side, WingShape};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    /// Turn every bound warning into an error.
    #[serde(default)]
    pub strict: bool,
    #[serde(default)]
    pub morphology: MorphologyConfig,
    #[serde(default)]
    pub aero: AeroConfig,
    pub kinematics: KinematicsConfig,
    #[serde(default)]
    pub body_pitch: PitchConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub optimization: GaConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MorphologyConfig {
    pub inertia_mode: InertiaMode,
    /// Metres per planform polynomial unit.
    pub chord_scale: f64,
    /// Planform areas `[fore, hind]` in m². When set, each wing's chord
    /// scale is chosen to match instead of using `chord_scale`.
    pub reference_area: Option<[f64; 2]>,
    pub gravity: f64,
    pub body_mass: Option<f64>,
    /// Principal moments of the body, kg·m².
    pub body_inertia: Option<[f64; 3]>,
    /// Four inline wings replacing the reference ones.
    pub wings: Option<Vec<WingConfig>>,
}

impl Default for MorphologyConfig {
    fn default() -> Self {
        Self {
            inertia_mode: InertiaMode::Rescaled,
            chord_scale: crate::morphology::DEFAULT_CHORD_SCALE,
            reference_area: None,
            gravity: crate::morphology::GRAVITY,
            body_mass: None,
            body_inertia: None,
            wings: None,
        }
    }
}

/// An inline wing. Edge polynomials come either as coefficients or as
/// two-column contour files fitted with a degree-7 polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WingConfig {
    pub mass: f64,
    /// Inertia about the joint in the wing frame, row-major, kg·m².
    pub inertia: [[f64; 3]; 3],
    pub mu: [f64; 3],
    pub kappa: [f64; 3],
    pub span: f64,
    #[serde(default)]
    pub leading_edge: Option<Vec<f64>>,
    #[serde(default)]
    pub trailing_edge: Option<Vec<f64>>,
    #[serde(default)]
    pub leading_edge_file: Option<PathBuf>,
    #[serde(default)]
    pub trailing_edge_file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AeroConfig {
    /// Air density, kg/m³.
    pub rho: f64,
    pub stations: usize,
    pub trig_units: TrigUnits,
    pub force_convention: ForceConvention,
}

impl Default for AeroConfig {
    fn default() -> Self {
        let a = AeroModel::default();
        Self {
            rho: a.rho,
            stations: a.stations,
            trig_units: a.trig_units,
            force_convention: ForceConvention::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KinematicsConfig {
    /// Two entries (fore pair, hind pair) when true, four otherwise.
    #[serde(default = "yes")]
    pub paired: bool,
    #[serde(default)]
    pub derivative_mode: DerivativeMode,
    pub wings: Vec<WaveformConfig>,
}

fn yes() -> bool {
    true
}

/// Waveform parameters; angles in degrees, frequency in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveformConfig {
    pub f: f64,
    pub phi_m: f64,
    pub phi_0: f64,
    pub phi_a: f64,
    #[serde(rename = "phi_K", alias = "phi_k")]
    pub phi_k: f64,
    pub theta_m: f64,
    pub theta_0: f64,
    pub theta_a: f64,
    #[serde(rename = "theta_C", alias = "theta_c")]
    pub theta_c: f64,
    pub psi_m: f64,
    pub psi_0: f64,
    pub psi_a: f64,
    #[serde(rename = "psi_N", alias = "psi_n")]
    pub psi_n: u8,
    pub beta: f64,
}

impl From<&WaveformConfig> for WingWaveform {
    fn from(c: &WaveformConfig) -> Self {
        let d = f64::to_radians;
        WingWaveform {
            f: c.f,
            phi_m: d(c.phi_m),
            phi_0: d(c.phi_0),
            phi_a: d(c.phi_a),
            phi_k: c.phi_k,
            theta_m: d(c.theta_m),
            theta_0: d(c.theta_0),
            theta_a: d(c.theta_a),
            theta_c: c.theta_c,
            psi_m: d(c.psi_m),
            psi_0: d(c.psi_0),
            psi_a: d(c.psi_a),
            psi_n: c.psi_n,
            beta: d(c.beta),
        }
    }
}

impl From<&WingWaveform> for WaveformConfig {
    fn from(w: &WingWaveform) -> Self {
        let d = f64::to_degrees;
        WaveformConfig {
            f: w.f,
            phi_m: d(w.phi_m),
            phi_0: d(w.phi_0),
            phi_a: d(w.phi_a),
            phi_k: w.phi_k,
            theta_m: d(w.theta_m),
            theta_0: d(w.theta_0),
            theta_a: d(w.theta_a),
            theta_c: w.theta_c,
            psi_m: d(w.psi_m),
            psi_0: d(w.psi_0),
            psi_a: d(w.psi_a),
            psi_n: w.psi_n,
            beta: d(w.beta),
        }
    }
}

/// Body pitch `Φ(t) = amplitude·cos(2πft + phase) + offset`, degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PitchConfig {
    pub amplitude: f64,
    pub phase: f64,
    pub offset: f64,
}

impl From<&PitchConfig> for BodyPitch {
    fn from(c: &PitchConfig) -> Self {
        BodyPitch { amplitude: c.amplitude.to_radians(), phase: c.phase.to_radians(), offset: c.offset.to_radians() }
    }
}

impl From<&BodyPitch> for PitchConfig {
    fn from(b: &BodyPitch) -> Self {
        PitchConfig { amplitude: b.amplitude.to_degrees(), phase: b.phase.to_degrees(), offset: b.offset.to_degrees() }
    }
}

/// Initial body state. The attitude is the pitch prescription at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialConfig {
    pub p: [f64; 3],
    pub v: [f64; 3],
    /// Body-frame angular velocity added to the pitch rate, rad/s.
    pub omega: [f64; 3],
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self { p: [0.0, 0.0, 2.0], v: [0.0; 3], omega: [0.0; 3] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BodyMotion {
    #[default]
    PrescribedPitch,
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub dt: f64,
    /// Run length in seconds; `periods` is used when absent.
    pub duration: Option<f64>,
    pub periods: f64,
    pub body_motion: BodyMotion,
    /// Check waveform and pitch parameters against their ranges.
    pub validate_bounds: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 1e-5,
            duration: None,
            periods: 10.0,
            body_motion: BodyMotion::PrescribedPitch,
            validate_bounds: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Write every `stride`-th step.
    pub stride: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), stride: 10 }
    }
}

/// Everything a run needs, in SI units and radians.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub morph: Morphology,
    pub aero: AeroModel,
    pub convention: ForceConvention,
    pub kinematics: WingKinematics,
    pub pitch: BodyPitch,
    pub initial: InitialConfig,
    pub integrator: IntegratorConfig,
    pub output: OutputConfig,
    pub optimization: GaConfig,
    pub seed: u64,
}

impl Scenario {
    /// Run length in seconds.
    pub fn duration(&self) -> f64 {
        self.integrator.duration.unwrap_or(self.integrator.periods * self.kinematics.period())
    }

    pub fn steps(&self) -> usize {
        (self.duration() / self.integrator.dt).round() as usize
    }

    pub fn model(&self) -> Model<'_> {
        Model::new(&self.morph, &self.aero).with_convention(self.convention)
    }

    /// Initial body state, with the attitude and rate taken from the pitch
    /// prescription at `t = 0` plus the configured extra rate.
    pub fn initial_body(&self) -> BodyState {
        let s = self.pitch.sample(self.kinematics.period().recip(), 0.0);
        BodyState {
            p: Vec3::from(self.initial.p),
            attitude: s.attitude,
            v: Vec3::from(self.initial.v),
            omega: s.omega + Vec3::from(self.initial.omega),
            t: 0.0,
        }
    }
}

/// A parsed and resolved configuration file.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub path: PathBuf,
    pub text: String,
    pub config: RunConfig,
    pub scenario: Scenario,
    pub warnings: Vec<String>,
}

/// Parses configuration text. Malformed or empty documents are parse errors;
/// missing, unknown or ill-typed fields are schema errors.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    if text.trim().is_empty() {
        return Err(Error::Parse("configuration is empty".into()));
    }
    let value: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
    let cfg: RunConfig = RunConfig::deserialize(toml::Value::Table(value))
        .map_err(|e| Error::Schema(e.to_string().trim().to_string()))?;
    if cfg.schema_version != SCHEMA_VERSION {
        return Err(Error::Schema(format!(
            "schema_version {} is not supported (expected {SCHEMA_VERSION})",
            cfg.schema_version
        )));
    }
    Ok(cfg)
}

pub fn to_toml(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("configuration serializes")
}

/// Reads, parses and resolves a configuration file.
pub fn load_config(path: &Path) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.display().to_string(), source: e })?;
    let config = parse_config(&text)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let (scenario, warnings) = config.resolve(base)?;
    Ok(LoadedConfig { path: path.to_path_buf(), text, config, scenario, warnings })
}

impl RunConfig {
    /// The reference hover configuration.
    pub fn reference() -> Self {
        let (kin, pitch) = crate::kinematics::reference_hover();
        RunConfig {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            strict: false,
            morphology: MorphologyConfig::default(),
            aero: AeroConfig::default(),
            kinematics: KinematicsConfig {
                paired: true,
                derivative_mode: DerivativeMode::Analytic,
                wings: vec![(&kin.waveforms[0]).into(), (&kin.waveforms[2]).into()],
            },
            body_pitch: (&pitch).into(),
            initial: InitialConfig::default(),
            integrator: IntegratorConfig::default(),
            output: OutputConfig::default(),
            optimization: GaConfig::default(),
        }
    }

    /// Writes kinematics and pitch back into the configuration, in the
    /// layout (paired or not) it already has.
    pub fn set_motion(&mut self, kin: &WingKinematics, pitch: &BodyPitch) {
        self.kinematics.wings = if self.kinematics.paired {
            vec![(&kin.waveforms[0]).into(), (&kin.waveforms[2]).into()]
        } else {
            kin.waveforms.iter().map(Into::into).collect()
        };
        self.body_pitch = pitch.into();
    }

    /// Converts to SI/radians, builds the morphology and collects warnings.
    /// Relative file paths are taken from `base`.
    pub fn resolve(&self, base: &Path) -> Result<(Scenario, Vec<String>)> {
        let schema = |m: String| Error::Schema(m);
        let k = &self.kinematics;
        let expected = if k.paired { 2 } else { 4 };
        if k.wings.len() != expected {
            return Err(schema(format!(
                "kinematics.wings needs {expected} entries when paired = {}, found {}",
                k.paired,
                k.wings.len()
            )));
        }
        let w: Vec<WingWaveform> = k.wings.iter().map(Into::into).collect();
        let waveforms = if k.paired { [w[0], w[0], w[1], w[1]] } else { [w[0], w[1], w[2], w[3]] };
        for (i, wf) in waveforms.iter().enumerate() {
            wf.check_invariants().map_err(|m| schema(format!("wing {}: {m}", i + 1)))?;
        }
        if waveforms.iter().any(|x| x.f != waveforms[0].f) {
            return Err(schema("all wings must share the flapping frequency".into()));
        }
        let kinematics = WingKinematics { waveforms, mode: k.derivative_mode };
        let pitch: BodyPitch = (&self.body_pitch).into();

        let it = &self.integrator;
        if !(it.dt > 0.0 && it.dt.is_finite()) {
            return Err(schema(format!("integrator.dt = {} must be > 0", it.dt)));
        }
        if let Some(d) = it.duration {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(schema(format!("integrator.duration = {d} must be >= 0")));
            }
        }
        if !(it.periods >= 0.0 && it.periods.is_finite()) {
            return Err(schema(format!("integrator.periods = {} must be >= 0", it.periods)));
        }
        if self.output.stride == 0 {
            return Err(schema("output.stride must be at least 1".into()));
        }
        let aero = AeroModel { rho: self.aero.rho, stations: self.aero.stations, trig_units: self.aero.trig_units };
        aero.validate()?;
        let mut optimization = self.optimization.clone();
        optimization.seed = self.seed;
        optimization.validate()?;

        let morph = self.morphology.build(base)?;
        let mut warnings = morph.validate()?;
        if it.validate_bounds {
            for (i, wf) in self.kinematics_labels().iter().zip(w.iter()) {
                for v in wf.bound_violations() {
                    warnings.push(format!("{i}: {v}"));
                }
            }
            for v in pitch.bound_violations() {
                warnings.push(format!("body pitch: {v}"));
            }
        }
        if self.strict && !warnings.is_empty() {
            return Err(Error::Bounds(warnings.join("; ")));
        }
        let scenario = Scenario {
            morph,
            aero,
            convention: self.aero.force_convention,
            kinematics,
            pitch,
            initial: self.initial,
            integrator: self.integrator,
            output: self.output.clone(),
            optimization,
            seed: self.seed,
        };
        Ok((scenario, warnings))
    }

    fn kinematics_labels(&self) -> Vec<String> {
        if self.kinematics.paired {
            vec!["fore wings".into(), "hind wings".into()]
        } else {
            (1..=4).map(|i| format!("wing {i}")).collect()
        }
    }
}

impl MorphologyConfig {
    fn build(&self, base: &Path) -> Result<Morphology> {
        let bad = |m: String| Error::InvalidMorphology(m);
        if !(self.chord_scale > 0.0 && self.chord_scale.is_finite()) {
            return Err(bad(format!("chord_scale = {} must be > 0", self.chord_scale)));
        }
        let mut morph = default_dragonfly(self.inertia_mode);
        let shapes = default_shapes(self.chord_scale)?;
        for (w, s) in morph.wings.iter_mut().zip(shapes) {
            w.shape = s;
        }
        morph.g = self.gravity;
        if let Some(m) = self.body_mass {
            morph.body_mass = m;
        }
        if let Some(j) = self.body_inertia {
            morph.body_inertia = Mat3::from_diagonal(&Vec3::from(j));
        }
        if let Some(wings) = &self.wings {
            if wings.len() != 4 {
                return Err(Error::Schema(format!("morphology.wings needs 4 entries, found {}", wings.len())));
            }
            for (i, wc) in wings.iter().enumerate() {
                morph.wings[i] = wc.build(i, self.chord_scale, base)?;
            }
        }
        if let Some(areas) = self.reference_area {
            for (i, w) in morph.wings.iter_mut().enumerate() {
                w.shape = w.shape.clone().with_reference_area(areas[i / 2])?;
            }
        }
        Ok(morph)
    }
}

fn read_edge(path: &Path, base: &Path) -> Result<Vec<f64>> {
    let full = if path.is_absolute() { path.to_path_buf() } else { base.join(path) };
    let text = std::fs::read_to_string(&full).map_err(|e| Error::Io { path: full.display().to_string(), source: e })?;
    Ok(fit_polynomial(&parse_contour_points(&text)?, 7)?.coeffs)
}

impl WingConfig {
    fn build(&self, i: usize, chord_scale: f64, base: &Path) -> Result<Wing> {
        let edge = |coeffs: &Option<Vec<f64>>, file: &Option<PathBuf>, which: &str| -> Result<Vec<f64>> {
            match (coeffs, file) {
                (Some(c), None) => Ok(c.clone()),
                (None, Some(f)) => read_edge(f, base),
                _ => Err(Error::Schema(format!(
                    "wing {}: give exactly one of {which}_edge and {which}_edge_file",
                    i + 1
                ))),
            }
        };
        let le = edge(&self.leading_edge, &self.leading_edge_file, "leading")?;
        let te = edge(&self.trailing_edge, &self.trailing_edge_file, "trailing")?;
        let shape = WingShape::new(le, te, self.span, chord_scale, Side::of_wing(i))?;
        let inertia = Mat3::from_fn(|r, c| self.inertia[r][c]);
        Ok(Wing { mass: self.mass, inertia, mu: Vec3::from(self.mu), kappa: Vec3::from(self.kappa), shape })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_a_parse_error() {
        assert!(matches!(parse_config(""), Err(Error::Parse(_))));
        assert!(matches!(parse_config("  \n"), Err(Error::Parse(_))));
        assert!(matches!(parse_config("seed = = 3"), Err(Error::Parse(_))));
    }

    #[test]
    fn unknown_and_missing_fields_are_schema_errors() {
        let mut text = to_toml(&RunConfig::reference());
        assert!(parse_config(&text).is_ok());
        text.push_str("\n[extra]\nx = 1\n");
        assert!(matches!(parse_config(&text), Err(Error::Schema(_))));
        let no_version = to_toml(&RunConfig::reference()).replace("schema_version = 1", "");
        match parse_config(&no_version) {
            Err(Error::Schema(m)) => assert!(m.contains("schema_version"), "{m}"),
            other => panic!("{other:?}"),
        }
        let future = to_toml(&RunConfig::reference()).replace("schema_version = 1", "schema_version = 9");
        assert!(matches!(parse_config(&future), Err(Error::Schema(_))));
    }

    #[test]
    fn reference_round_trips() {
        let cfg = RunConfig::reference();
        let back = parse_config(&to_toml(&cfg)).unwrap();
        assert_eq!(back, cfg);
        let (s, w) = cfg.resolve(Path::new(".")).unwrap();
        assert!(w.is_empty(), "{w:?}");
        let (kin, pitch) = crate::kinematics::reference_hover();
        for k in 0..4 {
            for name in ["phi_m", "theta_0", "beta", "phi_k", "theta_c", "f"] {
                let a = s.kinematics.waveforms[k].field(name).unwrap();
                let b = kin.waveforms[k].field(name).unwrap();
                assert!((a - b).abs() < 1e-15, "{name}");
            }
        }
        assert!((s.pitch.offset - pitch.offset).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_flapping_amplitude_warns() {
        let mut cfg = RunConfig::reference();
        cfg.kinematics.wings[0].phi_m = 90.0;
        let (_, w) = cfg.resolve(Path::new(".")).unwrap();
        assert_eq!(w.len(), 1);
        assert!(w[0].contains("phi_m = 90°") && w[0].contains("[30°, 60°]"), "{}", w[0]);
        cfg.strict = true;
        assert!(matches!(cfg.resolve(Path::new(".")), Err(Error::Bounds(_))));
    }

    #[test]
    fn literal_inertias_warn_once_per_wing() {
        let mut cfg = RunConfig::reference();
        cfg.morphology.inertia_mode = InertiaMode::Tabulated;
        let (_, w) = cfg.resolve(Path::new(".")).unwrap();
        assert_eq!(w.len(), 4);
        assert!(w.iter().all(|x| x.contains("m·l²")));
    }

    #[test]
    fn wing_count_must_match_pairing() {
        let mut cfg = RunConfig::reference();
        cfg.kinematics.paired = false;
        assert!(matches!(cfg.resolve(Path::new(".")), Err(Error::Schema(_))));
        let w = cfg.kinematics.wings.clone();
        cfg.kinematics.wings = vec![w[0], w[0], w[1], w[1]];
        let (s, _) = cfg.resolve(Path::new(".")).unwrap();
        assert_eq!(s.kinematics.waveforms[1], s.kinematics.waveforms[0]);
    }

    #[test]
    fn inline_wings_with_contour_files() {
        let dir = tempfile::tempdir().unwrap();
        let pts: String = (0..=20)
            .map(|i| {
                let s = i as f64 / 20.0;
                format!("{s} {}\n", 0.2 - 0.1 * s)
            })
            .collect();
        std::fs::write(dir.path().join("le.txt"), &pts).unwrap();
        let mut cfg = RunConfig::reference();
        let wing = |sign: f64| WingConfig {
            mass: 2e-6,
            inertia: [[1e-10, 0.0, 0.0], [0.0, 1e-10, 0.0], [0.0, 0.0, 2e-10]],
            mu: [0.0, sign * 3e-3, 0.0],
            kappa: [0.0, sign * 5e-3, 0.0],
            span: 0.02,
            leading_edge: None,
            trailing_edge: Some(vec![-0.3]),
            leading_edge_file: Some(PathBuf::from("le.txt")),
            trailing_edge_file: None,
        };
        cfg.morphology.wings = Some(vec![wing(1.0), wing(-1.0), wing(1.0), wing(-1.0)]);
        let (s, _) = cfg.resolve(dir.path()).unwrap();
        let c = s.morph.wings[0].shape.chord_geometry(0.01).unwrap();
        assert!((c.chord - 0.01 * (0.2 - 0.05 + 0.3)).abs() < 1e-12, "{}", c.chord);
        cfg.morphology.wings.as_mut().unwrap()[1].leading_edge_file = Some(PathBuf::from("missing.txt"));
        assert!(matches!(cfg.resolve(dir.path()), Err(Error::Io { .. })));
    }

    #[test]
    fn reference_area_sets_chord_scale_per_wing() {
        let mut cfg = RunConfig::reference();
        cfg.morphology.reference_area = Some([2e-4, 3e-4]);
        let (s, _) = cfg.resolve(Path::new(".")).unwrap();
        for (i, w) in s.morph.wings.iter().enumerate() {
            let want = if i < 2 { 2e-4 } else { 3e-4 };
            assert!((w.shape.area() - want).abs() < 1e-9 * want, "wing {i}: {}", w.shape.area());
        }
        let back = parse_config(&to_toml(&cfg)).unwrap();
        assert_eq!(back.morphology.reference_area, Some([2e-4, 3e-4]));
    }

    #[test]
    fn shipped_config_loads_cleanly() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/dragonfly_hover.cfg");
        let loaded = load_config(&path).unwrap();
        assert!(loaded.warnings.is_empty(), "{:?}", loaded.warnings);
        let mut want = RunConfig::reference();
        want.seed = 42;
        let (a, _) = want.resolve(Path::new(".")).unwrap();
        for k in 0..4 {
            for name in ["phi_m", "theta_a", "psi_a", "beta", "phi_k", "theta_c", "f"] {
                let x = loaded.scenario.kinematics.waveforms[k].field(name).unwrap();
                let y = a.kinematics.waveforms[k].field(name).unwrap();
                assert!((x - y).abs() < 1e-14, "{name}");
            }
        }
        let back = parse_config(&to_toml(&loaded.config)).unwrap();
        assert_eq!(back, loaded.config);
    }
}
