//! Dragonfly morphology: masses, inertias, joint and center-of-mass offsets,
//! and the fitted wing planforms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::so3::{Mat3, Vec3};
use crate::wing_geometry::{Side, WingShape};

/// Fore-wing leading-edge coefficients `λ₀..λ₇` on the normalized span.
pub const FORE_LE: [f64; 8] = [-0.873, 5.648, -13.85, 15.16, -6.111, -0.579, 1.789, 0.122];
pub const FORE_TE: [f64; 8] = [2.133, -12.12, 26.20, -26.25, -11.47, -0.728, -0.429, -0.096];
pub const HIND_LE: [f64; 8] = [-0.214, 1.8389, -6.153, 9.981, -7.857, 2.625, 0.051, 0.140];
pub const HIND_TE: [f64; 8] = [0.183, -1.372, 3.574, -3.016, -2.210, 5.627, -3.164, -0.082];

/// Fit-quality figures published with the coefficients (fore LE, fore TE,
/// hind LE, hind TE). Whether they are a residual MSE or `1 − R²` is not
/// known, so they are carried as opaque metadata.
pub const EDGE_FIT_QUALITY: [f64; 4] = [0.006, 0.028, 0.006, 0.012];

pub const GRAVITY: f64 = 9.81;
pub const AIR_DENSITY: f64 = 1.2;
pub const BODY_MASS: f64 = 5.4483e-5;
pub const FORE_WING_MASS: f64 = 1.9069e-6;
pub const HIND_WING_MASS: f64 = 2.3126e-6;
pub const FORE_SPAN: f64 = 0.0185;
pub const HIND_SPAN: f64 = 0.025;
/// Metres per polynomial unit in the shipped planforms.
pub const DEFAULT_CHORD_SCALE: f64 = 0.01;
/// Factor applied to the tabulated wing inertias in [`InertiaMode::Rescaled`].
pub const INERTIA_RESCALE: f64 = 1e-6;

/// Which wing-inertia set to use.
///
/// The tabulated wing inertias are of order 1e-4 kg·m², six orders of
/// magnitude above what a 2 mg wing spanning 2 cm can carry (`m l² ≈ 1e-9`).
/// `Tabulated` keeps them verbatim as joint inertias. `Rescaled`
/// multiplies them by 1e-6 and reads the result as the inertia about the wing
/// center of mass, moved to the joint with the parallel-axis theorem. Reading
/// the rescaled values directly as joint inertias would leave the fore wings
/// with an indefinite center-of-mass inertia and the system with a kinetic
/// energy that can be negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InertiaMode {
    Tabulated,
    #[default]
    Rescaled,
}

impl InertiaMode {
    pub fn factor(self) -> f64 {
        match self {
            InertiaMode::Tabulated => 1.0,
            InertiaMode::Rescaled => INERTIA_RESCALE,
        }
    }
}

/// One wing as a rigid body attached to the main body by a spherical joint.
#[derive(Debug, Clone, PartialEq)]
pub struct Wing {
    pub mass: f64,
    /// Inertia about the joint, in the wing frame.
    pub inertia: Mat3,
    /// Joint position in the body frame.
    pub mu: Vec3,
    /// Center of mass in the wing frame.
    pub kappa: Vec3,
    pub shape: WingShape,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Morphology {
    pub body_mass: f64,
    pub body_inertia: Mat3,
    pub wings: [Wing; 4],
    pub g: f64,
}

fn wing_inertia(xx: f64, xy: f64, yy: f64, zz: f64, side: Side, scale: f64) -> Mat3 {
    let s = side.parity();
    Mat3::new(xx, s * xy, 0.0, s * xy, yy, 0.0, 0.0, 0.0, zz) * (1e-3 * scale)
}

/// Fore (`i = 0, 1`) and hind (`i = 2, 3`) planforms with the given chord scale.
pub fn default_shapes(chord_scale: f64) -> Result<[WingShape; 4]> {
    let fore = WingShape::new(FORE_LE.to_vec(), FORE_TE.to_vec(), FORE_SPAN, chord_scale, Side::Right)?;
    let hind = WingShape::new(HIND_LE.to_vec(), HIND_TE.to_vec(), HIND_SPAN, chord_scale, Side::Right)?;
    Ok([fore.clone(), fore.mirrored(), hind.clone(), hind.mirrored()])
}

/// The reference dragonfly.
pub fn default_dragonfly(mode: InertiaMode) -> Morphology {
    let shapes = default_shapes(DEFAULT_CHORD_SCALE).expect("shipped planforms are valid");
    let k = mode.factor();
    let wings = std::array::from_fn(|i| {
        let side = Side::of_wing(i);
        let s = side.parity();
        let fore = i < 2;
        let (mass, mu_x, kappa, inertia) = if fore {
            (
                FORE_WING_MASS,
                2.71e-3,
                Vec3::new(7.978e-3, s * 4.975e-3, 0.0),
                wing_inertia(0.2303, 0.1902, 0.1731, 0.4034, side, k),
            )
        } else {
            (
                HIND_WING_MASS,
                -2.71e-3,
                Vec3::new(1.175e-3, s * 5.89e-3, 0.0),
                wing_inertia(0.4164, 0.0693, 0.0326, 0.4489, side, k),
            )
        };
        let inertia = match mode {
            InertiaMode::Tabulated => inertia,
            InertiaMode::Rescaled => inertia + parallel_axis(mass, &kappa),
        };
        Wing { mass, inertia, mu: Vec3::new(mu_x, s * 3.8e-3, 0.0), kappa, shape: shapes[i].clone() }
    });
    Morphology {
        body_mass: BODY_MASS,
        body_inertia: Mat3::from_diagonal(&Vec3::new(0.0109, 0.2847, 0.2847)) * 1e-8,
        wings,
        g: GRAVITY,
    }
}

/// `m (‖κ‖² I − κ κᵀ)`: moves an inertia from the center of mass to a point
/// offset by `−κ`.
pub fn parallel_axis(mass: f64, kappa: &Vec3) -> Mat3 {
    (Mat3::identity() * kappa.norm_squared() - kappa * kappa.transpose()) * mass
}

fn is_spd(m: &Mat3) -> bool {
    let sym = (m - m.transpose()).amax() <= 1e-12 * m.amax();
    sym && m.symmetric_eigenvalues().iter().all(|&e| e > 0.0)
}

impl Morphology {
    pub fn total_mass(&self) -> f64 {
        self.body_mass + self.wings.iter().map(|w| w.mass).sum::<f64>()
    }

    /// Checks the hard invariants and returns the soft ones as warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let bad = |msg: String| Err(Error::InvalidMorphology(msg));
        if self.body_mass.is_nan() || self.body_mass <= 0.0 {
            return bad(format!("body mass {} must be > 0", self.body_mass));
        }
        if !is_spd(&self.body_inertia) {
            return bad("body inertia must be symmetric positive definite".into());
        }
        if !(self.g.is_finite() && self.g >= 0.0) {
            return bad(format!("gravity {} must be finite and >= 0", self.g));
        }
        let mut warnings = Vec::new();
        for (i, w) in self.wings.iter().enumerate() {
            let n = i + 1;
            if w.mass.is_nan() || w.mass <= 0.0 {
                return bad(format!("wing {n} mass {} must be > 0", w.mass));
            }
            if !is_spd(&w.inertia) {
                return bad(format!("wing {n} inertia must be symmetric positive definite"));
            }
            if w.shape.side() != Side::of_wing(i) {
                return bad(format!("wing {n} planform is on the wrong side"));
            }
            let bound = w.mass * w.shape.span_length().powi(2);
            // largest moment about any joint axis
            let norm = w.inertia.symmetric_eigenvalues().max();
            if norm > bound {
                warnings.push(format!(
                    "wing {n} inertia {norm:.4e} kg·m² exceeds the rigid-body bound m·l² = {bound:.4e} kg·m²"
                ));
            }
        }
        Ok(warnings)
    }

    /// Wings whose center-of-mass inertia `J + m κ̂²` is not positive definite.
    ///
    /// Such a wing is not a physical rigid body and the system mass matrix
    /// can lose positive definiteness.
    pub fn indefinite_cm_inertia(&self) -> Vec<usize> {
        (0..4)
            .filter(|&i| {
                let w = &self.wings[i];
                let k = crate::so3::hat(&w.kappa);
                let jcm = w.inertia + k * k * w.mass;
                jcm.symmetric_eigenvalues().iter().any(|&e| e <= 0.0)
            })
            .collect()
    }

    /// Copy with every wing mass and mass offset set to zero.
    pub fn massless_wings(&self) -> Self {
        let mut m = self.clone();
        for w in &mut m.wings {
            w.mass = 0.0;
            w.kappa = Vec3::zeros();
        }
        m
    }
}
