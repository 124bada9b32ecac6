//! Three views of the model for the browser page in `www/`.
//!
//! Every function returns a flat `Float64Array` of rows; the row layout is
//! given in each doc comment.

use wasm_bindgen::prelude::*;

use ornithopter::aero::{gamma_ac, AeroModel};
use ornithopter::kinematics::{reference_fore, reference_hind, WingWaveform};
use ornithopter::morphology::default_shapes;

/// Lift and drag coefficients and aerodynamic-center fraction over
/// `α ∈ [0°, 180°]`. Rows: `[α (deg), C_L, C_D, γ_ac]`.
#[wasm_bindgen]
pub fn coefficient_curves(samples: usize) -> Vec<f64> {
    let aero = AeroModel::default();
    let n = samples.max(2);
    let mut out = Vec::with_capacity(4 * n);
    for k in 0..n {
        let deg = 180.0 * k as f64 / (n - 1) as f64;
        let a = deg.to_radians();
        let (cl, cd) = aero.coefficients(a);
        out.extend_from_slice(&[deg, cl, cd, gamma_ac(a)]);
    }
    out
}

fn waveform(fore: bool) -> WingWaveform {
    if fore {
        reference_fore()
    } else {
        reference_hind()
    }
}

/// Flapping, pitching and deviation angles over one period of the
/// reference fore or hind waveform, with the three amplitudes (degrees)
/// replaced. Rows: `[t (ms), φ, θ, ψ (deg)]`.
#[wasm_bindgen]
pub fn wing_angles(fore: bool, samples: usize, phi_m: f64, theta_m: f64, psi_m: f64) -> Vec<f64> {
    let mut w = waveform(fore);
    w.phi_m = phi_m.to_radians();
    w.theta_m = theta_m.to_radians();
    w.psi_m = psi_m.to_radians();
    let n = samples.max(2);
    let period = w.period();
    let mut out = Vec::with_capacity(4 * n);
    for k in 0..n {
        let t = period * k as f64 / (n - 1) as f64;
        let a = w.angles(t);
        out.extend_from_slice(&[1e3 * t, a.phi.to_degrees(), a.theta.to_degrees(), a.psi.to_degrees()]);
    }
    out
}

/// Default amplitudes `[φ_m, θ_m, ψ_m]` in degrees, for slider defaults.
#[wasm_bindgen]
pub fn default_amplitudes(fore: bool) -> Vec<f64> {
    let w = waveform(fore);
    vec![w.phi_m.to_degrees(), w.theta_m.to_degrees(), w.psi_m.to_degrees()]
}

/// Leading and trailing edge of the right fore or hind wing for a chord
/// scale in metres per unit. Rows: `[r, x_LE, x_TE (mm)]`, with the trailing
/// edge clamped where the fitted edges cross. Empty for a scale ≤ 0.
#[wasm_bindgen]
pub fn planform(fore: bool, samples: usize, chord_scale: f64) -> Vec<f64> {
    let Ok(shapes) = default_shapes(chord_scale) else {
        return Vec::new();
    };
    let shape = &shapes[if fore { 0 } else { 2 }];
    let n = samples.max(2);
    let span = shape.span_length();
    let mut out = Vec::with_capacity(3 * n);
    for k in 0..n {
        let r = span * k as f64 / (n - 1) as f64;
        let Ok(g) = shape.chord_geometry(r) else { continue };
        out.extend_from_slice(&[1e3 * r, 1e3 * g.q_le, 1e3 * (g.q_le - g.chord)]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_layouts() {
        let c = coefficient_curves(181);
        assert_eq!(c.len(), 4 * 181);
        assert_eq!((c[0], c[4 * 180]), (0.0, 180.0));
        // symmetric about 90°
        assert!((c[4 * 10 + 1] - c[4 * 170 + 1]).abs() < 1e-12);

        let a = default_amplitudes(true);
        let w = wing_angles(true, 50, a[0], a[1], a[2]);
        assert_eq!(w.len(), 200);
        // one full period: last row repeats the first
        for j in 1..4 {
            assert!((w[j] - w[4 * 49 + j]).abs() < 1e-9);
        }

        let p = planform(false, 40, 0.01);
        assert_eq!(p.len(), 120);
        assert!(p.chunks(3).all(|r| r[2] <= r[1]));
        assert!(planform(true, 10, -1.0).is_empty());
    }

    #[test]
    fn amplitudes_bound_the_angles() {
        let w = wing_angles(false, 200, 20.0, 10.0, 5.0);
        let base = reference_hind();
        for r in w.chunks(4) {
            assert!((r[1] - base.phi_0.to_degrees()).abs() <= 20.0 + 1e-9);
            assert!((r[2] - base.theta_0.to_degrees()).abs() <= 10.0 + 1e-9);
            assert!((r[3] - base.psi_0.to_degrees()).abs() <= 5.0 + 1e-9);
        }
    }
}
