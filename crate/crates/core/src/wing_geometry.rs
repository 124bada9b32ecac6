//! Wing planform: leading/trailing-edge polynomials, chord, chord points.
//!
//! Each wing is a flat plate in the `x–y` plane of its own frame. The edge
//! polynomials are evaluated on the normalized span `s = r / l` and scaled by
//! `chord_scale` (metres per polynomial unit).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::so3::Vec3;

/// Right wings (1, 3) carry `+1`, left wings (2, 4) carry `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Right,
    Left,
}

impl Side {
    /// Side of wing `i` (0-based index into the four wings).
    pub fn of_wing(i: usize) -> Side {
        if i.is_multiple_of(2) {
            Side::Right
        } else {
            Side::Left
        }
    }

    #[inline]
    pub fn parity(self) -> f64 {
        match self {
            Side::Right => 1.0,
            Side::Left => -1.0,
        }
    }
}

/// Horner evaluation of `Σ c_j s^j`.
pub fn poly_eval(coeffs: &[f64], s: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WingShape {
    lambda_le: Vec<f64>,
    lambda_te: Vec<f64>,
    span_length: f64,
    chord_scale: f64,
    side: Side,
}

/// Edge positions and clamped chord at a span station, in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChordGeometry {
    pub q_le: f64,
    pub q_te: f64,
    pub chord: f64,
}

impl WingShape {
    /// Builds a shape; both coefficient lists are padded to the same degree.
    pub fn new(
        mut lambda_le: Vec<f64>,
        mut lambda_te: Vec<f64>,
        span_length: f64,
        chord_scale: f64,
        side: Side,
    ) -> Result<Self> {
        if !(span_length > 0.0 && span_length.is_finite()) {
            return Err(Error::InvalidShape(format!("span length {span_length} must be > 0")));
        }
        if !(chord_scale > 0.0 && chord_scale.is_finite()) {
            return Err(Error::InvalidShape(format!("chord scale {chord_scale} must be > 0")));
        }
        if lambda_le.is_empty() || lambda_te.is_empty() {
            return Err(Error::InvalidShape("empty edge polynomial".into()));
        }
        let n = lambda_le.len().max(lambda_te.len());
        lambda_le.resize(n, 0.0);
        lambda_te.resize(n, 0.0);
        let shape = Self { lambda_le, lambda_te, span_length, chord_scale, side };
        let mean = shape.mean_chord();
        if mean.is_nan() || mean <= 0.0 {
            return Err(Error::InvalidShape(format!("mean chord {mean} must be > 0")));
        }
        let clamped = shape.clamped_intervals();
        if !clamped.is_empty() {
            log::debug!("negative raw chord clamped to zero on {clamped:?} (m)");
        }
        Ok(shape)
    }

    /// Same planform on the opposite side of the body.
    pub fn mirrored(&self) -> Self {
        let side = match self.side {
            Side::Right => Side::Left,
            Side::Left => Side::Right,
        };
        Self { side, ..self.clone() }
    }

    pub fn span_length(&self) -> f64 {
        self.span_length
    }
    pub fn chord_scale(&self) -> f64 {
        self.chord_scale
    }
    pub fn side(&self) -> Side {
        self.side
    }
    pub fn lambda_le(&self) -> &[f64] {
        &self.lambda_le
    }
    pub fn lambda_te(&self) -> &[f64] {
        &self.lambda_te
    }
    pub fn degree(&self) -> usize {
        self.lambda_le.len() - 1
    }

    /// Rescales the chord so that the (clamped) planform area equals `area`.
    pub fn with_reference_area(mut self, area: f64) -> Result<Self> {
        let current = self.area();
        if area.is_nan() || area <= 0.0 || current.is_nan() || current <= 0.0 {
            return Err(Error::InvalidShape(format!("cannot match reference area {area}")));
        }
        self.chord_scale *= area / current;
        Ok(self)
    }

    fn check_span(&self, r: f64) -> Result<()> {
        // tolerate rounding at the tip
        if !(r >= 0.0 && r <= self.span_length * (1.0 + 1e-12)) {
            return Err(Error::OutOfSpan { r, span: self.span_length });
        }
        Ok(())
    }

    /// Raw (unscaled) edge polynomial values at normalized span `s`.
    pub fn raw_edges(&self, s: f64) -> (f64, f64) {
        (poly_eval(&self.lambda_le, s), poly_eval(&self.lambda_te, s))
    }

    pub fn chord_geometry(&self, r: f64) -> Result<ChordGeometry> {
        self.check_span(r)?;
        Ok(self.chord_geometry_unchecked(r))
    }

    #[inline]
    pub(crate) fn chord_geometry_unchecked(&self, r: f64) -> ChordGeometry {
        let (le, te) = self.raw_edges(r / self.span_length);
        let q_le = le * self.chord_scale;
        let q_te = te * self.chord_scale;
        ChordGeometry { q_le, q_te, chord: (q_le - q_te).max(0.0) }
    }

    /// `(q_LE − γ c) e₁ + parity · r e₂`.
    pub fn chord_point(&self, r: f64, gamma: f64) -> Result<Vec3> {
        self.check_span(r)?;
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::GammaOutOfRange(gamma));
        }
        Ok(self.chord_point_unchecked(r, gamma))
    }

    #[inline]
    pub(crate) fn chord_point_unchecked(&self, r: f64, gamma: f64) -> Vec3 {
        let g = self.chord_geometry_unchecked(r);
        Vec3::new(g.q_le - gamma * g.chord, self.side.parity() * r, 0.0)
    }

    /// Planform area of the clamped chord, by 2000-point midpoint rule.
    pub fn area(&self) -> f64 {
        const N: usize = 2000;
        let h = self.span_length / N as f64;
        (0..N).map(|k| self.chord_geometry_unchecked((k as f64 + 0.5) * h).chord).sum::<f64>() * h
    }

    pub fn mean_chord(&self) -> f64 {
        self.area() / self.span_length
    }

    /// Sub-intervals of `[0, l]` (metres) where `q_LE < q_TE` and the chord is
    /// clamped to zero. Boundaries are located by bisection.
    pub fn clamped_intervals(&self) -> Vec<(f64, f64)> {
        const N: usize = 400;
        let raw = |s: f64| {
            let (le, te) = self.raw_edges(s);
            le - te
        };
        let root = |mut a: f64, mut b: f64| {
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                if (raw(a) < 0.0) == (raw(m) < 0.0) {
                    a = m;
                } else {
                    b = m;
                }
            }
            0.5 * (a + b)
        };
        let mut out = Vec::new();
        let mut start: Option<f64> = if raw(0.0) < 0.0 { Some(0.0) } else { None };
        for k in 1..=N {
            let (s0, s1) = ((k - 1) as f64 / N as f64, k as f64 / N as f64);
            let (neg0, neg1) = (raw(s0) < 0.0, raw(s1) < 0.0);
            if neg0 != neg1 {
                let s = root(s0, s1);
                match start.take() {
                    Some(a) => out.push((a, s)),
                    None => start = Some(s),
                }
            }
        }
        if let Some(a) = start {
            out.push((a, 1.0));
        }
        out.into_iter().map(|(a, b)| (a * self.span_length, b * self.span_length)).collect()
    }
}

/// Least-squares fit of one edge.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFit {
    pub coeffs: Vec<f64>,
    /// Mean squared residual.
    pub mse: f64,
    /// Coefficient of determination (1 for an exact fit of constant data).
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanformFit {
    pub leading: EdgeFit,
    pub trailing: EdgeFit,
}

/// Fits degree-`degree` polynomials to `(s, x)` contour points of both edges.
pub fn fit_edge_polynomials(points_le: &[(f64, f64)], points_te: &[(f64, f64)], degree: usize) -> Result<PlanformFit> {
    Ok(PlanformFit { leading: fit_polynomial(points_le, degree)?, trailing: fit_polynomial(points_te, degree)? })
}

/// Polynomial least squares via Householder QR of the Vandermonde matrix.
pub fn fit_polynomial(points: &[(f64, f64)], degree: usize) -> Result<EdgeFit> {
    let ncoef = degree + 1;
    let mut abscissae: Vec<f64> = points.iter().map(|p| p.0).collect();
    abscissae.sort_by(|a, b| a.total_cmp(b));
    abscissae.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
    if abscissae.len() < ncoef {
        return Err(Error::RankDeficient(format!("{} distinct abscissae for {} coefficients", abscissae.len(), ncoef)));
    }
    if points.iter().any(|(s, x)| !s.is_finite() || !x.is_finite()) {
        return Err(Error::RankDeficient("non-finite contour point".into()));
    }
    let m = points.len();
    let v = DMatrix::from_fn(m, ncoef, |row, col| points[row].0.powi(col as i32));
    let y = DVector::from_iterator(m, points.iter().map(|p| p.1));
    let qr = v.clone().qr();
    let r = qr.r();
    let rmax = r.diagonal().amax();
    if r.diagonal().iter().any(|d| d.abs() <= 1e-13 * rmax) {
        return Err(Error::RankDeficient("degenerate abscissae".into()));
    }
    let qty = qr.q().transpose() * &y;
    let coeffs =
        r.solve_upper_triangular(&qty).ok_or_else(|| Error::RankDeficient("triangular solve failed".into()))?;
    let resid = &v * &coeffs - &y;
    let ss_res = resid.norm_squared();
    let mean = y.mean();
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(EdgeFit { coeffs: coeffs.iter().copied().collect(), mse: ss_res / m as f64, r_squared })
}

/// Parses a two-column `(s, x)` contour file. `#` starts a comment; columns
/// may be separated by whitespace or commas.
pub fn parse_contour_points(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|c| !c.is_empty()).collect();
        if cols.len() != 2 {
            return Err(Error::Parse(format!("line {}: expected two columns", lineno + 1)));
        }
        let parse = |c: &str| c.parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)));
        out.push((parse(cols[0])?, parse(cols[1])?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morphology::{FORE_LE, FORE_TE};
    use proptest::prelude::*;

    fn fore(side: Side) -> WingShape {
        WingShape::new(FORE_LE.to_vec(), FORE_TE.to_vec(), 0.0185, 0.01, side).unwrap()
    }

    #[test]
    fn fore_wing_raw_edges_at_root_and_tip() {
        let w = fore(Side::Right);
        assert_eq!(w.raw_edges(0.0).0, -0.873);
        // eight tabulated leading-edge coefficients sum to 1.306
        assert!((w.raw_edges(1.0).0 - 1.306).abs() < 1e-12);
        let g = w.chord_geometry(0.0).unwrap();
        assert!((g.q_le - (-0.873 * 0.01)).abs() < 1e-15);
        assert_eq!(g.chord, 0.0);
    }

    #[test]
    fn fore_wing_root_is_clamped() {
        let w = fore(Side::Right);
        let clamped = w.clamped_intervals();
        assert_eq!(clamped.len(), 1);
        let (a, b) = clamped[0];
        assert_eq!(a, 0.0);
        assert!(b > 0.0 && b < w.span_length());
        let (le, te) = w.raw_edges(b / w.span_length());
        assert!((le - te).abs() < 1e-9);
    }

    #[test]
    fn degenerate_planform_has_zero_chord_and_is_rejected() {
        let c = vec![0.3, 0.1];
        assert!(matches!(WingShape::new(c.clone(), c, 0.02, 0.01, Side::Right), Err(Error::InvalidShape(_))));
        let w = WingShape::new(vec![0.3, 0.1], vec![-0.2], 0.02, 0.01, Side::Right).unwrap();
        assert!(w.chord_geometry(0.01).unwrap().chord > 0.0);
    }

    #[test]
    fn identical_edges_give_zero_chord() {
        // bypasses the constructor check to probe the raw formula
        let w = WingShape {
            lambda_le: vec![0.2, 0.5, -0.1],
            lambda_te: vec![0.2, 0.5, -0.1],
            span_length: 0.02,
            chord_scale: 0.01,
            side: Side::Left,
        };
        for k in 0..=10 {
            assert_eq!(w.chord_geometry(0.002 * k as f64).unwrap().chord, 0.0);
        }
    }

    #[test]
    fn chord_point_edges_and_parity() {
        let r = 0.015;
        let right = fore(Side::Right);
        let left = fore(Side::Left);
        let g = right.chord_geometry(r).unwrap();
        assert_eq!(right.chord_point(r, 0.0).unwrap(), Vec3::new(g.q_le, r, 0.0));
        assert!((right.chord_point(r, 1.0).unwrap() - Vec3::new(g.q_te, r, 0.0)).norm() < 1e-15);
        let a = right.chord_point(r, 0.3).unwrap();
        let b = left.chord_point(r, 0.3).unwrap();
        assert_eq!(a.x, b.x);
        assert_eq!(a.y, -b.y);
    }

    #[test]
    fn span_and_gamma_are_checked() {
        let w = fore(Side::Right);
        assert!(matches!(w.chord_geometry(-1e-6), Err(Error::OutOfSpan { .. })));
        assert!(matches!(w.chord_point(0.019, 0.5), Err(Error::OutOfSpan { .. })));
        assert!(matches!(w.chord_point(0.01, 1.5), Err(Error::GammaOutOfRange(_))));
    }

    #[test]
    fn reference_area_rescales_chord() {
        let w = fore(Side::Right).with_reference_area(1e-4).unwrap();
        assert!((w.area() - 1e-4).abs() < 1e-12);
    }

    #[test]
    fn exact_polynomial_is_recovered() {
        let truth = [0.4, -1.2, 3.0, 0.7, -2.5, 1.1];
        let pts: Vec<_> = (0..40)
            .map(|k| {
                let s = k as f64 / 39.0;
                (s, poly_eval(&truth, s))
            })
            .collect();
        let fit = fit_polynomial(&pts, 5).unwrap();
        for (a, b) in fit.coeffs.iter().zip(truth) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
        assert!(fit.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn constant_points_give_constant_fit() {
        let pts: Vec<_> = (0..10).map(|k| (k as f64 * 0.1, 2.5)).collect();
        let fit = fit_polynomial(&pts, 3).unwrap();
        assert!((fit.coeffs[0] - 2.5).abs() < 1e-12);
        assert!(fit.coeffs[1..].iter().all(|c| c.abs() < 1e-10));
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn tabulated_fore_edge_refit_round_trips() {
        let pts: Vec<_> = (0..50)
            .map(|k| {
                let s = k as f64 / 49.0;
                (s, poly_eval(&FORE_LE, s))
            })
            .collect();
        let fit = fit_edge_polynomials(&pts, &pts, 7).unwrap();
        assert!(fit.leading.mse.sqrt() <= 1e-10);
        for (a, b) in fit.leading.coeffs.iter().zip(FORE_LE) {
            assert!((a - b).abs() < 1e-7);
        }
    }

    #[test]
    fn too_few_abscissae_is_rank_deficient() {
        let pts = vec![(0.1, 1.0), (0.1, 2.0), (0.5, 0.0)];
        assert!(matches!(fit_polynomial(&pts, 2), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn contour_parsing() {
        let pts = parse_contour_points("# s x\n0.0 1.5\n0.5, 2\n\n1 3 # tip\n").unwrap();
        assert_eq!(pts, vec![(0.0, 1.5), (0.5, 2.0), (1.0, 3.0)]);
        assert!(parse_contour_points("1 2 3").is_err());
        assert!(parse_contour_points("a b").is_err());
    }

    proptest! {
        #[test]
        fn chord_points_lie_in_the_plate(r in 0.0..0.0185f64, gamma in 0.0..1.0f64) {
            let w = fore(Side::Left);
            let p = w.chord_point(r, gamma).unwrap();
            prop_assert_eq!(p.z, 0.0);
            let g = w.chord_geometry(r).unwrap();
            let span = w.chord_point(r, 0.0).unwrap().x - w.chord_point(r, 1.0).unwrap().x;
            prop_assert!((span - g.chord).abs() < 1e-15);
        }

        #[test]
        fn fit_is_the_exact_minimizer(k in 0usize..6, sign in prop::bool::ANY) {
            let pts: Vec<_> = (0..30).map(|i| {
                let s = i as f64 / 29.0;
                (s, (3.0 * s).sin() + 0.2 * s)
            }).collect();
            let fit = fit_polynomial(&pts, 5).unwrap();
            let sse = |c: &[f64]| pts.iter().map(|(s, x)| (poly_eval(c, *s) - x).powi(2)).sum::<f64>();
            let base = sse(&fit.coeffs);
            let mut c = fit.coeffs.clone();
            c[k] += if sign { 1e-4 } else { -1e-4 };
            prop_assert!(sse(&c) >= base);
        }
    }
}
