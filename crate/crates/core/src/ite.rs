//! Imaginary-time-evolution readout of weak values.
//!
//! An ND filter of intensity transmission `T` applied to the modes of a
//! projector `Π` realizes `e^{−Πt}` with `T = e^{−2t}`. The normalized
//! post-selection rate is
//!
//! ```text
//! N(t) = |⟨ψ_f|e^{−Πt}|ψ_i⟩|² / |⟨ψ_f|ψ_i⟩|² = |1 + (e^{−t} − 1)·w|²
//! ```
//!
//! with `w = ⟨Π⟩_w`, so `dN/dt` at the origin is `−2·Re w`.

use crate::duality::ORTHOGONALITY_TOL;
use crate::duality::{postselection, preselection, DualityParams, PathAttributeObservable};
use crate::error::{Error, Result};
use crate::fit::{least_squares_line, FitResult};
use crate::qstate::{
    inner_product, matrix_exponential, projector_exponential, Complex, LinearOperator, PureState,
};

/// Step of the finite-difference slope.
pub const FD_STEP: f64 = 1e-6;

/// Transmissions of the ND filters used for one attenuation curve.
#[derive(Clone, Debug, PartialEq)]
pub struct AttenuationSchedule {
    transmissions: Vec<f64>,
}

impl AttenuationSchedule {
    pub fn new(transmissions: Vec<f64>) -> Result<Self> {
        for &t in &transmissions {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::InvalidSchedule(format!(
                    "transmission {t} is outside (0, 1]"
                )));
            }
        }
        let distinct = transmissions
            .iter()
            .any(|&t| transmissions.iter().any(|&u| u != t));
        if !distinct {
            return Err(Error::InvalidSchedule(
                "need at least two distinct transmissions".into(),
            ));
        }
        Ok(Self { transmissions })
    }

    pub fn transmissions(&self) -> &[f64] {
        &self.transmissions
    }

    pub fn len(&self) -> usize {
        self.transmissions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transmissions.is_empty()
    }
}

impl Default for AttenuationSchedule {
    /// Five filters with `t ≤ 0.00604`, where the chord of `N(t)` deviates
    /// from the tangent by at most 0.61 % of `w` for `w ∈ [0, 1]`.
    fn default() -> Self {
        Self::new(vec![0.988, 0.991, 0.994, 0.997, 1.0]).unwrap()
    }
}

/// `t = −ln(T)/2`.
pub fn transmission_to_time(transmission: f64) -> Result<f64> {
    if !(transmission > 0.0 && transmission <= 1.0) {
        return Err(Error::domain("T", transmission, "(0, 1]"));
    }
    Ok(-transmission.ln() / 2.0 + 0.0)
}

/// `T = e^{−2t}`.
pub fn time_to_transmission(t: f64) -> Result<f64> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::domain("t", t, "[0, ∞)"));
    }
    Ok((-2.0 * t).exp())
}

fn evolution(a: &LinearOperator, t: f64) -> Result<LinearOperator> {
    match projector_exponential(a, t) {
        Err(Error::NotProjector { .. }) => Ok(matrix_exponential(&a.scale(Complex::new(-t, 0.0)))),
        other => other,
    }
}

/// Post-selection success rate under `e^{−At}`, relative to the undisturbed rate.
pub fn normalized_incidence(
    psi_i: &PureState,
    psi_f: &PureState,
    a: &LinearOperator,
    t: f64,
) -> Result<f64> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::domain("t", t, "[0, ∞)"));
    }
    let reference = inner_product(psi_f, psi_i)?;
    if reference.norm() < ORTHOGONALITY_TOL {
        return Err(Error::OrthogonalSelection {
            overlap: reference.norm(),
        });
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    let disturbed = inner_product(psi_f, &evolution(a, t)?.apply(psi_i)?)?;
    Ok(disturbed.norm_sqr() / reference.norm_sqr())
}

/// `|1 + (e^{−t} − 1)·w|²`, the exact rate for a projector with weak value `w`.
pub fn analytic_incidence(w: Complex, t: f64) -> f64 {
    (1.0 + (-t).exp_m1() * w).norm_sqr()
}

/// `dN/dt` at `t = 0⁺` by the second-order one-sided stencil
/// `(−3N(0) + 4N(h) − N(2h)) / 2h` with `h = FD_STEP`.
pub fn slope_at_origin(psi_i: &PureState, psi_f: &PureState, a: &LinearOperator) -> Result<f64> {
    let h = FD_STEP;
    let n0 = normalized_incidence(psi_i, psi_f, a, 0.0)?;
    let n1 = normalized_incidence(psi_i, psi_f, a, h)?;
    let n2 = normalized_incidence(psi_i, psi_f, a, 2.0 * h)?;
    Ok((-3.0 * n0 + 4.0 * n1 - n2) / (2.0 * h))
}

/// `(t, N)` samples of one attenuation sweep, sorted by `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct IteCurve {
    pub observable: PathAttributeObservable,
    points: Vec<(f64, f64)>,
}

impl IteCurve {
    pub fn new(observable: PathAttributeObservable, mut points: Vec<(f64, f64)>) -> Self {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self { observable, points }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn fit(&self) -> Result<FitResult> {
        least_squares_line(&self.points)
    }
}

/// Noise-free curve in the abstract layer.
pub fn exact_curve(
    params: &DualityParams,
    observable: PathAttributeObservable,
    schedule: &AttenuationSchedule,
) -> Result<IteCurve> {
    let (psi_i, psi_f) = (preselection(params), postselection());
    let op = observable.operator();
    let points = schedule
        .transmissions()
        .iter()
        .map(|&tr| {
            let t = transmission_to_time(tr)?;
            Ok((t, normalized_incidence(&psi_i, &psi_f, &op, t)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IteCurve::new(observable, points))
}
