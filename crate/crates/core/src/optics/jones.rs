//! Jones matrices of wave plates on the `{H, V}` polarization basis.
//!
//! Angles are the fast-axis orientation measured from horizontal, in radians.

use crate::duality::polarization_basis;
use crate::qstate::{Complex, LinearOperator};

/// `[[cos 2θ, sin 2θ], [sin 2θ, −cos 2θ]]`.
pub fn jones_hwp(theta: f64) -> LinearOperator {
    let (s, c) = (2.0 * theta).sin_cos();
    LinearOperator::from_real_rows(polarization_basis(), &[&[c, s], &[s, -c]])
        .expect("finite angle")
}

/// `e^{−iπ/4}·[[cos²θ + i sin²θ, (1−i) sinθ cosθ], [(1−i) sinθ cosθ, sin²θ + i cos²θ]]`.
pub fn jones_qwp(theta: f64) -> LinearOperator {
    let (s, c) = theta.sin_cos();
    let i = Complex::i();
    let off = (1.0 - i) * s * c;
    let phase = Complex::from_polar(1.0, -std::f64::consts::FRAC_PI_4);
    LinearOperator::new(
        polarization_basis(),
        vec![
            phase * (c * c + i * s * s),
            phase * off,
            phase * off,
            phase * (s * s + i * c * c),
        ],
    )
    .expect("finite angle")
}

/// Linear retarder with retardance `delta` and fast axis at `theta`:
/// `R(−θ)·diag(1, e^{iδ})·R(θ)`.
///
/// `delta = π` is exactly [`jones_hwp`]; `delta = π/2` is [`jones_qwp`]
/// without its global phase. Used for the encoding phases φ₁, φ₂.
pub fn jones_retarder(theta: f64, delta: f64) -> LinearOperator {
    let (s, c) = theta.sin_cos();
    let e = Complex::from_polar(1.0, delta);
    let one = Complex::new(1.0, 0.0);
    let off = (one - e) * s * c;
    LinearOperator::new(
        polarization_basis(),
        vec![c * c + e * s * s, off, off, s * s + e * c * c],
    )
    .expect("finite angle")
}
