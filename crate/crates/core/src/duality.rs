//! Wave/particle states, pre- and post-selection, and weak values on the
//! abstract path ⊗ attribute space.
//!
//! Basis ordering, used everywhere in the crate:
//!
//! | index | label | meaning               |
//! |-------|-------|-----------------------|
//! | 0     | `L⊗P` | left path, particle   |
//! | 1     | `L⊗W` | left path, wave       |
//! | 2     | `R⊗P` | right path, particle  |
//! | 3     | `R⊗W` | right path, wave      |
//!
//! After BS2 the path factor is reinterpreted as the output port: `L` is the
//! port fed by `(|L⟩+|R⟩)/√2`, `R` the port fed by `(|L⟩−|R⟩)/√2`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, TAU};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{inner_product, Basis, Complex, LinearOperator, PureState, TensorProduct};

/// Below this `|⟨ψ_f|ψ_i⟩|` the weak value is considered ill-posed.
pub const ORTHOGONALITY_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Path {
    L,
    R,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Attribute {
    Particle,
    Wave,
}

impl Path {
    pub fn index(self) -> usize {
        self as usize
    }
}

impl Attribute {
    pub fn index(self) -> usize {
        self as usize
    }
}

pub fn path_basis() -> Basis {
    static B: OnceLock<Basis> = OnceLock::new();
    B.get_or_init(|| Basis::new(["L", "R"]).unwrap()).clone()
}

pub fn attribute_basis() -> Basis {
    static B: OnceLock<Basis> = OnceLock::new();
    B.get_or_init(|| Basis::new(["P", "W"]).unwrap()).clone()
}

/// The four-dimensional `{L,R} ⊗ {P,W}` space.
pub fn abstract_basis() -> Basis {
    static B: OnceLock<Basis> = OnceLock::new();
    B.get_or_init(|| path_basis().tensor(&attribute_basis()))
        .clone()
}

/// Rail-local polarization basis used by [`wave_state`] and [`particle_state`].
pub fn polarization_basis() -> Basis {
    static B: OnceLock<Basis> = OnceLock::new();
    B.get_or_init(|| Basis::new(["H", "V"]).unwrap()).clone()
}

/// Mixing angle and the two encoding phases, all in radians.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityParams {
    alpha: f64,
    phi1: f64,
    phi2: f64,
}

impl DualityParams {
    /// `alpha` in `[0, π/2]`, phases zero.
    pub fn new(alpha: f64) -> Result<Self> {
        Self::with_phases(alpha, 0.0, 0.0)
    }

    pub fn with_phases(alpha: f64, phi1: f64, phi2: f64) -> Result<Self> {
        check_alpha(alpha)?;
        for (name, v) in [("phi1", phi1), ("phi2", phi2)] {
            if !(v.is_finite() && (0.0..TAU).contains(&v)) {
                return Err(Error::domain(name, v, "[0, 2π)"));
            }
        }
        Ok(Self { alpha, phi1, phi2 })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn phi1(&self) -> f64 {
        self.phi1
    }

    pub fn phi2(&self) -> f64 {
        self.phi2
    }

    /// `(cos α, sin α)` with the cosine taken as `sin(π/2 − α)`, so that the
    /// pair is bitwise symmetric about π/4 and exact at both ends.
    pub fn mixing(&self) -> (f64, f64) {
        mixing(self.alpha)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && (0.0..=FRAC_PI_2).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::domain("alpha", alpha, "[0, π/2]"))
    }
}

fn mixing(alpha: f64) -> (f64, f64) {
    ((FRAC_PI_2 - alpha).sin(), alpha.sin())
}

/// `e^{iφ₁/2}(cos(φ₁/2)|H⟩ − i sin(φ₁/2)|V⟩)` on the down rail.
pub fn wave_state(phi1: f64) -> PureState {
    let global = Complex::from_polar(1.0, phi1 / 2.0);
    let (s, c) = (phi1 / 2.0).sin_cos();
    PureState::new(
        polarization_basis(),
        vec![global * c, global * Complex::new(0.0, -s)],
    )
    .expect("finite phase")
}

/// `(|H⟩ + e^{iφ₂}|V⟩)/√2` on the up rail.
pub fn particle_state(phi2: f64) -> PureState {
    PureState::new(
        polarization_basis(),
        vec![
            Complex::new(FRAC_1_SQRT_2, 0.0),
            Complex::from_polar(FRAC_1_SQRT_2, phi2),
        ],
    )
    .expect("finite phase")
}

fn abstract_state(amps: [f64; 4]) -> PureState {
    PureState::from_real(abstract_basis(), &amps).expect("finite amplitudes")
}

/// `|ψ_i⟩ = (|L⟩+|R⟩)(cos α|P⟩ + sin α|W⟩)/√2`.
///
/// The encoding phases do not enter here: `|P⟩` and `|W⟩` are the abstract
/// orthonormal attribute vectors. They matter only in the optical encoding.
pub fn preselection(params: &DualityParams) -> PureState {
    let (c, s) = params.mixing();
    let (c, s) = (c * FRAC_1_SQRT_2, s * FRAC_1_SQRT_2);
    abstract_state([c, s, c, s])
}

/// `|ψ_f⟩ = (|L⟩|W⟩ + |R⟩|P⟩)/√2`.
pub fn postselection() -> PureState {
    abstract_state([0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0])
}

/// The post-selection gate `U`: identity on `L`, `P ↔ W` on `R`.
pub fn attribute_swap_on_right() -> LinearOperator {
    let b = abstract_basis();
    LinearOperator::from_real_rows(
        b,
        &[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0, 0.0],
        ],
    )
    .unwrap()
}

/// Symmetric 50:50 splitter on the path factor, `(1/√2)[[1, 1], [1, −1]] ⊗ I`.
pub fn path_beam_splitter() -> LinearOperator {
    let h = LinearOperator::from_real_rows(
        path_basis(),
        &[
            &[FRAC_1_SQRT_2, FRAC_1_SQRT_2],
            &[FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
        ],
    )
    .unwrap();
    h.tensor(&LinearOperator::identity(attribute_basis()))
}

/// The gates between the weak-measurement stage and detector D1.
#[derive(Clone, Debug)]
pub struct PostSelectionGates {
    pub u: LinearOperator,
    pub bs2: LinearOperator,
    /// State registered by D1 after BS2: the `+` port carrying `|W⟩`.
    /// Routing `|W⟩` here and `|P⟩` to D3 is the job of `X`.
    pub d1: PureState,
}

impl Default for PostSelectionGates {
    fn default() -> Self {
        Self {
            u: attribute_swap_on_right(),
            bs2: path_beam_splitter(),
            d1: abstract_state([0.0, 1.0, 0.0, 0.0]),
        }
    }
}

impl PostSelectionGates {
    /// Propagates the D1 state backwards through `BS2` and `U`.
    pub fn back_propagate(&self) -> Result<PureState> {
        let after_bs2 = self.bs2.adjoint().apply(&self.d1)?;
        self.u.adjoint().apply(&after_bs2)
    }

    /// Returns true iff the state that D1 post-selects is `|ψ_f⟩` up to a
    /// global phase.
    pub fn verify_backward(&self) -> bool {
        self.back_propagate()
            .map(|s| s.equals_up_to_phase(&postselection(), 1e-12))
            .unwrap_or(false)
    }
}

/// `n` evenly spaced mixing angles covering `[0, π/2]` inclusive.
pub fn alpha_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n)
            .map(|k| FRAC_PI_2 * (k as f64 / (n - 1) as f64))
            .collect(),
    }
}

/// Backward check of the post-selection with the ideal gate set.
pub fn verify_postselection_backward() -> bool {
    PostSelectionGates::default().verify_backward()
}

/// One of the four observables `Π_a^s = |s⟩⟨s| ⊗ |a⟩⟨a|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PathAttributeObservable {
    pub path: Path,
    pub attribute: Attribute,
}

impl PathAttributeObservable {
    /// In the column order `PL, PR, WL, WR`.
    pub const ALL: [PathAttributeObservable; 4] = [
        Self::new(Path::L, Attribute::Particle),
        Self::new(Path::R, Attribute::Particle),
        Self::new(Path::L, Attribute::Wave),
        Self::new(Path::R, Attribute::Wave),
    ];

    pub const fn new(path: Path, attribute: Attribute) -> Self {
        Self { path, attribute }
    }

    /// Position in the abstract basis.
    pub fn basis_index(self) -> usize {
        2 * self.path.index() + self.attribute.index()
    }

    pub fn operator(self) -> LinearOperator {
        let mut diag = [Complex::default(); 4];
        diag[self.basis_index()] = Complex::new(1.0, 0.0);
        LinearOperator::diagonal(abstract_basis(), &diag).unwrap()
    }

    /// Short code used in tables: `PL`, `PR`, `WL`, `WR`.
    pub fn code(self) -> &'static str {
        match (self.attribute, self.path) {
            (Attribute::Particle, Path::L) => "PL",
            (Attribute::Particle, Path::R) => "PR",
            (Attribute::Wave, Path::L) => "WL",
            (Attribute::Wave, Path::R) => "WR",
        }
    }
}

pub fn observable(path: Path, attribute: Attribute) -> PathAttributeObservable {
    PathAttributeObservable::new(path, attribute)
}

impl fmt::Display for PathAttributeObservable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for PathAttributeObservable {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|o| o.code().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown observable `{s}` (expected PL, PR, WL or WR)"))
    }
}

/// `⟨A⟩_w = ⟨ψ_f|A|ψ_i⟩ / ⟨ψ_f|ψ_i⟩`.
pub fn weak_value_exact(
    a: &LinearOperator,
    psi_i: &PureState,
    psi_f: &PureState,
) -> Result<Complex> {
    let overlap = inner_product(psi_f, psi_i)?;
    if overlap.norm() < ORTHOGONALITY_TOL {
        return Err(Error::OrthogonalSelection {
            overlap: overlap.norm(),
        });
    }
    let numerator = inner_product(psi_f, &a.apply(psi_i)?)?;
    Ok(numerator / overlap)
}

/// One value per observable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakValues<T = f64> {
    pub particle_left: T,
    pub particle_right: T,
    pub wave_left: T,
    pub wave_right: T,
}

impl<T: Copy> WeakValues<T> {
    pub fn from_fn(mut f: impl FnMut(PathAttributeObservable) -> T) -> Self {
        let [pl, pr, wl, wr] = PathAttributeObservable::ALL;
        Self {
            particle_left: f(pl),
            particle_right: f(pr),
            wave_left: f(wl),
            wave_right: f(wr),
        }
    }

    pub fn try_from_fn<E>(
        mut f: impl FnMut(PathAttributeObservable) -> std::result::Result<T, E>,
    ) -> std::result::Result<Self, E> {
        let [pl, pr, wl, wr] = PathAttributeObservable::ALL;
        Ok(Self {
            particle_left: f(pl)?,
            particle_right: f(pr)?,
            wave_left: f(wl)?,
            wave_right: f(wr)?,
        })
    }

    pub fn get(&self, obs: PathAttributeObservable) -> T {
        match (obs.attribute, obs.path) {
            (Attribute::Particle, Path::L) => self.particle_left,
            (Attribute::Particle, Path::R) => self.particle_right,
            (Attribute::Wave, Path::L) => self.wave_left,
            (Attribute::Wave, Path::R) => self.wave_right,
        }
    }

    /// In `PL, PR, WL, WR` order.
    pub fn to_array(&self) -> [T; 4] {
        [
            self.particle_left,
            self.particle_right,
            self.wave_left,
            self.wave_right,
        ]
    }

    pub fn map<U: Copy>(&self, mut f: impl FnMut(T) -> U) -> WeakValues<U> {
        WeakValues {
            particle_left: f(self.particle_left),
            particle_right: f(self.particle_right),
            wave_left: f(self.wave_left),
            wave_right: f(self.wave_right),
        }
    }
}

impl WeakValues<f64> {
    pub fn sum(&self) -> f64 {
        self.to_array().iter().sum()
    }
}

/// All four weak values through the general formula.
pub fn exact_weak_values(params: &DualityParams) -> Result<WeakValues<Complex>> {
    let (psi_i, psi_f) = (preselection(params), postselection());
    WeakValues::try_from_fn(|obs| weak_value_exact(&obs.operator(), &psi_i, &psi_f))
}

/// `(0, cos α/(cos α + sin α), sin α/(cos α + sin α), 0)` in `PL, PR, WL, WR` order.
pub fn closed_form_weak_values(alpha: f64) -> Result<WeakValues> {
    check_alpha(alpha)?;
    let (c, s) = mixing(alpha);
    Ok(WeakValues {
        particle_left: 0.0,
        particle_right: c / (c + s),
        wave_left: s / (c + s),
        wave_right: 0.0,
    })
}
