//! Two-qubit state tomography of the path ⊗ attribute state.
//!
//! Qubit A is the path (`L` ↔ `|0⟩`), qubit B the attribute (`P` ↔ `|0⟩`).
//! Each of the nine Pauli settings has four outcomes indexed `2·a + b`,
//! where `0` is the `+1` eigenvector of the measured Pauli.

use std::fmt;

use nalgebra::{Matrix4, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::duality::abstract_basis;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::qstate::{inner_product, tensor_product, Basis, Complex, LinearOperator, PureState};
use crate::shots::{Acquisition, RngSeed};

pub const STATE_TOL: f64 = 1e-10;
/// Eigenvalues below `−NEGATIVITY_TOL` are reported as unphysical.
pub const NEGATIVITY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    Z,
    X,
    Y,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::Z, Pauli::X, Pauli::Y];

    fn matrix(self) -> [[Complex; 2]; 2] {
        let (o, z, i) = (Complex::new(1.0, 0.0), Complex::default(), Complex::i());
        match self {
            Pauli::Z => [[o, z], [z, -o]],
            Pauli::X => [[z, o], [o, z]],
            Pauli::Y => [[z, -i], [i, z]],
        }
    }

    /// `+1` and `−1` eigenvectors.
    fn eigenvectors(self) -> [[Complex; 2]; 2] {
        let r = Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let ri = Complex::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
        let (o, z) = (Complex::new(1.0, 0.0), Complex::default());
        match self {
            Pauli::Z => [[o, z], [z, o]],
            Pauli::X => [[r, r], [r, -r]],
            Pauli::Y => [[r, ri], [r, -ri]],
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Counts of one `(A basis, B basis)` setting. Expected counts in exact
/// acquisition, whole numbers otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TomographySetting {
    pub a: Pauli,
    pub b: Pauli,
    pub counts: [f64; 4],
}

impl TomographySetting {
    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    fn name(&self) -> String {
        format!("{}{}", self.a, self.b)
    }

    /// `⟨σ_a ⊗ σ_b⟩`, `⟨σ_a ⊗ I⟩`, `⟨I ⊗ σ_b⟩` from the outcome frequencies.
    fn expectations(&self) -> Result<(f64, f64, f64)> {
        let total = self.total();
        if total <= 0.0 {
            return Err(Error::MissingSetting(format!(
                "{} has no counts",
                self.name()
            )));
        }
        let f = self.counts.map(|c| c / total);
        Ok((
            f[0] - f[1] - f[2] + f[3],
            f[0] + f[1] - f[2] - f[3],
            f[0] - f[1] + f[2] - f[3],
        ))
    }
}

/// A 4×4 density matrix on the path ⊗ attribute basis.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(LinearOperator);

impl DensityMatrix {
    /// Checks hermiticity and unit trace; positivity is only diagnosed.
    pub fn new(op: LinearOperator) -> Result<Self> {
        if op.basis() != &abstract_basis() {
            return Err(Error::BasisMismatch);
        }
        let herm = op.max_abs_diff(&op.adjoint());
        let trace = op.trace();
        if herm > STATE_TOL || (trace - 1.0).norm() > STATE_TOL {
            return Err(Error::NotDensityMatrix {
                hermiticity: herm,
                trace: trace.re,
            });
        }
        Ok(Self(op))
    }

    pub fn from_pure(psi: &PureState) -> Result<Self> {
        let psi = psi.normalized()?;
        Self::new(LinearOperator::projector_onto(&psi)?)
    }

    pub fn maximally_mixed() -> Self {
        Self(LinearOperator::identity(abstract_basis()).scale(Complex::new(0.25, 0.0)))
    }

    pub fn operator(&self) -> &LinearOperator {
        &self.0
    }

    pub fn get(&self, r: usize, c: usize) -> Complex {
        self.0.get(r, c)
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let m = Matrix4::from_fn(|r, c| self.0.get(r, c));
        let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        [ev[0], ev[1], ev[2], ev[3]]
    }

    pub fn is_physical(&self) -> bool {
        self.eigenvalues()[0] >= -NEGATIVITY_TOL
    }

    pub fn purity(&self) -> f64 {
        self.0.compose(&self.0).expect("same basis").trace().re
    }

    /// `Tr(ρ·M)` for an observable on the same basis.
    pub fn expectation(&self, m: &LinearOperator) -> Result<Complex> {
        Ok(self.0.compose(m)?.trace())
    }

    /// Convex combination `(1−x)·self + x·other`.
    pub fn mix(&self, other: &DensityMatrix, x: f64) -> Result<Self> {
        let a = self.0.scale(Complex::new(1.0 - x, 0.0));
        Self::new(a.add(&other.0.scale(Complex::new(x, 0.0)))?)
    }
}

/// `(1−p)ρ + p·I/4`.
pub fn depolarize(rho: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain("p", p, "[0, 1]"));
    }
    rho.mix(&DensityMatrix::maximally_mixed(), p)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fidelity {
    /// `⟨ψ|ρ|ψ⟩` as computed.
    pub raw: f64,
    /// `raw` clipped to `[0, 1]`.
    pub value: f64,
}

/// `F = ⟨ψ|ρ|ψ⟩` for a normalized `ψ`.
pub fn fidelity(rho: &DensityMatrix, psi: &PureState) -> Result<Fidelity> {
    let psi = psi.normalized()?;
    let f = inner_product(&psi, &rho.0.apply(&psi)?)?;
    debug_assert!(f.im.abs() < 1e-12);
    Ok(Fidelity {
        raw: f.re,
        value: f.re.clamp(0.0, 1.0),
    })
}

fn outcome_vector(a: Pauli, b: Pauli, outcome: usize) -> PureState {
    let ea = a.eigenvectors()[outcome / 2];
    let eb = b.eigenvectors()[outcome % 2];
    let amps = (0..4).map(|k| ea[k / 2] * eb[k % 2]).collect();
    PureState::new(abstract_basis(), amps).expect("four amplitudes")
}

/// Outcome probabilities of one setting.
pub fn setting_probabilities(rho: &DensityMatrix, a: Pauli, b: Pauli) -> [f64; 4] {
    std::array::from_fn(|o| {
        let e = outcome_vector(a, b, o);
        let p = inner_product(&e, &rho.0.apply(&e).unwrap()).unwrap().re;
        p.max(0.0)
    })
}

/// All nine settings with `λ` photons per setting. `seed.child(4·s + o)`
/// drives outcome `o` of setting `s`.
pub fn simulate_tomography(
    rho: &DensityMatrix,
    lambda: f64,
    acquisition: Acquisition,
    seed: RngSeed,
) -> Result<Vec<TomographySetting>> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::domain("lambda", lambda, "(0, ∞)"));
    }
    let mut out = Vec::with_capacity(9);
    for (s, (a, b)) in settings().enumerate() {
        let probs = setting_probabilities(rho, a, b);
        let mut counts = [0.0; 4];
        for (o, (c, p)) in counts.iter_mut().zip(probs).enumerate() {
            *c = match acquisition {
                Acquisition::Exact => lambda * p,
                Acquisition::Shots => {
                    crate::shots::sample_counts(p.min(1.0), lambda, seed.child((4 * s + o) as u64))?
                        as f64
                }
            };
        }
        out.push(TomographySetting { a, b, counts });
    }
    Ok(out)
}

fn settings() -> impl Iterator<Item = (Pauli, Pauli)> {
    Pauli::ALL
        .into_iter()
        .flat_map(|a| Pauli::ALL.into_iter().map(move |b| (a, b)))
}

fn pauli_2x2(p: Option<Pauli>) -> LinearOperator {
    let m = match p {
        None => [
            [Complex::new(1.0, 0.0), Complex::default()],
            [Complex::default(), Complex::new(1.0, 0.0)],
        ],
        Some(p) => p.matrix(),
    };
    LinearOperator::new(Basis::qubit(), vec![m[0][0], m[0][1], m[1][0], m[1][1]]).unwrap()
}

/// `σ_i ⊗ σ_j` on the abstract basis, `None` standing for the identity.
pub fn pauli_product(a: Option<Pauli>, b: Option<Pauli>) -> LinearOperator {
    tensor_product(&pauli_2x2(a), &pauli_2x2(b))
        .relabel(abstract_basis())
        .unwrap()
}

/// Linear inversion `ρ = ¼ Σ ⟨σᵢ⊗σⱼ⟩ σᵢ⊗σⱼ`. Single-qubit terms average the
/// three settings that measure them.
pub fn reconstruct_linear(settings_in: &[TomographySetting]) -> Result<DensityMatrix> {
    let mut corr = [[0.0; 3]; 3];
    let mut single_a = [0.0; 3];
    let mut single_b = [0.0; 3];
    for (a, b) in settings() {
        let s = settings_in
            .iter()
            .find(|s| s.a == a && s.b == b)
            .ok_or_else(|| Error::MissingSetting(format!("{a}{b}")))?;
        let (ab, ea, eb) = s.expectations()?;
        corr[a as usize][b as usize] = ab;
        single_a[a as usize] += ea / 3.0;
        single_b[b as usize] += eb / 3.0;
    }
    let mut rho = pauli_product(None, None);
    for p in Pauli::ALL {
        let (i, c) = (p as usize, |x: f64| Complex::new(x, 0.0));
        rho = rho.add(&pauli_product(Some(p), None).scale(c(single_a[i])))?;
        rho = rho.add(&pauli_product(None, Some(p)).scale(c(single_b[i])))?;
        for q in Pauli::ALL {
            let t = pauli_product(Some(p), Some(q)).scale(c(corr[i][q as usize]));
            rho = rho.add(&t)?;
        }
    }
    DensityMatrix::new(rho.scale(Complex::new(0.25, 0.0)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TomographyReport {
    pub rho: DensityMatrix,
    pub fidelity: Fidelity,
    pub eigenvalues: [f64; 4],
    pub physical: bool,
    pub purity: f64,
}

impl TomographyReport {
    pub fn new(rho: DensityMatrix, target: &PureState) -> Result<Self> {
        Ok(Self {
            fidelity: fidelity(&rho, target)?,
            eigenvalues: rho.eigenvalues(),
            physical: rho.is_physical(),
            purity: rho.purity(),
            rho,
        })
    }
}

/// Simulates and reconstructs `repeats` independent runs of the noisy
/// target `depolarize(|ψ⟩⟨ψ|, p)`; run `i` uses `seed.child(i)`.
pub fn run_tomography(
    target: &PureState,
    noise: f64,
    lambda: f64,
    acquisition: Acquisition,
    repeats: usize,
    seed: RngSeed,
    exec: Execution,
) -> Result<Vec<TomographyReport>> {
    let rho = depolarize(&DensityMatrix::from_pure(target)?, noise)?;
    exec.try_map_range(repeats, |i| {
        let counts = simulate_tomography(&rho, lambda, acquisition, seed.child(i as u64))?;
        TomographyReport::new(reconstruct_linear(&counts)?, target)
    })
}

#[derive(Serialize, Deserialize)]
struct DensityMatrixRepr {
    labels: Vec<String>,
    /// Row-major `[re, im]` pairs.
    rows: Vec<Vec<[f64; 2]>>,
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DensityMatrixRepr {
            labels: self.0.basis().labels().to_vec(),
            rows: (0..4)
                .map(|r| {
                    (0..4)
                        .map(|c| {
                            let z = self.0.get(r, c);
                            [z.re + 0.0, z.im + 0.0]
                        })
                        .collect()
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = DensityMatrixRepr::deserialize(d)?;
        if repr.labels != abstract_basis().labels() {
            return Err(D::Error::custom(
                "density matrix must use the path ⊗ attribute basis",
            ));
        }
        if repr.rows.len() != 4 || repr.rows.iter().any(|r| r.len() != 4) {
            return Err(D::Error::custom("density matrix must be 4×4"));
        }
        let data = repr
            .rows
            .iter()
            .flatten()
            .map(|&[re, im]| Complex::new(re, im))
            .collect();
        LinearOperator::new(abstract_basis(), data)
            .and_then(DensityMatrix::new)
            .map_err(D::Error::custom)
    }
}
