//! Dense complex linear algebra on small labeled Hilbert spaces.
//!
//! Every space in this crate has dimension at most 8, so states and operators
//! are plain row-major `Vec`s. States keep their raw norm: attenuation is
//! non-unitary and nothing here renormalizes behind the caller's back.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Complex = Complex64;

/// Tolerance for the structural tests `is_projector`, `is_unitary` and
/// `is_hermitian`.
pub const STRUCTURE_TOL: f64 = 1e-12;

const TENSOR_SEP: &str = "⊗";

/// An ordered list of unique labels naming the basis vectors of a space.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Basis {
    labels: Arc<[String]>,
}

impl Basis {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::EmptyBasis);
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        Ok(Self {
            labels: labels.into(),
        })
    }

    /// Computational qubit basis `{0, 1}`.
    pub fn qubit() -> Self {
        Self::new(["0", "1"]).expect("static labels")
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Product basis with labels `a⊗b`, `a` varying slowest.
    pub fn tensor(&self, other: &Basis) -> Basis {
        let labels: Vec<String> = self
            .labels
            .iter()
            .flat_map(|a| {
                other
                    .labels
                    .iter()
                    .map(move |b| format!("{a}{TENSOR_SEP}{b}"))
            })
            .collect();
        Basis {
            labels: labels.into(),
        }
    }

    fn same_as(&self, other: &Basis) -> bool {
        Arc::ptr_eq(&self.labels, &other.labels) || self.labels == other.labels
    }

    fn check(&self, other: &Basis) -> Result<()> {
        if self.dim() != other.dim() {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            })
        } else if !self.same_as(other) {
            Err(Error::BasisMismatch)
        } else {
            Ok(())
        }
    }
}

impl fmt::Debug for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.labels.iter()).finish()
    }
}

fn check_finite(values: &[Complex]) -> Result<()> {
    match values
        .iter()
        .position(|z| !(z.re.is_finite() && z.im.is_finite()))
    {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

/// A (possibly sub-normalized) pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    basis: Basis,
    amps: Vec<Complex>,
}

impl PureState {
    pub fn new(basis: Basis, amps: Vec<Complex>) -> Result<Self> {
        if amps.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: amps.len(),
            });
        }
        check_finite(&amps)?;
        Ok(Self { basis, amps })
    }

    /// Builds a state from real amplitudes.
    pub fn from_real(basis: Basis, amps: &[f64]) -> Result<Self> {
        Self::new(basis, amps.iter().map(|&a| Complex::new(a, 0.0)).collect())
    }

    pub fn basis_vector(basis: Basis, index: usize) -> Result<Self> {
        let dim = basis.dim();
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: index,
            });
        }
        let mut amps = vec![Complex::default(); dim];
        amps[index] = Complex::new(1.0, 0.0);
        Ok(Self { basis, amps })
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.amps
    }

    pub fn amplitude(&self, label: &str) -> Option<Complex> {
        self.basis.index_of(label).map(|i| self.amps[i])
    }

    /// Raw weight `|a_k|²` of one basis vector (not divided by the norm).
    pub fn weight(&self, index: usize) -> f64 {
        self.amps[index].norm_sqr()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, factor: Complex) -> Self {
        Self {
            basis: self.basis.clone(),
            amps: self.amps.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn add(&self, other: &PureState) -> Result<Self> {
        self.basis.check(&other.basis)?;
        Ok(Self {
            basis: self.basis.clone(),
            amps: self
                .amps
                .iter()
                .zip(&other.amps)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Explicit renormalization; the only place a state is rescaled to unit norm.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scale(Complex::new(1.0 / n, 0.0)))
    }

    /// True if `self = e^{iθ}·other` for some θ, within `tol` on the overlap
    /// defect `‖a‖‖b‖ − |⟨a|b⟩|` and on the norms.
    pub fn equals_up_to_phase(&self, other: &PureState, tol: f64) -> bool {
        let Ok(overlap) = inner_product(self, other) else {
            return false;
        };
        let (na, nb) = (self.norm(), other.norm());
        (na - nb).abs() < tol && (na * nb - overlap.norm()).abs() < tol
    }

    pub fn relabel(&self, basis: Basis) -> Result<Self> {
        Self::new(basis, self.amps.clone())
    }
}

/// `⟨bra|ket⟩`, conjugate-linear in `bra`.
pub fn inner_product(bra: &PureState, ket: &PureState) -> Result<Complex> {
    bra.basis.check(&ket.basis)?;
    Ok(bra
        .amps
        .iter()
        .zip(&ket.amps)
        .map(|(b, k)| b.conj() * k)
        .sum())
}

/// A dense square operator, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearOperator {
    basis: Basis,
    data: Vec<Complex>,
}

impl LinearOperator {
    pub fn new(basis: Basis, data: Vec<Complex>) -> Result<Self> {
        let d = basis.dim();
        if data.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                found: data.len(),
            });
        }
        check_finite(&data)?;
        Ok(Self { basis, data })
    }

    pub fn from_fn(basis: Basis, mut f: impl FnMut(usize, usize) -> Complex) -> Result<Self> {
        let d = basis.dim();
        let data = (0..d * d).map(|k| f(k / d, k % d)).collect();
        Self::new(basis, data)
    }

    pub fn from_real_rows(basis: Basis, rows: &[&[f64]]) -> Result<Self> {
        let d = basis.dim();
        if rows.len() != d || rows.iter().any(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: rows.len(),
            });
        }
        Self::from_fn(basis, |r, c| Complex::new(rows[r][c], 0.0))
    }

    pub fn identity(basis: Basis) -> Self {
        Self::diagonal(basis.clone(), &vec![Complex::new(1.0, 0.0); basis.dim()])
            .expect("identity is well formed")
    }

    pub fn zeros(basis: Basis) -> Self {
        let d = basis.dim();
        Self {
            basis,
            data: vec![Complex::default(); d * d],
        }
    }

    pub fn diagonal(basis: Basis, diag: &[Complex]) -> Result<Self> {
        if diag.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: diag.len(),
            });
        }
        Self::from_fn(
            basis,
            |r, c| if r == c { diag[r] } else { Complex::default() },
        )
    }

    /// `|ket⟩⟨bra|`.
    pub fn outer(ket: &PureState, bra: &PureState) -> Result<Self> {
        ket.basis.check(&bra.basis)?;
        Self::from_fn(ket.basis.clone(), |r, c| ket.amps[r] * bra.amps[c].conj())
    }

    /// Rank-one projector onto the ray of `state` (normalized internally).
    pub fn projector_onto(state: &PureState) -> Result<Self> {
        let s = state.normalized()?;
        Self::outer(&s, &s)
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex {
        self.data[row * self.dim() + col]
    }

    pub fn entries(&self) -> &[Complex] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim();
        Self {
            basis: self.basis.clone(),
            data: (0..d * d).map(|k| self.get(k % d, k / d).conj()).collect(),
        }
    }

    /// Matrix product `self · rhs`.
    pub fn compose(&self, rhs: &LinearOperator) -> Result<Self> {
        self.basis.check(&rhs.basis)?;
        Ok(self.compose_unchecked(rhs))
    }

    fn compose_unchecked(&self, rhs: &LinearOperator) -> Self {
        let d = self.dim();
        let mut data = vec![Complex::default(); d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.data[r * d + k];
                if a == Complex::default() {
                    continue;
                }
                for c in 0..d {
                    data[r * d + c] += a * rhs.data[k * d + c];
                }
            }
        }
        Self {
            basis: self.basis.clone(),
            data,
        }
    }

    pub fn add(&self, rhs: &LinearOperator) -> Result<Self> {
        self.basis.check(&rhs.basis)?;
        Ok(self.zip_with(rhs, |a, b| a + b))
    }

    pub fn sub(&self, rhs: &LinearOperator) -> Result<Self> {
        self.basis.check(&rhs.basis)?;
        Ok(self.zip_with(rhs, |a, b| a - b))
    }

    fn zip_with(&self, rhs: &LinearOperator, f: impl Fn(Complex, Complex) -> Complex) -> Self {
        Self {
            basis: self.basis.clone(),
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, factor: Complex) -> Self {
        Self {
            basis: self.basis.clone(),
            data: self.data.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn apply(&self, state: &PureState) -> Result<PureState> {
        self.basis.check(&state.basis)?;
        let d = self.dim();
        let amps = (0..d)
            .map(|r| {
                self.data[r * d..(r + 1) * d]
                    .iter()
                    .zip(&state.amps)
                    .map(|(m, a)| m * a)
                    .sum()
            })
            .collect();
        Ok(PureState {
            basis: state.basis.clone(),
            amps,
        })
    }

    pub fn trace(&self) -> Complex {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &LinearOperator) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn idempotence_defect(&self) -> f64 {
        self.compose_unchecked(self)
            .zip_with(self, |a, b| a - b)
            .frobenius_norm()
    }

    fn hermiticity_defect(&self) -> f64 {
        self.adjoint().zip_with(self, |a, b| a - b).frobenius_norm()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() < STRUCTURE_TOL
    }

    pub fn is_projector(&self) -> bool {
        self.idempotence_defect() < STRUCTURE_TOL && self.hermiticity_defect() < STRUCTURE_TOL
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_defect() < STRUCTURE_TOL
    }

    /// `‖A†A − I‖_F`.
    pub fn unitarity_defect(&self) -> f64 {
        let gram = self.adjoint().compose_unchecked(self);
        gram.zip_with(&LinearOperator::identity(self.basis.clone()), |a, b| a - b)
            .frobenius_norm()
    }

    pub fn relabel(&self, basis: Basis) -> Result<Self> {
        Self::new(basis, self.data.clone())
    }
}

/// Kronecker product with `self` as the slow index.
pub trait TensorProduct: Sized {
    fn tensor(&self, other: &Self) -> Self;
}

impl TensorProduct for PureState {
    fn tensor(&self, other: &Self) -> Self {
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        PureState {
            basis: self.basis.tensor(&other.basis),
            amps,
        }
    }
}

impl TensorProduct for LinearOperator {
    fn tensor(&self, other: &Self) -> Self {
        let (da, db) = (self.dim(), other.dim());
        let d = da * db;
        let data = (0..d * d)
            .map(|k| {
                let (r, c) = (k / d, k % d);
                self.get(r / db, c / db) * other.get(r % db, c % db)
            })
            .collect();
        LinearOperator {
            basis: self.basis.tensor(&other.basis),
            data,
        }
    }
}

pub fn tensor_product<T: TensorProduct>(a: &T, b: &T) -> T {
    a.tensor(b)
}

pub fn apply(op: &LinearOperator, state: &PureState) -> Result<PureState> {
    op.apply(state)
}

/// `e^{−p t}` for a projector `p`, in the exact closed form `I + (e^{−t} − 1) p`.
///
/// Non-projectors are rejected; use [`matrix_exponential`] for those.
pub fn projector_exponential(p: &LinearOperator, t: f64) -> Result<LinearOperator> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::domain("t", t, "[0, ∞)"));
    }
    let idempotence = p.idempotence_defect();
    let hermiticity = p.hermiticity_defect();
    if idempotence >= STRUCTURE_TOL || hermiticity >= STRUCTURE_TOL {
        return Err(Error::NotProjector {
            idempotence,
            hermiticity,
        });
    }
    let factor = Complex::new((-t).exp_m1(), 0.0);
    Ok(LinearOperator::identity(p.basis.clone()).zip_with(p, |i, q| i + factor * q))
}

/// `e^{A}` by scaling and squaring around a Taylor series.
pub fn matrix_exponential(a: &LinearOperator) -> LinearOperator {
    let norm = a.frobenius_norm();
    // Scale so the reduced norm is at most 1/2; 20 Taylor terms then reach
    // far below double precision.
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let reduced = a.scale(Complex::new(0.5f64.powi(squarings as i32), 0.0));

    let identity = LinearOperator::identity(a.basis.clone());
    let mut sum = identity.clone();
    let mut term = identity;
    for k in 1..=20 {
        term = term
            .compose_unchecked(&reduced)
            .scale(Complex::new(1.0 / k as f64, 0.0));
        sum = sum.zip_with(&term, |s, t| s + t);
        if term.frobenius_norm() < 1e-18 * sum.frobenius_norm() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.compose_unchecked(&sum);
    }
    sum
}
