use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, FRAC_PI_8};

use serde::{Deserialize, Serialize};

use super::jones::{jones_hwp, jones_qwp, jones_retarder};
use super::{mode_basis, polarization_vector, project_abstract, source_state, ModeLabel, Rail};
use crate::duality::{Attribute, DualityParams, Path, PathAttributeObservable};
use crate::error::{Error, Result};
use crate::qstate::{Basis, Complex, LinearOperator, PureState, STRUCTURE_TOL};

/// Phase convention of the 50:50 path beam splitters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BsConvention {
    /// `(1/√2)[[1, 1], [1, −1]]`
    #[default]
    Hadamard,
    /// `(1/√2)[[1, i], [i, 1]]`
    Symmetric,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ElementKind {
    /// Targets `[H, V]` of one rail.
    Hwp { theta: f64 },
    /// Targets `[H, V]` of one rail.
    Qwp { theta: f64 },
    /// General linear retarder; targets `[H, V]` of one rail.
    Retarder { theta: f64, retardance: f64 },
    /// Beam displacer: targets `[(up, V), (down, V)]`; `H` passes straight, `V`
    /// changes rail.
    Bd,
    /// 50:50 coupler between two modes `[a, b]`.
    Bs {
        convention: BsConvention,
        inverse: bool,
    },
    /// Polarizing splitter between ports `a` and `b`: targets
    /// `[aH, aV, bH, bV]`; `H` is transmitted, `V` reflected.
    Pbs,
    /// Neutral-density filter; amplitude factor `√T` on every target.
    Nd { transmission: f64 },
    /// The post-selection swap `U`: targets `[uH, uV, dH, dV]` of one side.
    /// Moves the encoded particle state of the up rail onto the encoded wave
    /// state of the down rail and back.
    SwapU { phi1: f64, phi2: f64 },
}

impl ElementKind {
    fn arity(&self) -> Option<usize> {
        match self {
            ElementKind::Hwp { .. }
            | ElementKind::Qwp { .. }
            | ElementKind::Retarder { .. }
            | ElementKind::Bd
            | ElementKind::Bs { .. } => Some(2),
            ElementKind::Pbs | ElementKind::SwapU { .. } => Some(4),
            ElementKind::Nd { .. } => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Toolbox,
    PreSelection,
    WeakMeasurement,
    PostSelection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpticalElement {
    pub stage: Stage,
    #[serde(flatten)]
    pub kind: ElementKind,
    pub targets: Vec<ModeLabel>,
}

impl OpticalElement {
    pub fn new(stage: Stage, kind: ElementKind, targets: Vec<ModeLabel>) -> Result<Self> {
        let e = Self {
            stage,
            kind,
            targets,
        };
        e.validate()?;
        Ok(e)
    }

    fn validate(&self) -> Result<()> {
        if self.targets.is_empty() {
            return Err(Error::InvalidCircuit("element without targets".into()));
        }
        if let Some(n) = self.kind.arity() {
            if self.targets.len() != n {
                return Err(Error::InvalidCircuit(format!(
                    "{:?} needs {n} target modes, got {}",
                    self.kind,
                    self.targets.len()
                )));
            }
        }
        for (i, m) in self.targets.iter().enumerate() {
            if self.targets[..i].contains(m) {
                return Err(Error::InvalidCircuit(format!("mode {m} targeted twice")));
            }
        }
        if let ElementKind::Nd { transmission } = self.kind {
            if !(transmission > 0.0 && transmission <= 1.0) {
                return Err(Error::InvalidNdTarget(format!(
                    "transmission {transmission} is outside (0, 1]"
                )));
            }
        }
        Ok(())
    }

    /// Matrix of the element on its own targets, in target order.
    pub fn local_matrix(&self) -> LinearOperator {
        let basis =
            Basis::new(self.targets.iter().map(|m| m.to_string())).expect("targets are distinct");
        let m = match &self.kind {
            ElementKind::Hwp { theta } => jones_hwp(*theta),
            ElementKind::Qwp { theta } => jones_qwp(*theta),
            ElementKind::Retarder { theta, retardance } => jones_retarder(*theta, *retardance),
            ElementKind::Bd => swap2(),
            ElementKind::Bs {
                convention,
                inverse,
            } => {
                let b = splitter(*convention);
                if *inverse {
                    b.adjoint()
                } else {
                    b
                }
            }
            ElementKind::Pbs => {
                let p = [0, 3, 2, 1];
                LinearOperator::from_fn(basis.clone(), |r, c| {
                    Complex::new(if p[r] == c { 1.0 } else { 0.0 }, 0.0)
                })
                .unwrap()
            }
            ElementKind::Nd { transmission } => LinearOperator::identity(basis.clone())
                .scale(Complex::new(transmission.sqrt(), 0.0)),
            ElementKind::SwapU { phi1, phi2 } => swap_u(*phi1, *phi2, basis.clone()),
        };
        m.relabel(basis).expect("arity checked")
    }

    fn act(&self, amps: &mut [Complex]) {
        let m = self.local_matrix();
        let input: Vec<Complex> = self.targets.iter().map(|t| amps[t.index()]).collect();
        let d = input.len();
        for (r, target) in self.targets.iter().enumerate() {
            amps[target.index()] = (0..d).map(|c| m.get(r, c) * input[c]).sum();
        }
    }
}

fn swap2() -> LinearOperator {
    LinearOperator::from_real_rows(Basis::qubit(), &[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
}

fn splitter(convention: BsConvention) -> LinearOperator {
    let r = Complex::new(FRAC_1_SQRT_2, 0.0);
    let data = match convention {
        BsConvention::Hadamard => vec![r, r, r, -r],
        BsConvention::Symmetric => {
            let i = Complex::new(0.0, FRAC_1_SQRT_2);
            vec![r, i, i, r]
        }
    };
    LinearOperator::new(Basis::qubit(), data).unwrap()
}

/// 2×2 unitary whose first column is the unit vector `v`.
fn completion(v: [Complex; 2]) -> [[Complex; 2]; 2] {
    [[v[0], -v[1].conj()], [v[1], v[0].conj()]]
}

fn swap_u(phi1: f64, phi2: f64, basis: Basis) -> LinearOperator {
    let params = DualityParams::with_phases(0.0, phi1, phi2).expect("phases validated upstream");
    let p = completion(polarization_vector(Attribute::Particle, &params));
    let w = completion(polarization_vector(Attribute::Wave, &params));
    // up → down: W·P†, down → up: P·W†
    let mul_adj = |a: &[[Complex; 2]; 2], b: &[[Complex; 2]; 2]| {
        let mut out = [[Complex::default(); 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, e) in row.iter_mut().enumerate() {
                *e = (0..2).map(|k| a[r][k] * b[c][k].conj()).sum();
            }
        }
        out
    };
    let to_down = mul_adj(&w, &p);
    let to_up = mul_adj(&p, &w);
    LinearOperator::from_fn(basis, |r, c| match (r / 2, c / 2) {
        (0, 1) => to_up[r % 2][c % 2],
        (1, 0) => to_down[r % 2][c % 2],
        _ => Complex::default(),
    })
    .unwrap()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Detector {
    D1,
    D2,
    D3,
}

/// Ordered optical elements plus the detector map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCircuit")]
pub struct Circuit {
    elements: Vec<OpticalElement>,
    detectors: BTreeMap<Detector, Vec<ModeLabel>>,
}

#[derive(Deserialize)]
struct RawCircuit {
    elements: Vec<OpticalElement>,
    detectors: BTreeMap<Detector, Vec<ModeLabel>>,
}

impl TryFrom<RawCircuit> for Circuit {
    type Error = Error;

    fn try_from(raw: RawCircuit) -> Result<Self> {
        Circuit::new(raw.elements, raw.detectors)
    }
}

impl Circuit {
    pub fn new(
        elements: Vec<OpticalElement>,
        detectors: BTreeMap<Detector, Vec<ModeLabel>>,
    ) -> Result<Self> {
        for e in &elements {
            e.validate()?;
        }
        let mut seen: Vec<ModeLabel> = Vec::new();
        for modes in detectors.values() {
            for m in modes {
                if seen.contains(m) {
                    return Err(Error::InvalidCircuit(format!(
                        "mode {m} is assigned to two detectors"
                    )));
                }
                seen.push(*m);
            }
        }
        Ok(Self {
            elements,
            detectors,
        })
    }

    pub fn elements(&self) -> &[OpticalElement] {
        &self.elements
    }

    pub fn detectors(&self) -> &BTreeMap<Detector, Vec<ModeLabel>> {
        &self.detectors
    }

    /// Runs the elements whose stage is at most `last`.
    pub fn propagate_through(&self, input: &PureState, last: Stage) -> Result<PureState> {
        if input.basis() != &mode_basis() {
            return Err(Error::BasisMismatch);
        }
        let mut amps = input.amplitudes().to_vec();
        for e in self.elements.iter().filter(|e| e.stage <= last) {
            e.act(&mut amps);
        }
        PureState::new(mode_basis(), amps)
    }

    pub fn propagate(&self, input: &PureState) -> Result<PureState> {
        self.propagate_through(input, Stage::PostSelection)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Serialization(e.to_string()))
    }
}

/// Detector click probabilities plus the weight absorbed by ND filters.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CircuitOutcome {
    pub probabilities: BTreeMap<Detector, f64>,
    pub loss: f64,
    /// Weight left in modes no detector watches.
    pub undetected: f64,
}

impl CircuitOutcome {
    pub fn probability(&self, d: Detector) -> f64 {
        self.probabilities.get(&d).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probabilities.values().sum::<f64>() + self.loss + self.undetected
    }
}

pub fn run_circuit(circuit: &Circuit, input: &PureState) -> Result<CircuitOutcome> {
    let out = circuit.propagate(input)?;
    let probabilities: BTreeMap<Detector, f64> = circuit
        .detectors
        .iter()
        .map(|(d, modes)| (*d, modes.iter().map(|m| out.weight(m.index())).sum()))
        .collect();
    let detected: f64 = probabilities.values().sum();
    Ok(CircuitOutcome {
        probabilities,
        loss: input.norm_sqr() - out.norm_sqr(),
        undetected: out.norm_sqr() - detected,
    })
}

/// ND filter placed on the modes of one path ⊗ attribute component.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NdFilter {
    pub target: PathAttributeObservable,
    pub transmission: f64,
}

pub fn build_setup(params: &DualityParams, nd: Option<NdFilter>) -> Result<Circuit> {
    build_setup_with(params, nd, BsConvention::default())
}

/// The full setup: toolbox, BS1, optional ND, `U` on the right side, BS2 and
/// the detector routing. BS2 is the inverse of BS1 in whichever convention.
pub fn build_setup_with(
    params: &DualityParams,
    nd: Option<NdFilter>,
    convention: BsConvention,
) -> Result<Circuit> {
    use ElementKind::*;
    use Stage::*;

    let up = ModeLabel::pair(Path::L, Rail::Up);
    let down = ModeLabel::pair(Path::L, Rail::Down);
    let mut el = vec![
        // cos α |H⟩ + sin α |V⟩
        OpticalElement::new(
            Toolbox,
            Hwp {
                theta: params.alpha() / 2.0,
            },
            up.to_vec(),
        )?,
        OpticalElement::new(Toolbox, Bd, vec![up[1], down[1]])?,
        // up rail: H → (H + e^{iφ₂}V)/√2
        OpticalElement::new(Toolbox, Hwp { theta: FRAC_PI_8 }, up.to_vec())?,
        OpticalElement::new(
            Toolbox,
            Retarder {
                theta: 0.0,
                retardance: params.phi2(),
            },
            up.to_vec(),
        )?,
        // down rail: V → H → e^{iφ₁/2}(cos(φ₁/2)H − i sin(φ₁/2)V)
        OpticalElement::new(Toolbox, Hwp { theta: FRAC_PI_4 }, down.to_vec())?,
        OpticalElement::new(
            Toolbox,
            Retarder {
                theta: FRAC_PI_4,
                retardance: params.phi1(),
            },
            down.to_vec(),
        )?,
    ];

    let couplers = |stage: Stage, inverse: bool| -> Result<Vec<OpticalElement>> {
        [Rail::Up, Rail::Down]
            .into_iter()
            .flat_map(|rail| {
                ModeLabel::pair(Path::L, rail)
                    .into_iter()
                    .zip(ModeLabel::pair(Path::R, rail))
            })
            .map(|(l, r)| {
                OpticalElement::new(
                    stage,
                    Bs {
                        convention,
                        inverse,
                    },
                    vec![l, r],
                )
            })
            .collect()
    };
    el.extend(couplers(PreSelection, false)?);

    if let Some(f) = nd {
        let modes = ModeLabel::pair(f.target.path, Rail::of(f.target.attribute)).to_vec();
        el.push(OpticalElement::new(
            WeakMeasurement,
            Nd {
                transmission: f.transmission,
            },
            modes,
        )?);
    }

    let mut right = ModeLabel::pair(Path::R, Rail::Up).to_vec();
    right.extend(ModeLabel::pair(Path::R, Rail::Down));
    el.push(OpticalElement::new(
        PostSelection,
        SwapU {
            phi1: params.phi1(),
            phi2: params.phi2(),
        },
        right.clone(),
    )?);
    el.extend(couplers(PostSelection, true)?);

    let detectors = BTreeMap::from([
        (Detector::D1, down.to_vec()),
        (Detector::D2, right),
        (Detector::D3, up.to_vec()),
    ]);
    Circuit::new(el, detectors)
}

/// The undisturbed two-qubit state leaving BS2 (port ⊗ attribute).
pub fn bs2_output_state(params: &DualityParams) -> Result<PureState> {
    let c = build_setup(params, None)?;
    project_abstract(&c.propagate(&source_state())?, params)
}

impl OpticalElement {
    /// `‖E†E − I‖` on the element's support.
    pub fn unitarity_defect(&self) -> f64 {
        self.local_matrix().unitarity_defect()
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_defect() < STRUCTURE_TOL
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duality::{
        abstract_basis, alpha_grid, attribute_swap_on_right, path_beam_splitter, postselection,
        preselection,
    };
    use crate::ite::{normalized_incidence, transmission_to_time};
    use crate::optics::embed_abstract;
    use crate::qstate::inner_product;
    use std::f64::consts::FRAC_PI_2;

    fn params(alpha: f64) -> DualityParams {
        DualityParams::new(alpha).unwrap()
    }

    fn d1(alpha: f64, nd: Option<NdFilter>) -> f64 {
        let c = build_setup(&params(alpha), nd).unwrap();
        run_circuit(&c, &source_state())
            .unwrap()
            .probability(Detector::D1)
    }

    #[test]
    fn d1_probability_without_filter() {
        assert!((d1(FRAC_PI_4, None) - 0.5).abs() < 1e-15);
        assert!((d1(0.0, None) - 0.25).abs() < 1e-15);
        for alpha in alpha_grid(11) {
            let (c, s) = (alpha.cos(), alpha.sin());
            assert!((d1(alpha, None) - (c + s).powi(2) / 4.0).abs() < 1e-14);
        }
    }

    #[test]
    fn filter_on_null_component_leaves_d1_unchanged() {
        for code in ["PL", "WR"] {
            let nd = NdFilter {
                target: code.parse().unwrap(),
                transmission: 0.5,
            };
            for alpha in [0.2, FRAC_PI_4, 1.3] {
                assert!((d1(alpha, Some(nd)) - d1(alpha, None)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn preselection_stage_reproduces_abstract_state() {
        for phases in [(0.0, 0.0), (0.7, 2.1), (FRAC_PI_2, 5.0)] {
            let p = DualityParams::with_phases(0.4, phases.0, phases.1).unwrap();
            let c = build_setup(&p, None).unwrap();
            let s = c
                .propagate_through(&source_state(), Stage::PreSelection)
                .unwrap();
            let expected = embed_abstract(&preselection(&p), &p).unwrap();
            for (a, b) in s.amplitudes().iter().zip(expected.amplitudes()) {
                assert!((a - b).norm() < 1e-15, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn bs2_output_matches_abstract_gates() {
        for alpha in alpha_grid(7) {
            let p = params(alpha);
            let abstract_out = path_beam_splitter()
                .apply(&attribute_swap_on_right().apply(&preselection(&p)).unwrap())
                .unwrap();
            let optical = bs2_output_state(&p).unwrap();
            for (a, b) in optical.amplitudes().iter().zip(abstract_out.amplitudes()) {
                assert!((a - b).norm() < 1e-15);
            }
            assert_eq!(optical.basis(), &abstract_basis());
        }
    }

    #[test]
    fn identity_circuit_keeps_distribution() {
        let detectors: BTreeMap<_, _> = [
            (Detector::D1, vec!["L,u,H".parse().unwrap()]),
            (Detector::D2, vec!["R,d,V".parse().unwrap()]),
        ]
        .into();
        let c = Circuit::new(vec![], detectors).unwrap();
        let mut amps = vec![Complex::default(); 8];
        amps[0] = Complex::new(0.6, 0.0);
        amps[7] = Complex::new(0.0, 0.8);
        let input = PureState::new(mode_basis(), amps).unwrap();
        let out = run_circuit(&c, &input).unwrap();
        assert!((out.probability(Detector::D1) - 0.36).abs() < 1e-15);
        assert!((out.probability(Detector::D2) - 0.64).abs() < 1e-15);
        assert_eq!(out.loss, 0.0);
    }

    #[test]
    fn strong_attenuation_everywhere_loses_the_photon() {
        let all: Vec<ModeLabel> = ModeLabel::all().collect();
        let nd = OpticalElement::new(
            Stage::WeakMeasurement,
            ElementKind::Nd {
                transmission: 1e-300,
            },
            all.clone(),
        )
        .unwrap();
        let c = Circuit::new(vec![nd], BTreeMap::from([(Detector::D1, all)])).unwrap();
        let out = run_circuit(&c, &source_state()).unwrap();
        assert!((out.loss - 1.0).abs() < 1e-15);
        assert!((out.total() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_filters_and_circuits() {
        let nd = NdFilter {
            target: "PR".parse().unwrap(),
            transmission: 0.0,
        };
        assert!(matches!(
            build_setup(&params(0.3), Some(nd)),
            Err(Error::InvalidNdTarget(_))
        ));
        let m: ModeLabel = "L,u,H".parse().unwrap();
        let twice = BTreeMap::from([(Detector::D1, vec![m]), (Detector::D2, vec![m])]);
        assert!(Circuit::new(vec![], twice).is_err());
        assert!(OpticalElement::new(Stage::Toolbox, ElementKind::Bd, vec![m]).is_err());
        assert!(OpticalElement::new(Stage::Toolbox, ElementKind::Bd, vec![m, m]).is_err());
    }

    #[test]
    fn every_lossless_element_is_unitary() {
        for (phi1, phi2) in [(0.0, 0.0), (1.0, 2.0), (3.0, 6.0)] {
            let p = DualityParams::with_phases(0.9, phi1, phi2).unwrap();
            let nd = NdFilter {
                target: "WL".parse().unwrap(),
                transmission: 0.9,
            };
            for convention in [BsConvention::Hadamard, BsConvention::Symmetric] {
                let c = build_setup_with(&p, Some(nd), convention).unwrap();
                for e in c.elements() {
                    match e.kind {
                        ElementKind::Nd { .. } => assert!(!e.is_unitary()),
                        _ => assert!(e.is_unitary(), "{:?}", e.kind),
                    }
                }
            }
        }
        let pbs = OpticalElement::new(
            Stage::PostSelection,
            ElementKind::Pbs,
            ["L,u,H", "L,u,V", "R,u,H", "R,u,V"]
                .iter()
                .map(|s| s.parse().unwrap())
                .collect(),
        )
        .unwrap();
        assert!(pbs.is_unitary());
    }

    #[test]
    fn splitter_convention_does_not_change_probabilities() {
        for alpha in alpha_grid(9) {
            for obs in PathAttributeObservable::ALL {
                for t in [1.0, 0.7, 0.2] {
                    let nd = Some(NdFilter {
                        target: obs,
                        transmission: t,
                    });
                    let run = |conv| {
                        let c = build_setup_with(&params(alpha), nd, conv).unwrap();
                        run_circuit(&c, &source_state()).unwrap()
                    };
                    let (h, s) = (run(BsConvention::Hadamard), run(BsConvention::Symmetric));
                    for d in [Detector::D1, Detector::D2, Detector::D3] {
                        assert!((h.probability(d) - s.probability(d)).abs() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn d1_matches_abstract_layer_with_filters() {
        for alpha in alpha_grid(5) {
            let p = params(alpha);
            let (psi_i, psi_f) = (preselection(&p), postselection());
            let n0 = inner_product(&psi_f, &psi_i).unwrap().norm_sqr();
            for obs in PathAttributeObservable::ALL {
                let tr = 0.6;
                let t = transmission_to_time(tr).unwrap();
                let n = normalized_incidence(&psi_i, &psi_f, &obs.operator(), t).unwrap();
                let optical = d1(
                    alpha,
                    Some(NdFilter {
                        target: obs,
                        transmission: tr,
                    }),
                );
                assert!((optical - n * n0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let p = DualityParams::with_phases(0.3, 0.5, 1.5).unwrap();
        let nd = NdFilter {
            target: "PR".parse().unwrap(),
            transmission: 0.99,
        };
        let c = build_setup(&p, Some(nd)).unwrap();
        let back = Circuit::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        let bad = c.to_json().replace("0.99", "1.5");
        assert!(Circuit::from_json(&bad).is_err());
    }
}
