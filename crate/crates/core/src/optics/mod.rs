//! Eight-mode physical model of the interferometer.
//!
//! A mode is `(side, rail, polarization)` with side `L`/`R`, rail up/down and
//! polarization `H`/`V`; the canonical index is `4·side + 2·rail + pol`.
//!
//! Encoding of the abstract `{L,R} ⊗ {P,W}` space:
//!
//! | abstract | optical modes                                              |
//! |----------|------------------------------------------------------------|
//! | `s⊗P`    | up rail of side `s`, polarization `(H + e^{iφ₂}V)/√2`        |
//! | `s⊗W`    | down rail of side `s`, `e^{iφ₁/2}(cos(φ₁/2)H − i sin(φ₁/2)V)` |
//!
//! The `X` element is not a gate. After BS2 the `L` side carries the `+`
//! port; its down rail (the wave rail) goes to D1 and its up rail to D3.
//! The `−` port (`R` side) goes to D2.

mod circuit;
mod jones;

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::duality::{abstract_basis, particle_state, wave_state, Attribute, DualityParams, Path};
use crate::error::{Error, Result};
use crate::qstate::{Basis, Complex, PureState};

pub use circuit::{
    bs2_output_state, build_setup, build_setup_with, run_circuit, BsConvention, Circuit,
    CircuitOutcome, Detector, ElementKind, NdFilter, OpticalElement, Stage,
};
pub use jones::{jones_hwp, jones_qwp, jones_retarder};

/// Leakage outside the encoded subspace tolerated by [`project_abstract`].
pub const LEAKAGE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rail {
    Up,
    Down,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pol {
    H,
    V,
}

impl Rail {
    /// The rail that carries an attribute.
    pub fn of(attribute: Attribute) -> Rail {
        match attribute {
            Attribute::Particle => Rail::Up,
            Attribute::Wave => Rail::Down,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ModeLabel {
    pub side: Path,
    pub rail: Rail,
    pub pol: Pol,
}

impl ModeLabel {
    pub const fn new(side: Path, rail: Rail, pol: Pol) -> Self {
        Self { side, rail, pol }
    }

    pub fn index(self) -> usize {
        4 * self.side as usize + 2 * self.rail as usize + self.pol as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        (index < 8).then(|| {
            let side = if index & 4 == 0 { Path::L } else { Path::R };
            let rail = if index & 2 == 0 { Rail::Up } else { Rail::Down };
            let pol = if index & 1 == 0 { Pol::H } else { Pol::V };
            Self::new(side, rail, pol)
        })
    }

    pub fn all() -> impl Iterator<Item = ModeLabel> {
        (0..8).filter_map(ModeLabel::from_index)
    }

    /// The `[H, V]` pair of one rail.
    pub fn pair(side: Path, rail: Rail) -> [ModeLabel; 2] {
        [
            ModeLabel::new(side, rail, Pol::H),
            ModeLabel::new(side, rail, Pol::V),
        ]
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = match self.side {
            Path::L => "L",
            Path::R => "R",
        };
        let rail = match self.rail {
            Rail::Up => "u",
            Rail::Down => "d",
        };
        let pol = match self.pol {
            Pol::H => "H",
            Pol::V => "V",
        };
        write!(f, "{side},{rail},{pol}")
    }
}

impl FromStr for ModeLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [side, rail, pol] = parts[..] else {
            return Err(format!("mode label `{s}` is not `side,rail,pol`"));
        };
        let side = match side {
            "L" => Path::L,
            "R" => Path::R,
            _ => return Err(format!("bad side in `{s}`")),
        };
        let rail = match rail {
            "u" => Rail::Up,
            "d" => Rail::Down,
            _ => return Err(format!("bad rail in `{s}`")),
        };
        let pol = match pol {
            "H" => Pol::H,
            "V" => Pol::V,
            _ => return Err(format!("bad polarization in `{s}`")),
        };
        Ok(Self::new(side, rail, pol))
    }
}

impl TryFrom<String> for ModeLabel {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<ModeLabel> for String {
    fn from(m: ModeLabel) -> Self {
        m.to_string()
    }
}

pub fn mode_basis() -> Basis {
    static B: OnceLock<Basis> = OnceLock::new();
    B.get_or_init(|| Basis::new(ModeLabel::all().map(|m| m.to_string())).unwrap())
        .clone()
}

/// Single photon in `(L, up, H)`, the port fed by the source.
pub fn source_state() -> PureState {
    PureState::basis_vector(mode_basis(), 0).unwrap()
}

fn polarization_vector(attribute: Attribute, params: &DualityParams) -> [Complex; 2] {
    let s = match attribute {
        Attribute::Particle => particle_state(params.phi2()),
        Attribute::Wave => wave_state(params.phi1()),
    };
    [s.amplitudes()[0], s.amplitudes()[1]]
}

const SLOTS: [(Path, Attribute); 4] = [
    (Path::L, Attribute::Particle),
    (Path::L, Attribute::Wave),
    (Path::R, Attribute::Particle),
    (Path::R, Attribute::Wave),
];

/// Maps an abstract 4-dim state into the 8 optical modes.
pub fn embed_abstract(state: &PureState, params: &DualityParams) -> Result<PureState> {
    if state.basis() != &abstract_basis() {
        return Err(Error::BasisMismatch);
    }
    let mut amps = vec![Complex::default(); 8];
    for (k, &(side, attr)) in SLOTS.iter().enumerate() {
        let a = state.amplitudes()[k];
        let pol = polarization_vector(attr, params);
        for (mode, p) in ModeLabel::pair(side, Rail::of(attr)).iter().zip(pol) {
            amps[mode.index()] += a * p;
        }
    }
    PureState::new(mode_basis(), amps)
}

/// Inverse of [`embed_abstract`] on the encoded subspace.
pub fn project_abstract(state: &PureState, params: &DualityParams) -> Result<PureState> {
    if state.basis() != &mode_basis() {
        return Err(Error::BasisMismatch);
    }
    let amps: Vec<Complex> = SLOTS
        .iter()
        .map(|&(side, attr)| {
            let pol = polarization_vector(attr, params);
            ModeLabel::pair(side, Rail::of(attr))
                .iter()
                .zip(pol)
                .map(|(m, p)| p.conj() * state.amplitudes()[m.index()])
                .sum()
        })
        .collect();
    let projected = PureState::new(abstract_basis(), amps)?;
    let back = embed_abstract(&projected, params)?;
    let leakage = state
        .amplitudes()
        .iter()
        .zip(back.amplitudes())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    if leakage > LEAKAGE_TOL {
        return Err(Error::Leakage { leakage });
    }
    Ok(projected)
}
