//! Data-encoding circuits `U(x)` for the Z, ZZ and Pauli-X feature maps.
//!
//! Every repetition starts with a Hadamard layer followed by the family's
//! phase layer. Single-qubit terms rotate by `2·x_i`; ZZ pair terms rotate by
//! `2·(π − x_i)(π − x_j)` over all pairs `i < j`.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevector::{Gate, Statevector, MAX_QUBITS};

pub const MAX_REPS: usize = 4;
pub const DEFAULT_REPS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureMapFamily {
    Zz,
    Z,
    PauliX,
}

impl FeatureMapFamily {
    pub const ALL: [FeatureMapFamily; 3] = [FeatureMapFamily::Zz, FeatureMapFamily::Z, FeatureMapFamily::PauliX];

    pub fn as_str(&self) -> &'static str {
        match self {
            FeatureMapFamily::Z => "z",
            FeatureMapFamily::Zz => "zz",
            FeatureMapFamily::PauliX => "paulix",
        }
    }
}

impl fmt::Display for FeatureMapFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureMapFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "z" => Ok(FeatureMapFamily::Z),
            "zz" => Ok(FeatureMapFamily::Zz),
            "paulix" | "pauli-x" | "x" => Ok(FeatureMapFamily::PauliX),
            other => Err(Error::InvalidParameter(alloc::format!("unknown feature map '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureMapSpec {
    pub family: FeatureMapFamily,
    pub n_features: usize,
    pub reps: usize,
}

impl FeatureMapSpec {
    pub fn new(family: FeatureMapFamily, n_features: usize, reps: usize) -> Result<Self> {
        let spec = Self { family, n_features, reps };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_QUBITS).contains(&self.n_features) {
            return Err(Error::QubitCount(self.n_features));
        }
        if !(1..=MAX_REPS).contains(&self.reps) {
            return Err(Error::InvalidParameter(alloc::format!("reps {} outside 1..={MAX_REPS}", self.reps)));
        }
        Ok(())
    }
}

/// Rotation angle of a templated RZ, as a function of the input features.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angle {
    /// `2·x_i`
    Single(usize),
    /// `2·(π − x_i)(π − x_j)`
    Pair(usize, usize),
}

impl Angle {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            Angle::Single(i) => 2.0 * x[i],
            Angle::Pair(i, j) => 2.0 * (PI - x[i]) * (PI - x[j]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateTemplate {
    H(usize),
    Rz(usize, Angle),
    Cx(usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitDescription {
    pub n_qubits: usize,
    pub gates: Vec<GateTemplate>,
}

impl CircuitDescription {
    /// Instantiates the templated angles with `x`.
    pub fn bind(&self, x: &[f64]) -> Result<Vec<Gate>> {
        check_features(self.n_qubits, x)?;
        Ok(self
            .gates
            .iter()
            .map(|g| match *g {
                GateTemplate::H(target) => Gate::H { target },
                GateTemplate::Rz(target, angle) => Gate::Rz { target, theta: angle.eval(x) },
                GateTemplate::Cx(control, target) => Gate::Cx { control, target },
            })
            .collect())
    }

    pub fn has_entangling_gates(&self) -> bool {
        self.gates.iter().any(|g| matches!(g, GateTemplate::Cx(..)))
    }
}

pub fn build_feature_map(spec: &FeatureMapSpec) -> Result<CircuitDescription> {
    spec.validate()?;
    let n = spec.n_features;
    let mut block = Vec::new();
    block.extend((0..n).map(GateTemplate::H));
    match spec.family {
        FeatureMapFamily::Z => {
            block.extend((0..n).map(|i| GateTemplate::Rz(i, Angle::Single(i))));
        }
        FeatureMapFamily::Zz => {
            block.extend((0..n).map(|i| GateTemplate::Rz(i, Angle::Single(i))));
            for i in 0..n {
                for j in (i + 1)..n {
                    block.push(GateTemplate::Cx(i, j));
                    block.push(GateTemplate::Rz(j, Angle::Pair(i, j)));
                    block.push(GateTemplate::Cx(i, j));
                }
            }
        }
        FeatureMapFamily::PauliX => {
            // exp(-i x X) written as a basis change around RZ
            for i in 0..n {
                block.push(GateTemplate::H(i));
                block.push(GateTemplate::Rz(i, Angle::Single(i)));
                block.push(GateTemplate::H(i));
            }
        }
    }
    let mut gates = Vec::with_capacity(block.len() * spec.reps);
    for _ in 0..spec.reps {
        gates.extend_from_slice(&block);
    }
    Ok(CircuitDescription { n_qubits: n, gates })
}

fn check_features(n: usize, x: &[f64]) -> Result<()> {
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: x.len() });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("feature value"));
    }
    Ok(())
}

/// Prepares `U(x)|0⟩` for a circuit that was already built.
pub fn encode_with(circuit: &CircuitDescription, x: &[f64]) -> Result<Statevector> {
    let gates = circuit.bind(x)?;
    if x.iter().any(|v| v.abs() > 1.0) {
        log::debug!("feature vector outside [-1, 1] encoded as-is");
    }
    let mut state = Statevector::zero_state(circuit.n_qubits)?;
    for g in &gates {
        state.apply(g)?;
    }
    Ok(state)
}

/// `|φ(x)⟩ = U(x)|0⟩`
pub fn encode(spec: &FeatureMapSpec, x: &[f64]) -> Result<Statevector> {
    encode_with(&build_feature_map(spec)?, x)
}

/// Human-readable gate list, e.g. `H0 H1 RZ(2x0)@0`.
pub fn describe(circuit: &CircuitDescription) -> String {
    use core::fmt::Write;
    let mut out = String::new();
    for (k, g) in circuit.gates.iter().enumerate() {
        if k > 0 {
            out.push(' ');
        }
        let _ = match g {
            GateTemplate::H(q) => write!(out, "H{q}"),
            GateTemplate::Rz(q, Angle::Single(i)) => write!(out, "RZ(2x{i})@{q}"),
            GateTemplate::Rz(q, Angle::Pair(i, j)) => write!(out, "RZ(2(pi-x{i})(pi-x{j}))@{q}"),
            GateTemplate::Cx(c, t) => write!(out, "CX({c},{t})"),
        };
    }
    out
}
