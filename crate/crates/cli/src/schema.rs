//! Circuit file format: strict JSON with a closed gate and channel vocabulary.

use crate::error::CliError;
use fgsim::decomp_channel::{ChannelSpec, RotAxis, ZNoise};
use fgsim::{CircuitProgram, Element, Gate, C64};
use serde::{Deserialize, Serialize};

/// Supported schema version.
pub const SCHEMA_VERSION: u32 = 1;

/// Top-level circuit document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitFile {
    pub schema_version: u32,
    pub n: usize,
    pub elements: Vec<ElementSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<serde_json::Value>,
}

/// One element as written in the file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementSpec {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adaptive: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<[f64; 2]>>,
    pub targets: Vec<usize>,
}

/// Parses and validates a circuit document.
pub fn parse_circuit_file(text: &str) -> Result<(CircuitFile, CircuitProgram), CliError> {
    let file: CircuitFile = serde_json::from_str(text).map_err(CliError::from_json)?;
    let program = file.to_program()?;
    Ok((file, program))
}

impl CircuitFile {
    /// Builds the simulator program; errors name the element index.
    pub fn to_program(&self) -> Result<CircuitProgram, CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Validation(format!("unsupported schema_version {}", self.schema_version)));
        }
        let elements = self
            .elements
            .iter()
            .enumerate()
            .map(|(i, e)| e.to_element().map_err(|m| CliError::Validation(format!("element {i}: {m}"))))
            .collect::<Result<Vec<_>, _>>()?;
        CircuitProgram::new(self.n, elements).map_err(CliError::from)
    }

    /// Document describing `program`.
    pub fn from_program(program: &CircuitProgram, metadata: Option<serde_json::Value>) -> Self {
        CircuitFile {
            schema_version: SCHEMA_VERSION,
            n: program.n,
            elements: program.elements.iter().map(ElementSpec::from_element).collect(),
            metadata,
        }
    }
}

fn one(targets: &[usize]) -> Result<usize, String> {
    match targets {
        [q] => Ok(*q),
        t => Err(format!("expected 1 target, got {}", t.len())),
    }
}

fn two(targets: &[usize]) -> Result<[usize; 2], String> {
    match targets {
        [a, b] => Ok([*a, *b]),
        t => Err(format!("expected 2 targets, got {}", t.len())),
    }
}

fn adjacent(targets: &[usize]) -> Result<usize, String> {
    let [a, b] = two(targets)?;
    if b == a + 1 {
        Ok(a)
    } else {
        Err(format!("targets [{a}, {b}] are not neighbours (q, q+1)"))
    }
}

impl ElementSpec {
    fn field<T: Copy>(v: Option<T>, name: &str) -> Result<T, String> {
        v.ok_or_else(|| format!("missing '{name}'"))
    }

    fn reject(&self, allowed: &[&str]) -> Result<(), String> {
        let present = [
            ("theta", self.theta.is_some()),
            ("p", self.p.is_some()),
            ("axis", self.axis.is_some()),
            ("noise", self.noise.is_some()),
            ("adaptive", self.adaptive.is_some()),
            ("matrix", self.matrix.is_some()),
            ("id", self.id.is_some()),
        ];
        match present.iter().find(|(k, set)| *set && !allowed.contains(k)) {
            Some((k, _)) => Err(format!("field '{k}' not allowed here")),
            None => Ok(()),
        }
    }

    fn to_gate(&self, id: &str) -> Result<Gate, String> {
        let t = &self.targets;
        let theta = || Self::field(self.theta, "theta");
        let rotation = matches!(id, "rz" | "rx" | "ry" | "rxx_nn" | "ryy_nn" | "rxy_nn" | "rzz" | "cphase");
        self.reject(match (rotation, id) {
            (true, _) => &["id", "theta"],
            (false, "custom_u4") => &["id", "matrix"],
            _ => &["id"],
        })?;
        Ok(match id {
            "rz" => Gate::Rz { q: one(t)?, theta: theta()? },
            "rx" => Gate::Rx { q: one(t)?, theta: theta()? },
            "ry" => Gate::Ry { q: one(t)?, theta: theta()? },
            "h" => Gate::H(one(t)?),
            "x" => Gate::X(one(t)?),
            "y" => Gate::Y(one(t)?),
            "z" => Gate::Z(one(t)?),
            "rxx_nn" => Gate::RxxNn { q: adjacent(t)?, theta: theta()? },
            "ryy_nn" => Gate::RyyNn { q: adjacent(t)?, theta: theta()? },
            "rxy_nn" => Gate::RxyNn { q: adjacent(t)?, theta: theta()? },
            "fswap" => Gate::Fswap(adjacent(t)?),
            "rzz" => {
                let [q0, q1] = two(t)?;
                Gate::Rzz { q0, q1, theta: theta()? }
            }
            "cphase" => {
                let [q0, q1] = two(t)?;
                Gate::Cphase { q0, q1, theta: theta()? }
            }
            "swap" => {
                let [q0, q1] = two(t)?;
                Gate::Swap { q0, q1 }
            }
            "custom_u4" => {
                let [q0, q1] = two(t)?;
                let m = self.matrix.as_ref().ok_or("missing 'matrix'")?;
                let entries: [C64; 16] = m
                    .iter()
                    .map(|&[re, im]| C64::new(re, im))
                    .collect::<Vec<_>>()
                    .try_into()
                    .map_err(|v: Vec<C64>| format!("matrix needs 16 entries, got {}", v.len()))?;
                Gate::CustomU4 { q0, q1, matrix: Box::new(entries) }
            }
            other => return Err(format!("unknown gate '{other}'")),
        })
    }

    fn to_channel(&self, id: &str) -> Result<ChannelSpec, String> {
        let theta = Self::field(self.theta, "theta")?;
        let p = Self::field(self.p, "p")?;
        match id {
            "noisy_rot" => {
                self.reject(&["id", "theta", "p", "axis"])?;
                let axis = match self.axis.as_deref().ok_or("missing 'axis'")? {
                    "x" => RotAxis::X,
                    "y" => RotAxis::Y,
                    "zz" => RotAxis::Zz,
                    other => return Err(format!("unknown axis '{other}'")),
                };
                let want = if axis == RotAxis::Zz { 2 } else { 1 };
                if self.targets.len() != want {
                    return Err(format!("axis needs {want} target(s), got {}", self.targets.len()));
                }
                Ok(ChannelSpec::NoisyRot { axis, theta, p, targets: self.targets.clone() })
            }
            "noisy_rzz" => {
                self.reject(&["id", "theta", "p", "noise", "adaptive"])?;
                let noise = match self.noise.as_deref().ok_or("missing 'noise'")? {
                    "zz" => ZNoise::Zz,
                    "z1" => ZNoise::Z1,
                    "z2" => ZNoise::Z2,
                    "general" => ZNoise::General,
                    other => return Err(format!("unknown noise '{other}'")),
                };
                Ok(ChannelSpec::NoisyRzz { noise, theta, p, adaptive: self.adaptive.unwrap_or(false), targets: two(&self.targets)? })
            }
            other => Err(format!("unknown channel '{other}'")),
        }
    }

    /// Simulator element for this entry.
    pub fn to_element(&self) -> Result<Element, String> {
        match self.kind.as_str() {
            "gate" => self.to_gate(self.id.as_deref().ok_or("missing 'id'")?).map(Element::Gate),
            "channel" => self.to_channel(self.id.as_deref().ok_or("missing 'id'")?).map(Element::Channel),
            "measure" => {
                self.reject(&[])?;
                Ok(Element::Measure(self.targets.clone()))
            }
            other => Err(format!("unknown element type '{other}'")),
        }
    }

    /// File entry for a simulator element.
    pub fn from_element(e: &Element) -> Self {
        match e {
            Element::Gate(g) => ElementSpec {
                kind: "gate".into(),
                id: Some(g.id().into()),
                theta: g.theta(),
                matrix: match g {
                    Gate::CustomU4 { matrix, .. } => Some(matrix.iter().map(|c| [c.re, c.im]).collect()),
                    _ => None,
                },
                targets: g.targets(),
                ..Default::default()
            },
            Element::Channel(ChannelSpec::NoisyRot { axis, theta, p, targets }) => ElementSpec {
                kind: "channel".into(),
                id: Some("noisy_rot".into()),
                theta: Some(*theta),
                p: Some(*p),
                axis: Some(
                    match axis {
                        RotAxis::X => "x",
                        RotAxis::Y => "y",
                        RotAxis::Zz => "zz",
                    }
                    .into(),
                ),
                targets: targets.clone(),
                ..Default::default()
            },
            Element::Channel(ChannelSpec::NoisyRzz { noise, theta, p, adaptive, targets }) => ElementSpec {
                kind: "channel".into(),
                id: Some("noisy_rzz".into()),
                theta: Some(*theta),
                p: Some(*p),
                noise: Some(
                    match noise {
                        ZNoise::Zz => "zz",
                        ZNoise::Z1 => "z1",
                        ZNoise::Z2 => "z2",
                        ZNoise::General => "general",
                    }
                    .into(),
                ),
                adaptive: Some(*adaptive),
                targets: targets.to_vec(),
                ..Default::default()
            },
            Element::Measure(qs) => ElementSpec { kind: "measure".into(), targets: qs.clone(), ..Default::default() },
        }
    }
}
