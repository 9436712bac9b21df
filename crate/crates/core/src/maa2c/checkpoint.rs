//! Versioned binary checkpoints: a JSON header followed by every parameter,
//! its Adam moments and step counter as little-endian values.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ControlMode, Maa2cError};
use crate::agents::AgentSet;
use crate::neuralcore::{AgentNet, NetSpec, Param};
use crate::netmodel::Scenario;

const MAGIC: &[u8; 8] = b"JFLOWCKP";
pub const CHECKPOINT_VERSION: u32 = 1;

/// The policy and value networks of one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentNets {
    pub policy: AgentNet,
    pub value: AgentNet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentShape {
    pub name: String,
    pub policy: NetSpec,
    pub value: NetSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub version: u32,
    pub scenario_name: String,
    /// The scenario document the networks were trained on.
    pub scenario_source: String,
    pub mode: ControlMode,
    pub seed: u64,
    pub episodes: usize,
    pub control_steps: usize,
    pub agents: Vec<AgentShape>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub meta: CheckpointMeta,
    pub nets: Vec<AgentNets>,
}

fn put_param(out: &mut Vec<u8>, p: &Param) {
    out.extend_from_slice(&(p.value.rows as u32).to_le_bytes());
    out.extend_from_slice(&(p.value.cols as u32).to_le_bytes());
    out.extend_from_slice(&p.step.to_le_bytes());
    for t in [&p.value, &p.m, &p.v] {
        for x in &t.data {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], Maa2cError> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.bytes.len());
        let Some(end) = end else {
            return Err(Maa2cError::Checkpoint("file is truncated".into()));
        };
        let out = &self.bytes[self.at..end];
        self.at = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32, Maa2cError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, Maa2cError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, out: &mut [f64]) -> Result<(), Maa2cError> {
        let raw = self.take(out.len() * 8)?;
        for (x, chunk) in out.iter_mut().zip(raw.chunks_exact(8)) {
            *x = f64::from_le_bytes(chunk.try_into().unwrap());
        }
        Ok(())
    }

    fn param(&mut self, p: &mut Param) -> Result<(), Maa2cError> {
        let rows = self.u32()? as usize;
        let cols = self.u32()? as usize;
        if (rows, cols) != p.value.shape() {
            return Err(Maa2cError::Checkpoint(format!(
                "parameter shape {rows}x{cols} does not match the declared network ({}x{})",
                p.value.rows, p.value.cols
            )));
        }
        p.step = self.u64()?;
        self.f64s(&mut p.value.data)?;
        self.f64s(&mut p.m.data)?;
        self.f64s(&mut p.v.data)?;
        p.zero_grad();
        Ok(())
    }
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let header = serde_json::to_vec(&self.meta).expect("checkpoint metadata serialises");
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        out.extend_from_slice(&(header.len() as u64).to_le_bytes());
        out.extend_from_slice(&header);
        for nets in &self.nets {
            for net in [&nets.policy, &nets.value] {
                for p in net.params() {
                    put_param(&mut out, p);
                }
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, Maa2cError> {
        let mut r = Reader { bytes, at: 0 };
        if r.take(8)? != MAGIC {
            return Err(Maa2cError::Checkpoint("not a checkpoint file".into()));
        }
        let version = r.u32()?;
        if version != CHECKPOINT_VERSION {
            return Err(Maa2cError::Checkpoint(format!(
                "unsupported checkpoint version {version} (expected {CHECKPOINT_VERSION})"
            )));
        }
        let len = r.u64()? as usize;
        let meta: CheckpointMeta = serde_json::from_slice(r.take(len)?)
            .map_err(|e| Maa2cError::Checkpoint(format!("bad header: {e}")))?;
        let mut nets = Vec::with_capacity(meta.agents.len());
        for shape in &meta.agents {
            let mut pair = AgentNets {
                policy: AgentNet::init(shape.policy.clone(), 0),
                value: AgentNet::init(shape.value.clone(), 0),
            };
            for net in [&mut pair.policy, &mut pair.value] {
                for p in net.params_mut() {
                    r.param(p)?;
                }
            }
            nets.push(pair);
        }
        if r.at != bytes.len() {
            return Err(Maa2cError::Checkpoint("trailing bytes after the last parameter".into()));
        }
        Ok(Checkpoint { meta, nets })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), Maa2cError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).map_err(|source| Maa2cError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, Maa2cError> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|source| Maa2cError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_bytes(&bytes)
    }

    /// Rebuild the scenario stored in the checkpoint.
    pub fn scenario(&self) -> Result<Scenario, Maa2cError> {
        Ok(Scenario::from_toml(&self.meta.scenario_source)?)
    }

    /// Fail unless the networks fit the agents of `set` one for one.
    pub fn check_topology(&self, set: &AgentSet) -> Result<(), Maa2cError> {
        if self.nets.len() != set.len() {
            return Err(Maa2cError::Topology(format!(
                "checkpoint has {} agents, scenario has {}",
                self.nets.len(),
                set.len()
            )));
        }
        for (g, shape) in self.meta.agents.iter().enumerate() {
            let expected = super::net_spec(set, g, crate::neuralcore::HeadKind::Policy);
            if shape.name != set.id(g).to_string() || shape.policy.blocks != expected.blocks || shape.policy.outputs != expected.outputs {
                return Err(Maa2cError::Topology(format!(
                    "agent {} does not match the scenario's agent {}",
                    shape.name,
                    set.id(g)
                )));
            }
        }
        Ok(())
    }
}
