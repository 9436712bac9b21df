//! Optional per-tick event log for debugging runs.

use std::path::Path;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SimEventKind {
    Spawn,
    Enqueue,
    Discharge,
    Arrive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimEvent {
    pub tick: u32,
    #[serde(rename = "event")]
    pub kind: SimEventKind,
    pub vehicle: u32,
    pub edge: usize,
    pub node: usize,
}

/// Write events as CSV with header `tick,event,vehicle,edge,node`.
pub fn write_event_log(events: &[SimEvent], path: impl AsRef<Path>) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    for e in events {
        w.serialize(e)?;
    }
    w.flush()?;
    Ok(())
}
