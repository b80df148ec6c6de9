//! Optional protocol trace, one line per message or transfer operation.

use std::io::Write;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use super::message::Role;

pub const TRACE_HEADER: &str = "time_s,level,role,worker,event,cycle";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceEvent {
    /// A message of this kind was sent by `role`.
    Sent(&'static str),
    /// One smoothing sweep (smoother and minimization) finished.
    Sweep,
    Restrict,
    Prolong,
}

impl TraceEvent {
    pub fn label(&self) -> &'static str {
        match self {
            TraceEvent::Sent(kind) => kind,
            TraceEvent::Sweep => "sweep",
            TraceEvent::Restrict => "restrict",
            TraceEvent::Prolong => "prolong",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub time_s: f64,
    /// Fine level of the boundary the event belongs to.
    pub level: usize,
    pub role: Role,
    /// First worker id of the acting group.
    pub worker: usize,
    pub event: TraceEvent,
    pub cycle: usize,
}

/// Shared, append-only trace sink.
#[derive(Debug, Clone)]
pub struct Trace {
    start: Instant,
    records: Arc<Mutex<Vec<TraceRecord>>>,
}

impl Default for Trace {
    fn default() -> Self {
        Self::new()
    }
}

impl Trace {
    pub fn new() -> Self {
        Self {
            start: Instant::now(),
            records: Arc::new(Mutex::new(Vec::new())),
        }
    }

    pub fn record(&self, level: usize, role: Role, worker: usize, event: TraceEvent, cycle: usize) {
        let rec = TraceRecord {
            time_s: self.start.elapsed().as_secs_f64(),
            level,
            role,
            worker,
            event,
            cycle,
        };
        self.records.lock().unwrap_or_else(|e| e.into_inner()).push(rec);
    }

    pub fn records(&self) -> Vec<TraceRecord> {
        self.records.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn clear(&self) {
        self.records.lock().unwrap_or_else(|e| e.into_inner()).clear();
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{TRACE_HEADER}")?;
        for r in self.records() {
            writeln!(
                out,
                "{:.6},{},{},{},{},{}",
                r.time_s,
                r.level,
                r.role,
                r.worker,
                r.event.label(),
                r.cycle
            )?;
        }
        Ok(())
    }
}
