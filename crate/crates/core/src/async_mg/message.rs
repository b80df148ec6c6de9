use std::fmt;

/// Payloads exchanged between the smoother and coarse groups of one level boundary.
#[derive(Debug, Clone, PartialEq)]
pub enum MessageKind {
    /// Coarse group finished its correction for the cycle.
    CoarseDone,
    /// Smoother group completed at least one sweep in the cycle.
    SmootherDone,
    /// Coarse-grid correction: the prolonged vector, or the coarse vector when
    /// prolongation runs on the smoother side.
    CoarseCorrection(Vec<f64>),
    /// Fine residual after the exchange minimization; starts the next cycle.
    UpdatedResidual(Vec<f64>),
    Terminate,
}

impl MessageKind {
    pub fn label(&self) -> &'static str {
        match self {
            MessageKind::CoarseDone => "coarse_done",
            MessageKind::SmootherDone => "smoother_done",
            MessageKind::CoarseCorrection(_) => "coarse_correction",
            MessageKind::UpdatedResidual(_) => "updated_residual",
            MessageKind::Terminate => "terminate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeMessage {
    pub kind: MessageKind,
    pub cycle: usize,
}

impl ExchangeMessage {
    pub fn new(kind: MessageKind, cycle: usize) -> Self {
        Self { kind, cycle }
    }
}

/// How the smoother group decides when to stop sweeping within a cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SchedulerMode {
    /// Sweep until the coarse correction arrives (at least once).
    #[default]
    Realtime,
    /// Exactly this many sweeps per cycle, then block for the coarse correction.
    Deterministic { sweeps_per_cycle: usize },
}

impl SchedulerMode {
    pub fn validate(&self) -> crate::Result<()> {
        match self {
            SchedulerMode::Deterministic { sweeps_per_cycle: 0 } => Err(crate::Error::InvalidInput(
                "deterministic scheduler needs at least one sweep per cycle".into(),
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Smoother,
    Coarse,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Smoother => "smoother",
            Role::Coarse => "coarse",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
