use std::fmt;
use std::io::Write;

/// CSV header of a convergence history.
pub const HISTORY_HEADER: &str = "step,residual,type";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RecordKind {
    Initial,
    Smoother,
    Coarse,
    Final,
}

impl RecordKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RecordKind::Initial => "initial",
            RecordKind::Smoother => "smoother",
            RecordKind::Coarse => "coarse",
            RecordKind::Final => "final",
        }
    }
}

impl fmt::Display for RecordKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryRecord {
    pub step: usize,
    pub residual: f64,
    pub kind: RecordKind,
}

/// Finest-level residual norm after every minimization step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceHistory {
    records: Vec<HistoryRecord>,
}

impl ConvergenceHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, kind: RecordKind, residual: f64) {
        let step = self.records.len();
        self.records.push(HistoryRecord {
            step,
            residual,
            kind,
        });
    }

    pub fn records(&self) -> &[HistoryRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn residuals(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.residual)
    }

    pub fn count(&self, kind: RecordKind) -> usize {
        self.records.iter().filter(|r| r.kind == kind).count()
    }

    pub fn is_non_increasing(&self) -> bool {
        self.records
            .windows(2)
            .all(|w| w[1].residual <= w[0].residual)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{HISTORY_HEADER}")?;
        for r in &self.records {
            writeln!(out, "{},{:e},{}", r.step, r.residual, r.kind)?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec");
        String::from_utf8(buf).expect("ascii output")
    }
}
