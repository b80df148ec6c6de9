//! Level-local stopping rules.
//!
//! The finest level stops on a relative or absolute residual tolerance. Coarse
//! levels stop after a residual reduction factor or an iteration cap, whichever
//! comes first; from the third coarse level on, one iteration per visit.

/// Stopping rule for one coarse level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelRule {
    /// Stop once `r <= factor * r0`.
    pub reduction: Option<f64>,
    pub max_iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceCriteria {
    pub relative_tolerance: f64,
    pub absolute_tolerance: f64,
    pub level1: LevelRule,
    pub level2: LevelRule,
    pub deeper: LevelRule,
}

impl Default for ConvergenceCriteria {
    fn default() -> Self {
        Self {
            relative_tolerance: 1e-8,
            absolute_tolerance: 1e-8,
            level1: LevelRule {
                reduction: Some(0.1),
                max_iterations: 20,
            },
            level2: LevelRule {
                reduction: Some(0.5),
                max_iterations: 2,
            },
            deeper: LevelRule {
                reduction: None,
                max_iterations: 1,
            },
        }
    }
}

impl ConvergenceCriteria {
    pub fn with_relative_tolerance(mut self, tol: f64) -> Self {
        self.relative_tolerance = tol;
        self
    }

    pub fn rule(&self, level: usize) -> Option<&LevelRule> {
        match level {
            0 => None,
            1 => Some(&self.level1),
            2 => Some(&self.level2),
            _ => Some(&self.deeper),
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        let bad = |m: String| Err(crate::Error::InvalidInput(m));
        if !(self.relative_tolerance >= 0.0 && self.absolute_tolerance >= 0.0) {
            return bad("tolerances must be non-negative".into());
        }
        for (name, rule) in [("level1", &self.level1), ("level2", &self.level2), ("deeper", &self.deeper)] {
            if let Some(f) = rule.reduction {
                if !(f > 0.0 && f <= 1.0) {
                    return bad(format!("{name} reduction factor must lie in (0, 1], got {f}"));
                }
            }
            if rule.max_iterations == 0 {
                return bad(format!("{name} iteration cap must be at least 1"));
            }
        }
        Ok(())
    }
}

/// Whether level `level` may stop after `iterations` iterations with residual
/// norm `r_norm`, starting from `r0_norm`.
pub fn level_converged(
    level: usize,
    r_norm: f64,
    r0_norm: f64,
    iterations: usize,
    criteria: &ConvergenceCriteria,
) -> bool {
    if r_norm == 0.0 {
        return true;
    }
    match criteria.rule(level) {
        None => {
            r_norm <= criteria.relative_tolerance * r0_norm || r_norm <= criteria.absolute_tolerance
        }
        Some(rule) => {
            rule.reduction.is_some_and(|f| r_norm <= f * r0_norm)
                || iterations >= rule.max_iterations
        }
    }
}
