use std::ops::Range;

use crate::error::{Error, Result};

/// Worker counts per level for the task-parallel cycle.
///
/// Worker ids are laid out level by level: the smoother workers of level 0
/// first, then level 1, and so on, with the coarsest-level workers last. The
/// coarse role of level `l` owns every worker of the levels below it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupAssignment {
    smoother_workers: Vec<usize>,
    coarsest_workers: usize,
}

impl GroupAssignment {
    /// Explicit assignment; `smoother_workers` has one entry per non-coarsest level.
    pub fn new(smoother_workers: Vec<usize>, coarsest_workers: usize) -> Result<Self> {
        if smoother_workers.iter().any(|&w| w == 0) || coarsest_workers == 0 {
            return Err(Error::InvalidInput(
                "every level needs at least one worker".into(),
            ));
        }
        Ok(Self {
            smoother_workers,
            coarsest_workers,
        })
    }

    pub fn n_levels(&self) -> usize {
        self.smoother_workers.len() + 1
    }

    pub fn smoother_workers(&self) -> &[usize] {
        &self.smoother_workers
    }

    pub fn coarsest_workers(&self) -> usize {
        self.coarsest_workers
    }

    pub fn total_workers(&self) -> usize {
        self.smoother_workers.iter().sum::<usize>() + self.coarsest_workers
    }

    /// Workers doing the smoothing on `level` (the coarsest level's direct solve counts as its smoother role).
    pub fn smoother_count(&self, level: usize) -> usize {
        self.smoother_workers
            .get(level)
            .copied()
            .unwrap_or(self.coarsest_workers)
    }

    /// Workers owned by the coarse role of `level`: all workers of deeper levels.
    pub fn coarse_count(&self, level: usize) -> usize {
        self.coarse_ids(level).len()
    }

    pub fn smoother_ids(&self, level: usize) -> Range<usize> {
        let start: usize = self.smoother_workers.iter().take(level).sum();
        start..start + self.smoother_count(level)
    }

    pub fn coarse_ids(&self, level: usize) -> Range<usize> {
        let start: usize = self.smoother_workers.iter().take(level + 1).sum();
        start.min(self.total_workers())..self.total_workers()
    }
}

/// Split `total_workers` over the levels of a hierarchy with the given DOF
/// counts (finest first, coarsest last).
///
/// The coarsest level gets `coarsest_workers`; the rest are apportioned to the
/// other levels in proportion to their DOFs by largest remainder, with at
/// least one worker per level and ties going to the finer level.
pub fn assign_groups(dofs_per_level: &[usize], total_workers: usize, coarsest_workers: usize) -> Result<GroupAssignment> {
    if dofs_per_level.is_empty() {
        return Err(Error::InvalidInput("hierarchy has no levels".into()));
    }
    if coarsest_workers == 0 {
        return Err(Error::InvalidInput("coarsest_workers must be at least 1".into()));
    }
    let fine = &dofs_per_level[..dofs_per_level.len() - 1];
    let minimum = fine.len() + coarsest_workers;
    if total_workers < minimum {
        return Err(Error::InvalidInput(format!(
            "{total_workers} workers cannot cover {} levels; at least {minimum} are required",
            dofs_per_level.len()
        )));
    }
    if fine.is_empty() {
        return GroupAssignment::new(Vec::new(), total_workers);
    }

    let available = total_workers - coarsest_workers;
    let total_dofs: usize = fine.iter().sum();
    let quota: Vec<f64> = fine
        .iter()
        .map(|&d| available as f64 * d as f64 / total_dofs as f64)
        .collect();
    let mut alloc: Vec<usize> = quota.iter().map(|q| (q.floor() as usize).max(1)).collect();

    // under-allocated: hand out by largest remainder, finer level first on ties
    while alloc.iter().sum::<usize>() < available {
        let mut best = 0;
        for i in 1..alloc.len() {
            if quota[i] - alloc[i] as f64 > quota[best] - alloc[best] as f64 {
                best = i;
            }
        }
        alloc[best] += 1;
    }
    // over-allocated by the minimum-one rule: take from the most over-served level
    while alloc.iter().sum::<usize>() > available {
        let mut worst: Option<usize> = None;
        for i in (0..alloc.len()).rev() {
            if alloc[i] <= 1 {
                continue;
            }
            let excess = alloc[i] as f64 - quota[i];
            if worst.map_or(true, |w| excess > alloc[w] as f64 - quota[w]) {
                worst = Some(i);
            }
        }
        alloc[worst.expect("total >= minimum leaves a level above one")] -= 1;
    }
    GroupAssignment::new(alloc, coarsest_workers)
}
