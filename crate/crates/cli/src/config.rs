//! Run configuration: TOML with dotted keys or `[section]` tables.
//!
//! Every field has a default, so an empty file describes the circular-interface
//! benchmark on a 64 x 64 grid solved by the multiplicative cycle.

use std::fmt;
use std::path::Path;
use std::time::Duration;

use orthomg::async_mg::{AsyncOptions, SchedulerMode, TransferPlacement};
use orthomg::{ConvergenceCriteria, CycleConfig, LevelRule, Precision, ProblemSpec, SmootherConfig, SolverOptions, Variant};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Environment variable overriding `workers`; takes precedence over the file.
pub const WORKERS_ENV: &str = "ORTHOMG_WORKERS";

/// Invalid configuration; the CLI maps it to its own exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn invalid<T>(key: &str, msg: impl fmt::Display) -> Result<T, ConfigError> {
    Err(ConfigError(format!("invalid config: {key}: {msg}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhsMode {
    /// Constant source `problem.source` in every cell.
    Constant,
    /// Uniform values in `[-1, 1)` drawn from `seed`.
    Random,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmootherKind {
    Schwarz,
    BlockJacobi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecisionName {
    Double,
    Single,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchedulerName {
    Realtime,
    Deterministic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlacementName {
    CoarseGroup,
    Split,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemSection {
    pub dimension: usize,
    pub cells_per_axis: usize,
    pub half_width: f64,
    pub radius_factor: f64,
    pub k_inner: f64,
    pub k_outer: f64,
    pub source: f64,
    pub rhs: RhsMode,
}

impl Default for ProblemSection {
    fn default() -> Self {
        let p = ProblemSpec::default();
        Self {
            dimension: p.dimension,
            cells_per_axis: p.cells_per_axis,
            half_width: p.half_width,
            radius_factor: p.radius_factor,
            k_inner: p.k_inner,
            k_outer: p.k_outer,
            source: p.rhs,
            rhs: RhsMode::Constant,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HierarchySection {
    pub min_coarse_dofs: usize,
}

impl Default for HierarchySection {
    fn default() -> Self {
        Self { min_coarse_dofs: 1024 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub variant: String,
    pub max_outer_iterations: usize,
    pub max_search_columns: usize,
    pub scheduler: SchedulerName,
    /// Sweeps per cycle for the deterministic scheduler.
    pub sweeps_per_cycle: usize,
    pub placement: PlacementName,
    pub watchdog_seconds: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let cycle = CycleConfig::default();
        Self {
            variant: Variant::MultiplicativeSync.as_str().into(),
            max_outer_iterations: cycle.max_outer_iterations,
            max_search_columns: cycle.max_search_columns,
            scheduler: SchedulerName::Realtime,
            sweeps_per_cycle: 1,
            placement: PlacementName::CoarseGroup,
            watchdog_seconds: orthomg::async_mg::DEFAULT_WATCHDOG.as_secs_f64(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SmootherSection {
    pub kind: SmootherKind,
    pub cells_per_subdomain: usize,
    pub overlap: usize,
    pub precision: PrecisionName,
    pub iterations: usize,
    pub tile: usize,
    pub omega: f64,
    pub sweeps: usize,
}

impl Default for SmootherSection {
    fn default() -> Self {
        let (SmootherConfig::Schwarz { cells_per_subdomain, overlap, iterations, .. }, SmootherConfig::BlockJacobi { tile, omega, sweeps }) =
            (SmootherConfig::schwarz(), SmootherConfig::block_jacobi())
        else {
            unreachable!("default smoother constructors")
        };
        Self {
            kind: SmootherKind::Schwarz,
            cells_per_subdomain,
            overlap,
            precision: PrecisionName::Double,
            iterations,
            tile,
            omega,
            sweeps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CriteriaSection {
    pub relative_tolerance: f64,
    pub absolute_tolerance: f64,
    pub level1_reduction: f64,
    pub level1_max_iterations: usize,
    pub level2_reduction: f64,
    pub level2_max_iterations: usize,
    pub deeper_max_iterations: usize,
}

impl Default for CriteriaSection {
    fn default() -> Self {
        let c = ConvergenceCriteria::default();
        Self {
            relative_tolerance: c.relative_tolerance,
            absolute_tolerance: c.absolute_tolerance,
            level1_reduction: c.level1.reduction.unwrap_or(1.0),
            level1_max_iterations: c.level1.max_iterations,
            level2_reduction: c.level2.reduction.unwrap_or(1.0),
            level2_max_iterations: c.level2.max_iterations,
            deeper_max_iterations: c.deeper.max_iterations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareSection {
    pub variants: Vec<String>,
}

impl Default for CompareSection {
    fn default() -> Self {
        Self {
            variants: Variant::ALL.iter().map(|v| v.as_str().to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalingSection {
    pub workers: Vec<usize>,
    pub sizes: Vec<usize>,
    pub variants: Vec<String>,
}

impl Default for ScalingSection {
    fn default() -> Self {
        Self {
            workers: vec![1, 2, 4, 8],
            sizes: vec![64],
            variants: vec![Variant::AdditiveTaskParallel.as_str().into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Used when `--output` is not given.
    pub directory: String,
    /// Write `trace.csv` with every protocol message of task-parallel runs.
    pub trace: bool,
    /// Write the assembled fine-level system as `matrix.mtx` and `rhs.csv`.
    pub export_system: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: "results".into(),
            trace: false,
            export_system: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub workers: usize,
    pub coarsest_workers: usize,
    pub repetitions: usize,
    pub problem: ProblemSection,
    pub hierarchy: HierarchySection,
    pub solver: SolverSection,
    pub smoother: SmootherSection,
    pub criteria: CriteriaSection,
    pub compare: CompareSection,
    pub scaling: ScalingSection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            workers: 1,
            coarsest_workers: 1,
            repetitions: 3,
            problem: ProblemSection::default(),
            hierarchy: HierarchySection::default(),
            solver: SolverSection::default(),
            smoother: SmootherSection::default(),
            criteria: CriteriaSection::default(),
            compare: CompareSection::default(),
            scaling: ScalingSection::default(),
            output: OutputSection::default(),
        }
    }
}

fn parse_variant(key: &str, name: &str) -> Result<Variant, ConfigError> {
    name.parse::<Variant>().or_else(|e| invalid(key, e))
}

/// Number of levels `build_hierarchy` produces, computed without assembling anything.
pub fn level_count(dimension: usize, cells_per_axis: usize, min_coarse_dofs: usize) -> usize {
    let mut n = cells_per_axis;
    let mut levels = 1;
    while n.pow(dimension as u32) > min_coarse_dofs && n > 2 && n % 2 == 0 {
        n /= 2;
        levels += 1;
    }
    levels
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(format!("invalid config: {e}")))
    }

    /// Read, apply the environment override and validate.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if let Ok(value) = std::env::var(WORKERS_ENV) {
            cfg.workers = value
                .trim()
                .parse()
                .map_err(|_| ConfigError(format!("invalid {WORKERS_ENV}: expected a positive integer, got '{value}'")))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// SHA-256 of the canonical serialization.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn variant(&self) -> Result<Variant, ConfigError> {
        parse_variant("solver.variant", &self.solver.variant)
    }

    pub fn compare_variants(&self) -> Result<Vec<Variant>, ConfigError> {
        self.compare.variants.iter().map(|v| parse_variant("compare.variants", v)).collect()
    }

    pub fn scaling_variants(&self) -> Result<Vec<Variant>, ConfigError> {
        self.scaling.variants.iter().map(|v| parse_variant("scaling.variants", v)).collect()
    }

    pub fn problem_spec(&self) -> ProblemSpec {
        let p = &self.problem;
        ProblemSpec {
            dimension: p.dimension,
            half_width: p.half_width,
            cells_per_axis: p.cells_per_axis,
            radius_factor: p.radius_factor,
            k_inner: p.k_inner,
            k_outer: p.k_outer,
            rhs: p.source,
        }
    }

    pub fn smoother_config(&self) -> SmootherConfig {
        let s = &self.smoother;
        match s.kind {
            SmootherKind::Schwarz => SmootherConfig::Schwarz {
                cells_per_subdomain: s.cells_per_subdomain,
                overlap: s.overlap,
                precision: match s.precision {
                    PrecisionName::Double => Precision::Double,
                    PrecisionName::Single => Precision::Single,
                },
                iterations: s.iterations,
            },
            SmootherKind::BlockJacobi => SmootherConfig::BlockJacobi {
                tile: s.tile,
                omega: s.omega,
                sweeps: s.sweeps,
            },
        }
    }

    pub fn criteria(&self) -> ConvergenceCriteria {
        let c = &self.criteria;
        ConvergenceCriteria {
            relative_tolerance: c.relative_tolerance,
            absolute_tolerance: c.absolute_tolerance,
            level1: LevelRule {
                reduction: Some(c.level1_reduction),
                max_iterations: c.level1_max_iterations,
            },
            level2: LevelRule {
                reduction: Some(c.level2_reduction),
                max_iterations: c.level2_max_iterations,
            },
            deeper: LevelRule {
                reduction: None,
                max_iterations: c.deeper_max_iterations,
            },
        }
    }

    pub fn cycle_config(&self) -> CycleConfig {
        CycleConfig {
            criteria: self.criteria(),
            max_outer_iterations: self.solver.max_outer_iterations,
            max_search_columns: self.solver.max_search_columns,
            ..CycleConfig::default()
        }
    }

    /// Solver options for `variant` on `workers` workers; the trace sink is added by the caller.
    pub fn solver_options(&self, variant: Variant, workers: usize) -> SolverOptions {
        let scheduler = match self.solver.scheduler {
            SchedulerName::Realtime => SchedulerMode::Realtime,
            SchedulerName::Deterministic => SchedulerMode::Deterministic {
                sweeps_per_cycle: self.solver.sweeps_per_cycle,
            },
        };
        let async_options = AsyncOptions {
            scheduler,
            watchdog: Duration::from_secs_f64(self.solver.watchdog_seconds),
            placement: match self.solver.placement {
                PlacementName::CoarseGroup => TransferPlacement::CoarseGroup,
                PlacementName::Split => TransferPlacement::Split,
            },
            ..AsyncOptions::default()
        };
        SolverOptions {
            variant,
            cycle: self.cycle_config(),
            workers,
            coarsest_workers: self.coarsest_workers,
            async_options,
        }
    }

    pub fn levels_for(&self, cells_per_axis: usize) -> usize {
        level_count(self.problem.dimension, cells_per_axis, self.hierarchy.min_coarse_dofs)
    }

    /// Check every field; nothing is allocated before this passes.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.workers == 0 {
            return invalid("workers", "must be at least 1");
        }
        if self.coarsest_workers == 0 {
            return invalid("coarsest_workers", "must be at least 1");
        }
        if self.repetitions == 0 {
            return invalid("repetitions", "must be at least 1");
        }
        let p = &self.problem;
        if let Err(e) = self.problem_spec().validate() {
            let msg = e.to_string();
            let field = ["dimension", "cells_per_axis", "half_width", "radius_factor", "k_inner", "k_outer", "rhs"]
                .into_iter()
                .find(|f| msg.contains(f))
                .map(|f| if f == "rhs" { "source" } else { f })
                .unwrap_or("problem");
            return invalid(&format!("problem.{field}"), msg);
        }
        if self.hierarchy.min_coarse_dofs < 4 {
            return invalid("hierarchy.min_coarse_dofs", format!("must be at least 4, got {}", self.hierarchy.min_coarse_dofs));
        }

        let s = &self.solver;
        let variant = self.variant()?;
        if s.max_outer_iterations == 0 {
            return invalid("solver.max_outer_iterations", "must be at least 1");
        }
        if s.max_search_columns == 0 {
            return invalid("solver.max_search_columns", "must be at least 1");
        }
        if s.sweeps_per_cycle == 0 {
            return invalid("solver.sweeps_per_cycle", "must be at least 1");
        }
        if !(s.watchdog_seconds > 0.0 && s.watchdog_seconds.is_finite()) {
            return invalid("solver.watchdog_seconds", format!("must be positive, got {}", s.watchdog_seconds));
        }
        let levels = self.levels_for(p.cells_per_axis);
        let needed = variant.min_workers(levels, self.coarsest_workers);
        if self.workers < needed {
            return invalid(
                "workers",
                format!("{variant} on a {levels}-level hierarchy needs at least {needed} workers, got {}", self.workers),
            );
        }
        if variant == Variant::Hybrid && levels < 2 {
            return invalid("solver.variant", "hybrid needs at least two levels; lower hierarchy.min_coarse_dofs");
        }

        let m = &self.smoother;
        match m.kind {
            SmootherKind::Schwarz => {
                if m.cells_per_subdomain == 0 {
                    return invalid("smoother.cells_per_subdomain", "must be at least 1");
                }
                if m.iterations == 0 {
                    return invalid("smoother.iterations", "must be at least 1");
                }
            }
            SmootherKind::BlockJacobi => {
                if m.tile == 0 {
                    return invalid("smoother.tile", "must be at least 1");
                }
                if !(m.omega > 0.0 && m.omega <= 2.0) {
                    return invalid("smoother.omega", format!("must lie in (0, 2], got {}", m.omega));
                }
                if m.sweeps == 0 {
                    return invalid("smoother.sweeps", "must be at least 1");
                }
            }
        }

        let c = &self.criteria;
        for (key, value) in [("relative_tolerance", c.relative_tolerance), ("absolute_tolerance", c.absolute_tolerance)] {
            if !(value >= 0.0 && value.is_finite()) {
                return invalid(&format!("criteria.{key}"), format!("must be non-negative, got {value}"));
            }
        }
        for (key, value) in [("level1_reduction", c.level1_reduction), ("level2_reduction", c.level2_reduction)] {
            if !(value > 0.0 && value <= 1.0) {
                return invalid(&format!("criteria.{key}"), format!("must lie in (0, 1], got {value}"));
            }
        }
        for (key, value) in [
            ("level1_max_iterations", c.level1_max_iterations),
            ("level2_max_iterations", c.level2_max_iterations),
            ("deeper_max_iterations", c.deeper_max_iterations),
        ] {
            if value == 0 {
                return invalid(&format!("criteria.{key}"), "must be at least 1");
            }
        }

        if self.compare.variants.is_empty() {
            return invalid("compare.variants", "must list at least one variant");
        }
        self.compare_variants()?;
        if self.scaling.variants.is_empty() {
            return invalid("scaling.variants", "must list at least one variant");
        }
        self.scaling_variants()?;
        if self.scaling.workers.is_empty() || self.scaling.workers.contains(&0) {
            return invalid("scaling.workers", "must list positive worker counts");
        }
        if self.scaling.sizes.is_empty() {
            return invalid("scaling.sizes", "must list at least one grid size");
        }
        for &n in &self.scaling.sizes {
            let spec = ProblemSpec {
                cells_per_axis: n,
                ..self.problem_spec()
            };
            if let Err(e) = spec.validate() {
                return invalid("scaling.sizes", e);
            }
        }
        Ok(())
    }
}
