//! Evolution of closed plane curves under curvature-driven normal velocities,
//! discretized by a flowing finite-volume scheme with curvature-adjusted
//! tangential point redistribution.
//!
//! The crate is organized bottom-up:
//!
//! - [`vec2`]: minimal 2D vector arithmetic.
//! - [`geometry`]: polygonal curves and their discrete quantities (edge
//!   lengths, curvatures, tangent angles, areas).
//! - [`flow`]: the normal-velocity models `beta = w(x, k, nu) * k + F(x, nu)`.
//! - [`solver`]: cyclic tridiagonal linear systems.
//! - [`redistribution`]: the tangential velocity that keeps grid points
//!   well spaced as the curve deforms.
//! - [`stepper`]: the semi-implicit one-step update.
//! - [`simulation`]: the full-run driver with stopping rules and traces.
//! - [`config`]: TOML run descriptions and named presets.
//! - [`output`]: CSV and SVG artifact emission.

pub mod config;
pub mod flow;
pub mod geometry;
pub mod output;
pub mod redistribution;
pub mod simulation;
pub mod solver;
pub mod stepper;
pub mod vec2;

#[cfg(test)]
pub(crate) mod testutil;

pub use config::{
    load_config, parse_config, preset, ConfigError, FlowSpec, SimulationConfig, StopModeSpec,
    StopSpec, PRESET_NAMES,
};
pub use flow::{FlowError, FlowModel};
pub use geometry::{GeometryError, InitialCurveSpec, PolygonalCurve, sample_initial_curve};
pub use output::{
    read_series_csv, render_curve_svg, render_svg, write_snapshots, OutputError, SeriesFrame,
    WrittenFiles,
};
pub use redistribution::{RedistributionError, RedistributionParams};
pub use simulation::{
    run_simulation, RunSummary, ScalarRecord, SimulationError, SimulationOutput, SnapshotRecord,
    StopMode, StopReason, StopRule,
};
pub use solver::{CyclicTridiagonal, SolverError};
pub use stepper::{advance_one_step, StepDiagnostics, StepError};
pub use vec2::Vec2;
