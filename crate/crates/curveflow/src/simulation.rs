//! Full-run driver: iterates the one-step update under a uniform time step,
//! evaluates stopping rules, and records snapshot/scalar traces.

use crate::flow::FlowModel;
use crate::geometry::PolygonalCurve;
use crate::redistribution::{mean_curvature_velocity, RedistributionParams};
use crate::stepper::{advance_one_step, edge_normal_velocities, StepError};
use crate::vec2::Vec2;

/// When a run is considered finished.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StopMode {
    /// Stop once the enclosed area drops below `area_ratio_threshold` times
    /// the initial area.
    ShrinkToPoint { area_ratio_threshold: f64 },
    /// Stop once both the relative area change and the relative length change
    /// over a single step fall below `rel_change_threshold`.
    SteadyState { rel_change_threshold: f64 },
}

/// A stop mode plus hard guards that turn a stalled run into an error.
#[derive(Clone, Copy, Debug)]
pub struct StopRule {
    pub mode: StopMode,
    /// Error out if this many steps complete without the mode firing.
    pub max_steps: u64,
    /// Error out if simulated time passes this value without the mode firing.
    pub max_time: f64,
}

impl StopRule {
    pub const DEFAULT_AREA_RATIO_THRESHOLD: f64 = 1e-5;
    pub const DEFAULT_REL_CHANGE_THRESHOLD: f64 = 1e-5;
    pub const DEFAULT_MAX_STEPS: u64 = 10_000_000;

    /// Shrink-to-a-point stopping with the default area-ratio threshold.
    pub fn shrink_to_point() -> Self {
        StopRule {
            mode: StopMode::ShrinkToPoint {
                area_ratio_threshold: Self::DEFAULT_AREA_RATIO_THRESHOLD,
            },
            max_steps: Self::DEFAULT_MAX_STEPS,
            max_time: f64::INFINITY,
        }
    }

    /// Steady-state stopping with the default relative-change threshold.
    pub fn steady_state() -> Self {
        StopRule {
            mode: StopMode::SteadyState {
                rel_change_threshold: Self::DEFAULT_REL_CHANGE_THRESHOLD,
            },
            max_steps: Self::DEFAULT_MAX_STEPS,
            max_time: f64::INFINITY,
        }
    }

    fn threshold(&self) -> f64 {
        match self.mode {
            StopMode::ShrinkToPoint {
                area_ratio_threshold,
            } => area_ratio_threshold,
            StopMode::SteadyState {
                rel_change_threshold,
            } => rel_change_threshold,
        }
    }
}

/// Which stop mode actually ended a successful run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StopReason {
    AreaThreshold {
        area_ratio: f64,
    },
    SteadyState {
        area_rel_change: f64,
        length_rel_change: f64,
    },
}

/// Full state captured at one retained time level.
#[derive(Clone, Debug)]
pub struct SnapshotRecord {
    pub step: u64,
    pub t: f64,
    pub vertices: Vec<Vec2>,
    pub edge_lengths: Vec<f64>,
    pub edge_curvatures: Vec<f64>,
    pub edge_angles: Vec<f64>,
    /// Tangential velocities the next step out of this state would apply.
    pub alpha: Vec<f64>,
    pub length: f64,
    pub area: f64,
    pub mean_curvature_velocity: f64,
    pub omega: f64,
    pub max_spacing_deviation: f64,
}

/// Scalar trace recorded at every time level.
#[derive(Clone, Copy, Debug)]
pub struct ScalarRecord {
    pub t: f64,
    pub length: f64,
    pub area: f64,
    pub mean_curvature_velocity: f64,
    pub omega: f64,
    pub max_spacing_deviation: f64,
}

/// Whole-run aggregates, cheap to inspect after the fact.
#[derive(Clone, Debug)]
pub struct RunSummary {
    /// Number of accepted steps.
    pub steps: u64,
    pub final_time: f64,
    /// `None` when the run ended by error rather than by its stop mode.
    pub stop_reason: Option<StopReason>,
    pub initial_area: f64,
    pub final_area: f64,
    /// Largest `|sum r*_i alpha_i| / (L max(1, max|alpha|))` over all steps.
    pub max_normalized_alpha_residual: f64,
    pub min_edge_length_seen: f64,
    pub min_curvature_seen: f64,
    /// Whether enclosed area decreased on every accepted step.
    pub area_monotone: bool,
    /// Whether every recorded vertex and scalar stayed finite.
    pub all_finite: bool,
}

#[derive(Clone, Debug)]
pub struct SimulationOutput {
    pub summary: RunSummary,
    pub snapshots: Vec<SnapshotRecord>,
    pub scalars: Vec<ScalarRecord>,
    pub final_curve: PolygonalCurve,
    /// Present when a shrink-to-point stop fired: the final curve scaled by
    /// `1/sqrt(area)` about its centroid.
    pub final_rescaled: Option<PolygonalCurve>,
}

#[derive(Debug, thiserror::Error)]
pub enum SimulationError {
    #[error("step {step} rejected at t = {time:.6e}: {source}")]
    StepRejected {
        step: u64,
        time: f64,
        source: StepError,
        partial: Box<SimulationOutput>,
    },
    #[error("no stop rule fired within {max_steps} steps")]
    MaxStepsExceeded {
        max_steps: u64,
        partial: Box<SimulationOutput>,
    },
    #[error("no stop rule fired before t = {max_time:.6e}")]
    MaxTimeExceeded {
        max_time: f64,
        partial: Box<SimulationOutput>,
    },
}

impl SimulationError {
    /// The records accumulated before the run ended.
    pub fn partial_output(&self) -> &SimulationOutput {
        match self {
            SimulationError::StepRejected { partial, .. }
            | SimulationError::MaxStepsExceeded { partial, .. }
            | SimulationError::MaxTimeExceeded { partial, .. } => partial,
        }
    }

    pub fn into_partial_output(self) -> SimulationOutput {
        match self {
            SimulationError::StepRejected { partial, .. }
            | SimulationError::MaxStepsExceeded { partial, .. }
            | SimulationError::MaxTimeExceeded { partial, .. } => *partial,
        }
    }
}

fn scalar_probe(
    curve: &PolygonalCurve,
    model: &FlowModel,
    params: &RedistributionParams,
    t: f64,
) -> ScalarRecord {
    let beta = edge_normal_velocities(curve, model);
    ScalarRecord {
        t,
        length: curve.total_length(),
        area: curve.enclosed_area(),
        mean_curvature_velocity: mean_curvature_velocity(curve, &beta),
        omega: params.omega(curve, &beta),
        max_spacing_deviation: params.max_spacing_deviation(curve),
    }
}

fn snapshot_probe(
    step: u64,
    t: f64,
    curve: &PolygonalCurve,
    model: &FlowModel,
    params: &RedistributionParams,
) -> SnapshotRecord {
    let beta = edge_normal_velocities(curve, model);
    let omega = params.omega(curve, &beta);
    let f = params.compute_f(curve, &beta);
    let alpha = params.solve_alpha(curve, &f, omega);
    SnapshotRecord {
        step,
        t,
        vertices: curve.vertices().to_vec(),
        edge_lengths: curve.edge_lengths().to_vec(),
        edge_curvatures: curve.edge_curvatures().to_vec(),
        edge_angles: curve.edge_angles().to_vec(),
        alpha,
        length: curve.total_length(),
        area: curve.enclosed_area(),
        mean_curvature_velocity: mean_curvature_velocity(curve, &beta),
        omega,
        max_spacing_deviation: params.max_spacing_deviation(curve),
    }
}

struct RunState {
    steps: u64,
    curve: PolygonalCurve,
    snapshots: Vec<SnapshotRecord>,
    scalars: Vec<ScalarRecord>,
    initial_area: f64,
    max_normalized_alpha_residual: f64,
    min_edge_length_seen: f64,
    min_curvature_seen: f64,
    area_monotone: bool,
    all_finite: bool,
}

impl RunState {
    fn observe_curve(&mut self, area: f64, length: f64) {
        let curve = &self.curve;
        for &r in curve.edge_lengths() {
            self.min_edge_length_seen = self.min_edge_length_seen.min(r);
        }
        for &k in curve.edge_curvatures() {
            self.min_curvature_seen = self.min_curvature_seen.min(k);
        }
        let finite = curve
            .vertices()
            .iter()
            .all(|v| v.x.is_finite() && v.y.is_finite())
            && area.is_finite()
            && length.is_finite();
        self.all_finite = self.all_finite && finite;
    }

    fn snapshot_if_new(
        &mut self,
        tau: f64,
        model: &FlowModel,
        params: &RedistributionParams,
    ) {
        if self.snapshots.last().map(|s| s.step) != Some(self.steps) {
            let t = self.steps as f64 * tau;
            self.snapshots
                .push(snapshot_probe(self.steps, t, &self.curve, model, params));
        }
    }

    fn into_output(
        self,
        tau: f64,
        stop_reason: Option<StopReason>,
        final_rescaled: Option<PolygonalCurve>,
    ) -> SimulationOutput {
        let summary = RunSummary {
            steps: self.steps,
            final_time: self.steps as f64 * tau,
            stop_reason,
            initial_area: self.initial_area,
            final_area: self.curve.enclosed_area(),
            max_normalized_alpha_residual: self.max_normalized_alpha_residual,
            min_edge_length_seen: self.min_edge_length_seen,
            min_curvature_seen: self.min_curvature_seen,
            area_monotone: self.area_monotone,
            all_finite: self.all_finite,
        };
        SimulationOutput {
            summary,
            snapshots: self.snapshots,
            scalars: self.scalars,
            final_curve: self.curve,
            final_rescaled,
        }
    }
}

/// Run the flow from `initial` until the stop rule fires.
///
/// The time step is uniform for the whole run; there is no adaptivity. A
/// rejected step (mesh collapse or a singular solve) aborts the run, and the
/// returned error carries everything recorded up to the last accepted state.
/// Snapshots are taken at time level 0, every `snapshot_every` accepted steps,
/// and at the final state; the scalar trace covers every time level.
pub fn run_simulation(
    initial: &PolygonalCurve,
    model: &FlowModel,
    params: &RedistributionParams,
    tau: f64,
    stop: &StopRule,
    snapshot_every: u64,
) -> Result<SimulationOutput, SimulationError> {
    assert!(tau > 0.0 && tau.is_finite(), "time step must be positive");
    assert!(stop.threshold() > 0.0, "stop threshold must be positive");
    assert!(snapshot_every >= 1, "snapshot stride must be at least 1");

    let initial_area = initial.enclosed_area();
    let mut state = RunState {
        steps: 0,
        curve: initial.clone(),
        snapshots: Vec::new(),
        scalars: Vec::new(),
        initial_area,
        max_normalized_alpha_residual: 0.0,
        min_edge_length_seen: f64::INFINITY,
        min_curvature_seen: f64::INFINITY,
        area_monotone: true,
        all_finite: true,
    };

    let mut prev_area = initial_area;
    let mut prev_length = initial.total_length();
    state.observe_curve(prev_area, prev_length);
    state.scalars.push(scalar_probe(initial, model, params, 0.0));
    state.snapshot_if_new(tau, model, params);

    loop {
        if state.steps == stop.max_steps {
            state.snapshot_if_new(tau, model, params);
            return Err(SimulationError::MaxStepsExceeded {
                max_steps: stop.max_steps,
                partial: Box::new(state.into_output(tau, None, None)),
            });
        }

        let (next, diag) = match advance_one_step(&state.curve, model, params, tau) {
            Ok(ok) => ok,
            Err(source) => {
                let step = state.steps;
                let time = step as f64 * tau;
                state.snapshot_if_new(tau, model, params);
                return Err(SimulationError::StepRejected {
                    step,
                    time,
                    source,
                    partial: Box::new(state.into_output(tau, None, None)),
                });
            }
        };

        let max_alpha = diag.alpha.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        let normalized = diag.alpha_mean_residual / (prev_length * max_alpha.max(1.0));
        state.max_normalized_alpha_residual =
            state.max_normalized_alpha_residual.max(normalized);

        state.curve = next;
        state.steps += 1;
        let t = state.steps as f64 * tau;

        let record = scalar_probe(&state.curve, model, params, t);
        let (area, length) = (record.area, record.length);
        state.observe_curve(area, length);
        if !(area < prev_area) {
            state.area_monotone = false;
        }
        state.scalars.push(record);
        if state.steps % snapshot_every == 0 {
            state.snapshot_if_new(tau, model, params);
        }

        let fired = match stop.mode {
            StopMode::ShrinkToPoint {
                area_ratio_threshold,
            } => {
                let area_ratio = area / initial_area;
                (area_ratio < area_ratio_threshold).then_some(StopReason::AreaThreshold {
                    area_ratio,
                })
            }
            StopMode::SteadyState {
                rel_change_threshold,
            } => {
                let area_rel_change = (area / prev_area - 1.0).abs();
                let length_rel_change = (length / prev_length - 1.0).abs();
                (area_rel_change.max(length_rel_change) < rel_change_threshold).then_some(
                    StopReason::SteadyState {
                        area_rel_change,
                        length_rel_change,
                    },
                )
            }
        };

        if let Some(reason) = fired {
            state.snapshot_if_new(tau, model, params);
            let final_rescaled = match reason {
                StopReason::AreaThreshold { .. } if area > 0.0 && area.is_finite() => {
                    let center = state.curve.centroid();
                    state.curve.scaled_about(center, 1.0 / area.sqrt()).ok()
                }
                _ => None,
            };
            return Ok(state.into_output(tau, Some(reason), final_rescaled));
        }

        if t >= stop.max_time {
            state.snapshot_if_new(tau, model, params);
            return Err(SimulationError::MaxTimeExceeded {
                max_time: stop.max_time,
                partial: Box::new(state.into_output(tau, None, None)),
            });
        }

        prev_area = area;
        prev_length = length;
    }
}
