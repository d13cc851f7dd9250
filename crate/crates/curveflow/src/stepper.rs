//! One semi-implicit time step of the curve evolution.
//!
//! A step advances the discrete state `(x, r, k, nu)` by a uniform time
//! increment `tau` in six stages:
//!
//! 1. solve the tangential velocity `alpha` in closed form,
//! 2. update edge lengths pointwise (implicit in the shrink term),
//! 3. update curvatures by a cyclic tridiagonal solve,
//! 4. update tangent angles by a cyclic tridiagonal solve whose wrap rows
//!    carry the `2*pi` winding of a closed curve,
//! 5. update vertex positions with one factorization shared by both
//!    coordinates,
//! 6. recompute all discrete quantities from the new vertices, keeping the
//!    evolved angles only as the branch reference for unwrapping.
//!
//! Coefficients are lagged so every stage is a linear solve; which quantities
//! enter at the old versus the new time level is pinned by the unit tests.

use crate::flow::{unit_normal, unit_tangent, FlowModel};
use crate::geometry::{
    dual_edge_angles, dual_edge_quantity, dual_vertex_quantity, recompute_discrete_quantities,
    GeometryError, PolygonalCurve,
};
use crate::redistribution::{alpha_mean_residual, mean_curvature_velocity, RedistributionParams};
use crate::solver::{CyclicTridiagonal, SolverError};
use crate::vec2::Vec2;
use std::f64::consts::TAU;

#[derive(Debug, thiserror::Error)]
pub enum StepError {
    #[error(
        "mesh collapse at edge {index}: updated length {updated_length:.6e} \
         (denominator {denominator:.6e}); retry with a smaller time step"
    )]
    MeshCollapse {
        index: usize,
        updated_length: f64,
        denominator: f64,
    },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Per-step diagnostics recorded alongside the updated curve.
#[derive(Clone, Debug)]
pub struct StepDiagnostics {
    /// Relaxation rate used for redistribution this step.
    pub omega: f64,
    /// Length-weighted mean of `k beta` on the starting curve.
    pub mean_curvature_velocity: f64,
    /// Vertex tangential velocities applied during the step.
    pub alpha: Vec<f64>,
    /// Edge normal velocities at the start of the step.
    pub beta: Vec<f64>,
    /// `|sum r*_i alpha_i|` on the starting curve.
    pub alpha_mean_residual: f64,
    /// `max_i |r_phi_i - 1|` of the updated curve.
    pub max_spacing_deviation: f64,
    pub min_edge_length: f64,
    pub max_edge_length: f64,
}

/// Normal velocity `beta_i = w(m_i, k_i, nu_i) k_i + F(m_i, nu_i)` per edge,
/// evaluated at the edge midpoints `m_i`.
pub fn edge_normal_velocities(curve: &PolygonalCurve, model: &FlowModel) -> Vec<f64> {
    let mids = curve.edge_midpoints();
    (0..curve.n())
        .map(|i| model.beta(mids[i], curve.edge_curvatures()[i], curve.edge_angles()[i]))
        .collect()
}

/// Pointwise length update: `r_i' = (r_i + tau (alpha_i - alpha_{i-1})) /
/// (1 + tau k_i beta_i)`, implicit in the curvature-shrink term.
pub fn step_lengths(
    curve: &PolygonalCurve,
    alpha: &[f64],
    beta: &[f64],
    tau: f64,
) -> Result<Vec<f64>, StepError> {
    let n = curve.n();
    let r = curve.edge_lengths();
    let k = curve.edge_curvatures();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let tail = (i + n - 1) % n;
        let denominator = 1.0 + tau * k[i] * beta[i];
        let updated = (r[i] + tau * (alpha[i] - alpha[tail])) / denominator;
        if !(denominator > 0.0) || !(updated > 0.0) || !updated.is_finite() {
            return Err(StepError::MeshCollapse {
                index: i,
                updated_length: updated,
                denominator,
            });
        }
        out.push(updated);
    }
    Ok(out)
}

/// Curvature update on the new mesh: for each edge,
/// `(1/tau - k_i b_i) k_i' + (a*_i / (2 r_i')) k_{i-1}' - (a*_i / (2 r_i')) k_{i+1}'
///  = k_i / tau + d2(beta)_i` with the second difference of the old `beta`
/// taken over the new lengths.
pub fn step_curvature(
    curve: &PolygonalCurve,
    r_new: &[f64],
    alpha: &[f64],
    beta: &[f64],
    tau: f64,
) -> Result<Vec<f64>, StepError> {
    let n = curve.n();
    let k = curve.edge_curvatures();
    let alpha_dual = dual_vertex_quantity(alpha);
    let rstar = dual_edge_quantity(r_new);
    let mut sub = Vec::with_capacity(n);
    let mut diag = Vec::with_capacity(n);
    let mut sup = Vec::with_capacity(n);
    let mut rhs = Vec::with_capacity(n);
    for i in 0..n {
        let prev = (i + n - 1) % n;
        let next = (i + 1) % n;
        let advection = alpha_dual[i] / (2.0 * r_new[i]);
        sub.push(advection);
        sup.push(-advection);
        diag.push(1.0 / tau - k[i] * beta[i]);
        let d2 = ((beta[next] - beta[i]) / rstar[i] - (beta[i] - beta[prev]) / rstar[prev])
            / r_new[i];
        rhs.push(k[i] / tau + d2);
    }
    Ok(CyclicTridiagonal::new(sub, diag, sup)?.solve(&rhs)?)
}

/// Tangent-angle update, fully implicit in `nu`: diffusion with coefficient
/// `beta_k`, advection with speed `a*_i + beta_nu`, and the positional source
/// `grad beta . T`. All model derivatives are evaluated at the old midpoint
/// and angle but the new curvature. The wrap rows substitute
/// `nu_{-1} = nu_{N-1} - 2*pi` and `nu_N = nu_0 + 2*pi`, which moves the
/// winding constants onto the right-hand side.
pub fn step_angles(
    curve: &PolygonalCurve,
    r_new: &[f64],
    k_new: &[f64],
    alpha: &[f64],
    model: &FlowModel,
    tau: f64,
) -> Result<Vec<f64>, StepError> {
    let n = curve.n();
    let nu = curve.edge_angles();
    let mids = curve.edge_midpoints();
    let alpha_dual = dual_vertex_quantity(alpha);
    let rstar = dual_edge_quantity(r_new);
    let mut sub = Vec::with_capacity(n);
    let mut diag = Vec::with_capacity(n);
    let mut sup = Vec::with_capacity(n);
    let mut rhs = Vec::with_capacity(n);
    for i in 0..n {
        let prev = (i + n - 1) % n;
        let diffusion = model.beta_k(mids[i], k_new[i], nu[i]);
        let advection = alpha_dual[i] + model.beta_nu(mids[i], k_new[i], nu[i]);
        sub.push(-diffusion / (r_new[i] * rstar[prev]) + advection / (2.0 * r_new[i]));
        sup.push(-diffusion / (r_new[i] * rstar[i]) - advection / (2.0 * r_new[i]));
        diag.push(1.0 / tau + diffusion * (1.0 / rstar[i] + 1.0 / rstar[prev]) / r_new[i]);
        let source = model
            .grad_x_beta(mids[i], k_new[i], nu[i])
            .dot(unit_tangent(nu[i]));
        rhs.push(nu[i] / tau + source);
    }
    rhs[0] += TAU * sub[0];
    rhs[n - 1] -= TAU * sup[n - 1];
    Ok(CyclicTridiagonal::new(sub, diag, sup)?.solve(&rhs)?)
}

/// Position update. Per vertex `v` with incoming edge `v` and outgoing edge
/// `v+1`, the row over the dual length `r*_v` is
///
/// ```text
/// x_{v-1}: -tau (w_v / (r_v r*_v) - alpha_v / (2 r*_v))
/// x_v:      1 + tau w_v (1/r_{v+1} + 1/r_v) / r*_v
/// x_{v+1}: -tau (w_v / (r_{v+1} r*_v) + alpha_v / (2 r*_v))
/// rhs:      x_v + tau F(x_v, nu*_v) N(nu*_v)
/// ```
///
/// with `w_v = w(x_v, k*_v, nu*_v)` on the dual (vertex) values of the new
/// curvature and angle. One factorization serves both coordinates, so the
/// two columns are solved with bitwise-identical elimination.
pub fn step_positions(
    curve: &PolygonalCurve,
    r_new: &[f64],
    k_new: &[f64],
    nu_new: &[f64],
    alpha: &[f64],
    model: &FlowModel,
    tau: f64,
) -> Result<Vec<Vec2>, StepError> {
    let n = curve.n();
    let x = curve.vertices();
    let kstar = dual_edge_quantity(k_new);
    let nustar = dual_edge_angles(nu_new);
    let rstar = dual_edge_quantity(r_new);
    let mut sub = Vec::with_capacity(n);
    let mut diag = Vec::with_capacity(n);
    let mut sup = Vec::with_capacity(n);
    let mut rhs_x = Vec::with_capacity(n);
    let mut rhs_y = Vec::with_capacity(n);
    for v in 0..n {
        let next = (v + 1) % n;
        let w = model.weight(x[v], kstar[v], nustar[v]);
        sub.push(-tau * (w / (r_new[v] * rstar[v]) - alpha[v] / (2.0 * rstar[v])));
        diag.push(1.0 + tau * w * (1.0 / r_new[next] + 1.0 / r_new[v]) / rstar[v]);
        sup.push(-tau * (w / (r_new[next] * rstar[v]) + alpha[v] / (2.0 * rstar[v])));
        let forcing = model.forcing(x[v], nustar[v]);
        let normal = unit_normal(nustar[v]);
        rhs_x.push(x[v].x + tau * forcing * normal.x);
        rhs_y.push(x[v].y + tau * forcing * normal.y);
    }
    let matrix = CyclicTridiagonal::new(sub, diag, sup)?;
    let columns = matrix.solve_many(&[&rhs_x, &rhs_y])?;
    Ok(columns[0]
        .iter()
        .zip(&columns[1])
        .map(|(&cx, &cy)| Vec2::new(cx, cy))
        .collect())
}

/// Advance the curve by one time step; returns the updated curve (with all
/// discrete quantities recomputed from the new vertices) and diagnostics.
pub fn advance_one_step(
    curve: &PolygonalCurve,
    model: &FlowModel,
    params: &RedistributionParams,
    tau: f64,
) -> Result<(PolygonalCurve, StepDiagnostics), StepError> {
    assert!(tau > 0.0 && tau.is_finite(), "time step must be positive");
    let beta = edge_normal_velocities(curve, model);
    let mean_kb = mean_curvature_velocity(curve, &beta);
    let omega = params.omega(curve, &beta);
    let f = params.compute_f(curve, &beta);
    let alpha = params.solve_alpha(curve, &f, omega);
    let residual = alpha_mean_residual(curve, &alpha);

    let r_new = step_lengths(curve, &alpha, &beta, tau)?;
    let k_new = step_curvature(curve, &r_new, &alpha, &beta, tau)?;
    let nu_new = step_angles(curve, &r_new, &k_new, &alpha, model, tau)?;
    let x_new = step_positions(curve, &r_new, &k_new, &nu_new, &alpha, model, tau)?;
    let next = recompute_discrete_quantities(x_new, Some(&nu_new))?;

    let min_edge_length = next.edge_lengths().iter().cloned().fold(f64::INFINITY, f64::min);
    let max_edge_length = next.edge_lengths().iter().cloned().fold(0.0, f64::max);
    let diagnostics = StepDiagnostics {
        omega,
        mean_curvature_velocity: mean_kb,
        alpha,
        beta,
        alpha_mean_residual: residual,
        max_spacing_deviation: params.max_spacing_deviation(&next),
        min_edge_length,
        max_edge_length,
    };
    Ok((next, diagnostics))
}
