//! Tangential point redistribution.
//!
//! The tangential velocity `alpha` never changes the shape of the evolving
//! curve; it only moves grid points along it. It is chosen so that the
//! weighted relative spacing `r_phi_i = (N r_i / L) * phi(k_i) / <phi(k)>`
//! relaxes to 1 at rate `omega`: edges in high-curvature regions are kept
//! shorter when the concentration weight `phi` grows with `|k|`.
//!
//! With `epsilon = 0` the weight is identically 1 and the scheme reduces to
//! plain uniform redistribution (equal arc spacing); as `epsilon` approaches 1
//! the weight tends to `|k|` and points crowd into tight bends.
//!
//! Discretely, `d/ds(phi * alpha)` is prescribed per edge, which telescopes
//! into a closed-form prefix sum for `phi(k*_i) * alpha_i`; the remaining
//! constant is fixed by the zero length-weighted mean `sum(r*_i alpha_i) = 0`.

use crate::geometry::{arc_average, dual_edge_quantity, PolygonalCurve};

#[derive(Debug, thiserror::Error)]
pub enum RedistributionError {
    #[error("epsilon must lie in [0, 1), got {0}")]
    EpsilonOutOfRange(f64),
    #[error("relaxation rates must be nonnegative, got kappa1={0}, kappa2={1}")]
    NegativeKappa(f64, f64),
}

/// Redistribution parameters: curvature-weight strength `epsilon` and the
/// relaxation rate `omega(t) = kappa1 + kappa2 * <k beta>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RedistributionParams {
    epsilon: f64,
    kappa1: f64,
    kappa2: f64,
}

impl RedistributionParams {
    pub fn new(epsilon: f64, kappa1: f64, kappa2: f64) -> Result<Self, RedistributionError> {
        if !(0.0..1.0).contains(&epsilon) {
            return Err(RedistributionError::EpsilonOutOfRange(epsilon));
        }
        if !(kappa1 >= 0.0 && kappa2 >= 0.0) {
            return Err(RedistributionError::NegativeKappa(kappa1, kappa2));
        }
        Ok(RedistributionParams { epsilon, kappa1, kappa2 })
    }

    /// Uniform redistribution with no curvature weighting.
    pub fn uniform(kappa1: f64, kappa2: f64) -> Result<Self, RedistributionError> {
        RedistributionParams::new(0.0, kappa1, kappa2)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn kappa1(&self) -> f64 {
        self.kappa1
    }

    pub fn kappa2(&self) -> f64 {
        self.kappa2
    }

    /// Concentration weight `phi(k) = 1 - eps + eps*sqrt(1 - eps + eps*k^2)`,
    /// an even function increasing in `|k|`, equal to 1 for `eps = 0` and
    /// approaching `|k|` as `eps` tends to 1.
    pub fn phi(&self, k: f64) -> f64 {
        let e = self.epsilon;
        1.0 - e + e * (1.0 - e + e * k * k).sqrt()
    }

    /// `d phi / dk = eps^2 * k / sqrt(1 - eps + eps*k^2)`.
    pub fn phi_prime(&self, k: f64) -> f64 {
        let e = self.epsilon;
        e * e * k / (1.0 - e + e * k * k).sqrt()
    }

    /// Relaxation rate `omega = kappa1 + kappa2 * <k beta>`. The second term
    /// tracks the relative length loss of a shrinking curve so redistribution
    /// keeps up as the geometry collapses.
    pub fn omega(&self, curve: &PolygonalCurve, beta: &[f64]) -> f64 {
        self.kappa1 + self.kappa2 * mean_curvature_velocity(curve, beta)
    }

    /// Source term `f_i = phi(k_i) k_i beta_i - phi'(k_i) * (d2 beta / ds2 +
    /// k_i^2 beta_i)` on the current mesh. This is the rate at which the
    /// weighted spacing would drift if `alpha` were zero.
    pub fn compute_f(&self, curve: &PolygonalCurve, beta: &[f64]) -> Vec<f64> {
        let n = curve.n();
        assert_eq!(beta.len(), n);
        let r = curve.edge_lengths();
        let k = curve.edge_curvatures();
        let rstar = dual_edge_quantity(r);
        (0..n)
            .map(|i| {
                let prev = (i + n - 1) % n;
                let next = (i + 1) % n;
                let d2 = ((beta[next] - beta[i]) / rstar[i]
                    - (beta[i] - beta[prev]) / rstar[prev])
                    / r[i];
                self.phi(k[i]) * k[i] * beta[i] - self.phi_prime(k[i]) * (d2 + k[i] * k[i] * beta[i])
            })
            .collect()
    }

    /// Solve for the vertex tangential velocities given the per-edge source
    /// `f` and relaxation rate `omega`. The result has zero length-weighted
    /// mean over the dual edges.
    pub fn solve_alpha(&self, curve: &PolygonalCurve, f: &[f64], omega: f64) -> Vec<f64> {
        let n = curve.n();
        assert_eq!(f.len(), n);
        let r = curve.edge_lengths();
        let k = curve.edge_curvatures();
        let length = curve.total_length();

        let phi_edge: Vec<f64> = k.iter().map(|&ki| self.phi(ki)).collect();
        let phi_dual: Vec<f64> = dual_edge_quantity(k).iter().map(|&ks| self.phi(ks)).collect();
        let r_dual = dual_edge_quantity(r);

        let mean_f = arc_average(f, r);
        let mean_phi = arc_average(&phi_edge, r);

        // Per-edge jump of phi*alpha across the edge:
        // psi_i = r_i f_i - phi_i r_i <f>/<phi> + omega (L <phi>/N - phi_i r_i).
        let target = length * mean_phi / n as f64;
        let psi: Vec<f64> = (0..n)
            .map(|i| {
                r[i] * f[i] - phi_edge[i] * r[i] * mean_f / mean_phi
                    + omega * (target - phi_edge[i] * r[i])
            })
            .collect();

        // Telescoping: phi(k*_i) alpha_i = phi(k*_0) alpha_0 + sum_{l=1..i} psi_l.
        let mut prefix = vec![0.0; n];
        for i in 1..n {
            prefix[i] = prefix[i - 1] + psi[i];
        }

        let mut weighted_prefix = 0.0;
        let mut weight_total = 0.0;
        for i in 0..n {
            let w = r_dual[i] / phi_dual[i];
            weighted_prefix += w * prefix[i];
            weight_total += w;
        }
        let c = -weighted_prefix / weight_total;

        (0..n).map(|i| (c + prefix[i]) / phi_dual[i]).collect()
    }

    /// Weighted relative spacing `r_phi_i = (N r_i / L) * phi(k_i) / <phi>`;
    /// all 1 exactly when the mesh sits at the redistribution target.
    pub fn weighted_spacing_profile(&self, curve: &PolygonalCurve) -> Vec<f64> {
        let n = curve.n() as f64;
        let r = curve.edge_lengths();
        let k = curve.edge_curvatures();
        let length = curve.total_length();
        let phi_edge: Vec<f64> = k.iter().map(|&ki| self.phi(ki)).collect();
        let mean_phi = arc_average(&phi_edge, r);
        (0..curve.n())
            .map(|i| (n * r[i] / length) * phi_edge[i] / mean_phi)
            .collect()
    }

    /// Largest deviation `max_i |r_phi_i - 1|` of the weighted spacing from
    /// its target.
    pub fn max_spacing_deviation(&self, curve: &PolygonalCurve) -> f64 {
        self.weighted_spacing_profile(curve)
            .iter()
            .map(|v| (v - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Length-weighted mean of `k_i beta_i`, the relative length-shrink rate.
pub fn mean_curvature_velocity(curve: &PolygonalCurve, beta: &[f64]) -> f64 {
    let k = curve.edge_curvatures();
    let kb: Vec<f64> = k.iter().zip(beta).map(|(ki, bi)| ki * bi).collect();
    curve.arc_average(&kb)
}

/// `|sum_i r*_i alpha_i|`, the residual of the zero-mean constraint on the
/// dual mesh of `curve`.
pub fn alpha_mean_residual(curve: &PolygonalCurve, alpha: &[f64]) -> f64 {
    let r_dual = dual_edge_quantity(curve.edge_lengths());
    r_dual.iter().zip(alpha).map(|(r, a)| r * a).sum::<f64>().abs()
}
