//! Normal-velocity laws `beta(x, k, nu) = w(x, k, nu) * k + F(x, nu)`.
//!
//! Each model exposes the weight `w`, the forcing `F`, and the partial
//! derivatives of `beta` that the semi-implicit stepper linearizes against:
//! `d beta / dk`, `d beta / dnu`, and the spatial gradient `grad_x beta`.
//! Built-in models provide these in closed form; user-supplied models fall
//! back to centered finite differences and say so via
//! [`FlowModel::uses_finite_difference_derivatives`].

use crate::vec2::Vec2;
use std::fmt;
use std::sync::Arc;

/// Step used for the finite-difference fallback of custom models.
pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, thiserror::Error)]
pub enum FlowError {
    #[error("curvature regularization delta must be positive, got {0}")]
    NonpositiveDelta(f64),
    #[error("anisotropy weight must stay positive; minimum over angles is {min}")]
    WeightNotPositive { min: f64 },
}

pub type CustomWeightFn = dyn Fn(Vec2, f64, f64) -> f64 + Send + Sync;
pub type CustomForcingFn = dyn Fn(Vec2, f64) -> f64 + Send + Sync;

/// Unit tangent for a tangent angle `nu`.
pub fn unit_tangent(nu: f64) -> Vec2 {
    Vec2::new(nu.cos(), nu.sin())
}

/// Unit normal for a tangent angle `nu` (tangent rotated by +pi/2, pointing
/// into the enclosed region for counterclockwise curves).
pub fn unit_normal(nu: f64) -> Vec2 {
    Vec2::new(-nu.sin(), nu.cos())
}

#[derive(Clone)]
pub enum FlowModel {
    /// `beta = k`.
    CurveShortening,
    /// `beta = k * (delta^2 + k^2)^(-1/3)`, a smoothed cube-root-of-curvature
    /// law; `delta` caps the slope at small `|k|`.
    Affine { delta: f64 },
    /// `beta = (1 - a*cos(m*(nu - nu0))) * k`: direction-dependent weighting
    /// of the shortening speed.
    Anisotropic { a: f64, m: u32, nu0: f64 },
    /// `beta = k + grad(h).N` for the potential `h(x) = p*cos(q*(4*x^2 + y^2))`
    /// whose level sets are concentric ellipses.
    ForcedElliptic { p: f64, q: f64 },
    /// `beta = k + grad(h).N` for the potential `h(x) = p*sin(q*pi*|x|^2)`
    /// whose level sets are concentric circles.
    ForcedRadial { p: f64, q: f64 },
    /// User-supplied weight and forcing; derivatives come from centered
    /// finite differences with step [`FD_STEP`].
    Custom {
        weight: Arc<CustomWeightFn>,
        forcing: Arc<CustomForcingFn>,
    },
}

impl fmt::Debug for FlowModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowModel::CurveShortening => write!(f, "CurveShortening"),
            FlowModel::Affine { delta } => write!(f, "Affine {{ delta: {delta} }}"),
            FlowModel::Anisotropic { a, m, nu0 } => {
                write!(f, "Anisotropic {{ a: {a}, m: {m}, nu0: {nu0} }}")
            }
            FlowModel::ForcedElliptic { p, q } => write!(f, "ForcedElliptic {{ p: {p}, q: {q} }}"),
            FlowModel::ForcedRadial { p, q } => write!(f, "ForcedRadial {{ p: {p}, q: {q} }}"),
            FlowModel::Custom { .. } => write!(f, "Custom {{ .. }}"),
        }
    }
}

impl FlowModel {
    pub fn curve_shortening() -> FlowModel {
        FlowModel::CurveShortening
    }

    pub fn affine(delta: f64) -> Result<FlowModel, FlowError> {
        if !(delta > 0.0) {
            return Err(FlowError::NonpositiveDelta(delta));
        }
        Ok(FlowModel::Affine { delta })
    }

    pub fn anisotropic(a: f64, m: u32, nu0: f64) -> Result<FlowModel, FlowError> {
        let min = 1.0 - a.abs();
        if !(min > 0.0) {
            return Err(FlowError::WeightNotPositive { min });
        }
        Ok(FlowModel::Anisotropic { a, m, nu0 })
    }

    pub fn forced_elliptic(p: f64, q: f64) -> FlowModel {
        FlowModel::ForcedElliptic { p, q }
    }

    pub fn forced_radial(p: f64, q: f64) -> FlowModel {
        FlowModel::ForcedRadial { p, q }
    }

    pub fn custom(weight: Arc<CustomWeightFn>, forcing: Arc<CustomForcingFn>) -> FlowModel {
        FlowModel::Custom { weight, forcing }
    }

    pub fn uses_finite_difference_derivatives(&self) -> bool {
        matches!(self, FlowModel::Custom { .. })
    }

    /// Curvature weight `w`; strictly positive for all built-in models.
    pub fn weight(&self, x: Vec2, k: f64, nu: f64) -> f64 {
        match self {
            FlowModel::CurveShortening
            | FlowModel::ForcedElliptic { .. }
            | FlowModel::ForcedRadial { .. } => 1.0,
            FlowModel::Affine { delta } => (delta * delta + k * k).powf(-1.0 / 3.0),
            FlowModel::Anisotropic { a, m, nu0 } => {
                1.0 - a * (f64::from(*m) * (nu - nu0)).cos()
            }
            FlowModel::Custom { weight, .. } => weight(x, k, nu),
        }
    }

    /// Curvature-independent forcing `F`.
    pub fn forcing(&self, x: Vec2, nu: f64) -> f64 {
        match self {
            FlowModel::CurveShortening
            | FlowModel::Affine { .. }
            | FlowModel::Anisotropic { .. } => 0.0,
            FlowModel::ForcedElliptic { p, q } => {
                let s = q * (4.0 * x.x * x.x + x.y * x.y);
                -2.0 * p * q * s.sin() * (-4.0 * x.x * nu.sin() + x.y * nu.cos())
            }
            FlowModel::ForcedRadial { p, q } => {
                let s = q * std::f64::consts::PI * x.dot(x);
                2.0 * p * q * std::f64::consts::PI * s.cos() * x.dot(unit_normal(nu))
            }
            FlowModel::Custom { forcing, .. } => forcing(x, nu),
        }
    }

    /// Normal velocity `beta = w * k + F`.
    pub fn beta(&self, x: Vec2, k: f64, nu: f64) -> f64 {
        self.weight(x, k, nu) * k + self.forcing(x, nu)
    }

    /// `d beta / dk` at fixed position and angle.
    pub fn beta_k(&self, x: Vec2, k: f64, nu: f64) -> f64 {
        match self {
            FlowModel::CurveShortening
            | FlowModel::ForcedElliptic { .. }
            | FlowModel::ForcedRadial { .. } => 1.0,
            FlowModel::Affine { delta } => {
                let u = delta * delta + k * k;
                u.powf(-1.0 / 3.0) - (2.0 / 3.0) * k * k * u.powf(-4.0 / 3.0)
            }
            FlowModel::Anisotropic { .. } => self.weight(x, k, nu),
            FlowModel::Custom { .. } => {
                (self.beta(x, k + FD_STEP, nu) - self.beta(x, k - FD_STEP, nu)) / (2.0 * FD_STEP)
            }
        }
    }

    /// `d beta / dnu` at fixed position and curvature.
    pub fn beta_nu(&self, x: Vec2, k: f64, nu: f64) -> f64 {
        match self {
            FlowModel::CurveShortening | FlowModel::Affine { .. } => 0.0,
            FlowModel::Anisotropic { a, m, nu0 } => {
                let mf = f64::from(*m);
                a * mf * (mf * (nu - nu0)).sin() * k
            }
            FlowModel::ForcedElliptic { p, q } => {
                let s = q * (4.0 * x.x * x.x + x.y * x.y);
                -2.0 * p * q * s.sin() * (-4.0 * x.x * nu.cos() - x.y * nu.sin())
            }
            FlowModel::ForcedRadial { p, q } => {
                let s = q * std::f64::consts::PI * x.dot(x);
                let dn = Vec2::new(-nu.cos(), -nu.sin());
                2.0 * p * q * std::f64::consts::PI * s.cos() * x.dot(dn)
            }
            FlowModel::Custom { .. } => {
                (self.beta(x, k, nu + FD_STEP) - self.beta(x, k, nu - FD_STEP)) / (2.0 * FD_STEP)
            }
        }
    }

    /// Spatial gradient of `beta` at fixed curvature and angle.
    pub fn grad_x_beta(&self, x: Vec2, k: f64, nu: f64) -> Vec2 {
        match self {
            FlowModel::CurveShortening
            | FlowModel::Affine { .. }
            | FlowModel::Anisotropic { .. } => Vec2::ZERO,
            FlowModel::ForcedElliptic { p, q } => {
                let s = q * (4.0 * x.x * x.x + x.y * x.y);
                let radial = -4.0 * x.x * nu.sin() + x.y * nu.cos();
                let c = -2.0 * p * q;
                Vec2::new(
                    c * (s.cos() * q * 8.0 * x.x * radial + s.sin() * (-4.0 * nu.sin())),
                    c * (s.cos() * q * 2.0 * x.y * radial + s.sin() * nu.cos()),
                )
            }
            FlowModel::ForcedRadial { p, q } => {
                let pi = std::f64::consts::PI;
                let s = q * pi * x.dot(x);
                let nvec = unit_normal(nu);
                let xn = x.dot(nvec);
                let c = 2.0 * p * q * pi;
                Vec2::new(
                    c * (-s.sin() * q * pi * 2.0 * x.x * xn + s.cos() * nvec.x),
                    c * (-s.sin() * q * pi * 2.0 * x.y * xn + s.cos() * nvec.y),
                )
            }
            FlowModel::Custom { .. } => {
                let dx = Vec2::new(FD_STEP, 0.0);
                let dy = Vec2::new(0.0, FD_STEP);
                Vec2::new(
                    (self.beta(x + dx, k, nu) - self.beta(x - dx, k, nu)) / (2.0 * FD_STEP),
                    (self.beta(x + dy, k, nu) - self.beta(x - dy, k, nu)) / (2.0 * FD_STEP),
                )
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn fd_check(model: &FlowModel, x: Vec2, k: f64, nu: f64) {
        let h = FD_STEP;
        let tol = |analytic: f64| 1e-6 * analytic.abs().max(1.0);

        let fd_k = (model.beta(x, k + h, nu) - model.beta(x, k - h, nu)) / (2.0 * h);
        let an_k = model.beta_k(x, k, nu);
        assert!((fd_k - an_k).abs() <= tol(an_k), "beta_k: fd {fd_k} vs {an_k} at k={k}");

        let fd_nu = (model.beta(x, k, nu + h) - model.beta(x, k, nu - h)) / (2.0 * h);
        let an_nu = model.beta_nu(x, k, nu);
        assert!((fd_nu - an_nu).abs() <= tol(an_nu), "beta_nu: fd {fd_nu} vs {an_nu}");

        let dx = Vec2::new(h, 0.0);
        let dy = Vec2::new(0.0, h);
        let fd_g = Vec2::new(
            (model.beta(x + dx, k, nu) - model.beta(x - dx, k, nu)) / (2.0 * h),
            (model.beta(x + dy, k, nu) - model.beta(x - dy, k, nu)) / (2.0 * h),
        );
        let an_g = model.grad_x_beta(x, k, nu);
        assert!((fd_g.x - an_g.x).abs() <= tol(an_g.x), "grad x: fd {} vs {}", fd_g.x, an_g.x);
        assert!((fd_g.y - an_g.y).abs() <= tol(an_g.y), "grad y: fd {} vs {}", fd_g.y, an_g.y);
    }

    #[test]
    fn curve_shortening_is_identity_in_k() {
        let m = FlowModel::curve_shortening();
        let x = Vec2::new(0.3, -0.7);
        assert_eq!(m.beta(x, 2.5, 1.0), 2.5);
        assert_eq!(m.beta_k(x, 2.5, 1.0), 1.0);
        assert_eq!(m.beta_nu(x, 2.5, 1.0), 0.0);
        assert_eq!(m.grad_x_beta(x, 2.5, 1.0), Vec2::ZERO);
    }

    #[test]
    fn affine_approximates_cube_root() {
        let m = FlowModel::affine(1e-6).unwrap();
        let x = Vec2::ZERO;
        assert!((m.beta(x, 8.0, 0.0) - 2.0).abs() <= 1e-10);
        assert!((m.beta(x, 1.0, 0.0) - 1.0).abs() <= 1e-10);
        assert!((m.beta(x, 0.001, 0.0) - 0.1).abs() <= 1e-4);
    }

    #[test]
    fn affine_is_odd_in_curvature() {
        let m = FlowModel::affine(1e-6).unwrap();
        let x = Vec2::new(1.0, 2.0);
        for k in [1e-8, 1e-3, 0.5, 7.25, 123.0] {
            assert_eq!(m.beta(x, -k, 0.3), -m.beta(x, k, 0.3), "odd at k={k}");
        }
    }

    #[test]
    fn affine_slope_stays_positive() {
        let m = FlowModel::affine(1e-6).unwrap();
        for k in [-50.0, -1.0, -1e-7, 0.0, 1e-7, 0.03, 2.0, 400.0] {
            assert!(m.beta_k(Vec2::ZERO, k, 0.0) > 0.0, "beta_k at {k}");
        }
    }

    #[test]
    fn affine_rejects_bad_delta() {
        assert!(matches!(FlowModel::affine(0.0), Err(FlowError::NonpositiveDelta(_))));
        assert!(matches!(FlowModel::affine(-1.0), Err(FlowError::NonpositiveDelta(_))));
    }

    #[test]
    fn anisotropic_weight_range_and_reduction() {
        let m = FlowModel::anisotropic(0.8, 4, PI / 4.0).unwrap();
        let x = Vec2::ZERO;
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for i in 0..1000 {
            let nu = std::f64::consts::TAU * i as f64 / 1000.0;
            let w = m.weight(x, 1.0, nu);
            min = min.min(w);
            max = max.max(w);
        }
        assert!(min >= 0.2 - 1e-12 && max <= 1.8 + 1e-12);
        assert!((m.weight(x, 1.0, PI / 4.0) - 0.2).abs() <= 1e-15, "aligned angle hits 1 - a");

        let reduced = FlowModel::anisotropic(0.0, 4, 0.0).unwrap();
        for nu in [0.0, 0.4, 2.0, 6.0] {
            assert_eq!(reduced.beta(x, 1.7, nu), 1.7);
        }
    }

    #[test]
    fn anisotropic_rejects_nonpositive_weight() {
        assert!(matches!(
            FlowModel::anisotropic(1.0, 4, 0.0),
            Err(FlowError::WeightNotPositive { .. })
        ));
        assert!(matches!(
            FlowModel::anisotropic(-1.2, 2, 0.0),
            Err(FlowError::WeightNotPositive { .. })
        ));
    }

    #[test]
    fn forcing_vanishes_at_origin() {
        let elliptic = FlowModel::forced_elliptic(1.25, 3.0);
        let radial = FlowModel::forced_radial(1.956, 1.15);
        for nu in [0.0, 1.0, 4.5] {
            assert_eq!(elliptic.forcing(Vec2::ZERO, nu), 0.0);
            assert_eq!(radial.forcing(Vec2::ZERO, nu), 0.0);
        }
    }

    #[test]
    fn built_in_derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let models: Vec<FlowModel> = vec![
            FlowModel::curve_shortening(),
            FlowModel::affine(0.05).unwrap(),
            FlowModel::anisotropic(0.8, 4, PI / 4.0).unwrap(),
            FlowModel::forced_elliptic(1.25, 3.0),
            FlowModel::forced_radial(1.956, 1.15),
        ];
        for model in &models {
            for _ in 0..50 {
                let x = Vec2::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
                let nu = rng.random_range(0.0..std::f64::consts::TAU);
                let mut k: f64 = rng.random_range(-3.0..3.0);
                if let FlowModel::Affine { delta } = model {
                    // Centered differences need |k| well clear of the cube
                    // root's steep region.
                    while k.abs() < 10.0 * delta {
                        k = rng.random_range(-3.0..3.0);
                    }
                }
                fd_check(model, x, k, nu);
            }
        }
    }

    #[test]
    fn custom_zero_flow_is_inert_and_flagged() {
        let m = FlowModel::custom(Arc::new(|_, _, _| 0.0), Arc::new(|_, _| 0.0));
        assert!(m.uses_finite_difference_derivatives());
        let x = Vec2::new(0.2, 0.9);
        assert_eq!(m.beta(x, 3.0, 1.0), 0.0);
        assert_eq!(m.beta_k(x, 3.0, 1.0), 0.0);
        assert_eq!(m.beta_nu(x, 3.0, 1.0), 0.0);
        assert_eq!(m.grad_x_beta(x, 3.0, 1.0), Vec2::ZERO);
    }

    #[test]
    fn custom_fd_fallback_tracks_a_known_law() {
        // Same law as the anisotropic model; the fallback should agree with
        // the closed forms to finite-difference accuracy.
        let reference = FlowModel::anisotropic(0.5, 3, 0.2).unwrap();
        let m = FlowModel::custom(
            Arc::new(|_x, _k, nu: f64| 1.0 - 0.5 * (3.0 * (nu - 0.2)).cos()),
            Arc::new(|_, _| 0.0),
        );
        let x = Vec2::new(0.4, -0.1);
        for (k, nu) in [(1.0, 0.3), (-2.0, 2.1), (0.5, 5.0)] {
            assert!((m.beta(x, k, nu) - reference.beta(x, k, nu)).abs() <= 1e-12);
            assert!((m.beta_k(x, k, nu) - reference.beta_k(x, k, nu)).abs() <= 1e-6);
            assert!((m.beta_nu(x, k, nu) - reference.beta_nu(x, k, nu)).abs() <= 1e-6);
        }
    }

    #[test]
    fn normal_is_tangent_rotated_left() {
        for nu in [0.0, 0.7, 2.0, 4.2] {
            let t = unit_tangent(nu);
            let n = unit_normal(nu);
            assert!((t.dot(n)).abs() <= 1e-15);
            assert!((t.cross(n) - 1.0).abs() <= 1e-15);
        }
    }
}
