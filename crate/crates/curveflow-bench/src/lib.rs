//! Shared fixtures for the benchmarks: deterministic curves and linear
//! systems of a requested size.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use curveflow::{sample_initial_curve, InitialCurveSpec, PolygonalCurve};

/// A smooth nonconvex star with `n` edges; exercises the full range of
/// per-edge curvature signs without being anywhere near degenerate.
pub fn star_curve(n: usize) -> PolygonalCurve {
    let spec = InitialCurveSpec::FourierStar {
        base_radius: 1.0,
        amplitudes: vec![0.15, 0.05],
        modes: vec![3, 7],
    };
    sample_initial_curve(&spec, n).expect("fixture curve is valid")
}

/// A cyclic tridiagonal system with rows made strictly diagonally dominant,
/// reproducible from the seed.
pub struct CyclicSystem {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
    pub rhs: Vec<f64>,
}

pub fn random_cyclic_system(n: usize, seed: u64) -> CyclicSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample = |lo: f64, hi: f64| rng.random_range(lo..hi);
    let sub: Vec<f64> = (0..n).map(|_| sample(-1.0, 1.0)).collect();
    let sup: Vec<f64> = (0..n).map(|_| sample(-1.0, 1.0)).collect();
    let diag: Vec<f64> = (0..n)
        .map(|i| {
            let dominance = 1.0 + sample(0.0, 2.0);
            (sub[i].abs() + sup[i].abs() + dominance) * if i % 2 == 0 { 1.0 } else { -1.0 }
        })
        .collect();
    let rhs: Vec<f64> = (0..n).map(|_| sample(-10.0, 10.0)).collect();
    CyclicSystem {
        sub,
        diag,
        sup,
        rhs,
    }
}
