//! Periodic (cyclic) tridiagonal linear systems.
//!
//! A system of size `n >= 3` has rows
//! `sub[i]*x[i-1] + diag[i]*x[i] + sup[i]*x[i+1] = rhs[i]`
//! with cyclic indices, so `sub[0]` couples row 0 to `x[n-1]` and `sup[n-1]`
//! couples row `n-1` to `x[0]`. The corner entries are removed by a rank-one
//! update, the remaining strictly tridiagonal matrix is factored once without
//! pivoting, and every right-hand side reuses that factorization, so a
//! multi-column solve is bit-identical to solving the columns one at a time.

/// A pivot below this fraction of the matrix norm is treated as singular.
pub const PIVOT_REL_TOL: f64 = 1e-14;

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("cyclic tridiagonal systems need n >= 3, got {0}")]
    SizeTooSmall(usize),
    #[error(
        "singular system: pivot {pivot:.3e} at row {index} below {PIVOT_REL_TOL:.0e} of matrix norm {norm:.3e}"
    )]
    SingularSystem { index: usize, pivot: f64, norm: f64 },
}

/// Coefficients of a cyclic tridiagonal system.
#[derive(Clone, Debug)]
pub struct CyclicTridiagonal {
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
}

/// Reusable factorization: the eliminated tridiagonal core plus the solved
/// corner-correction column.
struct Factorization {
    multipliers: Vec<f64>,
    pivots: Vec<f64>,
    sup: Vec<f64>,
    /// `z = core^{-1} u` for the rank-one corner column `u`.
    z: Vec<f64>,
    /// Last component of the correction row `v` (its first is 1).
    v_last: f64,
    /// `1 + v.z`, the Sherman-Morrison denominator.
    denom: f64,
}

impl CyclicTridiagonal {
    pub fn new(sub: Vec<f64>, diag: Vec<f64>, sup: Vec<f64>) -> Result<Self, SolverError> {
        let n = diag.len();
        if n < 3 {
            return Err(SolverError::SizeTooSmall(n));
        }
        assert_eq!(sub.len(), n, "sub diagonal length");
        assert_eq!(sup.len(), n, "super diagonal length");
        Ok(CyclicTridiagonal { sub, diag, sup })
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// Maximum absolute row sum of the full cyclic matrix.
    pub fn norm_inf(&self) -> f64 {
        let n = self.n();
        (0..n)
            .map(|i| self.sub[i].abs() + self.diag[i].abs() + self.sup[i].abs())
            .fold(0.0, f64::max)
    }

    fn factor(&self) -> Result<Factorization, SolverError> {
        let n = self.n();
        let norm = self.norm_inf();

        // Remove the corner entries sub[0] (row 0 -> col n-1) and sup[n-1]
        // (row n-1 -> col 0) with A = core + u v^T, u = (gamma, 0, .., c_last),
        // v = (1, 0, .., a_first / gamma).
        let a_first = self.sub[0];
        let c_last = self.sup[n - 1];
        let gamma = if self.diag[0] != 0.0 { -self.diag[0] } else { -norm.max(1.0) };

        let mut core_diag = self.diag.clone();
        core_diag[0] -= gamma;
        core_diag[n - 1] -= a_first * c_last / gamma;

        // LU of the core without pivoting.
        let mut multipliers = vec![0.0; n];
        let mut pivots = vec![0.0; n];
        pivots[0] = core_diag[0];
        for i in 1..n {
            let p = pivots[i - 1];
            if p.abs() < PIVOT_REL_TOL * norm {
                return Err(SolverError::SingularSystem { index: i - 1, pivot: p, norm });
            }
            multipliers[i] = self.sub[i] / p;
            pivots[i] = core_diag[i] - multipliers[i] * self.sup[i - 1];
        }
        let p_last = pivots[n - 1];
        if p_last.abs() < PIVOT_REL_TOL * norm {
            return Err(SolverError::SingularSystem { index: n - 1, pivot: p_last, norm });
        }

        let mut fact = Factorization {
            multipliers,
            pivots,
            sup: self.sup.clone(),
            z: Vec::new(),
            v_last: a_first / gamma,
            denom: 0.0,
        };

        let mut u = vec![0.0; n];
        u[0] = gamma;
        u[n - 1] += c_last;
        fact.z = fact.solve_core(&u);
        fact.denom = 1.0 + fact.z[0] + fact.v_last * fact.z[n - 1];
        if fact.denom.abs() < PIVOT_REL_TOL * norm.max(1.0) {
            return Err(SolverError::SingularSystem { index: 0, pivot: fact.denom, norm });
        }
        Ok(fact)
    }

    /// Solve for a single right-hand side.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, SolverError> {
        let fact = self.factor()?;
        Ok(fact.apply(rhs))
    }

    /// Solve several right-hand sides against one factorization.
    pub fn solve_many(&self, rhs_columns: &[&[f64]]) -> Result<Vec<Vec<f64>>, SolverError> {
        let fact = self.factor()?;
        Ok(rhs_columns.iter().map(|rhs| fact.apply(rhs)).collect())
    }
}

impl Factorization {
    fn solve_core(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.pivots.len();
        let mut x = vec![0.0; n];
        x[0] = rhs[0];
        for i in 1..n {
            x[i] = rhs[i] - self.multipliers[i] * x[i - 1];
        }
        x[n - 1] /= self.pivots[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = (x[i] - self.sup[i] * x[i + 1]) / self.pivots[i];
        }
        x
    }

    fn apply(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.pivots.len();
        assert_eq!(rhs.len(), n, "rhs length");
        let y = self.solve_core(rhs);
        let v_dot_y = y[0] + self.v_last * y[n - 1];
        let scale = v_dot_y / self.denom;
        y.iter().zip(&self.z).map(|(&yi, &zi)| yi - scale * zi).collect()
    }
}
