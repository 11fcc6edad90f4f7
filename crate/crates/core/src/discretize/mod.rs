//! Periodic grids, divergence-form operators and the linear/eigen kernels
//! built on them.

mod eigen;
mod grid;
mod krylov;
mod operator;
mod tridiag;

pub use eigen::{principal_eigen_iterate, EigenPair};
pub use grid::{Grid, DEFAULT_BUDGET};
pub use krylov::{bicgstab, bicgstab_solve, cg_solve, cg_solve_mean_zero, pcg, KrylovOutcome, Stop};
pub use operator::{assemble_div_operator, DivOperator, LinearOperator, ShiftedNegation, State};
pub(crate) use operator::check_direction;
pub use tridiag::{CyclicTridiagonal, Tridiagonal};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub cg_tol: f64,
    /// Defaults to ten times the number of unknowns.
    pub cg_max_iter: Option<usize>,
    pub eigen_tol: f64,
    pub eigen_max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            cg_tol: 1e-10,
            cg_max_iter: None,
            eigen_tol: 1e-10,
            eigen_max_iter: 5000,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> crate::Result<()> {
        if !(self.cg_tol > 0.0 && self.eigen_tol > 0.0) {
            return Err(crate::Error::InvalidArgument("solver tolerances must be positive".into()));
        }
        Ok(())
    }
}
