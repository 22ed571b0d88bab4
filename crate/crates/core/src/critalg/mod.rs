//! Algebra of functions on the critical set of the master function, both
//! analytically (critical points, residues) and combinatorially (w-basis).

mod master;
mod walg;

pub use master::{
    critical_numerators, euler_defect, euler_identity_k1_exact, require_nondegenerate,
    residue_pairing_analytic, solve_critical, CriticalPoint, MasterFunction, DEDUP_TOL,
    DEGENERATE_HESSIAN, NEWTON_MAX_ITER, NEWTON_TOL,
};
pub use walg::{CritElement, EliminationStep, WAlgebra};
