//! Exact reduction of the closest vector problem on integer lattices to
//! quadratic unconstrained binary optimization.
//!
//! The pipeline moves the target into the fundamental parallelepiped,
//! bounds the coordinates of every candidate closest vector, writes each
//! coordinate in binary and expands the squared distance into a QUBO
//! matrix. Solving that QUBO and decoding the bits recovers a closest
//! lattice vector. All arithmetic on the correctness path is exact.
//!
//! ```
//! use cvp_qubo::{solve_cvp, CvpInstance, SolveOptions};
//!
//! let inst = CvpInstance::from_i64(&[vec![2, 0], vec![0, 2]], &[1, 3]).unwrap();
//! let out = solve_cvp(&inst, &SolveOptions::default()).unwrap();
//! assert_eq!(out.solution.dist_sq, 2.into());
//! assert!(out.report.passed());
//! ```

pub mod error;
pub mod io;
pub mod json;
pub mod lattice;
pub mod linalg;
pub mod pipeline;
pub mod qubo;
pub mod solve;

pub use error::{Error, Result};
pub use lattice::{encoding_bits, kappa_bound_sq, max_abs_entry, reduce_to_parallelepiped, BoundMode, BoundReport, CvpInstance, ReducedInstance};
pub use linalg::{det_exact, frobenius_sq, gram, solve_exact, IntMatrix, RationalVector};
pub use pipeline::{
    babai_round, cvp_oracle_certified, cvp_oracle_enum, decode, encode, solve_cvp, verify_solution, Certificate, CvpOutcome,
    CvpSolution, MethodChoice, OraclePolicy, SolveOptions, VerifyOptions, VerifyReport,
};
pub use qubo::{build_qubo, index_of, BinaryAssignment, EncodingParams, QuboMatrix, SignMode};
pub use solve::{flip_delta, solve_exhaustive, solve_sa, AnnealSchedule, SolveMethod, SolveResult};
