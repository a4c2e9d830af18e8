//! Construction and numerical verification of n-end catenoids — complete
//! genus-zero minimal surfaces whose ends are asymptotic to catenoids —
//! realizing prescribed flux data (unit end-normals and real weights).
//!
//! The pipeline is algebraic: flux data is reduced to a polynomial system in
//! the punctures `q_j` and residue parameters `b_j`; solutions are assembled
//! into Weierstrass data `g = P/Q`, `omega = -(Q/R)^2 dz` and verified by
//! independent contour integration before being sampled into meshes.

pub mod fluxmodel;
pub mod polyalg;
pub mod residues;
pub mod solver;
pub mod surface;

pub use fluxmodel::{ExtComplex, FluxData, ObstructionReport, StereoPoint, TypeClass, TypeKind};
pub use polyalg::ComplexPoly;
pub use residues::{SolutionCandidate, VerificationReport, WeierstrassData};
pub use surface::{SamplingConfig, SurfaceMesh};
