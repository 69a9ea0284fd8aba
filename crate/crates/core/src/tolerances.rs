//! Shared numerical thresholds. Operations take their defaults from here so
//! that every residual in a report can name the bound it was held to.

/// Unit-sphere membership of sample points.
pub const UNIT_NORM: f64 = 1e-12;
/// Tangency of vectors flagged as tangent to the sphere.
pub const TANGENCY: f64 = 1e-10;
/// Gram–Schmidt absolute drop tolerance.
pub const GS_DROP: f64 = 1e-10;
/// Orthonormality of frames (Gram matrix vs identity).
pub const FRAME_ORTHONORMAL: f64 = 1e-10;
/// Relative singular-value threshold for rank decisions.
pub const RANK_REL: f64 = 1e-8;
/// Condition number above which a metric counts as singular.
pub const MAX_CONDITION: f64 = 1e12;
/// Minimal eigenvalue of the transverse contact metric.
pub const CONTACT_MIN_EIGENVALUE: f64 = 1e-10;
/// Default absolute tolerance for ray classification of momentum values.
pub const RAY: f64 = 1e-9;
/// Level-set membership `‖J − sμ̂‖`.
pub const LEVEL_SET: f64 = 1e-10;
/// Newton projection convergence.
pub const NEWTON: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 50;
/// Smallest admissible ray parameter.
pub const MIN_RAY_PARAMETER: f64 = 1e-10;
/// Block orthogonality of reduction frames.
pub const FRAME_BLOCKS: f64 = 1e-9;
/// Nondegeneracy of the reduced `dη` (|det|).
pub const REDUCED_CONTACT_DET: f64 = 1e-8;

/// Residual bounds for the structure checks.
pub const ROUND_SASAKIAN: f64 = 1e-7;
pub const ROUND_STRUCTURE: f64 = 1e-8;
pub const WEIGHTED_KILLING: f64 = 1e-5;
pub const WEIGHTED_SASAKIAN: f64 = 1e-4;
pub const WEIGHTED_STRUCTURE: f64 = 1e-5;
pub const FD_ORACLE_AGREEMENT: f64 = 1e-3;

/// Residual bounds for the quotient checks.
pub const QUOTIENT_SASAKIAN: f64 = 1e-5;
pub const CURVATURE_TWO_PATH: f64 = 1e-6;
pub const ONEILL_BRACKET: f64 = 1e-6;
pub const RELATIONS: f64 = 1e-6;
pub const FINAL_IDENTITY: f64 = 1e-5;
pub const NU_TERM: f64 = 1e-8;
pub const POSITIVITY_SLACK: f64 = 1e-6;
pub const GAUSS_CONSISTENCY: f64 = 1e-5;
pub const PROJECTED_KILLING: f64 = 1e-6;
pub const PROJECTABLE_REEB: f64 = 1e-8;

/// Flow comparison bound.
pub const REEB_FLOW: f64 = 1e-6;
/// Two code paths of the same linear algebra.
pub const IOTA_TRANSPOSE: f64 = 1e-12;
