//! Numerics for abelian vortices on compact surfaces and their rotation
//! quotients: discrete geometry, gauge-theoretic kinematics, a scalar
//! reduction solver, moduli probes and exact Seifert arithmetic.

// Negated float comparisons are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod spectral;
pub mod surface;
pub mod seifert;
pub mod fields;
pub mod sampling;
pub mod moduli;
pub mod solver;
