//! Decision procedures for metric-preserving transforms of finite spaces.
//!
//! The crate checks finite dissimilarity spaces against the metric and
//! ultrametric axioms, decides whether a transform `f: ℝ⁺ → ℝ⁺` preserves
//! ultrametrics, pseudoultrametrics, semimetrics or turns ultrametrics into
//! metrics, and builds concrete counterexample spaces whenever a property
//! fails. All distance arithmetic is exact; non-integer powers are handled
//! through certified enclosures.

#![allow(clippy::result_large_err)]

pub mod axioms;
pub mod calculus;
pub mod decomposition;
pub mod format;
pub mod function;
pub mod generators;
pub mod interval;
pub mod rational;
pub mod separating;
pub mod snowflake;
pub mod space;
pub mod theorems;

pub use axioms::{classify_space, AxiomReport, Triple, Verdict};
pub use calculus::{classify_function, is_amenable, is_doubling, is_increasing, FunctionClassification};
pub use decomposition::{decompose, zero_gap_radius, DecompositionResult};
pub use function::{Piece, TransformFunction};
pub use rational::Rational;
pub use separating::{FamilyVerdict, FunctionFamily};
pub use snowflake::{min_falsifying_exponent, probe_snowflake, CriticalExponent, SnowflakeVerdict};
pub use space::Dissimilarity;
pub use theorems::{apply, dual_witness, probe_fab, WitnessPackage};
