//! Gabor frames of Legendre symbols over Z/pZ: construction, coherence and
//! flat-RIP estimates, classical character-sum bounds, the consecutive-block
//! sine-ratio sums with their piecewise bound machinery, and seeded sparse
//! recovery experiments.

pub mod charsums;
pub mod config;
pub mod driver;
pub mod field;
pub mod flatrip;
pub mod gabor;
pub mod linalg;
pub mod recovery;
pub mod seeding;
pub mod theorem;

pub use charsums::BoundCheck;
pub use field::FieldContext;
pub use flatrip::{OmegaSet, RipReport};
pub use gabor::{NormConvention, TimeFreqIndex};
pub use theorem::{ConsecutiveBlock, ScalingFit, ThetaParams};
