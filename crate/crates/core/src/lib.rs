//! Self-similar groups acting on regular rooted trees.

pub mod engine;
pub mod error;
pub mod fpp;
pub mod group;
pub mod nucleus;
pub mod perm;
pub mod portrait;
pub mod quotient;
pub mod zoo;

pub use engine::{Engine, Equality, EqualityCaps, GroupPresentation, Letter, Word};
pub use error::{Error, Result};
pub use group::{FiniteTypeSpec, Group, PermGroup};
pub use perm::{Degree, Perm, PermTable};
pub use portrait::{Portrait, Vertex};
pub use quotient::{enumerate_quotient, LevelQuotient};
