//! Saturated fusion systems and linking systems over small finite p-groups.

pub mod central;
pub mod cocycle;
pub mod corpus;
pub mod error;
pub mod fusion;
pub mod group;
pub mod index;
pub mod io;
pub mod linking;
pub mod perm;
pub mod pextension;
pub mod pgroup;
pub mod presets;
pub mod snf;

pub use error::{Error, Result};
pub use group::Group;
pub use pgroup::{Map, Mask, PGroup};
