//! Interactive sequential diagnosis of faulty propositional knowledge bases.
//!
//! The pipeline: a [`Dpi`] (faulty KB, background, test cases) yields
//! minimal diagnoses ([`diagnosis::hs_tree`]); the most probable ones are
//! split by a canonical q-partition ([`qpartition`]), turned into a cheap
//! query ([`query_cost`]) or an enhanced one ([`query_enhance`]), and the
//! oracle's answers drive the [`engine::Session`] until one diagnosis remains.

pub mod diagnosis;
pub mod dpi;
pub mod dpi_format;
pub mod engine;
pub mod error;
pub mod fixtures;
pub mod logic;
pub mod mbd;
pub mod qpartition;
pub mod query_cost;
pub mod query_enhance;
pub mod quickxplain;
pub mod service;
pub mod verify;

pub use diagnosis::{hs_tree, min_conflict, Conflict, LeadingDiagnoses};
pub use dpi::{Diagnosis, Dpi, QPartition, Query, SentenceId, TestCase};
pub use dpi_format::{parse_dpi, serialize_dpi};
pub use engine::{Answer, Goal, Oracle, Session, SessionConfig};
pub use error::{Error, Result};
pub use logic::{parse, Formula, KbView};
