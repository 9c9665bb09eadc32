//! HTTP/JSON tutoring service over the kielo engine, plus the command-line
//! front end.

pub mod api;
pub mod cli;
pub mod error;
pub mod journal;
pub mod model;
pub mod tutor;

pub use error::ServiceError;
pub use tutor::{Tutor, TutorConfig};
