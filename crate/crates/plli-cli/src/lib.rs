//! IO, persistence, and report plumbing behind the `plli` binary.

pub mod errors;
pub mod model_file;
pub mod table;
