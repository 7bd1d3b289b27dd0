//! Library half of the `spectrum` command-line tool.

pub mod ops;
pub mod render;
pub mod scenario;
pub mod verify;
