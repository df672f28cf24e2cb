#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod adaptation;
pub mod approach;
pub mod commands;
pub mod config;
pub mod costmap;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod planner;
pub mod scene;
pub mod sim;
pub mod social_field;

pub use error::{Error, Result};
