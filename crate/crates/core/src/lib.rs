//! Beam-level system simulator for baseline and conditional handover with
//! beam-aware random access in mm-Wave urban deployments.

pub mod cli;
pub mod error;
pub mod exec;
pub mod failure;
pub mod geometry;
pub mod handover;
pub mod ids;
pub mod kpi;
pub mod log;
pub mod measurements;
pub mod rach;
pub mod scenario;
pub mod sim;
pub mod trace;
pub mod radio;
pub mod view;

pub use error::{Error, Result};
