//! Harmonic passive motor control on a simulated planar 3-link arm.
//!
//! The crate is organised bottom-up: [`arm`] is the plant, [`fic`] the
//! fractal impedance primitive, [`planner`], [`posture`] and [`stack`] form
//! the control hierarchy, [`experiment`] runs the clock protocol and
//! [`analysis`] turns logged samples into movement metrics.

pub mod analysis;
pub mod arm;
pub mod error;
pub mod experiment;
pub mod fic;
pub mod planner;
pub mod posture;
pub mod selftest;
pub mod stack;

pub use error::{Error, Result};
