//! Energy-aware operation of a remote base-station site that two mobile
//! operators share, with a co-located container-based edge server, an
//! off-grid battery and solar/wind harvesting.
//!
//! The crate is organised bottom-up:
//!
//! * [`trace`] loads, aggregates, normalizes and synthesizes the exogenous
//!   series (operator traffic, solar and wind harvest).
//! * [`forecast`] fits seasonal-naive and autoregressive predictors and scores
//!   them by RMSE.
//! * [`site`] holds the per-slot energy model, the Lindley queues and the
//!   feasibility/delay checks.
//! * [`battery`] evolves the energy buffer and selects the harvest source.
//! * [`controller`] implements the limited-lookahead controller, the fixed
//!   reservation benchmark and an exhaustive reference search.
//! * [`sim`] drives the slot loop and computes savings against a site
//!   dimensioned for maximum capacity.
//! * [`cli`] binds configuration files and outputs together.

pub mod battery;
pub mod cli;
pub mod config;
pub mod controller;
pub mod error;
pub mod forecast;
pub mod site;
pub mod sim;
pub mod trace;

pub use error::{Error, Result};
