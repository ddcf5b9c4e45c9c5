//! Global stock-flow world model with scenario ensembles and SDG progress
//! scoring.

pub mod engine;
pub mod ensemble;
pub mod scenarios;
pub mod sdg;
pub mod sectors;
