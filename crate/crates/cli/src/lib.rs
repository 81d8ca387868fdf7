//! Command line and HTTP front end for the exploration pipeline.

pub mod api;
pub mod cli;
