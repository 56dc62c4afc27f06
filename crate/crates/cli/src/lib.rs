//! Scenario-driven front end for the nonlocal Fredholm toolkit.

pub mod acceptance;
pub mod config;
pub mod output;
pub mod run;
pub mod scenarios;
