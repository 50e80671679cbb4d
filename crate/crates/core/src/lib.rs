//! Context-aware reminders for an instrumented home.
//!
//! A reminder is authored in conversation, compiled to a small trigger
//! language over sensor readings, activity labels and the clock, and then
//! evaluated once per tick against the home's current state.

pub mod authoring;
pub mod clock;
pub mod dsl;
pub mod feasibility;
pub mod home;
pub mod intent;
pub mod runtime;
pub mod simulator;
