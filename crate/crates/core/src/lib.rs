pub mod cli;
pub mod contact;
pub mod dsl;
pub mod jets;
pub mod potentials;
pub mod quantum;
pub mod sampling;
