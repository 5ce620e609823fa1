pub mod cli;
pub mod config;
pub mod curve;
pub mod error;
pub mod noise;
pub mod options;
pub mod pricing;
pub mod quadrature;
pub mod rng;
pub mod sim;
pub mod step;
pub mod structural;
pub mod validate;
