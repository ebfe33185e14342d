pub mod cli;
pub mod coreperiphery;
pub mod community;
pub mod error;
pub mod market_data;
pub mod network;
pub mod pmfg;
pub mod portfolio;
pub mod randomization;
pub mod report;
pub mod rolling;
pub mod seed;
pub mod spectral;
pub mod synthetic;

pub use error::{Error, Result};
