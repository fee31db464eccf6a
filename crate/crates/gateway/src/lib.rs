//! Service shell around the tutoring engine: an HTTP API with a simulated
//! SMS endpoint, a cohort simulator, and the `tutor` command line.

pub mod cli;
pub mod config;
pub mod error;
pub mod http;
pub mod service;
pub mod sim;

pub use config::GatewayConfig;
pub use error::GatewayError;
pub use service::Gateway;
