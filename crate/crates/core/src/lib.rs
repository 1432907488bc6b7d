pub mod error;
pub mod modular;
pub mod padic;

pub use error::{Error, Result};
pub mod series;
pub mod exec;
pub mod fgl;
pub mod kmat;
pub mod deform;
pub mod period;
pub mod chromatic;
pub mod config;
pub mod report;
pub mod suite;
