//! Pipeline driver and HTTP query service over topocube artifacts.

pub mod api;
pub mod cli;
pub mod error;
pub mod manifest;
pub mod oracle;
pub mod pipeline;
pub mod session;

pub use error::{Result, ServiceError};
pub use manifest::ProjectManifest;
pub use session::Session;
