//! Link-level Monte-Carlo simulator for downlink cooperative NOMA served
//! through a UAV amplify-and-forward relay.
//!
//! - [`channel`]: LoS coefficients, fading draws and AF composition.
//! - [`schemes`]: achievable rates of cooperative, non-cooperative, OMA,
//!   hybrid (paired), single-carrier NOMA and TDMA transmission.
//! - [`pairing`]: near-far, near-near, random and exhaustive user pairing.
//! - [`sim`]: reproducible outage and ergodic sum-rate estimation.
//! - [`scenario`], [`experiment`], [`output`]: scenario files, experiment
//!   driver, CSV and SVG emission.

pub mod channel;
pub mod error;
pub mod experiment;
pub mod output;
pub mod pairing;
pub mod scenario;
pub mod schemes;
pub mod sim;

pub use error::{Error, Result};
