//! Energy and latency model of LoRa firmware-update sessions that broadcast
//! rateless-coded fragments with a rising spreading factor.

pub mod analysis;
pub mod channel;
pub mod error;
pub mod fec;
pub mod network;
pub mod numeric;
pub mod phy;
pub mod schemes;
pub mod config;
pub mod lifetime;
pub mod sim;
pub mod benchmarks;
pub mod runner;
