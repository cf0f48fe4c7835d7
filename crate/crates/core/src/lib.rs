//! Kerr-deformed bosonic dephasing channel: deformed ladder algebra,
//! dephasing kernel, Kraus and complementary forms, a brute-force dilation
//! oracle and quantum-capacity optimization over diagonal inputs.
//!
//! The crate is `no_std` with `alloc`; IO and the command line live in the
//! `ddc` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod algebra;
pub mod capacity;
pub mod channel;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod oracle;
pub mod params;

pub use error::{Error, Result};
pub use kernel::{Convention, KernelMatrix};
pub use linalg::C64;
pub use params::{ChannelParams, Dimension};
