//! Two-barrier reflection of regulated paths, optional semimartingale
//! drivers and reflected SDEs on finite time grids.
//!
//! Everything here is `no_std` with `alloc`; IO and the command line live in
//! the `skorokhod` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod one_sided;
pub mod regulated;
pub mod report;
pub mod sample;
pub mod sde;
pub mod semimartingale;
pub mod two_sided;

pub use error::{Error, Result};
pub use regulated::RegulatedPath;
