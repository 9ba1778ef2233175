//! File formats, configuration and the `furrow` command line on top of
//! [`furrow_core`].
//!
//! - [`io`]: depth maps as 16-bit PNG/PGM with a metric scale, RGB PNGs, binary
//!   and soft edge masks.
//! - [`config`]: the TOML application config.
//! - [`manifest`]: dataset manifests as TSV.
//! - [`record`]: JSON-lines detection records.
//! - [`cli`]: the `furrow` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
mod error;
pub mod io;
pub mod manifest;
pub mod record;

pub use error::{Error, Result};
pub use furrow_core as core;
