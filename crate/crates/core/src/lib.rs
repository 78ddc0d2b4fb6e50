//! Squaring-up of fat linear time-invariant plants.
//!
//! Given a strictly proper plant `{A, B, C}` with more inputs than outputs,
//! [`squareup::square_up`] finds extra output rows `Ca` such that the square
//! system `{A, B, [C; Ca]}` keeps the plant's transmission zeros and adds only
//! strictly stable ones.
//!
//! ```no_run
//! use squareup::sysmodel::StateSpace;
//! use squareup::squareup::{square_up, SquareUpOptions};
//!
//! # fn main() -> squareup::Result<()> {
//! let sys = StateSpace::from_rows(
//!     3, 2, 1,
//!     &[-1.0, 1.0, 0.0, 0.0, -2.0, 1.0, 0.0, 0.0, -3.0],
//!     &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0],
//!     &[1.0, 0.0, 0.0],
//! )?;
//! let res = square_up(&sys, &SquareUpOptions::default())?;
//! assert!(res.minimum_phase());
//! # Ok(())
//! # }
//! ```

pub mod cli;
pub mod error;
pub mod genbench;
pub mod numkit;
pub mod squareup;
pub mod sysmodel;

pub use error::{Error, Result};
