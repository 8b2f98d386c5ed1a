//! Model order reduction for quadratic-bilinear systems driven by signal
//! generators: moment recursions, low-rank Lyapunov solves, reducers,
//! a stiff simulator and benchmark builders.

pub mod error;
pub mod kron;
pub mod io;
pub mod linalg;
pub mod lyap;
pub mod bench;
pub mod model;
pub mod moments;
pub mod reduction;
pub mod simulate;

pub use error::{Error, Result};
