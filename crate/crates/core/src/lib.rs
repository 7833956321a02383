pub mod cli;
pub mod conjugacy;
pub mod error;
pub mod fatou;
pub mod henon;
pub mod limits;
pub mod natural_extension;
pub mod poly;
pub mod solenoid;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use poly::ComplexPolynomial;
