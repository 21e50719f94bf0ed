pub mod chebyshev;
pub mod conic;
pub mod error;
pub mod model_type1;
pub mod model_type2;
pub mod oracle;
pub mod problem;

pub use error::{Error, Result};
