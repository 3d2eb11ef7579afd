pub mod cli;
pub mod corpus;
pub mod error;
pub mod expr;
pub mod ext;
pub mod growth;
pub mod indicator;
pub mod numeric;
pub mod odelab;
pub mod radialsets;
pub mod report;

pub use error::{Error, EvalError, ParseError, Result};
pub use expr::Expr;
pub use ext::ExtComplex;
