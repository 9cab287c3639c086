//! Search and classification of finite semifields of order `2^d`, `d <= 6`,
//! represented by standard bases of matrices over GF(2).

pub mod binmat;
pub mod classify;
pub mod error;
pub mod fixtures;
pub mod presentations;
pub mod search;
pub mod semifield;

pub use error::{Error, Result};
