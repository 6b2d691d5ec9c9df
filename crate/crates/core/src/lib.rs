pub mod arith;
pub mod dd;
pub mod error;
pub mod padic;

pub use error::{Error, Result};
pub mod cyclo;
pub mod characters;
pub mod iwasawa;
pub mod lvalues;
pub mod pollack;
pub mod cm;
pub mod equivariant;
pub mod desk;
pub mod pipeline;
