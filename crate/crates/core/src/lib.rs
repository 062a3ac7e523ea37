pub mod bondal;
pub mod divisor;
pub mod fan;
pub mod gensys;
pub mod io;
pub mod lattice;
pub mod thomsen;
