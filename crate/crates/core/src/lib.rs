pub mod cli;
pub mod decimal;
pub mod dif;
pub mod elementary;
pub mod expr;
pub mod numeric;
pub mod proofs;
