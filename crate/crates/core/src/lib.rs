pub mod clausify;
pub mod dataset;
pub mod eval;
pub mod lint;
pub mod oracle;
pub mod prover;
pub mod story;
pub mod syntax;
