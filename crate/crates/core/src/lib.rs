//! A goal-directed answer set programming engine with linear constraints
//! over the rationals.

pub mod constraints;
pub mod dual;
pub mod engine;
pub mod justify;
pub mod oracle;
pub mod parser;
pub mod print;
pub mod term;
