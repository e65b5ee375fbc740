pub mod curve;
pub mod gen;
pub mod infer;
pub mod query;
pub mod report;
pub mod simulate;
