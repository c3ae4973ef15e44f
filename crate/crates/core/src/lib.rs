pub mod dsl;
pub mod geom;
pub mod par;
pub mod rng;
pub mod validate;
pub mod dataset;
pub mod adapter;
pub mod agent;
pub mod bench;
