pub mod model;
pub mod parser;
pub mod reach;
pub mod slicing;
pub mod cti;
pub mod synth;
pub mod graph;
