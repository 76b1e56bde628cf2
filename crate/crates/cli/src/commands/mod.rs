pub mod analyze;
pub mod bounds;
pub mod circuit;
pub mod gme;
pub mod reproduce;
pub mod simulate;
pub mod synth;
