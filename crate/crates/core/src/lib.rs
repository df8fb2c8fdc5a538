pub mod bitmatrix;
pub mod channel;
pub mod graph;
pub mod rng;
pub mod special;
pub mod matching;
pub mod coding;
pub mod analytic;
pub mod sim;
pub mod report;
pub mod verify;
pub mod cli;
