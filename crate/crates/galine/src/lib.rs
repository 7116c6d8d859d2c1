pub mod classical;
pub mod cocycle;
pub mod cohomology;
pub mod exec;
pub mod group;
pub mod qdyn;
pub mod qrep;
pub mod report;
pub mod sample;
pub mod scenario;
pub mod suites;
pub mod timealg;
