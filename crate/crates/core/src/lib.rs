pub mod dialogue;
pub mod query;
pub mod respond;
pub mod scene;
pub mod service;
pub mod solver;
pub mod spatial;
pub mod ulf;
