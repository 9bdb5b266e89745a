//! Robust planning under incomplete STRIPS domain models.

pub mod cpp;
pub mod fixtures;
pub mod grounding;
pub mod inject;
pub mod model;
pub mod parser;
pub mod planner;
pub mod relaxed;
pub mod robustness;
pub mod semantics;
