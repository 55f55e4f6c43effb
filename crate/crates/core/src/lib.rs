//! Runtime repair of GR(1) robot controllers: synthesis, violation handling,
//! counterstrategy feedback and an LLM-driven repair loop.

pub mod abstraction;
pub mod analysis;
pub mod dsl;
pub mod llm;
pub mod logic;
pub mod orchestrator;
pub mod synthesis;
pub mod violation;
