pub mod clauses;
pub mod engine;
pub mod frontend;
pub mod lra;
pub mod terms;
pub mod trail;
pub mod verify;
