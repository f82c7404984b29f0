pub mod builders;
pub mod circuits;
pub mod encodings;
pub mod engine;
pub mod nodes;
pub mod problems;
pub mod queries;
pub mod solvers;
