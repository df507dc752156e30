//! Optimal PPT discrimination of orthogonal bipartite states.

pub mod cli;
pub mod conic;
pub mod discrim;
pub mod hermlin;
pub mod states;
