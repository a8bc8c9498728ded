pub mod algebra;
pub mod cp_map;
pub mod error;
pub mod linalg;
pub mod subspace;
pub mod gchannel;
pub mod extremality;
pub mod sample;
pub mod io;
pub mod cli;
