pub mod cli;
pub mod crsys;
pub mod develop;
pub mod error;
pub mod fixtures;
pub mod hqd;
pub mod io;
pub mod linalg;
pub mod moebius;
pub mod render;
pub mod solver;
pub mod surface;
pub mod tolerance;
