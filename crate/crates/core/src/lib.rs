pub mod acr;
pub mod io;
pub mod milp;
pub mod model;
pub mod paxr;
pub mod pipeline;
pub mod plot;
pub mod report;
pub mod solver;
pub mod space;
pub mod tsn;

pub use model::*;
