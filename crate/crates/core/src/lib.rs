pub mod error;
pub mod grid;
pub mod io;
pub mod joyce;
pub mod group_action;
pub mod lattice;
pub mod moment;
pub mod pipeline;
pub mod qalg;
pub mod quotient_geom;
pub mod toric_data;
pub mod twistor_class;

pub use error::{Error, Result};
