pub mod cohomology;
pub mod error;
pub mod field;
pub mod gamma_class;
pub mod gkz;
pub mod linalg;
pub mod mellin_barnes;
pub mod model;
pub mod oscillatory;
pub mod quantum_ring;
pub mod report;
pub mod toric_geom;

pub use error::{Error, Result};
