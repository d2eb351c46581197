//! Detection of bipartite entanglement and lower bounds on the Schmidt
//! number of mixed states, via the rank-drop varieties of the matrix pencil
//! built from a state's range.

pub mod bounds;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod linalg;
pub mod mc;
pub mod numeric;
pub mod pencil;
pub mod random;
pub mod state;
pub mod symbolic;

pub use error::{Error, Result};
