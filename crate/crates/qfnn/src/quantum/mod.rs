//! Dense n-qubit simulation: pure statevectors, density matrices, gates, and
//! Kraus noise channels.

mod channel;
mod density;
mod gate;
mod state;

pub use channel::{completeness_deviation, ChannelKind, KrausChannel};
pub use density::DensityMatrix;
pub use gate::{Gate, Gate1Q, Gate2Q};
pub use state::StateVector;
