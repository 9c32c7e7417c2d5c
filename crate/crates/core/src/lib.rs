//! Zero-temperature random-field Ising model on an `n x n` square lattice.
//!
//! A run starts from positive saturation, draws one quenched disorder
//! realization (Gaussian random field plus a set of sites with an enhanced
//! exchange constant), and sweeps the external field down and back up. At
//! every field value the lattice is relaxed to a stable state and the
//! magnetization is sampled. The resulting loop yields the exchange bias (loop
//! shift) and the coercivity (loop width).

mod disorder;
mod dynamics;
mod error;
mod hysteresis;
mod lattice;
mod metrics;
mod params;
pub mod rng;
pub mod stats;

pub use disorder::{generate_disorder, DisorderRealization};
pub use dynamics::{local_field, relax, relax_with_order, RelaxOrder};
pub use error::{Error, Result};
pub use hysteresis::{field_schedule, run_hysteresis, simulate_curve, HysteresisCurve, RunOutput};
pub use lattice::{magnetization, Boundary, SpinLattice};
pub use metrics::{branch_crossing, extract_metrics, LoopMetrics};
pub use params::SimulationParams;
