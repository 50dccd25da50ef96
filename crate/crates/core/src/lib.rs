//! Energy exchange between a linearly polarized gravitational wave and
//! matter, worked out first order in the strain `h`.
//!
//! Backends:
//!
//! * [`point_mass`]: geodesic forcing of slow particles and the rotating
//!   barbell (rigid rotor, radial spring, scissors pair).
//! * [`em_parametric`]: trap laser modes as parametric oscillators, their
//!   Wronskians and the `1 + ζh` factors they hand to the trap model.
//! * [`condensate`]: mean-field condensate, Bogoliubov-de Gennes response
//!   with the wave as a source, Madelung hydrodynamics.
//! * [`hydrogen`]: perturbation matrix elements of the hydrogen atom.
//!
//! [`energy_transfer`] and [`rotating_frame`] evaluate the power law and the
//! bounds on snapshots from any of these. [`scenario`] drives everything from
//! JSON configs.

pub mod condensate;
pub mod em_parametric;
pub mod energy_transfer;
pub mod error;
pub mod estimates;
pub mod hydrogen;
pub mod integrate;
pub mod point_mass;
pub mod rotating_frame;
pub mod scaling;
pub mod scenario;
pub mod units;
pub mod waveform;

pub use error::{Error, Result};
pub use units::{Dimension, Quantity, UnitSystem};
pub use waveform::{Envelope, GwWaveform};
