//! Time-normal ordered correlation functions of Gaussian bosonic systems.
//!
//! Two definitions are implemented side by side: the exact one, where positive
//! and negative frequency parts are taken after closed-time-loop ordering, and
//! the Kelley–Kleiner one, where they are taken first. The exact average never
//! depends on the dynamics after its latest time argument; the Kelley–Kleiner
//! one does.

pub mod error;
pub mod field;
pub mod harmonic;
pub mod oscillator;
pub mod projector;
pub mod quadrature;
pub mod special;
pub mod tn;

pub use error::{Error, Result};
pub use harmonic::{HarmonicTerm, PiecewiseHarmonic};
pub use oscillator::{FrequencySchedule, QuadratureOperator, Units};
pub use projector::ProjectorSign;
pub use quadrature::QuadratureControls;
pub use tn::{Backend, Method, TnResult};
