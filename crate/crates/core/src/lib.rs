//! Simulation library for topological pumping of photonic orbital angular
//! momentum (OAM) in degenerate optical cavities.
//!
//! A degenerate main cavity coupled to auxiliary cavities realizes a
//! one-dimensional tight-binding lattice whose sites are OAM states. Cyclic
//! modulation of the tunneling phases drives a Thouless pump that moves a
//! photon between OAM states in quantized steps. The crate covers:
//!
//! - [`model`]: lattice parameters, pump loops, real-space and Bloch
//!   Hamiltonians of the double-well (Rice-Mele type) OAM lattice;
//! - [`topology`]: band structure, Berry curvature, Chern and winding
//!   numbers, flat-band expansion;
//! - [`dynamics`]: Wannier-state preparation, adiabatic time evolution,
//!   transport observables, disorder ensembles;
//! - [`opensys`]: open-cavity capture/pump/release dynamics with tunable
//!   input/output coupling and intrinsic loss;
//! - [`hardware`]: cavity ray-matrix geometry, mode frequencies,
//!   degeneracy-deviation detuning, element-level rate conversions,
//!   disorder generators;
//! - [`multistage`]: digit planning for cascaded pumping stages reaching
//!   large OAM changes in logarithmic time.
//!
//! Energies are measured in units of the intra/inter-cell tunneling `J1`
//! and times in `1/J1` (ħ = 1) unless a function explicitly works in
//! physical units; converters live in [`hardware`].

pub mod dynamics;
pub mod error;
pub mod hardware;
pub mod model;
pub mod multistage;
pub mod opensys;
pub mod topology;

pub use error::{Error, Result};
pub use model::{Band, LatticeConfig, LatticeState, Orientation, PumpSchedule, RiceMeleParams};
