//! Generalized coherent states for electrons in monolayer and bilayer
//! graphene in a constant magnetic field.
//!
//! The crate builds truncated coherent-state series under the
//! Barut-Girardello, Gilmore-Perelomov and minimum-uncertainty definitions,
//! and evaluates their observables: probability and current densities, mean
//! energy, position-momentum uncertainty and fidelity under time evolution.

pub mod coherent;
pub mod dynamics;
pub mod error;
pub mod fields;
pub mod ladder;
pub mod numeric;
pub mod observables;
pub mod oscillator;
pub mod spinors;
pub mod verify;

pub use coherent::{bgcs, gpcs, gpcs_from, mucs, CoherentSeries, Definition};
pub use error::{Error, Result};
pub use fields::{Branch, MagneticProfile, UnitSystem};
pub use ladder::{LadderSpec, Weight};
pub use spinors::LayerKind;

pub use num_complex::Complex64;
