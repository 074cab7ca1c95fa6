//! Decoherence of a transmon qubit dispersively coupled to a readout
//! resonator whose drive line terminates in a thermal resistor.
//!
//! The crate maps lumped circuit values to a Lindblad master equation
//! ([`circuit`], [`operators`]), builds its Liouvillian and splits it into
//! excitation-number blocks ([`liouville`]), extracts decoherence rates from
//! the eigenmodes of the `d = 1` block ([`spectral`]) and provides a
//! full-propagator reference path plus the observables and checks built on
//! it ([`dynamics`]).
//!
//! Numerics are generic over the real scalar ([`Real`], implemented for
//! `f32` and `f64`); the aliases below fix `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod liouville;
pub mod operators;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::{Real, HBAR, K_B};

pub use operators::{HilbertSpec, Pauli, Qubit};

pub type Complex = num_complex::Complex<f64>;
pub type DenseOperator = linalg::CMatrix<f64>;
pub type CircuitSpec = circuit::CircuitSpec<f64>;
pub type BathSpec = circuit::BathSpec<f64>;
pub type DerivedParams = circuit::DerivedParams<f64>;
pub type BathModes = circuit::BathModes<f64>;
pub type SystemParams = operators::SystemParams<f64>;
pub type Superoperator = liouville::Superoperator<f64>;
pub type LiouvillianBlock = liouville::LiouvillianBlock<f64>;
pub type ModeSet = spectral::ModeSet<f64>;
pub type EigenMode = spectral::EigenMode<f64>;
pub type QuantumState = dynamics::QuantumState<f64>;
pub type Trajectory = dynamics::Trajectory<f64>;
