//! First integrals of autonomous dynamical systems
//! `q̈ᵃ = −Γᵃ_bc q̇ᵇ q̇ᶜ − Qᵃ` with a symmetric, possibly non-metric,
//! connection.
//!
//! The crate is layered bottom-up:
//!
//! * [`expr`] — symbolic expressions, exact rational normal forms, zero tests;
//! * [`tensor`] — totally symmetric tensor fields and covariant derivatives;
//! * [`geometry`] — connections, system definitions, curvature, metricity
//!   and the two-dimensional Riemannian classification;
//! * [`solver`] — exact polynomial-ansatz search for generalized Killing
//!   vectors and tensors;
//! * [`conditions`] — the polynomial-in-time and exponential first-integral
//!   condition chains, builders, and the total-derivative oracle;
//! * [`dynamics`] — numerical integration and drift monitoring;
//! * [`catalog`] — built-in example systems with their known integrals.

pub mod catalog;
pub mod conditions;
pub mod dynamics;
pub mod expr;
pub mod geometry;
pub mod par;
pub mod solver;
pub mod tensor;
