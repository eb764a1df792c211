//! Numerical toolkit for invariant metrics, pluripotential theory and the
//! boundary behaviour of holomorphic maps on explicit domains in C^n.
//!
//! Modules:
//! - [`domains`]: defining functions, boundary distance, flat disc radii.
//! - [`kobayashi`]: upper and lower bounds for the Kobayashi metric and the
//!   Hölder-failure divergence diagnostic.
//! - [`monge_ampere`]: complex Hessians, pullback fields, Monge–Ampère
//!   densities, the homogeneous Monge–Ampère solver for Reinhardt data and a
//!   brute-force Perron oracle.
//! - [`mappings`]: properness probes, Jacobian L^p checks, Hopf and exponent
//!   fits, radial boundary extension, Lipschitz charts and cone probes.
//! - [`geodesics`]: ball geodesics, isometry defects, Mercer fits, Dini
//!   checks and Hardy–Littlewood radial extension.
//! - [`peaks`]: plurisubharmonic peak functions through a planar shadow and a
//!   numerical Riemann map.
//! - [`cli`]: the batch front-end behind the `plurilab` binary.
//!
//! Runnable examples (`cargo run --release --example NAME`):
//! `disc_radius_sandwich`, `kobayashi_bounds`, `holder_divergence`,
//! `pullback_density`, `canonical_function`, `boundary_extension`,
//! `geodesic_extension`, `peak_function`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod domains;
pub mod error;
pub mod geodesics;
pub mod kobayashi;
pub mod mappings;
pub mod monge_ampere;
pub mod numerics;
pub mod peaks;
pub mod report;

pub use domains::{DomainSpec, DirectionProbe};
pub use error::{Error, Result};
