//! Analytic and Monte Carlo engines for cache-enabled device-to-device
//! networks with opportunistic cooperative transmission.
//!
//! The analytic side ([`popularity`], [`geometry`], [`linkrates`],
//! [`counting`], [`optimizer`]) evaluates closed-form probabilities, link
//! spectral efficiencies, user counts and the optimal bandwidth split. The
//! [`montecarlo`] engine simulates full network drops (placement, Zipf
//! requests, classification, scheduling, Rayleigh fading, zero-forcing) and
//! is the reference the closed forms are checked against.

pub mod counting;
pub mod error;
pub mod geometry;
pub mod linkrates;
pub mod montecarlo;
pub mod optimizer;
pub mod popularity;
pub mod quadrature;
pub mod scenario;

pub use error::{Error, Result};
pub use scenario::Scenario;
