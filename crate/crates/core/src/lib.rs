//! Electrical-network discretization of singular weighted Dirichlet forms
//! on the plane.
//!
//! The library discretizes forms `E(u) = int |grad u|^2 rho dx` whose weight
//! `rho` degenerates along cones meeting at the origin, as finite resistor
//! networks on a polar mesh.  Three network topologies realize the three
//! ways the origin can be wired: absorbed (killed), a single pinned node
//! (glued), or one node per degenerate cone (split).  On top of the
//! networks it computes capacities, hitting probabilities, resolvents and
//! the rank-one / rank-two corrections that relate the three, both by exact
//! linear algebra and by Monte Carlo simulation of the associated random
//! walks.

pub mod error;
pub mod forms;
pub mod mesh;
pub mod potential;
pub mod quad;
pub mod solve;
pub mod stochastic;
pub mod weights;

pub use error::{Error, Result};
pub use forms::{assemble, decompose, glued_distance_sq, psi0_grid, psi_grid, FormMatrices};
pub use mesh::{PolarMesh, Topology, TopologyMode};
pub use potential::{
    capacity, cone_capacity_report, gamma_coefficients, hitting_probs_split, killed_resolvent,
    origin_capacity, origin_harmonic_measure, resolvent, verify_one_point, verify_two_point,
    CapacityResult, GammaCoefficients, OnePointReport, TwoPointReport,
};
pub use stochastic::{
    absorption_measure_mc, bessel_hit_estimate, bessel_hit_probability, origin_excursions,
    split_hit_probability_mc, BesselConfig, BesselEstimate, HitEstimate, JumpChain,
    OriginVisitStats,
};
pub use weights::{
    check_assumptions, radial_resistance, AssumptionReport, RadialProfile, WeightFamily,
    WeightSpec,
};
