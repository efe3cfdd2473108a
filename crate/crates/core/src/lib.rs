// `!(v > 0.0)` is used throughout for parameter guards because it rejects
// NaN along with non-positive values, which `v <= 0.0` would not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Simulation and analysis of bearing-only gathering dynamics: agents with
//! limited-range sensing move toward the midpoint direction of their extremal
//! visible bearings, provably staying connected and gathering in finite time.
//!
//! The crate is organized as
//! - [`geometry`]: planar primitives, convex hulls, interior angles;
//! - [`sensing`]: bearing sets, extremal-pair extraction, visibility graphs;
//! - [`dynamics`]: velocity laws, Euler stepping, merging, the run loop;
//! - [`analysis`]: perimeter Lyapunov metrics, decrease-rate bounds mu(K),
//!   and the connectivity audit ledger;
//! - [`polygon_bounds`]: the cosine-sum lower bound C_n, its descent-process
//!   proof artifact, and an independent brute-force oracle;
//! - [`scenario`]: generators and JSON persistence;
//! - [`output`]: CSV/JSON run artifacts.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod output;
pub mod polygon_bounds;
pub mod scenario;
pub mod sensing;

pub use analysis::{
    check_rate_bound, check_rate_bound_interval, connectivity_audit, default_rate_tol,
    default_step_tol,
    gathering_time_bound, hull_metrics, mu_bound, ConnectivityLedger, MetricsRecord,
};
pub use dynamics::{
    simulate, Agent, EventKind, RunResult, SimEvent, SpeedLaw, SwarmState, Termination,
};
pub use error::{Error, Result};
pub use geometry::{convex_hull, HullSummary, UnitVec2, Vec2};
pub use output::{write_run, Manifest};
pub use polygon_bounds::{
    brute_force_min, case_values, descent_run, theorem1_bound, AngleConfig,
};
pub use scenario::{
    gen_cone_near_minimum, gen_random_connected, gen_regular_polygon, load_scenario,
    save_scenario, Scenario, SpeedLawTag,
};
pub use sensing::{
    extremal, extremal_sweep, extremal_weights, is_connected, visibility_graph,
    BearingSet, ExtremalResult, Formulation, VisibilityGraph,
};
