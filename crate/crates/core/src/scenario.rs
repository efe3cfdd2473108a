//! Scenario construction and persistence: the random connected swarm, the
//! regular polygon with adjacent-only visibility, and the near-minimum cone,
//! plus JSON round-tripping.
//!
//! Random generation uses ChaCha8 seeded with the scenario seed, a named,
//! platform-independent generator recorded in the `generator` descriptor so
//! runs replicate across machines.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{gathering_time_bound};
use crate::dynamics::SwarmState;
use crate::error::{Error, Result};
use crate::geometry::{convex_hull, Vec2};
use crate::sensing::{is_connected, visibility_graph};

pub const SCENARIO_FORMAT_VERSION: u32 = 1;

/// Rejection cap for the random-connected generator.
const MAX_GENERATION_ATTEMPTS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeedLawTag {
    ConstantGain,
    ConstantSpeed,
}

/// Initial positions plus all physical and numerical parameters of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub version: u32,
    pub n: usize,
    pub positions: Vec<Vec2>,
    pub v0: f64,
    pub visibility: f64,
    pub dt: f64,
    pub t_max: f64,
    pub speed_law: SpeedLawTag,
    pub merge_radius: f64,
    pub metrics_every: u64,
    pub seed: u64,
    pub generator: String,
    pub initially_connected: bool,
}

/// Default time step at the given parameters; evaluates to 0.05 at the
/// reference values v0 = 1, V = 200.
pub fn default_dt(visibility: f64, v0: f64) -> f64 {
    0.05 * visibility / (200.0 * v0)
}

/// Default sampling extent for random generation, keeping the rejection rate
/// moderate around N = 15, V = 200.
pub fn default_extent(visibility: f64, n: usize) -> f64 {
    visibility * (n as f64).sqrt() / 2.0
}

impl Scenario {
    /// Scenario at reference defaults (v0 = 1, V = 200, constant gain) around
    /// explicit positions. t_max is sized off the gathering-time bound with
    /// ample margin for the constant-speed variant.
    pub fn from_positions(positions: Vec<Vec2>) -> Self {
        let v0 = 1.0;
        let visibility = 200.0;
        Scenario::with_params(positions, v0, visibility, "manual".to_string(), 0)
    }

    pub fn with_params(
        positions: Vec<Vec2>,
        v0: f64,
        visibility: f64,
        generator: String,
        seed: u64,
    ) -> Self {
        let n = positions.len();
        let dt = default_dt(visibility, v0);
        let t_max = if n >= 2 {
            let hull = convex_hull(&positions).expect("positions validated by generators");
            let t_ub = gathering_time_bound(hull.perimeter, n, v0).unwrap();
            (2.5 * t_ub).max(10.0 * dt)
        } else {
            dt
        };
        let state = SwarmState::from_positions(0.0, &positions);
        let initially_connected = is_connected(&visibility_graph(&state, visibility));
        Scenario {
            version: SCENARIO_FORMAT_VERSION,
            n,
            positions,
            v0,
            visibility,
            dt,
            t_max,
            speed_law: SpeedLawTag::ConstantGain,
            merge_radius: 2.0 * v0 * dt,
            metrics_every: 10,
            seed,
            generator,
            initially_connected,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != SCENARIO_FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                found: self.version,
                supported: SCENARIO_FORMAT_VERSION,
            });
        }
        if self.n != self.positions.len() {
            return Err(Error::Config(format!(
                "n = {} does not match {} positions",
                self.n,
                self.positions.len()
            )));
        }
        if self.n == 0 {
            return Err(Error::Config("scenario needs at least one agent".into()));
        }
        for (i, p) in self.positions.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::Config(format!("position {i} is not finite")));
            }
        }
        for (name, v) in [
            ("v0", self.v0),
            ("visibility", self.visibility),
            ("dt", self.dt),
            ("t_max", self.t_max),
            ("merge_radius", self.merge_radius),
        ] {
            if !(v > 0.0) && !(name == "t_max" && self.n == 1) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.metrics_every == 0 {
            return Err(Error::Config("metrics_every must be at least 1".into()));
        }
        Ok(())
    }

    /// Gathering-time upper bound L(0)/mu(N) for this scenario.
    pub fn t_upper_bound(&self) -> Result<f64> {
        let hull = convex_hull(&self.positions)?;
        gathering_time_bound(hull.perimeter, self.n, self.v0)
    }
}

/// Positions i.i.d. uniform on [0, extent]^2, resampled until the visibility
/// graph is connected. Deterministic in the seed; the attempt count is
/// recorded in the generator descriptor.
pub fn gen_random_connected(
    n: usize,
    visibility: f64,
    extent: f64,
    seed: u64,
) -> Result<Scenario> {
    if n == 0 {
        return Err(Error::InvalidInput("need at least one agent".into()));
    }
    if !(extent > 0.0) || !(visibility > 0.0) {
        return Err(Error::InvalidInput("extent and visibility must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 1..=MAX_GENERATION_ATTEMPTS {
        let positions: Vec<Vec2> = (0..n)
            .map(|_| Vec2::new(rng.random_range(0.0..extent), rng.random_range(0.0..extent)))
            .collect();
        let state = SwarmState::from_positions(0.0, &positions);
        if is_connected(&visibility_graph(&state, visibility)) {
            let generator = format!(
                "random(n={n},visibility={visibility},extent={extent},seed={seed},rng=chacha8,attempts={attempt})"
            );
            return Ok(Scenario::with_params(positions, 1.0, visibility, generator, seed));
        }
    }
    Err(Error::GenerationFailure {
        attempts: MAX_GENERATION_ATTEMPTS,
        hint: format!("no connected configuration at n={n}, V={visibility}, extent={extent}; try a smaller extent"),
    })
}

/// Chord length between vertices `k` apart on a regular n-gon of the given
/// circumradius.
pub fn chord_length(n: usize, circumradius: f64, k: usize) -> f64 {
    2.0 * circumradius * (k as f64 * PI / n as f64).sin()
}

/// Circumradius at which adjacent vertices sit exactly at the visibility
/// range, so only polygon neighbors are mutually visible.
pub fn circumradius_for_adjacent_visibility(n: usize, visibility: f64) -> f64 {
    visibility / (2.0 * (PI / n as f64).sin())
}

/// Regular n-gon centered at the origin.
pub fn gen_regular_polygon(n: usize, circumradius: f64) -> Result<Scenario> {
    if n < 3 {
        return Err(Error::InvalidInput(format!("regular polygon needs n >= 3, got {n}")));
    }
    if !(circumradius > 0.0) {
        return Err(Error::InvalidInput("circumradius must be positive".into()));
    }
    let positions: Vec<Vec2> = (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            Vec2::new(circumradius * t.cos(), circumradius * t.sin())
        })
        .collect();
    let generator = format!("regular(n={n},circumradius={circumradius})");
    Ok(Scenario::with_params(positions, 1.0, 200.0, generator, 0))
}

/// Thin-cone polygon whose interior angles approach the one-zero optimum:
/// an apex of angle ~epsilon and n-1 vertices on a far circular arc with
/// equal turning angles pi/(n-1). Only defined for 3 <= n <= 6, where the
/// cone (not the regular polygon) is the extremal shape.
pub fn gen_cone_near_minimum(n: usize, epsilon: f64, scale: f64) -> Result<Scenario> {
    if !(3..=6).contains(&n) {
        return Err(Error::InvalidInput(format!(
            "cone configurations exist for 3 <= n <= 6 (regular polygon is extremal for n >= 7), got {n}"
        )));
    }
    if !(epsilon > 0.0 && epsilon <= 0.1) {
        return Err(Error::InvalidInput(format!(
            "epsilon must be in (0, 0.1]; epsilon = {epsilon} degenerates to a non-realizable polygon"
        )));
    }
    if !(scale > 0.0) {
        return Err(Error::InvalidInput("scale must be positive".into()));
    }
    let turn = PI / (n as f64 - 1.0);
    let half_arc = (n as f64 - 2.0) * turn / 2.0;
    let arc_radius = scale * (epsilon / 2.0).tan() / half_arc.sin();
    let center = Vec2::new(scale, 0.0);
    let mut positions = vec![Vec2::ZERO];
    for j in 0..(n - 1) {
        let psi = (j as f64 - (n as f64 - 2.0) / 2.0) * turn;
        positions.push(center + Vec2::new(psi.cos(), psi.sin()) * arc_radius);
    }
    let hull = convex_hull(&positions)?;
    debug_assert_eq!(hull.k, n, "cone construction must be strictly convex");

    let generator = format!("cone(n={n},epsilon={epsilon},scale={scale})");
    let mut sc = Scenario::with_params(positions, 1.0, 200.0, generator, 0);
    // The far cluster spacing is O(epsilon * scale); resolve its early merges
    // with a matching step size and per-step metrics.
    sc.dt = sc.dt.min(epsilon * scale / (40.0 * sc.v0));
    sc.merge_radius = 2.0 * sc.v0 * sc.dt;
    sc.metrics_every = 1;
    Ok(sc)
}

/// Atomic (temp + rename) pretty-JSON save.
pub fn save_scenario(scenario: &Scenario, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(scenario)
        .map_err(|e| Error::Parse { path: path.to_path_buf(), detail: e.to_string() })?;
    crate::output::write_atomic(path, json.as_bytes())
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    // Surface an unsupported version before any field-level parse error.
    if let Ok(v) = serde_json::from_str::<serde_json::Value>(&text) {
        if let Some(found) = v.get("version").and_then(|x| x.as_u64()) {
            if found != SCENARIO_FORMAT_VERSION as u64 {
                return Err(Error::VersionMismatch {
                    found: found as u32,
                    supported: SCENARIO_FORMAT_VERSION,
                });
            }
        }
    }
    let scenario: Scenario = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    scenario.validate()?;
    Ok(scenario)
}
