//! Time evolution of the swarm: velocity laws, synchronous forward-Euler
//! stepping, transitive agent merging, and the full simulation loop.
//!
//! The velocity field is discontinuous (surrounded/movable switches), so a
//! fixed-step Euler scheme with velocities read from the pre-step snapshot
//! is used throughout; per-agent evaluation order never matters.

use serde::{Deserialize, Serialize};

use crate::analysis::{hull_metrics, ConnectivityLedger, MetricsRecord};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::scenario::{Scenario, SpeedLawTag};
use crate::sensing::{
    extremal_sweep, is_connected, visibility_graph, BearingSet, ExtremalResult,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub id: u32,
    pub position: Vec2,
    /// Number of original agents merged into this one.
    pub multiplicity: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SwarmState {
    pub time: f64,
    pub agents: Vec<Agent>,
}

impl SwarmState {
    pub fn from_positions(time: f64, positions: &[Vec2]) -> Self {
        SwarmState {
            time,
            agents: positions
                .iter()
                .enumerate()
                .map(|(i, &p)| Agent { id: i as u32, position: p, multiplicity: 1 })
                .collect(),
        }
    }

    pub fn total_multiplicity(&self) -> u32 {
        self.agents.iter().map(|a| a.multiplicity).sum()
    }

    pub fn positions(&self) -> Vec<Vec2> {
        self.agents.iter().map(|a| a.position).collect()
    }
}

/// Velocity law applied to the extremal drive vector u+ + u-.
#[derive(Clone, Copy)]
pub enum SpeedLaw {
    /// velocity = v0 * (u+ + u-); speed varies smoothly in [0, 2 v0].
    ConstantGain { v0: f64 },
    /// velocity = v0 * (u+ + u-)/|u+ + u-| for movable agents; the gain
    /// 1/|u+ + u-| is at least 1/2, so gathering bounds hold with eps = 1/2.
    ConstantSpeed { v0: f64 },
    /// velocity = gain(bearings, extremal) * (u+ + u-), with gain >= epsilon.
    GeneralGain { epsilon: f64, gain: fn(&BearingSet, &ExtremalResult) -> f64 },
}

impl std::fmt::Debug for SpeedLaw {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpeedLaw::ConstantGain { v0 } => write!(f, "ConstantGain(v0={v0})"),
            SpeedLaw::ConstantSpeed { v0 } => write!(f, "ConstantSpeed(v0={v0})"),
            SpeedLaw::GeneralGain { epsilon, .. } => write!(f, "GeneralGain(eps={epsilon})"),
        }
    }
}

impl SpeedLaw {
    pub fn from_tag(tag: SpeedLawTag, v0: f64) -> Self {
        match tag {
            SpeedLawTag::ConstantGain => SpeedLaw::ConstantGain { v0 },
            SpeedLawTag::ConstantSpeed => SpeedLaw::ConstantSpeed { v0 },
        }
    }

    /// Maximum per-agent speed under this law, used for step-size checks.
    pub fn max_speed(&self) -> f64 {
        match self {
            SpeedLaw::ConstantGain { v0 } => 2.0 * v0,
            SpeedLaw::ConstantSpeed { v0 } => *v0,
            // No a-priori cap for a general gain; callers size dt themselves.
            SpeedLaw::GeneralGain { .. } => f64::NAN,
        }
    }
}

/// Velocity of one agent given its visible bearings. Surrounded agents stay put.
pub fn agent_velocity(bearings: &BearingSet, law: &SpeedLaw) -> Vec2 {
    let ext = extremal_sweep(bearings);
    velocity_from_extremal(bearings, &ext, law)
}

pub fn velocity_from_extremal(
    bearings: &BearingSet,
    ext: &ExtremalResult,
    law: &SpeedLaw,
) -> Vec2 {
    if ext.is_surrounded() {
        return Vec2::ZERO;
    }
    let sum = ext.sum();
    match law {
        SpeedLaw::ConstantGain { v0 } => sum * *v0,
        SpeedLaw::ConstantSpeed { v0 } => {
            let n = sum.norm();
            if n > 1e-12 {
                sum * (*v0 / n)
            } else {
                Vec2::ZERO
            }
        }
        SpeedLaw::GeneralGain { epsilon, gain } => {
            let g = gain(bearings, ext);
            debug_assert!(g >= *epsilon);
            sum * g
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimEvent {
    pub time: f64,
    pub kind: EventKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EventKind {
    /// Agents within the merge radius collapsed into `survivor`.
    Merge { ids: Vec<u32>, survivor: u32 },
    VisibilityEdgeAdded { a: u32, b: u32 },
    SurroundedToggle { id: u32, surrounded: bool },
    /// An initially-visible pair moved out of range. Never expected under the
    /// exact dynamics; recorded as a diagnostic rather than an event class.
    ConnectivityViolation { a: u32, b: u32, distance: f64 },
}

/// Transitive clustering of agents within `merge_radius`; each cluster becomes
/// one agent at the multiplicity-weighted centroid, keeping the smallest id.
pub fn merge_coincident(state: &SwarmState, merge_radius: f64) -> (SwarmState, Vec<SimEvent>) {
    let n = state.agents.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if state.agents[i].position.distance(state.agents[j].position) <= merge_radius {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut clusters: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        clusters.entry(r).or_default().push(i);
    }
    let mut agents = Vec::with_capacity(clusters.len());
    let mut events = Vec::new();
    for members in clusters.values() {
        if members.len() == 1 {
            agents.push(state.agents[members[0]]);
            continue;
        }
        let mut total_mult = 0u32;
        let mut centroid = Vec2::ZERO;
        let mut ids: Vec<u32> = Vec::with_capacity(members.len());
        for &m in members {
            let a = &state.agents[m];
            total_mult += a.multiplicity;
            centroid = centroid + a.position * (a.multiplicity as f64);
            ids.push(a.id);
        }
        centroid = centroid * (1.0 / total_mult as f64);
        ids.sort_unstable();
        let survivor = ids[0];
        agents.push(Agent { id: survivor, position: centroid, multiplicity: total_mult });
        events.push(SimEvent { time: state.time, kind: EventKind::Merge { ids, survivor } });
    }
    agents.sort_by_key(|a| a.id);
    (SwarmState { time: state.time, agents }, events)
}

/// One synchronous Euler step followed by a merge pass.
pub fn step(
    state: &SwarmState,
    visibility: f64,
    law: &SpeedLaw,
    dt: f64,
    merge_radius: f64,
) -> Result<(SwarmState, Vec<SimEvent>)> {
    if !(dt > 0.0) {
        return Err(Error::Config(format!("dt must be positive, got {dt}")));
    }
    let max_speed = law.max_speed();
    if max_speed.is_finite() && dt * max_speed > visibility / 10.0 {
        return Err(Error::Config(format!(
            "step displacement {} exceeds visibility/10 = {}",
            dt * max_speed,
            visibility / 10.0
        )));
    }
    let velocities: Vec<Vec2> = (0..state.agents.len())
        .map(|i| agent_velocity(&BearingSet::from_state(state, i, visibility), law))
        .collect();
    let advanced = advance(state, &velocities, dt);
    let (merged, events) = merge_coincident(&advanced, merge_radius);
    Ok((merged, events))
}

fn advance(state: &SwarmState, velocities: &[Vec2], dt: f64) -> SwarmState {
    SwarmState {
        time: state.time + dt,
        agents: state
            .agents
            .iter()
            .zip(velocities)
            .map(|(a, &v)| Agent { position: a.position + v * dt, ..*a })
            .collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Termination {
    Gathered { t: f64 },
    TimedOut,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentSample {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub multiplicity: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub agents: Vec<AgentSample>,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub scenario: Scenario,
    pub trajectory: Vec<TrajectorySample>,
    pub metrics: Vec<MetricsRecord>,
    pub events: Vec<SimEvent>,
    pub termination: Termination,
    pub ledger: ConnectivityLedger,
}

impl RunResult {
    pub fn gathered_time(&self) -> Option<f64> {
        match self.termination {
            Termination::Gathered { t } => Some(t),
            Termination::TimedOut => None,
        }
    }
}

/// Runs a scenario to completion (single live agent) or t_max.
///
/// Deterministic for a fixed scenario: the loop is single-threaded and every
/// per-step computation depends only on the previous state.
pub fn simulate(scenario: &Scenario, allow_disconnected: bool) -> Result<RunResult> {
    scenario.validate()?;
    let visibility = scenario.visibility;
    let dt = scenario.dt;
    let law = SpeedLaw::from_tag(scenario.speed_law, scenario.v0);
    let max_speed = law.max_speed();
    if dt * max_speed > visibility / 10.0 {
        return Err(Error::Config(format!(
            "dt {} too large: step displacement {} exceeds visibility/10",
            dt,
            dt * max_speed
        )));
    }

    let mut state = SwarmState::from_positions(0.0, &scenario.positions);
    let mut graph = visibility_graph(&state, visibility);
    if !is_connected(&graph) && !allow_disconnected {
        return Err(Error::Config(
            "initial visibility graph is disconnected (pass allow_disconnected to proceed)".into(),
        ));
    }
    let total_mult = state.total_multiplicity();
    let mut ledger = ConnectivityLedger::new(&state, visibility, max_speed * dt);

    let mut trajectory = Vec::new();
    let mut metrics: Vec<MetricsRecord> = Vec::new();
    let mut events: Vec<SimEvent> = Vec::new();
    let mut prev_surrounded: std::collections::HashMap<u32, bool> = Default::default();
    let mut toggles_cum: u64 = 0;
    let mut step_idx: u64 = 0;
    let termination;

    loop {
        let ext: Vec<(BearingSet, ExtremalResult)> = (0..state.agents.len())
            .map(|i| {
                let b = BearingSet::from_state(&state, i, visibility);
                let e = extremal_sweep(&b);
                (b, e)
            })
            .collect();
        let velocities: Vec<Vec2> =
            ext.iter().map(|(b, e)| velocity_from_extremal(b, e, &law)).collect();
        let surrounded_count =
            ext.iter().filter(|(_, e)| e.is_surrounded()).count() as u32;

        for (agent, (_, e)) in state.agents.iter().zip(&ext) {
            let now = e.is_surrounded();
            if let Some(&before) = prev_surrounded.get(&agent.id) {
                if before != now {
                    toggles_cum += 1;
                    events.push(SimEvent {
                        time: state.time,
                        kind: EventKind::SurroundedToggle { id: agent.id, surrounded: now },
                    });
                }
            }
            prev_surrounded.insert(agent.id, now);
        }

        let gathered = state.agents.len() == 1;
        let timed_out = !gathered && state.time >= scenario.t_max - 1e-12;
        let sample_due =
            step_idx.is_multiple_of(scenario.metrics_every) || gathered || timed_out;
        if sample_due && metrics.last().map(|m| m.t) != Some(state.time) {
            trajectory.push(TrajectorySample {
                t: state.time,
                agents: state
                    .agents
                    .iter()
                    .zip(&velocities)
                    .map(|(a, v)| AgentSample {
                        id: a.id,
                        x: a.position.x,
                        y: a.position.y,
                        vx: v.x,
                        vy: v.y,
                        multiplicity: a.multiplicity,
                    })
                    .collect(),
            });
            let prev = metrics.last();
            let sample_dt = prev.map(|m| state.time - m.t).unwrap_or(0.0);
            let mut rec = hull_metrics(&state, visibility, prev, sample_dt);
            rec.toggles_cum = toggles_cum;
            rec.surrounded_count = surrounded_count;
            metrics.push(rec);
        }
        if gathered {
            termination = Termination::Gathered { t: state.time };
            break;
        }
        if timed_out {
            termination = Termination::TimedOut;
            break;
        }

        let advanced = advance(&state, &velocities, dt);
        let (merged, merge_events) = merge_coincident(&advanced, scenario.merge_radius);
        for ev in &merge_events {
            if let EventKind::Merge { ids, survivor } = &ev.kind {
                ledger.record_merge(ids, *survivor);
                prev_surrounded.retain(|id, _| !ids.contains(id) || id == survivor);
            }
        }
        events.extend(merge_events);
        ledger.observe(&merged);
        debug_assert_eq!(merged.total_multiplicity(), total_mult);

        let new_graph = visibility_graph(&merged, visibility);
        diff_graphs(&graph, &new_graph, &merged, visibility, &mut events);
        graph = new_graph;
        state = merged;
        step_idx += 1;
    }

    Ok(RunResult {
        scenario: scenario.clone(),
        trajectory,
        metrics,
        events,
        termination,
        ledger,
    })
}

fn diff_graphs(
    before: &crate::sensing::VisibilityGraph,
    after: &crate::sensing::VisibilityGraph,
    state: &SwarmState,
    _visibility: f64,
    events: &mut Vec<SimEvent>,
) {
    let live: std::collections::HashSet<u32> = state.agents.iter().map(|a| a.id).collect();
    for &(a, b) in after.edges.difference(&before.edges) {
        events.push(SimEvent { time: state.time, kind: EventKind::VisibilityEdgeAdded { a, b } });
    }
    for &(a, b) in before.edges.difference(&after.edges) {
        // Edges vanish legitimately when an endpoint merged away; with both
        // endpoints alive this is a connectivity loss, which the exact
        // dynamics forbids.
        if live.contains(&a) && live.contains(&b) {
            let pa = state.agents.iter().find(|ag| ag.id == a).unwrap().position;
            let pb = state.agents.iter().find(|ag| ag.id == b).unwrap().position;
            events.push(SimEvent {
                time: state.time,
                kind: EventKind::ConnectivityViolation { a, b, distance: pa.distance(pb) },
            });
        }
    }
}
