//! Visible-neighbor bearing sets and the extremal bearing pair (u+, u-).
//!
//! Two formulations are provided: the angular sweep (default in the
//! simulator, O(d log d) per agent) and the cross-product weight
//! formulation (O(d^2), kept as a cross-check oracle). They agree on the
//! sum u+ + u- for every bearing set; the individual vectors can differ on
//! measure-zero configurations (e.g. a gap of exactly pi, or collinear
//! duplicate directions), which is fine because only the sum feeds the
//! dynamics. The weight formulation can return sub-unit convex combinations
//! in those degenerate cases, so the extremal vectors are stored as plain
//! vectors; the sweep always yields unit vectors (or zero).

use std::collections::BTreeSet;
use std::f64::consts::PI;

use crate::dynamics::SwarmState;
use crate::geometry::{unit_bearing, UnitVec2, Vec2};

/// Nonzero bearings from one agent to its visible neighbors.
#[derive(Clone, Debug)]
pub struct BearingSet {
    /// Index of the owning agent in the swarm's agent list.
    pub owner: usize,
    /// (neighbor agent id, unit bearing); zero bearings are never stored.
    pub bearings: Vec<(u32, UnitVec2)>,
}

impl BearingSet {
    pub fn new(owner: usize, bearings: Vec<(u32, UnitVec2)>) -> Self {
        debug_assert!(bearings.iter().all(|(_, u)| !u.is_zero()));
        BearingSet { owner, bearings }
    }

    /// Bearings from agent `owner` (index into `state.agents`) to every
    /// neighbor within `visibility`.
    pub fn from_state(state: &SwarmState, owner: usize, visibility: f64) -> Self {
        let p = state.agents[owner].position;
        let mut bearings = Vec::new();
        for (j, agent) in state.agents.iter().enumerate() {
            if j == owner {
                continue;
            }
            let u = unit_bearing(p, agent.position, visibility)
                .expect("swarm positions are finite by invariant");
            if !u.is_zero() {
                bearings.push((agent.id, u));
            }
        }
        BearingSet { owner, bearings }
    }

    pub fn is_empty(&self) -> bool {
        self.bearings.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtremalKind {
    /// No angular gap strictly greater than pi; the agent stays put.
    Surrounded,
    Movable,
}

/// Outcome of the extremal-bearing computation for one agent.
#[derive(Clone, Copy, Debug)]
pub struct ExtremalResult {
    pub kind: ExtremalKind,
    pub u_plus: Vec2,
    pub u_minus: Vec2,
}

impl ExtremalResult {
    pub const SURROUNDED: ExtremalResult = ExtremalResult {
        kind: ExtremalKind::Surrounded,
        u_plus: Vec2::ZERO,
        u_minus: Vec2::ZERO,
    };

    /// The drive vector u+ + u-; zero for surrounded agents.
    pub fn sum(&self) -> Vec2 {
        self.u_plus + self.u_minus
    }

    pub fn is_surrounded(&self) -> bool {
        self.kind == ExtremalKind::Surrounded
    }
}

/// Which extremal formulation to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Formulation {
    Sweep,
    Weights,
}

/// Undirected visibility graph over agent ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VisibilityGraph {
    pub n: usize,
    /// Unordered pairs stored as (min id, max id).
    pub edges: BTreeSet<(u32, u32)>,
}

pub fn visibility_graph(state: &SwarmState, visibility: f64) -> VisibilityGraph {
    let mut edges = BTreeSet::new();
    let agents = &state.agents;
    for i in 0..agents.len() {
        for j in (i + 1)..agents.len() {
            let d = agents[i].position.distance(agents[j].position);
            if d > 0.0 && d <= visibility {
                let (a, b) = (agents[i].id, agents[j].id);
                edges.insert((a.min(b), a.max(b)));
            }
        }
    }
    VisibilityGraph { n: agents.len(), edges }
}

pub fn is_connected(graph: &VisibilityGraph) -> bool {
    if graph.n <= 1 {
        return true;
    }
    let nodes: BTreeSet<u32> = graph.edges.iter().flat_map(|&(a, b)| [a, b]).collect();
    // Agents absent from every edge are isolated.
    if nodes.len() < graph.n {
        return false;
    }
    let idx: std::collections::HashMap<u32, usize> =
        nodes.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let mut parent: Vec<usize> = (0..nodes.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(a, b) in &graph.edges {
        let (ra, rb) = (find(&mut parent, idx[&a]), find(&mut parent, idx[&b]));
        if ra != rb {
            parent[ra] = rb;
        }
    }
    let root = find(&mut parent, 0);
    (0..nodes.len()).all(|i| find(&mut parent, i) == root)
}

/// Angular-sweep extremal bearings: sort polar angles, find the unique cyclic
/// gap strictly greater than pi; its two bounding bearings are u+ and u-.
/// A gap of exactly pi counts as surrounded (the weight formulation yields a
/// zero drive there, so the dynamics agrees on the tie-break).
pub fn extremal_sweep(bearings: &BearingSet) -> ExtremalResult {
    let mut angs: Vec<(f64, UnitVec2)> =
        bearings.bearings.iter().map(|&(_, u)| (u.angle(), u)).collect();
    if angs.is_empty() {
        return ExtremalResult::SURROUNDED;
    }
    angs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // Duplicate directions: one representative is enough for gap analysis.
    angs.dedup_by(|a, b| a.0 == b.0);
    let r = angs.len();
    if r == 1 {
        // Single visible direction: the 2*pi gap is bounded by it on both sides.
        let u = angs[0].1.as_vec2();
        return ExtremalResult { kind: ExtremalKind::Movable, u_plus: u, u_minus: u };
    }
    for i in 0..r {
        let (a_lo, u_lo) = angs[i];
        let (a_hi, u_hi) = angs[(i + 1) % r];
        let gap = if i + 1 == r { a_hi + 2.0 * PI - a_lo } else { a_hi - a_lo };
        if gap > PI {
            // Clockwise sweep enters the gap at the upper-angle bearing.
            return ExtremalResult {
                kind: ExtremalKind::Movable,
                u_plus: u_hi.as_vec2(),
                u_minus: u_lo.as_vec2(),
            };
        }
    }
    ExtremalResult::SURROUNDED
}

fn h_plus(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x == 0.0 {
        0.5
    } else {
        0.0
    }
}

/// Cross-product weight formulation: p_j^+- = prod_{k != j} h^+-(u_j x u_k),
/// normalized into weights, with u^+- the weighted bearing sums. Empty
/// products are 1, and a zero weight-sum denominator yields a zero vector.
pub fn extremal_weights(bearings: &BearingSet) -> ExtremalResult {
    let us: Vec<UnitVec2> = bearings.bearings.iter().map(|&(_, u)| u).collect();
    let r = us.len();
    if r == 0 {
        return ExtremalResult::SURROUNDED;
    }
    let mut p_plus = vec![1.0f64; r];
    let mut p_minus = vec![1.0f64; r];
    for j in 0..r {
        for k in 0..r {
            if k == j {
                continue;
            }
            let s = us[j].cross(us[k]);
            p_plus[j] *= h_plus(s);
            p_minus[j] *= h_plus(-s);
        }
    }
    let weighted = |ps: &[f64]| -> Vec2 {
        let total: f64 = ps.iter().sum();
        if total == 0.0 {
            return Vec2::ZERO;
        }
        let mut v = Vec2::ZERO;
        for (p, u) in ps.iter().zip(&us) {
            if *p > 0.0 {
                v = v + u.as_vec2() * (p / total);
            }
        }
        v
    };
    let u_plus = weighted(&p_plus);
    let u_minus = weighted(&p_minus);
    if (u_plus + u_minus).norm() <= 1e-9 {
        return ExtremalResult::SURROUNDED;
    }
    ExtremalResult { kind: ExtremalKind::Movable, u_plus, u_minus }
}

pub fn extremal(bearings: &BearingSet, formulation: Formulation) -> ExtremalResult {
    match formulation {
        Formulation::Sweep => extremal_sweep(bearings),
        Formulation::Weights => extremal_weights(bearings),
    }
}

/// Drive vector u+ + u- of the default (sweep) formulation.
pub fn extremal_vector_sum(bearings: &BearingSet) -> Vec2 {
    extremal_sweep(bearings).sum()
}
