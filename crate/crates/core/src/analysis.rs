//! Lyapunov monitoring: hull metrics along runs, the closed-form decrease
//! rate bound mu(K), the gathering-time bound, and the connectivity audit.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dynamics::SwarmState;
use crate::error::{Error, Result};
use crate::geometry::{convex_hull, Vec2};
use crate::sensing::{is_connected, visibility_graph};

/// Per-sample metrics row. `dldt_est` and `cos_sum` are absent when undefined
/// (first sample, resp. K < 3).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub t: f64,
    /// Hull vertex count over distinct live positions (merged agents count as one).
    pub k_hull: usize,
    pub perimeter: f64,
    #[serde(rename = "dLdt_est")]
    pub dldt_est: Option<f64>,
    /// -mu(K) for K >= 2, zero for a point.
    pub bound_rate: f64,
    pub cos_sum: Option<f64>,
    pub surrounded_count: u32,
    pub toggles_cum: u64,
    pub connectivity_ok: bool,
}

/// Closed-form lower bound on -dL/dt for a hull with K vertices:
/// mu(K) = 2 v0 K (1 - max{cos(2pi/K), ((K-1)/K) cos(pi/(K-1)) - 1/K}).
pub fn mu_bound(k: usize, v0: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("mu_bound requires K >= 2, got {k}")));
    }
    let kf = k as f64;
    let a = (2.0 * PI / kf).cos();
    let b = (kf - 1.0) / kf * (PI / (kf - 1.0)).cos() - 1.0 / kf;
    Ok(2.0 * v0 * kf * (1.0 - a.max(b)))
}

/// Upper bound L(0)/mu(N) on the gathering time.
pub fn gathering_time_bound(l0: f64, n: usize, v0: f64) -> Result<f64> {
    if l0 < 0.0 {
        return Err(Error::InvalidInput(format!("initial perimeter must be >= 0, got {l0}")));
    }
    if !(v0 > 0.0) {
        return Err(Error::InvalidInput(format!("v0 must be positive, got {v0}")));
    }
    Ok(l0 / mu_bound(n, v0)?)
}

/// Hull metrics over distinct live positions, with a first-order finite
/// difference for dL/dt against the previous sample.
pub fn hull_metrics(
    state: &SwarmState,
    visibility: f64,
    prev: Option<&MetricsRecord>,
    sample_dt: f64,
) -> MetricsRecord {
    let mut positions = state.positions();
    positions.sort_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).unwrap());
    positions.dedup_by(|a, b| a.x == b.x && a.y == b.y);
    let hull = convex_hull(&positions).expect("live swarm is non-empty");
    let dldt_est = match prev {
        Some(p) if sample_dt > 0.0 => Some((hull.perimeter - p.perimeter) / sample_dt),
        _ => None,
    };
    let bound_rate = if hull.k >= 2 { -mu_bound(hull.k, 1.0).unwrap() } else { 0.0 };
    let cos_sum = (hull.k >= 3).then(|| hull.cos_sum());
    let graph = visibility_graph(state, visibility);
    MetricsRecord {
        t: state.time,
        k_hull: hull.k,
        perimeter: hull.perimeter,
        dldt_est,
        bound_rate,
        cos_sum,
        surrounded_count: 0,
        toggles_cum: prev.map(|p| p.toggles_cum).unwrap_or(0),
        connectivity_ok: is_connected(&graph),
    }
}

/// Default slack for rate-bound checks: 2% of mu(K) plus a discretization term.
pub fn default_rate_tol(k: usize, v0: f64, dt: f64) -> f64 {
    0.02 * mu_bound(k.max(2), v0).unwrap() + 10.0 * v0 * dt
}

/// Checks the measured decrease rate against both the angle-sum form
/// 2 v0 sum(1 + cos theta_i) and the closed form mu(K). Only meaningful on
/// samples where K >= 3 held across the sampling interval.
pub fn check_rate_bound(record: &MetricsRecord, v0: f64, tol: f64) -> bool {
    let (Some(dldt), Some(cos_sum)) = (record.dldt_est, record.cos_sum) else {
        return false;
    };
    let angle_bound = 2.0 * v0 * (record.k_hull as f64 + cos_sum);
    let mu = mu_bound(record.k_hull, v0).expect("k >= 3 here");
    -dldt >= angle_bound - tol && -dldt >= mu - tol
}

/// Interval form of the rate check for a finite difference taken over
/// [prev.t, cur.t] with K unchanged: the mean rate dominates the mean of the
/// instantaneous bound, which is itself at least the smaller endpoint bound,
/// so the endpoint-only check can false-alarm when the hull sharpens fast.
pub fn check_rate_bound_interval(
    prev: &MetricsRecord,
    cur: &MetricsRecord,
    v0: f64,
    tol: f64,
) -> bool {
    let (Some(dldt), Some(cos_cur), Some(cos_prev)) =
        (cur.dldt_est, cur.cos_sum, prev.cos_sum)
    else {
        return false;
    };
    if prev.k_hull != cur.k_hull {
        return false;
    }
    let k = cur.k_hull as f64;
    let angle_bound = 2.0 * v0 * (k + cos_cur.min(cos_prev));
    let mu = mu_bound(cur.k_hull, v0).expect("k >= 3 here");
    -dldt >= angle_bound - tol && -dldt >= mu - tol
}

/// Tracks each initially-visible pair through merges and records the largest
/// single-step distance increase ever observed for it.
///
/// In continuous time neighbor distances never increase: the drive satisfies
/// (u+ + u-).b >= 0 for every visible bearing b, so both radial velocity
/// components point inward. One Euler step can still grow a distance by a
/// second-order transverse term: with per-agent displacement at most s, the
/// growth is bounded by sqrt(max(d, 2s)^2 + (2s)^2) - d, which is ~2s^2/d in
/// the far field but O(s) near the merge scale. The audit therefore allows
/// this geometric slack per observation and flags only the excess beyond it.
#[derive(Clone, Debug, Default)]
pub struct ConnectivityLedger {
    pub tracks: Vec<EdgeTrack>,
    id_map: HashMap<u32, u32>,
    /// Upper bound on per-agent displacement in one step (max speed * dt).
    max_agent_step: f64,
}

#[derive(Clone, Debug)]
pub struct EdgeTrack {
    /// Original agent ids at t = 0.
    pub a: u32,
    pub b: u32,
    prev_dist: f64,
    /// Largest raw single-step increase, for reporting.
    pub max_step_increase: f64,
    /// Largest increase beyond the per-step discretization slack.
    pub max_excess: f64,
    /// Raw increase and time at the max-excess observation.
    pub excess_increase: f64,
    pub at_time: f64,
    /// Set when an endpoint just merged: the surviving agent snapped to the
    /// cluster centroid, so the next observed jump is not dynamics motion and
    /// only re-baselines the distance.
    rebaseline: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub a: u32,
    pub b: u32,
    pub time: f64,
    /// Raw step increase at the offending observation.
    pub increase: f64,
    /// Portion beyond the discretization slack (what exceeded tol_step).
    pub excess: f64,
}

/// Worst-case one-step distance growth from transverse Euler motion when the
/// true radial derivative is <= 0.
fn euler_growth_slack(dist: f64, max_agent_step: f64) -> f64 {
    let rel = 2.0 * max_agent_step;
    (dist.max(rel).powi(2) + rel * rel).sqrt() - dist
}

impl ConnectivityLedger {
    pub fn new(state: &SwarmState, visibility: f64, max_agent_step: f64) -> Self {
        let graph = visibility_graph(state, visibility);
        let pos: HashMap<u32, Vec2> =
            state.agents.iter().map(|a| (a.id, a.position)).collect();
        let tracks = graph
            .edges
            .iter()
            .map(|&(a, b)| EdgeTrack {
                a,
                b,
                prev_dist: pos[&a].distance(pos[&b]),
                max_step_increase: 0.0,
                max_excess: 0.0,
                excess_increase: 0.0,
                at_time: state.time,
                rebaseline: false,
            })
            .collect();
        let id_map = state.agents.iter().map(|a| (a.id, a.id)).collect();
        ConnectivityLedger { tracks, id_map, max_agent_step }
    }

    /// Redirects every original id currently mapping into the merged cluster
    /// to the surviving id.
    pub fn record_merge(&mut self, merged_ids: &[u32], survivor: u32) {
        for cur in self.id_map.values_mut() {
            if merged_ids.contains(cur) {
                *cur = survivor;
            }
        }
        for tr in &mut self.tracks {
            if merged_ids.contains(&self.id_map[&tr.a])
                || merged_ids.contains(&self.id_map[&tr.b])
            {
                tr.rebaseline = true;
            }
        }
    }

    /// Updates tracked pair distances after one step.
    pub fn observe(&mut self, state: &SwarmState) {
        let pos: HashMap<u32, Vec2> =
            state.agents.iter().map(|a| (a.id, a.position)).collect();
        for tr in &mut self.tracks {
            let pa = pos[&self.id_map[&tr.a]];
            let pb = pos[&self.id_map[&tr.b]];
            let d = pa.distance(pb);
            if tr.rebaseline {
                tr.rebaseline = false;
                tr.prev_dist = d;
                continue;
            }
            let inc = d - tr.prev_dist;
            tr.max_step_increase = tr.max_step_increase.max(inc);
            let excess = inc - euler_growth_slack(tr.prev_dist, self.max_agent_step);
            if excess > tr.max_excess {
                tr.max_excess = excess;
                tr.excess_increase = inc;
                tr.at_time = state.time;
            }
            tr.prev_dist = d;
        }
    }

    pub fn max_increase(&self) -> f64 {
        self.tracks.iter().map(|t| t.max_step_increase).fold(0.0, f64::max)
    }
}

/// Euler discretization slack allowed per step for neighbor distances.
pub fn default_step_tol(v0: f64, dt: f64, visibility: f64) -> f64 {
    10.0 * (v0 * dt).powi(2) / visibility
}

/// Pairs whose distance grew by more than the per-step discretization slack
/// plus `tol_step` in a single step.
pub fn connectivity_audit(ledger: &ConnectivityLedger, tol_step: f64) -> Vec<Violation> {
    ledger
        .tracks
        .iter()
        .filter(|t| t.max_excess > tol_step)
        .map(|t| Violation {
            a: t.a,
            b: t.b,
            time: t.at_time,
            increase: t.excess_increase,
            excess: t.max_excess,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{simulate, SwarmState};
    use crate::polygon_bounds::theorem1_bound;
    use crate::scenario::Scenario;

    #[test]
    fn mu_reference_values() {
        assert!((mu_bound(2, 1.0).unwrap() - 8.0).abs() < 1e-12);
        assert!((mu_bound(3, 1.0).unwrap() - 8.0).abs() < 1e-12);
        assert!((mu_bound(4, 1.0).unwrap() - 7.0).abs() < 1e-12);
        // K = 7 sits on the no-zero branch: 2(7 + 7 cos(5 pi/7)).
        let expected = 2.0 * (7.0 + 7.0 * (5.0 * PI / 7.0).cos());
        assert!((mu_bound(7, 1.0).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 5.27).abs() < 0.005);
    }

    #[test]
    fn mu_rejects_k_below_2() {
        assert!(mu_bound(1, 1.0).is_err());
    }

    #[test]
    fn mu_positive_and_decreasing() {
        let mut prev = f64::INFINITY;
        for k in 2..=64 {
            let m = mu_bound(k, 1.0).unwrap();
            assert!(m > 0.0, "mu({k}) = {m}");
            if k >= 3 {
                assert!(m <= prev + 1e-12, "mu not non-increasing at {k}");
            }
            prev = m;
        }
    }

    #[test]
    fn mu_matches_piecewise_form() {
        for k in 2..=64 {
            let via_ck = 2.0 * (k as f64 + theorem1_bound(k).unwrap());
            assert!(
                (mu_bound(k, 1.0).unwrap() - via_ck).abs() < 1e-12,
                "forms disagree at K={k}"
            );
        }
    }

    #[test]
    fn gathering_time_examples() {
        assert_eq!(gathering_time_bound(0.0, 4, 1.0).unwrap(), 0.0);
        assert!((gathering_time_bound(8.0, 4, 1.0).unwrap() - 8.0 / 7.0).abs() < 1e-12);
        let mu15 = 2.0 * 15.0 * (1.0 - (2.0 * PI / 15.0).cos());
        assert!(
            (gathering_time_bound(100.0, 15, 1.0).unwrap() - 100.0 / mu15).abs() < 1e-12
        );
    }

    #[test]
    fn hull_metrics_single_agent() {
        let state = SwarmState::from_positions(0.0, &[Vec2::new(1.0, 2.0)]);
        let m = hull_metrics(&state, 200.0, None, 0.0);
        assert_eq!(m.k_hull, 1);
        assert_eq!(m.perimeter, 0.0);
        assert_eq!(m.cos_sum, None);
    }

    #[test]
    fn hull_metrics_unit_square() {
        let state = SwarmState::from_positions(
            0.0,
            &[
                Vec2::new(0.0, 0.0),
                Vec2::new(1.0, 0.0),
                Vec2::new(1.0, 1.0),
                Vec2::new(0.0, 1.0),
            ],
        );
        let m = hull_metrics(&state, 200.0, None, 0.0);
        assert_eq!(m.k_hull, 4);
        assert!((m.perimeter - 4.0).abs() < 1e-12);
        assert!(m.cos_sum.unwrap().abs() < 1e-12);
    }

    #[test]
    fn rate_bound_detects_violation() {
        let rec = MetricsRecord {
            t: 1.0,
            k_hull: 4,
            perimeter: 10.0,
            dldt_est: Some(0.0),
            bound_rate: -7.0,
            cos_sum: Some(0.0),
            surrounded_count: 0,
            toggles_cum: 0,
            connectivity_ok: true,
        };
        assert!(!check_rate_bound(&rec, 1.0, 0.1));
    }

    #[test]
    fn rate_bound_accepts_square_rate() {
        // A square of mutually visible agents loses perimeter at 8 v0, with
        // strict slack v0 over mu(4) = 7 v0.
        let sc = Scenario::from_positions(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(100.0, 0.0),
            Vec2::new(100.0, 100.0),
            Vec2::new(0.0, 100.0),
        ]);
        let run = simulate(&sc, false).unwrap();
        let early: Vec<&MetricsRecord> = run
            .metrics
            .iter()
            .filter(|m| m.k_hull == 4 && m.dldt_est.is_some() && m.t < 5.0)
            .collect();
        assert!(!early.is_empty());
        for m in early {
            assert!((-m.dldt_est.unwrap() - 8.0).abs() < 0.05, "rate {:?}", m.dldt_est);
            assert!(check_rate_bound(m, 1.0, default_rate_tol(4, 1.0, sc.dt)));
        }
    }

    #[test]
    fn audit_two_agent_head_on_clean() {
        let sc = Scenario::from_positions(vec![Vec2::ZERO, Vec2::new(50.0, 0.0)]);
        let run = simulate(&sc, false).unwrap();
        let tol = default_step_tol(sc.v0, sc.dt, sc.visibility);
        assert!(connectivity_audit(&run.ledger, tol).is_empty());
    }

    #[test]
    fn audit_flags_adversarial_trace() {
        let s0 = SwarmState::from_positions(0.0, &[Vec2::ZERO, Vec2::new(10.0, 0.0)]);
        // Zero step size: no discretization slack, raw increases are excesses.
        let mut ledger = ConnectivityLedger::new(&s0, 200.0, 0.0);
        let mut s1 = s0.clone();
        s1.time = 0.05;
        s1.agents[1].position = Vec2::new(11.0, 0.0);
        ledger.observe(&s1);
        let v = connectivity_audit(&ledger, 1e-3);
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].a, v[0].b), (0, 1));
        assert!((v[0].increase - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ledger_follows_merged_descendants() {
        let s0 = SwarmState::from_positions(
            0.0,
            &[Vec2::ZERO, Vec2::new(10.0, 0.0), Vec2::new(20.0, 0.0)],
        );
        let mut ledger = ConnectivityLedger::new(&s0, 15.0, 0.0);
        // Tracked edges: (0,1) and (1,2). Agents 1 and 2 merge into id 1.
        ledger.record_merge(&[1, 2], 1);
        let merged = SwarmState {
            time: 0.05,
            agents: vec![
                crate::dynamics::Agent { id: 0, position: Vec2::ZERO, multiplicity: 1 },
                crate::dynamics::Agent {
                    id: 1,
                    position: Vec2::new(15.0, 0.0),
                    multiplicity: 2,
                },
            ],
        };
        // The merge snap 10 -> 15 only re-baselines; no violation yet.
        ledger.observe(&merged);
        assert!(connectivity_audit(&ledger, 1e-3).is_empty());
        // A genuine post-merge increase on the tracked (0,1) edge is flagged.
        let mut later = merged.clone();
        later.time = 0.10;
        later.agents[1].position = Vec2::new(16.0, 0.0);
        ledger.observe(&later);
        let v = connectivity_audit(&ledger, 1e-3);
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].a, v[0].b), (0, 1));
        assert!((v[0].increase - 1.0).abs() < 1e-12);
    }
}
