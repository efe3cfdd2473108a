//! Lower bounds on the sum of cosines of convex-polygon interior angles:
//! the closed form C_n, the pairwise cosine-sum facts it rests on, the
//! zeroing/averaging descent process with its energy contraction, the three
//! boundary-case values with their breakpoint at n = 7, and an independent
//! grid-search oracle.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Values below this count as zero in the descent process.
pub const ZERO_ANGLE_EPS: f64 = 1e-12;

/// A multiset of candidate interior angles on the constrained simplex
/// {0 <= x_i <= pi, sum x_i = (n-2) pi}.
#[derive(Clone, Debug, PartialEq)]
pub struct AngleConfig {
    angles: Vec<f64>,
}

impl AngleConfig {
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        let n = angles.len();
        if n < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 angles, got {n}")));
        }
        for &a in &angles {
            if !(0.0..=PI + 1e-12).contains(&a) {
                return Err(Error::InvalidInput(format!("angle {a} outside [0, pi]")));
            }
        }
        let sum: f64 = angles.iter().sum();
        let target = (n as f64 - 2.0) * PI;
        if (sum - target).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "angles sum to {sum}, expected (n-2)pi = {target}"
            )));
        }
        Ok(AngleConfig { angles })
    }

    pub fn regular(n: usize) -> Self {
        let a = (n as f64 - 2.0) * PI / n as f64;
        AngleConfig { angles: vec![a; n] }
    }

    pub fn n(&self) -> usize {
        self.angles.len()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn cos_sum(&self) -> f64 {
        self.angles.iter().map(|a| a.cos()).sum()
    }

    fn nonzero_indices(&self) -> Vec<usize> {
        (0..self.angles.len()).filter(|&i| self.angles[i] > ZERO_ANGLE_EPS).collect()
    }
}

/// Closed-form minimum of sum cos(theta_i) over convex n-gons:
/// the one-zero cone value for 2 <= n <= 6, the regular-polygon value for n >= 7.
pub fn theorem1_bound(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("theorem1_bound requires n >= 2, got {n}")));
    }
    let nf = n as f64;
    if n <= 6 {
        Ok(1.0 + (nf - 1.0) * ((nf - 2.0) * PI / (nf - 1.0)).cos())
    } else {
        Ok(nf * ((nf - 2.0) * PI / nf).cos())
    }
}

/// Sharp lower/upper envelopes of cos(a) + cos(b) under a fixed a + b:
/// for a + b <= pi, 1 + cos(a+b) <= cos a + cos b <= 2 cos((a+b)/2),
/// mirrored when a + b >= pi.
pub fn cos_sum_bounds(a: f64, b: f64) -> Result<(f64, f64)> {
    if !(0.0..=PI).contains(&a) || !(0.0..=PI).contains(&b) {
        return Err(Error::InvalidInput(format!("angles ({a}, {b}) outside [0, pi]")));
    }
    let s = a + b;
    let flat = 1.0 + s.cos();
    let peak = 2.0 * (s / 2.0).cos();
    Ok(if s <= PI { (flat, peak) } else { (peak, flat) })
}

#[derive(Clone, Debug, PartialEq)]
pub enum DescentStep {
    /// Pair (i, j) replaced by (0, x_i + x_j).
    Zeroed(usize, usize),
    /// Extreme nonzero pair (i, j) replaced by two copies of their mean.
    Averaged(usize, usize),
    Converged,
}

/// One step of the descent process. Zeroing applies to the lexicographically
/// first nonzero pair with x_i + x_j <= pi; otherwise the (min, max) nonzero
/// pair is averaged. Neither transform increases the cosine sum, and the
/// angle sum is preserved.
pub fn descent_step(config: &AngleConfig) -> (AngleConfig, DescentStep) {
    let nz = config.nonzero_indices();
    let mut angles = config.angles.clone();
    for (a, &i) in nz.iter().enumerate() {
        for &j in &nz[a + 1..] {
            if angles[i] + angles[j] <= PI {
                let s = angles[i] + angles[j];
                angles[i] = 0.0;
                angles[j] = s;
                return (AngleConfig { angles }, DescentStep::Zeroed(i, j));
            }
        }
    }
    if nz.len() < 2 {
        return (config.clone(), DescentStep::Converged);
    }
    let &imin = nz
        .iter()
        .min_by(|&&a, &&b| angles[a].partial_cmp(&angles[b]).unwrap())
        .unwrap();
    let &imax = nz
        .iter()
        .max_by(|&&a, &&b| angles[a].partial_cmp(&angles[b]).unwrap())
        .unwrap();
    if angles[imax] - angles[imin] <= 1e-14 {
        return (config.clone(), DescentStep::Converged);
    }
    let mean = 0.5 * (angles[imin] + angles[imax]);
    angles[imin] = mean;
    angles[imax] = mean;
    (AngleConfig { angles }, DescentStep::Averaged(imin, imax))
}

#[derive(Clone, Debug)]
pub struct DescentRun {
    pub final_config: AngleConfig,
    pub iterations: usize,
    /// Cosine sum after every step, starting with the initial value.
    pub cos_sum_trace: Vec<f64>,
    /// (E_before, E_after, k) for each averaging step, for contraction checks.
    pub energy_trace: Vec<(f64, f64, usize)>,
    pub converged: bool,
}

fn spread_energy(angles: &[f64], nz: &[usize]) -> f64 {
    let k = nz.len() as f64;
    let m = nz.iter().map(|&i| angles[i]).sum::<f64>() / k;
    nz.iter().map(|&i| (angles[i] - m).powi(2)).sum()
}

/// Iterates [`descent_step`] until the nonzero angles agree within `eps` of
/// their common mean (n-2)pi/k or `max_iters` is reached.
pub fn descent_run(config: &AngleConfig, max_iters: usize, eps: f64) -> DescentRun {
    let mut current = config.clone();
    let mut cos_sum_trace = vec![current.cos_sum()];
    let mut energy_trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iters {
        let nz = current.nonzero_indices();
        let k = nz.len();
        if k <= 1 {
            converged = true;
            break;
        }
        // Equal nonzero angles are final only once the zeroing phase is
        // exhausted; equal angles <= pi/2 still admit a zeroing move.
        let zeroable = nz.iter().enumerate().any(|(a, &i)| {
            nz[a + 1..].iter().any(|&j| current.angles[i] + current.angles[j] <= PI)
        });
        let m = nz.iter().map(|&i| current.angles[i]).sum::<f64>() / k as f64;
        if !zeroable && nz.iter().all(|&i| (current.angles[i] - m).abs() <= eps) {
            converged = true;
            break;
        }
        let e_before = spread_energy(&current.angles, &nz);
        let (next, kind) = descent_step(&current);
        match kind {
            DescentStep::Converged => {
                converged = true;
                break;
            }
            DescentStep::Averaged(_, _) => {
                let e_after = spread_energy(&next.angles, &nz);
                energy_trace.push((e_before, e_after, k));
            }
            DescentStep::Zeroed(_, _) => {}
        }
        current = next;
        cos_sum_trace.push(current.cos_sum());
        iterations += 1;
    }
    DescentRun { final_config: current, iterations, cos_sum_trace, energy_trace, converged }
}

/// The three boundary-case values of the constrained minimum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CaseValues {
    /// 2 + (n-2) cos(pi) = -(n-4): two zero angles, the rest at pi.
    pub two_zero: f64,
    /// 1 + (n-1) cos((n-2)pi/(n-1)): one zero angle, the rest equal.
    pub one_zero: f64,
    /// n cos((n-2)pi/n): all angles equal (regular polygon).
    pub no_zero: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArgminCase {
    OneZero,
    NoZero,
    /// one_zero and two_zero coincide (n = 2 and n = 3).
    Tied,
}

impl CaseValues {
    pub fn min(&self) -> f64 {
        self.one_zero.min(self.no_zero)
    }

    pub fn argmin(&self) -> ArgminCase {
        if (self.one_zero - self.two_zero).abs() < 1e-12 && self.one_zero <= self.no_zero {
            ArgminCase::Tied
        } else if self.one_zero <= self.no_zero {
            ArgminCase::OneZero
        } else {
            ArgminCase::NoZero
        }
    }
}

pub fn case_values(n: usize) -> Result<CaseValues> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("case_values requires n >= 2, got {n}")));
    }
    let nf = n as f64;
    Ok(CaseValues {
        two_zero: -(nf - 4.0),
        one_zero: 1.0 + (nf - 1.0) * ((nf - 2.0) * PI / (nf - 1.0)).cos(),
        no_zero: nf * ((nf - 2.0) * PI / nf).cos(),
    })
}

/// Comparator h(n) = n cos(2pi/n) - (n-1) cos(pi/(n-1)) + 1 whose sign flip
/// between n = 6 and n = 7 switches the minimal case.
pub fn case_comparator_h(n: usize) -> f64 {
    let nf = n as f64;
    nf * (2.0 * PI / nf).cos() - (nf - 1.0) * (PI / (nf - 1.0)).cos() + 1.0
}

/// Argmin case per n up to `n_max`, verifying the 6 -> 7 breakpoint.
pub fn breakpoint_scan(n_max: usize) -> Result<Vec<(usize, ArgminCase)>> {
    if n_max < 7 {
        return Err(Error::InvalidInput(format!("breakpoint_scan requires n_max >= 7, got {n_max}")));
    }
    (2..=n_max).map(|n| Ok((n, case_values(n)?.argmin()))).collect()
}

/// Result of the grid-search oracle.
#[derive(Clone, Debug)]
pub struct BruteForceResult {
    pub min_cos_sum: f64,
    pub argmin: AngleConfig,
    /// Set when the requested resolution is too coarse to be authoritative.
    pub resolution_warning: bool,
}

/// Independent minimization of sum cos(x_i) over the angle simplex by exact
/// enumeration on a grid (recursion over coordinates with the running sum as
/// state, memoized), followed by pairwise exchange refinement. Never consults
/// the closed form.
pub fn brute_force_min(n: usize, resolution: f64) -> Result<BruteForceResult> {
    if !(2..=8).contains(&n) {
        return Err(Error::InvalidInput(format!("brute_force_min supports 2 <= n <= 8, got {n}")));
    }
    if !(resolution > 0.0) {
        return Err(Error::InvalidInput("resolution must be positive".into()));
    }
    let resolution_warning = resolution > 0.02;

    let max_units = (PI / resolution).floor() as usize;
    let target: i64 = (((n as f64 - 2.0) * PI) / resolution).round() as i64;

    // min_cost[j][s]: minimum of sum cos over j grid coordinates totalling s
    // units; the last coordinate of any full assignment is forced by the sum
    // constraint, which the recursion handles by exhausting the budget.
    let t = target as usize;
    let mut cost = vec![f64::INFINITY; t + 1];
    let mut choice = vec![vec![0usize; t + 1]; n];
    cost[0] = 0.0;
    for choice_j in choice.iter_mut() {
        let mut next = vec![f64::INFINITY; t + 1];
        for s in 0..=t {
            if cost[s].is_infinite() {
                continue;
            }
            let hi = max_units.min(t - s);
            for x in 0..=hi {
                let c = cost[s] + (x as f64 * resolution).cos();
                if c < next[s + x] {
                    next[s + x] = c;
                    choice_j[s + x] = x;
                }
            }
        }
        cost = next;
    }
    if cost[t].is_infinite() {
        return Err(Error::InvalidInput("grid cannot meet the angle-sum constraint".into()));
    }
    let mut units = Vec::with_capacity(n);
    let mut s = t;
    for j in (0..n).rev() {
        let x = choice[j][s];
        units.push(x);
        s -= x;
    }
    let mut angles: Vec<f64> = units.iter().map(|&u| u as f64 * resolution).collect();

    // Rescale onto the exact simplex (grid rounding leaves an O(resolution)
    // defect in the sum), then polish with sum-preserving exchange moves.
    let target_sum = (n as f64 - 2.0) * PI;
    redistribute_sum(&mut angles, target_sum);
    refine(&mut angles, resolution);

    let argmin = AngleConfig { angles };
    Ok(BruteForceResult { min_cos_sum: argmin.cos_sum(), argmin, resolution_warning })
}

fn redistribute_sum(angles: &mut [f64], target: f64) {
    let mut defect = target - angles.iter().sum::<f64>();
    for a in angles.iter_mut() {
        if defect == 0.0 {
            break;
        }
        let new = (*a + defect).clamp(0.0, PI);
        defect -= new - *a;
        *a = new;
    }
}

/// 200 rounds of two-coordinate exchange moves (x_i + d, x_j - d) with the
/// step halving whenever a full round fails to improve.
fn refine(angles: &mut [f64], resolution: f64) {
    let n = angles.len();
    let mut delta = resolution;
    for _ in 0..200 {
        let mut improved = false;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let (xi, xj) = (angles[i], angles[j]);
                let (yi, yj) = ((xi + delta).min(PI), xj - ((xi + delta).min(PI) - xi));
                if (0.0..=PI).contains(&yj) && yi.cos() + yj.cos() < xi.cos() + xj.cos() {
                    angles[i] = yi;
                    angles[j] = yj;
                    improved = true;
                }
            }
        }
        if !improved {
            delta *= 0.5;
            if delta < 1e-12 {
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_config(rng: &mut ChaCha8Rng, n: usize) -> AngleConfig {
        // Rejection-free: draw from a Dirichlet-like split of (n-2)pi and
        // clamp-redistribute into [0, pi].
        loop {
            let mut cuts: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0f64)).collect();
            let total: f64 = cuts.iter().sum();
            let target = (n as f64 - 2.0) * PI;
            for c in cuts.iter_mut() {
                *c = *c / total * target;
            }
            // Push any excess above pi onto angles with room.
            for _ in 0..64 {
                let mut excess = 0.0;
                for c in cuts.iter_mut() {
                    if *c > PI {
                        excess += *c - PI;
                        *c = PI;
                    }
                }
                if excess <= 1e-12 {
                    break;
                }
                let room: Vec<usize> = (0..n).filter(|&i| cuts[i] < PI - 1e-12).collect();
                let share = excess / room.len() as f64;
                for &i in &room {
                    cuts[i] = (cuts[i] + share).min(PI);
                }
            }
            if let Ok(cfg) = AngleConfig::new(cuts) {
                return cfg;
            }
        }
    }

    #[test]
    fn theorem1_reference_values() {
        assert!((theorem1_bound(3).unwrap() - 1.0).abs() < 1e-12);
        assert!((theorem1_bound(4).unwrap() + 0.5).abs() < 1e-12);
        assert!((theorem1_bound(7).unwrap() - 7.0 * (5.0 * PI / 7.0).cos()).abs() < 1e-12);
        assert!((theorem1_bound(7).unwrap() + 4.36).abs() < 0.005);
        assert!((theorem1_bound(10).unwrap() + 8.09).abs() < 0.005);
        assert!((theorem1_bound(30).unwrap() + 29.34).abs() < 0.005);
    }

    #[test]
    fn theorem1_equals_case_min() {
        for n in 2..=64 {
            let cv = case_values(n).unwrap();
            assert!((theorem1_bound(n).unwrap() - cv.min()).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn two_zero_never_beats_one_zero() {
        for n in 2..=64 {
            let cv = case_values(n).unwrap();
            assert!(cv.two_zero >= cv.one_zero - 1e-12, "n={n}");
        }
    }

    #[test]
    fn case_values_examples() {
        let c4 = case_values(4).unwrap();
        assert!((c4.two_zero - 0.0).abs() < 1e-12);
        assert!((c4.one_zero + 0.5).abs() < 1e-12);
        assert!(c4.no_zero.abs() < 1e-12);
        assert_eq!(c4.argmin(), ArgminCase::OneZero);

        let c3 = case_values(3).unwrap();
        assert!((c3.two_zero - 1.0).abs() < 1e-12);
        assert!((c3.one_zero - 1.0).abs() < 1e-12);
        assert!((c3.no_zero - 1.5).abs() < 1e-12);
        assert_eq!(c3.argmin(), ArgminCase::Tied);

        assert_eq!(case_values(7).unwrap().argmin(), ArgminCase::NoZero);
    }

    #[test]
    fn breakpoint_between_6_and_7() {
        let scan = breakpoint_scan(20).unwrap();
        for &(n, case) in &scan {
            if n <= 6 {
                assert_ne!(case, ArgminCase::NoZero, "n={n}");
            } else {
                assert_eq!(case, ArgminCase::NoZero, "n={n}");
            }
        }
        assert!(case_comparator_h(6) <= 0.0);
        assert!(case_comparator_h(7) > 0.0);
    }

    #[test]
    fn regular_polygon_strictly_above_bound_for_small_n() {
        for n in 3..=6 {
            let reg = AngleConfig::regular(n).cos_sum();
            assert!(reg > theorem1_bound(n).unwrap() + 1e-9, "n={n}");
        }
        for n in 7..=20 {
            let reg = AngleConfig::regular(n).cos_sum();
            assert!((reg - theorem1_bound(n).unwrap()).abs() < 1e-9, "n={n}");
        }
    }

    #[test]
    fn cos_sum_bounds_examples() {
        let (lo, _) = cos_sum_bounds(0.0, 0.0).unwrap();
        assert!((lo - 2.0).abs() < 1e-12);
        let (lo, _) = cos_sum_bounds(PI / 2.0, PI / 2.0).unwrap();
        assert!(lo.abs() < 1e-12);
        let (lo, _) = cos_sum_bounds(PI / 3.0, PI / 2.0).unwrap();
        assert!((lo - (1.0 + (5.0 * PI / 6.0).cos())).abs() < 1e-12);
        assert!(lo <= 0.5 + 1e-12);
        assert!(cos_sum_bounds(-0.1, 0.0).is_err());
    }

    #[test]
    fn cos_sum_bounds_random_sandwich() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5000 {
            let a = rng.random_range(0.0..PI);
            let b = rng.random_range(0.0..PI);
            let (lo, hi) = cos_sum_bounds(a, b).unwrap();
            let s = a.cos() + b.cos();
            assert!(lo <= s + 1e-12, "a={a} b={b}");
            assert!(s <= hi + 1e-12, "a={a} b={b}");
        }
    }

    #[test]
    fn descent_square_reaches_zero_pi_pair() {
        // The square is a fixed point of the averaging phase only after the
        // zeroing phase flattens it to {0, 0, pi, pi}; the process is a
        // descent, not a global minimizer from every start.
        let sq = AngleConfig::new(vec![PI / 2.0; 4]).unwrap();
        let run = descent_run(&sq, 100, 1e-10);
        assert!(run.converged);
        let mut a = run.final_config.angles().to_vec();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert!(a[0].abs() < 1e-12 && a[1].abs() < 1e-12);
        assert!((a[2] - PI).abs() < 1e-12 && (a[3] - PI).abs() < 1e-12);
        assert!(run.final_config.cos_sum().abs() < 1e-12);
        assert!(run.final_config.cos_sum() > theorem1_bound(4).unwrap());
    }

    #[test]
    fn descent_all_equal_converges_immediately() {
        let cfg = AngleConfig::regular(5);
        let (out, kind) = descent_step(&cfg);
        assert_eq!(kind, DescentStep::Converged);
        assert_eq!(out, cfg);
        assert_eq!(descent_run(&cfg, 100, 1e-10).iterations, 0);
    }

    #[test]
    fn descent_zeroing_is_deterministic() {
        let cfg = AngleConfig::new(vec![PI / 4.0, 3.0 * PI / 4.0, PI / 2.0, PI / 2.0]).unwrap();
        let (out, kind) = descent_step(&cfg);
        // First qualifying pair under lexicographic scan is (0, 1).
        assert_eq!(kind, DescentStep::Zeroed(0, 1));
        assert_eq!(out.angles()[0], 0.0);
        assert!((out.angles()[1] - PI).abs() < 1e-12);
    }

    #[test]
    fn descent_preserves_sum_and_never_increases_cos() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in 3..=8 {
            for _ in 0..50 {
                let cfg = random_config(&mut rng, n);
                let run = descent_run(&cfg, 10_000, 1e-10);
                assert!(run.converged, "n={n}");
                let sum: f64 = run.final_config.angles().iter().sum();
                assert!((sum - (n as f64 - 2.0) * PI).abs() < 1e-9);
                for w in run.cos_sum_trace.windows(2) {
                    assert!(w[1] <= w[0] + 1e-12, "cos sum increased: {w:?}");
                }
                for &(before, after, k) in &run.energy_trace {
                    assert!(
                        after <= (1.0 - 1.0 / (2.0 * k as f64)) * before + 1e-12,
                        "contraction violated: {before} -> {after} (k={k})"
                    );
                }
            }
        }
    }

    #[test]
    fn descent_final_respects_theorem_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let cfg = random_config(&mut rng, 5);
            let run = descent_run(&cfg, 10_000, 1e-10);
            assert!(run.final_config.cos_sum() >= theorem1_bound(5).unwrap() - 1e-9);
        }
    }

    #[test]
    fn random_configs_respect_theorem_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 3..=10 {
            let bound = theorem1_bound(n).unwrap();
            for _ in 0..1000 {
                let cfg = random_config(&mut rng, n);
                assert!(cfg.cos_sum() >= bound - 1e-9, "n={n} cfg={cfg:?}");
            }
        }
    }

    #[test]
    fn oracle_matches_closed_form_small() {
        // Coarser resolution than the acceptance run keeps unit tests quick.
        for n in [3usize, 4, 5] {
            let r = brute_force_min(n, 0.02).unwrap();
            assert!(!r.resolution_warning);
            let c = theorem1_bound(n).unwrap();
            assert!(r.min_cos_sum >= c - 1e-9, "n={n}: {} < {c}", r.min_cos_sum);
            assert!(r.min_cos_sum <= c + 5.0 * 0.02, "n={n}: {} vs {c}", r.min_cos_sum);
        }
    }

    #[test]
    fn oracle_warns_on_coarse_resolution() {
        assert!(brute_force_min(4, 0.5).unwrap().resolution_warning);
    }

    #[test]
    fn angle_config_validation() {
        assert!(AngleConfig::new(vec![PI]).is_err());
        assert!(AngleConfig::new(vec![4.0, PI, PI, PI]).is_err());
        assert!(AngleConfig::new(vec![PI / 2.0; 4]).is_ok());
        assert!(AngleConfig::new(vec![1.0, 1.0, 1.0]).is_err()); // wrong sum
    }
}
