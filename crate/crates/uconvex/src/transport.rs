//! Exact p-Wasserstein and bottleneck distances between finitely supported
//! probability measures.
//!
//! `w_p(μ,ν) = (inf_π ∫ d(x,y)^p dπ)^(1/p)` over couplings π with marginals
//! μ and ν. Weights are scaled to a common integer denominator and the
//! resulting transportation problem is solved exactly by successive
//! shortest paths with potentials, so optima are vertices of the coupling
//! polytope. `w_∞` is the bottleneck version `inf_π ess-sup d`, computed by
//! binary search over the sorted pairwise distances with a max-flow
//! feasibility test at each threshold.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::convexity::CheckReport;
use crate::error::{Error, Result};
use crate::spaces::{Point, Space};

/// Exact-solver scale limit on support sizes.
pub const MAX_SUPPORT: usize = 64;

/// Largest common denominator attempted for exact weight rationalization.
const MAX_DENOM: i64 = 1_000_000;

/// Fallback denominator (divisible by every integer up to 16) used with
/// largest-remainder rounding when weights are not recognizably rational.
const FALLBACK_DENOM: i64 = 720_720;

/// Finitely supported probability measure. Weights are positive and sum to
/// one within 1e-12; zero weights are rejected rather than stored.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    support: Vec<Point>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(support: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "support/weight lengths {} vs {}",
                support.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::InvalidMeasure("weights must be positive and finite".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMeasure(format!("weights sum to {sum}, expected 1")));
        }
        Ok(DiscreteMeasure { support, weights })
    }

    pub fn uniform(support: Vec<Point>) -> Result<Self> {
        let n = support.len();
        if n == 0 {
            return Err(Error::InvalidMeasure("empty support".into()));
        }
        let mut w = vec![1.0 / n as f64; n];
        // 1/n does not always sum to exactly 1 in floats; patch the last entry
        let head: f64 = w.iter().take(n - 1).sum();
        w[n - 1] = 1.0 - head;
        DiscreteMeasure::new(support, w)
    }

    pub fn dirac(point: Point) -> Self {
        DiscreteMeasure { support: vec![point], weights: vec![1.0] }
    }

    pub fn support(&self) -> &[Point] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn validate_in(&self, space: &Space) -> Result<()> {
        for p in &self.support {
            space.validate_point(p)?;
        }
        Ok(())
    }
}

impl Serialize for DiscreteMeasure {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = ser.serialize_struct("DiscreteMeasure", 2)?;
        s.serialize_field("points", &self.support)?;
        s.serialize_field("weights", &self.weights)?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for DiscreteMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            points: Vec<Point>,
            weights: Vec<f64>,
        }
        let raw = Raw::deserialize(de)?;
        DiscreteMeasure::new(raw.points, raw.weights).map_err(serde::de::Error::custom)
    }
}

/// Coupling of two discrete measures: joint weights over the support grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CouplingPlan {
    /// `matrix[i][j]` is the mass sent from `mu.support[i]` to
    /// `nu.support[j]`; rows sum to the mu weights, columns to the nu
    /// weights, within 1e-9.
    pub matrix: Vec<Vec<f64>>,
    /// Transport cost `Σ matrix[i][j] · d(x_i, y_j)^p`.
    pub cost: f64,
    /// Worst absolute error of the integer weight scaling.
    pub rounding: f64,
}

impl CouplingPlan {
    pub fn marginal_error(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, w) in mu.weights().iter().enumerate() {
            let row: f64 = self.matrix[i].iter().sum();
            worst = worst.max((row - w).abs());
        }
        for (j, w) in nu.weights().iter().enumerate() {
            let col: f64 = self.matrix.iter().map(|r| r[j]).sum();
            worst = worst.max((col - w).abs());
        }
        worst
    }
}

/// Scale both weight vectors to a common integer denominator.
///
/// Small exact denominators are recovered per weight (up to 1000) and
/// combined by lcm; if that fails or exceeds the cap, the fallback
/// denominator with largest-remainder rounding is used. Returns
/// `(denominator, units_mu, units_nu, worst_rounding_error)`.
fn rationalize(mu: &[f64], nu: &[f64]) -> (i64, Vec<i64>, Vec<i64>, f64) {
    let small_denom = |w: f64| -> Option<i64> {
        (1..=1000i64).find(|&b| {
            let scaled = w * b as f64;
            (scaled - scaled.round()).abs() <= 1e-9 && scaled.round() >= 1.0
        })
    };
    let gcd = |mut a: i64, mut b: i64| {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    };
    let mut denom: i64 = 1;
    let mut exact = true;
    for &w in mu.iter().chain(nu) {
        match small_denom(w) {
            Some(b) => {
                denom = denom / gcd(denom, b) * b;
                if denom > MAX_DENOM {
                    exact = false;
                    break;
                }
            }
            None => {
                exact = false;
                break;
            }
        }
    }
    let d = if exact { denom } else { FALLBACK_DENOM };
    let to_units = |ws: &[f64]| -> (Vec<i64>, f64) {
        let mut units: Vec<i64> = ws.iter().map(|w| (w * d as f64).round() as i64).collect();
        // largest-remainder fix so the units sum to exactly d
        let mut gap = d - units.iter().sum::<i64>();
        let mut order: Vec<usize> = (0..ws.len()).collect();
        order.sort_by(|&i, &j| {
            let ri = ws[i] * d as f64 - units[i] as f64;
            let rj = ws[j] * d as f64 - units[j] as f64;
            rj.partial_cmp(&ri).unwrap()
        });
        let mut k = 0;
        while gap != 0 {
            let i = order[k % order.len()];
            units[i] += gap.signum();
            gap -= gap.signum();
            k += 1;
        }
        let err = ws
            .iter()
            .zip(&units)
            .map(|(w, &u)| (w - u as f64 / d as f64).abs())
            .fold(0.0, f64::max);
        (units, err)
    };
    let (u, eu) = to_units(mu);
    let (v, ev) = to_units(nu);
    (d, u, v, eu.max(ev))
}

/// Exact p-Wasserstein distance and an optimal coupling, `p ∈ [1, ∞)`.
pub fn wasserstein_p(
    space: &Space,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    p: f64,
) -> Result<(f64, CouplingPlan)> {
    if !p.is_finite() || p < 1.0 {
        return Err(Error::InvalidParameter(format!("w_p needs finite p >= 1, got {p}")));
    }
    check_solver_scale(mu, nu)?;
    mu.validate_in(space)?;
    nu.validate_in(space)?;
    let dist = distance_matrix(space, mu, nu);
    let dmax = dist.iter().flatten().cloned().fold(0.0, f64::max);
    if dmax == 0.0 {
        // all mass already coincides; ship the product coupling
        let matrix: Vec<Vec<f64>> = mu
            .weights()
            .iter()
            .map(|wi| nu.weights().iter().map(|wj| wi * wj).collect())
            .collect();
        return Ok((0.0, CouplingPlan { matrix, cost: 0.0, rounding: 0.0 }));
    }
    // costs normalized by dmax so large exponents stay in range
    let cost: Vec<Vec<f64>> = dist
        .iter()
        .map(|row| row.iter().map(|d| (d / dmax).powf(p)).collect())
        .collect();
    let (denom, u, v, rounding) = rationalize(mu.weights(), nu.weights());
    let flow = min_cost_transport(&cost, &u, &v, denom);
    let matrix: Vec<Vec<f64>> = flow
        .iter()
        .map(|row| row.iter().map(|&f| f as f64 / denom as f64).collect())
        .collect();
    let norm_cost: f64 = matrix
        .iter()
        .zip(&cost)
        .map(|(mr, cr)| mr.iter().zip(cr).map(|(m, c)| m * c).sum::<f64>())
        .sum();
    let value = dmax * norm_cost.powf(1.0 / p);
    let true_cost: f64 = matrix
        .iter()
        .zip(&dist)
        .map(|(mr, dr)| mr.iter().zip(dr).map(|(m, d)| m * d.powf(p)).sum::<f64>())
        .sum();
    Ok((value, CouplingPlan { matrix, cost: true_cost, rounding }))
}

/// Bottleneck distance `w_∞(μ,ν) = inf_π max{ d(x,y) | π(x,y) > 0 }`.
pub fn wasserstein_inf(space: &Space, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    check_solver_scale(mu, nu)?;
    mu.validate_in(space)?;
    nu.validate_in(space)?;
    let dist = distance_matrix(space, mu, nu);
    let mut thresholds: Vec<f64> = dist.iter().flatten().cloned().collect();
    thresholds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    thresholds.dedup();
    let (denom, u, v, _) = rationalize(mu.weights(), nu.weights());
    let feasible = |t: f64| -> bool {
        let allowed: Vec<Vec<bool>> =
            dist.iter().map(|row| row.iter().map(|&d| d <= t).collect()).collect();
        max_flow_saturates(&allowed, &u, &v, denom)
    };
    let mut lo = 0usize;
    let mut hi = thresholds.len() - 1;
    if feasible(thresholds[lo]) {
        return Ok(thresholds[lo]);
    }
    // invariant: infeasible at lo, feasible at hi (every pair allowed)
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if feasible(thresholds[mid]) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(thresholds[hi])
}

/// Verify `p ↦ w_p` is nondecreasing on `p_list` and that `w_64` lands
/// within 2% of `w_∞`.
pub fn wasserstein_monotone_check(
    space: &Space,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    p_list: &[f64],
    tol: f64,
) -> Result<CheckReport> {
    if p_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("p_list must be strictly increasing".into()));
    }
    let mut values = Vec::with_capacity(p_list.len());
    for &p in p_list {
        values.push(wasserstein_p(space, mu, nu, p)?.0);
    }
    let w64 = wasserstein_p(space, mu, nu, 64.0)?.0;
    let winf = wasserstein_inf(space, mu, nu)?;
    let mut violations = 0u64;
    let mut worst = f64::NEG_INFINITY;
    for w in values.windows(2) {
        let gap = w[0] - w[1];
        worst = worst.max(gap);
        if gap > tol {
            violations += 1;
        }
    }
    let inf_gap = (w64 - winf).abs() - (0.02 * winf + tol);
    worst = worst.max(inf_gap);
    if inf_gap > 0.0 {
        violations += 1;
    }
    Ok(CheckReport {
        property: "wasserstein-monotone".to_string(),
        p: None,
        samples: (p_list.len() + 2) as u64,
        violations,
        worst,
        witness: json!({"p_list": p_list, "values": values, "w64": w64, "winf": winf}),
    })
}

fn check_solver_scale(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<()> {
    if mu.len() > MAX_SUPPORT || nu.len() > MAX_SUPPORT {
        return Err(Error::InvalidMeasure(format!(
            "exact solver handles supports up to {MAX_SUPPORT}, got {} and {}",
            mu.len(),
            nu.len()
        )));
    }
    Ok(())
}

fn distance_matrix(space: &Space, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Vec<Vec<f64>> {
    mu.support()
        .iter()
        .map(|x| nu.support().iter().map(|y| space.distance_unchecked(x, y)).collect())
        .collect()
}

#[derive(Clone)]
struct FlowEdge {
    to: usize,
    cap: i64,
    cost: f64,
}

/// Successive-shortest-path min-cost flow specialized to the bipartite
/// transportation problem: sources with supplies `u`, sinks with demands
/// `v`, unit costs `cost[i][j]`, total flow `denom`. Returns the flow
/// matrix in units.
fn min_cost_transport(cost: &[Vec<f64>], u: &[i64], v: &[i64], denom: i64) -> Vec<Vec<i64>> {
    let n = u.len();
    let m = v.len();
    let nodes = n + m + 2;
    let source = n + m;
    let sink = n + m + 1;

    let mut edges: Vec<FlowEdge> = Vec::new();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    let mut add = |edges: &mut Vec<FlowEdge>, adj: &mut Vec<Vec<usize>>, a: usize, b: usize, cap: i64, cost: f64| {
        adj[a].push(edges.len());
        edges.push(FlowEdge { to: b, cap, cost });
        adj[b].push(edges.len());
        edges.push(FlowEdge { to: a, cap: 0, cost: -cost });
    };
    for (i, &ui) in u.iter().enumerate() {
        add(&mut edges, &mut adj, source, i, ui, 0.0);
    }
    for (j, &vj) in v.iter().enumerate() {
        add(&mut edges, &mut adj, n + j, sink, vj, 0.0);
    }
    for (i, row) in cost.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            add(&mut edges, &mut adj, i, n + j, denom, c);
        }
    }

    let mut potential = vec![0.0f64; nodes];
    let mut shipped = 0i64;
    while shipped < denom {
        // dense Dijkstra with reduced costs
        let mut dist = vec![f64::INFINITY; nodes];
        let mut prev_edge = vec![usize::MAX; nodes];
        let mut done = vec![false; nodes];
        dist[source] = 0.0;
        loop {
            let mut best = usize::MAX;
            let mut best_d = f64::INFINITY;
            for i in 0..nodes {
                if !done[i] && dist[i] < best_d {
                    best = i;
                    best_d = dist[i];
                }
            }
            if best == usize::MAX {
                break;
            }
            done[best] = true;
            for &eid in &adj[best] {
                let e = &edges[eid];
                if e.cap > 0 {
                    let rc = (e.cost + potential[best] - potential[e.to]).max(0.0);
                    if dist[best] + rc < dist[e.to] {
                        dist[e.to] = dist[best] + rc;
                        prev_edge[e.to] = eid;
                    }
                }
            }
        }
        if dist[sink].is_infinite() {
            break;
        }
        for i in 0..nodes {
            if dist[i].is_finite() {
                potential[i] += dist[i];
            }
        }
        // bottleneck along the shortest path, then augment
        let mut push = denom - shipped;
        let mut node = sink;
        while node != source {
            let eid = prev_edge[node];
            push = push.min(edges[eid].cap);
            node = edges[eid ^ 1].to;
        }
        let mut node = sink;
        while node != source {
            let eid = prev_edge[node];
            edges[eid].cap -= push;
            edges[eid ^ 1].cap += push;
            node = edges[eid ^ 1].to;
        }
        shipped += push;
    }

    // flow on i -> j arcs lives in the reverse capacities
    let mut flow = vec![vec![0i64; m]; n];
    for (i, frow) in flow.iter_mut().enumerate() {
        for &eid in &adj[i] {
            if eid % 2 == 0 {
                let to = edges[eid].to;
                if (n..n + m).contains(&to) {
                    frow[to - n] = edges[eid ^ 1].cap;
                }
            }
        }
    }
    flow
}

/// Edmonds-Karp feasibility test: can the whole supply be routed through
/// the allowed cells?
fn max_flow_saturates(allowed: &[Vec<bool>], u: &[i64], v: &[i64], denom: i64) -> bool {
    let n = u.len();
    let m = v.len();
    let nodes = n + m + 2;
    let source = n + m;
    let sink = n + m + 1;
    let mut cap = vec![vec![0i64; nodes]; nodes];
    for (i, &ui) in u.iter().enumerate() {
        cap[source][i] = ui;
    }
    for (j, &vj) in v.iter().enumerate() {
        cap[n + j][sink] = vj;
    }
    for (i, row) in allowed.iter().enumerate() {
        for (j, &ok) in row.iter().enumerate() {
            if ok {
                cap[i][n + j] = denom;
            }
        }
    }
    let mut total = 0i64;
    loop {
        let mut parent = vec![usize::MAX; nodes];
        parent[source] = source;
        let mut queue = std::collections::VecDeque::from([source]);
        while let Some(x) = queue.pop_front() {
            for y in 0..nodes {
                if parent[y] == usize::MAX && cap[x][y] > 0 {
                    parent[y] = x;
                    queue.push_back(y);
                }
            }
        }
        if parent[sink] == usize::MAX {
            break;
        }
        let mut push = i64::MAX;
        let mut node = sink;
        while node != source {
            push = push.min(cap[parent[node]][node]);
            node = parent[node];
        }
        let mut node = sink;
        while node != source {
            cap[parent[node]][node] -= push;
            cap[node][parent[node]] += push;
            node = parent[node];
        }
        total += push;
    }
    total == denom
}
