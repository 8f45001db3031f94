//! Exact h-FSTSP solvers over a fixed Hamiltonian cycle.
//!
//! Both solvers build a DAG over cycle positions `0..=n+1` in which every arc
//! `(i, k)` stands for one operation launched at position `i` and ending at
//! position `k`, optionally flying the drone to a position `j` in between.
//! The cheapest `0 -> n+1` path in that DAG is an optimal solution that
//! respects the cycle.
//!
//! * [`split_algorithm`] evaluates every triple `i < j < k` and keeps the best
//!   drone choice per `(i, k)`: `C(n+2, 3)` evaluations, always.
//! * [`split_lazy`] walks launch and rendezvous positions outwards from each
//!   drone position and stops as soon as the drone is fast (it does not make
//!   the truck wait). Every triple it skips is dominated by a fast triple it
//!   evaluated, so the optimum is unchanged.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{approx_ge, CostModel, Cycle, ModelError, Operation, Solution, Sortie};

#[derive(Debug, Error)]
pub enum SplitError {
    #[error("cycle covers {cycle} customers but the cost model has {model}")]
    SizeMismatch { cycle: usize, model: usize },
    #[error("arc path is not contiguous from position 0 to {end}: {detail}")]
    NonContiguous { end: usize, detail: String },
    #[error("position {0} is unreachable from the depot")]
    Unreachable(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

const NO_DRONE: usize = usize::MAX;

/// One operation arc between cycle positions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpArc {
    pub from: usize,
    pub to: usize,
    /// Drone position strictly between `from` and `to`, if any.
    pub drone: Option<usize>,
    pub cost: f64,
}

/// Graph representation used by the lazy solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Repr {
    /// Dense `(n+2) x (n+2)` cost and drone tables, updated in place.
    Matrix,
    /// Per-source arc lists; parallel arcs are kept and the shortest path
    /// picks the cheapest.
    Lists,
}

/// Dense arc table; absent arcs have infinite cost.
#[derive(Debug, Clone)]
pub struct MatrixGraph {
    size: usize,
    cost: Vec<f64>,
    drone: Vec<usize>,
}

impl MatrixGraph {
    fn new(size: usize) -> Self {
        Self {
            size,
            cost: vec![f64::INFINITY; size * size],
            drone: vec![NO_DRONE; size * size],
        }
    }

    #[inline]
    fn set(&mut self, i: usize, k: usize, j: usize, cost: f64) {
        let idx = i * self.size + k;
        self.cost[idx] = cost;
        self.drone[idx] = j;
    }

    /// Writes the arc if it is absent or currently more expensive.
    #[inline]
    fn offer(&mut self, i: usize, k: usize, j: usize, cost: f64) -> bool {
        let idx = i * self.size + k;
        if self.cost[idx] > cost {
            self.cost[idx] = cost;
            self.drone[idx] = j;
            true
        } else {
            false
        }
    }

    pub fn arc(&self, i: usize, k: usize) -> Option<OpArc> {
        let idx = i * self.size + k;
        let cost = self.cost[idx];
        cost.is_finite().then(|| OpArc {
            from: i,
            to: k,
            drone: (self.drone[idx] != NO_DRONE).then_some(self.drone[idx]),
            cost,
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct ListArc {
    to: usize,
    drone: usize,
    cost: f64,
}

/// Per-source multigraph.
#[derive(Debug, Clone)]
pub struct ListGraph {
    out: Vec<Vec<ListArc>>,
}

impl ListGraph {
    fn new(size: usize) -> Self {
        Self {
            out: vec![Vec::new(); size],
        }
    }

    #[inline]
    fn push(&mut self, i: usize, k: usize, j: usize, cost: f64) {
        self.out[i].push(ListArc { to: k, drone: j, cost });
    }
}

/// Operation DAG over cycle positions.
#[derive(Debug, Clone)]
pub enum OpGraph {
    Matrix(MatrixGraph),
    Lists(ListGraph),
}

impl OpGraph {
    /// Number of positions, `n + 2`.
    pub fn n_positions(&self) -> usize {
        match self {
            OpGraph::Matrix(m) => m.size,
            OpGraph::Lists(l) => l.out.len(),
        }
    }

    /// Every arc, grouped by source position in discovery order.
    pub fn arcs(&self) -> Vec<OpArc> {
        let mut arcs = Vec::new();
        match self {
            OpGraph::Matrix(m) => {
                for i in 0..m.size {
                    arcs.extend((i + 1..m.size).filter_map(|k| m.arc(i, k)));
                }
            }
            OpGraph::Lists(l) => {
                for (i, out) in l.out.iter().enumerate() {
                    arcs.extend(out.iter().map(|a| OpArc {
                        from: i,
                        to: a.to,
                        drone: (a.drone != NO_DRONE).then_some(a.drone),
                        cost: a.cost,
                    }));
                }
            }
        }
        arcs
    }

    /// Cheapest arc `i -> k`, first discovered on ties.
    pub fn best_arc(&self, i: usize, k: usize) -> Option<OpArc> {
        match self {
            OpGraph::Matrix(m) => m.arc(i, k),
            OpGraph::Lists(l) => l.out[i]
                .iter()
                .filter(|a| a.to == k)
                .fold(None::<ListArc>, |best, a| match best {
                    Some(b) if b.cost <= a.cost => Some(b),
                    _ => Some(*a),
                })
                .map(|a| OpArc {
                    from: i,
                    to: k,
                    drone: (a.drone != NO_DRONE).then_some(a.drone),
                    cost: a.cost,
                }),
        }
    }
}

/// Single forward pass in position order (every arc increases position, so
/// that order is topological). A later arc replaces the current predecessor
/// only when strictly cheaper.
pub fn shortest_path(g: &OpGraph) -> Result<Vec<OpArc>, SplitError> {
    let size = g.n_positions();
    let mut dist = vec![f64::INFINITY; size];
    let mut pred: Vec<Option<OpArc>> = vec![None; size];
    dist[0] = 0.0;

    let mut relax = |dist: &mut [f64], arc: OpArc| {
        let nd = dist[arc.from] + arc.cost;
        if nd < dist[arc.to] {
            dist[arc.to] = nd;
            pred[arc.to] = Some(arc);
        }
    };

    match g {
        OpGraph::Matrix(m) => {
            for i in 0..size - 1 {
                if dist[i].is_infinite() {
                    continue;
                }
                let row = i * size;
                for k in i + 1..size {
                    let cost = m.cost[row + k];
                    if cost.is_finite() {
                        let j = m.drone[row + k];
                        relax(
                            &mut dist,
                            OpArc {
                                from: i,
                                to: k,
                                drone: (j != NO_DRONE).then_some(j),
                                cost,
                            },
                        );
                    }
                }
            }
        }
        OpGraph::Lists(l) => {
            for i in 0..size - 1 {
                if dist[i].is_infinite() {
                    continue;
                }
                for a in &l.out[i] {
                    relax(
                        &mut dist,
                        OpArc {
                            from: i,
                            to: a.to,
                            drone: (a.drone != NO_DRONE).then_some(a.drone),
                            cost: a.cost,
                        },
                    );
                }
            }
        }
    }

    let mut path = Vec::new();
    let mut at = size - 1;
    while at != 0 {
        let arc = pred[at].ok_or(SplitError::Unreachable(at))?;
        path.push(arc);
        at = arc.from;
    }
    path.reverse();
    Ok(path)
}

/// Turns a contiguous `0 -> n+1` arc path into a solution whose recorded
/// total is the sum of the arc costs.
pub fn reconstruct(path: &[OpArc], h: &Cycle) -> Result<Solution, SplitError> {
    let end = h.n() + 1;
    let mut at = 0;
    let mut ops = Vec::with_capacity(path.len());
    let mut total = 0.0;
    for arc in path {
        if arc.from != at || arc.to <= arc.from || arc.to > end {
            return Err(SplitError::NonContiguous {
                end,
                detail: format!("arc {} -> {} after reaching {at}", arc.from, arc.to),
            });
        }
        let (truck, sortie) = match arc.drone {
            Some(j) if arc.from < j && j < arc.to => {
                let truck = (arc.from..=arc.to)
                    .filter(|&p| p != j)
                    .map(|p| h.node(p))
                    .collect();
                let sortie = Sortie {
                    launch: h.node(arc.from),
                    customer: h.node(j),
                    rendezvous: h.node(arc.to),
                };
                (truck, Some(sortie))
            }
            Some(j) => {
                return Err(SplitError::Model(ModelError::Contract(format!(
                    "drone position {j} outside arc {} -> {}",
                    arc.from, arc.to
                ))))
            }
            None => ((arc.from..=arc.to).map(|p| h.node(p)).collect(), None),
        };
        ops.push(Operation::new(truck, sortie)?);
        total += arc.cost;
        at = arc.to;
    }
    if at != end {
        return Err(SplitError::NonContiguous {
            end,
            detail: format!("path stops at {at}"),
        });
    }
    Ok(Solution::new(ops, total))
}

/// Work counters and timing of one solver run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStats {
    pub solver_name: String,
    /// Triples whose drone and truck costs were evaluated.
    pub triples_considered: u64,
    /// Arc insertions and in-place updates, backbone included.
    pub arcs_written: u64,
    /// Graph construction, shortest path and reconstruction.
    pub wall_time_ns: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildCounters {
    pub triples_considered: u64,
    pub arcs_written: u64,
}

/// Receives every triple the lazy solver evaluates.
pub trait TripleObserver {
    fn observe(&mut self, i: usize, j: usize, k: usize, fast: bool);
}

impl TripleObserver for () {
    #[inline(always)]
    fn observe(&mut self, _: usize, _: usize, _: usize, _: bool) {}
}

/// Records evaluated triples as `(i, j, k, fast)`.
#[derive(Debug, Clone, Default)]
pub struct TripleLog {
    pub entries: Vec<(usize, usize, usize, bool)>,
}

impl TripleObserver for TripleLog {
    fn observe(&mut self, i: usize, j: usize, k: usize, fast: bool) {
        self.entries.push((i, j, k, fast));
    }
}

/// Cost tables re-indexed by cycle position.
struct PositionCosts<'a> {
    rows: Vec<usize>,
    stride: usize,
    truck: &'a [f64],
    drone: &'a [f64],
}

impl<'a> PositionCosts<'a> {
    fn new(h: &Cycle, cm: &'a CostModel) -> Result<Self, SplitError> {
        if h.n() != cm.n() {
            return Err(SplitError::SizeMismatch {
                cycle: h.n(),
                model: cm.n(),
            });
        }
        Ok(Self {
            rows: h.order().iter().map(|&v| cm.row(v)).collect(),
            stride: cm.n() + 1,
            truck: cm.truck_table(),
            drone: cm.drone_table(),
        })
    }

    #[inline(always)]
    fn truck(&self, p: usize, q: usize) -> f64 {
        self.truck[self.rows[p] * self.stride + self.rows[q]]
    }

    #[inline(always)]
    fn drone(&self, p: usize, q: usize) -> f64 {
        self.drone[self.rows[p] * self.stride + self.rows[q]]
    }
}

fn add_backbone(pc: &PositionCosts<'_>, size: usize, mut add: impl FnMut(usize, usize, f64)) {
    for i in 0..size - 1 {
        add(i, i + 1, pc.truck(i, i + 1));
    }
}

/// Builds the full operation graph: one arc per `(i, k)` carrying the best
/// drone choice (or none).
pub fn build_split_graph(h: &Cycle, cm: &CostModel) -> Result<(OpGraph, BuildCounters), SplitError> {
    let pc = PositionCosts::new(h, cm)?;
    let size = h.n() + 2;
    let last = size - 1;
    let mut g = MatrixGraph::new(size);
    let mut counters = BuildCounters::default();
    add_backbone(&pc, size, |i, k, c| g.set(i, k, NO_DRONE, c));
    counters.arcs_written += (size - 1) as u64;

    for i in 0..last.saturating_sub(1) {
        let mut truck_cost = pc.truck(i, i + 1);
        for k in i + 2..=last {
            truck_cost += pc.truck(k - 1, k);
            let mut best = truck_cost;
            let mut best_j = NO_DRONE;
            for j in i + 1..k {
                let drone_cost = pc.drone(i, j) + pc.drone(j, k);
                let delta = pc.truck(j - 1, j + 1) - (pc.truck(j - 1, j) + pc.truck(j, j + 1));
                let cost = drone_cost.max(truck_cost + delta);
                if cost < best {
                    best = cost;
                    best_j = j;
                }
            }
            counters.triples_considered += (k - i - 1) as u64;
            g.set(i, k, best_j, best);
            counters.arcs_written += 1;
        }
    }
    Ok((OpGraph::Matrix(g), counters))
}

trait ArcSink {
    fn offer(&mut self, i: usize, k: usize, j: usize, cost: f64) -> bool;
}

impl ArcSink for MatrixGraph {
    #[inline(always)]
    fn offer(&mut self, i: usize, k: usize, j: usize, cost: f64) -> bool {
        MatrixGraph::offer(self, i, k, j, cost)
    }
}

impl ArcSink for ListGraph {
    #[inline(always)]
    fn offer(&mut self, i: usize, k: usize, j: usize, cost: f64) -> bool {
        self.push(i, k, j, cost);
        true
    }
}

fn lazy_core<S: ArcSink, O: TripleObserver>(
    pc: &PositionCosts<'_>,
    n: usize,
    sink: &mut S,
    obs: &mut O,
    counters: &mut BuildCounters,
) {
    for j in 1..=n {
        let base_cost = pc.truck(j - 1, j + 1);
        let mut pre_cost = -pc.truck(j - 1, j);
        let mut k_max = n + 1;
        for i in (0..j).rev() {
            let k = j + 1;
            let drone_cost = pc.drone(i, j) + pc.drone(j, k);
            pre_cost += pc.truck(i, i + 1);
            let mut pos_cost = 0.0;
            let truck_cost = pre_cost + base_cost + pos_cost;
            let fast = drone_cost <= truck_cost;
            counters.triples_considered += 1;
            obs.observe(i, j, k, fast);
            if sink.offer(i, k, j, drone_cost.max(truck_cost)) {
                counters.arcs_written += 1;
            }
            if fast {
                // o(i, j, j+1) dominates every o(i', j, k') with i' <= i
                break;
            }
            for k in j + 2..=k_max {
                let drone_cost = pc.drone(i, j) + pc.drone(j, k);
                pos_cost += pc.truck(k - 1, k);
                let truck_cost = pre_cost + base_cost + pos_cost;
                let fast = drone_cost <= truck_cost;
                counters.triples_considered += 1;
                obs.observe(i, j, k, fast);
                if sink.offer(i, k, j, drone_cost.max(truck_cost)) {
                    counters.arcs_written += 1;
                }
                if fast {
                    k_max = k - 1;
                    break;
                }
            }
        }
    }
}

/// Builds the pruned operation graph, reporting every evaluated triple to
/// `obs`.
pub fn build_lazy_graph_observed<O: TripleObserver>(
    h: &Cycle,
    cm: &CostModel,
    repr: Repr,
    obs: &mut O,
) -> Result<(OpGraph, BuildCounters), SplitError> {
    let pc = PositionCosts::new(h, cm)?;
    let n = h.n();
    let size = n + 2;
    let mut counters = BuildCounters {
        triples_considered: 0,
        arcs_written: (size - 1) as u64,
    };
    let graph = match repr {
        Repr::Matrix => {
            let mut g = MatrixGraph::new(size);
            add_backbone(&pc, size, |i, k, c| g.set(i, k, NO_DRONE, c));
            lazy_core(&pc, n, &mut g, obs, &mut counters);
            OpGraph::Matrix(g)
        }
        Repr::Lists => {
            let mut g = ListGraph::new(size);
            add_backbone(&pc, size, |i, k, c| g.push(i, k, NO_DRONE, c));
            lazy_core(&pc, n, &mut g, obs, &mut counters);
            OpGraph::Lists(g)
        }
    };
    Ok((graph, counters))
}

pub fn build_lazy_graph(h: &Cycle, cm: &CostModel, repr: Repr) -> Result<(OpGraph, BuildCounters), SplitError> {
    build_lazy_graph_observed(h, cm, repr, &mut ())
}

fn finish(
    h: &Cycle,
    graph: OpGraph,
    counters: BuildCounters,
    name: &str,
    start: Instant,
) -> Result<(Solution, RunStats), SplitError> {
    let path = shortest_path(&graph)?;
    let solution = reconstruct(&path, h)?;
    let wall_time_ns = start.elapsed().as_nanos() as u64;
    Ok((
        solution,
        RunStats {
            solver_name: name.to_string(),
            triples_considered: counters.triples_considered,
            arcs_written: counters.arcs_written,
            wall_time_ns,
        },
    ))
}

/// Full `O(n^3)` split: evaluates all `C(n+2, 3)` triples.
pub fn split_algorithm(h: &Cycle, cm: &CostModel) -> Result<(Solution, RunStats), SplitError> {
    let start = Instant::now();
    let (graph, counters) = build_split_graph(h, cm)?;
    finish(h, graph, counters, "split", start)
}

/// Lazy split: same optimum as [`split_algorithm`], far fewer triples.
pub fn split_lazy(h: &Cycle, cm: &CostModel, repr: Repr) -> Result<(Solution, RunStats), SplitError> {
    let start = Instant::now();
    let (graph, counters) = build_lazy_graph(h, cm, repr)?;
    let name = match repr {
        Repr::Matrix => "lazy-matrix",
        Repr::Lists => "lazy-lists",
    };
    finish(h, graph, counters, name, start)
}

fn check_triple(i: usize, j: usize, k: usize, h: &Cycle) -> Result<(), ModelError> {
    if !(i < j && j < k && k <= h.n() + 1) {
        return Err(ModelError::Contract(format!(
            "triple ({i}, {j}, {k}) must satisfy i < j < k <= {}",
            h.n() + 1
        )));
    }
    Ok(())
}

fn legs(h: &Cycle, cm: &CostModel, from: usize, to: usize) -> f64 {
    (from..to).map(|p| cm.truck(h.node(p), h.node(p + 1))).sum()
}

/// Truck time of the operation launched at `i`, serving `j` by drone and
/// landing at `k` (positions on `h`), summed leg by leg.
pub fn triple_truck_time(i: usize, j: usize, k: usize, h: &Cycle, cm: &CostModel) -> Result<f64, ModelError> {
    check_triple(i, j, k, h)?;
    Ok(legs(h, cm, i, j - 1) + cm.truck(h.node(j - 1), h.node(j + 1)) + legs(h, cm, j + 1, k))
}

pub fn triple_drone_time(i: usize, j: usize, k: usize, h: &Cycle, cm: &CostModel) -> Result<f64, ModelError> {
    check_triple(i, j, k, h)?;
    Ok(cm.drone(h.node(i), h.node(j)) + cm.drone(h.node(j), h.node(k)))
}

pub fn triple_time(i: usize, j: usize, k: usize, h: &Cycle, cm: &CostModel) -> Result<f64, ModelError> {
    Ok(triple_truck_time(i, j, k, h, cm)?.max(triple_drone_time(i, j, k, h, cm)?))
}

/// Drone flight time does not exceed the truck time of the same operation.
/// Inclusive, no tolerance.
pub fn is_fast(i: usize, j: usize, k: usize, h: &Cycle, cm: &CostModel) -> Result<bool, ModelError> {
    Ok(triple_drone_time(i, j, k, h, cm)? <= triple_truck_time(i, j, k, h, cm)?)
}

/// `o(i, j, k)` dominates `o(i2, j2, k2)`: it is contained in it and taking
/// the truck to `i`, flying `o(i, j, k)`, then trucking on to `k2` is no
/// slower. Compared with the cost-equality tolerance, since both sides add
/// the same legs in different orders.
#[allow(clippy::too_many_arguments)]
pub fn dominates(
    i: usize,
    j: usize,
    k: usize,
    i2: usize,
    j2: usize,
    k2: usize,
    h: &Cycle,
    cm: &CostModel,
) -> Result<bool, ModelError> {
    check_triple(i, j, k, h)?;
    check_triple(i2, j2, k2, h)?;
    if !(i2 <= i && k2 >= k) {
        return Ok(false);
    }
    let outer = triple_time(i2, j2, k2, h, cm)?;
    let inner = legs(h, cm, i2, i) + triple_time(i, j, k, h, cm)? + legs(h, cm, k, k2);
    Ok(approx_ge(outer, inner))
}

/// `C(m, 3)` for `m = n + 2` positions.
pub fn triple_ceiling(n: usize) -> u64 {
    let m = (n + 2) as u64;
    m * (m - 1) * (m - 2) / 6
}
