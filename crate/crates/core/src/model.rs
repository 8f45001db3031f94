//! Domain types for the truck-and-drone routing problem and the cost
//! semantics of operations and solutions.
//!
//! Nodes are numbered `0..=n` where `0` is the depot and `1..=n` are the
//! customers. The id `n + 1` is an alias for the depot used as the final node
//! of every tour; it shares coordinate row `0` and is never stored twice.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative tolerance for cost equality.
pub const REL_TOL: f64 = 1e-9;
/// Absolute floor for cost equality near zero.
pub const ABS_TOL: f64 = 1e-12;

/// `true` when `a` and `b` agree within [`REL_TOL`] (relative) or [`ABS_TOL`]
/// (absolute), whichever is looser.
pub fn approx_eq(a: f64, b: f64) -> bool {
    if a == b {
        return true;
    }
    (a - b).abs() <= ABS_TOL.max(REL_TOL * a.abs().max(b.abs()))
}

/// `a >= b` up to the same tolerance as [`approx_eq`].
pub fn approx_ge(a: f64, b: f64) -> bool {
    a >= b || approx_eq(a, b)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid truck path: {0}")]
    InvalidPath(String),
    #[error("invalid operation: {0}")]
    InvalidOperation(String),
    #[error("invalid solution: {0}")]
    InvalidSolution(String),
    #[error("invalid cycle: {0}")]
    InvalidCycle(String),
    #[error("contract violation: {0}")]
    Contract(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Spatial distribution an instance was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    Uniform,
    OneCenter,
    TwoCenter,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 3] = [Self::Uniform, Self::OneCenter, Self::TwoCenter];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Uniform => "uniform",
            Self::OneCenter => "one_center",
            Self::TwoCenter => "two_center",
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GeneratorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "one_center" | "1c" | "one-center" => Ok(Self::OneCenter),
            "two_center" | "2c" | "two-center" => Ok(Self::TwoCenter),
            other => Err(format!("unknown generator kind `{other}`")),
        }
    }
}

/// Provenance of a generated instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub kind: GeneratorKind,
    pub seed: u64,
}

/// Customer and depot coordinates plus the drone speed factor.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    coords: Vec<Point>,
    alpha: f64,
    meta: Option<InstanceMeta>,
}

impl Instance {
    /// `coords[0]` is the depot, `coords[1..]` are the customers.
    pub fn new(coords: Vec<Point>, alpha: f64) -> Result<Self, ModelError> {
        if coords.len() < 2 {
            return Err(ModelError::InvalidInstance(format!(
                "need a depot and at least one customer, got {} points",
                coords.len()
            )));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(ModelError::InvalidInstance(format!(
                "alpha must be positive and finite, got {alpha}"
            )));
        }
        if let Some(p) = coords.iter().find(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(ModelError::InvalidInstance(format!(
                "non-finite coordinate ({}, {})",
                p.x, p.y
            )));
        }
        Ok(Self {
            coords,
            alpha,
            meta: None,
        })
    }

    pub fn with_meta(mut self, meta: InstanceMeta) -> Self {
        self.meta = Some(meta);
        self
    }

    /// Number of customers.
    pub fn n(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn meta(&self) -> Option<&InstanceMeta> {
        self.meta.as_ref()
    }

    pub fn coords(&self) -> &[Point] {
        &self.coords
    }

    /// Coordinates of `node`, resolving the depot alias `n + 1`.
    pub fn point(&self, node: usize) -> Point {
        if node == self.coords.len() {
            self.coords[0]
        } else {
            self.coords[node]
        }
    }
}

/// Truck and drone travel-time tables over `{0..=n}`; lookups accept the
/// depot alias `n + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostModel {
    n: usize,
    truck: Vec<f64>,
    drone: Vec<f64>,
}

impl CostModel {
    /// Euclidean truck times; drone times are the same distances divided by
    /// the instance's `alpha`.
    pub fn euclidean(inst: &Instance) -> Self {
        let rows = inst.n() + 1;
        let mut truck = vec![0.0; rows * rows];
        let mut drone = vec![0.0; rows * rows];
        let pts = inst.coords();
        for i in 0..rows {
            for j in 0..rows {
                let d = if i == j { 0.0 } else { pts[i].dist(&pts[j]) };
                truck[i * rows + j] = d;
                drone[i * rows + j] = d / inst.alpha();
            }
        }
        Self {
            n: inst.n(),
            truck,
            drone,
        }
    }

    /// Arbitrary row-major `(n+1) x (n+1)` tables.
    pub fn from_tables(n: usize, truck: Vec<f64>, drone: Vec<f64>) -> Result<Self, ModelError> {
        let rows = n + 1;
        if n == 0 || truck.len() != rows * rows || drone.len() != rows * rows {
            return Err(ModelError::InvalidInstance(format!(
                "tables must be {rows}x{rows} with n >= 1"
            )));
        }
        if truck.iter().chain(&drone).any(|t| !(*t >= 0.0)) {
            return Err(ModelError::InvalidInstance(
                "travel times must be nonnegative".into(),
            ));
        }
        Ok(Self { n, truck, drone })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Table row of `node`; the depot alias `n + 1` maps to row `0`.
    #[inline]
    pub fn row(&self, node: usize) -> usize {
        if node == self.n + 1 {
            0
        } else {
            node
        }
    }

    #[inline]
    pub fn truck(&self, i: usize, j: usize) -> f64 {
        self.truck[self.row(i) * (self.n + 1) + self.row(j)]
    }

    #[inline]
    pub fn drone(&self, i: usize, j: usize) -> f64 {
        self.drone[self.row(i) * (self.n + 1) + self.row(j)]
    }

    /// Flat truck table, indexed by `row * (n + 1) + row`.
    pub fn truck_table(&self) -> &[f64] {
        &self.truck
    }

    pub fn drone_table(&self) -> &[f64] {
        &self.drone
    }
}

/// Shorthand for [`CostModel::euclidean`].
pub fn build_cost_model(inst: &Instance) -> CostModel {
    CostModel::euclidean(inst)
}

/// A Hamiltonian ordering `(v_0, ..., v_{n+1})` with `v_0 = 0` and
/// `v_{n+1} = n + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cycle {
    order: Vec<usize>,
}

impl Cycle {
    pub fn new(order: Vec<usize>) -> Result<Self, ModelError> {
        if order.len() < 3 {
            return Err(ModelError::InvalidCycle(format!(
                "need at least 3 entries, got {}",
                order.len()
            )));
        }
        let n = order.len() - 2;
        if order[0] != 0 || order[n + 1] != n + 1 {
            return Err(ModelError::InvalidCycle(format!(
                "must start at 0 and end at {}",
                n + 1
            )));
        }
        let mut seen = vec![false; n + 1];
        for &v in &order[1..=n] {
            if v == 0 || v > n {
                return Err(ModelError::InvalidCycle(format!(
                    "customer id {v} outside 1..={n}"
                )));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(ModelError::InvalidCycle(format!("customer {v} repeated")));
            }
        }
        Ok(Self { order })
    }

    /// The cycle `0, 1, ..., n, n+1`.
    pub fn identity(n: usize) -> Self {
        Self {
            order: (0..=n + 1).collect(),
        }
    }

    /// Builds a cycle from a customer permutation.
    pub fn from_customers(customers: &[usize]) -> Result<Self, ModelError> {
        let n = customers.len();
        let mut order = Vec::with_capacity(n + 2);
        order.push(0);
        order.extend_from_slice(customers);
        order.push(n + 1);
        Self::new(order)
    }

    pub fn n(&self) -> usize {
        self.order.len() - 2
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Node at position `pos`.
    #[inline]
    pub fn node(&self, pos: usize) -> usize {
        self.order[pos]
    }

    /// Inverse map: `positions()[node]` is the position of `node`.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (p, &v) in self.order.iter().enumerate() {
            pos[v] = p;
        }
        pos
    }

    /// Truck-only tour length.
    pub fn length(&self, cm: &CostModel) -> f64 {
        self.order.windows(2).map(|w| cm.truck(w[0], w[1])).sum()
    }
}

impl fmt::Display for Cycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (idx, v) in self.order.iter().enumerate() {
            if idx > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl FromStr for Cycle {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let line = s
            .lines()
            .map(str::trim)
            .find(|l| !l.is_empty() && !l.starts_with('#'))
            .ok_or_else(|| ModelError::InvalidCycle("empty cycle file".into()))?;
        let order = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<usize>()
                    .map_err(|_| ModelError::InvalidCycle(format!("non-numeric node id `{tok}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Cycle::new(order)
    }
}

/// Drone flight `launch -> customer -> rendezvous`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sortie {
    pub launch: usize,
    pub customer: usize,
    pub rendezvous: usize,
}

/// A truck path with an optional single-customer drone sortie launched at its
/// first node and retrieved at its last.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Operation {
    truck_path: Vec<usize>,
    sortie: Option<Sortie>,
}

impl Operation {
    pub fn new(truck_path: Vec<usize>, sortie: Option<Sortie>) -> Result<Self, ModelError> {
        if truck_path.len() < 2 {
            return Err(ModelError::InvalidPath(format!(
                "truck path needs at least 2 nodes, got {}",
                truck_path.len()
            )));
        }
        if let Some(s) = sortie {
            let first = truck_path[0];
            let last = truck_path[truck_path.len() - 1];
            if s.launch != first || s.rendezvous != last {
                return Err(ModelError::InvalidOperation(format!(
                    "sortie ({}, {}, {}) must launch at {first} and land at {last}",
                    s.launch, s.customer, s.rendezvous
                )));
            }
            if s.launch == s.customer || s.customer == s.rendezvous || s.launch == s.rendezvous {
                return Err(ModelError::InvalidOperation(format!(
                    "sortie ({}, {}, {}) repeats a node",
                    s.launch, s.customer, s.rendezvous
                )));
            }
            if truck_path.contains(&s.customer) {
                return Err(ModelError::InvalidOperation(format!(
                    "drone customer {} is also on the truck path",
                    s.customer
                )));
            }
        }
        Ok(Self { truck_path, sortie })
    }

    pub fn truck_only(truck_path: Vec<usize>) -> Result<Self, ModelError> {
        Self::new(truck_path, None)
    }

    pub fn truck_path(&self) -> &[usize] {
        &self.truck_path
    }

    pub fn sortie(&self) -> Option<&Sortie> {
        self.sortie.as_ref()
    }

    pub fn first(&self) -> usize {
        self.truck_path[0]
    }

    pub fn last(&self) -> usize {
        self.truck_path[self.truck_path.len() - 1]
    }
}

/// Sequence of chained operations and its recorded total time.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    operations: Vec<Operation>,
    total_time: f64,
}

impl Solution {
    /// Does not check invariants; see [`Solution::check_invariants`].
    pub fn new(operations: Vec<Operation>, total_time: f64) -> Self {
        Self {
            operations,
            total_time,
        }
    }

    /// Builds a solution and records its recomputed total time.
    pub fn from_operations(operations: Vec<Operation>, cm: &CostModel) -> Result<Self, ModelError> {
        let mut s = Self::new(operations, 0.0);
        s.total_time = solution_time(&s, cm)?;
        Ok(s)
    }

    pub fn operations(&self) -> &[Operation] {
        &self.operations
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    /// Checks depot placement, chaining, and that every customer `1..=n` is
    /// served exactly once.
    pub fn check_invariants(&self, n: usize) -> Result<(), ModelError> {
        let depot_end = n + 1;
        let ops = &self.operations;
        let (Some(first), Some(last)) = (ops.first(), ops.last()) else {
            return Err(ModelError::InvalidSolution("no operations".into()));
        };
        if first.first() != 0 {
            return Err(ModelError::InvalidSolution(format!(
                "first operation starts at {} instead of the depot",
                first.first()
            )));
        }
        if last.last() != depot_end {
            return Err(ModelError::InvalidSolution(format!(
                "last operation ends at {} instead of the depot alias {depot_end}",
                last.last()
            )));
        }
        for (idx, pair) in ops.windows(2).enumerate() {
            if pair[0].last() != pair[1].first() {
                return Err(ModelError::InvalidSolution(format!(
                    "operation {} ends at {} but operation {} starts at {}",
                    idx,
                    pair[0].last(),
                    idx + 1,
                    pair[1].first()
                )));
            }
        }

        let mut served = vec![0usize; n + 2];
        for (idx, op) in ops.iter().enumerate() {
            let path = op.truck_path();
            // Chained endpoints belong to the operation that ends there.
            let start = usize::from(idx > 0);
            for (p, &v) in path.iter().enumerate().skip(start) {
                if v > depot_end {
                    return Err(ModelError::InvalidSolution(format!("node id {v} out of range")));
                }
                let is_endpoint = (idx == 0 && p == 0) || (idx + 1 == ops.len() && p + 1 == path.len());
                if (v == 0 || v == depot_end) && !is_endpoint {
                    return Err(ModelError::InvalidSolution(format!(
                        "depot appears inside operation {idx}"
                    )));
                }
                served[v] += 1;
            }
            if let Some(s) = op.sortie() {
                if s.customer == 0 || s.customer > n {
                    return Err(ModelError::InvalidSolution(format!(
                        "drone customer {} is not a customer",
                        s.customer
                    )));
                }
                served[s.customer] += 1;
            }
        }
        for (c, &count) in served.iter().enumerate().take(n + 1).skip(1) {
            if count != 1 {
                return Err(ModelError::InvalidSolution(format!(
                    "customer {c} served {count} times"
                )));
            }
        }
        Ok(())
    }
}

fn check_node(node: usize, cm: &CostModel) -> Result<(), ModelError> {
    if node > cm.n() + 1 {
        return Err(ModelError::InvalidPath(format!(
            "node id {node} outside 0..={}",
            cm.n() + 1
        )));
    }
    Ok(())
}

/// Sum of consecutive truck legs along `path`.
pub fn truck_path_time(path: &[usize], cm: &CostModel) -> Result<f64, ModelError> {
    if path.len() < 2 {
        return Err(ModelError::InvalidPath(format!(
            "truck path needs at least 2 nodes, got {}",
            path.len()
        )));
    }
    for &v in path {
        check_node(v, cm)?;
    }
    Ok(path.windows(2).map(|w| cm.truck(w[0], w[1])).sum())
}

/// `t_D(launch, customer) + t_D(customer, rendezvous)`.
pub fn sortie_time(s: &Sortie, cm: &CostModel) -> f64 {
    cm.drone(s.launch, s.customer) + cm.drone(s.customer, s.rendezvous)
}

/// Truck time, or the larger of truck and drone time when a sortie is flown.
pub fn operation_time(op: &Operation, cm: &CostModel) -> Result<f64, ModelError> {
    let truck = truck_path_time(op.truck_path(), cm)?;
    match op.sortie() {
        None => Ok(truck),
        Some(s) => {
            check_node(s.customer, cm)?;
            if s.launch == s.customer || s.customer == s.rendezvous || s.launch == s.rendezvous {
                return Err(ModelError::InvalidOperation("sortie repeats a node".into()));
            }
            Ok(truck.max(sortie_time(s, cm)))
        }
    }
}

/// Sum of operation times; fails if consecutive operations do not chain.
pub fn solution_time(s: &Solution, cm: &CostModel) -> Result<f64, ModelError> {
    for pair in s.operations().windows(2) {
        if pair[0].last() != pair[1].first() {
            return Err(ModelError::InvalidSolution(format!(
                "operation ending at {} is followed by one starting at {}",
                pair[0].last(),
                pair[1].first()
            )));
        }
    }
    s.operations().iter().map(|op| operation_time(op, cm)).sum()
}

/// Outcome of [`validate_respects`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RespectReport {
    pub violations: Vec<String>,
}

impl RespectReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for RespectReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks that truck nodes follow the order of `h`, that every drone customer
/// lies strictly between its launch and rendezvous in `h`, and that every
/// customer is served exactly once.
pub fn validate_respects(s: &Solution, h: &Cycle) -> RespectReport {
    let n = h.n();
    let mut report = RespectReport::default();
    let pos = h.positions();
    let pos_of = |v: usize| pos.get(v).copied();

    if let Err(e) = s.check_invariants(n) {
        report.violations.push(e.to_string());
    }

    let mut last_pos: Option<usize> = None;
    for (idx, op) in s.operations().iter().enumerate() {
        let skip = usize::from(idx > 0 && last_pos.is_some());
        for &v in op.truck_path().iter().skip(skip) {
            let Some(p) = pos_of(v) else {
                report.violations.push(format!("node {v} is not in the cycle"));
                continue;
            };
            if let Some(prev) = last_pos {
                if p <= prev {
                    report.violations.push(format!(
                        "truck visits {v} (position {p}) after position {prev}"
                    ));
                }
            }
            last_pos = Some(p);
        }
        if let Some(sortie) = op.sortie() {
            match (pos_of(sortie.launch), pos_of(sortie.customer), pos_of(sortie.rendezvous)) {
                (Some(a), Some(b), Some(c)) if a < b && b < c => {}
                _ => report.violations.push(format!(
                    "drone customer {} is not between launch {} and rendezvous {} in the cycle",
                    sortie.customer, sortie.launch, sortie.rendezvous
                )),
            }
        }
    }
    report
}
