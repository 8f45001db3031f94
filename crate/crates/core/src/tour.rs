//! Initial Hamiltonian cycles: nearest neighbor, 2-opt improvement, and the
//! MST double-tree tour.
//!
//! All three treat truck times as a symmetric metric.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::{CostModel, Cycle, Instance};

/// Improvement threshold for 2-opt moves; smaller gains are rounding noise.
const TWO_OPT_EPS: f64 = 1e-10;

/// Default pass cap for [`two_opt_improve`].
pub const DEFAULT_TWO_OPT_PASSES: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TourMethod {
    #[serde(rename = "nn")]
    NearestNeighbor,
    #[serde(rename = "nn2opt")]
    NearestNeighborTwoOpt,
    #[serde(rename = "mst")]
    MstDoubleTree,
}

impl TourMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::NearestNeighbor => "nn",
            Self::NearestNeighborTwoOpt => "nn2opt",
            Self::MstDoubleTree => "mst",
        }
    }

    pub fn build(&self, inst: &Instance, cm: &CostModel) -> Cycle {
        match self {
            Self::NearestNeighbor => nearest_neighbor(inst, cm),
            Self::NearestNeighborTwoOpt => {
                two_opt_improve(&nearest_neighbor(inst, cm), cm, DEFAULT_TWO_OPT_PASSES)
            }
            Self::MstDoubleTree => mst_double_tree(inst, cm),
        }
    }
}

impl fmt::Display for TourMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TourMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nn" => Ok(Self::NearestNeighbor),
            "nn2opt" => Ok(Self::NearestNeighborTwoOpt),
            "mst" => Ok(Self::MstDoubleTree),
            other => Err(format!("unknown tour method `{other}` (nn, nn2opt, mst)")),
        }
    }
}

/// Greedy tour from the depot; ties go to the smallest customer id.
pub fn nearest_neighbor(inst: &Instance, cm: &CostModel) -> Cycle {
    let n = inst.n();
    let mut visited = vec![false; n + 1];
    let mut order = Vec::with_capacity(n + 2);
    order.push(0);
    let mut cur = 0;
    for _ in 0..n {
        let mut best: Option<(usize, f64)> = None;
        for c in 1..=n {
            if visited[c] {
                continue;
            }
            let d = cm.truck(cur, c);
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((c, d));
            }
        }
        let (next, _) = best.expect("an unvisited customer remains");
        visited[next] = true;
        order.push(next);
        cur = next;
    }
    order.push(n + 1);
    Cycle::new(order).expect("nearest neighbor builds a permutation")
}

/// First-improvement 2-opt over segment reversals with both depot endpoints
/// fixed. One pass scans every segment once, applying improving moves as it
/// finds them; stops after a pass without improvement or after `max_passes`.
pub fn two_opt_improve(h: &Cycle, cm: &CostModel, max_passes: usize) -> Cycle {
    let mut order = h.order().to_vec();
    let last = order.len() - 1;
    for _ in 0..max_passes {
        let mut improved = false;
        for a in 1..last - 1 {
            for b in a + 1..last {
                let (p, s, e, q) = (order[a - 1], order[a], order[b], order[b + 1]);
                let delta = cm.truck(p, e) + cm.truck(s, q) - cm.truck(p, s) - cm.truck(e, q);
                if delta < -TWO_OPT_EPS {
                    order[a..=b].reverse();
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    Cycle::new(order).expect("2-opt preserves the permutation")
}

/// Prim's minimum spanning tree rooted at the depot: `parent[v]` for every
/// customer `v` (the depot's entry is unused). Ties go to the smallest id.
pub fn mst_parents(n: usize, cm: &CostModel) -> Vec<usize> {
    let rows = n + 1;
    let mut in_tree = vec![false; rows];
    let mut key = vec![f64::INFINITY; rows];
    let mut parent = vec![0; rows];
    key[0] = 0.0;
    for _ in 0..rows {
        let mut u = usize::MAX;
        for v in 0..rows {
            if !in_tree[v] && (u == usize::MAX || key[v] < key[u]) {
                u = v;
            }
        }
        in_tree[u] = true;
        for v in 0..rows {
            if !in_tree[v] {
                let w = cm.truck(u, v);
                if w < key[v] {
                    key[v] = w;
                    parent[v] = u;
                }
            }
        }
    }
    parent
}

pub fn mst_weight(n: usize, cm: &CostModel) -> f64 {
    let parent = mst_parents(n, cm);
    (1..=n).map(|v| cm.truck(parent[v], v)).sum()
}

/// Preorder walk of the depot-rooted MST (children by ascending id), with
/// repeated nodes shortcut.
pub fn mst_double_tree(inst: &Instance, cm: &CostModel) -> Cycle {
    let n = inst.n();
    let parent = mst_parents(n, cm);
    let mut children = vec![Vec::new(); n + 1];
    for v in 1..=n {
        children[parent[v]].push(v);
    }
    let mut order = Vec::with_capacity(n + 2);
    let mut stack = vec![0];
    while let Some(u) = stack.pop() {
        order.push(u);
        // reversed so the smallest id is popped first
        stack.extend(children[u].iter().rev());
    }
    order.push(n + 1);
    Cycle::new(order).expect("preorder visits every node once")
}
