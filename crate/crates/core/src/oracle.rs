//! Exhaustive reference solvers for small instances.
//!
//! These share no code with [`crate::split`]: every candidate operation is
//! materialized as an [`Operation`] and priced with
//! [`crate::model::operation_time`]. The h-FSTSP search recurses over the
//! start position of the next operation, memoized on that position only.

use itertools::Itertools;
use thiserror::Error;

use crate::model::{approx_ge, operation_time, CostModel, Cycle, ModelError, Operation, Solution, Sortie};

/// Default customer cap for [`exhaustive_hfstsp`].
pub const HFSTSP_CAP: usize = 14;
/// Customer cap for [`exhaustive_fstsp`] (`n!` cycles).
pub const FSTSP_CAP: usize = 7;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("oracle refuses n = {n}: cap is {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("cycle covers {cycle} customers but the cost model has {model}")]
    SizeMismatch { cycle: usize, model: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    pub cap: usize,
    /// Drop every drone operation that another operation dominates.
    pub exclude_dominated: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            cap: HFSTSP_CAP,
            exclude_dominated: false,
        }
    }
}

fn build_op(h: &Cycle, from: usize, to: usize, drone: Option<usize>) -> Result<Operation, ModelError> {
    let truck = (from..=to)
        .filter(|&p| Some(p) != drone)
        .map(|p| h.node(p))
        .collect();
    let sortie = drone.map(|j| Sortie {
        launch: h.node(from),
        customer: h.node(j),
        rendezvous: h.node(to),
    });
    Operation::new(truck, sortie)
}

fn truck_legs(h: &Cycle, cm: &CostModel, from: usize, to: usize) -> f64 {
    (from..to).map(|p| cm.truck(h.node(p), h.node(p + 1))).sum()
}

/// Drone operations `(i, j, k)` that survive dominance filtering. An
/// operation is dropped when some other operation dominates it and is either
/// strictly contained in it, or spans the same positions and is cheaper (ties
/// broken by drone position). That order is well founded, so at least one
/// dominator of every dropped operation survives.
fn undominated(h: &Cycle, cm: &CostModel) -> Result<Vec<Vec<Vec<bool>>>, ModelError> {
    let last = h.n() + 1;
    let mut time = vec![vec![vec![f64::NAN; last + 1]; last + 1]; last + 1];
    for i in 0..last {
        for k in i + 2..=last {
            for j in i + 1..k {
                time[i][j][k] = operation_time(&build_op(h, i, k, Some(j))?, cm)?;
            }
        }
    }
    let mut keep = vec![vec![vec![true; last + 1]; last + 1]; last + 1];
    for i2 in 0..last {
        for k2 in i2 + 2..=last {
            for j2 in i2 + 1..k2 {
                let outer = time[i2][j2][k2];
                'search: for i in i2..k2 {
                    for k in i + 2..=k2 {
                        for j in i + 1..k {
                            if (i, j, k) == (i2, j2, k2) {
                                continue;
                            }
                            let inner = time[i][j][k];
                            let same_span = i == i2 && k == k2;
                            if same_span && !(inner < outer || (inner == outer && j < j2)) {
                                continue;
                            }
                            let replaced = truck_legs(h, cm, i2, i) + inner + truck_legs(h, cm, k, k2);
                            if approx_ge(outer, replaced) {
                                keep[i2][j2][k2] = false;
                                break 'search;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(keep)
}

/// Minimum-time solution respecting `h`, by exhaustive search over how `h`
/// is cut into operations and which interior position (if any) each
/// operation serves by drone.
pub fn exhaustive_hfstsp_with(h: &Cycle, cm: &CostModel, config: &OracleConfig) -> Result<Solution, OracleError> {
    let n = h.n();
    if n > config.cap {
        return Err(OracleError::TooLarge { n, cap: config.cap });
    }
    if n != cm.n() {
        return Err(OracleError::SizeMismatch {
            cycle: n,
            model: cm.n(),
        });
    }
    let keep = if config.exclude_dominated {
        Some(undominated(h, cm)?)
    } else {
        None
    };

    let last = n + 1;
    // best[p]: cheapest completion from position p to the end
    let mut best = vec![f64::INFINITY; last + 1];
    let mut choice: Vec<Option<(usize, Option<usize>)>> = vec![None; last + 1];
    best[last] = 0.0;
    for from in (0..last).rev() {
        for to in from + 1..=last {
            let drones = std::iter::once(None).chain((from + 1..to).map(Some));
            for drone in drones {
                if let (Some(keep), Some(j)) = (&keep, drone) {
                    if !keep[from][j][to] {
                        continue;
                    }
                }
                let t = operation_time(&build_op(h, from, to, drone)?, cm)? + best[to];
                if t < best[from] {
                    best[from] = t;
                    choice[from] = Some((to, drone));
                }
            }
        }
    }

    let mut ops = Vec::new();
    let mut at = 0;
    while at != last {
        let (to, drone) = choice[at].expect("every position reaches the end by truck");
        ops.push(build_op(h, at, to, drone)?);
        at = to;
    }
    Ok(Solution::new(ops, best[0]))
}

pub fn exhaustive_hfstsp(h: &Cycle, cm: &CostModel) -> Result<Solution, OracleError> {
    exhaustive_hfstsp_with(h, cm, &OracleConfig::default())
}

/// Optimal solution over every customer ordering, together with the cycle
/// it respects. Ties keep the first ordering in lexicographic order.
pub fn exhaustive_fstsp(cm: &CostModel) -> Result<(Solution, Cycle), OracleError> {
    let n = cm.n();
    if n > FSTSP_CAP {
        return Err(OracleError::TooLarge { n, cap: FSTSP_CAP });
    }
    let mut best: Option<(Solution, Cycle)> = None;
    for perm in (1..=n).permutations(n) {
        let h = Cycle::from_customers(&perm)?;
        let s = exhaustive_hfstsp(&h, cm)?;
        if best.as_ref().map_or(true, |(b, _)| s.total_time() < b.total_time()) {
            best = Some((s, h));
        }
    }
    Ok(best.expect("at least one ordering"))
}
