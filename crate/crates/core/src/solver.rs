//! Uniform entry point over the split solvers and the exhaustive oracle.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{CostModel, Cycle, Solution};
use crate::oracle::{exhaustive_hfstsp, OracleError};
use crate::split::{split_algorithm, split_lazy, Repr, RunStats, SplitError};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SolverKind {
    #[serde(rename = "split")]
    Split,
    #[serde(rename = "lazy-matrix")]
    LazyMatrix,
    #[serde(rename = "lazy-lists")]
    LazyLists,
    #[serde(rename = "oracle")]
    Oracle,
}

impl SolverKind {
    pub const SPLITS: [SolverKind; 3] = [Self::Split, Self::LazyMatrix, Self::LazyLists];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Split => "split",
            Self::LazyMatrix => "lazy-matrix",
            Self::LazyLists => "lazy-lists",
            Self::Oracle => "oracle",
        }
    }

    pub fn solve(&self, h: &Cycle, cm: &CostModel) -> Result<(Solution, RunStats), SolveError> {
        Ok(match self {
            Self::Split => split_algorithm(h, cm)?,
            Self::LazyMatrix => split_lazy(h, cm, Repr::Matrix)?,
            Self::LazyLists => split_lazy(h, cm, Repr::Lists)?,
            Self::Oracle => {
                let start = Instant::now();
                let s = exhaustive_hfstsp(h, cm)?;
                let stats = RunStats {
                    solver_name: self.as_str().to_string(),
                    triples_considered: 0,
                    arcs_written: 0,
                    wall_time_ns: start.elapsed().as_nanos() as u64,
                };
                (s, stats)
            }
        })
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "split" => Ok(Self::Split),
            "lazy-matrix" => Ok(Self::LazyMatrix),
            "lazy-lists" => Ok(Self::LazyLists),
            "oracle" => Ok(Self::Oracle),
            other => Err(format!(
                "unknown solver `{other}` (split, lazy-matrix, lazy-lists, oracle)"
            )),
        }
    }
}
