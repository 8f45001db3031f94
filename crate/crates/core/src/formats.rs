//! Text format for solutions.
//!
//! One operation per line, then a total:
//!
//! ```text
//! truck: 0 8 5  drone: 0 7 5  cost: 118.2
//! truck: 5 1  drone: none  cost: 26.7
//! total: 144.9
//! ```

use std::fmt::Write as _;

use crate::instancegen::ParseError;
use crate::model::{operation_time, CostModel, ModelError, Operation, Solution, Sortie};

/// A parsed solution with the per-operation costs recorded in the file.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionFile {
    pub solution: Solution,
    pub op_costs: Vec<f64>,
}

pub fn format_solution(s: &Solution, cm: &CostModel) -> Result<String, ModelError> {
    let mut out = String::new();
    for op in s.operations() {
        let truck = op
            .truck_path()
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        let drone = match op.sortie() {
            Some(d) => format!("{} {} {}", d.launch, d.customer, d.rendezvous),
            None => "none".to_string(),
        };
        let cost = operation_time(op, cm)?;
        let _ = writeln!(out, "truck: {truck}  drone: {drone}  cost: {cost}");
    }
    let _ = writeln!(out, "total: {}", s.total_time());
    Ok(out)
}

fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        msg: msg.into(),
    }
}

fn ids(line: usize, text: &str) -> Result<Vec<usize>, ParseError> {
    text.split_whitespace()
        .map(|t| t.parse().map_err(|_| syntax(line, format!("non-numeric node id `{t}`"))))
        .collect()
}

fn float(line: usize, text: &str) -> Result<f64, ParseError> {
    let t = text.trim();
    t.parse().map_err(|_| syntax(line, format!("non-numeric cost `{t}`")))
}

pub fn parse_solution(text: &str) -> Result<SolutionFile, ParseError> {
    let mut ops = Vec::new();
    let mut op_costs = Vec::new();
    let mut total = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        if total.is_some() {
            return Err(syntax(line, "content after `total:` line"));
        }
        if let Some(rest) = l.strip_prefix("total:") {
            total = Some(float(line, rest)?);
            continue;
        }
        let rest = l
            .strip_prefix("truck:")
            .ok_or_else(|| syntax(line, "expected `truck:` or `total:`"))?;
        let (truck, rest) = rest
            .split_once("drone:")
            .ok_or_else(|| syntax(line, "missing `drone:` field"))?;
        let (drone, cost) = rest
            .split_once("cost:")
            .ok_or_else(|| syntax(line, "missing `cost:` field"))?;
        let truck = ids(line, truck)?;
        let sortie = match drone.trim() {
            "none" => None,
            d => match ids(line, d)?.as_slice() {
                &[launch, customer, rendezvous] => Some(Sortie {
                    launch,
                    customer,
                    rendezvous,
                }),
                _ => return Err(syntax(line, "drone field must be `i j k` or `none`")),
            },
        };
        let op = Operation::new(truck, sortie).map_err(|e| syntax(line, e.to_string()))?;
        ops.push(op);
        op_costs.push(float(line, cost)?);
    }
    let total = total.ok_or_else(|| syntax(text.lines().count().max(1), "missing `total:` line"))?;
    if ops.is_empty() {
        return Err(syntax(1, "no operations"));
    }
    Ok(SolutionFile {
        solution: Solution::new(ops, total),
        op_costs,
    })
}
