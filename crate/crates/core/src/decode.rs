//! Peeling decoder for the erasure channel, and an exact elimination oracle.
//!
//! Peeling keeps, per check, the number of erased neighbors and the XOR of
//! their ids. A check with exactly one erased neighbor therefore names that
//! neighbor directly and resolves it. The residual is the largest stopping
//! set inside the erased set, whatever order checks are processed in.

use std::collections::{HashMap, VecDeque};

use crate::channel::ErasurePattern;
use crate::error::{Error, Result};
use crate::gf2::BitMatrix;
use crate::tanner::{CheckId, TannerGraph, VarId};

/// Default cap on the number of erased columns the oracle will eliminate.
pub const DEFAULT_ORACLE_BUDGET: usize = 5_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    /// Still-erased variables, ascending.
    pub residual: Vec<VarId>,
    pub resolved_count: usize,
    pub success: bool,
    /// Length of the longest resolution chain (0 when nothing was resolved).
    pub peel_rounds: usize,
}

/// Worklist discipline. Only used to demonstrate that the residual does not
/// depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    /// Seed degree-one checks in ascending id order, process first-in first-out.
    #[default]
    Forward,
    /// Seed in descending order, process last-in first-out.
    Reverse,
}

pub fn peel(graph: &TannerGraph, pattern: &ErasurePattern) -> DecodeResult {
    peel_with(graph, pattern, Schedule::Forward)
}

pub fn peel_with(
    graph: &TannerGraph,
    pattern: &ErasurePattern,
    schedule: Schedule,
) -> DecodeResult {
    run(graph, pattern, schedule, |_, _| {})
}

/// Peel while tracking values: every resolved entry of `word` is overwritten
/// by the XOR of the other neighbors of the resolving check. Entries of
/// erased variables are ignored on input.
pub fn peel_values(graph: &TannerGraph, pattern: &ErasurePattern, word: &mut [u8]) -> DecodeResult {
    assert_eq!(word.len(), graph.num_variables());
    run(graph, pattern, Schedule::Forward, |c, v| {
        let bit = graph
            .nbrs(c)
            .iter()
            .filter(|&&u| u != v)
            .fold(0u8, |acc, u| acc ^ word[u.index()]);
        word[v.index()] = bit & 1;
    })
}

fn run(
    graph: &TannerGraph,
    pattern: &ErasurePattern,
    schedule: Schedule,
    mut on_resolve: impl FnMut(CheckId, VarId),
) -> DecodeResult {
    assert_eq!(pattern.num_variables(), graph.num_variables());
    let mut erased = pattern.flags().to_vec();
    let checks = graph.num_checks();
    let mut degree = vec![0u32; checks];
    let mut xor = vec![0u32; checks];
    for v in pattern.erased_vars() {
        for &c in graph.cochecks(v) {
            degree[c.index()] += 1;
            xor[c.index()] ^= v.0;
        }
    }

    let mut depth = vec![0u32; checks];
    let mut work: VecDeque<CheckId> = VecDeque::new();
    let ready = |c: &usize| degree[*c] == 1;
    match schedule {
        Schedule::Forward => work.extend((0..checks).filter(ready).map(|c| CheckId(c as u32))),
        Schedule::Reverse => {
            work.extend((0..checks).rev().filter(ready).map(|c| CheckId(c as u32)))
        }
    }
    for c in &work {
        depth[c.index()] = 1;
    }

    let mut resolved = 0;
    let mut rounds = 0;
    loop {
        let next = match schedule {
            Schedule::Forward => work.pop_front(),
            Schedule::Reverse => work.pop_back(),
        };
        let Some(c) = next else { break };
        if degree[c.index()] != 1 {
            continue;
        }
        let v = VarId(xor[c.index()]);
        debug_assert!(erased[v.index()]);
        erased[v.index()] = false;
        resolved += 1;
        let d = depth[c.index()];
        rounds = rounds.max(d as usize);
        on_resolve(c, v);
        for &c2 in graph.cochecks(v) {
            let i = c2.index();
            degree[i] -= 1;
            xor[i] ^= v.0;
            if degree[i] == 1 {
                depth[i] = d + 1;
                work.push_back(c2);
            }
        }
    }

    let residual: Vec<VarId> = erased
        .iter()
        .enumerate()
        .filter(|(_, &e)| e)
        .map(|(i, _)| VarId(i as u32))
        .collect();
    DecodeResult {
        success: residual.is_empty(),
        residual,
        resolved_count: resolved,
        peel_rounds: rounds,
    }
}

/// True iff no check sees exactly one member of `set`. Members must be
/// payload variables; duplicates are ignored.
pub fn is_stopping_set(graph: &TannerGraph, set: &[VarId]) -> Result<bool> {
    let mut members: Vec<VarId> = set.to_vec();
    members.sort_unstable();
    members.dedup();
    let mut count: HashMap<CheckId, u32> = HashMap::new();
    for &v in &members {
        graph.co_checks(v)?;
        if graph.is_seeded(v) {
            return Err(Error::InvalidId(format!(
                "{:?} is a seeded variable",
                graph.variable(v)
            )));
        }
        for &c in graph.cochecks(v) {
            *count.entry(c).or_default() += 1;
        }
    }
    Ok(count.values().all(|&m| m != 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapOutcome {
    /// The erased bits are determined by the known ones.
    Unique,
    /// Some nonzero codeword is supported on the erased set.
    Ambiguous,
}

pub fn map_oracle(graph: &TannerGraph, pattern: &ErasurePattern) -> Result<MapOutcome> {
    map_oracle_with_budget(graph, pattern, DEFAULT_ORACLE_BUDGET)
}

/// Exact decoding decision: the erased bits are recoverable iff the columns of
/// the parity-check matrix restricted to the erased variables are linearly
/// independent.
pub fn map_oracle_with_budget(
    graph: &TannerGraph,
    pattern: &ErasurePattern,
    budget: usize,
) -> Result<MapOutcome> {
    let cols: Vec<VarId> = pattern.erased_vars().collect();
    if cols.len() > budget {
        return Err(Error::BudgetExceeded(format!(
            "{} erased variables exceed the oracle budget of {budget}",
            cols.len()
        )));
    }
    let mut row_of: HashMap<CheckId, usize> = HashMap::new();
    for &v in &cols {
        for &c in graph.cochecks(v) {
            let next = row_of.len();
            row_of.entry(c).or_insert(next);
        }
    }
    if row_of.len() < cols.len() {
        return Ok(MapOutcome::Ambiguous);
    }
    let mut m = BitMatrix::zeros(row_of.len(), cols.len());
    for (j, &v) in cols.iter().enumerate() {
        for c in graph.cochecks(v) {
            m.set(row_of[c], j, true);
        }
    }
    Ok(if m.eliminate() == cols.len() {
        MapOutcome::Unique
    } else {
        MapOutcome::Ambiguous
    })
}
