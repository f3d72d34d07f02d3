//! Minimum stopping sets: the closed-form lower bound, an exact
//! branch-and-bound search, and a sampling complement.
//!
//! The exact search grows a candidate set from an anchor variable. While some
//! check sees exactly one member, the set is not stopping and any stopping
//! superset must contain a second neighbor of that check, so the search
//! branches over those neighbors. Branch `i` also forbids candidates `0..i`,
//! which keeps the search exhaustive while visiting each superset once.

use std::ops::Range;

use rayon::prelude::*;

use crate::channel::ErasurePattern;
use crate::decode::peel;
use crate::error::{Error, Result};
use crate::seed;
use crate::tanner::{CheckId, TannerGraph, VarId, Variable};

/// Default cap on search nodes per anchor.
pub const DEFAULT_NODE_BUDGET: u64 = 50_000_000;

/// `ceil(3^c / sqrt(2c))` with `c = n - k`, evaluated exactly as the least
/// `m` with `2c * m^2 >= 9^c`.
pub fn lemma_bound(n: usize, k: usize) -> Result<u64> {
    if k == 0 || k >= n {
        return Err(Error::InvalidParameters(format!(
            "need 0 < k < n, got n={n} k={k}"
        )));
    }
    let c = (n - k) as u32;
    if c > 40 {
        return Err(Error::InvalidParameters(format!(
            "n - k = {c} is too large for exact evaluation"
        )));
    }
    let target = 9u128.pow(c);
    let two_c = 2 * u128::from(c);
    let covers = |m: u128| {
        m.checked_mul(m)
            .and_then(|s| s.checked_mul(two_c))
            .is_none_or(|v| v >= target)
    };
    let mut m = (3f64.powi(c as i32) / f64::from(2 * c).sqrt()).ceil() as u128;
    while !covers(m) {
        m += 1;
    }
    while m > 0 && covers(m - 1) {
        m -= 1;
    }
    Ok(m as u64)
}

/// Which anchors the exact search starts from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchScope {
    /// One anchor per stream at the middle payload position. By shift
    /// invariance this covers every stopping set that stays clear of the
    /// boundaries.
    Interior,
    /// `Interior` plus every payload position within `W + M` of either edge.
    InteriorAndBoundary,
    /// Every stream at every payload position in the range.
    Window(Range<usize>),
    Anchors(Vec<VarId>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoppingSearchResult {
    /// A smallest stopping set containing an anchor, ascending, if one of
    /// size `<= max_size` exists.
    pub found: Option<Vec<VarId>>,
    /// No nonempty stopping set smaller than this contains an anchor.
    pub size_bound_proved: usize,
    pub nodes_expanded: u64,
    pub anchors: usize,
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub max_size: usize,
    pub scope: SearchScope,
    pub node_budget: u64,
}

impl SearchConfig {
    pub fn new(max_size: usize, scope: SearchScope) -> Self {
        SearchConfig {
            max_size,
            scope,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

pub fn anchors(graph: &TannerGraph, scope: &SearchScope) -> Result<Vec<VarId>> {
    let payload = graph.payload_positions();
    let n = graph.streams();
    let at = |stream, position| graph.var_id(Variable { stream, position }).unwrap();
    let mid = payload.start + graph.stream_len() / 2;
    let mut out: Vec<VarId> = match scope {
        SearchScope::Interior => (1..=n).map(|j| at(j, mid)).collect(),
        SearchScope::InteriorAndBoundary => {
            let margin = graph.seed_len() + graph.spec().memory() as usize;
            let mut v: Vec<VarId> = (1..=n).map(|j| at(j, mid)).collect();
            for j in 1..=n {
                for p in payload.clone() {
                    if p < payload.start + margin || p + margin >= payload.end {
                        v.push(at(j, p));
                    }
                }
            }
            v
        }
        SearchScope::Window(range) => {
            if range.start < payload.start || range.end > payload.end || range.is_empty() {
                return Err(Error::InvalidParameters(format!(
                    "window {range:?} is not a nonempty part of the payload {payload:?}"
                )));
            }
            (1..=n)
                .flat_map(|j| range.clone().map(move |p| (j, p)))
                .map(|(j, p)| at(j, p))
                .collect()
        }
        SearchScope::Anchors(v) => {
            for &a in v {
                graph.co_checks(a)?;
                if graph.is_seeded(a) {
                    return Err(Error::InvalidId(format!(
                        "anchor {:?} is not a payload variable",
                        graph.variable(a)
                    )));
                }
            }
            v.clone()
        }
    };
    let mut seen = std::collections::HashSet::new();
    out.retain(|v| seen.insert(*v));
    Ok(out)
}

/// Exhaustive search for a smallest stopping set of size at most
/// `config.max_size` containing one of the scope's anchors.
pub fn search_min_stopping_set(
    graph: &TannerGraph,
    config: &SearchConfig,
) -> Result<StoppingSearchResult> {
    if config.max_size == 0 {
        return Err(Error::InvalidParameters("max_size must be >= 1".into()));
    }
    let anchors = anchors(graph, &config.scope)?;
    let outcomes: Vec<AnchorOutcome> = (0..anchors.len())
        .into_par_iter()
        .map(|i| {
            let mut s = Search::new(graph, config.max_size, config.node_budget);
            for &earlier in &anchors[..i] {
                s.forbidden[earlier.index()] = true;
            }
            s.run(anchors[i])
        })
        .collect();

    let mut nodes = 0;
    let mut best: Option<Vec<VarId>> = None;
    for o in outcomes {
        nodes += o.nodes;
        if o.exhausted {
            return Err(Error::BudgetExceeded(format!(
                "more than {} nodes from a single anchor",
                config.node_budget
            )));
        }
        if let Some(set) = o.found {
            if best.as_ref().is_none_or(|b| set.len() < b.len()) {
                best = Some(set);
            }
        }
    }
    let size_bound_proved = best.as_ref().map_or(config.max_size + 1, Vec::len);
    Ok(StoppingSearchResult {
        found: best,
        size_bound_proved,
        nodes_expanded: nodes,
        anchors: anchors.len(),
    })
}

struct AnchorOutcome {
    found: Option<Vec<VarId>>,
    nodes: u64,
    exhausted: bool,
}

struct Search<'g> {
    graph: &'g TannerGraph,
    members: Vec<VarId>,
    in_set: Vec<bool>,
    forbidden: Vec<bool>,
    count: Vec<u8>,
    /// Largest set size still worth exploring.
    limit: usize,
    budget: u64,
    nodes: u64,
    exhausted: bool,
    best: Option<Vec<VarId>>,
}

impl<'g> Search<'g> {
    fn new(graph: &'g TannerGraph, max_size: usize, budget: u64) -> Self {
        Search {
            graph,
            members: Vec::with_capacity(max_size),
            in_set: vec![false; graph.num_variables()],
            forbidden: vec![false; graph.num_variables()],
            count: vec![0; graph.num_checks()],
            limit: max_size,
            budget,
            nodes: 0,
            exhausted: false,
            best: None,
        }
    }

    fn run(mut self, anchor: VarId) -> AnchorOutcome {
        self.push(anchor);
        self.expand();
        AnchorOutcome {
            found: self.best,
            nodes: self.nodes,
            exhausted: self.exhausted,
        }
    }

    fn push(&mut self, v: VarId) {
        self.members.push(v);
        self.in_set[v.index()] = true;
        for &c in self.graph.cochecks(v) {
            self.count[c.index()] += 1;
        }
    }

    fn pop(&mut self) {
        let v = self.members.pop().unwrap();
        self.in_set[v.index()] = false;
        for &c in self.graph.cochecks(v) {
            self.count[c.index()] -= 1;
        }
    }

    fn candidates(&self, c: CheckId) -> impl Iterator<Item = VarId> + '_ {
        self.graph.nbrs(c).iter().copied().filter(move |&v| {
            !self.in_set[v.index()] && !self.forbidden[v.index()] && !self.graph.is_seeded(v)
        })
    }

    fn expand(&mut self) {
        if self.exhausted {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return;
        }
        // Fail-first: the violated check with the fewest extensions.
        let mut violated = 0usize;
        let mut pick: Option<(usize, CheckId)> = None;
        for &v in &self.members {
            for &c in self.graph.cochecks(v) {
                if self.count[c.index()] == 1 {
                    violated += 1;
                    let options = self.candidates(c).count();
                    if pick.is_none_or(|(best, _)| options < best) {
                        pick = Some((options, c));
                    }
                }
            }
        }
        let Some((options, check)) = pick else {
            let mut set = self.members.clone();
            set.sort_unstable();
            self.limit = set.len() - 1;
            self.best = Some(set);
            return;
        };
        if options == 0 {
            return;
        }
        // Every violated check needs a new member, each new member covers at
        // most n - k checks.
        let per_member = self.graph.spec().checks();
        if self.members.len() + violated.div_ceil(per_member) > self.limit {
            return;
        }
        let branch: Vec<VarId> = self.candidates(check).collect();
        for &x in &branch {
            if self.members.len() + 1 > self.limit {
                break;
            }
            self.push(x);
            self.expand();
            self.pop();
            if self.exhausted {
                break;
            }
            self.forbidden[x.index()] = true;
        }
        for &x in &branch {
            self.forbidden[x.index()] = false;
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SampledStoppingSets {
    /// Sizes of the nonempty residuals, in trial order.
    pub sizes: Vec<usize>,
    /// The smallest nonempty residual seen (first one on ties).
    pub smallest: Option<Vec<VarId>>,
}

impl SampledStoppingSets {
    /// An upper bound on the minimum stopping-set size of the code.
    pub fn min_size(&self) -> Option<usize> {
        self.sizes.iter().copied().min()
    }
}

/// Peel `trials` random patterns; trial `t` uses the channel sub-seed
/// `derive(seed, "channel", t)`.
pub fn sample_stopping_sets(
    graph: &TannerGraph,
    epsilon: f64,
    trials: usize,
    seed: u64,
) -> Result<SampledStoppingSets> {
    crate::channel::check_epsilon(epsilon)?;
    let residuals: Vec<Vec<VarId>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let p =
                ErasurePattern::erase(graph, epsilon, seed::derive(seed, seed::tag::CHANNEL, t))
                    .expect("epsilon checked");
            peel(graph, &p).residual
        })
        .collect();
    let mut out = SampledStoppingSets::default();
    for r in residuals.into_iter().filter(|r| !r.is_empty()) {
        out.sizes.push(r.len());
        if out.smallest.as_ref().is_none_or(|s| r.len() < s.len()) {
            out.smallest = Some(r);
        }
    }
    Ok(out)
}
