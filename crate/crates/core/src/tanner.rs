//! Terminated Tanner graph of a code template.
//!
//! Each of the `n` streams carries `L` payload variables with `W` known-zero
//! (seeded) variables on either side, so positions run over `0..L + 2W`.
//! Check instance `(i, s)` touches `(j, s + d[i][j])` for every stream `j`;
//! a shift is kept only when every tap lands inside the padded range.
//!
//! Adjacency is stored as flat arrays: check-major (exactly `n` neighbors per
//! check) and variable-major (CSR).

use std::fmt::Write as _;
use std::ops::Range;

use crate::code::CodeSpec;
use crate::error::{Error, Result};

/// Default cap on `n * (L + 2W)`.
pub const DEFAULT_VARIABLE_BUDGET: usize = 1 << 28;

/// Flat variable index: `(stream - 1) * (L + 2W) + position`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub u32);

/// Flat check-instance index; check types occupy contiguous ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CheckId(pub u32);

impl VarId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl CheckId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A variable by coordinates. Streams are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variable {
    pub stream: usize,
    pub position: usize,
}

/// A check by template (0-based type) and shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CheckInstance {
    pub check_type: usize,
    pub shift: i64,
}

#[derive(Debug, Clone)]
pub struct TannerGraph {
    spec: CodeSpec,
    stream_len: usize,
    positions: usize,
    /// `type_start[i]..type_start[i + 1]` are the check ids of type `i`.
    type_start: Vec<u32>,
    /// Smallest kept shift per type.
    first_shift: Vec<i64>,
    check_nbrs: Vec<VarId>,
    var_start: Vec<u32>,
    var_checks: Vec<CheckId>,
}

impl TannerGraph {
    pub fn build(spec: &CodeSpec, stream_len: usize) -> Result<Self> {
        Self::build_with_budget(spec, stream_len, DEFAULT_VARIABLE_BUDGET)
    }

    pub fn build_with_budget(spec: &CodeSpec, stream_len: usize, budget: usize) -> Result<Self> {
        if stream_len == 0 {
            return Err(Error::InvalidParameters(
                "stream length must be >= 1".into(),
            ));
        }
        let n = spec.n();
        let w = spec.w() as usize;
        let positions = stream_len
            .checked_add(2 * w)
            .ok_or_else(|| Error::ResourceLimit("stream length overflows".into()))?;
        let num_vars = n
            .checked_mul(positions)
            .filter(|&v| v <= budget && v < u32::MAX as usize)
            .ok_or_else(|| {
                Error::ResourceLimit(format!(
                    "{n} x {positions} variables exceeds the budget of {budget}"
                ))
            })?;

        let c = spec.checks();
        let mut type_start = Vec::with_capacity(c + 1);
        let mut first_shift = Vec::with_capacity(c);
        let mut total = 0usize;
        type_start.push(0);
        for i in 0..c {
            let row = spec.row(i);
            let lo = *row.iter().min().unwrap() as usize;
            let hi = *row.iter().max().unwrap() as usize;
            // shifts -lo ..= positions - 1 - hi
            first_shift.push(-(lo as i64));
            total += positions - (hi - lo);
            type_start.push(total as u32);
        }
        if total
            .checked_mul(n)
            .is_none_or(|edges| edges >= u32::MAX as usize)
        {
            return Err(Error::ResourceLimit("edge count overflows u32".into()));
        }

        let mut check_nbrs = Vec::with_capacity(total * n);
        let mut degree = vec![0u32; num_vars];
        for i in 0..c {
            let count = (type_start[i + 1] - type_start[i]) as i64;
            for s in first_shift[i]..first_shift[i] + count {
                for j in 0..n {
                    let p = (s + i64::from(spec.delay(i, j))) as usize;
                    let v = j * positions + p;
                    check_nbrs.push(VarId(v as u32));
                    degree[v] += 1;
                }
            }
        }

        let mut var_start = Vec::with_capacity(num_vars + 1);
        let mut acc = 0u32;
        var_start.push(0);
        for d in &degree {
            acc += d;
            var_start.push(acc);
        }
        let mut fill: Vec<u32> = var_start[..num_vars].to_vec();
        let mut var_checks = vec![CheckId(0); acc as usize];
        for (ci, nbrs) in check_nbrs.chunks_exact(n).enumerate() {
            for v in nbrs {
                let slot = &mut fill[v.index()];
                var_checks[*slot as usize] = CheckId(ci as u32);
                *slot += 1;
            }
        }

        Ok(TannerGraph {
            spec: spec.clone(),
            stream_len,
            positions,
            type_start,
            first_shift,
            check_nbrs,
            var_start,
            var_checks,
        })
    }

    pub fn spec(&self) -> &CodeSpec {
        &self.spec
    }

    /// Payload variables per stream, `L`.
    pub fn stream_len(&self) -> usize {
        self.stream_len
    }

    /// Seeded variables on each side of a stream, `W`.
    pub fn seed_len(&self) -> usize {
        self.spec.w() as usize
    }

    /// `L + 2W`.
    pub fn positions_per_stream(&self) -> usize {
        self.positions
    }

    pub fn streams(&self) -> usize {
        self.spec.n()
    }

    pub fn num_variables(&self) -> usize {
        self.spec.n() * self.positions
    }

    pub fn num_checks(&self) -> usize {
        *self.type_start.last().unwrap() as usize
    }

    pub fn num_edges(&self) -> usize {
        self.check_nbrs.len()
    }

    /// Number of instances of check type `i`.
    pub fn checks_of_type(&self, i: usize) -> usize {
        (self.type_start[i + 1] - self.type_start[i]) as usize
    }

    pub fn check_ids_of_type(&self, i: usize) -> impl Iterator<Item = CheckId> {
        (self.type_start[i]..self.type_start[i + 1]).map(CheckId)
    }

    /// Payload positions `W..L + W`.
    pub fn payload_positions(&self) -> Range<usize> {
        self.seed_len()..self.seed_len() + self.stream_len
    }

    /// Number of payload variables, `n * L`.
    pub fn payload_count(&self) -> usize {
        self.spec.n() * self.stream_len
    }

    pub fn payload_vars(&self) -> impl Iterator<Item = VarId> + '_ {
        let range = self.payload_positions();
        (0..self.spec.n()).flat_map(move |j| {
            range
                .clone()
                .map(move |p| VarId((j * self.positions + p) as u32))
        })
    }

    pub fn var_id(&self, v: Variable) -> Result<VarId> {
        if v.stream == 0 || v.stream > self.spec.n() || v.position >= self.positions {
            return Err(Error::InvalidId(format!(
                "variable ({}, {}) outside {} streams x {} positions",
                v.stream,
                v.position,
                self.spec.n(),
                self.positions
            )));
        }
        Ok(VarId(((v.stream - 1) * self.positions + v.position) as u32))
    }

    #[inline]
    pub fn variable(&self, id: VarId) -> Variable {
        Variable {
            stream: id.index() / self.positions + 1,
            position: id.index() % self.positions,
        }
    }

    #[inline]
    pub fn position(&self, id: VarId) -> usize {
        id.index() % self.positions
    }

    #[inline]
    pub fn is_seeded(&self, id: VarId) -> bool {
        !self.payload_positions().contains(&self.position(id))
    }

    pub fn check_instance(&self, id: CheckId) -> Result<CheckInstance> {
        self.validate_check(id)?;
        let t = self.type_start.partition_point(|&s| s <= id.0) - 1;
        Ok(CheckInstance {
            check_type: t,
            shift: self.first_shift[t] + i64::from(id.0 - self.type_start[t]),
        })
    }

    pub fn check_id(&self, inst: CheckInstance) -> Result<CheckId> {
        let t = inst.check_type;
        if t >= self.spec.checks() {
            return Err(Error::InvalidId(format!("check type {t} does not exist")));
        }
        let offset = inst.shift - self.first_shift[t];
        if offset < 0 || offset >= self.checks_of_type(t) as i64 {
            return Err(Error::InvalidId(format!(
                "check ({t}, {}) is not part of the terminated graph",
                inst.shift
            )));
        }
        Ok(CheckId(self.type_start[t] + offset as u32))
    }

    fn validate_check(&self, id: CheckId) -> Result<()> {
        if id.index() >= self.num_checks() {
            return Err(Error::InvalidId(format!("check id {} out of range", id.0)));
        }
        Ok(())
    }

    fn validate_var(&self, id: VarId) -> Result<()> {
        if id.index() >= self.num_variables() {
            return Err(Error::InvalidId(format!(
                "variable id {} out of range",
                id.0
            )));
        }
        Ok(())
    }

    /// Neighbors of a check, one per stream in ascending stream order.
    pub fn neighbors(&self, id: CheckId) -> Result<&[VarId]> {
        self.validate_check(id)?;
        Ok(self.nbrs(id))
    }

    /// Checks adjacent to a variable, ascending by id.
    pub fn co_checks(&self, id: VarId) -> Result<&[CheckId]> {
        self.validate_var(id)?;
        Ok(self.cochecks(id))
    }

    #[inline]
    pub(crate) fn nbrs(&self, id: CheckId) -> &[VarId] {
        let n = self.spec.n();
        &self.check_nbrs[id.index() * n..(id.index() + 1) * n]
    }

    #[inline]
    pub(crate) fn cochecks(&self, id: VarId) -> &[CheckId] {
        let i = id.index();
        &self.var_checks[self.var_start[i] as usize..self.var_start[i + 1] as usize]
    }

    /// Debug listing, one check per line: `c <type> <shift>: (j,p) ...`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for id in (0..self.num_checks() as u32).map(CheckId) {
            let inst = self.check_instance(id).unwrap();
            let _ = write!(out, "c {} {}:", inst.check_type, inst.shift);
            for &v in self.nbrs(id) {
                let var = self.variable(v);
                let _ = write!(out, " ({},{})", var.stream, var.position);
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::CodeSpec;
    use std::collections::BTreeSet;

    fn chain() -> TannerGraph {
        let spec = CodeSpec::new(2, 1, 3, &[vec![0, 2]]).unwrap();
        TannerGraph::build(&spec, 10).unwrap()
    }

    #[test]
    fn counts_on_small_chain() {
        let g = chain();
        assert_eq!(g.positions_per_stream(), 16);
        // shifts s with s and s + 2 both in 0..16
        let brute = (-20i64..40)
            .filter(|s| (0..16).contains(s) && (0..16).contains(&(s + 2)))
            .count();
        assert_eq!(brute, 14);
        assert_eq!(g.num_checks(), 14);
        let first = g.check_instance(CheckId(0)).unwrap();
        assert_eq!(
            first,
            CheckInstance {
                check_type: 0,
                shift: 0
            }
        );
        assert_eq!(g.check_instance(CheckId(13)).unwrap().shift, 13);
        assert!(g.check_instance(CheckId(14)).is_err());
    }

    #[test]
    fn zero_spread_keeps_all_shifts() {
        let spec = CodeSpec::new(3, 1, 9, &[vec![4, 4, 4], vec![0, 8, 3]]).unwrap();
        let g = TannerGraph::build(&spec, 7).unwrap();
        assert_eq!(g.checks_of_type(0), 7 + 18);
        assert_eq!(g.checks_of_type(1), 7 + 18 - 8);
        assert_eq!(g.check_instance(CheckId(0)).unwrap().shift, -4);
    }

    #[test]
    fn handshake_and_degrees() {
        let spec = CodeSpec::sample(5, 2, 20, 4).unwrap();
        let g = TannerGraph::build(&spec, 50).unwrap();
        let var_deg: usize = (0..g.num_variables() as u32)
            .map(|v| g.co_checks(VarId(v)).unwrap().len())
            .sum();
        assert_eq!(g.num_edges(), 5 * g.num_checks());
        assert_eq!(var_deg, g.num_edges());
        for c in 0..g.num_checks() as u32 {
            let nb = g.neighbors(CheckId(c)).unwrap();
            assert_eq!(nb.len(), 5);
            let streams: Vec<usize> = nb.iter().map(|&v| g.variable(v).stream).collect();
            assert_eq!(streams, vec![1, 2, 3, 4, 5]);
        }
    }

    #[test]
    fn adjacency_is_symmetric() {
        let spec = CodeSpec::sample(4, 2, 7, 11).unwrap();
        let g = TannerGraph::build(&spec, 15).unwrap();
        let mut from_checks = BTreeSet::new();
        for c in 0..g.num_checks() as u32 {
            for &v in g.neighbors(CheckId(c)).unwrap() {
                from_checks.insert((v, CheckId(c)));
            }
        }
        let mut from_vars = BTreeSet::new();
        for v in 0..g.num_variables() as u32 {
            for &c in g.co_checks(VarId(v)).unwrap() {
                from_vars.insert((VarId(v), c));
            }
        }
        assert_eq!(from_checks, from_vars);
    }

    #[test]
    fn payload_variables_see_every_check_type() {
        let spec = CodeSpec::sample(6, 3, 40, 2).unwrap();
        let g = TannerGraph::build(&spec, 100).unwrap();
        for v in g.payload_vars() {
            let types: BTreeSet<usize> = g
                .co_checks(v)
                .unwrap()
                .iter()
                .map(|&c| g.check_instance(c).unwrap().check_type)
                .collect();
            assert_eq!(g.co_checks(v).unwrap().len(), 3);
            assert_eq!(types.len(), 3);
        }
        let edge = g
            .var_id(Variable {
                stream: 1,
                position: 0,
            })
            .unwrap();
        assert!(g.co_checks(edge).unwrap().len() <= 3);
        assert!(g.is_seeded(edge));
    }

    #[test]
    fn interior_co_checks_on_chain() {
        let g = chain();
        let v = g
            .var_id(Variable {
                stream: 2,
                position: 8,
            })
            .unwrap();
        let cs = g.co_checks(v).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(g.check_instance(cs[0]).unwrap().shift, 6);
    }

    #[test]
    fn ids_round_trip_and_reject_garbage() {
        let g = chain();
        let v = Variable {
            stream: 2,
            position: 5,
        };
        assert_eq!(g.variable(g.var_id(v).unwrap()), v);
        assert!(g
            .var_id(Variable {
                stream: 0,
                position: 0
            })
            .is_err());
        assert!(g
            .var_id(Variable {
                stream: 3,
                position: 0
            })
            .is_err());
        assert!(g
            .var_id(Variable {
                stream: 1,
                position: 16
            })
            .is_err());
        assert!(g.neighbors(CheckId(99)).is_err());
        assert!(g.co_checks(VarId(32)).is_err());
        let inst = CheckInstance {
            check_type: 0,
            shift: 5,
        };
        assert_eq!(g.check_instance(g.check_id(inst).unwrap()).unwrap(), inst);
        assert!(g
            .check_id(CheckInstance {
                check_type: 0,
                shift: 14
            })
            .is_err());
        assert!(g
            .check_id(CheckInstance {
                check_type: 1,
                shift: 0
            })
            .is_err());
    }

    #[test]
    fn budget_is_enforced() {
        let spec = CodeSpec::sample(6, 3, 10, 0).unwrap();
        assert!(matches!(
            TannerGraph::build_with_budget(&spec, 1000, 1000),
            Err(Error::ResourceLimit(_))
        ));
        assert!(TannerGraph::build(&spec, 0).is_err());
    }

    #[test]
    fn dump_format() {
        let g = chain();
        let dump = g.dump();
        assert_eq!(dump.lines().count(), 14);
        assert_eq!(dump.lines().next().unwrap(), "c 0 0: (1,0) (2,2)");
    }

    /// Radius-2 neighborhood of a variable, translated so the root sits at 0.
    fn neighborhood(g: &TannerGraph, v: VarId) -> BTreeSet<(usize, usize, i64, usize, i64)> {
        let root = g.position(v) as i64;
        let mut out = BTreeSet::new();
        for &c in g.co_checks(v).unwrap() {
            let inst = g.check_instance(c).unwrap();
            for &u in g.neighbors(c).unwrap() {
                for &c2 in g.co_checks(u).unwrap() {
                    let inst2 = g.check_instance(c2).unwrap();
                    for &x in g.neighbors(c2).unwrap() {
                        let var = g.variable(x);
                        out.insert((
                            inst.check_type,
                            inst2.check_type,
                            inst2.shift - root,
                            var.stream,
                            var.position as i64 - root,
                        ));
                    }
                }
            }
        }
        out
    }

    #[test]
    fn shift_invariance_in_the_interior() {
        let spec = CodeSpec::sample(4, 2, 12, 5).unwrap();
        let g = TannerGraph::build(&spec, 200).unwrap();
        let margin = 12 + spec.memory() as usize * 3;
        let lo = g.payload_positions().start + margin;
        let hi = g.payload_positions().end - margin;
        for stream in 1..=4 {
            let base = neighborhood(
                &g,
                g.var_id(Variable {
                    stream,
                    position: lo,
                })
                .unwrap(),
            );
            for p in [lo + 1, lo + 17, hi - 1] {
                let other = neighborhood(
                    &g,
                    g.var_id(Variable {
                        stream,
                        position: p,
                    })
                    .unwrap(),
                );
                assert_eq!(base, other);
            }
        }
    }
}
