//! Staircase encodability and sequential encoding.
//!
//! Streams `1..=n-k` carry parity, the last `k` streams carry information.
//! Each parity stream is solved by one check type. Parity bits are computed
//! in ascending position order and, within a position, by ascending stream;
//! an assignment of check types to parity streams is usable iff every other
//! parity tap of the solving check is already known at that time:
//!
//! ```text
//! check assigned to stream i, solved tap o_i = d[check][i]
//! for every other parity stream j: d[check][j] < o_i, or d[check][j] == o_i and j < i
//! ```

use itertools::Itertools;
use rand::Rng as _;

use crate::code::CodeSpec;
use crate::error::{Error, Result};
use crate::seed;
use crate::tanner::{CheckId, CheckInstance, TannerGraph};

/// Bijection between check types and parity streams (both 0-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodeOrder {
    check_to_stream: Vec<usize>,
    stream_to_check: Vec<usize>,
}

impl EncodeOrder {
    /// `check_to_stream[i]` is the 0-based parity stream solved by check type `i`.
    pub fn new(spec: &CodeSpec, check_to_stream: Vec<usize>) -> Result<Self> {
        let c = spec.checks();
        if check_to_stream.len() != c || !check_to_stream.iter().copied().sorted().eq(0..c) {
            return Err(Error::InvalidParameters(format!(
                "{check_to_stream:?} is not a permutation of 0..{c}"
            )));
        }
        let mut stream_to_check = vec![0; c];
        for (check, &stream) in check_to_stream.iter().enumerate() {
            stream_to_check[stream] = check;
        }
        let order = EncodeOrder {
            check_to_stream,
            stream_to_check,
        };
        if !order.is_causal(spec) {
            return Err(Error::InvalidParameters(format!(
                "assignment {:?} is not causal",
                order.check_to_stream
            )));
        }
        Ok(order)
    }

    pub fn check_to_stream(&self) -> &[usize] {
        &self.check_to_stream
    }

    pub fn stream_to_check(&self) -> &[usize] {
        &self.stream_to_check
    }

    fn is_causal(&self, spec: &CodeSpec) -> bool {
        causal(spec, &self.check_to_stream)
    }
}

fn causal(spec: &CodeSpec, check_to_stream: &[usize]) -> bool {
    let c = spec.checks();
    check_to_stream.iter().enumerate().all(|(check, &i)| {
        let solved = spec.delay(check, i);
        (0..c).filter(|&j| j != i).all(|j| {
            let o = spec.delay(check, j);
            o < solved || (o == solved && j < i)
        })
    })
}

/// Lexicographically first causal assignment, if any.
pub fn find_staircase(spec: &CodeSpec) -> Option<EncodeOrder> {
    let c = spec.checks();
    (0..c)
        .permutations(c)
        .find(|perm| causal(spec, perm))
        .map(|perm| EncodeOrder::new(spec, perm).expect("causal permutation"))
}

/// What happens to parity bits in the seeded zones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Termination {
    /// Seeded bits are zero; a check whose solved tap falls in a seeded zone
    /// must already be satisfied, otherwise encoding fails.
    #[default]
    Seeded,
    /// Parity bits in the seeded zones are computed like payload bits, so
    /// every check holds for any information word. Seeded positions of parity
    /// streams may then be nonzero.
    Open,
}

/// Encode `info` into a full assignment indexed by variable id.
///
/// `info` holds the payload bits of the information streams, stream-major
/// (stream `n-k+1` first), `k * L` entries of 0 or 1.
pub fn encode(
    graph: &TannerGraph,
    order: &EncodeOrder,
    info: &[u8],
    termination: Termination,
) -> Result<Vec<u8>> {
    let spec = graph.spec();
    let (n, c) = (spec.n(), spec.checks());
    let len = graph.stream_len();
    if info.len() != spec.k() * len {
        return Err(Error::InvalidParameters(format!(
            "expected {} information bits, got {}",
            spec.k() * len,
            info.len()
        )));
    }
    if !order.is_causal(spec) || order.check_to_stream.len() != c {
        return Err(Error::InvalidParameters(
            "encode order does not fit this code".into(),
        ));
    }
    let positions = graph.positions_per_stream();
    let payload = graph.payload_positions();
    let mut word = vec![0u8; graph.num_variables()];
    for (t, chunk) in info.chunks_exact(len).enumerate() {
        let base = (c + t) * positions + payload.start;
        for (slot, &bit) in word[base..base + len].iter_mut().zip(chunk) {
            *slot = bit & 1;
        }
    }

    for p in 0..positions {
        for i in 0..c {
            let check = order.stream_to_check[i];
            let shift = p as i64 - i64::from(spec.delay(check, i));
            let Ok(id) = graph.check_id(CheckInstance {
                check_type: check,
                shift,
            }) else {
                continue;
            };
            let target = i * positions + p;
            let bit = graph
                .nbrs(id)
                .iter()
                .filter(|v| v.index() != target)
                .fold(0u8, |acc, v| acc ^ word[v.index()]);
            if payload.contains(&p) || termination == Termination::Open {
                word[target] = bit;
            } else if bit != 0 {
                return Err(Error::InconsistentBoundary {
                    check_type: check,
                    shift,
                });
            }
        }
    }
    debug_assert_eq!(word.len(), n * positions);
    Ok(word)
}

/// Checks whose neighbors XOR to one.
pub fn unsatisfied_checks(graph: &TannerGraph, word: &[u8]) -> Vec<CheckId> {
    (0..graph.num_checks() as u32)
        .map(CheckId)
        .filter(|&c| graph.nbrs(c).iter().fold(0u8, |a, v| a ^ word[v.index()]) & 1 == 1)
        .collect()
}

/// Uniform random information bits for `graph`.
pub fn random_info(graph: &TannerGraph, seed: u64) -> Vec<u8> {
    let mut rng = seed::rng(seed);
    (0..graph.spec().k() * graph.stream_len())
        .map(|_| u8::from(rng.random_bool(0.5)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ErasurePattern;
    use crate::decode::{peel, peel_values};
    use crate::tanner::Variable;

    fn spec(n: usize, k: usize, w: u32, rows: &[Vec<u32>]) -> CodeSpec {
        CodeSpec::new(n, k, w, rows).unwrap()
    }

    #[test]
    fn single_check_always_staircase() {
        for s in 0..50 {
            let c = CodeSpec::sample(5, 4, 30, s).unwrap();
            assert_eq!(find_staircase(&c).unwrap().check_to_stream(), &[0]);
        }
    }

    #[test]
    fn staircase_examples() {
        let ok = spec(4, 2, 6, &[vec![5, 0, 2, 2], vec![1, 3, 0, 4]]);
        assert_eq!(find_staircase(&ok).unwrap().check_to_stream(), &[0, 1]);
        let tied = spec(4, 2, 6, &[vec![0, 0, 1, 2], vec![0, 0, 3, 4]]);
        assert!(find_staircase(&tied).is_none());
        assert!(EncodeOrder::new(&tied, vec![0, 1]).is_err());
        assert!(EncodeOrder::new(&ok, vec![0, 0]).is_err());
        // The first permutation fails, the swapped one works.
        let swapped = spec(4, 2, 6, &[vec![0, 3, 1, 1], vec![4, 2, 1, 1]]);
        assert_eq!(find_staircase(&swapped).unwrap().check_to_stream(), &[1, 0]);
    }

    #[test]
    fn staircase_ignores_information_columns() {
        for s in 0..200 {
            let c = CodeSpec::sample(6, 3, 20, s).unwrap();
            let permuted: Vec<Vec<u32>> = c
                .rows()
                .map(|r| vec![r[0], r[1], r[2], r[5], r[3], r[4]])
                .collect();
            let p = CodeSpec::new(6, 3, 20, &permuted).unwrap();
            assert_eq!(find_staircase(&c), find_staircase(&p));
        }
    }

    #[test]
    fn zero_info_is_zero_codeword() {
        let (c, order) = (0..100)
            .map(|s| CodeSpec::sample(6, 3, 15, s).unwrap())
            .find_map(|c| find_staircase(&c).map(|o| (c, o)))
            .expect("no staircase code in 100 draws");
        let g = TannerGraph::build(&c, 60).unwrap();
        let word = encode(&g, &order, &[0; 3 * 60], Termination::Seeded).unwrap();
        assert!(word.iter().all(|&b| b == 0));
        assert!(unsatisfied_checks(&g, &word).is_empty());
    }

    #[test]
    fn single_info_bit_on_chain() {
        // x1[s] = x2[s + 2]: parity copies info two positions later.
        let c = spec(2, 1, 3, &[vec![0, 2]]);
        let g = TannerGraph::build(&c, 20).unwrap();
        let order = find_staircase(&c).unwrap();
        let mut info = vec![0u8; 20];
        info[10] = 1; // position 13
        let word = encode(&g, &order, &info, Termination::Seeded).unwrap();
        assert!(unsatisfied_checks(&g, &word).is_empty());
        let ones: Vec<Variable> = (0..word.len())
            .filter(|&i| word[i] == 1)
            .map(|i| g.variable(crate::tanner::VarId(i as u32)))
            .collect();
        assert_eq!(
            ones,
            vec![
                Variable {
                    stream: 1,
                    position: 11
                },
                Variable {
                    stream: 2,
                    position: 13
                }
            ]
        );
    }

    #[test]
    fn seeded_boundary_violation_is_reported() {
        // The first information bit is pinned by a check whose parity tap is seeded.
        let c = spec(2, 1, 3, &[vec![0, 2]]);
        let g = TannerGraph::build(&c, 20).unwrap();
        let order = find_staircase(&c).unwrap();
        let mut info = vec![0u8; 20];
        info[0] = 1;
        assert!(matches!(
            encode(&g, &order, &info, Termination::Seeded),
            Err(Error::InconsistentBoundary {
                check_type: 0,
                shift: 1
            })
        ));
        let word = encode(&g, &order, &info, Termination::Open).unwrap();
        assert!(unsatisfied_checks(&g, &word).is_empty());
        assert!(encode(&g, &order, &[0; 3], Termination::Open).is_err());
    }

    #[test]
    fn open_termination_is_valid_and_linear() {
        let mut done = 0;
        for s in 0..400 {
            let c = CodeSpec::sample(5, 2, 12, s).unwrap();
            let Some(order) = find_staircase(&c) else {
                continue;
            };
            let g = TannerGraph::build(&c, 40).unwrap();
            let a = random_info(&g, s);
            let b = random_info(&g, s + 1000);
            let ab: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
            let wa = encode(&g, &order, &a, Termination::Open).unwrap();
            let wb = encode(&g, &order, &b, Termination::Open).unwrap();
            let wab = encode(&g, &order, &ab, Termination::Open).unwrap();
            assert!(unsatisfied_checks(&g, &wa).is_empty());
            let sum: Vec<u8> = wa.iter().zip(&wb).map(|(x, y)| x ^ y).collect();
            assert_eq!(wab, sum);
            done += 1;
        }
        assert!(done > 20, "{done}");
    }

    #[test]
    fn encode_then_decode() {
        let (c, order) = (0..)
            .map(|s| CodeSpec::sample(6, 3, 20, s).unwrap())
            .find_map(|c| find_staircase(&c).map(|o| (c, o)))
            .unwrap();
        let g = TannerGraph::build(&c, 200).unwrap();
        let word = encode(&g, &order, &random_info(&g, 9), Termination::Open).unwrap();
        let none = ErasurePattern::erase(&g, 0.0, 0).unwrap();
        let r = peel(&g, &none);
        assert!(r.success && r.residual.is_empty());

        let pattern = ErasurePattern::erase(&g, 0.3, 4).unwrap();
        let mut received = word.clone();
        for v in pattern.erased_vars() {
            received[v.index()] = 0;
        }
        let r = peel_values(&g, &pattern, &mut received);
        assert!(r.success);
        assert_eq!(received, word);
    }
}
