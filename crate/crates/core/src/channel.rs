//! Binary erasure channel over the payload region.
//!
//! The all-zero codeword is assumed, so only the erased/known flag of each
//! variable is kept.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::seed;
use crate::tanner::{TannerGraph, VarId};

#[derive(Debug, Clone, PartialEq)]
pub struct ErasurePattern {
    erased: Vec<bool>,
    count: usize,
    epsilon: f64,
    seed: Option<u64>,
}

pub fn check_epsilon(epsilon: f64) -> Result<()> {
    if (0.0..=1.0).contains(&epsilon) {
        Ok(())
    } else {
        Err(Error::InvalidEpsilon(epsilon))
    }
}

impl ErasurePattern {
    /// Erase each payload variable independently with probability `epsilon`.
    /// Payload variables are visited in id order, one Bernoulli draw each.
    pub fn erase(graph: &TannerGraph, epsilon: f64, seed: u64) -> Result<Self> {
        check_epsilon(epsilon)?;
        let mut rng = seed::rng(seed);
        let mut erased = vec![false; graph.num_variables()];
        let mut count = 0;
        for v in graph.payload_vars() {
            if rng.random_bool(epsilon) {
                erased[v.index()] = true;
                count += 1;
            }
        }
        Ok(ErasurePattern {
            erased,
            count,
            epsilon,
            seed: Some(seed),
        })
    }

    /// A pattern with exactly the given payload variables erased.
    pub fn from_erased(graph: &TannerGraph, vars: impl IntoIterator<Item = VarId>) -> Result<Self> {
        let mut erased = vec![false; graph.num_variables()];
        let mut count = 0;
        for v in vars {
            if v.index() >= erased.len() {
                return Err(Error::InvalidId(format!(
                    "variable id {} out of range",
                    v.0
                )));
            }
            if graph.is_seeded(v) {
                return Err(Error::InvalidId(format!(
                    "variable {:?} is seeded and cannot be erased",
                    graph.variable(v)
                )));
            }
            if !erased[v.index()] {
                erased[v.index()] = true;
                count += 1;
            }
        }
        Ok(ErasurePattern {
            erased,
            count,
            epsilon: f64::NAN,
            seed: None,
        })
    }

    /// Every payload variable erased.
    pub fn all_payload(graph: &TannerGraph) -> Self {
        let mut p = Self::from_erased(graph, graph.payload_vars()).unwrap();
        p.epsilon = 1.0;
        p
    }

    #[inline]
    pub fn is_erased(&self, v: VarId) -> bool {
        self.erased[v.index()]
    }

    pub fn erased_count(&self) -> usize {
        self.count
    }

    pub fn num_variables(&self) -> usize {
        self.erased.len()
    }

    pub fn erased_vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.erased
            .iter()
            .enumerate()
            .filter(|(_, &e)| e)
            .map(|(i, _)| VarId(i as u32))
    }

    /// Channel parameter, NaN for hand-built patterns.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub(crate) fn flags(&self) -> &[bool] {
        &self.erased
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::CodeSpec;
    use crate::tanner::Variable;

    fn graph(n: usize, k: usize, w: u32, len: usize) -> TannerGraph {
        TannerGraph::build(&CodeSpec::sample(n, k, w, 1).unwrap(), len).unwrap()
    }

    #[test]
    fn extremes() {
        let g = graph(4, 2, 5, 30);
        let none = ErasurePattern::erase(&g, 0.0, 3).unwrap();
        assert_eq!(none.erased_count(), 0);
        let all = ErasurePattern::erase(&g, 1.0, 3).unwrap();
        assert_eq!(all.erased_count(), g.payload_count());
        for v in (0..g.num_variables() as u32).map(VarId) {
            assert_eq!(all.is_erased(v), !g.is_seeded(v));
        }
        assert_eq!(all, {
            let mut p = ErasurePattern::all_payload(&g);
            p.seed = Some(3);
            p
        });
    }

    #[test]
    fn rejects_bad_epsilon() {
        let g = graph(3, 1, 5, 10);
        for eps in [-0.1, 1.5, f64::NAN] {
            assert!(matches!(
                ErasurePattern::erase(&g, eps, 0),
                Err(Error::InvalidEpsilon(_))
            ));
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let g = graph(4, 2, 9, 100);
        let a = ErasurePattern::erase(&g, 0.4, 77).unwrap();
        assert_eq!(a, ErasurePattern::erase(&g, 0.4, 77).unwrap());
        assert_ne!(a, ErasurePattern::erase(&g, 0.4, 78).unwrap());
    }

    #[test]
    fn erasure_count_concentrates() {
        let g = graph(6, 3, 20, 10_000);
        let p = ErasurePattern::erase(&g, 0.3, 5).unwrap();
        let n = 60_000f64;
        let sigma = (n * 0.3 * 0.7).sqrt();
        assert!((p.erased_count() as f64 - n * 0.3).abs() < 4.0 * sigma);
    }

    #[test]
    fn erasure_counts_fit_binomial() {
        // Chi-square goodness of fit of 10^4 erasure counts against
        // Binomial(200, 0.3), bins merged so every expected count is >= 5.
        let g = graph(2, 1, 3, 100);
        let size = g.payload_count() as u64;
        let eps = 0.3;
        let draws = 10_000;
        let mut observed = vec![0f64; size as usize + 1];
        for s in 0..draws {
            observed[ErasurePattern::erase(&g, eps, s).unwrap().erased_count()] += 1.0;
        }
        let ln_fact = |m: u64| (1..=m).map(|i| (i as f64).ln()).sum::<f64>();
        let pmf = |x: u64| {
            (ln_fact(size) - ln_fact(x) - ln_fact(size - x)
                + x as f64 * eps.ln()
                + (size - x) as f64 * (1.0 - eps).ln())
            .exp()
        };
        let mut bins: Vec<(f64, f64)> = Vec::new();
        let (mut o, mut e) = (0.0, 0.0);
        for x in 0..=size {
            o += observed[x as usize];
            e += pmf(x) * draws as f64;
            if e >= 5.0 {
                bins.push((o, e));
                o = 0.0;
                e = 0.0;
            }
        }
        // fold the thin right tail into the last full bin
        let last = bins.last_mut().unwrap();
        last.0 += o;
        last.1 += e;
        let chi2: f64 = bins.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
        let dof = bins.len() - 1;
        // Upper 10^-3 quantile via the Wilson-Hilferty approximation.
        let k = dof as f64;
        let z = 3.090_232;
        let crit = k * (1.0 - 2.0 / (9.0 * k) + z * (2.0 / (9.0 * k)).sqrt()).powi(3);
        assert!(chi2 < crit, "chi2 {chi2} dof {dof} crit {crit}");
    }

    #[test]
    fn hand_built_patterns() {
        let g = graph(2, 1, 3, 10);
        let v = g
            .var_id(Variable {
                stream: 1,
                position: 5,
            })
            .unwrap();
        let p = ErasurePattern::from_erased(&g, [v, v]).unwrap();
        assert_eq!(p.erased_count(), 1);
        assert_eq!(p.erased_vars().collect::<Vec<_>>(), vec![v]);
        let seeded = g
            .var_id(Variable {
                stream: 1,
                position: 0,
            })
            .unwrap();
        assert!(ErasurePattern::from_erased(&g, [seeded]).is_err());
        assert!(ErasurePattern::from_erased(&g, [VarId(10_000)]).is_err());
    }
}
