//! Variable elimination and mini-bucket elimination with execution traces.
//!
//! Input factor `k` is taken to be the CPT of variable `k` whenever a trace
//! is interpreted against a network (bases, node splitting).

mod trace;

pub use trace::{FactorRef, Iteration, Subtrace, Trace};

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::factor::{Factor, Op};
use crate::graph::{min_fill_order, UndirectedGraph};
use crate::model::{Instantiation, Network};
use crate::VarId;

/// Result of an elimination run.
#[derive(Clone, Debug)]
pub struct Elimination {
    /// Log of the product of all remaining factors.
    pub value: f64,
    pub trace: Trace,
    /// One maximizer of the variables that were eliminated (VE with max only).
    pub argmax: Option<Instantiation>,
}

/// Chooses the mini-bucket processed next when eliminating `var`.
///
/// `bucket` lists the scopes of all live factors mentioning `var` in
/// creation order; the rule returns a non-empty set of indices into it.
pub trait MiniBucketRule {
    fn select(&mut self, var: VarId, bucket: &[&[VarId]]) -> Vec<usize>;
}

/// Scans the bucket in creation order and adds every factor that keeps the
/// union scope within `ibound` variables. The first factor always opens the
/// mini-bucket, even if it alone exceeds the bound.
#[derive(Clone, Copy, Debug)]
pub struct GreedyScope {
    pub ibound: usize,
}

impl MiniBucketRule for GreedyScope {
    fn select(&mut self, _var: VarId, bucket: &[&[VarId]]) -> Vec<usize> {
        let mut chosen = vec![0];
        let mut scope: BTreeSet<VarId> = bucket[0].iter().copied().collect();
        for (k, s) in bucket.iter().enumerate().skip(1) {
            let extra = s.iter().filter(|v| !scope.contains(v)).count();
            if scope.len() + extra <= self.ibound {
                scope.extend(s.iter().copied());
                chosen.push(k);
            }
        }
        chosen
    }
}

struct TakeAll;

impl MiniBucketRule for TakeAll {
    fn select(&mut self, _var: VarId, bucket: &[&[VarId]]) -> Vec<usize> {
        (0..bucket.len()).collect()
    }
}

struct Step {
    out_vars: Vec<VarId>,
    out_cards: Vec<usize>,
    argmax: Vec<usize>,
}

fn run(
    factors: &[Factor],
    order: &[VarId],
    op: Op,
    rule: &mut dyn MiniBucketRule,
    want_argmax: bool,
) -> Result<Elimination> {
    let in_order: BTreeSet<VarId> = order.iter().copied().collect();
    for f in factors {
        if let Some(&var) = f.vars().iter().find(|v| !in_order.contains(v)) {
            return Err(Error::OrderMissing { var });
        }
    }

    let mut trace = Trace {
        inputs: factors.iter().map(|f| f.vars().to_vec()).collect(),
        iterations: Vec::new(),
    };
    let mut constant = 0.0;
    let mut pool: Vec<Option<(Factor, FactorRef)>> = Vec::with_capacity(factors.len() * 2);
    for (k, f) in factors.iter().enumerate() {
        match f.scalar_value() {
            Some(v) => constant += v,
            None => pool.push(Some((f.clone(), FactorRef::Input(k)))),
        }
    }
    let mut steps: Vec<Step> = Vec::new();
    let mut eliminated = BTreeSet::new();

    for &x in order {
        if !eliminated.insert(x) {
            continue;
        }
        loop {
            let bucket: Vec<usize> = pool
                .iter()
                .enumerate()
                .filter_map(|(k, s)| s.as_ref().filter(|(f, _)| f.contains(x)).map(|_| k))
                .collect();
            if bucket.is_empty() {
                break;
            }
            let scopes: Vec<&[VarId]> = bucket
                .iter()
                .map(|&k| pool[k].as_ref().unwrap().0.vars())
                .collect();
            let mut chosen = rule.select(x, &scopes);
            chosen.sort_unstable();
            chosen.dedup();
            assert!(
                !chosen.is_empty() && *chosen.last().unwrap() < bucket.len(),
                "mini-bucket rule returned an invalid selection"
            );

            let mut selected = Vec::with_capacity(chosen.len());
            let mut product: Option<Factor> = None;
            for &c in &chosen {
                let (f, r) = pool[bucket[c]].take().unwrap();
                selected.push(r);
                product = Some(match product {
                    None => f,
                    Some(p) => p.multiply(&f)?,
                });
            }
            let product = product.unwrap();
            let produced = if want_argmax {
                let (f, arg) = product.max_out_with_argmax(x)?;
                steps.push(Step {
                    out_vars: f.vars().to_vec(),
                    out_cards: f.cards().to_vec(),
                    argmax: arg,
                });
                f
            } else {
                product.eliminate(x, op)?
            };
            let i = trace.iterations.len();
            trace.iterations.push(Iteration {
                var: x,
                selected,
                product_scope: product.vars().to_vec(),
                output_scope: produced.vars().to_vec(),
            });
            match produced.scalar_value() {
                Some(v) => constant += v,
                None => pool.push(Some((produced, FactorRef::Iteration(i)))),
            }
        }
    }
    debug_assert!(pool.iter().all(Option::is_none));

    let argmax = want_argmax.then(|| {
        let mut x = Instantiation::new();
        for (it, step) in trace.iterations.iter().zip(&steps).rev() {
            let mut idx = 0;
            for (v, c) in step.out_vars.iter().zip(&step.out_cards) {
                idx = idx * c + x.get(*v).expect("later variables are assigned first");
            }
            x.set(it.var, step.argmax[idx]);
        }
        x
    });
    Ok(Elimination {
        value: constant,
        trace,
        argmax,
    })
}

/// Exact variable elimination along `order`. With [`Op::Max`] the value is
/// the MPE probability and a maximizer is recovered; with [`Op::Sum`] it is
/// the probability of the evidence already incorporated in `factors`.
pub fn ve(factors: &[Factor], order: &[VarId], op: Op) -> Result<Elimination> {
    run(factors, order, op, &mut TakeAll, op == Op::Max)
}

/// Mini-bucket elimination with the greedy scope-bounded partition.
pub fn mbe(factors: &[Factor], order: &[VarId], ibound: usize, op: Op) -> Result<Elimination> {
    if ibound == 0 {
        return Err(Error::ZeroIbound);
    }
    run(factors, order, op, &mut GreedyScope { ibound }, false)
}

/// Mini-bucket elimination with a caller-supplied partition rule.
pub fn mbe_with(
    factors: &[Factor],
    order: &[VarId],
    op: Op,
    rule: &mut dyn MiniBucketRule,
) -> Result<Elimination> {
    run(factors, order, op, rule, false)
}

/// Min-fill order for an arbitrary factor set over variables `0..n`.
pub fn min_fill_for(factors: &[Factor], n: usize) -> Vec<VarId> {
    let g = UndirectedGraph::from_scopes(n, factors.iter().map(|f| f.vars()));
    let vars: BTreeSet<VarId> = factors.iter().flat_map(|f| f.vars().iter().copied()).collect();
    let vars: Vec<VarId> = vars.into_iter().collect();
    g.min_fill_order(&vars)
}

/// Exact query on a network with evidence along the min-fill order.
/// The returned argmax (max only) includes the evidence.
pub fn network_ve(net: &Network, e: &Instantiation, op: Op) -> Result<Elimination> {
    net.check_instantiation(e)?;
    let factors = net.conditioned_cpts(e);
    let order = min_fill_order(net);
    let mut out = ve(&factors, &order, op)?;
    if let Some(x) = out.argmax.as_mut() {
        *x = x.merged(e);
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::model::fixtures::{five_node, two_node};

    fn near(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn ve_two_node_max() {
        let net = two_node();
        let r = ve(net.cpts(), &[0, 1], Op::Max).unwrap();
        assert!(near(r.value, 0.56f64.ln()));
        assert_eq!(r.argmax.unwrap(), Instantiation::from_pairs([(0, 1), (1, 0)]));
        assert_eq!(r.trace.len(), 2);
    }

    #[test]
    fn ve_two_node_sum_with_evidence() {
        let net = two_node();
        let e = Instantiation::from_pairs([(1, 0)]);
        let r = network_ve(&net, &e, Op::Sum).unwrap();
        assert!(near(r.value, 0.58f64.ln()));
    }

    #[test]
    fn ve_single_node() {
        let net = Network::from_probs(&["X"], &[2], vec![vec![]], &[vec![0.3, 0.7]]).unwrap();
        let r = network_ve(&net, &Instantiation::new(), Op::Max).unwrap();
        assert!(near(r.value, 0.7f64.ln()));
        assert_eq!(r.argmax.unwrap().get(0), Some(1));
    }

    #[test]
    fn ve_rejects_incomplete_order() {
        let net = two_node();
        assert!(matches!(
            ve(net.cpts(), &[0], Op::Max),
            Err(Error::OrderMissing { var: 1 })
        ));
    }

    #[test]
    fn mbe_two_node_ibound_one() {
        let net = two_node();
        let r = mbe(net.cpts(), &[0, 1], 1, Op::Max).unwrap();
        assert!(near(r.value, 0.72f64.ln()));
        assert_eq!(r.trace.len(), 3);
        assert!(r.argmax.is_none());
    }

    #[test]
    fn mbe_two_node_ibound_two_is_exact() {
        let net = two_node();
        let r = mbe(net.cpts(), &[0, 1], 2, Op::Max).unwrap();
        assert!(near(r.value, 0.56f64.ln()));
        assert_eq!(r.trace.len(), 2);
    }

    #[test]
    fn mbe_zero_ibound() {
        assert_eq!(
            mbe(two_node().cpts(), &[0, 1], 0, Op::Max).unwrap_err(),
            Error::ZeroIbound
        );
    }

    #[test]
    fn two_node_bases() {
        let net = two_node();
        let r = mbe(net.cpts(), &[0, 1], 1, Op::Max).unwrap();
        let t = &r.trace;
        // iteration 0: A from its prior; 1: A from B's CPT; 2: B
        assert_eq!(t.iterations()[0].selected, vec![FactorRef::Input(0)]);
        assert_eq!(t.basis(0).unwrap(), BTreeSet::from([0]));
        assert_eq!(t.basis(1).unwrap(), BTreeSet::from([1]));
        assert_eq!(t.basis(2).unwrap(), BTreeSet::from([1]));
        assert_eq!(t.subtrace(0).unwrap().nodes, BTreeSet::from([0]));
        assert!(matches!(t.basis(3), Err(Error::InvalidIteration { index: 3, count: 3 })));
    }

    /// Hand-picked partition for the five-variable example: A's bucket is
    /// split into {A,B,C CPTs} and {D's CPT}, C's into {E's CPT, the factor
    /// from D's CPT} and {the factor from B}.
    pub(crate) struct ScriptedRule;

    impl MiniBucketRule for ScriptedRule {
        fn select(&mut self, var: VarId, bucket: &[&[VarId]]) -> Vec<usize> {
            match var {
                0 if bucket.len() == 4 => vec![0, 1, 2],
                2 if bucket.len() == 3 => vec![0, 1],
                _ => (0..bucket.len()).collect(),
            }
        }
    }

    #[test]
    fn scripted_partition_trace() {
        let net = five_node();
        let r = mbe_with(net.cpts(), &[0, 1, 2, 3, 4], Op::Max, &mut ScriptedRule).unwrap();
        let t = &r.trace;
        assert_eq!(t.len(), 7);
        let vars: Vec<VarId> = t.iterations().iter().map(|it| it.var).collect();
        assert_eq!(vars, vec![0, 0, 1, 2, 2, 3, 4]);
        // zero-based: the chain 4 -> 6 -> 7 is 3 -> 5 -> 6, and 1 -> 3 -> 5 is 0 -> 2 -> 4
        assert_eq!(t.subtrace(6).unwrap().nodes, BTreeSet::from([3, 5, 6]));
        assert_eq!(t.subtrace(6).unwrap().edges, BTreeSet::from([(3, 5), (5, 6)]));
        assert_eq!(t.subtrace(4).unwrap().nodes, BTreeSet::from([0, 2, 4]));
        assert_eq!(t.basis(3).unwrap(), BTreeSet::from([3, 4]));
        assert_eq!(t.basis(1).unwrap(), BTreeSet::from([3]));
        assert!(t.basis(0).unwrap().contains(&0));
        assert!(t.basis(4).unwrap().contains(&2));
        let exact = ve(net.cpts(), &[0, 1, 2, 3, 4], Op::Max).unwrap();
        assert!(r.value >= exact.value - 1e-12);
    }

    #[test]
    fn leaf_iteration_subtrace_is_singleton() {
        let net = five_node();
        let r = mbe(net.cpts(), &[0, 1, 2, 3, 4], 2, Op::Max).unwrap();
        for i in 0..r.trace.len() {
            if r.trace.is_leaf(i) {
                assert_eq!(r.trace.subtrace(i).unwrap().nodes, BTreeSet::from([i]));
            }
        }
    }

    #[test]
    fn dot_export_mentions_every_iteration() {
        let net = two_node();
        let r = mbe(net.cpts(), &[0, 1], 1, Op::Max).unwrap();
        let dot = r.trace.to_dot(|v| net.variable(v).name.clone());
        assert!(dot.contains("n0 [label=\"0: eliminate A\"]"));
        assert!(dot.contains("n1 -> n2 [label=\"{B}\"]"));
    }

    #[test]
    fn ve_iteration_count_equals_variables() {
        let net = five_node();
        let r = ve(net.cpts(), &min_fill_order(&net), Op::Sum).unwrap();
        assert_eq!(r.trace.len(), net.len());
        assert!(r.value.abs() < 1e-12);
    }
}
