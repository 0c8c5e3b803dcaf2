//! Depth-first branch-and-bound for MPE using split-network bounds, over
//! either all variables or only the split variables, plus loop-cutset
//! conditioning as the bound-free special case.

use std::io::Write;

use crate::error::{Error, Result};
use crate::exact::Engine;
use crate::factor::Op;
use crate::graph::skeleton;
use crate::model::{Instantiation, Network};
use crate::splitting::SplitNetwork;
use crate::VarId;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Space {
    /// Branch on every variable.
    Full,
    /// Branch only on split variables; a node is complete once they are
    /// all assigned, at which point the bound is exact.
    #[default]
    Reduced,
}

impl std::fmt::Display for Space {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Space::Full => "full",
            Space::Reduced => "reduced",
        })
    }
}

impl std::str::FromStr for Space {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(Space::Full),
            "reduced" => Ok(Space::Reduced),
            other => Err(format!("unknown search space '{other}' (expected full or reduced)")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum ValueOrder {
    /// Value indices in declaration order.
    #[default]
    Declared,
    Reversed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOptions {
    pub space: Space,
    /// Without bounds every complete node is evaluated exactly.
    pub use_bound: bool,
    /// Branching order; see [`default_order`] when absent.
    pub variable_order: Option<Vec<VarId>>,
    pub value_order: ValueOrder,
    /// Initial incumbent, in log space.
    pub seed_lower_bound: f64,
    pub engine: Engine,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            space: Space::Reduced,
            use_bound: true,
            variable_order: None,
            value_order: ValueOrder::Declared,
            seed_lower_bound: f64::NEG_INFINITY,
            engine: Engine::default(),
        }
    }
}

impl SearchOptions {
    pub fn new(space: Space) -> Self {
        SearchOptions {
            space,
            ..Default::default()
        }
    }

    pub fn without_bound(mut self) -> Self {
        self.use_bound = false;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub mpe_log: f64,
    /// A maximizer over the base variables; empty when nothing beat the seed.
    pub argmax: Instantiation,
    pub nodes_visited: u64,
    /// Exact queries on the split network (bounds and leaf evaluations).
    pub bounds_evaluated: u64,
}

/// Split variables by descending clone count, ties by id; in the full space
/// the remaining base variables follow by id.
pub fn default_order(sn: &SplitNetwork, space: Space) -> Vec<VarId> {
    let counts = sn.clone_counts();
    let mut order: Vec<VarId> = counts.keys().copied().collect();
    order.sort_by_key(|v| (std::cmp::Reverse(counts[v]), *v));
    if space == Space::Full {
        order.extend((0..sn.base().len()).filter(|v| !counts.contains_key(v)));
    }
    order
}

struct Search<'a, 'w> {
    bounder: crate::splitting::Bounder<'a>,
    order: Vec<VarId>,
    cards: Vec<usize>,
    opts: &'a SearchOptions,
    z: Instantiation,
    best: f64,
    argmax: Instantiation,
    nodes: u64,
    evaluations: u64,
    log: Option<&'w mut dyn Write>,
}

impl Search<'_, '_> {
    fn visit(&mut self, depth: usize) -> Result<()> {
        self.nodes += 1;
        let complete = depth == self.order.len();
        if self.opts.use_bound || complete {
            let (q, x) = self.bounder.bound(&self.z, Op::Max, complete)?;
            self.evaluations += 1;
            self.trace(depth, Some(q))?;
            if q <= self.best {
                return Ok(());
            }
            if complete {
                self.best = q;
                self.argmax = x.expect("requested");
                return Ok(());
            }
        } else {
            self.trace(depth, None)?;
        }
        let var = self.order[depth];
        let card = self.cards[var];
        for k in 0..card {
            let value = match self.opts.value_order {
                ValueOrder::Declared => k,
                ValueOrder::Reversed => card - 1 - k,
            };
            self.z.set(var, value);
            self.visit(depth + 1)?;
        }
        self.z.remove(var);
        Ok(())
    }

    fn trace(&mut self, depth: usize, bound: Option<f64>) -> Result<()> {
        if let Some(w) = self.log.as_mut() {
            let assignment: Vec<String> = self.z.iter().map(|(v, x)| format!("{v}={x}")).collect();
            let bound = bound.map_or_else(|| "-".to_string(), |q| q.to_string());
            writeln!(w, "{depth}\t{}\t{bound}\t{}", assignment.join(","), self.best)?;
        }
        Ok(())
    }
}

/// Branch-and-bound for `MPE(base, e)` with bounds from `sn`. Nodes whose
/// bound does not exceed the incumbent are pruned.
pub fn split_bnb(base: &Network, sn: &SplitNetwork, e: &Instantiation, opts: &SearchOptions) -> Result<SearchResult> {
    split_bnb_logged(base, sn, e, opts, None)
}

/// As [`split_bnb`], writing one line per node: depth, assignment, bound
/// (`-` when none was computed) and incumbent, tab-separated.
pub fn split_bnb_logged(
    base: &Network,
    sn: &SplitNetwork,
    e: &Instantiation,
    opts: &SearchOptions,
    log: Option<&mut dyn Write>,
) -> Result<SearchResult> {
    if base.cardinalities() != sn.base().cardinalities() || base.cpts() != sn.base().cpts() {
        return Err(Error::ForeignSplit);
    }
    base.check_instantiation(e)?;
    let order = opts
        .variable_order
        .clone()
        .unwrap_or_else(|| default_order(sn, opts.space));
    for &v in &order {
        if v >= base.len() {
            return Err(Error::VariableOutOfRange {
                var: v,
                count: base.len(),
            });
        }
    }
    let mut seen = vec![false; base.len()];
    let order: Vec<VarId> = order
        .into_iter()
        .filter(|&v| !e.contains(v) && !std::mem::replace(&mut seen[v], true))
        .collect();
    let mut search = Search {
        bounder: sn.bounder(opts.engine),
        order,
        cards: base.cardinalities(),
        opts,
        z: e.clone(),
        best: opts.seed_lower_bound,
        argmax: Instantiation::new(),
        nodes: 0,
        evaluations: 0,
        log,
    };
    search.visit(0)?;
    Ok(SearchResult {
        mpe_log: search.best,
        argmax: search.argmax,
        nodes_visited: search.nodes,
        bounds_evaluated: search.evaluations,
    })
}

/// Fully splits variables until the skeleton is a forest. Each round takes a
/// cycle and splits the vertex on it with an outgoing cycle edge and the
/// most children (ties by id). Returns the split network; its split
/// variables form a loop cutset.
pub fn loop_cutset(net: &Network) -> Result<SplitNetwork> {
    let mut sn = SplitNetwork::new(net.clone());
    while let Some(cycle) = skeleton(sn.net()).find_cycle() {
        let cur = sn.net();
        let k = cycle.len();
        let v = (0..k)
            .filter(|&i| {
                let v = cycle[i];
                let kids = cur.children(v);
                kids.contains(&cycle[(i + 1) % k]) || kids.contains(&cycle[(i + k - 1) % k])
            })
            .map(|i| cycle[i])
            .max_by_key(|&v| (cur.children(v).len(), std::cmp::Reverse(v)))
            .expect("every cycle has a vertex with an outgoing cycle edge");
        sn = sn.full_split(v)?;
    }
    Ok(sn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::is_singly_connected;
    use crate::model::fixtures::{five_node, two_node};

    fn brute_force(net: &Network, e: &Instantiation) -> f64 {
        let cards = net.cardinalities();
        let mut x = vec![0; cards.len()];
        let mut best = f64::NEG_INFINITY;
        loop {
            if e.iter().all(|(v, val)| x[v] == val) {
                best = best.max(net.log_prob(&x));
            }
            let mut i = 0;
            while i < x.len() {
                x[i] += 1;
                if x[i] < cards[i] {
                    break;
                }
                x[i] = 0;
                i += 1;
            }
            if i == x.len() {
                return best;
            }
        }
    }

    #[test]
    fn two_node_reduced() {
        let net = two_node();
        let sn = SplitNetwork::new(net.clone()).split_node(0, &[1]).unwrap();
        let r = split_bnb(&net, &sn, &Instantiation::new(), &SearchOptions::default()).unwrap();
        assert!((r.mpe_log - 0.56f64.ln()).abs() < 1e-12);
        assert!(r.nodes_visited <= 3);
        assert_eq!(r.argmax, Instantiation::from_pairs([(0, 1), (1, 0)]));
    }

    #[test]
    fn zero_splits_single_node() {
        let net = five_node();
        let sn = SplitNetwork::new(net.clone());
        let r = split_bnb(&net, &sn, &Instantiation::new(), &SearchOptions::default()).unwrap();
        assert_eq!(r.nodes_visited, 1);
        assert!((r.mpe_log - brute_force(&net, &Instantiation::new())).abs() < 1e-9);
    }

    #[test]
    fn spaces_and_modes_agree() {
        let net = five_node();
        let sn = SplitNetwork::new(net.clone())
            .split_node(2, &[3, 4])
            .unwrap()
            .split_node(0, &[3])
            .unwrap();
        for e in [
            Instantiation::new(),
            Instantiation::from_pairs([(4, 1)]),
            Instantiation::from_pairs([(0, 0), (3, 2)]),
        ] {
            let want = brute_force(&net, &e);
            let mut nodes = Vec::new();
            for space in [Space::Reduced, Space::Full] {
                for bound in [true, false] {
                    let mut opts = SearchOptions::new(space);
                    opts.use_bound = bound;
                    let r = split_bnb(&net, &sn, &e, &opts).unwrap();
                    assert!((r.mpe_log - want).abs() < 1e-9);
                    let x = r.argmax.to_dense(net.len()).unwrap();
                    assert!((net.log_prob(&x) - want).abs() < 1e-9);
                    assert!(e.compatible(&r.argmax));
                    nodes.push(r.nodes_visited);
                }
            }
            assert!(nodes[0] <= nodes[2]);
        }
    }

    #[test]
    fn inconsistent_evidence() {
        let net = Network::from_probs(&["A", "B"], &[2, 2], vec![vec![], vec![0]], &[vec![1.0, 0.0], vec![1.0, 0.0, 0.5, 0.5]])
            .unwrap();
        let sn = SplitNetwork::new(net.clone()).split_node(0, &[1]).unwrap();
        let e = Instantiation::from_pairs([(0, 1)]);
        let r = split_bnb(&net, &sn, &e, &SearchOptions::default()).unwrap();
        assert_eq!(r.mpe_log, f64::NEG_INFINITY);
        assert!(r.argmax.is_empty());
    }

    #[test]
    fn node_log_lines() {
        let net = two_node();
        let sn = SplitNetwork::new(net.clone()).split_node(0, &[1]).unwrap();
        let mut buf = Vec::new();
        let r = split_bnb_logged(&net, &sn, &Instantiation::new(), &SearchOptions::default(), Some(&mut buf)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count() as u64, r.nodes_visited);
        assert!(text.starts_with("0\t\t"));
    }

    #[test]
    fn cutset_of_five_node() {
        let net = five_node();
        let sn = loop_cutset(&net).unwrap();
        assert!(is_singly_connected(sn.net()));
        assert!(!sn.split_variables().is_empty());
        let r = split_bnb(&net, &sn, &Instantiation::new(), &SearchOptions::default().without_bound()).unwrap();
        let expected: usize = sn.split_variables().iter().map(|&v| net.cardinality(v)).product();
        assert_eq!(r.bounds_evaluated, expected as u64);
        assert!((r.mpe_log - brute_force(&net, &Instantiation::new())).abs() < 1e-9);
    }

    #[test]
    fn polytree_needs_no_cutset() {
        let sn = loop_cutset(&two_node()).unwrap();
        assert_eq!(sn.clone_count(), 0);
    }
}
