//! Node splitting: clones, instantiation extension, split-network bounds and
//! the reconstruction of a split network from a mini-bucket run.
//!
//! Splitting `X` according to children `Z` removes the edges `X -> Z` and
//! adds a root clone of `X` with a uniform prior as the new parent of `Z`.
//! With `beta` the product of clone cardinalities, for every complete
//! instantiation `x` of the original network,
//! `Pr(x) = beta * Pr'(x, x⃗)`, where `x⃗` gives each clone its original's
//! value. Exact inference on the split network therefore bounds MPE and
//! probability-of-evidence queries on the original from above.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::elimination::{mbe_with, GreedyScope, MiniBucketRule};
use crate::error::{Error, Result};
use crate::exact::{Engine, ExactInference};
use crate::factor::{Factor, Op};
use crate::model::{Instantiation, Network, Variable};
use crate::VarId;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CloneInfo {
    pub id: VarId,
    pub name: String,
    /// The variable this clone was split off (possibly itself a clone).
    pub original: VarId,
    /// Children inherited from the original.
    pub children: Vec<VarId>,
}

/// A network obtained from `base` by a sequence of splits.
#[derive(Clone, Debug)]
pub struct SplitNetwork {
    base: Arc<Network>,
    net: Network,
    clones: Vec<CloneInfo>,
    beta_log: f64,
}

/// JSON view of the clone registry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitMapping {
    pub clones: Vec<CloneInfo>,
    pub beta_log: f64,
}

impl SplitMapping {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("mapping is always serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Extends `x` to the clones using the mapping alone.
    pub fn extend(&self, x: &Instantiation) -> Instantiation {
        let originals: BTreeMap<VarId, VarId> =
            self.clones.iter().map(|c| (c.id, c.original)).collect();
        let root = |mut v: VarId| {
            while let Some(&o) = originals.get(&v) {
                v = o;
            }
            v
        };
        self.clones
            .iter()
            .filter_map(|c| x.get(root(c.id)).map(|val| (c.id, val)))
            .collect()
    }
}

impl SplitNetwork {
    /// The unsplit network: no clones, `beta = 1`.
    pub fn new(base: Network) -> Self {
        let base = Arc::new(base);
        SplitNetwork {
            net: (*base).clone(),
            base,
            clones: Vec::new(),
            beta_log: 0.0,
        }
    }

    pub fn base(&self) -> &Network {
        &self.base
    }

    /// The transformed network.
    pub fn net(&self) -> &Network {
        &self.net
    }

    pub fn clones(&self) -> &[CloneInfo] {
        &self.clones
    }

    pub fn clone_count(&self) -> usize {
        self.clones.len()
    }

    /// Log of the product of clone cardinalities.
    pub fn beta_log(&self) -> f64 {
        self.beta_log
    }

    pub fn is_clone(&self, v: VarId) -> bool {
        v >= self.base.len()
    }

    /// The base-network variable a (possibly nested) clone stands for.
    pub fn root_original(&self, mut v: VarId) -> VarId {
        while self.is_clone(v) {
            v = self.clones[v - self.base.len()].original;
        }
        v
    }

    /// Base variables with at least one clone, with their clone counts.
    pub fn clone_counts(&self) -> BTreeMap<VarId, usize> {
        let mut counts = BTreeMap::new();
        for c in &self.clones {
            *counts.entry(self.root_original(c.id)).or_insert(0) += 1;
        }
        counts
    }

    /// Base variables that have been split.
    pub fn split_variables(&self) -> BTreeSet<VarId> {
        self.clone_counts().into_keys().collect()
    }

    pub fn mapping(&self) -> SplitMapping {
        SplitMapping {
            clones: self.clones.clone(),
            beta_log: self.beta_log,
        }
    }

    fn split_named(&self, x: VarId, children: &[VarId], name: String) -> Result<SplitNetwork> {
        if children.is_empty() {
            return Err(Error::EmptySplit);
        }
        if x >= self.net.len() {
            return Err(Error::VariableOutOfRange {
                var: x,
                count: self.net.len(),
            });
        }
        for &z in children {
            if !self.net.children(x).contains(&z) {
                return Err(Error::NotAChild { var: x, child: z });
            }
        }
        let clone = self.net.len();
        let card = self.net.cardinality(x);

        let mut variables: Vec<Variable> = self.net.variables().to_vec();
        variables.push(Variable {
            id: clone,
            name,
            cardinality: card,
        });
        let mut parents: Vec<Vec<VarId>> = (0..self.net.len()).map(|v| self.net.parents(v).to_vec()).collect();
        let mut cpts: Vec<Factor> = self.net.cpts().to_vec();
        let mut inherited: Vec<VarId> = children.to_vec();
        inherited.sort_unstable();
        inherited.dedup();
        for &z in &inherited {
            for p in parents[z].iter_mut() {
                if *p == x {
                    *p = clone;
                }
            }
            cpts[z] = cpts[z].rename(x, clone);
        }
        parents.push(Vec::new());
        cpts.push(Factor::from_probs(vec![clone], vec![card], &vec![1.0 / card as f64; card])?);

        let mut clones = self.clones.clone();
        clones.push(CloneInfo {
            id: clone,
            name: variables[clone].name.clone(),
            original: x,
            children: inherited,
        });
        Ok(SplitNetwork {
            base: Arc::clone(&self.base),
            net: Network::new(variables, parents, cpts)?,
            clones,
            beta_log: self.beta_log + (card as f64).ln(),
        })
    }

    /// Splits `x` according to the given subset of its children.
    pub fn split_node(&self, x: VarId, children: &[VarId]) -> Result<SplitNetwork> {
        if x >= self.net.len() {
            return Err(Error::VariableOutOfRange {
                var: x,
                count: self.net.len(),
            });
        }
        let k = self.clones.iter().filter(|c| c.original == x).count() + 1;
        let name = format!("{}^{}", self.net.variable(x).name, k);
        self.split_named(x, children, name)
    }

    /// Splits `x` along every outgoing edge: one clone per child.
    pub fn full_split(&self, x: VarId) -> Result<SplitNetwork> {
        if x >= self.net.len() {
            return Err(Error::VariableOutOfRange {
                var: x,
                count: self.net.len(),
            });
        }
        let children = self.net.children(x).to_vec();
        if children.is_empty() {
            return Err(Error::Childless { var: x });
        }
        let mut sn = self.clone();
        for y in children {
            let name = format!("{}^{}", self.net.variable(x).name, self.net.variable(y).name);
            sn = sn.split_named(x, &[y], name)?;
        }
        Ok(sn)
    }

    /// Assigns each clone the value its base variable has in `x`; clones
    /// of unassigned variables stay unassigned.
    pub fn extend_instantiation(&self, x: &Instantiation) -> Instantiation {
        self.clones
            .iter()
            .filter_map(|c| x.get(self.root_original(c.id)).map(|v| (c.id, v)))
            .collect()
    }

    /// `x ∪ x⃗`, restricted to base variables for `x`.
    pub fn extended_evidence(&self, x: &Instantiation) -> Instantiation {
        x.truncated(self.base.len()).merged(&self.extend_instantiation(x))
    }

    /// Dense complete assignment of the split network for a complete base
    /// assignment.
    pub fn extend_dense(&self, x: &[usize]) -> Vec<usize> {
        let mut out = x.to_vec();
        out.extend(self.clones.iter().map(|c| x[self.root_original(c.id)]));
        out
    }

    /// Builds an engine for repeated bound queries on this split network.
    pub fn bounder(&self, engine: Engine) -> Bounder<'_> {
        Bounder {
            sn: self,
            exact: ExactInference::new(&self.net, engine),
        }
    }

    /// Upper bound on the log MPE probability of the base network given `e`.
    pub fn mpe_bound(&self, e: &Instantiation) -> Result<f64> {
        self.mpe_bound_with(e, Engine::default())
    }

    pub fn mpe_bound_with(&self, e: &Instantiation, engine: Engine) -> Result<f64> {
        self.base.check_instantiation(e)?;
        Ok(self.bounder(engine).bound(e, Op::Max, false)?.0)
    }

    /// Upper bound on the log probability of `e` in the base network.
    pub fn pe_bound(&self, e: &Instantiation) -> Result<f64> {
        self.pe_bound_with(e, Engine::default())
    }

    pub fn pe_bound_with(&self, e: &Instantiation, engine: Engine) -> Result<f64> {
        self.base.check_instantiation(e)?;
        Ok(self.bounder(engine).bound(e, Op::Sum, false)?.0)
    }
}

/// A split network paired with prepared exact-inference state.
pub struct Bounder<'a> {
    sn: &'a SplitNetwork,
    exact: ExactInference,
}

impl Bounder<'_> {
    /// `beta_log + log MPE_p(N', z, z⃗)` (or the sum-product analogue). The
    /// maximizer, when requested, is restricted to base variables.
    pub fn bound(&self, z: &Instantiation, op: Op, want_argmax: bool) -> Result<(f64, Option<Instantiation>)> {
        let ev = self.sn.extended_evidence(z);
        let (v, x) = self.exact.query(&self.sn.net, &ev, op, want_argmax)?;
        Ok((self.sn.beta_log + v, x.map(|x| x.truncated(self.sn.base.len()))))
    }
}

/// Replays a mini-bucket run as node splits. Returns the split network and
/// the elimination order `π'` under which exact elimination on it mirrors
/// the mini-bucket run.
pub fn split_mbe(net: &Network, e: &Instantiation, order: &[VarId], ibound: usize) -> Result<(SplitNetwork, Vec<VarId>)> {
    if ibound == 0 {
        return Err(Error::ZeroIbound);
    }
    split_mbe_with(net, e, order, &mut GreedyScope { ibound })
}

pub fn split_mbe_with(
    net: &Network,
    e: &Instantiation,
    order: &[VarId],
    rule: &mut dyn MiniBucketRule,
) -> Result<(SplitNetwork, Vec<VarId>)> {
    net.check_instantiation(e)?;
    let factors = net.conditioned_cpts(e);
    let run = mbe_with(&factors, order, Op::Max, rule)?;
    let mut sn = SplitNetwork::new(net.clone());
    let mut order_prime = Vec::with_capacity(run.trace.len());
    for (i, it) in run.trace.iterations().iter().enumerate() {
        let basis = run.trace.basis(i)?;
        if basis.contains(&it.var) {
            order_prime.push(it.var);
        } else {
            let children: Vec<VarId> = basis.into_iter().collect();
            sn = sn.split_node(it.var, &children)?;
            order_prime.push(sn.net.len() - 1);
        }
    }
    let placed: BTreeSet<VarId> = order_prime.iter().copied().collect();
    order_prime.extend((0..sn.net.len()).filter(|v| !placed.contains(v)));
    Ok((sn, order_prime))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elimination::{mbe, ve};
    use crate::model::fixtures::{five_node, two_node};

    fn near(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn split_two_node() {
        let sn = SplitNetwork::new(two_node()).split_node(0, &[1]).unwrap();
        assert_eq!(sn.net().len(), 3);
        assert_eq!(sn.clone_count(), 1);
        assert!(near(sn.beta_log(), 2f64.ln()));
        assert_eq!(sn.net().parents(1), &[2]);
        assert!(sn.net().children(0).is_empty());
        let prior: Vec<f64> = sn.net().cpt(2).table().iter().map(|x| x.exp()).collect();
        assert_eq!(prior, vec![0.5, 0.5]);
        assert_eq!(sn.net().cpt(1).table(), two_node().cpt(1).table());
        assert_eq!(sn.net().variable(2).name, "A^1");
    }

    #[test]
    fn split_errors() {
        let sn = SplitNetwork::new(two_node());
        assert_eq!(sn.split_node(0, &[]).unwrap_err(), Error::EmptySplit);
        assert_eq!(
            sn.split_node(1, &[0]).unwrap_err(),
            Error::NotAChild { var: 1, child: 0 }
        );
        assert_eq!(sn.full_split(1).unwrap_err(), Error::Childless { var: 1 });
    }

    #[test]
    fn two_node_bounds() {
        let sn = SplitNetwork::new(two_node()).split_node(0, &[1]).unwrap();
        let e = Instantiation::new();
        assert!(near(sn.mpe_bound(&e).unwrap(), 0.72f64.ln()));
        assert!(near(sn.mpe_bound_with(&e, Engine::Ve).unwrap(), 0.72f64.ln()));
        let b1 = Instantiation::from_pairs([(1, 0)]);
        assert!(near(sn.pe_bound(&b1).unwrap(), 0.80f64.ln()));
        assert!(near(sn.pe_bound_with(&b1, Engine::Ve).unwrap(), 0.80f64.ln()));
    }

    #[test]
    fn unsplit_bound_is_exact() {
        let sn = SplitNetwork::new(two_node());
        assert!(near(sn.mpe_bound(&Instantiation::new()).unwrap(), 0.56f64.ln()));
        let b1 = Instantiation::from_pairs([(1, 0)]);
        assert!(near(sn.pe_bound(&b1).unwrap(), 0.58f64.ln()));
    }

    #[test]
    fn five_node_splits_and_extension() {
        let sn = SplitNetwork::new(five_node())
            .split_node(2, &[3, 4])
            .unwrap()
            .split_node(0, &[3])
            .unwrap();
        assert_eq!(sn.clone_count(), 2);
        // C^1 has id 5, A^1 has id 6
        assert_eq!(sn.net().parents(3), &[6, 5]);
        assert_eq!(sn.net().parents(4), &[5]);
        assert_eq!(sn.split_variables(), BTreeSet::from([0, 2]));
        let x = Instantiation::from_pairs([(0, 0), (1, 0), (2, 1), (3, 2), (4, 0)]);
        assert_eq!(
            sn.extend_instantiation(&x),
            Instantiation::from_pairs([(5, 1), (6, 0)])
        );
        assert!(sn.extend_instantiation(&Instantiation::new()).is_empty());
        assert!(sn
            .extend_instantiation(&Instantiation::from_pairs([(1, 0), (3, 1)]))
            .is_empty());
    }

    #[test]
    fn full_split_one_clone_per_child() {
        let sn = SplitNetwork::new(five_node()).full_split(2).unwrap();
        assert_eq!(sn.clone_count(), 2);
        assert!(sn.net().children(2).is_empty());
        for c in sn.clones() {
            assert_eq!(c.children.len(), 1);
        }
        assert_eq!(sn.clones()[0].name, "C^D");
        // single child: same as an edge split
        let a = SplitNetwork::new(two_node()).full_split(0).unwrap();
        let b = SplitNetwork::new(two_node()).split_node(0, &[1]).unwrap();
        assert_eq!(a.net().cpts(), b.net().cpts());
        assert_eq!(a.net().parents(1), b.net().parents(1));
    }

    #[test]
    fn split_mbe_two_node() {
        let net = two_node();
        let (sn, order) = split_mbe(&net, &Instantiation::new(), &[0, 1], 1).unwrap();
        assert_eq!(order, vec![0, 2, 1]);
        assert_eq!(sn.clones()[0].children, vec![1]);
        let bound = sn.mpe_bound(&Instantiation::new()).unwrap();
        assert!(near(bound, 0.72f64.ln()));
        let m = mbe(net.cpts(), &[0, 1], 1, Op::Max).unwrap();
        let v = ve(sn.net().cpts(), &order, Op::Max).unwrap();
        assert_eq!(m.trace.max_product_scope(), v.trace.max_product_scope());
    }

    #[test]
    fn split_mbe_exact_regime() {
        let net = five_node();
        let order = vec![0, 1, 2, 3, 4];
        let (sn, op) = split_mbe(&net, &Instantiation::new(), &order, 5).unwrap();
        assert_eq!(sn.clone_count(), 0);
        assert_eq!(op, order);
    }

    #[test]
    fn split_mbe_scripted_partition() {
        let net = five_node();
        let order = [0, 1, 2, 3, 4];
        let mut rule = crate::elimination::tests::ScriptedRule;
        let (sn, op) = split_mbe_with(&net, &Instantiation::new(), &order, &mut rule).unwrap();
        assert_eq!(sn.clone_count(), 2);
        assert_eq!(sn.clones()[0].original, 0);
        assert_eq!(sn.clones()[0].children, vec![3]);
        assert_eq!(sn.clones()[1].original, 2);
        assert_eq!(sn.clones()[1].children, vec![3, 4]);
        assert_eq!(op, vec![0, 5, 1, 6, 2, 3, 4]);
        let m = mbe_with(net.cpts(), &order, Op::Max, &mut crate::elimination::tests::ScriptedRule).unwrap();
        let v = ve(sn.net().cpts(), &op, Op::Max).unwrap();
        assert!((m.value - (sn.beta_log() + v.value)).abs() < 1e-12);
        assert_eq!(m.trace.max_product_scope(), v.trace.max_product_scope());
    }

    #[test]
    fn mapping_json_round_trip() {
        let sn = SplitNetwork::new(five_node()).full_split(2).unwrap();
        let m = sn.mapping();
        let back = SplitMapping::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        let x = Instantiation::from_pairs([(2, 1)]);
        assert_eq!(back.extend(&x), sn.extend_instantiation(&x));
    }

    #[test]
    fn nested_clone_resolves_to_base() {
        let sn = SplitNetwork::new(two_node()).split_node(0, &[1]).unwrap();
        let sn = sn.split_node(2, &[1]).unwrap();
        assert_eq!(sn.root_original(3), 0);
        assert_eq!(sn.clone_counts().get(&0), Some(&2));
        let x = Instantiation::from_pairs([(0, 1)]);
        assert_eq!(sn.extend_instantiation(&x), Instantiation::from_pairs([(2, 1), (3, 1)]));
        assert!(near(sn.beta_log(), 4f64.ln()));
    }
}
