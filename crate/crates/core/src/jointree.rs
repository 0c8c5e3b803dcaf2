//! Jointrees: construction by triangulating the moral graph along an
//! elimination order, table-size accounting, and max/sum propagation.

use std::collections::{BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::factor::{Factor, Op};
use crate::graph::{DisjointSets, UndirectedGraph};
use crate::model::{Instantiation, Network};
use crate::VarId;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Separator {
    pub a: usize,
    pub b: usize,
    pub vars: Vec<VarId>,
}

/// A cluster tree over a network's variables.
#[derive(Clone, Debug)]
pub struct Jointree {
    clusters: Vec<Vec<VarId>>,
    separators: Vec<Separator>,
    /// Cluster holding the CPT of each variable.
    assignment: Vec<usize>,
    /// Clusters in breadth-first order from cluster 0, with their parents.
    bfs: Vec<usize>,
    parent: Vec<Option<(usize, usize)>>,
}

/// Moralizes, triangulates along `order`, keeps the maximal elimination
/// cliques and links them by a maximum-weight spanning tree on separator
/// sizes.
pub fn build_jointree(net: &Network, order: &[VarId]) -> Jointree {
    let moral = UndirectedGraph::moral(net);
    let cliques = moral.elimination_cliques(order);

    let mut clusters: Vec<BTreeSet<VarId>> = Vec::new();
    'outer: for (i, c) in cliques.iter().enumerate() {
        for (j, d) in cliques.iter().enumerate() {
            if i != j && c.is_subset(d) && (c.len() < d.len() || j < i) {
                continue 'outer;
            }
        }
        clusters.push(c.clone());
    }
    if clusters.is_empty() {
        clusters.push(BTreeSet::new());
    }

    let mut candidates = Vec::new();
    for i in 0..clusters.len() {
        for j in i + 1..clusters.len() {
            let w = clusters[i].intersection(&clusters[j]).count();
            candidates.push((w, i, j));
        }
    }
    candidates.sort_by(|x, y| y.0.cmp(&x.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    let mut dsu = DisjointSets::new(clusters.len());
    let mut separators = Vec::with_capacity(clusters.len().saturating_sub(1));
    for (_, i, j) in candidates {
        if dsu.union(i, j) {
            separators.push(Separator {
                a: i,
                b: j,
                vars: clusters[i].intersection(&clusters[j]).copied().collect(),
            });
        }
    }

    let clusters: Vec<Vec<VarId>> = clusters.into_iter().map(|c| c.into_iter().collect()).collect();
    let assignment = (0..net.len())
        .map(|v| {
            let fam = net.family(v);
            clusters
                .iter()
                .position(|c| fam.iter().all(|u| c.binary_search(u).is_ok()))
                .expect("families are cliques of the triangulated graph")
        })
        .collect();

    let mut adj = vec![Vec::new(); clusters.len()];
    for (s, sep) in separators.iter().enumerate() {
        adj[sep.a].push((sep.b, s));
        adj[sep.b].push((sep.a, s));
    }
    let mut parent = vec![None; clusters.len()];
    let mut seen = vec![false; clusters.len()];
    let mut bfs = Vec::with_capacity(clusters.len());
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(c) = queue.pop_front() {
        bfs.push(c);
        for &(d, s) in &adj[c] {
            if !seen[d] {
                seen[d] = true;
                parent[d] = Some((c, s));
                queue.push_back(d);
            }
        }
    }

    Jointree {
        clusters,
        separators,
        assignment,
        bfs,
        parent,
    }
}

fn table_size(vars: &[VarId], cards: &[usize]) -> f64 {
    vars.iter().map(|&v| cards[v] as f64).product()
}

impl Jointree {
    pub fn clusters(&self) -> &[Vec<VarId>] {
        &self.clusters
    }

    pub fn separators(&self) -> &[Separator] {
        &self.separators
    }

    /// Cluster index holding each variable's CPT.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn max_cluster_size(&self) -> usize {
        self.clusters.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Treewidth proxy: largest cluster minus one.
    pub fn width(&self) -> usize {
        self.max_cluster_size().saturating_sub(1)
    }

    /// Total entries over all cluster and separator tables.
    pub fn total_table_size(&self, net: &Network) -> f64 {
        let cards = net.cardinalities();
        self.clusters.iter().map(|c| table_size(c, &cards)).sum::<f64>()
            + self.separators.iter().map(|s| table_size(&s.vars, &cards)).sum::<f64>()
    }

    /// Reduction in cluster and separator table sizes obtained by removing
    /// `var` from every table that contains it.
    pub fn removal_score(&self, net: &Network, var: VarId) -> Result<f64> {
        let cards = net.cardinalities();
        let mut score = 0.0;
        let mut found = false;
        let tables = self
            .clusters
            .iter()
            .map(Vec::as_slice)
            .chain(self.separators.iter().map(|s| s.vars.as_slice()));
        for t in tables {
            if t.contains(&var) {
                found = true;
                let size = table_size(t, &cards);
                score += size - size / cards[var] as f64;
            }
        }
        if !found {
            return Err(Error::NotInJointree { var });
        }
        Ok(score)
    }

    /// Checks the tree shape, family coverage and running intersection.
    pub fn verify(&self, net: &Network) -> std::result::Result<(), String> {
        let k = self.clusters.len();
        if self.separators.len() + 1 != k {
            return Err(format!("{} clusters but {} edges", k, self.separators.len()));
        }
        if self.bfs.len() != k {
            return Err("cluster graph is disconnected".into());
        }
        for s in &self.separators {
            let a: BTreeSet<_> = self.clusters[s.a].iter().collect();
            let b: BTreeSet<_> = self.clusters[s.b].iter().collect();
            let inter: Vec<VarId> = a.intersection(&b).map(|&&v| v).collect();
            if inter != s.vars {
                return Err(format!("separator {}-{} is not the intersection", s.a, s.b));
            }
        }
        for v in 0..net.len() {
            let c = &self.clusters[self.assignment[v]];
            if !net.family(v).iter().all(|u| c.contains(u)) {
                return Err(format!("family of {v} not covered"));
            }
        }
        for v in 0..net.len() {
            let holding: Vec<usize> = (0..k).filter(|&c| self.clusters[c].contains(&v)).collect();
            if holding.is_empty() {
                continue;
            }
            let mut dsu = DisjointSets::new(k);
            let mut joins = 0;
            for s in &self.separators {
                if s.vars.contains(&v) && dsu.union(s.a, s.b) {
                    joins += 1;
                }
            }
            if joins + 1 != holding.len() {
                return Err(format!("running intersection fails for {v}"));
            }
        }
        Ok(())
    }

    /// Cluster-tree propagation towards cluster 0. Returns the log MPE
    /// probability ([`Op::Max`]) or log probability of evidence
    /// ([`Op::Sum`]); with `want_argmax` and max, also a maximizer that
    /// includes the evidence.
    pub fn propagate(
        &self,
        net: &Network,
        e: &Instantiation,
        op: Op,
        want_argmax: bool,
    ) -> Result<(f64, Option<Instantiation>)> {
        let k = self.clusters.len();
        let mut potentials: Vec<Option<Factor>> = vec![None; k];
        let mut constant = 0.0;
        for v in 0..net.len() {
            let f = net.cpt(v).condition(e);
            if let Some(s) = f.scalar_value() {
                constant += s;
                continue;
            }
            let slot = &mut potentials[self.assignment[v]];
            *slot = Some(match slot.take() {
                None => f,
                Some(p) => p.multiply(&f)?,
            });
        }

        let keep_products = want_argmax && op == Op::Max;
        let mut products: Vec<Option<Factor>> = vec![None; k];
        let mut inbox: Vec<Vec<Factor>> = vec![Vec::new(); k];
        let mut root_value = 0.0;
        for &c in self.bfs.iter().rev() {
            let mut product = potentials[c].take();
            for m in inbox[c].drain(..) {
                if let Some(s) = m.scalar_value() {
                    constant += s;
                    continue;
                }
                product = Some(match product {
                    None => m,
                    Some(p) => p.multiply(&m)?,
                });
            }
            let Some(product) = product else { continue };
            match self.parent[c] {
                Some((p, s)) => {
                    let sep = &self.separators[s].vars;
                    let mut msg = product.clone();
                    for &v in product.vars() {
                        if !sep.contains(&v) {
                            msg = msg.eliminate(v, op)?;
                        }
                    }
                    inbox[p].push(msg);
                }
                None => root_value = product.reduce_all(op),
            }
            if keep_products {
                products[c] = Some(product);
            }
        }
        let value = constant + root_value;

        let argmax = if keep_products {
            let mut x = e.clone();
            for &c in &self.bfs {
                if let Some(prod) = &products[c] {
                    let local = prod.condition(&x);
                    let (idx, _) = local.argmax();
                    for (v, val) in local.vars().iter().zip(local.decode(idx)) {
                        x.set(*v, val);
                    }
                }
            }
            Some(x)
        } else {
            None
        };
        Ok((value, argmax))
    }

    /// Max-product propagation with maximizer recovery.
    pub fn max_propagate(&self, net: &Network, e: &Instantiation) -> Result<(f64, Instantiation)> {
        let (v, x) = self.propagate(net, e, Op::Max, true)?;
        Ok((v, x.expect("argmax requested")))
    }

    pub fn sum_propagate(&self, net: &Network, e: &Instantiation) -> Result<f64> {
        Ok(self.propagate(net, e, Op::Sum, false)?.0)
    }
}
