//! Undirected graph utilities: moralization, min-fill ordering, elimination
//! cliques and polytree checks.

use std::collections::BTreeSet;

use crate::model::Network;
use crate::VarId;

/// Adjacency sets over `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UndirectedGraph {
    adj: Vec<BTreeSet<VarId>>,
}

impl UndirectedGraph {
    pub fn new(n: usize) -> Self {
        UndirectedGraph {
            adj: vec![BTreeSet::new(); n],
        }
    }

    /// Graph in which every scope is a clique.
    pub fn from_scopes<'a>(n: usize, scopes: impl IntoIterator<Item = &'a [VarId]>) -> Self {
        let mut g = Self::new(n);
        for scope in scopes {
            g.add_clique(scope);
        }
        g
    }

    /// The moral graph of a network: families become cliques.
    pub fn moral(net: &Network) -> Self {
        let mut g = Self::new(net.len());
        for v in 0..net.len() {
            g.add_clique(&net.family(v));
        }
        g
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn add_edge(&mut self, a: VarId, b: VarId) {
        if a != b {
            self.adj[a].insert(b);
            self.adj[b].insert(a);
        }
    }

    pub fn add_clique(&mut self, vars: &[VarId]) {
        for (i, &a) in vars.iter().enumerate() {
            for &b in &vars[i + 1..] {
                self.add_edge(a, b);
            }
        }
    }

    pub fn neighbors(&self, v: VarId) -> &BTreeSet<VarId> {
        &self.adj[v]
    }

    fn fill_in(&self, v: VarId, alive: &[bool]) -> usize {
        let nb: Vec<VarId> = self.adj[v].iter().copied().filter(|&u| alive[u]).collect();
        let mut fill = 0;
        for (i, &a) in nb.iter().enumerate() {
            for &b in &nb[i + 1..] {
                if !self.adj[a].contains(&b) {
                    fill += 1;
                }
            }
        }
        fill
    }

    /// Greedy min-fill elimination order over `vars`; ties go to the lowest id.
    pub fn min_fill_order(&self, vars: &[VarId]) -> Vec<VarId> {
        let mut g = self.clone();
        let mut alive = vec![false; self.len()];
        for &v in vars {
            alive[v] = true;
        }
        let mut remaining: BTreeSet<VarId> = vars.iter().copied().collect();
        let mut order = Vec::with_capacity(vars.len());
        while !remaining.is_empty() {
            let mut best = None;
            for &v in &remaining {
                let f = g.fill_in(v, &alive);
                if best.is_none_or(|(bf, _)| f < bf) {
                    best = Some((f, v));
                    if f == 0 {
                        break;
                    }
                }
            }
            let (_, v) = best.expect("remaining is non-empty");
            let nb: Vec<VarId> = g.adj[v].iter().copied().filter(|&u| alive[u]).collect();
            g.add_clique(&nb);
            alive[v] = false;
            remaining.remove(&v);
            order.push(v);
        }
        order
    }

    /// Cliques `{v} ∪ later neighbors` induced by eliminating along `order`.
    pub fn elimination_cliques(&self, order: &[VarId]) -> Vec<BTreeSet<VarId>> {
        let mut g = self.clone();
        let mut alive = vec![false; self.len()];
        for &v in order {
            alive[v] = true;
        }
        let mut cliques = Vec::with_capacity(order.len());
        for &v in order {
            let nb: Vec<VarId> = g.adj[v].iter().copied().filter(|&u| alive[u]).collect();
            g.add_clique(&nb);
            let mut c: BTreeSet<VarId> = nb.into_iter().collect();
            c.insert(v);
            cliques.push(c);
            alive[v] = false;
        }
        cliques
    }

    /// Whether the graph has no cycles.
    pub fn is_forest(&self) -> bool {
        let mut dsu = DisjointSets::new(self.len());
        for a in 0..self.len() {
            for &b in self.adj[a].range(a + 1..) {
                if !dsu.union(a, b) {
                    return false;
                }
            }
        }
        true
    }

    /// Vertices of some cycle, in cycle order, if one exists.
    pub fn find_cycle(&self) -> Option<Vec<VarId>> {
        let n = self.len();
        let mut parent = vec![usize::MAX; n];
        let mut depth = vec![usize::MAX; n];
        for root in 0..n {
            if depth[root] != usize::MAX {
                continue;
            }
            depth[root] = 0;
            let mut stack = vec![root];
            while let Some(v) = stack.pop() {
                for &u in &self.adj[v] {
                    if u == parent[v] {
                        continue;
                    }
                    if depth[u] == usize::MAX {
                        depth[u] = depth[v] + 1;
                        parent[u] = v;
                        stack.push(u);
                    } else {
                        // non-tree edge v-u closes a cycle through their common ancestor
                        let (mut a, mut b) = (v, u);
                        let mut left = vec![a];
                        let mut right = vec![b];
                        while a != b {
                            if depth[a] >= depth[b] {
                                a = parent[a];
                                left.push(a);
                            } else {
                                b = parent[b];
                                right.push(b);
                            }
                        }
                        right.pop();
                        right.reverse();
                        left.extend(right);
                        return Some(left);
                    }
                }
            }
        }
        None
    }
}

/// The skeleton (edge directions dropped) of a network.
pub fn skeleton(net: &Network) -> UndirectedGraph {
    let mut g = UndirectedGraph::new(net.len());
    for v in 0..net.len() {
        for &p in net.parents(v) {
            g.add_edge(p, v);
        }
    }
    g
}

/// A network is singly connected when its skeleton is a forest.
pub fn is_singly_connected(net: &Network) -> bool {
    skeleton(net).is_forest()
}

/// Default elimination order for a network: min-fill on the moral graph.
pub fn min_fill_order(net: &Network) -> Vec<VarId> {
    let all: Vec<VarId> = (0..net.len()).collect();
    UndirectedGraph::moral(net).min_fill_order(&all)
}

pub(crate) struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}
