use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::VarId;

/// A factor consumed by an iteration: either an input factor (by index,
/// which for network runs is the id of the variable owning the CPT) or the
/// factor produced by an earlier iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FactorRef {
    Input(usize),
    Iteration(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Iteration {
    /// Variable eliminated at this iteration.
    pub var: VarId,
    /// The factor set `S_i`, in selection order.
    pub selected: Vec<FactorRef>,
    /// Scope of the product of `selected`, before elimination.
    pub product_scope: Vec<VarId>,
    /// Scope of the produced factor `f_i`.
    pub output_scope: Vec<VarId>,
}

/// Execution trace of an elimination run. Reversing the edges gives a
/// forest, since each produced factor is consumed at most once.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub(crate) inputs: Vec<Vec<VarId>>,
    pub(crate) iterations: Vec<Iteration>,
}

/// Nodes and edges `j -> i` of a subtrace.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Subtrace {
    pub nodes: BTreeSet<usize>,
    pub edges: BTreeSet<(usize, usize)>,
}

impl Trace {
    pub fn iterations(&self) -> &[Iteration] {
        &self.iterations
    }

    pub fn len(&self) -> usize {
        self.iterations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterations.is_empty()
    }

    /// Scopes of the input factors (after evidence was incorporated).
    pub fn input_scopes(&self) -> &[Vec<VarId>] {
        &self.inputs
    }

    /// Edges `j -> i` labeled with the scope of `f_j`.
    pub fn edges(&self) -> Vec<(usize, usize, &[VarId])> {
        let mut out = Vec::new();
        for (i, it) in self.iterations.iter().enumerate() {
            for r in &it.selected {
                if let FactorRef::Iteration(j) = *r {
                    out.push((j, i, self.iterations[j].output_scope.as_slice()));
                }
            }
        }
        out
    }

    /// Largest product scope, in variables, over all iterations.
    pub fn max_product_scope(&self) -> usize {
        self.iterations
            .iter()
            .map(|it| it.product_scope.len())
            .max()
            .unwrap_or(0)
    }

    fn check(&self, i: usize) -> Result<()> {
        if i >= self.iterations.len() {
            return Err(Error::InvalidIteration {
                index: i,
                count: self.iterations.len(),
            });
        }
        Ok(())
    }

    /// The part of the trace relevant to iteration `i`: everything reachable
    /// from `i` by walking edges backwards, following only edges whose factor
    /// mentions the variable eliminated at `i`.
    pub fn subtrace(&self, i: usize) -> Result<Subtrace> {
        self.check(i)?;
        let x = self.iterations[i].var;
        let mut sub = Subtrace::default();
        sub.nodes.insert(i);
        let mut stack = vec![i];
        while let Some(node) = stack.pop() {
            for r in &self.iterations[node].selected {
                if let FactorRef::Iteration(j) = *r {
                    if self.iterations[j].output_scope.contains(&x) {
                        sub.edges.insert((j, node));
                        if sub.nodes.insert(j) {
                            stack.push(j);
                        }
                    }
                }
            }
        }
        Ok(sub)
    }

    /// Variables whose CPTs feed the partial elimination at iteration `i`
    /// and mention the eliminated variable.
    pub fn basis(&self, i: usize) -> Result<BTreeSet<VarId>> {
        let x = self.iterations.get(i).map(|it| it.var);
        let sub = self.subtrace(i)?;
        let x = x.expect("checked by subtrace");
        let mut basis = BTreeSet::new();
        for &node in &sub.nodes {
            for r in &self.iterations[node].selected {
                if let FactorRef::Input(y) = *r {
                    if self.inputs[y].contains(&x) {
                        basis.insert(y);
                    }
                }
            }
        }
        Ok(basis)
    }

    /// Iterations whose factor sets contain only input factors.
    pub fn is_leaf(&self, i: usize) -> bool {
        self.iterations[i]
            .selected
            .iter()
            .all(|r| matches!(r, FactorRef::Input(_)))
    }

    /// Graphviz rendering: one node per iteration, edges labeled by the
    /// scope of the factor they carry.
    pub fn to_dot(&self, name: impl Fn(VarId) -> String) -> String {
        let mut out = String::from("digraph trace {\n  rankdir=BT;\n");
        for (i, it) in self.iterations.iter().enumerate() {
            let _ = writeln!(out, "  n{i} [label=\"{i}: eliminate {}\"];", name(it.var));
        }
        for (j, i, scope) in self.edges() {
            let label: Vec<String> = scope.iter().map(|&v| name(v)).collect();
            let _ = writeln!(out, "  n{j} -> n{i} [label=\"{{{}}}\"];", label.join(", "));
        }
        out.push_str("}\n");
        out
    }
}
