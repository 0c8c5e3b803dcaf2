//! Discrete Bayesian networks, instantiations and the UAI text formats.

mod uai;

pub use uai::{parse_evidence, parse_uai, serialize_evidence, serialize_uai};

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::factor::Factor;
use crate::logspace::log_sum_exp;
use crate::VarId;

/// Column sums may deviate from one by at most this much.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub id: VarId,
    pub name: String,
    pub cardinality: usize,
}

/// A DAG of discrete variables with one CPT per variable.
///
/// CPT scopes are the family: parents in declared order, child last.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    variables: Vec<Variable>,
    parents: Vec<Vec<VarId>>,
    children: Vec<Vec<VarId>>,
    cpts: Vec<Factor>,
}

impl Network {
    /// Validates and assembles a network. Columns whose sums are within
    /// [`NORMALIZATION_TOLERANCE`] of one are renormalized.
    pub fn new(variables: Vec<Variable>, parents: Vec<Vec<VarId>>, cpts: Vec<Factor>) -> Result<Self> {
        let n = variables.len();
        assert_eq!(parents.len(), n, "one parent list per variable");
        assert_eq!(cpts.len(), n, "one CPT per variable");
        for (i, v) in variables.iter().enumerate() {
            assert_eq!(v.id, i, "variable ids must be dense and ordered");
            if v.cardinality == 0 {
                return Err(Error::ZeroCardinality { var: i });
            }
        }
        let mut children = vec![Vec::new(); n];
        for (child, ps) in parents.iter().enumerate() {
            for (k, &p) in ps.iter().enumerate() {
                if p >= n {
                    return Err(Error::VariableOutOfRange { var: p, count: n });
                }
                if p == child || ps[..k].contains(&p) {
                    return Err(Error::FamilyMismatch { var: child });
                }
                children[p].push(child);
            }
        }
        let mut cpts = cpts;
        for (child, cpt) in cpts.iter_mut().enumerate() {
            let expected: Vec<VarId> = parents[child].iter().copied().chain([child]).collect();
            if cpt.vars() != expected.as_slice() {
                return Err(Error::FamilyMismatch { var: child });
            }
            for (&v, &c) in cpt.vars().iter().zip(cpt.cards()) {
                if c != variables[v].cardinality {
                    return Err(Error::FamilyMismatch { var: child });
                }
            }
            *cpt = normalize_columns(cpt, child)?;
        }
        let net = Network {
            variables,
            parents,
            children,
            cpts,
        };
        net.topological_order()?;
        Ok(net)
    }

    /// Convenience constructor from linear-domain tables.
    pub fn from_probs(
        names: &[&str],
        cards: &[usize],
        parents: Vec<Vec<VarId>>,
        tables: &[Vec<f64>],
    ) -> Result<Self> {
        let variables: Vec<Variable> = names
            .iter()
            .zip(cards)
            .enumerate()
            .map(|(id, (name, &cardinality))| Variable {
                id,
                name: name.to_string(),
                cardinality,
            })
            .collect();
        let mut cpts = Vec::with_capacity(tables.len());
        for (child, table) in tables.iter().enumerate() {
            let vars: Vec<VarId> = parents[child].iter().copied().chain([child]).collect();
            let cs: Vec<usize> = vars.iter().map(|&v| cards[v]).collect();
            for &p in table {
                if !(0.0..=1.0 + NORMALIZATION_TOLERANCE).contains(&p) {
                    return Err(Error::InvalidEntry { var: child, value: p });
                }
            }
            cpts.push(Factor::from_probs(vars, cs, table).map_err(|e| match e {
                Error::TableLength { expected, found, .. } => Error::TableLength {
                    var: child,
                    expected,
                    found,
                },
                other => other,
            })?);
        }
        Self::new(variables, parents, cpts)
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.variables[id]
    }

    pub fn cardinality(&self, id: VarId) -> usize {
        self.variables[id].cardinality
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.variables.iter().map(|v| v.cardinality).collect()
    }

    pub fn parents(&self, id: VarId) -> &[VarId] {
        &self.parents[id]
    }

    pub fn children(&self, id: VarId) -> &[VarId] {
        &self.children[id]
    }

    pub fn cpt(&self, id: VarId) -> &Factor {
        &self.cpts[id]
    }

    pub fn cpts(&self) -> &[Factor] {
        &self.cpts
    }

    /// Parents followed by the variable itself.
    pub fn family(&self, id: VarId) -> Vec<VarId> {
        self.parents[id].iter().copied().chain([id]).collect()
    }

    pub fn max_family_size(&self) -> usize {
        self.parents.iter().map(|p| p.len() + 1).max().unwrap_or(0)
    }

    /// Kahn's algorithm; ties broken by lowest id.
    pub fn topological_order(&self) -> Result<Vec<VarId>> {
        let n = self.len();
        let mut indeg: Vec<usize> = self.parents.iter().map(|p| p.len()).collect();
        let mut ready: std::collections::BTreeSet<VarId> =
            (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &c in &self.children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        if order.len() < n {
            let var = (0..n).find(|&v| indeg[v] > 0).unwrap_or(0);
            return Err(Error::Cyclic { var });
        }
        Ok(order)
    }

    /// Log-probability of a complete instantiation given as values by id.
    pub fn log_prob(&self, full: &[usize]) -> f64 {
        self.cpts.iter().map(|f| f.value_at(full)).sum()
    }

    /// CPTs with `e` incorporated.
    pub fn conditioned_cpts(&self, e: &Instantiation) -> Vec<Factor> {
        self.cpts.iter().map(|f| f.condition(e)).collect()
    }

    /// Checks that `e` only mentions variables of this network with valid values.
    pub fn check_instantiation(&self, e: &Instantiation) -> Result<()> {
        for (var, value) in e.iter() {
            if var >= self.len() {
                return Err(Error::VariableOutOfRange {
                    var,
                    count: self.len(),
                });
            }
            if value >= self.cardinality(var) {
                return Err(Error::ValueOutOfRange {
                    var,
                    value,
                    cardinality: self.cardinality(var),
                });
            }
        }
        Ok(())
    }
}

fn normalize_columns(cpt: &Factor, child: VarId) -> Result<Factor> {
    for &x in cpt.table() {
        if x.is_nan() || x > NORMALIZATION_TOLERANCE {
            return Err(Error::InvalidEntry { var: child, value: x.exp() });
        }
    }
    let card = *cpt.cards().last().expect("family contains the child");
    let mut table = cpt.table().to_vec();
    for column in table.chunks_mut(card) {
        let log_sum = log_sum_exp(column);
        let sum = log_sum.exp();
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::Unnormalized { var: child, sum });
        }
        for x in column.iter_mut() {
            *x -= log_sum;
        }
    }
    Factor::new(cpt.vars().to_vec(), cpt.cards().to_vec(), table)
}

/// A partial assignment of values to variables.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Instantiation(BTreeMap<VarId, usize>);

impl Instantiation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (VarId, usize)>) -> Self {
        Instantiation(pairs.into_iter().collect())
    }

    /// Assigns every variable; `values[v]` is the value of variable `v`.
    pub fn complete(values: &[usize]) -> Self {
        Self::from_pairs(values.iter().copied().enumerate())
    }

    pub fn get(&self, var: VarId) -> Option<usize> {
        self.0.get(&var).copied()
    }

    pub fn contains(&self, var: VarId) -> bool {
        self.0.contains_key(&var)
    }

    pub fn set(&mut self, var: VarId, value: usize) {
        self.0.insert(var, value);
    }

    pub fn remove(&mut self, var: VarId) -> Option<usize> {
        self.0.remove(&var)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, usize)> + '_ {
        self.0.iter().map(|(&k, &v)| (k, v))
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.0.keys().copied()
    }

    /// Union; `other` wins on conflicts.
    pub fn merged(&self, other: &Instantiation) -> Instantiation {
        let mut out = self.clone();
        out.0.extend(other.0.iter().map(|(&k, &v)| (k, v)));
        out
    }

    /// Keeps only assignments to variables below `n`.
    pub fn truncated(&self, n: usize) -> Instantiation {
        Instantiation(self.0.range(..n).map(|(&k, &v)| (k, v)).collect())
    }

    /// Whether the two instantiations agree on every common variable.
    pub fn compatible(&self, other: &Instantiation) -> bool {
        self.iter().all(|(k, v)| other.get(k).is_none_or(|w| w == v))
    }

    /// Dense value vector of length `n`, if every variable below `n` is assigned.
    pub fn to_dense(&self, n: usize) -> Option<Vec<usize>> {
        (0..n).map(|v| self.get(v)).collect()
    }
}

impl FromIterator<(VarId, usize)> for Instantiation {
    fn from_iter<I: IntoIterator<Item = (VarId, usize)>>(iter: I) -> Self {
        Self::from_pairs(iter)
    }
}
