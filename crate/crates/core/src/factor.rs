//! Dense log-domain factors.
//!
//! Tables are row-major with the last scope variable varying fastest, the
//! same layout the UAI format uses for CPTs. Zero probabilities are `-inf`.

use crate::error::{Error, Result};
use crate::logspace::{log_sum_exp, to_log};
use crate::model::Instantiation;
use crate::VarId;

/// Which marginalization an elimination performs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    /// Max-product (MPE).
    Max,
    /// Sum-product (probability of evidence).
    Sum,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Factor {
    vars: Vec<VarId>,
    cards: Vec<usize>,
    table: Vec<f64>,
}

fn strides_of(cards: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; cards.len()];
    for k in (0..cards.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * cards[k + 1];
    }
    strides
}

/// Walks every index of a table with shape `cards`, yielding the offset
/// into a second table whose per-dimension strides are `strides`.
fn for_each_offset(cards: &[usize], strides: &[usize], base: usize, mut f: impl FnMut(usize)) {
    let n = cards.len();
    let total: usize = cards.iter().product();
    let mut counter = vec![0usize; n];
    let mut offset = base;
    for _ in 0..total {
        f(offset);
        let mut k = n;
        while k > 0 {
            k -= 1;
            counter[k] += 1;
            offset += strides[k];
            if counter[k] < cards[k] {
                break;
            }
            offset -= strides[k] * cards[k];
            counter[k] = 0;
        }
    }
}

impl Factor {
    /// Builds a factor from a log-domain table.
    pub fn new(vars: Vec<VarId>, cards: Vec<usize>, table: Vec<f64>) -> Result<Self> {
        assert_eq!(vars.len(), cards.len(), "scope and cardinality lengths differ");
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(Error::DuplicateVariable { var: *v });
            }
        }
        let expected: usize = cards.iter().product();
        if table.len() != expected {
            return Err(Error::TableLength {
                var: vars.last().copied().unwrap_or(0),
                expected,
                found: table.len(),
            });
        }
        Ok(Factor { vars, cards, table })
    }

    /// Builds a factor from linear-domain probabilities.
    pub fn from_probs(vars: Vec<VarId>, cards: Vec<usize>, probs: &[f64]) -> Result<Self> {
        Self::new(vars, cards, probs.iter().map(|&p| to_log(p)).collect())
    }

    pub fn scalar(log_value: f64) -> Self {
        Factor {
            vars: Vec::new(),
            cards: Vec::new(),
            table: vec![log_value],
        }
    }

    /// The all-ones factor (all zeros in log-domain).
    pub fn unit(vars: Vec<VarId>, cards: Vec<usize>) -> Self {
        let len = cards.iter().product();
        Factor {
            vars,
            cards,
            table: vec![0.0; len],
        }
    }

    pub fn vars(&self) -> &[VarId] {
        &self.vars
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn is_scalar(&self) -> bool {
        self.vars.is_empty()
    }

    /// Value of an empty-scope factor.
    pub fn scalar_value(&self) -> Option<f64> {
        self.is_scalar().then(|| self.table[0])
    }

    pub fn contains(&self, var: VarId) -> bool {
        self.vars.contains(&var)
    }

    pub fn position(&self, var: VarId) -> Option<usize> {
        self.vars.iter().position(|&v| v == var)
    }

    pub fn cardinality(&self, var: VarId) -> Option<usize> {
        self.position(var).map(|p| self.cards[p])
    }

    pub fn strides(&self) -> Vec<usize> {
        strides_of(&self.cards)
    }

    /// Entry for the assignment given by `value_of(var)` for each scope variable.
    pub fn value_with(&self, value_of: impl Fn(VarId) -> usize) -> f64 {
        let mut idx = 0;
        for (v, c) in self.vars.iter().zip(&self.cards) {
            idx = idx * c + value_of(*v);
        }
        self.table[idx]
    }

    /// Entry for a complete assignment indexed by variable id.
    pub fn value_at(&self, full: &[usize]) -> f64 {
        self.value_with(|v| full[v])
    }

    /// Decodes a flat table index into per-scope values.
    pub fn decode(&self, mut idx: usize) -> Vec<usize> {
        let mut values = vec![0; self.vars.len()];
        for k in (0..self.vars.len()).rev() {
            values[k] = idx % self.cards[k];
            idx /= self.cards[k];
        }
        values
    }

    /// Replaces variable `from` by `to` in the scope, keeping the table.
    pub fn rename(&self, from: VarId, to: VarId) -> Factor {
        let mut out = self.clone();
        for v in out.vars.iter_mut() {
            if *v == from {
                *v = to;
            }
        }
        out
    }

    /// Reorders the scope to `vars` (a permutation of the current scope).
    pub fn permute(&self, vars: &[VarId]) -> Result<Factor> {
        assert_eq!(vars.len(), self.vars.len(), "permute needs the same scope");
        let own = self.strides();
        let mut cards = Vec::with_capacity(vars.len());
        let mut strides = Vec::with_capacity(vars.len());
        for &v in vars {
            let p = self.position(v).ok_or(Error::NotInScope { var: v })?;
            cards.push(self.cards[p]);
            strides.push(own[p]);
        }
        let mut table = Vec::with_capacity(self.table.len());
        for_each_offset(&cards, &strides, 0, |o| table.push(self.table[o]));
        Ok(Factor {
            vars: vars.to_vec(),
            cards,
            table,
        })
    }

    /// Pointwise product. The result's scope is this factor's scope followed
    /// by the other factor's new variables in their order.
    pub fn multiply(&self, other: &Factor) -> Result<Factor> {
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        for (v, &c) in other.vars.iter().zip(&other.cards) {
            match self.position(*v) {
                Some(p) if self.cards[p] != c => {
                    return Err(Error::CardinalityMismatch {
                        var: *v,
                        left: self.cards[p],
                        right: c,
                    })
                }
                Some(_) => {}
                None => {
                    vars.push(*v);
                    cards.push(c);
                }
            }
        }
        let sf = self.strides();
        let sg = other.strides();
        let n = vars.len();
        let mut stride_f = vec![0; n];
        let mut stride_g = vec![0; n];
        for (k, v) in vars.iter().enumerate() {
            if let Some(p) = self.position(*v) {
                stride_f[k] = sf[p];
            }
            if let Some(p) = other.position(*v) {
                stride_g[k] = sg[p];
            }
        }

        let total: usize = cards.iter().product();
        let mut table = Vec::with_capacity(total);
        let mut counter = vec![0usize; n];
        let (mut i_f, mut i_g) = (0usize, 0usize);
        for _ in 0..total {
            table.push(self.table[i_f] + other.table[i_g]);
            let mut k = n;
            while k > 0 {
                k -= 1;
                counter[k] += 1;
                i_f += stride_f[k];
                i_g += stride_g[k];
                if counter[k] < cards[k] {
                    break;
                }
                i_f -= stride_f[k] * cards[k];
                i_g -= stride_g[k] * cards[k];
                counter[k] = 0;
            }
        }
        Ok(Factor { vars, cards, table })
    }

    /// Splits the scope around `var` into (outer, card, inner) block sizes.
    fn blocks(&self, var: VarId) -> Result<(usize, usize, usize, usize)> {
        let p = self.position(var).ok_or(Error::NotInScope { var })?;
        let outer: usize = self.cards[..p].iter().product();
        let inner: usize = self.cards[p + 1..].iter().product();
        Ok((p, outer, self.cards[p], inner))
    }

    fn without(&self, p: usize, table: Vec<f64>) -> Factor {
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(p);
        cards.remove(p);
        Factor { vars, cards, table }
    }

    /// Maximizes `var` out of the factor.
    pub fn max_out(&self, var: VarId) -> Result<Factor> {
        self.max_out_with_argmax(var).map(|(f, _)| f)
    }

    /// Maximizes `var` out, also returning, per output entry, the value of
    /// `var` attaining the maximum. Ties go to the lowest value index.
    pub fn max_out_with_argmax(&self, var: VarId) -> Result<(Factor, Vec<usize>)> {
        let (p, outer, card, inner) = self.blocks(var)?;
        let mut table = vec![f64::NEG_INFINITY; outer * inner];
        let mut arg = vec![0usize; outer * inner];
        for o in 0..outer {
            for x in 0..card {
                let src = &self.table[(o * card + x) * inner..(o * card + x + 1) * inner];
                let dst = &mut table[o * inner..(o + 1) * inner];
                let am = &mut arg[o * inner..(o + 1) * inner];
                for r in 0..inner {
                    if src[r] > dst[r] {
                        dst[r] = src[r];
                        am[r] = x;
                    }
                }
            }
        }
        Ok((self.without(p, table), arg))
    }

    /// Sums `var` out of the factor (log-sum-exp).
    pub fn sum_out(&self, var: VarId) -> Result<Factor> {
        let (p, outer, card, inner) = self.blocks(var)?;
        let mut table = Vec::with_capacity(outer * inner);
        let mut buf = vec![0.0; card];
        for o in 0..outer {
            for r in 0..inner {
                for (x, b) in buf.iter_mut().enumerate() {
                    *b = self.table[(o * card + x) * inner + r];
                }
                table.push(log_sum_exp(&buf));
            }
        }
        Ok(self.without(p, table))
    }

    pub fn eliminate(&self, var: VarId, op: Op) -> Result<Factor> {
        match op {
            Op::Max => self.max_out(var),
            Op::Sum => self.sum_out(var),
        }
    }

    /// Marginalizes every scope variable, yielding a log-value.
    pub fn reduce_all(&self, op: Op) -> f64 {
        match op {
            Op::Max => self.table.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Op::Sum => log_sum_exp(&self.table),
        }
    }

    /// Restricts the factor to the rows consistent with `e`; assigned
    /// variables leave the scope. Variables of `e` outside the scope are
    /// ignored.
    pub fn condition(&self, e: &Instantiation) -> Factor {
        if !self.vars.iter().any(|v| e.get(*v).is_some()) {
            return self.clone();
        }
        let strides = self.strides();
        let mut base = 0;
        let mut vars = Vec::new();
        let mut cards = Vec::new();
        let mut rest = Vec::new();
        for (k, v) in self.vars.iter().enumerate() {
            match e.get(*v) {
                Some(val) => base += val * strides[k],
                None => {
                    vars.push(*v);
                    cards.push(self.cards[k]);
                    rest.push(strides[k]);
                }
            }
        }
        let mut table = Vec::with_capacity(cards.iter().product());
        for_each_offset(&cards, &rest, base, |o| table.push(self.table[o]));
        Factor { vars, cards, table }
    }

    /// Maximizing assignment of the whole table, lowest index on ties.
    pub fn argmax(&self) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (i, &v) in self.table.iter().enumerate() {
            if v > best.1 {
                best = (i, v);
            }
        }
        best
    }
}
