//! Brute-force reference: plain probability tables, explicit enumeration.
//! Deliberately shares nothing with the library beyond building a
//! `Network` from the same raw tables.

#![allow(dead_code)]

use nodesplit::{Instantiation, Network};
use rand::Rng;

/// Tables are indexed by parent configuration (first parent most
/// significant) and then by the child's value.
#[derive(Clone, Debug)]
pub struct RawNet {
    pub cards: Vec<usize>,
    pub parents: Vec<Vec<usize>>,
    pub tables: Vec<Vec<f64>>,
}

impl RawNet {
    pub fn random(rng: &mut impl Rng, n: usize, max_parents: usize, max_card: usize) -> RawNet {
        let cards: Vec<usize> = (0..n).map(|_| rng.gen_range(2..=max_card.max(2))).collect();
        let mut parents = Vec::new();
        let mut tables = Vec::new();
        for v in 0..n {
            let mut pool: Vec<usize> = (0..v).collect();
            let k = rng.gen_range(0..=max_parents.min(v));
            let mut ps = Vec::new();
            for _ in 0..k {
                let i = rng.gen_range(0..pool.len());
                ps.push(pool.swap_remove(i));
            }
            let rows: usize = ps.iter().map(|&p| cards[p]).product();
            let mut t = Vec::new();
            for _ in 0..rows {
                let w: Vec<f64> = (0..cards[v]).map(|_| rng.gen_range(0.01..1.0)).collect();
                let s: f64 = w.iter().sum();
                t.extend(w.iter().map(|x| x / s));
            }
            parents.push(ps);
            tables.push(t);
        }
        RawNet { cards, parents, tables }
    }

    pub fn len(&self) -> usize {
        self.cards.len()
    }

    pub fn to_network(&self) -> Network {
        let names: Vec<String> = (0..self.len()).map(|v| format!("x{v}")).collect();
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        Network::from_probs(&names, &self.cards, self.parents.clone(), &self.tables).unwrap()
    }

    pub fn children(&self, v: usize) -> Vec<usize> {
        (0..self.len()).filter(|&c| self.parents[c].contains(&v)).collect()
    }

    pub fn cpt(&self, v: usize, x: &[usize]) -> f64 {
        let mut row = 0;
        for &p in &self.parents[v] {
            row = row * self.cards[p] + x[p];
        }
        self.tables[v][row * self.cards[v] + x[v]]
    }

    pub fn prob(&self, x: &[usize]) -> f64 {
        (0..self.len()).map(|v| self.cpt(v, x)).product()
    }

    /// Adds a uniform root clone of `x` as the parent of `children` in
    /// place of `x`.
    pub fn split(&self, x: usize, children: &[usize]) -> RawNet {
        let mut out = self.clone();
        let clone = self.len();
        out.cards.push(self.cards[x]);
        for &c in children {
            assert!(self.parents[c].contains(&x));
            for p in out.parents[c].iter_mut() {
                if *p == x {
                    *p = clone;
                }
            }
        }
        out.parents.push(Vec::new());
        out.tables.push(vec![1.0 / self.cards[x] as f64; self.cards[x]]);
        out
    }

    pub fn max_log(&self, e: &[(usize, usize)]) -> f64 {
        let mut best = 0.0f64;
        each(&self.cards, |x| {
            if consistent(x, e) {
                best = best.max(self.prob(x));
            }
        });
        best.ln()
    }

    pub fn mpe(&self, e: &[(usize, usize)]) -> (f64, Vec<usize>) {
        let mut best = (-1.0f64, Vec::new());
        each(&self.cards, |x| {
            if consistent(x, e) {
                let p = self.prob(x);
                if p > best.0 {
                    best = (p, x.to_vec());
                }
            }
        });
        (best.0.ln(), best.1)
    }

    pub fn pe_log(&self, e: &[(usize, usize)]) -> f64 {
        let mut total = 0.0;
        each(&self.cards, |x| {
            if consistent(x, e) {
                total += self.prob(x);
            }
        });
        total.ln()
    }
}

/// Calls `f` on every joint assignment, last variable fastest.
pub fn each(cards: &[usize], mut f: impl FnMut(&[usize])) {
    let mut x = vec![0; cards.len()];
    loop {
        f(&x);
        let mut i = cards.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            x[i] += 1;
            if x[i] < cards[i] {
                break;
            }
            x[i] = 0;
        }
    }
}

pub fn consistent(x: &[usize], e: &[(usize, usize)]) -> bool {
    e.iter().all(|&(v, val)| x[v] == val)
}

pub fn random_evidence(rng: &mut impl Rng, cards: &[usize], max_vars: usize) -> Vec<(usize, usize)> {
    let mut vars: Vec<usize> = (0..cards.len()).collect();
    let k = rng.gen_range(0..=max_vars.min(cards.len()));
    let mut e = Vec::new();
    for _ in 0..k {
        let v = vars.swap_remove(rng.gen_range(0..vars.len()));
        e.push((v, rng.gen_range(0..cards[v])));
    }
    e
}

pub fn inst(e: &[(usize, usize)]) -> Instantiation {
    e.iter().copied().collect()
}

/// Evidence extended to clones: `clone_of[c]` is the base variable behind
/// clone `c` (indexed from the first clone).
pub fn extend(e: &[(usize, usize)], base_len: usize, clone_of: &[usize]) -> Vec<(usize, usize)> {
    let mut out = e.to_vec();
    for (i, &orig) in clone_of.iter().enumerate() {
        if let Some(&(_, val)) = e.iter().find(|(v, _)| *v == orig) {
            out.push((base_len + i, val));
        }
    }
    out
}

pub fn near(a: f64, b: f64, tol: f64) -> bool {
    (a == b) || (a - b).abs() <= tol
}

/// Random split on the raw network and the library split network in
/// lockstep. `clone_of` tracks base originals; returns false when no
/// variable has children.
pub fn random_split(
    rng: &mut impl Rng,
    raw: &mut RawNet,
    sn: &mut nodesplit::splitting::SplitNetwork,
    clone_of: &mut Vec<usize>,
    base_len: usize,
) -> bool {
    let candidates: Vec<usize> = (0..raw.len()).filter(|&v| !raw.children(v).is_empty()).collect();
    if candidates.is_empty() {
        return false;
    }
    let x = candidates[rng.gen_range(0..candidates.len())];
    let kids = raw.children(x);
    let mut subset: Vec<usize> = kids.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
    if subset.is_empty() {
        subset.push(kids[rng.gen_range(0..kids.len())]);
    }
    *raw = raw.split(x, &subset);
    *sn = sn.split_node(x, &subset).unwrap();
    clone_of.push(if x >= base_len { clone_of[x - base_len] } else { x });
    true
}
