use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::model::{Instantiation, Network};
use crate::VarId;

/// Random DAG over `n` variables: each variable draws up to `max_parents`
/// parents among lower ids, cardinalities in `2..=max_card`, CPT columns
/// with uniform random weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RandomSpec {
    pub n: usize,
    pub max_parents: usize,
    pub max_card: usize,
    pub seed: u64,
}

impl RandomSpec {
    pub fn binary(n: usize, max_parents: usize, seed: u64) -> Self {
        RandomSpec {
            n,
            max_parents,
            max_card: 2,
            seed,
        }
    }
}

pub fn random_network(spec: &RandomSpec) -> Result<Network> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    random_network_with(&mut rng, spec.n, spec.max_parents, spec.max_card)
}

pub fn random_network_with(rng: &mut impl Rng, n: usize, max_parents: usize, max_card: usize) -> Result<Network> {
    let max_card = max_card.max(2);
    let cards: Vec<usize> = (0..n).map(|_| rng.gen_range(2..=max_card)).collect();
    let mut parents: Vec<Vec<VarId>> = Vec::with_capacity(n);
    let mut tables = Vec::with_capacity(n);
    for v in 0..n {
        let np = rng.gen_range(0..=max_parents.min(v));
        let mut ps: Vec<VarId> = sample(rng, v.max(1), np).into_vec();
        ps.sort_unstable();
        let rows: usize = ps.iter().map(|&p| cards[p]).product();
        let mut t = Vec::with_capacity(rows * cards[v]);
        for _ in 0..rows {
            let w: Vec<f64> = (0..cards[v]).map(|_| rng.gen_range(0.05..1.0)).collect();
            let s: f64 = w.iter().sum();
            t.extend(w.iter().map(|x| x / s));
        }
        parents.push(ps);
        tables.push(t);
    }
    let names: Vec<String> = (0..n).map(|v| format!("v{v}")).collect();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    Network::from_probs(&names, &cards, parents, &tables)
}

/// Up to `max_vars` distinct variables set to uniformly chosen values.
pub fn random_evidence(rng: &mut impl Rng, net: &Network, max_vars: usize) -> Instantiation {
    let count = rng.gen_range(0..=max_vars.min(net.len()));
    sample(rng, net.len(), count)
        .into_iter()
        .map(|v| (v, rng.gen_range(0..net.cardinality(v))))
        .collect()
}
