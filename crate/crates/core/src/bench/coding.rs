use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Instantiation, Network};
use crate::VarId;

/// Parameters of a random linear code sent over a Gaussian channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodingSpec {
    /// Information bits.
    pub k: usize,
    /// Parity bits.
    pub m: usize,
    pub parents_per_parity: usize,
    /// Channel noise standard deviation.
    pub sigma: f64,
    pub seed: u64,
}

impl CodingSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.m == 0 {
            return Err(Error::CodingSpec("k and m must be at least 1".into()));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::CodingSpec(format!("sigma must be positive, got {}", self.sigma)));
        }
        if self.parents_per_parity == 0 || self.parents_per_parity > self.k {
            return Err(Error::CodingSpec(format!(
                "parents per parity must be in 1..={}, got {}",
                self.k, self.parents_per_parity
            )));
        }
        Ok(())
    }
}

/// A generated code network with its channel evidence and the transmitted
/// codeword (information bits then parity bits).
#[derive(Clone, Debug)]
pub struct CodingInstance {
    pub net: Network,
    pub evidence: Instantiation,
    pub codeword: Vec<usize>,
}

/// Layout: information bits `u*` (ids `0..k`), parity bits `p*` (ids
/// `k..k+m`), then one observation leaf `y*` per transmitted bit. Each
/// leaf's CPT rows hold the normalized channel likelihoods of the received
/// signal, and the leaf is observed in state 0.
pub fn gen_coding_network(spec: &CodingSpec) -> Result<CodingInstance> {
    spec.validate()?;
    let (k, m, p) = (spec.k, spec.m, spec.parents_per_parity);
    let bits = k + m;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut names = Vec::with_capacity(2 * bits);
    let mut parents: Vec<Vec<VarId>> = Vec::with_capacity(2 * bits);
    let mut tables: Vec<Vec<f64>> = Vec::with_capacity(2 * bits);

    for i in 0..k {
        names.push(format!("u{i}"));
        parents.push(Vec::new());
        tables.push(vec![0.5, 0.5]);
    }
    for j in 0..m {
        let mut ps: Vec<VarId> = sample(&mut rng, k, p).into_vec();
        ps.sort_unstable();
        let mut t = Vec::with_capacity(2 << p);
        for row in 0..1usize << p {
            let parity = row.count_ones() as usize % 2;
            t.extend(if parity == 0 { [1.0, 0.0] } else { [0.0, 1.0] });
        }
        names.push(format!("p{j}"));
        parents.push(ps);
        tables.push(t);
    }

    let mut codeword: Vec<usize> = (0..k).map(|_| rng.gen_range(0..2)).collect();
    for j in 0..m {
        let x = parents[k + j].iter().map(|&u| codeword[u]).sum::<usize>() % 2;
        codeword.push(x);
    }

    let noise = Normal::new(0.0, spec.sigma).map_err(|e| Error::CodingSpec(e.to_string()))?;
    let var2 = spec.sigma * spec.sigma;
    for (t, &b) in codeword.iter().enumerate() {
        let y = (2.0 * b as f64 - 1.0) + noise.sample(&mut rng);
        // log N(y; +1) - log N(y; -1)
        let d = 2.0 * y / var2;
        let l0 = 1.0 / (1.0 + d.exp());
        let l1 = 1.0 / (1.0 + (-d).exp());
        names.push(format!("y{t}"));
        parents.push(vec![t]);
        tables.push(vec![l0, 1.0 - l0, l1, 1.0 - l1]);
    }

    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    let net = Network::from_probs(&names, &vec![2; 2 * bits], parents, &tables)?;
    let evidence = (bits..2 * bits).map(|v| (v, 0)).collect();
    Ok(CodingInstance {
        net,
        evidence,
        codeword,
    })
}
