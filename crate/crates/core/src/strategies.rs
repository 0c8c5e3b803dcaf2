//! The two splitting strategies: greedy mini-bucket (MB) and jointree-driven
//! full splits (JT). Both map a network and a size limit to a split network
//! on which exact inference fits the limit.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::min_fill_order;
use crate::jointree::build_jointree;
use crate::model::{Instantiation, Network};
use crate::splitting::{split_mbe, SplitNetwork};
use crate::VarId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Heuristic {
    /// Greedy mini-bucket partitioning; limit caps intermediate factor scopes.
    Mb,
    /// Repeated full splits until the jointree's largest cluster fits.
    Jt,
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Heuristic::Mb => "mb",
            Heuristic::Jt => "jt",
        })
    }
}

impl FromStr for Heuristic {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "mb" => Ok(Heuristic::Mb),
            "jt" => Ok(Heuristic::Jt),
            other => Err(format!("unknown heuristic '{other}' (expected mb or jt)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyConfig {
    pub kind: Heuristic,
    /// Variables per intermediate factor (MB) or per cluster (JT).
    pub limit: usize,
    /// Elimination order for MB; min-fill when absent. Ignored by JT.
    pub order: Option<Vec<VarId>>,
}

impl StrategyConfig {
    pub fn new(kind: Heuristic, limit: usize) -> Self {
        StrategyConfig {
            kind,
            limit,
            order: None,
        }
    }

    pub fn mb(limit: usize) -> Self {
        Self::new(Heuristic::Mb, limit)
    }

    pub fn jt(limit: usize) -> Self {
        Self::new(Heuristic::Jt, limit)
    }

    pub fn with_order(mut self, order: Vec<VarId>) -> Self {
        self.order = Some(order);
        self
    }
}

/// Result of running a strategy.
#[derive(Clone, Debug)]
pub struct Strategy {
    pub split: SplitNetwork,
    /// Elimination order `π'` of the split network (MB only).
    pub order: Option<Vec<VarId>>,
}

/// Dispatches on `cfg.kind`. Evidence only affects MB.
pub fn apply(net: &Network, e: &Instantiation, cfg: &StrategyConfig) -> Result<Strategy> {
    match cfg.kind {
        Heuristic::Mb => {
            let (split, order) = mb_strategy(net, e, cfg)?;
            Ok(Strategy {
                split,
                order: Some(order),
            })
        }
        Heuristic::Jt => Ok(Strategy {
            split: jt_strategy(net, cfg)?,
            order: None,
        }),
    }
}

/// Greedy mini-bucket splitting. A CPT wider than the limit forms a
/// mini-bucket of its own, so the resulting scopes are bounded by
/// `max(limit, largest CPT)`.
pub fn mb_strategy(net: &Network, e: &Instantiation, cfg: &StrategyConfig) -> Result<(SplitNetwork, Vec<VarId>)> {
    if cfg.limit == 0 {
        return Err(Error::ZeroLimit);
    }
    let order = match &cfg.order {
        Some(o) => o.clone(),
        None => min_fill_order(net),
    };
    split_mbe(net, e, &order, cfg.limit)
}

/// A full split of `v` changes the structure only if `v` has children and is
/// not already a root with a single child (splitting such a root would just
/// rename it).
fn is_candidate(net: &Network, v: VarId) -> bool {
    let kids = net.children(v).len();
    kids > 0 && !(kids == 1 && net.parents(v).is_empty())
}

/// Fully splits the variable with the largest removal score until the
/// min-fill jointree's largest cluster is within `cfg.limit`.
///
/// Terminates after at most `n` splits: a split variable loses its
/// children and clones are single-child roots, so neither is split again.
pub fn jt_strategy(net: &Network, cfg: &StrategyConfig) -> Result<SplitNetwork> {
    if cfg.limit == 0 {
        return Err(Error::ZeroLimit);
    }
    if let Some(var) = (0..net.len()).max_by_key(|&v| (net.parents(v).len(), std::cmp::Reverse(v))) {
        let family = net.parents(var).len() + 1;
        if family > cfg.limit {
            return Err(Error::LimitBelowFamily {
                limit: cfg.limit,
                family,
                var,
            });
        }
    }

    let mut sn = SplitNetwork::new(net.clone());
    loop {
        let cur = sn.net();
        let jt = build_jointree(cur, &min_fill_order(cur));
        if jt.max_cluster_size() <= cfg.limit {
            return Ok(sn);
        }
        let mut best: Option<(f64, VarId)> = None;
        for v in (0..cur.len()).filter(|&v| is_candidate(cur, v)) {
            let score = jt.removal_score(cur, v)?;
            if best.is_none_or(|(s, _)| score > s) {
                best = Some((score, v));
            }
        }
        let (_, v) = best.expect("a network with a too-large cluster has a candidate");
        sn = sn.full_split(v)?;
    }
}
