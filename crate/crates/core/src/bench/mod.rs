//! Benchmark instances and sweeps: random code networks over a Gaussian
//! channel, random DAGs, and a CSV harness running strategies and search.

mod coding;
mod random;

pub use coding::{gen_coding_network, CodingInstance, CodingSpec};
pub use random::{random_evidence, random_network, random_network_with, RandomSpec};

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{Instantiation, Network};
use crate::search::{split_bnb, SearchOptions, Space};
use crate::strategies::{apply, StrategyConfig};

/// Column order of the results CSV.
pub const CSV_HEADER: &str = "instance,sigma,seed,heuristic,limit,splits,clones,beta_log,bound_log,mpe_log,space,nodes,time_ms";

/// A network with evidence to benchmark; `sigma`/`seed` are blank for
/// instances that are not generated codes.
#[derive(Clone, Debug)]
pub struct BenchInstance {
    pub id: String,
    pub sigma: Option<f64>,
    pub seed: Option<u64>,
    pub net: Network,
    pub evidence: Instantiation,
}

impl BenchInstance {
    pub fn new(id: impl Into<String>, net: Network, evidence: Instantiation) -> Self {
        BenchInstance {
            id: id.into(),
            sigma: None,
            seed: None,
            net,
            evidence,
        }
    }

    pub fn coding(spec: &CodingSpec) -> Result<Self> {
        let c = gen_coding_network(spec)?;
        Ok(BenchInstance {
            id: format!("code-{}-{}-{}-s{}-{}", spec.k, spec.m, spec.parents_per_parity, spec.sigma, spec.seed),
            sigma: Some(spec.sigma),
            seed: Some(spec.seed),
            net: c.net,
            evidence: c.evidence,
        })
    }
}

/// `seeds_per_sigma` code specs per noise level, seeds numbered from
/// `first_seed` across the whole sweep.
pub fn sigma_sweep(k: usize, m: usize, parents_per_parity: usize, sigmas: &[f64], seeds_per_sigma: usize, first_seed: u64) -> Vec<CodingSpec> {
    let mut out = Vec::with_capacity(sigmas.len() * seeds_per_sigma);
    let mut seed = first_seed;
    for &sigma in sigmas {
        for _ in 0..seeds_per_sigma {
            out.push(CodingSpec {
                k,
                m,
                parents_per_parity,
                sigma,
                seed,
            });
            seed += 1;
        }
    }
    out
}

/// Noise levels 0.2, 0.3, ..., 0.8.
pub fn default_sigmas() -> Vec<f64> {
    (2..=8).map(|i| i as f64 / 10.0).collect()
}

/// One CSV row. Metrics are blank when the step producing them failed or
/// did not run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub instance: String,
    pub sigma: Option<f64>,
    pub seed: Option<u64>,
    pub heuristic: String,
    pub limit: usize,
    pub splits: Option<usize>,
    pub clones: Option<usize>,
    pub beta_log: Option<f64>,
    pub bound_log: Option<f64>,
    pub mpe_log: Option<f64>,
    pub space: String,
    pub nodes: Option<u64>,
    pub time_ms: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BenchSummary {
    pub rows: usize,
    /// `(instance, heuristic, limit, message)` for rows that failed.
    pub failures: Vec<(String, String, usize, String)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchOptions {
    pub heuristics: Vec<StrategyConfig>,
    /// One search per space; with none, only strategy metrics are recorded.
    pub spaces: Vec<Space>,
    pub use_bound: bool,
}

/// Runs every (instance, heuristic, space) combination and writes one row
/// each. Failures are recorded in the summary and leave blank metrics.
pub fn run_bench<W: Write>(instances: &[BenchInstance], opts: &BenchOptions, out: W) -> Result<BenchSummary> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    let mut summary = BenchSummary::default();
    for inst in instances {
        for cfg in &opts.heuristics {
            for rec in bench_rows(inst, cfg, opts, &mut summary) {
                w.serialize(rec)?;
                summary.rows += 1;
            }
        }
    }
    w.flush()?;
    Ok(summary)
}

fn bench_rows(inst: &BenchInstance, cfg: &StrategyConfig, opts: &BenchOptions, summary: &mut BenchSummary) -> Vec<BenchRecord> {
    let blank = |space: String| BenchRecord {
        instance: inst.id.clone(),
        sigma: inst.sigma,
        seed: inst.seed,
        heuristic: cfg.kind.to_string(),
        limit: cfg.limit,
        splits: None,
        clones: None,
        beta_log: None,
        bound_log: None,
        mpe_log: None,
        space,
        nodes: None,
        time_ms: None,
    };
    let spaces: Vec<Option<Space>> = if opts.spaces.is_empty() {
        vec![None]
    } else {
        opts.spaces.iter().copied().map(Some).collect()
    };
    let mut fail = |msg: String| {
        summary
            .failures
            .push((inst.id.clone(), cfg.kind.to_string(), cfg.limit, msg));
    };

    let start = Instant::now();
    let strategy = apply(&inst.net, &inst.evidence, cfg).and_then(|s| {
        let bound = s.split.mpe_bound(&inst.evidence)?;
        Ok((s, bound))
    });
    let strategy_ms = start.elapsed().as_secs_f64() * 1e3;
    let (s, bound) = match strategy {
        Ok(x) => x,
        Err(e) => {
            fail(e.to_string());
            return spaces
                .iter()
                .map(|sp| blank(sp.map(|s| s.to_string()).unwrap_or_default()))
                .collect();
        }
    };

    let mut rows = Vec::with_capacity(spaces.len());
    for sp in spaces {
        let mut rec = blank(sp.map(|s| s.to_string()).unwrap_or_default());
        rec.splits = Some(s.split.split_variables().len());
        rec.clones = Some(s.split.clone_count());
        rec.beta_log = Some(s.split.beta_log());
        rec.bound_log = Some(bound);
        rec.time_ms = Some(strategy_ms);
        if let Some(space) = sp {
            let mut so = SearchOptions::new(space);
            so.use_bound = opts.use_bound;
            let start = Instant::now();
            match split_bnb(&inst.net, &s.split, &inst.evidence, &so) {
                Ok(r) => {
                    rec.mpe_log = Some(r.mpe_log);
                    rec.nodes = Some(r.nodes_visited);
                    rec.time_ms = Some(strategy_ms + start.elapsed().as_secs_f64() * 1e3);
                }
                Err(e) => fail(e.to_string()),
            }
        }
        rows.push(rec);
    }
    rows
}
