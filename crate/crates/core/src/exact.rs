//! Selectable exact inference engine used for bound evaluation.

use crate::elimination::ve;
use crate::error::Result;
use crate::factor::Op;
use crate::graph::min_fill_order;
use crate::jointree::{build_jointree, Jointree};
use crate::model::{Instantiation, Network};
use crate::VarId;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Engine {
    /// Variable elimination along the min-fill order.
    Ve,
    /// Jointree propagation on a min-fill triangulation.
    #[default]
    Jointree,
}

/// Per-network state for repeated exact queries with varying evidence.
#[derive(Clone, Debug)]
pub struct ExactInference {
    engine: Engine,
    order: Vec<VarId>,
    jointree: Option<Jointree>,
}

impl ExactInference {
    pub fn new(net: &Network, engine: Engine) -> Self {
        let order = min_fill_order(net);
        let jointree = (engine == Engine::Jointree).then(|| build_jointree(net, &order));
        ExactInference {
            engine,
            order,
            jointree,
        }
    }

    pub fn engine(&self) -> Engine {
        self.engine
    }

    /// Log MPE probability or log probability of `e`; with `want_argmax`
    /// and [`Op::Max`], a maximizer that includes `e`.
    pub fn query(
        &self,
        net: &Network,
        e: &Instantiation,
        op: Op,
        want_argmax: bool,
    ) -> Result<(f64, Option<Instantiation>)> {
        match &self.jointree {
            Some(jt) => jt.propagate(net, e, op, want_argmax),
            None => {
                let factors = net.conditioned_cpts(e);
                let r = ve(&factors, &self.order, op)?;
                let argmax = if want_argmax { r.argmax.map(|x| x.merged(e)) } else { None };
                Ok((r.value, argmax))
            }
        }
    }
}
