//! Estimators that produce a GED value and an edit path, and the
//! min-combiner over them.
//!
//! `gedgw` reports the GW objective at the conditional-gradient optimum and
//! extracts a path from the coupling by k-best matching. `handcrafted-ot`
//! transports over a label and degree cost matrix and reports the length of
//! its path. `ensemble` takes the smaller value and the shorter path.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use thiserror::Error;

use crate::graph::GraphPair;
use crate::gw::{gedgw_solve, GwConfig, GwError};
use crate::kbest::{kbest_gep, KBestConfig, KBestError};
use crate::ot::{extended_sinkhorn, OtError, SinkhornConfig};
use crate::path::{EditPath, NodeMatching};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error(transparent)]
    Gw(#[from] GwError),
    #[error(transparent)]
    Ot(#[from] OtError),
    #[error(transparent)]
    KBest(#[from] KBestError),
    #[error("no estimates to combine")]
    Empty,
    #[error("estimate from {0} carries no path")]
    MissingPath(String),
    #[error("unknown method {0:?}; expected gedgw, handcrafted-ot or ensemble")]
    UnknownMethod(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Gedgw,
    HandcraftedOt,
    Ensemble,
}

impl Method {
    pub fn id(self) -> &'static str {
        match self {
            Method::Gedgw => "gedgw",
            Method::HandcraftedOt => "handcrafted-ot",
            Method::Ensemble => "ensemble",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.id())
    }
}

impl FromStr for Method {
    type Err = EstimateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gedgw" => Ok(Method::Gedgw),
            "handcrafted-ot" => Ok(Method::HandcraftedOt),
            "ensemble" => Ok(Method::Ensemble),
            other => Err(EstimateError::UnknownMethod(other.to_string())),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Estimate {
    pub method: String,
    pub ged_value: f64,
    pub path: Option<EditPath>,
    /// Matching that induced `path`.
    pub matching: Option<NodeMatching>,
    /// `n1 x n2` coupling over real nodes.
    pub coupling: Option<Array2<f64>>,
    /// `<C, pi>` for transport-based estimators.
    pub transport_cost: Option<f64>,
}

impl Estimate {
    pub fn path_len(&self) -> Option<usize> {
        self.path.as_ref().map(EditPath::len)
    }
}

/// Solver settings shared by all estimators.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EstimatorConfig {
    pub sinkhorn: SinkhornConfig,
    pub gw: GwConfig,
    pub kbest: KBestConfig,
}

/// `C[i, j] = [label differs] + |deg(u_i) - deg(v_j)| / 2`, shape `n1 x n2`.
pub fn handcrafted_cost(pair: &GraphPair) -> Array2<f64> {
    let (g1, g2) = (&pair.g1, &pair.g2);
    Array2::from_shape_fn((g1.node_count(), g2.node_count()), |(i, j)| {
        let relabel = if g1.label(i) == g2.label(j) { 0.0 } else { 1.0 };
        relabel + g1.degree(i).abs_diff(g2.degree(j)) as f64 / 2.0
    })
}

pub fn handcrafted_ot_estimate(
    pair: &GraphPair,
    sinkhorn_cfg: &SinkhornConfig,
    kbest_cfg: &KBestConfig,
) -> Result<Estimate, EstimateError> {
    let cost = handcrafted_cost(pair);
    let ot = match extended_sinkhorn(&cost, sinkhorn_cfg) {
        Err(OtError::Unstable { .. }) if !sinkhorn_cfg.log_domain => {
            extended_sinkhorn(&cost, &sinkhorn_cfg.stabilized())?
        }
        other => other?,
    };
    let kb = kbest_gep(pair, &ot.coupling, kbest_cfg)?;
    Ok(Estimate {
        method: Method::HandcraftedOt.id().to_string(),
        ged_value: kb.ged_estimate as f64,
        path: Some(kb.path),
        matching: Some(kb.matching),
        coupling: Some(ot.coupling),
        transport_cost: Some(ot.transport_cost),
    })
}

pub fn gedgw_estimate(
    pair: &GraphPair,
    gw_cfg: &GwConfig,
    kbest_cfg: &KBestConfig,
) -> Result<Estimate, EstimateError> {
    let sol = gedgw_solve(pair, gw_cfg)?;
    let coupling = sol.strip_dummies(pair.g1.node_count());
    let kb = kbest_gep(pair, &coupling, kbest_cfg)?;
    Ok(Estimate {
        method: Method::Gedgw.id().to_string(),
        ged_value: sol.ged_estimate,
        path: Some(kb.path),
        matching: Some(kb.matching),
        coupling: Some(coupling),
        transport_cost: None,
    })
}

/// The estimate with the smallest value; ties keep the earliest.
pub fn ensemble_min(estimates: &[Estimate]) -> Result<&Estimate, EstimateError> {
    estimates
        .iter()
        .reduce(|best, e| {
            if e.ged_value < best.ged_value {
                e
            } else {
                best
            }
        })
        .ok_or(EstimateError::Empty)
}

/// The estimate with the shortest path; ties keep the earliest.
pub fn ensemble_path(estimates: &[Estimate]) -> Result<&Estimate, EstimateError> {
    let mut best: Option<(&Estimate, usize)> = None;
    for e in estimates {
        let len = e
            .path_len()
            .ok_or_else(|| EstimateError::MissingPath(e.method.clone()))?;
        if best.is_none_or(|(_, b)| len < b) {
            best = Some((e, len));
        }
    }
    best.map(|(e, _)| e).ok_or(EstimateError::Empty)
}

/// Combines member estimates: value from [`ensemble_min`], path from
/// [`ensemble_path`].
pub fn combine(estimates: &[Estimate]) -> Result<Estimate, EstimateError> {
    let value = ensemble_min(estimates)?.ged_value;
    let by_path = ensemble_path(estimates)?;
    Ok(Estimate {
        method: Method::Ensemble.id().to_string(),
        ged_value: value,
        path: by_path.path.clone(),
        matching: by_path.matching.clone(),
        coupling: None,
        transport_cost: None,
    })
}

/// Member estimates of `method` in combiner order.
pub fn members(
    pair: &GraphPair,
    method: Method,
    cfg: &EstimatorConfig,
) -> Result<Vec<Estimate>, EstimateError> {
    Ok(match method {
        Method::Gedgw => vec![gedgw_estimate(pair, &cfg.gw, &cfg.kbest)?],
        Method::HandcraftedOt => vec![handcrafted_ot_estimate(pair, &cfg.sinkhorn, &cfg.kbest)?],
        Method::Ensemble => vec![
            gedgw_estimate(pair, &cfg.gw, &cfg.kbest)?,
            handcrafted_ot_estimate(pair, &cfg.sinkhorn, &cfg.kbest)?,
        ],
    })
}

pub fn estimate(
    pair: &GraphPair,
    method: Method,
    cfg: &EstimatorConfig,
) -> Result<Estimate, EstimateError> {
    let mut ms = members(pair, method, cfg)?;
    if method == Method::Ensemble {
        combine(&ms)
    } else {
        Ok(ms.remove(0))
    }
}
