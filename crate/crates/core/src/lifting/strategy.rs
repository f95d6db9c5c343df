use std::sync::Arc;

use nalgebra::DVector;

use super::Responses;
use crate::error::{Error, Result};
use crate::linalg::orthonormalize;

/// A query is accepted when its residual against the inputs keeps at least
/// this fraction of its norm.
const ACCEPT_TOL: f64 = 1e-6;

/// The k-th query function of a deterministic adaptive algorithm. `propose`
/// may return any vector; [`AdaptiveAlgorithm`] turns it into a unit vector
/// orthogonal to the inputs.
pub trait QueryStrategy: Send + Sync {
    fn name(&self) -> &str;

    /// First query, before any response is known.
    fn first(&self, n: usize) -> DVector<f64>;

    /// Raw k-th query (`k ≥ 2`) from `{Aⁱv_j}_{H_{k−1}}`.
    fn propose(&self, k: usize, inputs: &Responses) -> DVector<f64>;
}

/// Projects `raw` off the span of `inputs` and normalizes. When `raw` lies
/// in that span it is replaced by `raw ∘ |raw|`, then by the standard basis
/// vector with the largest residual.
pub fn orthogonal_query(raw: &DVector<f64>, inputs: &Responses, n: usize) -> Result<DVector<f64>> {
    if raw.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: raw.len() });
    }
    let units: Vec<DVector<f64>> = inputs
        .vectors()
        .filter_map(|v| {
            let nv = v.norm();
            (nv > 0.0 && nv.is_finite()).then(|| v / nv)
        })
        .collect();
    let (basis, _) = orthonormalize(n, &units);
    let lifted = raw.map(|x| x * x.abs());
    for cand in [raw, &lifted] {
        let cn = cand.norm();
        if cn == 0.0 || !cn.is_finite() {
            continue;
        }
        let r = basis.residual(cand);
        let rn = r.norm();
        if rn > ACCEPT_TOL * cn {
            return Ok(r / rn);
        }
    }
    let mut best: Option<(f64, DVector<f64>)> = None;
    for i in 0..n {
        let r = basis.residual(&DVector::from_fn(n, |t, _| if t == i { 1.0 } else { 0.0 }));
        let rn = r.norm();
        if best.as_ref().is_none_or(|(b, _)| rn > *b) {
            best = Some((rn, r));
        }
    }
    match best {
        Some((rn, r)) if rn > ACCEPT_TOL => Ok(r / rn),
        _ => Err(Error::RankCollapse),
    }
}

/// K query functions wrapped so every emitted query is unit and orthogonal
/// to the responses it was computed from.
#[derive(Clone)]
pub struct AdaptiveAlgorithm {
    k: usize,
    strategy: Arc<dyn QueryStrategy>,
}

impl std::fmt::Debug for AdaptiveAlgorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AdaptiveAlgorithm").field("k", &self.k).field("strategy", &self.strategy.name()).finish()
    }
}

impl AdaptiveAlgorithm {
    pub fn new(k: usize, strategy: Arc<dyn QueryStrategy>) -> Result<Self> {
        if k == 0 {
            return Err(Error::config("an adaptive algorithm needs at least one query"));
        }
        Ok(Self { k, strategy })
    }

    pub fn by_name(name: &str, k: usize) -> Result<Self> {
        Self::new(k, strategy_by_name(name)?)
    }

    /// Number of queries `K`.
    pub fn queries(&self) -> usize {
        self.k
    }

    pub fn strategy(&self) -> &dyn QueryStrategy {
        self.strategy.as_ref()
    }

    /// The k-th query (1-based) from `{Aⁱv_j}_{H_{k−1}}`.
    pub fn query(&self, k: usize, n: usize, inputs: &Responses) -> Result<DVector<f64>> {
        let raw = if k == 1 { self.strategy.first(n) } else { self.strategy.propose(k, inputs) };
        orthogonal_query(&raw, inputs, n)
    }
}

fn ones(n: usize) -> DVector<f64> {
    DVector::from_element(n, 1.0 / (n as f64).sqrt())
}

fn basis_vector(n: usize, i: usize) -> DVector<f64> {
    DVector::from_fn(n, |t, _| if t == i % n { 1.0 } else { 0.0 })
}

/// Starts from the normalized all-ones vector and asks for `A^{k−1}v₁`.
#[derive(Clone, Copy, Debug, Default)]
pub struct PowerMethod;

impl QueryStrategy for PowerMethod {
    fn name(&self) -> &str {
        "power-method"
    }

    fn first(&self, n: usize) -> DVector<f64> {
        ones(n)
    }

    fn propose(&self, k: usize, inputs: &Responses) -> DVector<f64> {
        inputs.get(k - 1, 1).cloned().expect("A^{k-1}v1 is in H_{k-1}")
    }
}

/// Queries `e₁, e₂, …` regardless of the responses.
#[derive(Clone, Copy, Debug, Default)]
pub struct FixedDirections;

impl QueryStrategy for FixedDirections {
    fn name(&self) -> &str {
        "fixed-directions"
    }

    fn first(&self, n: usize) -> DVector<f64> {
        basis_vector(n, 0)
    }

    fn propose(&self, k: usize, inputs: &Responses) -> DVector<f64> {
        let n = inputs.vectors().next().map_or(1, |v| v.len());
        basis_vector(n, k - 1)
    }
}

/// Follows the response with the largest one-step growth `‖Aⁱv_j‖/‖A^{i−1}v_j‖`.
#[derive(Clone, Copy, Debug, Default)]
pub struct GreedyRayleigh;

impl QueryStrategy for GreedyRayleigh {
    fn name(&self) -> &str {
        "greedy-rayleigh"
    }

    fn first(&self, n: usize) -> DVector<f64> {
        DVector::from_fn(n, |i, _| (i + 1) as f64)
    }

    fn propose(&self, _k: usize, inputs: &Responses) -> DVector<f64> {
        let mut best: Option<(f64, &DVector<f64>)> = None;
        for ((i, j), v) in inputs.iter() {
            if i == 0 {
                continue;
            }
            let prev = inputs.get(i - 1, j).map_or(0.0, |p| p.norm());
            if prev == 0.0 {
                continue;
            }
            let ratio = v.norm() / prev;
            if best.is_none_or(|(b, _)| ratio > b) {
                best = Some((ratio, v));
            }
        }
        best.map(|(_, v)| v.clone()).expect("H_{k-1} holds at least one image")
    }
}

type FirstFn = dyn Fn(usize) -> DVector<f64> + Send + Sync;
type ProposeFn = dyn Fn(usize, &Responses) -> DVector<f64> + Send + Sync;

/// Strategy from a pair of closures.
pub struct FnStrategy {
    name: String,
    first: Box<FirstFn>,
    propose: Box<ProposeFn>,
}

impl FnStrategy {
    pub fn new(
        name: impl Into<String>,
        first: impl Fn(usize) -> DVector<f64> + Send + Sync + 'static,
        propose: impl Fn(usize, &Responses) -> DVector<f64> + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), first: Box::new(first), propose: Box::new(propose) }
    }
}

impl QueryStrategy for FnStrategy {
    fn name(&self) -> &str {
        &self.name
    }

    fn first(&self, n: usize) -> DVector<f64> {
        (self.first)(n)
    }

    fn propose(&self, k: usize, inputs: &Responses) -> DVector<f64> {
        (self.propose)(k, inputs)
    }
}

pub const STRATEGY_NAMES: [&str; 3] = ["power-method", "fixed-directions", "greedy-rayleigh"];

pub fn strategy_by_name(name: &str) -> Result<Arc<dyn QueryStrategy>> {
    match name {
        "power-method" => Ok(Arc::new(PowerMethod)),
        "fixed-directions" => Ok(Arc::new(FixedDirections)),
        "greedy-rayleigh" => Ok(Arc::new(GreedyRayleigh)),
        other => Err(Error::UnknownStrategy(other.to_string())),
    }
}
